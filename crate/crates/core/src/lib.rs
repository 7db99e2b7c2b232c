//! Secrecy analysis of a full-duplex MIMOME network.
//!
//! Alice (`n_a` antennas) sends secret streams to a full-duplex Bob (`n_b`
//! antennas) while an eavesdropper Eve (`n_e` antennas) listens from the edge of
//! a secured zone around Alice. The crate covers:
//!
//! - [`channel`]: geometry, channel draws and exact (instantaneous-CSI) rates.
//! - [`rmt`]: large-system (Shannon / eta transform) approximations of those rates.
//! - [`optimizer`]: successive convex approximation of the signal, artificial-noise
//!   and jamming powers.
//! - [`tolerance`]: the largest number of Eve antennas that still leaves a positive
//!   secrecy rate.
//! - [`anece`]: the two-phase anti-eavesdropping channel estimation scheme with
//!   MMSE estimation and mutual-information bounds.
//! - [`blind`]: Eve's blind maximum-likelihood detection and the resulting
//!   effective rate.
//!
//! All logarithms are base 2 and every random quantity is driven by an explicit
//! seed (see [`rng`]).

pub mod anece;
pub mod blind;
pub mod channel;
pub mod error;
pub mod linalg;
pub mod optimizer;
pub mod rmt;
pub mod rng;
pub mod tolerance;

pub use error::{Error, Result};
