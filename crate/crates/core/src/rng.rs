//! Seeded, counter-based random streams.
//!
//! Every Monte Carlo trial draws from its own ChaCha stream selected by
//! `(seed, index)`, so results do not depend on evaluation order or on the number
//! of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, CMat};

pub type StreamRng = ChaCha20Rng;

/// Independent stream `index` of the generator family selected by `seed`.
pub fn substream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Combines a tag and a list of counters into one stream index.
pub fn stream_index(tag: u64, counters: &[u64]) -> u64 {
    counters
        .iter()
        .fold(splitmix(tag), |acc, &k| splitmix(acc ^ splitmix(k)))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A `CN(0, 1)` sample.
pub fn cn<R: Rng + ?Sized>(rng: &mut R) -> crate::linalg::C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// A `rows x cols` matrix with i.i.d. `CN(0, 1)` entries, filled column by column.
pub fn cn_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| cn(rng))
}

/// Haar-distributed `n x n` unitary.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let qr = cn_matrix(rng, n, n).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            c(1.0, 0.0)
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;

    #[test]
    fn substreams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| substream(7, 3).random()).collect();
        let b: Vec<u64> = (0..4).map(|_| substream(7, 3).random()).collect();
        assert_eq!(a, b);
        let x: u64 = substream(7, 3).random();
        let y: u64 = substream(7, 4).random();
        assert_ne!(x, y);
    }

    #[test]
    fn cn_has_unit_variance() {
        let mut rng = substream(11, 0);
        let n = 200_000;
        let (mut m, mut v, mut re2) = (c(0.0, 0.0), 0.0, 0.0);
        for _ in 0..n {
            let z = cn(&mut rng);
            m += z;
            v += z.norm_sqr();
            re2 += z.re * z.re;
        }
        let nf = n as f64;
        assert!((m / nf).norm() < 0.01);
        assert!((v / nf - 1.0).abs() < 0.01);
        assert!((re2 / nf - 0.5).abs() < 0.01);
    }

    #[test]
    fn haar_is_unitary() {
        let mut rng = substream(12, 0);
        let q = haar_unitary(&mut rng, 5);
        assert!((q.adjoint() * &q - identity(5)).norm() < 1e-12);
    }

    #[test]
    fn stream_index_depends_on_all_parts() {
        assert_ne!(stream_index(1, &[2, 3]), stream_index(1, &[3, 2]));
        assert_ne!(stream_index(1, &[2]), stream_index(2, &[2]));
    }
}
