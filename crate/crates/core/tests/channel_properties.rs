use mimome_core::channel::{
    exact_rate_bob, exact_rate_eve, projected_rate_bob, secrecy_rate, ChannelRealization,
    LargeScale, NetworkConfig, PowerAllocation,
};
use mimome_core::linalg::{gram, identity, inverse_hpd, log2_det_hpd, real};
use proptest::prelude::*;

// (n_a, n_b, n_e) with n_a > n_b >= 1
fn arrays() -> impl Strategy<Value = (usize, usize, usize)> {
    (2usize..=8).prop_flat_map(|n_a| (Just(n_a), 1..n_a, 1usize..=12))
}

fn cfg(n_a: usize, n_b: usize, n_e: usize, rho: f64) -> NetworkConfig {
    NetworkConfig {
        n_a,
        n_b,
        n_e,
        rho,
        ..NetworkConfig::default()
    }
}

fn allocation(r: usize, weights: &[f64], p_n: f64, p_b: f64, budget: f64) -> PowerAllocation {
    let total: f64 = weights[..r].iter().sum::<f64>() + p_n;
    let s = budget / total.max(1e-12);
    let q = weights[..r].iter().map(|w| w * s).collect();
    PowerAllocation::new(q, p_n * s, p_b).unwrap()
}

// Sylvester form log|I_r + a Q^{1/2} A1^H C_E^{-1} A1 Q^{1/2}|, built from the raw channels.
fn eve_rate_sylvester(ch: &ChannelRealization, alloc: &PowerAllocation, gains: LargeScale) -> f64 {
    let r = alloc.r();
    let part = ch.legit.partition(r);
    let n_e = ch.eve.a.nrows();
    let mut c_e =
        identity(n_e) + gram(&ch.eve.b).scale(gains.b * alloc.p_b() / ch.eve.b.ncols() as f64);
    if part.v2.ncols() > 0 {
        c_e += gram(&(&ch.eve.a * &part.v2)).scale(gains.a * alloc.p_n() / part.v2.ncols() as f64);
    }
    let mut a1 = &ch.eve.a * &part.v1;
    for (j, q) in alloc.q().iter().enumerate() {
        let mut col = a1.column_mut(j);
        col *= real((gains.a * q).sqrt());
    }
    let inner = identity(r) + a1.adjoint() * inverse_hpd(&c_e, "C_E").unwrap() * &a1;
    log2_det_hpd(&inner, "Sylvester").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn projected_bob_rate_agrees_when_it_is_sufficient(
        (n_a, n_b, n_e) in arrays(),
        seed in any::<u64>(),
        full_rank in any::<bool>(),
        w in prop::collection::vec(0.05f64..1.0, 8),
        p_n in 0.0f64..1.0,
        p_b in 0.0f64..1000.0,
    ) {
        // either r = n_b, or no self-interference
        let (r, rho) = if full_rank { (n_b, 0.001) } else { (1.max(n_b / 2), 0.0) };
        let c = cfg(n_a, n_b, n_e, rho);
        let alloc = allocation(r, &w, p_n, p_b, c.p_a_max);
        let ch = ChannelRealization::sample(&c, seed, 0);
        let exact = exact_rate_bob(&ch.legit, &alloc, &c).unwrap();
        let projected = projected_rate_bob(&ch.legit, &alloc, &c).unwrap();
        prop_assert!((exact - projected).abs() <= 1e-9 * exact.max(1.0), "{exact} vs {projected}");
    }

    #[test]
    fn projection_never_beats_the_full_observation(
        (n_a, n_b, n_e) in arrays().prop_filter("needs r < n_b", |t| t.1 >= 2),
        seed in any::<u64>(),
        w in prop::collection::vec(0.05f64..1.0, 8),
        p_b in 1.0f64..1000.0,
    ) {
        let c = cfg(n_a, n_b, n_e, 0.01);
        let alloc = allocation(n_b - 1, &w, 0.3, p_b, c.p_a_max);
        let ch = ChannelRealization::sample(&c, seed, 0);
        let exact = exact_rate_bob(&ch.legit, &alloc, &c).unwrap();
        let projected = projected_rate_bob(&ch.legit, &alloc, &c).unwrap();
        prop_assert!(exact >= projected - 1e-9);
    }

    #[test]
    fn eve_rate_matches_the_sylvester_form(
        (n_a, n_b, n_e) in arrays(),
        seed in any::<u64>(),
        w in prop::collection::vec(0.05f64..1.0, 8),
        p_n in 0.0f64..1.0,
        p_b in 0.0f64..1000.0,
        a in 0.01f64..10.0,
        b in 0.01f64..10.0,
    ) {
        let c = cfg(n_a, n_b, n_e, 0.001);
        let r = 1 + (seed as usize) % n_b;
        let alloc = allocation(r, &w, p_n, p_b, c.p_a_max);
        let gains = LargeScale { a, b };
        let ch = ChannelRealization::sample(&c, seed, 1);
        let direct = exact_rate_eve(&ch.legit, &ch.eve, &alloc, &c, gains).unwrap();
        let sylvester = eve_rate_sylvester(&ch, &alloc, gains);
        prop_assert!((direct - sylvester).abs() <= 1e-9 * direct.max(1.0), "{direct} vs {sylvester}");
    }

    #[test]
    fn rates_are_monotone_in_each_power(
        (n_a, n_b, n_e) in arrays(),
        seed in any::<u64>(),
        w in prop::collection::vec(0.05f64..1.0, 8),
        which in 0usize..8,
        bump in 0.01f64..100.0,
    ) {
        let c = cfg(n_a, n_b, n_e, 0.001);
        let r = n_b;
        let base = allocation(r, &w, 0.5, 50.0, c.p_a_max / 2.0);
        let ch = ChannelRealization::sample(&c, seed, 2);
        let g = LargeScale { a: 0.5, b: 2.0 };

        let mut q = base.q().to_vec();
        q[which % r] += bump;
        let more_q = PowerAllocation::new(q, base.p_n(), base.p_b()).unwrap();
        let bob = |al: &PowerAllocation| exact_rate_bob(&ch.legit, al, &c).unwrap();
        prop_assert!(bob(&more_q) >= bob(&base) - 1e-9);

        let eve = |al: &PowerAllocation| exact_rate_eve(&ch.legit, &ch.eve, al, &c, g).unwrap();
        let more_pb = PowerAllocation::new(base.q().to_vec(), base.p_n(), base.p_b() + bump).unwrap();
        let more_pn = PowerAllocation::new(base.q().to_vec(), base.p_n() + bump, base.p_b()).unwrap();
        prop_assert!(eve(&more_pb) <= eve(&base) + 1e-9);
        prop_assert!(eve(&more_pn) <= eve(&base) + 1e-9);
    }

    #[test]
    fn artificial_noise_does_not_reach_bob_without_self_interference(
        (n_a, n_b, n_e) in arrays(),
        seed in any::<u64>(),
        w in prop::collection::vec(0.05f64..1.0, 8),
        p_n in 0.0f64..500.0,
    ) {
        let c = cfg(n_a, n_b, n_e, 0.0);
        let ch = ChannelRealization::sample(&c, seed, 3);
        let q: Vec<f64> = w[..n_b].iter().map(|x| x * 10.0).collect();
        let quiet = PowerAllocation::new(q.clone(), 0.0, 20.0).unwrap();
        let noisy = PowerAllocation::new(q, p_n, 20.0).unwrap();
        let a = exact_rate_bob(&ch.legit, &quiet, &c).unwrap();
        let b = exact_rate_bob(&ch.legit, &noisy, &c).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn rates_and_secrecy_are_nonnegative(
        (n_a, n_b, n_e) in arrays(),
        seed in any::<u64>(),
        w in prop::collection::vec(0.0f64..1.0, 8),
        p_n in 0.0f64..1.0,
        p_b in 0.0f64..1000.0,
    ) {
        let c = cfg(n_a, n_b, n_e, 0.001);
        let alloc = allocation(n_b, &w, p_n, p_b, c.p_a_max);
        let ch = ChannelRealization::sample(&c, seed, 4);
        let ab = exact_rate_bob(&ch.legit, &alloc, &c).unwrap();
        let ae = exact_rate_eve(&ch.legit, &ch.eve, &alloc, &c, LargeScale::UNIT).unwrap();
        prop_assert!(ab >= 0.0 && ae >= 0.0);
        prop_assert!(secrecy_rate(ab, ae) >= 0.0);
    }
}
