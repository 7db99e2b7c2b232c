use mimome_core::channel::{worst_case_eve_position, ChannelRealization, NetworkConfig};
use mimome_core::optimizer::ScaSettings;
use mimome_core::tolerance::{
    fixed_allocation, fixed_margin, max_tolerable_ne_fixed, max_tolerable_ne_instantaneous,
    max_tolerable_ne_opt, optimized_margin,
};
use proptest::prelude::*;

fn cfg(n_a: usize, p: f64) -> NetworkConfig {
    NetworkConfig {
        n_a,
        n_b: n_a / 2,
        n_e: 1,
        p_a_max: p,
        p_b_max: p,
        ..NetworkConfig::default()
    }
}

#[test]
fn no_power_tolerates_no_eve_antennas() {
    let c = cfg(4, 0.0);
    let pos = worst_case_eve_position(&c);
    assert_eq!(max_tolerable_ne_fixed(&c, pos, 64).unwrap().value, 0);
    assert_eq!(
        max_tolerable_ne_opt(&c, pos, 2, 1, &ScaSettings::default(), 64)
            .unwrap()
            .value,
        0
    );
    let ch = ChannelRealization::sample(&c, 1, 0);
    let alloc = fixed_allocation(&c).unwrap();
    assert_eq!(
        max_tolerable_ne_instantaneous(&ch.legit, &alloc, &c, pos, 5, 1, 64)
            .unwrap()
            .value,
        0
    );
}

#[test]
fn optimized_powers_tolerate_at_least_as_many_antennas() {
    for n_a in [2, 4, 6] {
        let c = cfg(n_a, 1000.0);
        let pos = worst_case_eve_position(&c);
        let fixed = max_tolerable_ne_fixed(&c, pos, 512).unwrap();
        let opt = max_tolerable_ne_opt(&c, pos, 5, 3, &ScaSettings::default(), 512).unwrap();
        assert!(
            opt.value >= fixed.value,
            "n_a = {n_a}: opt {} < fixed {}",
            opt.value,
            fixed.value
        );
    }
}

#[test]
fn optimized_certificate_can_be_rechecked() {
    let c = cfg(4, 1000.0);
    let pos = worst_case_eve_position(&c);
    let settings = ScaSettings::default();
    let res = max_tolerable_ne_opt(&c, pos, 4, 9, &settings, 512).unwrap();
    assert!(res.certificate.is_consistent());
    if res.value > 0 {
        let (m, _) = optimized_margin(&c.with_n_e(res.value), pos, 4, 9, &settings).unwrap();
        assert_eq!(Some(m), res.certificate.at_value);
    }
    let (m, _) = optimized_margin(&c.with_n_e(res.value + 1), pos, 4, 9, &settings).unwrap();
    assert_eq!(Some(m), res.certificate.above_value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn fixed_certificate_matches_recomputed_margins(half in 1usize..=8, p_db in 0.0f64..40.0) {
        let c = cfg(2 * half, 10f64.powf(p_db / 10.0));
        let pos = worst_case_eve_position(&c);
        let res = max_tolerable_ne_fixed(&c, pos, 4096).unwrap();
        prop_assert!(res.certificate.is_consistent());
        if res.value > 0 {
            prop_assert!(fixed_margin(&c.with_n_e(res.value), pos).unwrap() > 0.0);
        }
        if !res.capped {
            prop_assert!(fixed_margin(&c.with_n_e(res.value + 1), pos).unwrap() <= 0.0);
        }
    }
}
