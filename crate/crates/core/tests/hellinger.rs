use priorsens_core::density::linspace;
use priorsens_core::{
    calibrate, hellinger, hellinger_gamma, hellinger_grid, hellinger_normal, inverse_calibrate,
    tabulate_pair, trapezoid, Family, ParamPoint, PriorSpec, Scale,
};
use proptest::prelude::*;

// Independent adaptive quadrature of the Bhattacharyya integral.
const NORMAL_0_1_VS_1_4: f64 = 0.517_402_118_607_196;
const GAMMA_2_1_VS_4_2: f64 = 0.179_722_977_190_181;

fn log_uniform() -> impl Strategy<Value = f64> {
    (-2.0f64..2.0).prop_map(|e| 10f64.powf(e))
}

fn point() -> impl Strategy<Value = ParamPoint> {
    (log_uniform(), log_uniform()).prop_map(|(a, b)| ParamPoint::new(a, b))
}

#[test]
fn normal_closed_form_matches_trapezoid_oracle() {
    let x = linspace(-12.0, 12.0, 200_001);
    let n0 = PriorSpec::normal(0.0, 1.0).unwrap();
    let n1 = PriorSpec::normal(1.0, 4.0).unwrap();
    let f: Vec<f64> = x
        .iter()
        .map(|&v| {
            (n0.density(v, Scale::Natural).unwrap() * n1.density(v, Scale::Natural).unwrap()).sqrt()
        })
        .collect();
    let oracle = (1.0 - trapezoid(&x, &f)).sqrt();
    let h = hellinger_normal(n0.point(), n1.point()).unwrap();
    assert!((h - oracle).abs() < 1e-9, "{h} vs {oracle}");
    assert!((h - NORMAL_0_1_VS_1_4).abs() < 1e-12);
}

#[test]
fn gamma_closed_form_matches_trapezoid_oracle() {
    let x = linspace(0.0, 200.0, 1_000_001);
    let g0 = PriorSpec::gamma(2.0, 1.0).unwrap();
    let g1 = PriorSpec::gamma(4.0, 2.0).unwrap();
    let f: Vec<f64> = x
        .iter()
        .map(|&v| {
            (g0.density(v, Scale::Natural).unwrap() * g1.density(v, Scale::Natural).unwrap()).sqrt()
        })
        .collect();
    let oracle = (1.0 - trapezoid(&x, &f)).sqrt();
    let h = hellinger_gamma(g0.point(), g1.point()).unwrap();
    assert!((h - oracle).abs() < 1e-9, "{h} vs {oracle}");
    assert!((h - GAMMA_2_1_VS_4_2).abs() < 1e-12);

    let h = hellinger_gamma(ParamPoint::new(1.0, 0.34), ParamPoint::new(1.0, 0.68)).unwrap();
    let g0 = PriorSpec::gamma(1.0, 0.34).unwrap();
    let g1 = PriorSpec::gamma(1.0, 0.68).unwrap();
    let f: Vec<f64> = x
        .iter()
        .map(|&v| {
            (g0.density(v, Scale::Natural).unwrap() * g1.density(v, Scale::Natural).unwrap()).sqrt()
        })
        .collect();
    assert!((h - (1.0 - trapezoid(&x, &f)).sqrt()).abs() < 1e-8);
}

#[test]
fn gamma_grid_distance_is_invariant_to_the_log_transform() {
    let pairs = [
        ((1.0, 0.34), (1.0, 0.68)),
        ((2.0, 1.0), (4.0, 2.0)),
        ((5.0, 0.1), (5.5, 0.09)),
        ((1.0, 0.005), (1.1, 0.006)),
    ];
    for ((a0, b0), (a1, b1)) in pairs {
        let p0 = PriorSpec::gamma(a0, b0).unwrap();
        let p1 = PriorSpec::gamma(a1, b1).unwrap();
        let (n0, n1) = tabulate_pair(&p0, &p1, Scale::Natural, 4001).unwrap();
        let (l0, l1) = tabulate_pair(&p0, &p1, Scale::LogParameter, 4001).unwrap();
        let natural = hellinger_grid(&n0, &n1).unwrap();
        let log = hellinger_grid(&l0, &l1).unwrap();
        assert!((natural - log).abs() <= 2e-4, "{natural} vs {log}");
    }
}

#[test]
fn small_shape_pairs_keep_their_mass_near_the_origin() {
    let p0 = ParamPoint::new(0.028_5, 25.9);
    let p1 = ParamPoint::new(0.139, 0.046_7);
    let exact = hellinger_gamma(p0, p1).unwrap();
    let s0 = PriorSpec::gamma(p0.gamma1, p0.gamma2).unwrap();
    let s1 = PriorSpec::gamma(p1.gamma1, p1.gamma2).unwrap();
    let (n0, n1) = tabulate_pair(&s0, &s1, Scale::Natural, 4001).unwrap();
    assert!((hellinger_grid(&n0, &n1).unwrap() - exact).abs() < 1e-3);
    let (l0, l1) = tabulate_pair(&s0, &s1, Scale::LogParameter, 4001).unwrap();
    assert!((hellinger_grid(&l0, &l1).unwrap() - exact).abs() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analytic_distance_is_symmetric_and_bounded(p0 in point(), p1 in point()) {
        for family in [Family::Normal, Family::Gamma] {
            let a = hellinger(family, p0, p1).unwrap();
            let b = hellinger(family, p1, p0).unwrap();
            prop_assert_eq!(a, b);
            prop_assert!((0.0..1.0).contains(&a) || a == 1.0 && p0 != p1);
            prop_assert_eq!(hellinger(family, p0, p0).unwrap(), 0.0);
            if p0 != p1 {
                prop_assert!(a > 0.0);
            }
        }
    }

    #[test]
    fn grid_distance_is_symmetric(p0 in point(), p1 in point()) {
        let s0 = PriorSpec::normal(p0.gamma1, p0.gamma2).unwrap();
        let s1 = PriorSpec::normal(p1.gamma1, p1.gamma2).unwrap();
        let (g0, g1) = tabulate_pair(&s0, &s1, Scale::Natural, 1001).unwrap();
        let a = hellinger_grid(&g0, &g1).unwrap();
        let b = hellinger_grid(&g1, &g0).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert_eq!(hellinger_grid(&g0, &g0).unwrap(), 0.0);
    }

    #[test]
    fn analytic_and_grid_distances_agree(p0 in point(), p1 in point()) {
        let normal = (PriorSpec::normal(p0.gamma1, p0.gamma2).unwrap(), PriorSpec::normal(p1.gamma1, p1.gamma2).unwrap(), Scale::Natural);
        let gamma = (PriorSpec::gamma(p0.gamma1, p0.gamma2).unwrap(), PriorSpec::gamma(p1.gamma1, p1.gamma2).unwrap(), Scale::LogParameter);
        for (s0, s1, scale) in [normal, gamma] {
            let (g0, g1) = tabulate_pair(&s0, &s1, scale, 4001).unwrap();
            let grid = hellinger_grid(&g0, &g1).unwrap();
            let exact = hellinger(s0.family(), p0, p1).unwrap();
            prop_assert!((grid - exact).abs() <= 1e-5, "{:?} {:?}: {} vs {}", s0, s1, grid, exact);
        }
    }

    #[test]
    fn calibration_round_trips(mu in 0.0f64..8.0) {
        let h = inverse_calibrate(mu).unwrap();
        prop_assert!((calibrate(h).unwrap() - mu).abs() <= 1e-12 * mu.max(1.0));
    }

    #[test]
    fn calibration_is_monotone(h0 in 0.0f64..0.999, h1 in 0.0f64..0.999) {
        let (lo, hi) = if h0 <= h1 { (h0, h1) } else { (h1, h0) };
        prop_assert!(calibrate(lo).unwrap() <= calibrate(hi).unwrap());
    }
}
