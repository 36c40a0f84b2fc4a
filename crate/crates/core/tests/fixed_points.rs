use chandelier::phase::{analyze_point, orbit, scan, Axis, Grid, OrbitEnd};
use chandelier::recurrence::{f, f_prime};
use chandelier::roots::{fixed_points, StabilityClass};
use chandelier::CouplingParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_params(rng: &mut ChaCha8Rng) -> CouplingParams {
    CouplingParams::new(
        rng.gen_range(-3.0..=3.0),
        rng.gen_range(-3.0..=3.0),
        rng.gen_range(-3.0..=3.0),
        rng.gen_range(0.5..=10.0),
    )
    .unwrap()
}

fn three_roots() -> CouplingParams {
    CouplingParams::new(-1.0, 29.0, 5.3, 68.0).unwrap()
}

#[test]
fn sign_changes_of_f_minus_x_bracket_reported_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut draws = (0..40).map(|_| random_params(&mut rng)).collect::<Vec<_>>();
    draws.push(three_roots());
    for p in draws {
        let w = p.weights().unwrap();
        let report = fixed_points(&p).unwrap();
        let g = |x: f64| f(x, &w).ln() - x.ln();
        let grid: Vec<f64> = (0..10_000).map(|k| 10f64.powf(-6.0 + 12.0 * k as f64 / 9_999.0)).collect();
        let brackets: Vec<(f64, f64)> =
            grid.windows(2).filter(|s| g(s[0]).signum() != g(s[1]).signum()).map(|s| (s[0], s[1])).collect();
        let inside: Vec<f64> = report.positive.iter().map(|fp| fp.x).filter(|&x| (1e-6..=1e6).contains(&x)).collect();
        assert_eq!(brackets.len(), inside.len(), "{p:?}: {brackets:?} vs {inside:?}");
        for ((lo, hi), x) in brackets.iter().zip(&inside) {
            assert!(*lo <= *x && *x <= *hi, "{p:?}: root {x} outside [{lo}, {hi}]");
        }
    }
}

#[test]
fn vieta_relations_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..500 {
        let report = fixed_points(&random_params(&mut rng)).unwrap();
        let [c4, c3, _, _, c0] = report.quartic.coeffs;
        let roots: Vec<_> = report.roots.iter().map(|r| r.as_complex()).collect();
        let sum: num_complex::Complex64 = roots.iter().sum();
        let scale: f64 = roots.iter().map(|r| r.norm()).sum();
        assert!((sum + c3 / c4).norm() <= 1e-8 * scale, "{:?}", report.params);
        let product: num_complex::Complex64 = roots.iter().product();
        assert!((product - c0 / c4).norm() <= 1e-8 * (c0 / c4).abs(), "{:?}", report.params);
    }
}

#[test]
fn residuals_are_at_rounding_level() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..500 {
        let report = fixed_points(&random_params(&mut rng)).unwrap();
        for r in &report.roots {
            let z = r.as_complex().norm();
            let bound: f64 = report.quartic.coeffs.iter().rev().enumerate().map(|(k, c)| c.abs() * z.powi(k as i32)).sum();
            assert!(r.residual <= 1e-10 * bound, "{:?}: {r:?}", report.params);
        }
    }
}

#[test]
fn stability_class_predicts_local_dynamics() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut draws = (0..300).map(|_| random_params(&mut rng)).collect::<Vec<_>>();
    draws.push(three_roots());
    let (mut stable_seen, mut unstable_seen) = (0, 0);
    for p in draws {
        let w = p.weights().unwrap();
        let report = fixed_points(&p).unwrap();
        for fp in &report.positive {
            let d = fp.f_prime.abs();
            for sign in [-1.0, 1.0] {
                let x0 = fp.x * (1.0 + sign * 0.01);
                let start = (x0 - fp.x).abs();
                if d < 0.9 {
                    let mut x = x0;
                    for _ in 0..50 {
                        x = f(x, &w);
                    }
                    assert!((x - fp.x).abs() < start, "{p:?}: stable point {} repels", fp.x);
                    stable_seen += 1;
                } else if d > 1.1 {
                    assert!((f(x0, &w) - fp.x).abs() > start, "{p:?}: unstable point {} attracts", fp.x);
                    unstable_seen += 1;
                }
            }
        }
    }
    assert!(stable_seen > 0 && unstable_seen > 0);
}

#[test]
fn orbits_leave_the_unstable_middle_point() {
    let report = fixed_points(&three_roots()).unwrap();
    let middle = report.positive[1];
    assert_eq!(middle.class, StabilityClass::Unstable);
    let (low, high) = (report.positive[0].x, report.positive[2].x);
    for (factor, target) in [(1.0 - 1e-3, low), (1.0 + 1e-3, high)] {
        let o = orbit(&three_roots(), middle.x * factor, 10_000).unwrap();
        match o.end {
            OrbitEnd::Converged { x } => {
                assert!((x - target).abs() < 1e-6, "converged to {x}, expected {target}");
                assert!((x - middle.x).abs() > 0.1);
            }
            other => panic!("orbit did not settle: {other}"),
        }
    }
}

#[test]
fn negative_prolonged_coupling_gives_one_fixed_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for _ in 0..500 {
        let p = CouplingParams::new(
            rng.gen_range(-3.0..=3.0),
            rng.gen_range(-3.0..-0.01),
            rng.gen_range(-3.0..=3.0),
            rng.gen_range(0.5..=10.0),
        )
        .unwrap();
        let w = p.weights().unwrap();
        let report = fixed_points(&p).unwrap();
        assert_eq!(report.n_positive(), 1, "{p:?}");
        assert!(f_prime(report.positive[0].x, &w) < 0.0);
    }
}

#[test]
fn scan_cells_equal_pointwise_analysis() {
    let grid = Grid {
        j: Axis { start: -2.0, end: 2.0, n: 4 },
        jp: Axis { start: -1.0, end: 30.0, n: 5 },
        jsl: Axis { start: -1.0, end: 5.3, n: 3 },
        t: Axis { start: 1.0, end: 70.0, n: 4 },
    };
    let cells = scan(&grid).unwrap();
    assert_eq!(cells.len(), grid.len());
    for (i, cell) in cells.iter().enumerate() {
        assert_eq!(*cell, analyze_point(&grid.params_at(i)).unwrap());
    }
}
