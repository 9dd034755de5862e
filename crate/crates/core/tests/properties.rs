use std::f64::consts::PI;

use blab::bounds::{chord_check, lemma_lhs, schwarz_pick_check, three_point_check};
use blab::critical::{critical_points, winding_count};
use blab::means::{hardy_mean, nodes_for};
use blab::product::truncation_tail;
use blab::regions::{sample_zeros, RadialLaw};
use blab::{BlaschkeProduct, BoundarySet, ModelFunction, StolzSpec, ZeroSequence};
use num_complex::Complex64;
use proptest::prelude::*;

fn model() -> impl Strategy<Value = ModelFunction> {
    prop_oneof![
        Just(ModelFunction::Linear),
        (1.0f64..4.0).prop_map(|gamma| ModelFunction::TruncatedPower { gamma }),
        (0.3f64..3.0).prop_map(|rho| ModelFunction::ExpTangential { rho }),
    ]
}

fn disk_point(max: f64) -> impl Strategy<Value = Complex64> {
    (0.0f64..1.0, -PI..PI).prop_map(move |(u, t)| Complex64::from_polar(max * u.sqrt(), t))
}

fn zero_set(max_len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((1e-3f64..0.999, -PI..PI).prop_map(|(r, t)| Complex64::from_polar(r, t)), 1..max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn unimodular_on_circle(zeros in zero_set(30), theta in -PI..PI) {
        let b = BlaschkeProduct::from_points(zeros).unwrap();
        let v = b.eval(Complex64::from_polar(1.0, theta));
        prop_assert!((v.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn schwarz_pick_holds(zeros in zero_set(30), z in disk_point(0.999_999)) {
        let b = BlaschkeProduct::from_points(zeros).unwrap();
        prop_assert!(schwarz_pick_check(&b, z).unwrap());
    }

    #[test]
    fn derivative_is_sum_of_factor_terms(zeros in zero_set(12), z in disk_point(0.95)) {
        // independent evaluation: sum_n b_n' prod_{m != n} b_m
        let b = BlaschkeProduct::from_points(zeros.clone()).unwrap();
        let seq = ZeroSequence::from_points(zeros).unwrap();
        let factors: Vec<Complex64> = seq.zeros().iter().map(|a| a.factor(z)).collect();
        let mut sum = Complex64::new(0.0, 0.0);
        for (n, a) in seq.zeros().iter().enumerate() {
            let others: Complex64 = factors.iter().enumerate().filter(|(m, _)| *m != n).map(|(_, f)| *f).product();
            sum += a.factor_derivative(z) * others;
        }
        prop_assert!((b.derivative(z) - sum).norm() <= 1e-10 * (1.0 + sum.norm()));
    }

    #[test]
    fn defect_matches_modulus(zeros in zero_set(10), z in disk_point(0.9)) {
        let b = BlaschkeProduct::from_points(zeros).unwrap();
        let direct = 1.0 - b.eval(z).norm_sqr();
        prop_assert!((b.defect(z) - direct).abs() < 1e-12);
    }

    #[test]
    fn tail_bounds_truncation_error(zeros in zero_set(20), split in 0usize..20, z in disk_point(0.9)) {
        let seq = ZeroSequence::from_points(zeros).unwrap();
        let split = split.min(seq.len());
        let full = BlaschkeProduct::new(seq.clone());
        let head = BlaschkeProduct::new(seq.truncate(split));
        let tail = truncation_tail(&seq.tail(split), z).unwrap();
        prop_assert!((full.eval(z) - head.eval(z)).norm() <= tail + 1e-12);
    }

    #[test]
    fn three_point_inequality(phi in model(), x in 0.0f64..3.0, y in 0.0f64..3.0, u in 0.0f64..3.0) {
        prop_assert!(three_point_check(&phi, x, y, u).unwrap());
    }

    #[test]
    fn chord_inequality(z in disk_point(0.999_999), lambda in disk_point(0.999_999), t in -PI..PI) {
        prop_assert!(chord_check(z, lambda, Complex64::from_polar(1.0, t)));
    }

    #[test]
    fn model_constant_certifies_linear_majorant(phi in model(), x in 1e-6f64..50.0) {
        prop_assert!(phi.eval(x).unwrap() <= phi.constant() * x * (1.0 + 1e-12));
    }

    #[test]
    fn model_is_nondecreasing(phi in model(), x in 0.0f64..100.0, dx in 0.0f64..10.0) {
        prop_assert!(phi.eval(x).unwrap() <= phi.eval(x + dx).unwrap());
    }

    #[test]
    fn lemma_holds_at_region_points(
        phi in model(),
        k in prop::sample::select(vec![0.5, 1.0, 2.0, 4.0]),
        angle in -PI..PI,
        gap_exp in 0.0f64..8.0,
        frac in -1.0f64..1.0,
        z in disk_point(1.0),
    ) {
        let spec = StolzSpec::vertex(phi, angle, k).unwrap();
        let gap = 10f64.powf(-gap_exp);
        if let Some(width) = spec.angular_halfwidth(gap) {
            let lambda = Complex64::from_polar(1.0 - gap, angle + frac * width);
            if lambda.norm() < 1.0 && spec.contains(lambda).unwrap() {
                let t = Complex64::from_polar(1.0, angle);
                prop_assert!(lemma_lhs(z, t, lambda, &phi) <= spec.lemma_bound() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn halfwidth_is_the_membership_edge(
        phi in model(),
        k in 0.5f64..4.0,
        gap in 1e-4f64..0.9,
    ) {
        let spec = StolzSpec::vertex(phi, 0.0, k).unwrap();
        if let Some(width) = spec.angular_halfwidth(gap) {
            if width < PI {
                let inside = Complex64::from_polar(1.0 - gap, width * (1.0 - 1e-6));
                let outside = Complex64::from_polar(1.0 - gap, width * (1.0 + 1e-6) + 1e-12);
                prop_assert!(spec.contains(inside).unwrap());
                prop_assert!(!spec.contains(outside).unwrap());
            }
        }
    }

    #[test]
    fn distance_matches_brute_force(
        angles in prop::collection::vec(-PI..PI, 1..5),
        arc_start in -PI..PI,
        arc_len in 0.0f64..2.0,
        z in disk_point(0.99),
    ) {
        let spec = blab::regions::BoundarySetSpec { arcs: vec![[arc_start, arc_start + arc_len]], points: angles, cantor: None };
        let set = BoundarySet::from_spec(spec).unwrap();
        let mut brute = f64::INFINITY;
        for &[a, b] in set.components() {
            for j in 0..=2000 {
                let t = a + (b - a) * j as f64 / 2000.0;
                brute = brute.min((z - Complex64::from_polar(1.0, t)).norm());
            }
        }
        let d = set.distance(z);
        prop_assert!(d <= brute + 1e-12);
        prop_assert!(brute - d <= 2.0 * PI / 2000.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn critical_count_and_residuals(zeros in zero_set(25)) {
        let b = BlaschkeProduct::from_points(zeros).unwrap();
        let cs = critical_points(&b).unwrap();
        prop_assert_eq!(cs.len(), b.degree() - 1);
        prop_assert!(cs.max_residual() < 1e-8);
        prop_assert!(cs.points.iter().all(|c| c.norm() < 1.0));
    }

    #[test]
    fn critical_count_matches_winding(zeros in prop::collection::vec((0.05f64..0.95, -PI..PI), 2..15)) {
        let b = BlaschkeProduct::from_points(zeros.iter().map(|&(r, t)| Complex64::from_polar(r, t))).unwrap();
        let cs = critical_points(&b).unwrap();
        let radius = 1.0 - 1e-6;
        prop_assert_eq!(winding_count(&b, radius).unwrap(), cs.len() as i64);
    }

    #[test]
    fn conjugate_symmetric_critical_sets(zeros in prop::collection::vec((0.05f64..0.95, 0.05f64..3.0), 1..8)) {
        let mut pts = Vec::new();
        for &(r, t) in &zeros {
            pts.push(Complex64::from_polar(r, t));
            pts.push(Complex64::from_polar(r, -t));
        }
        let cs = critical_points(&BlaschkeProduct::from_points(pts).unwrap()).unwrap();
        for c in &cs.points {
            prop_assert!(cs.points.iter().any(|d| (d - c.conj()).norm() < 1e-9));
        }
    }

    #[test]
    fn sampled_zeros_lie_in_region(
        phi in model(),
        seed in any::<u64>(),
        n in 1usize..60,
        s in 1.2f64..3.0,
    ) {
        let spec = StolzSpec::new(phi, BoundarySet::points(&[0.0, 2.0]).unwrap(), 2.0).unwrap();
        let zeros = sample_zeros(&spec, n, seed, RadialLaw::Power { s }).unwrap();
        prop_assert_eq!(zeros.len(), n);
        prop_assert!(zeros.zeros().iter().all(|z| spec.contains_zero(z)));
        prop_assert_eq!(zeros, sample_zeros(&spec, n, seed, RadialLaw::Power { s }).unwrap());
    }

    #[test]
    fn hardy_means_grow_with_radius(
        zeros in zero_set(8),
        p in prop::sample::select(vec![0.2, 0.5, 1.0, 2.0]),
        r0 in 0.1f64..0.9,
        step in 0.01f64..0.09,
    ) {
        let b = BlaschkeProduct::from_points(zeros).unwrap();
        let r1 = r0 + step;
        let m0 = hardy_mean(&b, p, r0, nodes_for(b.degree(), r1)).unwrap();
        let m1 = hardy_mean(&b, p, r1, nodes_for(b.degree(), r1)).unwrap();
        prop_assert!(m0 <= m1 * (1.0 + 1e-9) + 1e-6 * m1, "{} > {}", m0, m1);
    }
}
