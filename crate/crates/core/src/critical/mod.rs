//! Critical points of finite Blaschke products and weighted sums over them.

mod rational;
mod roots;
mod sums;

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use rational::RationalForm;
pub(crate) use sums::csv_err;
pub use sums::{critical_sum, log_weighted_sum, protas_sum, SumSeries};

use crate::error::{Error, Result};
use crate::product::{write_points, BlaschkeProduct};
use roots::DistinctZeros;

pub const MAX_ITERATIONS: usize = 500;
pub const STEP_TOLERANCE: f64 = 1e-12;
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
/// A root of `W` counts as interior when `|w| < 1 - INTERIOR_MARGIN`.
pub const INTERIOR_MARGIN: f64 = 1e-12;
const INITIAL_RADIUS: f64 = 0.5;

/// Zeros of `B'` in the open disk, repeated by multiplicity, sorted by
/// decreasing modulus then argument.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CriticalSet {
    pub points: Vec<Complex64>,
    /// `|B'(z)|` at each point, from the product-form derivative.
    pub residuals: Vec<f64>,
}

impl CriticalSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Points in the zero-set text format.
    pub fn to_text(&self) -> String {
        write_points(self.points.iter().copied())
    }
}

fn sort_points(points: &mut [Complex64]) {
    points.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(a.arg().total_cmp(&b.arg())));
}

/// All `n - 1` critical points of a degree-`n` product.
///
/// Repeated zeros contribute their multiplicity minus one directly. The
/// remaining points are the interior roots of `W = P'Q - PQ'`, found by
/// simultaneous iteration and polished by Newton's method on `B'/B`.
pub fn critical_points(b: &BlaschkeProduct) -> Result<CriticalSet> {
    let n = b.degree();
    if n == 0 {
        return Err(Error::domain("critical points of a degree-0 product"));
    }
    let distinct = DistinctZeros::new(b.zeros().points());
    let mut fixed: Vec<Complex64> = Vec::new();
    for (&p, &m) in distinct.points.iter().zip(&distinct.mult) {
        fixed.extend(std::iter::repeat(p).take(m - 1));
    }
    let expected_free = distinct.points.len() - 1;

    let mut last_found = 0;
    let mut last_partial = Vec::new();
    let mut last_outcome = None;
    for attempt in 0..4 {
        let radius = INITIAL_RADIUS * (1.0 - 0.1 * attempt as f64);
        let phase = 0.4 + 0.77 * attempt as f64;
        let outcome = roots::aberth(&distinct, radius, phase, MAX_ITERATIONS, STEP_TOLERANCE);
        let interior: Vec<Complex64> = outcome
            .roots
            .iter()
            .filter(|w| w.norm() < 1.0 - INTERIOR_MARGIN)
            .map(|&w| roots::polish(&distinct, w))
            .filter(|w| w.norm() < 1.0)
            .collect();
        if interior.len() == expected_free {
            let mut points = fixed.clone();
            points.extend(interior);
            sort_points(&mut points);
            let residuals: Vec<f64> = points.iter().map(|&z| b.derivative(z).norm()).collect();
            let set = CriticalSet { points, residuals };
            if set.max_residual() < RESIDUAL_TOLERANCE {
                return Ok(set);
            }
            if outcome.converged {
                return Err(Error::NoConvergence {
                    iterations: outcome.iterations,
                    message: format!(
                        "residual {:.3e} exceeds {RESIDUAL_TOLERANCE:e} after refinement",
                        set.max_residual()
                    ),
                    partial: set.points,
                });
            }
        }
        last_found = interior_count(&outcome.roots) + fixed.len();
        last_partial = outcome.roots.clone();
        last_outcome = Some(outcome);
    }
    let outcome = last_outcome.expect("at least one attempt");
    if !outcome.converged {
        return Err(Error::NoConvergence {
            iterations: outcome.iterations,
            message: format!("max step stayed above {STEP_TOLERANCE:e}"),
            partial: last_partial,
        });
    }
    let winding = winding_count(b, 1.0 - INTERIOR_MARGIN.max(1e-9)).ok();
    Err(Error::CountMismatch {
        found: last_found,
        expected: n - 1,
        winding,
    })
}

fn interior_count(roots: &[Complex64]) -> usize {
    roots.iter().filter(|w| w.norm() < 1.0 - INTERIOR_MARGIN).count()
}

/// Largest admissible phase step between neighbouring contour nodes.
const MAX_PHASE_STEP: f64 = std::f64::consts::PI / 3.0;

/// Winding number of `B'` along `|z| = r`: the number of critical points in
/// `|z| < r`, by accumulating the phase change between `nodes` equispaced
/// points.
///
/// Fails as inconclusive when a phase step is too large to be resolved
/// (a critical point close to the contour, or too few nodes), or when the
/// accumulated phase is not within 0.1 of a whole turn.
pub fn argument_principle_count(b: &BlaschkeProduct, r: f64, nodes: usize) -> Result<i64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::domain(format!("contour radius must lie in (0, 1), got {r}")));
    }
    if nodes < 8 {
        return Err(Error::domain("argument principle needs at least 8 nodes"));
    }
    let values: Vec<Complex64> = (0..nodes)
        .into_par_iter()
        .map(|j| b.derivative(Complex64::from_polar(r, TAU * j as f64 / nodes as f64)))
        .collect();
    if values.iter().any(|v| v.norm() == 0.0 || !v.is_finite()) {
        return Err(Error::InconclusiveContour {
            radius: r,
            message: "B' vanishes on the contour".into(),
        });
    }
    let mut total = 0.0;
    let mut largest = 0.0f64;
    for j in 0..nodes {
        let step = (values[(j + 1) % nodes] / values[j]).arg();
        largest = largest.max(step.abs());
        total += step;
    }
    if largest > MAX_PHASE_STEP {
        return Err(Error::InconclusiveContour {
            radius: r,
            message: format!("phase step {largest:.3} rad with {nodes} nodes is unresolved"),
        });
    }
    let raw = total / TAU;
    let rounded = raw.round();
    if (raw - rounded).abs() >= 0.1 {
        return Err(Error::InconclusiveContour {
            radius: r,
            message: format!("winding {raw} is not near an integer"),
        });
    }
    Ok(rounded as i64)
}

/// [`argument_principle_count`] with node doubling from 1024 up to `2^22`
/// until two successive resolutions agree.
pub fn winding_count(b: &BlaschkeProduct, r: f64) -> Result<i64> {
    let mut nodes = 1024usize.max(16 * b.degree().next_power_of_two());
    let mut previous: Option<i64> = None;
    let mut last_err = None;
    while nodes <= 1 << 22 {
        match argument_principle_count(b, r, nodes) {
            Ok(w) => {
                if previous == Some(w) {
                    return Ok(w);
                }
                previous = Some(w);
            }
            Err(e @ Error::InconclusiveContour { .. }) => {
                previous = None;
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
        nodes *= 2;
    }
    Err(last_err.unwrap_or(Error::InconclusiveContour {
        radius: r,
        message: "node doubling did not settle".into(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::product::ZeroSequence;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn degree_one_has_none() {
        let b = BlaschkeProduct::from_reals(&[0.5]).unwrap();
        assert!(critical_points(&b).unwrap().is_empty());
        assert!(critical_points(&BlaschkeProduct::default()).is_err());
    }

    #[test]
    fn symmetric_pair_has_origin() {
        for a in [0.3, 0.5, 0.9] {
            let b = BlaschkeProduct::from_reals(&[a, -a]).unwrap();
            let cs = critical_points(&b).unwrap();
            assert_eq!(cs.len(), 1);
            assert!(cs.points[0].norm() < 1e-10, "a = {a}: {}", cs.points[0]);
        }
    }

    #[test]
    fn repeated_zero_is_critical() {
        let b = BlaschkeProduct::from_reals(&[0.5, 0.5, -0.3]).unwrap();
        let cs = critical_points(&b).unwrap();
        assert_eq!(cs.len(), 2);
        assert!(cs.points.iter().any(|&p| p == c(0.5, 0.0)));
        assert!(cs.max_residual() < RESIDUAL_TOLERANCE);
        let triple = BlaschkeProduct::from_reals(&[0.4, 0.4, 0.4]).unwrap();
        assert_eq!(critical_points(&triple).unwrap().points, vec![c(0.4, 0.0); 2]);
    }

    #[test]
    fn rotational_symmetry_gives_double_point() {
        // zeros a * cube roots of unity: B'(z) is a multiple of z^2
        let zeros: Vec<Complex64> = (0..3).map(|k| Complex64::from_polar(0.6, TAU * k as f64 / 3.0)).collect();
        let b = BlaschkeProduct::from_points(zeros).unwrap();
        let cs = critical_points(&b).unwrap();
        assert_eq!(cs.len(), 2);
        for p in &cs.points {
            assert!(p.norm() < 1e-6, "{p}");
        }
    }

    #[test]
    fn matches_wronskian_roots() {
        let b = BlaschkeProduct::from_points([c(0.3, 0.4), c(-0.5, 0.2), c(0.1, -0.8), c(0.7, 0.0)]).unwrap();
        let cs = critical_points(&b).unwrap();
        let w = b.rational().unwrap().wronskian();
        let scale: f64 = w.iter().map(|c| c.norm()).sum();
        for &p in &cs.points {
            assert!(rational::horner(&w, p).norm() < 1e-12 * scale);
            assert!(b.rational().unwrap().derivative(p).norm() < 1e-10);
        }
    }

    #[test]
    fn winding_examples() {
        let pair = BlaschkeProduct::from_reals(&[0.5, -0.5]).unwrap();
        assert_eq!(argument_principle_count(&pair, 0.9, 256).unwrap(), 1);
        let single = BlaschkeProduct::from_reals(&[0.5]).unwrap();
        assert_eq!(argument_principle_count(&single, 0.9, 256).unwrap(), 0);
        let b = BlaschkeProduct::from_points([c(0.6, 0.6), c(-0.7, 0.1), c(0.2, -0.9)]).unwrap();
        let cs = critical_points(&b).unwrap();
        let smallest = cs.points.iter().map(|p| p.norm()).fold(1.0, f64::min);
        assert_eq!(argument_principle_count(&b, smallest * 0.5, 256).unwrap(), 0);
        assert!(argument_principle_count(&b, 1.0, 256).is_err());
    }

    #[test]
    fn winding_flags_contour_through_critical_point() {
        let b = BlaschkeProduct::new(ZeroSequence::from_points([c(0.5, 0.3), c(-0.5, 0.3)]).unwrap());
        let cs = critical_points(&b).unwrap();
        assert_eq!(cs.len(), 1);
        let r = cs.points[0].norm();
        assert!(matches!(
            argument_principle_count(&b, r, 4096),
            Err(Error::InconclusiveContour { .. })
        ));
        assert_eq!(winding_count(&b, r * 1.01).unwrap(), 1);
        assert_eq!(winding_count(&b, r * 0.99).unwrap(), 0);
    }

    #[test]
    fn conjugate_symmetric_sets() {
        let base = [c(0.4, 0.5), c(-0.6, 0.2), c(0.8, 0.1)];
        let mut pts: Vec<Complex64> = base.to_vec();
        pts.extend(base.iter().map(|z| z.conj()));
        let b = BlaschkeProduct::from_points(pts).unwrap();
        let cs = critical_points(&b).unwrap();
        assert_eq!(cs.len(), 5);
        for p in &cs.points {
            assert!(cs.points.iter().any(|q| (q - p.conj()).norm() < 1e-9));
        }
    }
}
