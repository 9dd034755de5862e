use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BoundarySet, ModelFunction};
use crate::error::{Error, Result};
use crate::product::{Zero, ZeroSequence};
use crate::rng;

/// Retry budget per zero when placing angles.
pub const MAX_ANGLE_ATTEMPTS: usize = 1000;

/// Stolz-type region `S(E, K) = {lambda : phi(d(lambda, E)) <= K (1 - |lambda|)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct StolzSpec {
    model: ModelFunction,
    set: BoundarySet,
    k: f64,
}

impl StolzSpec {
    pub fn new(model: ModelFunction, set: BoundarySet, k: f64) -> Result<Self> {
        model.validate()?;
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::domain(format!("region constant K must be > 0, got {k}")));
        }
        Ok(Self { model, set, k })
    }

    /// Single-vertex region `S(t, K)` with `t = e^{i angle}`.
    pub fn vertex(model: ModelFunction, angle: f64, k: f64) -> Result<Self> {
        Self::new(model, BoundarySet::point(angle)?, k)
    }

    pub fn model(&self) -> &ModelFunction {
        &self.model
    }

    pub fn set(&self) -> &BoundarySet {
        &self.set
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `2C + K`, the bound in the vertex lemma.
    pub fn lemma_bound(&self) -> f64 {
        2.0 * self.model.constant() + self.k
    }

    /// Membership test `phi(d(lambda, E)) <= K (1 - |lambda|)`.
    pub fn contains(&self, lambda: Complex64) -> Result<bool> {
        let r = lambda.norm();
        if !(r < 1.0) {
            return Err(Error::domain(format!("region membership needs |lambda| < 1, got {r}")));
        }
        Ok(self.admits(lambda, 1.0 - r))
    }

    /// Membership of a stored zero, using its exact gap.
    pub fn contains_zero(&self, zero: &Zero) -> bool {
        self.admits(zero.point(), zero.gap())
    }

    fn admits(&self, lambda: Complex64, gap: f64) -> bool {
        self.model.value(self.set.distance(lambda)) <= self.k * gap
    }

    /// Largest angular offset `delta` such that `(1 - gap) e^{i(t + delta)}`
    /// stays in the vertex region at `t`; `None` when no point at this radius does.
    pub fn angular_halfwidth(&self, gap: f64) -> Option<f64> {
        let reach = self.model.inverse(self.k * gap);
        let r = 1.0 - gap;
        if reach.is_infinite() || reach >= 1.0 + r {
            return Some(PI);
        }
        if reach < gap {
            return None;
        }
        // |t - r e^{i delta}|^2 = gap^2 + 4 r sin^2(delta / 2)
        let s = ((reach - gap) * (reach + gap) / (4.0 * r)).sqrt().min(1.0);
        Some(2.0 * s.asin())
    }

    /// Points on the boundary curve `phi(|t - lambda|) = K (1 - |lambda|)` of
    /// the vertex region at `t = e^{i vertex_angle}`, one per ray from `t`.
    ///
    /// Rays leave `t` at angles spread evenly over `(-pi/2, pi/2)` from the
    /// inward normal. Each ray is scanned from the far side of the disk towards
    /// `t` and the outermost crossing is refined by bisection; a ray that never
    /// enters the region yields `t` itself.
    pub fn region_boundary(&self, vertex_angle: f64, resolution: usize) -> Result<Vec<Complex64>> {
        if resolution < 2 {
            return Err(Error::domain("region boundary needs resolution >= 2"));
        }
        const SCAN: usize = 2000;
        const SLACK: f64 = 1e-12;
        let t = Complex64::from_polar(1.0, vertex_angle);
        let excess = |lambda: Complex64| self.k * (1.0 - lambda.norm()) - self.model.value((t - lambda).norm());
        let mut out = Vec::with_capacity(resolution);
        for j in 0..resolution {
            let psi = -PI / 2.0 + PI * (j + 1) as f64 / (resolution + 1) as f64;
            let dir = -t * Complex64::from_polar(1.0, psi);
            let along = |s: f64| t + dir * s;
            let s_max = 2.0 * psi.cos();
            let inside = (1..=SCAN)
                .rev()
                .map(|i| s_max * i as f64 / SCAN as f64)
                .find(|&s| excess(along(s)) >= -SLACK);
            let point = match inside {
                None => t,
                Some(s) if s >= s_max => along(s_max),
                Some(s) => {
                    let (mut lo, mut hi) = (s, (s + s_max / SCAN as f64).min(s_max));
                    while hi - lo > 1e-13 {
                        let mid = 0.5 * (lo + hi);
                        if excess(along(mid)) >= -SLACK {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    along(lo)
                }
            };
            out.push(point);
        }
        Ok(out)
    }
}

/// Radial placement law for sampled zeros: the gap `1 - |z_n|` of the `n`-th zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadialLaw {
    /// `1 - |z_n| = q^n`.
    Geometric { q: f64 },
    /// `1 - |z_n| = (n + 1)^(-s)`.
    Power { s: f64 },
}

impl RadialLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RadialLaw::Geometric { q } if q > 0.0 && q < 1.0 => Ok(()),
            RadialLaw::Power { s } if s > 1.0 && s.is_finite() => Ok(()),
            other => Err(Error::domain(format!("radial law {other:?} does not give a summable sequence"))),
        }
    }

    /// Gap of zero number `n` (starting at 1).
    pub fn gap(&self, n: usize) -> f64 {
        match *self {
            RadialLaw::Geometric { q } => q.powi(n as i32),
            RadialLaw::Power { s } => ((n + 1) as f64).powf(-s),
        }
    }
}

/// Draws `n` zeros inside the region: radii from the law, then angles near a
/// uniformly chosen component of `E`, retried until the zero is admitted.
pub fn sample_zeros(spec: &StolzSpec, n: usize, seed: u64, law: RadialLaw) -> Result<ZeroSequence> {
    if n == 0 {
        return Err(Error::domain("sample_zeros needs n >= 1"));
    }
    law.validate()?;
    let comps = spec.set().components();
    let mut zeros = Vec::with_capacity(n);
    for idx in 0..n {
        let gap = law.gap(idx + 1);
        if !(gap > 0.0 && gap < 1.0) {
            return Err(Error::Sampling(format!(
                "zero {idx}: radial law gives gap {gap}, not representable inside the disk"
            )));
        }
        let mut rng = rng::stream(seed, idx as u64);
        let Some(width) = spec.angular_halfwidth(gap) else {
            return Err(Error::Sampling(format!(
                "zero {idx}: no point of radius 1 - {gap:e} lies in the region ({}, K = {})",
                spec.model().label(),
                spec.k()
            )));
        };
        let placed = (0..MAX_ANGLE_ATTEMPTS).find_map(|_| {
            let [a, b] = comps[rng.random_range(0..comps.len())];
            let vertex = a + (b - a) * rng.random::<f64>();
            let offset = if width > 0.0 { rng.random_range(-width..=width) } else { 0.0 };
            Zero::from_gap_angle(gap, vertex + offset)
                .ok()
                .filter(|z| spec.contains_zero(z))
        });
        match placed {
            Some(z) => zeros.push(z),
            None => {
                return Err(Error::Sampling(format!(
                    "zero {idx}: region too thin at radius 1 - {gap:e} ({}, K = {}); \
                     {MAX_ANGLE_ATTEMPTS} angle draws rejected",
                    spec.model().label(),
                    spec.k()
                )))
            }
        }
    }
    Ok(ZeroSequence::new(zeros))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn membership_examples() {
        let spec = StolzSpec::vertex(ModelFunction::Linear, 0.0, 1.0).unwrap();
        assert!(spec.contains(c(0.0, 0.0)).unwrap());
        assert!(!spec.contains(c(0.0, 0.9)).unwrap());
        assert!(spec.contains(c(1.0, 0.0)).is_err());
        assert!(StolzSpec::vertex(ModelFunction::Linear, 0.0, 0.0).is_err());
    }

    #[test]
    fn truncated_power_matches_power_region() {
        let mut rng = rng::stream(11, 0);
        for gamma in [1.0, 1.5, 2.0, 3.0] {
            for k in [0.5, 1.0, 2.0] {
                let spec = StolzSpec::vertex(ModelFunction::TruncatedPower { gamma }, 0.0, k).unwrap();
                for _ in 0..1000 {
                    let lam = Complex64::from_polar(rng.random::<f64>().sqrt(), rng.random_range(-PI..PI));
                    let direct = (c(1.0, 0.0) - lam).norm().powf(gamma) <= k * (1.0 - lam.norm());
                    assert_eq!(spec.contains(lam).unwrap(), direct);
                }
            }
        }
    }

    #[test]
    fn halfwidth_agrees_with_membership() {
        let spec = StolzSpec::vertex(ModelFunction::ExpTangential { rho: 1.0 }, 0.0, 2.0).unwrap();
        for gap in [0.5, 0.1, 1e-3, 1e-6] {
            let w = spec.angular_halfwidth(gap).unwrap();
            let r = 1.0 - gap;
            assert!(spec.contains(Complex64::from_polar(r, w * (1.0 - 1e-9))).unwrap());
            if w < PI {
                assert!(!spec.contains(Complex64::from_polar(r, w * (1.0 + 1e-6))).unwrap());
            }
        }
        let empty = StolzSpec::vertex(ModelFunction::Linear, 0.0, 0.5).unwrap();
        assert_eq!(empty.angular_halfwidth(0.1), None);
    }

    #[test]
    fn boundary_examples() {
        let spec = StolzSpec::vertex(ModelFunction::Linear, 0.0, 1.0).unwrap();
        let pts = spec.region_boundary(0.0, 3).unwrap();
        assert_eq!(pts.len(), 3);
        // the middle ray points at the origin
        assert!(pts[1].norm() < 1e-10, "{}", pts[1]);
        assert_eq!(spec.region_boundary(0.0, 2).unwrap().len(), 2);
        assert!(spec.region_boundary(0.0, 1).is_err());
    }

    #[test]
    fn boundary_points_solve_the_defining_equation() {
        let models = [
            ModelFunction::Linear,
            ModelFunction::TruncatedPower { gamma: 2.0 },
            ModelFunction::ExpTangential { rho: 1.0 },
            ModelFunction::ExpTangential { rho: 2.0 },
        ];
        for m in models {
            for k in [1.0, 2.0, 4.0] {
                let spec = StolzSpec::vertex(m, 0.7, k).unwrap();
                let t = Complex64::from_polar(1.0, 0.7);
                for p in spec.region_boundary(0.7, 41).unwrap() {
                    let resid = m.value((t - p).norm()) - k * (1.0 - p.norm());
                    assert!(resid.abs() < 1e-9, "{m:?} K={k}: residual {resid} at {p}");
                }
            }
        }
    }

    #[test]
    fn sampling_examples() {
        let spec = StolzSpec::vertex(ModelFunction::Linear, 0.0, 1.0).unwrap();
        let law = RadialLaw::Geometric { q: 0.5 };
        let one = sample_zeros(&spec, 1, 3, law).unwrap();
        assert_eq!(one.len(), 1);
        assert!(spec.contains_zero(&one.zeros()[0]));

        let a = sample_zeros(&spec, 20, 9, law).unwrap();
        let b = sample_zeros(&spec, 20, 9, law).unwrap();
        assert_eq!(a, b);
        assert!(a.alpha() < 1.0);
        assert!((a.alpha() - (1.0 - 0.5f64.powi(20))).abs() < 1e-15);
        for z in a.zeros() {
            assert!(spec.contains(z.point()).unwrap());
        }
    }

    #[test]
    fn sampling_spreads_over_sets() {
        let set = BoundarySet::points(&[0.0, 2.0, 4.0]).unwrap();
        let spec = StolzSpec::new(ModelFunction::ExpTangential { rho: 1.0 }, set, 1.0).unwrap();
        let z = sample_zeros(&spec, 60, 1, RadialLaw::Power { s: 1.5 }).unwrap();
        for zero in z.zeros() {
            assert!(spec.contains_zero(zero));
        }
        let near: Vec<usize> = [0.0f64, 2.0, 4.0]
            .iter()
            .map(|&a| {
                z.zeros()
                    .iter()
                    .filter(|q| (q.unit() - Complex64::from_polar(1.0, a)).norm() < 1.0)
                    .count()
            })
            .collect();
        assert!(near.iter().all(|&c| c > 5), "{near:?}");
    }

    #[test]
    fn sampling_failures() {
        let empty = StolzSpec::vertex(ModelFunction::Linear, 0.0, 0.5).unwrap();
        assert!(matches!(
            sample_zeros(&empty, 3, 1, RadialLaw::Geometric { q: 0.5 }),
            Err(Error::Sampling(_))
        ));
        let ok = StolzSpec::vertex(ModelFunction::Linear, 0.0, 2.0).unwrap();
        assert!(sample_zeros(&ok, 0, 1, RadialLaw::Geometric { q: 0.5 }).is_err());
        assert!(sample_zeros(&ok, 3, 1, RadialLaw::Power { s: 1.0 }).is_err());
        assert!(matches!(
            sample_zeros(&ok, 1100, 1, RadialLaw::Geometric { q: 0.5 }),
            Err(Error::Sampling(_))
        ));
    }
}
