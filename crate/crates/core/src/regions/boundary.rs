use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deepest Cantor generator we expand (`2^24` arcs).
pub const MAX_CANTOR_DEPTH: u32 = 24;

/// Finite-depth generator of a symmetric Cantor set on an arc: every level
/// keeps the two end pieces of relative length `ratio`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CantorGenerator {
    pub base: [f64; 2],
    pub ratio: f64,
    pub depth: u32,
}

impl CantorGenerator {
    pub fn middle_thirds(base: [f64; 2], depth: u32) -> Self {
        Self {
            base,
            ratio: 1.0 / 3.0,
            depth,
        }
    }

    /// Angular length of the smallest arc at full depth.
    pub fn finest_scale(&self) -> f64 {
        (self.base[1] - self.base[0]) * self.ratio.powi(self.depth as i32)
    }

    /// The `2^depth` arcs of the generator.
    pub fn expand(&self) -> Vec<[f64; 2]> {
        let mut arcs = vec![self.base];
        for _ in 0..self.depth {
            let mut next = Vec::with_capacity(arcs.len() * 2);
            for [a, b] in arcs {
                let piece = (b - a) * self.ratio;
                next.push([a, a + piece]);
                next.push([b - piece, b]);
            }
            arcs = next;
        }
        arcs
    }

    fn validate(&self) -> Result<()> {
        let [a, b] = self.base;
        if !(a.is_finite() && b.is_finite() && b > a && b - a <= TAU) {
            return Err(Error::domain(format!("cantor base arc [{a}, {b}] is not a proper arc")));
        }
        if !(self.ratio > 0.0 && self.ratio < 0.5) {
            return Err(Error::domain(format!("cantor ratio must lie in (0, 1/2), got {}", self.ratio)));
        }
        if self.depth > MAX_CANTOR_DEPTH {
            return Err(Error::domain(format!(
                "cantor depth {} exceeds the supported maximum {MAX_CANTOR_DEPTH}",
                self.depth
            )));
        }
        Ok(())
    }
}

/// Serialized form of a boundary set (angles in radians).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySetSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub arcs: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cantor: Option<CantorGenerator>,
}

/// A closed nonempty subset of the unit circle: arcs, points and a Cantor generator.
///
/// Internally the set is a sorted list of disjoint closed angular intervals
/// inside `[0, 2pi]`; points are degenerate intervals and arcs crossing
/// angle zero are split in two.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoundarySetSpec", into = "BoundarySetSpec")]
pub struct BoundarySet {
    spec: BoundarySetSpec,
    components: Vec<[f64; 2]>,
}

impl TryFrom<BoundarySetSpec> for BoundarySet {
    type Error = Error;

    fn try_from(spec: BoundarySetSpec) -> Result<Self> {
        let mut raw: Vec<[f64; 2]> = Vec::new();
        for &[a, b] in &spec.arcs {
            if !(a.is_finite() && b.is_finite()) || b < a {
                return Err(Error::domain(format!("arc [{a}, {b}] must have finite end >= start")));
            }
            push_arc(&mut raw, a, b - a);
        }
        for &t in &spec.points {
            if !t.is_finite() {
                return Err(Error::domain(format!("point angle {t} is not finite")));
            }
            push_arc(&mut raw, t, 0.0);
        }
        if let Some(gen) = &spec.cantor {
            gen.validate()?;
            for [a, b] in gen.expand() {
                push_arc(&mut raw, a, b - a);
            }
        }
        if raw.is_empty() {
            return Err(Error::domain("boundary set is empty"));
        }
        raw.sort_by(|x, y| x[0].total_cmp(&y[0]).then(x[1].total_cmp(&y[1])));
        let mut components: Vec<[f64; 2]> = Vec::with_capacity(raw.len());
        for iv in raw {
            match components.last_mut() {
                Some(last) if iv[0] <= last[1] => last[1] = last[1].max(iv[1]),
                _ => components.push(iv),
            }
        }
        Ok(Self { spec, components })
    }
}

impl From<BoundarySet> for BoundarySetSpec {
    fn from(set: BoundarySet) -> Self {
        set.spec
    }
}

fn push_arc(out: &mut Vec<[f64; 2]>, start: f64, length: f64) {
    if length >= TAU {
        out.push([0.0, TAU]);
        return;
    }
    let s = start.rem_euclid(TAU);
    let e = s + length;
    if e <= TAU {
        out.push([s, e]);
    } else {
        out.push([s, TAU]);
        out.push([0.0, e - TAU]);
    }
}

/// Angular separation folded into `[0, pi]`.
fn circular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

impl BoundarySet {
    pub fn from_spec(spec: BoundarySetSpec) -> Result<Self> {
        Self::try_from(spec)
    }

    pub fn points(angles: &[f64]) -> Result<Self> {
        Self::from_spec(BoundarySetSpec {
            points: angles.to_vec(),
            ..Default::default()
        })
    }

    pub fn point(angle: f64) -> Result<Self> {
        Self::points(&[angle])
    }

    pub fn arc(start: f64, end: f64) -> Result<Self> {
        Self::from_spec(BoundarySetSpec {
            arcs: vec![[start, end]],
            ..Default::default()
        })
    }

    pub fn full_circle() -> Self {
        Self::arc(0.0, TAU).expect("full circle is a valid arc")
    }

    pub fn cantor(generator: CantorGenerator) -> Result<Self> {
        Self::from_spec(BoundarySetSpec {
            cantor: Some(generator),
            ..Default::default()
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn spec(&self) -> &BoundarySetSpec {
        &self.spec
    }

    pub fn cantor_generator(&self) -> Option<&CantorGenerator> {
        self.spec.cantor.as_ref()
    }

    /// Disjoint closed angular intervals, sorted, inside `[0, 2pi]`.
    pub fn components(&self) -> &[[f64; 2]] {
        &self.components
    }

    /// Total angular length of the set.
    pub fn angular_length(&self) -> f64 {
        self.components.iter().map(|[a, b]| b - a).sum()
    }

    /// Angle of the point of `E` closest (in angle) to `psi`.
    pub fn nearest_angle(&self, psi: f64) -> f64 {
        let psi = psi.rem_euclid(TAU);
        let n = self.components.len();
        let idx = self.components.partition_point(|c| c[0] <= psi);
        let before = self.components[(idx + n - 1) % n];
        let after = self.components[idx % n];
        if idx > 0 && psi <= before[1] {
            return psi;
        }
        let from_before = circular_gap(psi, before[1]);
        let from_after = circular_gap(psi, after[0]);
        if from_before <= from_after {
            before[1]
        } else {
            after[0]
        }
    }

    /// Point of `E` nearest to `z` in the plane.
    pub fn nearest_point(&self, z: Complex64) -> Complex64 {
        // |z - e^{it}| grows with the angular separation of t from arg z
        Complex64::from_polar(1.0, self.nearest_angle(z.arg()))
    }

    /// Euclidean distance from `z` to `E`.
    pub fn distance(&self, z: Complex64) -> f64 {
        (z - self.nearest_point(z)).norm()
    }

    pub fn contains_angle(&self, theta: f64) -> bool {
        circular_gap(self.nearest_angle(theta), theta) == 0.0
    }

    /// Normalized length of `E_x = {t on the circle : d(t, E) < x}`.
    ///
    /// A chord of length `x` subtends the angle `2 asin(x/2)`, so `E_x` is `E`
    /// widened by that angle on both sides; the measure is what remains after
    /// the widened pieces eat into each gap between components.
    pub fn neighborhood_measure(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::domain(format!("neighborhood radius must be > 0, got {x}")));
        }
        if x >= 2.0 {
            return Ok(1.0);
        }
        let widen = 2.0 * (x / 2.0).asin();
        let n = self.components.len();
        let uncovered: f64 = (0..n)
            .map(|i| {
                let gap = if i + 1 < n {
                    self.components[i + 1][0] - self.components[i][1]
                } else {
                    self.components[0][0] + TAU - self.components[n - 1][1]
                };
                (gap - 2.0 * widen).max(0.0)
            })
            .sum();
        Ok((1.0 - uncovered / TAU).clamp(0.0, 1.0))
    }

    /// Regression estimate of the type `beta(E)`: least-squares slope of
    /// `log |E_x|` against `log x` over a decreasing grid in `(0, 1)`.
    pub fn type_beta(&self, x_grid: &[f64]) -> Result<f64> {
        if x_grid.len() < 4 {
            return Err(Error::domain("type estimate needs at least 4 grid points"));
        }
        if x_grid.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return Err(Error::domain("type grid must lie inside (0, 1)"));
        }
        if x_grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::domain("type grid must be strictly decreasing"));
        }
        if let Some(gen) = self.cantor_generator() {
            let smallest = x_grid[x_grid.len() - 1];
            if gen.finest_scale() > smallest {
                return Err(Error::domain(format!(
                    "cantor depth {} resolves scale {:.3e}, coarser than the smallest grid value {smallest:.3e}",
                    gen.depth,
                    gen.finest_scale()
                )));
            }
        }
        let mut pts = Vec::with_capacity(x_grid.len());
        for &x in x_grid {
            pts.push((x.ln(), self.neighborhood_measure(x)?.ln()));
        }
        Ok(least_squares_slope(&pts))
    }
}

/// Default grid for type estimation: `x = 2^-k`, `k = 4..=14`.
pub fn default_type_grid() -> Vec<f64> {
    (4..=14).map(|k| 0.5f64.powi(k)).collect()
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn distance_examples() {
        let e = BoundarySet::point(0.0).unwrap();
        assert!((e.distance(c(0.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!((e.distance(c(0.0, 1.0)) - 2f64.sqrt()).abs() < 1e-15);
        let arc = BoundarySet::arc(-FRAC_PI_2, FRAC_PI_2).unwrap();
        assert!((arc.distance(c(0.5, 0.0)) - 0.5).abs() < 1e-15);
        assert!(arc.distance(c(0.0, 1.0)) < 1e-15);
        assert!((arc.distance(c(-0.5, 0.0)) - 1.25f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn distance_matches_brute_force() {
        let set = BoundarySet::from_spec(BoundarySetSpec {
            arcs: vec![[5.5, 7.0], [2.0, 2.4]],
            points: vec![4.0, -1.0],
            cantor: None,
        })
        .unwrap();
        let samples: Vec<Complex64> = (0..=20000)
            .flat_map(|i| {
                let t = i as f64 / 20000.0;
                let mut v = vec![];
                for [a, b] in [[5.5, 7.0], [2.0, 2.4]] {
                    v.push(Complex64::from_polar(1.0, a + (b - a) * t));
                }
                v
            })
            .chain([4.0, -1.0].iter().map(|&t| Complex64::from_polar(1.0, t)))
            .collect();
        for k in 0..200 {
            let z = Complex64::from_polar(0.99 * ((k * 37 % 100) as f64 / 100.0), k as f64 * 0.61);
            let brute = samples.iter().map(|s| (z - s).norm()).fold(f64::INFINITY, f64::min);
            let d = set.distance(z);
            assert!(d <= brute + 1e-12);
            assert!(brute - d < 1e-3, "{z}: {d} vs {brute}");
        }
    }

    #[test]
    fn wrapping_arc_is_split_and_merged() {
        let set = BoundarySet::arc(-0.5, 0.5).unwrap();
        assert_eq!(set.components().len(), 2);
        assert!(set.contains_angle(0.0));
        assert!(set.contains_angle(-0.4));
        assert!(!set.contains_angle(1.0));
        let merged = BoundarySet::from_spec(BoundarySetSpec {
            arcs: vec![[0.0, 1.0], [0.5, 2.0]],
            points: vec![1.5],
            cantor: None,
        })
        .unwrap();
        assert_eq!(merged.components(), &[[0.0, 2.0]]);
        assert!((merged.angular_length() - 2.0).abs() < 1e-15);
        assert!(BoundarySet::arc(1.0, 0.5).is_err());
        assert!(BoundarySet::points(&[]).is_err());
    }

    #[test]
    fn neighborhood_examples() {
        let full = BoundarySet::full_circle();
        for x in [1e-6, 0.1, 1.0, 3.0] {
            assert_eq!(full.neighborhood_measure(x).unwrap(), 1.0);
        }
        let p = BoundarySet::point(0.0).unwrap();
        assert!((p.neighborhood_measure(2f64.sqrt()).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(p.neighborhood_measure(2.0).unwrap(), 1.0);
        assert_eq!(p.neighborhood_measure(5.0).unwrap(), 1.0);
        assert!(p.neighborhood_measure(0.0).is_err());
    }

    #[test]
    fn neighborhood_matches_sampling() {
        let set = BoundarySet::from_spec(BoundarySetSpec {
            arcs: vec![[1.0, 1.3]],
            points: vec![1.5, 4.0],
            cantor: None,
        })
        .unwrap();
        let n = 200_000;
        for x in [0.05, 0.2, 0.7] {
            let hits = (0..n)
                .filter(|&i| {
                    let t = Complex64::from_polar(1.0, TAU * (i as f64 + 0.5) / n as f64);
                    set.distance(t) < x
                })
                .count();
            let sampled = hits as f64 / n as f64;
            assert!((sampled - set.neighborhood_measure(x).unwrap()).abs() < 1e-4);
        }
    }

    #[test]
    fn neighborhood_is_monotone() {
        let set = BoundarySet::cantor(CantorGenerator::middle_thirds([0.0, 1.0], 6)).unwrap();
        let mut prev = 0.0;
        for k in 1..500 {
            let m = set.neighborhood_measure(k as f64 * 0.004).unwrap();
            assert!(m >= prev);
            prev = m;
        }
    }

    #[test]
    fn cantor_expansion() {
        let gen = CantorGenerator::middle_thirds([0.0, 1.0], 3);
        let arcs = gen.expand();
        assert_eq!(arcs.len(), 8);
        assert!((arcs[2][0] - 2.0 / 9.0).abs() < 1e-15);
        assert!((arcs[1][0] - 2.0 / 27.0).abs() < 1e-15);
        let set = BoundarySet::cantor(gen).unwrap();
        assert_eq!(set.components().len(), 8);
        assert!((set.angular_length() - (2.0f64 / 3.0).powi(3)).abs() < 1e-14);
        assert!(BoundarySet::cantor(CantorGenerator { base: [0.0, 1.0], ratio: 0.6, depth: 2 }).is_err());
    }

    #[test]
    fn type_examples() {
        let grid = default_type_grid();
        let finite = BoundarySet::points(&[0.0, 2.0, 4.0]).unwrap();
        assert!((finite.type_beta(&grid).unwrap() - 1.0).abs() < 0.05);
        let arc = BoundarySet::arc(0.0, std::f64::consts::FRAC_PI_4).unwrap();
        assert!(arc.type_beta(&grid).unwrap().abs() < 0.05);
    }

    #[test]
    fn type_grid_validation() {
        let p = BoundarySet::point(0.0).unwrap();
        assert!(p.type_beta(&[0.5, 0.25, 0.125]).is_err());
        assert!(p.type_beta(&[0.1, 0.2, 0.05, 0.01]).is_err());
        assert!(p.type_beta(&[1.5, 0.2, 0.05, 0.01]).is_err());
        let shallow = BoundarySet::cantor(CantorGenerator::middle_thirds([0.0, 1.0], 4)).unwrap();
        assert!(shallow.type_beta(&default_type_grid()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"arcs": [[0.0, 0.5]], "points": [3.0], "cantor": {"base": [1.0, 2.0], "ratio": 0.3333333333333333, "depth": 2}}"#;
        let set = BoundarySet::from_json(text).unwrap();
        assert_eq!(set.components().len(), 6);
        let back: BoundarySet = serde_json::from_str(&serde_json::to_string(&set).unwrap()).unwrap();
        assert_eq!(back, set);
        assert!(BoundarySet::from_json(r#"{"arcs": [], "extra": 1}"#).is_err());
        assert!(BoundarySet::from_json(r#"{}"#).is_err());
    }
}
