//! Pointwise checks of the derivative inequalities and seeded suites over them.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::product::BlaschkeProduct;
use crate::regions::{BoundarySet, ModelFunction, StolzSpec};
use crate::rng;

/// Relative slack for inequalities between closed-form quantities.
pub const CLOSED_FORM_SLACK: f64 = 1e-12;
/// Relative slack where products of many factors feed in.
pub const PRODUCT_SLACK: f64 = 1e-9;
/// Absolute slack of the three-point and chord inequalities.
pub const ABSOLUTE_SLACK: f64 = 1e-14;
/// Consecutive rejected draws before a region is declared empty.
pub const MAX_REJECTIONS: usize = 1000;

const CHUNK: usize = 1024;

/// Where the worst ratio of a suite was observed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub index: u64,
    pub z: Complex64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Complex64>,
}

/// Outcome of checking `lhs <= rhs` over many samples.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub samples: u64,
    /// Largest `lhs / rhs` seen.
    pub worst_ratio: f64,
    pub worst_witness: Option<Witness>,
    pub violations: u64,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    fn record(&mut self, ratio: f64, violated: bool, witness: Witness) {
        self.samples += 1;
        if violated {
            self.violations += 1;
        }
        if ratio > self.worst_ratio || self.worst_witness.is_none() {
            self.worst_ratio = ratio;
            self.worst_witness = Some(witness);
        }
    }

    /// Combines two reports; ties on the worst ratio keep the lower sample index.
    pub fn merge(mut self, other: BoundReport) -> BoundReport {
        self.samples += other.samples;
        self.violations += other.violations;
        let take_other = match (&self.worst_witness, &other.worst_witness) {
            (_, None) => false,
            (None, Some(_)) => true,
            (Some(a), Some(b)) => {
                other.worst_ratio > self.worst_ratio || (other.worst_ratio == self.worst_ratio && b.index < a.index)
            }
        };
        if take_other {
            self.worst_ratio = other.worst_ratio;
            self.worst_witness = other.worst_witness;
        }
        self
    }
}

/// Runs `sample(i, report)` for every `i < n` in parallel chunks, reducing in
/// chunk order so the report does not depend on scheduling.
fn run_suite<F>(n: u64, sample: F) -> Result<BoundReport>
where
    F: Fn(u64, &mut BoundReport) -> Result<()> + Sync,
{
    let chunks = n.div_ceil(CHUNK as u64);
    let parts: Vec<Result<BoundReport>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut report = BoundReport::default();
            for i in c * CHUNK as u64..((c + 1) * CHUNK as u64).min(n) {
                sample(i, &mut report)?;
            }
            Ok(report)
        })
        .collect();
    let mut total = BoundReport::default();
    for part in parts {
        total = total.merge(part?);
    }
    Ok(total)
}

/// `phi((x + y + u)/3) <= phi(x) + phi(y) + phi(u)`.
pub fn three_point_check(phi: &ModelFunction, x: f64, y: f64, u: f64) -> Result<bool> {
    let mean = phi.eval((x + y + u) / 3.0)?;
    Ok(mean <= phi.eval(x)? + phi.eval(y)? + phi.eval(u)? + ABSOLUTE_SLACK)
}

/// `phi(|t - z |lambda|| / 3) / |1 - conj(lambda) z|`, bounded by `2C + K`
/// whenever `lambda` lies in the vertex region at `t`.
pub fn lemma_lhs(z: Complex64, t: Complex64, lambda: Complex64, phi: &ModelFunction) -> f64 {
    let num = phi.value((t - z * lambda.norm()).norm() / 3.0);
    num / (Complex64::new(1.0, 0.0) - lambda.conj() * z).norm()
}

/// `|t - z| <= 2 |t - z |lambda||`.
pub fn chord_check(z: Complex64, lambda: Complex64, t: Complex64) -> bool {
    (t - z).norm() <= 2.0 * (t - z * lambda.norm()).norm() + ABSOLUTE_SLACK
}

fn vertex_of(spec: &StolzSpec) -> Result<Complex64> {
    match spec.set().components() {
        [[a, b]] if a == b => Ok(Complex64::from_polar(1.0, *a)),
        _ => Err(Error::domain("the lemma suite needs a region with a single vertex")),
    }
}

/// A point of the vertex region: log-uniform gap in `[1e-8, 1)`, angle
/// uniform within the half-width at that gap.
fn draw_lambda<R: Rng>(spec: &StolzSpec, angle: f64, rng: &mut R) -> Option<Complex64> {
    let gap = 10f64.powf(-8.0 * rng.random::<f64>());
    let width = spec.angular_halfwidth(gap)?;
    let offset = if width > 0.0 { rng.random_range(-width..=width) } else { 0.0 };
    let lambda = Complex64::from_polar(1.0 - gap, angle + offset);
    (lambda.norm() < 1.0 && spec.contains(lambda).ok()?).then_some(lambda)
}

/// A point of the closed disk, mixing uniform, boundary and near-`lambda`/near-`t` draws.
fn draw_closed_disk<R: Rng>(t: Complex64, lambda: Complex64, rng: &mut R) -> Complex64 {
    let z = match rng.random_range(0..4) {
        0 => Complex64::from_polar(rng.random::<f64>().sqrt(), rng.random_range(-PI..PI)),
        1 => Complex64::from_polar(1.0, rng.random_range(-PI..PI)),
        2 => lambda + Complex64::from_polar(10f64.powf(-6.0 * rng.random::<f64>()), rng.random_range(-PI..PI)),
        _ => t + Complex64::from_polar(10f64.powf(-6.0 * rng.random::<f64>()), rng.random_range(-PI..PI)),
    };
    if z.norm() > 1.0 {
        z / z.norm()
    } else {
        z
    }
}

/// Samples `(z, lambda)` with `lambda` in the vertex region and checks
/// `lemma_lhs <= (2C + K)(1 + 1e-12)`.
pub fn lemma_check(spec: &StolzSpec, n_samples: u64, seed: u64) -> Result<BoundReport> {
    if n_samples == 0 {
        return Err(Error::domain("lemma suite needs at least one sample"));
    }
    let t = vertex_of(spec)?;
    let bound = spec.lemma_bound();
    run_suite(n_samples, |i, report| {
        let mut rng = rng::stream(seed, i);
        let lambda = (0..MAX_REJECTIONS)
            .find_map(|_| draw_lambda(spec, t.arg(), &mut rng))
            .ok_or_else(|| {
                Error::Sampling(format!(
                    "sample {i}: {MAX_REJECTIONS} consecutive draws missed the region ({}, K = {}); it appears empty",
                    spec.model().label(),
                    spec.k()
                ))
            })?;
        let z = draw_closed_disk(t, lambda, &mut rng);
        let lhs = lemma_lhs(z, t, lambda, spec.model());
        let ratio = lhs / bound;
        let witness = Witness {
            index: i,
            z,
            t: Some(t),
            lambda: Some(lambda),
        };
        report.record(ratio, ratio > 1.0 + CLOSED_FORM_SLACK, witness);
        Ok(())
    })
}

/// Random `(z, lambda, t)` with `|z|, |lambda| < 1`, `|t| = 1`; ratio is
/// `|t - z| / (2 |t - z |lambda||)`.
pub fn chord_suite(n_samples: u64, seed: u64) -> Result<BoundReport> {
    run_suite(n_samples, |i, report| {
        let mut rng = rng::stream(seed, i);
        let z = Complex64::from_polar(rng.random::<f64>().sqrt(), rng.random_range(-PI..PI));
        let lambda = Complex64::from_polar(rng.random::<f64>(), rng.random_range(-PI..PI));
        let t = Complex64::from_polar(1.0, rng.random_range(-PI..PI));
        let ratio = (t - z).norm() / (2.0 * (t - z * lambda.norm()).norm());
        let witness = Witness {
            index: i,
            z,
            t: Some(t),
            lambda: Some(lambda),
        };
        report.record(ratio, !chord_check(z, lambda, t), witness);
        Ok(())
    })
}

/// `|B'(z)|` and the bound `2(2C + K)^2 alpha / phi(d(z, E)/6)^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremBound {
    pub lhs: f64,
    /// `f64::INFINITY` when `phi(d/6)` vanishes, e.g. on `E`.
    pub rhs: f64,
}

impl TheoremBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + PRODUCT_SLACK)
    }

    pub fn ratio(&self) -> f64 {
        if self.rhs.is_infinite() {
            0.0
        } else {
            self.lhs / self.rhs
        }
    }
}

/// A product whose zeros were checked once against a region.
#[derive(Clone, Debug)]
pub struct TheoremChecker<'a> {
    product: &'a BlaschkeProduct,
    spec: &'a StolzSpec,
    constant: f64,
}

impl<'a> TheoremChecker<'a> {
    /// Fails with a precondition error naming the first zero outside the region.
    pub fn new(product: &'a BlaschkeProduct, spec: &'a StolzSpec) -> Result<Self> {
        if let Some((i, z)) = product
            .zeros()
            .zeros()
            .iter()
            .enumerate()
            .find(|(_, z)| !spec.contains_zero(z))
        {
            let p = z.point();
            return Err(Error::Precondition(format!(
                "zero {i} at {} {} lies outside the region ({}, K = {})",
                p.re,
                p.im,
                spec.model().label(),
                spec.k()
            )));
        }
        let lemma = spec.lemma_bound();
        Ok(Self {
            product,
            spec,
            constant: 2.0 * lemma * lemma * product.alpha(),
        })
    }

    pub fn bound(&self, z: Complex64) -> Result<TheoremBound> {
        if !(z.norm() < 1.0) {
            return Err(Error::domain(format!("bound needs |z| < 1, got {}", z.norm())));
        }
        let d = self.spec.set().distance(z);
        let phi = self.spec.model().value(d / 6.0);
        let rhs = if phi > 0.0 { self.constant / (phi * phi) } else { f64::INFINITY };
        Ok(TheoremBound {
            lhs: self.product.derivative(z).norm(),
            rhs,
        })
    }

    /// `phi(d(z, E)/6) <= phi(|t - z |lambda|| / 3)` for every zero `lambda`,
    /// with `t` the point of `E` nearest to `lambda`.
    pub fn intermediate_holds(&self, z: Complex64) -> bool {
        let model = self.spec.model();
        let left = model.value(self.spec.set().distance(z) / 6.0);
        self.product.zeros().points().all(|lambda| {
            let t = self.spec.set().nearest_point(lambda);
            left <= model.value((t - z * lambda.norm()).norm() / 3.0) * (1.0 + CLOSED_FORM_SLACK)
        })
    }

    /// Checks the bound on every grid point; the witness carries the zero nearest to `z`.
    pub fn check_grid(&self, grid: &[Complex64]) -> Result<BoundReport> {
        run_suite(grid.len() as u64, |i, report| {
            let z = grid[i as usize];
            let b = self.bound(z)?;
            let lambda = self
                .product
                .zeros()
                .points()
                .min_by(|a, c| (a - z).norm().total_cmp(&(c - z).norm()));
            let witness = Witness {
                index: i,
                z,
                t: Some(self.spec.set().nearest_point(z)),
                lambda,
            };
            report.record(b.ratio(), !b.holds(), witness);
            Ok(())
        })
    }
}

pub fn theorem_bound(b: &BlaschkeProduct, z: Complex64, spec: &StolzSpec) -> Result<TheoremBound> {
    TheoremChecker::new(b, spec)?.bound(z)
}

/// `|B'(z)| <= (1 - |B(z)|^2)/(1 - |z|^2) (1 + 1e-12)`.
pub fn schwarz_pick_check(b: &BlaschkeProduct, z: Complex64) -> Result<bool> {
    let (lhs, rhs) = schwarz_pick_sides(b, z)?;
    Ok(lhs <= rhs * (1.0 + CLOSED_FORM_SLACK))
}

fn schwarz_pick_sides(b: &BlaschkeProduct, z: Complex64) -> Result<(f64, f64)> {
    if !(z.norm() < 1.0) {
        return Err(Error::domain(format!("Schwarz-Pick needs |z| < 1, got {}", z.norm())));
    }
    Ok((b.derivative(z).norm(), b.schwarz_pick_bound(z)))
}

/// Schwarz-Pick over a set of points.
pub fn schwarz_pick_grid(b: &BlaschkeProduct, points: &[Complex64]) -> Result<BoundReport> {
    run_suite(points.len() as u64, |i, report| {
        let z = points[i as usize];
        let (lhs, rhs) = schwarz_pick_sides(b, z)?;
        let witness = Witness {
            index: i,
            z,
            t: None,
            lambda: None,
        };
        report.record(lhs / rhs, lhs > rhs * (1.0 + CLOSED_FORM_SLACK), witness);
        Ok(())
    })
}

/// Polar grid with radii `1 - (1 - r_max)^((i+1)/radial)` and angles `2 pi j/angular`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarGrid {
    pub radial: usize,
    pub angular: usize,
    pub r_max: f64,
}

impl PolarGrid {
    pub fn new(radial: usize, angular: usize, r_max: f64) -> Result<Self> {
        let grid = Self { radial, angular, r_max };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.radial == 0 || self.angular == 0 {
            return Err(Error::domain("grid needs at least one radius and one angle"));
        }
        if !(self.r_max > 0.0 && self.r_max < 1.0) {
            return Err(Error::domain(format!("grid radius must lie in (0, 1), got {}", self.r_max)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.radial * self.angular
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Doubles both densities; every point of `self` is kept.
    pub fn refined(&self) -> Self {
        Self {
            radial: 2 * self.radial,
            angular: 2 * self.angular,
            r_max: self.r_max,
        }
    }

    pub fn points(&self) -> Vec<Complex64> {
        let outer_gap = 1.0 - self.r_max;
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.radial {
            let r = 1.0 - outer_gap.powf((i + 1) as f64 / self.radial as f64);
            for j in 0..self.angular {
                out.push(Complex64::from_polar(r, TAU * j as f64 / self.angular as f64));
            }
        }
        out
    }
}

/// Envelope `|f(z)| <= c1 exp(c2 / d(z, E)^rho)` fitted on a grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub c1: f64,
    pub c2: f64,
    pub rho: f64,
    pub grid_size: usize,
}

impl EnvelopeFit {
    pub fn envelope(&self, d: f64) -> f64 {
        self.c1 * (self.c2 / d.powf(self.rho)).exp()
    }

    /// `|B'(z)| / envelope(d(z, E))` at each point.
    pub fn ratios(&self, b: &BlaschkeProduct, set: &BoundarySet, points: &[Complex64]) -> Result<Vec<f64>> {
        let samples = envelope_samples(b, set, points)?;
        Ok(samples.iter().map(|&(d, m)| m / self.envelope(d)).collect())
    }

    pub fn worst_ratio(&self, b: &BlaschkeProduct, set: &BoundarySet, points: &[Complex64]) -> Result<f64> {
        Ok(self.ratios(b, set, points)?.into_iter().fold(0.0, f64::max))
    }
}

fn envelope_samples(b: &BlaschkeProduct, set: &BoundarySet, points: &[Complex64]) -> Result<Vec<(f64, f64)>> {
    points
        .par_iter()
        .map(|&z| {
            if !(z.norm() < 1.0) {
                return Err(Error::domain(format!("grid point {z} is not inside the disk")));
            }
            let d = set.distance(z);
            if !(d > 0.0) {
                return Err(Error::domain(format!("grid point {z} lies on the boundary set")));
            }
            Ok((d, b.derivative(z).norm()))
        })
        .collect()
}

/// `c1 = max |B'|` over points at distance `>= 1/2` from `E`, then
/// `c2 = max d^rho log+(|B'| / c1)`.
pub fn envelope_fit(b: &BlaschkeProduct, set: &BoundarySet, rho: f64, grid: &[Complex64]) -> Result<EnvelopeFit> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::domain(format!("envelope exponent must be > 0, got {rho}")));
    }
    let samples = envelope_samples(b, set, grid)?;
    let c1 = samples
        .iter()
        .filter(|(d, _)| *d >= 0.5)
        .map(|&(_, m)| m)
        .fold(0.0, f64::max);
    if !(c1 > 0.0) {
        return Err(Error::domain(
            "no grid point at distance >= 1/2 from the boundary set with B' != 0",
        ));
    }
    let c2 = samples
        .iter()
        .map(|&(d, m)| d.powf(rho) * (m / c1).ln().max(0.0))
        .fold(0.0, f64::max);
    Ok(EnvelopeFit {
        c1,
        c2,
        rho,
        grid_size: grid.len(),
    })
}
