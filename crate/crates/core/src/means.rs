//! Hardy and Bergman integral means of `B'` and their trend across truncations.

use std::f64::consts::{PI, TAU};
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::critical::csv_err;
use crate::error::{Error, Result};
use crate::product::{BlaschkeProduct, Zero, ZeroSequence};
use crate::regions::{ModelFunction, StolzSpec};

/// Node doubling stops once successive values agree to this relative accuracy.
pub const QUADRATURE_TARGET: f64 = 1e-6;
/// Disagreement beyond this after the last doubling is a resolution error.
pub const QUADRATURE_LIMIT: f64 = 1e-4;
pub const MIN_NODES: usize = 64;
/// Largest node count a circle mean may double up to.
pub const MAX_NODES: usize = 1 << 22;

const CHUNK: usize = 4096;

/// Default radii for trend experiments.
pub fn default_radii() -> Vec<f64> {
    vec![0.9, 0.99, 0.999]
}

fn relative_change(old: f64, new: f64) -> f64 {
    if new == old {
        0.0
    } else {
        (new - old).abs() / new.abs().max(old.abs())
    }
}

/// Sum of `f` at nodes `offset + step * k`, `k < count`, in fixed chunks.
fn node_sum<F>(count: usize, offset: f64, step: f64, f: &F) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    let chunks: Vec<f64> = (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            (c * CHUNK..((c + 1) * CHUNK).min(count))
                .map(|k| f(offset + step * k as f64))
                .sum()
        })
        .collect();
    chunks.iter().sum()
}

/// `(1/2pi) int f(r e^{i theta}) d theta` by the trapezoidal rule, doubling
/// from `nodes` until successive values agree to `QUADRATURE_TARGET`.
///
/// Returns a resolution error when the last doubling still moves the value by
/// more than `QUADRATURE_LIMIT`.
pub fn circle_mean<F>(r: f64, nodes: usize, f: F) -> Result<f64>
where
    F: Fn(Complex64) -> f64 + Sync,
{
    if !(0.0..1.0).contains(&r) {
        return Err(Error::domain(format!("circle mean needs 0 <= r < 1, got {r}")));
    }
    if nodes < MIN_NODES {
        return Err(Error::Resolution(format!("{nodes} nodes is below the minimum {MIN_NODES}")));
    }
    let g = |theta: f64| f(Complex64::from_polar(r, theta));
    let mut n = nodes;
    let mut sum = node_sum(n, 0.0, TAU / n as f64, &g);
    let mut value = sum / n as f64;
    loop {
        if 2 * n > MAX_NODES.max(2 * nodes) {
            return Err(Error::Resolution(format!(
                "circle mean at r = {r} did not settle by {n} nodes"
            )));
        }
        // the doubled rule reuses the current nodes and adds the midpoints
        sum += node_sum(n, PI / n as f64, TAU / n as f64, &g);
        n *= 2;
        let next = sum / n as f64;
        let change = relative_change(value, next);
        value = next;
        if change <= QUADRATURE_TARGET {
            return Ok(value);
        }
        if 2 * n > MAX_NODES.max(2 * nodes) && change <= QUADRATURE_LIMIT {
            return Ok(value);
        }
    }
}

/// Smallest admissible node count for a degree-`n` product.
pub fn min_nodes(degree: usize) -> usize {
    MIN_NODES.max(16 * degree)
}

fn check_exponent(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("exponent must be > 0, got {p}")))
    }
}

/// `((1/2pi) int |B'(r e^{i theta})|^p d theta)^(1/p)`.
pub fn hardy_mean(b: &BlaschkeProduct, p: f64, r: f64, nodes: usize) -> Result<f64> {
    check_exponent(p)?;
    if nodes < min_nodes(b.degree()) {
        return Err(Error::Resolution(format!(
            "{nodes} nodes is below {} for degree {}",
            min_nodes(b.degree()),
            b.degree()
        )));
    }
    Ok(circle_mean(r, nodes, |z| b.derivative(z).norm().powf(p))?.powf(1.0 / p))
}

/// Same mean of the Schwarz-Pick majorant `(1 - |B|^2)/(1 - |z|^2)`.
pub fn schwarz_pick_mean(b: &BlaschkeProduct, p: f64, r: f64, nodes: usize) -> Result<f64> {
    check_exponent(p)?;
    Ok(circle_mean(r, nodes, |z| b.schwarz_pick_bound(z).powf(p))?.powf(1.0 / p))
}

/// Node count for a circle of radius `r`: enough to resolve features of width `1 - r`.
pub fn nodes_for(degree: usize, r: f64) -> usize {
    let wanted = (4.0 * degree.max(1) as f64 / (1.0 - r)).min(MAX_NODES as f64) as usize;
    min_nodes(degree).max(wanted).next_power_of_two().min(MAX_NODES)
}

fn area_sum(b: &BlaschkeProduct, p: f64, radial: usize, angular: usize) -> f64 {
    let rule = GaussLegendre::new(NonZeroUsize::new(radial).expect("radial nodes > 0"));
    let rows: Vec<f64> = rule
        .as_node_weight_pairs()
        .par_iter()
        .map(|&(x, w)| {
            let r = 0.5 * (x + 1.0);
            let step = TAU / angular as f64;
            let ring: f64 = (0..angular)
                .map(|k| b.derivative(Complex64::from_polar(r, step * k as f64)).norm().powf(p))
                .sum();
            0.5 * w * r * ring * step
        })
        .collect();
    rows.iter().sum()
}

/// `int_D |B'|^p dA`: Gauss-Legendre in the radius (weighted by `r`),
/// trapezoid in the angle; validated against both node counts doubled.
pub fn bergman_integral(b: &BlaschkeProduct, p: f64, radial_nodes: usize, angular_nodes: usize) -> Result<f64> {
    check_exponent(p)?;
    if radial_nodes < MIN_NODES || angular_nodes < MIN_NODES {
        return Err(Error::Resolution(format!(
            "node counts ({radial_nodes}, {angular_nodes}) below the minimum {MIN_NODES}"
        )));
    }
    let coarse = area_sum(b, p, radial_nodes, angular_nodes);
    let fine = area_sum(b, p, 2 * radial_nodes, 2 * angular_nodes);
    let change = relative_change(coarse, fine);
    if change > QUADRATURE_LIMIT {
        return Err(Error::Resolution(format!(
            "area integral changed by {change:.2e} under node doubling"
        )));
    }
    Ok(fine)
}

/// Deterministic zero families for trend experiments; `1 - |z_n| = 2^(-n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ZeroFamily {
    /// `z_n = 1 - 2^(-n)`, approaching `1` along the radius.
    Radial,
    /// Zeros in the region `|1 - lambda|^gamma <= K (1 - |lambda|)`, at half
    /// the admissible angle, alternating above and below the real axis.
    Tangential { gamma: f64, k: f64 },
}

impl ZeroFamily {
    pub fn zeros(&self, n: usize) -> Result<ZeroSequence> {
        let gaps = (1..=n).map(|j| 0.5f64.powi(j as i32));
        match *self {
            ZeroFamily::Radial => Ok(ZeroSequence::new(
                gaps.map(|g| Zero::from_gap_angle(g, 0.0)).collect::<Result<_>>()?,
            )),
            ZeroFamily::Tangential { gamma, k } => {
                let spec = StolzSpec::vertex(ModelFunction::truncated_power(gamma)?, 0.0, k)?;
                let mut zeros = Vec::with_capacity(n);
                for (j, g) in gaps.enumerate() {
                    let width = spec.angular_halfwidth(g).ok_or_else(|| {
                        Error::Sampling(format!("no zero of gap {g:e} fits the region (gamma = {gamma}, K = {k})"))
                    })?;
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    zeros.push(Zero::from_gap_angle(g, sign * 0.5 * width.min(PI))?);
                }
                Ok(ZeroSequence::new(zeros))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            ZeroFamily::Radial => "radial".into(),
            ZeroFamily::Tangential { gamma, k } => format!("tangential(gamma={gamma}, K={k})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeansRow {
    pub truncation: usize,
    pub p: f64,
    pub r: f64,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeansTable {
    pub rows: Vec<MeansRow>,
}

impl MeansTable {
    /// Largest value over the radii for a given truncation and exponent.
    pub fn sup(&self, truncation: usize, p: f64) -> Option<f64> {
        self.rows
            .iter()
            .filter(|row| row.truncation == truncation && row.p == p)
            .map(|row| row.value)
            .reduce(f64::max)
    }

    /// `sup(to) / sup(from) - 1`.
    pub fn growth(&self, from: usize, to: usize, p: f64) -> Option<f64> {
        Some(self.sup(to, p)? / self.sup(from, p)? - 1.0)
    }

    /// CSV rows `N,p,r,value`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["N", "p", "r", "value"]).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record([
                row.truncation.to_string(),
                row.p.to_string(),
                row.r.to_string(),
                row.value.to_string(),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Hardy means of `B'` for every truncation and radius, one row each.
pub fn hp_trend(family: &ZeroFamily, p: f64, truncations: &[usize], r_grid: &[f64]) -> Result<MeansTable> {
    check_exponent(p)?;
    if truncations.is_empty() || r_grid.is_empty() {
        return Err(Error::domain("trend needs at least one truncation and one radius"));
    }
    let mut rows = Vec::with_capacity(truncations.len() * r_grid.len());
    for &n in truncations {
        let b = BlaschkeProduct::new(family.zeros(n)?);
        for &r in r_grid {
            let value = hardy_mean(&b, p, r, nodes_for(n, r))?;
            rows.push(MeansRow {
                truncation: n,
                p,
                r,
                value,
            });
        }
    }
    Ok(MeansTable { rows })
}
