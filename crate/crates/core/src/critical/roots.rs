//! Simultaneous (Aberth-Ehrlich) iteration for the roots of `W = P'Q - PQ'`.
//!
//! The coefficients of `W` lose accuracy quickly when zeros crowd near the
//! circle, so the Newton ratio `W/W'` is evaluated from the factored form:
//! with distinct zeros `a_k` of multiplicity `m_k`,
//!
//! ```text
//! W = G * D,   G = B'/B = sum m_k [1/(w - a_k) + conj(a_k)/(1 - conj(a_k) w)],
//!              D = prod (w - a_k)(1 - conj(a_k) w)
//! ```
//!
//! (up to a constant and the factors of repeated zeros, which are split off
//! beforehand). `W` then has degree `2d - 2` for `d` distinct zeros: `d - 1`
//! roots in the disk and their reflections `1/conj(w)` outside.

use std::f64::consts::TAU;

use num_complex::Complex64;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Estimates beyond this modulus are roots at infinity (degree drop of `W`).
const ESCAPE: f64 = 1e10;

#[derive(Clone, Debug)]
pub(crate) struct DistinctZeros {
    pub points: Vec<Complex64>,
    pub mult: Vec<usize>,
}

impl DistinctZeros {
    pub fn new(points: impl IntoIterator<Item = Complex64>) -> Self {
        let mut out = DistinctZeros {
            points: Vec::new(),
            mult: Vec::new(),
        };
        for p in points {
            match out.points.iter().position(|&q| q == p) {
                Some(i) => out.mult[i] += 1,
                None => {
                    out.points.push(p);
                    out.mult.push(1);
                }
            }
        }
        out
    }

    /// `(G, G')` at `w`.
    pub fn log_derivative(&self, w: Complex64) -> (Complex64, Complex64) {
        let mut g = Complex64::default();
        let mut gp = Complex64::default();
        for (&a, &m) in self.points.iter().zip(&self.mult) {
            let m = m as f64;
            let inner = ONE / (w - a);
            let outer = a.conj() / (ONE - a.conj() * w);
            g += (inner + outer) * m;
            gp += (outer * outer - inner * inner) * m;
        }
        (g, gp)
    }

    /// `W/W'` from the factored form.
    fn newton_ratio(&self, w: Complex64) -> Complex64 {
        let (g, gp) = self.log_derivative(w);
        let mut dd = Complex64::default();
        for &a in &self.points {
            dd += ONE / (w - a) - a.conj() / (ONE - a.conj() * w);
        }
        g / (gp + g * dd)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct AberthOutcome {
    /// Finite root estimates.
    pub roots: Vec<Complex64>,
    pub iterations: usize,
    pub converged: bool,
}

/// All `2d - 2` roots of `W`, starting from a circle of radius `radius`.
pub(crate) fn aberth(
    zeros: &DistinctZeros,
    radius: f64,
    phase: f64,
    max_iter: usize,
    tol: f64,
) -> AberthOutcome {
    let m = (2 * zeros.points.len()).saturating_sub(2);
    // Radii jittered by a golden-ratio sequence so that symmetric zero sets
    // do not trap the estimates in a symmetric orbit.
    let mut w: Vec<Complex64> = (0..m)
        .map(|j| {
            let jitter = (j as f64 * 0.618_033_988_749_895).fract();
            Complex64::from_polar(radius * (0.8 + 0.4 * jitter), TAU * j as f64 / m as f64 + phase)
        })
        .collect();
    let mut escaped = vec![false; m];
    let mut iterations = 0;
    let mut converged = m == 0;
    while !converged && iterations < max_iter {
        iterations += 1;
        let mut worst = 0.0f64;
        for i in 0..m {
            if escaped[i] {
                continue;
            }
            let ratio = zeros.newton_ratio(w[i]);
            let repulsion: Complex64 = (0..m)
                .filter(|&j| j != i && !escaped[j])
                .map(|j| ONE / (w[i] - w[j]))
                .sum();
            let step = ratio / (ONE - ratio * repulsion);
            if !step.is_finite() {
                let kick = Complex64::from_polar(1e-3 * w[i].norm().max(1e-3), i as f64);
                w[i] += kick;
                worst = f64::INFINITY;
                continue;
            }
            w[i] -= step;
            if w[i].norm() > ESCAPE {
                escaped[i] = true;
                continue;
            }
            worst = worst.max(step.norm() / w[i].norm().max(1.0));
        }
        converged = worst < tol;
    }
    AberthOutcome {
        roots: w.into_iter().zip(escaped).filter(|(_, e)| !e).map(|(z, _)| z).collect(),
        iterations,
        converged,
    }
}

/// Newton polish on `G = B'/B`; keeps the input when Newton does not improve it.
pub(crate) fn polish(zeros: &DistinctZeros, start: Complex64) -> Complex64 {
    let mut w = start;
    let (mut g, mut gp) = zeros.log_derivative(w);
    for _ in 0..30 {
        if g.norm() == 0.0 || gp.norm() == 0.0 {
            break;
        }
        let step = g / gp;
        let next = w - step;
        let (ng, ngp) = zeros.log_derivative(next);
        if !(ng.norm() < g.norm()) || !next.is_finite() {
            break;
        }
        w = next;
        g = ng;
        gp = ngp;
        if step.norm() <= 4.0 * f64::EPSILON * w.norm().max(1e-300) {
            break;
        }
    }
    w
}
