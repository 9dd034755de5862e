//! Finite Blaschke products: zeros, factors, values and derivatives.
//!
//! Every zero is stored together with its exact gap `1 - |z|`. For zeros
//! very close to the circle the gap carries information that the rounded
//! point no longer does, and all quantities of the form `1 - |z_n|^2` are
//! taken from it.

use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::critical::RationalForm;
use crate::error::{Error, Result};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `1 - |z|^2` computed as `(1 - |z|)(1 + |z|)`.
pub fn one_minus_sq(z: Complex64) -> f64 {
    let r = z.norm();
    (1.0 - r) * (1.0 + r)
}

/// A zero of a Blaschke product.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Zero {
    point: Complex64,
    gap: f64,
    unit: Complex64,
}

impl Zero {
    pub fn new(point: Complex64) -> Result<Self> {
        let modulus = point.norm();
        if !(modulus > 0.0 && modulus < 1.0) || !point.is_finite() {
            return Err(Error::InvalidZero { value: point });
        }
        Ok(Self {
            point,
            gap: 1.0 - modulus,
            unit: point / modulus,
        })
    }

    /// Zero at `(1 - gap) e^{i theta}` with the gap kept exactly.
    pub fn from_gap_angle(gap: f64, theta: f64) -> Result<Self> {
        let unit = Complex64::from_polar(1.0, theta);
        if !(gap > 0.0 && gap < 1.0) || !theta.is_finite() {
            return Err(Error::InvalidZero {
                value: unit * (1.0 - gap),
            });
        }
        Ok(Self {
            point: unit * (1.0 - gap),
            gap,
            unit,
        })
    }

    pub fn point(&self) -> Complex64 {
        self.point
    }

    /// `1 - |z|`.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn modulus(&self) -> f64 {
        1.0 - self.gap
    }

    /// `z / |z|`.
    pub fn unit(&self) -> Complex64 {
        self.unit
    }

    /// `1 - |z|^2`, from the stored gap.
    pub fn one_minus_sq(&self) -> f64 {
        self.gap * (2.0 - self.gap)
    }

    /// `b(z) = (conj(a)/|a|) (a - z) / (1 - conj(a) z)`.
    pub fn factor(&self, z: Complex64) -> Complex64 {
        if z == self.point {
            return Complex64::new(0.0, 0.0);
        }
        self.unit.conj() * (self.point - z) / (ONE - self.point.conj() * z)
    }

    /// `b'(z) = (conj(a)/|a|) (|a|^2 - 1) / (1 - conj(a) z)^2`.
    pub fn factor_derivative(&self, z: Complex64) -> Complex64 {
        let den = ONE - self.point.conj() * z;
        -self.unit.conj() * self.one_minus_sq() / (den * den)
    }

    /// `1 - |b(z)|^2 = (1 - |a|^2)(1 - |z|^2) / |1 - conj(a) z|^2`, free of cancellation.
    pub fn factor_defect(&self, z: Complex64) -> f64 {
        self.one_minus_sq() * one_minus_sq(z) / (ONE - self.point.conj() * z).norm_sqr()
    }
}

/// The Blaschke factor with zero `zn`, evaluated at `z`.
pub fn blaschke_factor(z: Complex64, zn: Complex64) -> Result<Complex64> {
    Ok(Zero::new(zn)?.factor(z))
}

/// Ordered finite list of zeros, multiplicity by repetition.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ZeroSequence {
    zeros: Vec<Zero>,
    alpha: f64,
}

impl ZeroSequence {
    pub fn new(zeros: Vec<Zero>) -> Self {
        let alpha = zeros.iter().map(Zero::gap).sum();
        Self { zeros, alpha }
    }

    pub fn from_points<I>(points: I) -> Result<Self>
    where
        I: IntoIterator<Item = Complex64>,
    {
        let zeros = points.into_iter().map(Zero::new).collect::<Result<_>>()?;
        Ok(Self::new(zeros))
    }

    pub fn from_reals(values: &[f64]) -> Result<Self> {
        Self::from_points(values.iter().map(|&x| Complex64::new(x, 0.0)))
    }

    pub fn zeros(&self) -> &[Zero] {
        &self.zeros
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.zeros.iter().map(Zero::point)
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// Blaschke sum `sum (1 - |z_n|)`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// First `n` zeros.
    pub fn truncate(&self, n: usize) -> Self {
        Self::new(self.zeros[..n.min(self.len())].to_vec())
    }

    /// Zeros after index `n`.
    pub fn tail(&self, n: usize) -> Self {
        Self::new(self.zeros[n.min(self.len())..].to_vec())
    }

    /// Parses the zero-set text format: one zero per line, either `re im`
    /// or `r@theta`; blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut zeros = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let parse_err = |message: String| Error::Parse {
                line: lineno,
                message,
            };
            let num = |s: &str| {
                f64::from_str(s.trim()).map_err(|e| parse_err(format!("bad number {s:?}: {e}")))
            };
            let point = if let Some((r, theta)) = line.split_once('@') {
                Complex64::from_polar(num(r)?, num(theta)?)
            } else {
                let mut it = line.split_whitespace();
                let (Some(re), Some(im), None) = (it.next(), it.next(), it.next()) else {
                    return Err(parse_err(format!("expected `re im` or `r@theta`, got {line:?}")));
                };
                Complex64::new(num(re)?, num(im)?)
            };
            zeros.push(Zero::new(point).map_err(|e| parse_err(e.to_string()))?);
        }
        Ok(Self::new(zeros))
    }

    /// Writes the `re im` form; values round-trip exactly.
    pub fn to_text(&self) -> String {
        write_points(self.points())
    }
}

/// Renders points in the zero-set text format.
pub fn write_points(points: impl IntoIterator<Item = Complex64>) -> String {
    let mut out = String::new();
    for p in points {
        let _ = writeln!(out, "{} {}", p.re, p.im);
    }
    out
}

/// Sum `2 (1 - |z_n|) / (1 - |z|)` over a tail of zeros.
///
/// Bounds `|1 - prod b_n(z)|` for the tail since each factor obeys
/// `|1 - b_n(z)| <= 2 (1 - |z_n|) / (1 - |z|)` and all factors have modulus at most one.
pub fn truncation_tail(tail: &ZeroSequence, z: Complex64) -> Result<f64> {
    let r = z.norm();
    if r >= 1.0 {
        return Err(Error::domain(format!("tail bound needs |z| < 1, got {r}")));
    }
    Ok(2.0 * tail.alpha() / (1.0 - r))
}

#[derive(Clone, Debug, Default)]
pub struct BlaschkeProduct {
    zeros: ZeroSequence,
    rational: OnceLock<RationalForm>,
}

impl BlaschkeProduct {
    pub fn new(zeros: ZeroSequence) -> Self {
        Self {
            zeros,
            rational: OnceLock::new(),
        }
    }

    pub fn from_points<I>(points: I) -> Result<Self>
    where
        I: IntoIterator<Item = Complex64>,
    {
        Ok(Self::new(ZeroSequence::from_points(points)?))
    }

    pub fn from_reals(values: &[f64]) -> Result<Self> {
        Ok(Self::new(ZeroSequence::from_reals(values)?))
    }

    pub fn zeros(&self) -> &ZeroSequence {
        &self.zeros
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn alpha(&self) -> f64 {
        self.zeros.alpha()
    }

    /// Coefficient form, built on first use.
    pub fn rational(&self) -> Result<&RationalForm> {
        if let Some(r) = self.rational.get() {
            return Ok(r);
        }
        let built = RationalForm::build(&self.zeros)?;
        Ok(self.rational.get_or_init(|| built))
    }

    /// `B(z)`, the factors multiplied in stored order.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.zeros.zeros.iter().map(|a| a.factor(z)).product()
    }

    /// `B'(z) = sum_n b_n'(z) prod_{m != n} b_m(z)`.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        self.eval_with_derivative(z).1
    }

    /// `(B(z), B'(z))` in one pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut value = ONE;
        let mut deriv = Complex64::new(0.0, 0.0);
        for a in &self.zeros.zeros {
            let b = a.factor(z);
            deriv = deriv * b + value * a.factor_derivative(z);
            value *= b;
        }
        (value, deriv)
    }

    /// Symmetric difference quotient, averaged over the real and imaginary
    /// directions. The averaging cancels the `h^2` term of the error.
    pub fn derivative_fd(&self, z: Complex64, h: f64) -> Result<Complex64> {
        if !(h > 0.0) || z.norm() + h >= 1.0 {
            return Err(Error::domain(format!(
                "finite-difference step h = {h} at |z| = {} leaves the disk",
                z.norm()
            )));
        }
        let dh = Complex64::new(h, 0.0);
        let di = Complex64::new(0.0, h);
        let along_re = (self.eval(z + dh) - self.eval(z - dh)) / (2.0 * dh);
        let along_im = (self.eval(z + di) - self.eval(z - di)) / (2.0 * di);
        Ok((along_re + along_im) * 0.5)
    }

    /// `1 - |B(z)|^2` accumulated factor by factor without cancellation.
    pub fn defect(&self, z: Complex64) -> f64 {
        let mut defect = 0.0;
        let mut kept = 1.0;
        for a in &self.zeros.zeros {
            defect += a.factor_defect(z) * kept;
            kept *= a.factor(z).norm_sqr();
        }
        defect
    }

    /// Right-hand side of the Schwarz-Pick bound, `(1 - |B|^2) / (1 - |z|^2)`.
    pub fn schwarz_pick_bound(&self, z: Complex64) -> f64 {
        self.defect(z) / one_minus_sq(z)
    }

    /// Logarithmic derivative `B'/B = sum_n [1/(z - a_n) + conj(a_n)/(1 - conj(a_n) z)]`.
    pub fn log_derivative(&self, z: Complex64) -> Complex64 {
        self.zeros
            .zeros
            .iter()
            .map(|a| ONE / (z - a.point) + a.point.conj() / (ONE - a.point.conj() * z))
            .sum()
    }
}

impl PartialEq for BlaschkeProduct {
    fn eq(&self, other: &Self) -> bool {
        self.zeros == other.zeros
    }
}
