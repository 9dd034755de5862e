use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::product::ZeroSequence;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `B = prefactor * P / Q` with `P(z) = prod (z_n - z)` and
/// `Q(z) = prod (1 - conj(z_n) z)`, coefficients in ascending powers.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalForm {
    pub p_coeffs: Vec<Complex64>,
    pub q_coeffs: Vec<Complex64>,
    pub unimodular_prefactor: Complex64,
}

impl RationalForm {
    pub fn build(zeros: &ZeroSequence) -> Result<Self> {
        if zeros.is_empty() {
            return Err(Error::domain("rational form of a degree-0 product"));
        }
        let mut p = vec![ONE];
        let mut q = vec![ONE];
        let mut prefactor = ONE;
        for z in zeros.zeros() {
            let a = z.point();
            p = mul_linear(&p, a, -ONE);
            q = mul_linear(&q, ONE, -a.conj());
            prefactor *= z.unit().conj();
        }
        Ok(Self {
            p_coeffs: p,
            q_coeffs: q,
            unimodular_prefactor: prefactor,
        })
    }

    pub fn degree(&self) -> usize {
        self.p_coeffs.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.unimodular_prefactor * horner(&self.p_coeffs, z) / horner(&self.q_coeffs, z)
    }

    /// `prefactor * (P'Q - PQ') / Q^2`, from the coefficients alone.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let q = horner(&self.q_coeffs, z);
        self.unimodular_prefactor * horner(&self.wronskian(), z) / (q * q)
    }

    /// Coefficients of `W = P'Q - PQ'`, whose roots in the disk are the critical points.
    pub fn wronskian(&self) -> Vec<Complex64> {
        let dp = differentiate(&self.p_coeffs);
        let dq = differentiate(&self.q_coeffs);
        let a = multiply(&dp, &self.q_coeffs);
        let b = multiply(&self.p_coeffs, &dq);
        let n = a.len().max(b.len());
        (0..n)
            .map(|i| a.get(i).copied().unwrap_or_default() - b.get(i).copied().unwrap_or_default())
            .collect()
    }
}

/// `poly * (c0 + c1 z)`.
fn mul_linear(poly: &[Complex64], c0: Complex64, c1: Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); poly.len() + 1];
    for (i, &c) in poly.iter().enumerate() {
        out[i] += c * c0;
        out[i + 1] += c * c1;
    }
    out
}

pub(crate) fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::default(), |acc, &c| acc * z + c)
}

pub(crate) fn differentiate(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs.iter().enumerate().skip(1).map(|(i, &c)| c * i as f64).collect()
}

pub(crate) fn multiply(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex64::default(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}
