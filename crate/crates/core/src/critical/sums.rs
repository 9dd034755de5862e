use serde::{Deserialize, Serialize};

use super::CriticalSet;
use crate::error::{Error, Result};
use crate::product::ZeroSequence;
use crate::regions::BoundarySet;

/// Terms of a series with their running sums.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SumSeries {
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
}

impl SumSeries {
    pub fn from_terms(terms: Vec<f64>) -> Self {
        let partial_sums = terms
            .iter()
            .scan(0.0, |acc, &t| {
                *acc += t;
                Some(*acc)
            })
            .collect();
        Self { terms, partial_sums }
    }

    pub fn total(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// CSV rows `index,term,partial_sum`, with a header.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["index", "term", "partial_sum"]).map_err(csv_err)?;
        for (i, (t, s)) in self.terms.iter().zip(&self.partial_sums).enumerate() {
            w.write_record([i.to_string(), t.to_string(), s.to_string()]).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// `(1 - |c|) d(c, E)^((rho - beta + eps)_+)` over the critical points.
pub fn critical_sum(cs: &CriticalSet, set: &BoundarySet, rho: f64, beta: f64, eps: f64) -> Result<SumSeries> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("epsilon must be > 0, got {eps}")));
    }
    let exponent = (rho - beta + eps).max(0.0);
    let terms = cs
        .points
        .iter()
        .map(|&c| {
            let weight = if exponent == 0.0 { 1.0 } else { set.distance(c).powf(exponent) };
            (1.0 - c.norm()) * weight
        })
        .collect();
    Ok(SumSeries::from_terms(terms))
}

/// `(1 - |c|) / max(log(1/(1 - |c|)), 1)^(1 + eps)`.
///
/// The logarithm is floored at one, which only affects points with
/// `1 - |c| >= 1/e`; the series is about points tending to the circle.
pub fn log_weighted_sum(cs: &CriticalSet, eps: f64) -> Result<SumSeries> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("epsilon must be > 0, got {eps}")));
    }
    let terms = cs
        .points
        .iter()
        .map(|&c| {
            let gap = 1.0 - c.norm();
            let log = (-gap.ln()).max(1.0);
            gap / log.powf(1.0 + eps)
        })
        .collect();
    Ok(SumSeries::from_terms(terms))
}

/// `sum (1 - |z_n|)^r`, for `0 < r <= 1`.
pub fn protas_sum(zeros: &ZeroSequence, r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::domain(format!("exponent must lie in (0, 1], got {r}")));
    }
    Ok(zeros.zeros().iter().map(|z| z.gap().powf(r)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn at(points: &[Complex64]) -> CriticalSet {
        CriticalSet {
            points: points.to_vec(),
            residuals: vec![0.0; points.len()],
        }
    }

    #[test]
    fn critical_sum_examples() {
        let e = BoundarySet::point(0.0).unwrap();
        let cs = at(&[Complex64::new(0.0, 0.0)]);
        let s = critical_sum(&cs, &e, 2.0, 1.0, 0.5).unwrap();
        assert!((s.total() - 1.0).abs() < 1e-15);

        let cs = at(&[Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.9)]);
        let plain = critical_sum(&cs, &e, 0.5, 1.0, 0.25).unwrap();
        assert!((plain.total() - (0.5 + 0.1)).abs() < 1e-15);
        let weighted = critical_sum(&cs, &e, 2.0, 1.0, 0.5).unwrap();
        let expected = 0.5 * 0.5f64.powf(1.5) + 0.1 * (1.81f64).sqrt().powf(1.5);
        assert!((weighted.total() - expected).abs() < 1e-12);
        assert!(critical_sum(&cs, &e, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn log_weighted_examples() {
        let origin = at(&[Complex64::new(0.0, 0.0)]);
        assert_eq!(log_weighted_sum(&origin, 0.3).unwrap().total(), 1.0);
        let near = at(&[Complex64::new(1.0 - (-10f64).exp(), 0.0)]);
        let t = log_weighted_sum(&near, 1.0).unwrap().total();
        assert!((t - (-10f64).exp() / 100.0).abs() < 1e-12 * (-10f64).exp());
        let empty = log_weighted_sum(&CriticalSet::default(), 1.0).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.total(), 0.0);
    }

    #[test]
    fn protas_examples() {
        let z = ZeroSequence::from_reals(&[0.5]).unwrap();
        assert!((protas_sum(&z, 0.5).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let geo: Vec<f64> = (1..=30).map(|n| 1.0 - 0.5f64.powi(n)).collect();
        let z = ZeroSequence::from_reals(&geo).unwrap();
        let q = 0.5f64.powf(0.4);
        let closed = q * (1.0 - q.powi(30)) / (1.0 - q);
        assert!((protas_sum(&z, 0.4).unwrap() - closed).abs() < 1e-12);
        assert!((protas_sum(&z, 1.0).unwrap() - z.alpha()).abs() < 1e-15);
        assert!(protas_sum(&z, 0.0).is_err());
    }

    #[test]
    fn series_csv() {
        let s = SumSeries::from_terms(vec![0.5, 0.25]);
        assert_eq!(s.partial_sums, vec![0.5, 0.75]);
        assert_eq!(s.to_csv().unwrap(), "index,term,partial_sum\n0,0.5,0.5\n1,0.25,0.75\n");
    }
}
