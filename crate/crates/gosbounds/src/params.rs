//! Parameter vectors of generalized order statistics.
//!
//! A gOS is indexed by a vector of positive reals `γ = (γ₁, …, γ_r)`. The
//! marginal law of the r-th gOS is invariant under permutations of the
//! entries, so [`GosParams`] stores them sorted in non-increasing order and
//! every downstream formula relies on that arrangement. The partial sums
//! `ρ_{j,r} = Σ_{i=j}^r 1/γ_i` drive the case split of the DFR bounds and
//! are exposed through [`RhoTable`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance under which two rates are treated as equal when the
/// density module groups them into Erlang blocks.
pub const RATE_GROUPING_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("parameter vector must be non-empty")]
    EmptyVector,
    #[error("gamma[{index}] = {value} is not strictly positive")]
    NonPositiveGamma { index: usize, value: f64 },
    #[error("index {j} out of range 1..={r}")]
    IndexOutOfRange { j: usize, r: usize },
    #[error("invalid model parameters: {0}")]
    InvalidModelParameters(String),
}

/// Validated, descending-sorted gOS parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct GosParams {
    gamma: Vec<f64>,
}

impl GosParams {
    /// Build a parameter vector; entries are sorted descending. Any
    /// permutation of the same multiset yields an identical value.
    pub fn new(gamma: impl Into<Vec<f64>>) -> Result<Self, ParamsError> {
        let mut gamma = gamma.into();
        if gamma.is_empty() {
            return Err(ParamsError::EmptyVector);
        }
        for (index, &value) in gamma.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ParamsError::NonPositiveGamma { index, value });
            }
        }
        gamma.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { gamma })
    }

    /// The rank `r`.
    pub fn rank(&self) -> usize {
        self.gamma.len()
    }

    /// Entries in non-increasing order.
    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// Largest entry `γ₁`.
    pub fn gamma_max(&self) -> f64 {
        self.gamma[0]
    }

    /// Smallest entry `γ_r`.
    pub fn gamma_min(&self) -> f64 {
        *self.gamma.last().expect("non-empty by construction")
    }

    /// The normalizing product `c_{r−1} = ∏ γ_j`.
    pub fn product(&self) -> f64 {
        self.gamma.iter().product()
    }

    /// `ρ_{j,r} = Σ_{i=j}^r 1/γ_i` for 1-based `j`. The reciprocals are
    /// accumulated smallest-first (the vector is descending, so forward
    /// order is ascending in magnitude).
    pub fn rho(&self, j: usize) -> Result<f64, ParamsError> {
        let r = self.rank();
        if j < 1 || j > r {
            return Err(ParamsError::IndexOutOfRange { j, r });
        }
        Ok(self.gamma[j - 1..].iter().fold(0.0, |acc, &g| acc + 1.0 / g))
    }

    /// `ρ_{1,r}`, the sum governing the DFR case split.
    pub fn rho_first(&self) -> f64 {
        self.rho(1).expect("j = 1 is always in range")
    }

    /// All `ρ_{j,r}` at once; entries agree bit-for-bit with [`Self::rho`].
    pub fn rho_table(&self) -> RhoTable {
        let r = self.rank();
        let rho = (1..=r).map(|j| self.rho(j).expect("j in range")).collect();
        RhoTable { rho }
    }

    /// Leading sub-vector `(γ₁, …, γ_j)`; the tail identities express
    /// integrals of the full density through densities of these prefixes.
    pub fn prefix(&self, j: usize) -> Result<GosParams, ParamsError> {
        let r = self.rank();
        if j < 1 || j > r {
            return Err(ParamsError::IndexOutOfRange { j, r });
        }
        Ok(GosParams { gamma: self.gamma[..j].to_vec() })
    }

    /// Second-smallest entry, the quantity the DFR theorem requires to be
    /// strictly above 1 (only defined for `r ≥ 2`).
    pub fn second_smallest(&self) -> Option<f64> {
        let r = self.rank();
        (r >= 2).then(|| self.gamma[r - 2])
    }
}

impl TryFrom<Vec<f64>> for GosParams {
    type Error = ParamsError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        GosParams::new(v)
    }
}

impl From<GosParams> for Vec<f64> {
    fn from(p: GosParams) -> Self {
        p.gamma
    }
}

/// Table of the partial sums `ρ_{j,r}`, strictly decreasing in `j` with
/// `ρ_{r,r} = 1/γ_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoTable {
    rho: Vec<f64>,
}

impl RhoTable {
    /// `ρ_{j,r}` for 1-based `j`.
    pub fn get(&self, j: usize) -> Result<f64, ParamsError> {
        self.rho
            .get(j - 1)
            .copied()
            .ok_or(ParamsError::IndexOutOfRange { j, r: self.rho.len() })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rho
    }
}

/// Standard ordered-data models embedded into the gOS parameterization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GosModel {
    /// `r`-th order statistic of an i.i.d. sample of size `n`:
    /// `γ_i = n − i + 1`.
    OrderStatistics { n: u32, r: u32 },
    /// `r`-th k-record value: `γ_i = k`.
    KRecords { k: u32, r: u32 },
    /// `r`-th progressively type-II censored order statistic with removal
    /// scheme `R`: `γ_i = n − i + 1 − Σ_{j<i} R_j`.
    ProgressiveCensoring { n: u32, removals: Vec<u32>, r: u32 },
}

/// Map a standard model onto its gOS parameter vector.
pub fn from_model(model: &GosModel) -> Result<GosParams, ParamsError> {
    let invalid = |msg: String| ParamsError::InvalidModelParameters(msg);
    match model {
        GosModel::OrderStatistics { n, r } => {
            if *r < 1 || r > n {
                return Err(invalid(format!("order statistics need 1 <= r <= n, got r={r}, n={n}")));
            }
            GosParams::new((1..=*r).map(|i| (*n - i + 1) as f64).collect::<Vec<_>>())
        }
        GosModel::KRecords { k, r } => {
            if *k < 1 || *r < 1 {
                return Err(invalid(format!("k-records need k >= 1 and r >= 1, got k={k}, r={r}")));
            }
            GosParams::new(vec![*k as f64; *r as usize])
        }
        GosModel::ProgressiveCensoring { n, removals, r } => {
            if *r < 1 || r > n {
                return Err(invalid(format!("progressive censoring needs 1 <= r <= n, got r={r}, n={n}")));
            }
            if removals.len() < *r as usize {
                return Err(invalid(format!(
                    "removal scheme has {} entries but r = {r} failures are observed",
                    removals.len()
                )));
            }
            let mut gamma = Vec::with_capacity(*r as usize);
            let mut removed: u32 = 0;
            for i in 1..=*r {
                // Units still on test before the i-th failure.
                let alive = *n as i64 - (i as i64 - 1) - removed as i64;
                if alive < 1 {
                    return Err(invalid(format!(
                        "removal scheme exhausts the sample before failure {i} (n={n})"
                    )));
                }
                gamma.push(alive as f64);
                removed += removals[(i - 1) as usize];
                if (*n as i64 - i as i64 - removed as i64) < 0 {
                    return Err(invalid(format!(
                        "cannot remove {} units after failure {i}: only {} remain",
                        removals[(i - 1) as usize],
                        *n as i64 - i as i64 - (removed - removals[(i - 1) as usize]) as i64,
                    )));
                }
            }
            GosParams::new(gamma)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sorts_descending() {
        let p = GosParams::new(vec![2.0, 4.0]).unwrap();
        assert_eq!(p.gamma(), &[4.0, 2.0]);
        assert_eq!(p.rank(), 2);
    }

    #[test]
    fn singleton() {
        let p = GosParams::new(vec![3.0]).unwrap();
        assert_eq!(p.rank(), 1);
        assert_eq!(p.gamma(), &[3.0]);
    }

    #[test]
    fn rejects_non_positive() {
        let e = GosParams::new(vec![1.0, -0.5]).unwrap_err();
        assert!(matches!(e, ParamsError::NonPositiveGamma { value, .. } if value == -0.5));
        assert_eq!(GosParams::new(Vec::new()).unwrap_err(), ParamsError::EmptyVector);
    }

    #[test]
    fn rho_values() {
        let p = GosParams::new(vec![4.0, 2.0]).unwrap();
        assert_eq!(p.rho(1).unwrap(), 0.75);
        assert_eq!(p.rho(2).unwrap(), 0.5);
        let q = GosParams::new(vec![5.0, 4.0]).unwrap();
        assert!((q.rho(1).unwrap() - 0.45).abs() < 1e-15);
        assert!(matches!(q.rho(3), Err(ParamsError::IndexOutOfRange { .. })));
    }

    #[test]
    fn order_statistics_model() {
        let p = from_model(&GosModel::OrderStatistics { n: 5, r: 2 }).unwrap();
        assert_eq!(p.gamma(), &[5.0, 4.0]);
    }

    #[test]
    fn k_records_model() {
        let p = from_model(&GosModel::KRecords { k: 2, r: 3 }).unwrap();
        assert_eq!(p.gamma(), &[2.0, 2.0, 2.0]);
    }

    #[test]
    fn progressive_censoring_model() {
        // n=6, R=(1,0): γ₁ = 6, γ₂ = 6 − 2 + 1 − 1 = 4.
        let p = from_model(&GosModel::ProgressiveCensoring { n: 6, removals: vec![1, 0], r: 2 })
            .unwrap();
        assert_eq!(p.gamma(), &[6.0, 4.0]);
    }

    #[test]
    fn progressive_censoring_rejects_exhausted_sample() {
        let e = from_model(&GosModel::ProgressiveCensoring { n: 3, removals: vec![3, 0], r: 2 });
        assert!(e.is_err());
    }

    proptest! {
        #[test]
        fn permutation_invariance(mut v in proptest::collection::vec(0.01f64..50.0, 1..8)) {
            let a = GosParams::new(v.clone()).unwrap();
            v.reverse();
            let b = GosParams::new(v).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn rho_telescopes(v in proptest::collection::vec(0.05f64..20.0, 2..8)) {
            let p = GosParams::new(v).unwrap();
            let r = p.rank();
            for j in 1..r {
                let lhs = p.rho(j).unwrap() - p.rho(j + 1).unwrap();
                let rhs = 1.0 / p.gamma()[j - 1];
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
            }
            let table = p.rho_table();
            for j in 1..r {
                prop_assert!(table.get(j).unwrap() > table.get(j + 1).unwrap());
            }
            prop_assert_eq!(table.get(r).unwrap(), 1.0 / p.gamma_min());
        }
    }
}
