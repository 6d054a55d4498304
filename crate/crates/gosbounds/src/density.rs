//! Density of the uniform generalized order statistic and its exponential
//! composition.
//!
//! The r-th uniform gOS satisfies `U_γ^(r) = V(S)` where
//! `S = Σ V_i / γ_i` is a sum of independent exponentials, i.e. a
//! hypoexponential (bidiagonal phase-type) random variable with rates
//! `γ_1, …, γ_r`. Writing `h` for the density of `S`, the two densities
//! used throughout the bounds are
//!
//! * `f̂_{γ,r}(x) = f_{γ,r}(V(x)) = h(x)·e^x` on `x ≥ 0`, and
//! * `f_{γ,r}(u) = h(−ln(1−u)) / (1−u)` on `0 < u < 1`.
//!
//! For pairwise distinct rates `h` is the classical exponential mixture
//! with partial-fraction weights; repeated rates (within
//! [`RATE_GROUPING_TOL`](crate::params::RATE_GROUPING_TOL)) produce
//! Erlang-mixture terms `c · x^m e^{−λx}`. When two distinct rates come
//! closer than [`ILL_CONDITIONED_REL_GAP`] relative, the partial-fraction
//! weights explode with opposite signs and the evaluator switches to a
//! matrix exponential of the bidiagonal generator instead.
//!
//! The module also carries the closed-form tail integrals
//!
//! * `∫_α^∞ f̂_{γ,r}(x) e^{−x} dx = e^{−α} Σ_j (1/γ_j) f̂_{γ,j}(α)`,
//! * `∫_α^∞ (x−α) f̂_{γ,r}(x) e^{−x} dx = e^{−α} Σ_j (ρ_{j,r}/γ_j) f̂_{γ,j}(α)`,
//!
//! where `f̂_{γ,j}` is the density of the leading prefix `(γ_1, …, γ_j)`.

use crate::matexp::{expm, SmallMatrix};
use crate::params::{GosParams, RhoTable, RATE_GROUPING_TOL};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative gap between distinct rates below which the partial-fraction
/// form is abandoned for the matrix-exponential evaluation.
pub const ILL_CONDITIONED_REL_GAP: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum DensityError {
    #[error("x = {0} must be nonnegative")]
    NegativeX(f64),
    #[error("u = {0} lies outside the open interval (0, 1)")]
    UOutOfRange(f64),
}

/// Requested derivative order of `f̂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivOrder {
    First,
    Second,
}

/// Grouped-rate representation: distinct rates with multiplicities,
/// strictly decreasing, multiplicities summing to `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypoexpRepr {
    groups: Vec<RateGroup>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateGroup {
    pub rate: f64,
    pub multiplicity: usize,
}

impl HypoexpRepr {
    /// Group the (descending) parameter vector, merging rates that agree
    /// within [`RATE_GROUPING_TOL`]; each group's rate is the mean of its
    /// members.
    pub fn from_params(params: &GosParams) -> Self {
        let mut groups: Vec<RateGroup> = Vec::new();
        let mut members: Vec<f64> = Vec::new();
        for &g in params.gamma() {
            match members.last() {
                Some(&prev) if (prev - g).abs() <= RATE_GROUPING_TOL => members.push(g),
                Some(_) => {
                    groups.push(RateGroup {
                        rate: members.iter().sum::<f64>() / members.len() as f64,
                        multiplicity: members.len(),
                    });
                    members = vec![g];
                }
                None => members.push(g),
            }
        }
        groups.push(RateGroup {
            rate: members.iter().sum::<f64>() / members.len() as f64,
            multiplicity: members.len(),
        });
        Self { groups }
    }

    pub fn groups(&self) -> &[RateGroup] {
        &self.groups
    }

    /// Smallest relative gap between adjacent distinct rates; `None` for a
    /// single group.
    fn min_relative_gap(&self) -> Option<f64> {
        self.groups
            .windows(2)
            .map(|w| (w[0].rate - w[1].rate) / w[0].rate)
            .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.min(g))))
    }
}

/// One `c · x^m · e^{−d·x}` term of an exponential-polynomial sum.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Term {
    coeff: f64,
    power: u32,
    decay: f64,
}

fn eval_terms(terms: &[Term], x: f64) -> f64 {
    terms
        .iter()
        .map(|t| t.coeff * x.powi(t.power as i32) * (-t.decay * x).exp())
        .sum()
}

fn differentiate(terms: &[Term]) -> Vec<Term> {
    let mut out = Vec::with_capacity(2 * terms.len());
    for t in terms {
        if t.power > 0 {
            out.push(Term { coeff: t.coeff * t.power as f64, power: t.power - 1, decay: t.decay });
        }
        if t.decay != 0.0 {
            out.push(Term { coeff: -t.coeff * t.decay, power: t.power, decay: t.decay });
        }
    }
    out
}

#[derive(Debug, Clone)]
enum Route {
    /// `h(x)` as `Σ c·x^m·e^{−λx}` and `f̂(x)` as `Σ c·x^m·e^{−(λ−1)x}`,
    /// with precomputed derivatives of the latter. Each `f̂` term folds the
    /// `e^x` factor into its own exponent, which is the log-space
    /// combination that keeps the evaluation finite wherever `f̂` itself is
    /// representable.
    ExpPoly { h: Vec<Term>, hat: Vec<Term>, hat_d1: Vec<Term>, hat_d2: Vec<Term> },
    /// Bidiagonal generator of the phase-type representation; densities and
    /// derivatives read entries of `T^k e^{Tx}`.
    MatrixExp { rates: Vec<f64> },
}

/// Evaluator of one uniform-gOS density (all routes).
#[derive(Debug, Clone)]
pub struct GosDensity {
    params: GosParams,
    repr: HypoexpRepr,
    route: Route,
}

impl GosDensity {
    pub fn new(params: &GosParams) -> Self {
        let repr = HypoexpRepr::from_params(params);
        let ill_conditioned = repr
            .min_relative_gap()
            .map(|g| g < ILL_CONDITIONED_REL_GAP)
            .unwrap_or(false);
        let route = if ill_conditioned {
            Route::MatrixExp { rates: params.gamma().to_vec() }
        } else {
            let h = partial_fraction_terms(&repr);
            let hat: Vec<Term> = h
                .iter()
                .map(|t| Term { coeff: t.coeff, power: t.power, decay: t.decay - 1.0 })
                .collect();
            let hat_d1 = differentiate(&hat);
            let hat_d2 = differentiate(&hat_d1);
            Route::ExpPoly { h, hat, hat_d1, hat_d2 }
        };
        Self { params: params.clone(), repr, route }
    }

    pub fn params(&self) -> &GosParams {
        &self.params
    }

    pub fn repr(&self) -> &HypoexpRepr {
        &self.repr
    }

    /// `f̂_{γ,r}(x) = h(x)·e^x` for `x ≥ 0`.
    pub fn hat(&self, x: f64) -> f64 {
        match &self.route {
            Route::ExpPoly { hat, .. } => eval_terms(hat, x),
            Route::MatrixExp { rates } => hat_via_matexp(rates, x, 0),
        }
    }

    /// Density `h(x)` of the exponential sum `S = Σ V_i/γ_i` itself
    /// (equals `f̂(x)·e^{−x}` but stays finite for every `x`, also when
    /// some `γ_i < 1` makes `f̂` overflow).
    pub fn s_density(&self, x: f64) -> f64 {
        match &self.route {
            Route::ExpPoly { h, .. } => eval_terms(h, x),
            Route::MatrixExp { rates } => h_via_matexp(rates, x, 0),
        }
    }

    /// First derivative of `f̂`.
    pub fn hat_deriv1(&self, x: f64) -> f64 {
        match &self.route {
            Route::ExpPoly { hat_d1, .. } => eval_terms(hat_d1, x),
            Route::MatrixExp { rates } => hat_via_matexp(rates, x, 1),
        }
    }

    /// Second derivative of `f̂`.
    pub fn hat_deriv2(&self, x: f64) -> f64 {
        match &self.route {
            Route::ExpPoly { hat_d2, .. } => eval_terms(hat_d2, x),
            Route::MatrixExp { rates } => hat_via_matexp(rates, x, 2),
        }
    }

    /// `f_{γ,r}(u) = h(−ln(1−u)) / (1−u)` for `0 < u < 1`.
    pub fn density_u(&self, u: f64) -> f64 {
        let x = -(1.0 - u).ln();
        // f(u) = f̂(x)·e^{−x}/(1−u) = f̂(x) since e^{−x} = 1−u.
        self.hat(x)
    }
}

/// `h^{(order)}(x) = γ_r · [T^order e^{Tx}]_{1,r}` through the matrix
/// exponential of the bidiagonal generator.
fn h_via_matexp(rates: &[f64], x: f64, order: usize) -> f64 {
    let r = rates.len();
    let mut t = SmallMatrix::zeros(r);
    for (i, &g) in rates.iter().enumerate() {
        t[(i, i)] = -g;
        if i + 1 < r {
            t[(i, i + 1)] = g;
        }
    }
    let mut m = expm(&t.scale(x));
    for _ in 0..order {
        m = t.matmul(&m);
    }
    rates[r - 1] * m[(0, r - 1)]
}

/// `f̂` (order 0) or its derivatives (order 1, 2); `f̂ = e^x h` expands by
/// the product rule into a binomial combination of the `h` derivatives.
fn hat_via_matexp(rates: &[f64], x: f64, order: usize) -> f64 {
    let combo = match order {
        0 => h_via_matexp(rates, x, 0),
        1 => h_via_matexp(rates, x, 0) + h_via_matexp(rates, x, 1),
        2 => {
            h_via_matexp(rates, x, 0)
                + 2.0 * h_via_matexp(rates, x, 1)
                + h_via_matexp(rates, x, 2)
        }
        _ => unreachable!("only orders 0..=2 are used"),
    };
    if x > 700.0 {
        // e^x alone would overflow; recombine in log space.
        if combo == 0.0 {
            0.0
        } else {
            combo.signum() * (x + combo.abs().ln()).exp()
        }
    } else {
        x.exp() * combo
    }
}

/// Partial-fraction expansion of the hypoexponential density for grouped
/// rates: `h(x) = Σ_k Σ_{l=1}^{m_k} B_{k,l} x^{l−1} e^{−λ_k x} / (l−1)!`.
///
/// The `B_{k,l}` come from derivatives of `ψ_k(s) = Π_{j≠k}(s+λ_j)^{−m_j}`
/// at `s = −λ_k`, computed through the logarithmic-derivative recurrence
/// `ψ^{(n+1)} = Σ_i C(n,i) ψ^{(i)} q^{(n−i)}` with
/// `q^{(d)}(−λ_k) = (−1)^{d+1} d! Σ_{j≠k} m_j (λ_j−λ_k)^{−(d+1)}`.
fn partial_fraction_terms(repr: &HypoexpRepr) -> Vec<Term> {
    let groups = repr.groups();
    let c_prod: f64 = groups.iter().map(|g| g.rate.powi(g.multiplicity as i32)).product();
    let mut terms = Vec::new();
    for (k, gk) in groups.iter().enumerate() {
        let d_max = gk.multiplicity - 1;
        let mut psi = vec![0.0; d_max + 1];
        psi[0] = groups
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, gj)| (gj.rate - gk.rate).powi(-(gj.multiplicity as i32)))
            .product();
        if d_max > 0 {
            let q: Vec<f64> = (0..d_max)
                .map(|d| {
                    let sum: f64 = groups
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != k)
                        .map(|(_, gj)| {
                            gj.multiplicity as f64 * (gj.rate - gk.rate).powi(-(d as i32 + 1))
                        })
                        .sum();
                    if d % 2 == 0 {
                        -factorial(d) * sum
                    } else {
                        factorial(d) * sum
                    }
                })
                .collect();
            for n in 0..d_max {
                psi[n + 1] = (0..=n).map(|i| binomial(n, i) * psi[i] * q[n - i]).sum();
            }
        }
        for l in 1..=gk.multiplicity {
            let b = c_prod * psi[gk.multiplicity - l] / factorial(gk.multiplicity - l);
            terms.push(Term {
                coeff: b / factorial(l - 1),
                power: (l - 1) as u32,
                decay: gk.rate,
            });
        }
    }
    terms
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Densities of all leading prefixes `(γ_1, …, γ_j)`, `j = 1..r`, plus the
/// `ρ` table: everything the tail identities and the bound evaluators need.
#[derive(Debug, Clone)]
pub struct DensityFamily {
    params: GosParams,
    rho: RhoTable,
    prefixes: Vec<GosDensity>,
}

impl DensityFamily {
    pub fn new(params: &GosParams) -> Self {
        let r = params.rank();
        let prefixes = (1..=r)
            .map(|j| GosDensity::new(&params.prefix(j).expect("j in range")))
            .collect();
        Self { params: params.clone(), rho: params.rho_table(), prefixes }
    }

    pub fn params(&self) -> &GosParams {
        &self.params
    }

    pub fn rank(&self) -> usize {
        self.params.rank()
    }

    /// `ρ_{j,r}` of the full vector.
    pub fn rho(&self, j: usize) -> f64 {
        self.rho.get(j).expect("j in range")
    }

    /// `f̂_{γ,j}(x)` for the leading prefix of length `j`.
    pub fn hat(&self, j: usize, x: f64) -> f64 {
        self.prefixes[j - 1].hat(x)
    }

    /// The full-rank density evaluator.
    pub fn full(&self) -> &GosDensity {
        self.prefixes.last().expect("r >= 1")
    }

    /// `∫_α^∞ f̂_{γ,r}(x) e^{−x} dx`, evaluated through the closed-form
    /// prefix sum. Equals the survival function of `S` at `α`.
    pub fn tail_integral_0(&self, alpha: f64) -> f64 {
        let r = self.rank();
        let sum: f64 = (1..=r)
            .map(|j| self.hat(j, alpha) / self.params.gamma()[j - 1])
            .sum();
        (-alpha).exp() * sum
    }

    /// `∫_α^∞ (x−α) f̂_{γ,r}(x) e^{−x} dx`, closed form.
    pub fn tail_integral_1(&self, alpha: f64) -> f64 {
        let r = self.rank();
        let sum: f64 = (1..=r)
            .map(|j| self.rho(j) * self.hat(j, alpha) / self.params.gamma()[j - 1])
            .sum();
        (-alpha).exp() * sum
    }

    /// Distribution function of the uniform gOS at `u ∈ (0,1)`.
    pub fn cdf_u(&self, u: f64) -> f64 {
        1.0 - self.tail_integral_0(-(1.0 - u).ln())
    }
}

// ---------------------------------------------------------------------------
// Free-function interface
// ---------------------------------------------------------------------------

/// `f̂_{γ,r}(x)` for `x ≥ 0`.
pub fn density_hat(params: &GosParams, x: f64) -> Result<f64, DensityError> {
    if !(x >= 0.0) {
        return Err(DensityError::NegativeX(x));
    }
    Ok(GosDensity::new(params).hat(x))
}

/// `f_{γ,r}(u)` for `0 < u < 1`.
pub fn density_u(params: &GosParams, u: f64) -> Result<f64, DensityError> {
    if !(u > 0.0 && u < 1.0) {
        return Err(DensityError::UOutOfRange(u));
    }
    Ok(GosDensity::new(params).density_u(u))
}

/// Exact derivative of `f̂` (term-by-term, not finite differences).
pub fn density_hat_derivative(
    params: &GosParams,
    x: f64,
    order: DerivOrder,
) -> Result<f64, DensityError> {
    if !(x >= 0.0) {
        return Err(DensityError::NegativeX(x));
    }
    let d = GosDensity::new(params);
    Ok(match order {
        DerivOrder::First => d.hat_deriv1(x),
        DerivOrder::Second => d.hat_deriv2(x),
    })
}

/// Closed-form `∫_α^∞ f̂_{γ,r}(x) e^{−x} dx` for `α ≥ 0`.
pub fn tail_integral_0(params: &GosParams, alpha: f64) -> Result<f64, DensityError> {
    if !(alpha >= 0.0) {
        return Err(DensityError::NegativeX(alpha));
    }
    Ok(DensityFamily::new(params).tail_integral_0(alpha))
}

/// Closed-form `∫_α^∞ (x−α) f̂_{γ,r}(x) e^{−x} dx` for `α ≥ 0`.
pub fn tail_integral_1(params: &GosParams, alpha: f64) -> Result<f64, DensityError> {
    if !(alpha >= 0.0) {
        return Err(DensityError::NegativeX(alpha));
    }
    Ok(DensityFamily::new(params).tail_integral_1(alpha))
}
