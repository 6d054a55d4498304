//! Bound-attaining (extremal) baseline distributions.
//!
//! Every attainer in the DFR/DFRA theory is described most naturally by
//! its quantile function, which is also exactly what inverse-transform
//! sampling and the expectation integrals consume, so the quantile-side
//! representation is canonical here and cdfs are derived on demand by
//! numeric inversion.
//!
//! A distribution is an ordered list of segments over `u ∈ (0,1)`:
//! atoms (constant segments of positive mass), shifted-exponential tails,
//! the density-valued middle branch of the projection-case attainer, and
//! segments affine in the exponential argument `x = −ln(1−u)`. All
//! segments are cheap to evaluate both in `u` and directly in `x`; the
//! `x` form avoids the `1−u` cancellation in the far tail.

use crate::density::{DensityFamily, GosDensity};
use crate::dfr::{slope_alpha_star, MomentSpec};
use crate::numerics::{find_root, integrate, Tolerances};
use crate::params::GosParams;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExtremalError {
    #[error("u = {0} lies outside the open interval (0, 1)")]
    DomainError(f64),
    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("alpha = {0} must lie in (0, 1)")]
    InvalidAlpha(f64),
    #[error("density is not increasing where the inverse branch is required: {0}")]
    NonMonotoneBranch(String),
}

/// One quantile segment on `(u_lo, u_hi]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Segment {
    pub u_lo: f64,
    pub u_hi: f64,
    #[serde(flatten)]
    pub kind: SegmentKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SegmentKind {
    /// Constant value; the segment's `u`-length is the atom's mass.
    Atom { location: f64 },
    /// `Q(u) = location + scale · [x − x_lo]` with `x = −ln(1−u)`;
    /// continuous onset at `u_lo` where `Q = location`.
    ExponentialTail { location: f64, scale: f64 },
    /// `Q(u) = offset + scale · f_{γ,r}(u)`, the middle branch of the
    /// projection-case attainer (its cdf is `f_{γ,r}^{-1}` composed with
    /// an affine map, hence the name).
    InverseDensitySegment {
        params: GosParams,
        scale: f64,
        offset: f64,
        #[serde(skip)]
        evaluator: OnceLock<GosDensity>,
    },
    /// `Q(u) = intercept + slope · x` with `x = −ln(1−u)`.
    AffineInExponentialArgument { slope: f64, intercept: f64 },
}

impl SegmentKind {
    fn eval_at_exp(&self, x: f64, x_lo: f64) -> f64 {
        match self {
            SegmentKind::Atom { location } => *location,
            SegmentKind::ExponentialTail { location, scale } => location + scale * (x - x_lo),
            SegmentKind::InverseDensitySegment { params, scale, offset, evaluator } => {
                let d = evaluator.get_or_init(|| GosDensity::new(params));
                offset + scale * d.hat(x)
            }
            SegmentKind::AffineInExponentialArgument { slope, intercept } => intercept + slope * x,
        }
    }
}

/// Piecewise quantile function of a bound-attaining distribution, with the
/// moment targets it was constructed for.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtremalDistribution {
    segments: Vec<Segment>,
    pub mu_target: f64,
    pub sigma_p_target: f64,
    pub p: f64,
}

impl ExtremalDistribution {
    fn new(segments: Vec<Segment>, moments: &MomentSpec) -> Self {
        Self {
            segments,
            mu_target: moments.mu,
            sigma_p_target: moments.sigma_p,
            p: moments.p,
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Quantile at `u ∈ (0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64, ExtremalError> {
        if !(u > 0.0 && u < 1.0) {
            return Err(ExtremalError::DomainError(u));
        }
        Ok(self.quantile_at_exp(-(1.0 - u).ln()))
    }

    /// `Q(V(x))` for `x > 0` — the composition with the standard
    /// exponential cdf that every expectation integral and the sampler
    /// use. Evaluated without the `u = V(x)` roundtrip.
    pub fn quantile_at_exp(&self, x: f64) -> f64 {
        let seg = self
            .segments
            .iter()
            .find(|s| {
                let x_hi = x_of(s.u_hi);
                x <= x_hi
            })
            .unwrap_or_else(|| self.segments.last().expect("non-empty"));
        seg.kind.eval_at_exp(x, x_of(seg.u_lo))
    }

    /// Right-continuous cdf by bisection on the quantile.
    pub fn cdf(&self, x: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            let q = self.quantile(mid).expect("mid in (0,1)");
            if q <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Closure form of the quantile for the Monte Carlo drivers.
    pub fn quantile_fn(&self) -> impl Fn(f64) -> f64 + '_ {
        move |u: f64| {
            let u = u.clamp(f64::MIN_POSITIVE, 1.0 - 1e-16);
            self.quantile_at_exp(-(1.0 - u).ln())
        }
    }

    /// Recompute the mean and the p-th central absolute moment by
    /// quadrature against the targets.
    pub fn verify_moments(&self, tol: &Tolerances) -> MomentCheck {
        let mu = self.mu_target;
        let p = self.p;
        let mut mean = 0.0;
        let mut abs_p = 0.0;
        for seg in &self.segments {
            let mass = seg.u_hi - seg.u_lo;
            if let SegmentKind::Atom { location } = seg.kind {
                mean += mass * location;
                abs_p += mass * (location - mu).abs().powf(p);
                continue;
            }
            let x_lo = x_of(seg.u_lo);
            let x_hi = x_of(seg.u_hi);
            let q = |x: f64| seg.kind.eval_at_exp(x, x_lo) * (-x).exp();
            mean += integrate(q, x_lo, x_hi, tol).value;
            // |Q − μ|^p has a kink where Q crosses μ; split there.
            let dev = |x: f64| (seg.kind.eval_at_exp(x, x_lo) - mu).abs().powf(p) * (-x).exp();
            match self.crossing_in(seg, mu) {
                Some(xc) => {
                    abs_p += integrate(&dev, x_lo, xc, tol).value;
                    abs_p += integrate(&dev, xc, x_hi, tol).value;
                }
                None => abs_p += integrate(&dev, x_lo, x_hi, tol).value,
            }
        }
        let sigma_p = abs_p.powf(1.0 / p);
        MomentCheck {
            mean,
            sigma_p,
            mean_error: (mean - mu).abs(),
            sigma_rel_error: (sigma_p - self.sigma_p_target).abs() / self.sigma_p_target,
        }
    }

    /// `x` where the segment's quantile crosses `level`, if strictly inside.
    fn crossing_in(&self, seg: &Segment, level: f64) -> Option<f64> {
        let x_lo = x_of(seg.u_lo);
        let x_hi = x_of(seg.u_hi);
        match &seg.kind {
            SegmentKind::Atom { .. } => None,
            SegmentKind::ExponentialTail { location, scale } => {
                let xc = x_lo + (level - location) / scale;
                (xc > x_lo && xc < x_hi).then_some(xc)
            }
            SegmentKind::AffineInExponentialArgument { slope, intercept } => {
                let xc = (level - intercept) / slope;
                (xc > x_lo && xc < x_hi).then_some(xc)
            }
            SegmentKind::InverseDensitySegment { .. } => {
                let probe_hi = if x_hi.is_finite() { x_hi } else { x_lo + 60.0 };
                let g = |x: f64| seg.kind.eval_at_exp(x, x_lo) - level;
                if g(x_lo + 1e-14).signum() == g(probe_hi).signum() {
                    return None;
                }
                find_root(g, x_lo + 1e-14, probe_hi, &Tolerances::default()).ok()
            }
        }
    }
}

fn x_of(u: f64) -> f64 {
    if u >= 1.0 {
        f64::INFINITY
    } else {
        -(1.0 - u).ln()
    }
}

/// Outcome of a moment re-computation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MomentCheck {
    pub mean: f64,
    pub sigma_p: f64,
    pub mean_error: f64,
    pub sigma_rel_error: f64,
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

/// Attainer of the negative DFR bound: mixture of an atom at
/// `c₂ = μ − e^{−α₀}c₁` (mass `1−e^{−α₀}`) and a shifted exponential of
/// scale `c₁ = b(α₀)·B_p(α₀)·σ_p` starting there.
pub fn attainer_prop2(
    p: f64,
    alpha0: f64,
    b_val: f64,
    bp_val: f64,
    moments: &MomentSpec,
) -> Result<ExtremalDistribution, ExtremalError> {
    if !(alpha0 >= 0.0) || !(b_val > 0.0) || !(bp_val > 0.0) {
        return Err(ExtremalError::InvalidCoefficients(format!(
            "need alpha0 >= 0, b > 0, B_p > 0; got alpha0={alpha0}, b={b_val}, B_p={bp_val}"
        )));
    }
    let c1 = b_val * bp_val * moments.sigma_p;
    let c2 = moments.mu - (-alpha0).exp() * c1;
    let atom_mass = -(-alpha0).exp_m1();
    let mut segments = Vec::new();
    if atom_mass > 0.0 {
        segments.push(Segment {
            u_lo: 0.0,
            u_hi: atom_mass,
            kind: SegmentKind::Atom { location: c2 },
        });
    }
    segments.push(Segment {
        u_lo: atom_mass,
        u_hi: 1.0,
        kind: SegmentKind::ExponentialTail { location: c2, scale: c1 },
    });
    let mut out = ExtremalDistribution::new(segments, moments);
    out.p = p;
    Ok(out)
}

/// Attainer of the linear DFR case `1 < ρ ≤ 2`: the shifted exponential
/// `F(x) = 1 − exp(−(x−μ)/σ₂ − 1)` on `x > μ − σ₂`.
pub fn attainer_theorem1_linear(moments: &MomentSpec) -> Result<ExtremalDistribution, ExtremalError> {
    if (moments.p - 2.0).abs() > 1e-12 {
        return Err(ExtremalError::InvalidCoefficients(format!(
            "the linear-case attainer is a variance-unit object (p = 2), got p = {}",
            moments.p
        )));
    }
    let segments = vec![Segment {
        u_lo: 0.0,
        u_hi: 1.0,
        kind: SegmentKind::ExponentialTail {
            location: moments.mu - moments.sigma_p,
            scale: moments.sigma_p,
        },
    }];
    Ok(ExtremalDistribution::new(segments, moments))
}

/// Attainer of the projection case `ρ > 2`: density-valued middle branch
/// up to `u = V(y*)`, then a tail affine in the exponential argument with
/// slope `α_*(y*)`.
pub fn attainer_theorem1_c(
    params: &GosParams,
    y_star: f64,
    c: f64,
    moments: &MomentSpec,
) -> Result<ExtremalDistribution, ExtremalError> {
    if !(c > 0.0) || !(y_star > 0.0) {
        return Err(ExtremalError::InvalidCoefficients(format!(
            "need C > 0 and y* > 0; got C={c}, y*={y_star}"
        )));
    }
    let family = DensityFamily::new(params);
    let r = family.rank();
    // The middle branch inverts f_{γ,r} on its increasing part, so f̂ must
    // be nondecreasing up to y*.
    let probes = 256;
    for k in 0..=probes {
        let x = y_star * k as f64 / probes as f64;
        let d1 = family.full().hat_deriv1(x);
        if d1 < -1e-9 * family.full().hat(y_star).max(1.0) {
            return Err(ExtremalError::NonMonotoneBranch(format!(
                "f̂' = {d1:.3e} at x = {x:.6} < y* = {y_star:.6}"
            )));
        }
    }
    let slope_at_ystar = slope_alpha_star(&family, y_star);
    if !(slope_at_ystar > 0.0) {
        return Err(ExtremalError::NonMonotoneBranch(format!(
            "tail slope α_*(y*) = {slope_at_ystar:.3e} is not positive"
        )));
    }
    let fhat_ystar = family.full().hat(y_star);
    let sigma = moments.sigma_p;
    let u2 = -(-y_star).exp_m1();
    let segments = vec![
        Segment {
            u_lo: 0.0,
            u_hi: u2,
            kind: SegmentKind::InverseDensitySegment {
                params: params.clone(),
                scale: sigma / c,
                offset: moments.mu - sigma / c,
                evaluator: OnceLock::new(),
            },
        },
        Segment {
            u_lo: u2,
            u_hi: 1.0,
            kind: SegmentKind::AffineInExponentialArgument {
                slope: sigma * slope_at_ystar / c,
                intercept: moments.mu
                    + sigma * (fhat_ystar - 1.0 - slope_at_ystar * y_star) / c,
            },
        },
    ];
    let _ = r;
    Ok(ExtremalDistribution::new(segments, moments))
}

/// Limit sequence of the first-gOS zero bound (`r = 1`, `p > 1`): atom at
/// `μ − σ_p α/N_p(α)` with mass `1−α`, exponential tail of scale
/// `σ_p/N_p(α)` above.
pub fn attainer_prop3(
    p: f64,
    alpha: f64,
    moments: &MomentSpec,
) -> Result<ExtremalDistribution, ExtremalError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ExtremalError::InvalidAlpha(alpha));
    }
    let n_p = crate::dfr::n_p(p, alpha, &Tolerances::default());
    let location = moments.mu - moments.sigma_p * alpha / n_p;
    let segments = vec![
        Segment { u_lo: 0.0, u_hi: 1.0 - alpha, kind: SegmentKind::Atom { location } },
        Segment {
            u_lo: 1.0 - alpha,
            u_hi: 1.0,
            kind: SegmentKind::ExponentialTail { location, scale: moments.sigma_p / n_p },
        },
    ];
    let mut out = ExtremalDistribution::new(segments, moments);
    out.p = p;
    Ok(out)
}

/// Attainer of the DFRA bound: constant piece below `V(α_*)`, affine in
/// the exponential argument above, with the upper support endpoint at
/// `+∞` (the affine piece composed with `V^{-1}` is a full
/// shifted-exponential tail).
pub fn attainer_dfra(
    p: f64,
    alpha_star: f64,
    b_val: f64,
    bstar_val: f64,
    moments: &MomentSpec,
) -> Result<ExtremalDistribution, ExtremalError> {
    if !(alpha_star > 0.0) || !(b_val > 0.0) || !(bstar_val > 0.0) {
        return Err(ExtremalError::InvalidCoefficients(format!(
            "need alpha_* > 0, b > 0, B*_p > 0; got {alpha_star}, {b_val}, {bstar_val}"
        )));
    }
    let slope = b_val * bstar_val * moments.sigma_p;
    let kink = (alpha_star + 1.0) * (-alpha_star).exp();
    let level = moments.mu - slope * kink;
    let mass = -(-alpha_star).exp_m1();
    let segments = vec![
        Segment { u_lo: 0.0, u_hi: mass, kind: SegmentKind::Atom { location: level } },
        Segment {
            u_lo: mass,
            u_hi: 1.0,
            kind: SegmentKind::AffineInExponentialArgument { slope, intercept: level },
        },
    ];
    let mut out = ExtremalDistribution::new(segments, moments);
    out.p = p;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfr::MomentSpec;

    fn spec(p: f64, mu: f64, sigma: f64) -> MomentSpec {
        MomentSpec::new(p, mu, sigma).unwrap()
    }

    #[test]
    fn linear_attainer_quantile_and_moments() {
        let m = spec(2.0, 0.0, 1.0);
        let d = attainer_theorem1_linear(&m).unwrap();
        // u ↦ −1 − ln(1−u)
        for &u in &[0.1, 0.5, 0.9] {
            let q = d.quantile(u).unwrap();
            assert!((q - (-1.0 - (1.0f64 - u).ln())).abs() < 1e-14);
        }
        let check = d.verify_moments(&Tolerances::default());
        assert!(check.mean_error < 1e-10, "mean err {}", check.mean_error);
        assert!(check.sigma_rel_error < 1e-10, "sigma err {}", check.sigma_rel_error);
    }

    #[test]
    fn prop2_attainer_degenerate_alpha_zero() {
        let m = spec(1.0, 0.0, 1.0);
        let d = attainer_prop2(1.0, 0.0, 2.0, 0.25, &m).unwrap();
        assert_eq!(d.segments().len(), 1);
        // Pure shifted exponential with scale c1 = 0.5 from location −0.5.
        let q = d.quantile(1.0 - (-1.0f64).exp()).unwrap();
        assert!((q - 0.0).abs() < 1e-12, "q = {q}");
    }

    #[test]
    fn prop3_attainer_masses_and_moments() {
        let m = spec(2.0, 0.0, 1.0);
        let alpha = 0.5;
        let d = attainer_prop3(2.0, alpha, &m).unwrap();
        let segs = d.segments();
        assert_eq!(segs.len(), 2);
        assert!((segs[0].u_hi - segs[0].u_lo - (1.0 - alpha)).abs() < 1e-15);
        assert!((segs[1].u_hi - segs[1].u_lo - alpha).abs() < 1e-15);
        // N_2(0.5) = sqrt(0.75); atom at −0.5/sqrt(0.75).
        let atom = d.quantile(0.2).unwrap();
        assert!((atom - (-0.5 / 0.75f64.sqrt())).abs() < 1e-9, "atom {atom}");
        let check = d.verify_moments(&Tolerances::default());
        assert!(check.mean_error < 1e-6);
        assert!(check.sigma_rel_error < 1e-6);
    }

    #[test]
    fn quantile_is_nondecreasing() {
        let m = spec(1.0, 1.0, 2.0);
        let d = attainer_prop2(1.0, 0.8, 3.0, 0.3, &m).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 1..1000 {
            let u = k as f64 / 1000.0;
            let q = d.quantile(u).unwrap();
            assert!(q >= prev - 1e-12, "u = {u}");
            prev = q;
        }
    }

    #[test]
    fn quantile_domain_errors() {
        let m = spec(1.0, 0.0, 1.0);
        let d = attainer_prop2(1.0, 0.5, 2.0, 0.4, &m).unwrap();
        assert!(d.quantile(0.0).is_err());
        assert!(d.quantile(1.0).is_err());
    }

    #[test]
    fn exponential_tail_diverges_like_log() {
        let m = spec(1.0, 0.0, 1.0);
        let d = attainer_prop2(1.0, 0.5, 2.0, 0.4, &m).unwrap();
        let q1 = d.quantile(1.0 - 1e-6).unwrap();
        let q2 = d.quantile(1.0 - 1e-12).unwrap();
        assert!(q2 > q1 + 1.0, "tail grows with −ln(1−u)");
    }

    #[test]
    fn cdf_inverts_quantile() {
        let m = spec(1.0, 0.0, 1.0);
        let d = attainer_prop2(1.0, 0.8, 3.0, 0.3, &m).unwrap();
        for &u in &[0.9, 0.99] {
            let x = d.quantile(u).unwrap();
            assert!((d.cdf(x) - u).abs() < 1e-9, "u = {u}");
        }
        // Inside the atom the cdf jumps to the atom's upper mass.
        let atom_top = -(-0.8f64).exp_m1();
        let loc = d.quantile(atom_top * 0.5).unwrap();
        assert!((d.cdf(loc) - atom_top).abs() < 1e-9);
    }

    #[test]
    fn dfr_convexity_of_exponential_composition() {
        // F^{-1}(V(x)) must be convex for a DFR attainer: check second
        // differences on a grid.
        let m = spec(1.0, 0.5, 1.3);
        let d = attainer_prop2(1.0, 0.6, 2.5, 0.35, &m).unwrap();
        let h = 0.05;
        for k in 1..200 {
            let x = k as f64 * h;
            let dd = d.quantile_at_exp(x + h) - 2.0 * d.quantile_at_exp(x)
                + d.quantile_at_exp(x - h);
            assert!(dd >= -1e-8, "x = {x}, dd = {dd}");
        }
    }

    #[test]
    fn dfra_attainer_star_shape() {
        // (F^{-1}(V(x)) − F^{-1}(0⁺))/x nondecreasing for the DFRA attainer.
        let m = spec(2.0, 0.0, 1.0);
        let d = attainer_dfra(2.0, 1.1, 2.0, 0.4, &m).unwrap();
        let f0 = d.quantile(1e-12).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 1..400 {
            let x = k as f64 * 0.02;
            let ratio = (d.quantile_at_exp(x) - f0) / x;
            assert!(ratio >= prev - 1e-10, "x = {x}");
            prev = ratio;
        }
    }

    #[test]
    fn serialization_roundtrip() {
        let m = spec(1.0, 0.0, 1.0);
        let d = attainer_prop2(1.0, 0.5, 2.0, 0.4, &m).unwrap();
        let json = serde_json::to_string(&d).unwrap();
        let back: ExtremalDistribution = serde_json::from_str(&json).unwrap();
        for &u in &[0.2, 0.6, 0.95] {
            assert_eq!(d.quantile(u).unwrap(), back.quantile(u).unwrap());
        }
    }
}
