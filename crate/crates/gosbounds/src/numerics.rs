//! Shared numerical substrate: adaptive quadrature, bracketed root finding
//! and scalar minimization over `[0, ∞)`.
//!
//! Every routine takes an explicit [`Tolerances`] so the accuracy contract
//! of the callers (bound evaluators, moment checks, acceptance tests) is
//! visible at the call site instead of buried in hidden defaults.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use thiserror::Error;

/// Tolerance profile shared by the quadrature, root-finding and
/// minimization routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative error target of adaptive quadrature.
    pub quad_rel: f64,
    /// Absolute bracket width at which a root is accepted.
    pub root_abs: f64,
    /// Absolute argument resolution of the golden-section refinement.
    pub min_abs_x: f64,
    /// Absolute value resolution used when comparing near-equal minima.
    pub min_abs_f: f64,
    /// Number of coarse grid points scanned before refinement.
    pub grid_points: usize,
    /// Step of the smallest-positive-root scans (`y*`, `β̂`, `θ̂`).
    pub scan_step: f64,
    /// Upper end of those scans; for `γ_min > 1` the densities are far
    /// below noise level there.
    pub scan_cap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quad_rel: 1e-10,
            root_abs: 1e-12,
            min_abs_x: 1e-8,
            min_abs_f: 1e-10,
            grid_points: 512,
            scan_step: 1.0 / 64.0,
            scan_cap: 50.0,
        }
    }
}

impl Tolerances {
    /// Validate the profile: all fields strictly positive, `grid_points >= 16`.
    pub fn validate(&self) -> Result<(), NumericsError> {
        if !(self.quad_rel > 0.0
            && self.root_abs > 0.0
            && self.min_abs_x > 0.0
            && self.min_abs_f > 0.0
            && self.scan_step > 0.0
            && self.scan_cap > 0.0)
        {
            return Err(NumericsError::InvalidTolerances(
                "all tolerance fields must be strictly positive".into(),
            ));
        }
        if self.grid_points < 16 {
            return Err(NumericsError::InvalidTolerances(
                "grid_points must be at least 16".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("invalid tolerances: {0}")]
    InvalidTolerances(String),
    #[error("no sign change on [{lo}, {hi}]: f(lo)={flo:e}, f(hi)={fhi:e}")]
    NoSignChange { lo: f64, hi: f64, flo: f64, fhi: f64 },
    #[error("no sign change found scanning [0, {cap}] with step {step}")]
    NoRootOnScan { cap: f64, step: f64 },
}

// ---------------------------------------------------------------------------
// Adaptive Gauss–Kronrod quadrature
// ---------------------------------------------------------------------------

/// 15-point Kronrod abscissae (positive half, descending).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

/// Weights of the 15-point Kronrod rule, matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Weights of the embedded 7-point Gauss rule (nodes `XGK[1]`, `XGK[3]`,
/// `XGK[5]`, `XGK[7]`).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive quadrature run. `converged == false` means the
/// subdivision cap was hit and `value` is the best available estimate.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub converged: bool,
    pub evaluations: usize,
}

impl QuadResult {
    /// The estimate, regardless of the convergence flag.
    pub fn value(&self) -> f64 {
        self.value
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_panel(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> Panel {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += wk * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Panel { a, b, value, error }
}

const MAX_PANELS: usize = 4000;

/// Integrate `f` over `(a, b)`, where `b` may be `f64::INFINITY`.
///
/// Adaptive bisection with an embedded Gauss(7)/Kronrod(15) pair; the
/// local error estimate is the difference between the two rules. Infinite
/// upper limits are mapped to `t ∈ [0, 1)` through the rational
/// substitution `x = a + t/(1−t)`, under which every integrand with an
/// exponentially decaying tail (any rate) becomes smooth with all
/// derivatives vanishing at `t = 1`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: &Tolerances) -> QuadResult {
    if b.is_infinite() {
        let g = |t: f64| {
            let w = 1.0 - t;
            if w <= 0.0 {
                return 0.0;
            }
            let x = a + t / w;
            f(x) / (w * w)
        };
        integrate_finite(g, 0.0, 1.0, tol)
    } else {
        integrate_finite(f, a, b, tol)
    }
}

fn integrate_finite(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: &Tolerances) -> QuadResult {
    let mut evals = 0usize;
    let mut eval = |x: f64| {
        evals += 1;
        f(x)
    };
    let mut heap = BinaryHeap::new();
    heap.push(kronrod_panel(&mut eval, a, b));
    loop {
        let total: f64 = heap.iter().map(|p| p.value).sum();
        let err: f64 = heap.iter().map(|p| p.error).sum();
        let target = tol.quad_rel * total.abs().max(f64::MIN_POSITIVE.sqrt());
        if err <= target {
            return QuadResult { value: total, abs_error: err, converged: true, evaluations: evals };
        }
        if heap.len() >= MAX_PANELS {
            return QuadResult { value: total, abs_error: err, converged: false, evaluations: evals };
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel collapsed to machine resolution; keep its estimate.
            let mut done = worst;
            done.error = 0.0;
            heap.push(done);
            continue;
        }
        heap.push(kronrod_panel(&mut eval, worst.a, mid));
        heap.push(kronrod_panel(&mut eval, mid, worst.b));
    }
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

/// Find a root of `f` inside the bracket `[lo, hi]`.
///
/// Safeguarded secant/bisection hybrid: a secant step is accepted only when
/// it lands strictly inside the current bracket, otherwise the bracket is
/// bisected. Terminates when the bracket is narrower than `root_abs` or an
/// exact zero is hit.
pub fn find_root(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    tol: &Tolerances,
) -> Result<f64, NumericsError> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(NumericsError::NoSignChange { lo, hi, flo: fa, fhi: fb });
    }
    for _ in 0..200 {
        if (b - a).abs() <= tol.root_abs {
            break;
        }
        // Secant proposal, clipped away from the bracket edges.
        let secant = if fb != fa { b - fb * (b - a) / (fb - fa) } else { f64::NAN };
        let margin = 0.01 * (b - a).abs();
        let x = if secant.is_finite() && secant > a.min(b) + margin && secant < a.max(b) - margin {
            secant
        } else {
            0.5 * (a + b)
        };
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    Ok(if fa.abs() <= fb.abs() { a } else { b })
}

/// Scan `f` on an expanding grid from 0 with the given step and refine the
/// first sign-change bracket. Serves the "smallest positive root" contracts
/// (`y*`, `β̂`, `θ̂`).
pub fn find_smallest_positive_root(
    f: impl Fn(f64) -> f64,
    step: f64,
    cap: f64,
    tol: &Tolerances,
) -> Result<f64, NumericsError> {
    let mut prev_x = 0.0;
    let mut prev_f = f(0.0);
    let n = (cap / step).ceil() as usize;
    for k in 1..=n {
        let x = (k as f64) * step;
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if prev_f == 0.0 {
            // Zero at a grid point (including the origin): skip, the
            // contract asks for a strictly positive crossing.
            prev_x = x;
            prev_f = fx;
            continue;
        }
        if fx.signum() != prev_f.signum() {
            return find_root(&f, prev_x, x, tol);
        }
        prev_x = x;
        prev_f = fx;
    }
    Err(NumericsError::NoRootOnScan { cap, step })
}

// ---------------------------------------------------------------------------
// Minimization on the half-line
// ---------------------------------------------------------------------------

/// Location of a half-line minimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Argmin {
    Finite(f64),
    AtInfinity,
}

impl Argmin {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Argmin::Finite(x) => Some(*x),
            Argmin::AtInfinity => None,
        }
    }
}

/// Outcome of [`minimize_on_halfline`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizerReport {
    pub argmin: Argmin,
    pub value: f64,
    pub attained_in_limit: bool,
    pub evaluations: usize,
}

/// Minimize a continuous `f` on `[0, ∞)` given its (caller-supplied) limit
/// at `+∞`.
///
/// The half-line is compactified through `t = e^{−α} ∈ (0, 1]`; the
/// function is sampled on a uniform grid in `t` (with the supplied limit
/// standing in for `t → 0⁺`), the best bracket is refined by golden
/// section down to `min_abs_x` in `t`, and the refined interior candidate
/// is compared against the boundary value `f(0)` and the limit. Exact ties
/// resolve to the smallest argmin, with `AtInfinity` last.
pub fn minimize_on_halfline(
    f: impl Fn(f64) -> f64,
    limit_at_infinity: f64,
    tol: &Tolerances,
) -> MinimizerReport {
    let mut evals = 0usize;
    let g = |t: f64, evals: &mut usize| {
        *evals += 1;
        let alpha = if t >= 1.0 { 0.0 } else { -t.ln() };
        f(alpha)
    };

    let n = tol.grid_points.max(16);
    // Grid index k ∈ {1, …, n} stands for t = k/n; index 0 for the limit.
    // The scan runs from t = 1 downwards with strict comparison, so exact
    // ties resolve to the larger t, i.e. the smaller α.
    let v_alpha0 = g(1.0, &mut evals);
    let mut best_k = n;
    let mut best_v = v_alpha0;
    for k in (1..n).rev() {
        let v = g(k as f64 / n as f64, &mut evals);
        if v < best_v {
            best_k = k;
            best_v = v;
        }
    }
    if limit_at_infinity < best_v {
        best_k = 0;
    }

    // Golden-section refinement inside the neighboring-grid bracket. Only
    // interior points are probed, so t = 0 (the limit) is never evaluated.
    let t_lo = if best_k == 0 { 0.0 } else { (best_k - 1) as f64 / n as f64 };
    let t_hi = ((best_k + 1).min(n)) as f64 / n as f64;
    let (t_star, v_star) = golden_section(|t| g(t, &mut evals), t_lo, t_hi, tol.min_abs_x);

    // Candidates in smallest-argmin order: α = 0, interior, α → ∞.
    let mut argmin = Argmin::Finite(0.0);
    let mut value = v_alpha0;
    if v_star < value {
        argmin = Argmin::Finite(if t_star >= 1.0 { 0.0 } else { -t_star.ln() });
        value = v_star;
    }
    if limit_at_infinity < value {
        argmin = Argmin::AtInfinity;
        value = limit_at_infinity;
    }
    let attained_in_limit = matches!(argmin, Argmin::AtInfinity);
    MinimizerReport { argmin, value, attained_in_limit, evaluations: evals }
}

/// Golden-section search for a minimum of `f` on `[a, b]`; only interior
/// points are evaluated, so the endpoints may be singular or stand for
/// limits. Returns the best probed point.
fn golden_section(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, x_tol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INVPHI * (hi - lo);
    let mut x2 = lo + INVPHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (hi - lo).abs() > x_tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INVPHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INVPHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn integrates_linear_exactly() {
        let r = integrate(|x| x, 0.0, 1.0, &tol());
        assert!((r.value - 0.5).abs() < 1e-14);
        assert!(r.converged);
    }

    #[test]
    fn integrates_exponential_tail() {
        let r = integrate(|x| (-x).exp(), 0.0, f64::INFINITY, &tol());
        assert!((r.value - 1.0).abs() < 1e-12, "got {}", r.value);
    }

    #[test]
    fn integrates_gamma_three() {
        let r = integrate(|x| x * x * (-x).exp(), 0.0, f64::INFINITY, &tol());
        assert!((r.value - 2.0).abs() < 1e-10, "got {}", r.value);
    }

    #[test]
    fn root_of_quadratic() {
        let x = find_root(|x| x * x - 4.0, 0.0, 3.0, &tol()).unwrap();
        assert!((x - 2.0).abs() < 1e-11);
    }

    #[test]
    fn root_of_exponential() {
        let x = find_root(|x| (-x).exp() - 0.5, 0.0, 2.0, &tol()).unwrap();
        assert!((x - std::f64::consts::LN_2).abs() < 1e-11);
    }

    #[test]
    fn root_requires_sign_change() {
        let e = find_root(|x| x * x + 1.0, -1.0, 1.0, &tol());
        assert!(matches!(e, Err(NumericsError::NoSignChange { .. })));
    }

    #[test]
    fn dfra_pivot_root() {
        // α = (α+1)e^{−α} has its only positive solution near 0.8065.
        let x = find_root(|a: f64| a - (a + 1.0) * (-a).exp(), 0.1, 2.0, &tol()).unwrap();
        assert!((x - 0.8065).abs() < 5e-4, "got {x}");
    }

    #[test]
    fn smallest_positive_root_takes_first_bracket() {
        // sin has roots at π, 2π, ...; the scan must return π.
        let x = find_smallest_positive_root(|x| x.sin(), 1.0 / 64.0, 10.0, &tol()).unwrap();
        assert!((x - std::f64::consts::PI).abs() < 1e-10, "got {x}");
    }

    #[test]
    fn root_bracket_contract() {
        // Either |f(x)| < 1e−12 or f changes sign across [x−tol, x+tol].
        let f = |x: f64| x.cos() - x;
        let x = find_root(f, 0.0, 1.5, &tol()).unwrap();
        let crosses = f(x - 1e-12).signum() != f(x + 1e-12).signum();
        assert!(f(x).abs() < 1e-12 || crosses);
    }

    #[test]
    fn minimizes_shifted_parabola() {
        let r = minimize_on_halfline(|a| (a - 1.0) * (a - 1.0) + 3.0, f64::INFINITY, &tol());
        let x = r.argmin.finite().expect("interior minimum");
        assert!((x - 1.0).abs() < 1e-6, "argmin {x}");
        assert!((r.value - 3.0).abs() < 1e-10);
        assert!(!r.attained_in_limit);
    }

    #[test]
    fn reports_at_infinity_when_limit_wins() {
        // Strictly decreasing towards its limit 0.5.
        let r = minimize_on_halfline(|a| 0.5 + (-a).exp(), 0.5, &tol());
        assert_eq!(r.argmin, Argmin::AtInfinity);
        assert!(r.attained_in_limit);
        assert!((r.value - 0.5).abs() < 1e-14);
    }

    #[test]
    fn grid_invariant_value_not_above_any_probe() {
        let f = |a: f64| (a - 0.77).powi(2) + 0.1;
        let r = minimize_on_halfline(f, f64::INFINITY, &tol());
        for k in 0..100 {
            let a = k as f64 * 0.1;
            assert!(r.value <= f(a) + tol().min_abs_f);
        }
    }
}

