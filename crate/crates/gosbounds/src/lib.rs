//! Sharp upper bounds on expectations of generalized order statistics
//! (gOSs) built on baseline distributions with decreasing failure rate
//! (DFR) or decreasing failure rate on the average (DFRA).
//!
//! The library computes the bound on `E[(X_γ^(r) − μ)/σ_p]`, classifies
//! which structural case applies, constructs the bound-attaining
//! (extremal) baseline distribution where one exists, and verifies every
//! bound by independent quadrature and seedable Monte Carlo simulation.
//!
//! See the `book/` guide for a narrative walkthrough; its code snippets
//! run as doctests of this crate.

pub mod density;
pub mod dfr;
pub mod extremal;
pub mod matexp;
pub mod numerics;
pub mod params;

pub use density::{DensityFamily, DerivOrder, GosDensity, HypoexpRepr};
pub use dfr::{
    classify_dfr, compute_dfr_bound, Advisory, BoundCase, BoundResult, DfrCase, DfrError,
    MomentSpec, SlopeFunction,
};
pub use extremal::{ExtremalDistribution, MomentCheck, SegmentKind};
pub use numerics::{Argmin, MinimizerReport, QuadResult, Tolerances};
pub use params::{from_model, GosModel, GosParams, RhoTable};
