//! Least absolute deviations regression with leave-one-out score
//! diagnostics for leverage points and outliers, plus the classical
//! hat-matrix comparator.
//!
//! The exact LAD hyperplane interpolates p+1 observations. Refitting on
//! every size n-1 subset and counting how often each observation is
//! interpolated (L score) or carries the largest residual (O score)
//! separates leverage points (high L) from outliers (high O). The
//! [`detect`] module wraps this in iterative procedures with quarantine
//! sets that defeat masking.

pub mod classical;
pub mod data;
pub mod dataset;
pub mod detect;
pub mod error;
pub mod lad;
pub mod scores;

pub use classical::{classical_flags, fit_ols, ClassicalReport, OutlierRule};
pub use dataset::Dataset;
pub use detect::{detect_leverage, detect_outliers, DetectionReport, StopReason};
pub use error::{Error, Result};
pub use lad::{brute_force_lad, fit_lad, max_abs_residual_index, LadFit};
pub use scores::{compute_scores, score_summary, ScoreTable};
