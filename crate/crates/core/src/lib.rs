//! Differential geometry of spacelike curves in Minkowski space-time E₁⁴:
//! special Frenet apparatuses under the indefinite metric, the generalized
//! Mannheim condition, Mannheim mate construction, and an explicit parametric
//! family of generalized Mannheim curves.

pub mod cli;
pub mod curve;
pub mod error;
pub mod expr;
pub mod family;
pub mod frenet;

pub mod lorentz;
pub mod mannheim;
pub mod report;
pub mod spline;

pub use error::{Error, Result};
pub use expr::{Expr, Jet};
pub use curve::{Curve, CurveSpec};
pub use lorentz::{classify, frame_det, inner, norm, CausalClass, CausalKind, Vec4};
