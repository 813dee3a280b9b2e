//! Node selection for wireless source-localization networks.
//!
//! The crate evaluates Cramér–Rao lower bounds (CRLBs) for two adversarial
//! roles placed at a shared set of candidate positions:
//!
//! * eavesdroppers, which listen to target-to-anchor ranging signals and try
//!   to localize the target without being synchronized to it, and
//! * jammers, which inject noise at the anchors to degrade the network's own
//!   localization accuracy.
//!
//! On top of the metrics it provides convex relaxations of the selection
//! problems ([`relax`]), rounding, swap local search, exhaustive search and
//! worst-case (robust) transforms ([`select`]), and deterministic scenario
//! generators ([`scenario`]).

pub mod eav;
pub mod error;
pub mod jam;
pub mod relax;
pub mod rng;
pub mod scenario;
pub mod select;
pub mod selection;

pub use error::{Error, Result};
pub use scenario::{Point, Scenario, UncertaintyModel};
pub use selection::{SelectionMode, SelectionVector};

/// Propagation speed used by the signal-level intensity helpers (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Relative determinant threshold below which an information matrix is
/// treated as singular: `det < SINGULAR_TOL * scale^2`, with `scale` the
/// trace of the position block.
pub const SINGULAR_TOL: f64 = 1e-14;
