//! Three-body inelastic rates near narrow Feshbach resonances.
//!
//! * [`units`]: constants and unit conversions into atomic units.
//! * [`twobody`]: model pair potentials, phase shifts, effective-range fits
//!   and tuning of the potential to a target `(a, r_eff)`.
//! * [`zrp`]: zero-range model channel exponents and the universal constants.
//! * [`rates`]: closed-form rates and the single-channel numeric model.
//! * [`feshbach`]: resonance catalog and effective ranges from resonance data.
//! * [`scan`]: rate scans over `a` and fits of the region boundaries to peaks.

// Negated float comparisons are used deliberately so that NaN fails checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod feshbach;
pub mod numerics;
pub mod rates;
pub mod scan;
pub mod twobody;
pub mod units;
pub mod zrp;

pub use error::{Error, Result};
pub use feshbach::{Classification, ResonanceEntry};
pub use rates::analytic::{BroadParams, NarrowSpec, RegimeGuard, ShortRangeParams};
pub use rates::numeric::{PiecewiseChannel, ScatterResult, StepSpec};
pub use rates::{Middle, Process, Wave};
pub use scan::{PeakFit, ScanRow, ScanSpec};
pub use twobody::{PhaseShiftSample, PotentialKind, PotentialModel, ScatteringFit};
pub use units::PhysicalConstants;
pub use zrp::{ChannelExponent, ZrpPotentialPoint, P0};
