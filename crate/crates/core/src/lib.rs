//! Regular pairings, directional angles, logarithmic norms and directional
//! scaled relative graphs (SRGs) on finite-dimensional l1, l2 and l-infinity
//! spaces.
//!
//! A typical run samples increments of an operator, turns them into a
//! [`srg::SrgCloud`], and asks [`srg::certify`] whether the cloud stays inside
//! the region of a property such as monotonicity or a Lipschitz bound:
//!
//! ```
//! use srg_core::case_studies::example_matrices;
//! use srg_core::prelude::*;
//!
//! let (a1, _) = example_matrices();
//! let op = Operator::matrix(a1).unwrap();
//! let sampler = IncrementSampler::new(SamplerKind::Mixed);
//! let cloud = sample_srg(&op, PairingSpec::L1Sign, Side::Left, &sampler, 500, 42).unwrap();
//! let report = certify(&cloud, Property::StronglyMonotone(0.0)).unwrap();
//! assert!(report.holds());
//! ```

pub mod case_studies;
pub mod error;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod pairings;
pub mod sampling;
pub mod srg;

pub use error::{Result, SrgError};

pub mod prelude {
    pub use crate::error::{Result, SrgError};
    pub use crate::geometry::{cos_left, cos_right, log_norm_closed_form, Side};
    pub use crate::linalg::Matrix;
    pub use crate::pairings::{norm, pair, NormKind, PairingSpec, Vector};
    pub use crate::sampling::{ExecMode, IncrementSampler, SamplerKind, SphereSampler};
    pub use crate::srg::{certify, contraction_factor, sample_srg, Operator, Property, SrgCloud, SrgPoint, Verdict};
}
