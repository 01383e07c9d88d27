//! Fixed-precision p-adic dynamics.
//!
//! Values in `Z_p^k` are digit vectors truncated at a precision `n`. Maps are
//! anything implementing [`CompatibleMap`], most often parsed from the small
//! T-function language in [`dsl`]. The [`analysis`] module certifies
//! bijectivity and single-cycle transitivity of the induced permutations
//! modulo `p^n`, and [`transfer`] converts ergodic maps on `Z_p^k` into
//! ergodic maps on `Z_p` through digit interleaving and an orbit twist.

pub mod analysis;
pub mod dsl;
pub mod error;
pub mod fixtures;
pub mod interleave;
pub mod map;
pub mod padic;
pub mod transfer;
pub mod twist;

pub use error::{Error, Result};
pub use interleave::{deinterleave, interleave};
pub use map::{CompatibleMap, MapRef};
pub use padic::{PAdicInt, PAdicVec};
pub use twist::TwistPermutation;
