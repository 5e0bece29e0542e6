//! Orthogonal wavelet systems on p-adic Vilenkin groups generated by rooted trees.
//!
//! The pipeline is tree → mask → refinable function → wavelets → filter bank:
//!
//! * [`tree`] validates and enumerates rooted trees on `{0, …, p-1}`;
//! * [`mask`] turns a tree into the 1-elementary mask `m₀` and back;
//! * [`refinable`] builds `φ̂` by path products and recovers `φ`;
//! * [`wavelet`] solves for the refinement coefficients and builds `ψ₁, …, ψ_{p-1}`;
//! * [`transform`] runs the multi-level analysis/synthesis filter bank;
//! * [`verify`] checks every construction by exact finite computation.

pub mod error;
pub mod group;
pub mod io;
pub mod mask;
pub mod refinable;
pub mod transform;
pub mod tree;
pub mod verify;
pub mod wavelet;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use group::{DigitVector, Limits, Modulus, Tag, Window};
pub use mask::{EdgePhases, MaskTable};
pub use refinable::{SpectrumTable, StepFunction};
pub use transform::{CoeffGrid, CoeffPyramid, FilterBank};
pub use tree::RootedTree;
pub use verify::{Check, VerificationReport, VerifyLevel};
pub use wavelet::WaveletSystem;
