//! Exact, desk-scale sum-product machinery over the matrix ring M2(F_q).
//!
//! - [`gf`]: the fields F_q, q <= 27.
//! - [`mat2`]: matrix arithmetic and the 2x4 rank kernels.
//! - [`setalg`]: sumsets, product sets, energies, and the counters `I`, `J`.
//! - [`fourier`]: exact character transforms over `(Z/p)^n`.
//! - [`digraph`]: the sum-product digraph, its pair classification, Gram
//!   weights, exact spectrum, and mixing checks.
//! - [`decomp`]: dyadic pigeonholing and the low-energy decomposition.
//! - [`constructions`]: the extremal examples and seeded random sets.

pub mod constructions;
pub mod decomp;
pub mod digraph;
pub mod error;
pub mod fourier;
pub mod gf;
pub mod mat2;
pub mod setalg;

pub use constructions::{ConstructionSpec, Universe};
pub use decomp::{Branch, DecompositionTrace, DyadicLevelResult, PigeonholeCertificate};
pub use digraph::{DigraphOracle, Direction, PairClass, PairTag, SpectralResult, Variant, Vertex};
pub use error::{Error, Result};
pub use gf::{make_field, Fe, FieldSpec, Order};
pub use mat2::{Block2x4, CompatibilityTag, Mat2, MatRing};
pub use setalg::{FreqTable, MatSet, Op};
