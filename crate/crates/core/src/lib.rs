//! Morphosyntactic tagging and analyzer-based disambiguation for
//! morphologically rich languages.
//!
//! This crate is `no_std` and only needs `alloc`. File formats, the
//! experiment runner and the command-line front end live in the `morphdis`
//! crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analyzer;
pub mod corpus;
pub mod disambiguator;
pub mod error;
pub mod eval;
pub mod harmonizer;
pub mod schema;
pub mod synth;
pub mod tagger;

pub use analyzer::{AnalyzerDb, BackoffPolicy, Lookup};
pub use corpus::{Analysis, AnnotatedToken, Corpus, Sentence, Split};
pub use disambiguator::{RankedCandidate, UnigramModel};
pub use error::Error;
pub use schema::{FeatureBundle, FeatureDef, FeatureSchema, UnfactoredTag};
pub use tagger::{FeatureDistribution, TaggerKind, TaggerModel};

/// Seed used whenever the caller does not pick one.
pub const DEFAULT_SEED: u64 = 12345;

pub type Result<T, E = Error> = core::result::Result<T, E>;
