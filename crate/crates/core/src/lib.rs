//! Exact construction and certification of spark-optimal dictionaries.
//!
//! A dictionary here is a union of q+1 orthonormal bases of R^{2^n}
//! (q = 2^r, n = 2tr): the standard basis plus q bases of ±1/2^m trace
//! character vectors over GF(2^n). This crate builds those dictionaries
//! with integer-scaled exact arithmetic, computes their mutual coherence
//! as an exact rational, certifies their spark by matching a verified
//! dependence witness against the union-of-bases lower bound, and
//! cross-checks the result with an independent brute-force spark search.
//!
//! Everything is integer or rational arithmetic; there is not a single
//! floating-point number in the crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod certify;
pub mod construct;
pub mod field;
pub mod oracle;
pub mod recover;

pub use certify::{
    certify, cross_coherence_check, lemma_suite, lower_bounds, mutual_coherence, verify_witness,
    Bounds, CertifyError, Check, GramKind, GramSummary, GramViolation, Rational, SparkCertificate,
    SparkConclusion, WitnessError,
};

pub use construct::{
    build_basis, build_dictionary, build_s, build_standard_basis, dependent_set, ColumnLabel,
    DependencyWitness, ScaledColumn, ScaledDictionary,
};
pub use field::{FieldElement, FieldSpec};
pub use oracle::{
    binomial, brute_spark, exact_rank, prune_by_coherence, search_level_with_first,
    subset_lex_rank, OracleError, RankResult, SparkOutcome, SparkSearchReport,
};
pub use recover::{
    l0_solve, synthesize, uniqueness_demo, CollisionExhibit, DemoReport, L0Solution, RecoverError,
    SparseVector,
};
