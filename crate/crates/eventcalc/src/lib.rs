//! A sortal calculus of eventualities.
//!
//! This crate represents episodic facts as sorted attribute-value
//! structures over a small fixed lattice (events and processes, objects
//! and substances, delimited and non-delimited paths), decides whether
//! descriptions are well-sorted, draws inferences from them with a
//! small rule calculus, and maps a controlled English fragment onto
//! them in both directions.
//!
//! The pieces:
//!
//! * [`sorts`] — the fixed sort lattice and its continuum/delimited
//!   cross-classification.
//! * [`units`] — exact rational measures and the closed conversion
//!   table.
//! * [`avm`] — attribute-value structures: paths, unification,
//!   subsumption, fresh renaming.
//! * [`sortal`] — the well-sortedness checker and its named
//!   constraints, plus adverbial-compatibility profiles.
//! * [`calculus`] — duration weakening, quantity derivation via rate
//!   facts, existential weakening, the along-path distance equivalence,
//!   and subsumption-based entailment with witnesses.
//! * [`grammar`] — the controlled-English fragment: parsing,
//!   realization, paraphrase generation.
//! * [`kb`] — the canonical text format and KB file persistence.
//!
//! A guided tour with runnable examples lives in the `book/` directory;
//! its chapters compile and run as doctests of this crate.

pub mod avm;
pub mod calculus;
pub mod grammar;
pub mod kb;
pub mod sortal;
pub mod sorts;
pub mod units;

pub use avm::{alpha_eq, rename_fresh, subsumes, unify, Avm, Clash, Feature, Index, Value};
pub use calculus::{
    duration_weaken, entails, entails_with_depth, existential_weaken, path_measure_equiv,
    quantity_derive, Derivation, Kb, RateFact, Rule,
};
pub use grammar::Fragment;
pub use kb::{canonical_text, parse_kb, parse_text};
pub use sortal::{adverbial_compatibility, check, Constraint, Diagnostic, Lexicon};
pub use sorts::Sort;
pub use units::{convert, measure_leq, Measure, Rational, Unit};

// The book's chapters double as doctests so the guide can never drift
// from the crate.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/sorts.md")]
    mod sorts {}
    #[doc = include_str!("../../../book/src/avms.md")]
    mod avms {}
    #[doc = include_str!("../../../book/src/well-sortedness.md")]
    mod well_sortedness {}
    #[doc = include_str!("../../../book/src/calculus.md")]
    mod calculus {}
    #[doc = include_str!("../../../book/src/fragment.md")]
    mod fragment {}
    #[doc = include_str!("../../../book/src/kb-and-cli.md")]
    mod kb_and_cli {}
}
