//! Repair-hint synthesis for a mini imperative language.
//!
//! Given a faulty program and a test suite with at least one failing test,
//! the pipeline localizes suspicious statements from execution spectra,
//! derives a state transformer per statement (concrete observation for
//! passing tests, angelic value search for failing ones), ranks repair-space
//! expressions by rank correlation with the expected LHS values, and
//! pattern-matches the likely expressions against the faulty RHS to mint
//! ranked insert / replace / remove / retain / compound hints.

pub mod exec;
pub mod hints;
pub mod lang;
pub mod localize;
pub mod pipeline;
pub mod repairspace;
pub mod report;
pub mod stats;
pub mod transformer;
