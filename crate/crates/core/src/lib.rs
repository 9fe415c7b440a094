//! Enumeration of partial Latin squares up to species equivalence and
//! classification of their embeddability into groups.
//!
//! A partial Latin square `P` embeds in a group `G` when its rows, columns
//! and symbols can be assigned distinct-within-family labels in `G` such
//! that every filled cell satisfies `row * col = sym`.  Each square also
//! defines a finitely presented group whose structure decides embeddability.
//! This crate provides the combinatorial layer (parsing, canonical forms,
//! species enumeration, candidate pruning), the algebraic engines
//! (presentation reduction, abelianization via Smith normal form,
//! Knuth-Bendix rewriting, Todd-Coxeter coset enumeration, a small-group
//! catalog), and a classification pipeline that emits checkable verdicts.

pub mod abelian;
pub mod baumslag;
pub mod canon;
pub mod corpus;
pub mod coset;
pub mod groups;
pub mod pipeline;
pub mod pls;
pub mod presentation;
pub mod rewrite;
pub mod snf;
pub mod species;
pub mod word;

#[doc(hidden)]
pub mod testing;
