//! Kernel and frontend for a dependently typed logical framework with
//! strong intersection types, strong union types, and minimal relevant
//! implication.
//!
//! Layout:
//! - [`syntax`]: terms, binding, signatures, contexts
//! - [`essence`]: the essence map into the pure lambda calculus
//! - [`reduction`]: small-step reduction and definitional equality
//! - [`typing`]: the five judgment checkers
//! - [`subtyping`]: the decidable subtype theory and coercion synthesis
//! - [`printer`] / [`parser`] / [`session`]: concrete syntax and the REPL
//! - [`metacheck`]: erasure mappings, simulation checks, and a well-typed
//!   term fuzzer

pub mod essence;
pub mod metacheck;
pub mod parser;
pub mod printer;
pub mod reduction;
pub mod session;
pub mod subtyping;
pub mod syntax;
pub mod typing;
