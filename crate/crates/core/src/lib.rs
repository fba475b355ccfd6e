//! A typechecker, small-step evaluator and soundness harness for a core
//! calculus of tagged objects: runtime-generated nominal tags arranged in a
//! hierarchy, dependent products and sums over names, records, and
//! iso-recursive types.

pub mod dynamics;
pub mod harness;
pub mod parse;
pub mod pretty;
pub mod program;
pub mod store;
pub mod subst;
pub mod subtype;
pub mod syntax;
pub mod typing;
