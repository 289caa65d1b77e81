//! Finite universal algebra: operation tables, relation closures, free
//! algebras of finitely generated varieties and congruence identity checks.

pub mod algebra;
pub mod baker;
pub mod error;
pub mod lattice;
pub mod limits;
pub mod relation;
pub mod replicate;
mod subpower;
pub mod variety;

pub use algebra::{direct_product, Algebra, Operation, Subalgebra, Term};
pub use error::{Error, Result};
pub use limits::Limits;
pub use relation::{BinRel, IdentityStatement, RelExpr, Role};
