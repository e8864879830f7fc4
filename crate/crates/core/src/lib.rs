//! Neighbourhood profiles, generalized subgraph freeness and local reductions
//! for bounded-degree structures.

mod canon;
pub mod enumerate;
pub mod error;
pub mod formats;
pub mod gsf;
pub mod hanf;
pub mod harness;
pub mod neighborhoods;
pub mod reduction;
pub mod structures;
pub mod zigzag;

pub use error::{Error, Result};
pub use structures::{Graph, Signature, Structure, Symbol, TupleAnswer};
