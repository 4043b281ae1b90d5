//! Exact envelope probabilities, structural checks and samplers for the
//! co-induced invariant random subgroups of F2 built from the Cohen–Lyndon
//! decomposition F2' = ∗_{t} t⟨[a,b]⟩t⁻¹.

pub mod cohenlyndon;
pub mod error;
pub mod exactnum;
pub mod freegroup;
pub mod grid;
pub mod measures;
pub mod sampler;
pub mod suites;

pub use error::{Error, Result};
