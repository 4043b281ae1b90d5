//! Symbolic IRS descriptors and their envelope probabilities.

mod descriptor;
mod eval;
mod predicates;

pub use descriptor::{family_lambda, ConvexTerm, MeasureDescriptor};
pub use eval::{chain_env_weight, env_prob, ring_tail_bound, EnvEvent, Evaluator, TailCertificate};
pub use predicates::{
    check_combination_identities, essential, essential_with, kernel_contains, kernel_contains_with,
    mixing_defect, mixing_defect_for, supported_in, CertifiedBool, CombinationReport,
    CombinationRow, SymbolicGroup,
};
