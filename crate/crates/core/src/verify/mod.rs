//! Independent checks of the closed-form constants and the solver.

pub mod extremal;
pub mod oracles;
pub mod report;
pub mod suite;

pub use extremal::{attainment_ratio_hom, attainment_ratio_nonhom, build_extremal_hom, build_extremal_nonhom, ExtremalSpec};
pub use oracles::{kernel_grad_norm_oracle, spacetime_grad_norm_oracle};
pub use report::{write_jsonl, CheckMode, ReportConfig, VerificationReport};
pub use suite::{run_suite, SuiteConfig, SuiteOutcome};
