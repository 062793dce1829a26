//! Fixed-budget Pareto set identification for multi-objective bandits.
//!
//! The crate covers the gap and complexity calculus of an instance
//! ([`pareto`]), elimination algorithms driven by empirical gaps ([`ege`])
//! with their round schedules ([`schedule`]), the APE-FB baseline ([`ape`]),
//! hard-instance constructions ([`lowerbound`]), instance generators and
//! samplers ([`envs`]) and a seeded Monte Carlo harness ([`harness`]).
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to one precision. Arms are indexed from 0.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ape;
pub mod ege;
pub mod envs;
pub mod error;
pub mod harness;
pub mod hypervolume;
pub mod lowerbound;
pub mod pareto;
pub mod scalar;
pub mod schedule;

pub use ape::{ape_fb_adapt_run, ape_fb_run, beta, opt_set, select_bt_ct, tune_a, ApeConfig};
pub use ege::{
    ege_run, ege_sr_k_run, empirical_gaps, empirical_pareto_set, psi_k_loss, select_survivors, EmpiricalState,
    RoundGaps, TrialRecord,
};
pub use envs::{gen_experiment, BanditInstance, NoiseSpec, Sampler, SeededSampler};
pub use error::{PsiError, Result};
pub use hypervolume::{hv_fraction, hypervolume};
pub use lowerbound::{
    alternative_instance, class_b_check, lb_value, verify_gap_preservation, ClassBReport, ClassVariant,
};
pub use pareto::{
    big_m, complexity_profile, dominated_by, gap_optimal, gap_suboptimal, gap_unified, little_m, pareto_set,
    relaxed_profile, GapProfile, MeanMatrix, RelaxedGapProfile,
};
pub use scalar::Scalar;
pub use schedule::{Schedule, ScheduleViolation};

pub type MeanMatrixF64 = MeanMatrix<f64>;
pub type MeanMatrixF32 = MeanMatrix<f32>;
pub type GapProfileF64 = GapProfile<f64>;
pub type GapProfileF32 = GapProfile<f32>;
pub type RelaxedGapProfileF64 = RelaxedGapProfile<f64>;
pub type EmpiricalStateF64 = EmpiricalState<f64>;
pub type EmpiricalStateF32 = EmpiricalState<f32>;
pub type ClassBReportF64 = ClassBReport<f64>;
