//! Observation-mode scheduling for non-deterministic transition systems.
//!
//! The pipeline is: [`model`] → [`formula`] → [`dfa`] → [`product`] →
//! [`belief`] → [`synthesis`], with [`runtime`] executing strategies and
//! [`oracle`] re-checking them by exhaustive adversarial exploration.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod belief;
pub mod cost;
pub mod dfa;
pub mod formula;
pub mod model;
pub mod oracle;
pub mod product;
pub mod runtime;
pub mod synthesis;

pub use belief::{build_belief, BeliefAction, BeliefGraph, BeliefId, BeliefStats};
pub use cost::{Cost, Value};
pub use dfa::{compile_to_dfa, Dfa};
pub use formula::{expand_bounded, holds_strong, parse_formula, ApSet, Formula};
pub use model::{validate_model, NtsModel, RawModel};
pub use product::{build_product, LabelingConvention, Product};
pub use synthesis::{synth_bounded, synth_unbounded, wtg_profile, Strategy};
