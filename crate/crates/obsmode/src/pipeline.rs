//! Model + formula → DFA → product → belief graph, in one place.

use obsmode_core::belief::{build_belief, BeliefGraph, BeliefOptions};
use obsmode_core::dfa::{compile_to_dfa, Dfa, DfaError};
use obsmode_core::formula::{parse_formula, ApSet, Formula, ParseError};
use obsmode_core::model::NtsModel;
use obsmode_core::product::{build_product, LabelingConvention, Product, ProductError};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("formula: {0}")]
    Parse(#[from] ParseError),
    #[error("automaton: {0}")]
    Dfa(#[from] DfaError),
    #[error("product: {0}")]
    Product(#[from] ProductError),
}

#[derive(Clone, Debug)]
pub struct Pipeline {
    pub model: NtsModel,
    pub formula_text: String,
    pub formula: Formula,
    pub dfa: Dfa,
    pub product: Product,
    pub graph: BeliefGraph,
}

impl Pipeline {
    pub fn build(
        model: NtsModel,
        formula_text: &str,
        convention: LabelingConvention,
        options: BeliefOptions,
    ) -> Result<Pipeline, PipelineError> {
        let ap = ApSet::new(model.propositions().iter().cloned());
        let formula = parse_formula(formula_text, &ap)?;
        let dfa = compile_to_dfa(&formula, &ap)?;
        let product = build_product(&model, &dfa, convention)?;
        let graph = build_belief(&model, &product, options);
        Ok(Pipeline { model, formula_text: formula_text.to_string(), formula, dfa, product, graph })
    }

    pub fn convention(&self) -> LabelingConvention {
        self.product.convention()
    }
}
