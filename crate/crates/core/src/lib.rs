pub mod baselines;
pub mod eval;
pub mod index;
pub mod llm;
pub mod parse;
pub mod pipeline;
pub mod planner;
pub mod resolver;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/parsing.md")]
    mod parsing {}
    #[doc = include_str!("../../../book/src/planning.md")]
    mod planning {}
    #[doc = include_str!("../../../book/src/resolving.md")]
    mod resolving {}
    #[doc = include_str!("../../../book/src/model-access.md")]
    mod model_access {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    mod baselines {}
    #[doc = include_str!("../../../book/src/retrieval.md")]
    mod retrieval {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
}
