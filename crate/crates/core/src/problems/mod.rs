//! Benchmark problems.

pub mod ensemble;
pub mod poison;
pub mod quadratic;
pub mod toy;

pub use ensemble::{
    ensemble_problem, inner_max_argmax, inner_max_weights, pair_losses, weighted_objective, EnsembleProblemSpec,
    LinearModel,
};
pub use poison::{
    fit_clean_model, gen_synthetic_logreg, poisoning_problem, test_accuracy, PoisonProblemSpec, Split,
    SyntheticLogRegData,
};
pub use quadratic::{quadratic_saddle, QuadraticSaddle, QuadraticSaddleSpec, ShiftNoise};
pub use toy::{toy_f, toy_grad, toy_polynomial, toy_regret, toy_robust_value};
