//! Transition amplitudes, geometric means of positive forms and modular
//! theory on finite direct sums of matrix algebras.

pub mod algebra;
pub mod amplitudes;
pub mod central;
pub mod error;
pub mod forms;
pub mod io;
pub mod linalg;
pub mod modular;
pub mod quasifree;
pub mod random;
pub mod restriction;
pub mod tolerance;

pub use algebra::{
    classify_pair, make_algebra, BlockAlgebra, BlockOperator, Functional, L2Vector, PairRelation,
};
pub use amplitudes::{inequality_suite, transition_amplitude, uhlmann_fidelity};
pub use error::{Error, Result};
pub use forms::{
    geometric_mean, is_dominated, left_form, pw_representation, right_form, HermitianForm,
    PositiveForm,
};
pub use tolerance::Tolerances;
