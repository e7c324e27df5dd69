//! Dense numerics: matrices, vector kernels, parameters, Adam and the
//! finite-difference gradient checker every layer is validated against.

mod adam;
mod gradcheck;
mod matrix;
mod ops;
mod param;
pub mod rng;

pub use adam::{adam_step, Adam, AdamConfig, AdamState};
pub use gradcheck::{grad_check, GradCheckReport};
pub use matrix::{dot, Matrix};
pub use ops::{
    affine_backward, affine_backward_accumulate, affine_forward, concat, hadamard, sigmoid,
    sigmoid_map, split, tanh_map, AffineGrads,
};
pub use param::{glorot_init, Param, ParamSet};
pub use rng::{derive_seed, SplitRng};
