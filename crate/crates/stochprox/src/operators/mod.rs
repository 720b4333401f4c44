//! Closed-form proximity operators, projections, and gradients, plus the
//! brute-force prox oracle used to certify them. All operators are pure
//! functions of their arguments.

mod brute;
mod losses;
mod sets;
mod simple;
mod sqdist;

pub use brute::{brute_force_prox, independent_sqdist, penalized_indicator};
pub use losses::{
    hinge_min_norm_subgrad, hinge_oracle, hinge_prox, hinge_value, logistic_grad,
    logistic_lipschitz, logistic_oracle, logistic_value, sigmoid, softplus,
};
pub use sets::{project, ConvexSet};
pub use simple::{indicator_oracle, l1_oracle, quadratic_prox_oracle, quadratic_smooth_oracle};
pub use sqdist::{sqdist_grad, sqdist_oracle, sqdist_value};
