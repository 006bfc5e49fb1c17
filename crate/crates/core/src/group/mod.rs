//! Finite groups, nonsingular actions, abelian-valued cocycles, skew
//! products and the Maharam extension.

mod action;
mod cocycle;
mod extension;
mod finite;

pub use action::{check_action, ActionReport, NonsingularAction};
pub use cocycle::{
    angle_dist, check_cocycle, check_cocycle_in, coboundary, log_density_cocycle, wrap_angle, Cocycle,
    CocycleDoc, CocycleReport, CoefficientGroup, CoefficientValue,
};
pub use extension::{grid_index, maharam_extension, skew_product, Fiber, MaharamDescriptor, SkewProductAction};
pub use finite::{FiniteGroup, SUPPORTED_ORDER};

pub(crate) use action::per_element;
