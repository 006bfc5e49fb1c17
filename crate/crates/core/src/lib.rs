//! Finite-scale laboratory for affine isometric actions on L_p spaces.
//!
//! The crate builds the objects that carry an affine action on `L_p` over to
//! one on `L_q` for `p < q`: Lamperti isometries and their cocycles, skew
//! products, the Maharam extension, the Gaussian functor for `p = 2`, and
//! Mazur maps. Every construction is instantiated on finite measure spaces
//! with finite groups, and the continuous factors (the half-line of the
//! Maharam extension, the complex-plane fiber) are integrated numerically
//! instead of being discretized.
//!
//! The central computation is [`transfer::transfer_action`], which certifies
//! `Σ_x μ(x) I(c(g)(x)) = C(q)·ψ(g)` for every group element by nested
//! adaptive quadrature.

pub mod error;
pub mod gaussian;
pub mod group;
pub mod lp;
pub mod mazur;
pub mod measure;
pub mod quadrature;
pub mod random;
pub mod rng;
pub mod transfer;

pub use error::{LabError, Result};
pub use measure::{lp_norm, lp_power_sum, pushforward_density, DensityFunction, FiniteMeasureSpace, Permutation};
pub use num_complex::Complex64;
