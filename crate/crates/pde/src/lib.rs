//! Numerical engine for the abelian symplectic vortex equations on flat
//! 2-tori: discrete calculus, spectral Poisson solves, Kazdan-Warner
//! solvers (single surface, multi-weight and coupled product form),
//! theta-function vortex backgrounds, the energy identity, and Coulomb
//! gauge fixing by Newton iteration.

pub mod connection;
pub mod coupled;
pub mod theta;
pub mod vortex;
pub mod fft;
pub mod gauge_fix;
pub mod grid;
pub mod kazdan_warner;

pub use connection::{
    curvature_su2, curvature_u1, covariant_d_section, covariant_d_star_section,
    covariant_d_star_su2, covariant_d_su2, gauge_apply, gauge_apply_section, slice_residual,
    GaugeError, GaugeTransform, LatticeConnection, Su2Field, Su2Group,
};
pub use grid::{laplacian, poisson_solve, GridError, ScalarField, TorusGrid, TwistedSection};
