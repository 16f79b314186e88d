//! Exact cohomological calculator for the abelian vortex invariants of
//! weighted projective targets: graded-ring arithmetic on
//! H*(T^{2g} x Sigma; Q), the family index of the universal line bundle,
//! Chern series, and the localization integral with its closed form.
//!
//! Everything here is exact rational arithmetic; floating point never
//! enters.

pub mod cohomology;
pub mod invariants;

pub use cohomology::{Monomial, Rat, RingElement, SigmaPart};
pub use invariants::{
    chern_series, dimension_weighted, family_index, invariant_weighted, sw_ruled,
    theorem_b_closed_form, FamilyIndex, OmegaSeries, SwRuled, WeightedProblem,
};
