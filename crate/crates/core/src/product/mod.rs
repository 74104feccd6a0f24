//! Product metrics generated by functions on the standard simplex.
//!
//! Component distances `d_1, …, d_n` are combined as
//! `d_ψ(x, y) = (Σ d_i) · ψ(d_1/Σ, …, d_n/Σ)`. For `ψ_p` this is the `ℓ_p`
//! combination of the component distances. The module also carries the
//! transfer bounds between two simplex functions and the exact constants of
//! `ψ_p` products.

mod constants;
mod simplex;
mod space;

pub use constants::{
    check_clarkson_lift, dominating_exact_constant, min_max_ratio, pmetric_constant, power_mean_oracle, replicate,
    transfer_bounds, MinMaxRatio, PowerMeanVariant, Side,
};
pub use simplex::{
    audit_membership, default_resolution, make_custom_psi, make_psi_p, named_psi, random_simplex_points, simplex_grid,
    MembershipCheck, MembershipReport, PsiKind, SimplexFunction, RANDOM_POINTS,
};
pub use space::{make_product, Component, ProductSpace};
