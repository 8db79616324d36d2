//! Bivector fields on the double and on `S = D/G₊ ≅ G`, their Schouten
//! brackets, and the twisted conjugation action of `G₊^σ ≅ G` on `S`.
//!
//! All tangent spaces are identified with `𝔤` (or `𝔡`) by right translation.
//! A bivector at a point is stored as the map `𝔤* → 𝔤` in coordinates; the
//! scalar `P(ξ, η)` is `ξ(P(η))`.

mod action;
mod bivector;
mod schouten;

pub use action::{
    act, check_fixed_point, check_invariance, image_basis, infinitesimal_action, probe_elements,
    su2_isomorphism_check, su2_u, FixedPoint, ImageInfo,
};
pub use bivector::{p_d_sigma, p_s_sigma, p_s_via_s_sigma, project_p_d_to_s, BasePoint, BivectorMap};
pub use schouten::{
    phi_s, phi_s_trivector, schouten_closed, schouten_fd, schouten_trivector, twist_operator,
    TrivectorValue, TwistOperator,
};
