use nalgebra::{DMatrix, DVector};

use crate::double::{DoubleElement, QuasiTriple};
use crate::lie::{Covector, GroupElement};
use crate::linalg;

/// Where a bivector value lives.
#[derive(Debug, Clone, PartialEq)]
pub enum BasePoint {
    Group(GroupElement),
    Double(DoubleElement<GroupElement>),
}

/// Value of a bivector field at a point, as the coordinate matrix of the map
/// from covectors to right-trivialized tangent vectors.
#[derive(Debug, Clone)]
pub struct BivectorMap {
    base: BasePoint,
    matrix: DMatrix<f64>,
}

impl BivectorMap {
    pub fn new(base: BasePoint, matrix: DMatrix<f64>) -> Self {
        BivectorMap { base, matrix }
    }

    pub fn base(&self) -> &BasePoint {
        &self.base
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `P(ξ)` in coordinates.
    pub fn apply(&self, xi: &DVector<f64>) -> DVector<f64> {
        &self.matrix * xi
    }

    /// `P(ξ, η) = ξ(P(η))`.
    pub fn value(&self, xi: &Covector, eta: &Covector) -> f64 {
        xi.coords().dot(&(&self.matrix * eta.coords()))
    }

    /// `max |ξ(P η) + η(P ξ)|` over basis covectors.
    pub fn antisymmetry_residual(&self) -> f64 {
        linalg::max_abs(&(&self.matrix + self.matrix.transpose()))
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.matrix)
    }

    /// Max-entry distance between two bivector values.
    pub fn distance(&self, other: &BivectorMap) -> f64 {
        linalg::max_abs(&(&self.matrix - &other.matrix))
    }

    pub fn rank(&self) -> usize {
        linalg::pivot_rank(&self.matrix, linalg::PIVOT_THRESHOLD)
    }
}

fn block(top_left: &DMatrix<f64>, top_right: &DMatrix<f64>, bottom_left: &DMatrix<f64>, bottom_right: &DMatrix<f64>) -> DMatrix<f64> {
    let n = top_left.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(top_left);
    m.view_mut((0, n), (n, n)).copy_from(top_right);
    m.view_mut((n, 0), (n, n)).copy_from(bottom_left);
    m.view_mut((n, n), (n, n)).copy_from(bottom_right);
    m
}

/// `P_D^σ` at `d = (a, b)`:
/// `(ξ, η) ↦ ½(K⁻¹(η∘σ∘(Ad_{σ(b)a⁻¹} − 1)), −K⁻¹(ξ∘σ∘(Ad_{σ(a)b⁻¹} − 1)))`.
pub fn p_d_sigma(qt: &QuasiTriple, a: &GroupElement, b: &GroupElement) -> BivectorMap {
    let ctx = qt.ctx();
    let n = ctx.dim();
    let s = qt.sigma_matrix();
    let sigma = qt.sigma();
    let id = DMatrix::identity(n, n);
    let a1 = ctx.ad_matrix(&sigma.apply_grp(b).mul(&a.inverse())) - &id;
    let a2 = ctx.ad_matrix(&sigma.apply_grp(a).mul(&b.inverse())) - &id;
    let gi = ctx.gram_inv();
    // a covector ξ∘L has coordinates Lᵀξ
    let top_right = gi * (s * a1).transpose() * 0.5;
    let bottom_left = gi * (s * a2).transpose() * -0.5;
    let zero = DMatrix::zeros(n, n);
    BivectorMap::new(
        BasePoint::Double(DoubleElement::new(a.clone(), b.clone())),
        block(&zero, &top_right, &bottom_left, &zero),
    )
}

/// Pushes a bivector on `D` through a tangent map `p: 𝔡 → 𝔤` given as an
/// `n × 2n` coordinate matrix.
fn push_forward(p: &DMatrix<f64>, on_double: &BivectorMap, base: GroupElement) -> BivectorMap {
    BivectorMap::new(BasePoint::Group(base), p * on_double.matrix() * p.transpose())
}

fn tangent_map(first: &DMatrix<f64>, second: &DMatrix<f64>) -> DMatrix<f64> {
    let n = first.nrows();
    let mut p = DMatrix::zeros(n, 2 * n);
    p.view_mut((0, 0), (n, n)).copy_from(first);
    p.view_mut((0, n), (n, n)).copy_from(&(-second));
    p
}

/// `p ∘ P_D^σ(a, b) ∘ p*` for the projection `(a, b) ↦ ab⁻¹` onto `S ≅ G`,
/// whose tangent map is `(x, y) ↦ x − Ad_{ab⁻¹} y`.
pub fn project_p_d_to_s(qt: &QuasiTriple, a: &GroupElement, b: &GroupElement) -> BivectorMap {
    let ctx = qt.ctx();
    let s = a.mul(&b.inverse());
    let p = tangent_map(&DMatrix::identity(ctx.dim(), ctx.dim()), &ctx.ad_matrix(&s));
    push_forward(&p, &p_d_sigma(qt, a, b), s)
}

/// Closed form `P_S^σ(s)(ξ) = ½(Ad_{σ(s)⁻¹} − Ad_s) ∘ σ ∘ K⁻¹(ξ)`.
pub fn p_s_sigma(qt: &QuasiTriple, s: &GroupElement) -> BivectorMap {
    let ctx = qt.ctx();
    let left = ctx.ad_matrix(&qt.sigma().apply_grp(s).inverse());
    let right = ctx.ad_matrix(s);
    let m = (left - right) * qt.sigma_matrix() * ctx.gram_inv() * 0.5;
    BivectorMap::new(BasePoint::Group(s.clone()), m)
}

/// Projects `P_D^σ(g, h)` onto `S^σ = D/G₊^σ` through `(g, h) ↦ gσ(h)⁻¹`,
/// whose tangent map is `(x, y) ↦ x − Ad_{gσ(h)⁻¹} σ(y)`.
///
/// The result is a bivector on `G` at `gσ(h)⁻¹`; it coincides with the
/// untwisted `P_S` there.
pub fn p_s_via_s_sigma(qt: &QuasiTriple, g: &GroupElement, h: &GroupElement) -> BivectorMap {
    let ctx = qt.ctx();
    let s = g.mul(&qt.sigma().apply_grp(h).inverse());
    let p = tangent_map(
        &DMatrix::identity(ctx.dim(), ctx.dim()),
        &(ctx.ad_matrix(&s) * qt.sigma_matrix()),
    );
    push_forward(&p, &p_d_sigma(qt, g, h), s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{real_matrix, GroupKind, LieContext};
    use crate::sampling::Sampler;

    fn sl2_qt() -> QuasiTriple {
        QuasiTriple::standard(LieContext::new(GroupKind::SL2R, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn p_d_vanishes_at_identity_and_diagonal() {
        let qt = sl2_qt();
        let e = qt.ctx().identity();
        assert_eq!(p_d_sigma(&qt, &e, &e).max_abs(), 0.0);
        let g = GroupElement::new(real_matrix(2, &[2.0, 0.0, 0.0, 0.5])).unwrap();
        assert!(p_d_sigma(&qt, &g, &g).max_abs() < 1e-15);
    }

    #[test]
    fn p_d_is_antisymmetric() {
        let qt = sl2_qt();
        let mut s = Sampler::new(5);
        for _ in 0..20 {
            let (a, b) = (s.group(qt.ctx()), s.group(qt.ctx()));
            assert!(p_d_sigma(&qt, &a, &b).antisymmetry_residual() < 1e-12);
        }
    }

    #[test]
    fn p_s_on_diagonal_points() {
        // σE = −E and Ad_{s^{∓1}}E = λ^{∓2}E, so P(K♭E) = ½(λ² − λ⁻²)E.
        let qt = sl2_qt();
        for lambda in [0.5, 1.3, 2.0] {
            let s = GroupElement::new(real_matrix(2, &[lambda, 0.0, 0.0, 1.0 / lambda])).unwrap();
            let p = p_s_sigma(&qt, &s);
            let e = &qt.ctx().basis()[1];
            let h = &qt.ctx().basis()[0];
            let out = p.apply(qt.ctx().flat(e).unwrap().coords());
            let expected = 0.5 * (lambda * lambda - 1.0 / (lambda * lambda));
            assert!((out[1] - expected).abs() < 1e-14);
            assert!(out[0].abs() < 1e-15 && out[2].abs() < 1e-15);
            assert!(p.apply(qt.ctx().flat(h).unwrap().coords()).amax() < 1e-15);
        }
        assert_eq!(p_s_sigma(&qt, &qt.ctx().identity()).max_abs(), 0.0);
    }

    #[test]
    fn projection_matches_closed_form() {
        let qt = sl2_qt();
        let mut s = Sampler::new(9);
        for _ in 0..10 {
            let (a, b) = (s.group(qt.ctx()), s.group(qt.ctx()));
            let projected = project_p_d_to_s(&qt, &a, &b);
            let closed = p_s_sigma(&qt, &a.mul(&b.inverse()));
            assert!(projected.distance(&closed) < 1e-12);
        }
    }

    #[test]
    fn s_sigma_route_matches_untwisted() {
        let qt = sl2_qt();
        let plain = qt.without_twist();
        let mut s = Sampler::new(13);
        for _ in 0..10 {
            let (g, h) = (s.group(qt.ctx()), s.group(qt.ctx()));
            let via = p_s_via_s_sigma(&qt, &g, &h);
            let point = g.mul(&qt.sigma().apply_grp(&h).inverse());
            assert!(via.distance(&p_s_sigma(&plain, &point)) < 1e-12);
        }
    }
}
