use nalgebra::{DMatrix, DVector};

use super::bivector::p_s_sigma;
use crate::double::QuasiTriple;
use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, GroupElement, GroupKind, LieContext, C64, CMatrix};
use crate::linalg;

/// Twisted conjugation `(g, s) ↦ g s σ(g)⁻¹`.
pub fn act(qt: &QuasiTriple, g: &GroupElement, s: &GroupElement) -> GroupElement {
    g.mul(s).mul(&qt.sigma().apply_grp(g).inverse())
}

/// `x ↦ x − Ad_s σ(x)`, the generator of the twisted action at `s`.
pub fn infinitesimal_action(qt: &QuasiTriple, s: &GroupElement, x: &AlgebraVector) -> Result<AlgebraVector> {
    let ctx = qt.ctx();
    let moved = ctx.adjoint(s, &qt.sigma().apply_alg(ctx, x)?)?;
    x.sub(&moved)
}

/// `max |Ad_g ∘ P_S^σ(s) ∘ Ad_g* − P_S^σ(g s σ(g)⁻¹)|`.
pub fn check_invariance(qt: &QuasiTriple, g: &GroupElement, s: &GroupElement) -> f64 {
    let ad = qt.ctx().ad_matrix(g);
    let pushed = &ad * p_s_sigma(qt, s).matrix() * ad.transpose();
    linalg::max_abs(&(pushed - p_s_sigma(qt, &act(qt, g, s)).matrix()))
}

/// Image of `P_S^σ(s)` computed two ways, and its relation to the orbit.
#[derive(Debug, Clone)]
pub struct ImageInfo {
    /// `(Ad_{σ(s)⁻¹} − Ad_s) σ(bᵢ)`.
    pub direct: Vec<AlgebraVector>,
    /// `(1 − Ad_s σ)(1 + Ad_s σ) bᵢ`.
    pub factored: Vec<AlgebraVector>,
    pub rank: usize,
    pub factored_rank: usize,
    /// Rank of both spanning sets together; equals `rank` when the spans agree.
    pub union_rank: usize,
    /// Rank of the orbit tangent space `span{bᵢ − Ad_s σ(bᵢ)}`.
    pub orbit_rank: usize,
    /// Largest distance from a column of `P_S^σ(s)` to the orbit tangent space.
    pub containment_residual: f64,
}

impl ImageInfo {
    pub fn spans_agree(&self) -> bool {
        self.rank == self.factored_rank && self.rank == self.union_rank
    }
}

pub fn image_basis(qt: &QuasiTriple, s: &GroupElement) -> ImageInfo {
    let ctx = qt.ctx();
    let n = ctx.dim();
    let id = DMatrix::identity(n, n);
    let sig = qt.sigma_matrix();
    let a = ctx.ad_matrix(s) * sig;
    let direct_m = (ctx.ad_matrix(&qt.sigma().apply_grp(s).inverse()) - ctx.ad_matrix(s)) * sig;
    let factored_m = (&id - &a) * (&id + &a);
    let orbit_m = &id - &a;
    let union = DMatrix::from_columns(
        &direct_m
            .column_iter()
            .chain(factored_m.column_iter())
            .map(|c| c.into_owned())
            .collect::<Vec<DVector<f64>>>(),
    );
    let bivector = p_s_sigma(qt, s);
    let containment_residual = bivector
        .matrix()
        .column_iter()
        .map(|c| linalg::projection_residual(&orbit_m, &c.into_owned()))
        .fold(0.0, f64::max);
    let to_vectors = |m: &DMatrix<f64>| -> Vec<AlgebraVector> {
        m.column_iter()
            .map(|c| ctx.vector(c.into_owned().as_slice()).expect("dimension matches"))
            .collect()
    };
    ImageInfo {
        direct: to_vectors(&direct_m),
        factored: to_vectors(&factored_m),
        rank: linalg::pivot_rank(&direct_m, linalg::PIVOT_THRESHOLD),
        factored_rank: linalg::pivot_rank(&factored_m, linalg::PIVOT_THRESHOLD),
        union_rank: linalg::pivot_rank(&union, linalg::PIVOT_THRESHOLD),
        orbit_rank: linalg::pivot_rank(&orbit_m, linalg::PIVOT_THRESHOLD),
        containment_residual,
    }
}

/// Probe elements `exp(±t·bᵢ)` over a fixed ladder of scales, starting at `t = 1`.
pub fn probe_elements(ctx: &LieContext, count: usize) -> Vec<GroupElement> {
    let mut scales = vec![1.0];
    scales.extend((1..=16).map(|k| 0.25 * k as f64).filter(|t| *t != 1.0));
    let mut out = Vec::with_capacity(count);
    'outer: for t in scales {
        for sign in [1.0, -1.0] {
            for b in ctx.basis() {
                if out.len() == count {
                    break 'outer;
                }
                out.push(ctx.exp(&b.scale(sign * t)).expect("basis vector of this context"));
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub enum FixedPoint {
    /// `act(g, s) = s` for every probe.
    Fixed { probes: usize },
    /// A probe that moves `s`.
    Moved { witness: GroupElement, displacement: f64 },
}

impl FixedPoint {
    pub fn is_fixed(&self) -> bool {
        matches!(self, FixedPoint::Fixed { .. })
    }
}

/// Sampling test for `s` being a fixed point of the twisted action.
pub fn check_fixed_point(qt: &QuasiTriple, s: &GroupElement, n_samples: usize) -> Result<FixedPoint> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    for g in probe_elements(qt.ctx(), n_samples) {
        let displacement = act(qt, &g, s).distance(s);
        if displacement > 1e-10 {
            return Ok(FixedPoint::Moved { witness: g, displacement });
        }
    }
    Ok(FixedPoint::Fixed { probes: n_samples })
}

/// `U = diag(i, −i)`.
pub fn su2_u() -> CMatrix {
    let i = C64::new(0.0, 1.0);
    CMatrix::from_row_slice(2, 2, &[i, C64::new(0.0, 0.0), C64::new(0.0, 0.0), -i])
}

/// Residual of right multiplication by `U = diag(i, −i)` intertwining the
/// untwisted and `Ad_H`-twisted structures on SU(2).
///
/// In right trivialization the tangent map of `s ↦ sU` is the identity, so
/// the bivector part compares `P_S(s)` with `P_S^σ(sU)` directly; the action
/// part compares `(g s g⁻¹) U` with `g (sU) σ(g)⁻¹` for each sample `g`.
pub fn su2_isomorphism_check(qt: &QuasiTriple, s: &GroupElement, samples: &[GroupElement]) -> Result<f64> {
    if qt.ctx().kind() != GroupKind::Su2 || qt.sigma().is_identity() {
        return Err(Error::InvalidArgument(
            "the SU(2) isomorphism check needs su2 with sigma = Ad_H".into(),
        ));
    }
    let plain = qt.without_twist();
    let u = GroupElement::new(su2_u())?;
    let su = s.mul(&u);
    let mut residual = p_s_sigma(&plain, s).distance(&p_s_sigma(qt, &su));
    for g in samples {
        let lhs = act(&plain, g, s).mul(&u);
        let rhs = act(qt, g, &su);
        residual = residual.max(lhs.distance(&rhs));
    }
    Ok(residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::real_matrix;
    use crate::sampling::Sampler;

    fn sl2_qt() -> QuasiTriple {
        QuasiTriple::standard(LieContext::new(GroupKind::SL2R, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn infinitesimal_action_examples() {
        let qt = sl2_qt();
        let ctx = qt.ctx();
        let e = ctx.identity();
        let (h, ev) = (&ctx.basis()[0], &ctx.basis()[1]);
        assert_eq!(infinitesimal_action(&qt, &e, h).unwrap().max_abs(), 0.0);
        let two_e = infinitesimal_action(&qt, &e, ev).unwrap();
        assert_eq!(two_e.coords().as_slice(), &[0.0, 2.0, 0.0]);
        let plain = qt.without_twist();
        let mut smp = Sampler::new(0);
        let x = smp.algebra(ctx);
        assert_eq!(infinitesimal_action(&plain, &e, &x).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn act_examples() {
        let qt = sl2_qt();
        let plain = qt.without_twist();
        let mut smp = Sampler::new(8);
        let (g, s) = (smp.group(qt.ctx()), smp.group(qt.ctx()));
        let conj = g.mul(&s).mul(&g.inverse());
        assert!(act(&plain, &g, &s).distance(&conj) < 1e-14);
        assert!(act(&qt, &qt.ctx().identity(), &s).distance(&s) == 0.0);
    }

    #[test]
    fn action_law() {
        let qt = sl2_qt();
        let mut smp = Sampler::new(12);
        for _ in 0..10 {
            let (g1, g2, s) = (smp.group(qt.ctx()), smp.group(qt.ctx()), smp.group(qt.ctx()));
            let lhs = act(&qt, &g1, &act(&qt, &g2, &s));
            let rhs = act(&qt, &g1.mul(&g2), &s);
            assert!(lhs.distance(&rhs) < 1e-12);
        }
    }

    #[test]
    fn invariance_holds() {
        let qt = sl2_qt();
        let mut smp = Sampler::new(15);
        assert_eq!(check_invariance(&qt, &qt.ctx().identity(), &smp.group(qt.ctx())), 0.0);
        for _ in 0..10 {
            let (g, s) = (smp.group(qt.ctx()), smp.group(qt.ctx()));
            assert!(check_invariance(&qt, &g, &s) < 1e-10);
        }
    }

    #[test]
    fn image_ranks() {
        let qt = sl2_qt();
        let e = qt.ctx().identity();
        assert_eq!(image_basis(&qt, &e).rank, 0);
        // exp(E) σ(exp(E))⁻¹ lies on the identity orbit
        let on_orbit = GroupElement::new(real_matrix(2, &[1.0, 2.0, 0.0, 1.0])).unwrap();
        let info = image_basis(&qt, &on_orbit);
        assert_eq!(info.rank, 0);
        assert!(info.spans_agree());
        let generic = qt.ctx().exp(&qt.ctx().vector(&[0.3, 0.8, -0.2]).unwrap()).unwrap();
        let info = image_basis(&qt, &generic);
        assert_eq!(info.rank, 2);
        assert!(info.spans_agree());
        assert!(info.rank <= info.orbit_rank);
        assert!(info.containment_residual < 1e-9);
    }

    #[test]
    fn fixed_points() {
        let qt = sl2_qt();
        let plain = qt.without_twist();
        let ctx = qt.ctx();
        let minus_one = GroupElement::new(real_matrix(2, &[-1.0, 0.0, 0.0, -1.0])).unwrap();
        assert!(check_fixed_point(&plain, &minus_one, 64).unwrap().is_fixed());
        assert!(check_fixed_point(&plain, &ctx.identity(), 64).unwrap().is_fixed());
        match check_fixed_point(&qt, &ctx.identity(), 64).unwrap() {
            FixedPoint::Moved { witness, .. } => {
                let expected = real_matrix(2, &[1.0, 1.0, 0.0, 1.0]);
                assert_eq!(witness.matrix(), &expected);
                let image = act(&qt, &witness, &ctx.identity());
                assert_eq!(image.matrix(), &real_matrix(2, &[1.0, 2.0, 0.0, 1.0]));
            }
            FixedPoint::Fixed { .. } => panic!("identity is not fixed by twisted conjugation"),
        }
        assert!(check_fixed_point(&qt, &ctx.identity(), 0).is_err());
    }

    #[test]
    fn su2_intertwiner() {
        let qt = QuasiTriple::standard(LieContext::new(GroupKind::Su2, 1.0).unwrap()).unwrap();
        let mut smp = Sampler::new(31);
        let samples: Vec<_> = (0..10).map(|_| smp.group(qt.ctx())).collect();
        let e = qt.ctx().identity();
        assert!(su2_isomorphism_check(&qt, &e, &samples).unwrap() < 1e-10);
        for _ in 0..5 {
            let s = smp.group(qt.ctx());
            assert!(su2_isomorphism_check(&qt, &s, &samples).unwrap() < 1e-10);
        }
        assert!(su2_isomorphism_check(&sl2_qt(), &sl2_qt().ctx().identity(), &[]).is_err());
    }
}
