//! The double `D = G × G` with the split pairing `K(x, x') − K(y, y')`, the
//! embeddings `Δ±`, `Δ±^σ`, and the characteristic elements of the
//! quasi-triple `(D, G₊^σ, 𝔤₋^σ)`.
//!
//! Covectors on `𝔤₊^σ` are always passed as their `𝔤*` parameter `ξ`; the
//! pair `(ξ, ξ∘σ)` is rebuilt where needed.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie::{AlgebraVector, Covector, GroupElement, Involution, LieContext};
use crate::linalg;

/// A pair living in `𝔡 = 𝔤 ⊕ 𝔤` or in `D = G × G`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleElement<T> {
    pub left: T,
    pub right: T,
}

impl<T> DoubleElement<T> {
    pub fn new(left: T, right: T) -> Self {
        DoubleElement { left, right }
    }
}

impl DoubleElement<AlgebraVector> {
    /// Stacked coordinates `(x, y)` of length `2n`.
    pub fn coords(&self) -> DVector<f64> {
        let n = self.left.coords().len();
        DVector::from_fn(2 * n, |i, _| {
            if i < n {
                self.left.coords()[i]
            } else {
                self.right.coords()[i - n]
            }
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.left.max_abs().max(self.right.max_abs())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(DoubleElement::new(
            self.left.add(&other.left)?,
            self.right.add(&other.right)?,
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(DoubleElement::new(
            self.left.sub(&other.left)?,
            self.right.sub(&other.right)?,
        ))
    }
}

/// An element `(ξ, η)` of `𝔡* = 𝔤* ⊕ 𝔤*`.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleCovector {
    pub left: Covector,
    pub right: Covector,
}

impl DoubleCovector {
    pub fn new(left: Covector, right: Covector) -> Self {
        DoubleCovector { left, right }
    }

    pub fn coords(&self) -> DVector<f64> {
        let n = self.left.dim();
        DVector::from_fn(2 * n, |i, _| {
            if i < n {
                self.left.coords()[i]
            } else {
                self.right.coords()[i - n]
            }
        })
    }

    /// `(ξ, η)(x, y) = ξ(x) + η(y)`.
    pub fn apply(&self, u: &DoubleElement<AlgebraVector>) -> f64 {
        self.left.apply(&u.left) + self.right.apply(&u.right)
    }

    pub fn add(&self, other: &Self) -> Self {
        DoubleCovector::new(self.left.add(&other.left), self.right.add(&other.right))
    }
}

/// Worst-case structural residuals of a quasi-triple over the basis grid.
#[derive(Debug, Clone, Copy)]
pub struct QuasiTripleResiduals {
    pub isotropy_plus: f64,
    pub isotropy_minus: f64,
    /// Smallest elimination pivot of the `2n × 2n` matrix of
    /// `{Δ₊^σ(bᵢ)} ∪ {Δ₋^σ(bᵢ)}`.
    pub direct_sum_min_pivot: f64,
}

/// The quasi-triple `(D, G₊^σ, 𝔤₋^σ)`; `σ = id` gives `(D, G₊, 𝔤₋)`.
#[derive(Debug, Clone)]
pub struct QuasiTriple {
    ctx: LieContext,
    sigma: Involution,
    sigma_mat: DMatrix<f64>,
}

impl QuasiTriple {
    pub fn new(ctx: LieContext, sigma: Involution) -> Result<Self> {
        let sigma_mat = sigma.matrix(&ctx);
        let qt = QuasiTriple { ctx, sigma, sigma_mat };
        let r = qt.residuals();
        let tol = 1e-12 * (1.0 + linalg::max_abs(qt.ctx.gram()));
        if r.isotropy_plus > tol || r.isotropy_minus > tol {
            return Err(Error::InvalidInvolution(format!(
                "g+ / g- not isotropic ({:.3e}, {:.3e})",
                r.isotropy_plus, r.isotropy_minus
            )));
        }
        if r.direct_sum_min_pivot <= linalg::PIVOT_THRESHOLD {
            return Err(Error::InvalidInvolution("g+ and g- do not span the double".into()));
        }
        Ok(qt)
    }

    /// The quasi-triple with the standard `Ad_H` involution of the group.
    pub fn standard(ctx: LieContext) -> Result<Self> {
        let sigma = Involution::standard(&ctx);
        QuasiTriple::new(ctx, sigma)
    }

    pub fn untwisted(ctx: LieContext) -> Result<Self> {
        QuasiTriple::new(ctx, Involution::Identity)
    }

    pub fn ctx(&self) -> &LieContext {
        &self.ctx
    }

    pub fn sigma(&self) -> &Involution {
        &self.sigma
    }

    /// σ in coordinates.
    pub fn sigma_matrix(&self) -> &DMatrix<f64> {
        &self.sigma_mat
    }

    /// The same quasi-triple with `σ = id`.
    pub fn without_twist(&self) -> QuasiTriple {
        let n = self.ctx.dim();
        QuasiTriple {
            ctx: self.ctx.clone(),
            sigma: Involution::Identity,
            sigma_mat: DMatrix::identity(n, n),
        }
    }

    pub fn residuals(&self) -> QuasiTripleResiduals {
        let basis = self.ctx.basis();
        let plus: Vec<_> = basis.iter().map(|b| self.delta_plus_sigma(b)).collect();
        let minus: Vec<_> = basis.iter().map(|b| self.delta_minus_sigma(b)).collect();
        let mut iso_p = 0.0f64;
        let mut iso_m = 0.0f64;
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                iso_p = iso_p.max(self.pairing_unchecked(&plus[i], &plus[j]).abs());
                iso_m = iso_m.max(self.pairing_unchecked(&minus[i], &minus[j]).abs());
            }
        }
        let cols: Vec<DVector<f64>> = plus.iter().chain(&minus).map(|u| u.coords()).collect();
        QuasiTripleResiduals {
            isotropy_plus: iso_p,
            isotropy_minus: iso_m,
            direct_sum_min_pivot: linalg::min_pivot(&DMatrix::from_columns(&cols)),
        }
    }

    fn sigma_alg(&self, x: &AlgebraVector) -> AlgebraVector {
        self.ctx.vector_from_coords(&self.sigma_mat * x.coords())
    }

    /// `ξ ∘ σ`.
    pub fn compose_sigma(&self, xi: &Covector) -> Covector {
        xi.compose(&self.sigma_mat)
    }

    fn pairing_unchecked(&self, u: &DoubleElement<AlgebraVector>, v: &DoubleElement<AlgebraVector>) -> f64 {
        self.ctx.form_coords(u.left.coords(), v.left.coords())
            - self.ctx.form_coords(u.right.coords(), v.right.coords())
    }

    /// `⟨(x, y), (x', y')⟩ = K(x, x') − K(y, y')`.
    pub fn pairing(&self, u: &DoubleElement<AlgebraVector>, v: &DoubleElement<AlgebraVector>) -> Result<f64> {
        Ok(self.ctx.form(&u.left, &v.left)? - self.ctx.form(&u.right, &v.right)?)
    }

    /// Componentwise bracket on `𝔡`.
    pub fn bracket(
        &self,
        u: &DoubleElement<AlgebraVector>,
        v: &DoubleElement<AlgebraVector>,
    ) -> Result<DoubleElement<AlgebraVector>> {
        Ok(DoubleElement::new(
            self.ctx.bracket(&u.left, &v.left)?,
            self.ctx.bracket(&u.right, &v.right)?,
        ))
    }

    pub fn delta_plus(&self, x: &AlgebraVector) -> DoubleElement<AlgebraVector> {
        DoubleElement::new(x.clone(), x.clone())
    }

    pub fn delta_minus(&self, x: &AlgebraVector) -> DoubleElement<AlgebraVector> {
        DoubleElement::new(x.clone(), x.neg())
    }

    /// `Δ₊^σ(x) = (x, σx)`.
    pub fn delta_plus_sigma(&self, x: &AlgebraVector) -> DoubleElement<AlgebraVector> {
        DoubleElement::new(x.clone(), self.sigma_alg(x))
    }

    /// `Δ₋^σ(x) = (x, −σx)`.
    pub fn delta_minus_sigma(&self, x: &AlgebraVector) -> DoubleElement<AlgebraVector> {
        DoubleElement::new(x.clone(), self.sigma_alg(x).neg())
    }

    pub fn delta_plus_grp(&self, g: &GroupElement) -> DoubleElement<GroupElement> {
        DoubleElement::new(g.clone(), g.clone())
    }

    /// `Δ₊^σ(g) = (g, σ(g))`.
    pub fn delta_plus_sigma_grp(&self, g: &GroupElement) -> DoubleElement<GroupElement> {
        DoubleElement::new(g.clone(), self.sigma.apply_grp(g))
    }

    /// `p₊(x, y) = Δ₊^σ((x + σy) / 2)`.
    pub fn project_plus(&self, u: &DoubleElement<AlgebraVector>) -> Result<DoubleElement<AlgebraVector>> {
        let half = u.left.add(&self.sigma_alg(&u.right))?.scale(0.5);
        Ok(self.delta_plus_sigma(&half))
    }

    /// `p₋(x, y) = Δ₋^σ((x − σy) / 2)`.
    pub fn project_minus(&self, u: &DoubleElement<AlgebraVector>) -> Result<DoubleElement<AlgebraVector>> {
        let half = u.left.sub(&self.sigma_alg(&u.right))?.scale(0.5);
        Ok(self.delta_minus_sigma(&half))
    }

    /// Splits `(ξ, η)` along `𝔡* = 𝔤₊^σ* ⊕ 𝔤₋^σ*`:
    /// `½(ξ + η∘σ, ξ∘σ + η) + ½(ξ − η∘σ, −ξ∘σ + η)`.
    pub fn decompose_covector(&self, alpha: &DoubleCovector) -> (DoubleCovector, DoubleCovector) {
        let xi = &alpha.left;
        let eta = &alpha.right;
        let xi_s = self.compose_sigma(xi);
        let eta_s = self.compose_sigma(eta);
        let plus = DoubleCovector::new(xi.add(&eta_s).scale(0.5), xi_s.add(eta).scale(0.5));
        let minus = DoubleCovector::new(xi.sub(&eta_s).scale(0.5), eta.sub(&xi_s).scale(0.5));
        (plus, minus)
    }

    /// `j(ξ, ξ∘σ) = Δ₋^σ(K⁻¹ξ)`.
    pub fn j_map(&self, xi: &Covector) -> Result<DoubleElement<AlgebraVector>> {
        Ok(self.delta_minus_sigma(&self.ctx.sharp(xi)?))
    }

    /// `F^σ(ξ, η) = p₋[j(ξ), j(η)]`, computed literally.
    pub fn f_sigma(&self, xi: &Covector, eta: &Covector) -> Result<DoubleElement<AlgebraVector>> {
        let b = self.bracket(&self.j_map(xi)?, &self.j_map(eta)?)?;
        self.project_minus(&b)
    }

    /// Both routes for `φ^σ`: the closed form `2K(K⁻¹ν, [K⁻¹ξ, K⁻¹η])` and
    /// the defining pairing `⟨j(ν), [j(ξ), j(η)]⟩`.
    pub fn phi_sigma_routes(&self, xi: &Covector, eta: &Covector, nu: &Covector) -> Result<(f64, f64)> {
        let (x, y, z) = (self.ctx.sharp(xi)?, self.ctx.sharp(eta)?, self.ctx.sharp(nu)?);
        let closed = 2.0 * self.ctx.form(&z, &self.ctx.bracket(&x, &y)?)?;
        let defining = self.pairing(
            &self.j_map(nu)?,
            &self.bracket(&self.j_map(xi)?, &self.j_map(eta)?)?,
        )?;
        Ok((closed, defining))
    }

    /// `φ^σ(ξ, η, ν)`; errors when the closed and defining forms disagree.
    pub fn phi_sigma(&self, xi: &Covector, eta: &Covector, nu: &Covector) -> Result<f64> {
        let (closed, defining) = self.phi_sigma_routes(xi, eta, nu)?;
        let residual = (closed - defining).abs();
        if residual > 1e-10 * closed.abs().max(defining.abs()).max(1.0) {
            return Err(Error::InternalMismatch { what: "phi_sigma", residual });
        }
        Ok(closed)
    }

    /// `r(ξ, η) = ½ Δ₋^σ K⁻¹(ξ + η∘σ)`.
    pub fn r_matrix(&self, alpha: &DoubleCovector) -> Result<DoubleElement<AlgebraVector>> {
        let arg = alpha.left.add(&self.compose_sigma(&alpha.right));
        Ok(self.delta_minus_sigma(&self.ctx.sharp(&arg)?.scale(0.5)))
    }

    /// `r` through its definition `(α₊, α₋) ↦ (0, j(α₊))` after decomposing α.
    pub fn r_matrix_via_decomposition(&self, alpha: &DoubleCovector) -> Result<DoubleElement<AlgebraVector>> {
        let (plus, _) = self.decompose_covector(alpha);
        self.j_map(&plus.left)
    }
}
