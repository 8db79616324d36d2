use nalgebra::{DMatrix, DVector};

use super::bivector::p_s_sigma;
use crate::double::QuasiTriple;
use crate::error::{Error, Result};
use crate::lie::{Covector, GroupElement};
use crate::linalg;

/// `τ_s = Ad_s ∘ σ − σ ∘ Ad_{s⁻¹}` in coordinates.
#[derive(Debug, Clone)]
pub struct TwistOperator {
    base: GroupElement,
    matrix: DMatrix<f64>,
}

impl TwistOperator {
    pub fn base(&self) -> &GroupElement {
        &self.base
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.matrix)
    }
}

pub fn twist_operator(qt: &QuasiTriple, s: &GroupElement) -> TwistOperator {
    let ctx = qt.ctx();
    let sig = qt.sigma_matrix();
    let matrix = ctx.ad_matrix(s) * sig - sig * ctx.ad_matrix(&s.inverse());
    TwistOperator { base: s.clone(), matrix }
}

/// A trivector value at a point as a full alternating `n³` array over the
/// dual basis.
#[derive(Debug, Clone)]
pub struct TrivectorValue {
    base: GroupElement,
    dim: usize,
    components: Vec<f64>,
}

impl TrivectorValue {
    fn from_fn(base: GroupElement, dim: usize, mut f: impl FnMut(usize, usize, usize) -> Result<f64>) -> Result<Self> {
        let mut components = vec![0.0; dim * dim * dim];
        let idx = |i: usize, j: usize, k: usize| (i * dim + j) * dim + k;
        for i in 0..dim {
            for j in i + 1..dim {
                for k in j + 1..dim {
                    let v = f(i, j, k)?;
                    for (p, sign) in [
                        ((i, j, k), 1.0),
                        ((j, k, i), 1.0),
                        ((k, i, j), 1.0),
                        ((j, i, k), -1.0),
                        ((i, k, j), -1.0),
                        ((k, j, i), -1.0),
                    ] {
                        components[idx(p.0, p.1, p.2)] = sign * v;
                    }
                }
            }
        }
        Ok(TrivectorValue { base, dim, components })
    }

    pub fn base(&self) -> &GroupElement {
        &self.base
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.components[(i * self.dim + j) * self.dim + k]
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Worst violation of `T(i,j,k) = −T(j,i,k) = −T(i,k,j)`.
    pub fn antisymmetry_residual(&self) -> f64 {
        let n = self.dim;
        let mut r = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    r = r.max((self.get(i, j, k) + self.get(j, i, k)).abs());
                    r = r.max((self.get(i, j, k) + self.get(i, k, j)).abs());
                }
            }
        }
        r
    }
}

/// Closed form of `½[P_S^σ, P_S^σ](s)(ξ, η, ν)`:
/// `¼ K(x, [y, τ_s z] + [τ_s y, z] − τ_s [y, z])` with `x = K⁻¹ξ`, etc.
pub fn schouten_closed(qt: &QuasiTriple, s: &GroupElement, xi: &Covector, eta: &Covector, nu: &Covector) -> f64 {
    let tau = twist_operator(qt, s);
    schouten_with_twist(qt, tau.matrix(), xi, eta, nu)
}

fn schouten_with_twist(qt: &QuasiTriple, tau: &DMatrix<f64>, xi: &Covector, eta: &Covector, nu: &Covector) -> f64 {
    let ctx = qt.ctx();
    let gi = ctx.gram_inv();
    let (x, y, z) = (gi * xi.coords(), gi * eta.coords(), gi * nu.coords());
    let w = ctx.bracket_coords(&y, &(tau * &z)) + ctx.bracket_coords(&(tau * &y), &z)
        - tau * ctx.bracket_coords(&y, &z);
    0.25 * ctx.form_coords(&x, &w)
}

/// Finite-difference value of `½[P_S^σ, P_S^σ](s)(ξ, η, ν)`.
///
/// Works in the chart `u ↦ exp(u)·s`. A coordinate vector `w` at `u` has
/// right-trivialized image `J(u)w` with `J(u) = (e^{ad u} − 1)/ad u`, so the
/// coordinate components are `J⁻¹ P J⁻ᵀ`, with `J⁻¹ ≈ 1 − ½ad u + ad²u/12`
/// (exact to the order that matters at `u = 0`). The bracket is the cyclic
/// sum of `{{xⁱ, xʲ}, xᵏ} = ∂ₗPⁱʲ Pˡᵏ` with central differences of step `h`.
pub fn schouten_fd(
    qt: &QuasiTriple,
    s: &GroupElement,
    xi: &Covector,
    eta: &Covector,
    nu: &Covector,
    h: f64,
) -> Result<f64> {
    if h.is_nan() || h < 1e-12 {
        return Err(Error::StepTooSmall(h));
    }
    let ctx = qt.ctx();
    let n = ctx.dim();
    let coordinate_bivector = |u: &DVector<f64>| -> Result<DMatrix<f64>> {
        let point = ctx.exp(&ctx.vector(u.as_slice())?)?.mul(s);
        let ad = ctx.ad_operator_coords(u);
        let j_inv = DMatrix::identity(n, n) - &ad * 0.5 + &ad * &ad / 12.0;
        Ok(&j_inv * p_s_sigma(qt, &point).matrix() * j_inv.transpose())
    };
    let p0 = coordinate_bivector(&DVector::zeros(n))?;
    let (p_xi, p_eta, p_nu) = (&p0 * xi.coords(), &p0 * eta.coords(), &p0 * nu.coords());
    let mut total = 0.0;
    for l in 0..n {
        let mut step = DVector::zeros(n);
        step[l] = h;
        let d = (coordinate_bivector(&step)? - coordinate_bivector(&-&step)?) / (2.0 * h);
        let pair = |a: &Covector, b: &Covector| a.coords().dot(&(&d * b.coords()));
        total += pair(xi, eta) * p_nu[l] + pair(eta, nu) * p_xi[l] + pair(nu, xi) * p_eta[l];
    }
    Ok(total)
}

/// `(φ^σ)_S(s)(ξ, η, ν)`: `φ^σ` pulled back along the dual infinitesimal
/// action `ξ ↦ ξ − ξ∘Ad_s∘σ`.
///
/// A covector `ζ` on `𝔤 ≅ 𝔤₊^σ` corresponds to `(ζ/2, ζ∘σ/2)` in `𝔤₊^σ*`,
/// since `(ζ, ζ∘σ)(x, σx) = 2ζ(x)`; the three halvings give the factor ⅛.
pub fn phi_s(qt: &QuasiTriple, s: &GroupElement, xi: &Covector, eta: &Covector, nu: &Covector) -> Result<f64> {
    let a = qt.ctx().ad_matrix(s) * qt.sigma_matrix();
    let pull = |c: &Covector| c.sub(&c.compose(&a));
    Ok(qt.phi_sigma(&pull(xi), &pull(eta), &pull(nu))? / 8.0)
}

fn dual_basis(n: usize, i: usize) -> Covector {
    let mut c = DVector::zeros(n);
    c[i] = 1.0;
    Covector::new(c)
}

/// `½[P_S^σ, P_S^σ](s)` on all dual-basis triples.
pub fn schouten_trivector(qt: &QuasiTriple, s: &GroupElement) -> TrivectorValue {
    let n = qt.ctx().dim();
    let tau = twist_operator(qt, s);
    TrivectorValue::from_fn(s.clone(), n, |i, j, k| {
        Ok(schouten_with_twist(qt, tau.matrix(), &dual_basis(n, i), &dual_basis(n, j), &dual_basis(n, k)))
    })
    .expect("closed form is infallible")
}

/// `(φ^σ)_S(s)` on all dual-basis triples.
pub fn phi_s_trivector(qt: &QuasiTriple, s: &GroupElement) -> Result<TrivectorValue> {
    let n = qt.ctx().dim();
    TrivectorValue::from_fn(s.clone(), n, |i, j, k| {
        phi_s(qt, s, &dual_basis(n, i), &dual_basis(n, j), &dual_basis(n, k))
    })
}
