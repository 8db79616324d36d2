//! Matrix Lie groups and algebras in a fixed basis.
//!
//! Every algebra element carries both its matrix and its real coordinates in
//! the context basis. Linear maps on the algebra (adjoint actions, the
//! involution, bivectors) are handled as real `dim × dim` coordinate matrices,
//! so the complex representation only shows up when building those matrices.
//!
//! The invariant form is `K(x, y) = c · Re trace(xy)` with a positive scale `c`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

/// Tolerance for structural checks on basis elements and fixtures.
pub const STRUCTURE_TOL: f64 = 1e-12;
/// Tolerance for `det = 1` and unitarity of group elements.
pub const GROUP_TOL: f64 = 1e-10;

/// The matrix groups supported by the lab.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum GroupKind {
    /// SL(n, R), n ≥ 2.
    Sl(usize),
    Su2,
}

impl GroupKind {
    pub const SL2R: GroupKind = GroupKind::Sl(2);
    pub const SL3R: GroupKind = GroupKind::Sl(3);

    /// Size of the defining matrix representation.
    pub fn rep_dim(self) -> usize {
        match self {
            GroupKind::Sl(n) => n,
            GroupKind::Su2 => 2,
        }
    }

    /// Dimension of the Lie algebra.
    pub fn dim(self) -> usize {
        match self {
            GroupKind::Sl(n) => n * n - 1,
            GroupKind::Su2 => 3,
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::Sl(n) => write!(f, "sl{n}r"),
            GroupKind::Su2 => f.write_str("su2"),
        }
    }
}

impl FromStr for GroupKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "su2" {
            return Ok(GroupKind::Su2);
        }
        let n = if let Some(inner) = s.strip_prefix("slnr(").and_then(|r| r.strip_suffix(')')) {
            inner.parse::<usize>().ok()
        } else {
            s.strip_prefix("sl")
                .and_then(|r| r.strip_suffix('r'))
                .and_then(|r| r.parse::<usize>().ok())
        };
        match n {
            Some(n) if (2..=8).contains(&n) => Ok(GroupKind::Sl(n)),
            _ => Err(Error::InvalidArgument(format!(
                "unknown group '{s}' (expected sl2r, sl3r, slnr(n) with 2 <= n <= 8, or su2)"
            ))),
        }
    }
}

impl From<GroupKind> for String {
    fn from(k: GroupKind) -> String {
        k.to_string()
    }
}

impl TryFrom<String> for GroupKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Builds a complex matrix from real row-major entries.
pub fn real_matrix(n: usize, rows: &[f64]) -> CMatrix {
    DMatrix::from_row_iterator(n, n, rows.iter().map(|&v| C64::new(v, 0.0)))
}

/// An element of the Lie algebra: matrix plus basis coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraVector {
    kind: GroupKind,
    matrix: CMatrix,
    coords: DVector<f64>,
}

impl AlgebraVector {
    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn scale(&self, a: f64) -> AlgebraVector {
        AlgebraVector {
            kind: self.kind,
            matrix: self.matrix.map(|v| v * a),
            coords: &self.coords * a,
        }
    }

    pub fn neg(&self) -> AlgebraVector {
        self.scale(-1.0)
    }

    pub fn add(&self, other: &AlgebraVector) -> Result<AlgebraVector> {
        same_kind(self.kind, other.kind)?;
        Ok(AlgebraVector {
            kind: self.kind,
            matrix: &self.matrix + &other.matrix,
            coords: &self.coords + &other.coords,
        })
    }

    pub fn sub(&self, other: &AlgebraVector) -> Result<AlgebraVector> {
        self.add(&other.neg())
    }

    /// Largest coordinate magnitude.
    pub fn max_abs(&self) -> f64 {
        crate::linalg::max_abs_vec(&self.coords)
    }
}

fn same_kind(a: GroupKind, b: GroupKind) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::ContextMismatch { left: a, right: b })
    }
}

/// An element of 𝔤*, in the basis dual to the context basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Covector {
    coords: DVector<f64>,
}

impl Covector {
    pub fn new(coords: DVector<f64>) -> Self {
        Covector { coords }
    }

    pub fn from_slice(c: &[f64]) -> Self {
        Covector { coords: DVector::from_column_slice(c) }
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// ξ(x).
    pub fn apply(&self, x: &AlgebraVector) -> f64 {
        self.coords.dot(&x.coords)
    }

    /// ξ ∘ A for a linear map A given in coordinates.
    pub fn compose(&self, map: &DMatrix<f64>) -> Covector {
        Covector { coords: map.transpose() * &self.coords }
    }

    pub fn scale(&self, a: f64) -> Covector {
        Covector { coords: &self.coords * a }
    }

    pub fn add(&self, other: &Covector) -> Covector {
        Covector { coords: &self.coords + &other.coords }
    }

    pub fn sub(&self, other: &Covector) -> Covector {
        Covector { coords: &self.coords - &other.coords }
    }
}

/// An invertible matrix of the group, with its inverse kept alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    matrix: CMatrix,
    inverse: CMatrix,
}

impl GroupElement {
    /// Wraps an invertible matrix without checking group membership.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let inverse = matrix
            .clone()
            .try_inverse()
            .ok_or(Error::Singular("group element is not invertible"))?;
        Ok(GroupElement { matrix, inverse })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            matrix: self.inverse.clone(),
            inverse: self.matrix.clone(),
        }
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement {
            matrix: &self.matrix * &other.matrix,
            inverse: &other.inverse * &self.inverse,
        }
    }

    pub fn det(&self) -> C64 {
        self.matrix.determinant()
    }

    /// Max-entry distance to another element.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .fold(0.0, |acc, v| acc.max(v.norm()))
    }

    /// Real entry (i, j); the imaginary part is dropped.
    pub fn re(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)].re
    }
}

/// A group together with a basis of its Lie algebra and the invariant form.
#[derive(Debug, Clone)]
pub struct LieContext {
    kind: GroupKind,
    form_scale: f64,
    basis: Vec<AlgebraVector>,
    // (BᵀB)⁻¹Bᵀ where B has the real-embedded basis matrices as columns.
    coord_solver: DMatrix<f64>,
    embedded_basis: DMatrix<f64>,
    gram: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
    // structure[i] is ad_{bᵢ} in coordinates: column j holds [bᵢ, bⱼ].
    structure: Vec<DMatrix<f64>>,
}

fn embed(m: &CMatrix) -> DVector<f64> {
    let n = m.len();
    let mut v = DVector::zeros(2 * n);
    for (k, z) in m.iter().enumerate() {
        v[k] = z.re;
        v[n + k] = z.im;
    }
    v
}

fn basis_matrices(kind: GroupKind) -> Vec<CMatrix> {
    match kind {
        GroupKind::Sl(n) => {
            let unit = |i: usize, j: usize| {
                let mut m = CMatrix::zeros(n, n);
                m[(i, j)] = C64::new(1.0, 0.0);
                m
            };
            let mut out: Vec<CMatrix> = (0..n - 1).map(|i| unit(i, i) - unit(i + 1, i + 1)).collect();
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        out.push(unit(i, j));
                    }
                }
            }
            out
        }
        GroupKind::Su2 => {
            let i = C64::new(0.0, 1.0);
            let o = C64::new(0.0, 0.0);
            let one = C64::new(1.0, 0.0);
            vec![
                CMatrix::from_row_slice(2, 2, &[i, o, o, -i]),
                CMatrix::from_row_slice(2, 2, &[o, i, i, o]),
                CMatrix::from_row_slice(2, 2, &[o, one, -one, o]),
            ]
        }
    }
}

impl LieContext {
    pub fn new(kind: GroupKind, form_scale: f64) -> Result<Self> {
        if !(form_scale.is_finite() && form_scale > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "form scale must be positive, got {form_scale}"
            )));
        }
        if let GroupKind::Sl(n) = kind {
            if !(2..=8).contains(&n) {
                return Err(Error::InvalidArgument(format!("sl{n}r is out of range")));
            }
        }
        let mats = basis_matrices(kind);
        let dim = mats.len();
        let cols: Vec<DVector<f64>> = mats.iter().map(embed).collect();
        let embedded_basis = DMatrix::from_columns(&cols);
        let normal = embedded_basis.transpose() * &embedded_basis;
        let coord_solver = normal
            .try_inverse()
            .ok_or(Error::Singular("basis matrices are linearly dependent"))?
            * embedded_basis.transpose();

        let basis: Vec<AlgebraVector> = mats
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let mut coords = DVector::zeros(dim);
                coords[i] = 1.0;
                AlgebraVector { kind, matrix: m.clone(), coords }
            })
            .collect();

        let gram = DMatrix::from_fn(dim, dim, |i, j| form_scale * (&mats[i] * &mats[j]).trace().re);
        if crate::linalg::min_pivot(&gram) <= crate::linalg::PIVOT_THRESHOLD {
            return Err(Error::DegenerateForm);
        }
        let gram_inv = gram.clone().try_inverse().ok_or(Error::DegenerateForm)?;

        let mut ctx = LieContext {
            kind,
            form_scale,
            basis,
            coord_solver,
            embedded_basis,
            gram,
            gram_inv,
            structure: Vec::new(),
        };
        ctx.structure = (0..dim)
            .map(|i| {
                let cols: Vec<DVector<f64>> = (0..dim)
                    .map(|j| ctx.coords_of(&(&mats[i] * &mats[j] - &mats[j] * &mats[i])))
                    .collect();
                DMatrix::from_columns(&cols)
            })
            .collect();
        Ok(ctx)
    }

    /// The same group with a different form scale.
    pub fn rescaled(&self, form_scale: f64) -> Result<Self> {
        LieContext::new(self.kind, form_scale)
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn rep_dim(&self) -> usize {
        self.kind.rep_dim()
    }

    pub fn form_scale(&self) -> f64 {
        self.form_scale
    }

    pub fn basis(&self) -> &[AlgebraVector] {
        &self.basis
    }

    /// Gram matrix `K(bᵢ, bⱼ)`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn gram_inv(&self) -> &DMatrix<f64> {
        &self.gram_inv
    }

    /// `cᵢⱼᵏ` with `[bᵢ, bⱼ] = Σₖ cᵢⱼᵏ bₖ`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.structure[i][(k, j)]
    }

    fn coords_of(&self, m: &CMatrix) -> DVector<f64> {
        &self.coord_solver * embed(m)
    }

    /// Algebra element with the given coordinates.
    pub fn vector(&self, coords: &[f64]) -> Result<AlgebraVector> {
        if coords.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coordinates, got {}",
                self.dim(),
                coords.len()
            )));
        }
        Ok(self.vector_from_coords(DVector::from_column_slice(coords)))
    }

    pub(crate) fn vector_from_coords(&self, coords: DVector<f64>) -> AlgebraVector {
        let n = self.rep_dim();
        let mut matrix = CMatrix::zeros(n, n);
        for (c, b) in coords.iter().zip(&self.basis) {
            if *c != 0.0 {
                matrix += b.matrix.map(|v| v * *c);
            }
        }
        AlgebraVector { kind: self.kind, matrix, coords }
    }

    /// Algebra element from a matrix; rejects matrices outside 𝔤.
    pub fn vector_from_matrix(&self, m: &CMatrix) -> Result<AlgebraVector> {
        if m.shape() != (self.rep_dim(), self.rep_dim()) {
            return Err(Error::InvalidArgument(format!(
                "expected a {n}x{n} matrix",
                n = self.rep_dim()
            )));
        }
        let coords = self.coords_of(m);
        let residual = (embed(m) - &self.embedded_basis * &coords).amax();
        let scale = 1.0 + m.iter().fold(0.0f64, |a, v| a.max(v.norm()));
        if residual > 1e-10 * scale {
            return Err(Error::NotInAlgebra { residual });
        }
        Ok(self.vector_from_coords(coords))
    }

    pub fn zero(&self) -> AlgebraVector {
        self.vector_from_coords(DVector::zeros(self.dim()))
    }

    fn check(&self, x: &AlgebraVector) -> Result<()> {
        same_kind(self.kind, x.kind)
    }

    fn check_covector(&self, xi: &Covector) -> Result<()> {
        if xi.dim() == self.dim() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "covector has {} coordinates, algebra has dimension {}",
                xi.dim(),
                self.dim()
            )))
        }
    }

    /// `[x, y] = xy − yx`.
    pub fn bracket(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<AlgebraVector> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.vector_from_coords(self.bracket_coords(&x.coords, &y.coords)))
    }

    pub(crate) fn bracket_coords(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        self.ad_operator_coords(x) * y
    }

    /// `K(x, y) = c · Re trace(xy)`.
    pub fn form(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.form_scale * (&x.matrix * &y.matrix).trace().re)
    }

    pub(crate) fn form_coords(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&(&self.gram * y))
    }

    /// `x ↦ K(x, ·)`.
    pub fn flat(&self, x: &AlgebraVector) -> Result<Covector> {
        self.check(x)?;
        Ok(Covector::new(&self.gram * &x.coords))
    }

    /// Inverse of [`LieContext::flat`].
    pub fn sharp(&self, xi: &Covector) -> Result<AlgebraVector> {
        self.check_covector(xi)?;
        Ok(self.vector_from_coords(&self.gram_inv * &xi.coords))
    }

    /// The coordinate matrix of `ad_x`.
    pub fn ad_operator(&self, x: &AlgebraVector) -> Result<DMatrix<f64>> {
        self.check(x)?;
        Ok(self.ad_operator_coords(&x.coords))
    }

    pub(crate) fn ad_operator_coords(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        for (c, s) in x.iter().zip(&self.structure) {
            if *c != 0.0 {
                out += s * *c;
            }
        }
        out
    }

    /// The coordinate matrix of `Ad_g`.
    pub fn ad_matrix(&self, g: &GroupElement) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> = self
            .basis
            .iter()
            .map(|b| self.coords_of(&(&g.matrix * &b.matrix * &g.inverse)))
            .collect();
        DMatrix::from_columns(&cols)
    }

    /// `Ad_g x = g x g⁻¹`.
    pub fn adjoint(&self, g: &GroupElement, x: &AlgebraVector) -> Result<AlgebraVector> {
        self.check(x)?;
        self.check_group(g)?;
        let m = &g.matrix * &x.matrix * &g.inverse;
        Ok(self.vector_from_coords(self.coords_of(&m)))
    }

    fn check_group(&self, g: &GroupElement) -> Result<()> {
        if g.matrix.shape() == (self.rep_dim(), self.rep_dim()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "expected a {n}x{n} group element",
                n = self.rep_dim()
            )))
        }
    }

    pub fn identity(&self) -> GroupElement {
        let n = self.rep_dim();
        GroupElement {
            matrix: CMatrix::identity(n, n),
            inverse: CMatrix::identity(n, n),
        }
    }

    /// Group element from a matrix; checks `det = 1` and, for SU(2), unitarity.
    pub fn group_element(&self, m: CMatrix) -> Result<GroupElement> {
        if m.shape() != (self.rep_dim(), self.rep_dim()) {
            return Err(Error::InvalidArgument(format!(
                "expected a {n}x{n} matrix",
                n = self.rep_dim()
            )));
        }
        let det = m.determinant();
        if (det - C64::new(1.0, 0.0)).norm() > GROUP_TOL {
            return Err(Error::NotInGroup(format!("det = {det}")));
        }
        match self.kind {
            GroupKind::Su2 => {
                let n = self.rep_dim();
                let r = (&m * m.adjoint() - CMatrix::identity(n, n))
                    .iter()
                    .fold(0.0f64, |a, v| a.max(v.norm()));
                if r > GROUP_TOL {
                    return Err(Error::NotInGroup(format!("unitarity residual {r:.3e}")));
                }
            }
            GroupKind::Sl(_) => {
                if m.iter().any(|v| v.im != 0.0) {
                    return Err(Error::NotInGroup("complex entries in a real group".into()));
                }
            }
        }
        GroupElement::new(m)
    }

    /// Matrix exponential of an algebra element.
    pub fn exp(&self, x: &AlgebraVector) -> Result<GroupElement> {
        self.check(x)?;
        let matrix = exp_matrix(&x.matrix);
        let inverse = exp_matrix(&x.matrix.map(|v| -v));
        Ok(GroupElement { matrix, inverse })
    }
}

/// Matrix exponential.
///
/// Trace-free 2×2 matrices satisfy `x² = −det(x)·1`, so
/// `exp(x) = cosh(q)·1 + sinh(q)/q·x` with `q² = −det(x)`; this covers the
/// elliptic (`det > 0`, cos/sin), hyperbolic (`det < 0`, cosh/sinh) and
/// nilpotent (`det = 0`, `1 + x`) cases. Everything else goes through
/// scaling and squaring with a Taylor series.
pub fn exp_matrix(x: &CMatrix) -> CMatrix {
    let n = x.nrows();
    let norm = x.iter().fold(0.0f64, |a, v| a.max(v.norm()));
    if n == 2 && (x[(0, 0)] + x[(1, 1)]).norm() <= 1e-15 * (1.0 + norm) {
        let det = x[(0, 0)] * x[(1, 1)] - x[(0, 1)] * x[(1, 0)];
        let one = CMatrix::identity(2, 2);
        return if det.im == 0.0 {
            let d = det.re;
            if d > 0.0 {
                let w = d.sqrt();
                one * C64::new(w.cos(), 0.0) + x * C64::new(w.sin() / w, 0.0)
            } else if d < 0.0 {
                let w = (-d).sqrt();
                one * C64::new(w.cosh(), 0.0) + x * C64::new(w.sinh() / w, 0.0)
            } else {
                one + x
            }
        } else {
            let q = (-det).sqrt();
            let sinhc = if q.norm() < 1e-8 {
                C64::new(1.0, 0.0) + q * q / 6.0
            } else {
                q.sinh() / q
            };
            one * q.cosh() + x * sinhc
        };
    }
    exp_series(x)
}

fn exp_series(x: &CMatrix) -> CMatrix {
    let n = x.nrows();
    let row_norm = (0..n)
        .map(|i| x.row(i).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if row_norm > 0.5 {
        (row_norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = x / C64::new(2f64.powi(squarings as i32), 0.0);
    let mut term = CMatrix::identity(n, n);
    let mut sum = CMatrix::identity(n, n);
    for k in 1..=20 {
        term = &term * &scaled / C64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// An involutive automorphism σ of 𝔤 and G, either the identity or `Ad_H`
/// for a fixture matrix `H`.
#[derive(Debug, Clone, PartialEq)]
pub enum Involution {
    Identity,
    Conjugation { fixture: CMatrix, fixture_inv: CMatrix },
}

/// Worst-case violations of the involution axioms over the basis.
#[derive(Debug, Clone, Copy)]
pub struct InvolutionResiduals {
    pub square: f64,
    pub morphism: f64,
    pub orthogonality: f64,
}

impl Involution {
    /// σ = Ad_H, validated on the full basis.
    pub fn conjugation(ctx: &LieContext, fixture: CMatrix) -> Result<Self> {
        if fixture.shape() != (ctx.rep_dim(), ctx.rep_dim()) {
            return Err(Error::InvalidInvolution("fixture has the wrong size".into()));
        }
        let fixture_inv = fixture
            .clone()
            .try_inverse()
            .ok_or(Error::InvalidInvolution("fixture is singular".into()))?;
        for b in ctx.basis() {
            ctx.vector_from_matrix(&(&fixture * b.matrix() * &fixture_inv))
                .map_err(|_| Error::InvalidInvolution("Ad_H does not preserve the algebra".into()))?;
        }
        let sigma = Involution::Conjugation { fixture, fixture_inv };
        let r = sigma.residuals(ctx);
        if r.square > STRUCTURE_TOL || r.morphism > STRUCTURE_TOL || r.orthogonality > STRUCTURE_TOL {
            return Err(Error::InvalidInvolution(format!(
                "residuals: square {:.3e}, morphism {:.3e}, orthogonality {:.3e}",
                r.square, r.morphism, r.orthogonality
            )));
        }
        Ok(sigma)
    }

    /// The standard fixture `H = diag(1, −1, 1, …)`.
    pub fn standard(ctx: &LieContext) -> Self {
        let n = ctx.rep_dim();
        let diag: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let mut h = CMatrix::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            h[(i, i)] = C64::new(*d, 0.0);
        }
        Involution::conjugation(ctx, h).expect("diagonal sign fixture is an involution")
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Involution::Identity)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Involution::Identity => "id",
            Involution::Conjugation { .. } => "adH",
        }
    }

    pub fn apply_alg(&self, ctx: &LieContext, x: &AlgebraVector) -> Result<AlgebraVector> {
        match self {
            Involution::Identity => Ok(x.clone()),
            Involution::Conjugation { fixture, fixture_inv } => {
                ctx.check(x)?;
                Ok(ctx.vector_from_coords(ctx.coords_of(&(fixture * &x.matrix * fixture_inv))))
            }
        }
    }

    pub fn apply_grp(&self, g: &GroupElement) -> GroupElement {
        match self {
            Involution::Identity => g.clone(),
            Involution::Conjugation { fixture, fixture_inv } => GroupElement {
                matrix: fixture * &g.matrix * fixture_inv,
                inverse: fixture * &g.inverse * fixture_inv,
            },
        }
    }

    /// σ as a coordinate matrix on 𝔤.
    pub fn matrix(&self, ctx: &LieContext) -> DMatrix<f64> {
        match self {
            Involution::Identity => DMatrix::identity(ctx.dim(), ctx.dim()),
            Involution::Conjugation { fixture, fixture_inv } => {
                let cols: Vec<DVector<f64>> = ctx
                    .basis()
                    .iter()
                    .map(|b| ctx.coords_of(&(fixture * b.matrix() * fixture_inv)))
                    .collect();
                DMatrix::from_columns(&cols)
            }
        }
    }

    pub fn residuals(&self, ctx: &LieContext) -> InvolutionResiduals {
        let s = self.matrix(ctx);
        let n = ctx.dim();
        let square = crate::linalg::max_abs(&(&s * &s - DMatrix::identity(n, n)));
        let mut morphism = 0.0f64;
        let mut orthogonality = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let (bi, bj) = (&ctx.basis()[i].coords, &ctx.basis()[j].coords);
                let lhs = &s * ctx.bracket_coords(bi, bj);
                let rhs = ctx.bracket_coords(&(&s * bi), &(&s * bj));
                morphism = morphism.max((lhs - rhs).amax());
                let k = ctx.form_coords(&(&s * bi), &(&s * bj)) - ctx.gram()[(i, j)];
                orthogonality = orthogonality.max(k.abs());
            }
        }
        InvolutionResiduals { square, morphism, orthogonality }
    }
}
