//! The SL(2, R) case: the domain **I**, the `(τ, θ, ρ)` chart
//!
//! ```text
//! z(τ, θ, ρ) = [  sinh(ρ/2) + cosh(ρ/2)cos τ      e^θ cosh(ρ/2) sin τ        ]
//!              [ −e^{−θ} cosh(ρ/2) sin τ          −sinh(ρ/2) + cosh(ρ/2)cos τ ]
//! ```
//!
//! the twisted-conjugation bivector `P_S^σ` (σ = Ad_H) pulled back to chart
//! coordinates, its calibration against the reference coefficient
//! `2cosh²(ρ/2) sin τ sinh ρ`, the quotient by `F = {exp(nπH)}` and the
//! symplectic leaves.
//!
//! Chart components are indexed `0 = τ`, `1 = θ`, `2 = ρ`, and
//! `P[i][j] = P(dcⁱ, dcʲ)`.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::double::QuasiTriple;
use crate::error::{Error, Result};
use crate::lie::{real_matrix, CMatrix, GroupElement, GroupKind, LieContext, C64};
use crate::quasi_poisson::{image_basis, infinitesimal_action, p_s_sigma};

/// Points with `t² − y²` at or below this are treated as boundary points.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub tau: f64,
    pub theta: f64,
    pub rho: f64,
}

impl ChartPoint {
    pub fn new(tau: f64, theta: f64, rho: f64) -> Self {
        ChartPoint { tau, theta, rho }
    }

    fn to_vec(self) -> DVector<f64> {
        DVector::from_column_slice(&[self.tau, self.theta, self.rho])
    }

    fn from_vec(v: &DVector<f64>) -> Self {
        ChartPoint::new(v[0], v[1], v[2])
    }
}

/// Which sign of `sin τ` the inverse chart returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChartBranch {
    /// `τ ∈ (0, π)`.
    #[default]
    Upper,
    /// `τ ∈ (−π, 0)`.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_tau: usize,
    pub n_theta: usize,
    pub n_rho: usize,
    /// τ ranges over `[margin, π − margin]`.
    pub tau_margin: f64,
    /// ρ ranges over `[−rho_max, rho_max]`.
    pub rho_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n_tau: 20, n_theta: 20, n_rho: 5, tau_margin: 0.1, rho_max: 2.0 }
    }
}

impl GridSpec {
    pub fn points(&self) -> Vec<ChartPoint> {
        let lin = |lo: f64, hi: f64, n: usize, k: usize| {
            if n == 1 {
                0.5 * (lo + hi)
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(self.n_tau * self.n_theta * self.n_rho);
        for i in 0..self.n_tau {
            let tau = lin(self.tau_margin, PI - self.tau_margin, self.n_tau, i);
            for j in 0..self.n_theta {
                let theta = TAU * j as f64 / self.n_theta as f64;
                for k in 0..self.n_rho {
                    let rho = lin(-self.rho_max, self.rho_max, self.n_rho, k);
                    out.push(ChartPoint::new(tau, theta, rho));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BtzConfig {
    pub form_scale: f64,
    pub theta_period: f64,
    pub grid: GridSpec,
    /// RK4 step in chart coordinates.
    pub step: f64,
}

impl Default for BtzConfig {
    fn default() -> Self {
        BtzConfig { form_scale: 1.0, theta_period: TAU, grid: GridSpec::default(), step: 1e-3 }
    }
}

/// The quasi-triple of SL(2, R) with σ = Ad_H at a given form scale.
#[derive(Debug, Clone)]
pub struct BtzModel {
    qt: QuasiTriple,
}

impl BtzModel {
    pub fn new(form_scale: f64) -> Result<Self> {
        let ctx = LieContext::new(GroupKind::SL2R, form_scale)?;
        Ok(BtzModel { qt: QuasiTriple::standard(ctx)? })
    }

    pub fn quasi_triple(&self) -> &QuasiTriple {
        &self.qt
    }

    pub fn form_scale(&self) -> f64 {
        self.qt.ctx().form_scale()
    }
}

fn cosh_sinh_half(rho: f64) -> (f64, f64) {
    ((0.5 * rho).cosh(), (0.5 * rho).sinh())
}

/// `z(τ, θ, ρ)`.
pub fn chart(p: ChartPoint) -> GroupElement {
    let (ch, sh) = cosh_sinh_half(p.rho);
    let (s, c) = p.tau.sin_cos();
    let (ep, em) = (p.theta.exp(), (-p.theta).exp());
    let m = real_matrix(2, &[sh + ch * c, ep * ch * s, -em * ch * s, -sh + ch * c]);
    GroupElement::new(m).expect("det z = 1")
}

/// `∂z/∂τ`, `∂z/∂θ`, `∂z/∂ρ`.
fn chart_derivatives(p: ChartPoint) -> [CMatrix; 3] {
    let (ch, sh) = cosh_sinh_half(p.rho);
    let (s, c) = p.tau.sin_cos();
    let (ep, em) = (p.theta.exp(), (-p.theta).exp());
    [
        real_matrix(2, &[-ch * s, ep * ch * c, -em * ch * c, -ch * s]),
        real_matrix(2, &[0.0, ep * ch * s, em * ch * s, 0.0]),
        real_matrix(
            2,
            &[0.5 * (ch + sh * c), 0.5 * ep * sh * s, -0.5 * em * sh * s, 0.5 * (-ch + sh * c)],
        ),
    ]
}

/// Coordinates of a trace-free real 2×2 matrix in the basis `(H, E, F)`.
fn sl2_coords(m: &CMatrix) -> DVector<f64> {
    DVector::from_column_slice(&[m[(0, 0)].re, m[(0, 1)].re, m[(1, 0)].re])
}

/// `(u, x, y, t)` with `s = [[u + x, y + t], [y − t, u − x]]`.
fn read_uxyt(s: &GroupElement) -> (f64, f64, f64, f64) {
    let (a, b, c, d) = (s.re(0, 0), s.re(0, 1), s.re(1, 0), s.re(1, 1));
    (0.5 * (a + d), 0.5 * (a - d), 0.5 * (b + c), 0.5 * (b - c))
}

fn is_real_2x2(s: &GroupElement) -> bool {
    s.matrix().shape() == (2, 2) && s.matrix().iter().all(|v| v.im == 0.0)
}

/// `t² − y² = −s₁₂ s₂₁`, evaluated without cancellation.
fn t2_minus_y2(s: &GroupElement) -> f64 {
    -s.re(0, 1) * s.re(1, 0)
}

/// Membership in **I**: `u² − x² − y² + t² = 1` and `t² − y² > 0`.
///
/// The determinant is evaluated as `ad − bc` with tolerance 1e-9 times
/// `max(1, largest squared entry)`, the absolute 1e-9 for unit-scale matrices.
pub fn in_domain_i(s: &GroupElement) -> bool {
    if !is_real_2x2(s) {
        return false;
    }
    let (a, b, c, d) = (s.re(0, 0), s.re(0, 1), s.re(1, 0), s.re(1, 1));
    let scale = [a, b, c, d].iter().map(|v| v * v).fold(1.0, f64::max);
    (a * d - b * c - 1.0).abs() < 1e-9 * scale && t2_minus_y2(s) > 0.0
}

fn guard(s: &GroupElement) -> Result<()> {
    if !in_domain_i(s) {
        return Err(Error::OutsideDomain("u^2-x^2-y^2+t^2 = 1, t^2-y^2 > 0 violated".into()));
    }
    let gap = t2_minus_y2(s);
    if gap <= BOUNDARY_MARGIN {
        return Err(Error::OutsideDomain(format!("t^2-y^2 = {gap:.3e} is within the boundary margin")));
    }
    Ok(())
}

/// Inverts the chart on the requested branch.
pub fn inverse_chart(s: &GroupElement, branch: ChartBranch) -> Result<ChartPoint> {
    if !in_domain_i(s) {
        return Err(Error::OutsideDomain("matrix is not in I".into()));
    }
    let (u, x, y, t) = read_uxyt(s);
    let (plus, minus) = (t + y, t - y);
    let upper = minus > 0.0;
    match branch {
        ChartBranch::Upper if !upper => {
            return Err(Error::OutsideDomain("point lies on the sin(tau) < 0 branch".into()))
        }
        ChartBranch::Lower if upper => {
            return Err(Error::OutsideDomain("point lies on the sin(tau) > 0 branch".into()))
        }
        _ => {}
    }
    let rho = 2.0 * x.asinh();
    let mag = (plus * minus).sqrt();
    let tau = match branch {
        ChartBranch::Upper => mag.atan2(u),
        ChartBranch::Lower => (-mag).atan2(u),
    };
    let theta = 0.5 * (plus / minus).ln();
    Ok(ChartPoint::new(tau, theta, rho))
}

/// Right-trivialized frame `vᵢ = (∂z/∂cᵢ) z⁻¹` as columns.
fn frame(p: ChartPoint) -> DMatrix<f64> {
    let z = chart(p);
    let inv = z.inverse();
    let cols: Vec<DVector<f64>> = chart_derivatives(p)
        .iter()
        .map(|d| sl2_coords(&(d * inv.matrix())))
        .collect();
    DMatrix::from_columns(&cols)
}

fn frame_inverse(p: ChartPoint) -> Result<DMatrix<f64>> {
    frame(p)
        .try_inverse()
        .ok_or(Error::OutsideDomain("chart frame is singular".into()))
}

/// `P_S^σ(z(p))` in chart coordinates.
pub fn coordinate_bivector(model: &BtzModel, p: ChartPoint) -> Result<[[f64; 3]; 3]> {
    let z = chart(p);
    guard(&z)?;
    let vi = frame_inverse(p)?;
    let m = &vi * p_s_sigma(&model.qt, &z).matrix() * vi.transpose();
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[(i, j)];
        }
    }
    Ok(out)
}

/// Reference coefficient `2cosh²(ρ/2) sin τ sinh ρ` of `∂τ ∧ ∂θ`.
pub fn closed_form_coeff(p: ChartPoint) -> f64 {
    let ch = (0.5 * p.rho).cosh();
    2.0 * ch * ch * p.tau.sin() * p.rho.sinh()
}

/// Exact `(τ, θ)` component of the pulled-back bivector at form scale `c`:
/// `tanh(ρ/2) / (c sin τ)`.
pub fn exact_pullback_coeff(p: ChartPoint, form_scale: f64) -> f64 {
    (0.5 * p.rho).tanh() / (form_scale * p.tau.sin())
}

/// Comparison coefficient `1 / (cosh²(ρ/2) sin τ)`.
pub fn brs_coeff(p: ChartPoint) -> Result<f64> {
    let s = p.tau.sin();
    if s.abs() <= BOUNDARY_MARGIN {
        return Err(Error::OutsideDomain(format!("sin(tau) = {s:.3e}")));
    }
    let ch = (0.5 * p.rho).cosh();
    Ok(1.0 / (ch * ch * s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Median of `P(dτ, dθ) / closed_form_coeff` at the model's form scale.
    pub ratio: f64,
    /// Form scale at which the median ratio would be 1.
    pub matching_form_scale: f64,
    /// Largest relative deviation of a grid ratio from the median.
    pub spread: f64,
    pub n_points: usize,
}

impl Calibration {
    /// True when the ratio is constant over the grid to `tol`.
    pub fn is_consistent(&self, tol: f64) -> bool {
        self.spread < tol
    }
}

/// Fits the ratio between the pulled-back `(τ, θ)` component and
/// [`closed_form_coeff`] over a grid.
pub fn calibrate_scale(model: &BtzModel, grid: &[ChartPoint]) -> Result<Calibration> {
    let mut ratios = Vec::with_capacity(grid.len());
    for &p in grid {
        let f = closed_form_coeff(p);
        if f.abs() < 1e-12 {
            continue;
        }
        ratios.push(coordinate_bivector(model, p)?[0][1] / f);
    }
    if ratios.len() < 10 {
        return Err(Error::DegenerateGrid(format!(
            "{} usable points (need at least 10 with a nonzero reference coefficient)",
            ratios.len()
        )));
    }
    ratios.sort_by(f64::total_cmp);
    let mid = ratios.len() / 2;
    let median = if ratios.len() % 2 == 1 {
        ratios[mid]
    } else {
        0.5 * (ratios[mid - 1] + ratios[mid])
    };
    let spread = ratios
        .iter()
        .map(|r| ((r - median) / median).abs())
        .fold(0.0, f64::max);
    Ok(Calibration {
        ratio: median,
        matching_form_scale: model.form_scale() * median,
        spread,
        n_points: ratios.len(),
    })
}

/// `exp(kπH)`; twisted conjugation by it shifts θ by `2πk`.
pub fn f_element(k: i64) -> GroupElement {
    let a = k as f64 * PI;
    GroupElement::new(real_matrix(2, &[a.exp(), 0.0, 0.0, (-a).exp()])).expect("diagonal")
}

/// Reduces θ to `[0, 2π)`.
pub fn wrap_quotient(p: ChartPoint) -> ChartPoint {
    let mut theta = p.theta.rem_euclid(TAU);
    if theta >= TAU {
        theta = 0.0;
    }
    ChartPoint { theta, ..p }
}

/// The integer `k` with `wrap_quotient(p).theta = p.theta − 2πk`.
pub fn wrap_count(p: ChartPoint) -> i64 {
    (p.theta / TAU).floor() as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointRank {
    #[serde(rename = "rank-0")]
    Rank0,
    #[serde(rename = "rank-2")]
    Rank2,
}

impl PointRank {
    pub fn label(self) -> &'static str {
        match self {
            PointRank::Rank0 => "rank-0",
            PointRank::Rank2 => "rank-2",
        }
    }
}

pub fn classify_point(model: &BtzModel, p: ChartPoint) -> Result<PointRank> {
    let z = chart(p);
    guard(&z)?;
    match image_basis(&model.qt, &z).rank {
        0 => Ok(PointRank::Rank0),
        2 => Ok(PointRank::Rank2),
        r => Err(Error::InternalMismatch { what: "bivector rank on I", residual: r as f64 }),
    }
}

/// Orbit field `x ↦ x − Ad_z σ(x)` of a basis direction, in chart coordinates.
fn orbit_field(model: &BtzModel, p: ChartPoint, basis_index: usize) -> Result<DVector<f64>> {
    let ctx = model.qt.ctx();
    let z = chart(p);
    guard(&z)?;
    let v = infinitesimal_action(&model.qt, &z, &ctx.basis()[basis_index])?;
    Ok(frame_inverse(p)? * v.coords())
}

/// The leaf-tracing field `½X_H + cos τ · ½(e^θ X_E − e^{−θ} X_F)`.
///
/// `e^θ X_E` and `e^{−θ} X_F` are invariant under the θ-shift generated by H,
/// so the field is too; in chart coordinates it reduces to `∂θ + cos τ ∂τ`.
fn leaf_field(model: &BtzModel, p: ChartPoint) -> Result<DVector<f64>> {
    let xh = orbit_field(model, p, 0)?;
    let xe = orbit_field(model, p, 1)?;
    let xf = orbit_field(model, p, 2)?;
    let transverse = (xe * p.theta.exp() - xf * (-p.theta).exp()) * 0.5;
    Ok(xh * 0.5 + transverse * p.tau.cos())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafTrace {
    /// Points with θ reduced to `[0, 2π)`.
    pub points: Vec<ChartPoint>,
    pub rho_ref: f64,
    pub classification: PointRank,
    /// Set when the trace reached the boundary of **I** and was cut short.
    pub truncated: bool,
    pub step: f64,
}

impl LeafTrace {
    pub fn max_rho_drift(&self) -> f64 {
        self.points
            .iter()
            .map(|p| (p.rho - self.rho_ref).abs())
            .fold(0.0, f64::max)
    }
}

/// Traces a curve inside the symplectic leaf through `start` with fixed-step RK4.
///
/// The state is reduced to `θ ∈ [0, 2π)` after every step; the field is
/// invariant under θ-shifts, so this only keeps the chart entries bounded.
pub fn trace_leaf(model: &BtzModel, start: ChartPoint, cfg: &BtzConfig, n_steps: usize) -> Result<LeafTrace> {
    if !(cfg.step > 0.0 && cfg.step.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {}", cfg.step)));
    }
    if classify_point(model, start)? == PointRank::Rank0 {
        return Err(Error::RankZero);
    }
    let h = cfg.step;
    let mut y = wrap_quotient(start).to_vec();
    let mut points = vec![wrap_quotient(start)];
    let mut truncated = false;
    let field = |v: &DVector<f64>| leaf_field(model, ChartPoint::from_vec(v));
    for _ in 0..n_steps {
        let step = (|| -> Result<DVector<f64>> {
            let k1 = field(&y)?;
            let k2 = field(&(&y + &k1 * (0.5 * h)))?;
            let k3 = field(&(&y + &k2 * (0.5 * h)))?;
            let k4 = field(&(&y + &k3 * h))?;
            let next = &y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            guard(&chart(ChartPoint::from_vec(&next)))?;
            Ok(next)
        })();
        match step {
            Ok(next) => {
                y = wrap_quotient(ChartPoint::from_vec(&next)).to_vec();
                points.push(ChartPoint::from_vec(&y));
            }
            Err(Error::OutsideDomain(_)) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(LeafTrace {
        points,
        rho_ref: start.rho,
        classification: PointRank::Rank2,
        truncated,
        step: h,
    })
}

/// Fixed 17-significant-digit rendering used in CSV output.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub const CSV_HEADER: &str = "tau,theta,rho,p_tau_theta,p_tau_rho,p_theta_rho";

/// One CSV row: the point and its three independent bivector components.
pub fn csv_row(model: &BtzModel, p: ChartPoint) -> Result<String> {
    let b = coordinate_bivector(model, p)?;
    Ok([p.tau, p.theta, p.rho, b[0][1], b[0][2], b[1][2]]
        .iter()
        .map(|v| fmt_f64(*v))
        .collect::<Vec<_>>()
        .join(","))
}

/// CSV document with LF endings; a final comment-free table, no footer rows.
pub fn points_to_csv(model: &BtzModel, points: &[ChartPoint]) -> Result<String> {
    let mut out = String::with_capacity(points.len() * 140);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for &p in points {
        out.push_str(&csv_row(model, p)?);
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointRecord {
    pub tau: f64,
    pub theta: f64,
    pub rho: f64,
    pub p_tau_theta: f64,
    pub p_tau_rho: f64,
    pub p_theta_rho: f64,
}

pub fn point_record(model: &BtzModel, p: ChartPoint) -> Result<PointRecord> {
    let b = coordinate_bivector(model, p)?;
    Ok(PointRecord {
        tau: p.tau,
        theta: p.theta,
        rho: p.rho,
        p_tau_theta: b[0][1],
        p_tau_rho: b[0][2],
        p_theta_rho: b[1][2],
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeafSummary {
    pub rho_ref: f64,
    pub max_rho_drift: f64,
    pub classification: PointRank,
    pub truncated: bool,
    pub n_points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeafDocument {
    pub config: BtzConfig,
    pub seed: u64,
    pub points: Vec<PointRecord>,
    pub summary: LeafSummary,
}

pub fn leaf_document(model: &BtzModel, trace: &LeafTrace, cfg: &BtzConfig, seed: u64) -> Result<LeafDocument> {
    let points = trace
        .points
        .iter()
        .map(|p| point_record(model, *p))
        .collect::<Result<Vec<_>>>()?;
    Ok(LeafDocument {
        config: *cfg,
        seed,
        points,
        summary: LeafSummary {
            rho_ref: trace.rho_ref,
            max_rho_drift: trace.max_rho_drift(),
            classification: trace.classification,
            truncated: trace.truncated,
            n_points: trace.points.len(),
        },
    })
}

/// CSV trace followed by `#`-prefixed summary lines.
pub fn leaf_to_csv(model: &BtzModel, trace: &LeafTrace) -> Result<String> {
    let mut out = points_to_csv(model, &trace.points)?;
    let _ = writeln!(out, "# rho_ref={}", fmt_f64(trace.rho_ref));
    let _ = writeln!(out, "# max_rho_drift={}", fmt_f64(trace.max_rho_drift()));
    let _ = writeln!(out, "# truncated={}", trace.truncated);
    Ok(out)
}

/// Complex entry helper for tests and callers building matrices by hand.
pub fn matrix_2x2(a: f64, b: f64, c: f64, d: f64) -> GroupElement {
    GroupElement::new(CMatrix::from_row_slice(
        2,
        2,
        &[C64::new(a, 0.0), C64::new(b, 0.0), C64::new(c, 0.0), C64::new(d, 0.0)],
    ))
    .expect("invertible 2x2 matrix")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn chart_values() {
        let z = chart(ChartPoint::new(FRAC_PI_2, 0.0, 0.0));
        assert!(z.distance(&matrix_2x2(0.0, 1.0, -1.0, 0.0)) < 1e-15);
        let rho = 0.8;
        let (ch, sh) = cosh_sinh_half(rho);
        let z = chart(ChartPoint::new(FRAC_PI_2, 0.0, rho));
        assert!(z.distance(&matrix_2x2(sh, ch, -ch, -sh)) < 1e-15);
    }

    #[test]
    fn chart_has_unit_determinant() {
        let g = GridSpec { n_tau: 10, n_theta: 10, n_rho: 10, ..GridSpec::default() };
        for p in g.points() {
            assert!((chart(p).det().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_chart_examples() {
        let p = inverse_chart(&matrix_2x2(0.0, 1.0, -1.0, 0.0), ChartBranch::Upper).unwrap();
        assert!((p.tau - FRAC_PI_2).abs() < 1e-15 && p.theta.abs() < 1e-15 && p.rho.abs() < 1e-15);
        assert!(inverse_chart(&matrix_2x2(1.0, 0.0, 0.0, 1.0), ChartBranch::Upper).is_err());
        let lower = matrix_2x2(0.0, -1.0, 1.0, 0.0);
        assert!(inverse_chart(&lower, ChartBranch::Upper).is_err());
        let p = inverse_chart(&lower, ChartBranch::Lower).unwrap();
        assert!(chart(p).distance(&lower) < 1e-15);
    }

    #[test]
    fn domain_membership() {
        assert!(in_domain_i(&matrix_2x2(0.0, 1.0, -1.0, 0.0)));
        assert!(!in_domain_i(&matrix_2x2(1.0, 0.0, 0.0, 1.0)));
        assert!(!in_domain_i(&matrix_2x2(2.0, 0.0, 0.0, 0.5)));
        assert!(in_domain_i(&matrix_2x2(0.0, 1.0, -1.0, 1e-6)));
        assert!(!in_domain_i(&matrix_2x2(0.0, 1.0, -1.0 - 1e-6, 0.0)));
        assert!(in_domain_i(&chart(ChartPoint::new(1.0, 30.0, 2.0))));
    }

    #[test]
    fn coefficients() {
        let p = ChartPoint::new(0.7, 1.0, 0.0);
        assert_eq!(closed_form_coeff(p), 0.0);
        let q = ChartPoint::new(FRAC_PI_2, 0.3, 1.2);
        let ch = 0.6f64.cosh();
        assert!((closed_form_coeff(q) - 2.0 * ch * ch * 1.2f64.sinh()).abs() < 1e-14);
        let neg = ChartPoint { rho: -1.2, ..q };
        assert_eq!(closed_form_coeff(neg), -closed_form_coeff(q));
        assert_eq!(brs_coeff(ChartPoint::new(FRAC_PI_2, 2.0, 0.0)).unwrap(), 1.0);
        assert!((brs_coeff(q).unwrap() - 1.0 / (ch * ch)).abs() < 1e-15);
        assert!(brs_coeff(ChartPoint::new(0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn coordinate_bivector_structure() {
        let model = BtzModel::new(1.0).unwrap();
        let p = ChartPoint::new(FRAC_PI_2, 0.0, 0.0);
        let b = coordinate_bivector(&model, p).unwrap();
        assert!(b[0][1].abs() < 1e-12);
        for p in [ChartPoint::new(FRAC_PI_2, 0.0, 1.0), ChartPoint::new(1.1, -0.4, -1.3)] {
            let b = coordinate_bivector(&model, p).unwrap();
            assert!(b[0][2].abs() < 1e-9 && b[1][2].abs() < 1e-9);
            assert!((b[0][1] + b[1][0]).abs() < 1e-12);
            assert!((b[0][1] - exact_pullback_coeff(p, 1.0)).abs() < 1e-10);
        }
        assert!(coordinate_bivector(&model, ChartPoint::new(0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn wrap_examples() {
        let p = ChartPoint::new(1.0, TAU + 0.3, 0.5);
        let w = wrap_quotient(p);
        assert!((w.theta - 0.3).abs() < 1e-15);
        assert_eq!(wrap_quotient(w), w);
        assert_eq!(wrap_count(p), 1);
        assert!(wrap_quotient(ChartPoint::new(1.0, -1e-18, 0.0)).theta < TAU);
    }

    #[test]
    fn classification() {
        let model = BtzModel::new(1.0).unwrap();
        assert_eq!(classify_point(&model, ChartPoint::new(1.0, 0.4, 0.0)).unwrap(), PointRank::Rank0);
        assert_eq!(classify_point(&model, ChartPoint::new(FRAC_PI_2, 0.0, 1.0)).unwrap(), PointRank::Rank2);
        assert_eq!(classify_point(&model, ChartPoint::new(FRAC_PI_2, 5.0, -1.0)).unwrap(), PointRank::Rank2);
    }

    #[test]
    fn short_leaf_keeps_rho() {
        let model = BtzModel::new(1.0).unwrap();
        let cfg = BtzConfig::default();
        let trace = trace_leaf(&model, ChartPoint::new(1.0, 0.0, 1.0), &cfg, 200).unwrap();
        assert_eq!(trace.points.len(), 201);
        assert!(!trace.truncated);
        assert!(trace.max_rho_drift() < 1e-10);
        assert!(trace.points.last().unwrap().tau > 1.0);
        assert!(matches!(
            trace_leaf(&model, ChartPoint::new(FRAC_PI_2, 0.0, 0.0), &cfg, 10),
            Err(Error::RankZero)
        ));
    }

    #[test]
    fn csv_layout() {
        let model = BtzModel::new(1.0).unwrap();
        let csv = points_to_csv(&model, &[ChartPoint::new(FRAC_PI_2, 0.0, 1.0)]).unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1].split(',').count(), 6);
        assert!(lines[1].starts_with("1.5707963267948966e0,"));
    }
}
