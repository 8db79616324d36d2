//! Seeded verification suites.
//!
//! Each suite is a list of check families. A family evaluates one identity on
//! a seeded sample set and records the worst residual against its tolerance.
//! Every family draws from its own RNG stream, derived from the run seed and
//! the family name, so a family's residual does not depend on which suite ran
//! it.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::btz::{self, BtzConfig, BtzModel, ChartBranch, ChartPoint, GridSpec, PointRank};
use crate::config::{RunConfig, SigmaChoice};
use crate::double::{DoubleCovector, QuasiTriple};
use crate::error::Result;
use crate::lie::{CMatrix, GroupElement, GroupKind, LieContext, C64};
use crate::quasi_poisson::{
    act, check_fixed_point, check_invariance, image_basis, p_d_sigma, p_s_sigma, p_s_via_s_sigma, phi_s,
    project_p_d_to_s, schouten_closed, schouten_fd, su2_isomorphism_check, su2_u, FixedPoint,
};
use crate::sampling::Sampler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Core,
    Double,
    Bivector,
    Btz,
    Su2,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::All, Suite::Core, Suite::Double, Suite::Bivector, Suite::Btz, Suite::Su2];

    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Core => "core",
            Suite::Double => "double",
            Suite::Bivector => "bivector",
            Suite::Btz => "btz",
            Suite::Su2 => "su2",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| crate::Error::InvalidArgument(format!("unknown suite '{s}'")))
    }
}

/// How a family's residual is compared with its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// Absolute residual; passes when below tolerance.
    Abs,
    /// Relative residual (absolute when both sides are below 1e-12); passes when below tolerance.
    Rel,
    /// Number of wrong outcomes; passes when zero.
    Count,
    /// Smallest observed value; passes when above tolerance.
    Min,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyResult {
    pub name: String,
    /// Acceptance criterion covered, if any.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub criterion: Option<u8>,
    pub n_checks: usize,
    /// Worst residual (the smallest value for `min` families); `null` when a
    /// check produced NaN.
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub kind: CheckKind,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: Suite,
    pub seed: u64,
    pub form_scale: f64,
    pub pass: bool,
    pub n_checks: usize,
    pub tolerances: crate::config::Tolerances,
    pub families: Vec<FamilyResult>,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    pub fn failures(&self) -> impl Iterator<Item = &FamilyResult> {
        self.families.iter().filter(|f| !f.pass)
    }

    /// Families tagged with an acceptance criterion.
    pub fn for_criterion(&self, c: u8) -> impl Iterator<Item = &FamilyResult> {
        self.families.iter().filter(move |f| f.criterion == Some(c))
    }
}

/// Tolerance source for a family.
#[derive(Debug, Clone, Copy)]
enum Tol {
    Stated(f64),
    DefaultAbs,
    DefaultRel,
}

struct Family {
    name: String,
    criterion: Option<u8>,
    kind: CheckKind,
    tolerance: f64,
    n: usize,
    worst: f64,
    detail: Option<String>,
}

impl Family {
    fn record(&mut self, r: f64) {
        self.n += 1;
        if r.is_nan() || self.worst.is_nan() {
            self.worst = f64::NAN;
        } else if self.kind == CheckKind::Min {
            self.worst = self.worst.min(r);
        } else {
            self.worst = self.worst.max(r);
        }
    }

    fn record_result(&mut self, r: Result<f64>) {
        self.record(r.unwrap_or(f64::NAN));
    }

    fn finish(self) -> FamilyResult {
        let pass = !self.worst.is_nan()
            && self.n > 0
            && match self.kind {
                CheckKind::Min => self.worst > self.tolerance,
                CheckKind::Count => self.worst == 0.0,
                _ => self.worst < self.tolerance,
            };
        FamilyResult {
            name: self.name,
            criterion: self.criterion,
            n_checks: self.n,
            max_residual: (!self.worst.is_nan()).then_some(self.worst),
            tolerance: self.tolerance,
            kind: self.kind,
            pass,
            detail: self.detail,
        }
    }
}

/// `|a − b| / max(|a|, |b|)`, or `|a − b|` when both are below 1e-12.
pub fn rel_residual(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-12 {
        (a - b).abs()
    } else {
        (a - b).abs() / scale
    }
}

fn name_hash(name: &str) -> u64 {
    // FNV-1a
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

struct Runner<'a> {
    cfg: &'a RunConfig,
    families: Vec<FamilyResult>,
}

impl<'a> Runner<'a> {
    fn tolerance(&self, kind: CheckKind, tol: Tol) -> f64 {
        let t = self.cfg.tolerances;
        let base = match tol {
            Tol::Stated(v) => v,
            Tol::DefaultAbs => t.abs,
            Tol::DefaultRel => t.rel,
        };
        match (kind, t.override_all) {
            (CheckKind::Abs | CheckKind::Rel, Some(v)) => v,
            _ => base,
        }
    }

    /// Runs `body` as one family with its own sampler.
    fn family(
        &mut self,
        name: impl Into<String>,
        criterion: Option<u8>,
        kind: CheckKind,
        tol: Tol,
        body: impl FnOnce(&mut Family, &mut Sampler),
    ) {
        let name = name.into();
        let mut smp = Sampler::new(self.cfg.seed ^ name_hash(&name));
        let mut fam = Family {
            tolerance: self.tolerance(kind, tol),
            worst: if kind == CheckKind::Min { f64::INFINITY } else { 0.0 },
            name,
            criterion,
            kind,
            n: 0,
            detail: None,
        };
        body(&mut fam, &mut smp);
        self.families.push(fam.finish());
    }

    fn groups(&self, default: &[GroupKind]) -> Vec<GroupKind> {
        match self.cfg.group {
            Some(g) => vec![g],
            None => default.to_vec(),
        }
    }

    fn sigmas(&self) -> Vec<SigmaChoice> {
        match self.cfg.sigma {
            Some(s) => vec![s],
            None => vec![SigmaChoice::AdH, SigmaChoice::Identity],
        }
    }

    fn triple(&self, kind: GroupKind, sigma: SigmaChoice) -> Result<QuasiTriple> {
        sigma.quasi_triple(LieContext::new(kind, self.cfg.form_scale)?)
    }
}

const STANDARD_GROUPS: [GroupKind; 3] = [GroupKind::SL2R, GroupKind::SL3R, GroupKind::Su2];

/// Runs a suite. Errors only on configuration problems; numerical failures
/// are reported in the families.
pub fn run_suite(suite: Suite, cfg: &RunConfig) -> Result<VerificationReport> {
    // validate the configured group and scale up front
    for g in cfg.group.into_iter().chain(STANDARD_GROUPS) {
        LieContext::new(g, cfg.form_scale)?;
    }
    let mut r = Runner { cfg, families: Vec::new() };
    let parts: &[Suite] = match suite {
        Suite::All => &[Suite::Core, Suite::Double, Suite::Bivector, Suite::Btz, Suite::Su2],
        Suite::Core => &[Suite::Core],
        Suite::Double => &[Suite::Double],
        Suite::Bivector => &[Suite::Bivector],
        Suite::Btz => &[Suite::Btz],
        Suite::Su2 => &[Suite::Su2],
    };
    for part in parts {
        match part {
            Suite::Core => core_suite(&mut r)?,
            Suite::Double => double_suite(&mut r)?,
            Suite::Bivector => bivector_suite(&mut r)?,
            Suite::Btz => btz_suite(&mut r)?,
            Suite::Su2 => su2_suite(&mut r)?,
            Suite::All => unreachable!(),
        }
    }
    let families = r.families;
    Ok(VerificationReport {
        suite,
        seed: cfg.seed,
        form_scale: cfg.form_scale,
        pass: families.iter().all(|f| f.pass),
        n_checks: families.iter().map(|f| f.n_checks).sum(),
        tolerances: cfg.tolerances,
        families,
    })
}

fn core_suite(r: &mut Runner) -> Result<()> {
    for kind in r.groups(&STANDARD_GROUPS) {
        let ctx = LieContext::new(kind, r.cfg.form_scale)?;
        let p = format!("core.{kind}");
        let basis = ctx.basis().to_vec();
        r.family(format!("{p}.structure_constants"), None, CheckKind::Abs, Tol::Stated(1e-12), |f, _| {
            for (i, bi) in basis.iter().enumerate() {
                for (j, bj) in basis.iter().enumerate() {
                    let n = bi.matrix().nrows();
                    let expanded = basis.iter().enumerate().fold(CMatrix::zeros(n, n), |acc, (k, bk)| {
                        acc + bk.matrix() * C64::new(ctx.structure_constant(i, j, k), 0.0)
                    });
                    let direct = bi.matrix() * bj.matrix() - bj.matrix() * bi.matrix();
                    f.record(max_entry(&(expanded - direct)));
                }
            }
        });
        r.family(format!("{p}.jacobi"), None, CheckKind::Abs, Tol::Stated(1e-12), |f, _| {
            for a in &basis {
                for b in &basis {
                    for c in &basis {
                        let res = (|| {
                            let t1 = ctx.bracket(&ctx.bracket(a, b)?, c)?;
                            let t2 = ctx.bracket(&ctx.bracket(b, c)?, a)?;
                            let t3 = ctx.bracket(&ctx.bracket(c, a)?, b)?;
                            Ok(t1.add(&t2)?.add(&t3)?.max_abs())
                        })();
                        f.record_result(res);
                    }
                }
            }
        });
        r.family(format!("{p}.ad_invariance"), None, CheckKind::Rel, Tol::DefaultRel, |f, smp| {
            for _ in 0..200 {
                let (g, x, y) = (smp.group(&ctx), smp.algebra(&ctx), smp.algebra(&ctx));
                let res = (|| Ok(rel_residual(ctx.form(&ctx.adjoint(&g, &x)?, &ctx.adjoint(&g, &y)?)?, ctx.form(&x, &y)?)))();
                f.record_result(res);
            }
        });
        r.family(format!("{p}.involution_axioms"), None, CheckKind::Abs, Tol::Stated(1e-12), |f, _| {
            for sigma in [SigmaChoice::AdH, SigmaChoice::Identity] {
                let res = sigma.involution(&ctx).residuals(&ctx);
                f.record(res.square.max(res.morphism).max(res.orthogonality));
            }
        });
        r.family(format!("{p}.exp_inverse"), None, CheckKind::Abs, Tol::Stated(1e-12), |f, smp| {
            for _ in 0..50 {
                let x = smp.algebra(&ctx);
                let norm = x.matrix().norm();
                let x = if norm > 2.0 { x.scale(2.0 / norm) } else { x };
                let res = (|| {
                    let prod = ctx.exp(&x)?.mul(&ctx.exp(&x.neg())?);
                    Ok(prod.distance(&ctx.identity()))
                })();
                f.record_result(res);
            }
        });
        r.family(format!("{p}.musical_roundtrip"), None, CheckKind::Abs, Tol::Stated(1e-12), |f, smp| {
            for _ in 0..50 {
                let x = smp.algebra(&ctx);
                f.record_result((|| Ok(ctx.sharp(&ctx.flat(&x)?)?.sub(&x)?.max_abs()))());
            }
        });
    }
    Ok(())
}

fn max_entry(m: &CMatrix) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn double_suite(r: &mut Runner) -> Result<()> {
    for kind in r.groups(&STANDARD_GROUPS) {
        for sigma in r.sigmas() {
            let qt = r.triple(kind, sigma)?;
            let ctx = qt.ctx().clone();
            let n = ctx.dim();
            let p = format!("double.{kind}.{sigma}");
            let res = qt.residuals();
            r.family(format!("{p}.isotropy"), Some(1), CheckKind::Abs, Tol::Stated(1e-12), |f, _| {
                f.record(res.isotropy_plus);
                f.record(res.isotropy_minus);
                f.n = 2 * n * n;
            });
            r.family(format!("{p}.direct_sum_pivot"), Some(1), CheckKind::Min, Tol::Stated(1e-8), |f, _| {
                f.record(res.direct_sum_min_pivot);
            });
            r.family(format!("{p}.f_sigma_zero"), Some(1), CheckKind::Abs, Tol::Stated(1e-12), |f, smp| {
                for _ in 0..100 {
                    let (a, b) = (smp.covector(&ctx), smp.covector(&ctx));
                    f.record_result(qt.f_sigma(&a, &b).map(|d| d.max_abs()));
                }
            });
            r.family(format!("{p}.phi_sigma_routes"), Some(1), CheckKind::Rel, Tol::DefaultRel, |f, smp| {
                for _ in 0..100 {
                    let (a, b, c) = (smp.covector(&ctx), smp.covector(&ctx), smp.covector(&ctx));
                    f.record_result(qt.phi_sigma_routes(&a, &b, &c).map(|(x, y)| rel_residual(x, y)));
                }
            });
            r.family(format!("{p}.resolution_of_identity"), None, CheckKind::Abs, Tol::Stated(1e-12), |f, smp| {
                for _ in 0..100 {
                    let u = crate::double::DoubleElement::new(smp.algebra(&ctx), smp.algebra(&ctx));
                    let res = (|| Ok(qt.project_plus(&u)?.add(&qt.project_minus(&u)?)?.sub(&u)?.max_abs()))();
                    f.record_result(res);
                }
            });
            r.family(format!("{p}.j_characterization"), None, CheckKind::Abs, Tol::Stated(1e-12), |f, smp| {
                for _ in 0..50 {
                    let (xi, w) = (smp.covector(&ctx), smp.algebra(&ctx));
                    let res = (|| {
                        let lhs = qt.pairing(&qt.j_map(&xi)?, &qt.delta_plus_sigma(&w))?;
                        let sw = qt.sigma().apply_alg(&ctx, &w)?;
                        let rhs = xi.apply(&w) + qt.compose_sigma(&xi).apply(&sw);
                        Ok((lhs - rhs).abs())
                    })();
                    f.record_result(res);
                }
            });
            r.family(format!("{p}.r_matrix_routes"), None, CheckKind::Abs, Tol::Stated(1e-12), |f, smp| {
                for _ in 0..50 {
                    let alpha = DoubleCovector::new(smp.covector(&ctx), smp.covector(&ctx));
                    let res = (|| Ok(qt.r_matrix(&alpha)?.sub(&qt.r_matrix_via_decomposition(&alpha)?)?.max_abs()))();
                    f.record_result(res);
                }
            });
        }
    }
    Ok(())
}

fn bivector_suite(r: &mut Runner) -> Result<()> {
    let sl2 = r.triple(GroupKind::SL2R, SigmaChoice::AdH)?;
    let sl3 = r.triple(GroupKind::SL3R, SigmaChoice::AdH)?;
    let sl3_id = r.triple(GroupKind::SL3R, SigmaChoice::Identity)?;
    let label = |qt: &QuasiTriple| format!("{}.{}", qt.ctx().kind(), qt.sigma().label());

    for qt in [&sl2, &sl3] {
        let ctx = qt.ctx();
        let p = format!("bivector.{}", label(qt));
        r.family(format!("{p}.antisymmetry"), Some(2), CheckKind::Abs, Tol::DefaultAbs, |f, smp| {
            for _ in 0..100 {
                let (a, b) = (smp.group(ctx), smp.group(ctx));
                f.record(p_d_sigma(qt, &a, &b).antisymmetry_residual());
                f.record(p_s_sigma(qt, &a).antisymmetry_residual());
            }
        });
        r.family(format!("{p}.projectability_spread"), Some(2), CheckKind::Abs, Tol::Stated(1e-9), |f, smp| {
            for _ in 0..20 {
                let (a, b) = (smp.group(ctx), smp.group(ctx));
                let base = project_p_d_to_s(qt, &a, &b);
                for _ in 0..50 {
                    let c = smp.group(ctx);
                    f.record(project_p_d_to_s(qt, &a.mul(&c), &b.mul(&c)).distance(&base));
                }
            }
        });
        r.family(format!("{p}.projection_vs_closed_form"), Some(2), CheckKind::Abs, Tol::DefaultAbs, |f, smp| {
            for _ in 0..100 {
                let (a, b) = (smp.group(ctx), smp.group(ctx));
                f.record(project_p_d_to_s(qt, &a, &b).distance(&p_s_sigma(qt, &a.mul(&b.inverse()))));
            }
        });
        r.family(format!("{p}.s_sigma_two_route"), Some(3), CheckKind::Abs, Tol::DefaultAbs, |f, smp| {
            let plain = qt.without_twist();
            for _ in 0..100 {
                let (g, h) = (smp.group(ctx), smp.group(ctx));
                let point = g.mul(&qt.sigma().apply_grp(&h).inverse());
                f.record(p_s_via_s_sigma(qt, &g, &h).distance(&p_s_sigma(&plain, &point)));
            }
        });
        r.family(format!("{p}.image_containment"), Some(5), CheckKind::Abs, Tol::Stated(1e-9), |f, smp| {
            for _ in 0..100 {
                f.record(image_basis(qt, &smp.group(ctx)).containment_residual);
            }
        });
        r.family(format!("{p}.image_spans_agree"), Some(5), CheckKind::Count, Tol::Stated(0.0), |f, smp| {
            for _ in 0..100 {
                f.record(if image_basis(qt, &smp.group(ctx)).spans_agree() { 0.0 } else { 1.0 });
            }
        });
    }

    {
        let ctx = sl3.ctx();
        r.family("bivector.sl3r.adH.schouten_fd_vs_closed", Some(4), CheckKind::Abs, Tol::Stated(1e-5), |f, smp| {
            let mut largest = 0.0f64;
            for _ in 0..50 {
                let s = smp.group(ctx);
                let (a, b, c) = (smp.covector(ctx), smp.covector(ctx), smp.covector(ctx));
                let closed = schouten_closed(&sl3, &s, &a, &b, &c);
                largest = largest.max(closed.abs());
                f.record_result(schouten_fd(&sl3, &s, &a, &b, &c, 1e-4).map(|fd| (fd - closed).abs()));
            }
            f.detail = Some(format!("h = 1e-4; largest |closed form| = {largest:.3e}"));
        });
    }

    for qt in [&sl2, &sl3, &sl3_id] {
        let ctx = qt.ctx();
        r.family(
            format!("bivector.{}.quasi_poisson_identity", label(qt)),
            Some(4),
            CheckKind::Rel,
            Tol::Stated(1e-9),
            |f, smp| {
                for _ in 0..100 {
                    let s = smp.group(ctx);
                    let (a, b, c) = (smp.covector(ctx), smp.covector(ctx), smp.covector(ctx));
                    let closed = schouten_closed(qt, &s, &a, &b, &c);
                    f.record_result(phi_s(qt, &s, &a, &b, &c).map(|v| rel_residual(closed, v)));
                }
            },
        );
    }

    for qt in [&sl2, &sl3_id] {
        let ctx = qt.ctx();
        let p = format!("bivector.{}", label(qt));
        r.family(format!("{p}.invariance"), Some(5), CheckKind::Abs, Tol::DefaultAbs, |f, smp| {
            for _ in 0..100 {
                let (g, s) = (smp.group(ctx), smp.group(ctx));
                f.record(check_invariance(qt, &g, &s));
            }
        });
        r.family(format!("{p}.action_law"), None, CheckKind::Abs, Tol::DefaultAbs, |f, smp| {
            for _ in 0..100 {
                let (g1, g2, s) = (smp.group(ctx), smp.group(ctx), smp.group(ctx));
                let lhs = act(qt, &g1, &act(qt, &g2, &s));
                f.record(lhs.distance(&act(qt, &g1.mul(&g2), &s)));
            }
        });
    }
    Ok(())
}

/// Circular distance between two angles.
fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn relative_distance(a: &GroupElement, b: &GroupElement) -> f64 {
    let scale = a.matrix().iter().chain(b.matrix().iter()).map(|v| v.norm()).fold(1.0, f64::max);
    a.distance(b) / scale
}

fn btz_suite(r: &mut Runner) -> Result<()> {
    let model = BtzModel::new(r.cfg.form_scale)?;
    let grid = GridSpec::default().points();
    let cfg = BtzConfig { form_scale: r.cfg.form_scale, ..BtzConfig::default() };

    r.family("btz.transverse_components", Some(6), CheckKind::Abs, Tol::Stated(1e-9), |f, _| {
        for &p in &grid {
            f.record_result(btz::coordinate_bivector(&model, p).map(|b| b[0][2].abs().max(b[1][2].abs())));
        }
    });

    let calibration = btz::calibrate_scale(&model, &grid);
    r.family("btz.calibration_spread", Some(6), CheckKind::Abs, Tol::Stated(1e-8), |f, _| match &calibration {
        Ok(c) => {
            f.record(c.spread);
            f.detail = Some(format!(
                "median ratio {:.17e} over {} points; matching form scale {:.17e}",
                c.ratio, c.n_points, c.matching_form_scale
            ));
        }
        Err(e) => {
            f.record(f64::NAN);
            f.detail = Some(e.to_string());
        }
    });
    r.family("btz.formula_1_match", Some(6), CheckKind::Abs, Tol::Stated(1e-8), |f, _| {
        let calibrated = match &calibration {
            Ok(c) => BtzModel::new(c.matching_form_scale).map_err(|e| e.to_string()),
            Err(e) => Err(e.to_string()),
        };
        match calibrated {
            Ok(m) => {
                for &p in &grid {
                    let v = btz::coordinate_bivector(&m, p).map(|b| (b[0][1] - btz::closed_form_coeff(p)).abs());
                    f.record_result(v);
                }
                f.detail = Some("pullback P(dtau,dtheta) at the calibrated form scale vs 2cosh^2(rho/2)sin(tau)sinh(rho)".into());
            }
            Err(e) => {
                f.record(f64::NAN);
                f.detail = Some(e);
            }
        }
    });
    r.family("btz.exact_pullback", None, CheckKind::Rel, Tol::DefaultRel, |f, _| {
        for &p in &grid {
            let v = btz::coordinate_bivector(&model, p)
                .map(|b| rel_residual(b[0][1], btz::exact_pullback_coeff(p, model.form_scale())));
            f.record_result(v);
        }
        f.detail = Some("P(dtau,dtheta) = tanh(rho/2) / (c sin tau)".into());
    });
    r.family("btz.jacobi_sl2r", Some(6), CheckKind::Abs, Tol::DefaultAbs, |f, smp| {
        let qt = model.quasi_triple();
        let ctx = qt.ctx();
        for _ in 0..100 {
            let s = smp.group(ctx);
            let (a, b, c) = (smp.covector(ctx), smp.covector(ctx), smp.covector(ctx));
            f.record(schouten_closed(qt, &s, &a, &b, &c).abs());
        }
    });

    r.family("btz.vanishing_locus", Some(7), CheckKind::Count, Tol::Stated(0.0), |f, _| {
        let mut rank0 = 0usize;
        for &p in &grid {
            let expected_zero = btz::closed_form_coeff(p).abs() < 1e-9;
            match btz::classify_point(&model, p) {
                Ok(rank) => {
                    if rank == PointRank::Rank0 {
                        rank0 += 1;
                    }
                    f.record(if (rank == PointRank::Rank0) == expected_zero { 0.0 } else { 1.0 });
                }
                Err(_) => f.record(f64::NAN),
            }
        }
        f.detail = Some(format!("{rank0} rank-0 points of {}", grid.len()));
    });
    r.family("btz.identity_orbit_rank", Some(7), CheckKind::Count, Tol::Stated(0.0), |f, smp| {
        let qt = model.quasi_triple();
        for _ in 0..50 {
            let g = smp.group(qt.ctx());
            let s = act(qt, &g, &qt.ctx().identity());
            f.record(if image_basis(qt, &s).rank == 0 { 0.0 } else { 1.0 });
        }
    });

    let start = ChartPoint::new(FRAC_PI_2, 0.0, 1.0);
    let trace = btz::trace_leaf(&model, start, &cfg, 10_000);
    r.family("btz.leaf_rho_drift", Some(7), CheckKind::Abs, Tol::Stated(1e-8), |f, _| {
        let off_center = btz::trace_leaf(&model, ChartPoint::new(1.0, 0.3, -0.7), &cfg, 10_000);
        let mut notes = Vec::new();
        for (label, t) in [("(pi/2,0,1)", trace.as_ref().map_err(|e| e.to_string())), ("(1,0.3,-0.7)", off_center.as_ref().map_err(|e| e.to_string()))] {
            match t {
                Ok(t) if !t.truncated => {
                    f.record(t.max_rho_drift());
                    notes.push(format!("{label}: {} RK4 steps of {}", t.points.len() - 1, t.step));
                }
                Ok(t) => {
                    f.record(f64::NAN);
                    notes.push(format!("{label}: truncated after {} points", t.points.len()));
                }
                Err(e) => {
                    f.record(f64::NAN);
                    notes.push(format!("{label}: {e}"));
                }
            }
        }
        f.detail = Some(notes.join("; "));
    });
    r.family("btz.leaf_theta_symmetry", None, CheckKind::Abs, Tol::Stated(1e-8), |f, _| {
        let shifted = btz::trace_leaf(&model, ChartPoint { theta: 1.0, ..start }, &cfg, 10_000);
        match (&trace, shifted) {
            (Ok(a), Ok(b)) if a.points.len() == b.points.len() => {
                for (p, q) in a.points.iter().zip(&b.points) {
                    let gap = (p.tau - q.tau).abs().max((p.rho - q.rho).abs()).max(angle_gap(p.theta + 1.0, q.theta));
                    f.record(gap);
                }
            }
            _ => f.record(f64::NAN),
        }
    });
    r.family("btz.f_shift_identity", Some(7), CheckKind::Rel, Tol::DefaultRel, |f, smp| {
        let qt = model.quasi_triple();
        for _ in 0..100 {
            let p = ChartPoint::new(smp.range(0.1, PI - 0.1), smp.range(-4.0 * PI, 4.0 * PI), smp.range(-2.0, 2.0));
            let k = btz::wrap_count(p);
            let lhs = btz::chart(btz::wrap_quotient(p));
            let rhs = act(qt, &btz::f_element(-k), &btz::chart(p));
            f.record(relative_distance(&lhs, &rhs));
            let shifted = act(qt, &btz::f_element(1), &btz::chart(p));
            f.record(relative_distance(&shifted, &btz::chart(ChartPoint { theta: p.theta + TAU, ..p })));
        }
    });
    r.family("btz.chart_roundtrip", None, CheckKind::Abs, Tol::DefaultAbs, |f, smp| {
        for _ in 0..500 {
            let p = ChartPoint::new(smp.range(0.05, PI - 0.05), smp.range(-3.0, 3.0), smp.range(-3.0, 3.0));
            let back = btz::inverse_chart(&btz::chart(p), ChartBranch::Upper);
            f.record_result(back.map(|q| (q.tau - p.tau).abs().max((q.theta - p.theta).abs()).max((q.rho - p.rho).abs())));
        }
    });
    Ok(())
}

fn su2_suite(r: &mut Runner) -> Result<()> {
    let su2 = r.triple(GroupKind::Su2, SigmaChoice::AdH)?;
    let ctx = su2.ctx().clone();
    r.family("su2.intertwining", Some(8), CheckKind::Abs, Tol::Stated(1e-9), |f, smp| {
        for _ in 0..50 {
            let s = smp.group(&ctx);
            let probes: Vec<_> = (0..4).map(|_| smp.group(&ctx)).collect();
            f.record_result(su2_isomorphism_check(&su2, &s, &probes));
        }
    });
    r.family("su2.identity_pushforward", Some(8), CheckKind::Abs, Tol::DefaultAbs, |f, _| {
        let plain = su2.without_twist();
        let e = ctx.identity();
        let u = GroupElement::new(su2_u()).expect("U is unitary");
        f.record(p_s_sigma(&plain, &e).max_abs());
        f.record(p_s_sigma(&plain, &e).distance(&p_s_sigma(&su2, &e.mul(&u))));
    });

    let sl2_id = r.triple(GroupKind::SL2R, SigmaChoice::Identity)?;
    let sl2 = r.triple(GroupKind::SL2R, SigmaChoice::AdH)?;
    r.family("sl2r.id.central_fixed_points", Some(8), CheckKind::Count, Tol::Stated(0.0), |f, _| {
        let e = sl2_id.ctx().identity();
        let minus = GroupElement::new(-e.matrix().clone()).expect("invertible");
        for s in [e, minus] {
            let fixed = check_fixed_point(&sl2_id, &s, 64).map(|fp| fp.is_fixed());
            f.record(if matches!(fixed, Ok(true)) { 0.0 } else { 1.0 });
        }
        f.detail = Some("s = identity and -identity fixed under 64 probes".into());
    });
    r.family("sl2r.adH.identity_witness", Some(8), CheckKind::Count, Tol::Stated(0.0), |f, _| {
        let e = sl2.ctx().identity();
        match check_fixed_point(&sl2, &e, 64) {
            Ok(FixedPoint::Moved { witness, displacement }) => {
                let moved = act(&sl2, &witness, &e);
                f.record(0.0);
                f.detail = Some(format!(
                    "witness g = {} moves the identity to {} (displacement {displacement:.17e})",
                    fmt_real_2x2(&witness),
                    fmt_real_2x2(&moved)
                ));
            }
            _ => f.record(1.0),
        }
    });
    r.family("sl2r.adH.sampled_points_moved", Some(8), CheckKind::Count, Tol::Stated(0.0), |f, smp| {
        let ctx = sl2.ctx();
        for _ in 0..20 {
            let s = smp.group(ctx);
            let moved = check_fixed_point(&sl2, &s, 64).map(|fp| !fp.is_fixed());
            f.record(if matches!(moved, Ok(true)) { 0.0 } else { 1.0 });
        }
    });
    Ok(())
}

fn fmt_real_2x2(g: &GroupElement) -> String {
    let e = |i, j| {
        let v: f64 = g.re(i, j);
        if v == v.trunc() && v.abs() < 1e15 {
            format!("{}", v as i64)
        } else {
            format!("{v:.17e}")
        }
    };
    format!("[[{},{}],[{},{}]]", e(0, 0), e(0, 1), e(1, 0), e(1, 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_roundtrip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn relative_residual_falls_back_to_absolute() {
        assert_eq!(rel_residual(0.0, 1e-13), 1e-13);
        assert!((rel_residual(2.0, 2.0 + 2e-9) - 1e-9).abs() < 1e-15);
    }

    #[test]
    fn family_pass_rules() {
        let mk = |kind, tolerance, worst| Family {
            name: "x".into(),
            criterion: None,
            kind,
            tolerance,
            n: 1,
            worst,
            detail: None,
        };
        assert!(mk(CheckKind::Abs, 1e-10, 1e-11).finish().pass);
        assert!(!mk(CheckKind::Abs, 1e-10, 1e-10).finish().pass);
        assert!(!mk(CheckKind::Abs, 1e-10, f64::NAN).finish().pass);
        assert!(mk(CheckKind::Min, 1e-8, 0.5).finish().pass);
        assert!(!mk(CheckKind::Count, 0.0, 1.0).finish().pass);
    }

    #[test]
    fn core_suite_passes() {
        let report = run_suite(Suite::Core, &RunConfig::default()).unwrap();
        assert!(report.pass, "{:#?}", report.failures().collect::<Vec<_>>());
    }

    #[test]
    fn override_tightens_numeric_families_only() {
        let mut cfg = RunConfig { group: Some(GroupKind::SL2R), ..RunConfig::default() };
        cfg.tolerances.override_all = Some(1e-30);
        let report = run_suite(Suite::Double, &cfg).unwrap();
        assert!(!report.pass);
        let pivot = report.families.iter().find(|f| f.kind == CheckKind::Min).unwrap();
        assert_eq!(pivot.tolerance, 1e-8);
    }
}
