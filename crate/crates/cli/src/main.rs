//! `qplab`: verification suites, bivector queries, chart conversion, leaf
//! tracing and calibration for the twisted-conjugation quasi-Poisson model.
//!
//! Exit codes: 0 success, 1 failed check (or a rank-0 / truncated leaf),
//! 2 configuration or domain error.

mod parse;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use qplab_core::btz::{self, BtzConfig, BtzModel, ChartBranch, ChartPoint, GridSpec};
use qplab_core::config::{self, ConfigLayer, OutputFormat, RunConfig, SigmaChoice, ToleranceLayer, CONFIG_ENV};
use qplab_core::quasi_poisson::{image_basis, p_s_sigma};
use qplab_core::verify::{self, Suite};
use qplab_core::{Error, GroupKind, LieContext};
use serde_json::json;

use parse::MatrixArg;

/// Calibration spread above which the reference formula is reported as a mismatch.
const CALIBRATION_THRESHOLD: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "qplab", version, about = "Quasi-Poisson twisted conjugation laboratory")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// sl2r, sl3r, slnr(N) or su2.
    #[arg(long, global = true)]
    group: Option<String>,
    /// id or adH.
    #[arg(long, global = true)]
    sigma: Option<String>,
    /// c in K(x, y) = c tr(xy).
    #[arg(long, global = true)]
    form_scale: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replaces every numeric tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// csv or json.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and emit its report.
    Verify {
        /// all, core, double, bivector, btz or su2.
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Print bivector components at a chart point or a group element.
    #[command(group(ArgGroup::new("target").required(true).args(["point", "matrix"])))]
    Eval {
        /// tau,theta,rho (angles accept pi-expressions).
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        /// Row-major entries, or `identity`.
        #[arg(long, allow_hyphen_values = true)]
        matrix: Option<String>,
    },
    /// Chart coordinates to matrix.
    Chart {
        /// tau,theta,rho.
        #[arg(allow_hyphen_values = true)]
        point: String,
    },
    /// Matrix to chart coordinates.
    Unchart {
        /// a,b,c,d (row-major) or `identity`.
        #[arg(allow_hyphen_values = true)]
        matrix: String,
        /// upper (sin tau > 0) or lower.
        #[arg(long, default_value = "upper")]
        branch: String,
    },
    /// Trace a symplectic leaf with fixed-step RK4.
    Leaf {
        /// tau,theta,rho.
        #[arg(long, allow_hyphen_values = true)]
        start: String,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long)]
        step_size: Option<f64>,
    },
    /// Fit the reference coefficient against the pulled-back bivector.
    Calibrate {
        /// n_tau,n_theta,n_rho.
        #[arg(long)]
        grid: Option<String>,
        /// Persist the matching form scale into the config file on success.
        #[arg(long)]
        write: bool,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    fn check(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::RankZero => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = Result<(), Failure>;

struct Ctx {
    cfg: RunConfig,
    layer: ConfigLayer,
    out: Option<PathBuf>,
}

impl Ctx {
    fn emit(&self, text: &str) -> CmdResult {
        match &self.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display()))),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(text.as_bytes())
                    .and_then(|_| stdout.flush())
                    .map_err(|e| Failure::config(format!("cannot write stdout: {e}")))
            }
        }
    }

    /// Explicitly configured format, or `fallback`.
    fn format_or(&self, fallback: OutputFormat) -> OutputFormat {
        self.layer.format.unwrap_or(fallback)
    }

    fn btz_model(&self) -> Result<BtzModel, Failure> {
        Ok(BtzModel::new(self.cfg.form_scale)?)
    }
}

fn flag_layer(g: &GlobalArgs) -> Result<ConfigLayer, Failure> {
    let parse_err = |e: Error| Failure::config(e.to_string());
    Ok(ConfigLayer {
        group: g.group.as_deref().map(str::parse::<GroupKind>).transpose().map_err(parse_err)?,
        sigma: g.sigma.as_deref().map(str::parse::<SigmaChoice>).transpose().map_err(parse_err)?,
        form_scale: g.form_scale,
        seed: g.seed,
        tolerances: g.tol.map(|t| ToleranceLayer { override_all: Some(t), ..ToleranceLayer::default() }),
        format: g.format.as_deref().map(str::parse::<OutputFormat>).transpose().map_err(parse_err)?,
    })
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value");
    s.push('\n');
    s
}

fn point_arg(text: &str) -> Result<ChartPoint, Failure> {
    let [tau, theta, rho] = parse::parse_point(text).map_err(Failure::config)?;
    Ok(ChartPoint::new(tau, theta, rho))
}

fn cmd_verify(ctx: &Ctx, suite: &str) -> CmdResult {
    let suite: Suite = suite.parse()?;
    let report = verify::run_suite(suite, &ctx.cfg)?;
    let text = match ctx.format_or(OutputFormat::Json) {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Csv => {
            let mut s = String::from("name,criterion,n_checks,max_residual,tolerance,kind,pass\n");
            for f in &report.families {
                let residual = f.max_residual.map(btz::fmt_f64).unwrap_or_else(|| "nan".into());
                let criterion = f.criterion.map(|c| c.to_string()).unwrap_or_default();
                let kind = serde_json::to_value(f.kind).expect("kind");
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    f.name,
                    criterion,
                    f.n_checks,
                    residual,
                    btz::fmt_f64(f.tolerance),
                    kind.as_str().unwrap_or_default(),
                    f.pass
                ));
            }
            s
        }
    };
    ctx.emit(&text)?;
    let failed: Vec<_> = report.failures().map(|f| f.name.as_str()).collect();
    if failed.is_empty() {
        eprintln!("verify {suite}: pass ({} checks)", report.n_checks);
        Ok(())
    } else {
        Err(Failure::check(format!("verify {suite}: {} families failed: {}", failed.len(), failed.join(", "))))
    }
}

fn cmd_eval_point(ctx: &Ctx, text: &str) -> CmdResult {
    let model = ctx.btz_model()?;
    let p = point_arg(text)?;
    let record = btz::point_record(&model, p)?;
    let rank = btz::classify_point(&model, p)?;
    let text = match ctx.format_or(OutputFormat::Csv) {
        OutputFormat::Csv => format!("{}# {}\n", btz::points_to_csv(&model, &[p])?, rank.label()),
        OutputFormat::Json => json_text(&json!({
            "form_scale": model.form_scale(),
            "point": p,
            "components": btz::coordinate_bivector(&model, p)?,
            "record": record,
            "rank": rank,
            "closed_form_coeff": btz::closed_form_coeff(p),
        })),
    };
    ctx.emit(&text)
}

fn cmd_eval_matrix(ctx: &Ctx, text: &str) -> CmdResult {
    let kind = ctx.cfg.group.unwrap_or(GroupKind::SL2R);
    let lie = LieContext::new(kind, ctx.cfg.form_scale)?;
    let qt = ctx.cfg.sigma.unwrap_or(SigmaChoice::AdH).quasi_triple(lie.clone())?;
    let s = match parse::parse_matrix(text).map_err(Failure::config)? {
        MatrixArg::Identity => lie.identity(),
        MatrixArg::Entries(v) => {
            let n = lie.rep_dim();
            if v.len() != n * n {
                return Err(Failure::config(format!("{kind} needs {} entries, got {}", n * n, v.len())));
            }
            lie.group_element(qplab_core::lie::real_matrix(n, &v))?
        }
    };
    let p = p_s_sigma(&qt, &s);
    let rank = image_basis(&qt, &s).rank;
    let note = if rank == 0 { "rank-0, identity orbit".to_string() } else { format!("rank-{rank}") };
    let m = p.matrix();
    let out = match ctx.format_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let n = m.nrows();
            let mut s = String::from("row");
            for j in 0..n {
                s.push_str(&format!(",e{}", j + 1));
            }
            s.push('\n');
            for i in 0..n {
                s.push_str(&format!("e{}", i + 1));
                for j in 0..n {
                    s.push(',');
                    s.push_str(&btz::fmt_f64(m[(i, j)]));
                }
                s.push('\n');
            }
            s.push_str(&format!("# {note}\n"));
            s
        }
        OutputFormat::Json => {
            let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
            json_text(&json!({
                "group": kind,
                "sigma": qt.sigma().label(),
                "form_scale": ctx.cfg.form_scale,
                "bivector": rows,
                "rank": rank,
                "note": note,
            }))
        }
    };
    ctx.emit(&out)
}

fn matrix_rows(g: &qplab_core::GroupElement) -> [[f64; 2]; 2] {
    [[g.re(0, 0), g.re(0, 1)], [g.re(1, 0), g.re(1, 1)]]
}

fn cmd_chart(ctx: &Ctx, text: &str) -> CmdResult {
    let p = point_arg(text)?;
    let z = btz::chart(p);
    let m = matrix_rows(&z);
    let out = match ctx.format_or(OutputFormat::Csv) {
        OutputFormat::Csv => format!(
            "z11,z12,z21,z22\n{}\n",
            [m[0][0], m[0][1], m[1][0], m[1][1]].map(btz::fmt_f64).join(",")
        ),
        OutputFormat::Json => json_text(&json!({ "point": p, "matrix": m, "in_domain": btz::in_domain_i(&z) })),
    };
    ctx.emit(&out)
}

fn cmd_unchart(ctx: &Ctx, text: &str, branch: &str) -> CmdResult {
    let branch = match branch {
        "upper" => ChartBranch::Upper,
        "lower" => ChartBranch::Lower,
        other => return Err(Failure::config(format!("unknown branch '{other}' (expected upper or lower)"))),
    };
    let lie = LieContext::new(GroupKind::SL2R, 1.0)?;
    let s = match parse::parse_matrix(text).map_err(Failure::config)? {
        MatrixArg::Identity => lie.identity(),
        MatrixArg::Entries(v) if v.len() == 4 => qplab_core::GroupElement::new(qplab_core::lie::real_matrix(2, &v))?,
        MatrixArg::Entries(v) => return Err(Failure::config(format!("expected 4 entries, got {}", v.len()))),
    };
    let p = btz::inverse_chart(&s, branch)?;
    let out = match ctx.format_or(OutputFormat::Csv) {
        OutputFormat::Csv => format!("tau,theta,rho\n{}\n", [p.tau, p.theta, p.rho].map(btz::fmt_f64).join(",")),
        OutputFormat::Json => json_text(&json!({ "point": p })),
    };
    ctx.emit(&out)
}

fn cmd_leaf(ctx: &Ctx, start: &str, steps: usize, step_size: Option<f64>) -> CmdResult {
    let model = ctx.btz_model()?;
    let start = point_arg(start)?;
    let mut cfg = BtzConfig { form_scale: ctx.cfg.form_scale, ..BtzConfig::default() };
    if let Some(h) = step_size {
        cfg.step = h;
    }
    let trace = match btz::trace_leaf(&model, start, &cfg, steps) {
        Err(Error::RankZero) => return Err(Failure::check("rank-0 point: the leaf through it is the point itself")),
        other => other?,
    };
    let out = match ctx.format_or(OutputFormat::Csv) {
        OutputFormat::Csv => btz::leaf_to_csv(&model, &trace)?,
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&btz::leaf_document(&model, &trace, &cfg, ctx.cfg.seed)?)
                .expect("leaf document");
            s.push('\n');
            s
        }
    };
    ctx.emit(&out)?;
    eprintln!("leaf: {} points, max rho drift {}", trace.points.len(), btz::fmt_f64(trace.max_rho_drift()));
    if trace.truncated {
        return Err(Failure::check("trace left the domain and was truncated"));
    }
    Ok(())
}

fn config_target() -> PathBuf {
    match std::env::var_os(CONFIG_ENV) {
        Some(p) if !p.is_empty() => PathBuf::from(p),
        _ => PathBuf::from("qplab.json"),
    }
}

fn cmd_calibrate(ctx: &Ctx, grid: Option<&str>, write: bool) -> CmdResult {
    let model = ctx.btz_model()?;
    let mut spec = GridSpec::default();
    if let Some(g) = grid {
        let [a, b, c] = parse::parse_grid(g).map_err(Failure::config)?;
        spec = GridSpec { n_tau: a, n_theta: b, n_rho: c, ..spec };
    }
    let cal = btz::calibrate_scale(&model, &spec.points())?;
    let threshold = ctx.cfg.tolerances.override_all.unwrap_or(CALIBRATION_THRESHOLD);
    let consistent = cal.is_consistent(threshold);
    let out = match ctx.format_or(OutputFormat::Csv) {
        OutputFormat::Csv => format!(
            "c,matching_form_scale,spread,n_points,n_tau,n_theta,n_rho,form_scale,consistent\n{},{},{},{},{},{},{},{},{}\n",
            btz::fmt_f64(cal.ratio),
            btz::fmt_f64(cal.matching_form_scale),
            btz::fmt_f64(cal.spread),
            cal.n_points,
            spec.n_tau,
            spec.n_theta,
            spec.n_rho,
            btz::fmt_f64(model.form_scale()),
            consistent
        ),
        OutputFormat::Json => json_text(&json!({
            "c": cal.ratio,
            "calibration": cal,
            "grid": spec,
            "form_scale": model.form_scale(),
            "threshold": threshold,
            "consistent": consistent,
        })),
    };
    ctx.emit(&out)?;
    if !consistent {
        return Err(Failure::check(format!(
            "calibration spread {} exceeds {:e}: the reference coefficient does not match the pulled-back bivector up to a constant",
            btz::fmt_f64(cal.spread),
            threshold
        )));
    }
    if write {
        let path = config_target();
        config::persist_form_scale(Path::new(&path), cal.matching_form_scale)?;
        eprintln!("wrote form_scale to {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    let flags = flag_layer(&cli.global)?;
    let file = ConfigLayer::from_env()?;
    let layer = flags.over(&file);
    let cfg = RunConfig::from_layer(&layer)?;
    let ctx = Ctx { cfg, layer, out: cli.global.out };
    match &cli.command {
        Command::Verify { suite } => cmd_verify(&ctx, suite),
        Command::Eval { point: Some(p), .. } => cmd_eval_point(&ctx, p),
        Command::Eval { matrix: Some(m), .. } => cmd_eval_matrix(&ctx, m),
        Command::Eval { .. } => Err(Failure::config("eval needs --point or --matrix")),
        Command::Chart { point } => cmd_chart(&ctx, point),
        Command::Unchart { matrix, branch } => cmd_unchart(&ctx, matrix, branch),
        Command::Leaf { start, steps, step_size } => cmd_leaf(&ctx, start, *steps, *step_size),
        Command::Calibrate { grid, write } => cmd_calibrate(&ctx, grid.as_deref(), *write),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qplab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
