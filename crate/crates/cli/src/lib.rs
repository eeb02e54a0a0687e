//! Command-line front end for `potts-sos`.
//!
//! [`run`] parses an argument vector, executes one subcommand and returns the
//! exit code together with the text destined for stdout and stderr, so the
//! binary and the tests share one code path.
//!
//! Exit codes: 0 on success, 2 on invalid flags or parameter values, 1 when
//! an internal check fails (for example a nonzero remainder in the exact
//! quadratic derivation).

pub mod report;

use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use potts_sos::analysis::{self, Axis, Classification, RAxis};
use potts_sos::exactpoly::{self, parse_rational, Rational};
use potts_sos::oracle::{self, DEFAULT_ENUMERATION_CAP};
use potts_sos::recursion::{propagate, ReducedField};
use potts_sos::solvers::{self, MultiStart, DEGENERATE_NOTE};
use potts_sos::{Error, FiniteTree, ModelParams};

use report::{fmt_f64, to_csv, Format, RunReport};

#[derive(Debug, Parser)]
#[command(name = "potts-sos", version, about = "Periodic Gibbs measures of the Potts-SOS model on Cayley trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    /// Write the report to FILE instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<std::path::PathBuf>,

    /// Include wall time in the report (makes output run-dependent).
    #[arg(long, global = true)]
    pub timing: bool,
}

/// Model parameters, given either as `--theta/--r` or as `--J/--Jp/--beta`.
#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    /// Order of the Cayley tree.
    #[arg(long, default_value_t = 2)]
    pub k: usize,

    /// theta = exp(J beta).
    #[arg(long, conflicts_with_all = ["j", "jp", "beta"])]
    pub theta: Option<f64>,

    /// r = exp(J_p beta).
    #[arg(long, conflicts_with_all = ["j", "jp", "beta"])]
    pub r: Option<f64>,

    /// SOS coupling J.
    #[arg(long = "J", id = "j", allow_negative_numbers = true, requires_all = ["jp", "beta"])]
    pub j: Option<f64>,

    /// Potts coupling J_p.
    #[arg(long = "Jp", id = "jp", allow_negative_numbers = true, requires_all = ["j", "beta"])]
    pub jp: Option<f64>,

    /// Inverse temperature.
    #[arg(long, allow_negative_numbers = true, requires_all = ["j", "jp"])]
    pub beta: Option<f64>,
}

impl ModelArgs {
    fn params(&self, m: usize) -> Result<ModelParams, Failure> {
        match (self.theta, self.r, self.j, self.jp, self.beta) {
            (Some(t), Some(r), None, None, None) => Ok(ModelParams::from_theta_r(self.k, m, t, r)?),
            (None, None, Some(j), Some(jp), Some(b)) => Ok(ModelParams::new(self.k, m, j, jp, b)?),
            _ => Err(Failure::Usage("give either --theta and --r, or --J, --Jp and --beta".into())),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Translation-invariant solutions of h = k F(h).
    TiSolve {
        #[command(flatten)]
        model: ModelArgs,
        /// Number of spin values minus one.
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Newton seeds per coordinate.
        #[arg(long, default_value_t = 7)]
        seeds: usize,
        /// Residual threshold for reported solutions.
        #[arg(long, default_value_t = solvers::RESIDUAL_TOL)]
        tol: f64,
    },
    /// Period-2 orbits of the scalar map f (two-periodic measures on the invariant branch).
    TwoCycles {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Full bipartite system h = k F(l), l = k F(h) for m = 2.
    BipartiteSolve {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 5)]
        seeds: usize,
        #[arg(long, default_value_t = solvers::RESIDUAL_TOL)]
        tol: f64,
    },
    /// Random search for collisions F(h) = F(l) with h != l (m = 2).
    InjectivityProbe {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
    },
    /// Coefficients, discriminant and roots of the k = 2 cycle quadratic.
    Quadratic {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Threshold theta_D on the slice r = theta^2.
    ThetaD,
    /// Classify one (theta, r) point for k = 2.
    Classify {
        #[command(flatten)]
        model: ModelArgs,
        /// Also run the two-cycle solver at the point.
        #[arg(long)]
        cross_check: bool,
    },
    /// Classify a grid of (theta, r) points for k = 2.
    PhaseScan {
        /// theta range as min:max:steps.
        #[arg(long)]
        theta: String,
        /// r range as min:max:steps.
        #[arg(long, conflicts_with = "r_rule")]
        r: Option<String>,
        /// Derive r from theta instead of a range.
        #[arg(long, value_enum)]
        r_rule: Option<RRule>,
        /// Cross-check every N-th point against the two-cycle solver.
        #[arg(long, value_name = "N")]
        cross_validate: Option<usize>,
    },
    /// Exact derivation of the cycle quadratic at rational points.
    VerifyQuadratic {
        /// Rational theta, e.g. 1/2 or 0.3.
        #[arg(long, requires = "r")]
        theta: Option<String>,
        /// Rational r.
        #[arg(long, requires = "theta")]
        r: Option<String>,
        /// Number of random rational points in (0, 4]^2 when no point is given.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
    },
    /// Brute-force compatibility check of consecutive finite-volume measures.
    OracleCheck {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Radius of the larger ball.
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        /// Shift applied to one inner field component for the negative check.
        #[arg(long, default_value_t = 0.5)]
        perturb: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RRule {
    ThetaSquared,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::EnumerationCap { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

/// What a subcommand produced.
struct Produced {
    parameters: Value,
    results: Value,
    csv: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
    /// Set when an internal check failed; the report is still emitted.
    failed_check: Option<String>,
}

impl Produced {
    fn new(parameters: Value, results: Value) -> Self {
        Self { parameters, results, csv: None, failed_check: None }
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code: 2, stdout: String::new(), stderr: text }
            };
        }
    };
    let echo = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");

    let start = Instant::now();
    let produced = match execute(&cli.command) {
        Ok(p) => p,
        Err(Failure::Usage(msg)) => {
            return Outcome { code: 2, stdout: String::new(), stderr: format!("error: {msg}\n") }
        }
        Err(Failure::Internal(msg)) => {
            return Outcome { code: 1, stdout: String::new(), stderr: format!("internal error: {msg}\n") }
        }
    };
    let elapsed = start.elapsed().as_secs_f64() * 1e3;

    let report = RunReport {
        command: echo,
        parameters: produced.parameters,
        results: produced.results,
        wall_time_ms: cli.output.timing.then_some(elapsed),
    };
    let body = match cli.output.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
        Format::Csv => match &produced.csv {
            Some((header, rows)) => to_csv(header, rows),
            None => {
                return Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: "error: --format csv is only available for phase-scan\n".into(),
                }
            }
        },
    };

    let mut outcome = Outcome { code: 0, stdout: body, stderr: String::new() };
    if let Some(path) = &cli.output.out {
        if let Err(e) = std::fs::write(path, &outcome.stdout) {
            return Outcome { code: 1, stdout: String::new(), stderr: format!("error: writing {}: {e}\n", path.display()) };
        }
        outcome.stdout.clear();
    }
    if let Some(msg) = produced.failed_check {
        outcome.code = 1;
        outcome.stderr = format!("check failed: {msg}\n");
    }
    outcome
}

fn model_json(p: &ModelParams) -> Value {
    json!({
        "k": p.k,
        "m": p.m,
        "J": p.j,
        "J_p": p.j_p,
        "beta": p.beta,
        "theta": p.theta,
        "r": p.r,
    })
}

fn note(degenerate: bool) -> Value {
    if degenerate {
        Value::String(DEGENERATE_NOTE.into())
    } else {
        Value::Null
    }
}

fn execute(command: &Command) -> Result<Produced, Failure> {
    match command {
        Command::TiSolve { model, m, seeds, tol } => {
            let p = model.params(*m)?;
            let report = solvers::ti_fixed_points(p.m, p.theta, p.r, p.k, MultiStart { seeds_per_axis: *seeds })?;
            let solutions: Vec<Value> = report
                .solutions
                .iter()
                .filter(|s| s.residual <= *tol)
                .map(|s| json!({ "h": s.field, "residual": s.residual }))
                .collect();
            Ok(Produced::new(
                json!({ "model": model_json(&p), "seeds_per_axis": seeds, "tol": tol }),
                json!({
                    "solutions": solutions,
                    "starts": report.starts,
                    "failed_starts": report.failed_starts,
                    "degenerate": report.degenerate,
                    "note": note(report.degenerate),
                }),
            ))
        }
        Command::TwoCycles { model } => {
            let p = model.params(2)?;
            let report = solvers::two_cycles(p.theta, p.r, p.k)?;
            let cycles: Vec<Value> = report
                .cycles
                .iter()
                .map(|c| json!({ "z": c.z, "w": c.w, "residual": c.residual }))
                .collect();
            let fixed: Vec<Value> = report
                .fixed_points
                .iter()
                .map(|&z| json!({ "z": z, "residual": (solvers::f_eval(z, p.theta, p.r, p.k) - z).abs() }))
                .collect();
            Ok(Produced::new(
                json!({ "model": model_json(&p) }),
                json!({
                    "cycles": cycles,
                    "fixed_points": fixed,
                    "unresolved": report.unresolved,
                    "degenerate": report.degenerate,
                    "note": note(report.degenerate),
                }),
            ))
        }
        Command::BipartiteSolve { model, seeds, tol } => {
            let p = model.params(2)?;
            let report = solvers::bipartite_solve(p.theta, p.r, p.k, MultiStart { seeds_per_axis: *seeds })?;
            let solutions: Vec<Value> = report
                .solutions
                .iter()
                .filter(|s| s.residual <= *tol)
                .map(|s| {
                    json!({
                        "h": s.pair.h,
                        "l": s.pair.l,
                        "kind": s.kind,
                        "invariant_branch": s.pair.on_invariant_branch(),
                        "residual": s.residual,
                    })
                })
                .collect();
            Ok(Produced::new(
                json!({ "model": model_json(&p), "seeds_per_axis": seeds, "tol": tol }),
                json!({
                    "solutions": solutions,
                    "starts": report.starts,
                    "failed_starts": report.failed_starts,
                    "degenerate": report.degenerate,
                    "note": note(report.degenerate),
                }),
            ))
        }
        Command::InjectivityProbe { model, samples, rng_seed } => {
            let p = model.params(2)?;
            let report = solvers::injectivity_probe(p.theta, p.r, *samples, *rng_seed)?;
            Ok(Produced::new(
                json!({ "model": model_json(&p), "samples": samples, "rng_seed": rng_seed }),
                json!({
                    "injective_on_samples": report.injective_on_samples,
                    "witness": report.witness,
                    "min_separation_ratio": report.min_separation_ratio,
                    "degenerate": report.degenerate,
                    "note": note(report.degenerate),
                }),
            ))
        }
        Command::Quadratic { model } => {
            let p = model.params(2)?;
            let q = analysis::quadratic_coeffs(p.theta, p.r)?;
            let roots: Vec<Value> = q
                .real_roots()
                .into_iter()
                .map(|z| json!({ "z": z, "residual": q.eval(z).abs() }))
                .collect();
            Ok(Produced::new(
                json!({ "theta": p.theta, "r": p.r }),
                json!({
                    "a": q.a,
                    "b": q.b,
                    "c": q.c,
                    "D": q.discriminant(),
                    "D_without_factor_four": analysis::discriminant_without_factor_four(p.theta, p.r)?,
                    "roots": roots,
                    "classification": analysis::classify_point(p.theta, p.r)?.classification,
                }),
            ))
        }
        Command::ThetaD => {
            let t = analysis::theta_d();
            let at = analysis::classify_point(t, t * t)?;
            let cycles = solvers::two_cycles(t, t * t, 2)?;
            let observed: Vec<Value> = cycles.cycles.iter().map(|c| json!({ "z": c.z, "w": c.w, "residual": c.residual })).collect();
            Ok(Produced::new(
                json!({}),
                json!({
                    "theta_d": t,
                    "residual": analysis::threshold_quartic(t).abs(),
                    "r": t * t,
                    "D": at.d,
                    "b": at.b,
                    "classification": at.classification,
                    "two_cycles_found": observed,
                    "fixed_points": cycles.fixed_points,
                    "unresolved_period_two_roots": cycles.unresolved,
                    "note": "D vanishes here only to rounding; a double root of the quadratic is a fixed point of f, so no separated two-cycle is expected",
                }),
            ))
        }
        Command::Classify { model, cross_check } => {
            let p = model.params(2)?;
            let point = analysis::classify_point(p.theta, p.r)?;
            let mut results = serde_json::to_value(point).expect("point serializes");
            if *cross_check {
                let found = solvers::two_cycles(p.theta, p.r, 2)?;
                results["cycles_found"] = json!(found.cycles.len());
                results["consistent"] =
                    json!((point.classification == Classification::TwoPeriodic) == !found.cycles.is_empty());
            }
            Ok(Produced::new(json!({ "theta": p.theta, "r": p.r }), results))
        }
        Command::PhaseScan { theta, r, r_rule, cross_validate } => {
            let theta_axis: Axis = theta.parse()?;
            let r_axis = match (r, r_rule) {
                (Some(spec), None) => RAxis::Grid(spec.parse()?),
                (None, Some(RRule::ThetaSquared)) => RAxis::ThetaSquared,
                _ => return Err(Failure::Usage("give either --r min:max:steps or --r-rule theta-squared".into())),
            };
            let points = analysis::phase_scan(theta_axis, r_axis)?;
            let rows: Vec<Vec<String>> = points
                .iter()
                .map(|p| {
                    vec![
                        fmt_f64(p.theta),
                        fmt_f64(p.r),
                        fmt_f64(p.d),
                        fmt_f64(p.b),
                        p.classification.as_str().to_string(),
                    ]
                })
                .collect();
            let mut results = json!({ "points": points });
            let mut produced_check = None;
            if let Some(stride) = cross_validate {
                let check = analysis::cross_validate(&points, *stride)?;
                if !check.mismatches.is_empty() {
                    produced_check = Some(format!("{} classification mismatches", check.mismatches.len()));
                }
                results["cross_validation"] = serde_json::to_value(check).expect("serializes");
            }
            let r_desc = match r_axis {
                RAxis::Grid(a) => json!(a),
                RAxis::ThetaSquared => json!("theta-squared"),
            };
            Ok(Produced {
                parameters: json!({ "theta": theta_axis, "r": r_desc }),
                results,
                csv: Some((vec!["theta", "r", "D", "b", "classification"], rows)),
                failed_check: produced_check,
            })
        }
        Command::VerifyQuadratic { theta, r, samples, rng_seed } => {
            let points: Vec<(Rational, Rational)> = match (theta, r) {
                (Some(t), Some(r)) => vec![(parse_rational(t)?, parse_rational(r)?)],
                _ => random_rationals(*samples, *rng_seed),
            };
            let mut checks = Vec::with_capacity(points.len());
            for (t, r) in &points {
                checks.push(exactpoly::verify_quadratic(t, r)?);
            }
            let failing = checks.iter().filter(|c| !c.proportional).count();
            let mut produced = Produced::new(
                json!({ "points": points.len(), "rng_seed": rng_seed }),
                json!({ "all_proportional": failing == 0, "checks": checks }),
            );
            if failing > 0 {
                produced.failed_check = Some(format!("{failing} points where the quotient is not proportional"));
            }
            Ok(produced)
        }
        Command::OracleCheck { model, m, n, rng_seed, perturb, tol } => {
            let p = model.params(*m)?;
            let tree = FiniteTree::new(p.k, *n)?;
            oracle::check_cap(&tree, p.m, DEFAULT_ENUMERATION_CAP)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*rng_seed);
            let outer: Vec<ReducedField> = tree
                .sphere(*n)
                .map(|_| ReducedField::new((0..p.m).map(|_| rng.random_range(-2.0..2.0)).collect()))
                .collect::<Result<_, _>>()?;
            let inner = propagate(&tree, &outer, p.theta, p.r)?.sphere(&tree, n - 1);
            let enforced = oracle::compatibility_residual_general(&p, *n, &inner, &outer, DEFAULT_ENUMERATION_CAP)?;
            let mut bumped = inner.clone();
            let mut first = bumped[0].as_slice().to_vec();
            first[0] += perturb;
            bumped[0] = ReducedField::new(first)?;
            let perturbed = oracle::compatibility_residual_general(&p, *n, &bumped, &outer, DEFAULT_ENUMERATION_CAP)?;
            let mut produced = Produced::new(
                json!({ "model": model_json(&p), "n": n, "rng_seed": rng_seed, "perturb": perturb, "tol": tol }),
                json!({
                    "configurations": tree.config_count(p.m).map(|c| c as u64),
                    "residual_enforced": enforced,
                    "residual_perturbed": perturbed,
                    "compatible": enforced <= *tol,
                }),
            );
            if enforced > *tol {
                produced.failed_check = Some(format!("compatibility residual {enforced:e} exceeds {tol:e}"));
            }
            Ok(produced)
        }
    }
}

/// Random rationals `p/q` in `(0, 4]` with denominators up to 12.
pub fn random_rationals(count: usize, seed: u64) -> Vec<(Rational, Rational)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || {
        let q: i64 = rng.random_range(1..=12);
        let p: i64 = rng.random_range(1..=4 * q);
        Rational::new(p.into(), q.into())
    };
    (0..count).map(|_| (draw(), draw())).collect()
}
