//! `lqg` command-line tool: synthesis, stationarity certificates, derivative
//! checks, connectivity paths, gradient descent and the example reports.
//!
//! Results go to stdout as JSON (or as indented text with `--human`).
//! Exit codes: 0 success, 1 failed example report, 2 invalid input,
//! 3 numerical failure, 4 no path found.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use lqg_landscape::catalog::{self, Example};
use lqg_landscape::connectivity::{path_between, reduced_order_search};
use lqg_landscape::cost::{hessian_matrix, lqg_cost, lqg_gradient, restricted_rcond, stationarity_tolerance};
use lqg_landscape::error::{Error, Result};
use lqg_landscape::io::{read_controller, read_plant, ControllerFile, MatrixRepr};
use lqg_landscape::linalg::{Mat, TimeDomain, RANK_TOL};
use lqg_landscape::model::{Controller, Plant};
use lqg_landscape::optimizer::{
    certify_limit, descend, init_near_optimal, init_pole_placement, OptimizerConfig, Parameterization,
};
use lqg_landscape::scenarios;
use lqg_landscape::synthesis::{analyze_stationary, riccati_controller};

#[derive(Parser)]
#[command(name = "lqg", version, about = "Explore the landscape of the output-feedback LQG cost")]
struct Cli {
    /// Print indented text instead of JSON.
    #[arg(long, global = true)]
    human: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PlantArgs {
    /// Named example, e.g. `doyle` or `ex4.5(0.1)`.
    #[arg(long, conflicts_with = "plant", required_unless_present = "plant")]
    example: Option<String>,
    /// Plant JSON file.
    #[arg(long)]
    plant: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Riccati-optimal full-order controller and its cost.
    Synthesize {
        #[command(flatten)]
        source: PlantArgs,
    },
    /// Classify a controller as globally optimal, non-minimal stationary or not stationary.
    Stationary {
        #[command(flatten)]
        source: PlantArgs,
        /// Controller label of the example or controller JSON file.
        controller: String,
        /// Gradient norm accepted as zero (default `1e-6 (1 + |J|)`).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Compare the analytic gradient with central differences.
    GradCheck {
        #[command(flatten)]
        source: PlantArgs,
        controller: String,
        /// Finite-difference step.
        #[arg(long, default_value_t = 1e-6)]
        h: f64,
    },
    /// Hessian matrix in the `[vec C_K; vec B_K; vec A_K]` coordinates.
    Hessian {
        #[command(flatten)]
        source: PlantArgs,
        controller: String,
        /// Report the spectrum restricted to the complement of the similarity orbit.
        #[arg(long)]
        restricted: bool,
    },
    /// Path of stabilizing controllers between two endpoints.
    Path {
        #[command(flatten)]
        source: PlantArgs,
        k0: String,
        k1: String,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// Reduced-order controller (label or file) to route through when the endpoints lie in different lifted components.
        #[arg(long)]
        bridge: Option<String>,
        /// Search this many random reduced-order controllers for a bridge.
        #[arg(long)]
        search_bridge: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Gradient descent with Armijo backtracking.
    Descend {
        #[command(flatten)]
        source: PlantArgs,
        #[arg(long, value_enum, default_value_t = Init::Pole)]
        init: Init,
        #[arg(long, value_enum, default_value_t = Param::Full)]
        param: Param,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pole interval `LO,HI` for pole-placement initialization.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_interval)]
        poles: Option<(f64, f64)>,
        /// Entrywise variance of the near-optimal perturbation.
        #[arg(long, default_value_t = 1e-2)]
        delta: f64,
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long, default_value_t = 1e-6)]
        grad_tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(long, default_value_t = 100)]
        snapshot_every: usize,
        /// Trace CSV (`iter,J,grad_norm,step`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trace JSON with controller snapshots.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Recompute the claims of a named example and report pass or fail per claim.
    Example { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum Init {
    Pole,
    NearOptimal,
}

#[derive(Clone, Copy, ValueEnum)]
enum Param {
    Full,
    Canonical,
}

struct Source {
    plant: Plant,
    example: Option<Example>,
}

impl Source {
    fn load(args: &PlantArgs) -> Result<Source> {
        match (&args.example, &args.plant) {
            (Some(name), _) => {
                let ex = catalog::example(name)?;
                Ok(Source { plant: ex.plant.clone(), example: Some(ex) })
            }
            (None, Some(path)) => Ok(Source { plant: read_plant(path)?, example: None }),
            (None, None) => Err(Error::Invalid("give --example or --plant".into())),
        }
    }

    /// A controller file path, or a label of the example's controllers.
    fn controller(&self, label: &str) -> Result<Controller> {
        let path = Path::new(label);
        if path.is_file() {
            return read_controller(path);
        }
        match &self.example {
            Some(ex) => ex.controller(&label.replace('\u{2212}', "-")).cloned(),
            None => Err(Error::Invalid(format!("{label} is neither a controller file nor an example label"))),
        }
    }
}

fn rows(m: &Mat) -> Value {
    serde_json::to_value(MatrixRepr::from_matrix(m)).expect("matrices serialize")
}

fn controller_json(k: &Controller) -> Value {
    serde_json::to_value(ControllerFile::from_controller(k)).expect("controllers serialize")
}

fn synthesize(src: &Source) -> Result<Value> {
    let opt = riccati_controller(&src.plant)?;
    let minimal = opt.controller.minimality(RANK_TOL)?;
    let mut out = json!({
        "controller": controller_json(&opt.controller),
        "J": opt.j,
        "P": rows(&opt.p),
        "S": rows(&opt.s),
        "K": rows(&opt.k_gain),
        "L": rows(&opt.l_gain),
        "controllable": minimal.controllable,
        "observable": minimal.observable,
    });
    if !minimal.minimal {
        eprintln!("warning: non-minimal optimum");
        out["warning"] = json!("non-minimal optimum");
    }
    Ok(out)
}

fn stationary(src: &Source, label: &str, tol: Option<f64>) -> Result<Value> {
    let k = src.controller(label)?;
    let tol = match tol {
        Some(t) => t,
        None => stationarity_tolerance(lqg_cost(&src.plant, &k)?.j),
    };
    let rep = analyze_stationary(&src.plant, &k, tol)?;
    Ok(json!({ "tol": tol, "report": rep }))
}

fn grad_check(src: &Source, label: &str, h: f64) -> Result<Value> {
    let k = src.controller(label)?;
    let g = lqg_gradient(&src.plant, &k)?.to_direction().to_vector();
    let base = k.as_direction().to_vector();
    let (q, m, p) = (k.order(), k.outputs(), k.inputs());
    let mut fd = base.clone();
    for i in 0..base.len() {
        let shifted = |sign: f64| -> Result<f64> {
            let mut v = base.clone();
            v[i] += sign * h;
            let d = lqg_landscape::model::Direction::from_vector(v.as_slice(), q, m, p)?;
            lqg_cost(&src.plant, &Controller::new(d.da, d.db, d.dc)?).map(|ev| ev.j)
        };
        fd[i] = (shifted(1.0)? - shifted(-1.0)?) / (2.0 * h);
    }
    let err = (&fd - &g).norm();
    Ok(json!({
        "analytic": g.iter().collect::<Vec<_>>(),
        "finite_difference": fd.iter().collect::<Vec<_>>(),
        "abs_error": err,
        "rel_error": err / g.norm().max(1.0),
    }))
}

fn hessian(src: &Source, label: &str, restricted: bool) -> Result<Value> {
    let k = src.controller(label)?;
    if restricted {
        return Ok(serde_json::to_value(restricted_rcond(&src.plant, &k)?).expect("spectra serialize"));
    }
    let h = hessian_matrix(&src.plant, &k)?;
    let mut eig: Vec<f64> = h.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(json!({ "hessian": rows(&h), "eigenvalues": eig }))
}

fn path(src: &Source, k0: &str, k1: &str, steps: usize, bridge: Option<&str>, search: Option<usize>, seed: u64) -> Result<Value> {
    let (a, b) = (src.controller(k0)?, src.controller(k1)?);
    let bridge = match (bridge, search) {
        (Some(label), _) => Some(src.controller(label)?),
        (None, Some(budget)) => reduced_order_search(&src.plant, src.plant.n() - 1, budget, seed)?,
        (None, None) => None,
    };
    let p = path_between(&src.plant, &a, &b, steps, bridge.as_ref())?;
    Ok(json!({
        "bridged": p.bridged,
        "refinements": p.refinements,
        "controllers": p.controllers.iter().map(controller_json).collect::<Vec<_>>(),
    }))
}

#[allow(clippy::too_many_arguments)]
fn run_descend(
    src: &Source,
    init: Init,
    param: Param,
    seed: u64,
    poles: Option<(f64, f64)>,
    delta: f64,
    config: OptimizerConfig,
    out: Option<&Path>,
    json_out: Option<&Path>,
) -> Result<Value> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k0 = match init {
        Init::Pole => {
            let interval = match (poles, src.plant.domain()) {
                (Some(p), _) => p,
                (None, TimeDomain::Continuous) => (-2.0, -1.0),
                (None, TimeDomain::Discrete) => (0.0, 0.9),
            };
            init_pole_placement(&src.plant, interval, &mut rng)?
        }
        Init::NearOptimal => init_near_optimal(&src.plant, delta, &mut rng)?,
    };
    let config = OptimizerConfig {
        parameterization: match param {
            Param::Full => Parameterization::Full,
            Param::Canonical => Parameterization::Canonical,
        },
        seed,
        ..config
    };
    let trace = descend(&src.plant, &k0, &config)?;
    let write = |path: &Path, text: String| {
        std::fs::write(path, text).map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))
    };
    if let Some(path) = out {
        write(path, trace.to_csv())?;
    }
    if let Some(path) = json_out {
        write(path, trace.to_json())?;
    }
    let last = trace.final_record();
    let cert = certify_limit(&src.plant, &trace.final_controller, config.grad_tol.max(stationarity_tolerance(last.j)));
    Ok(json!({
        "terminal": trace.terminal,
        "iterations": last.iter,
        "J": last.j,
        "grad_norm": last.grad_norm,
        "initial_controller": controller_json(&k0),
        "final_controller": controller_json(&trace.final_controller),
        "certificate": cert,
    }))
}

/// Renders JSON as indented `key: value` lines with one matrix row per line.
fn human(v: &Value, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (key, val) in map {
                match val {
                    Value::Object(_) => {
                        out.push_str(&format!("{pad}{key}:\n"));
                        human(val, indent + 2, out);
                    }
                    Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) => {
                        out.push_str(&format!("{pad}{key}:\n"));
                        for item in items {
                            if item.is_object() {
                                human(item, indent + 2, out);
                                out.push_str(&format!("{pad}  --\n"));
                            } else {
                                out.push_str(&format!("{pad}  {}\n", inline(item)));
                            }
                        }
                    }
                    _ => out.push_str(&format!("{pad}{key}: {}\n", inline(val))),
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", inline(other))),
    }
}

fn inline(v: &Value) -> String {
    match v {
        Value::Array(items) => items.iter().map(inline).collect::<Vec<_>>().join("  "),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:>12.6e}"),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn parse_interval(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected `LO,HI`, got `{s}`"))?;
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    Ok((parse(lo)?, parse(hi)?))
}

fn emit(v: &Value, as_text: bool) {
    use std::io::Write as _;
    let mut out = if as_text {
        let mut out = String::new();
        human(v, 0, &mut out);
        out
    } else {
        serde_json::to_string_pretty(v).expect("values serialize")
    };
    if !out.ends_with('\n') {
        out.push('\n');
    }
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout.write_all(out.as_bytes()).and_then(|()| stdout.flush()) {
        // a reader that went away (`lqg ... | head`) is not an error worth reporting
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: cannot write output: {e}");
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoPathFound(_) => 4,
        e if e.is_validation() => 2,
        _ => 3,
    }
}

fn run(cli: Cli) -> Result<u8> {
    let value = match cli.command {
        Command::Synthesize { source } => synthesize(&Source::load(&source)?)?,
        Command::Stationary { source, controller, tol } => stationary(&Source::load(&source)?, &controller, tol)?,
        Command::GradCheck { source, controller, h } => grad_check(&Source::load(&source)?, &controller, h)?,
        Command::Hessian { source, controller, restricted } => hessian(&Source::load(&source)?, &controller, restricted)?,
        Command::Path { source, k0, k1, steps, bridge, search_bridge, seed } => {
            path(&Source::load(&source)?, &k0, &k1, steps, bridge.as_deref(), search_bridge, seed)?
        }
        Command::Descend {
            source,
            init,
            param,
            seed,
            poles,
            delta,
            alpha,
            beta,
            grad_tol,
            max_iters,
            snapshot_every,
            out,
            json,
        } => {
            let config = OptimizerConfig { alpha, beta, grad_tol, max_iters, snapshot_every, ..OptimizerConfig::default() };
            run_descend(&Source::load(&source)?, init, param, seed, poles, delta, config, out.as_deref(), json.as_deref())?
        }
        Command::Example { name } => {
            let checks = scenarios::run(&name)?;
            let failed = checks.iter().filter(|c| !c.pass).count();
            if cli.human {
                for c in &checks {
                    let verdict = if c.pass { "PASS" } else { "FAIL" };
                    println!("{verdict}  {}  {}", c.label, c.detail);
                }
                println!("{} of {} checks passed", checks.len() - failed, checks.len());
            } else {
                emit(&json!({ "example": name, "checks": checks, "failed": failed }), false);
            }
            return Ok(u8::from(failed > 0));
        }
    };
    emit(&value, cli.human);
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
