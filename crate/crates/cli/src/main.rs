use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mds_core::boundary::{make_frame, BCMatrix};
use mds_core::classification::{classify_endpoint, deficiency_indices, Endpoint};
use mds_core::kvn::{dirichlet_to_neumann, kvn_boundary_condition, kvn_cross_validate};
use mds_core::numeric::{Tolerances, C64, V2};
use mds_core::problem::{problem_from_json, validate_problem, Problem, SourceTerm};
use mds_core::propagation::{solve_ivp, PiecewiseFunction, Side};
use mds_core::relations::{build_atomic, friedrichs, krein_von_neumann};
use mds_core::selftest::run_all;
use mds_core::spectra::{eigenvalues_in, Extension};
use mds_core::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_HYPOTHESIS: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "mds", version, about = "Measure-coefficient canonical systems: solutions, extensions, spectra")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RelOp {
    Tmax,
    Tmin,
    Friedrichs,
    Kvn,
}

#[derive(Subcommand)]
enum Command {
    /// Check a problem file.
    Validate { problem: PathBuf },
    /// Solve an initial value problem and print the traces at every breakpoint.
    Solve {
        problem: PathBuf,
        /// Spectral parameter, `re` or `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// Initial point and value, `x0,u1,u2`.
        #[arg(long, allow_hyphen_values = true)]
        ivp: String,
        /// Right-hand side: `{"pieces": [[f1, f2], ...], "atoms": [[f1, f2], ...]}`.
        #[arg(long)]
        source: Option<PathBuf>,
    },
    /// Deficiency indices, zero-norm solutions and endpoint types.
    Classify { problem: PathBuf },
    /// Maximal, minimal, Friedrichs or Krein-von Neumann relation of an atomic problem.
    Relations {
        problem: PathBuf,
        #[arg(long, value_enum)]
        op: RelOp,
    },
    /// Krein-von Neumann boundary condition, cross-checked on atomic problems.
    Kvn {
        problem: PathBuf,
        /// Take nonnegativity of the minimal relation as given (needed with densities).
        #[arg(long)]
        assume_nonnegative: bool,
    },
    /// Dirichlet-to-Neumann matrix at zero.
    Dtn { problem: PathBuf },
    /// Eigenvalues of a self-adjoint extension in a range.
    Eig {
        problem: PathBuf,
        /// Boundary condition file, or `maximal` / `minimal`.
        #[arg(long)]
        bc: String,
        /// `lo,hi`.
        #[arg(long, allow_hyphen_values = true)]
        range: String,
        /// Real point the quasi-boundary frame is built at.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        mu: f64,
    },
    /// Run the built-in acceptance corpus.
    Selftest,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::InvalidInput(_) | Error::InvalidProblem(_) | Error::HasDensity => EXIT_INVALID,
            Error::NotNonnegative { .. }
            | Error::NonnegativityUnasserted
            | Error::NotSelfAdjoint(_)
            | Error::NotSymmetric { .. }
            | Error::LimitPointEnd(_) => EXIT_HYPOTHESIS,
            _ => EXIT_FAILURE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure { code: EXIT_INVALID, message: msg.into() }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_problem(path: &Path) -> Result<Problem, Failure> {
    Ok(problem_from_json(&read(path)?)?)
}

fn load_valid(path: &Path) -> Result<Problem, Failure> {
    let p = load_problem(path)?;
    let r = validate_problem(&p);
    if !r.is_valid() {
        return Err(invalid(format!("invalid problem: {}", r.violations.join("; "))));
    }
    Ok(p)
}

fn numbers(s: &str, n: usize, what: &str) -> Result<Vec<f64>, Failure> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if v.len() == n && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(invalid(format!("{what}: expected {n} comma-separated numbers, got `{s}`"))),
    }
}

fn parse_complex(s: &str) -> Result<C64, Failure> {
    match s.split(',').count() {
        1 => Ok(C64::new(numbers(s, 1, "lambda")?[0], 0.0)),
        _ => {
            let v = numbers(s, 2, "lambda")?;
            Ok(C64::new(v[0], v[1]))
        }
    }
}

fn complex_value(v: &Value) -> Option<C64> {
    match v {
        Value::Number(n) => n.as_f64().map(|x| C64::new(x, 0.0)),
        Value::Array(a) if a.len() == 2 => Some(C64::new(a[0].as_f64()?, a[1].as_f64()?)),
        _ => None,
    }
}

fn load_source(path: &Path, p: &Problem) -> Result<SourceTerm, Failure> {
    let v: Value = serde_json::from_str(&read(path)?).map_err(|e| invalid(format!("source JSON: {e}")))?;
    let mut f = SourceTerm::zero(p);
    for (key, slots) in [("pieces", &mut f.piece_values), ("atoms", &mut f.atom_values)] {
        let Some(list) = v.get(key) else { continue };
        let list = list.as_array().ok_or_else(|| invalid(format!("source `{key}` must be a list")))?;
        if list.len() != slots.len() {
            return Err(invalid(format!("source `{key}` has {} entries, problem has {}", list.len(), slots.len())));
        }
        for (slot, item) in slots.iter_mut().zip(list) {
            let pair = item.as_array().filter(|a| a.len() == 2);
            let parsed = pair.and_then(|a| Some(V2::new(complex_value(&a[0])?, complex_value(&a[1])?)));
            *slot = parsed.ok_or_else(|| invalid(format!("source `{key}` entries must be pairs")))?;
        }
    }
    Ok(f)
}

fn cjson(z: C64) -> Value {
    json!([z.re, z.im])
}

fn vjson(v: &V2) -> Value {
    json!([cjson(v[0]), cjson(v[1])])
}

fn traces_json(p: &Problem, u: &PiecewiseFunction) -> Value {
    let mut xs: Vec<f64> = p.pieces.iter().map(|d| d.from).collect();
    xs.push(p.b);
    let rows: Vec<Value> = xs
        .iter()
        .map(|&x| {
            let minus = if x > p.a { Some(vjson(&u.trace(x, Side::Minus))) } else { None };
            let plus = if x < p.b { Some(vjson(&u.trace(x, Side::Plus))) } else { None };
            json!({"x": x, "minus": minus, "plus": plus})
        })
        .collect();
    Value::Array(rows)
}

fn validate(path: &Path) -> Result<(Value, u8), Failure> {
    let p = load_problem(path)?;
    let r = validate_problem(&p);
    let code = if r.is_valid() { 0 } else { EXIT_INVALID };
    Ok((json!({"valid": r.is_valid(), "violations": r.violations}), code))
}

fn solve(path: &Path, lambda: &str, ivp: &str, source: Option<&Path>, tol: &Tolerances) -> Result<Value, Failure> {
    let p = load_valid(path)?;
    let lambda = parse_complex(lambda)?;
    let v = numbers(ivp, 3, "ivp")?;
    let f = match source {
        Some(s) => load_source(s, &p)?,
        None => SourceTerm::zero(&p),
    };
    let u0 = V2::new(C64::new(v[1], 0.0), C64::new(v[2], 0.0));
    let u = solve_ivp(&p, lambda, v[0], &u0, &f, tol)?;
    Ok(json!({
        "lambda": cjson(lambda),
        "x0": v[0],
        "traces": traces_json(&p, &u),
        "atom_residual": u.atom_residual(&p),
    }))
}

fn classify(path: &Path, tol: &Tolerances) -> Result<Value, Failure> {
    let p = load_valid(path)?;
    let r = deficiency_indices(&p, tol)?;
    Ok(json!({
        "n_plus": r.n_plus,
        "n_minus": r.n_minus,
        "dim_l0": r.dim_l0,
        "really_bad": r.really_bad.iter().map(|&k| p.atoms[k].x).collect::<Vec<_>>(),
        "lambda_used": r.lambda_used.map(cjson),
        "v0_norm_sq": r.v0.as_ref().map(|_| r.v0_norm_sq),
        "vn_norm_sq": r.vn.as_ref().map(|_| r.vn_norm_sq),
        "endpoints": {"a": classify_endpoint(&p, Endpoint::A), "b": classify_endpoint(&p, Endpoint::B)},
    }))
}

fn relations(path: &Path, op: RelOp, tol: &Tolerances) -> Result<Value, Failure> {
    let p = load_valid(path)?;
    let am = build_atomic(&p, tol)?;
    let (name, rel) = match op {
        RelOp::Tmax => ("tmax", am.t_max),
        RelOp::Tmin => ("tmin", am.t_min),
        RelOp::Friedrichs => ("friedrichs", friedrichs(&am.t_min, tol)?),
        RelOp::Kvn => ("kvn", krein_von_neumann(&am.t_min, tol)?),
    };
    Ok(json!({"op": name, "relation": rel.to_json()}))
}

fn kvn(path: &Path, assume: bool, tol: &Tolerances) -> Result<Value, Failure> {
    let p = load_valid(path)?;
    let r = kvn_boundary_condition(&p, assume, tol)?;
    let cross = if p.has_w_density() { Value::Null } else { kvn_cross_validate(&p, tol)?.to_json() };
    Ok(json!({"result": r.to_json(), "cross_validation": cross}))
}

fn dtn(path: &Path, tol: &Tolerances) -> Result<Value, Failure> {
    let p = load_valid(path)?;
    let d = dirichlet_to_neumann(&p, tol)?;
    serde_json::to_value(d).map_err(|e| Failure { code: EXIT_FAILURE, message: e.to_string() })
}

fn eig(path: &Path, bc: &str, range: &str, mu: f64, tol: &Tolerances) -> Result<Value, Failure> {
    let p = load_valid(path)?;
    let r = numbers(range, 2, "range")?;
    let ext = match bc {
        "maximal" => Extension::Maximal,
        "minimal" => Extension::Minimal,
        file => {
            let v: Value = serde_json::from_str(&read(Path::new(file))?).map_err(|e| invalid(format!("bc JSON: {e}")))?;
            let bc = BCMatrix::from_json(&v)?;
            let frame = make_frame(&p, mu, tol)?;
            Extension::from_bc(&bc, &frame)
        }
    };
    let ev = eigenvalues_in(&p, &ext, r[0], r[1], tol)?;
    let list: Vec<Value> = ev.iter().map(|(x, m)| json!({"lambda": x, "multiplicity": m})).collect();
    Ok(json!({"range": r, "eigenvalues": list}))
}

fn selftest(tol: &Tolerances) -> (Value, u8) {
    let results = run_all(tol);
    let ok = results.iter().all(|r| r.passed);
    (json!({"passed": ok, "criteria": results}), if ok { 0 } else { EXIT_FAILURE })
}

fn text_lines(v: &Value, prefix: &str, out: &mut Vec<String>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                text_lines(x, &key, out);
            }
        }
        Value::Array(a) if a.iter().any(|x| x.is_object()) => {
            for (i, x) in a.iter().enumerate() {
                text_lines(x, &format!("{prefix}[{i}]"), out);
            }
        }
        other => out.push(format!("{prefix}: {other}")),
    }
}

fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut out = json!({"schema": 1});
            if let (Value::Object(o), Value::Object(m)) = (&mut out, v) {
                o.extend(m.clone());
            }
            serde_json::to_string_pretty(&out).expect("serializable")
        }
        Format::Text => {
            if let Some(list) = v.get("criteria").and_then(|c| c.as_array()) {
                return list
                    .iter()
                    .map(|r| {
                        let status = if r["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
                        format!("[{status}] {:>2} {}: {}", r["id"], r["name"].as_str().unwrap_or(""), r["detail"].as_str().unwrap_or(""))
                    })
                    .collect::<Vec<_>>()
                    .join("\n");
            }
            let mut out = Vec::new();
            text_lines(v, "", &mut out);
            out.join("\n")
        }
    }
}

fn run(cli: &Cli) -> Result<(Value, u8), Failure> {
    let tol = Tolerances::from_env();
    let ok = |v: Value| Ok((v, 0));
    match &cli.command {
        Command::Validate { problem } => validate(problem),
        Command::Solve { problem, lambda, ivp, source } => ok(solve(problem, lambda, ivp, source.as_deref(), &tol)?),
        Command::Classify { problem } => ok(classify(problem, &tol)?),
        Command::Relations { problem, op } => ok(relations(problem, *op, &tol)?),
        Command::Kvn { problem, assume_nonnegative } => ok(kvn(problem, *assume_nonnegative, &tol)?),
        Command::Dtn { problem } => ok(dtn(problem, &tol)?),
        Command::Eig { problem, bc, range, mu } => ok(eig(problem, bc, range, *mu, &tol)?),
        Command::Selftest => Ok(selftest(&tol)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok((v, code)) => {
            println!("{}", render(&v, cli.format));
            ExitCode::from(code)
        }
        Err(f) => {
            let v = json!({"error": f.message, "exit_code": f.code});
            match cli.format {
                Format::Json => println!("{}", render(&v, Format::Json)),
                Format::Text => eprintln!("error: {}", f.message),
            }
            ExitCode::from(f.code)
        }
    }
}
