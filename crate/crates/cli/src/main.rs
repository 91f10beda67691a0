//! `dplus`: exact tables and verification suites.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use dplus::bernoulli::{bernoulli_number, bernoulli_value, hurwitz_zeta_negative, zeta_negative};
use dplus::diffops::{bracket, make_l, make_lbar, structure_constants};
use dplus::rational::Rational;
use dplus::verify::{check_delta_identities, run_suite, Config, TwistSpec};

#[derive(Parser)]
#[command(name = "dplus", version, about = "Exact computations for the centrally extended algebra of differential operators on the circle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bernoulli numbers and polynomials with the matching zeta values.
    Bernoulli {
        /// Largest index k.
        #[arg(long, default_value_t = 10)]
        k_max: usize,
        /// Evaluation point for B_k(v) and the Hurwitz values.
        #[arg(long)]
        v: Option<Rational>,
    },
    /// zeta(-s) and optionally zeta(-s, v) for s = 0..=s_max.
    Zeta {
        #[arg(long, default_value_t = 10)]
        s_max: usize,
        #[arg(long)]
        v: Option<Rational>,
    },
    /// Structure constants a_i of [Lbar_m^(r), Lbar_n^(s)] and the central term.
    StructureConstants(Quad),
    /// The bracket of two generators, in t-normal form.
    Bracket {
        #[command(flatten)]
        quad: Quad,
        /// Use the shifted generators.
        #[arg(long)]
        bar: bool,
    },
    /// Delta-function identities at period p.
    DeltaCheck {
        #[arg(long, default_value_t = 1)]
        p: i64,
        #[arg(long, default_value_t = 6)]
        window: i64,
    },
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Quad {
    #[arg(long)]
    r: u32,
    #[arg(long)]
    s: u32,
    #[arg(long, allow_hyphen_values = true)]
    m: i64,
    #[arg(long, allow_hyphen_values = true)]
    n: i64,
}

#[derive(Args)]
struct VerifyArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated check names.
    #[arg(long, value_delimiter = ',')]
    suite: Option<Vec<String>>,
    /// Restrict every twisted check to this period (requires --dims).
    #[arg(long, requires = "dims")]
    p: Option<i64>,
    /// Eigenspace dimensions, comma-separated.
    #[arg(long, value_delimiter = ',', requires = "p")]
    dims: Option<Vec<usize>>,
    /// Bound on r + s.
    #[arg(long)]
    rs_max: Option<u32>,
    /// Bound on |m| and |n|.
    #[arg(long)]
    mode_range: Option<i64>,
    #[arg(long)]
    weight_cap: Option<i64>,
    #[arg(long)]
    y_cap: Option<u32>,
    #[arg(long)]
    mode_window: Option<i64>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Record wall time per report.
    #[arg(long)]
    timings: bool,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn rational_map(m: &BTreeMap<u32, Rational>) -> serde_json::Map<String, Value> {
    m.iter().map(|(i, a)| (i.to_string(), json!(a))).collect()
}

fn cmd_bernoulli(k_max: usize, v: Option<Rational>) -> Value {
    let rows: Vec<Value> = (0..=k_max)
        .map(|k| {
            let mut row = json!({ "k": k, "B_k": bernoulli_number(k) });
            if k >= 1 {
                row["zeta(1-k)"] = json!(zeta_negative(k - 1));
            }
            if let Some(v) = &v {
                row["B_k(v)"] = json!(bernoulli_value(k, v));
                if k >= 1 {
                    row["zeta(1-k,v)"] = json!(hurwitz_zeta_negative(k - 1, v));
                }
            }
            row
        })
        .collect();
    match v {
        Some(v) => json!({ "v": v, "rows": rows }),
        None => json!({ "rows": rows }),
    }
}

fn cmd_zeta(s_max: usize, v: Option<Rational>) -> Value {
    let rows: Vec<Value> = (0..=s_max)
        .map(|s| {
            let mut row = json!({ "s": s, "zeta(-s)": zeta_negative(s) });
            if let Some(v) = &v {
                row["zeta(-s,v)"] = json!(hurwitz_zeta_negative(s, v));
            }
            row
        })
        .collect();
    json!({ "rows": rows })
}

fn cmd_structure(q: &Quad) -> Value {
    let sc = structure_constants(q.r, q.s, q.m, q.n);
    let mut out = rational_map(&sc.values);
    if let Some(c) = sc.central {
        out.insert("central".into(), json!(c));
    }
    Value::Object(out)
}

fn cmd_bracket(q: &Quad, bar: bool) -> Value {
    let gen = |n, r| if bar { make_lbar(n, r) } else { make_l(n, r) };
    let (a, b) = (gen(q.m, q.r), gen(q.n, q.s));
    let c = bracket(&a, &b);
    json!({ "a": a.to_string(), "b": b.to_string(), "bracket": c.to_string(), "terms": c })
}

fn load_config(args: &VerifyArgs) -> Result<Config> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => Config::default(),
    };
    if let Some(suite) = &args.suite {
        config.suite = suite.clone();
    }
    if let (Some(p), Some(dims)) = (args.p, &args.dims) {
        let t = TwistSpec { p, dims: dims.clone() };
        config.twists = vec![t.clone()];
        config.prop_twists = vec![t];
        config.delta_periods = vec![p];
    }
    if let Some(v) = args.rs_max {
        config.rs_max = v;
    }
    if let Some(v) = args.mode_range {
        config.mode_range = v;
    }
    if let Some(v) = args.weight_cap {
        config.weight_cap = v;
        config.prop_weight_cap = v;
    }
    if let Some(v) = args.y_cap {
        config.y_cap = v;
    }
    if let Some(v) = args.mode_window {
        config.mode_window = v;
    }
    if let Some(v) = args.jobs {
        config.jobs = v;
    }
    config.timings |= args.timings;
    config.validate()?;
    Ok(config)
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn cmd_verify(args: &VerifyArgs) -> ExitCode {
    let config = match load_config(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let reports = match run_suite(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = serde_json::to_string_pretty(&reports).expect("serializable") + "\n";
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed()).collect();
    for r in &failed {
        eprintln!("FAIL {} {}", r.check, r.params);
    }
    eprintln!("{} checks, {} failed", reports.len(), failed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Bernoulli { k_max, v } => print_json(&cmd_bernoulli(k_max, v)),
        Command::Zeta { s_max, v } => print_json(&cmd_zeta(s_max, v)),
        Command::StructureConstants(q) => print_json(&cmd_structure(&q)),
        Command::Bracket { quad, bar } => print_json(&cmd_bracket(&quad, bar)),
        Command::DeltaCheck { p, window } => {
            if p < 1 || window < 0 {
                bail!("need p >= 1 and window >= 0");
            }
            let rep = check_delta_identities(p, window);
            print_json(&serde_json::to_value(&rep)?);
            return Ok(if rep.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::Verify(args) => return Ok(cmd_verify(&args)),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
