use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use ratmin::dynamics::{is_wandering, orbit, ProjPoint};
use ratmin::globalmin::minimal_model_with_budget;
use ratmin::interp::{interpolate_i64, nd_cached, Degenerate, Interpolation, SparsePoly};
use ratmin::model::{FactoredInteger, Model, DEFAULT_RHO_BUDGET};
use ratmin::search::{benchmark_scan, count_candidates, run_search, SearchConfig, DEFAULT_HORIZON, FORMAT_VERSION};
use ratmin::Error;

/// Overrides the Pollard rho iteration budget used when factoring resultants.
const BUDGET_VAR: &str = "RATMIN_RHO_BUDGET";

#[derive(Parser)]
#[command(name = "ratmin", version, about = "Minimal models and integer orbits of rational maps")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Common {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print Res_d and its factorisation.
    Resultant {
        model: String,
        #[command(flatten)]
        common: Common,
    },
    /// Compute a minimal model over the integers.
    Minimize {
        model: String,
        #[command(flatten)]
        common: Common,
    },
    /// Iterate a point.
    Orbit {
        model: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        start: String,
        /// Number of points, including the start.
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Fit a degree-d map through an orbit prefix c_0, ..., c_{2d+1}.
    Interpolate {
        #[arg(long)]
        d: usize,
        #[arg(value_delimiter = ',', allow_negative_numbers = true, required = true)]
        values: Vec<i64>,
        #[command(flatten)]
        common: Common,
    },
    /// Decide whether a point is wandering.
    Wandering {
        model: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        start: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run the orbit search.
    Search {
        #[arg(long)]
        d: usize,
        /// Inclusive range `lo..hi`.
        #[arg(long, value_parser = parse_range)]
        c1: (i64, i64),
        #[arg(long)]
        window: i64,
        #[arg(long, default_value_t = 1)]
        shards: usize,
        /// Defaults to the available parallelism.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: usize,
        /// Directory for report.json, survivors.jsonl and checkpoints/.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Time the divisibility scan on the first unit and extrapolate,
        /// instead of running the search.
        #[arg(long)]
        benchmark: bool,
        /// Stop shard K after N units, for testing resume (`K:N`).
        #[arg(long, value_parser = parse_kill, hide = true)]
        kill_after: Option<(usize, usize)>,
        #[command(flatten)]
        common: Common,
    },
    /// Size and shape of the N and D polynomials.
    NdStats {
        #[arg(long)]
        d: usize,
        /// Keep c_0 as a variable instead of setting it to 0.
        #[arg(long)]
        general: bool,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once("..").ok_or("expected lo..hi")?;
    let a = a.trim().parse().map_err(|e| format!("{e}"))?;
    let b = b.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((a, b))
}

fn parse_kill(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or("expected shard:units")?;
    Ok((a.parse().map_err(|e| format!("{e}"))?, b.parse().map_err(|e| format!("{e}"))?))
}

enum Failure {
    /// No answer exists for this input.
    Math(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Config(_) | Error::PrefixLength { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Math(e.to_string()),
        }
    }
}

fn budget() -> Result<u64, Failure> {
    match std::env::var(BUDGET_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| Failure::Usage(format!("{BUDGET_VAR} must be a non-negative integer"))),
        Err(_) => Ok(DEFAULT_RHO_BUDGET),
    }
}

fn point(s: &str) -> Result<ProjPoint, Failure> {
    s.parse().map_err(|_| Failure::Usage(format!("bad point {s:?}")))
}

fn factor_json(f: &FactoredInteger) -> Value {
    json!({
        "sign": f.sign,
        "factors": f.factors.iter().map(|(p, e)| json!([p.to_string(), e])).collect::<Vec<_>>(),
        "unfactored": f.unfactored.iter().map(|u| u.to_string()).collect::<Vec<_>>(),
    })
}

fn stats_json(p: &SparsePoly) -> Value {
    json!({
        "terms": p.len(),
        "max_abs_coeff": p.max_abs_coeff().to_string(),
        "degree": p.total_degree(),
    })
}

fn emit(json_out: bool, v: Value, text: String) {
    if json_out {
        println!("{}", v);
    } else {
        println!("{text}");
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Resultant { model, common } => {
            let m = Model::parse(&model)?;
            let fac = m.factor_resultant(budget()?);
            let v = json!({
                "v": FORMAT_VERSION,
                "model": m.to_json(),
                "resultant": m.res_d().to_string(),
                "factorization": factor_json(&fac),
            });
            emit(common.json, v, format!("model: {m}\nresultant: {}\nfactorization: {fac}", m.res_d()));
        }
        Command::Minimize { model, common } => {
            let m = Model::parse(&model)?;
            let r = minimal_model_with_budget(&m, budget()?)?;
            let t = &r.transform;
            let v = json!({
                "v": FORMAT_VERSION,
                "input": m.to_json(),
                "lambda": t.lambda.to_string(),
                "alpha": t.alpha.to_string(),
                "beta": t.beta.to_string(),
                "model": r.model.to_json(),
                "resultant": r.model.res_d().to_string(),
                "status": r.status.as_str(),
            });
            let text = format!(
                "lambda: {}\nalpha: {}\nbeta: {}\nmodel: {}\nresultant: {}\nstatus: {}",
                t.lambda,
                t.alpha,
                t.beta,
                r.model,
                r.model.res_d(),
                r.status.as_str()
            );
            emit(common.json, v, text);
        }
        Command::Orbit { model, start, n, common } => {
            let m = Model::parse(&model)?;
            let rec = orbit(&m, &point(&start)?, n);
            let mut v = rec.to_json();
            v["v"] = json!(FORMAT_VERSION);
            let pts: Vec<String> = rec.points.iter().map(|p| p.to_string()).collect();
            let text = format!("points: {}\nintegers: {}\nstatus: {}", pts.join(", "), rec.integer_count, rec.status.as_str());
            emit(common.json, v, text);
        }
        Command::Interpolate { d, values, common } => match interpolate_i64(d, &values)? {
            Interpolation::Map(m) => {
                emit(common.json, json!({"v": FORMAT_VERSION, "model": m.to_json()}), m.to_string());
            }
            Interpolation::Degenerate(why) => {
                let reason = match why {
                    Degenerate::Nullspace(k) => format!("solution space of dimension {k}"),
                    Degenerate::ZeroResultant { f, g } => format!("common factor in ({f})/({g})"),
                };
                emit(common.json, json!({"v": FORMAT_VERSION, "degenerate": reason}), format!("DEGENERATE: {reason}"));
                return Err(Failure::Math(String::new()));
            }
        },
        Command::Wandering { model, start, common } => {
            let m = Model::parse(&model)?;
            let s = is_wandering(&m, &point(&start)?);
            emit(common.json, json!({"v": FORMAT_VERSION, "status": s.as_str()}), s.as_str().to_string());
        }
        Command::Search { d, c1, window, shards, threads, horizon, out, benchmark, kill_after, common } => {
            let mut cfg = SearchConfig::new(d, c1, window);
            cfg.shards = shards;
            cfg.threads = threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            cfg.horizon = horizon;
            cfg.budget = budget()?;
            cfg.kill_after = kill_after;
            cfg.validate()?;
            if benchmark {
                let (n, ns) = benchmark_scan(&cfg);
                let total = count_candidates(&cfg);
                let hours = total as f64 * ns / 3.6e12;
                let v = json!({
                    "v": FORMAT_VERSION,
                    "sampled": n.to_string(),
                    "ns_per_candidate": format!("{ns:.1}"),
                    "candidates": total.to_string(),
                    "single_core_hours": format!("{hours:.2}"),
                });
                let text = format!("{ns:.1} ns per candidate over {n}; {total} candidates, about {hours:.2} single-core hours for the scan");
                emit(common.json, v, text);
                return Ok(());
            }
            let report = run_search(&cfg, out.as_deref())?;
            let c = &report.counts;
            let text = format!(
                "size of search space: {}\n\
                 orbits with a next integer point: {}\n\
                 orbits belonging to minimal maps: {}\n\
                 orbits of non-degree-{d} maps: {}\n\
                 polynomial orbits: {}\n\
                 preperiodic orbits: {}\n\
                 final (wandering, not polynomial): {}\n\
                 final up to translation: {}",
                c.candidates,
                c.survivors_divisibility,
                c.minimal_maps,
                c.non_degree_d,
                c.polynomials,
                c.preperiodic,
                c.final_wandering,
                c.final_up_to_translation,
            );
            emit(common.json, report.to_json(), text);
        }
        Command::NdStats { d, general, common } => {
            if d < 2 {
                return Err(Failure::Usage("degree must be at least 2".into()));
            }
            let nd = nd_cached(d, !general);
            let v = json!({"v": FORMAT_VERSION, "N": stats_json(&nd.0), "D": stats_json(&nd.1)});
            let line = |p: &SparsePoly| format!("{} terms, max |coeff| {}, deg {}", p.len(), p.max_abs_coeff(), p.total_degree());
            emit(common.json, v, format!("N: {}; D: {}", line(&nd.0), line(&nd.1)));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Math(msg)) => {
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
