//! `uavllt`: pairwise link lifetimes, network simulation runs, route queries
//! and oracle validation sweeps.

use std::collections::BTreeSet;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uav_llt::llt::{compute_llt, Lifetime, LltError, DEFAULT_HORIZON};
use uav_llt::oracle::{brute_force_llt, DEFAULT_DT};
use uav_llt::routing::{max_min_route, LinkGraph};
use uav_llt::scenario::{parse_trajectory_spec, run_scenario, write_outputs, ScenarioConfig};
use uav_llt::validate::{sweep, CaseFilter, SweepConfig};

const EXIT_FAILURE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_LINK_NOT_UP: u8 = 3;
const EXIT_UNREACHABLE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "uavllt",
    version,
    about = "Link lifetime tools for UAV networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lifetime of one link between two trajectories.
    ///
    /// Specs are `curve:cx,cy,r,v,dir,theta,z` (dir is CW or CCW) or
    /// `straight:x,y,heading,v,z`. Angles are radians.
    Pair {
        #[arg(allow_hyphen_values = true)]
        a: String,
        #[arg(allow_hyphen_values = true)]
        b: String,
        /// Transmission range in meters.
        #[arg(long)]
        range: f64,
        #[arg(long, default_value_t = DEFAULT_HORIZON)]
        horizon: f64,
        /// Also run the brute-force stepper and report the difference.
        #[arg(long)]
        oracle: bool,
        /// Oracle step in seconds.
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
    },
    /// Run a scenario file and write the event log, trace and snapshots.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Longest-lasting route over a snapshot edge list.
    Route {
        snapshot: PathBuf,
        src: String,
        dst: String,
        /// Snapshot time to use when the file holds several; defaults to the first.
        #[arg(long)]
        at: Option<f64>,
    },
    /// Compare analytic lifetimes against the brute-force oracle.
    Validate {
        /// A, B, C or all.
        #[arg(long, default_value = "all")]
        case: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_DT)]
        dt: f64,
        #[arg(long, default_value_t = 300.0)]
        horizon: f64,
    },
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Display) -> Failure {
    Failure {
        code,
        message: message.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Pair {
            a,
            b,
            range,
            horizon,
            oracle,
            dt,
        } => pair(&a, &b, range, horizon, oracle.then_some(dt)),
        Command::Simulate { config, out, seed } => simulate(&config, &out, seed),
        Command::Route {
            snapshot,
            src,
            dst,
            at,
        } => route(&snapshot, &src, &dst, at),
        Command::Validate {
            case,
            trials,
            seed,
            dt,
            horizon,
        } => validate(&case, trials, seed, dt, horizon),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("uavllt: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn pair(
    a: &str,
    b: &str,
    range: f64,
    horizon: f64,
    oracle_dt: Option<f64>,
) -> Result<ExitCode, Failure> {
    let a = parse_trajectory_spec(a, 0.0).map_err(|e| fail(EXIT_INPUT, e))?;
    let b = parse_trajectory_spec(b, 0.0).map_err(|e| fail(EXIT_INPUT, e))?;
    let result = compute_llt(&a, &b, range, horizon).map_err(|e| match e {
        LltError::LinkNotUp { .. } => fail(EXIT_LINK_NOT_UP, e),
        _ => fail(EXIT_INPUT, e),
    })?;
    println!("case: {}", result.case_used.label());
    match result.llt {
        Lifetime::Finite(t) => println!("llt: {t} s"),
        Lifetime::Unbounded => println!("llt: unbounded (horizon-capped at {horizon} s)"),
    }
    if let (Some(root), Some(residual)) = (result.root, result.residual) {
        println!("root: {root} s, residual: {residual:e} m");
    }
    if let Some(dt) = oracle_dt {
        let brute = brute_force_llt(&a, &b, range, dt, horizon).map_err(|e| fail(EXIT_INPUT, e))?;
        match brute {
            Lifetime::Finite(t) => println!("oracle: {t} s"),
            Lifetime::Unbounded => println!("oracle: unbounded (horizon-capped at {horizon} s)"),
        }
        match (result.llt, brute) {
            (Lifetime::Finite(x), Lifetime::Finite(y)) => {
                println!("difference: {:e} s", (x - y).abs())
            }
            (Lifetime::Unbounded, Lifetime::Unbounded) => println!("difference: 0 s"),
            _ => println!("difference: verdicts differ"),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn simulate(config: &Path, out: &Path, seed: Option<u64>) -> Result<ExitCode, Failure> {
    let mut cfg = ScenarioConfig::load(config).map_err(|e| fail(EXIT_INPUT, e))?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let output = run_scenario(&cfg).map_err(|e| fail(EXIT_INPUT, e))?;
    write_outputs(&output, out)
        .map_err(|e| fail(EXIT_FAILURE, format!("writing {}: {e}", out.display())))?;
    let s = output.summary;
    println!(
        "uavs {}, links {}, breaks {}, recomputes {}, mean |prediction error| {:e} s, max {:e} s, unpredicted {}",
        s.uav_count,
        s.links,
        s.breaks,
        s.recomputes,
        s.mean_abs_prediction_error,
        s.max_abs_prediction_error,
        s.unpredicted_breaks
    );
    Ok(ExitCode::SUCCESS)
}

struct EdgeRow {
    t: f64,
    a: String,
    b: String,
    llt: Lifetime,
}

fn read_snapshot(path: &Path) -> Result<Vec<EdgeRow>, Failure> {
    let malformed = |m: String| fail(EXIT_INPUT, format!("{}: {m}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| malformed(e.to_string()))?;
    let headers = reader.headers().map_err(|e| malformed(e.to_string()))?;
    if headers != vec!["t_s", "node_a", "node_b", "llt_s"] {
        return Err(malformed(format!(
            "expected header t_s,node_a,node_b,llt_s, got {headers:?}"
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| malformed(e.to_string()))?;
        let t: f64 = record[0]
            .parse()
            .map_err(|_| malformed(format!("line {line}: bad time {:?}", &record[0])))?;
        let llt = match &record[3] {
            "inf" => Lifetime::Unbounded,
            v => match v.parse::<f64>() {
                Ok(x) if x >= 0.0 => Lifetime::Finite(x),
                _ => return Err(malformed(format!("line {line}: bad lifetime {v:?}"))),
            },
        };
        if record[1].is_empty() || record[2].is_empty() || record[1] == record[2] {
            return Err(malformed(format!("line {line}: bad node pair")));
        }
        rows.push(EdgeRow {
            t,
            a: record[1].to_string(),
            b: record[2].to_string(),
            llt,
        });
    }
    Ok(rows)
}

fn route(path: &Path, src: &str, dst: &str, at: Option<f64>) -> Result<ExitCode, Failure> {
    if src == dst {
        return Err(fail(EXIT_INPUT, "source and destination are the same node"));
    }
    let rows = read_snapshot(path)?;
    let time = match at {
        Some(t) => t,
        None => rows.first().map_or(0.0, |r| r.t),
    };
    let mut graph = LinkGraph::new(time);
    let nodes: BTreeSet<&str> = [src, dst].into_iter().collect();
    for n in nodes {
        graph.add_node(n.to_string());
    }
    for r in rows.iter().filter(|r| r.t == time) {
        graph.add_edge(r.a.clone(), r.b.clone(), r.llt);
    }
    let found = max_min_route(&graph, &src.to_string(), &dst.to_string())
        .map_err(|e| fail(EXIT_INPUT, e))?;
    match found {
        Some(r) => {
            println!("{}, bottleneck {}", r.nodes.join(" "), r.bottleneck_llt);
            Ok(ExitCode::SUCCESS)
        }
        None => {
            println!("unreachable");
            Ok(ExitCode::from(EXIT_UNREACHABLE))
        }
    }
}

fn validate(
    case: &str,
    trials: usize,
    seed: u64,
    dt: f64,
    horizon: f64,
) -> Result<ExitCode, Failure> {
    let cases = if case.eq_ignore_ascii_case("all") {
        CaseFilter::ALL.to_vec()
    } else {
        vec![case
            .parse::<CaseFilter>()
            .map_err(|e| fail(EXIT_INPUT, e))?]
    };
    if trials == 0 {
        return Err(fail(EXIT_INPUT, "--trials must be at least 1"));
    }
    if !(dt > 0.0 && horizon > 0.0) {
        return Err(fail(EXIT_INPUT, "--dt and --horizon must be positive"));
    }
    let cfg = SweepConfig {
        trials,
        seed,
        dt,
        horizon,
        ..SweepConfig::default()
    };
    println!(
        "{:<5} {:>7} {:>8} {:>12} {:>12} {:>9} {:>9}",
        "case", "trials", "bounded", "max_err_s", "mean_err_s", "mismatch", "failures"
    );
    let mut failures = 0;
    for case in cases {
        let report = sweep(case, &cfg);
        failures += report.failures();
        println!(
            "{:<5} {:>7} {:>8} {:>12.3e} {:>12.3e} {:>9} {:>9}",
            format!("{case:?}"),
            report.trials(),
            report.bounded(),
            report.max_error(),
            report.mean_error(),
            report.verdict_mismatches(),
            report.failures()
        );
    }
    if failures == 0 {
        println!("PASS");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("FAIL: {failures} instance(s) outside tolerance");
        Ok(ExitCode::from(EXIT_FAILURE))
    }
}
