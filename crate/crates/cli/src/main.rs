//! Command-line entry point: prediction, simulation, packing extraction,
//! packing verification, and overlap estimation, with reproducible outputs.
//!
//! Exit codes: 0 success, 2 invalid configuration or unparseable input,
//! 3 resource cap exceeded, 4 verification failure.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cliquepack::experiments::{
    replicate, write_outputs, zeta_monte_carlo, zeta_sweep_csv, ExperimentConfig, HorizonPolicy,
    KSpec,
};
use cliquepack::graph::{GraphState, Seed};
use cliquepack::process::{verify_packing, PackingResult};
use cliquepack::report::FlatReport;
use cliquepack::theory::{
    self, envelope_report, heuristic_duration, log_first_moment_bound, t0_threshold,
    upper_bound_t, TheoryParams,
};
use cliquepack::Error;

const LIBRARY_LINE: &str = concat!("cliquepack ", env!("CARGO_PKG_VERSION"));

#[derive(Parser)]
#[command(name = "cliquepack", version, about = "k-clique removal process simulator and analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Clique size: exactly one of an explicit size or an offset below the
/// threshold size k0.
#[derive(Args, Clone)]
#[group(required = true, multiple = false)]
struct KArg {
    /// Clique size k
    #[arg(long)]
    k: Option<u64>,
    /// Near-maximality offset: k = k0 - C
    #[arg(long = "offset", short = 'C', visible_alias = "c")]
    offset: Option<u64>,
}

impl KArg {
    fn spec(&self) -> KSpec {
        match (self.k, self.offset) {
            (Some(k), None) => KSpec::Explicit(k),
            (None, Some(c)) => KSpec::Offset(c),
            _ => unreachable!("clap group enforces exactly one"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the derived parameters, horizons, and bound machinery
    Predict {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        k: KArg,
        /// Assumed overlap-bound exponent constant in [0, 1/4]
        #[arg(long, default_value_t = 0.25)]
        beta: f64,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long)]
        json: bool,
        #[arg(long, env = "CLIQUEPACK_OUT")]
        out: Option<PathBuf>,
    },
    /// Run seeded removal-process replicas and write traces
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        k: KArg,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        replicas: u64,
        /// Fixed step horizon
        #[arg(long, conflicts_with_all = ["exhaustion", "mstar"])]
        horizon: Option<u64>,
        /// Run every replica until no k-clique remains (default)
        #[arg(long)]
        exhaustion: bool,
        /// Stop each replica at the trajectory horizon m*
        #[arg(long, conflicts_with = "exhaustion")]
        mstar: bool,
        /// Skip per-step Y observation
        #[arg(long)]
        no_observe_y: bool,
        /// Tracked-pair sample size for per-edge band checks
        #[arg(long, default_value_t = 64)]
        tracked: usize,
        /// Recount Q and every Y_e from scratch after each step
        #[arg(long)]
        paranoid: bool,
        /// Adherence window in edges consumed (default: half the initial edges)
        #[arg(long)]
        window_edges: Option<u64>,
        /// Worker threads for the replica loop
        #[arg(long)]
        jobs: Option<usize>,
        /// Clique-index reference cap
        #[arg(long, default_value_t = cliquepack::cliques::DEFAULT_INDEX_CAP)]
        index_cap: u64,
        #[arg(long)]
        json: bool,
        #[arg(long, env = "CLIQUEPACK_OUT")]
        out: Option<PathBuf>,
    },
    /// Run one replica to exhaustion and write the graph + packing files
    Pack {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        k: KArg,
        #[arg(long)]
        seed: u64,
        #[arg(long, env = "CLIQUEPACK_OUT")]
        out: PathBuf,
    },
    /// Verify a packing file against a graph file
    Verify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        packing: PathBuf,
        /// Expected clique size (defaults to the packing's line length)
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo estimate of the pairwise edge-disjointness probability
    Zeta {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long, default_value_t = 2)]
        t: u64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sweep t = 1..=MAX and emit CSV
        #[arg(long)]
        t_sweep: Option<u64>,
        #[arg(long)]
        json: bool,
        #[arg(long, env = "CLIQUEPACK_OUT")]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> ExitCode {
    match e {
        Error::InvalidParameter(_)
        | Error::Parse { .. }
        | Error::ParameterMismatch(_)
        | Error::ContractViolation(_) => ExitCode::from(2),
        Error::EnumerationCap { .. } | Error::IndexCap { .. } | Error::BruteForceGuard { .. } => {
            ExitCode::from(3)
        }
        Error::ParanoidMismatch { .. } => ExitCode::from(4),
        _ => ExitCode::from(1),
    }
}

fn run(cli: Cli) -> cliquepack::Result<ExitCode> {
    match cli.command {
        Command::Predict {
            n,
            p,
            k,
            beta,
            epsilon,
            json,
            out,
        } => cmd_predict(n, p, k.spec(), beta, epsilon, json, out.as_deref()),
        Command::Simulate {
            n,
            p,
            k,
            seed,
            replicas,
            horizon,
            exhaustion: _,
            mstar,
            no_observe_y,
            tracked,
            paranoid,
            window_edges,
            jobs,
            index_cap,
            json,
            out,
        } => {
            let mut config = ExperimentConfig::new(n, p, k.spec(), replicas, seed);
            config.horizon = match (horizon, mstar) {
                (Some(h), _) => HorizonPolicy::Fixed(h),
                (None, true) => HorizonPolicy::MStar,
                (None, false) => HorizonPolicy::Exhaustion,
            };
            config.observe_y = !no_observe_y;
            config.tracked_edges = tracked;
            config.paranoid = paranoid;
            config.window_edges = window_edges;
            config.jobs = jobs;
            config.index_cap = index_cap;
            cmd_simulate(&config, json, out.as_deref())
        }
        Command::Pack { n, p, k, seed, out } => cmd_pack(n, p, k.spec(), seed, &out),
        Command::Verify {
            graph,
            packing,
            k,
            json,
        } => cmd_verify(&graph, &packing, k, json),
        Command::Zeta {
            n,
            k,
            t,
            trials,
            seed,
            t_sweep,
            json,
            out,
        } => cmd_zeta(n, k, t, trials, seed, t_sweep, json, out.as_deref()),
    }
}

fn resolve_params(n: u64, p: f64, spec: KSpec) -> cliquepack::Result<TheoryParams> {
    match spec {
        KSpec::Explicit(k) => TheoryParams::new(n, p, k),
        KSpec::Offset(c) => TheoryParams::from_offset(n, p, c),
    }
}

fn cmd_predict(
    n: u64,
    p: f64,
    spec: KSpec,
    beta: f64,
    epsilon: f64,
    json: bool,
    out: Option<&Path>,
) -> cliquepack::Result<ExitCode> {
    let params = resolve_params(n, p, spec)?;
    let mut rep = FlatReport::new();
    rep.put_str("library", LIBRARY_LINE);
    rep.put_u64("n", params.n);
    rep.put_f64("p", params.p);
    rep.put_u64("k", params.k);
    rep.put_u64("k0", params.k0);
    rep.put_f64("gamma", params.gamma);
    rep.put_f64("delta", params.delta);
    rep.put_f64("beta_assumed", beta);
    rep.put_f64("epsilon", epsilon);
    rep.put_log_value(
        "expected_cliques",
        theory::log_expected_cliques(params.n, params.k, params.p)?,
    );
    rep.put_bool("o1_terms_dropped", true);

    let mut warnings: Vec<String> = Vec::new();
    if params.out_of_regime {
        warnings.push(format!(
            "gamma = {:.4} is not above 2: out of regime, horizons and bounds unavailable",
            params.gamma
        ));
    }
    if !(0.0..=0.25).contains(&beta) {
        warnings.push(format!(
            "beta = {beta} outside [0, 1/4]: the overlap-bound assumption has no support there"
        ));
    }
    match params.m_star {
        Some(m) => {
            rep.put_u64("m_star", m);
            if m == 0 {
                warnings.push("m_star = 0: degenerate horizon at these parameters".into());
            }
        }
        None => rep.put_str("m_star", "undefined (gamma < 2)"),
    }

    if !params.out_of_regime {
        match heuristic_duration(params.n, params.p, params.k) {
            Ok(h) => {
                rep.put_f64("m_conj", h.m_conj);
                rep.put_u64("m_traj", h.m_traj);
                if h.truncated {
                    warnings.push("trajectory scan truncated before reaching n^2".into());
                }
            }
            Err(e) => warnings.push(format!("heuristic duration unavailable: {e}")),
        }
        match t0_threshold(params.n, params.p, params.k, params.gamma) {
            Ok(t0) => rep.put_f64("t0", t0),
            Err(e) => warnings.push(format!("t0 unavailable: {e}")),
        }
        match upper_bound_t(params.n, params.p, params.k, beta, epsilon, params.gamma) {
            Ok(t) => {
                rep.put_f64("t_threshold", t);
                let fm = log_first_moment_bound(params.n, params.p, params.k, t, beta, params.gamma)?;
                rep.put_f64("bracket_value", fm.bracket);
                rep.put_f64("log_first_moment", fm.log_bound);
            }
            Err(e) => warnings.push(format!("upper-bound threshold unavailable: {e}")),
        }
        let env = envelope_report(&params);
        rep.put_bool("envelope_skipped_degenerate", env.skipped_degenerate);
        if let Some(gy) = env.g_y_at_m_star {
            rep.put_f64("g_y_at_m_star", gy);
            rep.put_f64("envelope_bound", env.bound);
            rep.put_bool("envelope_chain_holds", env.chain_holds.unwrap_or(false));
        }
    }
    for (i, w) in warnings.iter().enumerate() {
        rep.put_str(&format!("warning_{i}"), w);
    }

    let body = rep.to_string_pretty();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("predict.json"), body.as_bytes())?;
    }
    if json {
        println!("{body}");
    } else {
        println!("# {LIBRARY_LINE}");
        for (k, v) in &rep.0 {
            println!("{k} = {v}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(
    config: &ExperimentConfig,
    json: bool,
    out: Option<&Path>,
) -> cliquepack::Result<ExitCode> {
    let output = replicate(config)?;
    if let Some(dir) = out {
        write_outputs(&output, dir)?;
    }
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&output.report).map_err(std::io::Error::other)?
        );
    } else {
        let r = &output.report;
        println!("# {LIBRARY_LINE}");
        println!(
            "n={} p={} k={} (k0={}) gamma={:.4} delta={:.5} m_star={:?}",
            r.params.n, r.params.p, r.params.k, r.params.k0, r.params.gamma, r.params.delta,
            r.params.m_star
        );
        for w in &r.warnings {
            println!("warning: {w}");
        }
        println!(
            "replicas={} median_steps={} median_max_dev_Q={:.4} (threshold {:.4}, pass={})",
            r.replicas.len(),
            r.median_steps,
            r.adherence.median_max_dev_q,
            r.adherence_threshold,
            r.adherence_pass
        );
        println!("init_pass_fraction={:.2}", r.init_pass_fraction);
        for s in &r.replicas {
            let dev = s
                .max_dev_q
                .map(|d| format!("{d:.4}"))
                .unwrap_or_else(|| "-".into());
            println!(
                "replica {}: e0={} q0={} M={} exhausted={} max_dev_Q={dev} packing_ok={} tau={}",
                s.stream, s.e0, s.q0, s.steps, s.exhausted, s.packing_ok, s.stopping.tau
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_pack(n: usize, p: f64, spec: KSpec, seed: u64, out: &Path) -> cliquepack::Result<ExitCode> {
    let params = resolve_params(n as u64, p, spec)?;
    let seed = Seed::new(seed, 0);
    let mut rng = seed.rng();
    let g0 = cliquepack::graph::sample_gnp_rng(n, p, &mut rng)?;
    let run = cliquepack::process::run_to_exhaustion(
        &g0,
        params.k,
        &cliquepack::process::RunOptions {
            observe_y: false,
            ..Default::default()
        },
        &mut rng,
    )?;
    std::fs::create_dir_all(out)?;
    let mut f = File::create(out.join("graph.txt"))?;
    g0.write_edge_list(&mut f)?;
    let mut f = File::create(out.join("packing.txt"))?;
    run.packing.write_text(&mut f)?;
    let check = verify_packing(&g0, &run.packing.cliques, params.k);
    println!("# {LIBRARY_LINE}");
    println!(
        "n={n} p={p} k={} seed={} M={} edges_used={} verified={}",
        params.k,
        seed.master,
        run.packing.cliques.len(),
        check.edges_used,
        check.pass
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(
    graph: &Path,
    packing: &Path,
    k: Option<u64>,
    json: bool,
) -> cliquepack::Result<ExitCode> {
    let g = GraphState::read_edge_list(BufReader::new(File::open(graph)?))?;
    let pack = PackingResult::read_text(BufReader::new(File::open(packing)?))?;
    let k = k.unwrap_or(pack.k);
    let check = verify_packing(&g, &pack.cliques, k);
    if json {
        let mut doc = serde_json::to_value(&check).map_err(std::io::Error::other)?;
        if let Some(obj) = doc.as_object_mut() {
            obj.insert("library".into(), LIBRARY_LINE.into());
            obj.insert("k".into(), k.into());
        }
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).map_err(std::io::Error::other)?
        );
    } else {
        println!("# {LIBRARY_LINE}");
        if check.pass {
            println!(
                "PASS: {} edge-disjoint {k}-cliques covering {} edges",
                check.cliques, check.edges_used
            );
        } else {
            println!("FAIL: {:?}", check.violation.as_ref().unwrap());
        }
    }
    if check.pass {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(4))
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_zeta(
    n: u64,
    k: u64,
    t: u64,
    trials: u64,
    seed: u64,
    t_sweep: Option<u64>,
    json: bool,
    out: Option<&Path>,
) -> cliquepack::Result<ExitCode> {
    if let Some(t_max) = t_sweep {
        let mut buf = Vec::new();
        zeta_sweep_csv(n, k, t_max, trials, Seed::new(seed, 0), &mut buf)?;
        if let Some(dir) = out {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("zeta_sweep.csv"), &buf)?;
        }
        print!("{}", String::from_utf8_lossy(&buf));
        return Ok(ExitCode::SUCCESS);
    }
    let est = zeta_monte_carlo(n, k, t, trials, Seed::new(seed, 0))?;
    let mut rep = FlatReport::new();
    rep.put_str("library", LIBRARY_LINE);
    rep.put_u64("n", n);
    rep.put_u64("k", k);
    rep.put_u64("t", t);
    rep.put_u64("trials", trials);
    rep.put_u64("seed", seed);
    rep.put_f64("estimate", est.estimate);
    rep.put_f64("stderr", est.stderr);
    if t == 2 {
        rep.put_f64("exact", theory::exact_zeta2(n, k)?.value());
        // reported for context: the asymptotic pair-overlap probability
        rep.put_f64("overlap_asymptotic", theory::overlap_asymptotic(n, k));
        rep.put_f64("overlap_observed", 1.0 - est.estimate);
    }
    let body = rep.to_string_pretty();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("zeta.json"), body.as_bytes())?;
    }
    if json {
        println!("{body}");
    } else {
        println!("# {LIBRARY_LINE}");
        for (k, v) in &rep.0 {
            println!("{k} = {v}");
        }
    }
    let _ = std::io::stdout().flush();
    Ok(ExitCode::SUCCESS)
}
