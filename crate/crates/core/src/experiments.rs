//! Seeded replication harness, overlap Monte Carlo, and adherence
//! statistics.
//!
//! Replica r always runs from Seed { master, stream: r }, so results are
//! identical whatever the execution order or degree of parallelism. The
//! aggregate is a pure function of the configuration.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{sample_gnp_rng, Seed};
use crate::process::{
    detect_stopping_times, initial_checks, run_removal_process, verify_packing,
    InitialChecksReport, ProcessRun, RunOptions, StoppingReport,
};
use crate::theory::schedule::{build_schedule, TrajectorySchedule};
use crate::theory::TheoryParams;

/// How the clique size is specified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KSpec {
    Explicit(u64),
    /// k = k0 - offset.
    Offset(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HorizonPolicy {
    /// Stop at the trajectory-theorem horizon (0 steps when degenerate).
    MStar,
    /// Run until no k-clique remains.
    Exhaustion,
    Fixed(u64),
}

/// Named slack constants. Every tolerance used by the harness lives here so
/// reports can echo the exact configuration they were produced under.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Tolerances {
    /// Acceptance threshold on the median (over replicas) of the maximum
    /// relative deviation of Q from its trajectory over the window.
    /// Calibration note: the asymptotic guarantee is a vanishing
    /// n^{-delta/4}-scale error; at desk scale this fixed threshold is the
    /// contract, and reports always state the observed median next to it.
    pub adherence_median_max_dev: f64,
    /// Multiplier on delta in the initial-check bands (band = n^{-delta*slack}).
    pub initial_check_slack: f64,
    /// Reporting threshold on the fraction of replicas passing all initial
    /// checks (reported, never asserted).
    pub init_pass_fraction_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            adherence_median_max_dev: 0.2,
            initial_check_slack: 0.5,
            init_pass_fraction_floor: 0.5,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub p: f64,
    pub k: KSpec,
    pub replicas: u64,
    pub master_seed: u64,
    pub horizon: HorizonPolicy,
    pub observe_y: bool,
    pub tracked_edges: usize,
    pub paranoid: bool,
    /// Adherence window in edges consumed; `None` means half the replica's
    /// realized initial edges.
    pub window_edges: Option<u64>,
    pub index_cap: u64,
    pub init_pair_samples: usize,
    pub init_triple_samples: usize,
    pub tolerances: Tolerances,
    /// Rayon worker threads for the replica loop; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(n: usize, p: f64, k: KSpec, replicas: u64, master_seed: u64) -> Self {
        ExperimentConfig {
            n,
            p,
            k,
            replicas,
            master_seed,
            horizon: HorizonPolicy::Exhaustion,
            observe_y: true,
            tracked_edges: 64,
            paranoid: false,
            window_edges: None,
            index_cap: crate::cliques::DEFAULT_INDEX_CAP,
            init_pair_samples: 64,
            init_triple_samples: 64,
            tolerances: Tolerances::default(),
            jobs: None,
        }
    }

    /// Resolves k and the derived parameter bundle; collects regime warnings.
    pub fn resolve(&self) -> Result<(TheoryParams, Vec<String>)> {
        if self.replicas < 1 {
            return Err(Error::InvalidParameter("replicas must be >= 1".into()));
        }
        let params = match self.k {
            KSpec::Explicit(k) => TheoryParams::new(self.n as u64, self.p, k)?,
            KSpec::Offset(c) => TheoryParams::from_offset(self.n as u64, self.p, c)?,
        };
        let mut warnings = Vec::new();
        let log_base = (self.n as f64).ln() / (1.0 / self.p).ln();
        if (params.k as f64) < log_base {
            warnings.push(format!(
                "k = {} below log_(1/p) n = {log_base:.3}: outside the near-maximal family",
                params.k
            ));
        }
        if params.gamma <= 2.0 {
            warnings.push(format!(
                "gamma = {:.4} not above 2: trajectory guarantees do not apply",
                params.gamma
            ));
        }
        Ok((params, warnings))
    }
}

/// One replica's full output.
#[derive(Clone, Debug)]
pub struct ReplicaOutput {
    pub summary: ReplicaSummary,
    pub run: ProcessRun,
    pub schedule: TrajectorySchedule,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReplicaSummary {
    pub stream: u64,
    pub e0: u64,
    pub q0: u64,
    pub steps: u64,
    pub exhausted: bool,
    pub window_steps: u64,
    pub max_dev_q: Option<f64>,
    pub max_dev_y: Option<f64>,
    pub init: InitialChecksReport,
    pub stopping: StoppingReport,
    pub packing_ok: bool,
    pub packing_size: u64,
    pub final_clique_free: bool,
    /// Set when the schedule truncated before the trace end and band checks
    /// only cover the truncated prefix.
    pub bands_truncated: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdherenceStats {
    pub window_edges: Vec<u64>,
    pub window_steps: Vec<u64>,
    pub per_replica_max_dev_q: Vec<f64>,
    pub median_max_dev_q: f64,
    pub per_replica_max_dev_y: Vec<Option<f64>>,
    /// Fraction of replicas whose Q never left its band before m★.
    pub frac_q_within_bands_to_m_star: f64,
    /// Fraction of replicas whose tracked-pair Y never left its band before m★.
    pub frac_y_within_bands_to_m_star: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AggregateReport {
    pub library: String,
    pub config: ExperimentConfig,
    pub params: TheoryParams,
    pub warnings: Vec<String>,
    pub replicas: Vec<ReplicaSummary>,
    pub adherence: AdherenceStats,
    pub adherence_threshold: f64,
    pub adherence_pass: bool,
    pub init_pass_fraction: f64,
    pub median_steps: f64,
}

/// Everything `replicate` produces; the report is the serializable summary.
#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub report: AggregateReport,
    pub replicas: Vec<ReplicaOutput>,
}

fn median(sorted: &[f64]) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    }
}

fn run_one_replica(
    config: &ExperimentConfig,
    params: &TheoryParams,
    stream: u64,
) -> Result<ReplicaOutput> {
    let seed = Seed::new(config.master_seed, stream);
    let mut rng = seed.rng();
    let g0 = sample_gnp_rng(config.n, config.p, &mut rng)?;
    let e0 = g0.edge_count();

    let horizon = match config.horizon {
        HorizonPolicy::MStar => Some(params.m_star.unwrap_or(0)),
        HorizonPolicy::Exhaustion => None,
        HorizonPolicy::Fixed(h) => Some(h),
    };
    let opts = RunOptions {
        horizon,
        observe_y: config.observe_y,
        tracked_edges: config.tracked_edges,
        paranoid: config.paranoid,
        collect_overcount: false,
        index_cap: config.index_cap,
    };
    let run = run_removal_process(&g0, params.k, &opts, &mut rng)?;

    // trajectory from realized e0 with the expected clique count as Q0
    let ln_q0 = crate::theory::log_expected_cliques(params.n, params.k, params.p)?;
    if ln_q0 > 700.0 {
        return Err(Error::InvalidParameter(
            "expected clique count overflows f64; reduce n or raise k".into(),
        ));
    }
    let m_max = (run.trace.records.len() as u64).saturating_sub(1);
    let schedule = build_schedule(e0, params.k, ln_q0.exp(), params.n, params.delta, m_max)?;

    let init = initial_checks(
        &g0,
        params,
        config.tolerances.initial_check_slack,
        config.init_pair_samples,
        config.init_triple_samples,
        &mut rng,
    )?;

    // stopping detection over the schedule-covered prefix
    let bands_truncated = schedule.len() < run.trace.records.len();
    let stopping = if bands_truncated {
        let mut prefix = run.trace.clone();
        prefix.records.truncate(schedule.len());
        detect_stopping_times(&prefix, &schedule, params.m_star.unwrap_or(0), init.all_pass)?
    } else {
        detect_stopping_times(&run.trace, &schedule, params.m_star.unwrap_or(0), init.all_pass)?
    };

    // adherence over the window
    let b = params.k * (params.k - 1) / 2;
    let window_edges = config.window_edges.unwrap_or(e0 / 2);
    let window_steps = window_edges / b;
    let (max_dev_q, max_dev_y) = window_deviation(&run, &schedule, window_steps);

    let packing_check = verify_packing(&g0, &run.packing.cliques, params.k);
    let final_clique_free =
        crate::cliques::count_cliques(&run.final_graph, params.k as usize) == 0;

    let summary = ReplicaSummary {
        stream,
        e0,
        q0: run.trace.q0,
        steps: run.trace.steps,
        exhausted: run.trace.exhausted,
        window_steps,
        max_dev_q,
        max_dev_y,
        init,
        stopping,
        packing_ok: packing_check.pass,
        packing_size: run.packing.cliques.len() as u64,
        final_clique_free,
        bands_truncated,
    };
    Ok(ReplicaOutput {
        summary,
        run,
        schedule,
    })
}

/// Max relative deviations of Q (and tracked Y) from their trajectories over
/// steps m = 0..=window_steps, clipped to the recorded trace and schedule.
fn window_deviation(
    run: &ProcessRun,
    schedule: &TrajectorySchedule,
    window_steps: u64,
) -> (Option<f64>, Option<f64>) {
    let last = (run.trace.records.len() as u64)
        .min(schedule.len() as u64)
        .min(window_steps + 1);
    if last == 0 {
        return (None, None);
    }
    let mut dev_q = 0.0f64;
    let mut dev_y: Option<f64> = None;
    for rec in run.trace.records.iter().take(last as usize) {
        let m = rec.m as usize;
        let d = (rec.q as f64 / schedule.q_tilde[m] - 1.0).abs();
        dev_q = dev_q.max(d);
        if let Some(ty) = &rec.tracked_y {
            let yt = schedule.y_tilde[m];
            for &y in ty {
                let d = (y as f64 / yt - 1.0).abs();
                dev_y = Some(dev_y.unwrap_or(0.0).max(d));
            }
        }
    }
    (Some(dev_q), dev_y)
}

/// Adherence statistics over completed replicas.
pub fn adherence_stats(replicas: &[ReplicaOutput]) -> AdherenceStats {
    let mut per_q = Vec::new();
    let mut per_y = Vec::new();
    let mut window_edges = Vec::new();
    let mut window_steps = Vec::new();
    let mut q_ok = 0usize;
    let mut y_ok = 0usize;
    for r in replicas {
        per_q.push(r.summary.max_dev_q.unwrap_or(f64::NAN));
        per_y.push(r.summary.max_dev_y);
        window_steps.push(r.summary.window_steps);
        let k = r.run.trace.k;
        window_edges.push(r.summary.window_steps * k * (k - 1) / 2);
        let s = &r.summary.stopping;
        if !s.tau_q_plus_hit && !s.tau_q_minus_hit {
            q_ok += 1;
        }
        if !s.tau_y_plus_hit && !s.tau_y_minus_hit {
            y_ok += 1;
        }
    }
    let mut sorted = per_q.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("deviations are finite"));
    let total = replicas.len().max(1) as f64;
    AdherenceStats {
        window_edges,
        window_steps,
        median_max_dev_q: median(&sorted),
        per_replica_max_dev_q: per_q,
        per_replica_max_dev_y: per_y,
        frac_q_within_bands_to_m_star: q_ok as f64 / total,
        frac_y_within_bands_to_m_star: y_ok as f64 / total,
    }
}

/// Runs every replica (in parallel when configured) and aggregates.
/// The result is a pure function of the configuration.
pub fn replicate(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let (params, warnings) = config.resolve()?;

    let streams: Vec<u64> = (0..config.replicas).collect();
    let results: Vec<Result<ReplicaOutput>> = match config.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            pool.install(|| {
                streams
                    .par_iter()
                    .map(|&r| run_one_replica(config, &params, r))
                    .collect()
            })
        }
        None => streams
            .par_iter()
            .map(|&r| run_one_replica(config, &params, r))
            .collect(),
    };
    let mut replicas = Vec::with_capacity(results.len());
    for r in results {
        replicas.push(r?);
    }

    let adherence = adherence_stats(&replicas);
    let init_pass = replicas
        .iter()
        .filter(|r| r.summary.init.all_pass)
        .count() as f64
        / replicas.len().max(1) as f64;
    let mut steps: Vec<f64> = replicas.iter().map(|r| r.summary.steps as f64).collect();
    steps.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let report = AggregateReport {
        library: format!("cliquepack {}", env!("CARGO_PKG_VERSION")),
        config: config.clone(),
        params,
        warnings,
        replicas: replicas.iter().map(|r| r.summary.clone()).collect(),
        adherence_threshold: config.tolerances.adherence_median_max_dev,
        adherence_pass: adherence.median_max_dev_q
            <= config.tolerances.adherence_median_max_dev,
        adherence,
        init_pass_fraction: init_pass,
        median_steps: median(&steps),
    };
    Ok(ExperimentOutput { report, replicas })
}

/// Writes the aggregate JSON, per-replica JSONL traces, and the flat CSV
/// under `dir` with stable names. Byte-identical across repeat runs of the
/// same configuration.
pub fn write_outputs(output: &ExperimentOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let agg = serde_json::to_string_pretty(&output.report).map_err(std::io::Error::other)?;
    std::fs::write(dir.join("aggregate.json"), agg.as_bytes())?;

    let mut csv = String::from("seed,M,max_dev_Q,max_dev_Y,init_checks_passed\n");
    for r in &output.replicas {
        let s = &r.summary;
        let dq = s.max_dev_q.map(|v| v.to_string()).unwrap_or_default();
        let dy = s.max_dev_y.map(|v| v.to_string()).unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            s.stream, s.steps, dq, dy, s.init.all_pass
        ));
    }
    std::fs::write(dir.join("replicas.csv"), csv.as_bytes())?;

    for r in &output.replicas {
        let name = format!("trace_r{:04}.jsonl", r.summary.stream);
        let mut buf = Vec::new();
        crate::process::write_trace_jsonl(&r.run.trace, Some(&r.schedule), &mut buf)?;
        std::fs::write(dir.join(name), &buf)?;

        let name = format!("stopping_r{:04}.json", r.summary.stream);
        let body = serde_json::to_string_pretty(&r.summary.stopping)
            .map_err(std::io::Error::other)?;
        std::fs::write(dir.join(name), body.as_bytes())?;

        let name = format!("packing_r{:04}.txt", r.summary.stream);
        let mut buf = Vec::new();
        r.run.packing.write_text(&mut buf)?;
        std::fs::write(dir.join(name), &buf)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Overlap Monte Carlo
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ZetaEstimate {
    pub n: u64,
    pub k: u64,
    pub t: u64,
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub stderr: f64,
}

/// Proportion of trials in which `t` independent uniform k-subsets of an
/// n-set are pairwise edge-disjoint, with its binomial standard error.
pub fn zeta_monte_carlo(n: u64, k: u64, t: u64, trials: u64, seed: Seed) -> Result<ZetaEstimate> {
    if k > n || k == 0 {
        return Err(Error::InvalidParameter(format!("k={k} outside 1..={n}")));
    }
    if t < 1 || trials < 1 {
        return Err(Error::InvalidParameter(
            "need t >= 1 and trials >= 1".into(),
        ));
    }
    let mut rng = seed.rng();
    let mut successes = 0u64;
    let mut edges: HashSet<(u32, u32)> = HashSet::new();
    let mut verts: Vec<u32> = Vec::with_capacity(k as usize);
    for _ in 0..trials {
        edges.clear();
        let mut ok = true;
        'cliques: for _ in 0..t {
            verts.clear();
            verts.extend(
                rand::seq::index::sample(&mut rng, n as usize, k as usize)
                    .into_iter()
                    .map(|v| v as u32),
            );
            for i in 0..verts.len() {
                for j in (i + 1)..verts.len() {
                    let (a, b) = (verts[i].min(verts[j]), verts[i].max(verts[j]));
                    if !edges.insert((a, b)) {
                        ok = false;
                        break 'cliques;
                    }
                }
            }
        }
        if ok {
            successes += 1;
        }
    }
    let estimate = successes as f64 / trials as f64;
    let stderr = (estimate * (1.0 - estimate) / trials as f64).sqrt();
    Ok(ZetaEstimate {
        n,
        k,
        t,
        trials,
        successes,
        estimate,
        stderr,
    })
}

/// CSV for a t-sweep: `t,estimate,stderr,ln_estimate,heuristic_ln` per row.
/// The last column is the -t^2 k^4 / (4 n^2) curve (the quarter-exponent
/// independence heuristic), reported for comparison, never asserted.
pub fn zeta_sweep_csv<W: Write>(
    n: u64,
    k: u64,
    t_max: u64,
    trials: u64,
    seed: Seed,
    mut w: W,
) -> Result<Vec<ZetaEstimate>> {
    writeln!(w, "t,estimate,stderr,ln_estimate,heuristic_ln")?;
    let mut out = Vec::new();
    for t in 1..=t_max {
        let est = zeta_monte_carlo(n, k, t, trials, Seed::new(seed.master, seed.stream + t))?;
        let heuristic =
            -0.25 * (t as f64) * (t as f64) * (k as f64).powi(4) / ((n * n) as f64);
        writeln!(
            w,
            "{},{},{},{},{}",
            t,
            est.estimate,
            est.stderr,
            est.estimate.ln(),
            heuristic
        )?;
        out.push(est);
    }
    Ok(out)
}
