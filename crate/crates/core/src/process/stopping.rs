//! Stopping-time detection against the trajectory envelopes, and the
//! initial-state checks that gate them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cliques;
use crate::error::{Error, Result};
use crate::graph::GraphState;
use crate::process::ProcessTrace;
use crate::theory::schedule::TrajectorySchedule;
use crate::theory::{self, TheoryParams};

/// First steps at which tracked quantities leave their allowed envelopes,
/// each capped at the horizon m★. A value equal to `m_star` with the
/// matching `_hit` flag false means "never within the horizon".
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StoppingReport {
    pub m_star: u64,
    /// m★ = 0: the guarantee window is empty at these parameters and every
    /// capped stopping time is 0.
    pub degenerate_horizon: bool,
    pub initial_ok: bool,
    /// Steps actually compared: min(m_star, recorded steps).
    pub horizon_evaluated: u64,
    /// Whether per-edge Y observations were available in the trace.
    pub y_observed: bool,
    pub tau_q_plus: u64,
    pub tau_q_plus_hit: bool,
    pub tau_q_minus: u64,
    pub tau_q_minus_hit: bool,
    pub tau_y_plus: u64,
    pub tau_y_plus_hit: bool,
    pub tau_y_minus: u64,
    pub tau_y_minus_hit: bool,
    /// 0 when the initial checks failed, otherwise the minimum of the four
    /// component times.
    pub tau: u64,
    pub first_violating_edge: Option<(u32, u32)>,
}

/// Scans a recorded trace against a schedule. `m_star` caps every stopping
/// time; `initial_ok` is the outcome of the initial-state checks.
pub fn detect_stopping_times(
    trace: &ProcessTrace,
    schedule: &TrajectorySchedule,
    m_star: u64,
    initial_ok: bool,
) -> Result<StoppingReport> {
    if schedule.len() < trace.records.len() {
        return Err(Error::ScheduleTooShort {
            schedule_len: schedule.len(),
            trace_len: trace.records.len(),
        });
    }
    if schedule.k != trace.k || schedule.e0 != trace.e0 {
        return Err(Error::ParameterMismatch(format!(
            "schedule (k={}, e0={}) vs trace (k={}, e0={})",
            schedule.k, schedule.e0, trace.k, trace.e0
        )));
    }

    let horizon = m_star.min(trace.records.len() as u64);
    let mut tau_q_plus = (m_star, false);
    let mut tau_q_minus = (m_star, false);
    let mut tau_y_plus = (m_star, false);
    let mut tau_y_minus = (m_star, false);
    let mut first_edge: Option<(u32, u32)> = None;
    let mut y_observed = false;

    for rec in trace.records.iter().take(horizon as usize) {
        let m = rec.m as usize;
        let q = rec.q as f64;
        let qt = schedule.q_tilde[m];
        let gq = schedule.g_q[m];
        if !tau_q_plus.1 && q > (1.0 + gq) * qt {
            tau_q_plus = (rec.m, true);
        }
        if !tau_q_minus.1 && q < (1.0 - gq) * qt {
            tau_q_minus = (rec.m, true);
        }
        if let Some(ty) = &rec.tracked_y {
            y_observed = true;
            let yt = schedule.y_tilde[m];
            let gy = schedule.g_y[m];
            for (i, &y) in ty.iter().enumerate() {
                let y = y as f64;
                if !tau_y_plus.1 && y > (1.0 + gy) * yt {
                    tau_y_plus = (rec.m, true);
                    if first_edge.is_none() {
                        first_edge = Some(trace.tracked_edges[i]);
                    }
                }
                if !tau_y_minus.1 && y < (1.0 - gy) * yt {
                    tau_y_minus = (rec.m, true);
                    if first_edge.is_none() {
                        first_edge = Some(trace.tracked_edges[i]);
                    }
                }
            }
        }
    }

    let tau = if !initial_ok {
        0
    } else {
        tau_q_plus
            .0
            .min(tau_q_minus.0)
            .min(tau_y_plus.0)
            .min(tau_y_minus.0)
    };

    Ok(StoppingReport {
        m_star,
        degenerate_horizon: m_star == 0,
        initial_ok,
        horizon_evaluated: horizon,
        y_observed,
        tau_q_plus: tau_q_plus.0,
        tau_q_plus_hit: tau_q_plus.1,
        tau_q_minus: tau_q_minus.0,
        tau_q_minus_hit: tau_q_minus.1,
        tau_y_plus: tau_y_plus.0,
        tau_y_plus_hit: tau_y_plus.1,
        tau_y_minus: tau_y_minus.0,
        tau_y_minus_hit: tau_y_minus.1,
        tau,
        first_violating_edge: first_edge,
    })
}

// ---------------------------------------------------------------------------
// Initial-state checks
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckItem {
    pub name: String,
    pub observed: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InitialChecksReport {
    /// Set when the parameters degenerate (p at 0 or 1): no items evaluated.
    pub skipped: bool,
    pub skip_reason: Option<String>,
    pub items: Vec<CheckItem>,
    pub all_pass: bool,
}

/// Checks the initial graph against its predicted statistics:
/// (1) edge count within n^{3/2} of p C(n,2),
/// (2) clique count within a n^{-delta*slack} relative band of its mean,
/// (3) sampled-pair Y within the same band of the predicted per-edge value,
/// (4) sampled-triple Y below n^{delta*slack} max(1, E\[Y_S\]).
///
/// Pair and triple samples are drawn from the caller's rng; exhaustive
/// scans of all C(n,2) pairs are the caller's job at small n.
pub fn initial_checks<R: Rng>(
    g0: &GraphState,
    params: &TheoryParams,
    exponent_slack: f64,
    pair_samples: usize,
    triple_samples: usize,
    rng: &mut R,
) -> Result<InitialChecksReport> {
    let n = g0.n() as u64;
    if n != params.n {
        return Err(Error::ParameterMismatch(format!(
            "graph has n={n}, params have n={}",
            params.n
        )));
    }
    if params.p <= 0.0 || params.p >= 1.0 {
        return Ok(InitialChecksReport {
            skipped: true,
            skip_reason: Some(format!(
                "edge probability {} degenerate; bands are vacuous",
                params.p
            )),
            items: Vec::new(),
            all_pass: true,
        });
    }
    let k = params.k;
    let nf = n as f64;
    let band = (-params.delta * exponent_slack * nf.ln()).exp();
    let mut items = Vec::new();

    // (1) edge count around its mean
    let e0 = g0.edge_count() as f64;
    items.push(CheckItem {
        name: "edge_count_abs_dev".into(),
        observed: (e0 - params.e0_nominal).abs(),
        bound: nf.powf(1.5),
        pass: (e0 - params.e0_nominal).abs() <= nf.powf(1.5),
    });

    // (2) clique count around its mean
    let q0 = cliques::count_cliques(g0, k as usize);
    let ln_q_mean = theory::log_expected_cliques(n, k, params.p)?;
    let ratio_dev = if q0 == 0 {
        1.0
    } else {
        ((q0 as f64).ln() - ln_q_mean).exp() - 1.0
    };
    items.push(CheckItem {
        name: "clique_count_rel_dev".into(),
        observed: ratio_dev.abs(),
        bound: band,
        pass: ratio_dev.abs() <= band,
    });

    // (3) per-pair Y around the predicted per-edge value, over a sample
    let b = k * (k - 1) / 2;
    let y_pred = b as f64 * ln_q_mean.exp() / e0;
    let mut max_dev = 0.0f64;
    let pairs = super::sample_tracked_pairs(g0.n(), pair_samples, rng);
    for &pair in &pairs {
        let y = cliques::y_edge(g0, k as usize, pair) as f64;
        let dev = (y / y_pred - 1.0).abs();
        max_dev = max_dev.max(dev);
    }
    items.push(CheckItem {
        name: "sampled_y_edge_rel_dev_max".into(),
        observed: max_dev,
        bound: band,
        pass: max_dev <= band,
    });

    // (4) triple counts below the rough upper envelope
    let ln_ys_mean = theory::expected_y(n, k, params.p, 3.min(k))?;
    let cap = (params.delta * exponent_slack * nf.ln()).exp() * ln_ys_mean.exp().max(1.0);
    let mut max_ys = 0u64;
    let triple_samples = if n < 3 { 0 } else { triple_samples };
    for _ in 0..triple_samples {
        let mut s = [0u32; 3];
        s[0] = rng.random_range(0..n as u32);
        s[1] = loop {
            let x = rng.random_range(0..n as u32);
            if x != s[0] {
                break x;
            }
        };
        s[2] = loop {
            let x = rng.random_range(0..n as u32);
            if x != s[0] && x != s[1] {
                break x;
            }
        };
        max_ys = max_ys.max(cliques::y_set(g0, k as usize, s));
    }
    items.push(CheckItem {
        name: "sampled_y_triple_max".into(),
        observed: max_ys as f64,
        bound: cap,
        pass: (max_ys as f64) <= cap,
    });

    let all_pass = items.iter().all(|i| i.pass);
    Ok(InitialChecksReport {
        skipped: false,
        skip_reason: None,
        items,
        all_pass,
    })
}
