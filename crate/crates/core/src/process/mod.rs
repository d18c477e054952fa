//! The k-clique removal process driver.
//!
//! Each step draws a uniformly random live k-clique, retires its C(k, 2)
//! edges, and cascades the kill to every clique sharing an edge with it.
//! The driver records per-step observations, runs to a horizon or to
//! exhaustion, and extracts the removed cliques as an edge-disjoint packing.

mod stopping;

pub use stopping::{
    detect_stopping_times, initial_checks, CheckItem, InitialChecksReport, StoppingReport,
};

use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cliques::{self, Clique, CliqueIndex, DEFAULT_INDEX_CAP};
use crate::error::{Error, Result};
use crate::graph::GraphState;
use crate::theory::schedule::TrajectorySchedule;

/// Per-step observation knobs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunOptions {
    /// Maximum number of removal steps; `None` runs to exhaustion.
    pub horizon: Option<u64>,
    /// Record Y statistics (min/max/mean over current edges plus the
    /// tracked-pair sample) at every step.
    pub observe_y: bool,
    /// Size of the fixed tracked-pair sample used for per-edge band checks.
    pub tracked_edges: usize,
    /// Recount Q and every current edge's Y from scratch after each step.
    pub paranoid: bool,
    /// Record the per-step overcount bounds (needs small graphs: each step
    /// computes Y over all C(k,3) triples of the removed clique).
    pub collect_overcount: bool,
    /// Reference guard for the clique index.
    pub index_cap: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            horizon: None,
            observe_y: true,
            tracked_edges: 64,
            paranoid: false,
            collect_overcount: false,
            index_cap: DEFAULT_INDEX_CAP,
        }
    }
}

/// Exact per-step destruction bounds derived from the pre-removal counts.
///
/// With S ranging over the removed clique's triples and e over its edges:
/// destroyed <= sum_e Y_e always, and destroyed >= sum_e Y_e - 3 sum_S Y_S
/// always (a clique overlapping in i >= 2 vertices is counted C(i,2) times
/// by the edge sum and C(i,3) times by the triple sum, and
/// C(i,2) - 3 C(i,3) <= 1 for every i >= 2). The unscaled difference
/// sum_e Y_e - sum_S Y_S is NOT a valid lower bound; it is retained as a
/// reported curiosity because triple overlaps routinely push it above the
/// true destruction count.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OvercountRecord {
    pub destroyed: u64,
    pub sum_y_over_clique_edges: u64,
    pub sum_y_over_clique_triples: u64,
}

impl OvercountRecord {
    pub fn upper_bound_holds(&self) -> bool {
        self.destroyed <= self.sum_y_over_clique_edges
    }

    pub fn lower_bound_holds(&self) -> bool {
        let floor = self
            .sum_y_over_clique_edges
            .saturating_sub(3 * self.sum_y_over_clique_triples);
        self.destroyed >= floor
    }

    /// The one-sided difference sum_e Y_e - sum_S Y_S; frequently exceeds
    /// `destroyed`, so this is diagnostic only.
    pub fn unscaled_lower_bound_holds(&self) -> bool {
        let floor = self
            .sum_y_over_clique_edges
            .saturating_sub(self.sum_y_over_clique_triples);
        self.destroyed >= floor
    }
}

/// State observed at step m (before the removal), plus the removal acted at
/// this step. The final record of a trace carries no removal.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepRecord {
    pub m: u64,
    /// Current edge count; always e0 - m C(k,2).
    pub e: u64,
    /// Live clique count Q.
    pub q: u64,
    pub y_min: Option<u64>,
    pub y_max: Option<u64>,
    /// Mean Y over current edges: C(k,2) Q / e.
    pub y_bar: Option<f64>,
    /// Sum of Y_e over current edges; equals C(k,2) Q exactly.
    pub y_sum: Option<u64>,
    /// Y values of the tracked pairs, aligned with `ProcessTrace::tracked_edges`.
    pub tracked_y: Option<Vec<u64>>,
    pub removed: Option<Clique>,
    pub destroyed: u64,
    pub overcount: Option<OvercountRecord>,
}

/// Full per-step history of one run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProcessTrace {
    pub n: usize,
    pub k: u64,
    pub e0: u64,
    pub q0: u64,
    pub tracked_edges: Vec<(u32, u32)>,
    /// records\[m\] for m = 0..=steps; the last record has no removal.
    pub records: Vec<StepRecord>,
    /// Number of removal steps performed (M).
    pub steps: u64,
    /// True when the run ended with no k-clique left.
    pub exhausted: bool,
}

/// The removed cliques, in removal order: pairwise edge-disjoint by
/// construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PackingResult {
    pub k: u64,
    pub cliques: Vec<Clique>,
}

impl PackingResult {
    /// One line per clique: k sorted vertex ids separated by spaces.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        for c in &self.cliques {
            writeln!(w, "{c}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut cliques = Vec::new();
        let mut k: Option<u64> = None;
        for (idx, line) in r.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let mut verts = Vec::new();
            for tok in trimmed.split_whitespace() {
                let v: u32 = tok.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("cannot parse `{tok}` as a vertex id"),
                })?;
                verts.push(v);
            }
            let c = Clique::from_vertices(verts).map_err(|e| Error::Parse {
                line: lineno,
                msg: e.to_string(),
            })?;
            match k {
                None => k = Some(c.len() as u64),
                Some(k) if k as usize != c.len() => {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("expected {k} vertices, found {}", c.len()),
                    });
                }
                _ => {}
            }
            cliques.push(c);
        }
        Ok(PackingResult {
            k: k.unwrap_or(0),
            cliques,
        })
    }
}

/// Everything produced by one run.
#[derive(Clone, Debug)]
pub struct ProcessRun {
    pub trace: ProcessTrace,
    pub final_graph: GraphState,
    pub packing: PackingResult,
}

fn sample_tracked_pairs<R: Rng>(n: usize, count: usize, rng: &mut R) -> Vec<(u32, u32)> {
    let total = crate::graph::pair_count(n);
    let count = count.min(total as usize);
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = rng.random_range(0..n as u32);
        let v = rng.random_range(0..n as u32);
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if seen.insert(key) {
            out.push(key);
        }
    }
    out
}

/// Runs the removal process from `g0`. Each step draws the clique uniformly
/// among live cliques; the trace records the pre-step state at every step
/// plus a terminal record of the final state. Deterministic for a fixed rng.
pub fn run_removal_process<R: Rng>(
    g0: &GraphState,
    k: u64,
    opts: &RunOptions,
    rng: &mut R,
) -> Result<ProcessRun> {
    let b = k * (k - 1) / 2;
    let mut index = CliqueIndex::build(g0, k as usize, opts.index_cap)?;
    let e0 = g0.edge_count();
    let q0 = index.live_count();
    // Drawn unconditionally so the clique draw stream does not depend on
    // whether observation is enabled.
    let tracked = sample_tracked_pairs(g0.n(), opts.tracked_edges, rng);

    let mut g = g0.clone();
    let mut records: Vec<StepRecord> = Vec::new();
    let mut removed_cliques: Vec<Clique> = Vec::new();
    let mut m = 0u64;
    loop {
        let q = index.live_count();
        let e = g.edge_count();
        debug_assert_eq!(e, e0 - m * b);

        let (y_min, y_max, y_bar, y_sum, tracked_y) = if opts.observe_y {
            let mut min = u64::MAX;
            let mut max = 0u64;
            let mut sum = 0u64;
            g.for_each_edge(|u, v| {
                let y = index.y_edge_live((u, v));
                min = min.min(y);
                max = max.max(y);
                sum += y;
            });
            debug_assert_eq!(sum, b * q);
            let ty: Vec<u64> = tracked
                .iter()
                .map(|&pair| cliques::y_edge(&g, k as usize, pair))
                .collect();
            if e == 0 {
                (None, None, None, Some(0), Some(ty))
            } else {
                (
                    Some(min),
                    Some(max),
                    Some((b * q) as f64 / e as f64),
                    Some(sum),
                    Some(ty),
                )
            }
        } else {
            (None, None, None, None, None)
        };

        let done = q == 0 || opts.horizon.is_some_and(|h| m >= h);
        if done {
            records.push(StepRecord {
                m,
                e,
                q,
                y_min,
                y_max,
                y_bar,
                y_sum,
                tracked_y,
                removed: None,
                destroyed: 0,
                overcount: None,
            });
            break;
        }

        let id = index.sample_live(rng).expect("live count positive");
        let removed = Clique::from_sorted_unchecked(index.clique_vertices(id).to_vec());

        let overcount_pre = if opts.collect_overcount {
            let sum_ye: u64 = removed
                .edges()
                .iter()
                .map(|&e| index.y_edge_live(e))
                .sum();
            let vs = removed.vertices();
            let mut sum_ys = 0u64;
            for a in 0..vs.len() {
                for bb in (a + 1)..vs.len() {
                    for c in (bb + 1)..vs.len() {
                        sum_ys += cliques::y_set(&g, k as usize, [vs[a], vs[bb], vs[c]]);
                    }
                }
            }
            Some((sum_ye, sum_ys))
        } else {
            None
        };

        let report = index.remove_clique(id)?;
        g.remove_edges(&report.removed_edges)?;

        if opts.paranoid {
            if let Err(detail) = index.recount_check(&g) {
                return Err(Error::ParanoidMismatch { step: m, detail });
            }
        }

        let overcount = overcount_pre.map(|(sum_ye, sum_ys)| OvercountRecord {
            destroyed: report.destroyed,
            sum_y_over_clique_edges: sum_ye,
            sum_y_over_clique_triples: sum_ys,
        });

        removed_cliques.push(removed.clone());
        records.push(StepRecord {
            m,
            e,
            q,
            y_min,
            y_max,
            y_bar,
            y_sum,
            tracked_y,
            removed: Some(removed),
            destroyed: report.destroyed,
            overcount,
        });
        m += 1;
    }

    let exhausted = index.live_count() == 0;
    Ok(ProcessRun {
        trace: ProcessTrace {
            n: g0.n(),
            k,
            e0,
            q0,
            tracked_edges: tracked,
            records,
            steps: m,
            exhausted,
        },
        final_graph: g,
        packing: PackingResult {
            k,
            cliques: removed_cliques,
        },
    })
}

/// Runs until no k-clique remains and returns the packing with its trace.
pub fn run_to_exhaustion<R: Rng>(
    g0: &GraphState,
    k: u64,
    opts: &RunOptions,
    rng: &mut R,
) -> Result<ProcessRun> {
    let mut opts = opts.clone();
    opts.horizon = None;
    run_removal_process(g0, k, &opts, rng)
}

// ---------------------------------------------------------------------------
// Packing verification
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PackingViolation {
    WrongSize {
        index: usize,
        got: usize,
        want: u64,
    },
    VertexOutOfRange {
        index: usize,
        vertex: u32,
    },
    /// A clique pair is not an edge of the host graph.
    MissingEdge {
        index: usize,
        u: u32,
        v: u32,
    },
    /// An edge appears in two cliques.
    SharedEdge {
        first: usize,
        second: usize,
        u: u32,
        v: u32,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PackingCheck {
    pub pass: bool,
    pub cliques: usize,
    pub edges_used: u64,
    pub violation: Option<PackingViolation>,
}

/// Confirms each clique has k vertices, is complete in `g0`, and that no
/// edge appears twice. Returns the first violation found.
pub fn verify_packing(g0: &GraphState, packing: &[Clique], k: u64) -> PackingCheck {
    let mut used: std::collections::HashMap<(u32, u32), usize> = std::collections::HashMap::new();
    for (idx, c) in packing.iter().enumerate() {
        if c.len() as u64 != k {
            return fail(
                packing,
                PackingViolation::WrongSize {
                    index: idx,
                    got: c.len(),
                    want: k,
                },
            );
        }
        for &v in c.vertices() {
            if v as usize >= g0.n() {
                return fail(packing, PackingViolation::VertexOutOfRange { index: idx, vertex: v });
            }
        }
        for (u, v) in c.edges() {
            if !g0.has_edge(u, v) {
                return fail(packing, PackingViolation::MissingEdge { index: idx, u, v });
            }
            if let Some(&first) = used.get(&(u, v)) {
                return fail(
                    packing,
                    PackingViolation::SharedEdge {
                        first,
                        second: idx,
                        u,
                        v,
                    },
                );
            }
            used.insert((u, v), idx);
        }
    }
    PackingCheck {
        pass: true,
        cliques: packing.len(),
        edges_used: used.len() as u64,
        violation: None,
    }
}

fn fail(packing: &[Clique], violation: PackingViolation) -> PackingCheck {
    PackingCheck {
        pass: false,
        cliques: packing.len(),
        edges_used: 0,
        violation: Some(violation),
    }
}

// ---------------------------------------------------------------------------
// Trace serialization
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TraceLine<'a> {
    m: u64,
    e: u64,
    #[serde(rename = "Q")]
    q: u64,
    #[serde(rename = "Qtilde")]
    q_tilde: Option<f64>,
    #[serde(rename = "gQ")]
    g_q: Option<f64>,
    #[serde(rename = "Ymin")]
    y_min: Option<u64>,
    #[serde(rename = "Ymax")]
    y_max: Option<u64>,
    #[serde(rename = "Ybar")]
    y_bar: Option<f64>,
    #[serde(rename = "Ytilde")]
    y_tilde: Option<f64>,
    #[serde(rename = "gY")]
    g_y: Option<f64>,
    destroyed: u64,
    removed_vertices: &'a [u32],
}

/// Streams the trace as JSONL, one record per line, with the schedule's
/// predicted values interleaved where the schedule covers the step.
pub fn write_trace_jsonl<W: Write>(
    trace: &ProcessTrace,
    schedule: Option<&TrajectorySchedule>,
    mut w: W,
) -> Result<()> {
    for rec in &trace.records {
        let at = |xs: &[f64]| xs.get(rec.m as usize).copied();
        let (q_tilde, g_q, y_tilde, g_y) = match schedule {
            Some(s) => (at(&s.q_tilde), at(&s.g_q), at(&s.y_tilde), at(&s.g_y)),
            None => (None, None, None, None),
        };
        let line = TraceLine {
            m: rec.m,
            e: rec.e,
            q: rec.q,
            q_tilde,
            g_q,
            y_min: rec.y_min,
            y_max: rec.y_max,
            y_bar: rec.y_bar,
            y_tilde,
            g_y,
            destroyed: rec.destroyed,
            removed_vertices: rec.removed.as_ref().map(|c| c.vertices()).unwrap_or(&[]),
        };
        serde_json::to_writer(&mut w, &line).map_err(std::io::Error::other)?;
        writeln!(w)?;
    }
    Ok(())
}
