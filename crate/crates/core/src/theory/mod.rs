//! Closed-form evaluation, in the natural-log domain, of every analytic
//! quantity governing the removal process: expected clique counts, the
//! near-maximal size threshold, trajectory horizons, overlap probabilities,
//! first-moment bound machinery, and the diagnostic term sequences.
//!
//! Conventions: all logarithms are natural. Asymptotic o(1) terms are
//! dropped from computed bounds and every report that does so says so;
//! relaxed exponents standing in for n^{o(1)} slacks are the named
//! constants below.

pub mod schedule;

use num::bigint::BigInt;
use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Band accepted for the consecutive-expectation ratios (an n^{o(1)} slack).
pub const RATIO_BAND: (f64, f64) = (0.8, 1.2);
/// Exponent slack accepted in the middle-term peak bound (n^{o(1)} stand-in).
pub const PEAK_SLACK_EXPONENT: f64 = 0.5;
/// Values above this are reported as the infinity sentinel.
pub const DIVERGENCE_CAP: f64 = 1e300;

#[inline]
pub(crate) fn choose2(k: u64) -> u64 {
    k * k.saturating_sub(1) / 2
}

/// ln C(n, k) by direct summation; NEG_INFINITY when k > n.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    let mut acc = 0.0f64;
    for i in 0..k {
        acc += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    acc
}

/// ln k!
pub fn ln_factorial(k: u64) -> f64 {
    let mut acc = 0.0f64;
    for i in 2..=k {
        acc += (i as f64).ln();
    }
    acc
}

fn require_open_unit(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "probability {p} outside the open interval (0, 1)"
        )));
    }
    Ok(())
}

/// ln of the expected k-clique count C(n, k) p^C(k,2).
pub fn log_expected_cliques(n: u64, k: u64, p: f64) -> Result<f64> {
    require_open_unit(p)?;
    if k > n {
        return Err(Error::InvalidParameter(format!("k={k} exceeds n={n}")));
    }
    Ok(ln_choose(n, k) + choose2(k) as f64 * p.ln())
}

/// Least k whose expected clique count drops below one.
pub fn find_k0(n: u64, p: f64) -> Result<u64> {
    require_open_unit(p)?;
    if n < 2 {
        return Err(Error::InvalidParameter("n must be at least 2".into()));
    }
    let mut k = 1u64;
    loop {
        if log_expected_cliques(n, k, p)? < 0.0 {
            return Ok(k);
        }
        k += 1;
        if k > n {
            // p^C(n,2) < 1 for p < 1, so this cannot happen
            return Err(Error::InvalidParameter(
                "no k with expected count below one".into(),
            ));
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GammaDelta {
    pub gamma: f64,
    pub delta: f64,
    /// Set when gamma < 2: delta is negative and the trajectory guarantees
    /// do not apply.
    pub out_of_regime: bool,
}

/// gamma = ln E / ln n and delta = min(gamma - 2, 1) / 10.
pub fn gamma_delta(n: u64, k: u64, p: f64) -> Result<GammaDelta> {
    if n < 2 {
        return Err(Error::InvalidParameter("n must be at least 2".into()));
    }
    let gamma = log_expected_cliques(n, k, p)? / (n as f64).ln();
    let delta = (gamma - 2.0).min(1.0) / 10.0;
    Ok(GammaDelta {
        gamma,
        delta,
        out_of_regime: gamma < 2.0,
    })
}

/// Step horizon m★ = min{ floor(delta p n^2 ln n / (4 k^4)), floor(p n^2 / (2 k^2)) }.
pub fn m_star(n: u64, p: f64, k: u64, delta: f64) -> Result<u64> {
    if delta < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "negative delta {delta} (out-of-regime parameters)"
        )));
    }
    let nf = n as f64;
    let kf = k as f64;
    let first = delta * p * nf * nf * nf.ln() / (4.0 * kf.powi(4));
    let second = p * nf * nf / (2.0 * kf * kf);
    Ok((first.floor() as u64).min(second.floor() as u64))
}

/// The resolved parameter bundle for one (n, p, k) configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoryParams {
    pub n: u64,
    pub p: f64,
    pub k: u64,
    pub k0: u64,
    pub gamma: f64,
    pub delta: f64,
    /// None when gamma < 2 (delta negative, horizon undefined).
    pub m_star: Option<u64>,
    /// p * C(n, 2), the nominal initial edge count.
    pub e0_nominal: f64,
    pub out_of_regime: bool,
}

impl TheoryParams {
    pub fn new(n: u64, p: f64, k: u64) -> Result<Self> {
        if k < 1 || k > n {
            return Err(Error::InvalidParameter(format!(
                "k={k} outside 1..={n}"
            )));
        }
        let k0 = find_k0(n, p)?;
        let gd = gamma_delta(n, k, p)?;
        let m_star_val = if gd.delta >= 0.0 {
            Some(m_star(n, p, k, gd.delta)?)
        } else {
            None
        };
        Ok(TheoryParams {
            n,
            p,
            k,
            k0,
            gamma: gd.gamma,
            delta: gd.delta,
            m_star: m_star_val,
            e0_nominal: p * (n as f64) * (n as f64 - 1.0) / 2.0,
            out_of_regime: gd.out_of_regime,
        })
    }

    /// Resolves k from a near-maximality offset: k = k0 - c.
    pub fn from_offset(n: u64, p: f64, c: u64) -> Result<Self> {
        let k0 = find_k0(n, p)?;
        if c >= k0 {
            return Err(Error::InvalidParameter(format!(
                "offset {c} >= k0 = {k0}"
            )));
        }
        Self::new(n, p, k0 - c)
    }
}

/// Heuristic duration estimates: the closed-form guess and the trajectory scan.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HeuristicDuration {
    /// 2 (gamma - 2) p n^2 ln n / k^4.
    pub m_conj: f64,
    /// First m with the predicted clique count at or below n^2, scanning the
    /// trajectory with nominal inputs.
    pub m_traj: u64,
    /// Set when the scan stopped early (trajectory bracket hit zero or the
    /// iteration cap was reached) — `m_traj` is then a lower bound.
    pub truncated: bool,
}

pub fn heuristic_duration(n: u64, p: f64, k: u64) -> Result<HeuristicDuration> {
    let gd = gamma_delta(n, k, p)?;
    if gd.gamma <= 2.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma = {} is not above 2",
            gd.gamma
        )));
    }
    let nf = n as f64;
    let kf = k as f64;
    let m_conj = 2.0 * (gd.gamma - 2.0) * p * nf * nf * nf.ln() / kf.powi(4);

    let e0 = p * nf * (nf - 1.0) / 2.0;
    let b = choose2(k) as f64;
    let target = 2.0 * nf.ln();
    let mut ln_q = log_expected_cliques(n, k, p)?;
    let mut m = 0u64;
    const ITER_CAP: u64 = 200_000_000;
    let mut truncated = false;
    while ln_q > target {
        let e_m = e0 - m as f64 * b;
        let factor = 1.0 - b * b / e_m;
        if factor <= 0.0 || m >= ITER_CAP {
            truncated = true;
            break;
        }
        ln_q += factor.ln();
        m += 1;
    }
    Ok(HeuristicDuration {
        m_conj,
        m_traj: m,
        truncated,
    })
}

// ---------------------------------------------------------------------------
// Overlap probabilities
// ---------------------------------------------------------------------------

fn big_binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= BigInt::from(n - i);
        acc /= BigInt::from(i + 1);
    }
    acc
}

/// Natural log of a positive big integer, accurate to ~1e-15 relative.
fn ln_big(x: &BigInt) -> f64 {
    assert!(x.is_positive(), "ln of non-positive integer");
    let bits = x.bits();
    if bits <= 1000 {
        return num::ToPrimitive::to_f64(x).unwrap().ln();
    }
    let shift = bits - 64;
    let top: BigInt = x >> shift;
    num::ToPrimitive::to_f64(&top).unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Probability that two independent uniform k-subsets of an n-set share at
/// most one vertex: [C(n-k, k) + k C(n-k, k-1)] / C(n, k), exactly.
#[derive(Clone, Debug)]
pub struct Zeta2 {
    pub numerator: BigInt,
    pub denominator: BigInt,
}

impl Zeta2 {
    pub fn value(&self) -> f64 {
        if self.numerator.is_zero() {
            return 0.0;
        }
        (ln_big(&self.numerator) - ln_big(&self.denominator)).exp()
    }
}

pub fn exact_zeta2(n: u64, k: u64) -> Result<Zeta2> {
    if k > n || k == 0 {
        return Err(Error::InvalidParameter(format!("k={k} outside 1..={n}")));
    }
    let numerator = big_binomial(n - k, k) + BigInt::from(k) * big_binomial(n - k, k - 1);
    let denominator = big_binomial(n, k);
    Ok(Zeta2 {
        numerator,
        denominator,
    })
}

/// Asymptotic probability k^4 / (2 n^2) that two uniform k-subsets share at
/// least two vertices.
pub fn overlap_asymptotic(n: u64, k: u64) -> f64 {
    let kf = k as f64;
    let nf = n as f64;
    kf.powi(4) / (2.0 * nf * nf)
}

// ---------------------------------------------------------------------------
// Upper-bound machinery
// ---------------------------------------------------------------------------

/// t0 = 5 (gamma - 2) / (1 - p) * p n^2 ln n / k^4. Reports the infinity
/// sentinel when the value exceeds the divergence cap.
pub fn t0_threshold(n: u64, p: f64, k: u64, gamma: f64) -> Result<f64> {
    if p >= 1.0 || p <= 0.0 {
        return Err(Error::InvalidParameter(format!("p={p} outside (0, 1)")));
    }
    if gamma < 2.0 {
        return Err(Error::InvalidParameter(format!("gamma={gamma} below 2")));
    }
    let nf = n as f64;
    let kf = k as f64;
    let val = 5.0 * (gamma - 2.0) / (1.0 - p) * p * nf * nf * nf.ln() / kf.powi(4);
    if !val.is_finite() || val > DIVERGENCE_CAP {
        return Ok(f64::INFINITY);
    }
    Ok(val)
}

/// t = (gamma - 2)(4 + eps) / (1 + (4 beta - 1) p) * p n^2 ln n / k^4.
pub fn upper_bound_t(n: u64, p: f64, k: u64, beta: f64, eps: f64, gamma: f64) -> Result<f64> {
    if gamma <= 2.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma={gamma} not above 2"
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps={eps} outside (0, 1)")));
    }
    let denom = 1.0 + (4.0 * beta - 1.0) * p;
    if denom <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "nonpositive denominator 1 + (4 beta - 1) p = {denom}"
        )));
    }
    let nf = n as f64;
    let kf = k as f64;
    Ok((gamma - 2.0) * (4.0 + eps) / denom * p * nf * nf * nf.ln() / kf.powi(4))
}

/// First-moment bound on families of t edge-disjoint k-cliques, with the
/// o(1) term dropped (flagged in the report):
/// log_bound = -t * bracket,
/// bracket   = t k^4 (1 + (4 beta - 1) p) / (4 p n^2) - gamma ln n + ln t.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FirstMomentBound {
    pub bracket: f64,
    pub log_bound: f64,
    /// Always true: the bound drops the asymptotic o(1) corrections, so the
    /// value is an approximation, not a rigorous bound.
    pub o1_terms_dropped: bool,
}

pub fn log_first_moment_bound(
    n: u64,
    p: f64,
    k: u64,
    t: f64,
    beta: f64,
    gamma: f64,
) -> Result<FirstMomentBound> {
    if t < 1.0 {
        return Err(Error::InvalidParameter(format!("t={t} below 1")));
    }
    let nf = n as f64;
    let kf = k as f64;
    let bracket =
        t * kf.powi(4) * (1.0 + (4.0 * beta - 1.0) * p) / (4.0 * p * nf * nf) - gamma * nf.ln()
            + t.ln();
    Ok(FirstMomentBound {
        bracket,
        log_bound: -t * bracket,
        o1_terms_dropped: true,
    })
}

/// ln of the exact falling-factorial ratio (m)_r / (N)_r with N = C(n, 2):
/// the probability that r prescribed pairs all land in a uniform m-edge
/// graph. Zero probability (-inf) when r > m.
pub fn prob_fixed_edges_gnm(n: u64, m: u64, r: u64) -> f64 {
    let cap = choose2(n);
    assert!(m <= cap, "m={m} exceeds C({n},2)={cap}");
    if r == 0 {
        return 0.0;
    }
    if r > m {
        return f64::NEG_INFINITY;
    }
    if r <= 1_000_000 {
        let mut acc = 0.0f64;
        for i in 0..r {
            acc += ((m - i) as f64).ln() - ((cap - i) as f64).ln();
        }
        acc
    } else {
        // Stirling via ln Gamma; the result magnitude dwarfs the absolute
        // error of the four terms.
        ln_gamma((m + 1) as f64) - ln_gamma((m - r + 1) as f64) - ln_gamma((cap + 1) as f64)
            + ln_gamma((cap - r + 1) as f64)
    }
}

/// Stirling-series ln Gamma for large positive arguments.
fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x >= 1.0);
    let mut x = x;
    let mut lift = 0.0f64;
    while x < 20.0 {
        lift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv / 12.0 * (1.0 - inv2 / 30.0 * (1.0 - inv2 * 2.0 / 7.0))
        + lift
}

/// ln E\[Y_S\] for |S| = s: ln C(n-s, k-s) + (C(k,2) - C(s,2)) ln p.
pub fn expected_y(n: u64, k: u64, p: f64, s: u64) -> Result<f64> {
    require_open_unit(p)?;
    if s > k || k > n {
        return Err(Error::InvalidParameter(format!(
            "need s <= k <= n, got s={s} k={k} n={n}"
        )));
    }
    Ok(ln_choose(n - s, k - s) + (choose2(k) - choose2(s)) as f64 * p.ln())
}

// ---------------------------------------------------------------------------
// Diagnostic term sequences
// ---------------------------------------------------------------------------

/// ln xi_i = ln [ n^(k-i) / (k-i)! * p^(C(k,2) - C(i,2)) ] for i = s..=k.
/// The last entry (i = k) is exactly zero.
pub fn xi_sequence(n: u64, k: u64, p: f64, s: u64) -> Result<Vec<f64>> {
    require_open_unit(p)?;
    if s > k {
        return Err(Error::InvalidParameter(format!("s={s} exceeds k={k}")));
    }
    let ln_n = (n as f64).ln();
    let ln_p = p.ln();
    Ok((s..=k)
        .map(|i| {
            (k - i) as f64 * ln_n - ln_factorial(k - i) + (choose2(k) - choose2(i)) as f64 * ln_p
        })
        .collect())
}

/// Monotonicity / decay scan over the xi sequence.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct XiScanReport {
    /// Tail-offset constant: ceil(1 / (1 - p) + 1).
    pub d: u64,
    /// xi_i <= n^{-(i-s)/2} xi_s for s <= i <= floor(k/8).
    pub head_decay_ok: bool,
    /// xi_b <= max(xi_a, xi_c) for all s <= a <= b <= c <= k - d.
    pub valley_ok: bool,
    /// xi_i <= n^{-(k-i)/8} max(xi_s, xi_k) for i >= ceil(7k/8).
    pub tail_decay_ok: bool,
}

pub fn xi_scan(n: u64, k: u64, p: f64, s: u64) -> Result<(Vec<f64>, XiScanReport)> {
    let xs = xi_sequence(n, k, p, s)?;
    let ln_n = (n as f64).ln();
    let d = (1.0 / (1.0 - p) + 1.0).ceil() as u64;
    let at = |i: u64| xs[(i - s) as usize];
    const TOL: f64 = 1e-9;

    let mut head_decay_ok = true;
    for i in s..=(k / 8).max(s) {
        if at(i) > at(s) - (i - s) as f64 / 2.0 * ln_n + TOL {
            head_decay_ok = false;
        }
    }

    let hi = k.saturating_sub(d);
    let mut valley_ok = true;
    if hi >= s {
        for a in s..=hi {
            for b in a..=hi {
                for c in b..=hi {
                    if at(b) > at(a).max(at(c)) + TOL {
                        valley_ok = false;
                    }
                }
            }
        }
    }

    let mut tail_decay_ok = true;
    for i in (7 * k).div_ceil(8)..=k {
        if i < s {
            continue;
        }
        if at(i) > at(s).max(at(k)) - (k - i) as f64 / 8.0 * ln_n + TOL {
            tail_decay_ok = false;
        }
    }

    Ok((
        xs,
        XiScanReport {
            d,
            head_decay_ok,
            valley_ok,
            tail_decay_ok,
        },
    ))
}

/// The pair-overlap variance terms a_i and their weighted total:
/// a_i = C(k-2, i) C(n-k, k-2-i) p^(C(k,2) - C(i+2,2)), i = 1..=k-2, and
/// ln total = ln [ C(n, k-2) p^(C(k,2)-1) * sum_i a_i ].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AiSequence {
    /// ln a_1 .. ln a_{k-2}.
    pub log_terms: Vec<f64>,
    pub log_delta_bar: f64,
}

pub fn ai_sequence(n: u64, k: u64, p: f64) -> Result<AiSequence> {
    require_open_unit(p)?;
    if k < 3 || k > n {
        return Err(Error::InvalidParameter(format!(
            "need 3 <= k <= n, got k={k} n={n}"
        )));
    }
    let ln_p = p.ln();
    let log_terms: Vec<f64> = (1..=k - 2)
        .map(|i| {
            ln_choose(k - 2, i)
                + ln_choose(n - k, k - 2 - i)
                + (choose2(k) - choose2(i + 2)) as f64 * ln_p
        })
        .collect();
    // log-sum-exp
    let mx = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum_ln = mx + log_terms.iter().map(|&t| (t - mx).exp()).sum::<f64>().ln();
    let log_delta_bar = ln_choose(n, k - 2) + (choose2(k) - 1) as f64 * ln_p + sum_ln;
    Ok(AiSequence {
        log_terms,
        log_delta_bar,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AiScanReport {
    /// Window-offset constant: ceil((1 - p^{1/4})^{-1}) + 1.
    pub d: u64,
    /// The middle window [d, k-d] is non-increasing then non-decreasing.
    pub valley_ok: bool,
    /// max_i a_i <= n^{PEAK_SLACK_EXPONENT} max(a_1, a_{k-2}) over all i.
    pub peak_bound_ok: bool,
}

pub fn ai_scan(n: u64, k: u64, p: f64) -> Result<(AiSequence, AiScanReport)> {
    let seq = ai_sequence(n, k, p)?;
    let d = ((1.0 - p.powf(0.25)).recip().ceil() as u64) + 1;
    let terms = &seq.log_terms;
    let at = |i: u64| terms[(i - 1) as usize];
    const TOL: f64 = 1e-9;

    let hi = (k - 2).min(k.saturating_sub(d));
    let mut valley_ok = true;
    if d <= hi {
        let mut rising = false;
        for i in d..hi {
            let diff = at(i + 1) - at(i);
            if diff > TOL {
                rising = true;
            } else if diff < -TOL && rising {
                valley_ok = false;
            }
        }
    }

    let peak = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bound = PEAK_SLACK_EXPONENT * (n as f64).ln() + at(1).max(at(k - 2));
    let peak_bound_ok = peak <= bound + TOL;

    Ok((
        seq,
        AiScanReport {
            d,
            valley_ok,
            peak_bound_ok,
        },
    ))
}

/// Consecutive-expectation ratio diagnostics near the threshold size.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioCheckReport {
    pub k0: u64,
    /// ratios[c-1] = ln(E(n, k0-c) / E(n, k0-c+1)) / ln n for c = 1..=c_max.
    pub ratios: Vec<f64>,
    /// Parallel to `ratios`: set when the ratio leaves RATIO_BAND.
    pub flagged: Vec<bool>,
    pub band: (f64, f64),
    /// Re-verification of the defining property E(n, k0) < 1.
    pub threshold_property_ok: bool,
}

pub fn appendix_a_ratio_check(n: u64, p: f64, c_max: u64) -> Result<RatioCheckReport> {
    if n < 100 {
        return Err(Error::InvalidParameter(format!("n={n} below 100")));
    }
    let k0 = find_k0(n, p)?;
    if c_max >= k0 {
        return Err(Error::InvalidParameter(format!(
            "c_max={c_max} >= k0={k0}"
        )));
    }
    let ln_n = (n as f64).ln();
    let mut ratios = Vec::new();
    let mut flagged = Vec::new();
    for c in 1..=c_max {
        let hi = log_expected_cliques(n, k0 - c, p)?;
        let lo = log_expected_cliques(n, k0 - c + 1, p)?;
        let r = (hi - lo) / ln_n;
        flagged.push(!(RATIO_BAND.0..=RATIO_BAND.1).contains(&r));
        ratios.push(r);
    }
    Ok(RatioCheckReport {
        k0,
        ratios,
        flagged,
        band: RATIO_BAND,
        threshold_property_ok: log_expected_cliques(n, k0, p)? < 0.0,
    })
}

/// Evaluation of the error-envelope chain n^{-delta} <= g_Q <= g_Y <= n^{-delta/4}
/// at the horizon, using the nominal initial edge count. Skipped (with the
/// flag set) when the horizon degenerates to zero.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub m_star: u64,
    pub skipped_degenerate: bool,
    /// False when m_star exceeded the iteration cap and nothing was computed.
    pub evaluated: bool,
    pub g_q_floor_ok: Option<bool>,
    pub g_y_at_m_star: Option<f64>,
    pub bound: f64,
    pub chain_holds: Option<bool>,
}

pub fn envelope_report(params: &TheoryParams) -> EnvelopeReport {
    const ITER_CAP: u64 = 100_000_000;
    let nf = params.n as f64;
    let bound = (-params.delta / 4.0 * nf.ln()).exp();
    let m_star = params.m_star.unwrap_or(0);
    if m_star == 0 {
        return EnvelopeReport {
            m_star,
            skipped_degenerate: true,
            evaluated: false,
            g_q_floor_ok: None,
            g_y_at_m_star: None,
            bound,
            chain_holds: None,
        };
    }
    if m_star > ITER_CAP {
        return EnvelopeReport {
            m_star,
            skipped_degenerate: false,
            evaluated: false,
            g_q_floor_ok: None,
            g_y_at_m_star: None,
            bound,
            chain_holds: None,
        };
    }
    let b = choose2(params.k) as f64;
    let e0 = params.e0_nominal;
    let ln_gq0 = 2.0f64.ln() - params.delta * nf.ln();
    let ln_gy0 = 10.0f64.ln() - params.delta * nf.ln();
    let mut sum_q = 0.0f64;
    let mut sum_y = 0.0f64;
    let mut min_gq = ln_gq0;
    for i in 0..m_star {
        let e_i = e0 - i as f64 * b;
        sum_q += (1.0 + b * b / e_i).ln();
        sum_y += (1.0 + 2.0 * b * b / e_i).ln();
        min_gq = min_gq.min(ln_gq0 + sum_q);
    }
    let g_y = (ln_gy0 + sum_y).exp();
    let floor = -params.delta * nf.ln();
    EnvelopeReport {
        m_star,
        skipped_degenerate: false,
        evaluated: true,
        g_q_floor_ok: Some(min_gq >= floor - 1e-12),
        g_y_at_m_star: Some(g_y),
        bound,
        chain_holds: Some(g_y <= bound),
    }
}

#[cfg(test)]
mod tests;
