//! Per-step deterministic trajectories and error envelopes.
//!
//! With b = C(k, 2) and e(m) = e0 - m b, the arrays obey
//!   Qt(m+1) = Qt(m) (1 - b^2 / e(m)),      Qt(0) = Q0,
//!   gQ(m+1) = gQ(m) (1 + b^2 / e(m)),      gQ(0) = 2 n^{-delta},
//!   gY(m+1) = gY(m) (1 + 2 b^2 / e(m)),    gY(0) = 10 n^{-delta},
//!   Yt(m)   = b Qt(m) / e(m).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::theory::choose2;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrajectorySchedule {
    pub n: u64,
    pub k: u64,
    pub e0: u64,
    pub q0: f64,
    pub delta: f64,
    /// e(m) = e0 - m C(k,2), exact integers.
    pub e: Vec<u64>,
    pub q_tilde: Vec<f64>,
    pub g_q: Vec<f64>,
    pub y_tilde: Vec<f64>,
    pub g_y: Vec<f64>,
    /// Set when the arrays stop before the requested horizon because the
    /// recurrence bracket became nonpositive.
    pub truncated: bool,
}

impl TrajectorySchedule {
    /// Number of populated steps (last valid index is `len() - 1`).
    pub fn len(&self) -> usize {
        self.q_tilde.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q_tilde.is_empty()
    }
}

/// Builds the schedule from a realized initial edge count. `q0` is the
/// caller's choice of starting value (the expected clique count by default,
/// or the realized count for adherence diagnostics).
pub fn build_schedule(
    e0: u64,
    k: u64,
    q0: f64,
    n: u64,
    delta: f64,
    m_max: u64,
) -> Result<TrajectorySchedule> {
    if k < 2 {
        return Err(Error::InvalidParameter(
            "schedule requires k >= 2".into(),
        ));
    }
    if e0 == 0 {
        return Err(Error::InvalidParameter(
            "schedule requires a positive initial edge count".into(),
        ));
    }
    let b = choose2(k);
    let n_pow = (-delta * (n as f64).ln()).exp();
    let mut e = Vec::with_capacity(m_max as usize + 1);
    let mut q_tilde = Vec::with_capacity(m_max as usize + 1);
    let mut g_q = Vec::with_capacity(m_max as usize + 1);
    let mut g_y = Vec::with_capacity(m_max as usize + 1);

    let mut qt = q0;
    let mut gq = 2.0 * n_pow;
    let mut gy = 10.0 * n_pow;
    let mut truncated = false;
    for m in 0..=m_max {
        let e_m = e0 as i128 - (m as i128) * b as i128;
        if e_m <= 0 {
            truncated = true;
            break;
        }
        e.push(e_m as u64);
        q_tilde.push(qt);
        g_q.push(gq);
        g_y.push(gy);
        if m == m_max {
            break;
        }
        let e_f = e_m as f64;
        let shrink = 1.0 - (b * b) as f64 / e_f;
        if shrink <= 0.0 {
            truncated = true;
            break;
        }
        qt *= shrink;
        gq *= 1.0 + (b * b) as f64 / e_f;
        gy *= 1.0 + 2.0 * (b * b) as f64 / e_f;
    }
    let y_tilde: Vec<f64> = q_tilde
        .iter()
        .zip(&e)
        .map(|(&q, &em)| b as f64 * q / em as f64)
        .collect();
    Ok(TrajectorySchedule {
        n,
        k,
        e0,
        q0,
        delta,
        e,
        q_tilde,
        g_q,
        y_tilde,
        g_y,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_values() {
        let s = build_schedule(1000, 6, 500.0, 100, 0.028, 0).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.q_tilde[0], 500.0);
        assert_eq!(s.y_tilde[0], 15.0 * 500.0 / 1000.0);
        let n_pow = (-0.028f64 * 100f64.ln()).exp();
        assert_eq!(s.g_q[0], 2.0 * n_pow);
        assert_eq!(s.g_y[0], 10.0 * n_pow);
    }

    #[test]
    fn one_step_by_hand() {
        // Qt(1) = 500 * (1 - 225/1000) = 387.5 exactly
        let s = build_schedule(1000, 6, 500.0, 100, 0.028, 1).unwrap();
        assert_eq!(s.q_tilde[1], 387.5);
        assert_eq!(s.e[1], 1000 - 15);
    }

    #[test]
    fn recurrence_replay_is_bit_identical() {
        let s = build_schedule(2475, 6, 36378.55224609375, 100, 0.02804227057468597, 82).unwrap();
        assert_eq!(s.len(), 83);
        let mut qt = s.q0;
        let mut gq = s.g_q[0];
        let mut gy = s.g_y[0];
        for m in 0..s.len() {
            assert_eq!(s.e[m], 2475 - 15 * m as u64);
            assert!(s.q_tilde[m].to_bits() == qt.to_bits(), "Qt at {m}");
            assert!(s.g_q[m].to_bits() == gq.to_bits(), "gQ at {m}");
            assert!(s.g_y[m].to_bits() == gy.to_bits(), "gY at {m}");
            assert_eq!(
                s.y_tilde[m].to_bits(),
                (15.0 * s.q_tilde[m] / s.e[m] as f64).to_bits()
            );
            let e_f = s.e[m] as f64;
            qt *= 1.0 - 225.0 / e_f;
            gq *= 1.0 + 225.0 / e_f;
            gy *= 1.0 + 450.0 / e_f;
        }
    }

    #[test]
    fn envelope_ratio_at_least_five() {
        // gY(m)/gQ(m) = 5 * prod (1+2a)/(1+a) >= 5
        let s = build_schedule(5000, 5, 1e4, 200, 0.05, 100).unwrap();
        for m in 0..s.len() {
            let ratio = s.g_y[m] / s.g_q[m];
            assert!(ratio >= 5.0 - 1e-12, "ratio {ratio} at {m}");
        }
        // and gQ never drops below its floor n^{-delta}
        let floor = (-0.05f64 * 200f64.ln()).exp();
        assert!(s.g_q.iter().all(|&g| g >= floor));
    }

    #[test]
    fn truncates_with_flag_when_bracket_dies() {
        // e0 = 100, b = 15, b^2 = 225 > e(0): the very first shrink factor
        // is nonpositive, so only m = 0 survives.
        let s = build_schedule(100, 6, 10.0, 50, 0.0, 10).unwrap();
        assert!(s.truncated);
        assert_eq!(s.len(), 1);
        // long horizon: arrays stop once e(m) <= b^2
        let s = build_schedule(1000, 6, 1e6, 50, 0.0, 1000).unwrap();
        assert!(s.truncated);
        assert!(s.len() < 1000);
        assert!(*s.e.last().unwrap() > 225 - 15);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(build_schedule(0, 6, 1.0, 10, 0.0, 5).is_err());
        assert!(build_schedule(100, 1, 1.0, 10, 0.0, 5).is_err());
    }
}
