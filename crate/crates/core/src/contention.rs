//! Overhead of the p-persistent RTS/CTS reservation phase.
//!
//! Every generic slot ends in exactly one of three outcomes: a lone RTS
//! (success), no RTS (idle) or several RTS frames (collision). The number of
//! collisions before the first success and the length of each idle run are
//! geometric, which gives the mean contention time in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ContentionParams;

/// Per-slot outcome probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotProbabilities {
    pub p_succ: f64,
    pub p_idle: f64,
    pub p_coll: f64,
}

/// Mean statistics of one reservation phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContentionStats {
    pub p_succ: f64,
    pub p_idle: f64,
    pub p_coll: f64,
    /// Duration of a successful RTS/CTS exchange.
    pub t_succ: f64,
    /// Duration of a collision.
    pub t_coll: f64,
    /// Mean length of one idle run, in slots.
    pub t_idle_bar: f64,
    /// Mean number of collisions before the successful exchange.
    pub n_coll_bar: f64,
    /// Mean contention time in seconds.
    pub t_cont_bar: f64,
    /// Mean overhead per successful reservation, including SIFS/ACK framing.
    pub t_ove: f64,
}

/// `(p_succ, p_idle, p_coll)` for `n0` contenders each transmitting with probability `p`.
///
/// Evaluated in the log domain so that large `n0 * p` does not underflow to a
/// spurious zero before the ratio in [`contention_overhead`] is formed.
pub fn slot_probabilities(cp: &ContentionParams) -> SlotProbabilities {
    let n = cp.n0 as f64;
    let (p_succ, p_idle) = if cp.p >= 1.0 {
        (if cp.n0 == 1 { 1.0 } else { 0.0 }, 0.0)
    } else {
        let log_q = (-cp.p).ln_1p();
        let p_idle = (n * log_q).exp();
        let p_succ = (n.ln() + cp.p.ln() + (n - 1.0) * log_q).exp();
        (p_succ, p_idle)
    };
    let p_coll = (1.0 - p_succ - p_idle).max(0.0);
    SlotProbabilities {
        p_succ,
        p_idle,
        p_coll,
    }
}

/// `(t_succ, t_coll)`: a success costs DIFS + RTS + SIFS + CTS + 2 PD, a
/// collision DIFS + RTS + PD.
pub fn successful_and_collision_durations(cp: &ContentionParams) -> (f64, f64) {
    let t_succ = cp.difs + cp.rts + cp.sifs + cp.cts + 2.0 * cp.pd;
    let t_coll = cp.difs + cp.rts + cp.pd;
    (t_succ, t_coll)
}

/// Mean reservation overhead `T_ove` and its components.
///
/// Idle runs are counted in slots and converted to seconds with the slot size.
pub fn contention_overhead(cp: &ContentionParams) -> Result<ContentionStats> {
    cp.validate()?;
    let SlotProbabilities {
        p_succ,
        p_idle,
        p_coll,
    } = slot_probabilities(cp);
    if !(p_succ > 0.0) {
        return Err(Error::InfeasibleContention { n0: cp.n0, p: cp.p });
    }
    let (t_succ, t_coll) = successful_and_collision_durations(cp);

    // 1 - (1-p)^n0 without cancellation for small p.
    let p_busy_slot = if cp.p >= 1.0 {
        1.0
    } else {
        -((cp.n0 as f64) * (-cp.p).ln_1p()).exp_m1()
    };
    let t_idle_bar = p_idle / p_busy_slot;
    let n_coll_bar = (p_busy_slot / p_succ - 1.0).max(0.0);
    let t_cont_bar = n_coll_bar * t_coll + t_idle_bar * cp.sigma * (n_coll_bar + 1.0) + t_succ;
    let t_ove = t_cont_bar + 2.0 * cp.sifs + 2.0 * cp.pd + cp.ack;

    Ok(ContentionStats {
        p_succ,
        p_idle,
        p_coll,
        t_succ,
        t_coll,
        t_idle_bar,
        n_coll_bar,
        t_cont_bar,
        t_ove,
    })
}
