//! Cycle-by-cycle simulation of contention and access.
//!
//! Each cycle draws the reservation phase slot by slot, then the PU state at
//! the cycle start, the PU return time `t1` (measured from the cycle start) and
//! the subsequent active duration `t2`, and finally the sensing outcome from
//! the false alarm or time-dependent detection probability. Bits are credited
//! at the same stage rates as the closed form.
//!
//! Work is split into fixed chunks of cycles, each with its own ChaCha8 stream
//! derived from `(seed, chunk index)`. Chunk totals are merged in chunk order,
//! so the report does not depend on the execution strategy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contention::{contention_overhead, slot_probabilities, successful_and_collision_durations};
use crate::error::{invalid, Result};
use crate::exec::Execution;
use crate::model::Scenario;
use crate::sensing::{self, SensingOutcomeModel};
use crate::throughput::RateContext;

const CHUNK: u64 = 1 << 14;

/// What to credit when the PU turns idle again before the frame ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultiTransitionPolicy {
    /// Credit nothing. The closed form only integrates over PU returns that
    /// last past the end of the frame, so this is the matching choice.
    #[default]
    Ignore,
    /// Credit the bits of a PU that stays active, and count the cycle as a case.
    CountAndFlag,
}

/// Origin of the PU idle clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PuClock {
    /// Fresh idle/active draws in every cycle, matching the closed form.
    #[default]
    CycleStart,
    /// One alternating renewal process running across cycles.
    Renewal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub cycles: u64,
    pub seed: u64,
    pub record_cases: bool,
    pub multi_transition_policy: MultiTransitionPolicy,
    pub pu_clock: PuClock,
    pub execution: Execution,
}

impl SimConfig {
    pub fn new(cycles: u64, seed: u64) -> Self {
        Self {
            cycles,
            seed,
            record_cases: true,
            multi_transition_policy: MultiTransitionPolicy::default(),
            pu_clock: PuClock::default(),
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cycles == 0 {
            return Err(invalid("simulation.cycles", "at least one cycle is required"));
        }
        Ok(())
    }
}

/// Statistics of one PU-arrival case.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CaseStats {
    pub count: u64,
    pub frequency: f64,
    /// `E[bits · 1{case}]` per cycle, comparable with `B_i`.
    pub bits_per_cycle: f64,
    pub bits_per_cycle_se: f64,
    /// `E[bits | case]`, comparable with `B_i / P_i`.
    pub conditional_bits: f64,
    pub conditional_bits_se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ContentionSample {
    pub mean_collisions: f64,
    pub mean_collisions_se: f64,
    pub mean_idle_slots: f64,
    pub mean_idle_slots_se: f64,
    pub mean_overhead: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub cycles: u64,
    pub seed: u64,
    pub nt_estimate: f64,
    pub nt_std_error: f64,
    pub mean_bits_per_cycle: f64,
    pub mean_cycle_time: f64,
    pub cases: [CaseStats; 3],
    pub contention: ContentionSample,
    pub busy_start_fraction: f64,
    pub multi_transition_fraction: f64,
    /// Cycles in which the PU became active during the data phase and the SU
    /// kept transmitting until the end of the frame.
    pub evacuation_violation_fraction: f64,
    pub sensing: SensingOutcomeModel,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }

    /// Standard error of the mean over `n` observations.
    fn se(&self, n: u64) -> f64 {
        if n < 2 {
            return f64::NAN;
        }
        let nf = n as f64;
        let m = self.sum / nf;
        ((self.sum_sq / nf - m * m).max(0.0) * nf / (nf - 1.0) / nf).sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    bits: Moments,
    time: Moments,
    bits_time: f64,
    collisions: Moments,
    idle_slots: Moments,
    cases: [Moments; 3],
    busy_start: u64,
    multi: u64,
    violation: u64,
}

impl Tally {
    fn merge(&mut self, o: &Tally) {
        self.bits.merge(&o.bits);
        self.time.merge(&o.time);
        self.bits_time += o.bits_time;
        self.collisions.merge(&o.collisions);
        self.idle_slots.merge(&o.idle_slots);
        for (a, b) in self.cases.iter_mut().zip(&o.cases) {
            a.merge(b);
        }
        self.busy_start += o.busy_start;
        self.multi += o.multi;
        self.violation += o.violation;
    }
}

fn exponential<R: Rng>(rng: &mut R, mean: f64) -> f64 {
    if mean.is_infinite() {
        return f64::INFINITY;
    }
    -mean * (-rng.random::<f64>()).ln_1p()
}

/// Everything a chunk needs, fixed for the whole run.
struct Plan {
    s: Scenario,
    sim: SimConfig,
    p_succ: f64,
    p_idle: f64,
    t_succ: f64,
    t_coll: f64,
    tail: f64,
    l_s1: f64,
    l_s2: f64,
    l_d1: f64,
    l_d2: f64,
    phi: f64,
    outcome: SensingOutcomeModel,
}

/// Alternating idle/active process shared by consecutive cycles.
struct RenewalPu {
    idle: bool,
    next_change: f64,
}

impl Plan {
    fn contention<R: Rng>(&self, rng: &mut R) -> (f64, u32, u32) {
        let mut elapsed = 0.0;
        let (mut collisions, mut idle) = (0u32, 0u32);
        loop {
            let u: f64 = rng.random();
            if u < self.p_succ {
                elapsed += self.t_succ;
                break;
            } else if u < self.p_succ + self.p_idle {
                idle += 1;
                elapsed += self.s.contention.sigma;
            } else {
                collisions += 1;
                elapsed += self.t_coll;
            }
        }
        (elapsed + self.tail, collisions, idle)
    }

    fn detection(&self, offset: f64) -> f64 {
        let a = &self.s.access;
        sensing::detection_p01(
            self.outcome.epsilon_star,
            a.t_s,
            offset.clamp(0.0, a.t_s),
            a.p_sen,
            self.s.pu.p_pu,
            &self.s.sensing,
            &self.s.sic,
        )
        .unwrap_or(f64::NAN)
    }

    /// Bits of a cycle whose channel is idle at the start, given the PU return
    /// time `t1` and active duration `t2` (both from the cycle start).
    fn access_bits<R: Rng>(&self, rng: &mut R, t_ove: f64, t1: f64, t2: f64, tally: &mut Tally) -> f64 {
        let a = &self.s.access;
        let (t, ts) = (a.t_frame, a.t_s);
        let end = t_ove + t;
        if t1 < t_ove {
            return 0.0;
        }
        if t1 >= end {
            let false_alarm = rng.random::<f64>() < self.outcome.pf00;
            let tx = if false_alarm { 0.0 } else { self.phi * (t - ts) * self.l_d1 };
            let bits = ts * self.l_s1 + tx;
            if self.sim.record_cases {
                tally.cases[0].push(bits);
            }
            return bits;
        }

        let offset = t1 - t_ove;
        let multi = t1 + t2 < end;
        if multi {
            tally.multi += 1;
            if self.sim.multi_transition_policy == MultiTransitionPolicy::Ignore {
                return 0.0;
            }
        }
        let (case, bits) = if offset >= ts {
            let false_alarm = rng.random::<f64>() < self.outcome.pf00;
            let tx = if false_alarm {
                0.0
            } else {
                tally.violation += 1;
                self.phi * ((offset - ts) * self.l_d1 + (t - offset) * self.l_d2)
            };
            (1, ts * self.l_s1 + tx)
        } else {
            let detected = rng.random::<f64>() < self.detection(offset);
            let tx = if detected {
                0.0
            } else {
                tally.violation += 1;
                self.phi * (t - ts) * self.l_d2
            };
            (2, offset * self.l_s1 + (ts - offset) * self.l_s2 + tx)
        };
        if self.sim.record_cases {
            tally.cases[case].push(bits);
        }
        bits
    }

    fn run_chunk(&self, index: u64) -> Tally {
        let mut rng = ChaCha8Rng::seed_from_u64(self.sim.seed);
        rng.set_stream(index);
        let first = index * CHUNK;
        let n = CHUNK.min(self.sim.cycles - first);
        let pu = self.s.pu;
        let mut tally = Tally::default();
        let mut renewal = RenewalPu {
            idle: rng.random::<f64>() < pu.p_idle(),
            next_change: 0.0,
        };
        renewal.next_change = exponential(&mut rng, if renewal.idle { pu.tau_id_bar } else { pu.tau_ac_bar });
        let mut clock = 0.0;

        for _ in 0..n {
            let (t_ove, collisions, idle_slots) = self.contention(&mut rng);
            tally.collisions.push(collisions as f64);
            tally.idle_slots.push(idle_slots as f64);
            let cycle_time = t_ove + self.s.access.t_frame;

            let bits = match self.sim.pu_clock {
                PuClock::CycleStart => {
                    if rng.random::<f64>() < pu.p_idle() {
                        let t1 = exponential(&mut rng, pu.tau_id_bar);
                        let t2 = exponential(&mut rng, pu.tau_ac_bar);
                        self.access_bits(&mut rng, t_ove, t1, t2, &mut tally)
                    } else {
                        tally.busy_start += 1;
                        0.0
                    }
                }
                PuClock::Renewal => {
                    while renewal.next_change <= clock {
                        renewal.idle = !renewal.idle;
                        let mean = if renewal.idle { pu.tau_id_bar } else { pu.tau_ac_bar };
                        renewal.next_change += exponential(&mut rng, mean);
                    }
                    if renewal.idle {
                        let t1 = renewal.next_change - clock;
                        let t2 = exponential(&mut rng, pu.tau_ac_bar);
                        let bits = self.access_bits(&mut rng, t_ove, t1, t2, &mut tally);
                        if t1 < cycle_time {
                            // The active period drawn above becomes part of the process.
                            renewal.idle = false;
                            renewal.next_change += t2;
                        }
                        bits
                    } else {
                        tally.busy_start += 1;
                        0.0
                    }
                }
            };
            clock += cycle_time;

            tally.bits.push(bits);
            tally.time.push(cycle_time);
            tally.bits_time += bits * cycle_time;
        }
        tally
    }
}

/// Simulates `sim.cycles` cycles with a threshold calibrated as in the closed form.
pub fn simulate(s: &Scenario, sim: &SimConfig) -> Result<SimReport> {
    s.validate()?;
    let outcome = sensing::calibrated_outcome(
        s.access.t_s,
        s.access.p_sen,
        s.sensing.pd_target,
        &s.pu,
        &s.sensing,
        &s.sic,
    )?;
    simulate_with_outcome(s, sim, outcome)
}

/// Simulates with a given detector operating point instead of calibrating one.
pub fn simulate_with_outcome(s: &Scenario, sim: &SimConfig, outcome: SensingOutcomeModel) -> Result<SimReport> {
    s.validate()?;
    sim.validate()?;
    // Fails early on infeasible contention.
    contention_overhead(&s.contention)?;
    let cp = &s.contention;
    let slots = slot_probabilities(cp);
    let (t_succ, t_coll) = successful_and_collision_durations(cp);
    let ctx = RateContext::new(&s.access, &s.pu, &s.sensing, &s.sic);
    let plan = Plan {
        s: *s,
        sim: *sim,
        p_succ: slots.p_succ,
        p_idle: slots.p_idle,
        t_succ,
        t_coll,
        tail: 2.0 * cp.sifs + 2.0 * cp.pd + cp.ack,
        l_s1: ctx.gamma_s1.log2_1p(),
        l_s2: ctx.gamma_s2.log2_1p(),
        l_d1: ctx.gamma_d1.log2_1p(),
        l_d2: ctx.gamma_d2.log2_1p(),
        phi: ctx.phi,
        outcome,
    };

    let chunks = sim.cycles.div_ceil(CHUNK) as usize;
    let tallies = sim.execution.map_range(chunks, |i| plan.run_chunk(i as u64));
    let mut total = Tally::default();
    for t in &tallies {
        total.merge(t);
    }
    Ok(report(&plan, &total))
}

trait Log2OnePlus {
    fn log2_1p(self) -> f64;
}

impl Log2OnePlus for f64 {
    fn log2_1p(self) -> f64 {
        self.ln_1p() / std::f64::consts::LN_2
    }
}

fn report(plan: &Plan, t: &Tally) -> SimReport {
    let n = t.bits.n;
    let nf = n as f64;
    let mean_bits = t.bits.mean();
    let mean_time = t.time.mean();
    let nt = t.bits.sum / t.time.sum;

    // Ratio estimator: Var(b - R t) / (n * mean_t^2), expanded from the raw moments.
    let resid_sq = t.bits.sum_sq - 2.0 * nt * t.bits_time + nt * nt * t.time.sum_sq;
    let nt_se = if n > 1 {
        (resid_sq.max(0.0) / (nf - 1.0) / nf).sqrt() / mean_time
    } else {
        f64::NAN
    };

    let mut cases = [CaseStats::default(); 3];
    for (c, m) in cases.iter_mut().zip(&t.cases) {
        // Cycles outside the case contribute zero bits, so the unconditional
        // moments over all cycles are the case moments divided by n.
        let unconditional = Moments {
            n,
            sum: m.sum,
            sum_sq: m.sum_sq,
        };
        *c = CaseStats {
            count: m.n,
            frequency: m.n as f64 / nf,
            bits_per_cycle: unconditional.mean(),
            bits_per_cycle_se: unconditional.se(n),
            conditional_bits: m.mean(),
            conditional_bits_se: m.se(m.n),
        };
    }

    let mut warnings = Vec::new();
    if n < 10_000 {
        warnings.push(format!("only {n} cycles; standard errors are unreliable below 10^4"));
    }
    if nt_se > 0.01 * nt {
        warnings.push(format!("standard error {nt_se:.3e} exceeds 1% of the estimate"));
    }

    SimReport {
        cycles: n,
        seed: plan.sim.seed,
        nt_estimate: nt,
        nt_std_error: nt_se,
        mean_bits_per_cycle: mean_bits,
        mean_cycle_time: mean_time,
        cases,
        contention: ContentionSample {
            mean_collisions: t.collisions.mean(),
            mean_collisions_se: t.collisions.se(n),
            mean_idle_slots: t.idle_slots.mean(),
            mean_idle_slots_se: t.idle_slots.se(n),
            mean_overhead: mean_time - plan.s.access.t_frame,
        },
        busy_start_fraction: t.busy_start as f64 / nf,
        multi_transition_fraction: t.multi as f64 / nf,
        evacuation_violation_fraction: t.violation as f64 / nf,
        sensing: plan.outcome,
        warnings,
    }
}
