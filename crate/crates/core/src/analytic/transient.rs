//! Transient model for sensing APs whose requests all arrive at the same epoch.
//!
//! Time is counted in decrement ticks: idle slots in which backoff counters
//! move. An AP's transmit tick is fixed between its own attempts, so APs that
//! drew the same counter stay aligned and collide, which a per-slot
//! independence model smears out. Within one tick the channel may carry
//! several busy rounds, one per batch of APs whose counters reached zero.
//! APs are coupled only through the collision outcome of each round.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Gamma};

use crate::error::{Error, Result};
use crate::model::{AxTrafficProfile, DurationTable, EdcaClass, PopulationMix};

/// Mass below which a round or a tail is treated as empty.
const NEGLIGIBLE: f64 = 1e-13;
const MAX_ROUNDS: usize = 256;
const MAX_TICKS: usize = 2_000_000;
const STATIONARY_TOL: f64 = 1e-12;

/// Per-AP backoff law of one technology: mass by stage and by ticks left
/// before the next attempt.
#[derive(Debug, Clone)]
struct Group {
    n: u32,
    stages: Vec<Vec<f64>>,
    saturated: bool,
}

impl Group {
    fn new(n: u32, edca: &EdcaClass, saturated: bool) -> Self {
        let stages = edca.windows().map(|w| vec![0.0; w as usize]).collect();
        Group { n, stages, saturated }
    }

    fn redraw(&mut self, stage: usize, mass: f64) {
        let row = &mut self.stages[stage];
        let share = mass / row.len() as f64;
        row.iter_mut().for_each(|v| *v += share);
    }

    fn attempting(&self) -> f64 {
        self.stages.iter().map(|s| s[0]).sum()
    }

    fn active(&self) -> f64 {
        self.stages.iter().flatten().sum()
    }

    /// Probability that no AP of the group attempts, excluding `skip` of them.
    fn silent(&self, skip: u32) -> f64 {
        (1.0 - self.attempting()).powi(self.n.saturating_sub(skip) as i32)
    }

    /// Resolves the attempts of this round. `clear` is the probability that
    /// no other AP attempts. Returns the successful mass.
    fn resolve(&mut self, clear: f64) -> f64 {
        let last = self.stages.len() - 1;
        let attempts: Vec<f64> = self.stages.iter_mut().map(|s| std::mem::take(&mut s[0])).collect();
        let success = attempts.iter().sum::<f64>() * clear;
        for (j, a) in attempts.into_iter().enumerate() {
            let next = if j == last { 0 } else { j + 1 };
            self.redraw(next, a * (1.0 - clear));
        }
        if self.saturated {
            self.redraw(0, success);
        }
        success
    }

    /// With probability `p`, moves every counter `d` ticks closer to zero;
    /// counters that would pass zero attempt in the next round.
    fn shift(&mut self, d: usize, p: f64) {
        if d == 0 || p <= 0.0 {
            return;
        }
        for row in &mut self.stages {
            let head: f64 = row.iter().take(d + 1).sum();
            let old = row.clone();
            for (k, v) in row.iter_mut().enumerate() {
                let moved = if k == 0 {
                    head
                } else {
                    old.get(k + d).copied().unwrap_or(0.0)
                };
                *v = (1.0 - p) * old[k] + p * moved;
            }
        }
    }

    fn advance(&mut self) {
        for row in &mut self.stages {
            row.rotate_left(1);
            if let Some(last) = row.last_mut() {
                *last = 0.0;
            }
        }
    }

    fn distance(&self, other: &Group) -> f64 {
        self.stages
            .iter()
            .flatten()
            .zip(other.stages.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

/// Busy-round composition from the point of view of all APs.
#[derive(Debug, Clone, Copy, Default)]
struct Round {
    success_ax: f64,
    success_bf: f64,
    collision_ax: f64,
    collision_bf: f64,
    collision_cross: f64,
}

impl Round {
    fn new(bf: Option<&Group>, ax: Option<&Group>) -> Self {
        let (xb, nb) = bf.map_or((0.0, 0), |g| (g.attempting(), g.n));
        let (xa, na) = ax.map_or((0.0, 0), |g| (g.attempting(), g.n));
        let quiet_b = (1.0 - xb).powi(nb as i32);
        let quiet_a = (1.0 - xa).powi(na as i32);
        let one_b = nb as f64 * xb * (1.0 - xb).powi(nb.saturating_sub(1) as i32);
        let one_a = na as f64 * xa * (1.0 - xa).powi(na.saturating_sub(1) as i32);
        Round {
            success_ax: one_a * quiet_b,
            success_bf: one_b * quiet_a,
            collision_ax: (1.0 - quiet_a - one_a).max(0.0) * quiet_b,
            collision_bf: (1.0 - quiet_b - one_b).max(0.0) * quiet_a,
            collision_cross: (1.0 - quiet_a) * (1.0 - quiet_b),
        }
    }

    fn terms(&self, dur: &DurationTable) -> [(f64, f64); 5] {
        [
            (self.success_ax, dur.t_s_ax),
            (self.success_bf, dur.t_s_bf),
            (self.collision_ax, dur.t_c_ax),
            (self.collision_bf, dur.t_c_bf),
            (self.collision_cross, dur.t_c_cross),
        ]
    }
}

/// Law of the sum of per-round spans, kept as mean and variance.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    mean: f64,
    var: f64,
}

impl Moments {
    fn add_mixture(&mut self, terms: impl IntoIterator<Item = (f64, f64)>) {
        let (mut z, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (p, t) in terms {
            z += p;
            m1 += p * t;
            m2 += p * t * t;
        }
        if z > 0.0 {
            let mean = m1 / z;
            self.mean += mean;
            self.var += (m2 / z - mean * mean).max(0.0);
        }
    }

    /// `P(X < d)` and `E[X; X < d]` under a gamma law with these moments.
    fn below(&self, d: f64) -> (f64, f64) {
        if self.var <= 1e-12 * self.mean * self.mean || self.mean <= 0.0 {
            return if self.mean < d { (1.0, self.mean) } else { (0.0, 0.0) };
        }
        let shape = self.mean * self.mean / self.var;
        let rate = self.mean / self.var;
        let cdf = |k: f64| Gamma::new(k, rate).map(|g| g.cdf(d)).unwrap_or(f64::NAN);
        (cdf(shape), self.mean * cdf(shape + 1.0))
    }
}

/// Stationary legacy traffic seen at a random instant.
#[derive(Debug, Clone)]
struct Background {
    group: Group,
    /// Delivered A-MPDUs per microsecond.
    rate: f64,
    residual_mean: f64,
    residual_var: f64,
}

fn background(pop: &PopulationMix, dur: &DurationTable, overhead: f64) -> Result<Background> {
    let mut g = Group::new(pop.n_ax, &pop.edca_ax, true);
    g.redraw(0, 1.0);
    let mut converged = false;
    for _ in 0..MAX_TICKS {
        let before = g.clone();
        run_rounds(None, Some(&mut g), (0, 0), |_, _| {});
        g.advance();
        if g.distance(&before) < STATIONARY_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure {
            iterations: MAX_TICKS,
            residual: f64::NAN,
        });
    }

    // one more tick to read off the busy-round mix
    let start = g.clone();
    let (mut time, mut delivered, mut m2, mut m3) = (dur.sigma, 0.0, 0.0, 0.0);
    let mut probe = g.clone();
    run_rounds(None, Some(&mut probe), (0, 0), |round, _| {
        delivered += round.success_ax;
        for (p, t) in round.terms(dur) {
            let span = t + overhead;
            time += p * span;
            m2 += p * span * span / 2.0;
            m3 += p * span * span * span / 3.0;
        }
    });
    let residual_mean = m2 / time;
    let residual_var = (m3 / time - residual_mean * residual_mean).max(0.0);

    // the epoch ends a busy round: restart from the post-round state
    let x = start.attempting();
    let n = start.n;
    let busy = 1.0 - (1.0 - x).powi(n as i32);
    let mut post = start.clone();
    if busy > 0.0 {
        let p_self = x / busy;
        let mut fired = start.clone();
        fired.stages.iter_mut().flatten().for_each(|v| *v = 0.0);
        let clear = (1.0 - x).powi(n as i32 - 1);
        let last = fired.stages.len() - 1;
        for (j, row) in start.stages.iter().enumerate() {
            let share = row[0] / x;
            fired.redraw(if j == last { 0 } else { j + 1 }, share * (1.0 - clear));
        }
        fired.redraw(0, clear);
        let mut idle = start.clone();
        idle.stages.iter_mut().for_each(|s| s[0] = 0.0);
        let idle_mass = idle.active();
        for (p, f) in post.stages.iter_mut().zip(fired.stages.iter().zip(&idle.stages)) {
            for (v, (a, b)) in p.iter_mut().zip(f.0.iter().zip(f.1)) {
                *v = p_self * a + (1.0 - p_self) * b / idle_mass;
            }
        }
    }
    Ok(Background {
        group: post,
        rate: delivered / time,
        residual_mean,
        residual_var,
    })
}

/// Plays the busy rounds of one tick. `observe` sees each round before it
/// is resolved, with the attempting groups still in place.
fn run_rounds(
    mut bf: Option<&mut Group>,
    mut ax: Option<&mut Group>,
    bonus: (usize, usize),
    mut observe: impl FnMut(&Round, (Option<&Group>, Option<&Group>)),
) {
    for _ in 0..MAX_ROUNDS {
        let xb = bf.as_deref().map_or(0.0, Group::attempting);
        let xa = ax.as_deref().map_or(0.0, Group::attempting);
        if xb < NEGLIGIBLE && xa < NEGLIGIBLE {
            break;
        }
        let round = Round::new(bf.as_deref(), ax.as_deref());
        observe(&round, (bf.as_deref(), ax.as_deref()));
        let quiet_b = bf.as_deref().map_or(1.0, |g| g.silent(0));
        let quiet_a = ax.as_deref().map_or(1.0, |g| g.silent(0));
        if let Some(g) = bf.as_deref_mut() {
            let clear = g.silent(1) * quiet_a;
            g.resolve(clear);
        }
        if let Some(g) = ax.as_deref_mut() {
            let clear = g.silent(1) * quiet_b;
            g.resolve(clear);
        }
        // after a busy round the class with the shorter AIFS counts down alone
        let busy = 1.0 - quiet_b * quiet_a;
        if let Some(g) = bf.as_deref_mut() {
            g.shift(bonus.0, busy);
        }
        if let Some(g) = ax.as_deref_mut() {
            g.shift(bonus.1, busy);
        }
    }
}

/// Outcome of one synchronized batch of sensing requests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransientBatch {
    /// Mean latency in microseconds of requests whose session starts before
    /// the deadline.
    pub latency: f64,
    /// Mean latency ignoring the deadline.
    pub unbounded_latency: f64,
    /// Probability that a request is still waiting at the deadline.
    pub drop_probability: f64,
    pub collisions_per_request: f64,
    /// Aggregate legacy MSDU throughput over one interval, bits per second.
    pub ax_throughput_bps: f64,
    /// Fraction of the interval carrying successful A-MPDUs.
    pub ax_normalized: f64,
    pub ticks: usize,
}

/// Every sensing AP receives a request at time zero while the legacy APs are
/// in steady state; the next batch arrives after `interval` microseconds.
pub fn transient_batch(
    pop: &PopulationMix,
    dur: &DurationTable,
    traffic: &AxTrafficProfile,
    interval: f64,
) -> Result<TransientBatch> {
    if pop.n_bf == 0 {
        return Err(Error::invalid("population.n_bf", "the batch model needs a sensing AP"));
    }
    if !(interval.is_finite() && interval > 0.0) {
        return Err(Error::invalid("arrival.interval_ms", "must be > 0"));
    }
    let e_bf = pop.edca_bf.extra_aifs_slots();
    let e_ax = if pop.n_ax > 0 {
        pop.edca_ax.extra_aifs_slots()
    } else {
        e_bf
    };
    let e_max = e_bf.max(e_ax);
    let bonus_bf = (e_max - e_bf) as usize;
    let bonus_ax = (e_max - e_ax) as usize;
    let overhead = e_max as f64 * dur.sigma;

    let mut bf = Group::new(pop.n_bf, &pop.edca_bf, false);
    bf.redraw(0, 1.0);
    let bg = if pop.n_ax > 0 {
        Some(background(pop, dur, overhead)?)
    } else {
        None
    };
    let mut ax = bg.as_ref().map(|b| b.group.clone());

    let mut tagged = Moments {
        mean: bg.as_ref().map_or(0.0, |b| b.residual_mean) + overhead,
        var: bg.as_ref().map_or(0.0, |b| b.residual_var),
    };
    let mut done = 0.0;
    let mut collisions = 0.0;
    let mut completions: Vec<(f64, Moments)> = Vec::new();
    let (mut elapsed, mut delivered) = (0.0, 0.0);
    let mut ticks = 0;

    while ticks < MAX_TICKS {
        ticks += 1;
        run_rounds(Some(&mut bf), ax.as_mut(), (bonus_bf, bonus_ax), |round, (b, a)| {
            let b = b.expect("sensing group present");
            let active = b.active();
            let own = if active > 0.0 { b.attempting() / active } else { 0.0 };
            let others_b = b.silent(1);
            let quiet_a = a.map_or(1.0, |g| g.silent(0));
            let xb = b.attempting();
            let (xa, na) = a.map_or((0.0, 0), |g| (g.attempting(), g.n));
            let win = others_b * quiet_a;

            let r = (1.0 - done) * own * win;
            if r > 1e-16 {
                completions.push((r, tagged));
            }
            collisions += (1.0 - done) * own * (1.0 - win);
            done += r;

            // span of this round given the tagged AP is waiting and does not win
            let nb = b.n;
            let one_b = if nb > 1 {
                (nb - 1) as f64 * xb * (1.0 - xb).powi(nb as i32 - 2) * quiet_a
            } else {
                0.0
            };
            let one_a = na as f64 * xa * (1.0 - xa).powi(na.saturating_sub(1) as i32) * others_b;
            let rest = 1.0 - own;
            let busy = |t: f64| t + overhead;
            tagged.add_mixture([
                (own * quiet_a * (1.0 - others_b), busy(dur.t_c_bf)),
                (own * (1.0 - quiet_a), busy(dur.t_c_cross)),
                (rest * others_b * quiet_a, 0.0),
                (rest * one_b, busy(dur.t_s_bf)),
                (rest * one_a, busy(dur.t_s_ax)),
                (rest * ((1.0 - others_b) * quiet_a - one_b).max(0.0), busy(dur.t_c_bf)),
                (rest * ((1.0 - quiet_a) * others_b - one_a).max(0.0), busy(dur.t_c_ax)),
                (rest * (1.0 - quiet_a) * (1.0 - others_b), busy(dur.t_c_cross)),
            ]);

            if elapsed < interval {
                elapsed += round.terms(dur).iter().map(|(p, t)| p * (t + overhead)).sum::<f64>();
                delivered += round.success_ax;
            }
        });
        if elapsed < interval {
            elapsed += dur.sigma;
        }
        tagged.mean += dur.sigma;
        bf.advance();
        if let Some(g) = ax.as_mut() {
            g.advance();
        }
        if 1.0 - done < 1e-10 {
            break;
        }
    }
    if 1.0 - done > 1e-6 {
        return Err(Error::ConvergenceFailure {
            iterations: ticks,
            residual: 1.0 - done,
        });
    }
    // legacy APs are back in steady state for the rest of the interval
    if let Some(b) = &bg {
        if elapsed < interval {
            delivered += b.rate * (interval - elapsed);
        }
    }
    let horizon = elapsed.max(interval);

    let (mut p_in, mut partial, mut unbounded) = (0.0, 0.0, 0.0);
    for (w, m) in &completions {
        let (p, e) = m.below(interval);
        p_in += w * p;
        partial += w * (e + p * dur.t_cfp());
        unbounded += w * (m.mean + dur.t_cfp());
    }
    let total: f64 = completions.iter().map(|(w, _)| w).sum();
    let payload = dur.ax_mpdus as f64 * traffic.msdu_bits;
    Ok(TransientBatch {
        latency: if p_in > 0.0 { partial / p_in } else { f64::NAN },
        unbounded_latency: unbounded / total,
        drop_probability: (1.0 - p_in / total).clamp(0.0, 1.0),
        collisions_per_request: collisions,
        ax_throughput_bps: delivered * payload / horizon * 1e6,
        ax_normalized: delivered * dur.t_f_ax / horizon,
        ticks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{event_durations, MacTiming, SensingProfile};

    fn setup(n_bf: u32, n_ax: u32) -> (PopulationMix, DurationTable, AxTrafficProfile) {
        let pop = PopulationMix {
            n_bf,
            n_ax,
            ..PopulationMix::default()
        };
        let traffic = AxTrafficProfile::default();
        let dur = event_durations(&MacTiming::default(), &traffic, &SensingProfile::default()).unwrap();
        (pop, dur, traffic)
    }

    #[test]
    fn lone_sensing_ap_waits_its_counter() {
        let (pop, dur, traffic) = setup(1, 0);
        let b = transient_batch(&pop, &dur, &traffic, 100e3).unwrap();
        // one extra AIFS slot, a uniform counter over 15 values, then the session
        let w = pop.edca_bf.cw_min as f64;
        let expect = dur.sigma * (1.0 + (w - 1.0) / 2.0) + dur.t_cfp();
        assert!((b.latency - expect).abs() < 1e-6, "{} vs {expect}", b.latency);
        assert_eq!(b.collisions_per_request, 0.0);
        assert!(b.drop_probability < 1e-12);
    }

    #[test]
    fn two_sensing_aps_collide_on_equal_counters() {
        let (pop, dur, traffic) = setup(2, 0);
        let b = transient_batch(&pop, &dur, &traffic, 100e3).unwrap();
        let w = pop.edca_bf.cw_min as f64;
        // the first attempt collides exactly when both drew the same counter
        assert!(b.collisions_per_request > 1.0 / w);
        assert!(b.collisions_per_request < 1.5 / w);
    }

    #[test]
    fn group_mass_is_conserved_by_resolve_shift_and_advance() {
        let (pop, _, _) = setup(1, 0);
        let mut g = Group::new(1, &pop.edca_bf, true);
        g.redraw(0, 1.0);
        for _ in 0..50 {
            g.resolve(0.7);
            g.shift(2, 0.4);
            assert!((g.active() - 1.0).abs() < 1e-12);
            g.stages.iter_mut().for_each(|s| s[0] = 0.0);
            let before = g.active();
            g.advance();
            assert!((g.active() - before).abs() < 1e-12);
            g.redraw(0, 1.0 - g.active());
        }
    }

    #[test]
    fn throughput_falls_and_latency_rises_with_sensing_aps() {
        let (p1, dur, traffic) = setup(1, 1);
        let (p5, ..) = setup(5, 1);
        let a = transient_batch(&p1, &dur, &traffic, 100e3).unwrap();
        let b = transient_batch(&p5, &dur, &traffic, 100e3).unwrap();
        assert!(b.latency > a.latency);
        assert!(b.ax_throughput_bps < a.ax_throughput_bps);
        assert!(a.ax_normalized > 0.0 && a.ax_normalized < 1.0);
    }

    #[test]
    fn short_interval_drops_more() {
        let (pop, dur, traffic) = setup(3, 3);
        let long = transient_batch(&pop, &dur, &traffic, 100e3).unwrap();
        let short = transient_batch(&pop, &dur, &traffic, 10e3).unwrap();
        assert!(short.drop_probability > long.drop_probability);
        assert!(short.latency < long.latency);
    }
}
