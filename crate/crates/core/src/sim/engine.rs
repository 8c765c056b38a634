use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ap::{ApState, Pending};
use super::arrivals::ArrivalStream;
use super::channel::{classify, OutcomeKind};
use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::metrics::{BackoffStats, RunMetrics, Tally};
use crate::model::{DurationTable, Technology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensingOutcome {
    Completed,
    Dropped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingRecord {
    pub ap_id: usize,
    pub request_time: f64,
    pub access_time: Option<f64>,
    pub completion_time: Option<f64>,
    pub outcome: SensingOutcome,
    pub collisions_experienced: u32,
}

impl SensingRecord {
    pub fn latency(&self) -> Option<f64> {
        self.completion_time.map(|c| c - self.request_time)
    }
}

/// Per-AP random streams: one for backoff draws, one for request arrivals.
fn streams(seed: u64, ap: usize) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut backoff = ChaCha8Rng::seed_from_u64(seed);
    backoff.set_stream(2 * ap as u64);
    let mut arrivals = ChaCha8Rng::seed_from_u64(seed);
    arrivals.set_stream(2 * ap as u64 + 1);
    (backoff, arrivals)
}

/// A validated scenario ready to be run with any number of seeds.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: ScenarioConfig,
    dur: DurationTable,
}

struct Run<'a> {
    sim: &'a Simulator,
    horizon: f64,
    t: f64,
    aps: Vec<ApState>,
    rngs: Vec<ChaCha8Rng>,
    arrivals: Vec<Option<ArrivalStream>>,
    transmitters: Vec<usize>,
    delivered_bits: Vec<f64>,
    out: RunMetrics,
}

impl Simulator {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        Ok(Simulator {
            dur: config.durations()?,
            config: config.clone(),
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn durations(&self) -> &DurationTable {
        &self.dur
    }

    /// Runs one seed to the configured duration. Deterministic in `(config, seed)`.
    pub fn run(&self, seed: u64) -> RunMetrics {
        let mut run = Run::new(self, seed);
        run.simulate();
        run.finish()
    }
}

pub fn run(config: &ScenarioConfig, seed: u64) -> Result<RunMetrics> {
    Ok(Simulator::new(config)?.run(seed))
}

impl<'a> Run<'a> {
    fn new(sim: &'a Simulator, seed: u64) -> Self {
        let pop = &sim.config.population;
        let n = (pop.n_bf + pop.n_ax) as usize;
        let mut aps = Vec::with_capacity(n);
        let mut rngs = Vec::with_capacity(n);
        let mut arrivals = Vec::with_capacity(n);
        for id in 0..n {
            let tech = if id < pop.n_bf as usize {
                Technology::Bf
            } else {
                Technology::Ax
            };
            let (backoff, arrival) = streams(seed, id);
            aps.push(ApState::new(id, tech, *pop.edca(tech)));
            rngs.push(backoff);
            arrivals.push(
                (tech == Technology::Bf).then(|| ArrivalStream::new(sim.config.arrival, sim.config.phase, arrival)),
            );
        }
        let mut run = Run {
            sim,
            horizon: sim.config.duration_us(),
            t: 0.0,
            aps,
            rngs,
            arrivals,
            transmitters: Vec::with_capacity(n),
            delivered_bits: vec![0.0; pop.n_ax as usize],
            out: RunMetrics {
                seed,
                duration_us: sim.config.duration_us(),
                latency_samples: Vec::new(),
                dropped_count: 0,
                attempted_count: 0,
                request_count: 0,
                per_ap_goodput: Vec::new(),
                channel_tally: OutcomeKind::ALL.iter().map(|&k| (k, Tally::default())).collect(),
                records: Vec::new(),
                backoff: BackoffStats::default(),
            },
        };
        for id in 0..n {
            let continuous = run.arrivals[id].as_ref().is_some_and(|s| s.is_continuous());
            if run.aps[id].technology == Technology::Ax {
                run.aps[id].pending = Pending::Data;
                run.arm(id, false);
            } else if continuous {
                run.request(id, 0.0, false);
            }
        }
        run.process_arrivals(false);
        run
    }

    /// Fresh backoff for a newly queued frame or request. After a busy span the
    /// DIFS share of AIFS has already elapsed.
    fn arm(&mut self, id: usize, after_busy: bool) {
        let ap = &mut self.aps[id];
        ap.restart(&mut self.rngs[id]);
        ap.aifs_remaining = if after_busy {
            ap.edca.extra_aifs_slots()
        } else {
            ap.edca.aifs
        };
    }

    fn request(&mut self, id: usize, at: f64, after_busy: bool) {
        self.out.request_count += 1;
        let mut superseded = false;
        if let Pending::Sensing {
            request_time,
            collisions,
        } = self.aps[id].pending
        {
            superseded = true;
            self.out.dropped_count += 1;
            self.out.attempted_count += 1;
            self.out.records.push(SensingRecord {
                ap_id: id,
                request_time,
                access_time: None,
                completion_time: None,
                outcome: SensingOutcome::Dropped,
                collisions_experienced: collisions,
            });
        }
        self.aps[id].pending = Pending::Sensing {
            request_time: at,
            collisions: 0,
        };
        if !superseded || self.sim.config.sim.drop_resets_backoff {
            self.arm(id, after_busy);
        }
    }

    fn process_arrivals(&mut self, after_busy: bool) {
        for id in 0..self.aps.len() {
            while let Some(stream) = self.arrivals[id].as_mut() {
                if stream.peek().is_none_or(|a| a >= self.horizon) {
                    break;
                }
                let Some(at) = stream.pop_until(self.t) else { break };
                self.request(id, at, after_busy);
            }
        }
    }

    fn next_arrival(&self) -> Option<f64> {
        self.arrivals
            .iter()
            .flatten()
            .filter_map(|s| s.peek())
            .filter(|&a| a < self.horizon)
            .fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.min(a))))
    }

    fn record_event(&mut self, kind: OutcomeKind, count: u64, span: f64) {
        let counted = (self.t + span).min(self.horizon) - self.t;
        let tally = self.out.channel_tally.get_mut(&kind).expect("all kinds present");
        tally.count += count;
        tally.span += counted;
    }

    fn simulate(&mut self) {
        let sigma = self.sim.dur.sigma;
        while self.t < self.horizon {
            self.transmitters.clear();
            self.transmitters
                .extend(self.aps.iter().filter(|a| a.is_ready()).map(|a| a.id));
            if self.transmitters.is_empty() {
                // run of idle slots up to the next transmission, arrival or the end
                let to_ready = self.aps.iter().filter_map(|a| a.slots_to_ready()).min();
                let to_end = ((self.horizon - self.t) / sigma).ceil().max(1.0) as u64;
                let to_arrival = self
                    .next_arrival()
                    .map(|a| ((a - self.t) / sigma).ceil().max(1.0) as u64);
                let m = [to_ready, Some(to_end), to_arrival]
                    .into_iter()
                    .flatten()
                    .min()
                    .unwrap();
                self.record_event(OutcomeKind::Idle, m, m as f64 * sigma);
                for id in 0..self.aps.len() {
                    let was_counting = self.aps[id].is_contending();
                    let dec = self.aps[id].idle_slots(m);
                    if was_counting && self.aps[id].technology == Technology::Bf {
                        self.out.backoff.time += m as f64 * sigma;
                        self.out.backoff.decrements += dec;
                    }
                }
                self.t += m as f64 * sigma;
                self.process_arrivals(false);
            } else {
                let (kind, span) = classify(&self.aps, &self.transmitters, &self.sim.dur);
                self.record_event(kind, 1, span);
                self.busy_event(kind, span);
                self.t += span;
                self.process_arrivals(true);
            }
        }
    }

    fn busy_event(&mut self, kind: OutcomeKind, span: f64) {
        let start = self.t;
        let end = start + span;
        for id in 0..self.aps.len() {
            let transmitting = self.transmitters.contains(&id);
            if !transmitting {
                if self.aps[id].technology == Technology::Bf && self.aps[id].is_contending() {
                    self.out.backoff.time += span;
                }
                self.aps[id].freeze_and_decrement(true);
                continue;
            }
            if kind.is_collision() {
                self.aps[id].on_collision(&mut self.rngs[id]);
                self.aps[id].aifs_remaining = self.aps[id].edca.extra_aifs_slots();
                continue;
            }
            match self.aps[id].technology {
                Technology::Ax => {
                    if end <= self.horizon {
                        let ax = id - self.sim.config.population.n_bf as usize;
                        self.delivered_bits[ax] += self.sim.dur.ax_mpdus as f64 * self.sim.config.traffic.msdu_bits;
                    }
                    self.arm(id, true);
                }
                Technology::Bf => self.complete_session(id, start),
            }
        }
    }

    fn complete_session(&mut self, id: usize, access: f64) {
        let Pending::Sensing {
            request_time,
            collisions,
        } = self.aps[id].pending
        else {
            unreachable!("a sensing AP only transmits with a pending request")
        };
        let completion = access + self.sim.dur.t_cfp();
        self.aps[id].pending = Pending::None;
        if completion <= self.horizon {
            self.out.attempted_count += 1;
            self.out.latency_samples.push(completion - request_time);
            self.out.records.push(SensingRecord {
                ap_id: id,
                request_time,
                access_time: Some(access),
                completion_time: Some(completion),
                outcome: SensingOutcome::Completed,
                collisions_experienced: collisions,
            });
        }
        if self.arrivals[id].as_ref().is_some_and(|s| s.is_continuous()) && completion < self.horizon {
            self.request(id, completion, true);
        }
    }

    fn finish(mut self) -> RunMetrics {
        let secs = self.horizon / 1e6;
        self.out.per_ap_goodput = self.delivered_bits.iter().map(|b| b / secs).collect();
        self.out
    }
}
