//! Property tests for the invariants of the model, the simulator and the
//! metrics layer.

use std::collections::BTreeMap;

use coexist::analytic::{
    attempt_probability, collision_transitions, mean_window, saturated_sensing_delay, solve_population,
    AnalyticOptions, EventWeights,
};
use coexist::metrics::{failure_rate, quantile_sorted, summarize, BinRule, DistributionSummary, RunMetrics};
use coexist::model::{csi_report_size, AccessCategory, EdcaClass, PopulationMix, Technology};
use coexist::sim::{self, ApState, Pending};
use coexist::{ArrivalMode, PeriodicPhase, ScenarioConfig};
use proptest::prelude::*;
use proptest::sample::select;

const CATEGORIES: [AccessCategory; 5] = [
    AccessCategory::Bk,
    AccessCategory::Be,
    AccessCategory::Vi,
    AccessCategory::Vo,
    AccessCategory::Dcf,
];

fn population() -> impl Strategy<Value = PopulationMix> {
    (0u32..8, 0u32..8, select(&CATEGORIES[..]), select(&CATEGORIES[..]))
        .prop_filter("at least one AP", |(b, a, _, _)| a + b >= 1)
        .prop_map(|(n_bf, n_ax, cb, ca)| PopulationMix {
            n_bf,
            n_ax,
            edca_bf: cb.class(),
            edca_ax: ca.class(),
            ..PopulationMix::default()
        })
}

fn unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fixed_point_probabilities_are_consistent(pop in population()) {
        let sol = solve_population(&pop, &AnalyticOptions::default()).unwrap();
        for p in [sol.tau_bf, sol.tau_ax, sol.p_bf, sol.p_ax, sol.p_t_bf, sol.p_t_ax, sol.p_s_bf, sol.p_s_ax] {
            prop_assert!(unit(p));
        }
        prop_assert!(sol.residual <= AnalyticOptions::default().tolerance);
        if pop.n_bf > 0 {
            let want = 1.0 - (1.0 - sol.tau_bf).powi(pop.n_bf as i32 - 1) * (1.0 - sol.tau_ax).powi(pop.n_ax as i32);
            prop_assert!((sol.p_bf - want).abs() < 1e-12);
        }
        let w = EventWeights::new(&sol);
        prop_assert!((w.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collision_transitions_partition(pop in population().prop_filter("sensing present", |p| p.n_bf > 0)) {
        let sol = solve_population(&pop, &AnalyticOptions::default()).unwrap();
        let cw_bf = mean_window(sol.p_bf, &pop.edca_bf);
        let cw_ax = mean_window(sol.p_ax, &pop.edca_ax);
        let (ci, cs) = collision_transitions(&sol, cw_bf, cw_ax);
        let cc = 1.0 - ci - cs;
        prop_assert!(ci >= 0.0 && cs >= 0.0);
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&cc));
    }

    #[test]
    fn stage_success_weights_normalize(p in 0.0f64..0.95, cat in select(&CATEGORIES[..])) {
        let edca = cat.class();
        let dur = ScenarioConfig::default().durations().unwrap();
        let d = saturated_sensing_delay(p, &dur, 50.0, &edca);
        let mass: f64 = d.stages.iter().map(|s| s.p_success).sum();
        prop_assert!((mass / (1.0 - p.powi(edca.retry_limit as i32 + 1)) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn delay_grows_with_collision_probability(p in 0.0f64..0.9, dp in 0.001f64..0.09) {
        let edca = AccessCategory::Be.class();
        let dur = ScenarioConfig::default().durations().unwrap();
        let lo = saturated_sensing_delay(p, &dur, 40.0, &edca).mean;
        let hi = saturated_sensing_delay(p + dp, &dur, 40.0, &edca).mean;
        prop_assert!(hi > lo);
    }

    #[test]
    fn attempt_probability_falls_with_collisions(p in 0.0f64..0.9, dp in 0.001f64..0.09, cw in 2u32..64) {
        let edca = EdcaClass { cw_min: cw, cw_max: cw * 64, aifs: 2, retry_limit: 6 };
        let a = attempt_probability(p, p, &edca).unwrap();
        let b = attempt_probability(p + dp, p + dp, &edca).unwrap();
        prop_assert!(unit(a) && unit(b));
        prop_assert!(b < a);
    }

    #[test]
    fn csi_size_grows_with_antennas(n_tx in 1u32..16, n_rx in 1u32..16, n_b in 1u32..10, n_sc in 1u32..2000) {
        let base = csi_report_size(n_tx, n_rx, n_b, n_sc).unwrap();
        prop_assert!(csi_report_size(n_tx + 1, n_rx, n_b, n_sc).unwrap() > base);
        prop_assert!(csi_report_size(n_tx, n_rx, n_b, n_sc + 1).unwrap() >= base);
    }

    #[test]
    fn bulk_idle_slots_equal_slot_by_slot_steps(
        cat in select(&CATEGORIES[..]),
        aifs in 0u32..8,
        counter in 0u32..64,
        frac in 0.0f64..=1.0,
    ) {
        let mut a = ApState::new(0, Technology::Bf, cat.class());
        a.pending = Pending::Sensing { request_time: 0.0, collisions: 0 };
        a.aifs_remaining = aifs;
        a.backoff_counter = counter;
        let mut b = a.clone();
        let m = ((aifs + counter) as f64 * frac).floor() as u64;
        let bulk = a.idle_slots(m);
        let stepped = (0..m).filter(|_| b.freeze_and_decrement(false)).count() as u64;
        prop_assert_eq!(bulk, stepped);
        prop_assert_eq!(a, b);
    }
}

fn small_scenario(n_bf: u32, n_ax: u32, interval_ms: f64, staggered: bool) -> ScenarioConfig {
    let mut c = ScenarioConfig::default();
    c.population.n_bf = n_bf;
    c.population.n_ax = n_ax;
    c.arrival = ArrivalMode::Periodic { interval_ms };
    c.phase = if staggered {
        PeriodicPhase::Staggered
    } else {
        PeriodicPhase::Aligned
    };
    c.duration_s = 0.3;
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulated_channel_time_is_conserved(
        n_bf in 0u32..4,
        n_ax in 0u32..4,
        interval_ms in select(vec![5.0, 10.0, 50.0]),
        staggered: bool,
        seed in 0u64..1000,
    ) {
        prop_assume!(n_bf + n_ax >= 1);
        let c = small_scenario(n_bf, n_ax, interval_ms, staggered);
        let dur = c.durations().unwrap();
        let m = sim::run(&c, seed).unwrap();
        prop_assert!((m.total_span() - m.duration_us).abs() < 1e-6 * m.duration_us);
        prop_assert!(m.dropped_count <= m.attempted_count);
        prop_assert!(m.attempted_count <= m.request_count);
        prop_assert!(m.latency_samples.iter().all(|&l| l >= dur.t_cfp()));
        prop_assert_eq!(m.latency_samples.len() as u64, m.attempted_count - m.dropped_count);
        prop_assert_eq!(&m, &sim::run(&c, seed).unwrap());
    }
}

fn run_metrics(seed: u64, latencies_ms: Vec<f64>, dropped: u64, extra: u64, goodput: f64) -> RunMetrics {
    let completed = latencies_ms.len() as u64;
    RunMetrics {
        seed,
        duration_us: 1e6,
        latency_samples: latencies_ms.into_iter().map(|l| l * 1e3).collect(),
        dropped_count: dropped,
        attempted_count: completed + dropped,
        request_count: completed + dropped + extra,
        per_ap_goodput: vec![goodput],
        channel_tally: BTreeMap::new(),
        records: Vec::new(),
        backoff: Default::default(),
    }
}

fn runs() -> impl Strategy<Value = Vec<RunMetrics>> {
    prop::collection::vec(
        (
            prop::collection::vec(0.5f64..60.0, 0..40),
            0u64..10,
            0u64..2,
            0.0f64..6e7,
        ),
        1..8,
    )
    .prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (l, d, e, g))| run_metrics(i as u64, l, d, e, g))
            .collect()
    })
}

/// Sort-based quantile written independently of the library: rank
/// `p (n - 1)` split into integer and fractional parts.
fn reference_quantile(samples: &[f64], p: f64) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = p * (v.len() - 1) as f64;
    let (i, frac) = (rank as usize, rank.fract());
    match v.get(i + 1) {
        Some(next) => v[i] + frac * (next - v[i]),
        None => v[i],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn summaries_ignore_run_order(runs in runs(), seed in any::<u64>()) {
        let mut shuffled = runs.clone();
        let n = shuffled.len();
        for i in (1..n).rev() {
            shuffled.swap(i, (seed.rotate_left(i as u32) % (i as u64 + 1)) as usize);
        }
        prop_assert_eq!(summarize(&runs, BinRule::default()), summarize(&shuffled, BinRule::default()));
    }

    #[test]
    fn quantiles_match_reference_and_are_ordered(xs in prop::collection::vec(-1e3f64..1e3, 1..300)) {
        let s = DistributionSummary::from_samples(&xs, BinRule::FreedmanDiaconis);
        let q = s.stats.unwrap();
        for (got, p) in [(q.p5, 0.05), (q.p25, 0.25), (q.median, 0.5), (q.p75, 0.75), (q.p95, 0.95)] {
            prop_assert_eq!(got, reference_quantile(&xs, p));
        }
        prop_assert!(q.p5 <= q.p25 && q.p25 <= q.median && q.median <= q.p75 && q.p75 <= q.p95);
        prop_assert_eq!(s.histogram.iter().map(|b| b.count).sum::<u64>(), xs.len() as u64);
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        prop_assert_eq!(quantile_sorted(&sorted, 0.0), Some(sorted[0]));
    }

    #[test]
    fn failure_rate_is_a_percentage(runs in runs()) {
        let f = failure_rate(&runs);
        match f.percent {
            Some(p) => prop_assert!((0.0..=100.0).contains(&p)),
            None => prop_assert_eq!(f.attempted, 0),
        }
        prop_assert!(f.dropped <= f.attempted);
    }

    #[test]
    fn pooling_a_run_twice_doubles_the_sample(runs in runs()) {
        let one = summarize(&runs[..1], BinRule::default());
        let two = summarize(&[runs[0].clone(), runs[0].clone()], BinRule::default());
        prop_assert_eq!(two.latency_ms.n_samples, 2 * one.latency_ms.n_samples);
        prop_assert_eq!(two.latency_ms.stats.map(|s| s.median), one.latency_ms.stats.map(|s| s.median));
        prop_assert_eq!(two.failure.percent, one.failure.percent);
    }
}
