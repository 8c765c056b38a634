//! Independent oracles for the closed-form model: an exact solve of the
//! backoff chain, brute-force enumeration of transmit patterns and a
//! slot-event Monte Carlo.

use coexist::analytic::{
    attempt_probability, collision_transitions, mean_event_time, q_pmf, solve_population, unsaturated_sensing_delay,
    AnalyticOptions, FixedPointSolution, FreezeModel,
};
use coexist::model::{DurationTable, EdcaClass, PopulationMix};
use coexist::ScenarioConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{chain_fixed_point, chain_tau, enumerated_transitions, pattern};

fn edca(cw_min: u32, cw_max: u32, retry_limit: u32) -> EdcaClass {
    EdcaClass {
        cw_min,
        cw_max,
        aifs: 2,
        retry_limit,
    }
}

#[test]
fn chain_solve_matches_closed_form_attempt_probability() {
    let e = edca(16, 1024, 5);
    for &(p, p_f) in &[(0.0, 0.0), (0.2, 0.2), (0.45, 0.1), (0.7, 0.6)] {
        let closed = attempt_probability(p, p_f, &e).unwrap();
        let chain = chain_tau(&e, p, p_f);
        assert!((closed - chain).abs() < 1e-10, "p={p}: {closed} vs {chain}");
    }
}

#[test]
fn legacy_only_fixed_point_matches_exact_chain() {
    // W0 = 4, L = 2, two legacy APs, no sensing APs
    let e = edca(4, 16, 2);
    let pop = PopulationMix {
        n_bf: 0,
        n_ax: 2,
        edca_ax: e,
        edca_bf: e,
        ..PopulationMix::default()
    };
    let sol = solve_population(&pop, &AnalyticOptions::default()).unwrap();

    let tau = chain_fixed_point(&e, 2);
    assert!((sol.tau_ax - tau).abs() < 1e-6, "{} vs {tau}", sol.tau_ax);
    assert!((sol.p_ax - tau).abs() < 1e-6);
}

#[test]
fn lone_contender_attempts_with_two_over_window_plus_one() {
    for cw in [3, 7, 15, 31, 1023] {
        let e = edca(cw, 1023.max(cw), 6);
        let tau = attempt_probability(0.0, 0.0, &e).unwrap();
        assert!((tau - 2.0 / (cw as f64 + 1.0)).abs() < 1e-12);
    }
}

fn mixed_solution(n_bf: u32, n_ax: u32) -> FixedPointSolution {
    let pop = PopulationMix {
        n_bf,
        n_ax,
        ..PopulationMix::default()
    };
    solve_population(&pop, &AnalyticOptions::default()).unwrap()
}

#[test]
fn collision_transitions_match_pattern_enumeration() {
    let sol = mixed_solution(3, 2);
    let (cw_bf, cw_ax) = (23.7, 41.3);
    let (p_ci, p_cs) = enumerated_transitions(&sol, cw_bf, cw_ax);
    let (ci, cs) = collision_transitions(&sol, cw_bf, cw_ax);
    assert!((ci - p_ci).abs() < 1e-9, "{ci} vs {p_ci}");
    assert!((cs - p_cs).abs() < 1e-9, "{cs} vs {p_cs}");
    let p_cc = 1.0 - ci - cs;
    assert!((0.0..=1.0).contains(&p_cc));
    assert!((ci + cs + p_cc - 1.0).abs() < 1e-12);
}

#[test]
fn q_pmf_matches_pattern_enumeration() {
    let sol = mixed_solution(3, 2);
    let mut table = [[0.0; 4]; 3];
    for mask in 0..(1u32 << 5) {
        let (prob, a, b) = pattern(&sol, mask);
        table[a as usize][b as usize] += prob;
    }
    for (a, row) in table.iter().enumerate() {
        for (b, &want) in row.iter().enumerate() {
            assert!((q_pmf(&sol, a as u32, b as u32) - want).abs() < 1e-12);
        }
    }
}

fn baseline_durations() -> DurationTable {
    ScenarioConfig::default().durations().unwrap()
}

/// Mean event duration from independent per-AP Bernoulli draws.
fn monte_carlo_event_time(sol: &FixedPointSolution, dur: &DurationTable, slots: u64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..slots {
        let b = (0..sol.n_bf).filter(|_| rng.random::<f64>() < sol.tau_bf).count();
        let a = (0..sol.n_ax).filter(|_| rng.random::<f64>() < sol.tau_ax).count();
        total += match (a, b) {
            (0, 0) => dur.sigma,
            (1, 0) => dur.t_s_ax,
            (0, 1) => dur.t_s_bf,
            (_, 0) => dur.t_c_ax,
            (0, _) => dur.t_c_bf,
            _ => dur.t_c_cross,
        };
    }
    total / slots as f64
}

#[test]
fn mean_event_time_matches_slot_monte_carlo() {
    let dur = baseline_durations();
    let sol = mixed_solution(2, 2);
    let mc = monte_carlo_event_time(&sol, &dur, 10_000_000, 7);
    let tm = mean_event_time(&sol, &dur);
    assert!((mc / tm - 1.0).abs() < 0.01, "{mc} vs {tm}");
}

#[test]
fn mean_event_time_degenerate_forms() {
    let dur = baseline_durations();
    let silent = FixedPointSolution::from_taus(2, 2, 0.0, 0.0, FreezeModel::Collision);
    assert_eq!(mean_event_time(&silent, &dur), dur.sigma);

    let legacy = mixed_solution(0, 3);
    let (t, s) = (legacy.p_t_ax, legacy.p_s_ax);
    let want = (1.0 - t) * dur.sigma + t * s * dur.t_s_ax + t * (1.0 - s) * dur.t_c_ax;
    assert!((mean_event_time(&legacy, &dur) - want).abs() < 1e-9);
}

#[test]
fn unsaturated_delay_is_self_consistent_and_monotone_in_load() {
    let mut cfg = ScenarioConfig::default();
    cfg.population.n_bf = 3;
    cfg.population.n_ax = 1;
    let dur = cfg.durations().unwrap();
    let opts = AnalyticOptions::default();
    let mut prev = 0.0;
    for interval_ms in [1000.0, 500.0, 250.0, 100.0, 50.0] {
        let lambda = 1.0 / (interval_ms * 1e3);
        let d = unsaturated_sensing_delay(&cfg.population, &dur, lambda, &opts).unwrap();
        assert!((d.p0 - (1.0 - lambda * d.e_t)).abs() <= 1e-6);
        assert!(d.e_t >= prev, "E[T] fell at {interval_ms} ms");
        prev = d.e_t;
    }
}
