use serde::{Deserialize, Serialize};

use super::options::{AnalyticOptions, FreezeModel};
use crate::error::{Error, Result};
use crate::model::{EdcaClass, PopulationMix, Technology};

/// Per-slot attempt probability of a node in the backoff chain with
/// freezing, given its collision probability `p_coll` and freezing
/// probability `p_f`.
///
/// Every backoff state `k >= 1` is left with probability `1 - p_f` per slot,
/// so stage `j` lasts `1 + (W_j - 1) / (2 (1 - p_f))` slots on average and
/// is entered with weight `p_coll^j`.
pub fn attempt_probability(p_coll: f64, p_f: f64, edca: &EdcaClass) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_coll) {
        return Err(Error::invalid("p_coll", format!("{p_coll} outside [0, 1]")));
    }
    if !(0.0..=1.0).contains(&p_f) || p_f.is_nan() {
        return Err(Error::invalid("p_f", format!("{p_f} outside [0, 1]")));
    }
    if p_f >= 1.0 {
        return Err(Error::SingularModel {
            message: "freezing probability of 1 stalls every backoff counter".into(),
        });
    }
    let freeze = 1.0 / (1.0 - p_f);
    let mut attempts = 0.0;
    let mut slots = 0.0;
    let mut weight = 1.0;
    for w in edca.windows() {
        let mean_counter = (w as f64 - 1.0) / 2.0;
        attempts += weight;
        slots += (1.0 + freeze * mean_counter) * weight;
        weight *= p_coll;
    }
    Ok(attempts / slots)
}

/// Converged attempt, collision and channel-event probabilities of both populations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointSolution {
    pub n_bf: u32,
    pub n_ax: u32,
    pub tau_bf: f64,
    pub tau_ax: f64,
    /// Collision probability seen by a transmitting AP.
    pub p_bf: f64,
    pub p_ax: f64,
    /// Freezing probability of a backoff counter.
    pub p_f_bf: f64,
    pub p_f_ax: f64,
    /// Probability that at least one AP of the population transmits in a slot.
    pub p_t_bf: f64,
    pub p_t_ax: f64,
    /// Probability that exactly one AP of the population transmits, given
    /// that at least one of them does.
    pub p_s_bf: f64,
    pub p_s_ax: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl FixedPointSolution {
    pub fn tau(&self, tech: Technology) -> f64 {
        match tech {
            Technology::Bf => self.tau_bf,
            Technology::Ax => self.tau_ax,
        }
    }

    pub fn p_coll(&self, tech: Technology) -> f64 {
        match tech {
            Technology::Bf => self.p_bf,
            Technology::Ax => self.p_ax,
        }
    }

    pub fn count(&self, tech: Technology) -> u32 {
        match tech {
            Technology::Bf => self.n_bf,
            Technology::Ax => self.n_ax,
        }
    }

    /// Builds the derived probabilities for an arbitrary attempt pair.
    /// Populations with zero members have `tau = p = 0`.
    pub fn from_taus(n_bf: u32, n_ax: u32, tau_bf: f64, tau_ax: f64, freeze: FreezeModel) -> FixedPointSolution {
        let tau_bf = if n_bf == 0 { 0.0 } else { tau_bf };
        let tau_ax = if n_ax == 0 { 0.0 } else { tau_ax };
        let p_bf = collision_probability(tau_bf, n_bf, tau_ax, n_ax);
        let p_ax = collision_probability(tau_ax, n_ax, tau_bf, n_bf);
        let (p_t_bf, p_s_bf) = busy_and_success(tau_bf, n_bf);
        let (p_t_ax, p_s_ax) = busy_and_success(tau_ax, n_ax);
        FixedPointSolution {
            n_bf,
            n_ax,
            tau_bf,
            tau_ax,
            p_bf,
            p_ax,
            p_f_bf: freeze.apply(p_bf),
            p_f_ax: freeze.apply(p_ax),
            p_t_bf,
            p_t_ax,
            p_s_bf,
            p_s_ax,
            residual: 0.0,
            iterations: 0,
        }
    }
}

/// Probability that at least one other AP transmits alongside a tagged AP
/// of the `own` population.
pub(crate) fn collision_probability(own_tau: f64, own_n: u32, other_tau: f64, other_n: u32) -> f64 {
    if own_n == 0 {
        return 0.0;
    }
    1.0 - (1.0 - own_tau).powi(own_n as i32 - 1) * (1.0 - other_tau).powi(other_n as i32)
}

fn busy_and_success(tau: f64, n: u32) -> (f64, f64) {
    if n == 0 || tau == 0.0 {
        return (0.0, 0.0);
    }
    if n == 1 {
        return (tau, 1.0);
    }
    let p_t = 1.0 - (1.0 - tau).powi(n as i32);
    let exactly_one = n as f64 * tau * (1.0 - tau).powi(n as i32 - 1);
    (p_t, (exactly_one / p_t).min(1.0))
}

/// Solves the coupled attempt / collision equations of the two populations
/// by damped fixed-point iteration on the attempt probabilities.
pub fn solve_population(pop: &PopulationMix, opts: &AnalyticOptions) -> Result<FixedPointSolution> {
    pop.validate("population")?;
    let (n_bf, n_ax) = (pop.n_bf, pop.n_ax);
    let start = |e: &EdcaClass| 2.0 / (e.cw_min as f64 + 1.0);
    let mut tau = [start(&pop.edca_bf), start(&pop.edca_ax)];
    let mut damping = 0.5;
    let mut prev_residual = f64::INFINITY;
    let mut residual = f64::INFINITY;

    for iteration in 0..opts.max_iterations {
        let sol = FixedPointSolution::from_taus(n_bf, n_ax, tau[0], tau[1], opts.freeze);
        let proposed = [
            if n_bf == 0 {
                0.0
            } else {
                attempt_probability(sol.p_bf, sol.p_f_bf, &pop.edca_bf)?
            },
            if n_ax == 0 {
                0.0
            } else {
                attempt_probability(sol.p_ax, sol.p_f_ax, &pop.edca_ax)?
            },
        ];
        residual = (proposed[0] - sol.tau_bf).abs().max((proposed[1] - sol.tau_ax).abs());
        if residual <= opts.tolerance {
            return Ok(FixedPointSolution {
                residual,
                iterations: iteration,
                ..sol
            });
        }
        if residual > prev_residual && damping > 1e-4 {
            damping *= 0.5;
        }
        prev_residual = residual;
        tau[0] = sol.tau_bf + damping * (proposed[0] - sol.tau_bf);
        tau[1] = sol.tau_ax + damping * (proposed[1] - sol.tau_ax);
    }
    Err(Error::ConvergenceFailure {
        iterations: opts.max_iterations,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AccessCategory;

    fn class(cw_min: u32, retry_limit: u32) -> EdcaClass {
        EdcaClass {
            cw_min,
            cw_max: cw_min << retry_limit,
            aifs: 2,
            retry_limit,
        }
    }

    /// Term-by-term evaluation of the closed form, inner sum included.
    fn attempt_by_summation(p: f64, p_f: f64, e: &EdcaClass) -> f64 {
        let l = e.retry_limit as i32;
        let num = (1.0 - p.powi(l + 1)) / (1.0 - p);
        let mut den = 0.0;
        for j in 0..=e.retry_limit {
            let w = e.window(j);
            let inner: f64 = (1..w).map(|k| (w - k) as f64 / w as f64).sum();
            den += (1.0 + inner / (1.0 - p_f)) * p.powi(j as i32);
        }
        num / den
    }

    #[test]
    fn lone_node_closed_form() {
        let t = attempt_probability(0.0, 0.0, &class(16, 5)).unwrap();
        assert!((t - 2.0 / 17.0).abs() < 1e-15);
    }

    #[test]
    fn zero_collision_keeps_only_first_stage() {
        for l in 0..6 {
            for &pf in &[0.0, 0.3, 0.7] {
                let t = attempt_probability(0.0, pf, &class(16, l)).unwrap();
                let expect = 1.0 / (1.0 + 15.0 / (2.0 * (1.0 - pf)));
                assert!((t - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn matches_term_by_term_summation() {
        let e = class(16, 5);
        let t = attempt_probability(0.2, 0.2, &e).unwrap();
        let oracle = attempt_by_summation(0.2, 0.2, &e);
        assert!((t - oracle).abs() < 1e-14, "{t} vs {oracle}");
        // frozen value from the summation oracle
        assert!((t - 0.073_235_554_680_578_82).abs() < 1e-12, "{t}");
        let be = AccessCategory::Be.class();
        for &(p, pf) in &[(0.05, 0.1), (0.4, 0.4), (0.9, 0.5)] {
            let a = attempt_probability(p, pf, &be).unwrap();
            assert!((a - attempt_by_summation(p, pf, &be)).abs() < 1e-13);
        }
    }

    #[test]
    fn singular_freezing_rejected() {
        assert!(matches!(
            attempt_probability(0.1, 1.0, &class(16, 5)),
            Err(Error::SingularModel { .. })
        ));
        assert!(attempt_probability(1.5, 0.0, &class(16, 5)).is_err());
    }

    fn mix(n_bf: u32, n_ax: u32) -> PopulationMix {
        PopulationMix {
            n_bf,
            n_ax,
            ..PopulationMix::default()
        }
    }

    #[test]
    fn lone_bf_never_collides() {
        let e = class(16, 5);
        let pop = PopulationMix {
            edca_bf: e,
            ..mix(1, 0)
        };
        let s = solve_population(&pop, &AnalyticOptions::default()).unwrap();
        assert_eq!(s.p_bf, 0.0);
        assert!((s.tau_bf - 2.0 / 17.0).abs() < 1e-12);
        assert!((s.p_t_bf - s.tau_bf).abs() < 1e-15);
        assert!((s.p_s_bf - 1.0).abs() < 1e-15);
        assert_eq!(s.tau_ax, 0.0);
        assert_eq!(s.p_t_ax, 0.0);
    }

    #[test]
    fn residual_definitions_hold() {
        let s = solve_population(&mix(2, 2), &AnalyticOptions::default()).unwrap();
        assert!(s.residual <= 1e-9);
        let p_bf = 1.0 - (1.0 - s.tau_bf) * (1.0 - s.tau_ax).powi(2);
        assert!((s.p_bf - p_bf).abs() < 1e-12);
        let p_ax = 1.0 - (1.0 - s.tau_ax) * (1.0 - s.tau_bf).powi(2);
        assert!((s.p_ax - p_ax).abs() < 1e-12);
        let t_bf = attempt_probability(s.p_bf, s.p_f_bf, &AccessCategory::Be.class()).unwrap();
        assert!((t_bf - s.tau_bf).abs() <= 1e-9);
    }

    #[test]
    fn dense_networks_converge() {
        for n in [10, 20, 40] {
            let s = solve_population(&mix(n, n), &AnalyticOptions::default()).unwrap();
            assert!(s.residual <= 1e-9);
        }
    }

    #[test]
    fn swap_symmetry_is_exact() {
        let pop = PopulationMix {
            n_bf: 3,
            n_ax: 2,
            edca_bf: AccessCategory::Vi.class(),
            edca_ax: AccessCategory::Be.class(),
            ..PopulationMix::default()
        };
        let swapped = PopulationMix {
            n_bf: 2,
            n_ax: 3,
            edca_bf: AccessCategory::Be.class(),
            edca_ax: AccessCategory::Vi.class(),
            ..PopulationMix::default()
        };
        let a = solve_population(&pop, &AnalyticOptions::default()).unwrap();
        let b = solve_population(&swapped, &AnalyticOptions::default()).unwrap();
        assert_eq!(a.tau_bf, b.tau_ax);
        assert_eq!(a.tau_ax, b.tau_bf);
        assert_eq!(a.p_bf, b.p_ax);
        assert_eq!(a.p_ax, b.p_bf);
    }

    #[test]
    fn symmetric_bf_only_population() {
        let s = solve_population(&mix(4, 0), &AnalyticOptions::default()).unwrap();
        assert!((s.p_bf - (1.0 - (1.0 - s.tau_bf).powi(3))).abs() < 1e-12);
        assert_eq!(s.p_ax, 0.0);
    }
}
