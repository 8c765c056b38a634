//! Oracles shared by the integration suites.

use coexist::analytic::FixedPointSolution;
use coexist::model::EdcaClass;
use nalgebra::{DMatrix, DVector};

/// Stationary distribution of the per-AP backoff chain with collision
/// probability `p` and freezing probability `p_f`, solved as a dense linear
/// system. Returns the probability of being at counter zero.
pub fn chain_tau(e: &EdcaClass, p: f64, p_f: f64) -> f64 {
    let windows: Vec<usize> = (0..=e.retry_limit)
        .map(|j| (e.cw_min as usize * (1 << j)).min(e.cw_max as usize))
        .collect();
    let offsets: Vec<usize> = windows
        .iter()
        .scan(0, |acc, w| {
            let o = *acc;
            *acc += w;
            Some(o)
        })
        .collect();
    let n: usize = windows.iter().sum();
    let idx = |j: usize, k: usize| offsets[j] + k;
    // P[from][to]
    let mut t = DMatrix::<f64>::zeros(n, n);
    let last = windows.len() - 1;
    for j in 0..=last {
        for k in 0..windows[j] {
            let from = idx(j, k);
            if k > 0 {
                t[(from, from)] += p_f;
                t[(from, idx(j, k - 1))] += 1.0 - p_f;
                continue;
            }
            // attempt: success or final failure restarts at stage 0
            let restart = if j == last { 1.0 } else { 1.0 - p };
            for k0 in 0..windows[0] {
                t[(from, idx(0, k0))] += restart / windows[0] as f64;
            }
            if j < last {
                for k1 in 0..windows[j + 1] {
                    t[(from, idx(j + 1, k1))] += p / windows[j + 1] as f64;
                }
            }
        }
    }
    // pi (T - I) = 0 with one equation replaced by normalization
    let mut a = t.transpose() - DMatrix::<f64>::identity(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for c in 0..n {
        a[(n - 1, c)] = 1.0;
    }
    b[n - 1] = 1.0;
    let pi = a.lu().solve(&b).expect("chain is irreducible");
    (0..=last).map(|j| pi[idx(j, 0)]).sum()
}

/// Collision probability `p` with `p = 1 - (1 - tau(p))^(n - 1)`, found by
/// bisection on the exact chain, for `n` identical APs with `P_f = p`.
pub fn chain_fixed_point(e: &EdcaClass, n: u32) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 0.999_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let tau = chain_tau(e, mid, mid);
        if mid - (1.0 - (1.0 - tau).powi(n as i32 - 1)) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    chain_tau(e, p, p)
}

/// Probability of one transmit pattern: bit i set means AP i transmits;
/// the first `n_bf` bits are sensing APs.
pub fn pattern(sol: &FixedPointSolution, mask: u32) -> (f64, u32, u32) {
    let mut prob = 1.0;
    let (mut a, mut b) = (0, 0);
    for i in 0..sol.n_bf + sol.n_ax {
        let tau = if i < sol.n_bf { sol.tau_bf } else { sol.tau_ax };
        if mask & (1 << i) != 0 {
            prob *= tau;
            if i < sol.n_bf {
                b += 1;
            } else {
                a += 1;
            }
        } else {
            prob *= 1.0 - tau;
        }
    }
    (prob, a, b)
}

/// `(P_ci, P_cs)` by enumerating every transmit pattern of the population.
pub fn enumerated_transitions(sol: &FixedPointSolution, cw_bf: f64, cw_ax: f64) -> (f64, f64) {
    let (stay_bf, stay_ax) = (1.0 - 1.0 / cw_bf, 1.0 - 1.0 / cw_ax);
    let (mut p_ci, mut p_cs) = (0.0, 0.0);
    for mask in 0..(1u32 << (sol.n_bf + sol.n_ax)) {
        let (prob, a, b) = pattern(sol, mask);
        if (2..sol.n_bf).contains(&b) {
            p_ci += prob * stay_ax.powi(a as i32) * stay_bf.powi(b as i32);
            p_cs += prob * b as f64 / cw_bf * stay_bf.powi(b as i32 - 1) * stay_ax.powi(a as i32);
        }
        // the second sum reads the pattern with one legacy transmitter and
        // `k` sensing transmitters, weighted by (1 - 1/CW_ax)^k
        if a == 1 && (1..=sol.n_ax).contains(&b) {
            p_cs += prob / cw_bf * stay_ax.powi(b as i32);
        }
    }
    (p_ci, p_cs)
}
