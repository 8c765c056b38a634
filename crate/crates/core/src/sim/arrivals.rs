use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::config::{ArrivalMode, PeriodicPhase};

/// Request times of one sensing AP. Continuous sensing has no exogenous
/// stream; the engine issues the next request at each completion.
#[derive(Debug, Clone)]
pub struct ArrivalStream {
    kind: StreamKind,
    next: Option<f64>,
    rng: ChaCha8Rng,
}

#[derive(Debug, Clone)]
enum StreamKind {
    Continuous,
    Periodic { offset: f64, interval: f64, k: u64 },
    Poisson { gap: Exp<f64> },
}

impl ArrivalStream {
    pub fn new(mode: ArrivalMode, phase: PeriodicPhase, mut rng: ChaCha8Rng) -> Self {
        let (kind, next) = match mode {
            ArrivalMode::Continuous => (StreamKind::Continuous, None),
            ArrivalMode::Periodic { interval_ms } => {
                let interval = interval_ms * 1e3;
                let offset = match phase {
                    PeriodicPhase::Aligned => 0.0,
                    PeriodicPhase::Staggered => rng.random::<f64>() * interval,
                };
                (StreamKind::Periodic { offset, interval, k: 0 }, Some(offset))
            }
            ArrivalMode::Poisson { rate_hz } => {
                let gap = Exp::new(rate_hz * 1e-6).expect("rate validated positive");
                let first = gap.sample(&mut rng);
                (StreamKind::Poisson { gap }, Some(first))
            }
        };
        ArrivalStream { kind, next, rng }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self.kind, StreamKind::Continuous)
    }

    /// Time of the next request not yet consumed.
    pub fn peek(&self) -> Option<f64> {
        self.next
    }

    /// Consumes and returns the next request if it falls at or before `t`.
    pub fn pop_until(&mut self, t: f64) -> Option<f64> {
        let at = self.next.filter(|&a| a <= t)?;
        self.next = match &mut self.kind {
            StreamKind::Continuous => None,
            StreamKind::Periodic { offset, interval, k } => {
                *k += 1;
                Some(*offset + *k as f64 * *interval)
            }
            StreamKind::Poisson { gap } => Some(at + gap.sample(&mut self.rng)),
        };
        Some(at)
    }
}

/// All request times strictly before `horizon` (µs). Empty for continuous mode.
pub fn sensing_arrivals(mode: ArrivalMode, phase: PeriodicPhase, rng: ChaCha8Rng, horizon: f64) -> Vec<f64> {
    let mut s = ArrivalStream::new(mode, phase, rng);
    let mut out = Vec::new();
    while let Some(t) = s.peek() {
        if t >= horizon {
            break;
        }
        out.push(s.pop_until(t).unwrap());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(s: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(s)
    }

    #[test]
    fn periodic_count_is_exact() {
        let a = sensing_arrivals(
            ArrivalMode::Periodic { interval_ms: 100.0 },
            PeriodicPhase::Aligned,
            rng(0),
            10e6,
        );
        assert_eq!(a.len(), 100);
        assert_eq!(a[0], 0.0);
        assert_eq!(a[99], 9.9e6);
    }

    #[test]
    fn staggered_keeps_the_spacing() {
        let a = sensing_arrivals(
            ArrivalMode::Periodic { interval_ms: 10.0 },
            PeriodicPhase::Staggered,
            rng(3),
            1e6,
        );
        assert!(a[0] > 0.0 && a[0] < 1e4);
        assert!(a.windows(2).all(|w| ((w[1] - w[0]) - 1e4).abs() < 1e-6));
        assert_eq!(a.len(), 100);
    }

    #[test]
    fn poisson_is_increasing_and_seeded() {
        let m = ArrivalMode::Poisson { rate_hz: 10.0 };
        let a = sensing_arrivals(m, PeriodicPhase::Aligned, rng(5), 10e6);
        let b = sensing_arrivals(m, PeriodicPhase::Aligned, rng(5), 10e6);
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn continuous_has_no_stream() {
        assert!(sensing_arrivals(ArrivalMode::Continuous, PeriodicPhase::Aligned, rng(0), 1e6).is_empty());
    }

    #[test]
    fn pop_respects_the_bound() {
        let mut s = ArrivalStream::new(
            ArrivalMode::Periodic { interval_ms: 1.0 },
            PeriodicPhase::Aligned,
            rng(0),
        );
        assert_eq!(s.pop_until(2500.0), Some(0.0));
        assert_eq!(s.pop_until(2500.0), Some(1000.0));
        assert_eq!(s.pop_until(2500.0), Some(2000.0));
        assert_eq!(s.pop_until(2500.0), None);
        assert_eq!(s.peek(), Some(3000.0));
    }
}
