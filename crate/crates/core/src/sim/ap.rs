use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{EdcaClass, Technology};

/// What an AP is currently trying to get onto the channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pending {
    None,
    /// Saturated legacy downlink, always present.
    Data,
    Sensing {
        request_time: f64,
        collisions: u32,
    },
}

/// EDCA backoff state of one AP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApState {
    pub id: usize,
    pub technology: Technology,
    pub edca: EdcaClass,
    pub backoff_stage: u32,
    pub backoff_counter: u32,
    /// Idle slots still to wait before the counter may decrement.
    pub aifs_remaining: u32,
    pub pending: Pending,
    /// Failed attempts of the current frame or sensing request.
    pub retries: u32,
}

/// Outcome of a transmission attempt from the transmitter's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttemptResult {
    Retry,
    /// Retry limit exceeded: a legacy frame is discarded, a sensing request restarts.
    LimitReached,
}

impl ApState {
    pub fn new(id: usize, technology: Technology, edca: EdcaClass) -> Self {
        ApState {
            id,
            technology,
            edca,
            backoff_stage: 0,
            backoff_counter: 0,
            aifs_remaining: 0,
            pending: Pending::None,
            retries: 0,
        }
    }

    pub fn is_contending(&self) -> bool {
        !matches!(self.pending, Pending::None)
    }

    /// Transmits in the coming slot.
    pub fn is_ready(&self) -> bool {
        self.is_contending() && self.backoff_counter == 0 && self.aifs_remaining == 0
    }

    fn draw(&mut self, rng: &mut ChaCha8Rng) {
        let w = self.edca.window(self.backoff_stage);
        self.backoff_counter = rng.random_range(0..w);
    }

    /// Back to stage 0 with a fresh counter, as after a success or a new request.
    pub fn restart(&mut self, rng: &mut ChaCha8Rng) {
        self.backoff_stage = 0;
        self.retries = 0;
        self.draw(rng);
    }

    pub fn on_success(&mut self, rng: &mut ChaCha8Rng) {
        self.restart(rng);
    }

    pub fn on_collision(&mut self, rng: &mut ChaCha8Rng) -> AttemptResult {
        if let Pending::Sensing { collisions, .. } = &mut self.pending {
            *collisions += 1;
        }
        self.retries += 1;
        if self.retries > self.edca.retry_limit {
            self.restart(rng);
            AttemptResult::LimitReached
        } else {
            self.backoff_stage = (self.backoff_stage + 1).min(self.edca.retry_limit);
            self.draw(rng);
            AttemptResult::Retry
        }
    }

    /// Reaction of a non-transmitting AP to a slot. Returns whether the counter
    /// was decremented.
    pub fn freeze_and_decrement(&mut self, busy: bool) -> bool {
        if !self.is_contending() {
            return false;
        }
        if busy {
            // the DIFS part of AIFS is folded into every busy span
            self.aifs_remaining = self.edca.extra_aifs_slots();
            false
        } else if self.aifs_remaining > 0 {
            self.aifs_remaining -= 1;
            false
        } else if self.backoff_counter > 0 {
            self.backoff_counter -= 1;
            true
        } else {
            false
        }
    }
    /// Applies `m` idle slots at once; `m` must not exceed
    /// `aifs_remaining + backoff_counter`. Returns the number of decrements.
    pub fn idle_slots(&mut self, m: u64) -> u64 {
        if !self.is_contending() {
            return 0;
        }
        let aifs = m.min(self.aifs_remaining as u64);
        self.aifs_remaining -= aifs as u32;
        let dec = (m - aifs).min(self.backoff_counter as u64);
        self.backoff_counter -= dec as u32;
        dec
    }

    /// Idle slots before this AP would transmit.
    pub fn slots_to_ready(&self) -> Option<u64> {
        self.is_contending()
            .then(|| self.aifs_remaining as u64 + self.backoff_counter as u64)
    }
}
