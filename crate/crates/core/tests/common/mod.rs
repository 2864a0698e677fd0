#![allow(dead_code)]

use credhier::ingest::{simulate_random_instance, Samples};
use credhier::{Mid, Threshold};

pub struct Instance {
    pub n: usize,
    pub k: usize,
    pub tau: f64,
    pub mid: f64,
    pub seed: u64,
}

impl Instance {
    pub fn samples(&self) -> Samples {
        Samples::from_effects(simulate_random_instance(self.n, self.k, self.seed).unwrap())
    }

    pub fn threshold(&self) -> Threshold {
        Threshold::new(self.tau).unwrap()
    }

    pub fn mid(&self) -> Mid {
        Mid::new(self.mid).unwrap()
    }
}

impl std::fmt::Display for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "n={} K={} tau={} mid={} seed={}", self.n, self.k, self.tau, self.mid, self.seed)
    }
}

/// Every combination of the grid, `reps` seeds each.
pub fn grid(reps: u64) -> Vec<Instance> {
    let mut out = Vec::new();
    let mut seed = 1000;
    for n in [3, 4, 5, 6] {
        for k in [50, 200] {
            for tau in [0.5, 0.8, 0.95] {
                for mid in [0.0, 0.1] {
                    for _ in 0..reps {
                        seed += 1;
                        out.push(Instance { n, k, tau, mid, seed });
                    }
                }
            }
        }
    }
    out
}
