//! Arm reward models, seeded sampling, and pull accounting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Reward distribution of a single arm. Both variants are 1-sub-Gaussian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "lowercase")]
pub enum Dist {
    #[serde(rename = "gaussian")]
    GaussianUnitVar { mean: f64 },
    Bernoulli { mean: f64 },
}

impl Dist {
    pub fn mean(&self) -> f64 {
        match *self {
            Dist::GaussianUnitVar { mean } | Dist::Bernoulli { mean } => mean,
        }
    }
}

/// One arm of an instance: an index plus its ground-truth reward law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmSpec {
    pub id: usize,
    #[serde(flatten)]
    pub dist: Dist,
}

impl ArmSpec {
    pub fn gaussian(id: usize, mean: f64) -> Self {
        ArmSpec {
            id,
            dist: Dist::GaussianUnitVar { mean },
        }
    }

    pub fn bernoulli(id: usize, mean: f64) -> Self {
        ArmSpec {
            id,
            dist: Dist::Bernoulli { mean },
        }
    }

    pub fn mean(&self) -> f64 {
        self.dist.mean()
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.mean();
        if !m.is_finite() || !(0.0..=0.5).contains(&m) {
            return Err(Error::validation(format!(
                "arm {}: mean {} outside [0, 0.5]",
                self.id, m
            )));
        }
        Ok(())
    }
}

/// Per-trial pull counts and running sums, the unit of sample accounting.
#[derive(Clone, Debug, Default)]
pub struct SampleLedger {
    pub pulls: Vec<u64>,
    pub sums: Vec<f64>,
    pub total: u64,
    /// Hard cap on `total`; pulls past it fail with `CapExhausted`.
    pub cap: Option<u64>,
}

impl SampleLedger {
    pub fn new(n_arms: usize) -> Self {
        SampleLedger {
            pulls: vec![0; n_arms],
            sums: vec![0.0; n_arms],
            total: 0,
            cap: None,
        }
    }

    pub fn with_cap(n_arms: usize, cap: u64) -> Self {
        let mut l = Self::new(n_arms);
        l.cap = Some(cap);
        l
    }

    /// Empirical mean of an arm; `None` before the first pull.
    pub fn empirical_mean(&self, arm_id: usize) -> Option<f64> {
        if self.pulls[arm_id] == 0 {
            None
        } else {
            Some(self.sums[arm_id] / self.pulls[arm_id] as f64)
        }
    }
}

/// Draw one sample from `arm`, recording it in the ledger.
#[inline(always)]
pub fn sample(arm: &ArmSpec, rng: &mut RngStream, ledger: &mut SampleLedger) -> f64 {
    let x = match arm.dist {
        Dist::GaussianUnitVar { mean } => mean + rng.next_standard_normal(),
        Dist::Bernoulli { mean } => {
            if rng.next_open01() < mean {
                1.0
            } else {
                0.0
            }
        }
    };
    ledger.pulls[arm.id] += 1;
    ledger.sums[arm.id] += x;
    ledger.total += 1;
    x
}

/// Draw `n` fresh samples and return their mean. Fails on `n = 0` or when the
/// ledger cap would be exceeded (the ledger stops exactly at the cap).
pub fn pull_n(
    arm: &ArmSpec,
    n: u64,
    rng: &mut RngStream,
    ledger: &mut SampleLedger,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::validation("pull_n requires n >= 1"));
    }
    let cap = ledger.cap.unwrap_or(u64::MAX);
    let mut acc = 0.0;
    for i in 0..n {
        if ledger.total >= cap {
            // keep the partial draws on the books, then report exhaustion
            let _ = i;
            return Err(Error::CapExhausted);
        }
        acc += sample(arm, rng, ledger);
    }
    Ok(acc / n as f64)
}
