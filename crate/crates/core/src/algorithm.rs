//! Bilateral elimination: each round partitions the survivors, estimates the
//! two boundary means, then eliminates from both ends, promoting confident
//! winners into the answer and discarding confident losers. A uniform racing
//! baseline rides alongside for comparison.

use serde::{Deserialize, Serialize};

use crate::arm::{sample, SampleLedger};
use crate::complexity::{h_term, h_tilde, h_tilde_large_cumulative, h_tilde_small_cumulative};
use crate::error::{Error, Result};
use crate::instance::{epsilon_r, ArmGroupDecomposition, Instance};
use crate::rng::ArmStreams;
use crate::subroutines::{
    elim_large, elim_small, est_mean_large, est_mean_small, pac_best_k, SubroutineConfig,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaPrimeVariant {
    /// delta'_r = delta_r / max(1, min(k_large, k_small)); the split the
    /// union-bound analysis actually needs.
    #[default]
    Proof,
    /// delta'_r = delta / min(k_large, k_small); the looser literal split.
    Pseudocode,
}

fn default_cap_mult() -> f64 {
    64.0
}
fn default_cap_base() -> f64 {
    4096.0
}
fn default_round_slack() -> u32 {
    16
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AlgoConfig {
    #[serde(flatten)]
    pub subroutines: SubroutineConfig,
    #[serde(default)]
    pub delta_prime_variant: DeltaPrimeVariant,
    /// Budget headroom multiplier over the baseline cap unit.
    #[serde(default = "default_cap_mult")]
    pub cap_mult: f64,
    /// Scale between the hardness term and one unit of cap headroom; absorbs
    /// the constant factors the subroutine budgets carry.
    #[serde(default = "default_cap_base")]
    pub cap_base: f64,
    /// Extra rounds allowed past the level of the boundary gap.
    #[serde(default = "default_round_slack")]
    pub round_cap_slack: u32,
}

impl Default for AlgoConfig {
    fn default() -> Self {
        AlgoConfig {
            subroutines: SubroutineConfig::default(),
            delta_prime_variant: DeltaPrimeVariant::Proof,
            cap_mult: default_cap_mult(),
            cap_base: default_cap_base(),
            round_cap_slack: default_round_slack(),
        }
    }
}

impl AlgoConfig {
    pub fn validate(&self) -> Result<()> {
        self.subroutines.validate()?;
        if self.cap_mult <= 0.0 || self.cap_base <= 0.0 {
            return Err(Error::validation("cap_mult and cap_base must be > 0"));
        }
        Ok(())
    }
}

/// One round of telemetry, including the simulator-mode contract checks that
/// compare subroutine outputs against the hidden true means.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoundTelemetry {
    pub r: u32,
    pub k_large: usize,
    pub k_small: usize,
    pub delta_r: f64,
    pub delta_prime_r: f64,
    pub theta_large: f64,
    pub theta_small: f64,
    pub samples_this_round: u64,
    pub pac_ok: bool,
    pub em_large_ok: bool,
    pub em_small_ok: bool,
    pub elim_large_ok: bool,
    pub elim_small_ok: bool,
    pub obs2_ok: bool,
    pub obs3_ok: bool,
}

impl RoundTelemetry {
    pub fn all_contracts_ok(&self) -> bool {
        self.pac_ok
            && self.em_large_ok
            && self.em_small_ok
            && self.elim_large_ok
            && self.elim_small_ok
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunResult {
    pub answer: Vec<usize>,
    pub rounds: Vec<RoundTelemetry>,
    pub total_samples: u64,
    pub capped: bool,
}

/// Hardness combination the hard sample cap scales from:
/// H ln(1/delta) + H~ + H~_large + H~_small.
pub fn cap_term(d: &ArmGroupDecomposition, delta: f64) -> f64 {
    h_term(d) * (1.0 / delta).ln()
        + h_tilde(d)
        + h_tilde_large_cumulative(d)
        + h_tilde_small_cumulative(d)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::validation(format!("delta {} outside (0, 1)", delta)));
    }
    Ok(())
}

/// Fill the answer up to k ids: confirmed set first, then the current
/// survivors and any remaining arms ranked by empirical mean.
fn best_effort_answer(
    confirmed: &[usize],
    survivors: &[usize],
    k: usize,
    n: usize,
    ledger: &SampleLedger,
) -> Vec<usize> {
    let mut answer: Vec<usize> = confirmed.to_vec();
    let mut in_answer = vec![false; n];
    for &id in &answer {
        in_answer[id] = true;
    }
    let rank = |pool: &[usize], answer: &mut Vec<usize>, in_answer: &mut Vec<bool>| {
        let mut pool: Vec<usize> = pool.iter().copied().filter(|&id| !in_answer[id]).collect();
        pool.sort_by(|&a, &b| {
            let ma = ledger.empirical_mean(a).unwrap_or(f64::NEG_INFINITY);
            let mb = ledger.empirical_mean(b).unwrap_or(f64::NEG_INFINITY);
            mb.partial_cmp(&ma).unwrap().then(a.cmp(&b))
        });
        for id in pool {
            if answer.len() >= k {
                break;
            }
            answer.push(id);
            in_answer[id] = true;
        }
    };
    rank(survivors, &mut answer, &mut in_answer);
    if answer.len() < k {
        let rest: Vec<usize> = (0..n).collect();
        rank(&rest, &mut answer, &mut in_answer);
    }
    answer.truncate(k);
    answer.sort_unstable();
    answer
}

pub fn bilateral_elimination(
    instance: &Instance,
    delta: f64,
    config: &AlgoConfig,
    streams: &mut ArmStreams,
    ledger: &mut SampleLedger,
) -> Result<RunResult> {
    instance.validate()?;
    check_delta(delta)?;
    config.validate()?;
    let n = instance.n_arms();
    let k = instance.k;
    let arms = &instance.arms;

    if k == n {
        return Ok(RunResult {
            answer: (0..n).collect(),
            rounds: Vec::new(),
            total_samples: 0,
            capped: false,
        });
    }

    let decomp = instance.decompose_groups()?;
    let cap = (config.cap_mult * config.cap_base * cap_term(&decomp, delta)).ceil() as u64;
    ledger.cap = Some(cap);
    // gap of the k-th best arm: the smallest gap on the large side
    let boundary_gap = instance
        .top_k_set()?
        .iter()
        .map(|&id| decomp.gaps[id])
        .fold(f64::INFINITY, f64::min);
    let round_cap = (1.0 / boundary_gap).log2().ceil() as u32 + config.round_cap_slack;

    let mut confirmed: Vec<usize> = Vec::new();
    let mut survivors: Vec<usize> = (0..n).collect();
    let mut rounds: Vec<RoundTelemetry> = Vec::new();
    let mu = instance.true_means();
    let cfg = &config.subroutines;

    let mut r = 0u32;
    loop {
        r += 1;
        let k_large = k - confirmed.len();
        if k_large == 0 {
            confirmed.sort_unstable();
            return Ok(RunResult {
                answer: confirmed,
                rounds,
                total_samples: ledger.total,
                capped: false,
            });
        }
        if k_large > survivors.len() || r > round_cap {
            // inconsistent state or runaway round count: flag and bail out
            let answer = best_effort_answer(&confirmed, &survivors, k, n, ledger);
            return Ok(RunResult {
                answer,
                rounds,
                total_samples: ledger.total,
                capped: true,
            });
        }
        let k_small = survivors.len() - k_large;
        if k_small == 0 {
            let mut answer = confirmed;
            answer.extend(&survivors);
            answer.sort_unstable();
            return Ok(RunResult {
                answer,
                rounds,
                total_samples: ledger.total,
                capped: false,
            });
        }

        let eps_r = epsilon_r(r);
        let delta_r = delta / (20.0 * (r as f64).powi(2));
        let delta_prime = match config.delta_prime_variant {
            DeltaPrimeVariant::Proof => delta_r / (k_large.min(k_small).max(1) as f64),
            DeltaPrimeVariant::Pseudocode => delta / (k_large.min(k_small) as f64),
        };
        let samples_before = ledger.total;

        let step = (|| -> Result<(RoundTelemetry, Vec<usize>, Vec<usize>)> {
            let pac = pac_best_k(
                arms, &survivors, k_large, eps_r / 8.0, delta_r, cfg, streams, ledger,
            )?;
            // true boundary means inside the current survivor set
            let mut mu_sorted: Vec<f64> = survivors.iter().map(|&id| mu[id]).collect();
            mu_sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let mu_large = mu_sorted[k_large - 1];
            let mu_small = mu_sorted[k_large];
            let pac_eps = eps_r / 8.0;
            let pac_ok = pac.s_large.iter().all(|&a| mu[a] >= mu_large - pac_eps)
                && pac.s_small.iter().all(|&a| mu[a] <= mu_small + pac_eps);

            let th_large = est_mean_large(
                arms, &pac.s_small, eps_r / 8.0, delta_r, cfg, streams, ledger,
            )?;
            let th_small = est_mean_small(
                arms, &pac.s_large, eps_r / 8.0, delta_r, cfg, streams, ledger,
            )?;
            let max_small = pac.s_small.iter().map(|&a| mu[a]).fold(f64::MIN, f64::max);
            let min_large = pac.s_large.iter().map(|&a| mu[a]).fold(f64::MAX, f64::min);
            let em_large_ok = (th_large.value - max_small).abs() <= eps_r / 8.0;
            let em_small_ok = (th_small.value - min_large).abs() <= eps_r / 8.0;

            let el = elim_large(
                arms,
                &pac.s_large,
                th_large.value + eps_r / 8.0,
                th_large.value + eps_r / 4.0,
                delta_prime,
                cfg,
                streams,
                ledger,
            )?;
            let es = elim_small(
                arms,
                &pac.s_small,
                th_small.value - eps_r / 4.0,
                th_small.value - eps_r / 8.0,
                delta_prime,
                cfg,
                streams,
                ledger,
            )?;
            // contract of the eliminator: few arms beyond the far threshold
            // survive, nothing inside the near threshold was removed
            let elim_large_ok = {
                let beyond = el
                    .survivors
                    .iter()
                    .filter(|&&a| mu[a] >= th_large.value + eps_r / 4.0)
                    .count();
                let protected = pac
                    .s_large
                    .iter()
                    .filter(|&&a| mu[a] <= th_large.value + eps_r / 8.0)
                    .all(|a| el.survivors.contains(a));
                (beyond as f64) <= el.survivors.len() as f64 / 10.0 && protected
            };
            let elim_small_ok = {
                let beyond = es
                    .survivors
                    .iter()
                    .filter(|&&a| mu[a] <= th_small.value - eps_r / 4.0)
                    .count();
                let protected = pac
                    .s_small
                    .iter()
                    .filter(|&&a| mu[a] >= th_small.value - eps_r / 8.0)
                    .all(|a| es.survivors.contains(a));
                (beyond as f64) <= es.survivors.len() as f64 / 10.0 && protected
            };

            let obs2_ok = th_large.value >= mu_small - eps_r / 8.0
                && th_large.value <= mu_small + eps_r / 4.0
                && th_small.value >= mu_large - eps_r / 4.0
                && th_small.value <= mu_large + eps_r / 8.0;
            let obs3_ok = k_large <= 2 * decomp.count_large_ge(r)
                && k_small <= 2 * decomp.count_small_ge(r);

            let telemetry = RoundTelemetry {
                r,
                k_large,
                k_small,
                delta_r,
                delta_prime_r: delta_prime,
                theta_large: th_large.value,
                theta_small: th_small.value,
                samples_this_round: ledger.total - samples_before,
                pac_ok,
                em_large_ok,
                em_small_ok,
                elim_large_ok,
                elim_small_ok,
                obs2_ok,
                obs3_ok,
            };

            // promoted = confidently-large arms the eliminator removed
            let promoted: Vec<usize> = pac
                .s_large
                .iter()
                .copied()
                .filter(|a| !el.survivors.contains(a))
                .collect();
            let mut next: Vec<usize> = el.survivors;
            next.extend(es.survivors);
            next.sort_unstable();
            Ok((telemetry, promoted, next))
        })();

        match step {
            Ok((telemetry, promoted, next)) => {
                rounds.push(telemetry);
                confirmed.extend(promoted);
                survivors = next;
            }
            Err(Error::CapExhausted) => {
                let answer = best_effort_answer(&confirmed, &survivors, k, n, ledger);
                return Ok(RunResult {
                    answer,
                    rounds,
                    total_samples: ledger.total,
                    capped: true,
                });
            }
            Err(e) => return Err(e),
        }
    }
}

/// Uniform racing baseline: sample all undecided arms in lockstep and
/// accept/reject once an arm's Hoeffding interval clears the k-boundary.
/// Union bound over arms and stages keeps it delta-correct.
pub fn uniform_baseline(
    instance: &Instance,
    delta: f64,
    streams: &mut ArmStreams,
    ledger: &mut SampleLedger,
) -> Result<RunResult> {
    instance.validate()?;
    check_delta(delta)?;
    let n = instance.n_arms();
    let k = instance.k;
    if k == n {
        return Ok(RunResult {
            answer: (0..n).collect(),
            rounds: Vec::new(),
            total_samples: 0,
            capped: false,
        });
    }

    let mut accepted: Vec<usize> = Vec::new();
    let mut survivors: Vec<usize> = (0..n).collect();
    let mut pulls_each: u64 = 0;
    let mut stage: u64 = 0;

    loop {
        let k_rem = k - accepted.len();
        if k_rem == 0 {
            break;
        }
        if survivors.len() == k_rem {
            accepted.extend(&survivors);
            break;
        }
        stage += 1;
        let target = if pulls_each == 0 {
            1
        } else {
            (pulls_each + 1).max((1.2 * pulls_each as f64).ceil() as u64)
        };
        let cap = ledger.cap.unwrap_or(u64::MAX);
        for &id in &survivors {
            for _ in pulls_each..target {
                if ledger.total >= cap {
                    let answer = best_effort_answer(&accepted, &survivors, k, n, ledger);
                    return Ok(RunResult {
                        answer,
                        rounds: Vec::new(),
                        total_samples: ledger.total,
                        capped: true,
                    });
                }
                sample(&instance.arms[id], streams.arm(id), ledger);
            }
        }
        pulls_each = target;

        let delta_j = delta / (n as f64 * 2.0 * (stage as f64).powi(2));
        let radius = (2.0 * (2.0 / delta_j).ln() / pulls_each as f64).sqrt();
        let mut ucbs: Vec<f64> = Vec::with_capacity(survivors.len());
        let mut lcbs: Vec<f64> = Vec::with_capacity(survivors.len());
        for &id in &survivors {
            let m = ledger.empirical_mean(id).unwrap();
            ucbs.push(m + radius);
            lcbs.push(m - radius);
        }
        let mut ucb_sorted = ucbs.clone();
        let mut lcb_sorted = lcbs.clone();
        ucb_sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        lcb_sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let ucb_boundary = ucb_sorted[k_rem]; // (k_rem+1)-th largest
        let lcb_boundary = lcb_sorted[k_rem - 1]; // k_rem-th largest

        let mut next: Vec<usize> = Vec::with_capacity(survivors.len());
        for (i, &id) in survivors.iter().enumerate() {
            if lcbs[i] > ucb_boundary {
                accepted.push(id);
            } else if ucbs[i] < lcb_boundary {
                // rejected outright
            } else {
                next.push(id);
            }
        }
        survivors = next;
    }

    accepted.sort_unstable();
    Ok(RunResult {
        answer: accepted,
        rounds: Vec::new(),
        total_samples: ledger.total,
        capped: false,
    })
}
