//! The three sampling subroutines the elimination algorithm is built from:
//! PAC partitioning, extreme-mean estimation, and threshold elimination.
//! Each has a closed-form budget; `samples_used` always matches it exactly.

use serde::{Deserialize, Serialize};

use crate::arm::{pull_n, ArmSpec, SampleLedger};
use crate::error::{Error, Result};
use crate::rng::ArmStreams;

fn default_pac() -> f64 {
    2.0
}
fn default_em() -> f64 {
    2.0
}
fn default_elim() -> f64 {
    8.0
}
fn default_stop() -> f64 {
    0.05
}

/// Budget constants for the subroutines. The analysis only fixes them up to
/// O(.), so they live in config for calibration.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SubroutineConfig {
    #[serde(default = "default_pac")]
    pub pac_budget_const: f64,
    #[serde(default = "default_em")]
    pub em_budget_const: f64,
    #[serde(default = "default_elim")]
    pub elim_round_const: f64,
    #[serde(default = "default_stop")]
    pub elim_stop_fraction: f64,
}

impl Default for SubroutineConfig {
    fn default() -> Self {
        SubroutineConfig {
            pac_budget_const: default_pac(),
            em_budget_const: default_em(),
            elim_round_const: default_elim(),
            elim_stop_fraction: default_stop(),
        }
    }
}

impl SubroutineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pac_budget_const <= 0.0
            || self.em_budget_const <= 0.0
            || self.elim_round_const <= 0.0
        {
            return Err(Error::validation("subroutine budget constants must be > 0"));
        }
        if !(self.elim_stop_fraction > 0.0 && self.elim_stop_fraction < 0.1) {
            return Err(Error::validation(
                "elim_stop_fraction must lie in (0, 1/10)",
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PartitionResult {
    pub s_large: Vec<usize>,
    pub s_small: Vec<usize>,
    pub samples_used: u64,
}

fn check_eps_delta(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::validation(format!("eps {} outside (0, 1/2]", eps)));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::validation(format!("delta {} outside (0, 1)", delta)));
    }
    Ok(())
}

/// Per-arm budget of the PAC partition step.
pub fn pac_budget(cfg: &SubroutineConfig, s_len: usize, k: usize, eps: f64, delta: f64) -> u64 {
    let m = k.min(s_len - k) as f64;
    (cfg.pac_budget_const * eps.powi(-2) * ((2.0 / delta).ln() + m.ln() + 1.0)).ceil() as u64
}

/// Uniformly sample every arm, then split at the empirical k-th largest mean.
/// Ties in the empirical order break toward the lower arm id.
pub fn pac_best_k(
    arms: &[ArmSpec],
    s: &[usize],
    k: usize,
    eps: f64,
    delta: f64,
    cfg: &SubroutineConfig,
    streams: &mut ArmStreams,
    ledger: &mut SampleLedger,
) -> Result<PartitionResult> {
    check_eps_delta(eps, delta)?;
    if k == 0 || k > s.len() {
        return Err(Error::validation(format!(
            "pac_best_k: k = {} outside 1..={}",
            k,
            s.len()
        )));
    }
    if k == s.len() {
        return Ok(PartitionResult {
            s_large: s.to_vec(),
            s_small: Vec::new(),
            samples_used: 0,
        });
    }
    let n = pac_budget(cfg, s.len(), k, eps, delta);
    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(s.len());
    for &id in s {
        let m = pull_n(&arms[id], n, streams.arm(id), ledger)?;
        scored.push((m, id));
    }
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut s_large: Vec<usize> = scored[..k].iter().map(|&(_, id)| id).collect();
    let mut s_small: Vec<usize> = scored[k..].iter().map(|&(_, id)| id).collect();
    s_large.sort_unstable();
    s_small.sort_unstable();
    Ok(PartitionResult {
        s_large,
        s_small,
        samples_used: n * s.len() as u64,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct EstMeanResult {
    pub value: f64,
    pub chosen: usize,
    pub samples_used: u64,
}

/// Second-stage budget of the mean estimators.
pub fn est_mean_stage2_budget(cfg: &SubroutineConfig, eps: f64, delta: f64) -> u64 {
    (cfg.em_budget_const * (eps / 2.0).powi(-2) * (4.0 / delta).ln()).ceil() as u64
}

fn est_mean(
    arms: &[ArmSpec],
    s: &[usize],
    eps: f64,
    delta: f64,
    largest: bool,
    cfg: &SubroutineConfig,
    streams: &mut ArmStreams,
    ledger: &mut SampleLedger,
) -> Result<EstMeanResult> {
    check_eps_delta(eps, delta)?;
    if s.is_empty() {
        return Err(Error::validation("est_mean on an empty set"));
    }
    // stage 1: locate the extreme arm to within eps/2
    let (chosen, stage1) = if s.len() == 1 {
        (s[0], 0)
    } else if largest {
        let p = pac_best_k(arms, s, 1, eps / 2.0, delta / 2.0, cfg, streams, ledger)?;
        (p.s_large[0], p.samples_used)
    } else {
        let p = pac_best_k(
            arms,
            s,
            s.len() - 1,
            eps / 2.0,
            delta / 2.0,
            cfg,
            streams,
            ledger,
        )?;
        (p.s_small[0], p.samples_used)
    };
    // stage 2: estimate that arm's mean to within eps/2
    let m = est_mean_stage2_budget(cfg, eps, delta);
    let value = pull_n(&arms[chosen], m, streams.arm(chosen), ledger)?;
    Ok(EstMeanResult {
        value,
        chosen,
        samples_used: stage1 + m,
    })
}

/// Estimate max_{A in S} mu_A to within eps, confidence 1 - delta.
pub fn est_mean_large(
    arms: &[ArmSpec],
    s: &[usize],
    eps: f64,
    delta: f64,
    cfg: &SubroutineConfig,
    streams: &mut ArmStreams,
    ledger: &mut SampleLedger,
) -> Result<EstMeanResult> {
    est_mean(arms, s, eps, delta, true, cfg, streams, ledger)
}

/// Estimate min_{A in S} mu_A to within eps, confidence 1 - delta.
pub fn est_mean_small(
    arms: &[ArmSpec],
    s: &[usize],
    eps: f64,
    delta: f64,
    cfg: &SubroutineConfig,
    streams: &mut ArmStreams,
    ledger: &mut SampleLedger,
) -> Result<EstMeanResult> {
    est_mean(arms, s, eps, delta, false, cfg, streams, ledger)
}

#[derive(Clone, Debug)]
pub struct ElimResult {
    pub survivors: Vec<usize>,
    pub samples_used: u64,
    pub rounds: u32,
}

fn elim(
    arms: &[ArmSpec],
    s: &[usize],
    theta_small: f64,
    theta_large: f64,
    delta: f64,
    remove_high: bool,
    cfg: &SubroutineConfig,
    streams: &mut ArmStreams,
    ledger: &mut SampleLedger,
) -> Result<ElimResult> {
    if !(theta_small < theta_large) {
        return Err(Error::validation(format!(
            "elim thresholds inverted: {} >= {}",
            theta_small, theta_large
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::validation(format!("delta {} outside (0, 1)", delta)));
    }
    let gap = theta_large - theta_small;
    let mid = (theta_small + theta_large) / 2.0;
    let mut survivors: Vec<usize> = s.to_vec();
    let mut samples = 0u64;
    let mut t = 0u32;
    while !survivors.is_empty() {
        t += 1;
        let delta_t = delta / (4.0 * (t as f64).powi(2));
        let m_t =
            (cfg.elim_round_const * gap.powi(-2) * (2.0 / delta_t).ln()).ceil() as u64;
        let before = survivors.len();
        let mut kept = Vec::with_capacity(before);
        for &id in &survivors {
            let emp = pull_n(&arms[id], m_t, streams.arm(id), ledger)?;
            samples += m_t;
            let remove = if remove_high { emp >= mid } else { emp <= mid };
            if !remove {
                kept.push(id);
            }
        }
        let removed = before - kept.len();
        survivors = kept;
        if (removed as f64) < cfg.elim_stop_fraction * before as f64 {
            break;
        }
    }
    Ok(ElimResult {
        survivors,
        samples_used: samples,
        rounds: t,
    })
}

/// Remove arms whose mean confidently exceeds `theta_large`, protecting any
/// fixed arm below `theta_small`.
pub fn elim_large(
    arms: &[ArmSpec],
    s: &[usize],
    theta_small: f64,
    theta_large: f64,
    delta: f64,
    cfg: &SubroutineConfig,
    streams: &mut ArmStreams,
    ledger: &mut SampleLedger,
) -> Result<ElimResult> {
    elim(
        arms, s, theta_small, theta_large, delta, true, cfg, streams, ledger,
    )
}

/// Mirror image: remove arms confidently below `theta_small`.
pub fn elim_small(
    arms: &[ArmSpec],
    s: &[usize],
    theta_small: f64,
    theta_large: f64,
    delta: f64,
    cfg: &SubroutineConfig,
    streams: &mut ArmStreams,
    ledger: &mut SampleLedger,
) -> Result<ElimResult> {
    elim(
        arms, s, theta_small, theta_large, delta, false, cfg, streams, ledger,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(n_arms: usize, trial: u64) -> (ArmStreams, SampleLedger) {
        (ArmStreams::new(0xABCD, trial, n_arms), SampleLedger::new(n_arms))
    }

    #[test]
    fn pac_forced_partition() {
        let arms = vec![ArmSpec::gaussian(0, 0.1), ArmSpec::gaussian(1, 0.4)];
        let (mut st, mut led) = setup(2, 0);
        let cfg = SubroutineConfig::default();
        let p = pac_best_k(&arms, &[0, 1], 2, 0.1, 0.1, &cfg, &mut st, &mut led).unwrap();
        assert_eq!(p.s_large, vec![0, 1]);
        assert!(p.s_small.is_empty());
        assert_eq!(p.samples_used, 0);
        assert_eq!(led.total, 0);
    }

    #[test]
    fn pac_budget_accounting() {
        let arms: Vec<ArmSpec> = (0..4).map(|i| ArmSpec::gaussian(i, 0.1)).collect();
        let (mut st, mut led) = setup(4, 0);
        let cfg = SubroutineConfig::default();
        let s = [0, 1, 2, 3];
        let p = pac_best_k(&arms, &s, 2, 0.1, 0.05, &cfg, &mut st, &mut led).unwrap();
        let n = pac_budget(&cfg, 4, 2, 0.1, 0.05);
        assert_eq!(p.samples_used, 4 * n);
        assert_eq!(led.total, 4 * n);
        assert_eq!(p.s_large.len(), 2);
        let mut all = p.s_large.clone();
        all.extend(&p.s_small);
        all.sort_unstable();
        assert_eq!(all, s);
    }

    #[test]
    fn pac_separates_wide_margin() {
        // margin 0.5 >> eps; failure probability far below per-trial delta
        let arms = vec![ArmSpec::bernoulli(0, 0.5), ArmSpec::bernoulli(1, 0.0)];
        let cfg = SubroutineConfig::default();
        let mut hits = 0;
        for trial in 0..200 {
            let (mut st, mut led) = setup(2, trial);
            let p =
                pac_best_k(&arms, &[0, 1], 1, 0.1, 0.05, &cfg, &mut st, &mut led).unwrap();
            if p.s_large == vec![0] {
                hits += 1;
            }
        }
        assert!(hits >= 190, "only {}/200 correct", hits);
    }

    #[test]
    fn pac_rejects_bad_args() {
        let arms = vec![ArmSpec::gaussian(0, 0.1)];
        let cfg = SubroutineConfig::default();
        let (mut st, mut led) = setup(1, 0);
        assert!(pac_best_k(&arms, &[0], 0, 0.1, 0.1, &cfg, &mut st, &mut led).is_err());
        assert!(pac_best_k(&arms, &[0], 2, 0.1, 0.1, &cfg, &mut st, &mut led).is_err());
        assert!(pac_best_k(&arms, &[0], 1, 0.0, 0.1, &cfg, &mut st, &mut led).is_err());
        assert!(pac_best_k(&arms, &[0], 1, 0.1, 1.0, &cfg, &mut st, &mut led).is_err());
    }

    #[test]
    fn est_mean_contract_wide_margin() {
        let arms = vec![ArmSpec::gaussian(0, 0.5), ArmSpec::gaussian(1, 0.0)];
        let cfg = SubroutineConfig::default();
        let (mut ok_hi, mut ok_lo) = (0, 0);
        for trial in 0..200 {
            let (mut st, mut led) = setup(2, trial);
            let hi =
                est_mean_large(&arms, &[0, 1], 0.1, 0.05, &cfg, &mut st, &mut led).unwrap();
            if (hi.value - 0.5).abs() <= 0.1 {
                ok_hi += 1;
            }
            let lo =
                est_mean_small(&arms, &[0, 1], 0.1, 0.05, &cfg, &mut st, &mut led).unwrap();
            if lo.value.abs() <= 0.1 {
                ok_lo += 1;
            }
        }
        assert!(ok_hi >= 190, "large: {}/200", ok_hi);
        assert!(ok_lo >= 190, "small: {}/200", ok_lo);
    }

    #[test]
    fn est_mean_singleton_budget() {
        let arms = vec![ArmSpec::gaussian(0, 0.3)];
        let cfg = SubroutineConfig::default();
        let (mut st, mut led) = setup(1, 0);
        let r = est_mean_large(&arms, &[0], 0.1, 0.05, &cfg, &mut st, &mut led).unwrap();
        assert_eq!(r.chosen, 0);
        assert_eq!(r.samples_used, est_mean_stage2_budget(&cfg, 0.1, 0.05));
        assert_eq!(led.total, r.samples_used);
    }

    #[test]
    fn est_mean_empty_rejected() {
        let arms: Vec<ArmSpec> = vec![];
        let cfg = SubroutineConfig::default();
        let mut st = ArmStreams::new(1, 0, 0);
        let mut led = SampleLedger::new(0);
        assert!(est_mean_large(&arms, &[], 0.1, 0.1, &cfg, &mut st, &mut led).is_err());
    }

    #[test]
    fn elim_keeps_low_means() {
        // all means at theta_small; removal needs a deviation of gap/2
        let arms: Vec<ArmSpec> = (0..10).map(|i| ArmSpec::gaussian(i, 0.2)).collect();
        let cfg = SubroutineConfig::default();
        let s: Vec<usize> = (0..10).collect();
        let mut survived_all = 0;
        for trial in 0..50 {
            let (mut st, mut led) = setup(10, trial);
            let r =
                elim_large(&arms, &s, 0.2, 0.4, 0.1, &cfg, &mut st, &mut led).unwrap();
            if r.survivors == s {
                survived_all += 1;
            }
        }
        assert!(survived_all >= 45, "{}/50", survived_all);
    }

    #[test]
    fn elim_removes_high_means_protecting_low() {
        // 20 arms well above theta_large plus one protected arm at theta_small
        let mut arms: Vec<ArmSpec> = (0..20).map(|i| ArmSpec::gaussian(i, 0.5)).collect();
        arms.push(ArmSpec::gaussian(20, 0.1));
        let cfg = SubroutineConfig::default();
        let s: Vec<usize> = (0..21).collect();
        let mut joint_ok = 0;
        for trial in 0..50 {
            let (mut st, mut led) = setup(21, trial);
            let r =
                elim_large(&arms, &s, 0.1, 0.3, 0.1, &cfg, &mut st, &mut led).unwrap();
            let high_left = r.survivors.iter().filter(|&&id| id < 20).count();
            let protected = r.survivors.contains(&20);
            if protected && high_left * 10 <= 21 {
                joint_ok += 1;
            }
        }
        assert!(joint_ok >= 45, "{}/50", joint_ok);
    }

    #[test]
    fn elim_small_mirrors_large() {
        // negating means and thresholds swaps the two directions
        let arms_hi = vec![ArmSpec::gaussian(0, 0.4), ArmSpec::gaussian(1, 0.1)];
        let cfg = SubroutineConfig::default();
        let (mut st, mut led) = setup(2, 3);
        let r = elim_small(&arms_hi, &[0, 1], 0.2, 0.3, 0.1, &cfg, &mut st, &mut led).unwrap();
        // the low arm (0.1 << midpoint 0.25) is removed, the high one kept
        assert_eq!(r.survivors, vec![0]);
    }

    #[test]
    fn elim_rejects_inverted_thresholds() {
        let arms = vec![ArmSpec::gaussian(0, 0.1)];
        let cfg = SubroutineConfig::default();
        let (mut st, mut led) = setup(1, 0);
        assert!(elim_large(&arms, &[0], 0.3, 0.2, 0.1, &cfg, &mut st, &mut led).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = SubroutineConfig::default();
        assert!(c.validate().is_ok());
        c.elim_stop_fraction = 0.2;
        assert!(c.validate().is_err());
        c = SubroutineConfig {
            pac_budget_const: 0.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
