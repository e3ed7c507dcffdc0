//! Seeded Monte Carlo harness: built-in instance families, parallel trial
//! execution with per-trial random streams, and statistical aggregation.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithm::{bilateral_elimination, uniform_baseline, AlgoConfig, RoundTelemetry};
use crate::arm::{ArmSpec, SampleLedger};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rng::{derive_stream_id, ArmStreams, RngStream};

// ---------------------------------------------------------------------------
// Instance families

/// 2n+2 arms: n at 0, n at 1/2, one at 1/4+eps, one at 1/4-eps; find the top
/// n+1. The boundary sits between the two middle arms.
pub fn generate_appendix_a(n: usize, eps: f64) -> Result<Instance> {
    if n == 0 {
        return Err(Error::validation("appendix_a requires n >= 1"));
    }
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::validation(format!(
            "appendix_a eps {} outside (0, 1/4)",
            eps
        )));
    }
    let mut arms = Vec::with_capacity(2 * n + 2);
    for i in 0..n {
        arms.push(ArmSpec::gaussian(i, 0.0));
    }
    for i in n..2 * n {
        arms.push(ArmSpec::gaussian(i, 0.5));
    }
    arms.push(ArmSpec::gaussian(2 * n, 0.25 + eps));
    arms.push(ArmSpec::gaussian(2 * n + 1, 0.25 - eps));
    Instance::new(arms, n + 1)
}

/// One arm at mu and n arms at mu - gap; find the best arm.
pub fn generate_symmetric_best1(n: usize, mu: f64, gap: f64) -> Result<Instance> {
    if n == 0 {
        return Err(Error::validation("symmetric_best1 requires n >= 1"));
    }
    if !(gap > 0.0) || mu > 0.5 || mu - gap < 0.0 {
        return Err(Error::validation(format!(
            "symmetric_best1 means {{{}, {}}} outside [0, 1/2]",
            mu,
            mu - gap
        )));
    }
    let mut arms = vec![ArmSpec::gaussian(0, mu)];
    for i in 1..=n {
        arms.push(ArmSpec::gaussian(i, mu - gap));
    }
    Instance::new(arms, 1)
}

/// k arms at 1/2 and n-k arms at 1/2 - gap.
pub fn generate_uniform_gaps(n: usize, k: usize, gap: f64) -> Result<Instance> {
    if k == 0 || k > n {
        return Err(Error::validation(format!(
            "uniform_gaps: k = {} outside 1..={}",
            k, n
        )));
    }
    if k < n && !(gap > 0.0 && gap <= 0.5) {
        return Err(Error::validation(format!(
            "uniform_gaps gap {} outside (0, 1/2]",
            gap
        )));
    }
    let mut arms = Vec::with_capacity(n);
    for i in 0..k {
        arms.push(ArmSpec::gaussian(i, 0.5));
    }
    for i in k..n {
        arms.push(ArmSpec::gaussian(i, 0.5 - gap));
    }
    Instance::new(arms, k)
}

/// Means drawn uniformly from [0, 1/2], resampled until the k/k+1 boundary
/// gap reaches `min_gap` so the instance is valid and simulable.
pub fn generate_random(n: usize, k: usize, seed: u64, min_gap: f64) -> Result<Instance> {
    if k == 0 || k > n {
        return Err(Error::validation(format!(
            "random: k = {} outside 1..={}",
            k, n
        )));
    }
    if k == n {
        return Err(Error::validation("random family requires k < n"));
    }
    if !(min_gap > 0.0 && min_gap < 0.5) {
        return Err(Error::validation(format!(
            "random min_gap {} outside (0, 1/2)",
            min_gap
        )));
    }
    let mut rng = RngStream::new(seed, derive_stream_id(seed, &[0x72616e64]));
    loop {
        let means: Vec<f64> = (0..n).map(|_| rng.next_open01() * 0.5).collect();
        let mut sorted = means.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        if sorted[k - 1] - sorted[k] >= min_gap {
            let arms = means
                .iter()
                .enumerate()
                .map(|(i, &m)| ArmSpec::gaussian(i, m))
                .collect();
            return Instance::new(arms, k);
        }
    }
}

/// Dispatch by family name with a flat numeric parameter map (CLI surface).
pub fn generate_family(name: &str, params: &BTreeMap<String, f64>) -> Result<Instance> {
    let get = |key: &str| -> Result<f64> {
        params
            .get(key)
            .copied()
            .ok_or_else(|| Error::validation(format!("family {}: missing param {}", name, key)))
    };
    let get_count = |key: &str| -> Result<usize> {
        let v = get(key)?;
        if v < 0.0 || v.fract() != 0.0 {
            return Err(Error::validation(format!(
                "param {} = {} is not a nonnegative integer",
                key, v
            )));
        }
        Ok(v as usize)
    };
    match name {
        "appendix_a" => generate_appendix_a(get_count("n")?, get("eps")?),
        "symmetric_best1" => generate_symmetric_best1(get_count("n")?, get("mu")?, get("delta")?),
        "uniform_gaps" => generate_uniform_gaps(
            get_count("n")?,
            get_count("k")?,
            params.get("gap").copied().unwrap_or(0.0),
        ),
        "random" => generate_random(
            get_count("n")?,
            get_count("k")?,
            get_count("seed")? as u64,
            params.get("min_gap").copied().unwrap_or(0.05),
        ),
        other => Err(Error::validation(format!("unknown family {:?}", other))),
    }
}

// ---------------------------------------------------------------------------
// Trial execution

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmChoice {
    Bilateral,
    Uniform,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialConfig {
    pub instance: Instance,
    pub algorithm: AlgorithmChoice,
    pub delta: f64,
    pub trials: u64,
    pub master_seed: u64,
    pub jobs: usize,
    pub algo_config: AlgoConfig,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        self.instance.validate()?;
        self.algo_config.validate()?;
        if self.trials == 0 {
            return Err(Error::validation("trials must be >= 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::validation(format!(
                "delta {} outside (0, 1)",
                self.delta
            )));
        }
        if self.jobs == 0 {
            return Err(Error::validation("jobs must be >= 1"));
        }
        Ok(())
    }
}

/// One trial's raw outcome, the unit of the newline-delimited output stream.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub permutation_seed: u64,
    /// answer in the permuted instance's labels
    pub answer: Vec<usize>,
    /// same answer mapped back to the unpermuted arm ids
    pub answer_original: Vec<usize>,
    pub correct: bool,
    pub capped: bool,
    pub total_samples: u64,
    pub rounds: Vec<RoundTelemetry>,
    pub contracts_all_ok: bool,
    pub obs2_all_ok: bool,
    pub obs3_all_ok: bool,
}

fn run_one_trial(config: &TrialConfig, trial: u64, truth: &[usize]) -> Result<TrialRecord> {
    let perm_seed = derive_stream_id(config.master_seed, &[trial, 0x7065726d]);
    let (permuted, map) = config.instance.permute(perm_seed);
    let n = permuted.n_arms();
    let mut streams = ArmStreams::new(config.master_seed, trial, n);
    let mut ledger = SampleLedger::new(n);
    let run = match config.algorithm {
        AlgorithmChoice::Bilateral => bilateral_elimination(
            &permuted,
            config.delta,
            &config.algo_config,
            &mut streams,
            &mut ledger,
        )?,
        AlgorithmChoice::Uniform => {
            uniform_baseline(&permuted, config.delta, &mut streams, &mut ledger)?
        }
    };
    let mut answer_original: Vec<usize> = run.answer.iter().map(|&id| map[id]).collect();
    answer_original.sort_unstable();
    // capped runs count as errors: conservative accounting
    let correct = !run.capped && answer_original == truth;
    let contracts_all_ok = run.rounds.iter().all(RoundTelemetry::all_contracts_ok);
    let obs2_all_ok = run.rounds.iter().all(|t| t.obs2_ok);
    let obs3_all_ok = run.rounds.iter().all(|t| t.obs3_ok);
    Ok(TrialRecord {
        trial,
        permutation_seed: perm_seed,
        answer: run.answer,
        answer_original,
        correct,
        capped: run.capped,
        total_samples: run.total_samples,
        rounds: run.rounds,
        contracts_all_ok,
        obs2_all_ok,
        obs3_all_ok,
    })
}

/// Run all trials, each on a freshly permuted copy of the instance with its
/// own random streams. Output order is by trial index, so results do not
/// depend on the parallelism degree.
pub fn run_trials(config: &TrialConfig) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let truth = config.instance.top_k_set()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::validation(format!("thread pool: {}", e)))?;
    pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|trial| run_one_trial(config, trial, &truth))
            .collect()
    })
}

// ---------------------------------------------------------------------------
// Aggregation

/// 95% Wilson score interval for a binomial proportion.
pub fn wilson95(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn percentile(sorted: &[u64], q: f64) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let idx = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoundAggregate {
    pub r: u32,
    pub trials_reaching: u64,
    pub mean_samples: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AggregateStats {
    pub trials: u64,
    pub errors: u64,
    pub error_rate: f64,
    pub error_wilson95_lo: f64,
    pub error_wilson95_hi: f64,
    pub samples_mean: f64,
    pub samples_median: u64,
    pub samples_p95: u64,
    pub capped_rate: f64,
    pub contracts_all_ok_rate: f64,
    /// Telemetry pass rates conditioned on trials with all contracts intact.
    pub obs2_rate_given_contracts: f64,
    pub obs3_rate_given_contracts: f64,
    pub per_round: Vec<RoundAggregate>,
}

pub fn aggregate(records: &[TrialRecord]) -> AggregateStats {
    let trials = records.len() as u64;
    let errors = records.iter().filter(|r| !r.correct).count() as u64;
    let (lo, hi) = wilson95(errors, trials);
    let mut samples: Vec<u64> = records.iter().map(|r| r.total_samples).collect();
    samples.sort_unstable();
    let capped = records.iter().filter(|r| r.capped).count() as u64;
    let contracts_ok = records.iter().filter(|r| r.contracts_all_ok).count() as u64;
    let obs2_ok = records
        .iter()
        .filter(|r| r.contracts_all_ok && r.obs2_all_ok)
        .count() as u64;
    let obs3_ok = records
        .iter()
        .filter(|r| r.contracts_all_ok && r.obs3_all_ok)
        .count() as u64;

    let mut per_round: BTreeMap<u32, (u64, u64)> = BTreeMap::new();
    for rec in records {
        for t in &rec.rounds {
            let e = per_round.entry(t.r).or_insert((0, 0));
            e.0 += 1;
            e.1 += t.samples_this_round;
        }
    }
    let rate = |num: u64, den: u64| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    AggregateStats {
        trials,
        errors,
        error_rate: rate(errors, trials),
        error_wilson95_lo: lo,
        error_wilson95_hi: hi,
        samples_mean: if trials == 0 {
            0.0
        } else {
            samples.iter().map(|&s| s as f64).sum::<f64>() / trials as f64
        },
        samples_median: percentile(&samples, 0.5),
        samples_p95: percentile(&samples, 0.95),
        capped_rate: rate(capped, trials),
        contracts_all_ok_rate: rate(contracts_ok, trials),
        obs2_rate_given_contracts: rate(obs2_ok, contracts_ok),
        obs3_rate_given_contracts: rate(obs3_ok, contracts_ok),
        per_round: per_round
            .into_iter()
            .map(|(r, (n, s))| RoundAggregate {
                r,
                trials_reaching: n,
                mean_samples: s as f64 / n as f64,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn appendix_a_example() {
        let i = generate_appendix_a(4, 1.0 / 16.0).unwrap();
        assert_eq!(i.n_arms(), 10);
        assert_eq!(i.k, 5);
        let mut means = i.true_means();
        means.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(
            means,
            vec![0.5, 0.5, 0.5, 0.5, 0.3125, 0.1875, 0.0, 0.0, 0.0, 0.0]
        );
        // top n+1 = the mean-1/2 arms plus the 1/4+eps arm
        assert_eq!(i.top_k_set().unwrap(), vec![4, 5, 6, 7, 8]);
    }

    #[test]
    fn symmetric_best1_example() {
        let i = generate_symmetric_best1(5, 0.5, 0.1).unwrap();
        assert_eq!(i.n_arms(), 6);
        assert_eq!(i.k, 1);
        assert_eq!(i.true_means()[0], 0.5);
        assert!(i.true_means()[1..].iter().all(|&m| m == 0.4));
        assert!(generate_symmetric_best1(5, 0.5, 0.6).is_err());
    }

    #[test]
    fn uniform_gaps_example() {
        let i = generate_uniform_gaps(3, 1, 0.5).unwrap();
        assert_eq!(i.true_means(), vec![0.5, 0.0, 0.0]);
    }

    #[test]
    fn random_family_respects_min_gap() {
        for seed in 0..20 {
            let i = generate_random(12, 4, seed, 0.15).unwrap();
            let d = i.decompose_groups().unwrap();
            let boundary = i
                .top_k_set()
                .unwrap()
                .iter()
                .map(|&id| d.gaps[id])
                .fold(f64::INFINITY, f64::min);
            assert!(boundary >= 0.15 - 1e-12, "seed {}: {}", seed, boundary);
        }
    }

    #[test]
    fn family_dispatch() {
        let mut p = BTreeMap::new();
        p.insert("n".to_string(), 4.0);
        p.insert("eps".to_string(), 0.0625);
        let i = generate_family("appendix_a", &p).unwrap();
        assert_eq!(i.n_arms(), 10);
        assert!(generate_family("nope", &p).is_err());
        p.remove("eps");
        assert!(generate_family("appendix_a", &p).is_err());
    }

    #[test]
    fn wilson_known_values() {
        // 0/10 failures: interval starts at 0
        let (lo, hi) = wilson95(0, 10);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.2775).abs() < 1e-3);
        // 5/10: symmetric around 0.5
        let (lo, hi) = wilson95(5, 10);
        assert!((lo + hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trial_determinism_and_parallel_equivalence() {
        let cfg = |jobs| TrialConfig {
            instance: generate_appendix_a(2, 1.0 / 8.0).unwrap(),
            algorithm: AlgorithmChoice::Bilateral,
            delta: 0.2,
            trials: 6,
            master_seed: 42,
            jobs,
            algo_config: AlgoConfig::default(),
        };
        let a = run_trials(&cfg(1)).unwrap();
        let b = run_trials(&cfg(4)).unwrap();
        let ja = serde_json::to_string(&a).unwrap();
        let jb = serde_json::to_string(&b).unwrap();
        assert_eq!(ja, jb);
    }

    #[test]
    fn aggregate_counts() {
        let cfg = TrialConfig {
            instance: generate_uniform_gaps(3, 1, 0.5).unwrap(),
            algorithm: AlgorithmChoice::Bilateral,
            delta: 0.1,
            trials: 10,
            master_seed: 7,
            jobs: 1,
            algo_config: AlgoConfig::default(),
        };
        let recs = run_trials(&cfg).unwrap();
        let agg = aggregate(&recs);
        assert_eq!(agg.trials, 10);
        assert!(agg.error_rate <= 0.2, "error rate {}", agg.error_rate);
        assert!(agg.samples_median > 0);
        assert!(agg.error_wilson95_hi >= agg.error_rate);
    }

    #[test]
    fn trials_zero_rejected() {
        let cfg = TrialConfig {
            instance: generate_uniform_gaps(3, 1, 0.5).unwrap(),
            algorithm: AlgorithmChoice::Bilateral,
            delta: 0.1,
            trials: 0,
            master_seed: 7,
            jobs: 1,
            algo_config: AlgoConfig::default(),
        };
        assert!(run_trials(&cfg).is_err());
    }
}
