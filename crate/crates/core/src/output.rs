//! File formats: newline-delimited trial streams (header line first) and the
//! aggregate CSV. Both embed the fully resolved config so any run can be
//! reproduced from its outputs alone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{AggregateStats, AlgorithmChoice, TrialConfig, TrialRecord};

pub const STREAM_FORMAT: &str = "trials/v1";

/// First line of every trial stream.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StreamHeader {
    pub format: String,
    pub config: TrialConfig,
}

pub fn trial_stream_to_string(config: &TrialConfig, records: &[TrialRecord]) -> String {
    let header = StreamHeader {
        format: STREAM_FORMAT.to_string(),
        config: config.clone(),
    };
    let mut out = serde_json::to_string(&header).expect("header serialization");
    out.push('\n');
    for rec in records {
        out.push_str(&serde_json::to_string(rec).expect("record serialization"));
        out.push('\n');
    }
    out
}

/// Parse one stream; tolerates a truncated tail only if every present line is
/// well formed.
pub fn parse_trial_stream(text: &str) -> Result<(StreamHeader, Vec<TrialRecord>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let first = lines
        .next()
        .ok_or_else(|| Error::validation("trial stream is empty"))?;
    let header: StreamHeader = serde_json::from_str(first)?;
    if header.format != STREAM_FORMAT {
        return Err(Error::validation(format!(
            "unsupported stream format {:?}",
            header.format
        )));
    }
    let mut records = Vec::new();
    for line in lines {
        records.push(serde_json::from_str::<TrialRecord>(line)?);
    }
    Ok((header, records))
}

/// Parse a single raw trial record line (exposed for fuzzing).
pub fn parse_trial_record(line: &str) -> Result<TrialRecord> {
    Ok(serde_json::from_str(line)?)
}

pub const AGGREGATE_COLUMNS: &str = "n_arms,k,algorithm,delta,trials,errors,error_rate,\
error_wilson95_lo,error_wilson95_hi,samples_mean,samples_median,samples_p95,capped_rate,\
contracts_all_ok_rate,obs2_rate_given_contracts,obs3_rate_given_contracts";

pub fn algorithm_name(a: AlgorithmChoice) -> &'static str {
    match a {
        AlgorithmChoice::Bilateral => "bilateral",
        AlgorithmChoice::Uniform => "uniform",
    }
}

pub fn aggregate_csv_row(config: &TrialConfig, agg: &AggregateStats) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        config.instance.n_arms(),
        config.instance.k,
        algorithm_name(config.algorithm),
        config.delta,
        agg.trials,
        agg.errors,
        agg.error_rate,
        agg.error_wilson95_lo,
        agg.error_wilson95_hi,
        agg.samples_mean,
        agg.samples_median,
        agg.samples_p95,
        agg.capped_rate,
        agg.contracts_all_ok_rate,
        agg.obs2_rate_given_contracts,
        agg.obs3_rate_given_contracts
    )
}

/// One-cell aggregate CSV with the resolved config on a leading comment line.
pub fn aggregate_csv(config: &TrialConfig, agg: &AggregateStats) -> String {
    format!(
        "# config: {}\n{}\n{}\n",
        serde_json::to_string(config).expect("config serialization"),
        AGGREGATE_COLUMNS,
        aggregate_csv_row(config, agg)
    )
}
