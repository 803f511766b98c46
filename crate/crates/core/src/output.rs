//! File formats: JSON lines for per-trial records, CSV for summaries.

use std::io::{self, Write};

use serde::Serialize;

use crate::sim::{BatchSummary, SimConfig, SimOutcome};

/// Column order of the batch summary CSV.
pub const BATCH_CSV_HEADER: &str = "d,mu,variant,T,D,trials,mean_visits,stderr,mean_woken";

/// One per-trial JSON-lines record.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub root_visits: u64,
    pub frogs_woken: u64,
    pub absorbed_at_cap: u64,
}

impl From<&SimOutcome> for TrialRecord {
    fn from(o: &SimOutcome) -> Self {
        Self {
            trial: o.trial,
            root_visits: o.root_visits,
            frogs_woken: o.frogs_woken,
            absorbed_at_cap: o.absorbed_at_cap,
        }
    }
}

pub fn write_trial_record<W: Write>(out: &mut W, outcome: &SimOutcome) -> io::Result<()> {
    serde_json::to_writer(&mut *out, &TrialRecord::from(outcome))?;
    out.write_all(b"\n")
}

/// Batch summary row matching [`BATCH_CSV_HEADER`]. `mu` is the mean of
/// the frog law.
pub fn batch_csv_row(config: &SimConfig, summary: &BatchSummary) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        config.d,
        config.frog_law.mean(),
        config.variant.as_str(),
        config.horizon,
        config.depth_cap,
        summary.trials,
        summary.mean_visits,
        summary.stderr,
        summary.mean_woken
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{run_batch_with, FrogLaw, Variant};

    #[test]
    fn record_key_order() {
        let c = SimConfig::new(2, FrogLaw::Poisson { mu: 0.5 }, Variant::Simple, 20, 10, 3, 1);
        let mut buf = Vec::new();
        let summary = run_batch_with(&c, |o| {
            write_trial_record(&mut buf, o).unwrap();
            Ok(())
        })
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        let first = text.lines().next().unwrap();
        assert!(first.starts_with("{\"trial\":0,\"root_visits\":"), "{first}");
        let keys: Vec<&str> = ["trial", "root_visits", "frogs_woken", "absorbed_at_cap"].to_vec();
        let mut pos = 0;
        for k in keys {
            let at = first.find(&format!("\"{k}\"")).unwrap();
            assert!(at >= pos);
            pos = at;
        }
        let row = batch_csv_row(&c, &summary);
        assert_eq!(row.split(',').count(), BATCH_CSV_HEADER.split(',').count());
        assert!(row.starts_with("2,0.5,simple,20,10,3,"));
    }
}
