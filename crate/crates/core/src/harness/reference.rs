use std::path::Path;

use crate::fitting_room::{run_des_replication, ScenarioConfig};
use crate::stats_suite::Sample;

use super::{ComparisonUnit, HarnessError};

/// Reads the `total_wait` column of a CSV file. Other columns are ignored.
pub fn load_reference_sample(path: &Path) -> Result<Sample, HarnessError> {
    let parse = |message: String| HarnessError::Parse {
        path: path.display().to_string(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| parse(e.to_string()))?;
    let column = reader
        .headers()
        .map_err(|e| parse(e.to_string()))?
        .iter()
        .position(|h| h == "total_wait")
        .ok_or_else(|| parse("no `total_wait` column in header".into()))?;

    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| parse(format!("data row {row}: {e}")))?;
        let field = record
            .get(column)
            .ok_or_else(|| parse(format!("data row {row}: missing `total_wait` field")))?;
        let value: f64 = field
            .parse()
            .map_err(|_| parse(format!("data row {row}: `{field}` is not a number")))?;
        if !value.is_finite() {
            return Err(parse(format!("data row {row}: `{field}` is not finite")));
        }
        if value < 0.0 {
            return Err(HarnessError::NegativeWaitingTime {
                path: path.display().to_string(),
                row,
                value,
            });
        }
        values.push(value);
    }
    if values.is_empty() {
        return Err(parse("no data rows".into()));
    }
    Ok(Sample::new("reference", values)?)
}

/// Seeds for a synthetic reference: counting down from `base_seed - 1`, so
/// they never coincide with replication seeds `base_seed + i` for any
/// realistic replication count.
pub fn synthetic_reference_seeds(base_seed: u64, days: u32) -> Vec<u64> {
    (1..=days as u64).map(|d| base_seed.wrapping_sub(d)).collect()
}

/// Simulates a stand-in for observed data with the process-flow model on
/// held-out seeds.
pub fn synthetic_reference(
    config: &ScenarioConfig,
    base_seed: u64,
    days: u32,
    unit: ComparisonUnit,
) -> Result<Sample, HarnessError> {
    let mut values = Vec::new();
    for seed in synthetic_reference_seeds(base_seed, days) {
        let r = run_des_replication(config, seed)?;
        match unit {
            ComparisonUnit::Customer => values.extend_from_slice(&r.waiting_time_sample),
            ComparisonUnit::Replication => values.extend(r.mean_wait()),
        }
    }
    Ok(Sample::new("synthetic reference", values)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), contents).unwrap();
        f
    }

    #[test]
    fn three_rows() {
        let f = file("total_wait\n1.0\n2.0\n3.0\n");
        let s = load_reference_sample(f.path()).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(crate::stats_suite::mean(&s.values), Some(2.0));
    }

    #[test]
    fn extra_columns_ignored() {
        let f = file("customer_id,total_wait,note\n0,0.5,x\n1,1.5,y\n");
        assert_eq!(load_reference_sample(f.path()).unwrap().values, vec![0.5, 1.5]);
    }

    #[test]
    fn bad_row_reports_row_number() {
        let f = file("total_wait\n1.0\nabc\n");
        match load_reference_sample(f.path()) {
            Err(HarnessError::Parse { message, .. }) => assert!(message.contains("row 2"), "{message}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_wait() {
        let f = file("total_wait\n-1.0\n");
        assert!(matches!(
            load_reference_sample(f.path()),
            Err(HarnessError::NegativeWaitingTime { row: 1, .. })
        ));
    }

    #[test]
    fn header_only_and_missing_column() {
        assert!(matches!(
            load_reference_sample(file("total_wait\n").path()),
            Err(HarnessError::Parse { .. })
        ));
        assert!(matches!(
            load_reference_sample(file("wait\n1.0\n").path()),
            Err(HarnessError::Parse { .. })
        ));
    }

    #[test]
    fn held_out_seeds_wrap() {
        assert_eq!(synthetic_reference_seeds(1, 2), vec![0, u64::MAX]);
    }
}
