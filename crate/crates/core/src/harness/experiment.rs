use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fitting_room::{run_replication, workload_fractions, Paradigm, ReplicationResult, ScenarioConfig};
use crate::stats_suite::{
    describe, histogram, mann_whitney_u, variance_comparison, Bin, Descriptive, MannWhitneyResult, Sample,
    VarianceComparison,
};

use super::reference::{load_reference_sample, synthetic_reference, synthetic_reference_seeds};
use super::{ComparisonUnit, ExperimentSpec, HarnessError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParadigmReport {
    pub paradigm: Paradigm,
    /// Per-replication results without customer timelines or wall time.
    pub replications: Vec<ReplicationResult>,
    /// Over every completed customer's wait in every replication.
    pub pooled: Option<Descriptive>,
    /// Mean wait of each replication that completed at least one customer.
    pub replication_means: Vec<f64>,
    /// Staff workload split by job, averaged over replications.
    pub mean_workload_fractions: Option<[f64; 3]>,
    pub histogram: Vec<Bin>,
    pub warnings: Vec<String>,
}

impl ParadigmReport {
    /// Pooled waits or replication means, depending on `unit`.
    pub fn comparison_values(&self, unit: ComparisonUnit) -> Vec<f64> {
        match unit {
            ComparisonUnit::Customer => self.pooled_waits(),
            ComparisonUnit::Replication => self.replication_means.clone(),
        }
    }

    pub fn pooled_waits(&self) -> Vec<f64> {
        self.replications
            .iter()
            .flat_map(|r| r.waiting_time_sample.iter().copied())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSummary {
    /// File path, or `synthetic` for a simulated reference.
    pub source: String,
    pub seeds: Vec<u64>,
    pub values: Vec<f64>,
    pub stats: Option<Descriptive>,
    pub histogram: Vec<Bin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParadigmValidation {
    pub paradigm: Paradigm,
    pub mann_whitney: MannWhitneyResult,
    /// Absent when either sample has fewer than two values.
    pub variance: Option<VarianceComparison>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub spec: ExperimentSpec,
    pub seeds: Vec<u64>,
    pub artifact_version: String,
    pub started_at: String,
    pub finished_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub paradigms: Vec<ParadigmReport>,
    pub reference: Option<ReferenceSummary>,
    /// Absent when no reference sample was supplied.
    pub validation: Option<Vec<ParadigmValidation>>,
    /// DES against ABS, when both ran.
    pub cross_paradigm: Option<MannWhitneyResult>,
    pub provenance: Provenance,
}

impl ExperimentReport {
    pub fn paradigm(&self, p: Paradigm) -> Option<&ParadigmReport> {
        self.paradigms.iter().find(|r| r.paradigm == p)
    }

    /// Copy with timestamps blanked, for reproducibility comparisons.
    pub fn without_timestamps(&self) -> Self {
        let mut r = self.clone();
        r.provenance.started_at.clear();
        r.provenance.finished_at.clear();
        r
    }

    /// True when any Mann-Whitney test rejected or any variance comparison
    /// came out different.
    pub fn any_rejection(&self) -> bool {
        let validation = self.validation.iter().flatten().any(|v| {
            v.mann_whitney.reject_null
                || v.variance
                    .is_some_and(|c| c.verdict == crate::stats_suite::VarianceVerdict::Different)
        });
        validation || self.cross_paradigm.as_ref().is_some_and(|c| c.reject_null)
    }
}

/// Seed of replication `i`: `base_seed + i`, wrapping.
pub fn replication_seeds(base_seed: u64, replications: u32) -> Vec<u64> {
    (0..replications as u64).map(|i| base_seed.wrapping_add(i)).collect()
}

/// Runs one replication per seed in parallel. Results come back in seed
/// order; the first failing replication (by index) is reported.
pub fn run_batch(
    paradigm: Paradigm,
    config: &ScenarioConfig,
    seeds: &[u64],
) -> Result<Vec<ReplicationResult>, HarnessError> {
    let results: Vec<_> = seeds
        .par_iter()
        .map(|&seed| run_replication(paradigm, config, seed))
        .collect();
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| r.map_err(|source| HarnessError::Replication { paradigm, index, source }))
        .collect()
}

fn summarise(
    paradigm: Paradigm,
    replications: Vec<ReplicationResult>,
    bin_width: f64,
) -> Result<ParadigmReport, HarnessError> {
    let replications: Vec<ReplicationResult> = replications
        .into_iter()
        .map(|r| r.compact().without_timing())
        .collect();
    let pooled_values: Vec<f64> = replications
        .iter()
        .flat_map(|r| r.waiting_time_sample.iter().copied())
        .collect();
    let pooled = if pooled_values.len() >= 2 {
        Some(describe(&Sample::new(paradigm.label(), pooled_values.clone())?)?)
    } else {
        None
    };
    let replication_means = replications.iter().filter_map(|r| r.mean_wait()).collect();

    let fractions: Vec<[f64; 3]> = replications
        .iter()
        .filter_map(|r| workload_fractions(r).ok())
        .collect();
    let mean_workload_fractions = (!fractions.is_empty()).then(|| {
        let mut m = [0.0; 3];
        for f in &fractions {
            for j in 0..3 {
                m[j] += f[j] / fractions.len() as f64;
            }
        }
        m
    });

    let mut warnings: Vec<String> = replications.iter().filter_map(|r| r.warning.clone()).collect();
    warnings.dedup();
    Ok(ParadigmReport {
        paradigm,
        histogram: histogram(&pooled_values, bin_width, 0.0)?,
        replications,
        pooled,
        replication_means,
        mean_workload_fractions,
        warnings,
    })
}

fn reference_summary(source: String, seeds: Vec<u64>, sample: &Sample, bin_width: f64) -> Result<ReferenceSummary, HarnessError> {
    let stats = if sample.len() >= 2 { Some(describe(sample)?) } else { None };
    Ok(ReferenceSummary {
        source,
        seeds,
        values: sample.values.clone(),
        stats,
        histogram: histogram(&sample.values, bin_width, 0.0)?,
    })
}

fn compare(
    model: &Sample,
    reference: &Sample,
    spec: &ExperimentSpec,
) -> Result<(MannWhitneyResult, Option<VarianceComparison>), HarnessError> {
    let mw = mann_whitney_u(model, reference, spec.alpha)?;
    let variance = if model.len() >= 2 && reference.len() >= 2 {
        Some(variance_comparison(model, reference, spec.variance_threshold_percent)?)
    } else {
        None
    };
    Ok((mw, variance))
}

/// Runs the experiment, reading or simulating the reference sample as the
/// spec says.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport, HarnessError> {
    let reference = if let Some(path) = &spec.reference_sample_path {
        let sample = load_reference_sample(path)?;
        Some((path.display().to_string(), Vec::new(), sample))
    } else if spec.synthetic_reference {
        let sample = synthetic_reference(
            &spec.scenario,
            spec.base_seed,
            spec.synthetic_reference_days,
            spec.comparison_unit,
        )?;
        let seeds = synthetic_reference_seeds(spec.base_seed, spec.synthetic_reference_days);
        Some(("synthetic".to_string(), seeds, sample))
    } else {
        None
    };
    run_experiment_with_reference(spec, reference)
}

/// Runs the experiment against an already-loaded reference, given as
/// (source description, seeds used to simulate it, sample).
pub fn run_experiment_with_reference(
    spec: &ExperimentSpec,
    reference: Option<(String, Vec<u64>, Sample)>,
) -> Result<ExperimentReport, HarnessError> {
    spec.validate()?;
    let started_at = chrono::Utc::now().to_rfc3339();
    let wall = Instant::now();
    let seeds = replication_seeds(spec.base_seed, spec.replications);

    let run_all = || -> Result<Vec<ParadigmReport>, HarnessError> {
        spec.paradigms
            .iter()
            .map(|&p| summarise(p, run_batch(p, &spec.scenario, &seeds)?, spec.histogram_bin_width))
            .collect()
    };
    let paradigms = match spec.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Validation {
                field: "threads".into(),
                reason: e.to_string(),
            })?
            .install(run_all)?,
        None => run_all()?,
    };

    let model_samples: Vec<Sample> = paradigms
        .iter()
        .map(|r| Sample::new(r.paradigm.label(), r.comparison_values(spec.comparison_unit)))
        .collect::<Result<_, _>>()?;

    let (reference, validation) = match reference {
        Some((source, ref_seeds, sample)) => {
            let summary = reference_summary(source, ref_seeds, &sample, spec.histogram_bin_width)?;
            let mut rows = Vec::new();
            for (report, model) in paradigms.iter().zip(&model_samples) {
                let (mann_whitney, variance) = compare(model, &sample, spec)?;
                rows.push(ParadigmValidation {
                    paradigm: report.paradigm,
                    mann_whitney,
                    variance,
                });
            }
            (Some(summary), Some(rows))
        }
        None => (None, None),
    };

    let cross_paradigm = match (
        paradigms.iter().position(|r| r.paradigm == Paradigm::Des),
        paradigms.iter().position(|r| r.paradigm == Paradigm::Abs),
    ) {
        (Some(d), Some(a)) => Some(mann_whitney_u(&model_samples[d], &model_samples[a], spec.alpha)?),
        _ => None,
    };

    log::info!(
        "experiment finished: {} replications x {} paradigm(s) in {:.2}s",
        spec.replications,
        spec.paradigms.len(),
        wall.elapsed().as_secs_f64()
    );
    Ok(ExperimentReport {
        paradigms,
        reference,
        validation,
        cross_paradigm,
        provenance: Provenance {
            spec: spec.clone(),
            seeds,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at,
            finished_at: chrono::Utc::now().to_rfc3339(),
        },
    })
}
