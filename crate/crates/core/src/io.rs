//! CSV and JSON writers. Every format is a fixed column set so outputs diff
//! cleanly and load directly into plotting tools.

use std::io::Write;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::classical::EstimateRecord;
use crate::dist::{DiscretizationErrorReport, DiscretizedDistribution};
use crate::error::Result;
use crate::experiments::{Allocation, ScalingReport};
use crate::grover_rudolph::{AngleSchedule, PreparedState};
use crate::quantum::ShotRecord;

/// `index,x,probability`.
pub fn write_pmf_csv<W: Write>(w: W, disc: &DiscretizedDistribution) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        index: usize,
        x: f64,
        probability: f64,
    }
    let mut out = csv::Writer::from_writer(w);
    for (index, &probability) in disc.probs().iter().enumerate() {
        out.serialize(Row {
            index,
            x: disc.grid_point(index),
            probability,
        })?;
    }
    out.flush()?;
    Ok(())
}

/// `index,amplitude,probability`.
pub fn write_state_csv<W: Write>(w: W, state: &PreparedState) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        index: usize,
        amplitude: f64,
        probability: f64,
    }
    let mut out = csv::Writer::from_writer(w);
    for (index, &amplitude) in state.amps().iter().enumerate() {
        out.serialize(Row {
            index,
            amplitude,
            probability: amplitude * amplitude,
        })?;
    }
    out.flush()?;
    Ok(())
}

/// `iteration,interval_index,theta`.
pub fn write_angles_csv<W: Write>(w: W, schedule: &AngleSchedule) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        iteration: usize,
        interval_index: usize,
        theta: f64,
    }
    let mut out = csv::Writer::from_writer(w);
    for (iteration, level) in schedule.levels().iter().enumerate() {
        for (interval_index, &theta) in level.iter().enumerate() {
            out.serialize(Row {
                iteration,
                interval_index,
                theta,
            })?;
        }
    }
    out.flush()?;
    Ok(())
}

/// `estimator,seed,n_samples,cost_units,estimate,true_value,sq_error`.
pub fn write_records_csv<W: Write>(w: W, records: &[EstimateRecord]) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        estimator: &'static str,
        seed: u64,
        n_samples: u64,
        cost_units: u64,
        estimate: f64,
        true_value: f64,
        sq_error: f64,
    }
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        out.serialize(Row {
            estimator: r.estimator.as_str(),
            seed: r.seed,
            n_samples: r.queries_or_samples,
            cost_units: r.cost_units,
            estimate: r.estimate,
            true_value: r.true_value,
            sq_error: r.sq_error(),
        })?;
    }
    out.flush()?;
    Ok(())
}

/// `depth,hits,shots`.
pub fn write_trace_csv<W: Write>(w: W, trace: &[ShotRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in trace {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// `target,prep_samples,queries,cost_units,rmse,stderr`, one row per grid point.
pub fn write_scaling_csv<W: Write>(w: W, report: &ScalingReport) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in &report.rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// `n,bound,measured,continuous_mean,discrete_mean`.
pub fn write_discretization_csv<W: Write>(w: W, reports: &[DiscretizationErrorReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in reports {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// `total_cost,prep_samples,queries,prep_term,qmc_term,predicted_mse`.
pub fn write_allocations_csv<W: Write>(w: W, allocations: &[Allocation]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for a in allocations {
        out.serialize(a)?;
    }
    out.flush()?;
    Ok(())
}

/// Pretty JSON followed by a newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// SHA-256 of the compact JSON encoding of `config`, hex encoded.
pub fn config_hash<T: Serialize + ?Sized>(config: &T) -> Result<String> {
    let bytes = serde_json::to_vec(config)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Summary of one scaling report, keyed by the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingSummary {
    pub arm: String,
    pub slope: f64,
    pub ci95: [f64; 2],
    pub config_hash: String,
    pub likelihood_ties: u64,
    pub clamped: u64,
}

impl ScalingSummary {
    pub fn new<T: Serialize + ?Sized>(report: &ScalingReport, config: &T) -> Result<Self> {
        Ok(Self {
            arm: report.arm.as_str().to_owned(),
            slope: report.fit.slope,
            ci95: [report.fit.ci95.0, report.fit.ci95.1],
            config_hash: config_hash(config)?,
            likelihood_ties: report.flags.likelihood_ties,
            clamped: report.flags.clamped,
        })
    }
}
