use std::fmt::Write as _;
use std::io::Write;

use super::{crps, crps_mean, energy_score, mae_rmse, mean_quantile_score, quantile_score, variogram_score, Ensemble, QUANTILE_LEVELS};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub model: String,
    pub mae: f64,
    pub rmse: f64,
    pub qs: f64,
    pub crps: f64,
    pub es: f64,
    pub vs: f64,
    /// Mean quantile score at each of the nine levels.
    pub qs_by_level: Vec<f64>,
    /// Mean CRPS at each time slot.
    pub crps_by_slot: Vec<f64>,
}

/// Scores one model's ensembles; per-condition scores are averaged.
pub fn evaluate_model(model: &str, ensembles: &[Ensemble]) -> Result<MetricRow> {
    let (mae, rmse) = mae_rmse(ensembles)?;
    let n = ensembles.len() as f64;
    let steps = ensembles[0].steps();
    let mut qs_by_level = vec![0.0; QUANTILE_LEVELS.len()];
    let mut crps_by_slot = vec![0.0; steps];
    let (mut qs, mut cr, mut es, mut vs) = (0.0, 0.0, 0.0, 0.0);
    for e in ensembles {
        if e.steps() != steps {
            return Err(Error::input("ensembles differ in trajectory length"));
        }
        for (acc, &q) in qs_by_level.iter_mut().zip(&QUANTILE_LEVELS) {
            *acc += quantile_score(e, q)? / n;
        }
        for (acc, c) in crps_by_slot.iter_mut().zip(crps(e)) {
            *acc += c / n;
        }
        qs += mean_quantile_score(e) / n;
        cr += crps_mean(e) / n;
        es += energy_score(e)? / n;
        vs += variogram_score(e, 0.5)? / n;
    }
    Ok(MetricRow {
        model: model.to_string(),
        mae,
        rmse,
        qs,
        crps: cr,
        es,
        vs,
        qs_by_level,
        crps_by_slot,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub rows: Vec<MetricRow>,
}

/// One row per model. Every model must be scored against the same actual
/// trajectories in the same order.
pub fn build_report(models: &[(String, Vec<Ensemble>)]) -> Result<MetricReport> {
    if models.is_empty() {
        return Err(Error::input("report needs at least one model"));
    }
    let reference = &models[0].1;
    for (name, ens) in models {
        let same = ens.len() == reference.len() && ens.iter().zip(reference).all(|(a, b)| a.actual() == b.actual());
        if !same {
            return Err(Error::input(format!("model `{name}` was scored on different conditions")));
        }
    }
    let rows = models
        .iter()
        .map(|(name, ens)| evaluate_model(name, ens))
        .collect::<Result<Vec<_>>>()?;
    Ok(MetricReport { rows })
}

impl MetricReport {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["model", "mae", "rmse", "qs", "crps", "es", "vs"])?;
        for r in &self.rows {
            let mut rec = vec![r.model.clone()];
            rec.extend([r.mae, r.rmse, r.qs, r.crps, r.es, r.vs].iter().map(f64::to_string));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// `model,q,qs` for every model and level.
    pub fn write_quantile_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["model", "q", "qs"])?;
        for r in &self.rows {
            for (q, v) in QUANTILE_LEVELS.iter().zip(&r.qs_by_level) {
                wtr.write_record([r.model.clone(), q.to_string(), v.to_string()])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// `model,t,crps` for every model and time slot.
    pub fn write_crps_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["model", "t", "crps"])?;
        for r in &self.rows {
            for (t, v) in r.crps_by_slot.iter().enumerate() {
                wtr.write_record([r.model.clone(), t.to_string(), v.to_string()])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Fixed-width table with two decimals.
    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.model.len()).max().unwrap_or(0).max(5);
        let mut s = format!("{:<width$}", "Model");
        for h in ["MAE", "RMSE", "QS", "CRPS", "ES", "VS"] {
            let _ = write!(s, " {h:>10}");
        }
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{:<width$}", r.model);
            for v in [r.mae, r.rmse, r.qs, r.crps, r.es, r.vs] {
                let _ = write!(s, " {v:>10.2}");
            }
            s.push('\n');
        }
        s
    }

    /// Reads a report CSV back; per-level and per-slot detail is left empty.
    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let num = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|v| v.trim().parse().ok())
                    .ok_or_else(|| Error::Parse { line, msg: format!("column {i} is not a number") })
            };
            rows.push(MetricRow {
                model: rec.get(0).unwrap_or("").to_string(),
                mae: num(1)?,
                rmse: num(2)?,
                qs: num(3)?,
                crps: num(4)?,
                es: num(5)?,
                vs: num(6)?,
                qs_by_level: Vec::new(),
                crps_by_slot: Vec::new(),
            });
        }
        Ok(Self { rows })
    }
}
