//! η_f and μ grids over likelihood × innovation lists.

use ngqmle_core::asymptotics::mu;
use ngqmle_core::eta::eta_population;
use ngqmle_core::likelihoods::{InnovationDistribution, QuasiLikelihood};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Eta,
    Mu,
}

/// Rows are likelihoods, columns innovations; cells that fail hold the error.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Table {
    pub kind: TableKind,
    pub likelihoods: Vec<String>,
    pub innovations: Vec<String>,
    pub values: Vec<Vec<Result<f64, String>>>,
}

pub fn compute(kind: TableKind, likelihoods: &[QuasiLikelihood], innovations: &[InnovationDistribution]) -> Table {
    let values = likelihoods
        .iter()
        .map(|f| {
            innovations
                .iter()
                .map(|g| {
                    let v = match kind {
                        TableKind::Eta => eta_population(f, g).map(|s| s.eta),
                        TableKind::Mu => mu(f, g),
                    };
                    v.map_err(|e| e.to_string())
                })
                .collect()
        })
        .collect();
    Table {
        kind,
        likelihoods: likelihoods.iter().map(|f| f.to_string()).collect(),
        innovations: innovations.iter().map(|g| g.to_string()).collect(),
        values,
    }
}

impl Table {
    /// CSV with a leading `likelihood` column and three decimals per cell;
    /// failed cells are written as `NA`.
    pub fn to_csv(&self) -> anyhow::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["likelihood".to_string()];
        header.extend(self.innovations.iter().cloned());
        w.write_record(&header)?;
        for (name, row) in self.likelihoods.iter().zip(&self.values) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(|v| match v {
                Ok(x) => format!("{x:.3}"),
                Err(_) => "NA".into(),
            }));
            w.write_record(&rec)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}
