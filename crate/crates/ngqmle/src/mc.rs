//! Parallel driver for replication studies.

use ngqmle_core::montecarlo::{ratio_tables, McConfig, McPlan, McReport, Replication};
use rayon::prelude::*;

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "NGQMLE_THREADS";

/// Runs all replications on `threads` workers (rayon's default when `None`).
/// The report is identical for every worker count.
pub fn run_parallel(config: McConfig, threads: Option<usize>) -> anyhow::Result<McReport> {
    let plan = McPlan::new(config)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    let n = plan.config().replications;
    let reps: Vec<Replication> = pool.install(|| (0..n).into_par_iter().map(|r| plan.replicate(r)).collect());
    Ok(plan.summarize(reps))
}

/// Ratio tables for `pairs` as CSV: one row per pair, variance ratios for
/// every parameter followed by MSE ratios. Flagged entries are left empty.
pub fn ratio_csv(report: &McReport, pairs: &[(String, String)]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["numerator".to_string(), "denominator".to_string(), "n".to_string()];
    header.extend(report.parameter_names.iter().map(|p| format!("var_{p}")));
    header.extend(report.parameter_names.iter().map(|p| format!("mse_{p}")));
    w.write_record(&header)?;
    for (num, den) in pairs {
        let rows = ratio_tables(report, num, den)?;
        let fmt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.4}"));
        let mut rec = vec![num.clone(), den.clone(), rows.first().map_or(0, |r| r.n).to_string()];
        rec.extend(rows.iter().map(|r| fmt(r.variance_ratio)));
        rec.extend(rows.iter().map(|r| fmt(r.mse_ratio)));
        w.write_record(&rec)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
