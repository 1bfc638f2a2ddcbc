//! CSV renderings of evaluation results and studies.

use pcmkit_core::analysis::{EnergySummary, TraceComparison};
use pcmkit_core::evaluate::sensitivity::SensitivityCurve;
use pcmkit_core::evaluate::EvalReport;

fn table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn eval_reports_csv(reports: &[EvalReport]) -> Vec<u8> {
    table(
        &["model", "dataset", "split", "n", "mse", "mape", "r2"],
        reports.iter().map(|r| {
            vec![
                r.model_id.clone(),
                r.dataset_id.clone(),
                r.split.tag().into(),
                r.n.to_string(),
                r.mse.to_string(),
                r.mape.to_string(),
                r.r2.to_string(),
            ]
        }),
    )
}

pub fn sensitivity_csv(curves: &[SensitivityCurve]) -> Vec<u8> {
    table(
        &["model", "size", "mean_r2", "std_r2"],
        curves.iter().flat_map(|c| {
            c.points
                .iter()
                .map(|p| vec![c.variant.tag().into(), p.size.to_string(), p.mean.to_string(), p.std.to_string()])
        }),
    )
}

pub fn energy_csv(s: &EnergySummary) -> Vec<u8> {
    table(
        &["flight_id", "samples", "predicted_j", "measured_j", "error_j", "capacity_fraction", "within_bound"],
        s.flights.iter().map(|f| {
            vec![
                f.flight_id.clone(),
                f.samples.to_string(),
                f.predicted_j.to_string(),
                f.measured_j.to_string(),
                f.error_j.to_string(),
                f.capacity_fraction.to_string(),
                (f.error_j.abs() <= s.config.bound_j).to_string(),
            ]
        }),
    )
}

pub fn trace_csv(t: &TraceComparison) -> Vec<u8> {
    table(
        &["t", "power", "prediction"],
        (0..t.t.len()).map(|i| vec![t.t[i].to_string(), t.truth[i].to_string(), t.prediction[i].to_string()]),
    )
}

pub fn predictions_csv(flight_ids: &[String], t: &[f64], y: &[f64], yhat: &[f64]) -> Vec<u8> {
    table(
        &["flight_id", "t", "power", "prediction"],
        (0..y.len()).map(|i| vec![flight_ids[i].clone(), t[i].to_string(), y[i].to_string(), yhat[i].to_string()]),
    )
}

pub fn residuals_csv(flight_ids: &[String], t: &[f64], errors: &[f64]) -> Vec<u8> {
    table(
        &["flight_id", "t", "error"],
        (0..errors.len()).map(|i| vec![flight_ids[i].clone(), t[i].to_string(), errors[i].to_string()]),
    )
}

/// Plain-text view of per-flight energy errors: one line per flight and
/// the share of flights inside the bound.
pub fn energy_text(s: &EnergySummary) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<24} {:>8} {:>14} {:>12}\n",
        "flight", "samples", "error [J]", "of capacity"
    ));
    for f in &s.flights {
        out.push_str(&format!(
            "{:<24} {:>8} {:>14.1} {:>11.3}%\n",
            f.flight_id,
            f.samples,
            f.error_j,
            100.0 * f.capacity_fraction
        ));
    }
    out.push_str(&format!(
        "{:.1}% of {} flights within +/-{} J ({:.3}% of a {} J battery)\n",
        100.0 * s.within_bound,
        s.flights.len(),
        s.config.bound_j,
        100.0 * s.config.bound_j / s.config.capacity_j,
        s.config.capacity_j
    ));
    out
}
