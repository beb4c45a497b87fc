//! Result rows, CSV output and a plain-text summary.

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

use pcp_core::levelset::convergence_order;

/// One measurement, or (with `h` and `value` empty) one observed order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub scenario: String,
    pub h: Option<f64>,
    pub alpha: Option<f64>,
    pub metric: String,
    pub value: Option<f64>,
    pub order: Option<f64>,
}

impl Row {
    pub fn value(scenario: &str, h: f64, alpha: Option<f64>, metric: &str, value: f64) -> Self {
        Self { scenario: scenario.into(), h: Some(h), alpha, metric: metric.into(), value: Some(value), order: None }
    }
}

/// Appends one order row per metric having at least two resolutions at
/// the same `alpha`. Rows keep their input order; order rows follow.
pub fn with_orders(rows: Vec<Row>) -> Vec<Row> {
    let mut keys: Vec<(String, String, Option<u64>)> = Vec::new();
    for r in &rows {
        if r.h.is_some() && r.value.is_some() {
            let k = (r.scenario.clone(), r.metric.clone(), r.alpha.map(f64::to_bits));
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
    }
    let mut out = rows.clone();
    for (scenario, metric, alpha) in keys {
        let (h, e): (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter(|r| r.scenario == scenario && r.metric == metric && r.alpha.map(f64::to_bits) == alpha)
            .filter_map(|r| Some((r.h?, r.value?)))
            .unzip();
        let mut distinct = h.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() < 2 {
            continue;
        }
        if let Ok(order) = convergence_order(&h, &e) {
            out.push(Row { scenario, h: None, alpha: alpha.map(f64::from_bits), metric, value: None, order: Some(order) });
        }
    }
    out
}

/// Order row for `metric`, if present.
pub fn order_of(rows: &[Row], metric: &str) -> Option<f64> {
    rows.iter().find(|r| r.metric == metric && r.h.is_none()).and_then(|r| r.order)
}

/// Values of `metric` in row order.
pub fn values_of(rows: &[Row], metric: &str) -> Vec<f64> {
    rows.iter().filter(|r| r.metric == metric && r.h.is_some()).filter_map(|r| r.value).collect()
}

pub fn write_csv<W: Write>(rows: &[Row], w: W) -> anyhow::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["scenario", "h", "alpha", "metric", "value", "order"])?;
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for r in rows {
        wr.write_record([r.scenario.clone(), fmt(r.h), fmt(r.alpha), r.metric.clone(), fmt(r.value), fmt(r.order)])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_csv_file(rows: &[Row], path: &Path) -> anyhow::Result<()> {
    let f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(rows, std::io::BufWriter::new(f))
}

/// Human-readable table of the rows.
pub fn summary(rows: &[Row]) -> String {
    let mut s = String::new();
    for r in rows {
        let h = r.h.map(|h| format!("h=1/{:.0}", 1.0 / h)).unwrap_or_else(|| "order".into());
        let a = r.alpha.map(|a| format!(" alpha={a}")).unwrap_or_default();
        let v = r.value.or(r.order).map(|v| format!("{v:.4e}")).unwrap_or_default();
        s.push_str(&format!("{:<18} {:<10}{a} {:<28} {v}\n", r.scenario, h, r.metric));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_of(rows: &[Row]) -> String {
        let mut buf = Vec::new();
        write_csv(rows, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(csv_of(&[]), "scenario,h,alpha,metric,value,order\n");
    }

    #[test]
    fn one_order_row_per_metric() {
        let rows = vec![
            Row::value("s", 0.1, None, "a", 1e-2),
            Row::value("s", 0.05, None, "a", 2.5e-3),
            Row::value("s", 0.1, None, "b", 1.0),
            Row::value("s", 0.05, None, "b", 0.5),
        ];
        let out = with_orders(rows);
        assert_eq!(out.len(), 6);
        assert!((order_of(&out, "a").unwrap() - 2.0).abs() < 1e-12);
        assert!((order_of(&out, "b").unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(csv_of(&out), csv_of(&out.clone()));
    }
}
