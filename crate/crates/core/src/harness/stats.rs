use serde::{Deserialize, Serialize};

use super::record::RunRow;
use crate::market::pearson;

/// A correlation that may be undefined (constant or too-short series).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub x: String,
    pub y: String,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub ticks: usize,
    pub final_window: usize,
    pub correlations: Vec<Correlation>,
    /// `(column, mean over the final window)`.
    pub final_means: Vec<(String, f64)>,
    /// Columns containing non-finite values; their statistics are omitted.
    pub non_finite: Vec<String>,
}

impl SummaryStats {
    pub fn corr(&self, x: &str, y: &str) -> Option<f64> {
        self.correlations.iter().find(|c| c.x == x && c.y == y).and_then(|c| c.value)
    }

    pub fn final_mean(&self, col: &str) -> Option<f64> {
        self.final_means.iter().find(|(c, _)| c == col).map(|&(_, v)| v)
    }
}

type Getter = fn(&RunRow) -> f64;

const NUMERIC: [(&str, Getter); 16] = [
    ("q_h", |r| r.q_h),
    ("q_l", |r| r.q_l),
    ("pollution", |r| r.pollution),
    ("verify_rate", |r| r.verify_rate),
    ("precision", |r| r.precision),
    ("trust", |r| r.trust),
    ("welfare", |r| r.welfare),
    ("i1", |r| r.i1),
    ("i2", |r| r.i2),
    ("i3", |r| r.i3),
    ("i4", |r| r.i4),
    ("ipi", |r| r.ipi),
    ("tau", |r| r.tau),
    ("gamma_h", |r| r.gamma_h),
    ("gamma_l", |r| r.gamma_l),
    ("m", |r| r.m),
];

const PAIRS: [(&str, &str); 5] = [
    ("ipi", "welfare"),
    ("pollution", "welfare"),
    ("trust", "welfare"),
    ("ipi", "pollution"),
    ("ipi", "trust"),
];

/// Length of the final averaging window: the last max(20, 10%) ticks.
pub fn final_window(ticks: usize) -> usize {
    20.max(ticks / 10).min(ticks)
}

pub fn tail_mean(xs: &[f64], window: usize) -> f64 {
    let w = window.min(xs.len());
    if w == 0 {
        return f64::NAN;
    }
    xs[xs.len() - w..].iter().sum::<f64>() / w as f64
}

pub fn summary_stats(rows: &[RunRow]) -> SummaryStats {
    let window = final_window(rows.len());
    let cols: Vec<(&str, Vec<f64>)> = NUMERIC.iter().map(|&(n, f)| (n, rows.iter().map(f).collect())).collect();
    let col = |n: &str| cols.iter().find(|(c, _)| *c == n).map(|(_, v)| v.as_slice()).unwrap_or(&[]);
    let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());

    let non_finite: Vec<String> = cols.iter().filter(|(_, v)| !finite(v)).map(|(n, _)| n.to_string()).collect();
    let correlations = PAIRS
        .iter()
        .map(|&(x, y)| {
            let (a, b) = (col(x), col(y));
            Correlation {
                x: x.into(),
                y: y.into(),
                value: if finite(a) && finite(b) { pearson(a, b) } else { None },
            }
        })
        .collect();
    let final_means = if rows.is_empty() {
        Vec::new()
    } else {
        cols.iter()
            .filter(|(_, v)| finite(v))
            .map(|(n, v)| (n.to_string(), tail_mean(v, window)))
            .collect()
    };
    SummaryStats {
        ticks: rows.len(),
        final_window: window,
        correlations,
        final_means,
        non_finite,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(ipi: &[f64], welfare: &[f64]) -> Vec<RunRow> {
        ipi.iter()
            .zip(welfare)
            .enumerate()
            .map(|(i, (&a, &w))| RunRow {
                tick: i + 1,
                q_h: 1.0,
                q_l: 1.0,
                pollution: a,
                verify_rate: 0.0,
                precision: 1.0,
                trust: 0.5,
                welfare: w,
                i1: a,
                i2: 0.0,
                i3: 0.5,
                i4: 0.5,
                ipi: a,
                tau: 0.0,
                gamma_h: 1.0,
                gamma_l: 1.0,
                m: 0.0,
                event: String::new(),
            })
            .collect()
    }

    #[test]
    fn window_rule() {
        assert_eq!(final_window(150), 20);
        assert_eq!(final_window(1000), 100);
        assert_eq!(final_window(5), 5);
    }

    #[test]
    fn anti_correlated_series() {
        let s = summary_stats(&rows(&[0.1, 0.2, 0.3, 0.4], &[4.0, 3.0, 2.0, 1.0]));
        assert!((s.corr("ipi", "welfare").unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_series_is_undefined_not_nan() {
        let s = summary_stats(&rows(&[0.3; 5], &[1.0, 2.0, 3.0, 4.0, 5.0]));
        assert_eq!(s.corr("ipi", "welfare"), None);
        assert!(s.final_means.iter().all(|(_, v)| v.is_finite()));
    }

    #[test]
    fn non_finite_columns_are_flagged() {
        let s = summary_stats(&rows(&[0.1, 0.2, 0.3], &[1.0, f64::NAN, 2.0]));
        assert_eq!(s.non_finite, vec!["welfare".to_string()]);
        assert_eq!(s.corr("ipi", "welfare"), None);
        assert_eq!(s.final_mean("welfare"), None);
    }
}
