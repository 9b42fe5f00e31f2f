//! Report rows: `time,variant,metric,value,ci_low,ci_high,bound,applicable,reason`.

use std::fmt::Write;

pub const HEADER: &str = "time,variant,metric,value,ci_low,ci_high,bound,applicable,reason";

/// A numeric cell, or `NA` when absent.
#[derive(Debug, Clone, Copy)]
pub enum Cell {
    Value(f64),
    Na,
    Empty,
}

impl Cell {
    fn render(self, out: &mut String) {
        match self {
            Cell::Value(v) => write!(out, "{v:?}").unwrap(),
            Cell::Na => out.push_str("NA"),
            Cell::Empty => {}
        }
    }
}

#[derive(Debug, Clone)]
pub struct Row {
    pub time: f64,
    pub variant: String,
    pub metric: String,
    pub value: Cell,
    pub ci: Option<(f64, f64)>,
    pub bound: Cell,
    pub applicable: Option<bool>,
    pub reason: String,
}

impl Row {
    pub fn estimate(time: f64, variant: &str, metric: impl Into<String>, value: f64, ci: (f64, f64)) -> Self {
        Row {
            time,
            variant: variant.to_string(),
            metric: metric.into(),
            value: Cell::Value(value),
            ci: Some(ci),
            bound: Cell::Empty,
            applicable: None,
            reason: String::new(),
        }
    }

    pub fn with_bound(mut self, bound: Option<f64>, reason: Option<&str>) -> Self {
        self.bound = bound.map_or(Cell::Na, Cell::Value);
        self.applicable = Some(bound.is_some());
        self.reason = reason.unwrap_or_default().to_string();
        self
    }
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub fn render(rows: &[Row]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for row in rows {
        write!(out, "{:?},{},{},", row.time, quote(&row.variant), quote(&row.metric)).unwrap();
        row.value.render(&mut out);
        out.push(',');
        match row.ci {
            Some((lo, hi)) => write!(out, "{lo:?},{hi:?},").unwrap(),
            None => out.push_str(",,"),
        }
        row.bound.render(&mut out);
        out.push(',');
        if let Some(a) = row.applicable {
            write!(out, "{a}").unwrap();
        }
        out.push(',');
        out.push_str(&quote(&row.reason));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_missing_bounds_as_na() {
        let row = Row::estimate(1.0, "m2", "miss_probability", 0.5, (0.25, 0.75)).with_bound(None, Some("c_M2 ≤ 0"));
        let text = render(&[row]);
        assert_eq!(text.lines().nth(1), Some("1.0,m2,miss_probability,0.5,0.25,0.75,NA,false,c_M2 ≤ 0"));
    }

    #[test]
    fn quotes_commas() {
        assert_eq!(quote("a,b"), "\"a,b\"");
        assert_eq!(quote("plain"), "plain");
    }
}
