use serde::{Deserialize, Serialize};

use super::{EvalReport, MetricRow};

/// Which report row a crossbar is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricFamily {
    InOdd,
    InPlusExtended,
    EMap,
}

impl MetricFamily {
    pub const ALL: [MetricFamily; 3] = [MetricFamily::InOdd, MetricFamily::InPlusExtended, MetricFamily::EMap];

    pub fn name(self) -> &'static str {
        match self {
            MetricFamily::InOdd => "in_odd",
            MetricFamily::InPlusExtended => "in_plus_extended",
            MetricFamily::EMap => "e_map",
        }
    }

    fn row(self, r: &EvalReport) -> &MetricRow {
        match self {
            MetricFamily::InOdd => &r.in_odd,
            MetricFamily::InPlusExtended => &r.in_plus_extended,
            MetricFamily::EMap => &r.e_map,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricName {
    Map,
    Map50,
    Map75,
}

impl MetricName {
    fn pick(self, row: &MetricRow) -> f64 {
        match self {
            MetricName::Map => row.map,
            MetricName::Map50 => row.map50,
            MetricName::Map75 => row.map75,
        }
    }
}

/// One evaluated (model, test source) pair.
#[derive(Debug, Clone)]
pub struct CrossbarCell {
    pub row: String,
    pub column: String,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossbarMatrix {
    pub family: MetricFamily,
    pub metric: MetricName,
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

/// Rows and columns keep the order in which tags first appear. A later cell
/// for the same (row, column) replaces an earlier one.
pub fn crossbar(cells: &[CrossbarCell], family: MetricFamily, metric: MetricName) -> CrossbarMatrix {
    let mut rows: Vec<String> = Vec::new();
    let mut columns: Vec<String> = Vec::new();
    for c in cells {
        if !rows.contains(&c.row) {
            rows.push(c.row.clone());
        }
        if !columns.contains(&c.column) {
            columns.push(c.column.clone());
        }
    }
    let mut values = vec![vec![None; columns.len()]; rows.len()];
    for c in cells {
        let i = rows.iter().position(|r| *r == c.row).unwrap();
        let j = columns.iter().position(|k| *k == c.column).unwrap();
        values[i][j] = Some(metric.pick(family.row(&c.report)));
    }
    CrossbarMatrix {
        family,
        metric,
        rows,
        columns,
        values,
    }
}

impl CrossbarMatrix {
    /// Missing cells are written as empty fields.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec![String::from("model")];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (name, vals) in self.rows.iter().zip(&self.values) {
            let mut rec = vec![name.clone()];
            rec.extend(vals.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}
