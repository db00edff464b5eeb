use std::io::{Read, Write};

use thiserror::Error;

use super::catalog::fingerprint;
use crate::corpus::DatasetKey;
use crate::labels::{Label, LabelSet};

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("feature columns differ: expected fingerprint {expected}, got {found}")]
    ColumnMismatch { expected: String, found: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Dense domain-by-feature grid for one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub key: DatasetKey,
    pub feature_ids: Vec<String>,
    pub domains: Vec<String>,
    /// Row-major, `domains.len() * feature_ids.len()` cells.
    pub values: Vec<f64>,
    pub labels: Vec<Option<Label>>,
}

impl FeatureMatrix {
    pub fn new(key: DatasetKey, feature_ids: Vec<String>) -> Self {
        FeatureMatrix { key, feature_ids, domains: Vec::new(), values: Vec::new(), labels: Vec::new() }
    }

    /// Builds a matrix from explicit rows; every row must match the column count.
    pub fn from_rows(
        key: DatasetKey,
        feature_ids: Vec<String>,
        rows: Vec<(String, Vec<f64>, Option<Label>)>,
    ) -> Self {
        let mut m = FeatureMatrix::new(key, feature_ids);
        for (domain, row, label) in rows {
            m.push_row(domain, &row, label);
        }
        m
    }

    pub fn push_row(&mut self, domain: String, row: &[f64], label: Option<Label>) {
        assert_eq!(row.len(), self.n_cols(), "row width");
        self.domains.push(domain);
        self.values.extend_from_slice(row);
        self.labels.push(label);
    }

    pub fn n_rows(&self) -> usize {
        self.domains.len()
    }

    pub fn n_cols(&self) -> usize {
        self.feature_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.n_cols();
        &self.values[i * c..(i + 1) * c]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let c = self.n_cols();
        &mut self.values[i * c..(i + 1) * c]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows()).map(move |i| self.row(i))
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols() + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|r| self.get(r, col)).collect()
    }

    pub fn set_column(&mut self, col: usize, values: &[f64]) {
        let c = self.n_cols();
        for (r, v) in values.iter().enumerate() {
            self.values[r * c + col] = *v;
        }
    }

    pub fn fingerprint(&self) -> String {
        fingerprint(&self.feature_ids)
    }

    pub fn labeled_rows(&self) -> Vec<usize> {
        (0..self.n_rows()).filter(|&i| self.labels[i].is_some()).collect()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let rel = self.labels.iter().filter(|l| **l == Some(Label::Reliable)).count();
        let unr = self.labels.iter().filter(|l| **l == Some(Label::Unreliable)).count();
        (rel, unr)
    }

    pub fn row_index(&self, domain: &str) -> Option<usize> {
        self.domains.iter().position(|d| d == domain)
    }

    /// Sets each row's label from `labels`; unknown and excluded domains
    /// become unlabeled.
    pub fn attach_labels(&mut self, labels: &LabelSet) {
        self.labels = self.domains.iter().map(|d| labels.get(d)).collect();
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let mut m = FeatureMatrix::new(self.key.clone(), self.feature_ids.clone());
        for &r in rows {
            m.push_row(self.domains[r].clone(), self.row(r), self.labels[r]);
        }
        m
    }

    /// Stacks matrices with identical columns. The key of the first one is kept.
    pub fn concat(parts: &[&FeatureMatrix]) -> Result<FeatureMatrix, MatrixError> {
        let first = parts.first().expect("at least one matrix");
        let mut m = FeatureMatrix::new(first.key.clone(), first.feature_ids.clone());
        for p in parts {
            if p.feature_ids != first.feature_ids {
                return Err(MatrixError::ColumnMismatch {
                    expected: first.fingerprint(),
                    found: p.fingerprint(),
                });
            }
            m.domains.extend(p.domains.iter().cloned());
            m.values.extend_from_slice(&p.values);
            m.labels.extend_from_slice(&p.labels);
        }
        Ok(m)
    }

    /// CSV form: `domain`, the feature columns, then `label` (`1`, `0` or
    /// empty). Floats use 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = vec!["domain".to_string()];
        header.extend(self.feature_ids.iter().cloned());
        header.push("label".to_string());
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.n_rows() {
            let mut line = csv_field(&self.domains[i]);
            for v in self.row(i) {
                line.push(',');
                line.push_str(&format_g17(*v));
            }
            line.push(',');
            line.push_str(match self.labels[i] {
                Some(Label::Reliable) => "1",
                Some(Label::Unreliable) => "0",
                None => "",
            });
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("utf-8")
    }

    pub fn read_csv<R: Read>(key: DatasetKey, r: R) -> Result<FeatureMatrix, MatrixError> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let headers = reader
            .headers()
            .map_err(|e| MatrixError::Malformed { line: 1, message: e.to_string() })?
            .clone();
        let n = headers.len();
        if n < 2 || &headers[0] != "domain" || &headers[n - 1] != "label" {
            return Err(MatrixError::Malformed {
                line: 1,
                message: "header must start with `domain` and end with `label`".into(),
            });
        }
        let ids: Vec<String> = headers.iter().skip(1).take(n - 2).map(str::to_string).collect();
        let mut m = FeatureMatrix::new(key, ids);
        let mut row = Vec::with_capacity(n - 2);
        for rec in reader.records() {
            let rec = rec.map_err(|e| MatrixError::Malformed {
                line: e.position().map(|p| p.line() as usize).unwrap_or(0),
                message: e.to_string(),
            })?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            row.clear();
            for cell in rec.iter().skip(1).take(n - 2) {
                let v: f64 = cell.parse().map_err(|_| MatrixError::Malformed {
                    line,
                    message: format!("not a number: {cell:?}"),
                })?;
                if !v.is_finite() {
                    return Err(MatrixError::Malformed { line, message: "non-finite value".into() });
                }
                row.push(v);
            }
            let label = match &rec[n - 1] {
                "1" => Some(Label::Reliable),
                "0" => Some(Label::Unreliable),
                "" => None,
                other => {
                    return Err(MatrixError::Malformed { line, message: format!("bad label {other:?}") })
                }
            };
            m.push_row(rec[0].to_string(), &row, label);
        }
        Ok(m)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `printf("%.17g")`: shortest of fixed or exponent notation with 17
/// significant digits and trailing zeros removed.
pub fn format_g17(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.16e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn g17_matches_printf() {
        // reference strings from C printf("%.17g")
        let cases = [
            (2.0, "2"),
            (0.1, "0.10000000000000001"),
            (1.0 / 3.0, "0.33333333333333331"),
            (123456.789, "123456.789"),
            (1e-5, "1.0000000000000001e-05"),
            (0.0001, "0.0001"),
            (1e17, "1e+17"),
            (12345678901234567.0, "12345678901234568"),
            (-2.5, "-2.5"),
            (0.625, "0.625"),
        ];
        for (v, s) in cases {
            assert_eq!(format_g17(v), s, "{v}");
        }
    }

    proptest! {
        #[test]
        fn g17_round_trips(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            prop_assert_eq!(format_g17(v).parse::<f64>().unwrap(), v);
        }

        #[test]
        fn csv_round_trips(rows in proptest::collection::vec(
            (proptest::collection::vec(-1e9f64..1e9, 3), proptest::option::of(any::<bool>())), 0..20)) {
            let m = FeatureMatrix::from_rows(
                DatasetKey::new("t", "en"),
                vec!["a".into(), "b".into(), "c".into()],
                rows.into_iter().enumerate()
                    .map(|(i, (r, l))| (format!("d{i}.com"), r, l.map(Label::from_bool)))
                    .collect(),
            );
            let back = FeatureMatrix::read_csv(m.key.clone(), m.to_csv_string().as_bytes()).unwrap();
            prop_assert_eq!(back, m);
        }
    }

    #[test]
    fn bad_label_rejected() {
        let text = "domain,a,label\nx.com,1,2\n";
        assert!(matches!(
            FeatureMatrix::read_csv(DatasetKey::new("t", "en"), text.as_bytes()),
            Err(MatrixError::Malformed { line: 2, .. })
        ));
    }
}
