//! File formats. Every float is written with `Display`, the shortest decimal
//! that parses back to the same bits, so repeated runs and golden files
//! compare byte for byte.

use crate::error::{CliError, Result};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use tlreg::selection::CvResultTable;
use tlreg::synthdata::LandscapeRow;

fn csv_error(e: csv::Error, label: &str) -> CliError {
    CliError::Data(format!("{label}: {e}"))
}

/// Dataset CSV: header f1..fp, plus a trailing y column when targets ride
/// along. The same renderer (without y) feeds external source commands.
pub fn render_dataset_csv(
    features: ArrayView2<'_, f64>,
    targets: Option<ArrayView1<'_, f64>>,
) -> String {
    let (n, p) = (features.nrows(), features.ncols());
    let mut out = String::new();
    for j in 0..p {
        if j > 0 {
            out.push(',');
        }
        out.push_str(&format!("f{}", j + 1));
    }
    if targets.is_some() {
        out.push_str(",y");
    }
    out.push('\n');
    for i in 0..n {
        for j in 0..p {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}", features[[i, j]]));
        }
        if let Some(y) = targets {
            out.push(',');
            out.push_str(&format!("{}", y[i]));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug)]
pub struct ParsedDataset {
    pub features: Array2<f64>,
    pub targets: Option<Array1<f64>>,
}

/// Strict parse of the dataset CSV: the header must be exactly f1..fp with an
/// optional trailing y, every value a finite number.
pub fn parse_dataset_csv(content: &str, label: &str) -> Result<ParsedDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(content.as_bytes());
    let headers = rdr.headers().map_err(|e| csv_error(e, label))?.clone();
    let cols = headers.len();
    let has_y = headers.iter().next_back() == Some("y");
    let p = if has_y { cols - 1 } else { cols };
    if p == 0 {
        return Err(CliError::Data(format!("{label}: no feature columns")));
    }
    for (j, name) in headers.iter().take(p).enumerate() {
        let expected = format!("f{}", j + 1);
        if name != expected {
            return Err(CliError::Data(format!(
                "{label}: column {} is named {name:?}, expected {expected:?}",
                j + 1
            )));
        }
    }

    let mut flat = Vec::new();
    let mut targets = Vec::new();
    let mut n = 0usize;
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| csv_error(e, label))?;
        if record.len() != cols {
            return Err(CliError::Data(format!(
                "{label}: row {} has {} fields, expected {cols}",
                i + 1,
                record.len()
            )));
        }
        let parse = |field: &str, what: &str| -> Result<f64> {
            let v: f64 = field.parse().map_err(|_| {
                CliError::Data(format!("{label}: row {}: {what} {field:?} is not a number", i + 1))
            })?;
            if !v.is_finite() {
                return Err(CliError::Data(format!(
                    "{label}: row {}: {what} {field:?} is not finite",
                    i + 1
                )));
            }
            Ok(v)
        };
        for field in record.iter().take(p) {
            flat.push(parse(field, "feature")?);
        }
        if has_y {
            targets.push(parse(&record[p], "target")?);
        }
        n += 1;
    }
    if n == 0 {
        return Err(CliError::Data(format!("{label}: no data rows")));
    }
    let features = Array2::from_shape_vec((n, p), flat)
        .expect("row-major buffer matches the counted shape");
    Ok(ParsedDataset {
        features,
        targets: has_y.then(|| Array1::from_vec(targets)),
    })
}

pub fn render_cv_csv(table: &CvResultTable) -> String {
    let mut out = String::from("tau,rho,cv_mse");
    for f in 1..=table.k {
        out.push_str(&format!(",fold_{f}"));
    }
    out.push('\n');
    for cell in &table.entries {
        out.push_str(&format!("{},{},{}", cell.tau, cell.rho, cell.cv_mse));
        for m in &cell.fold_mses {
            out.push_str(&format!(",{m}"));
        }
        out.push('\n');
    }
    out
}

pub fn render_landscape_csv(rows: &[LandscapeRow]) -> String {
    let mut out = String::from("tau,rho,mse_raw,mse_rescaled\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.tau, r.rho, r.mse_raw, r.mse_rescaled));
    }
    out
}

pub fn render_predictions_csv(preds: &Array1<f64>) -> String {
    let mut out = String::from("prediction\n");
    for v in preds {
        out.push_str(&format!("{v}\n"));
    }
    out
}

pub fn render_json_pretty<T: serde::Serialize>(value: &T, label: &str) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Data(format!("{label}: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn render_report_csv(rows: &[tlreg::analysis::AsymptoticRow]) -> String {
    let mut out = String::from("scale,tau,rho_star,gap\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.scale, r.tau, r.rho_star, r.gap));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn dataset_csv_round_trips_bitwise() {
        let x = array![[0.1, -2.5e-17], [3.0, f64::MIN_POSITIVE]];
        let y = array![1.0 / 3.0, -0.0];
        let text = render_dataset_csv(x.view(), Some(y.view()));
        let parsed = parse_dataset_csv(&text, "test").unwrap();
        assert_eq!(parsed.features, x);
        let ty = parsed.targets.unwrap();
        for (a, b) in ty.iter().zip(y.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn dataset_csv_without_targets_has_no_y_column() {
        let x = array![[1.0, 2.0]];
        let text = render_dataset_csv(x.view(), None);
        assert_eq!(text, "f1,f2\n1,2\n");
        let parsed = parse_dataset_csv(&text, "test").unwrap();
        assert!(parsed.targets.is_none());
    }

    #[test]
    fn misnamed_feature_column_is_rejected() {
        let err = parse_dataset_csv("f1,g2,y\n1,2,3\n", "bad").unwrap_err();
        assert!(err.to_string().contains("g2"), "{err}");
    }

    #[test]
    fn non_numeric_and_non_finite_fields_are_rejected() {
        assert!(parse_dataset_csv("f1,y\nabc,1\n", "bad").is_err());
        assert!(parse_dataset_csv("f1,y\ninf,1\n", "bad").is_err());
        assert!(parse_dataset_csv("f1,y\n", "empty").is_err());
    }
}
