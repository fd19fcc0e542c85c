use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::{LabeledDataset, Role};
use crate::nn::Matrix;
use crate::{Error, Result};

/// Writes `f0..f{D-1},y,b0..b{K-1}` with 17 significant digits per real.
pub fn save_csv(dataset: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_csv(dataset, &mut out)?;
    out.flush()?;
    Ok(())
}

fn write_csv(ds: &LabeledDataset, out: &mut impl Write) -> Result<()> {
    let mut header: Vec<String> = (0..ds.n_features()).map(|j| format!("f{j}")).collect();
    header.push("y".into());
    header.extend((0..ds.n_biases()).map(|k| format!("b{k}")));
    writeln!(out, "{}", header.join(","))?;
    for i in 0..ds.len() {
        let mut line = String::new();
        for v in ds.features().row(i) {
            line.push_str(&format!("{v:.16e},"));
        }
        line.push_str(&ds.targets()[i].to_string());
        for b in ds.bias_labels(i) {
            line.push(',');
            line.push_str(&b.to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Loads a dataset, inferring the class count from the largest label (at least 2).
pub fn load_csv(path: impl AsRef<Path>, role: Role) -> Result<LabeledDataset> {
    load_csv_with_classes(path, role, None)
}

pub fn load_csv_with_classes(
    path: impl AsRef<Path>,
    role: Role,
    n_classes: Option<usize>,
) -> Result<LabeledDataset> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_csv(&text, role, n_classes)
}

fn parse_csv(text: &str, role: Role, n_classes: Option<usize>) -> Result<LabeledDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let names: Vec<&str> = header.iter().collect();
    let y_col = names
        .iter()
        .position(|&h| h == "y")
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: "header lacks a `y` column".into(),
        })?;
    for (j, name) in names[..y_col].iter().enumerate() {
        if *name != format!("f{j}") {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected column f{j}, found `{name}`"),
            });
        }
    }
    for (k, name) in names[y_col + 1..].iter().enumerate() {
        if *name != format!("b{k}") {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected column b{k}, found `{name}`"),
            });
        }
    }
    let n_features = y_col;
    let n_biases = names.len() - y_col - 1;
    if n_features == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "no feature columns".into(),
        });
    }

    let mut feats = Vec::new();
    let mut targets = Vec::new();
    let mut bias = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != names.len() {
            return Err(Error::Parse {
                line,
                message: format!("{} fields, header has {}", record.len(), names.len()),
            });
        }
        for field in record.iter().take(n_features) {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("`{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite feature `{field}`"),
                });
            }
            feats.push(v);
        }
        for (j, field) in record.iter().enumerate().skip(n_features) {
            let v: usize = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("`{field}` is not a class id"),
            })?;
            if j == n_features {
                targets.push(v);
            } else {
                bias.push(v);
            }
        }
    }
    let inferred = targets.iter().chain(&bias).copied().max().map_or(2, |m| (m + 1).max(2));
    let n_classes = n_classes.unwrap_or(inferred);
    let rows = targets.len();
    LabeledDataset::new(
        Matrix::from_vec(rows, n_features, feats)?,
        targets,
        bias,
        n_classes,
        n_biases,
        role,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_authored_fixture() {
        let text = "f0,f1,y,b0,b1\n\
                    0.5,-1,0,0,1\n\
                    1e-3,2.25,1,1,1\n\
                    -3,0,1,0,0\n\
                    7,8,0,1,0\n";
        let ds = parse_csv(text, Role::Train, None).unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.n_biases(), 2);
        assert_eq!(ds.features().row(1), &[1e-3, 2.25]);
        assert_eq!(ds.targets(), &[0, 1, 1, 0]);
        assert_eq!(ds.alignment_of(0).to_string(), "AC");
        assert_eq!(ds.alignment_of(2).to_string(), "CC");
    }

    #[test]
    fn wrong_column_count_reports_line() {
        let text = "f0,y,b0\n0.1,0,0\n0.2,1\n";
        match parse_csv(text, Role::Train, None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_values_rejected() {
        assert!(parse_csv("f0,y\nabc,0\n", Role::Train, None).is_err());
        assert!(parse_csv("f0,y\n1.0,-1\n", Role::Train, None).is_err());
        assert!(parse_csv("g0,y\n1.0,0\n", Role::Train, None).is_err());
        assert!(parse_csv("f0,y\nNaN,0\n", Role::Train, None).is_err());
    }
}
