//! Plain-text model files.
//!
//! ```text
//! knn,<dimension>,<classes>,<k>
//! <label>,<v1>,...,<vd>          one line per stored vector
//!
//! svm,<dimension>,<classes>,<lambda>
//! <bias>,<w1>,...,<wd>           one line per class, in label order
//! ```
//!
//! Reals are written with 17 significant digits and read back bit-exactly.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::glcm::fmt17;

use super::knn::{knn_fit, KnnModel};
use super::svm::{BinarySvm, SvmModel};

#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Knn(KnnModel),
    Svm(SvmModel),
}

impl KnnModel {
    pub fn to_text(&self) -> String {
        let classes = self.labels.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
        let mut out = format!("knn,{},{classes},{}\n", self.dim, self.k);
        for (v, label) in self.vectors.iter().zip(&self.labels) {
            let _ = write!(out, "{label}");
            for x in v {
                let _ = write!(out, ",{}", fmt17(*x));
            }
            out.push('\n');
        }
        out
    }
}

impl SvmModel {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "svm,{},{},{}\n",
            self.dimension(),
            self.n_classes(),
            fmt17(self.lambda)
        );
        for plane in &self.planes {
            out.push_str(&fmt17(plane.bias));
            for w in &plane.weights {
                let _ = write!(out, ",{}", fmt17(*w));
            }
            out.push('\n');
        }
        out
    }
}

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Validation(format!("model line {line}: {msg}"))
}

fn parse_field<T: std::str::FromStr>(field: &str, line: usize, what: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| bad(line, format!("invalid {what} {field:?}")))
}

fn parse_row(line: &str, lineno: usize, expected: usize) -> Result<Vec<&str>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != expected {
        return Err(bad(
            lineno,
            format!("expected {expected} fields, found {}", fields.len()),
        ));
    }
    Ok(fields)
}

pub fn load_model(text: &str) -> Result<Model> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty model file"))?;
    let head = parse_row(header, 1, 4)?;
    let dim: usize = parse_field(head[1], 1, "dimension")?;
    let classes: usize = parse_field(head[2], 1, "class count")?;
    let body: Vec<(usize, &str)> = lines.filter(|(_, l)| !l.trim().is_empty()).collect();

    match head[0] {
        "knn" => {
            let k: usize = parse_field(head[3], 1, "k")?;
            let mut vectors = Vec::with_capacity(body.len());
            let mut labels = Vec::with_capacity(body.len());
            for (n, line) in body {
                let fields = parse_row(line, n, dim + 1)?;
                let label: u8 = parse_field(fields[0], n, "label")?;
                if label as usize >= classes {
                    return Err(bad(n, format!("label {label} outside {classes} classes")));
                }
                labels.push(label);
                vectors.push(
                    fields[1..]
                        .iter()
                        .map(|f| parse_field(f, n, "value"))
                        .collect::<Result<Vec<f64>>>()?,
                );
            }
            if vectors.is_empty() {
                return Err(bad(2, "no stored vectors"));
            }
            Ok(Model::Knn(knn_fit(vectors, labels, k)?))
        }
        "svm" => {
            let lambda: f64 = parse_field(head[3], 1, "lambda")?;
            if body.len() != classes {
                return Err(bad(1, format!("{classes} classes but {} rows", body.len())));
            }
            let planes = body
                .into_iter()
                .map(|(n, line)| {
                    let fields = parse_row(line, n, dim + 1)?;
                    let values = fields
                        .iter()
                        .map(|f| parse_field(f, n, "value"))
                        .collect::<Result<Vec<f64>>>()?;
                    Ok(BinarySvm {
                        bias: values[0],
                        weights: values[1..].to_vec(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Model::Svm(SvmModel::from_planes(planes, lambda)?))
        }
        other => Err(bad(1, format!("unknown model type {other:?}"))),
    }
}
