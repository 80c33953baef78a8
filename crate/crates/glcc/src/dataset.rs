//! Perceptron training data: CSV ingestion and a synthetic generator.
//!
//! A CSV file has a header row, one column named `label` with values 0 or
//! 1, an optional integer `model` column, and every other column is a
//! feature. Without a `model` column the rows are cut into `M` equal
//! contiguous blocks.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error("no `label` column in the header")]
    MissingLabel,
    #[error("no feature columns")]
    NoFeatures,
    #[error("line {line}: column {column}: {message}")]
    Value { line: u64, column: String, message: String },
    #[error("{0}")]
    Shape(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelData {
    /// `s x d`
    pub x: Vec<Vec<f64>>,
    /// Labels in `{0, 1}`.
    pub y: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingDataset {
    pub feature_names: Vec<String>,
    pub models: Vec<ModelData>,
}

impl TrainingDataset {
    pub fn features(&self) -> usize {
        self.feature_names.len()
    }

    /// Rows per model.
    pub fn rows(&self) -> usize {
        self.models.first().map_or(0, |m| m.y.len())
    }

    pub fn max_abs_feature(&self) -> f64 {
        self.models.iter().flat_map(|m| m.x.iter().flatten()).fold(0.0, |a, &v| a.max(v.abs()))
    }

    pub fn from_path(path: &Path, models: usize) -> Result<Self, DatasetError> {
        let f = std::fs::File::open(path).map_err(|e| DatasetError::Io(path.display().to_string(), e))?;
        Self::from_reader(f, models)
    }

    pub fn from_reader<R: Read>(reader: R, models: usize) -> Result<Self, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = rdr.headers()?.clone();
        let label_col = header.iter().position(|h| h == "label").ok_or(DatasetError::MissingLabel)?;
        let model_col = header.iter().position(|h| h == "model");
        let feature_cols: Vec<usize> = (0..header.len()).filter(|&i| i != label_col && Some(i) != model_col).collect();
        if feature_cols.is_empty() {
            return Err(DatasetError::NoFeatures);
        }
        let mut rows: Vec<(Option<usize>, Vec<f64>, u8)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            let bad = |col: usize, message: &str| DatasetError::Value {
                line,
                column: header.get(col).unwrap_or("?").to_owned(),
                message: message.to_owned(),
            };
            let label = match &rec[label_col] {
                "0" => 0,
                "1" => 1,
                other => return Err(bad(label_col, &format!("label must be 0 or 1, got {other:?}"))),
            };
            let model = model_col
                .map(|c| rec[c].parse::<usize>().map_err(|_| bad(c, "model must be a nonnegative integer")))
                .transpose()?;
            let x = feature_cols
                .iter()
                .map(|&c| match rec[c].parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(bad(c, &format!("not a finite number: {:?}", &rec[c]))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push((model, x, label));
        }
        let feature_names = feature_cols.iter().map(|&c| header[c].to_owned()).collect();
        let mut out: Vec<ModelData> = (0..models).map(|_| ModelData { x: Vec::new(), y: Vec::new() }).collect();
        if model_col.is_some() {
            for (m, x, y) in rows {
                let m = m.expect("model column present");
                let slot = out
                    .get_mut(m)
                    .ok_or_else(|| DatasetError::Shape(format!("model id {m} but the run trains {models} models")))?;
                slot.x.push(x);
                slot.y.push(y);
            }
        } else {
            if models == 0 || !rows.len().is_multiple_of(models) {
                return Err(DatasetError::Shape(format!(
                    "{} rows do not split into {models} equal blocks",
                    rows.len()
                )));
            }
            let per = rows.len() / models;
            for (i, (_, x, y)) in rows.into_iter().enumerate() {
                out[i / per].x.push(x);
                out[i / per].y.push(y);
            }
        }
        let s = out.first().map_or(0, |m| m.y.len());
        if s == 0 || out.iter().any(|m| m.y.len() != s) {
            let counts: Vec<usize> = out.iter().map(|m| m.y.len()).collect();
            return Err(DatasetError::Shape(format!("every model needs the same nonzero row count, got {counts:?}")));
        }
        Ok(TrainingDataset { feature_names, models: out })
    }

    pub fn write<W: Write>(&self, writer: W) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["model".to_owned()];
        header.extend(self.feature_names.iter().cloned());
        header.push("label".into());
        w.write_record(&header)?;
        for (m, data) in self.models.iter().enumerate() {
            for (x, y) in data.x.iter().zip(&data.y) {
                let mut rec = vec![m.to_string()];
                rec.extend(x.iter().map(|v| v.to_string()));
                rec.push(y.to_string());
                w.write_record(&rec)?;
            }
        }
        w.flush().map_err(|e| DatasetError::Io("csv".into(), e))?;
        Ok(())
    }
}

/// `(x.w)^2 > 1/2`
pub fn predict(w: &[f64], x: &[f64]) -> u8 {
    let z: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum();
    u8::from(z * z > 0.5)
}

pub fn predict_accuracy(w: &[f64], data: &ModelData) -> f64 {
    if data.y.is_empty() {
        return 0.0;
    }
    let hits = data.x.iter().zip(&data.y).filter(|(x, &y)| predict(w, x) == y).count();
    hits as f64 / data.y.len() as f64
}

/// Mean of `((x.w)^2 - y)^2`.
pub fn mse_loss(w: &[f64], data: &ModelData) -> f64 {
    let total: f64 = data
        .x
        .iter()
        .zip(&data.y)
        .map(|(x, &y)| {
            let z: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum();
            (z * z - y as f64).powi(2)
        })
        .sum();
    total / data.y.len().max(1) as f64
}

/// Features uniform in `[-1, 1]`, one planted weight vector per model of
/// norm 1.8, labels from the prediction rule. Points with
/// `0.1 < (x.w*)^2 < 0.9` or `(x.w*)^2 > 1.5` are redrawn, which leaves a
/// margin around the decision threshold. Returns the planted weights too.
pub fn synthetic(models: usize, rows: usize, features: usize, seed: u64) -> (TrainingDataset, Vec<Vec<f64>>) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut planted = Vec::with_capacity(models);
    let mut out = Vec::with_capacity(models);
    for _ in 0..models {
        let mut w: Vec<f64> = (0..features).map(|_| rng.sample(StandardNormal)).collect();
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        w.iter_mut().for_each(|v| *v *= 1.8 / norm);
        let mut data = ModelData { x: Vec::with_capacity(rows), y: Vec::with_capacity(rows) };
        while data.y.len() < rows {
            let x: Vec<f64> = (0..features).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let z: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>().powi(2);
            if (z > 0.1 && z < 0.9) || z > 1.5 {
                continue;
            }
            data.y.push(u8::from(z > 0.5));
            data.x.push(x);
        }
        planted.push(w);
        out.push(data);
    }
    let feature_names = (0..features).map(|i| format!("x{i}")).collect();
    (TrainingDataset { feature_names, models: out }, planted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let (ds, _) = synthetic(2, 10, 3, 1);
        let mut buf = Vec::new();
        ds.write(&mut buf).unwrap();
        assert_eq!(TrainingDataset::from_reader(&buf[..], 2).unwrap(), ds);
    }

    #[test]
    fn blocks_without_model_column() {
        let text = "a,b,label\n0.5,0.1,1\n0.2,0.3,0\n-1,1,0\n0,0,1\n";
        let ds = TrainingDataset::from_reader(text.as_bytes(), 2).unwrap();
        assert_eq!(ds.features(), 2);
        assert_eq!(ds.models[1].x, vec![vec![-1.0, 1.0], vec![0.0, 0.0]]);
        assert_eq!(ds.models[1].y, vec![0, 1]);
        assert!(TrainingDataset::from_reader(text.as_bytes(), 3).is_err());
    }

    #[test]
    fn errors_name_the_line() {
        let text = "a,label\n0.5,1\n0.2,2\n";
        match TrainingDataset::from_reader(text.as_bytes(), 1) {
            Err(DatasetError::Value { line, column, .. }) => assert_eq!((line, column.as_str()), (3, "label")),
            other => panic!("{other:?}"),
        }
        let text = "a,label\nfoo,1\n";
        assert!(matches!(TrainingDataset::from_reader(text.as_bytes(), 1), Err(DatasetError::Value { line: 2, .. })));
        assert!(matches!(TrainingDataset::from_reader("a,b\n1,2\n".as_bytes(), 1), Err(DatasetError::MissingLabel)));
        let uneven = "model,a,label\n0,0.1,1\n0,0.2,0\n1,0.3,1\n";
        assert!(matches!(TrainingDataset::from_reader(uneven.as_bytes(), 2), Err(DatasetError::Shape(_))));
    }

    #[test]
    fn accuracy_examples() {
        let data =
            ModelData { x: vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![0.1, 0.1]], y: vec![1, 1, 0, 0] };
        assert_eq!(predict_accuracy(&[0.0, 0.0], &data), 0.5);
        let (ds, planted) = synthetic(2, 200, 8, 3);
        for (m, w) in ds.models.iter().zip(&planted) {
            assert_eq!(predict_accuracy(w, m), 1.0);
            let acc = predict_accuracy(&[0.3; 8], m);
            assert!((0.0..=1.0).contains(&acc));
        }
        assert!(ds.max_abs_feature() <= 1.0);
        assert_eq!(mse_loss(&[0.0, 0.0], &data), 0.5);
    }
}
