//! Batch scoring of a CSV file with a saved model.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::learners::ModelDocument;
use crate::tabular::Dataset;

pub const PREDICTION_COLUMN: &str = "prediction";
pub const PROBABILITY_COLUMN: &str = "probability";

/// Scores every row of `input` and returns the input CSV with prediction
/// columns appended, plus the number of rows scored. Input fields are
/// copied through unchanged.
pub fn predict_csv(doc: &ModelDocument, input: &[u8]) -> Result<(Vec<u8>, usize)> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    for name in [PREDICTION_COLUMN, PROBABILITY_COLUMN] {
        if headers.iter().any(|h| h.trim() == name) {
            return Err(Error::InvalidArgument(format!("input already has a `{name}` column")));
        }
    }
    let records = reader.records().collect::<std::result::Result<Vec<_>, _>>()?;
    let data = Dataset::read_csv(input, &BTreeMap::new())?;
    let preds = doc.predict_dataset(&data)?;

    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut out_headers = headers.clone();
    out_headers.push_field(PREDICTION_COLUMN);
    if preds.probability.is_some() {
        out_headers.push_field(PROBABILITY_COLUMN);
    }
    writer.write_record(&out_headers)?;
    for (i, record) in records.iter().enumerate() {
        let mut row = record.clone();
        row.push_field(&preds.prediction[i].to_string());
        if let Some(p) = &preds.probability {
            row.push_field(&p[i].to_string());
        }
        writer.write_record(&row)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok((bytes, records.len()))
}

/// Reads the model and input files, writes predictions and returns the row count.
pub fn predict_file(model: &Path, input: &Path, output: &Path) -> Result<usize> {
    let doc = ModelDocument::load(model)?;
    let bytes = std::fs::read(input).map_err(|e| Error::io(input, e))?;
    let (out, rows) = predict_csv(&doc, &bytes)?;
    std::fs::write(output, out).map_err(|e| Error::io(output, e))?;
    Ok(rows)
}
