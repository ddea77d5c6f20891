//! CSV dataset files with header `x1,...,xd,label,true_class`.

use std::io::{Read, Write};

use super::{LabeledDataset, Point};
use crate::error::{Error, Result};

fn csv_error(e: csv::Error) -> Error {
    Error::Format(format!("csv: {e}"))
}

/// Writes `ds` as CSV. Floats use Rust's shortest round-trip formatting, so
/// reading the file back reproduces every coordinate exactly.
pub fn write_dataset_csv<W: Write>(ds: &LabeledDataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=ds.dim()).map(|i| format!("x{i}")).collect();
    header.push("label".into());
    header.push("true_class".into());
    w.write_record(&header).map_err(csv_error)?;
    for ((p, y), c) in ds.points().iter().zip(ds.labels()).zip(ds.classes()) {
        let mut row: Vec<String> = p.coords().iter().map(|v| v.to_string()).collect();
        row.push(y.to_string());
        row.push(c.to_string());
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn dataset_to_csv_string(ds: &LabeledDataset) -> Result<String> {
    let mut buf = Vec::new();
    write_dataset_csv(ds, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is ASCII"))
}

/// Reads a dataset written by [`write_dataset_csv`].
pub fn read_dataset_csv<R: Read>(input: R) -> Result<LabeledDataset> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_error)?.clone();
    let cols = header.len();
    let dim = cols.saturating_sub(2);
    let expected: Vec<String> = (1..=dim)
        .map(|i| format!("x{i}"))
        .chain(["label".to_string(), "true_class".to_string()])
        .collect();
    if dim == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Format(format!(
            "expected header x1,...,xd,label,true_class, got {:?}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut classes = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let field = |j: usize| -> Result<f64> {
            rec[j].trim().parse::<f64>().map_err(|_| {
                Error::Format(format!(
                    "row {}: column {} is not a number: {:?}",
                    line + 1,
                    j + 1,
                    &rec[j]
                ))
            })
        };
        let coords = (0..dim).map(field).collect::<Result<Vec<_>>>()?;
        points.push(Point::new(coords));
        labels.push(field(dim)?);
        let class = rec[dim + 1].trim().parse::<usize>().map_err(|_| {
            Error::Format(format!(
                "row {}: true_class must be a nonnegative integer",
                line + 1
            ))
        })?;
        classes.push(class);
    }
    if points.is_empty() {
        return Err(Error::Format("dataset file has no rows".into()));
    }
    LabeledDataset::new(points, labels, classes)
}
