//! CSV readers and writers for poses, labelled readings and dense matrices.
//!
//! All files are UTF-8, comma-separated, with `.` as decimal separator.
//! Numbers are written with the shortest representation that parses back to
//! the same `f64`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hand_model::HandModel;
use crate::prior::PoseSet;

fn parse_err(path: &str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_string(), line, msg: msg.into() }
}

fn reader<R: Read>(rdr: R, has_headers: bool) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(has_headers)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(rdr)
}

fn csv_line(err: &csv::Error) -> usize {
    err.position().map(|p| p.line() as usize).unwrap_or(0)
}

fn parse_number(path: &str, line: usize, field: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| parse_err(path, line, format!("`{field}` is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite value `{field}`")));
    }
    Ok(v)
}

/// Header labels and numeric rows of a CSV with one header line.
pub fn read_labeled<R: Read>(rdr: R, label: &str) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut rdr = reader(rdr, true);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(label, csv_line(&e), e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(parse_err(label, 1, "missing header row"));
    }
    let mut data = Vec::new();
    let mut rows = 0;
    for record in rdr.records() {
        let record = record.map_err(|e| parse_err(label, csv_line(&e), e.to_string()))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != header.len() {
            return Err(parse_err(
                label,
                line,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        for field in record.iter() {
            data.push(parse_number(label, line, field)?);
        }
        rows += 1;
    }
    let cols = header.len();
    Ok((header, DMatrix::from_row_slice(rows, cols, &data)))
}

pub fn read_labeled_file(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    read_labeled(File::open(path)?, &path.display().to_string())
}

/// Reads a pose CSV, binding columns to the model by header name.
pub fn read_poses<R: Read>(rdr: R, model: &HandModel, label: &str) -> Result<PoseSet> {
    let (header, raw) = read_labeled(rdr, label)?;
    if header.len() != model.n() {
        return Err(parse_err(
            label,
            1,
            format!("header has {} columns, hand model has {} DoFs", header.len(), model.n()),
        ));
    }
    let cols = model.indices_of(&header).map_err(|e| parse_err(label, 1, e.to_string()))?;
    let mut poses = DMatrix::zeros(raw.nrows(), model.n());
    for (src, &dst) in cols.iter().enumerate() {
        poses.set_column(dst, &raw.column(src));
    }
    PoseSet::new(model.clone(), poses, label)
}

pub fn read_poses_file(path: &Path, model: &HandModel) -> Result<PoseSet> {
    read_poses(File::open(path)?, model, &path.display().to_string())
}

/// Writes a labelled matrix: one header line then one row per matrix row.
pub fn write_labeled<W: Write, S: AsRef<str>>(w: W, header: &[S], m: &DMatrix<f64>) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(header.iter().map(|s| s.as_ref())).map_err(csv_io)?;
    for row in m.row_iter() {
        wtr.write_record(row.iter().map(|v| format!("{v}"))).map_err(csv_io)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_poses<W: Write>(w: W, poses: &PoseSet) -> Result<()> {
    let names: Vec<&str> = poses.model().names().collect();
    write_labeled(w, &names, poses.poses())
}

pub fn write_poses_file(path: &Path, poses: &PoseSet) -> Result<()> {
    write_poses(File::create(path)?, poses)
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Reads a headerless CSV of numeric rows.
pub fn read_matrix<R: Read>(rdr: R, label: &str) -> Result<DMatrix<f64>> {
    let mut rdr = reader(rdr, false);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in rdr.records() {
        let record = record.map_err(|e| parse_err(label, csv_line(&e), e.to_string()))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(parse_err(label, line, format!("expected {c} fields, found {}", record.len())))
            }
            _ => {}
        }
        for field in record.iter() {
            data.push(parse_number(label, line, field)?);
        }
        rows += 1;
    }
    Ok(DMatrix::from_row_slice(rows, cols.unwrap_or(0), &data))
}

pub fn read_matrix_file(path: &Path) -> Result<DMatrix<f64>> {
    read_matrix(File::open(path)?, &path.display().to_string())
}

pub fn write_matrix<W: Write>(w: W, m: &DMatrix<f64>) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for row in m.row_iter() {
        wtr.write_record(row.iter().map(|v| format!("{v}"))).map_err(csv_io)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_matrix_file(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    write_matrix(File::create(path)?, m)
}

/// Reads long-format raw windows (`window_id,channel,value`).
///
/// Returns one `W × m` matrix per window, ordered by window id, with columns
/// in `channels` order. Within a window, the k-th value seen for each channel
/// forms sample k; every channel must contribute the same number of samples.
pub fn read_raw_windows<R: Read, S: AsRef<str>>(
    rdr: R,
    channels: &[S],
    label: &str,
) -> Result<Vec<DMatrix<f64>>> {
    let mut rdr = reader(rdr, true);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| parse_err(label, csv_line(&e), e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != ["window_id", "channel", "value"] {
        return Err(parse_err(label, 1, "header must be `window_id,channel,value`"));
    }
    let m = channels.len();
    let mut windows: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| parse_err(label, csv_line(&e), e.to_string()))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != 3 {
            return Err(parse_err(label, line, format!("expected 3 fields, found {}", record.len())));
        }
        let ch = channels
            .iter()
            .position(|c| c.as_ref() == &record[1])
            .ok_or_else(|| parse_err(label, line, format!("unknown channel `{}`", &record[1])))?;
        let value = parse_number(label, line, &record[2])?;
        windows
            .entry(record[0].to_string())
            .or_insert_with(|| vec![Vec::new(); m])[ch]
            .push(value);
    }
    let mut ids: Vec<String> = windows.keys().cloned().collect();
    ids.sort_by(|a, b| match (a.parse::<i64>(), b.parse::<i64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        _ => a.cmp(b),
    });
    ids.into_iter()
        .map(|id| {
            let per_channel = &windows[&id];
            let w = per_channel[0].len();
            if per_channel.iter().any(|c| c.len() != w) {
                return Err(parse_err(label, 0, format!("window `{id}` has unequal sample counts per channel")));
            }
            Ok(DMatrix::from_fn(w, m, |k, c| per_channel[c][k]))
        })
        .collect()
}

pub fn read_raw_windows_file<S: AsRef<str>>(path: &Path, channels: &[S]) -> Result<Vec<DMatrix<f64>>> {
    read_raw_windows(File::open(path)?, channels, &path.display().to_string())
}
