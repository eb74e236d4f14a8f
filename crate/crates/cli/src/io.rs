use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use msv_core::covseq::CovSequence;
use msv_core::panel::ReturnPanel;
use ndarray::Array2;

use crate::CliError;

/// Writes through a temporary file in the target directory, then renames it
/// into place so readers never see a partial file.
pub fn write_atomic<F>(path: &Path, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<&mut tempfile::NamedTempFile>) -> Result<(), CliError>,
{
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    {
        let mut w = BufWriter::new(&mut tmp);
        body(&mut w)?;
        w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    }
    tmp.persist(path).map_err(|e| CliError::Io(format!("cannot write {}: {}", path.display(), e.error)))?;
    Ok(())
}

pub fn read_panel(path: &Path) -> Result<ReturnPanel<f64>, CliError> {
    ReturnPanel::read_csv_path(path).map_err(|e| CliError::in_file(path, e))
}

pub fn write_panel(path: &Path, panel: &ReturnPanel<f64>) -> Result<(), CliError> {
    write_atomic(path, |w| Ok(panel.write_csv(w)?))
}

pub fn write_covs_csv(path: &Path, covs: &CovSequence<f64>) -> Result<(), CliError> {
    write_atomic(path, |w| Ok(covs.write_csv(w)?))
}

pub fn write_covs_binary(path: &Path, covs: &CovSequence<f64>) -> Result<(), CliError> {
    write_atomic(path, |w| Ok(covs.write_binary(w)?))
}

pub fn read_covs_binary(path: &Path, kind: msv_core::covseq::CovKind) -> Result<CovSequence<f64>, CliError> {
    let f = File::open(path).map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
    CovSequence::read_binary(BufReader::new(f), kind).map_err(|e| CliError::in_file(path, e))
}

pub fn write_json<V: serde::Serialize>(path: &Path, value: &V) -> Result<(), CliError> {
    write_atomic(path, |w| serde_json::to_writer_pretty(w, value).map_err(|e| CliError::Io(e.to_string())))
}

/// CSV with a header row of names and one numeric row per observation.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Array2<f64>), CliError> {
    let bad = |msg: String| CliError::Data(format!("{}: {msg}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let names: Vec<String> = rdr.headers().map_err(|e| bad(e.to_string()))?.iter().map(|s| s.trim().to_string()).collect();
    let mut values = Vec::new();
    let mut rows = 0;
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != names.len() {
            return Err(bad(format!("row {} has {} fields, expected {}", r + 1, rec.len(), names.len())));
        }
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| bad(format!("row {}, column {}: not a number", r + 1, c + 1)))?;
            if !v.is_finite() {
                return Err(bad(format!("row {}, column {}: non-finite value", r + 1, c + 1)));
            }
            values.push(v);
        }
        rows += 1;
    }
    let table = Array2::from_shape_vec((rows, names.len()), values).map_err(|e| bad(e.to_string()))?;
    Ok((names, table))
}

/// Header plus rows of optional numbers; `None` becomes an empty cell.
pub fn write_table(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    write_atomic(path, |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
        for r in rows {
            out.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
        }
        out.flush().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(())
    })
}
