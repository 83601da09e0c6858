//! Outputs are written to a hidden temporary file next to the target and
//! renamed into place, so a failed run never leaves a partial file.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

fn temp_path(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.partial"))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))
}

fn commit(tmp: &Path, path: &Path) -> Result<(), CliError> {
    std::fs::rename(tmp, path).map_err(io_err(path))
}

/// Writes `header` and the rows produced by `fill`.
pub fn write_csv<F>(path: &Path, header: &[&str], fill: F) -> Result<(), CliError>
where
    F: FnOnce(&mut csv::Writer<File>) -> Result<(), CliError>,
{
    let tmp = temp_path(path);
    let file = File::create(&tmp).map_err(io_err(&tmp))?;
    let mut w = csv::Writer::from_writer(file);
    let res = w.write_record(header).map_err(CliError::from).and_then(|_| fill(&mut w)).and_then(|_| w.flush().map_err(io_err(&tmp)));
    if let Err(e) = res {
        let _ = std::fs::remove_file(&tmp);
        return Err(e);
    }
    drop(w);
    commit(&tmp, path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let tmp = temp_path(path);
    let mut file = File::create(&tmp).map_err(io_err(&tmp))?;
    let text = serde_json::to_string_pretty(value)?;
    file.write_all(text.as_bytes()).and_then(|_| file.write_all(b"\n")).map_err(io_err(&tmp))?;
    drop(file);
    commit(&tmp, path)
}

/// Shortest representation that round-trips; exponent form outside
/// `[1e-4, 1e6)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e6).contains(&a) || !a.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}
