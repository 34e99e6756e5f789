//! File formats: PLY clouds, PGM images, and JSON sessions and artifacts.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub mod json;
mod pgm;
mod ply;
mod session;

pub use pgm::{read_pgm, write_pgm};
pub use ply::{read_ply, write_ply, write_ply_to, PlyFormat};
pub use session::{load_session, ScanSession, SessionFrame};

pub fn read_file(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    let path = path.as_ref();
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Writes `bytes` to a temporary sibling of `path` and renames it into place,
/// so readers never observe a partial file.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidParameter(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn read_json(path: impl AsRef<Path>) -> Result<serde_json::Value> {
    let path = path.as_ref();
    let text = String::from_utf8(read_file(path)?)
        .map_err(|_| Error::Parse(format!("{} is not UTF-8", path.display())))?;
    json::parse_json(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_json(path: impl AsRef<Path>, value: &serde_json::Value) -> Result<()> {
    write_atomic(path, json::to_json_string(value).as_bytes())
}
