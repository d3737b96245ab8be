//! Artifact writing: every file goes to a temporary sibling first and is
//! renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::RunError;

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self, RunError> {
        std::fs::create_dir_all(dir).map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Output { dir: dir.to_path_buf() })
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| RunError::Io(e.to_string()))?;
        text.push('\n');
        self.bytes(name, text.as_bytes())
    }

    pub fn text(&self, name: &str, text: &str) -> Result<(), RunError> {
        self.bytes(name, text.as_bytes())
    }

    pub fn bytes(&self, name: &str, data: &[u8]) -> Result<(), RunError> {
        write_atomic(&self.dir.join(name), data)
    }
}

pub fn write_atomic(path: &Path, data: &[u8]) -> Result<(), RunError> {
    let err = |e: std::io::Error| RunError::Io(format!("{}: {e}", path.display()));
    let name = path.file_name().ok_or_else(|| RunError::Io(format!("{} has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut f = std::fs::File::create(&tmp).map_err(err)?;
        f.write_all(data).map_err(err)?;
        f.sync_all().map_err(err)?;
    }
    std::fs::rename(&tmp, path).map_err(err)
}
