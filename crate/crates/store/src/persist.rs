//! On-disk layout.
//!
//! ```text
//! <data_dir>/
//!   catalog.json                      app records, read at startup
//!   profiles.json                     all preference profiles
//!   feed.json                         advisories, alerts, sequence counter
//!   policies/<party>/index.json       version list with hashes
//!   policies/<party>/<n>.mrpp.json    canonical bytes of version n
//! ```
//!
//! Every file is replaced by writing a sibling temp file and renaming it
//! over the target, so a crash leaves either the old or the new content.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use mrpp_core::canonical::to_canonical;
use serde::Serialize;

pub const CATALOG_FILE: &str = "catalog.json";
pub const PROFILES_FILE: &str = "profiles.json";
pub const FEED_FILE: &str = "feed.json";
pub const POLICIES_DIR: &str = "policies";
pub const INDEX_FILE: &str = "index.json";

pub fn party_dir(root: &Path, party: &str) -> PathBuf {
    root.join(POLICIES_DIR).join(party)
}

pub fn version_file(root: &Path, party: &str, version: i64) -> PathBuf {
    party_dir(root, party).join(format!("{version}{}", mrpp_core::codec::POLICY_EXTENSION))
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().ok_or_else(|| io::Error::other("path has no parent"))?;
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("file");
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    write_atomic(path, to_canonical(value).as_bytes())
}

/// File contents, or `None` when it does not exist.
pub fn read_optional(path: &Path) -> io::Result<Option<String>> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(Some(text)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e),
    }
}
