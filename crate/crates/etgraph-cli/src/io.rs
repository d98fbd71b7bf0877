//! File handling shared by the subcommands: validated JSON input,
//! atomic output, and the machine-readable error channel.

use std::io::Write;
use std::path::Path;

use etgraph::{Error, GraphTopology, Result};

/// Reads and validates a graph description.
pub fn read_graph(path: &Path) -> Result<GraphTopology> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidArgument(format!("malformed graph {}: {e}", path.display())))
}

/// Writes via a temporary file in the target directory followed by a
/// rename, so readers never observe a partial artifact.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| Error::Backend(format!("cannot create temp file in {}: {e}", dir.display())))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| Error::Backend(format!("write failed: {e}")))?;
    tmp.persist(path)
        .map_err(|e| Error::Backend(format!("cannot place {}: {e}", path.display())))?;
    Ok(())
}

/// Sends to `--out` when given, stdout otherwise.
pub fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        2
    } else {
        3
    }
}

/// Single-line error JSON for stderr.
pub fn error_json(e: &Error) -> String {
    let kind = if e.is_validation() {
        "validation"
    } else {
        "numerical"
    };
    serde_json::json!({
        "error": {
            "code": exit_code(e),
            "kind": kind,
            "message": e.to_string(),
        }
    })
    .to_string()
}
