//! File and flag parsing helpers: the matrix text format, comma-separated
//! lists, and atomic writes.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use lapdet::DenseMatrix;

/// Parses the matrix file format: first line `rows cols`, then row-major
/// whitespace-separated decimals (line breaks are not significant).
pub fn parse_matrix_text(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let header = lines.next().context("matrix file is empty")?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        bail!("matrix header must be `rows cols`, got {header:?}");
    }
    let rows: usize = dims[0].parse().with_context(|| format!("bad row count {:?}", dims[0]))?;
    let cols: usize = dims[1].parse().with_context(|| format!("bad column count {:?}", dims[1]))?;

    let mut data = Vec::with_capacity(rows * cols);
    for line in lines {
        for token in line.split_whitespace() {
            let value: f64 =
                token.parse().with_context(|| format!("bad matrix entry {token:?}"))?;
            data.push(value);
        }
    }
    if data.len() != rows * cols {
        bail!("matrix body has {} entries, expected {}x{} = {}", data.len(), rows, cols, rows * cols);
    }
    DenseMatrix::from_row_major(rows, cols, data).map_err(Into::into)
}

pub fn read_matrix_file(path: &Path) -> Result<DenseMatrix> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_matrix_text(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Parses a comma-separated list of 1-based node indices into 0-based ones.
pub fn parse_node_list(list: &str, n: usize) -> Result<Vec<usize>> {
    let mut nodes = Vec::new();
    for token in list.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        let node: usize = token.parse().with_context(|| format!("bad node index {token:?}"))?;
        if node < 1 || node > n {
            bail!("node index {node} out of range 1..={n}");
        }
        nodes.push(node - 1);
    }
    if nodes.is_empty() {
        bail!("node list {list:?} is empty");
    }
    Ok(nodes)
}

/// Parses a comma-separated list of bare indices (no range check).
pub fn parse_usize_list(list: &str) -> Result<Vec<usize>> {
    let mut values = Vec::new();
    for token in list.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        let value: usize =
            token.parse().with_context(|| format!("bad node index {token:?}"))?;
        values.push(value);
    }
    Ok(values)
}

/// Parses a comma-separated vector of reals.
pub fn parse_vector(list: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for token in list.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        let value: f64 = token.parse().with_context(|| format!("bad value {token:?}"))?;
        values.push(value);
    }
    if values.is_empty() {
        bail!("vector {list:?} is empty");
    }
    Ok(values)
}

/// Writes via a temp file in the same directory plus rename, so readers
/// never observe a partial file.
pub fn atomic_write(path: &Path, content: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let file_name = path
        .file_name()
        .with_context(|| format!("invalid output path {}", path.display()))?;
    let tmp = dir.join(format!(".{}.tmp", file_name.to_string_lossy()));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(&tmp, content).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path)
        .with_context(|| format!("renaming {} to {}", tmp.display(), path.display()))?;
    Ok(())
}

/// Writes to the given path atomically, or to stdout when no path is given.
pub fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(path) => atomic_write(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
