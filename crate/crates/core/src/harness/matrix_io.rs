use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Seventeen significant digits: enough to round-trip any `f64`.
pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Parse `rows cols` followed by `rows` lines of `cols` whitespace-separated numbers.
pub fn parse_matrix(text: &str) -> Result<Mat> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::invalid("matrix file is empty"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::invalid(format!("line 1: expected `rows cols`, got {header:?}")))?;
    let [rows, cols] = dims[..] else {
        return Err(Error::invalid(format!("line 1: expected `rows cols`, got {header:?}")));
    };
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (i, line) in lines {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::invalid(format!("line {}: bad number", i + 1)))?;
        if row.len() != cols {
            return Err(Error::invalid(format!(
                "line {}: expected {cols} entries, got {}",
                i + 1,
                row.len()
            )));
        }
        seen += 1;
        if seen > rows {
            return Err(Error::invalid(format!("line {}: more than {rows} rows", i + 1)));
        }
        data.extend(row);
    }
    if seen != rows {
        return Err(Error::invalid(format!("expected {rows} rows, got {seen}")));
    }
    Ok(Mat::from_row_slice(rows, cols, &data))
}

pub fn format_matrix(m: &Mat) -> String {
    let mut s = format!("{} {}\n", m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| fmt_float(m[(r, c)])).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn read_matrix(path: &Path) -> Result<Mat> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| match e {
        Error::InvalidArgument(m) => Error::invalid(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn write_matrix(path: &Path, m: &Mat) -> Result<()> {
    fs::write(path, format_matrix(m)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
