use std::collections::HashSet;
use std::str::FromStr;

use crate::eval::Matrix;
use crate::semiring::{format_scalar, parse_scalar, zero, SemiringId};

use super::TextError;

const MAX_FILE_ELEMENTS: usize = 100_000_000;

fn err(line: usize, message: impl Into<String>) -> TextError {
    TextError::Matrix { line, message: message.into() }
}

/// Reads a matrix file. Values must lie in the ring's carrier.
pub fn parse_matrix(text: &str) -> Result<Matrix, TextError> {
    let mut lines =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (hl, header) = lines.next().ok_or_else(|| err(1, "missing header `matrix ROWS COLS RING`"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    let [kw, rows, cols, ring] = h.as_slice() else {
        return Err(err(hl, "malformed header, expected `matrix ROWS COLS RING`"));
    };
    if *kw != "matrix" {
        return Err(err(hl, "malformed header, expected `matrix ROWS COLS RING`"));
    }
    let dim = |s: &str| s.parse::<usize>().ok().filter(|&n| n > 0);
    let (Some(rows), Some(cols)) = (dim(rows), dim(cols)) else {
        return Err(err(hl, "matrix dimensions must be positive integers"));
    };
    let ring = SemiringId::from_str(ring).map_err(|_| err(hl, format!("unknown ring `{ring}`")))?;
    if rows.checked_mul(cols).is_none_or(|n| n > MAX_FILE_ELEMENTS) {
        return Err(err(hl, "matrix too large"));
    }
    let mut data = vec![zero(ring).scalar(); rows * cols];
    let mut seen = HashSet::new();
    for (ln, line) in lines {
        let f: Vec<&str> = line.split_whitespace().collect();
        let [i, j, v] = f.as_slice() else {
            return Err(err(ln, "expected `ROW COL VALUE`"));
        };
        let idx = |s: &str, n: usize| s.parse::<usize>().ok().filter(|&k| (1..=n).contains(&k));
        let (Some(i), Some(j)) = (idx(i, rows), idx(j, cols)) else {
            return Err(err(ln, format!("index ({i}, {j}) out of range for a {rows} x {cols} matrix")));
        };
        if !seen.insert((i, j)) {
            return Err(err(ln, format!("duplicate entry ({i}, {j})")));
        }
        let value = parse_scalar(ring, v, false).map_err(|e| err(ln, e.to_string()))?;
        data[(i - 1) * cols + (j - 1)] = value.scalar();
    }
    Matrix::new(rows, cols, ring, data).map_err(|e| err(hl, e.to_string()))
}

/// Writes a matrix file listing the entries that differ from the ring's zero.
pub fn print_matrix(m: &Matrix) -> String {
    let mut out = format!("matrix {} {} {}\n", m.rows(), m.cols(), m.ring());
    let z = zero(m.ring()).scalar();
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            let v = m.scalar(r, c);
            if v != z {
                out.push_str(&format!("{} {} {}\n", r + 1, c + 1, format_scalar(v)));
            }
        }
    }
    out
}
