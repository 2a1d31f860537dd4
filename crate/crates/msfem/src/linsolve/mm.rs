//! Matrix Market coordinate format (complex or real, general or symmetric).

use num_complex::Complex64;
use std::fmt::Write as _;

use super::{CsrMatrix, SolverError};

/// Serialize as `coordinate complex general`, one-based indices.
pub fn write_matrix_market(a: &CsrMatrix) -> String {
    let mut s = String::with_capacity(32 * a.nnz() + 64);
    s.push_str("%%MatrixMarket matrix coordinate complex general\n");
    let _ = writeln!(s, "{} {} {}", a.nrows(), a.ncols(), a.nnz());
    for r in 0..a.nrows() {
        for (c, v) in a.row(r) {
            let _ = writeln!(s, "{} {} {:e} {:e}", r + 1, c + 1, v.re, v.im);
        }
    }
    s
}

pub fn read_matrix_market(text: &str) -> Result<CsrMatrix, SolverError> {
    let err = |line: usize, msg: &str| SolverError::Format(format!("line {line}: {msg}"));
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
    let fields: Vec<String> = header.split_whitespace().map(|f| f.to_ascii_lowercase()).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" || fields[2] != "coordinate" {
        return Err(err(1, "expected '%%MatrixMarket matrix coordinate <field> <symmetry>'"));
    }
    let complex = match fields[3].as_str() {
        "complex" => true,
        "real" | "integer" => false,
        other => return Err(err(1, &format!("unsupported field '{other}'"))),
    };
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(err(1, &format!("unsupported symmetry '{other}'"))),
    };
    let mut size: Option<(usize, usize, usize)> = None;
    let mut trip = Vec::new();
    for (ln, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let parse_usize = |t: &str| t.parse::<usize>().map_err(|_| err(ln + 1, "bad integer"));
        let parse_f64 = |t: &str| t.parse::<f64>().map_err(|_| err(ln + 1, "bad number"));
        match size {
            None => {
                if toks.len() != 3 {
                    return Err(err(ln + 1, "expected 'rows cols nnz'"));
                }
                size = Some((parse_usize(toks[0])?, parse_usize(toks[1])?, parse_usize(toks[2])?));
            }
            Some((nr, nc, _)) => {
                let want = if complex { 4 } else { 3 };
                if toks.len() != want {
                    return Err(err(ln + 1, "wrong number of fields"));
                }
                let r = parse_usize(toks[0])?;
                let c = parse_usize(toks[1])?;
                if r == 0 || c == 0 || r > nr || c > nc {
                    return Err(err(ln + 1, "index out of range"));
                }
                let re = parse_f64(toks[2])?;
                let im = if complex { parse_f64(toks[3])? } else { 0.0 };
                let v = Complex64::new(re, im);
                trip.push((r - 1, c - 1, v));
                if symmetric && r != c {
                    trip.push((c - 1, r - 1, v));
                }
            }
        }
    }
    let (nr, nc, nnz) = size.ok_or_else(|| err(2, "missing size line"))?;
    let stored = if symmetric { trip.iter().filter(|t| t.0 >= t.1).count() } else { trip.len() };
    if stored != nnz {
        return Err(SolverError::Format(format!("expected {nnz} entries, found {stored}")));
    }
    Ok(CsrMatrix::from_triplets(nr, nc, &trip))
}
