//! Plain-text dense matrices: a header line `m d`, then `m` rows of `d`
//! whitespace-separated values.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::manifold::Mat;

pub fn format_matrix(m: &Mat) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:.16e}", m[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<Mat> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let bad = |line: usize, msg: String| Error::Parse { line: line + 1, msg };
    let (hl, header) = lines.next().ok_or_else(|| bad(0, "missing `m d` header".into()))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad(hl, format!("bad header {header:?}")))?;
    let [m, d] = dims[..] else {
        return Err(bad(hl, format!("header needs two fields, got {header:?}")));
    };
    let mut data = Vec::with_capacity(m * d);
    let mut seen = 0;
    for (ln, line) in lines {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(ln, "non-numeric entry".into()))?;
        if row.len() != d {
            return Err(bad(ln, format!("expected {d} values, got {}", row.len())));
        }
        data.extend(row);
        seen += 1;
    }
    if seen != m {
        return Err(Error::Parse {
            line: hl + 1,
            msg: format!("header says {m} rows, found {seen}"),
        });
    }
    Ok(Mat::from_row_slice(m, d, &data))
}

pub fn write_matrix(path: impl AsRef<Path>, m: &Mat) -> Result<()> {
    std::fs::write(path, format_matrix(m))?;
    Ok(())
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Mat> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn text_round_trip_is_exact(m in 1usize..5, d in 1usize..5, seed in any::<u64>()) {
            let mut state = seed;
            let mat = Mat::from_fn(m, d, |_, _| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                f64::from_bits((state >> 12) | 0x3ff0_0000_0000_0000) - 1.5
            });
            prop_assert_eq!(parse_matrix(&format_matrix(&mat)).unwrap(), mat);
        }
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("2 2\n1 2\n").is_err());
        assert!(parse_matrix("1 2\n1 x\n").is_err());
        assert!(parse_matrix("1 2\n1 2 3\n").is_err());
    }
}
