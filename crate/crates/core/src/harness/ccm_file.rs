//! Text matrix files: a first line `N`, then `N` lines of `N` complex
//! entries written `a+bi`, separated by whitespace.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, C64};

pub fn parse_ccm(text: &str) -> Result<ComplexMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (first, head) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let n: usize = head.parse().map_err(|_| Error::Parse {
        line: first,
        msg: format!("expected the dimension, got `{head}`"),
    })?;
    if n == 0 {
        return Err(Error::Parse {
            line: first,
            msg: "dimension must be positive".into(),
        });
    }
    let mut data = Vec::with_capacity(n * n);
    let mut last = first;
    for (lineno, line) in lines {
        last = lineno;
        let row: Vec<&str> = line.split_whitespace().collect();
        if data.len() == n * n {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("more than {n} rows"),
            });
        }
        if row.len() != n {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {n} entries, got {}", row.len()),
            });
        }
        for tok in row {
            data.push(parse_entry(tok).ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("bad complex entry `{tok}`"),
            })?);
        }
    }
    if data.len() != n * n {
        return Err(Error::Parse {
            line: last,
            msg: format!("expected {n} rows, got {}", data.len() / n),
        });
    }
    ComplexMatrix::new(n, n, data)
}

fn parse_entry(tok: &str) -> Option<C64> {
    let z: C64 = tok.replace('j', "i").parse().ok()?;
    (z.re.is_finite() && z.im.is_finite()).then_some(z)
}

pub fn read_ccm(path: &Path) -> Result<ComplexMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_ccm(&text)
}

/// Inverse of [`parse_ccm`]; entries use the shortest round-trip decimal form.
pub fn format_ccm(m: &ComplexMatrix) -> String {
    let mut out = format!("{}\n", m.rows());
    for i in 0..m.rows() {
        let row: Vec<String> = m
            .row(i)
            .iter()
            .map(|z| {
                let sign = if z.im.is_sign_negative() { '-' } else { '+' };
                format!("{:?}{sign}{:?}i", z.re, z.im.abs())
            })
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}
