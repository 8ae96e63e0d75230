//! CSV exchange format for sampled fields.
//!
//! Line 1 is the header `n,h,r0,rexc,cx_1,...,cx_n` (values, not names);
//! every following line is a node row `i_1,...,i_n,value` with integer node
//! indices. Values are written in Rust's shortest round-trip notation, so the
//! round trip is bit exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use super::{GridDomain, ScalarField};
use crate::error::{Error, Result};

pub fn write_csv(field: &ScalarField, mut out: impl Write) -> Result<()> {
    let dom = field.domain();
    let mut header = format!("{},{},{},{}", dom.dim(), dom.h(), dom.r0(), dom.r_exc());
    for c in dom.center() {
        header.push(',');
        header.push_str(&c.to_string());
    }
    writeln!(out, "{header}")?;
    for idx in dom.active_nodes() {
        let mut row = String::new();
        for i in &idx {
            row.push_str(&i.to_string());
            row.push(',');
        }
        row.push_str(&field.value(&idx)?.to_string());
        writeln!(out, "{row}")?;
    }
    Ok(())
}

pub fn save_csv(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_csv(field, BufWriter::new(file))
}

pub fn read_csv(input: impl BufRead) -> Result<ScalarField> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::CsvFormat {
            line: 1,
            msg: "empty file".into(),
        })?
        .1
        .map(|l| (0usize, l))
        .map_err(Error::Io)?;

    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() < 5 {
        return Err(Error::CsvFormat {
            line: 1,
            msg: format!("header needs at least 5 fields, got {}", fields.len()),
        });
    }
    let n: usize = fields[0].trim().parse().map_err(|_| Error::CsvFormat {
        line: 1,
        msg: format!("bad dimension field {:?}", fields[0]),
    })?;
    if fields.len() != 4 + n {
        return Err(Error::CsvFormat {
            line: 1,
            msg: format!("header for n = {n} needs {} fields, got {}", 4 + n, fields.len()),
        });
    }
    let parse_f = |s: &str, line: usize| -> Result<f64> {
        s.trim().parse().map_err(|_| Error::CsvFormat {
            line,
            msg: format!("bad numeric field {s:?}"),
        })
    };
    let h = parse_f(fields[1], 1)?;
    let r0 = parse_f(fields[2], 1)?;
    let r_exc = parse_f(fields[3], 1)?;
    let center: Vec<f64> = fields[4..]
        .iter()
        .map(|s| parse_f(s, 1))
        .collect::<Result<_>>()?;

    let domain = Arc::new(GridDomain::new(n, &center, r0, r_exc, h)?);
    let mut values = vec![f64::NAN; domain.total_nodes()];
    let mut filled = vec![false; domain.total_nodes()];

    for (lineno, line) in lines {
        let line = line.map_err(Error::Io)?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<&str> = line.split(',').collect();
        if row.len() != n + 1 {
            return Err(Error::CsvFormat {
                line: lineno + 1,
                msg: format!("row needs {} fields, got {}", n + 1, row.len()),
            });
        }
        let mut idx = vec![0i64; n];
        for (slot, s) in idx.iter_mut().zip(&row[..n]) {
            *slot = s.trim().parse().map_err(|_| Error::CsvFormat {
                line: lineno + 1,
                msg: format!("bad node index {s:?}"),
            })?;
        }
        let value = parse_f(row[n], lineno + 1)?;
        if !value.is_finite() {
            return Err(Error::CsvFormat {
                line: lineno + 1,
                msg: format!("non-finite value at node {idx:?}"),
            });
        }
        match domain.flat(&idx) {
            Some(flat) if domain.is_active_flat(flat) => {
                values[flat] = value;
                filled[flat] = true;
            }
            _ => {
                return Err(Error::CsvFormat {
                    line: lineno + 1,
                    msg: format!("node {idx:?} is not active for this domain"),
                });
            }
        }
    }

    // nearest-node injection: every active node must be present
    let missing: Vec<Vec<i64>> = domain
        .active_nodes()
        .filter(|idx| {
            domain
                .flat(idx)
                .map(|f| !filled[f])
                .unwrap_or(true)
        })
        .take(8)
        .collect();
    if !missing.is_empty() {
        return Err(Error::CsvFormat {
            line: 0,
            msg: format!("missing values for active nodes (first few): {missing:?}"),
        });
    }

    Ok(ScalarField::from_raw(domain, values, None))
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<ScalarField> {
    let file = File::open(path)?;
    read_csv(BufReader::new(file))
}
