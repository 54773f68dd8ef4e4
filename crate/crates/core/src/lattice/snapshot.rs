//! Text snapshots: a `d=<d> n_sites=<k>` header followed by one site per
//! line as space-separated integers, in insertion order.

use std::io::{BufRead, Write};

use super::{Aggregate, Dim, LatticePoint};
use crate::error::{Error, Result};

pub fn write_snapshot<W: Write>(agg: &Aggregate, mut out: W) -> Result<()> {
    let dim = agg.dim();
    writeln!(out, "d={} n_sites={}", dim, agg.len())?;
    let mut line = String::new();
    for p in agg.sites() {
        line.clear();
        for (i, c) in p.coords(dim).iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&c.to_string());
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_snapshot<R: BufRead>(input: R) -> Result<Aggregate> {
    let mut lines = input.lines();
    let header = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header".into(),
    })??;
    let (dim, n_sites) = parse_header(&header)?;
    let mut agg = Aggregate::new(dim);
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        if line.is_empty() {
            continue;
        }
        let coords: Vec<i32> = line
            .split(' ')
            .map(|t| t.parse::<i32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: lineno,
                message: format!("bad coordinate: {e}"),
            })?;
        if coords.len() != dim.get() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {} coordinates, got {}", dim, coords.len()),
            });
        }
        if !agg.insert(LatticePoint::new(&coords))? {
            return Err(Error::Parse {
                line: lineno,
                message: "duplicate site".into(),
            });
        }
    }
    if agg.len() != n_sites {
        return Err(Error::Parse {
            line: 1,
            message: format!("header declares {n_sites} sites, found {}", agg.len()),
        });
    }
    Ok(agg)
}

fn parse_header(header: &str) -> Result<(Dim, usize)> {
    let bad = |m: &str| Error::Parse {
        line: 1,
        message: format!("{m}: {header:?}"),
    };
    let mut parts = header.split(' ');
    let d = parts
        .next()
        .and_then(|t| t.strip_prefix("d="))
        .and_then(|v| v.parse::<usize>().ok())
        .ok_or_else(|| bad("expected d=<d>"))?;
    let n = parts
        .next()
        .and_then(|t| t.strip_prefix("n_sites="))
        .and_then(|v| v.parse::<usize>().ok())
        .ok_or_else(|| bad("expected n_sites=<k>"))?;
    if parts.next().is_some() {
        return Err(bad("trailing tokens in header"));
    }
    let dim = Dim::new(d).map_err(|_| bad("dimension out of range"))?;
    Ok((dim, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_format() {
        let dim = Dim::new(2).unwrap();
        let agg = Aggregate::from_points(dim, [LatticePoint::ORIGIN, LatticePoint::new(&[-1, 3])]).unwrap();
        let mut buf = Vec::new();
        write_snapshot(&agg, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "d=2 n_sites=2\n0 0\n-1 3\n");
    }

    #[test]
    fn malformed_inputs_rejected() {
        for text in [
            "",
            "d=2\n",
            "d=7 n_sites=0\n",
            "d=2 n_sites=1\n1\n",
            "d=2 n_sites=2\n0 0\n0 0\n",
            "d=2 n_sites=3\n0 0\n",
        ] {
            assert!(read_snapshot(text.as_bytes()).is_err(), "{text:?}");
        }
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(d in 1usize..=4, pts in prop::collection::vec(prop::array::uniform4(-300i32..300), 0..60)) {
            let dim = Dim::new(d).unwrap();
            let agg = Aggregate::from_points(dim, pts.iter().map(|c| LatticePoint::new(&c[..d]))).unwrap();
            let mut first = Vec::new();
            write_snapshot(&agg, &mut first).unwrap();
            let back = read_snapshot(first.as_slice()).unwrap();
            prop_assert_eq!(back.sites(), agg.sites());
            let mut second = Vec::new();
            write_snapshot(&back, &mut second).unwrap();
            prop_assert_eq!(first, second);
        }
    }
}
