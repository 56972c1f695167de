//! Numeric list syntax shared by `--t-grid-db`, `--values` and `--pilot-grid`.
//!
//! * `a,b,c` explicit values
//! * `lo:step:hi` arithmetic progression, both ends included
//! * `lo..hi` ten log-spaced points, `lo..hi/n` for `n` points

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use anyhow::{bail, Context, Result};

fn number(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().with_context(|| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        bail!("`{s}` is not finite");
    }
    Ok(v)
}

pub fn parse_list(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        bail!("empty value list");
    }
    if let Some((lo, rest)) = spec.split_once("..") {
        let (hi, n) = match rest.split_once('/') {
            Some((hi, n)) => (
                hi,
                n.trim()
                    .parse::<usize>()
                    .with_context(|| format!("bad point count `{n}`"))?,
            ),
            None => (rest, 10),
        };
        let (lo, hi) = (number(lo)?, number(hi)?);
        if !(lo > 0.0 && hi > lo) || n < 2 {
            bail!("`{spec}`: log ranges need 0 < lo < hi and at least 2 points");
        }
        let r = (hi / lo).ln();
        return Ok((0..n)
            .map(|k| {
                if k + 1 == n {
                    hi
                } else {
                    lo * (r * k as f64 / (n - 1) as f64).exp()
                }
            })
            .collect());
    }
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [lo, step, hi] => {
            let (lo, step, hi) = (number(lo)?, number(step)?, number(hi)?);
            if !(step > 0.0) || hi < lo {
                bail!("`{spec}`: ranges run upward, lo:step:hi with step > 0 and hi >= lo");
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|k| lo + step * k as f64).collect())
        }
        [_] => spec.split(',').map(number).collect(),
        _ => bail!("`{spec}`: expected a,b,c or lo:step:hi or lo..hi[/n]"),
    }
}

/// Parse a threshold grid in dB; it must be strictly ascending.
pub fn parse_db_grid(spec: &str) -> Result<Vec<f64>> {
    let db = parse_list(spec)?;
    if db.windows(2).any(|w| !(w[1] > w[0])) {
        bail!("threshold grid `{spec}` must be strictly ascending");
    }
    Ok(db)
}
