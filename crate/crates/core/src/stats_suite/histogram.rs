use std::io::Write;

use serde::{Deserialize, Serialize};

use super::StatsError;

/// Half-open bin `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

/// Index `k` of the bin `[origin + k*w, origin + (k+1)*w)` holding `x`.
pub fn bin_index(x: f64, width: f64, origin: f64) -> i64 {
    let mut k = ((x - origin) / width).floor() as i64;
    // the division can land one bin off near a boundary
    if origin + (k + 1) as f64 * width <= x {
        k += 1;
    } else if origin + k as f64 * width > x {
        k -= 1;
    }
    k
}

fn check_width(width: f64) -> Result<(), StatsError> {
    if width.is_finite() && width > 0.0 {
        Ok(())
    } else {
        Err(StatsError::InvalidBinWidth(width))
    }
}

/// Contiguous bins from the one holding the smallest value to the one
/// holding the largest. Empty input gives no bins.
pub fn histogram(values: &[f64], width: f64, origin: f64) -> Result<Vec<Bin>, StatsError> {
    check_width(width)?;
    let Some(lo) = values.iter().map(|&x| bin_index(x, width, origin)).min() else {
        return Ok(Vec::new());
    };
    let hi = values.iter().map(|&x| bin_index(x, width, origin)).max().unwrap_or(lo);
    histogram_over(values, width, origin, lo, hi)
}

/// Bins `first..=last` (by index). Values outside the range are not counted.
pub fn histogram_over(
    values: &[f64],
    width: f64,
    origin: f64,
    first: i64,
    last: i64,
) -> Result<Vec<Bin>, StatsError> {
    check_width(width)?;
    if last < first {
        return Ok(Vec::new());
    }
    let mut bins: Vec<Bin> = (first..=last)
        .map(|k| Bin {
            start: origin + k as f64 * width,
            end: origin + (k + 1) as f64 * width,
            count: 0,
        })
        .collect();
    for &x in values {
        let k = bin_index(x, width, origin);
        if (first..=last).contains(&k) {
            bins[(k - first) as usize].count += 1;
        }
    }
    Ok(bins)
}

/// CSV with header `bin_start,bin_end,count`.
pub fn write_histogram_csv<W: Write>(bins: &[Bin], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_start", "bin_end", "count"])?;
    for b in bins {
        w.write_record([format!("{:.6}", b.start), format!("{:.6}", b.end), b.count.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
