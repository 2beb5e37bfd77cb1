use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::{Sample, StatsError};

/// Largest pooled size for which the exact permutation distribution is used.
pub const EXACT_MAX_POOLED: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    ExactPermutation,
    NormalApproximation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MannWhitneyResult {
    pub n1: usize,
    pub n2: usize,
    /// U of the first sample: its rank sum minus n1(n1+1)/2.
    pub u_statistic: f64,
    pub method: TestMethod,
    /// Continuity-corrected z (approximation only).
    pub z: Option<f64>,
    pub p_two_sided: f64,
    pub alpha: f64,
    pub reject_null: bool,
    /// Every pooled value is equal; p is defined as 1.
    pub degenerate: bool,
}

impl MannWhitneyResult {
    pub fn verdict_line(&self) -> String {
        if self.reject_null {
            format!(
                "p = {:.4} < alpha = {}: reject the null hypothesis",
                self.p_two_sided, self.alpha
            )
        } else {
            format!(
                "p = {:.4} >= alpha = {}: insufficient evidence to reject the null hypothesis",
                self.p_two_sided, self.alpha
            )
        }
    }
}

/// Average ranks (1-based) of the pooled sample in input order, plus the
/// sizes of every tie group.
fn pooled_ranks(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));

    let mut ranks = vec![0.0; pooled.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && pooled[order[j]] == pooled[order[i]] {
            j += 1;
        }
        // positions i..j share ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

/// Exact two-sided p over all C(N, n1) label assignments, conditional on the
/// observed (possibly tied) ranks. Ranks are doubled to stay integral.
fn exact_p(ranks: &[f64], n1: usize, observed_dev: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    // ways[k][s]: subsets of size k with doubled rank sum s
    let mut ways = vec![vec![0u64; max_sum + 1]; n1 + 1];
    ways[0][0] = 1;
    for &r in &doubled {
        for k in (1..=n1).rev() {
            for s in (r..=max_sum).rev() {
                ways[k][s] += ways[k - 1][s - r];
            }
        }
    }
    let n2 = ranks.len() - n1;
    let centre = (n1 * n2) as f64 / 2.0;
    let offset = (n1 * (n1 + 1)) as f64 / 2.0;
    let (mut hits, mut total) = (0u64, 0u64);
    for (s, &w) in ways[n1].iter().enumerate() {
        if w == 0 {
            continue;
        }
        total += w;
        let u = s as f64 / 2.0 - offset;
        if (u - centre).abs() >= observed_dev {
            hits += w;
        }
    }
    hits as f64 / total as f64
}

/// Two-sided Mann-Whitney U test of `a` against `b`.
///
/// Pooled sizes up to [`EXACT_MAX_POOLED`] use the exact permutation
/// distribution; larger ones use the normal approximation with tie-corrected
/// variance and a 0.5 continuity correction.
pub fn mann_whitney_u(a: &Sample, b: &Sample, alpha: f64) -> Result<MannWhitneyResult, StatsError> {
    let method = if a.len() + b.len() <= EXACT_MAX_POOLED {
        TestMethod::ExactPermutation
    } else {
        TestMethod::NormalApproximation
    };
    mann_whitney_u_with(a, b, alpha, method)
}

/// [`mann_whitney_u`] with the p-value method chosen by the caller. The
/// exact method costs O(n1 * N * rank sum); keep it to modest pools.
pub fn mann_whitney_u_with(
    a: &Sample,
    b: &Sample,
    alpha: f64,
    method: TestMethod,
) -> Result<MannWhitneyResult, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidAlpha(alpha));
    }
    if a.is_empty() {
        return Err(StatsError::EmptySample(a.label.clone()));
    }
    if b.is_empty() {
        return Err(StatsError::EmptySample(b.label.clone()));
    }
    let (n1, n2) = (a.len(), b.len());
    let n = n1 + n2;
    let (ranks, ties) = pooled_ranks(&a.values, &b.values);
    let r1: f64 = ranks[..n1].iter().sum();
    let u = r1 - (n1 * (n1 + 1)) as f64 / 2.0;
    let centre = (n1 * n2) as f64 / 2.0;
    let dev = (u - centre).abs();

    let degenerate = ties.first().is_some_and(|&t| t == n);

    let (z, p) = if degenerate {
        (None, 1.0)
    } else {
        match method {
            TestMethod::ExactPermutation => (None, exact_p(&ranks, n1, dev)),
            TestMethod::NormalApproximation => {
                let nf = n as f64;
                let tie_sum: f64 = ties.iter().map(|&t| (t as f64).powi(3) - t as f64).sum();
                let var = (n1 * n2) as f64 / 12.0 * ((nf + 1.0) - tie_sum / (nf * (nf - 1.0)));
                let z = (dev - 0.5).max(0.0) / var.sqrt();
                (Some(z), erfc(z / std::f64::consts::SQRT_2))
            }
        }
    };
    let p = p.clamp(0.0, 1.0);
    Ok(MannWhitneyResult {
        n1,
        n2,
        u_statistic: u,
        method,
        z,
        p_two_sided: p,
        alpha,
        reject_null: p < alpha,
        degenerate,
    })
}
