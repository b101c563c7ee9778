use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2x2 table `[[a, b], [c, d]]` of counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        ContingencyTable2x2 { a, b, c, d }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherResult {
    pub odds_ratio: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub p_two_sided: f64,
    /// Whether 0.5 was added to every cell for the odds ratio and interval.
    pub haldane_corrected: bool,
}

/// `ln k!` for `k = 0..=n`, by cumulative summation.
fn ln_factorials(n: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Probability of the table with top-left cell `x` given the margins.
fn hypergeometric_ln(lf: &[f64], x: u64, row1: u64, row2: u64, col1: u64, n: u64) -> f64 {
    let (a, b, c) = (x, row1 - x, col1 - x);
    let d = row2 - c;
    let u = |k: u64| lf[k as usize];
    u(row1) + u(row2) + u(col1) + u(n - col1) - u(n) - u(a) - u(b) - u(c) - u(d)
}

/// Fisher's exact test with the sample odds ratio and its log-normal 95%
/// interval. The two-sided p sums every table with the observed margins
/// whose probability does not exceed the observed one (relative slack 1e-7).
pub fn fisher_exact(t: ContingencyTable2x2) -> Result<FisherResult> {
    let row1 = t.a + t.b;
    let row2 = t.c + t.d;
    let col1 = t.a + t.c;
    let col2 = t.b + t.d;
    let n = t.total();
    if row1 == 0 || row2 == 0 || col1 == 0 || col2 == 0 {
        return Err(Error::DegenerateTable);
    }
    let lf = ln_factorials(n);
    let lo = col1.saturating_sub(row2);
    let hi = row1.min(col1);
    let observed = hypergeometric_ln(&lf, t.a, row1, row2, col1, n).exp();
    let threshold = observed * (1.0 + 1e-7);
    let p: f64 = (lo..=hi)
        .map(|x| hypergeometric_ln(&lf, x, row1, row2, col1, n).exp())
        .filter(|&p| p <= threshold)
        .sum();

    let corrected = t.a == 0 || t.b == 0 || t.c == 0 || t.d == 0;
    let shift = if corrected { 0.5 } else { 0.0 };
    let [a, b, c, d] = [t.a, t.b, t.c, t.d].map(|v| v as f64 + shift);
    let odds_ratio = a * d / (b * c);
    let se = (1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d).sqrt();
    let z = 1.959_963_984_540_054;
    Ok(FisherResult {
        odds_ratio,
        ci95_low: (odds_ratio.ln() - z * se).exp(),
        ci95_high: (odds_ratio.ln() + z * se).exp(),
        p_two_sided: p.min(1.0),
        haldane_corrected: corrected,
    })
}
