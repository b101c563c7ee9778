//! Least-squares fit of the Zipf-Mandelbrot rank-frequency law
//! `f_i = C (i + beta)^(-alpha)` on log-transformed frequencies.

use serde::{Deserialize, Serialize};

use super::vocab::Vocabulary;
use crate::error::{Error, Result};
use crate::optim::{nelder_mead_minimize, NelderMeadOptions};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZipfFit<T> {
    #[serde(rename = "C")]
    pub c: T,
    pub alpha: T,
    pub beta: T,
    pub sse: T,
}

impl<T: Scalar> ZipfFit<T> {
    /// Predicted frequency at 1-based `rank`.
    pub fn predict(&self, rank: usize) -> T {
        self.c * (T::from_count(rank) + self.beta).powf(-self.alpha)
    }
}

/// Sum of squared log residuals for `params = [ln C, alpha, beta]`.
/// Infinite when `beta <= -1`, where the law is undefined at rank 1.
pub fn zipf_objective<T: Scalar>(log_freqs: &[T], params: &[T]) -> T {
    let (log_c, alpha, beta) = (params[0], params[1], params[2]);
    if beta <= -T::one() {
        return T::infinity();
    }
    log_freqs
        .iter()
        .enumerate()
        .map(|(i, &lf)| {
            let r = lf - (log_c - alpha * (T::from_count(i + 1) + beta).ln());
            r * r
        })
        .sum()
}

/// Fits the law to frequencies given in rank order (most frequent first).
/// Starts from `alpha = 1`, `beta = 1`, `ln C = ln f_1`.
pub fn fit_zipf_mandelbrot<T: Scalar>(
    freqs: &[T],
    opts: &NelderMeadOptions<T>,
) -> Result<ZipfFit<T>> {
    let mut distinct: Vec<T> = freqs.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite frequencies"));
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::TooFewFrequencies {
            needed: 3,
            found: distinct.len(),
        });
    }
    if freqs.iter().any(|&f| f <= T::zero() || !f.is_finite()) {
        return Err(Error::InvalidParameter("frequencies must be positive".into()));
    }
    let log_freqs: Vec<T> = freqs.iter().map(|f| f.ln()).collect();
    let x0 = [log_freqs[0], T::one(), T::one()];
    let m = nelder_mead_minimize(|p: &[T]| zipf_objective(&log_freqs, p), &x0, opts)?;
    Ok(ZipfFit {
        c: m.x[0].exp(),
        alpha: m.x[1],
        beta: m.x[2],
        sse: m.value,
    })
}

/// Options used for vocabulary fits: a tight tolerance with restarts, since
/// `C`, `alpha` and `beta` are strongly correlated.
pub fn default_fit_options() -> NelderMeadOptions<f64> {
    NelderMeadOptions {
        ftol: 1e-12,
        max_iter: 50_000,
        step: 0.5,
        restarts: 10,
    }
}

/// Fits the vocabulary's global counts.
pub fn fit_vocabulary(vocab: &Vocabulary) -> Result<ZipfFit<f64>> {
    let freqs: Vec<f64> = vocab.counts().iter().map(|&c| c as f64).collect();
    fit_zipf_mandelbrot(&freqs, &default_fit_options())
}

/// `(rank, observed, fitted)` rows for log-log plotting.
pub fn fitted_curve<T: Scalar>(freqs: &[T], fit: &ZipfFit<T>) -> Vec<(usize, T, T)> {
    freqs
        .iter()
        .enumerate()
        .map(|(i, &f)| (i + 1, f, fit.predict(i + 1)))
        .collect()
}
