//! Associated Laguerre polynomials and factorial-scaled power series terms.
//!
//! Both are evaluated by forward recurrences; no factorial is ever formed
//! explicitly.

use crate::error::{RabiError, Result};

/// `L_n^k(x)` by the three-term recurrence
/// `n L_n^k = (2n − 1 + k − x) L_{n−1}^k − (n − 1 + k) L_{n−2}^k`.
pub fn laguerre_assoc(n: usize, k: usize, x: f64) -> f64 {
    let k = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + k - x;
    for m in 2..=n {
        let m = m as f64;
        let next = ((2.0 * m - 1.0 + k - x) * cur - (m - 1.0 + k) * prev) / m;
        prev = cur;
        cur = next;
    }
    cur
}

/// Signed-index front end of [`laguerre_assoc`].
pub fn try_laguerre_assoc(n: i64, k: i64, x: f64) -> Result<f64> {
    if n < 0 || k < 0 {
        return Err(RabiError::Domain(format!(
            "laguerre indices must be non-negative (n = {n}, k = {k})"
        )));
    }
    if !x.is_finite() {
        return Err(RabiError::Domain("laguerre argument must be finite".into()));
    }
    Ok(laguerre_assoc(n as usize, k as usize, x))
}

/// `[L_0^k(x), …, L_{n_max}^k(x)]` from one recurrence sweep.
pub fn laguerre_sequence(n_max: usize, k: usize, x: f64) -> Vec<f64> {
    let kf = k as f64;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max == 0 {
        return out;
    }
    out.push(1.0 + kf - x);
    for m in 2..=n_max {
        let mf = m as f64;
        let next = ((2.0 * mf - 1.0 + kf - x) * out[m - 1] - (mf - 1.0 + kf) * out[m - 2]) / mf;
        out.push(next);
    }
    out
}

/// A single term of the factorial-damped series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTerm {
    pub index_n: usize,
    pub value: f64,
}

/// `two_lambda^{2n} / n!` via `t_{n+1} = t_n · two_lambda² / (n + 1)`.
pub fn scaled_power_term(n: usize, two_lambda: f64) -> f64 {
    let sq = two_lambda * two_lambda;
    (1..=n).fold(1.0, |t, m| t * sq / m as f64)
}

/// Terms `0..=n_max` of [`scaled_power_term`].
pub fn scaled_power_terms(n_max: usize, two_lambda: f64) -> Vec<SeriesTerm> {
    let sq = two_lambda * two_lambda;
    let mut t = 1.0;
    let mut out = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            t = t * sq / n as f64;
        }
        out.push(SeriesTerm { index_n: n, value: t });
    }
    out
}
