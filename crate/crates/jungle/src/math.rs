//! Numerically stable scalar primitives shared by every solver.
//!
//! All partition-function work in this crate happens in log space; these are
//! the only places the crate computes `exp`/`ln` combinations that are prone
//! to overflow or cancellation.

use crate::error::{JungleError, Result};

/// ln C(n, k) via log-gamma.
///
/// Accurate to better than 1e-10 relative for n up to 1e6.
pub fn log_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(JungleError::Domain(format!(
            "log_binomial requires k <= n, got k = {k}, n = {n}"
        )));
    }
    Ok(log_binomial_unchecked(n, k))
}

pub(crate) fn log_binomial_unchecked(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    // Exact and cheap at the edges; lgamma elsewhere.
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma((n + 1) as f64) - ln_gamma((k + 1) as f64) - ln_gamma((n - k + 1) as f64)
}

fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// ln(e^a + e^b) without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// ln Σ e^{v_k} with max-subtraction; safe for |v| up to ~1e8.
pub fn log_sum_exp(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(JungleError::Domain(
            "log_sum_exp of an empty sequence".into(),
        ));
    }
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let sum: f64 = values.iter().map(|&v| (v - hi).exp()).sum();
    Ok(hi + sum.ln())
}

/// Streaming log-sum-exp accumulator for sums too large to materialize.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LogSumAcc {
    hi: f64,
    sum: f64,
}

impl LogSumAcc {
    pub fn new() -> Self {
        LogSumAcc {
            hi: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub fn add(&mut self, v: f64) {
        if v == f64::NEG_INFINITY {
            return;
        }
        if v <= self.hi {
            self.sum += (v - self.hi).exp();
        } else {
            self.sum = self.sum * (self.hi - v).exp() + 1.0;
            self.hi = v;
        }
    }

    pub fn value(&self) -> f64 {
        if self.hi == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.hi + self.sum.ln()
        }
    }
}

/// ln(1 + e^x), stable on both tails.
pub fn ln_1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic function 1/(1 + e^{-x}), stable on both tails.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln(p/(1-p)) for p in (0,1).
pub fn logit(p: f64) -> f64 {
    p.ln() - (-p).ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_binomial_small_exact() {
        assert_relative_eq!(log_binomial(4, 2).unwrap(), 6.0_f64.ln(), epsilon = 1e-14);
        assert_eq!(log_binomial(17, 0).unwrap(), 0.0);
        assert_eq!(log_binomial(17, 17).unwrap(), 0.0);
        assert_relative_eq!(
            log_binomial(20, 7).unwrap(),
            11.258291246564648,
            max_relative = 1e-12
        );
    }

    #[test]
    fn log_binomial_large_matches_big_integer_oracle() {
        // Frozen from exact big-integer evaluation of C(800, 400) and C(800, 22).
        assert_relative_eq!(
            log_binomial(800, 400).unwrap(),
            550.9493347315589,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            log_binomial(800, 22).unwrap(),
            98.29890462787621,
            max_relative = 1e-10
        );
        assert_relative_eq!(
            log_binomial(50, 25).unwrap(),
            32.47055650581199,
            max_relative = 1e-12
        );
    }

    #[test]
    fn log_binomial_rejects_k_above_n() {
        assert!(log_binomial(3, 4).is_err());
    }

    #[test]
    fn log_sum_exp_basics() {
        assert_relative_eq!(
            log_sum_exp(&[0.0, 0.0]).unwrap(),
            2.0_f64.ln(),
            epsilon = 1e-15
        );
        assert_eq!(log_sum_exp(&[3.25]).unwrap(), 3.25);
        assert_relative_eq!(
            log_sum_exp(&[1000.0, 1000.0]).unwrap(),
            1000.0 + 2.0_f64.ln(),
            epsilon = 1e-12
        );
        assert!(log_sum_exp(&[]).is_err());
        assert_eq!(
            log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn streaming_accumulator_matches_two_pass() {
        let vals = [-700.0, 3.0, 2.9, -1.0, 810.0, 809.5];
        let mut acc = LogSumAcc::new();
        for &v in &vals {
            acc.add(v);
        }
        assert_relative_eq!(acc.value(), log_sum_exp(&vals).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn sigmoid_logit_inverse_pair() {
        for &p in &[1e-12, 0.028, 0.5, 0.97, 1.0 - 1e-12] {
            assert_relative_eq!(sigmoid(logit(p)), p, max_relative = 1e-12);
        }
        assert_eq!(sigmoid(0.0), 0.5);
        // No overflow on extreme arguments.
        assert_eq!(sigmoid(-800.0), 0.0);
        assert_eq!(sigmoid(800.0), 1.0);
    }

    #[test]
    fn ln_1p_exp_tails() {
        assert_relative_eq!(ln_1p_exp(0.0), 2.0_f64.ln(), epsilon = 1e-15);
        assert_eq!(ln_1p_exp(900.0), 900.0);
        assert_relative_eq!(ln_1p_exp(-40.0), (-40.0_f64).exp(), max_relative = 1e-12);
    }
}
