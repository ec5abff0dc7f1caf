//! Closed-form partition functions and loss pmfs: binomial, single coupled
//! pair, hub-and-spokes (Dandelion), and complete graph (Diamond).
//!
//! Every pmf here is assembled from log-weights and normalized once; the
//! Diamond exponent grows like beta*l^2/2 and the Dandelion hub field can
//! reach order hundreds, so nothing is exponentiated before normalization.

use crate::core::LossPmf;
use crate::error::{JungleError, Result};
use crate::math::{
    log_add_exp, log_binomial_unchecked, log_sum_exp, ln_1p_exp, logit, sigmoid,
};

/// Hub-and-spokes parameters: `n` peripheral nodes coupled to one hub.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DandelionParams {
    pub n: usize,
    pub alpha0: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl DandelionParams {
    pub fn new(n: usize, alpha0: f64, alpha: f64, beta: f64) -> Result<Self> {
        if n < 1 {
            return Err(JungleError::Domain("dandelion needs n >= 1".into()));
        }
        for (name, v) in [("alpha0", alpha0), ("alpha", alpha), ("beta", beta)] {
            if !v.is_finite() {
                return Err(JungleError::Domain(format!("{name} is not finite")));
            }
        }
        Ok(DandelionParams {
            n,
            alpha0,
            alpha,
            beta,
        })
    }
}

/// Complete-graph parameters with a uniform pairwise coupling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiamondParams {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
}

impl DiamondParams {
    pub fn new(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        if n < 2 {
            return Err(JungleError::Domain("diamond needs n >= 2".into()));
        }
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(JungleError::Domain("parameters must be finite".into()));
        }
        Ok(DiamondParams { n, alpha, beta })
    }
}

/// Independent-node pmf: P(l) = C(n,l) p^l (1-p)^{n-l}.
pub fn binomial_pmf(n: usize, p: f64) -> Result<LossPmf> {
    if n < 1 {
        return Err(JungleError::Domain("binomial needs n >= 1".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(JungleError::Domain(format!(
            "default probability {p} must lie strictly inside (0,1)"
        )));
    }
    let (ln_p, ln_q) = (p.ln(), (-p).ln_1p());
    let log_w = (0..=n)
        .map(|l| {
            log_binomial_unchecked(n as u64, l as u64)
                + l as f64 * ln_p
                + (n - l) as f64 * ln_q
        })
        .collect();
    LossPmf::from_log_weights(n, log_w)
}

/// The field-to-probability map p = 1/(1 + e^{-alpha}).
pub fn p_from_alpha(alpha: f64) -> f64 {
    sigmoid(alpha)
}

/// Inverse of [`p_from_alpha`].
pub fn alpha_from_p(p: f64) -> f64 {
    logit(p)
}

/// Exact solution when exactly one pair (nodes 1 and 2) is coupled.
#[derive(Clone, Debug)]
pub struct PairContagionSolution {
    pub pmf: LossPmf,
    /// Default probability of each coupled node.
    pub p1: f64,
    /// Joint default probability of the coupled pair.
    pub q12: f64,
    /// Default correlation of the coupled pair.
    pub rho12: f64,
}

/// Exact pmf for n nodes with common field `alpha` and a single coupling
/// `beta` between nodes 1 and 2.
///
/// The count weight collects the pair's four states over the binomial rest:
/// w(l) = e^{alpha*l} [C(n-2,l) + 2 C(n-2,l-1) + e^{beta} C(n-2,l-2)].
pub fn pair_contagion_pmf(n: usize, alpha: f64, beta: f64) -> Result<PairContagionSolution> {
    if n < 2 {
        return Err(JungleError::Domain("pair contagion needs n >= 2".into()));
    }
    if !alpha.is_finite() || !beta.is_finite() {
        return Err(JungleError::Domain("parameters must be finite".into()));
    }
    let m = (n - 2) as u64;
    let ln2 = std::f64::consts::LN_2;
    let mut log_w = Vec::with_capacity(n + 1);
    for l in 0..=n {
        let mut terms = Vec::with_capacity(3);
        if l <= n - 2 {
            terms.push(log_binomial_unchecked(m, l as u64));
        }
        if l >= 1 && l - 1 <= n - 2 {
            terms.push(ln2 + log_binomial_unchecked(m, (l - 1) as u64));
        }
        if l >= 2 {
            terms.push(beta + log_binomial_unchecked(m, (l - 2) as u64));
        }
        log_w.push(alpha * l as f64 + log_sum_exp(&terms)?);
    }
    let pmf = LossPmf::from_log_weights(n, log_w)?;

    // Pair marginals from the 2-node block partition sum
    // z = e^{beta + 2 alpha} + 2 e^{alpha} + 1.
    let log_z2 = log_sum_exp(&[beta + 2.0 * alpha, ln2 + alpha, 0.0])?;
    let p1 = (log_add_exp(alpha, 2.0 * alpha + beta) - log_z2).exp();
    let q12 = (beta + 2.0 * alpha - log_z2).exp();
    // beta = 0 is exactly independent; report a clean zero rather than the
    // rounding residue of q - p^2.
    let rho12 = if beta == 0.0 {
        0.0
    } else {
        (q12 - p1 * p1) / (p1 * (1.0 - p1))
    };
    Ok(PairContagionSolution {
        pmf,
        p1,
        q12,
        rho12,
    })
}

/// Dandelion pmf over the peripheral default count l = 0..=n, hub summed out:
/// P(l) = (1/Z) C(n,l) (e^{alpha*l} + e^{alpha0 + l(alpha+beta)}).
pub fn dandelion_pmf(params: &DandelionParams) -> Result<LossPmf> {
    let DandelionParams {
        n,
        alpha0,
        alpha,
        beta,
    } = *params;
    let log_w = (0..=n)
        .map(|l| {
            log_binomial_unchecked(n as u64, l as u64)
                + log_add_exp(
                    alpha * l as f64,
                    alpha0 + l as f64 * (alpha + beta),
                )
        })
        .collect();
    LossPmf::from_log_weights(n, log_w)
}

/// First and second moments the Dandelion solution fixes.
#[derive(Clone, Copy, Debug)]
pub struct DandelionMoments {
    /// Hub default probability.
    pub p0: f64,
    /// Peripheral default probability.
    pub p: f64,
    /// Joint hub-peripheral default probability.
    pub q: f64,
    /// Hub-peripheral default correlation.
    pub rho: f64,
}

/// Closed-form moments: Z = (1+e^alpha)^n + e^{alpha0} (1+e^{alpha+beta})^n,
/// evaluated with every factor kept in log space.
pub fn dandelion_moments(params: &DandelionParams) -> DandelionMoments {
    let DandelionParams {
        n,
        alpha0,
        alpha,
        beta,
    } = *params;
    let nf = n as f64;
    let log_z_off = nf * ln_1p_exp(alpha);
    let log_z_on = alpha0 + nf * ln_1p_exp(alpha + beta);
    let log_z = log_add_exp(log_z_off, log_z_on);
    let p0 = sigmoid(log_z_on - log_z_off);
    let p = (log_add_exp(
        (nf - 1.0) * ln_1p_exp(alpha) + alpha,
        alpha0 + (nf - 1.0) * ln_1p_exp(alpha + beta) + alpha + beta,
    ) - log_z)
        .exp();
    let q = p0 * sigmoid(alpha + beta);
    let rho = if beta == 0.0 {
        0.0
    } else {
        (q - p0 * p) / ((p0 * (1.0 - p0)).sqrt() * (p * (1.0 - p)).sqrt())
    };
    DandelionMoments { p0, p, q, rho }
}

/// Complete-graph pmf via the degeneracy sum:
/// P(l) = C(n,l) exp((alpha - beta/2) l + (beta/2) l^2) / Z.
pub fn diamond_pmf(params: &DiamondParams) -> Result<LossPmf> {
    let DiamondParams { n, alpha, beta } = *params;
    LossPmf::from_log_weights(n, diamond_log_weights(n, alpha, beta))
}

pub(crate) fn diamond_log_weights(n: usize, alpha: f64, beta: f64) -> Vec<f64> {
    (0..=n)
        .map(|l| {
            let lf = l as f64;
            log_binomial_unchecked(n as u64, l as u64)
                + (alpha - beta / 2.0) * lf
                + beta / 2.0 * lf * lf
        })
        .collect()
}

/// Moments the Diamond solution fixes.
#[derive(Clone, Copy, Debug)]
pub struct DiamondMoments {
    /// Common default probability.
    pub p: f64,
    /// Common joint default probability of any pair.
    pub q: f64,
    /// Common pairwise default correlation.
    pub rho: f64,
}

pub fn diamond_moments(params: &DiamondParams) -> Result<DiamondMoments> {
    let pmf = diamond_pmf(params)?;
    let n = params.n as f64;
    let mut e_l = 0.0;
    let mut e_pairs = 0.0;
    for l in 0..=params.n {
        let w = pmf.mass(l);
        let lf = l as f64;
        e_l += lf * w;
        e_pairs += lf * (lf - 1.0) / 2.0 * w;
    }
    let p = e_l / n;
    let q = e_pairs * 2.0 / (n * (n - 1.0));
    let rho = if params.beta == 0.0 {
        0.0
    } else {
        (q - p * p) / (p * (1.0 - p))
    };
    Ok(DiamondMoments { p, q, rho })
}

/// Mean loss rate E[l]/n and variance of the count.
pub fn moments_from_pmf(pmf: &LossPmf) -> (f64, f64) {
    (pmf.mean_rate(), pmf.variance_count())
}
