//! Inversion of empirical moments (default probabilities and correlations)
//! into model parameters.
//!
//! Three routes, by topology: closed forms for the hub-and-spokes model, a
//! damped Newton solve on the convex dual for the complete graph, and cyclic
//! exact coordinate maximization (enumeration gradients) or stochastic
//! approximation (sampled gradients) for arbitrary edge sets.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::core::{
    q_from_rho, validate_portfolio, Edge, JungleParams, PortfolioSpec, ENUMERATION_CAP,
};
use crate::error::{JungleError, Result};
use crate::exact::{
    dandelion_moments, diamond_log_weights, DandelionParams, DiamondParams,
};
use crate::math::{logit, sigmoid, LogSumAcc};

/// Outcome of a calibration: fitted parameters, the forward-checked residual,
/// iteration count, and any further distinct roots found by multi-start.
#[derive(Clone, Debug)]
pub struct CalibrationResult<P> {
    pub params: P,
    /// Max absolute error of the forward-evaluated constraints.
    pub residual: f64,
    pub iterations: usize,
    /// Distinct alternate roots (parameter distance > 1e-4); empty in
    /// practice because the moment-matching dual is strictly convex.
    pub alternates: Vec<P>,
}

impl<P> CalibrationResult<P> {
    pub fn multiple_roots(&self) -> bool {
        !self.alternates.is_empty()
    }
}

/// Empirical targets for the hub-and-spokes closed form.
#[derive(Clone, Copy, Debug)]
pub struct DandelionEmpirical {
    /// Peripheral node count.
    pub n: usize,
    /// Peripheral default probability.
    pub p: f64,
    /// Hub default probability.
    pub p0: f64,
    /// Hub-peripheral default correlation.
    pub rho: f64,
}

/// Empirical targets for the complete-graph solve.
#[derive(Clone, Copy, Debug)]
pub struct DiamondEmpirical {
    pub n: usize,
    pub p: f64,
    pub rho: f64,
}

const DISTINCT_ROOT_DISTANCE: f64 = 1e-4;

/// Closed-form hub-and-spokes calibration:
/// alpha0 = (n-1) ln((1-p0)/p0) + n ln((p0-q)/(1-p0-p+q)),
/// alpha  = ln((p-q)/(1-p0-p+q)),
/// beta   = ln(q (1-p0-p+q) / ((p0-q)(p-q))).
pub fn calibrate_dandelion(
    emp: &DandelionEmpirical,
) -> Result<CalibrationResult<DandelionParams>> {
    let DandelionEmpirical { n, p, p0, rho } = *emp;
    if n < 1 {
        return Err(JungleError::CalibrationDomain("n must be >= 1".into()));
    }
    for (name, v) in [("p", p), ("p0", p0)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(JungleError::CalibrationDomain(format!(
                "{name} = {v} must lie strictly inside (0,1)"
            )));
        }
    }
    if !(rho > -1.0 && rho < 1.0) {
        return Err(JungleError::CalibrationDomain(format!(
            "rho = {rho} must lie strictly inside (-1,1)"
        )));
    }

    // Independence short-circuit keeps beta at exactly 0.
    let params = if rho == 0.0 {
        DandelionParams::new(n, logit(p0), logit(p), 0.0)?
    } else {
        let q = q_from_rho(p, p0, rho);
        let one_minus = 1.0 - p0 - p + q;
        for (bracket, v) in [
            ("q", q),
            ("p0 - q", p0 - q),
            ("p - q", p - q),
            ("1 - p0 - p + q", one_minus),
        ] {
            if v <= 0.0 {
                return Err(JungleError::CalibrationDomain(format!(
                    "implied joint probability q = {q:.9} makes the bracket ({bracket}) = {v:.3e} non-positive"
                )));
            }
        }
        let nf = n as f64;
        let alpha0 =
            (nf - 1.0) * ((1.0 - p0) / p0).ln() + nf * ((p0 - q) / one_minus).ln();
        let alpha = ((p - q) / one_minus).ln();
        let beta = (q * one_minus / ((p0 - q) * (p - q))).ln();
        DandelionParams::new(n, alpha0, alpha, beta)?
    };

    let m = dandelion_moments(&params);
    let residual = (m.p0 - p0)
        .abs()
        .max((m.p - p).abs())
        .max((m.rho - rho).abs());
    if residual >= 1e-10 {
        return Err(JungleError::NonConvergence {
            iterations: 0,
            residual,
        });
    }
    Ok(CalibrationResult {
        params,
        residual,
        iterations: 0,
        alternates: Vec::new(),
    })
}

/// Tuning for the complete-graph Newton solve.
#[derive(Clone, Copy, Debug)]
pub struct DiamondOptions {
    /// Convergence tolerance measured directly in (p, rho) units.
    pub tol: f64,
    pub max_iter: usize,
    /// Re-solve from 4 corners of a parameter box to surface any alternate
    /// roots near the quasi-transition line.
    pub multistart: bool,
}

impl Default for DiamondOptions {
    fn default() -> Self {
        DiamondOptions {
            tol: 1e-10,
            max_iter: 200,
            multistart: true,
        }
    }
}

/// Numerical complete-graph calibration with default options.
pub fn calibrate_diamond(emp: &DiamondEmpirical) -> Result<CalibrationResult<DiamondParams>> {
    calibrate_diamond_with(emp, &DiamondOptions::default())
}

pub fn calibrate_diamond_with(
    emp: &DiamondEmpirical,
    opts: &DiamondOptions,
) -> Result<CalibrationResult<DiamondParams>> {
    let DiamondEmpirical { n, p, rho } = *emp;
    if n < 2 {
        return Err(JungleError::CalibrationDomain("n must be >= 2".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(JungleError::CalibrationDomain(format!(
            "p = {p} must lie strictly inside (0,1)"
        )));
    }
    let q = rho * p * (1.0 - p) + p * p;
    let (q_lo, q_hi) = ((2.0 * p - 1.0).max(0.0), p);
    if !(q > q_lo && q < q_hi) {
        return Err(JungleError::CalibrationDomain(format!(
            "implied q = {q:.9} outside the feasible window ({q_lo:.9}, {q_hi:.9})"
        )));
    }

    if rho == 0.0 {
        // Independence short-circuit: exact solution, beta exactly 0.
        let params = DiamondParams::new(n, logit(p), 0.0)?;
        return Ok(CalibrationResult {
            params,
            residual: 0.0,
            iterations: 0,
            alternates: Vec::new(),
        });
    }

    let primary = newton_diamond(n, p, q, logit(p), 0.0, opts.tol, opts.max_iter)
        .or_else(|_| bisection_diamond(n, p, q, opts.tol))?;

    let mut alternates = Vec::new();
    if opts.multistart {
        let a0 = logit(p);
        let nf = n as f64;
        for (da, b0) in [
            (-2.0, -4.0 / nf),
            (-2.0, 8.0 / nf),
            (2.0, -4.0 / nf),
            (2.0, 8.0 / nf),
        ] {
            if let Ok(other) = newton_diamond(n, p, q, a0 + da, b0, opts.tol, opts.max_iter) {
                let distance = (other.0.alpha - primary.0.alpha)
                    .hypot(other.0.beta - primary.0.beta);
                let known = alternates.iter().any(|alt: &DiamondParams| {
                    (other.0.alpha - alt.alpha).hypot(other.0.beta - alt.beta)
                        <= DISTINCT_ROOT_DISTANCE
                });
                if distance > DISTINCT_ROOT_DISTANCE && !known {
                    alternates.push(other.0);
                }
            }
        }
    }

    Ok(CalibrationResult {
        params: primary.0,
        residual: primary.1,
        iterations: primary.2,
        alternates,
    })
}

/// Moments and sufficient-statistic covariance of the count distribution at
/// (alpha, beta): stats are t1 = l and t2 = l(l-1)/2.
fn diamond_stats(n: usize, alpha: f64, beta: f64) -> (f64, f64, [f64; 3], f64) {
    let log_w = diamond_log_weights(n, alpha, beta);
    let mut acc = LogSumAcc::new();
    for &w in &log_w {
        acc.add(w);
    }
    let log_z = acc.value();
    let (mut m1, mut m2) = (0.0, 0.0);
    let (mut s11, mut s12, mut s22) = (0.0, 0.0, 0.0);
    for (l, &w) in log_w.iter().enumerate() {
        let mass = (w - log_z).exp();
        let t1 = l as f64;
        let t2 = t1 * (t1 - 1.0) / 2.0;
        m1 += t1 * mass;
        m2 += t2 * mass;
        s11 += t1 * t1 * mass;
        s12 += t1 * t2 * mass;
        s22 += t2 * t2 * mass;
    }
    let cov = [s11 - m1 * m1, s12 - m1 * m2, s22 - m2 * m2];
    (m1, m2, cov, log_z)
}

fn diamond_residual(n: usize, m1: f64, m2: f64, p: f64, q: f64) -> f64 {
    let nf = n as f64;
    let p_hat = m1 / nf;
    let q_hat = m2 * 2.0 / (nf * (nf - 1.0));
    let rho = (q - p * p) / (p * (1.0 - p));
    let rho_hat = (q_hat - p_hat * p_hat) / (p * (1.0 - p));
    (p_hat - p).abs().max((rho_hat - rho).abs())
}

/// Damped Newton on the dual f(theta) = log Z(theta) - theta . T, whose
/// gradient is (moments - targets) and whose Hessian is the statistic
/// covariance. Strict convexity makes the root unique.
fn newton_diamond(
    n: usize,
    p: f64,
    q: f64,
    alpha0: f64,
    beta0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(DiamondParams, f64, usize)> {
    let nf = n as f64;
    let t1 = nf * p;
    let t2 = nf * (nf - 1.0) / 2.0 * q;
    let (mut alpha, mut beta) = (alpha0, beta0);
    let (mut m1, mut m2, mut cov, mut log_z) = diamond_stats(n, alpha, beta);
    let mut best_residual = f64::INFINITY;
    for iter in 1..=max_iter {
        let residual = diamond_residual(n, m1, m2, p, q);
        best_residual = best_residual.min(residual);
        if residual < tol {
            return Ok((DiamondParams::new(n, alpha, beta)?, residual, iter - 1));
        }
        let g = [m1 - t1, m2 - t2];
        // 2x2 solve H d = g.
        let det = cov[0] * cov[2] - cov[1] * cov[1];
        if !(det > 0.0) || !det.is_finite() {
            break;
        }
        let d = [
            (cov[2] * g[0] - cov[1] * g[1]) / det,
            (cov[0] * g[1] - cov[1] * g[0]) / det,
        ];
        let f0 = log_z - alpha * t1 - beta * t2;
        let slope = g[0] * d[0] + g[1] * d[1];
        let mut step = 1.0;
        loop {
            let (na, nb) = (alpha - step * d[0], beta - step * d[1]);
            let (nm1, nm2, ncov, nlz) = diamond_stats(n, na, nb);
            let f1 = nlz - na * t1 - nb * t2;
            if f1 <= f0 - 1e-4 * step * slope || step < 1e-8 {
                alpha = na;
                beta = nb;
                m1 = nm1;
                m2 = nm2;
                cov = ncov;
                log_z = nlz;
                break;
            }
            step *= 0.5;
        }
    }
    Err(JungleError::NonConvergence {
        iterations: max_iter,
        residual: best_residual,
    })
}

/// Fallback: outer bisection in beta matching rho, with a nested bisection in
/// alpha matching p at each beta. Slow but monotone-safe when Newton stalls.
fn bisection_diamond(
    n: usize,
    p: f64,
    q: f64,
    tol: f64,
) -> Result<(DiamondParams, f64, usize)> {
    let nf = n as f64;
    let alpha_for = |beta: f64| -> f64 {
        let (mut lo, mut hi) = (-80.0, 40.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let (m1, _, _, _) = diamond_stats(n, mid, beta);
            if m1 / nf < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let q_at = |beta: f64| -> f64 {
        let (_, m2, _, _) = diamond_stats(n, alpha_for(beta), beta);
        m2 * 2.0 / (nf * (nf - 1.0))
    };
    // Bracket the target q; q is increasing in beta at fixed p.
    let (mut lo, mut hi) = (-8.0 / nf, 8.0 / nf);
    let mut grow = 0;
    while q_at(lo) > q {
        lo *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err(JungleError::NonConvergence {
                iterations: grow,
                residual: f64::INFINITY,
            });
        }
    }
    while q_at(hi) < q {
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err(JungleError::NonConvergence {
                iterations: grow,
                residual: f64::INFINITY,
            });
        }
    }
    let mut iterations = 0;
    for _ in 0..200 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if q_at(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * (1.0 + hi.abs()) {
            break;
        }
    }
    let beta = 0.5 * (lo + hi);
    let alpha = alpha_for(beta);
    let (m1, m2, _, _) = diamond_stats(n, alpha, beta);
    let residual = diamond_residual(n, m1, m2, p, q);
    if residual < tol.max(1e-9) {
        Ok((DiamondParams::new(n, alpha, beta)?, residual, iterations))
    } else {
        Err(JungleError::NonConvergence {
            iterations,
            residual,
        })
    }
}

/// Gradient source for the general inverter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FitMode {
    /// Pick by size: exact enumeration up to the threshold, sampled above.
    #[default]
    Auto,
    Exact,
    Sampled,
}

/// Settings for [`calibrate_general`].
#[derive(Clone, Debug)]
pub struct FitConfig {
    pub mode: FitMode,
    /// Convergence tolerance; defaults to 1e-6 (exact) or 1e-3 (sampled).
    /// Sampled mode can only certify a residual down to its sampling noise,
    /// so there the tolerance acts as an early-exit threshold.
    pub tol: Option<f64>,
    /// Sweep / iteration budget; defaults to 2000 (exact) or 1200 (sampled).
    pub max_iter: Option<usize>,
    /// Largest n solved by full enumeration in Auto mode.
    pub enumeration_threshold: usize,
    pub seed: u64,
    /// Persistent Gibbs chains for sampled gradients.
    pub chains: usize,
    /// Sweeps recorded per chain per iteration (grows as iterations accrue).
    pub sweeps_per_iter: usize,
    /// Per-chain sweeps of the final evaluation pass that measures the
    /// reported residual in sampled mode.
    pub eval_sweeps: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            mode: FitMode::Auto,
            tol: None,
            max_iter: None,
            enumeration_threshold: 20,
            seed: 0,
            chains: 8,
            sweeps_per_iter: 5,
            eval_sweeps: 5000,
        }
    }
}

/// Fit per-node fields and per-edge couplings so model moments match the
/// portfolio's p_i on every node and q_ij on every listed edge. Pairs without
/// a listed correlation are left unconstrained, which the maximum-entropy
/// solution answers with a zero coupling.
pub fn calibrate_general(
    spec: &PortfolioSpec,
    config: &FitConfig,
) -> Result<CalibrationResult<JungleParams>> {
    let report = validate_portfolio(spec);
    if !report.is_empty() {
        return Err(JungleError::InvalidPortfolio(report));
    }
    let n = spec.n();
    let exact = match config.mode {
        FitMode::Exact => true,
        FitMode::Sampled => false,
        FitMode::Auto => n <= config.enumeration_threshold.min(ENUMERATION_CAP),
    };
    if exact && n > ENUMERATION_CAP {
        return Err(JungleError::EnumerationTooLarge {
            n,
            cap: ENUMERATION_CAP,
        });
    }
    let q_targets: BTreeMap<Edge, f64> = spec
        .rho()
        .iter()
        .map(|(&e, &r)| (e, q_from_rho(spec.p()[e.i()], spec.p()[e.j()], r)))
        .collect();
    if exact {
        calibrate_exact(spec, &q_targets, config)
    } else {
        calibrate_sampled(spec, &q_targets, config)
    }
}

/// Cyclic exact coordinate maximization over the enumerated state space.
///
/// For one coordinate the dual restricted to its shift d is exactly logistic:
/// with S1/S0 the log partition sums over states where the coordinate's
/// statistic is 1/0, the optimum is d = logit(target) - (S1 - S0). Each sweep
/// applies that closed-form update to every field and coupling in turn.
fn calibrate_exact(
    spec: &PortfolioSpec,
    q_targets: &BTreeMap<Edge, f64>,
    config: &FitConfig,
) -> Result<CalibrationResult<JungleParams>> {
    let n = spec.n();
    let tol = config.tol.unwrap_or(1e-6);
    let max_sweeps = config.max_iter.unwrap_or(2000);
    let size: usize = 1 << n;

    let mut params = JungleParams::independent(spec.p())?;
    for &e in q_targets.keys() {
        params.beta_mut().insert(e, 0.0);
    }
    // log-weight per state under the current parameters; independent start.
    let mut log_w = vec![0.0f64; size];
    for mask in 0..size {
        let mut w = 0.0;
        for i in 0..n {
            if mask >> i & 1 == 1 {
                w += params.alpha()[i];
            }
        }
        log_w[mask] = w;
    }

    let edges: Vec<Edge> = q_targets.keys().copied().collect();
    let mut best_residual = f64::INFINITY;
    for sweep in 1..=max_sweeps {
        for i in 0..n {
            let delta = coordinate_shift(&log_w, spec.p()[i], |mask| mask >> i & 1 == 1);
            if delta != 0.0 {
                params.alpha_mut()[i] += delta;
                for (mask, w) in log_w.iter_mut().enumerate() {
                    if mask >> i & 1 == 1 {
                        *w += delta;
                    }
                }
            }
        }
        for &e in &edges {
            let (bi, bj) = (e.i(), e.j());
            let delta = coordinate_shift(&log_w, q_targets[&e], |mask| {
                mask >> bi & 1 == 1 && mask >> bj & 1 == 1
            });
            if delta != 0.0 {
                *params.beta_mut().get_mut(&e).unwrap() += delta;
                for (mask, w) in log_w.iter_mut().enumerate() {
                    if mask >> bi & 1 == 1 && mask >> bj & 1 == 1 {
                        *w += delta;
                    }
                }
            }
        }
        let residual = exact_residual(&log_w, spec.p(), q_targets);
        best_residual = best_residual.min(residual);
        if residual < tol {
            return Ok(CalibrationResult {
                params,
                residual,
                iterations: sweep,
                alternates: Vec::new(),
            });
        }
    }
    Err(JungleError::NonConvergence {
        iterations: max_sweeps,
        residual: best_residual,
    })
}

/// logit(target) - (S1 - S0) for one coordinate, streaming over all states.
fn coordinate_shift<F: Fn(usize) -> bool>(log_w: &[f64], target: f64, active: F) -> f64 {
    let mut s0 = LogSumAcc::new();
    let mut s1 = LogSumAcc::new();
    for (mask, &w) in log_w.iter().enumerate() {
        if active(mask) {
            s1.add(w);
        } else {
            s0.add(w);
        }
    }
    logit(target) - (s1.value() - s0.value())
}

fn exact_residual(log_w: &[f64], p: &[f64], q_targets: &BTreeMap<Edge, f64>) -> f64 {
    let n = p.len();
    let mut acc = LogSumAcc::new();
    for &w in log_w {
        acc.add(w);
    }
    let log_z = acc.value();
    let mut node_m = vec![0.0f64; n];
    let mut edge_m: BTreeMap<Edge, f64> = q_targets.keys().map(|&e| (e, 0.0)).collect();
    for (mask, &w) in log_w.iter().enumerate() {
        let mass = (w - log_z).exp();
        let mut bits = mask;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            node_m[i] += mass;
            bits &= bits - 1;
        }
        for (e, m) in edge_m.iter_mut() {
            if mask >> e.i() & 1 == 1 && mask >> e.j() & 1 == 1 {
                *m += mass;
            }
        }
    }
    let mut residual = 0.0f64;
    for i in 0..n {
        residual = residual.max((node_m[i] - p[i]).abs());
    }
    for (e, q) in q_targets {
        residual = residual.max((edge_m[e] - q).abs());
    }
    residual
}

/// Robbins-Monro moment matching with persistent Gibbs chains.
///
/// The step decays and the per-iteration batch grows over a fixed budget;
/// the returned parameters are the tail average of the last quarter of the
/// schedule, which smooths the residual stochastic wobble. A dedicated
/// evaluation pass at the averaged parameters measures the reported
/// residual; that estimate carries its own sampling noise of order
/// 1/sqrt(chains * eval_sweeps), which is why exact mode owns the tight
/// tolerances and sampled mode is the large-n fallback.
fn calibrate_sampled(
    spec: &PortfolioSpec,
    q_targets: &BTreeMap<Edge, f64>,
    config: &FitConfig,
) -> Result<CalibrationResult<JungleParams>> {
    let n = spec.n();
    let tol = config.tol.unwrap_or(1e-3);
    let max_iter = config.max_iter.unwrap_or(1200).max(8);
    let chains = config.chains.max(2);

    let mut params = JungleParams::independent(spec.p())?;
    for &e in q_targets.keys() {
        params.beta_mut().insert(e, 0.0);
    }
    let edges: Vec<Edge> = q_targets.keys().copied().collect();

    let mut rngs: Vec<ChaCha8Rng> = (0..chains)
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(0x5A17 + c as u64);
            rng
        })
        .collect();
    let mut states: Vec<Vec<u8>> = rngs
        .iter_mut()
        .map(|rng| {
            (0..n)
                .map(|i| u8::from(rng.gen::<f64>() < spec.p()[i]))
                .collect()
        })
        .collect();

    let mut adj = params.adjacency();
    // Warm the chains before the first gradient estimate.
    for (state, rng) in states.iter_mut().zip(rngs.iter_mut()) {
        for _ in 0..50 {
            gibbs_sweep(&params, &adj, state, rng);
        }
    }

    let tail_start = max_iter - max_iter / 4;
    let mut tail_alpha = vec![0.0f64; n];
    let mut tail_beta = vec![0.0f64; edges.len()];
    let mut tail_count = 0usize;
    let mut smoothed = f64::INFINITY;
    let mut iterations = 0;
    for k in 0..max_iter {
        iterations = k + 1;
        let sweeps = config.sweeps_per_iter + k / 6;
        let mut node_acc = vec![0.0f64; n];
        let mut edge_acc = vec![0.0f64; edges.len()];
        let mut samples = 0usize;
        for (state, rng) in states.iter_mut().zip(rngs.iter_mut()) {
            for _ in 0..sweeps {
                gibbs_sweep(&params, &adj, state, rng);
                samples += 1;
                for i in 0..n {
                    node_acc[i] += f64::from(state[i]);
                }
                for (t, e) in edges.iter().enumerate() {
                    edge_acc[t] += f64::from(state[e.i()] & state[e.j()]);
                }
            }
        }
        let floor = 0.5 / samples as f64;
        let eta = 0.5 / (1.0 + k as f64 / 40.0);
        let mut residual = 0.0f64;
        for i in 0..n {
            let m = (node_acc[i] / samples as f64).clamp(floor, 1.0 - floor);
            residual = residual.max((m - spec.p()[i]).abs());
            params.alpha_mut()[i] += eta * (logit(spec.p()[i]) - logit(m));
        }
        for (t, e) in edges.iter().enumerate() {
            let m = (edge_acc[t] / samples as f64).clamp(floor, 1.0 - floor);
            residual = residual.max((m - q_targets[e]).abs());
            *params.beta_mut().get_mut(e).unwrap() += eta * (logit(q_targets[e]) - logit(m));
        }
        adj = params.adjacency();
        smoothed = if smoothed.is_finite() {
            0.9 * smoothed + 0.1 * residual
        } else {
            residual
        };
        if k >= tail_start {
            tail_count += 1;
            for i in 0..n {
                tail_alpha[i] += params.alpha()[i];
            }
            for (t, e) in edges.iter().enumerate() {
                tail_beta[t] += params.beta()[e];
            }
        }
        // Residuals below the tolerance can only happen when sampling noise
        // is already negligible (for example, an edge-free system).
        if k > 50 && smoothed < tol {
            break;
        }
    }
    if tail_count > 0 {
        for i in 0..n {
            params.alpha_mut()[i] = tail_alpha[i] / tail_count as f64;
        }
        for (t, e) in edges.iter().enumerate() {
            *params.beta_mut().get_mut(e).unwrap() = tail_beta[t] / tail_count as f64;
        }
        adj = params.adjacency();
    }

    // Evaluation pass: long run at frozen parameters.
    let mut node_acc = vec![0.0f64; n];
    let mut edge_acc = vec![0.0f64; edges.len()];
    let mut samples = 0usize;
    for (state, rng) in states.iter_mut().zip(rngs.iter_mut()) {
        for _ in 0..config.eval_sweeps.max(100) {
            gibbs_sweep(&params, &adj, state, rng);
            samples += 1;
            for i in 0..n {
                node_acc[i] += f64::from(state[i]);
            }
            for (t, e) in edges.iter().enumerate() {
                edge_acc[t] += f64::from(state[e.i()] & state[e.j()]);
            }
        }
    }
    let mut residual = 0.0f64;
    for i in 0..n {
        residual = residual.max((node_acc[i] / samples as f64 - spec.p()[i]).abs());
    }
    for (t, e) in edges.iter().enumerate() {
        residual = residual.max((edge_acc[t] / samples as f64 - q_targets[e]).abs());
    }
    // Only flag runs that are broken outright, far beyond sampling noise.
    if residual > (20.0 * tol).max(0.05) {
        return Err(JungleError::NonConvergence {
            iterations,
            residual,
        });
    }
    Ok(CalibrationResult {
        params,
        residual,
        iterations,
        alternates: Vec::new(),
    })
}

/// One in-order heat-bath sweep, shared with the sampled-mode inverter.
pub(crate) fn gibbs_sweep(
    params: &JungleParams,
    adj: &[Vec<(usize, f64)>],
    state: &mut [u8],
    rng: &mut ChaCha8Rng,
) {
    for i in 0..state.len() {
        let mut field = params.alpha()[i];
        for &(j, b) in &adj[i] {
            if state[j] != 0 {
                field += b;
            }
        }
        state[i] = u8::from(rng.gen::<f64>() < sigmoid(field));
    }
}
