//! Parameter-uncertainty ensembles: re-solve the portfolio over a box of
//! estimation errors around the empirical inputs and label each member's
//! regime, so a thin tail produced by one point estimate can be recognized
//! as fragile.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::calibrate::{
    calibrate_dandelion, calibrate_diamond, calibrate_general, DandelionEmpirical,
    DiamondEmpirical, FitConfig,
};
use crate::core::{validate_portfolio, LossPmf, PortfolioSpec, ENUMERATION_CAP};
use crate::error::{JungleError, Result};
use crate::exact::{dandelion_pmf, diamond_pmf, DandelionParams};
use crate::math::{ln_1p_exp, log_add_exp, log_binomial_unchecked};
use crate::risk::{detect_peaks, scan_phase_grid, linspace, var_es, PhaseGrid};
use crate::sampler::enumerate_exact;

/// Uniform estimation-error box: every node probability shifts by one shared
/// dp draw and every listed correlation by one shared drho draw per member.
/// Sharing the draw across coordinates models systematic estimation error;
/// independent per-name noise would average out in large portfolios and
/// understate the model risk.
#[derive(Clone, Copy, Debug)]
pub struct UncertaintyBox {
    /// Half-width of the probability error, p_i +/- dp.
    pub dp: f64,
    /// Half-width of the correlation error, rho_ij +/- drho.
    pub drho: f64,
    /// Ensemble members to draw.
    pub samples: usize,
    pub seed: u64,
}

/// Qualitative regime of one ensemble member's loss distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegimeLabel {
    /// Single-peak loss distribution away from any abrupt transition.
    Unimodal,
    /// Single peak, but calibrated parameters sit within two grid cells of
    /// the scanned transition ridge; small input changes can flip the regime.
    NearTransition,
    /// Two coexisting peaks: a calm hump and a systemic hump.
    Bimodal,
}

impl std::fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RegimeLabel::Unimodal => "unimodal",
            RegimeLabel::NearTransition => "near_transition",
            RegimeLabel::Bimodal => "bimodal",
        };
        write!(f, "{s}")
    }
}

/// One solved ensemble member.
#[derive(Clone, Debug)]
pub struct EnsembleSample {
    /// Shared probability shift applied to every node.
    pub dp: f64,
    /// Shared correlation shift applied to every edge.
    pub drho: f64,
    pub var: f64,
    pub es: f64,
    pub n_modes: usize,
    pub label: RegimeLabel,
    /// Calibrated parameters, serialized for the CSV report.
    pub params_json: String,
}

/// Ensemble outcome: per-member rows plus the unperturbed baseline.
#[derive(Clone, Debug)]
pub struct EnsembleReport {
    pub confidence: f64,
    pub samples: Vec<EnsembleSample>,
    /// Members abandoned after the per-member resample budget (100 draws)
    /// produced no feasible input set.
    pub skipped: usize,
    pub baseline_var: f64,
    pub baseline_es: f64,
}

impl EnsembleReport {
    pub fn count(&self, label: RegimeLabel) -> usize {
        self.samples.iter().filter(|s| s.label == label).count()
    }

    /// Distinct labels present, in severity order.
    pub fn label_set(&self) -> Vec<RegimeLabel> {
        [
            RegimeLabel::Unimodal,
            RegimeLabel::NearTransition,
            RegimeLabel::Bimodal,
        ]
        .into_iter()
        .filter(|&l| self.count(l) > 0)
        .collect()
    }

    pub fn var_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &self.samples {
            lo = lo.min(s.var);
            hi = hi.max(s.var);
        }
        (lo, hi)
    }

    pub fn es_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &self.samples {
            lo = lo.min(s.es);
            hi = hi.max(s.es);
        }
        (lo, hi)
    }

    /// Spread of VaR across the ensemble, the headline model-risk number.
    pub fn dispersion(&self) -> f64 {
        let (lo, hi) = self.var_range();
        hi - lo
    }

    /// True when any member lands in the bimodal (systemic) regime.
    pub fn any_systemic(&self) -> bool {
        self.count(RegimeLabel::Bimodal) > 0
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Topology {
    Star,
    Complete,
    General,
}

const RESAMPLE_BUDGET: usize = 100;
const NEAR_TRANSITION_CELLS: f64 = 2.0;
const SCAN_RESOLUTION: usize = 64;

struct SolvedMember {
    dp: f64,
    drho: f64,
    var: f64,
    es: f64,
    n_modes: usize,
    params_json: String,
    /// Complete-graph coordinates for ridge-distance labeling.
    diamond_ab: Option<(f64, f64)>,
}

/// Draw `box.samples` perturbed portfolios, re-calibrate and re-solve each,
/// and label regimes. Infeasible draws are resampled (up to 100 per member);
/// members that exhaust the budget are counted in `skipped`.
pub fn run_ensemble(
    spec: &PortfolioSpec,
    bbox: &UncertaintyBox,
    confidence: f64,
) -> Result<EnsembleReport> {
    if bbox.samples == 0 {
        return Err(JungleError::Config("ensemble needs at least 1 sample".into()));
    }
    for (name, v) in [("dp", bbox.dp), ("drho", bbox.drho)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(JungleError::Config(format!(
                "uncertainty half-width {name} = {v} must be finite and >= 0"
            )));
        }
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(JungleError::Domain(format!(
            "confidence {confidence} must lie strictly inside (0,1)"
        )));
    }
    let report = validate_portfolio(spec);
    if !report.is_empty() {
        return Err(JungleError::InvalidPortfolio(report));
    }
    let topology = if spec.is_uniform_star() {
        Topology::Star
    } else if spec.is_uniform_complete() {
        Topology::Complete
    } else {
        Topology::General
    };
    if topology == Topology::General && spec.n() > ENUMERATION_CAP {
        return Err(JungleError::Config(format!(
            "ensemble on an irregular topology enumerates states and needs n <= {ENUMERATION_CAP}; got n = {}",
            spec.n()
        )));
    }

    let baseline = solve_member(spec, topology, confidence)?;

    let mut rng = ChaCha8Rng::seed_from_u64(bbox.seed);
    let mut members: Vec<SolvedMember> = Vec::with_capacity(bbox.samples);
    let mut skipped = 0usize;
    for _ in 0..bbox.samples {
        let mut solved = None;
        for _ in 0..RESAMPLE_BUDGET {
            let dp = rng.gen_range(-bbox.dp..=bbox.dp);
            let drho = rng.gen_range(-bbox.drho..=bbox.drho);
            let Ok(stressed) = spec.stressed(dp, drho) else {
                continue;
            };
            match solve_member(&stressed, topology, confidence) {
                Ok(mut m) => {
                    m.dp = dp;
                    m.drho = drho;
                    solved = Some(m);
                    break;
                }
                Err(
                    JungleError::CalibrationDomain(_)
                    | JungleError::NonConvergence { .. }
                    | JungleError::InvalidPortfolio(_),
                ) => continue,
                Err(e) => return Err(e),
            }
        }
        match solved {
            Some(m) => members.push(m),
            None => skipped += 1,
        }
    }

    // Ridge-distance labels need the scan window to cover every member.
    let grid: Option<PhaseGrid> = if topology == Topology::Complete {
        let coords: Vec<(f64, f64)> = members.iter().filter_map(|m| m.diamond_ab).collect();
        if coords.is_empty() {
            None
        } else {
            let a_lo = coords.iter().map(|c| c.0).fold(-6.0, f64::min) - 0.5;
            let a_hi = coords.iter().map(|c| c.0).fold(2.0, f64::max) + 0.5;
            let b_lo = coords.iter().map(|c| c.1).fold(0.0, f64::min) - 0.02;
            let b_hi = coords.iter().map(|c| c.1).fold(0.2, f64::max) + 0.05;
            Some(scan_phase_grid(
                spec.n(),
                &linspace(a_lo, a_hi, SCAN_RESOLUTION),
                &linspace(b_lo, b_hi, SCAN_RESOLUTION),
            )?)
        }
    } else {
        None
    };

    let samples = members
        .into_iter()
        .map(|m| {
            let label = if m.n_modes > 1 {
                RegimeLabel::Bimodal
            } else if let (Some(grid), Some((a, b))) = (&grid, m.diamond_ab) {
                match grid.ridge_distance_cells(a, b) {
                    Some(d) if d <= NEAR_TRANSITION_CELLS => RegimeLabel::NearTransition,
                    _ => RegimeLabel::Unimodal,
                }
            } else {
                RegimeLabel::Unimodal
            };
            EnsembleSample {
                dp: m.dp,
                drho: m.drho,
                var: m.var,
                es: m.es,
                n_modes: m.n_modes,
                label,
                params_json: m.params_json,
            }
        })
        .collect();

    Ok(EnsembleReport {
        confidence,
        samples,
        skipped,
        baseline_var: baseline.var,
        baseline_es: baseline.es,
    })
}

fn solve_member(
    spec: &PortfolioSpec,
    topology: Topology,
    confidence: f64,
) -> Result<SolvedMember> {
    let (pmf, params_json, diamond_ab) = match topology {
        Topology::Star => {
            let n_peripheral = spec.n() - 1;
            let emp = DandelionEmpirical {
                n: n_peripheral,
                p: spec.p()[1],
                p0: spec.p()[0],
                rho: *spec.rho().values().next().expect("star has edges"),
            };
            let cal = calibrate_dandelion(&emp)?;
            let json = json!({
                "model": "dandelion",
                "n_peripheral": n_peripheral,
                "alpha0": cal.params.alpha0,
                "alpha": cal.params.alpha,
                "beta": cal.params.beta,
            });
            (dandelion_pmf(&cal.params)?, json.to_string(), None)
        }
        Topology::Complete => {
            let emp = DiamondEmpirical {
                n: spec.n(),
                p: spec.p()[0],
                rho: *spec.rho().values().next().expect("complete graph has edges"),
            };
            let cal = calibrate_diamond(&emp)?;
            let json = json!({
                "model": "diamond",
                "n": spec.n(),
                "alpha": cal.params.alpha,
                "beta": cal.params.beta,
            });
            (
                diamond_pmf(&cal.params)?,
                json.to_string(),
                Some((cal.params.alpha, cal.params.beta)),
            )
        }
        Topology::General => {
            let cal = calibrate_general(spec, &FitConfig::default())?;
            let json = json!({
                "model": "general",
                "alpha": cal.params.alpha(),
                "beta": cal.params.beta().iter().map(|(e, &b)| {
                    json!({"i": e.i(), "j": e.j(), "beta": b})
                }).collect::<Vec<_>>(),
            });
            (enumerate_exact(&cal.params)?.pmf, json.to_string(), None)
        }
    };
    let (var, es) = var_es(&pmf, confidence)?;
    let n_modes = detect_peaks(&pmf).len();
    Ok(SolvedMember {
        dp: 0.0,
        drho: 0.0,
        var,
        es,
        n_modes,
        params_json,
        diamond_ab,
    })
}

/// The hub-and-spokes loss law written as a two-point frailty mixture:
/// with probability 1-p0 the peripheral count is binomial at sigma(alpha),
/// with probability p0 it is binomial at sigma(alpha + beta). This equals
/// the count pmf exactly and is the bridge to classical mixture models.
pub fn mixture_pmf(params: &DandelionParams) -> Result<LossPmf> {
    let DandelionParams {
        n,
        alpha0,
        alpha,
        beta,
    } = *params;
    let nf = n as f64;
    // log-odds of the hub default; p0 itself may underflow either way.
    let x = alpha0 + nf * ln_1p_exp(alpha + beta) - nf * ln_1p_exp(alpha);
    let (ln_p0, ln_1m_p0) = (-ln_1p_exp(-x), -ln_1p_exp(x));
    let (calm_hi, calm_lo) = (-ln_1p_exp(-alpha), -ln_1p_exp(alpha));
    let hot = alpha + beta;
    let (hot_hi, hot_lo) = (-ln_1p_exp(-hot), -ln_1p_exp(hot));
    let log_w = (0..=n)
        .map(|l| {
            let lb = log_binomial_unchecked(n as u64, l as u64);
            let lf = l as f64;
            let calm = ln_1m_p0 + lb + lf * calm_hi + (nf - lf) * calm_lo;
            let stressed = ln_p0 + lb + lf * hot_hi + (nf - lf) * hot_lo;
            log_add_exp(calm, stressed)
        })
        .collect();
    LossPmf::from_log_weights(n, log_w)
}
