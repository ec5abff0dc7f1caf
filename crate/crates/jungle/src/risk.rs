//! Risk measures on loss distributions and the phase-structure scan used to
//! locate abrupt-transition regions in the (alpha, beta) plane.

use crate::core::LossPmf;
use crate::error::{JungleError, Result};
use crate::exact::{diamond_moments, DiamondParams};
use crate::par::par_collect;

/// One local maximum of a loss pmf.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    /// Default count at the peak (plateau midpoint if flat).
    pub count: usize,
    /// count / n.
    pub loss_fraction: f64,
    /// Probability mass at the peak itself.
    pub mass: f64,
    /// Topographic prominence: height above the highest saddle that
    /// separates this peak from higher ground (own height for the global
    /// maximum).
    pub prominence: f64,
}

/// Tail risk summary of an exact loss distribution.
#[derive(Clone, Debug)]
pub struct RiskReport {
    pub confidence: f64,
    /// Value-at-risk as a loss fraction.
    pub var: f64,
    /// Expected shortfall as a loss fraction, including the quantile atom.
    pub es: f64,
    pub mean: f64,
    pub modes: Vec<Mode>,
}

impl RiskReport {
    /// Distinct peaks signal coexisting calm and systemic regimes.
    pub fn is_multimodal(&self) -> bool {
        self.modes.len() > 1
    }
}

/// Value-at-risk and expected shortfall of a count pmf, both as loss
/// fractions. VaR is the smallest fraction whose cumulative probability
/// reaches `confidence`; ES averages the tail from the VaR count up,
/// including the probability atom sitting exactly at the quantile.
pub fn var_es(pmf: &LossPmf, confidence: f64) -> Result<(f64, f64)> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(JungleError::Domain(format!(
            "confidence {confidence} must lie strictly inside (0,1)"
        )));
    }
    let n = pmf.n_units();
    let mut cdf = 0.0;
    let mut var_count = n;
    for l in 0..=n {
        cdf += pmf.mass(l);
        if cdf >= confidence {
            var_count = l;
            break;
        }
    }
    let mut tail_mass = 0.0;
    let mut tail_loss = 0.0;
    for l in var_count..=n {
        let m = pmf.mass(l);
        tail_mass += m;
        tail_loss += m * l as f64;
    }
    let var = var_count as f64 / n as f64;
    let es = tail_loss / tail_mass / n as f64;
    Ok((var, es))
}

/// Compute VaR/ES and the mode structure in one pass.
pub fn risk_report(pmf: &LossPmf, confidence: f64) -> Result<RiskReport> {
    let (var, es) = var_es(pmf, confidence)?;
    Ok(RiskReport {
        confidence,
        var,
        es,
        mean: pmf.mean_rate(),
        modes: detect_peaks(pmf),
    })
}

/// Neighborhood mass below which a peak is treated as numerical dust.
const PEAK_MASS_FLOOR: f64 = 1e-6;

/// Find the local maxima of a pmf.
///
/// Runs of exactly equal mass collapse to one candidate at the plateau
/// midpoint. A candidate must carry at least `1e-6` probability within two
/// bins of the peak, which silences spurious maxima deep in exponent
/// underflow territory. Prominence is measured topographically so a shoulder
/// on the flank of a taller peak never counts as a separate mode.
pub fn detect_peaks(pmf: &LossPmf) -> Vec<Mode> {
    let masses = pmf.masses();
    let n = masses.len();
    let mut candidates: Vec<(usize, usize)> = Vec::new(); // plateau [start, end]
    let mut start = 0;
    for k in 1..=n {
        if k < n && masses[k] == masses[start] {
            continue;
        }
        let left_lower = start == 0 || masses[start - 1] < masses[start];
        let right_lower = k == n || masses[k] < masses[start];
        if left_lower && right_lower {
            candidates.push((start, k - 1));
        }
        start = k;
    }

    let mut modes = Vec::new();
    for (a, b) in candidates {
        let loc = (a + b) / 2;
        let height = masses[loc];
        let window: f64 = masses[loc.saturating_sub(2)..(loc + 3).min(n)].iter().sum();
        if window < PEAK_MASS_FLOOR {
            continue;
        }
        // Walk each side toward the nearest higher ground, tracking the
        // lowest point passed; the higher of the two valley floors is the
        // key col.
        let mut key_col = f64::NEG_INFINITY;
        let mut bounded = false;
        let mut valley = height;
        for k in (0..a).rev() {
            valley = valley.min(masses[k]);
            if masses[k] > height {
                key_col = key_col.max(valley);
                bounded = true;
                break;
            }
        }
        valley = height;
        for k in (b + 1)..n {
            valley = valley.min(masses[k]);
            if masses[k] > height {
                key_col = key_col.max(valley);
                bounded = true;
                break;
            }
        }
        let prominence = if bounded { height - key_col } else { height };
        if prominence <= 0.0 {
            continue;
        }
        modes.push(Mode {
            count: loc,
            loss_fraction: loc as f64 / pmf.n_units() as f64,
            mass: height,
            prominence,
        });
    }
    modes
}

/// Gradient map of the complete-graph moments over an (alpha, beta) window,
/// with the detected transition ridge and its endpoint.
#[derive(Clone, Debug)]
pub struct PhaseGrid {
    alpha_axis: Vec<f64>,
    beta_axis: Vec<f64>,
    n: usize,
    /// Row-major over (alpha index, beta index).
    p: Vec<f64>,
    rho: Vec<f64>,
    grad_norm: Vec<f64>,
    /// Ridge samples as (alpha index, beta index), ascending in alpha.
    ridge: Vec<(usize, usize)>,
    critical_point: Option<(f64, f64)>,
}

impl PhaseGrid {
    pub fn alpha_axis(&self) -> &[f64] {
        &self.alpha_axis
    }

    pub fn beta_axis(&self) -> &[f64] {
        &self.beta_axis
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.beta_axis.len() + j
    }

    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.p[self.idx(i, j)]
    }

    pub fn rho(&self, i: usize, j: usize) -> f64 {
        self.rho[self.idx(i, j)]
    }

    pub fn grad_norm(&self, i: usize, j: usize) -> f64 {
        self.grad_norm[self.idx(i, j)]
    }

    pub fn ridge(&self) -> &[(usize, usize)] {
        &self.ridge
    }

    pub fn on_ridge(&self, i: usize, j: usize) -> bool {
        self.ridge.iter().any(|&(a, b)| a == i && b == j)
    }

    /// Estimated end of the abrupt-transition ridge, if the gradient decays
    /// below half its maximum inside the window.
    pub fn critical_point(&self) -> Option<(f64, f64)> {
        self.critical_point
    }

    /// Distance from a point to the nearest ridge sample, in grid-cell units
    /// (each axis scaled by its mean spacing). None when no ridge was found.
    pub fn ridge_distance_cells(&self, alpha: f64, beta: f64) -> Option<f64> {
        if self.ridge.is_empty() {
            return None;
        }
        let da = spacing(&self.alpha_axis);
        let db = spacing(&self.beta_axis);
        self.ridge
            .iter()
            .map(|&(i, j)| {
                ((alpha - self.alpha_axis[i]) / da).hypot((beta - self.beta_axis[j]) / db)
            })
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }
}

fn spacing(axis: &[f64]) -> f64 {
    (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64
}

/// Uniformly spaced inclusive grid.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
        .collect()
}

/// Scan a square window of the complete-graph parameter plane.
pub fn scan_phase(
    n: usize,
    alpha_range: (f64, f64),
    beta_range: (f64, f64),
    resolution: usize,
) -> Result<PhaseGrid> {
    if resolution < 16 {
        return Err(JungleError::Config(format!(
            "scan resolution {resolution} too coarse; need at least 16"
        )));
    }
    scan_phase_grid(
        n,
        &linspace(alpha_range.0, alpha_range.1, resolution),
        &linspace(beta_range.0, beta_range.1, resolution),
    )
}

/// Scan explicit axes (each strictly increasing, at least 4 points).
///
/// The gradient field stacks p and rho with equal weight:
/// g = sqrt(|grad p|^2 + |grad rho|^2), centered finite differences inside
/// the window and one-sided at its edges. The ridge keeps, per alpha column,
/// the beta row maximizing g when that row is an interior local maximum
/// (non-maximum suppression along beta). The endpoint estimate walks the
/// ridge from its gradient maximum toward increasing alpha and reports the
/// first sample whose gradient has decayed below half the maximum.
pub fn scan_phase_grid(n: usize, alpha_axis: &[f64], beta_axis: &[f64]) -> Result<PhaseGrid> {
    if n < 2 {
        return Err(JungleError::Config(
            "phase scan needs at least 2 nodes".into(),
        ));
    }
    for (name, axis) in [("alpha", alpha_axis), ("beta", beta_axis)] {
        if axis.len() < 4 {
            return Err(JungleError::Config(format!(
                "{name} axis has {} points; need at least 4",
                axis.len()
            )));
        }
        if axis.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(JungleError::Config(format!(
                "{name} axis must be strictly increasing"
            )));
        }
        if axis.iter().any(|v| !v.is_finite()) {
            return Err(JungleError::Config(format!("{name} axis must be finite")));
        }
    }

    let (na, nb) = (alpha_axis.len(), beta_axis.len());
    let moments: Vec<(f64, f64)> = par_collect(na * nb, |cell| {
        let (i, j) = (cell / nb, cell % nb);
        // Parameters are grid-supplied, therefore finite; moments of the
        // count model are defined for every finite pair.
        let params = DiamondParams::new(n, alpha_axis[i], beta_axis[j])
            .expect("finite grid parameters");
        let m = diamond_moments(&params).expect("moments defined on the grid");
        (m.p, m.rho)
    });
    let p: Vec<f64> = moments.iter().map(|m| m.0).collect();
    let rho: Vec<f64> = moments.iter().map(|m| m.1).collect();

    let at = |v: &[f64], i: usize, j: usize| v[i * nb + j];
    let mut grad_norm = vec![0.0f64; na * nb];
    for i in 0..na {
        for j in 0..nb {
            let (ia, ib) = (i.saturating_sub(1), (i + 1).min(na - 1));
            let (ja, jb) = (j.saturating_sub(1), (j + 1).min(nb - 1));
            let da = alpha_axis[ib] - alpha_axis[ia];
            let db = beta_axis[jb] - beta_axis[ja];
            let dpda = (at(&p, ib, j) - at(&p, ia, j)) / da;
            let dpdb = (at(&p, i, jb) - at(&p, i, ja)) / db;
            let drda = (at(&rho, ib, j) - at(&rho, ia, j)) / da;
            let drdb = (at(&rho, i, jb) - at(&rho, i, ja)) / db;
            grad_norm[i * nb + j] =
                (dpda * dpda + dpdb * dpdb + drda * drda + drdb * drdb).sqrt();
        }
    }

    let mut ridge = Vec::new();
    for i in 0..na {
        let mut best = 0;
        for j in 1..nb {
            if at(&grad_norm, i, j) > at(&grad_norm, i, best) {
                best = j;
            }
        }
        if best > 0
            && best < nb - 1
            && at(&grad_norm, i, best) > at(&grad_norm, i, best - 1)
            && at(&grad_norm, i, best) > at(&grad_norm, i, best + 1)
        {
            ridge.push((i, best));
        }
    }

    let critical_point = ridge
        .iter()
        .enumerate()
        .max_by(|(_, &(ia, ja)), (_, &(ib, jb))| {
            at(&grad_norm, ia, ja)
                .partial_cmp(&at(&grad_norm, ib, jb))
                .unwrap()
        })
        .and_then(|(start, &(gi, gj))| {
            let gmax = at(&grad_norm, gi, gj);
            ridge[start..]
                .iter()
                .find(|&&(i, j)| at(&grad_norm, i, j) < gmax / 2.0)
                .map(|&(i, j)| (alpha_axis[i], beta_axis[j]))
        });

    Ok(PhaseGrid {
        alpha_axis: alpha_axis.to_vec(),
        beta_axis: beta_axis.to_vec(),
        n,
        p,
        rho,
        grad_norm,
        ridge,
        critical_point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{dandelion_pmf, diamond_pmf};
    use approx::assert_relative_eq;

    #[test]
    fn var_es_on_a_fair_pair() {
        let pmf = LossPmf::from_masses(2, &[0.25, 0.5, 0.25]).unwrap();
        let (var, es) = var_es(&pmf, 0.5).unwrap();
        assert_relative_eq!(var, 0.5);
        assert_relative_eq!(es, (0.5 * 0.5 + 1.0 * 0.25) / 0.75, epsilon = 1e-12);
        let (var, es) = var_es(&pmf, 0.999).unwrap();
        assert_relative_eq!(var, 1.0);
        assert_relative_eq!(es, 1.0);
    }

    #[test]
    fn var_es_published_hub_portfolio_row() {
        // rho = 0.16 row of the reference table.
        let cal = crate::calibrate::calibrate_dandelion(&crate::calibrate::DandelionEmpirical {
            n: 800,
            p: 0.028,
            p0: 0.028,
            rho: 0.16,
        })
        .unwrap();
        let pmf = dandelion_pmf(&cal.params).unwrap();
        let (var, es) = var_es(&pmf, 0.99).unwrap();
        assert_relative_eq!(var, 0.18875, epsilon = 1e-12);
        assert_relative_eq!(es, 0.19766449461530491, epsilon = 1e-9);
    }

    #[test]
    fn var_rejects_confidence_outside_unit_interval() {
        let pmf = LossPmf::from_masses(1, &[0.5, 0.5]).unwrap();
        assert!(var_es(&pmf, 0.0).is_err());
        assert!(var_es(&pmf, 1.0).is_err());
    }

    #[test]
    fn unimodal_and_bimodal_mode_counts() {
        let uni = diamond_pmf(
            &DiamondParams::new(20, -1.613431470614246, 0.15554345353674798).unwrap(),
        )
        .unwrap();
        let modes = detect_peaks(&uni);
        assert_eq!(modes.len(), 1, "modes: {modes:?}");
        assert_eq!(modes[0].count, 7);

        let bi = diamond_pmf(
            &DiamondParams::new(20, -2.228379461030855, 0.2283583218565148).unwrap(),
        )
        .unwrap();
        let modes = detect_peaks(&bi);
        assert_eq!(modes.len(), 2, "modes: {modes:?}");
        assert_eq!(modes[0].count, 3);
        assert_eq!(modes[1].count, 16);
        assert!(modes.iter().all(|m| m.prominence > 0.0));
    }

    #[test]
    fn plateau_collapses_to_its_midpoint() {
        let pmf = LossPmf::from_masses(3, &[0.2, 0.3, 0.3, 0.2]).unwrap();
        let modes = detect_peaks(&pmf);
        assert_eq!(modes.len(), 1);
        assert_eq!(modes[0].count, 1);
    }

    #[test]
    fn dust_peaks_are_dropped() {
        // The dust maximum at count 3 sits more than two bins from any real
        // mass, so its 5-bin window stays under the floor.
        let raw = [0.4f64, 1e-10, 1e-11, 3e-10, 1e-11, 1e-10, 0.6];
        let log_w: Vec<f64> = raw.iter().map(|m| m.ln()).collect();
        let pmf = LossPmf::from_log_weights(6, log_w).unwrap();
        let modes = detect_peaks(&pmf);
        let counts: Vec<usize> = modes.iter().map(|m| m.count).collect();
        assert_eq!(counts, vec![0, 6], "modes: {modes:?}");
    }

    #[test]
    fn prominence_measures_height_above_the_key_col() {
        let pmf = LossPmf::from_masses(3, &[0.4, 0.1, 0.3, 0.2]).unwrap();
        let modes = detect_peaks(&pmf);
        assert_eq!(modes.len(), 2);
        assert_relative_eq!(modes[0].prominence, 0.4, epsilon = 1e-12);
        assert_relative_eq!(modes[1].prominence, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn report_flags_bimodality() {
        let bi = diamond_pmf(
            &DiamondParams::new(20, -2.228379461030855, 0.2283583218565148).unwrap(),
        )
        .unwrap();
        let report = risk_report(&bi, 0.99).unwrap();
        assert!(report.is_multimodal());
        assert!(report.var > 0.0 && report.es >= report.var);
    }

    #[test]
    fn scan_locates_the_critical_region() {
        let grid = scan_phase(80, (-6.0, 2.0), (0.0, 0.2), 48).unwrap();
        assert!(!grid.ridge().is_empty());
        let (ac, bc) = grid.critical_point().expect("endpoint inside the window");
        assert!(
            (ac - -2.0).abs() < 0.4,
            "endpoint alpha {ac} too far from -2"
        );
        assert!(
            (bc - 0.05).abs() < 0.03,
            "endpoint beta {bc} too far from 4/n"
        );
    }

    #[test]
    fn scan_keeps_zero_coupling_row_uncorrelated() {
        let grid = scan_phase(30, (-3.0, 1.0), (0.0, 0.3), 16).unwrap();
        for i in 0..16 {
            assert_eq!(grid.rho(i, 0), 0.0);
        }
    }

    #[test]
    fn ridge_tracks_the_coexistence_line() {
        let grid = scan_phase(80, (-6.0, -2.5), (0.0, 0.2), 32).unwrap();
        for &(i, j) in grid.ridge() {
            let alpha = grid.alpha_axis()[i];
            let beta_line = -2.0 * alpha / 79.0;
            assert!(
                (grid.beta_axis()[j] - beta_line).abs() < 0.02,
                "ridge strays from the coexistence line at alpha = {alpha}"
            );
        }
    }

    #[test]
    fn scan_rejects_bad_axes() {
        assert!(scan_phase(50, (-2.0, 2.0), (0.0, 0.1), 8).is_err());
        assert!(scan_phase_grid(50, &[0.0, 1.0, 0.5, 2.0], &linspace(0.0, 0.1, 8)).is_err());
        assert!(scan_phase_grid(1, &linspace(-1.0, 1.0, 8), &linspace(0.0, 0.1, 8)).is_err());
    }

    #[test]
    fn ridge_distance_uses_cell_units() {
        let grid = scan_phase(80, (-6.0, 2.0), (0.0, 0.2), 48).unwrap();
        let &(i, j) = &grid.ridge()[0];
        let (a, b) = (grid.alpha_axis()[i], grid.beta_axis()[j]);
        assert!(grid.ridge_distance_cells(a, b).unwrap() < 1e-12);
        let da = (2.0 - -6.0) / 47.0;
        let shifted = grid.ridge_distance_cells(a + da, b).unwrap();
        assert!(shifted <= 1.0 + 1e-9, "one cell over: {shifted}");
    }
}
