//! Domain types: portfolios, model parameters, loss pmfs, and validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{JungleError, Result};
use crate::math::{log_sum_exp, logit, sigmoid};

/// Hard cap for full-state enumeration (2^22 states).
pub const ENUMERATION_CAP: usize = 22;

/// An unordered pair of node indices, stored canonically with `i < j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    i: usize,
    j: usize,
}

impl Edge {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(JungleError::Domain(format!("self-loop on node {a}")));
        }
        Ok(Edge {
            i: a.min(b),
            j: a.max(b),
        })
    }

    pub fn i(&self) -> usize {
        self.i
    }

    pub fn j(&self) -> usize {
        self.j
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

/// A default-indicator configuration; entries are 0 or 1, length n.
pub type StateVector = Vec<u8>;

/// How exposure converts to loss when a node defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", content = "params", rename_all = "snake_case")]
pub enum RecoveryModel {
    /// Fixed loss-given-default fraction.
    Constant { lgd: f64 },
    /// Loss-given-default factor (1 + rate/mean_rate)/2 evaluated per draw
    /// from that draw's aggregate default rate. Uncapped by default, which
    /// lets the factor exceed 1 in bad draws; `capped` clamps it to [0, 1].
    LinearInAggregate {
        #[serde(default)]
        capped: bool,
    },
    /// 1 - RR = a + b * l_0 where node 0 is the hub of a star topology.
    CentralNodeDependent { a: f64, b: f64 },
}

impl Default for RecoveryModel {
    fn default() -> Self {
        RecoveryModel::Constant { lgd: 1.0 }
    }
}

/// Empirical portfolio inputs: marginals, pairwise correlations on a known
/// edge set, exposures, and the recovery model.
///
/// Edges absent from `rho` carry *unknown* correlation, which is not the same
/// as zero correlation: the maximum-entropy fit leaves those couplings at 0
/// while the resulting model correlations are generally nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct PortfolioSpec {
    p: Vec<f64>,
    exposure: Vec<f64>,
    rho: BTreeMap<Edge, f64>,
    recovery: RecoveryModel,
}

impl PortfolioSpec {
    pub fn new(
        p: Vec<f64>,
        exposure: Vec<f64>,
        rho: BTreeMap<Edge, f64>,
        recovery: RecoveryModel,
    ) -> Result<Self> {
        let spec = PortfolioSpec {
            p,
            exposure,
            rho,
            recovery,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// n independent nodes with common default probability and unit exposure.
    pub fn homogeneous(n: usize, p: f64) -> Result<Self> {
        Self::new(
            vec![p; n],
            vec![1.0; n],
            BTreeMap::new(),
            RecoveryModel::default(),
        )
    }

    /// Star topology: node 0 is the hub with probability `p0`, nodes 1..=n are
    /// peripherals with probability `p`, every hub-spoke edge carries `rho`.
    pub fn star(n_peripheral: usize, p: f64, p0: f64, rho: f64) -> Result<Self> {
        let mut probs = vec![p; n_peripheral + 1];
        probs[0] = p0;
        let mut edges = BTreeMap::new();
        for k in 1..=n_peripheral {
            edges.insert(Edge::new(0, k)?, rho);
        }
        Self::new(
            probs,
            vec![1.0; n_peripheral + 1],
            edges,
            RecoveryModel::default(),
        )
    }

    /// Complete graph: uniform probability and uniform pairwise correlation.
    pub fn complete(n: usize, p: f64, rho: f64) -> Result<Self> {
        let mut edges = BTreeMap::new();
        for a in 0..n {
            for b in (a + 1)..n {
                edges.insert(Edge::new(a, b)?, rho);
            }
        }
        Self::new(vec![p; n], vec![1.0; n], edges, RecoveryModel::default())
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn exposure(&self) -> &[f64] {
        &self.exposure
    }

    pub fn rho(&self) -> &BTreeMap<Edge, f64> {
        &self.rho
    }

    pub fn recovery(&self) -> &RecoveryModel {
        &self.recovery
    }

    pub fn with_recovery(mut self, recovery: RecoveryModel) -> Result<Self> {
        self.recovery = recovery;
        self.validate()?;
        Ok(self)
    }

    pub fn with_exposures(mut self, exposure: Vec<f64>) -> Result<Self> {
        self.exposure = exposure;
        self.validate()?;
        Ok(self)
    }

    /// Mean of the per-node default probabilities.
    pub fn mean_p(&self) -> f64 {
        self.p.iter().sum::<f64>() / self.p.len() as f64
    }

    /// Shift every node probability by `dp` and every listed correlation by
    /// `drho` (a one-shot stress scenario). Fails if the stressed inputs leave
    /// the feasible region.
    pub fn stressed(&self, dp: f64, drho: f64) -> Result<Self> {
        let p = self.p.iter().map(|&x| x + dp).collect();
        let rho = self.rho.iter().map(|(&e, &r)| (e, r + drho)).collect();
        Self::new(p, self.exposure.clone(), rho, self.recovery.clone())
    }

    /// True when the edge set is a star centered on node 0 covering all
    /// other nodes, with uniform peripheral probability and uniform rho.
    pub fn is_uniform_star(&self) -> bool {
        let n = self.n();
        if n < 2 || self.rho.len() != n - 1 {
            return false;
        }
        let ok_edges = self.rho.keys().all(|e| e.i() == 0) && {
            let spokes: Vec<usize> = self.rho.keys().map(|e| e.j()).collect();
            spokes == (1..n).collect::<Vec<_>>()
        };
        ok_edges && uniform(&self.p[1..]) && uniform_vals(self.rho.values())
    }

    /// True when the edge set is complete with uniform probability and rho.
    pub fn is_uniform_complete(&self) -> bool {
        let n = self.n();
        n >= 2
            && self.rho.len() == n * (n - 1) / 2
            && uniform(&self.p)
            && uniform_vals(self.rho.values())
    }

    fn validate(&self) -> Result<()> {
        let report = validate_portfolio_parts(&self.p, &self.exposure, &self.rho, &self.recovery);
        if report.is_empty() {
            Ok(())
        } else {
            Err(JungleError::InvalidPortfolio(report))
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: PortfolioFile = serde_json::from_str(text)?;
        file.into_spec()
    }

    pub fn from_json_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let file = PortfolioFile::from_spec(self);
        Ok(serde_json::to_string_pretty(&file)?)
    }
}

fn uniform(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] == w[1])
}

fn uniform_vals<'a, I: Iterator<Item = &'a f64>>(mut it: I) -> bool {
    match it.next() {
        None => true,
        Some(first) => it.all(|v| v == first),
    }
}

/// On-disk JSON shape of a portfolio.
#[derive(Serialize, Deserialize)]
struct PortfolioFile {
    n: usize,
    nodes: Vec<NodeEntry>,
    #[serde(default)]
    edges: Vec<EdgeEntry>,
    #[serde(default)]
    recovery: RecoveryModel,
}

#[derive(Serialize, Deserialize)]
struct NodeEntry {
    id: usize,
    p: f64,
    #[serde(default = "default_exposure")]
    exposure: f64,
}

#[derive(Serialize, Deserialize)]
struct EdgeEntry {
    i: usize,
    j: usize,
    rho: f64,
}

fn default_exposure() -> f64 {
    1.0
}

impl PortfolioFile {
    fn into_spec(self) -> Result<PortfolioSpec> {
        if self.nodes.len() != self.n {
            return Err(JungleError::Config(format!(
                "portfolio declares n = {} but lists {} nodes",
                self.n,
                self.nodes.len()
            )));
        }
        let mut p = vec![f64::NAN; self.n];
        let mut exposure = vec![f64::NAN; self.n];
        for node in &self.nodes {
            if node.id >= self.n {
                return Err(JungleError::Config(format!(
                    "node id {} out of range for n = {}",
                    node.id, self.n
                )));
            }
            if !p[node.id].is_nan() {
                return Err(JungleError::Config(format!("duplicate node id {}", node.id)));
            }
            p[node.id] = node.p;
            exposure[node.id] = node.exposure;
        }
        if let Some(missing) = p.iter().position(|x| x.is_nan()) {
            return Err(JungleError::Config(format!("node id {missing} missing")));
        }
        let mut rho = BTreeMap::new();
        for e in &self.edges {
            if e.i >= self.n || e.j >= self.n {
                return Err(JungleError::Config(format!(
                    "edge ({}, {}) out of range for n = {}",
                    e.i, e.j, self.n
                )));
            }
            let edge = Edge::new(e.i, e.j)?;
            if rho.insert(edge, e.rho).is_some() {
                return Err(JungleError::Config(format!("duplicate edge {edge}")));
            }
        }
        PortfolioSpec::new(p, exposure, rho, self.recovery)
    }

    fn from_spec(spec: &PortfolioSpec) -> Self {
        PortfolioFile {
            n: spec.n(),
            nodes: (0..spec.n())
                .map(|id| NodeEntry {
                    id,
                    p: spec.p[id],
                    exposure: spec.exposure[id],
                })
                .collect(),
            edges: spec
                .rho
                .iter()
                .map(|(e, &rho)| EdgeEntry {
                    i: e.i(),
                    j: e.j(),
                    rho,
                })
                .collect(),
            recovery: spec.recovery.clone(),
        }
    }
}

/// Model parameters: per-node fields and per-edge couplings.
#[derive(Clone, Debug, PartialEq)]
pub struct JungleParams {
    alpha: Vec<f64>,
    beta: BTreeMap<Edge, f64>,
}

impl JungleParams {
    pub fn new(alpha: Vec<f64>, beta: BTreeMap<Edge, f64>) -> Result<Self> {
        let n = alpha.len();
        if n == 0 {
            return Err(JungleError::Domain("empty parameter vector".into()));
        }
        if let Some(bad) = alpha.iter().position(|a| !a.is_finite()) {
            return Err(JungleError::Domain(format!("alpha[{bad}] is not finite")));
        }
        for (e, b) in &beta {
            if e.j() >= n {
                return Err(JungleError::Domain(format!(
                    "edge {e} out of range for n = {n}"
                )));
            }
            if !b.is_finite() {
                return Err(JungleError::Domain(format!("beta{e} is not finite")));
            }
        }
        Ok(JungleParams { alpha, beta })
    }

    /// Independent nodes: alpha_i = logit(p_i), no couplings.
    pub fn independent(p: &[f64]) -> Result<Self> {
        if p.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return Err(JungleError::Domain(
                "probabilities must lie strictly inside (0,1)".into(),
            ));
        }
        Self::new(p.iter().map(|&x| logit(x)).collect(), BTreeMap::new())
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &BTreeMap<Edge, f64> {
        &self.beta
    }

    pub(crate) fn alpha_mut(&mut self) -> &mut [f64] {
        &mut self.alpha
    }

    pub(crate) fn beta_mut(&mut self) -> &mut BTreeMap<Edge, f64> {
        &mut self.beta
    }

    /// Neighbor lists with coupling strengths, for samplers.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n()];
        for (e, &b) in &self.beta {
            adj[e.i()].push((e.j(), b));
            adj[e.j()].push((e.i(), b));
        }
        adj
    }

    /// Conditional default probability of node `i` given the rest.
    pub fn conditional(&self, i: usize, state: &[u8], adj: &[Vec<(usize, f64)>]) -> f64 {
        let mut field = self.alpha[i];
        for &(j, b) in &adj[i] {
            if state[j] != 0 {
                field += b;
            }
        }
        sigmoid(field)
    }
}

/// Exact loss pmf over default counts 0..=n, stored in log space.
#[derive(Clone, Debug, PartialEq)]
pub struct LossPmf {
    n_units: usize,
    log_mass: Vec<f64>,
}

impl LossPmf {
    /// Normalize raw log-weights indexed by default count.
    pub fn from_log_weights(n_units: usize, mut log_w: Vec<f64>) -> Result<Self> {
        if log_w.len() != n_units + 1 {
            return Err(JungleError::Domain(format!(
                "expected {} weights for n = {}, got {}",
                n_units + 1,
                n_units,
                log_w.len()
            )));
        }
        let z = log_sum_exp(&log_w)?;
        if !z.is_finite() {
            return Err(JungleError::Domain(
                "log-weights do not normalize to a finite partition sum".into(),
            ));
        }
        for w in &mut log_w {
            *w -= z;
        }
        Ok(LossPmf {
            n_units,
            log_mass: log_w,
        })
    }

    /// Build from linear-space masses (validated and renormalized).
    pub fn from_masses(n_units: usize, mass: &[f64]) -> Result<Self> {
        if mass.iter().any(|&m| m < 0.0 || !m.is_finite()) {
            return Err(JungleError::Domain(
                "pmf masses must be finite and non-negative".into(),
            ));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(JungleError::Domain(format!(
                "pmf masses sum to {total}, expected 1"
            )));
        }
        Self::from_log_weights(n_units, mass.iter().map(|&m| m.ln()).collect())
    }

    /// Number of units the count denominates over (loss fraction = count/n).
    pub fn n_units(&self) -> usize {
        self.n_units
    }

    pub fn len(&self) -> usize {
        self.log_mass.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mass(&self, count: usize) -> f64 {
        self.log_mass[count].exp()
    }

    pub fn log_mass(&self, count: usize) -> f64 {
        self.log_mass[count]
    }

    pub fn masses(&self) -> Vec<f64> {
        self.log_mass.iter().map(|w| w.exp()).collect()
    }

    /// E[count]/n.
    pub fn mean_rate(&self) -> f64 {
        self.mean_count() / self.n_units as f64
    }

    pub fn mean_count(&self) -> f64 {
        self.log_mass
            .iter()
            .enumerate()
            .map(|(l, w)| l as f64 * w.exp())
            .sum()
    }

    /// Variance of the count.
    pub fn variance_count(&self) -> f64 {
        let m = self.mean_count();
        self.log_mass
            .iter()
            .enumerate()
            .map(|(l, w)| (l as f64 - m).powi(2) * w.exp())
            .sum()
    }

    /// Total variation distance to another pmf on the same support.
    pub fn tv_distance(&self, other: &LossPmf) -> Result<f64> {
        if self.len() != other.len() {
            return Err(JungleError::Domain(
                "total variation requires equal supports".into(),
            ));
        }
        Ok(self
            .masses()
            .iter()
            .zip(other.masses())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / 2.0)
    }
}

/// One rule the inputs break, with enough identity to locate it.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    ProbabilityRange { node: usize, p: f64 },
    ExposureNonPositive { node: usize, exposure: f64 },
    CorrelationRange { i: usize, j: usize, rho: f64 },
    EdgeOutOfRange { i: usize, j: usize },
    QAboveUpper { i: usize, j: usize, q: f64, bound: f64 },
    QBelowLower { i: usize, j: usize, q: f64, bound: f64 },
    Recovery { message: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ProbabilityRange { node, p } => {
                write!(
                    f,
                    "node {node}: probability {p} at or outside (0,1) boundary"
                )
            }
            Violation::ExposureNonPositive { node, exposure } => {
                write!(f, "node {node}: exposure {exposure} must be positive")
            }
            Violation::CorrelationRange { i, j, rho } => {
                write!(f, "edge ({i}, {j}): correlation {rho} outside (-1,1)")
            }
            Violation::EdgeOutOfRange { i, j } => {
                write!(f, "edge ({i}, {j}): node index out of range")
            }
            Violation::QAboveUpper { i, j, q, bound } => {
                write!(
                    f,
                    "edge ({i}, {j}): q_ij = {q:.6} exceeds min(p_i, p_j) = {bound:.6}"
                )
            }
            Violation::QBelowLower { i, j, q, bound } => {
                write!(
                    f,
                    "edge ({i}, {j}): q_ij = {q:.6} below max(0, p_i + p_j - 1) = {bound:.6}"
                )
            }
            Violation::Recovery { message } => write!(f, "recovery model: {message}"),
        }
    }
}

/// Every violated invariant, or empty when the portfolio is admissible.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Joint default probability implied by marginals and a correlation.
pub fn q_from_rho(p_i: f64, p_j: f64, rho: f64) -> f64 {
    rho * (p_i * (1.0 - p_i)).sqrt() * (p_j * (1.0 - p_j)).sqrt() + p_i * p_j
}

/// Check a full spec; reports every violation instead of failing fast.
pub fn validate_portfolio(spec: &PortfolioSpec) -> ValidationReport {
    validate_portfolio_parts(&spec.p, &spec.exposure, &spec.rho, &spec.recovery)
}

fn validate_portfolio_parts(
    p: &[f64],
    exposure: &[f64],
    rho: &BTreeMap<Edge, f64>,
    recovery: &RecoveryModel,
) -> ValidationReport {
    let mut violations = Vec::new();
    let n = p.len();
    for (node, &pi) in p.iter().enumerate() {
        if !(pi > 0.0 && pi < 1.0) {
            violations.push(Violation::ProbabilityRange { node, p: pi });
        }
    }
    for (node, &e) in exposure.iter().enumerate() {
        if !(e > 0.0 && e.is_finite()) {
            violations.push(Violation::ExposureNonPositive { node, exposure: e });
        }
    }
    for (edge, &r) in rho {
        let (i, j) = (edge.i(), edge.j());
        if j >= n {
            violations.push(Violation::EdgeOutOfRange { i, j });
            continue;
        }
        if !(r > -1.0 && r < 1.0) {
            violations.push(Violation::CorrelationRange { i, j, rho: r });
            continue;
        }
        // Feasibility window for a valid joint distribution of two
        // indicators: max(0, p_i + p_j - 1) < q < min(p_i, p_j).
        if p[i] > 0.0 && p[i] < 1.0 && p[j] > 0.0 && p[j] < 1.0 {
            let q = q_from_rho(p[i], p[j], r);
            let upper = p[i].min(p[j]);
            let lower = (p[i] + p[j] - 1.0).max(0.0);
            if q >= upper {
                violations.push(Violation::QAboveUpper {
                    i,
                    j,
                    q,
                    bound: upper,
                });
            } else if q <= lower {
                violations.push(Violation::QBelowLower {
                    i,
                    j,
                    q,
                    bound: lower,
                });
            }
        }
    }
    match recovery {
        RecoveryModel::Constant { lgd } => {
            if !(*lgd >= 0.0 && *lgd <= 1.0) {
                violations.push(Violation::Recovery {
                    message: format!("constant lgd {lgd} outside [0,1]"),
                });
            }
        }
        RecoveryModel::LinearInAggregate { .. } => {
            // mean p > 0 holds whenever every p_i is strictly positive,
            // which the probability checks above already enforce.
        }
        RecoveryModel::CentralNodeDependent { a, b } => {
            if !(*a >= 0.0 && *a <= 1.0 && *a + *b >= 0.0 && *a + *b <= 1.0) {
                violations.push(Violation::Recovery {
                    message: format!("central-node parameters a = {a}, b = {b} need a and a+b in [0,1]"),
                });
            }
            let star_shaped = rho.keys().all(|e| e.i() == 0);
            if !star_shaped || rho.is_empty() {
                violations.push(Violation::Recovery {
                    message: "central-node recovery requires a star topology with hub node 0".into(),
                });
            }
        }
    }
    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn star_spec_at_table_parameters_is_admissible() {
        let spec = PortfolioSpec::star(800, 0.028, 0.028, 0.08).unwrap();
        assert!(validate_portfolio(&spec).is_empty());
        assert!(spec.is_uniform_star());
        assert!(!spec.is_uniform_complete());
    }

    #[test]
    fn boundary_probability_is_a_violation() {
        let report = validate_portfolio_parts(
            &[1.0, 0.5],
            &[1.0, 1.0],
            &BTreeMap::new(),
            &RecoveryModel::default(),
        );
        assert!(matches!(
            report.violations.as_slice(),
            [Violation::ProbabilityRange { node: 0, .. }]
        ));
    }

    #[test]
    fn infeasible_q_reports_the_upper_bound() {
        // p_i = 0.01, p_j = 0.5, rho = 0.999: q = 0.0547 > min(p) = 0.01.
        let mut rho = BTreeMap::new();
        rho.insert(Edge::new(0, 1).unwrap(), 0.999);
        let report = validate_portfolio_parts(
            &[0.01, 0.5],
            &[1.0, 1.0],
            &rho,
            &RecoveryModel::default(),
        );
        assert!(matches!(
            report.violations.as_slice(),
            [Violation::QAboveUpper { i: 0, j: 1, .. }]
        ));
        let text = report.to_string();
        assert!(text.contains("exceeds min(p_i, p_j)"), "{text}");
    }

    #[test]
    fn strong_negative_correlation_violates_the_lower_bound() {
        let mut rho = BTreeMap::new();
        rho.insert(Edge::new(0, 1).unwrap(), -0.99);
        let report = validate_portfolio_parts(
            &[0.9, 0.9],
            &[1.0, 1.0],
            &rho,
            &RecoveryModel::default(),
        );
        // q = -0.99*0.09 + 0.81 = 0.7209 < p_i + p_j - 1 = 0.8.
        assert!(matches!(
            report.violations.as_slice(),
            [Violation::QBelowLower { .. }]
        ));
    }

    #[test]
    fn edge_canonicalization_and_self_loop() {
        let e = Edge::new(7, 2).unwrap();
        assert_eq!((e.i(), e.j()), (2, 7));
        assert!(Edge::new(3, 3).is_err());
    }

    #[test]
    fn portfolio_json_round_trip() {
        let spec = PortfolioSpec::star(4, 0.1, 0.2, 0.05)
            .unwrap()
            .with_recovery(RecoveryModel::CentralNodeDependent { a: 0.4, b: 0.5 })
            .unwrap();
        let text = spec.to_json_string().unwrap();
        let back = PortfolioSpec::from_json_str(&text).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn portfolio_json_shape_is_stable() {
        let text = r#"{
            "n": 2,
            "nodes": [
                {"id": 0, "p": 0.028},
                {"id": 1, "p": 0.028, "exposure": 2.5}
            ],
            "edges": [{"i": 0, "j": 1, "rho": 0.08}],
            "recovery": {"model": "constant", "params": {"lgd": 0.6}}
        }"#;
        let spec = PortfolioSpec::from_json_str(text).unwrap();
        assert_eq!(spec.n(), 2);
        assert_eq!(spec.exposure(), &[1.0, 2.5]);
        assert_eq!(
            spec.recovery(),
            &RecoveryModel::Constant { lgd: 0.6 }
        );
        assert_eq!(spec.rho().len(), 1);
    }

    #[test]
    fn central_node_recovery_requires_star() {
        let err = PortfolioSpec::complete(3, 0.2, 0.1)
            .unwrap()
            .with_recovery(RecoveryModel::CentralNodeDependent { a: 0.2, b: 0.3 });
        assert!(err.is_err());
    }

    #[test]
    fn pmf_normalization_and_moments() {
        let pmf = LossPmf::from_masses(2, &[0.25, 0.5, 0.25]).unwrap();
        assert_relative_eq!(pmf.mean_count(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(pmf.mean_rate(), 0.5, epsilon = 1e-12);
        assert_relative_eq!(pmf.variance_count(), 0.5, epsilon = 1e-12);
        assert!(LossPmf::from_masses(2, &[0.5, 0.1, 0.1]).is_err());
        assert!(LossPmf::from_masses(2, &[-0.1, 1.0, 0.1]).is_err());
    }

    #[test]
    fn q_window_example_from_definition() {
        // Equal small marginals with rho just under 1 stay inside the window.
        let q = q_from_rho(0.01, 0.01, 0.999);
        assert!(q < 0.01 && q > 0.0);
    }
}
