//! File formats: default-rate panels, pmf/sample/scan/ensemble CSV output,
//! and the packed binary state dump.
//!
//! Every floating-point field is written with nine significant digits, enough
//! to round-trip the quantities the solvers pin to 1e-9.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::core::LossPmf;
use crate::ensemble::EnsembleReport;
use crate::error::{JungleError, Result};
use crate::risk::PhaseGrid;
use crate::sampler::{LossDistribution, SampleSet};

/// One observed cohort-year default rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefaultRateRecord {
    pub year: i32,
    pub cohort: String,
    pub rate: f64,
    /// Names underlying the rate, when the source reports it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u64>,
}

/// Render with nine significant digits, shortest decimal form.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float");
    rounded.to_string()
}

/// Load a `year,cohort,rate[,count]` panel. Rates must lie in [0,1] and each
/// cohort's years must be strictly increasing; violations carry the offending
/// line number.
pub fn load_series<R: Read>(reader: R) -> Result<Vec<DefaultRateRecord>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let mut records = Vec::new();
    let mut last_year: BTreeMap<String, i32> = BTreeMap::new();
    for row in csv_reader.into_records() {
        let raw = row?;
        let line = raw.position().map(|pos| pos.line() as usize).unwrap_or(0);
        let record: DefaultRateRecord =
            raw.deserialize(Some(&headers)).map_err(|e| JungleError::Parse {
                line,
                message: e.to_string(),
            })?;
        if !(record.rate >= 0.0 && record.rate <= 1.0) {
            return Err(JungleError::Parse {
                line,
                message: format!("default rate {} outside [0,1]", record.rate),
            });
        }
        if let Some(prev) = last_year.get(&record.cohort) {
            if record.year <= *prev {
                return Err(JungleError::Parse {
                    line,
                    message: format!(
                        "cohort {} year {} repeats or precedes year {}",
                        record.cohort, record.year, prev
                    ),
                });
            }
        }
        last_year.insert(record.cohort.clone(), record.year);
        records.push(record);
    }
    Ok(records)
}

pub fn load_series_path<P: AsRef<Path>>(path: P) -> Result<Vec<DefaultRateRecord>> {
    load_series(std::fs::File::open(path)?)
}

/// Write a panel back out. The count column appears when any record has one.
pub fn write_series<W: Write>(records: &[DefaultRateRecord], writer: W) -> Result<()> {
    let with_counts = records.iter().any(|r| r.count.is_some());
    let mut w = csv::Writer::from_writer(writer);
    if with_counts {
        w.write_record(["year", "cohort", "rate", "count"])?;
    } else {
        w.write_record(["year", "cohort", "rate"])?;
    }
    for r in records {
        let year = r.year.to_string();
        let rate = sig9(r.rate);
        if with_counts {
            let count = r.count.map(|c| c.to_string()).unwrap_or_default();
            w.write_record([year.as_str(), &r.cohort, &rate, &count])?;
        } else {
            w.write_record([year.as_str(), &r.cohort, &rate])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Equal-width histogram over [0, max(values)], last bin inclusive.
/// Returns one (lower, upper, count) triple per bin.
pub fn histogram(values: &[f64], bins: usize) -> Result<Vec<(f64, f64, usize)>> {
    if bins < 2 {
        return Err(JungleError::Config(format!(
            "histogram needs at least 2 bins, got {bins}"
        )));
    }
    if values.is_empty() {
        return Err(JungleError::Domain("histogram of an empty sample".into()));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(JungleError::Domain(
            "histogram values must be finite and non-negative".into(),
        ));
    }
    let max = values.iter().cloned().fold(0.0f64, f64::max);
    if !(max > 0.0) {
        return Err(JungleError::Domain(
            "histogram needs a positive maximum value".into(),
        ));
    }
    let width = max / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = ((v / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| (k as f64 * width, (k as f64 + 1.0) * width, c))
        .collect())
}

/// Synthetic cohort-year default-rate panel around a target mean rate:
/// a slow systematic factor shared by all cohorts plus idiosyncratic noise,
/// both bias-corrected so the expected rate stays at `mean_rate`.
pub fn synthetic_series(
    cohorts: usize,
    years: usize,
    start_year: i32,
    mean_rate: f64,
    seed: u64,
) -> Vec<DefaultRateRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(cohorts * years);
    let (common_amp, own_amp) = (0.8f64, 0.4f64);
    // E[exp(U(-a,a))] = sinh(a)/a.
    let bias = (common_amp.sinh() / common_amp) * (own_amp.sinh() / own_amp);
    let mut factor = 0.0f64;
    let mut factors = Vec::with_capacity(years);
    for _ in 0..years {
        factor = 0.6 * factor + rng.gen_range(-common_amp..common_amp) * 0.8;
        factors.push(factor);
    }
    for c in 0..cohorts {
        let cohort = format!("C{:02}", c + 1);
        for (t, f) in factors.iter().enumerate() {
            let noise = rng.gen_range(-own_amp..own_amp);
            let rate = (mean_rate * (f + noise).exp() / bias).clamp(1e-5, 0.9);
            records.push(DefaultRateRecord {
                year: start_year + t as i32,
                cohort: cohort.clone(),
                rate,
                count: Some(800),
            });
        }
    }
    records
}

/// Write a pmf as `loss_count,loss_fraction,probability`.
pub fn pmf_to_csv<W: Write>(pmf: &LossPmf, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["loss_count", "loss_fraction", "probability"])?;
    let n = pmf.n_units();
    for l in 0..=n {
        w.write_record([
            l.to_string(),
            sig9(l as f64 / n as f64),
            sig9(pmf.mass(l)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Read a pmf written by [`pmf_to_csv`]; counts must run 0..=n in order.
pub fn pmf_from_csv<R: Read>(reader: R) -> Result<LossPmf> {
    let csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut masses = Vec::new();
    for row in csv_reader.into_records() {
        let record = row.map_err(JungleError::Csv)?;
        let line = record
            .position()
            .map(|pos| pos.line() as usize)
            .unwrap_or(0);
        let parse_field = |idx: usize, name: &str| -> Result<f64> {
            record
                .get(idx)
                .ok_or_else(|| JungleError::Parse {
                    line,
                    message: format!("missing {name} column"),
                })?
                .parse::<f64>()
                .map_err(|e| JungleError::Parse {
                    line,
                    message: format!("{name}: {e}"),
                })
        };
        let count = parse_field(0, "loss_count")? as usize;
        if count != masses.len() {
            return Err(JungleError::Parse {
                line,
                message: format!("expected loss_count {}, found {count}", masses.len()),
            });
        }
        masses.push(parse_field(2, "probability")?);
    }
    if masses.len() < 2 {
        return Err(JungleError::Domain(
            "pmf file must cover counts 0..=n with n >= 1".into(),
        ));
    }
    // The 9-significant-digit serialization can leave the sum a few parts
    // in 1e9 off 1, which the strict constructor would reject. Check the
    // sum loosely here, then normalize the rounding residue away.
    let total: f64 = masses.iter().sum();
    if !((total - 1.0).abs() <= 1e-6) {
        return Err(JungleError::Domain(format!(
            "pmf masses sum to {total}, expected 1"
        )));
    }
    for m in &mut masses {
        *m /= total;
    }
    LossPmf::from_masses(masses.len() - 1, &masses)
}

/// Write sampled losses as `draw,chain,loss_count,monetary_loss`.
pub fn samples_to_csv<W: Write>(dist: &LossDistribution, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["draw", "chain", "loss_count", "monetary_loss"])?;
    for d in 0..dist.n_draws() {
        w.write_record([
            d.to_string(),
            dist.chain[d].to_string(),
            dist.counts[d].to_string(),
            sig9(dist.monetary[d]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Write a phase grid as `alpha,beta,p,rho,grad_norm,on_ridge` (row per cell).
pub fn phase_to_csv<W: Write>(grid: &PhaseGrid, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["alpha", "beta", "p", "rho", "grad_norm", "on_ridge"])?;
    let on_ridge: std::collections::BTreeSet<(usize, usize)> =
        grid.ridge().iter().copied().collect();
    for i in 0..grid.alpha_axis().len() {
        for j in 0..grid.beta_axis().len() {
            w.write_record([
                sig9(grid.alpha_axis()[i]),
                sig9(grid.beta_axis()[j]),
                sig9(grid.p(i, j)),
                sig9(grid.rho(i, j)),
                sig9(grid.grad_norm(i, j)),
                if on_ridge.contains(&(i, j)) { "1" } else { "0" }.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Write an ensemble as `sample,dp,drho,var,es,n_modes,regime,params`.
pub fn ensemble_to_csv<W: Write>(report: &EnsembleReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "sample", "dp", "drho", "var", "es", "n_modes", "regime", "params",
    ])?;
    for (k, s) in report.samples.iter().enumerate() {
        w.write_record([
            k.to_string(),
            sig9(s.dp),
            sig9(s.drho),
            sig9(s.var),
            sig9(s.es),
            s.n_modes.to_string(),
            s.label.to_string(),
            s.params_json.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

const STATE_MAGIC: &[u8; 4] = b"JNGL";
const STATE_VERSION: u16 = 1;

/// Dump raw sampled states: a fixed little-endian header, per-draw chain ids,
/// then the packed state words. Layout (all little-endian):
///
/// ```text
/// magic      [u8; 4]  "JNGL"
/// version    u16      1
/// reserved   u16      0
/// n_nodes    u32
/// n_draws    u64
/// chain ids  n_draws * u32
/// states     n_draws * ceil(n_nodes/64) * u64
/// ```
pub fn write_states<W: Write>(samples: &SampleSet, mut writer: W) -> Result<()> {
    writer.write_all(STATE_MAGIC)?;
    writer.write_all(&STATE_VERSION.to_le_bytes())?;
    writer.write_all(&0u16.to_le_bytes())?;
    writer.write_all(&(samples.n_nodes() as u32).to_le_bytes())?;
    writer.write_all(&(samples.n_draws() as u64).to_le_bytes())?;
    for d in 0..samples.n_draws() {
        writer.write_all(&samples.chain(d).to_le_bytes())?;
    }
    for d in 0..samples.n_draws() {
        for word in samples.state_words(d) {
            writer.write_all(&word.to_le_bytes())?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Read a dump produced by [`write_states`].
pub fn read_states<R: Read>(mut reader: R) -> Result<SampleSet> {
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic)?;
    if &magic != STATE_MAGIC {
        return Err(JungleError::Parse {
            line: 0,
            message: "not a state dump (bad magic)".into(),
        });
    }
    let mut u16buf = [0u8; 2];
    reader.read_exact(&mut u16buf)?;
    let version = u16::from_le_bytes(u16buf);
    if version != STATE_VERSION {
        return Err(JungleError::Parse {
            line: 0,
            message: format!("unsupported state dump version {version}"),
        });
    }
    reader.read_exact(&mut u16buf)?; // reserved
    let mut u32buf = [0u8; 4];
    reader.read_exact(&mut u32buf)?;
    let n_nodes = u32::from_le_bytes(u32buf) as usize;
    let mut u64buf = [0u8; 8];
    reader.read_exact(&mut u64buf)?;
    let n_draws = u64::from_le_bytes(u64buf) as usize;
    if n_nodes == 0 {
        return Err(JungleError::Parse {
            line: 0,
            message: "state dump declares zero nodes".into(),
        });
    }
    let mut chain_of = Vec::with_capacity(n_draws);
    for _ in 0..n_draws {
        reader.read_exact(&mut u32buf)?;
        chain_of.push(u32::from_le_bytes(u32buf));
    }
    let words = n_nodes.div_ceil(64);
    let mut bits = Vec::with_capacity(n_draws * words);
    for _ in 0..n_draws * words {
        reader.read_exact(&mut u64buf)?;
        bits.push(u64::from_le_bytes(u64buf));
    }
    SampleSet::from_raw_parts(n_nodes, bits, chain_of)
}
