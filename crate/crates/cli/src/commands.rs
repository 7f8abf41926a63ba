//! The subcommands. Each renders its files into an [`Outputs`] and leaves
//! writing to the caller.

use rayon::prelude::*;
use serde::Serialize;

use qpsc_core::arithmetic::{beta_with_tail, delta_index, gamma, ContinuedFraction, DeltaOptions, IndexValue};
use qpsc_core::cocycle::{lyapunov, LyapunovEstimate};
use qpsc_core::gordon::{exclusion_certificate, lemma_a_check, ExclusionReport, LemmaReport};
use qpsc_core::num::ln_biguint;
use qpsc_core::spectral::{classify_regime, lyapunov_scan, RegimeLabel};
use qpsc_core::serial;

use crate::config::{LevelSpec, RunConfig};
use crate::error::CliError;
use crate::output::{num, Outputs, Table};

/// The serialized name of a unit enum variant.
fn label<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        _ => String::new(),
    }
}

#[derive(Serialize)]
struct CfSummary {
    coefficients: Vec<String>,
    depth: usize,
    terminating: bool,
    precision_bits: u64,
    /// Coefficients certified by the input precision, for decimal input.
    valid_prefix: Option<usize>,
}

pub fn cf(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let pot = cfg.potential()?;
    let (cf, valid_prefix) = cfg.continued_fraction(&pot)?;
    let mut out = Outputs::default();
    if cfg.output.format.csv() {
        let mut t = Table::new(&["n", "a", "p", "q", "ln_q", "approximation_bounds"]);
        for (n, (p, q)) in cf.convergents().iter().enumerate() {
            let a = if n == 0 { String::new() } else { cf.coefficients()[n - 1].to_string() };
            let bounds = match cf.approximation_bounds_hold(n) {
                Some(true) => "hold",
                Some(false) => "fail",
                None => "",
            };
            t.push(vec![n.to_string(), a, p.to_string(), q.to_string(), num(ln_biguint(q)), bounds.into()]);
        }
        out.csv("cf.csv", t)?;
    }
    if cfg.output.format.json() {
        out.json(
            "cf.json",
            &CfSummary {
                coefficients: cf.coefficients().iter().map(|a| a.to_string()).collect(),
                depth: cf.depth(),
                terminating: cf.is_terminating(),
                precision_bits: cf.precision_bits(),
                valid_prefix,
            },
        )?;
    }
    Ok(out)
}

fn delta(cfg: &RunConfig, cf: &ContinuedFraction, pot: &qpsc_core::potential::MeromorphicPotential) -> Result<IndexValue, CliError> {
    let opts = DeltaOptions {
        horizon: cfg.indices.horizon,
        tail_start: cfg.indices.tail_start,
    };
    Ok(delta_index(cf, &cfg.theta()?, pot.poles(), opts)?)
}

#[derive(Serialize)]
struct Band {
    #[serde(serialize_with = "serial::f64")]
    lower: f64,
    #[serde(serialize_with = "serial::f64")]
    upper: f64,
}

impl From<(f64, f64)> for Band {
    fn from((lower, upper): (f64, f64)) -> Self {
        Band { lower, upper }
    }
}

#[derive(Serialize)]
struct IndicesSummary {
    theta: String,
    depth: usize,
    beta: IndexValue,
    beta_band: Band,
    delta: IndexValue,
    delta_band: Band,
    gamma: IndexValue,
}

pub fn indices(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let pot = cfg.potential()?;
    let (cf, _) = cfg.continued_fraction(&pot)?;
    let theta = cfg.theta()?;
    let b = beta_with_tail(&cf, cfg.indices.tail_start)?;
    let d = delta(cfg, &cf, &pot)?;
    let g = gamma(&cf, &theta, cfg.indices.gamma_horizon)?;
    let mut out = Outputs::default();
    if cfg.output.format.csv() {
        let mut t = Table::new(&["level", "q", "beta", "delta", "resolution_limited"]);
        for (n, (bv, dv)) in b.per_level.iter().zip(&d.per_level).enumerate() {
            t.push(vec![
                n.to_string(),
                cf.convergents()[n].1.to_string(),
                num(*bv),
                num(*dv),
                d.resolution_limited.contains(&n).to_string(),
            ]);
        }
        out.csv("indices.csv", t)?;
        let mut t = Table::new(&["n", "gamma"]);
        for (i, v) in g.per_level.iter().enumerate() {
            t.push(vec![(i + 1).to_string(), num(*v)]);
        }
        out.csv("gamma.csv", t)?;
    }
    if cfg.output.format.json() {
        out.json(
            "indices.json",
            &IndicesSummary {
                theta: theta.label(),
                depth: cf.depth(),
                beta_band: b.band().into(),
                beta: b,
                delta_band: d.band().into(),
                delta: d,
                gamma: g,
            },
        )?;
    }
    Ok(out)
}

pub fn lyapunov_cmd(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let pot = cfg.potential()?;
    let (cf, _) = cfg.continued_fraction(&pot)?;
    let energies = cfg.energies(&pot, &cf)?;
    let opts = cfg.lyapunov_options()?;
    let scan = lyapunov_scan(&pot, &cf.frequency(), &energies, &opts);
    let mut out = Outputs::default();
    if cfg.output.format.csv() {
        let mut t = Table::new(&[
            "E",
            "value",
            "n",
            "method",
            "discrepancy",
            "phase_average",
            "single_orbit",
            "error",
        ]);
        for entry in &scan {
            t.push(match &entry.result {
                Ok(l) => vec![
                    num(entry.energy),
                    num(l.value),
                    l.n.to_string(),
                    l.method.name().into(),
                    num(l.discrepancy),
                    num(l.phase_average),
                    num(l.single_orbit),
                    String::new(),
                ],
                Err(e) => {
                    let mut row = vec![num(entry.energy)];
                    row.extend(std::iter::repeat(String::new()).take(6));
                    row.push(e.clone());
                    row
                }
            });
        }
        out.csv("lyapunov.csv", t)?;
    }
    if cfg.output.format.json() {
        #[derive(Serialize)]
        struct Row<'a> {
            #[serde(rename = "E", serialize_with = "serial::f64")]
            energy: f64,
            estimate: Option<&'a LyapunovEstimate>,
            error: Option<&'a String>,
        }
        let rows: Vec<Row> = scan
            .iter()
            .map(|e| Row {
                energy: e.energy,
                estimate: e.result.as_ref().ok(),
                error: e.result.as_ref().err(),
            })
            .collect();
        out.json("lyapunov.json", &rows)?;
    }
    Ok(out)
}

#[derive(Serialize)]
struct GordonEntry {
    #[serde(rename = "E", serialize_with = "serial::f64")]
    energy: f64,
    lyapunov: Option<LyapunovEstimate>,
    certificate: ExclusionReport,
    /// Resonance estimates at the configured levels that qualify.
    lemma: Vec<LemmaReport>,
}

#[derive(Serialize)]
struct GordonSummary {
    #[serde(serialize_with = "serial::f64")]
    c: f64,
    levels: Vec<usize>,
    q: Vec<String>,
    #[serde(serialize_with = "serial::opt_f64")]
    epsilon: Option<f64>,
    delta_hat: Option<IndexValue>,
    energies: Vec<GordonEntry>,
}

pub fn gordon(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let pot = cfg.potential()?;
    let (cf, _) = cfg.continued_fraction(&pot)?;
    let theta = cfg.theta()?;
    let energies = cfg.energies(&pot, &cf)?;
    let delta_hat = match (&cfg.gordon.levels, cfg.epsilon) {
        (LevelSpec::Keyword(_), _) | (_, Some(_)) => Some(delta(cfg, &cf, &pot)?),
        _ => None,
    };
    let qualifying = match (&delta_hat, cfg.epsilon) {
        (Some(d), Some(eps)) => d.qualifying_levels(eps),
        _ => Vec::new(),
    };
    let levels = match &cfg.gordon.levels {
        LevelSpec::List(l) => l.clone(),
        LevelSpec::Keyword(_) => {
            cfg.epsilon()?;
            qualifying.clone()
        }
    };
    if levels.is_empty() {
        return Err(CliError::range("no levels to certify"));
    }
    if let Some(&bad) = levels.iter().find(|&&l| l > cf.depth()) {
        return Err(CliError::range(format!(
            "gordon.levels: level {bad} exceeds the expansion depth {}",
            cf.depth()
        )));
    }
    let opts = cfg.certificate_options();
    let lyap_opts = cfg.lyapunov_options()?;
    let freq = cf.frequency();
    let entries = energies
        .par_iter()
        .map(|&energy| -> Result<GordonEntry, CliError> {
            log::info!("certifying E = {energy}");
            let certificate = exclusion_certificate(&pot, energy, theta.phase(), &cf, &levels, cfg.gordon.rate, &opts)?;
            let (estimate, lemma) = match (&delta_hat, cfg.epsilon) {
                (Some(d), Some(eps)) => {
                    let l = lyapunov(&pot, energy, &freq, &lyap_opts)?;
                    let lemma = levels
                        .iter()
                        .filter(|lv| qualifying.contains(lv))
                        .map(|&lv| lemma_a_check(&pot, energy, theta.phase(), &cf, lv, eps, l.value, l.discrepancy, d))
                        .collect::<Result<Vec<_>, _>>()?;
                    (Some(l), lemma)
                }
                _ => (None, Vec::new()),
            };
            Ok(GordonEntry {
                energy,
                lyapunov: estimate,
                certificate,
                lemma,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Outputs::default();
    if cfg.output.format.csv() {
        let mut t = Table::new(&[
            "E",
            "level",
            "q",
            "lhs_square",
            "lhs_inverse",
            "trace",
            "max_norm",
            "empirical_rate",
            "implied_bound",
            "verdict",
        ]);
        for e in &entries {
            for c in &e.certificate.levels {
                t.push(vec![
                    num(c.energy),
                    c.level.to_string(),
                    c.q.to_string(),
                    num(c.lhs_square),
                    num(c.lhs_inverse),
                    num(c.trace),
                    num(c.max_norm),
                    num(c.empirical_rate),
                    num(c.implied_bound),
                    label(&c.verdict),
                ]);
            }
        }
        out.csv("gordon.csv", t)?;
    }
    if cfg.output.format.json() {
        out.json(
            "gordon.json",
            &GordonSummary {
                c: cfg.gordon.rate,
                q: levels.iter().map(|&l| cf.convergents()[l].1.to_string()).collect(),
                levels,
                epsilon: cfg.epsilon,
                delta_hat,
                energies: entries,
            },
        )?;
    }
    Ok(out)
}

#[derive(Serialize)]
struct ClassifySummary {
    delta_hat: IndexValue,
    #[serde(serialize_with = "serial::f64")]
    delta_lower: f64,
    #[serde(serialize_with = "serial::f64")]
    delta_upper: f64,
    energies: usize,
    sc_candidate: usize,
    above_delta: usize,
    uncertain: usize,
    #[serde(serialize_with = "serial::f64")]
    fraction_uncertain: f64,
    notes: Vec<String>,
}

pub fn classify(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let pot = cfg.potential()?;
    let (cf, _) = cfg.continued_fraction(&pot)?;
    let energies = cfg.energies(&pot, &cf)?;
    let d = delta(cfg, &cf, &pot)?;
    let c = classify_regime(&pot, &cf.frequency(), &energies, &cfg.lyapunov_options()?, &d);
    for note in &c.notes {
        log::warn!("{note}");
    }
    let mut out = Outputs::default();
    if cfg.output.format.csv() {
        let mut t = Table::new(&["E", "L", "discrepancy", "label", "margin", "uncertainty"]);
        for r in &c.rows {
            t.push(vec![
                num(r.energy),
                num(r.lyapunov),
                num(r.discrepancy),
                r.label.name().into(),
                num(r.margin),
                num(r.uncertainty),
            ]);
        }
        out.csv("classify.csv", t)?;
    }
    if cfg.output.format.json() {
        let count = |l: RegimeLabel| c.rows.iter().filter(|r| r.label == l).count();
        out.json(
            "classify.json",
            &ClassifySummary {
                energies: c.rows.len(),
                sc_candidate: count(RegimeLabel::ScCandidate),
                above_delta: count(RegimeLabel::AboveDelta),
                uncertain: count(RegimeLabel::Uncertain),
                delta_hat: c.delta_hat.clone(),
                delta_lower: c.delta_lower,
                delta_upper: c.delta_upper,
                fraction_uncertain: c.fraction_uncertain,
                notes: c.notes.clone(),
            },
        )?;
    }
    Ok(out)
}
