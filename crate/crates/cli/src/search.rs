//! Cartesian-product parameter searches over plant and controller
//! squeezers, checked against every claim.

use std::fmt::Write as _;
use std::io::{self, Write};

use qkl::estimation::format_significant;
use qkl::{check_realizable, Scheme};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::claims::{verify_claims, ClaimReport, ClaimStatus};
use crate::config::{ExperimentConfig, GridSpec, SystemConfig};
use crate::{CliError, Result};

fn zero() -> Vec<f64> {
    vec![0.0]
}

/// Values to combine for one squeezer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterRanges {
    pub gamma: Vec<f64>,
    pub kappas: Vec<Vec<f64>>,
    #[serde(default = "zero")]
    pub chi_re: Vec<f64>,
    #[serde(default = "zero")]
    pub chi_im: Vec<f64>,
}

impl ParameterRanges {
    fn expand(&self) -> Vec<SystemConfig> {
        let mut out = Vec::new();
        for &gamma in &self.gamma {
            for kappas in &self.kappas {
                for &chi_re in &self.chi_re {
                    for &chi_im in &self.chi_im {
                        let mut s = SystemConfig::new(gamma, kappas, chi_re);
                        s.chi_im = chi_im;
                        out.push(s);
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub scheme: Scheme,
    pub plant: ParameterRanges,
    #[serde(rename = "C_re")]
    pub c_re: Vec<f64>,
    #[serde(rename = "C_im", default)]
    pub c_im: Option<Vec<f64>>,
    #[serde(default)]
    pub controller: Option<ParameterRanges>,
    #[serde(default)]
    pub grid: GridSpec,
}

impl SearchConfig {
    /// Every combination, plant parameters varying slowest.
    pub fn samples(&self) -> Vec<ExperimentConfig> {
        let plants = self.plant.expand();
        let controllers: Vec<Option<SystemConfig>> = match &self.controller {
            Some(r) => r.expand().into_iter().map(Some).collect(),
            None => vec![None],
        };
        let mut out = Vec::with_capacity(plants.len() * controllers.len());
        for p in &plants {
            for c in &controllers {
                let mut plant = p.clone().with_estimand(&self.c_re);
                plant.c_im = self.c_im.clone();
                out.push(ExperimentConfig {
                    scheme: self.scheme,
                    plant,
                    controller: c.clone(),
                    grid: self.grid,
                    output_path: None,
                    label: Some(format!("sample{}", out.len())),
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleResult {
    pub index: usize,
    pub plant: SystemConfig,
    pub controller: Option<SystemConfig>,
    pub reports: Vec<ClaimReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedSample {
    pub index: usize,
    pub plant: SystemConfig,
    pub controller: Option<SystemConfig>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub total_samples: usize,
    pub evaluated: Vec<SampleResult>,
    pub skipped: Vec<SkippedSample>,
}

enum Sample {
    Done(SampleResult),
    Skipped(SkippedSample),
}

/// Runs every realizable sample through the claim checks. Unrealizable or
/// unbuildable samples are skipped with a reason; an empty realizable set
/// is a valid (reported) outcome.
pub fn grid_search(cfg: &SearchConfig, tol: f64) -> Result<SearchOutcome> {
    cfg.grid.validate()?;
    if cfg.scheme != Scheme::Classical && cfg.controller.is_none() {
        return Err(CliError::Config(format!(
            "scheme {} needs controller ranges",
            cfg.scheme.as_str()
        )));
    }
    let samples = cfg.samples();
    let results: Vec<Sample> = samples
        .par_iter()
        .enumerate()
        .map(|(index, exp)| -> Result<Sample> {
            let skip = |reason: String| {
                Sample::Skipped(SkippedSample {
                    index,
                    plant: exp.plant.clone(),
                    controller: exp.controller.clone(),
                    reason,
                })
            };
            let built = match exp.build() {
                Ok(b) => b,
                Err(e) => return Ok(skip(e.to_string())),
            };
            let systems = std::iter::once(("plant", &built.plant))
                .chain(built.controller.as_ref().map(|c| ("controller", c)));
            for (role, sys) in systems {
                match check_realizable(sys, tol) {
                    Ok(r) if r.realizable => {}
                    Ok(r) => {
                        return Ok(skip(format!(
                            "{role} not realizable (max residual {:.3e})",
                            r.max_residual()
                        )))
                    }
                    Err(e) => return Ok(skip(format!("{role}: {e}"))),
                }
            }
            Ok(Sample::Done(SampleResult {
                index,
                plant: exp.plant.clone(),
                controller: exp.controller.clone(),
                reports: verify_claims(&built, tol)?,
            }))
        })
        .collect::<Result<_>>()?;

    let mut outcome = SearchOutcome {
        total_samples: samples.len(),
        evaluated: Vec::new(),
        skipped: Vec::new(),
    };
    for r in results {
        match r {
            Sample::Done(d) => outcome.evaluated.push(d),
            Sample::Skipped(s) => outcome.skipped.push(s),
        }
    }
    Ok(outcome)
}

fn num(v: f64) -> String {
    format_significant(v, 15)
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn kappas(v: &[f64]) -> String {
    v.iter().map(|k| num(*k)).collect::<Vec<_>>().join(";")
}

fn status_str(s: ClaimStatus) -> &'static str {
    match s {
        ClaimStatus::Verified => "verified",
        ClaimStatus::Counterexample => "counterexample",
        ClaimStatus::NotApplicable => "not_applicable",
    }
}

fn json_name<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|j| j.as_str().map(str::to_string))
        .unwrap_or_default()
}

impl SearchOutcome {
    pub fn counterexamples(&self) -> Vec<SampleResult> {
        self.evaluated
            .iter()
            .filter(|s| s.reports.iter().any(ClaimReport::is_counterexample))
            .map(|s| SampleResult {
                reports: s
                    .reports
                    .iter()
                    .filter(|r| r.is_counterexample())
                    .cloned()
                    .collect(),
                ..s.clone()
            })
            .collect()
    }

    /// One row per evaluated sample and claim.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "sample,plant_gamma,plant_kappas,plant_chi_re,plant_chi_im,\
             controller_gamma,controller_kappas,controller_chi_re,controller_chi_im,\
             claim_id,reading,status,witness_theta_deg,classical_cost,coherent_cost,max_violation"
        )?;
        for s in &self.evaluated {
            let p = &s.plant;
            let ctrl = match &s.controller {
                Some(c) => format!(
                    "{},{},{},{}",
                    num(c.gamma),
                    kappas(&c.kappas),
                    num(c.chi_re),
                    num(c.chi_im)
                ),
                None => ",,,".to_string(),
            };
            for r in &s.reports {
                writeln!(
                    out,
                    "{},{},{},{},{},{ctrl},{},{},{},{},{},{},{}",
                    s.index,
                    num(p.gamma),
                    kappas(&p.kappas),
                    num(p.chi_re),
                    num(p.chi_im),
                    json_name(&r.claim_id),
                    r.reading.as_ref().map(json_name).unwrap_or_default(),
                    status_str(r.status),
                    opt(r.witness_theta_deg),
                    opt(r.classical_cost),
                    opt(r.coherent_cost),
                    opt(r.max_violation),
                )?;
            }
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} sample(s): {} evaluated, {} skipped\n",
            self.total_samples,
            self.evaluated.len(),
            self.skipped.len()
        );
        if self.evaluated.is_empty() {
            s.push_str("no physically realizable sample in the search space\n");
        }
        let mut counts = std::collections::BTreeMap::new();
        for r in self.evaluated.iter().flat_map(|e| &e.reports) {
            let key = match r.reading {
                Some(reading) => format!("{}[{}]", json_name(&r.claim_id), json_name(&reading)),
                None => json_name(&r.claim_id),
            };
            let entry = counts.entry(key).or_insert([0usize; 3]);
            entry[r.status as usize] += 1;
        }
        for (claim, [v, c, n]) in counts {
            let _ = writeln!(
                s,
                "  {claim}: {v} verified, {c} counterexample, {n} not applicable"
            );
        }
        s
    }
}
