//! Purely-classical and coherent-classical estimation schemes.
//!
//! Each scheme reduces to a steady-state complex Kalman filter for some
//! (possibly augmented) linear quantum system observed through homodyne
//! detection. The mean-square error of the scalar estimate of
//! `z = C (a; a#)` is `C P C†` for the plant block of the error covariance.

use std::io::{self, Write};

use nalgebra::RowDVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{block_matrix, max_abs, CMat, RMat};
use crate::model::{DoubledMatrix, QuantumSystem, STRUCTURE_TOL};
use crate::riccati::{solve_care, FilterData, RiccatiSolution};

/// Homodyne detector angles, one per detected output channel.
#[derive(Debug, Clone, PartialEq)]
pub struct HomodyneConfig {
    pub angles: Vec<f64>,
}

impl HomodyneConfig {
    pub fn new(angles: Vec<f64>) -> Self {
        Self { angles }
    }

    pub fn single(theta: f64) -> Self {
        Self {
            angles: vec![theta],
        }
    }

    pub fn channels(&self) -> usize {
        self.angles.len()
    }

    /// `L = [diag(cos θ_i)  diag(sin θ_i)]`.
    pub fn projection(&self) -> RMat {
        let m = self.angles.len();
        let mut l = RMat::zeros(m, 2 * m);
        for (i, theta) in self.angles.iter().enumerate() {
            l[(i, i)] = theta.cos();
            l[(i, m + i)] = theta.sin();
        }
        l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Classical,
    #[serde(alias = "coherent_no_feedback")]
    Coherent,
    CoherentFeedback,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Classical => "classical",
            Scheme::Coherent => "coherent",
            Scheme::CoherentFeedback => "coherent_feedback",
        }
    }
}

/// Filter data for one scheme at one set of detector angles.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationProblem {
    pub filter: FilterData,
    /// `[C 0]`: the plant estimand padded over controller coordinates.
    pub estimand: RowDVector<Complex64>,
    pub scheme: Scheme,
    /// Mode counts of the stacked subsystems (plant first).
    pub mode_groups: Vec<usize>,
}

impl EstimationProblem {
    pub fn plant_dim(&self) -> usize {
        2 * self.mode_groups[0]
    }
}

fn require_estimand(plant: &QuantumSystem) -> Result<RowDVector<Complex64>> {
    plant
        .estimand()
        .cloned()
        .ok_or_else(|| Error::Configuration("plant has no estimand row C".into()))
}

fn require_channels(hd: &HomodyneConfig, expected: usize, what: &str) -> Result<()> {
    if hd.channels() != expected {
        return Err(Error::Configuration(format!(
            "{} homodyne angle(s) given for {expected} detected {what} channel(s)",
            hd.channels()
        )));
    }
    Ok(())
}

fn require_block(block: &DoubledMatrix, identity: bool, name: &str) -> Result<()> {
    let target = if identity {
        CMat::identity(block.realized().nrows(), block.realized().ncols())
    } else {
        CMat::zeros(block.realized().nrows(), block.realized().ncols())
    };
    let dev = max_abs(&(block.realized() - target));
    if dev > STRUCTURE_TOL {
        let want = if identity { "I" } else { "0" };
        return Err(Error::Contract(format!(
            "{name} must equal {want} (deviation {dev:.3e})"
        )));
    }
    Ok(())
}

/// Plant feedthrough restricted to the measured outputs must be `[I 0]`
/// over `[noise | control]` inputs.
fn check_plant_feedthrough(plant: &QuantumSystem) -> Result<()> {
    let ports = plant.ports();
    let k = plant.feedthrough();
    let noise = k.select(ports.measured.clone(), ports.noise.clone());
    if noise.rows() != noise.cols() {
        return Err(Error::Contract(format!(
            "plant has {} measured outputs but {} noise inputs",
            noise.rows(),
            noise.cols()
        )));
    }
    require_block(&noise, true, "plant feedthrough K")?;
    require_block(
        &k.select(ports.measured.clone(), ports.coupled.clone()),
        false,
        "plant feedthrough from the control input",
    )
}

fn pad(c: &RowDVector<Complex64>, extra: usize) -> RowDVector<Complex64> {
    let mut out = RowDVector::zeros(c.len() + extra);
    out.columns_mut(0, c.len()).copy_from(c);
    out
}

/// Purely-classical scheme: homodyne detection directly on the plant output.
pub fn classical_problem(plant: &QuantumSystem, hd: &HomodyneConfig) -> Result<EstimationProblem> {
    let estimand = require_estimand(plant)?;
    let measured = plant.ports().measured.clone();
    require_channels(hd, measured.len(), "plant output")?;
    check_plant_feedthrough(plant)?;
    let filter = FilterData::new(
        plant.drift().realized().clone(),
        plant.input().realized().clone(),
        plant
            .output()
            .select_rows(measured.clone())
            .realized()
            .clone(),
        plant.feedthrough().select_rows(measured).realized().clone(),
        hd.projection(),
    )?;
    Ok(EstimationProblem {
        filter,
        estimand,
        scheme: Scheme::Classical,
        mode_groups: vec![plant.n_modes()],
    })
}

/// Coherent-classical scheme without feedback: the plant output drives the
/// controller, whose output is homodyne detected.
pub fn coherent_problem(
    plant: &QuantumSystem,
    controller: &QuantumSystem,
    hd: &HomodyneConfig,
) -> Result<EstimationProblem> {
    let estimand = require_estimand(plant)?;
    let pp = plant.ports();
    let cp = controller.ports();
    if !cp.noise.is_empty() || !cp.fed_back.is_empty() {
        return Err(Error::Configuration(
            "controller has extra noise inputs or feedback outputs; not a feed-forward controller"
                .into(),
        ));
    }
    if cp.coupled.len() != pp.measured.len() {
        return Err(Error::Configuration(format!(
            "controller takes {} input channel(s), plant emits {}",
            cp.coupled.len(),
            pp.measured.len()
        )));
    }
    require_channels(hd, cp.measured.len(), "controller output")?;
    check_plant_feedthrough(plant)?;
    let kc_d = controller
        .feedthrough()
        .select(cp.measured.clone(), cp.coupled.clone());
    require_block(&kc_d, true, "controller feedthrough K_c")?;

    let f = plant.drift().realized();
    let g = plant.input().realized();
    let h = plant.output().select_rows(pp.measured.clone());
    let h = h.realized();
    let k = plant.feedthrough().select_rows(pp.measured.clone());
    let k = k.realized();
    let fc = controller.drift().realized();
    let gc = controller.input().realized();
    let hc = controller.output().select_rows(cp.measured.clone());
    let hc = hc.realized();
    let kc = kc_d.realized();

    let zero = CMat::zeros(f.nrows(), fc.ncols());
    let drift = block_matrix(&[&[f, &zero], &[&(gc * h), fc]])?;
    let noise = block_matrix(&[&[g], &[&(gc * k)]])?;
    let output = block_matrix(&[&[&(kc * h), hc]])?;
    let feedthrough = kc * k;

    let filter = FilterData::new(drift, noise, output, feedthrough, hd.projection())?;
    Ok(EstimationProblem {
        filter,
        estimand: pad(&estimand, 2 * controller.n_modes()),
        scheme: Scheme::Coherent,
        mode_groups: vec![plant.n_modes(), controller.n_modes()],
    })
}

/// Coherent-classical scheme with coherent feedback: the controller takes
/// the plant output `Y` and its own noise `A~`, returns `U` to the plant's
/// control input and sends `Y~` to the detector.
pub fn coherent_feedback_problem(
    plant: &QuantumSystem,
    controller: &QuantumSystem,
    hd: &HomodyneConfig,
) -> Result<EstimationProblem> {
    let estimand = require_estimand(plant)?;
    let pp = plant.ports();
    let cp = controller.ports();
    if pp.coupled.is_empty() {
        return Err(Error::Configuration(
            "plant has no control input for coherent feedback".into(),
        ));
    }
    if cp.fed_back.len() != pp.coupled.len() {
        return Err(Error::Configuration(format!(
            "controller feeds back {} channel(s), plant accepts {}",
            cp.fed_back.len(),
            pp.coupled.len()
        )));
    }
    if cp.coupled.len() != pp.measured.len() {
        return Err(Error::Configuration(format!(
            "controller takes {} plant channel(s), plant emits {}",
            cp.coupled.len(),
            pp.measured.len()
        )));
    }
    require_channels(hd, cp.measured.len(), "controller output")?;
    check_plant_feedthrough(plant)?;

    let kc = controller.feedthrough();
    let k_det_noise = kc.select(cp.measured.clone(), cp.noise.clone());
    let k_det_plant = kc.select(cp.measured.clone(), cp.coupled.clone());
    let k_fb_noise = kc.select(cp.fed_back.clone(), cp.noise.clone());
    let k_fb_plant = kc.select(cp.fed_back.clone(), cp.coupled.clone());
    require_block(&k_det_noise, true, "controller feedthrough K~c1 (A~ to Y~)")?;
    require_block(&k_fb_plant, true, "controller feedthrough Kc2 (Y to U)")?;
    require_block(&k_fb_noise, false, "controller feedthrough Kc1 (A~ to U)")?;
    require_block(&k_det_plant, false, "controller feedthrough K~c2 (Y to Y~)")?;

    let f = plant.drift().realized();
    let g1 = plant.input().select_columns(pp.noise.clone());
    let g2 = plant.input().select_columns(pp.coupled.clone());
    let h = plant.output().select_rows(pp.measured.clone());
    let k = plant
        .feedthrough()
        .select(pp.measured.clone(), pp.noise.clone());
    let (g1, g2, h, k) = (g1.realized(), g2.realized(), h.realized(), k.realized());

    let fc = controller.drift().realized();
    let gc1 = controller.input().select_columns(cp.noise.clone());
    let gc2 = controller.input().select_columns(cp.coupled.clone());
    let hc_det = controller.output().select_rows(cp.measured.clone());
    let hc_fb = controller.output().select_rows(cp.fed_back.clone());
    let (gc1, gc2, hc_det, hc_fb) = (
        gc1.realized(),
        gc2.realized(),
        hc_det.realized(),
        hc_fb.realized(),
    );
    let (kt1, kt2, kc1, kc2) = (
        k_det_noise.realized(),
        k_det_plant.realized(),
        k_fb_noise.realized(),
        k_fb_plant.realized(),
    );

    let drift = block_matrix(&[&[&(f + g2 * kc2 * h), &(g2 * hc_fb)], &[&(gc2 * h), fc]])?;
    let noise = block_matrix(&[&[&(g1 + g2 * kc2 * k), &(g2 * kc1)], &[&(gc2 * k), gc1]])?;
    let output = block_matrix(&[&[&(kt2 * h), hc_det]])?;
    let feedthrough = block_matrix(&[&[&(kt2 * k), kt1]])?;

    let filter = FilterData::new(drift, noise, output, feedthrough, hd.projection())?;
    Ok(EstimationProblem {
        filter,
        estimand: pad(&estimand, 2 * controller.n_modes()),
        scheme: Scheme::CoherentFeedback,
        mode_groups: vec![plant.n_modes(), controller.n_modes()],
    })
}

/// Builds the filter problem for `scheme`; `controller` is ignored for the
/// classical scheme and required otherwise.
pub fn build_problem(
    scheme: Scheme,
    plant: &QuantumSystem,
    controller: Option<&QuantumSystem>,
    hd: &HomodyneConfig,
) -> Result<EstimationProblem> {
    let need = || Error::Configuration(format!("scheme {} needs a controller", scheme.as_str()));
    match scheme {
        Scheme::Classical => classical_problem(plant, hd),
        Scheme::Coherent => coherent_problem(plant, controller.ok_or_else(need)?, hd),
        Scheme::CoherentFeedback => {
            coherent_feedback_problem(plant, controller.ok_or_else(need)?, hd)
        }
    }
}

/// `c P c†` as a complex number; its imaginary part is rounding noise.
pub fn quadratic_cost(row: &RowDVector<Complex64>, p: &CMat) -> Complex64 {
    (row * p * row.adjoint())[(0, 0)]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub cost: f64,
    pub imaginary_part: f64,
    pub solution: RiccatiSolution,
}

pub fn evaluate(problem: &EstimationProblem) -> Result<Evaluation> {
    let solution = solve_care(&problem.filter)?;
    let value = quadratic_cost(&problem.estimand, &solution.covariance);
    Ok(Evaluation {
        cost: value.re,
        imaginary_part: value.im,
        solution,
    })
}

/// Steady-state mean-square estimation error.
pub fn cost(problem: &EstimationProblem) -> Result<f64> {
    Ok(evaluate(problem)?.cost)
}

/// Classical filter `dx = Fe x dt + Ge dy`, `ẑ = He x`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorRealization {
    pub drift: CMat,
    pub gain: CMat,
    pub readout: RowDVector<Complex64>,
}

pub fn estimator_realization(problem: &EstimationProblem) -> Result<EstimatorRealization> {
    let solution = solve_care(&problem.filter)?;
    let drift = &problem.filter.drift - &solution.gain * problem.filter.measured_output();
    Ok(EstimatorRealization {
        drift,
        gain: solution.gain,
        readout: problem.estimand.clone(),
    })
}

/// A failed grid point; the curve keeps an empty slot for it.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub theta: f64,
    pub scheme: Scheme,
    pub message: String,
}

/// Costs sampled over a grid of homodyne angles (radians, ascending).
#[derive(Debug, Clone, PartialEq)]
pub struct CostCurve {
    pub label: String,
    pub thetas: Vec<f64>,
    pub classical_costs: Vec<Option<f64>>,
    pub coherent_costs: Option<Vec<Option<f64>>>,
    pub diagnostics: Vec<Diagnostic>,
}

/// First index of the smallest value; ties resolve to the smaller angle.
pub fn grid_argmin(values: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = v {
            if best.is_none_or(|(_, b)| *v < b) {
                best = Some((i, *v));
            }
        }
    }
    best.map(|(i, _)| i)
}

impl CostCurve {
    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn thetas_deg(&self) -> Vec<f64> {
        self.thetas.iter().map(|t| t.to_degrees()).collect()
    }

    /// Pairs `(θ, J̄c, J̃c)` at points where both costs are available.
    pub fn paired(&self) -> Vec<(f64, f64, f64)> {
        let Some(coh) = &self.coherent_costs else {
            return Vec::new();
        };
        self.thetas
            .iter()
            .zip(&self.classical_costs)
            .zip(coh)
            .filter_map(|((t, a), b)| Some((*t, (*a)?, (*b)?)))
            .collect()
    }

    /// Largest `|J̃c - J̄c|` over the grid.
    pub fn max_abs_difference(&self) -> Option<f64> {
        self.paired()
            .iter()
            .map(|(_, a, b)| (a - b).abs())
            .reduce(f64::max)
    }

    pub fn classical_argmin(&self) -> Option<usize> {
        grid_argmin(&self.classical_costs)
    }

    pub fn coherent_argmin(&self) -> Option<usize> {
        self.coherent_costs.as_deref().and_then(grid_argmin)
    }

    /// CSV with header `theta_deg,classical_cost,coherent_cost`; the
    /// coherent column is omitted for classical-only curves and failed
    /// points are left empty. Numbers carry 15 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        match &self.coherent_costs {
            Some(_) => writeln!(out, "theta_deg,classical_cost,coherent_cost")?,
            None => writeln!(out, "theta_deg,classical_cost")?,
        }
        let cell = |v: Option<f64>| v.map(|x| format_significant(x, 15)).unwrap_or_default();
        for (i, theta) in self.thetas.iter().enumerate() {
            let deg = format_significant(theta.to_degrees(), 15);
            match &self.coherent_costs {
                Some(coh) => writeln!(
                    out,
                    "{deg},{},{}",
                    cell(self.classical_costs[i]),
                    cell(coh[i])
                )?,
                None => writeln!(out, "{deg},{}", cell(self.classical_costs[i]))?,
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

/// `%g`-style formatting with `digits` significant digits.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{exp}", trim_fraction(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `count` evenly spaced angles from `start_deg` to `end_deg`, in radians.
pub fn degree_grid(start_deg: f64, end_deg: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start_deg.to_radians()],
        _ => {
            let step = (end_deg - start_deg) / (count - 1) as f64;
            (0..count)
                .map(|i| (start_deg + step * i as f64).to_radians())
                .collect()
        }
    }
}

/// Default grid: 0° to 180° in 1° steps.
pub fn default_grid() -> Vec<f64> {
    degree_grid(0.0, 180.0, 181)
}

/// Evaluates the classical cost and, when a controller is supplied, the
/// coherent cost of `scheme` at every grid angle. Solver failures leave
/// empty slots and a diagnostic; configuration errors abort the sweep.
pub fn sweep(
    label: &str,
    plant: &QuantumSystem,
    controller: Option<&QuantumSystem>,
    scheme: Scheme,
    grid: &[f64],
) -> Result<CostCurve> {
    if grid.is_empty() {
        return Err(Error::Configuration("empty angle grid".into()));
    }
    let upper = std::f64::consts::PI + 1e-12;
    if let Some(bad) = grid.iter().find(|t| !(**t >= -1e-12 && **t <= upper)) {
        return Err(Error::Configuration(format!(
            "angle {bad} rad outside [0, π]"
        )));
    }
    if scheme == Scheme::Classical && controller.is_some() {
        return Err(Error::Configuration(
            "classical scheme takes no controller".into(),
        ));
    }
    if scheme != Scheme::Classical && controller.is_none() {
        return Err(Error::Configuration(format!(
            "scheme {} needs a controller",
            scheme.as_str()
        )));
    }

    type Point = (Option<f64>, Option<f64>, Vec<Diagnostic>);
    let points: Vec<Point> = grid
        .par_iter()
        .map(|&theta| -> Result<Point> {
            let hd = HomodyneConfig::single(theta);
            let mut diags = Vec::new();
            let mut run = |problem: EstimationProblem| match cost(&problem) {
                Ok(v) => Some(v),
                Err(e) => {
                    diags.push(Diagnostic {
                        theta,
                        scheme: problem.scheme,
                        message: e.to_string(),
                    });
                    None
                }
            };
            let classical = run(classical_problem(plant, &hd)?);
            let coherent = match controller {
                Some(ctrl) => run(build_problem(scheme, plant, Some(ctrl), &hd)?),
                None => None,
            };
            Ok((classical, coherent, diags))
        })
        .collect::<Result<_>>()?;

    let mut curve = CostCurve {
        label: label.to_string(),
        thetas: grid.to_vec(),
        classical_costs: Vec::with_capacity(grid.len()),
        coherent_costs: controller.map(|_| Vec::with_capacity(grid.len())),
        diagnostics: Vec::new(),
    };
    for (classical, coherent, diags) in points {
        curve.classical_costs.push(classical);
        if let Some(c) = curve.coherent_costs.as_mut() {
            c.push(coherent);
        }
        curve.diagnostics.extend(diags);
    }
    Ok(curve)
}
