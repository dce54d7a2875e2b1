//! Estimation reports and the small JSON side files used by the command line.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::Samples;
use crate::error::{Error, Result};
use crate::estimation::{
    assumption_diagnostics, compare_estimates, consensus, fit_all_local, fit_global, relative_mse,
    AssumptionDiagnostics, EqualityCheck, FitResult, LocalEstimate, NewtonOptions,
};
use crate::experiments::{provenance, Estimator, Provenance};
use crate::io::{samples_to_csv, ModelFile, FORMAT_VERSION};
use crate::local::LocalKind;
use crate::model::Model;
use crate::sampler::SamplerConfig;

/// A parameter vector on disk: `{"format_version":1,"theta":[...]}` (labels optional).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaFile {
    pub format_version: u32,
    pub theta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

impl ThetaFile {
    pub fn new(theta: Vec<f64>, model: &Model) -> ThetaFile {
        ThetaFile {
            format_version: FORMAT_VERSION,
            labels: (0..model.j_len()).map(|j| model.j_label(j)).collect(),
            theta,
        }
    }

    /// Reads a theta file or a sampler side file (both carry `theta`).
    pub fn from_json(s: &str, model: &Model) -> Result<Vec<f64>> {
        let v: serde_json::Value = serde_json::from_str(s)?;
        let theta: Vec<f64> = serde_json::from_value(
            v.get("theta").cloned().ok_or_else(|| Error::Invalid("no 'theta' field".into()))?,
        )?;
        if theta.len() != model.j_len() {
            return Err(Error::Invalid(format!(
                "parameter has {} entries, model has {}",
                theta.len(),
                model.j_len()
            )));
        }
        Ok(theta)
    }
}

/// Written next to a samples file: how it was generated.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSidecar {
    pub format_version: u32,
    pub provenance: Provenance,
    pub sampler: SamplerConfig,
    pub theta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forbid: Vec<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LabelledValue {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    /// 1-based vertex, absent for the global fit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex: Option<usize>,
    pub converged: bool,
    pub iterations: usize,
    pub final_gradient_norm: f64,
    pub nonexistence_flag: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonexistence_reason: Option<String>,
    pub loglik: f64,
    pub scale: f64,
    pub estimates: Vec<LabelledValue>,
}

impl FitSummary {
    fn global(fit: &FitResult, model: &Model) -> FitSummary {
        FitSummary {
            vertex: None,
            estimates: fit
                .theta_hat
                .iter()
                .enumerate()
                .map(|(j, &value)| LabelledValue { label: model.j_label(j), value })
                .collect(),
            ..Self::base(fit)
        }
    }

    fn local(e: &LocalEstimate, model: &Model) -> FitSummary {
        FitSummary {
            vertex: Some(e.v + 1),
            estimates: e
                .ps_block
                .iter()
                .map(|&(j, value)| LabelledValue { label: model.j_label(j), value })
                .collect(),
            ..Self::base(&e.fit)
        }
    }

    fn base(fit: &FitResult) -> FitSummary {
        FitSummary {
            vertex: None,
            converged: fit.converged,
            iterations: fit.iterations,
            final_gradient_norm: fit.final_gradient_norm,
            nonexistence_flag: fit.nonexistence_flag,
            nonexistence_reason: fit.nonexistence_reason.clone(),
            loglik: fit.loglik,
            scale: fit.scale,
            estimates: vec![],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsensusEntry {
    pub label: String,
    pub value: f64,
    pub contributors: usize,
    pub poisoned: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EqualityEntry {
    pub vertex: usize,
    pub hop: usize,
    pub max_discrepancy: f64,
    pub hypothesis_holds: bool,
    pub conditional_converged: bool,
    pub marginal_converged: bool,
}

impl From<EqualityCheck> for EqualityEntry {
    fn from(c: EqualityCheck) -> Self {
        EqualityEntry {
            vertex: c.v + 1,
            hop: c.hop,
            max_discrepancy: c.max_discrepancy,
            hypothesis_holds: c.hypothesis_holds,
            conditional_converged: c.conditional_converged,
            marginal_converged: c.marginal_converged,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimationReport {
    pub format_version: u32,
    pub provenance: Provenance,
    pub estimator: Estimator,
    pub n: usize,
    pub fits: Vec<FitSummary>,
    /// Global-J estimate: the global fit, or the consensus of the local fits.
    pub theta_hat: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub consensus: Vec<ConsensusEntry>,
    pub partial: bool,
    pub poisoned: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub equality: Vec<EqualityEntry>,
    pub diagnostics: AssumptionDiagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_mse: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

#[derive(Serialize)]
struct FitConfig<'a> {
    estimator: Estimator,
    model: ModelFile,
    samples: &'a str,
    theta_star: Option<&'a [f64]>,
    check_equality: bool,
}

/// Fit `estimator`, and for local estimators optionally compare against the fit of
/// the other family (conditional vs marginal) at the same hop.
pub fn estimation_report(
    estimator: Estimator,
    samples: &Samples,
    model: &Model,
    theta_star: Option<&[f64]>,
    check_equality: bool,
    timings: bool,
) -> Result<EstimationReport> {
    let start = Instant::now();
    if let Some(t) = theta_star {
        if t.len() != model.j_len() {
            return Err(Error::Invalid("theta-star length does not match the model".into()));
        }
    }
    let csv = samples_to_csv(samples, model)?;
    let prov = provenance(&FitConfig {
        estimator,
        model: ModelFile::from_model(model),
        samples: &csv,
        theta_star,
        check_equality,
    })?;
    let opts = NewtonOptions::default();
    let (fits, theta_hat, cons, partial, poisoned, equality) = match estimator.local_kind() {
        None => {
            let fit = fit_global(samples, model, &opts)?;
            let poisoned = fit.nonexistence_flag;
            (vec![FitSummary::global(&fit, model)], fit.theta_hat, vec![], false, poisoned, vec![])
        }
        Some(kind) => {
            let ests = fit_all_local(kind, samples, model, &opts)?;
            let c = consensus(&ests, model);
            let cons = (0..model.j_len())
                .map(|j| ConsensusEntry {
                    label: model.j_label(j),
                    value: c.theta_hat[j],
                    contributors: c.contributors[j],
                    poisoned: c.poisoned[j],
                })
                .collect();
            let equality = if check_equality {
                let other = if kind.is_conditional() {
                    LocalKind::marginal(kind.hop())
                } else {
                    LocalKind::conditional(kind.hop())
                };
                let others = fit_all_local(other, samples, model, &opts)?;
                ests.iter()
                    .zip(&others)
                    .map(|(a, b)| {
                        let (c, m) = if kind.is_conditional() { (a, b) } else { (b, a) };
                        compare_estimates(c, m).map(EqualityEntry::from)
                    })
                    .collect::<Result<Vec<_>>>()?
            } else {
                vec![]
            };
            let fits = ests.iter().map(|e| FitSummary::local(e, model)).collect();
            let poisoned = c.any_poisoned();
            (fits, c.theta_hat, cons, c.partial, poisoned, equality)
        }
    };
    let reference = theta_star.unwrap_or(&theta_hat);
    let diagnostics = assumption_diagnostics(samples, model, reference)?;
    let relative_mse = theta_star.map(|t| relative_mse(&theta_hat, t)).transpose()?;
    Ok(EstimationReport {
        format_version: FORMAT_VERSION,
        provenance: prov,
        estimator,
        n: samples.len(),
        fits,
        theta_hat,
        consensus: cons,
        partial,
        poisoned,
        equality,
        diagnostics,
        relative_mse,
        seconds: timings.then(|| start.elapsed().as_secs_f64()),
    })
}
