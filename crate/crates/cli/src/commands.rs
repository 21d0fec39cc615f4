//! The four subcommands. Predicted exponents are always recomputed here from
//! the closed forms, never read from input.

use decoupling_lab::envelope::EnvelopeParams;
use decoupling_lab::exponents::{classify, discres_bounds, lower_bound_exponent, lower_bound_terms, sharp_exponent, ExponentTriple, RegionCase};
use decoupling_lab::expsum::{expsum_ratios, fit_growth, CoefficientVector, GrowthSample};
use decoupling_lab::families::{
    auto_grid, build_family, build_family_on_net, decoupling_for_spec, fit_exponent, DecouplingSample, FamilyParams, FamilySpec,
};
use decoupling_lab::geometry::{FreqPoint, FrequencyNet};
use decoupling_lab::mixed_norm::GridSpec;
use decoupling_lab::Exponent;
use serde::Serialize;

use crate::config::{Format, NetChoice, RunConfig};
use crate::error::CliError;
use crate::report::{render, ReportRow};
use crate::selftest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Exponent,
    Lowerbound,
    Expsum,
    Selftest,
}

/// Text to emit and the process exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentRecord {
    pub d: usize,
    pub q: String,
    pub r: String,
    pub in_region: bool,
    pub lower_bound: f64,
    pub sharp: Option<f64>,
    pub case: Option<String>,
}

fn triple(cfg: &RunConfig, q: Exponent, r: Exponent) -> Result<ExponentTriple, CliError> {
    Ok(ExponentTriple::new(q, r, cfg.d as u32)?)
}

pub fn cmd_exponent(cfg: &RunConfig) -> Result<ExponentRecord, CliError> {
    let report = classify(&triple(cfg, cfg.q, cfg.r)?);
    Ok(ExponentRecord {
        d: cfg.d,
        q: cfg.q.to_string(),
        r: cfg.r.to_string(),
        in_region: report.in_region,
        lower_bound: report.lower_bound,
        sharp: report.sharp,
        case: report.case.map(|c| {
            match c {
                RegionCase::InRegion => "in_region",
                RegionCase::CaseQleR => "q_le_r",
                RegionCase::CaseQgeR => "q_ge_r",
            }
            .to_string()
        }),
    })
}

pub fn family_params(cfg: &RunConfig, delta: f64) -> Result<FamilyParams, CliError> {
    let mut p = FamilyParams::new(delta, cfg.d);
    p.sep_exponent = cfg.sep_exponent;
    p.eps0 = cfg.eps0;
    p.envelope = EnvelopeParams::new(cfg.m)?;
    p.trunc = cfg.trunc;
    p.h_x = cfg.h_x;
    p.h_t = cfg.h_t;
    p.tail_cutoff = cfg.tail_cutoff;
    p.budget = cfg.budget;
    p.validate()?;
    Ok(p)
}

fn family_at(cfg: &RunConfig, delta: f64) -> Result<(FamilySpec, GridSpec), CliError> {
    let params = family_params(cfg, delta)?;
    let spec = match cfg.net {
        NetChoice::Lattice => build_family(cfg.family, &params)?,
        NetChoice::Origin => build_family_on_net(cfg.family, &params, &FrequencyNet::single(FreqPoint::zero(cfg.d), delta))?,
    };
    let grid = auto_grid(&spec, params.trunc)?;
    Ok((spec, grid))
}

/// Decoupling ratios along the `δ` ladder for several exponent pairs sharing
/// one synthesis per `δ`. Rows are grouped by pair: samples, then a fit row.
pub fn lowerbound_rows(cfg: &RunConfig, pairs: &[(Exponent, Exponent)]) -> Result<Vec<ReportRow>, CliError> {
    // refuse before doing any work if some δ is over budget
    for &delta in &cfg.deltas {
        family_at(cfg, delta)?;
    }
    let mut per_delta: Vec<Vec<DecouplingSample>> = Vec::with_capacity(cfg.deltas.len());
    for &delta in &cfg.deltas {
        let (spec, grid) = family_at(cfg, delta)?;
        per_delta.push(decoupling_for_spec(&spec, &grid, pairs)?);
    }
    let family = match cfg.net {
        NetChoice::Lattice => cfg.family.to_string(),
        NetChoice::Origin => format!("{}@origin", cfg.family),
    };
    let mut rows = Vec::new();
    for (k, &(q, r)) in pairs.iter().enumerate() {
        let base = ReportRow {
            experiment: "lowerbound".into(),
            family: Some(family.clone()),
            d: cfg.d,
            q: q.to_string(),
            r: r.to_string(),
            ..Default::default()
        };
        let samples: Vec<DecouplingSample> = per_delta.iter().map(|s| s[k].clone()).collect();
        for s in &samples {
            rows.push(ReportRow {
                row: "sample".into(),
                scale: Some(s.delta),
                numerator: Some(s.numerator),
                denominator: Some(s.denominator),
                ratio: Some(s.ratio),
                ..base.clone()
            });
        }
        if samples.len() >= 2 {
            let fit = fit_exponent(&samples)?;
            let predicted = match cfg.net {
                NetChoice::Origin => 0.0,
                NetChoice::Lattice => lower_bound_terms(&triple(cfg, q, r)?)[cfg.family.term_index()],
            };
            rows.push(ReportRow {
                row: "fit".into(),
                slope: Some(fit.slope),
                intercept: Some(fit.intercept),
                max_residual: Some(fit.max_residual),
                predicted: Some(predicted),
                pass: Some((fit.slope - predicted).abs() <= cfg.tol),
                ..base
            });
        }
    }
    Ok(rows)
}

pub fn cmd_lowerbound(cfg: &RunConfig) -> Result<Vec<ReportRow>, CliError> {
    lowerbound_rows(cfg, &[(cfg.q, cfg.r)])
}

/// Normalized exponential-sum norms along the `N` ladder, grouped by pair.
pub fn expsum_rows(cfg: &RunConfig, pairs: &[(Exponent, Exponent)]) -> Result<Vec<ReportRow>, CliError> {
    let mut per_n: Vec<Vec<GrowthSample>> = Vec::with_capacity(cfg.n_ladder.len());
    for &n in &cfg.n_ladder {
        let coeffs = CoefficientVector::new(cfg.coeffs, n, cfg.d)?;
        per_n.push(expsum_ratios(&coeffs, pairs, cfg.oversample)?);
    }
    let mut rows = Vec::new();
    for (k, &(q, r)) in pairs.iter().enumerate() {
        let base = ReportRow {
            experiment: "expsum".into(),
            coeffs: Some(cfg.coeffs.to_string()),
            d: cfg.d,
            q: q.to_string(),
            r: r.to_string(),
            ..Default::default()
        };
        let samples: Vec<GrowthSample> = per_n.iter().map(|s| s[k].clone()).collect();
        for s in &samples {
            rows.push(ReportRow {
                row: "sample".into(),
                scale: Some(s.n as f64),
                numerator: Some(s.numerator),
                denominator: Some(s.l2),
                ratio: Some(s.ratio),
                ..base.clone()
            });
        }
        if samples.len() >= 3 {
            let fit = fit_growth(&samples)?;
            let t = triple(cfg, q, r)?;
            let predicted = sharp_exponent(&t).unwrap_or_else(|_| lower_bound_exponent(&t));
            let proven = discres_bounds(&t);
            let pass = match proven {
                Some(b) => fit.slope <= b + cfg.tol,
                None => (fit.slope - predicted).abs() <= cfg.tol,
            };
            rows.push(ReportRow {
                row: "fit".into(),
                slope: Some(fit.slope),
                intercept: Some(fit.intercept),
                max_residual: Some(fit.max_residual),
                predicted: Some(predicted),
                proven_bound: proven,
                pass: Some(pass),
                ..base
            });
        }
    }
    Ok(rows)
}

pub fn cmd_expsum(cfg: &RunConfig) -> Result<Vec<ReportRow>, CliError> {
    expsum_rows(cfg, &[(cfg.q, cfg.r)])
}

/// Run a command on the configured worker pool.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| CliError::Failure(e.to_string()))?;
            pool.install(|| dispatch(command, cfg))
        }
        None => dispatch(command, cfg),
    }
}

fn dispatch(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ok = |text| Outcome { text, exit_code: 0 };
    match command {
        Command::Exponent => {
            let rec = cmd_exponent(cfg)?;
            Ok(ok(match cfg.format {
                Format::Csv => render(&[rec], Format::Csv)?,
                Format::Json => serde_json::to_string_pretty(&rec)? + "\n",
            }))
        }
        Command::Lowerbound => Ok(ok(render(&cmd_lowerbound(cfg)?, cfg.format)?)),
        Command::Expsum => Ok(ok(render(&cmd_expsum(cfg)?, cfg.format)?)),
        Command::Selftest => {
            let outcomes = selftest::run_selftest(cfg)?;
            let failed = outcomes.iter().any(|o| !o.passed);
            Ok(Outcome { text: selftest::summary(&outcomes), exit_code: i32::from(failed) })
        }
    }
}
