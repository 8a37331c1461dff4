//! Running the pipeline and assembling reports.

use std::path::PathBuf;

use conetri_core::verify::{self, audit_isolated, audit_trace, certify_cones, final_bounds};
use conetri_core::{pow2, run_p2t, Error, LatticeVector, P2TState, SimplicialCone};
use num_bigint::BigInt;
use num_traits::Signed;
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::input::{parse_input, ParsedCone};
use crate::random::{campaign_rng, random_cone};
use crate::report::{
    fraction, generator_rows, small, Bounds, CampaignReport, Certificates, ConeEntry,
    IsolatedEntry, RunReport, Status, Summary, TraceEntry,
};

/// Default cap on the number of cones in a unimodular triangulation.
pub const DEFAULT_MAX_CONES: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub verify: bool,
    pub trace: bool,
    /// Refine each cone of the 2-triangulation on its own with fresh labels.
    pub isolated: bool,
    pub include_cones: bool,
    pub max_cones: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            verify: false,
            trace: false,
            isolated: false,
            include_cones: true,
            max_cones: Some(DEFAULT_MAX_CONES),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomSpec {
    pub dimension: usize,
    pub bound: i64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    File(PathBuf),
    Document(Vec<u8>),
    Random(RandomSpec),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub source: Source,
    pub seed: u64,
    pub format: Format,
    pub options: RunOptions,
}

/// Rendered output and the process exit code it calls for.
#[derive(Clone, Debug)]
pub struct Execution {
    pub document: String,
    pub exit_code: i32,
    pub warnings: Vec<String>,
    /// The trace array, when requested, for writing to its own file.
    pub trace: Option<String>,
    /// Names of failing certificate flags across all runs, first-seen order.
    pub failing: Vec<String>,
}

pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Ok => 0,
        Status::CertificateFailed => 2,
        Status::BudgetExceeded => 3,
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Execution> {
    match &cfg.source {
        Source::File(path) => {
            let bytes = std::fs::read(path).map_err(|source| CliError::Read {
                path: path.clone(),
                source,
            })?;
            execute_single(&parse_input(&bytes)?, cfg)
        }
        Source::Document(bytes) => execute_single(&parse_input(bytes)?, cfg),
        Source::Random(spec) => execute_campaign(*spec, cfg),
    }
}

fn execute_single(parsed: &ParsedCone, cfg: &RunConfig) -> Result<Execution> {
    let report = run_cone(parsed.cone.clone(), &cfg.options, None)?;
    let trace = match &report.trace {
        Some(t) => Some(serde_json::to_string_pretty(t)? + "\n"),
        None => None,
    };
    let document = match cfg.format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Text => report.to_text(),
    };
    Ok(Execution {
        document,
        exit_code: exit_code(report.status),
        warnings: parsed.warnings.clone(),
        trace,
        failing: report.failing.clone(),
    })
}

/// Runs `spec.count` random cones; run `i` draws from stream `i` of `seed`.
pub fn run_campaign(spec: RandomSpec, seed: u64, options: &RunOptions) -> Result<CampaignReport> {
    if spec.dimension < 2 || spec.bound < 1 {
        return Err(CliError::Input(format!(
            "random cones need dimension >= 2 and bound >= 1, got {} and {}",
            spec.dimension, spec.bound
        )));
    }
    let runs = (0..spec.count)
        .into_par_iter()
        .map(|i| {
            let mut rng = campaign_rng(seed, i);
            let cone = random_cone(spec.dimension, spec.bound, &mut rng);
            run_cone(cone, options, Some(i))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CampaignReport {
        seed,
        dimension: spec.dimension,
        bound: spec.bound,
        count: spec.count,
        summary: Summary::of(&runs),
        runs,
    })
}

fn execute_campaign(spec: RandomSpec, cfg: &RunConfig) -> Result<Execution> {
    let report = run_campaign(spec, cfg.seed, &cfg.options)?;
    let mut failing: Vec<String> = Vec::new();
    for name in report.runs.iter().flat_map(|r| &r.failing) {
        if !failing.contains(name) {
            failing.push(name.clone());
        }
    }
    let s = report.summary;
    let exit_code = if s.certificate_failed > 0 {
        2
    } else if s.budget_exceeded > 0 {
        3
    } else {
        0
    };
    let document = match cfg.format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Text => report.to_text(),
    };
    Ok(Execution {
        document,
        exit_code,
        warnings: Vec::new(),
        trace: None,
        failing,
    })
}

struct Refined {
    cones: Vec<Vec<LatticeVector>>,
    isolated: Option<Vec<IsolatedEntry>>,
    isolated_generation_ok: bool,
    isolated_final_ok: bool,
}

fn refine(p2t: &P2TState, options: &RunOptions) -> conetri_core::Result<Refined> {
    if !options.isolated {
        let r = pow2::refine_bounded(p2t.triangulation.clone(), options.max_cones)?;
        return Ok(Refined {
            cones: r
                .triangulation
                .cones()
                .map(|c| c.generators().to_vec())
                .collect(),
            isolated: None,
            isolated_generation_ok: true,
            isolated_final_ok: true,
        });
    }
    let mut out = Refined {
        cones: Vec::new(),
        isolated: options.verify.then(Vec::new),
        isolated_generation_ok: true,
        isolated_final_ok: true,
    };
    for cone in p2t.triangulation.cones() {
        let remaining = options.max_cones.map(|m| m.saturating_sub(out.cones.len()));
        let r = match pow2::refine_isolated_bounded(cone, remaining) {
            Err(Error::Budget { needed, .. }) => {
                let needed: BigInt = needed.parse().unwrap_or_default();
                return Err(Error::Budget {
                    needed: (needed + out.cones.len()).to_string(),
                    limit: options.max_cones.unwrap_or(usize::MAX),
                })
            }
            other => other?,
        };
        if let Some(entries) = out.isolated.as_mut() {
            if !cone.is_unimodular() {
                let audit = audit_isolated(&r)?;
                out.isolated_generation_ok &= audit.generation_ok;
                out.isolated_final_ok &= audit.final_ok;
                entries.push(
                    IsolatedEntry::new(cone, r.triangulation.len(), &audit)
                        .map_err(|e| Error::Internal(e.to_string()))?,
                );
            }
        }
        out.cones
            .extend(r.triangulation.cones().map(|c| c.generators().to_vec()));
    }
    Ok(out)
}

/// Runs both phases on one base cone and reports the outcome.
pub fn run_cone(base: SimplicialCone, options: &RunOptions, index: Option<u64>) -> Result<RunReport> {
    let d = base.dim();
    let base_rows = generator_rows(base.generators())?;
    let mu = small(base.multiplicity())?;
    let bounds: Bounds = final_bounds(mu, d)?.into();
    let p2t = run_p2t(base)?;

    let (refined, error) = match refine(&p2t, options) {
        Ok(r) => (Some(r), None),
        Err(e @ Error::Budget { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };

    let mut certificates = None;
    let mut violations = Vec::new();
    let mut max_dilation = None;
    let mut slack_ratio = None;
    match (&refined, options.verify) {
        (Some(r), true) => {
            let rep = certify_cones(&p2t, r.cones.iter().map(Vec::as_slice))?;
            // the length bound for a lone cone is informational in the plane
            let isolated = r.isolated.is_some() && d >= 3;
            certificates = Some(Certificates {
                volume_ok: Some(rep.volume_ok),
                containment_ok: Some(rep.containment_ok),
                all_unimodular: Some(rep.all_unimodular),
                phi_descent_ok: rep.phi_descent_ok,
                label_depth_ok: rep.label_depth_ok,
                mu_bound_ok: rep.mu_bound_ok,
                xi_length_ok: rep.xi_length_ok,
                final_bound_ok: Some(rep.final_bound_ok),
                isolated_generation_ok: isolated.then_some(r.isolated_generation_ok),
                isolated_final_ok: isolated.then_some(r.isolated_final_ok),
            });
            slack_ratio = rep.slack_ratio();
            max_dilation = rep.max_dilation.as_ref().map(fraction);
            violations = rep.violations;
        }
        (Some(r), false) => {
            let max = verify::max_dilation(p2t.base(), r.cones.iter().map(Vec::as_slice))?;
            let bound = bounds.cor.unwrap_or(bounds.thm);
            slack_ratio = num_traits::ToPrimitive::to_f64(&max)
                .filter(|&m| m > 0.0)
                .map(|m| bound / m);
            max_dilation = Some(fraction(&max));
        }
        (None, true) => {
            let audit = audit_trace(
                p2t.base(),
                &p2t.trace,
                p2t.all_created(),
                p2t.triangulation.cones(),
            )?;
            certificates = Some(Certificates {
                phi_descent_ok: audit.phi_descent_ok,
                label_depth_ok: audit.label_depth_ok,
                mu_bound_ok: audit.mu_bound_ok,
                xi_length_ok: audit.xi_length_ok,
                ..Certificates::default()
            });
            violations = audit.violations;
        }
        (None, false) => {}
    }

    let failing: Vec<String> = certificates
        .as_ref()
        .map(|c| c.failing().into_iter().map(String::from).collect())
        .unwrap_or_default();
    let status = if !failing.is_empty() {
        Status::CertificateFailed
    } else if refined.is_none() {
        Status::BudgetExceeded
    } else {
        Status::Ok
    };

    let cones = match (&refined, options.include_cones) {
        (Some(r), true) => Some(
            r.cones
                .iter()
                .map(|gens| {
                    Ok(ConeEntry {
                        generators: generator_rows(gens)?,
                        mu: small(&conetri_core::linalg::determinant_columns(gens)?.abs())?,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        _ => None,
    };
    let trace = if options.trace {
        Some(p2t.trace.iter().map(TraceEntry::new).collect::<Result<Vec<_>>>()?)
    } else {
        None
    };

    Ok(RunReport {
        index,
        dimension: d,
        base: base_rows,
        mu,
        status,
        failing,
        error,
        two_triangulation_cones: p2t.triangulation.len(),
        trace_events: p2t.trace.len(),
        cone_count: refined.as_ref().map(|r| r.cones.len()),
        max_dilation,
        bounds,
        slack_ratio,
        certificates,
        violations,
        isolated: refined.and_then(|r| r.isolated),
        cones,
        trace,
    })
}
