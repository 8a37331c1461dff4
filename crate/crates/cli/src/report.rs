//! Serializable run reports.

use std::fmt::Write as _;

use conetri_core::verify::{FinalBounds, IsolatedAudit};
use conetri_core::{LatticeVector, SimplicialCone, TraceEvent};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Every requested certificate passed, or none were requested.
    Ok,
    CertificateFailed,
    /// The unimodular refinement would exceed the cone limit.
    BudgetExceeded,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeEntry {
    pub generators: Vec<Vec<i64>>,
    pub mu: u64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Bounds {
    pub thm: f64,
    pub cor: Option<f64>,
    pub mu_ceiling: f64,
}

impl From<FinalBounds> for Bounds {
    fn from(b: FinalBounds) -> Self {
        Self {
            thm: b.thm,
            cor: b.cor,
            mu_ceiling: b.mu_ceiling,
        }
    }
}

/// Certificate flags. Flags about the final triangulation are absent when
/// the refinement did not complete.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Certificates {
    pub volume_ok: Option<bool>,
    pub containment_ok: Option<bool>,
    pub all_unimodular: Option<bool>,
    pub phi_descent_ok: bool,
    pub label_depth_ok: bool,
    pub mu_bound_ok: bool,
    pub xi_length_ok: bool,
    pub final_bound_ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isolated_generation_ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isolated_final_ok: Option<bool>,
}

impl Certificates {
    /// Names of flags that are present and false.
    pub fn failing(&self) -> Vec<&'static str> {
        let flags = [
            ("volume_ok", self.volume_ok),
            ("containment_ok", self.containment_ok),
            ("all_unimodular", self.all_unimodular),
            ("phi_descent_ok", Some(self.phi_descent_ok)),
            ("label_depth_ok", Some(self.label_depth_ok)),
            ("mu_bound_ok", Some(self.mu_bound_ok)),
            ("xi_length_ok", Some(self.xi_length_ok)),
            ("final_bound_ok", self.final_bound_ok),
            ("isolated_generation_ok", self.isolated_generation_ok),
            ("isolated_final_ok", self.isolated_final_ok),
        ];
        flags
            .into_iter()
            .filter(|(_, v)| *v == Some(false))
            .map(|(name, _)| name)
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceEntry {
    pub parent_id: usize,
    pub source_id: usize,
    pub p: u64,
    pub z: Vec<u64>,
    pub z_prime: Vec<u64>,
    pub x_prime: Vec<i64>,
    pub new_label_index: i64,
    pub children_ids: Vec<usize>,
    pub mu_parent: u64,
    pub mu_children: Vec<u64>,
}

impl TraceEntry {
    pub fn new(ev: &TraceEvent) -> Result<Self> {
        Ok(Self {
            parent_id: ev.parent_id.0,
            source_id: ev.source_id.0,
            p: ev.p,
            z: ev.z.clone(),
            z_prime: ev.z_prime.clone(),
            x_prime: coords(&ev.x_prime)?,
            new_label_index: ev.new_label_index,
            children_ids: ev.children_ids.iter().map(|c| c.0).collect(),
            mu_parent: small(&ev.mu_parent)?,
            mu_children: ev.mu_children.iter().map(small).collect::<Result<_>>()?,
        })
    }
}

/// Refinement of one cone of the 2-triangulation on its own.
#[derive(Clone, Debug, Serialize)]
pub struct IsolatedEntry {
    pub generators: Vec<Vec<i64>>,
    pub l: u32,
    pub cones: usize,
    pub generation_ok: bool,
    pub final_ok: bool,
    pub max_dilation: String,
}

impl IsolatedEntry {
    pub fn new(cone: &SimplicialCone, cones: usize, audit: &IsolatedAudit) -> Result<Self> {
        Ok(Self {
            generators: generator_rows(cone.generators())?,
            l: audit.l,
            cones,
            generation_ok: audit.generation_ok,
            final_ok: audit.final_ok,
            max_dilation: fraction(&audit.max_dilation),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<u64>,
    pub dimension: usize,
    pub base: Vec<Vec<i64>>,
    pub mu: u64,
    pub status: Status,
    pub failing: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Number of cones in the 2-triangulation.
    pub two_triangulation_cones: usize,
    pub trace_events: usize,
    pub cone_count: Option<usize>,
    pub max_dilation: Option<String>,
    pub bounds: Bounds,
    pub slack_ratio: Option<f64>,
    pub certificates: Option<Certificates>,
    pub violations: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isolated: Option<Vec<IsolatedEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cones: Option<Vec<ConeEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEntry>>,
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Summary {
    pub runs: usize,
    pub ok: usize,
    pub certificate_failed: usize,
    pub budget_exceeded: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CampaignReport {
    pub seed: u64,
    pub dimension: usize,
    pub bound: i64,
    pub count: u64,
    pub summary: Summary,
    pub runs: Vec<RunReport>,
}

impl Summary {
    pub fn of(runs: &[RunReport]) -> Self {
        let mut s = Summary {
            runs: runs.len(),
            ..Summary::default()
        };
        for r in runs {
            match r.status {
                Status::Ok => s.ok += 1,
                Status::CertificateFailed => s.certificate_failed += 1,
                Status::BudgetExceeded => s.budget_exceeded += 1,
            }
        }
        s
    }
}

/// Exact rational as `"num/den"`.
pub fn fraction(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub(crate) fn small(n: &BigInt) -> Result<u64> {
    n.to_u64()
        .ok_or_else(|| conetri_core::Error::TooLarge(n.to_string()).into())
}

pub(crate) fn coords(v: &LatticeVector) -> Result<Vec<i64>> {
    v.coords()
        .iter()
        .map(|c| {
            c.to_i64()
                .ok_or_else(|| conetri_core::Error::TooLarge(c.to_string()).into())
        })
        .collect()
}

pub(crate) fn generator_rows(gens: &[LatticeVector]) -> Result<Vec<Vec<i64>>> {
    gens.iter().map(coords).collect()
}

fn rows_text(rows: &[Vec<i64>]) -> String {
    let parts: Vec<String> = rows
        .iter()
        .map(|r| {
            let c: Vec<String> = r.iter().map(i64::to_string).collect();
            format!("({})", c.join(","))
        })
        .collect();
    format!("[{}]", parts.join(" "))
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), ToString::to_string)
}

impl RunReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(i) = self.index {
            let _ = writeln!(out, "run {i}");
        }
        let _ = writeln!(out, "base {} d={} mu={}", rows_text(&self.base), self.dimension, self.mu);
        let status = match self.status {
            Status::Ok => "ok",
            Status::CertificateFailed => "certificate_failed",
            Status::BudgetExceeded => "budget_exceeded",
        };
        let _ = writeln!(out, "status {status}");
        if let Some(e) = &self.error {
            let _ = writeln!(out, "error {e}");
        }
        if !self.failing.is_empty() {
            let _ = writeln!(out, "failing {}", self.failing.join(" "));
        }
        let _ = writeln!(
            out,
            "2-triangulation {} cones, {} trace events",
            self.two_triangulation_cones, self.trace_events
        );
        let _ = writeln!(out, "unimodular cones {}", opt(&self.cone_count));
        let _ = writeln!(out, "max_dilation {}", opt(&self.max_dilation));
        let _ = writeln!(
            out,
            "bounds thm={:e} cor={} mu_ceiling={:e}",
            self.bounds.thm,
            self.bounds.cor.map_or_else(|| "-".to_string(), |c| format!("{c:e}")),
            self.bounds.mu_ceiling
        );
        if let Some(s) = self.slack_ratio {
            let _ = writeln!(out, "slack_ratio {s:e}");
        }
        if let Some(c) = &self.certificates {
            let _ = writeln!(
                out,
                "certificates volume={} containment={} unimodular={} phi_descent={} label_depth={} mu_bound={} xi_length={} final_bound={}",
                opt(&c.volume_ok),
                opt(&c.containment_ok),
                opt(&c.all_unimodular),
                c.phi_descent_ok,
                c.label_depth_ok,
                c.mu_bound_ok,
                c.xi_length_ok,
                opt(&c.final_bound_ok)
            );
            if c.isolated_generation_ok.is_some() {
                let _ = writeln!(
                    out,
                    "isolated generation={} final={}",
                    opt(&c.isolated_generation_ok),
                    opt(&c.isolated_final_ok)
                );
            }
        }
        for v in &self.violations {
            let _ = writeln!(out, "violation {v}");
        }
        if let Some(cones) = &self.cones {
            for c in cones {
                let _ = writeln!(out, "cone {} mu={}", rows_text(&c.generators), c.mu);
            }
        }
        out
    }
}

impl CampaignReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "campaign seed={} d={} bound={} count={}",
            self.seed, self.dimension, self.bound, self.count
        );
        for r in &self.runs {
            out.push_str(&r.to_text());
        }
        let s = self.summary;
        let _ = writeln!(
            out,
            "summary runs={} ok={} certificate_failed={} budget_exceeded={}",
            s.runs, s.ok, s.certificate_failed, s.budget_exceeded
        );
        out
    }
}
