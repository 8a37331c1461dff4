//! Independent certification of triangulations and of the length bounds.
//!
//! Nothing here trusts cached multiplicities or the triangulation index:
//! determinants are recomputed from generators and containment is checked
//! against the base cone directly. Real-valued bounds are rounded up by one
//! ulp before an exact rational comparison, so float error can only make a
//! certificate more lenient by that ulp, never stricter.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cone::{BarycentricFrame, LatticeVector, SimplicialCone};
use crate::error::{Error, Result};
use crate::linalg;
use crate::number_theory::factorize;
use crate::p2t::{P2TState, TraceEvent};
use crate::pow2::{final_generator_bound, hk_exact, Refinement};
use crate::triangulation::Triangulation;

/// Slack for comparisons of the potential, whose certified gaps are >= 1.
pub const PHI_SLACK: f64 = 1e-6;

/// Exponent `5 + (3/2) log2(3/2)` of the simplified final bound.
pub fn epsilon() -> f64 {
    5.0 + 1.5 * 1.5f64.log2()
}

/// `q <= bound`, with `bound` rounded up by one ulp first.
pub fn rational_le_bound(q: &BigRational, bound: f64) -> bool {
    if bound.is_nan() {
        return false;
    }
    if bound == f64::INFINITY {
        return true;
    }
    match BigRational::from_float(bound.next_up()) {
        Some(b) => *q <= b,
        None => false,
    }
}

fn le_with_slack(a: f64, b: f64) -> bool {
    a <= b + PHI_SLACK
}

/// Volume of the slice of a cone on the hyperplane where the base dilation
/// is one, normalized so the base itself has volume `mu(base)`:
/// `|det| / prod dilation(g)`.
///
/// Summed over a triangulation this gives `mu(base)` exactly. Plain
/// multiplicities only add up when every generator has dilation one.
pub fn section_volume(frame: &BarycentricFrame, gens: &[LatticeVector], det_abs: &BigInt) -> Result<BigRational> {
    let mut denom = BigRational::one();
    for g in gens {
        let dil = frame.dilation(g)?;
        if dil.is_zero() {
            return Err(Error::Degenerate);
        }
        denom *= dil;
    }
    Ok(BigRational::from_integer(det_abs.clone()) / denom)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriangulationCheck {
    pub volume_ok: bool,
    pub containment_ok: bool,
    pub unimodular: Vec<bool>,
    /// Largest dilation of any generator that lies in the base.
    pub max_dilation: BigRational,
}

impl TriangulationCheck {
    pub fn all_unimodular(&self) -> bool {
        self.unimodular.iter().all(|&u| u)
    }
}

/// Dilation numerators over the base frame, memoized per generator. `None`
/// marks a generator outside the base.
struct DilationCache<'a> {
    frame: BarycentricFrame,
    known: HashMap<&'a LatticeVector, Option<BigInt>>,
}

impl<'a> DilationCache<'a> {
    fn new(base: &SimplicialCone) -> Result<Self> {
        Ok(Self {
            frame: BarycentricFrame::new(base)?,
            known: HashMap::new(),
        })
    }

    fn numerator(&mut self, g: &'a LatticeVector) -> Result<Option<&BigInt>> {
        if !self.known.contains_key(g) {
            let nums = self.frame.numerators(g)?;
            let value = if nums.iter().any(Signed::is_negative) {
                None
            } else {
                Some(nums.into_iter().sum())
            };
            self.known.insert(g, value);
        }
        Ok(self.known[g].as_ref())
    }

    fn max_dilation(&self) -> BigRational {
        let max = self.known.values().flatten().max().cloned().unwrap_or_default();
        BigRational::new(max, self.frame.denominator().clone())
    }
}

/// Checks volume additivity (see [`section_volume`]), containment in `base`,
/// and per-cone unimodularity.
pub fn verify_triangulation<'a, I>(base: &SimplicialCone, cones: I) -> Result<TriangulationCheck>
where
    I: IntoIterator<Item = &'a [LatticeVector]>,
{
    let mut cache = DilationCache::new(base)?;
    let base_mu = linalg::determinant_columns(base.generators())?.abs();
    let den_power = cache.frame.denominator().pow(base.dim() as u32);
    // section volume = |det| den^d / prod numerators, grouped by denominator
    let mut groups: HashMap<BigInt, BigInt> = HashMap::new();
    let mut containment_ok = true;
    let mut degenerate = false;
    let mut unimodular = Vec::new();
    for gens in cones {
        if gens.len() != base.dim() {
            return Err(Error::Dimension(format!(
                "cone with {} generators in dimension {}",
                gens.len(),
                base.dim()
            )));
        }
        let det = linalg::determinant_columns(gens)?.abs();
        unimodular.push(det.is_one());
        let mut product = Some(BigInt::one());
        for g in gens {
            product = match (product, cache.numerator(g)?) {
                (Some(acc), Some(n)) => Some(acc * n),
                _ => None,
            };
        }
        match product {
            None => containment_ok = false,
            Some(p) if p.is_zero() => degenerate = true,
            Some(p) if !det.is_zero() => *groups.entry(p).or_default() += det,
            Some(_) => {}
        }
    }
    let mut terms: Vec<BigRational> = groups
        .into_iter()
        .map(|(p, det)| BigRational::new(det * &den_power, p))
        .collect();
    terms.sort_by(|a, b| a.denom().cmp(b.denom()).then_with(|| a.numer().cmp(b.numer())));
    let total = pairwise_sum(terms);
    Ok(TriangulationCheck {
        volume_ok: containment_ok && !degenerate && total == BigRational::from_integer(base_mu),
        containment_ok,
        unimodular,
        max_dilation: cache.max_dilation(),
    })
}

/// Balanced summation, which keeps intermediate denominators far smaller than
/// a running total does.
fn pairwise_sum(mut terms: Vec<BigRational>) -> BigRational {
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a + b,
                None => a,
            });
        }
        terms = next;
    }
    terms.pop().unwrap_or_else(BigRational::zero)
}

/// Largest dilation of any generator of a unimodular triangulation.
pub fn max_dilation<'a, I>(base: &SimplicialCone, cones: I) -> Result<BigRational>
where
    I: IntoIterator<Item = &'a [LatticeVector]>,
{
    let mut cache = DilationCache::new(base)?;
    for gens in cones {
        let det = linalg::determinant_columns(gens)?;
        if !det.abs().is_one() {
            return Err(Error::PhaseOrder(format!(
                "cone with multiplicity {} is not unimodular",
                det.abs()
            )));
        }
        for g in gens {
            if cache.numerator(g)?.is_none() {
                return Err(Error::NotContained);
            }
        }
    }
    Ok(cache.max_dilation())
}

/// The three real-valued bounds attached to a base multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FinalBounds {
    /// `(d^2/4) mu 4^phi(mu) (3/2)^((1/2) ld mu (ld mu + 3))`
    pub thm: f64,
    /// `(d^2/64) mu^eps (3/2)^((1/2) (ld mu)^2)`; undefined for `mu = 1`.
    pub cor: Option<f64>,
    /// `2^((1/2) ld mu (ld mu + 3))`, ceiling for intermediate multiplicities.
    pub mu_ceiling: f64,
}

pub fn mu_ceiling(mu: u64) -> f64 {
    let ld = (mu as f64).log2();
    2f64.powf(0.5 * ld * (ld + 3.0))
}

pub fn theorem_bound(mu: u64, d: usize) -> Result<f64> {
    if mu == 0 {
        return Err(Error::Domain("multiplicity must be positive".into()));
    }
    let ld = (mu as f64).log2();
    let phi = factorize(mu)?.phi();
    let dd = (d * d) as f64;
    Ok(dd / 4.0 * mu as f64 * 4f64.powf(phi) * 1.5f64.powf(0.5 * ld * (ld + 3.0)))
}

pub fn corollary_bound(mu: u64, d: usize) -> Result<f64> {
    if mu < 2 {
        return Err(Error::Domain(format!(
            "simplified bound needs a non-unimodular cone, got multiplicity {mu}"
        )));
    }
    let ld = (mu as f64).log2();
    let dd = (d * d) as f64;
    Ok(dd / 64.0 * (mu as f64).powf(epsilon()) * 1.5f64.powf(0.5 * ld * ld))
}

pub fn final_bounds(mu: u64, d: usize) -> Result<FinalBounds> {
    Ok(FinalBounds {
        thm: theorem_bound(mu, d)?,
        cor: if mu >= 2 { Some(corollary_bound(mu, d)?) } else { None },
        mu_ceiling: mu_ceiling(mu),
    })
}

/// Outcome of [`audit_trace`], with a description of every violation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TraceAudit {
    pub phi_descent_ok: bool,
    pub label_depth_ok: bool,
    pub mu_bound_ok: bool,
    pub xi_length_ok: bool,
    pub violations: Vec<String>,
}

impl TraceAudit {
    pub fn all_ok(&self) -> bool {
        self.phi_descent_ok && self.label_depth_ok && self.mu_bound_ok && self.xi_length_ok
    }
}

fn mu_u64(mu: &BigInt) -> Result<u64> {
    mu.to_u64().ok_or_else(|| Error::TooLarge(mu.to_string()))
}

/// Audits a 2-power reduction run.
///
/// * every child of every event: `phi(mu child) <= phi(mu parent) - 1`
/// * every created cone: label depth `<= phi(mu base) - 1`
/// * every created cone and every multiplicity in the trace:
///   `mu <= 2^((1/2) ld mu_base (ld mu_base + 3))`
/// * every label `s >= 0` of a final cone: dilation `<= (d/2) mu_base 4^s`,
///   every label at all: dilation `<= (d/2) mu_base 4^phi(mu_base)`, and
///   labels `s < 0` have dilation `<= 1`
pub fn audit_trace<'a, I>(
    base: &SimplicialCone,
    trace: &[TraceEvent],
    all_created: &[SimplicialCone],
    final_cones: I,
) -> Result<TraceAudit>
where
    I: IntoIterator<Item = &'a SimplicialCone>,
{
    let mut audit = TraceAudit {
        phi_descent_ok: true,
        label_depth_ok: true,
        mu_bound_ok: true,
        xi_length_ok: true,
        violations: Vec::new(),
    };
    let d = base.dim();
    let mu = mu_u64(base.multiplicity())?;
    let phi_base = factorize(mu)?.phi();

    for ev in trace {
        let phi_parent = factorize(mu_u64(&ev.mu_parent)?)?.phi();
        for (child, child_mu) in ev.children_ids.iter().zip(&ev.mu_children) {
            let phi_child = factorize(mu_u64(child_mu)?)?.phi();
            if !le_with_slack(phi_child, phi_parent - 1.0) {
                audit.phi_descent_ok = false;
                audit.violations.push(format!(
                    "potential of {child} is {phi_child:.6}, parent {} has {phi_parent:.6}",
                    ev.parent_id
                ));
            }
        }
    }

    let ceiling = mu_ceiling(mu);
    for ev in trace {
        for m in std::iter::once(&ev.mu_parent).chain(&ev.mu_children) {
            if !rational_le_bound(&BigRational::from_integer(m.clone()), ceiling) {
                audit.mu_bound_ok = false;
                audit.violations.push(format!(
                    "event on {} records multiplicity {m}, ceiling {ceiling:.3}",
                    ev.parent_id
                ));
            }
        }
    }
    for cone in all_created {
        let depth = cone.label_depth() as f64;
        if !le_with_slack(depth, phi_base - 1.0) {
            audit.label_depth_ok = false;
            audit.violations.push(format!(
                "label depth of {} is {depth}, bound {:.6}",
                cone.id(),
                phi_base - 1.0
            ));
        }
        let cmu = BigRational::from_integer(cone.multiplicity().clone());
        if !rational_le_bound(&cmu, ceiling) {
            audit.mu_bound_ok = false;
            audit.violations.push(format!(
                "multiplicity of {} is {}, ceiling {ceiling:.3}",
                cone.id(),
                cone.multiplicity()
            ));
        }
    }

    let frame = BarycentricFrame::new(base)?;
    let half_d_mu = BigRational::new(BigInt::from(d) * BigInt::from(mu), 2.into());
    let phi_bound = d as f64 / 2.0 * mu as f64 * 4f64.powf(phi_base);
    let one = BigRational::one();
    let mut dilations: HashMap<LatticeVector, BigRational> = HashMap::new();
    for cone in final_cones {
        for (s, vector) in cone.labels().iter() {
            let dil = match dilations.get(vector) {
                Some(dil) => dil.clone(),
                None => {
                    let dil = frame.dilation(vector)?;
                    dilations.insert(vector.clone(), dil.clone());
                    dil
                }
            };
            let ok_s = if s < 0 {
                dil <= one
            } else {
                dil <= &half_d_mu * BigRational::from_integer(BigInt::from(4).pow(s as u32))
            };
            if !ok_s || !rational_le_bound(&dil, phi_bound) {
                audit.xi_length_ok = false;
                audit.violations.push(format!(
                    "label {s} of {} has dilation {dil}",
                    cone.id()
                ));
            }
        }
    }
    Ok(audit)
}

/// Per-generation and final length checks for a single cone refined on its own.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsolatedAudit {
    /// `mu = 2^l` of the refined cone.
    pub l: u32,
    /// Every subdivision vector of generation `k` lies in `h_k * Delta`.
    pub generation_ok: bool,
    /// Every final generator lies in `(d/2) (3/2)^l * Delta`.
    pub final_ok: bool,
    pub max_dilation: BigRational,
    pub violations: Vec<String>,
}

pub fn audit_isolated(refinement: &Refinement) -> Result<IsolatedAudit> {
    let t = &refinement.triangulation;
    let base = t.base();
    let mu = mu_u64(base.multiplicity())?;
    if !mu.is_power_of_two() {
        return Err(Error::PhaseOrder(format!(
            "isolated refinement of multiplicity {mu}"
        )));
    }
    let l = mu.trailing_zeros();
    let d = base.dim();
    let frame = BarycentricFrame::new(base)?;
    let mut violations = Vec::new();

    let mut generation_ok = true;
    for step in &refinement.steps {
        let dil = frame.dilation(&step.vector)?;
        let h = hk_exact(d, i64::from(step.generation));
        if dil > h {
            generation_ok = false;
            violations.push(format!(
                "generation {} vector {} has dilation {dil} > h = {h}",
                step.generation, step.vector
            ));
        }
    }

    let bound = final_generator_bound(d, l);
    let max = max_dilation(base, t.cones().map(SimplicialCone::generators))?;
    let final_ok = max <= bound;
    if !final_ok {
        violations.push(format!("max dilation {max} exceeds {bound}"));
    }
    Ok(IsolatedAudit {
        l,
        generation_ok,
        final_ok,
        max_dilation: max,
        violations,
    })
}

/// Every certificate for one base cone.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport {
    pub volume_ok: bool,
    pub containment_ok: bool,
    pub all_unimodular: bool,
    pub max_dilation: Option<BigRational>,
    pub phi_descent_ok: bool,
    pub label_depth_ok: bool,
    pub mu_bound_ok: bool,
    pub xi_length_ok: bool,
    pub final_bound_thm: f64,
    pub final_bound_cor: Option<f64>,
    pub mu_ceiling: f64,
    pub final_bound_ok: bool,
    pub violations: Vec<String>,
}

impl CertificateReport {
    /// Names of the flags that did not pass.
    pub fn failing(&self) -> Vec<&'static str> {
        [
            ("volume_ok", self.volume_ok),
            ("containment_ok", self.containment_ok),
            ("all_unimodular", self.all_unimodular),
            ("phi_descent_ok", self.phi_descent_ok),
            ("label_depth_ok", self.label_depth_ok),
            ("mu_bound_ok", self.mu_bound_ok),
            ("xi_length_ok", self.xi_length_ok),
            ("final_bound_ok", self.final_bound_ok),
        ]
        .into_iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name)
        .collect()
    }

    pub fn passed(&self) -> bool {
        self.failing().is_empty()
    }

    /// `cor / max_dilation`, how far the measured lengths sit below the bound.
    pub fn slack_ratio(&self) -> Option<f64> {
        let max = self.max_dilation.as_ref()?.to_f64()?;
        let bound = self.final_bound_cor.unwrap_or(self.final_bound_thm);
        (max > 0.0).then(|| bound / max)
    }
}

/// Certifies the output of the full pipeline.
pub fn certify(p2t: &P2TState, unimodular: &Triangulation) -> Result<CertificateReport> {
    certify_cones(p2t, unimodular.cones().map(SimplicialCone::generators))
}

/// [`certify`] for a final cone set given as generator lists, which need not
/// come from a single [`Triangulation`].
pub fn certify_cones<'a, I>(p2t: &P2TState, cones: I) -> Result<CertificateReport>
where
    I: IntoIterator<Item = &'a [LatticeVector]>,
{
    let base = p2t.base();
    let mu = mu_u64(base.multiplicity())?;
    let check = verify_triangulation(base, cones)?;
    let all_unimodular = check.all_unimodular();
    let max = (all_unimodular && check.containment_ok).then(|| check.max_dilation.clone());
    let audit = audit_trace(
        base,
        &p2t.trace,
        p2t.all_created(),
        p2t.triangulation.cones(),
    )?;
    let bounds = final_bounds(mu, base.dim())?;
    let final_bound_ok = match &max {
        None => false,
        Some(m) => {
            rational_le_bound(m, bounds.thm) && bounds.cor.map_or(true, |c| rational_le_bound(m, c))
        }
    };
    let mut violations = audit.violations;
    if !check.volume_ok {
        violations.push("multiplicities do not sum to the base multiplicity".into());
    }
    if !check.containment_ok {
        violations.push("a generator lies outside the base cone".into());
    }
    Ok(CertificateReport {
        volume_ok: check.volume_ok,
        containment_ok: check.containment_ok,
        all_unimodular,
        max_dilation: max,
        phi_descent_ok: audit.phi_descent_ok,
        label_depth_ok: audit.label_depth_ok,
        mu_bound_ok: audit.mu_bound_ok,
        xi_length_ok: audit.xi_length_ok,
        final_bound_thm: bounds.thm,
        final_bound_cor: bounds.cor,
        mu_ceiling: bounds.mu_ceiling,
        final_bound_ok,
        violations,
    })
}
