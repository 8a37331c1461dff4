//! Refinement of a 2-triangulation to a unimodular one.
//!
//! A cone of multiplicity `2^l > 1` has a lattice point `u` that is half the
//! sum of some of its generators. Subdividing by `u` halves the multiplicity
//! of every affected slot, so after `l` generations a cone is unimodular.
//!
//! Subdivision vectors of generation `k` lie in `h_k * Delta`, where
//! `h_k = 1` for `k <= 0`, `h_1 = d/2`, and `h_k = (h_{k-1} + ... + h_{k-d}) / 2`.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::cone::{ConeId, LatticeVector, SimplicialCone};
use crate::error::{Error, Result};
use crate::triangulation::{support, Triangulation};

/// One subdivision performed during refinement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefineStep {
    pub source_id: ConeId,
    pub vector: LatticeVector,
    /// Generation of the source cone plus one; input cones are generation 0.
    pub generation: u32,
    pub parents: Vec<ConeId>,
}

#[derive(Clone, Debug)]
pub struct Refinement {
    pub triangulation: Triangulation,
    pub steps: Vec<RefineStep>,
    generations: HashMap<ConeId, u32>,
}

impl Refinement {
    pub fn generation(&self, id: ConeId) -> Option<u32> {
        self.generations.get(&id).copied()
    }
}

fn two_power_exponent(mu: &BigInt) -> Option<u64> {
    let mu = mu.to_u64()?;
    mu.is_power_of_two().then(|| u64::from(mu.trailing_zeros()))
}

/// Refines every cone to multiplicity one, recording each step.
pub fn refine(t: Triangulation) -> Result<Refinement> {
    refine_bounded(t, None)
}

/// [`refine`], giving up with [`Error::Budget`] once the result is known to
/// need more than `limit` cones.
///
/// Each split replaces a cone of multiplicity `mu` by at least two cones of
/// multiplicity `mu / 2`, so the total multiplicity never drops and the input
/// total is a lower bound on the final cone count.
pub fn refine_bounded(t: Triangulation, limit: Option<usize>) -> Result<Refinement> {
    if let Some(bad) = t
        .cones()
        .find(|c| two_power_exponent(c.multiplicity()).is_none())
    {
        return Err(Error::PhaseOrder(format!(
            "cone {} has multiplicity {}, not a power of two",
            bad.id(),
            bad.multiplicity()
        )));
    }
    if let Some(limit) = limit {
        let total = t.total_multiplicity();
        if total > BigInt::from(limit) {
            return Err(Error::Budget {
                needed: total.to_string(),
                limit,
            });
        }
    }
    let mut t = t;
    let mut generations: HashMap<ConeId, u32> = t.cone_ids().map(|id| (id, 0)).collect();
    let mut queue: VecDeque<ConeId> = t.cone_ids().collect();
    let mut steps = Vec::new();

    while let Some(id) = queue.pop_front() {
        if !t.is_live(id) {
            continue;
        }
        let cone = t.get(id).expect("live id").clone();
        if cone.is_unimodular() {
            continue;
        }
        let (u, face) = half_vector_with_face(&cone)?;
        let replacements = t.subdivide_all(&u, &face)?;
        if let Some(limit) = limit.filter(|&l| t.len() > l) {
            return Err(Error::Budget {
                needed: t.len().to_string(),
                limit,
            });
        }
        if !replacements.iter().any(|r| r.parent == id) {
            return Err(Error::Internal(format!(
                "half vector {u} did not split its source cone {id}"
            )));
        }
        let generation = generations[&id] + 1;
        let mut parents = Vec::with_capacity(replacements.len());
        for r in replacements {
            let g = generations[&r.parent] + 1;
            for &c in &r.children {
                generations.insert(c, g);
                queue.push_back(c);
            }
            parents.push(r.parent);
        }
        steps.push(RefineStep {
            source_id: id,
            vector: u,
            generation,
            parents,
        });
    }
    Ok(Refinement {
        triangulation: t,
        steps,
        generations,
    })
}

fn half_vector_with_face(cone: &SimplicialCone) -> Result<(LatticeVector, Vec<LatticeVector>)> {
    let u = cone
        .half_vector()?
        .ok_or_else(|| Error::Internal(format!("cone {} has odd multiplicity", cone.id())))?;
    let (numerators, _) = cone.barycentric_scaled(&u)?;
    let face = support(cone, &numerators);
    Ok((u, face))
}

/// Refines a 2-triangulation to a unimodular triangulation.
pub fn refine_to_unimodular(t: Triangulation) -> Result<Triangulation> {
    Ok(refine(t)?.triangulation)
}

/// Refines a single cone of multiplicity `2^l` on its own, with labels and
/// dilations measured against that cone.
pub fn refine_isolated(cone: &SimplicialCone) -> Result<Refinement> {
    refine_isolated_bounded(cone, None)
}

pub fn refine_isolated_bounded(cone: &SimplicialCone, limit: Option<usize>) -> Result<Refinement> {
    refine_bounded(Triangulation::new(cone.rebased()), limit)
}

/// `h_k` computed from its recurrence.
pub fn hk_exact(d: usize, k: i64) -> BigRational {
    if k <= 0 {
        return BigRational::one();
    }
    let half = BigRational::new(1.into(), 2.into());
    // window[i] = h_{j - d + i} while sweeping j upwards
    let mut window: VecDeque<BigRational> = (0..d).map(|_| BigRational::one()).collect();
    let mut current = BigRational::one();
    for j in 1..=k {
        current = if j == 1 {
            BigRational::new(BigInt::from(d), 2.into())
        } else {
            window.iter().sum::<BigRational>() * &half
        };
        window.pop_front();
        window.push_back(current.clone());
    }
    current
}

/// Closed-form upper bound `(d/2) (3/2)^(k-1)` on `h_k` for `k >= 1`; 1 for `k <= 0`.
pub fn hk_bound(d: usize, k: i64) -> f64 {
    if k <= 0 {
        return 1.0;
    }
    d as f64 / 2.0 * 1.5f64.powi((k - 1) as i32)
}

/// `(d/2) (3/2)^l` as an exact rational.
pub fn final_generator_bound(d: usize, l: u32) -> BigRational {
    let three = BigInt::from(3).pow(l);
    let two = BigInt::from(2).pow(l + 1);
    BigRational::new(BigInt::from(d) * three, two)
}
