//! Reduction of a simplicial cone to a 2-triangulation.
//!
//! While some cone `D` of the current triangulation has a multiplicity that
//! is not a power of two, take the largest prime `p` dividing it and an
//! element `x = (1/p) sum z_j g_j` of order `p` in the par-box of `D`, with the
//! generators enumerated by decreasing label index. The first
//! `floor(ln p / TAU)` coefficients must not be odd primes above `p/2`; the
//! remaining ones that are get lifted to `z_j + k p = 2^s t` with `t < p/2`.
//! The resulting vector `x'` then subdivides every cone that contains it.
//!
//! Each child multiplicity is `mu * z'_j / p`, and since `z'_j` is a power of
//! two times a number that is either composite below `p` or at most `2p/3`,
//! the potential `phi(mu)` drops by at least one per step.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::cone::{ConeId, LatticeVector, SimplicialCone};
use crate::error::{Error, Result};
use crate::number_theory::{self, factorize, is_prime, TAU};
use crate::triangulation::{support, Triangulation};

/// Number of leading label positions whose coefficient must avoid odd primes
/// above `p/2`.
pub fn protected_count(p: u64) -> usize {
    ((p as f64).ln() / TAU).floor() as usize
}

/// Admissible coefficient at a protected position.
pub fn coefficient_ok_protected(z: u64, p: u64) -> bool {
    !is_prime(z as i64) || 2 * z <= p || (z == 2 && p == 3)
}

/// Par-box element chosen by [`find_x`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoundVector {
    pub x: LatticeVector,
    /// Coefficients in label order, i.e. `z[j]` multiplies `generators[slots[j]]`.
    pub z: Vec<u64>,
    /// Generator slots by decreasing label index.
    pub slots: Vec<usize>,
    /// Multiple of the base order-p element that was accepted.
    pub multiplier: u64,
}

impl FoundVector {
    /// Coefficients rearranged into generator storage order.
    pub fn z_by_slot(&self) -> Vec<u64> {
        to_slot_order(&self.z, &self.slots)
    }
}

fn to_slot_order(z: &[u64], slots: &[usize]) -> Vec<u64> {
    let mut out = vec![0; z.len()];
    for (&c, &s) in z.iter().zip(slots) {
        out[s] = c;
    }
    out
}

/// Scans the multiples `j * x0 mod U`, `j = 1..p`, of the deterministic
/// order-p element `x0` and returns the first one whose protected
/// coefficients are admissible.
pub fn find_x(cone: &SimplicialCone, p: u64) -> Result<FoundVector> {
    let mu = cone.multiplicity_u64()?;
    if mu.is_power_of_two() {
        return Err(Error::Domain(format!(
            "multiplicity {mu} is already a power of two"
        )));
    }
    let base = cone.order_p_element(p)?;
    let slots = cone.label_order();
    let protected = protected_count(p).min(cone.dim());
    for multiplier in 1..p {
        let z: Vec<u64> = slots
            .iter()
            .map(|&s| ((u128::from(base.z[s]) * u128::from(multiplier)) % u128::from(p)) as u64)
            .collect();
        if z[..protected].iter().all(|&c| coefficient_ok_protected(c, p)) {
            let x = cone.lattice_point(&to_slot_order(&z, &slots), p)?;
            return Ok(FoundVector {
                x,
                z,
                slots,
                multiplier,
            });
        }
    }
    Err(Error::Internal(format!(
        "no multiple of the order-{p} element avoids large primes in {protected} protected positions"
    )))
}

/// Lifts unprotected coefficients that are odd primes above `p/2` to
/// `z + k p = 2^s t`. Input and output are in label order.
pub fn adjust_coefficients(z: &[u64], p: u64) -> Result<Vec<u64>> {
    let protected = protected_count(p);
    z.iter()
        .enumerate()
        .map(|(j, &c)| {
            if j < protected || !is_prime(c as i64) || 2 * c <= p || c == 2 {
                Ok(c)
            } else {
                let adj = number_theory::odd_adjust(c, p)?;
                Ok(c + adj.k * p)
            }
        })
        .collect()
}

/// One cone replaced during a subdivision step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub parent_id: ConeId,
    /// Cone whose multiplicity triggered the step.
    pub source_id: ConeId,
    pub p: u64,
    /// `p` times the barycentric coordinates of the par-box element `x`,
    /// per generator slot of the parent.
    pub z: Vec<u64>,
    /// Same for the lifted vector `x'`.
    pub z_prime: Vec<u64>,
    pub x_prime: LatticeVector,
    pub new_label_index: i64,
    pub children_ids: Vec<ConeId>,
    pub mu_parent: BigInt,
    pub mu_children: Vec<BigInt>,
}

/// State of a run: the triangulation with every cone created so far, the
/// trace, and the queue of cones still to look at.
#[derive(Clone, Debug)]
pub struct P2TState {
    pub triangulation: Triangulation,
    pub trace: Vec<TraceEvent>,
    pub queue: VecDeque<ConeId>,
    pub tau: f64,
}

impl P2TState {
    pub fn new(base: SimplicialCone) -> Self {
        let triangulation = Triangulation::new(base);
        let queue = triangulation.cone_ids().collect();
        Self {
            triangulation,
            trace: Vec::new(),
            queue,
            tau: TAU,
        }
    }

    pub fn base(&self) -> &SimplicialCone {
        self.triangulation.base()
    }

    pub fn all_created(&self) -> &[SimplicialCone] {
        self.triangulation.all_created()
    }

    /// Every live cone has a power-of-two multiplicity.
    pub fn is_two_triangulation(&self) -> bool {
        self.triangulation
            .cones()
            .all(|c| c.multiplicity().to_u64().is_some_and(u64::is_power_of_two))
    }

    /// Runs one subdivision step. Returns `false` once the queue is drained.
    pub fn step(&mut self) -> Result<bool> {
        while let Some(id) = self.queue.pop_front() {
            if !self.triangulation.is_live(id) {
                continue;
            }
            let cone = self.triangulation.get(id).expect("live id").clone();
            let mu = cone.multiplicity_u64()?;
            if mu.is_power_of_two() {
                continue;
            }
            self.subdivide(&cone, mu)?;
            return Ok(true);
        }
        Ok(false)
    }

    fn subdivide(&mut self, cone: &SimplicialCone, mu: u64) -> Result<()> {
        let p = factorize(mu)?.p_max()?;
        let found = find_x(cone, p)?;
        let z_prime = adjust_coefficients(&found.z, p)?;
        let z_prime_slots = to_slot_order(&z_prime, &found.slots);
        let x_prime = cone.lattice_point(&z_prime_slots, p)?;
        let face = support(cone, &z_prime_slots);

        let replacements = self.triangulation.subdivide_all(&x_prime, &face)?;
        if !replacements.iter().any(|r| r.parent == cone.id()) {
            return Err(Error::Internal(format!(
                "subdividing vector {x_prime} did not split its source cone {}",
                cone.id()
            )));
        }
        let pb = BigInt::from(p);
        for r in replacements {
            let parent = self.triangulation.get(r.parent).expect("parent id");
            let z_parent = if r.parent == cone.id() {
                found.z_by_slot()
            } else {
                scaled_coordinates(parent, &found.x, &pb)?
            };
            let z_prime_parent = scaled_coordinates_from(&r.subdivision.coefficients().0, &pb)?;
            let children: Vec<&SimplicialCone> = r
                .children
                .iter()
                .map(|&c| self.triangulation.get(c).expect("child id"))
                .collect();
            self.queue.extend(r.children.iter().copied());
            self.trace.push(TraceEvent {
                parent_id: r.parent,
                source_id: cone.id(),
                p,
                z: z_parent,
                z_prime: z_prime_parent,
                x_prime: x_prime.clone(),
                new_label_index: parent.label_depth() + 1,
                mu_parent: parent.multiplicity().clone(),
                mu_children: children.iter().map(|c| c.multiplicity().clone()).collect(),
                children_ids: r.children,
            });
        }
        Ok(())
    }
}

/// `p * lambda`, where `lambda` are the barycentric coordinates of `x`.
fn scaled_coordinates(cone: &SimplicialCone, x: &LatticeVector, p: &BigInt) -> Result<Vec<u64>> {
    scaled_coordinates_from(&cone.barycentric(x)?.0, p)
}

fn scaled_coordinates_from(lambda: &[num_rational::BigRational], p: &BigInt) -> Result<Vec<u64>> {
    lambda
        .iter()
        .map(|l| {
            let scaled = l * num_rational::BigRational::from_integer(p.clone());
            if !scaled.is_integer() || scaled.numer() < &BigInt::zero() {
                return Err(Error::Internal(format!(
                    "coordinate {l} is not a nonnegative multiple of 1/{p}"
                )));
            }
            scaled
                .to_integer()
                .to_u64()
                .ok_or_else(|| Error::TooLarge(scaled.to_string()))
        })
        .collect()
}

/// Subdivides `base` until every cone has a power-of-two multiplicity.
pub fn run_p2t(base: SimplicialCone) -> Result<P2TState> {
    let mut state = P2TState::new(base);
    while state.step()? {}
    Ok(state)
}
