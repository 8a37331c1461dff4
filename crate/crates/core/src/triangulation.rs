//! Triangulations of a base cone built by successive stellar subdivisions.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::cone::{BarycentricFrame, ConeId, LatticeVector, SimplicialCone, Subdivision};
use crate::error::{Error, Result};
use crate::verify::section_volume;

/// A subdivision of a base cone into simplicial subcones.
///
/// Every cone ever created is kept in an arena indexed by [`ConeId`]; the
/// current triangulation is the subset of live ids. Because cones only come
/// from stellar subdivisions applied to every cone containing the vector, the
/// triangulation stays face-to-face, and the cones containing a vector are
/// exactly the live cones that have all generators of its carrier face.
#[derive(Clone, Debug)]
pub struct Triangulation {
    arena: Vec<SimplicialCone>,
    live: BTreeSet<ConeId>,
    by_generator: HashMap<LatticeVector, BTreeSet<ConeId>>,
}

/// One cone replaced during [`Triangulation::subdivide_all`].
#[derive(Clone, Debug)]
pub struct Replacement {
    pub parent: ConeId,
    pub subdivision: Subdivision,
    pub children: Vec<ConeId>,
}

impl Triangulation {
    pub fn new(base: SimplicialCone) -> Self {
        let mut t = Self {
            arena: Vec::new(),
            live: BTreeSet::new(),
            by_generator: HashMap::new(),
        };
        t.insert(base);
        t
    }

    fn insert(&mut self, cone: SimplicialCone) -> ConeId {
        let id = ConeId(self.arena.len());
        let cone = cone.with_id(id);
        for g in cone.generators() {
            self.by_generator.entry(g.clone()).or_default().insert(id);
        }
        self.arena.push(cone);
        self.live.insert(id);
        id
    }

    fn remove(&mut self, id: ConeId) {
        self.live.remove(&id);
        for g in self.arena[id.0].generators() {
            if let Some(ids) = self.by_generator.get_mut(g) {
                ids.remove(&id);
                if ids.is_empty() {
                    self.by_generator.remove(g);
                }
            }
        }
    }

    /// The base cone, with id `#0`.
    pub fn base(&self) -> &SimplicialCone {
        &self.arena[0]
    }

    pub fn get(&self, id: ConeId) -> Option<&SimplicialCone> {
        self.arena.get(id.0)
    }

    pub fn is_live(&self, id: ConeId) -> bool {
        self.live.contains(&id)
    }

    /// Live cones in id order.
    pub fn cones(&self) -> impl Iterator<Item = &SimplicialCone> + '_ {
        self.live.iter().map(|id| &self.arena[id.0])
    }

    pub fn cone_ids(&self) -> impl Iterator<Item = ConeId> + '_ {
        self.live.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    /// Every cone created so far, live or not, in creation order.
    pub fn all_created(&self) -> &[SimplicialCone] {
        &self.arena
    }

    pub fn total_multiplicity(&self) -> BigInt {
        self.cones().map(|c| c.multiplicity()).sum()
    }

    pub fn is_unimodular(&self) -> bool {
        self.cones().all(|c| c.multiplicity().is_one())
    }

    /// Live cones containing `x`, where `face` spans the face of some live cone
    /// holding `x` in its relative interior.
    pub fn cones_containing(&self, x: &LatticeVector, face: &[LatticeVector]) -> Vec<ConeId> {
        if face.is_empty() {
            return self.cones_containing_scan(x);
        }
        let mut sets = Vec::with_capacity(face.len());
        for g in face {
            match self.by_generator.get(g) {
                Some(ids) => sets.push(ids),
                None => return Vec::new(),
            }
        }
        sets.sort_by_key(|ids| ids.len());
        let (smallest, rest) = sets.split_first().expect("nonempty face");
        smallest
            .iter()
            .copied()
            .filter(|id| rest.iter().all(|ids| ids.contains(id)))
            .filter(|id| self.arena[id.0].contains(x))
            .collect()
    }

    /// Live cones containing `x`, by testing every cone.
    pub fn cones_containing_scan(&self, x: &LatticeVector) -> Vec<ConeId> {
        self.cones()
            .filter(|c| c.contains(x))
            .map(SimplicialCone::id)
            .collect()
    }

    /// Stellar-subdivides every live cone containing `x`. Cones for which `x`
    /// is already a generator stay as they are and are not reported.
    pub fn subdivide_all(
        &mut self,
        x: &LatticeVector,
        face: &[LatticeVector],
    ) -> Result<Vec<Replacement>> {
        if x.is_zero() {
            return Err(Error::Degenerate);
        }
        let mut out = Vec::new();
        for id in self.cones_containing(x, face) {
            let subdivision = self.arena[id.0].stellar_subdivide(x)?;
            if subdivision.is_noop() {
                continue;
            }
            self.remove(id);
            let children = subdivision
                .children
                .iter()
                .map(|(_, child)| self.insert(child.clone()))
                .collect();
            out.push(Replacement {
                parent: id,
                subdivision,
                children,
            });
        }
        Ok(out)
    }

    /// Sum of the normalized section volumes of the live cones, which equals
    /// the base multiplicity for any subdivision of the base.
    pub fn section_volume(&self) -> Result<BigRational> {
        let frame = BarycentricFrame::new(self.base())?;
        let mut total = BigRational::zero();
        for c in self.cones() {
            total += section_volume(&frame, c.generators(), c.multiplicity())?;
        }
        Ok(total)
    }

    pub fn volume_ok(&self) -> bool {
        self.section_volume()
            .is_ok_and(|v| v == BigRational::from_integer(self.base().multiplicity().clone()))
    }
}

/// Generators in the slots where `coefficients` is nonzero.
pub(crate) fn support<T: Zero>(cone: &SimplicialCone, coefficients: &[T]) -> Vec<LatticeVector> {
    cone.generators()
        .iter()
        .zip(coefficients)
        .filter(|(_, c)| !c.is_zero())
        .map(|(g, _)| g.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v<const N: usize>(c: [i64; N]) -> LatticeVector {
        LatticeVector::from(c)
    }

    #[test]
    fn single_cone() {
        let base = SimplicialCone::new(vec![v([1, 0]), v([1, 3])]).unwrap();
        let t = Triangulation::new(base.clone());
        assert_eq!(t.len(), 1);
        assert_eq!(t.base().id(), ConeId(0));
        assert!(t.volume_ok());
        assert!(!t.is_unimodular());
    }

    #[test]
    fn subdivide_all_hits_neighbours() {
        let base = SimplicialCone::new(vec![v([1, 0, 0]), v([0, 1, 0]), v([0, 0, 1])]).unwrap();
        let mut t = Triangulation::new(base);
        t.subdivide_all(&v([1, 1, 1]), &[v([1, 0, 0]), v([0, 1, 0]), v([0, 0, 1])])
            .unwrap();
        assert_eq!(t.len(), 3);
        // (1,1,0) lies on a boundary facet of the base, inside one cone
        let face = [v([1, 0, 0]), v([0, 1, 0])];
        let hits = t.cones_containing(&v([1, 1, 0]), &face);
        assert_eq!(hits, t.cones_containing_scan(&v([1, 1, 0])));
        assert_eq!(hits.len(), 1);
        let reps = t.subdivide_all(&v([1, 1, 0]), &face).unwrap();
        assert_eq!(reps.len(), 1);
        assert_eq!(t.len(), 4);
        assert!(t.volume_ok());
        assert_eq!(t.all_created().len(), 1 + 3 + 2);
    }

    #[test]
    fn noop_leaves_cone_alone() {
        let base = SimplicialCone::new(vec![v([1, 0]), v([0, 1])]).unwrap();
        let mut t = Triangulation::new(base);
        let reps = t.subdivide_all(&v([1, 0]), &[v([1, 0])]).unwrap();
        assert!(reps.is_empty());
        assert_eq!(t.len(), 1);
        assert!(t.is_live(ConeId(0)));
    }
}
