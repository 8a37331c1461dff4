//! Simplicial lattice cones and stellar subdivision.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, IntMatrix, RationalVector};

/// Integer point in d-space. Cloning is cheap; coordinates are shared.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector(Arc<[BigInt]>);

impl LatticeVector {
    pub fn new(coords: Vec<BigInt>) -> Self {
        Self(coords.into())
    }

    pub fn zero(d: usize) -> Self {
        Self::new(vec![BigInt::zero(); d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// gcd of the coordinates; zero for the zero vector.
    pub fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn is_primitive(&self) -> bool {
        self.content().is_one()
    }

    /// Divides by the content. The zero vector is returned unchanged.
    pub fn primitive_part(&self) -> LatticeVector {
        let g = self.content();
        if g.is_zero() || g.is_one() {
            return self.clone();
        }
        Self::new(self.0.iter().map(|c| c / &g).collect())
    }

    pub fn scale(&self, k: &BigInt) -> LatticeVector {
        Self::new(self.0.iter().map(|c| c * k).collect())
    }

    pub fn add(&self, other: &LatticeVector) -> LatticeVector {
        Self::new(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &LatticeVector) -> LatticeVector {
        Self::new(self.0.iter().zip(other.0.iter()).map(|(a, b)| a - b).collect())
    }

    /// `(1/den) * sum coef_i * vecs_i`, failing if the result is not integral.
    pub fn combination(vecs: &[LatticeVector], coefs: &[BigInt], den: &BigInt) -> Result<Self> {
        let d = vecs.first().map_or(0, LatticeVector::dim);
        let mut acc = vec![BigInt::zero(); d];
        for (v, c) in vecs.iter().zip(coefs) {
            if c.is_zero() {
                continue;
            }
            for (a, x) in acc.iter_mut().zip(v.coords()) {
                *a += c * x;
            }
        }
        for a in acc.iter_mut() {
            let (q, r) = a.div_rem(den);
            if !r.is_zero() {
                return Err(Error::Internal(
                    "lattice combination is not integral".into(),
                ));
            }
            *a = q;
        }
        Ok(Self::new(acc))
    }
}

impl<T: Into<BigInt> + Copy> From<&[T]> for LatticeVector {
    fn from(v: &[T]) -> Self {
        Self::new(v.iter().map(|&x| x.into()).collect())
    }
}

impl<T: Into<BigInt> + Copy, const N: usize> From<[T; N]> for LatticeVector {
    fn from(v: [T; N]) -> Self {
        Self::from(&v[..])
    }
}

impl AsRef<[BigInt]> for LatticeVector {
    fn as_ref(&self) -> &[BigInt] {
        &self.0
    }
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug)]
struct LabelNode {
    index: i64,
    vector: LatticeVector,
    prev: Option<Arc<LabelNode>>,
}

/// Labelled history of subdivision vectors attached to a cone.
///
/// Indices `-d..=-1` hold the base generators (`xi(-i) = v_i`); indices
/// `0, 1, ...` hold the vectors used for subdivision along the cone's
/// ancestry. Unset indices read as zero. Children share their parent's
/// history and extend it by one node.
#[derive(Clone, Debug, Default)]
pub struct XiLabels {
    head: Option<Arc<LabelNode>>,
}

impl XiLabels {
    /// Labels of a fresh base cone.
    pub fn for_base(generators: &[LatticeVector]) -> Self {
        let mut labels = Self::default();
        for (i, g) in generators.iter().enumerate().rev() {
            labels = labels.with(-(i as i64 + 1), g.clone());
        }
        labels
    }

    fn with(&self, index: i64, vector: LatticeVector) -> Self {
        debug_assert!(self.head.as_ref().map_or(true, |h| h.index < index));
        Self {
            head: Some(Arc::new(LabelNode {
                index,
                vector,
                prev: self.head.clone(),
            })),
        }
    }

    /// Largest index with a nonzero label.
    pub fn max_index(&self) -> Option<i64> {
        self.head.as_ref().map(|h| h.index)
    }

    pub fn get(&self, index: i64) -> Option<&LatticeVector> {
        self.iter().find(|(i, _)| *i == index).map(|(_, v)| v)
    }

    /// Nonzero labels in decreasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, &LatticeVector)> {
        let mut node = self.head.as_deref();
        std::iter::from_fn(move || {
            let n = node?;
            node = n.prev.as_deref();
            Some((n.index, &n.vector))
        })
    }
}

impl PartialEq for XiLabels {
    fn eq(&self, other: &Self) -> bool {
        self.iter().eq(other.iter())
    }
}

impl Eq for XiLabels {}

/// Opaque identifier of a cone inside one triangulation run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConeId(pub usize);

impl fmt::Display for ConeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Full-dimensional simplicial cone spanned by `d` lattice vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialCone {
    id: ConeId,
    generators: Vec<LatticeVector>,
    slot_labels: Vec<i64>,
    labels: XiLabels,
    multiplicity: BigInt,
}

/// Result of one stellar subdivision.
#[derive(Clone, Debug)]
pub struct Subdivision {
    /// Barycentric coordinates of the subdividing vector in the parent, as
    /// numerators over the parent multiplicity.
    pub numerators: Vec<BigInt>,
    pub denominator: BigInt,
    /// Children with the generator slot each one replaced.
    pub children: Vec<(usize, SimplicialCone)>,
    noop: bool,
}

impl Subdivision {
    pub fn coefficients(&self) -> RationalVector {
        RationalVector(
            self.numerators
                .iter()
                .map(|n| BigRational::new(n.clone(), self.denominator.clone()))
                .collect(),
        )
    }

    /// True when the vector was already a generator: the single child is the
    /// parent itself, labels included.
    pub fn is_noop(&self) -> bool {
        self.noop
    }
}

impl SimplicialCone {
    /// Base cone from primitive, linearly independent generators.
    pub fn new(generators: Vec<LatticeVector>) -> Result<Self> {
        let d = generators.len();
        if d < 2 {
            return Err(Error::Dimension(format!("need d >= 2 generators, got {d}")));
        }
        if let Some(g) = generators.iter().find(|g| g.dim() != d) {
            return Err(Error::Dimension(format!(
                "generator {g} does not live in dimension {d}"
            )));
        }
        for (index, g) in generators.iter().enumerate() {
            let content = g.content();
            if !content.is_one() {
                return Err(if content.is_zero() {
                    Error::Singular
                } else {
                    Error::NotPrimitive {
                        index,
                        content: content.to_string(),
                    }
                });
            }
        }
        let det = linalg::determinant(&generator_matrix(&generators))?;
        if det.is_zero() {
            return Err(Error::Singular);
        }
        let labels = XiLabels::for_base(&generators);
        Ok(Self {
            id: ConeId::default(),
            slot_labels: (1..=d as i64).map(|i| -i).collect(),
            generators,
            labels,
            multiplicity: det.abs(),
        })
    }

    /// Same cone geometry with a fresh label history, as if it were a base.
    pub fn rebased(&self) -> Self {
        let d = self.dim();
        Self {
            id: ConeId::default(),
            generators: self.generators.clone(),
            slot_labels: (1..=d as i64).map(|i| -i).collect(),
            labels: XiLabels::for_base(&self.generators),
            multiplicity: self.multiplicity.clone(),
        }
    }

    pub fn id(&self) -> ConeId {
        self.id
    }

    pub(crate) fn with_id(mut self, id: ConeId) -> Self {
        self.id = id;
        self
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[LatticeVector] {
        &self.generators
    }

    /// Label index of each generator slot.
    pub fn slot_labels(&self) -> &[i64] {
        &self.slot_labels
    }

    pub fn labels(&self) -> &XiLabels {
        &self.labels
    }

    /// Largest label index in use; -1 on a base cone.
    pub fn label_depth(&self) -> i64 {
        self.labels.max_index().unwrap_or(-1)
    }

    pub fn multiplicity(&self) -> &BigInt {
        &self.multiplicity
    }

    pub fn multiplicity_u64(&self) -> Result<u64> {
        self.multiplicity
            .to_u64()
            .ok_or_else(|| Error::TooLarge(self.multiplicity.to_string()))
    }

    pub fn is_unimodular(&self) -> bool {
        self.multiplicity.is_one()
    }

    /// Generator slots sorted by decreasing label index.
    pub fn label_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| self.slot_labels[b].cmp(&self.slot_labels[a]));
        order
    }

    pub fn matrix(&self) -> IntMatrix {
        generator_matrix(&self.generators)
    }

    pub fn barycentric(&self, x: &LatticeVector) -> Result<RationalVector> {
        if x.dim() != self.dim() {
            return Err(Error::Dimension(format!(
                "vector {x} in a {}-dimensional cone",
                self.dim()
            )));
        }
        let (y, den) = self.barycentric_scaled(x)?;
        Ok(RationalVector(
            y.into_iter().map(|n| BigRational::new(n, den.clone())).collect(),
        ))
    }

    /// Barycentric coordinates as `numerators / multiplicity`.
    pub fn barycentric_scaled(&self, x: &LatticeVector) -> Result<(Vec<BigInt>, BigInt)> {
        if x.dim() != self.dim() {
            return Err(Error::Dimension(format!(
                "vector {x} in a {}-dimensional cone",
                self.dim()
            )));
        }
        linalg::solve_columns(&self.generators, x.coords())
    }

    pub fn contains(&self, x: &LatticeVector) -> bool {
        self.barycentric_scaled(x)
            .is_ok_and(|(y, _)| y.iter().all(|n| !n.is_negative()))
    }

    /// Smallest `c` with `x` in `c * Delta`, i.e. the coordinate sum.
    pub fn dilation(&self, x: &LatticeVector) -> Result<BigRational> {
        let lambda = self.barycentric(x)?;
        if !lambda.is_nonnegative() {
            return Err(Error::NotContained);
        }
        Ok(lambda.sum())
    }

    /// Representative of `x` modulo the generator lattice inside the
    /// half-open parallelepiped.
    pub fn par_normalize(&self, x: &LatticeVector) -> Result<LatticeVector> {
        let lambda = self.barycentric(x)?;
        let floors: Vec<BigInt> = lambda.iter().map(|q| q.floor().to_integer()).collect();
        let shift = LatticeVector::combination(&self.generators, &floors, &BigInt::one())?;
        Ok(x.sub(&shift))
    }

    /// Nonzero par-box element of order `p` modulo the generator lattice.
    ///
    /// With `L M R = diag(d_1, ..., d_n)` and `p | d_n`, the element is
    /// `(1/p) M (R e_n mod p)`.
    pub fn order_p_element(&self, p: u64) -> Result<OrderElement> {
        let pb = BigInt::from(p);
        if p < 2 || !self.multiplicity.is_multiple_of(&pb) {
            return Err(Error::NotDivisible {
                p,
                mu: self.multiplicity.to_string(),
            });
        }
        let snf = linalg::smith_normal_form(&self.matrix())?;
        let n = self.dim();
        if !snf.diag[n - 1].is_multiple_of(&pb) {
            return Err(Error::NotDivisible {
                p,
                mu: self.multiplicity.to_string(),
            });
        }
        let z: Vec<u64> = snf
            .right
            .column(n - 1)
            .iter()
            .map(|r| r.mod_floor(&pb).to_u64().expect("residue below p"))
            .collect();
        let x = self.lattice_point(&z, p)?;
        if x.is_zero() {
            return Err(Error::Internal(format!(
                "order-{p} element collapsed to zero"
            )));
        }
        Ok(OrderElement { x, z })
    }

    /// `(1/p) sum z_j g_j` with `z` indexed by storage slot.
    pub fn lattice_point(&self, z: &[u64], p: u64) -> Result<LatticeVector> {
        let coefs: Vec<BigInt> = z.iter().map(|&c| BigInt::from(c)).collect();
        LatticeVector::combination(&self.generators, &coefs, &BigInt::from(p))
    }

    /// Half-sum of a generator subset that is a lattice point, when the
    /// multiplicity is even.
    pub fn half_vector(&self) -> Result<Option<LatticeVector>> {
        if self.multiplicity.is_odd() {
            return Ok(None);
        }
        let kernel = linalg::nullspace_mod2(&self.matrix())?;
        let Some(k) = kernel.first() else {
            return Err(Error::Internal(
                "even multiplicity with trivial mod-2 kernel".into(),
            ));
        };
        let coefs: Vec<BigInt> = k.iter().map(|&b| BigInt::from(b)).collect();
        LatticeVector::combination(&self.generators, &coefs, &BigInt::from(2)).map(Some)
    }

    /// Stellar subdivision by `x`: one child per slot with positive
    /// coefficient, with that generator replaced by `x`.
    ///
    /// Each child records `x` under label `nu + 1`, where `nu` is the
    /// parent's label depth, and keeps every older label. When `x` is already
    /// a generator the parent is returned unchanged as the only child.
    pub fn stellar_subdivide(&self, x: &LatticeVector) -> Result<Subdivision> {
        if x.is_zero() {
            return Err(Error::Degenerate);
        }
        let (numerators, denominator) = self.barycentric_scaled(x)?;
        if numerators.iter().any(Signed::is_negative) {
            return Err(Error::NotContained);
        }
        if let Some(slot) = self.generators.iter().position(|g| g == x) {
            return Ok(Subdivision {
                numerators,
                denominator,
                children: vec![(slot, self.clone())],
                noop: true,
            });
        }
        if denominator != self.multiplicity {
            return Err(Error::Internal(format!(
                "cone {} has multiplicity {} but determinant {denominator}",
                self.id, self.multiplicity
            )));
        }
        let new_label = self.label_depth() + 1;
        let labels = self.labels.with(new_label, x.clone());
        let mut children = Vec::new();
        for (slot, n) in numerators.iter().enumerate() {
            if !n.is_positive() {
                continue;
            }
            let mut generators = self.generators.clone();
            generators[slot] = x.clone();
            let mut slot_labels = self.slot_labels.clone();
            slot_labels[slot] = new_label;
            children.push((
                slot,
                SimplicialCone {
                    id: ConeId::default(),
                    generators,
                    slot_labels,
                    labels: labels.clone(),
                    multiplicity: n.clone(),
                },
            ));
        }
        Ok(Subdivision {
            numerators,
            denominator,
            children,
            noop: false,
        })
    }
}

/// Precomputed inverse of a cone's generator matrix for repeated
/// barycentric queries: `lambda = numerators(x) / denominator`.
#[derive(Clone, Debug)]
pub struct BarycentricFrame {
    adj: IntMatrix,
    den: BigInt,
}

impl BarycentricFrame {
    pub fn new(cone: &SimplicialCone) -> Result<Self> {
        let (mut adj, mut den) = linalg::adjugate(&cone.matrix())?;
        if den.is_negative() {
            den = -den;
            for i in 0..adj.rows() {
                for j in 0..adj.cols() {
                    adj[(i, j)] = -std::mem::take(&mut adj[(i, j)]);
                }
            }
        }
        Ok(Self { adj, den })
    }

    /// Positive common denominator of all coordinates.
    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn numerators(&self, x: &LatticeVector) -> Result<Vec<BigInt>> {
        self.adj.mul_vec(x.coords())
    }

    pub fn contains(&self, x: &LatticeVector) -> Result<bool> {
        Ok(self.numerators(x)?.iter().all(|n| !n.is_negative()))
    }

    /// Coordinate sum of a contained vector.
    pub fn dilation(&self, x: &LatticeVector) -> Result<BigRational> {
        let nums = self.numerators(x)?;
        if nums.iter().any(Signed::is_negative) {
            return Err(Error::NotContained);
        }
        Ok(BigRational::new(nums.into_iter().sum(), self.den.clone()))
    }
}

/// Element of order p in the par-box, with integer coefficients `z` in
/// `[0, p)` per storage slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderElement {
    pub x: LatticeVector,
    pub z: Vec<u64>,
}

/// Matrix whose columns are the given generators.
pub fn generator_matrix(generators: &[LatticeVector]) -> IntMatrix {
    IntMatrix::from_columns(generators).expect("generators of equal dimension")
}
