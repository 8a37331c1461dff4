//! Exact integer and rational linear algebra.
//!
//! Everything here works on arbitrary-precision integers. Determinants use
//! fraction-free (Bareiss) elimination, linear solves return rationals in
//! lowest terms, and the Smith normal form comes with both unimodular
//! transforms so callers can read off explicit torsion elements.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense row-major matrix of arbitrary-precision integers.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension("matrix must be at least 1x1".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0);
        Self {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows<R, T>(rows: &[R]) -> Result<Self>
    where
        R: AsRef<[T]>,
        T: Clone + Into<BigInt>,
    {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != ncols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().cloned().map(Into::into))
            .collect();
        Self::new(nrows, ncols, data)
    }

    /// Builds the matrix whose j-th column is `cols[j]`.
    pub fn from_columns<C, T>(cols: &[C]) -> Result<Self>
    where
        C: AsRef<[T]>,
        T: Clone + Into<BigInt>,
    {
        Ok(Self::from_rows(cols)?.transpose())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * &other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += factor * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for j in 0..self.cols {
            let v = &self[(src, j)] * factor;
            self[(dst, j)] += v;
        }
    }

    /// col[dst] += factor * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for i in 0..self.rows {
            let v = &self[(i, src)] * factor;
            self[(i, dst)] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -std::mem::take(&mut self[(i, j)]);
            self[(i, j)] = v;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;

    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.rows).map(|i| {
                self.row(i)
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
            }))
            .finish()
    }
}

/// Vector of exact rationals. `BigRational` keeps every entry reduced with a
/// positive denominator, so structural equality is value equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalVector(pub Vec<BigRational>);

impl RationalVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BigRational> {
        self.0.iter()
    }

    pub fn sum(&self) -> BigRational {
        self.0.iter().fold(BigRational::zero(), |acc, q| acc + q)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|q| !q.is_negative())
    }
}

impl std::ops::Index<usize> for RationalVector {
    type Output = BigRational;

    fn index(&self, i: usize) -> &BigRational {
        &self.0[i]
    }
}

fn require_square(m: &IntMatrix) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.rows, m.cols
        )))
    }
}

/// Bareiss forward elimination in place. Returns the sign of the row
/// permutation applied, or `None` when a zero column stops the elimination.
/// On success the last diagonal entry of the square part equals the
/// determinant times that sign.
fn bareiss_forward(a: &mut IntMatrix, n: usize) -> Option<bool> {
    let mut negated = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[(k, k)].is_zero() {
            let swap = (k + 1..n).find(|&i| !a[(i, k)].is_zero())?;
            a.swap_rows(k, swap);
            negated = !negated;
        }
        for i in k + 1..n {
            for j in k + 1..a.cols {
                let v = (&a[(k, k)] * &a[(i, j)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                a[(i, j)] = v;
            }
            a[(i, k)] = BigInt::zero();
        }
        prev = a[(k, k)].clone();
    }
    Some(negated)
}

/// Exact determinant by fraction-free elimination.
pub fn determinant(m: &IntMatrix) -> Result<BigInt> {
    require_square(m)?;
    let n = m.rows;
    if let Some(a) = small_entries(m) {
        if let Some(det) = small_det(a, n) {
            return Ok(BigInt::from(det));
        }
    }
    let mut a = m.clone();
    match bareiss_forward(&mut a, n) {
        None => Ok(BigInt::zero()),
        Some(negated) => {
            let det = a[(n - 1, n - 1)].clone();
            Ok(if negated { -det } else { det })
        }
    }
}

/// Solves `m x = b` exactly.
pub fn solve_rational(m: &IntMatrix, b: &[BigInt]) -> Result<RationalVector> {
    let (y, det) = solve_scaled(m, b)?;
    Ok(RationalVector(
        y.into_iter()
            .map(|n| BigRational::new(n, det.clone()))
            .collect(),
    ))
}

/// Solves `m x = b` as `x = y / det` with integer `y` and `det = |det(m)|`.
pub fn solve_scaled(m: &IntMatrix, b: &[BigInt]) -> Result<(Vec<BigInt>, BigInt)> {
    require_square(m)?;
    let n = m.rows;
    if b.len() != n {
        return Err(Error::Dimension(format!(
            "right-hand side of length {} for {n} equations",
            b.len()
        )));
    }
    let mut aug = IntMatrix::zeros(n, n + 1);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = m[(i, j)].clone();
        }
        aug[(i, n)] = b[i].clone();
    }
    if let Some(a) = small_entries(&aug) {
        match small_solve(a, n) {
            Some(Some((y, det))) => {
                return Ok((y.into_iter().map(BigInt::from).collect(), BigInt::from(det)))
            }
            Some(None) => return Err(Error::Singular),
            None => {}
        }
    }
    if bareiss_forward(&mut aug, n).is_none() || aug[(n - 1, n - 1)].is_zero() {
        return Err(Error::Singular);
    }
    let mut det = aug[(n - 1, n - 1)].clone();
    let mut y = vec![BigInt::zero(); n];
    for i in (0..n).rev() {
        let mut acc = &det * &aug[(i, n)];
        for j in i + 1..n {
            acc -= &aug[(i, j)] * &y[j];
        }
        y[i] = acc / &aug[(i, i)];
    }
    if det.is_negative() {
        det = -det;
        y.iter_mut().for_each(|v| *v = -std::mem::take(v));
    }
    Ok((y, det))
}

/// [`determinant`] of the matrix whose columns are `cols`.
pub fn determinant_columns<C: AsRef<[BigInt]>>(cols: &[C]) -> Result<BigInt> {
    let n = cols.len();
    if n == 0 || cols.iter().any(|c| c.as_ref().len() != n) {
        return Err(Error::Dimension(format!("{n} columns do not form a square matrix")));
    }
    let small: Option<Vec<i128>> = (0..n)
        .flat_map(|i| cols.iter().map(move |c| &c.as_ref()[i]))
        .map(|v| i64::try_from(v).ok().map(i128::from))
        .collect();
    if let Some(det) = small.and_then(|a| small_det(a, n)) {
        return Ok(BigInt::from(det));
    }
    determinant(&IntMatrix::from_columns(cols)?)
}

/// [`solve_scaled`] for the matrix whose columns are `cols`.
pub fn solve_columns<C: AsRef<[BigInt]>>(cols: &[C], b: &[BigInt]) -> Result<(Vec<BigInt>, BigInt)> {
    let n = cols.len();
    if n == 0 || b.len() != n || cols.iter().any(|c| c.as_ref().len() != n) {
        return Err(Error::Dimension(format!(
            "{n} columns with a right-hand side of length {}",
            b.len()
        )));
    }
    let mut a = Vec::with_capacity(n * (n + 1));
    let mut small = true;
    'fill: for i in 0..n {
        for v in cols.iter().map(|c| &c.as_ref()[i]).chain(std::iter::once(&b[i])) {
            match i64::try_from(v) {
                Ok(x) => a.push(i128::from(x)),
                Err(_) => {
                    small = false;
                    break 'fill;
                }
            }
        }
    }
    if small {
        match small_solve(a, n) {
            Some(Some((y, det))) => {
                return Ok((y.into_iter().map(BigInt::from).collect(), BigInt::from(det)))
            }
            Some(None) => return Err(Error::Singular),
            None => {}
        }
    }
    solve_scaled(&IntMatrix::from_columns(cols)?, b)
}

fn small_entries(m: &IntMatrix) -> Option<Vec<i128>> {
    m.data
        .iter()
        .map(|v| i64::try_from(v).ok().map(i128::from))
        .collect()
}

/// Checked Bareiss elimination on an `n x cols` row-major block. `None` on
/// overflow, `Some(None)` when singular, else whether an odd number of row
/// swaps was applied.
fn small_forward(a: &mut [i128], n: usize, cols: usize) -> Option<Option<bool>> {
    let mut negated = false;
    let mut prev: i128 = 1;
    for k in 0..n {
        if a[k * cols + k] == 0 {
            let Some(swap) = (k + 1..n).find(|&i| a[i * cols + k] != 0) else {
                return Some(None);
            };
            for j in 0..cols {
                a.swap(k * cols + j, swap * cols + j);
            }
            negated = !negated;
        }
        let pivot = a[k * cols + k];
        for i in k + 1..n {
            let lead = a[i * cols + k];
            for j in k + 1..cols {
                let v = pivot
                    .checked_mul(a[i * cols + j])?
                    .checked_sub(lead.checked_mul(a[k * cols + j])?)?;
                a[i * cols + j] = v / prev;
            }
            a[i * cols + k] = 0;
        }
        prev = pivot;
    }
    Some(Some(negated))
}

fn small_det(mut a: Vec<i128>, n: usize) -> Option<i128> {
    match small_forward(&mut a, n, n)? {
        None => Some(0),
        Some(negated) => {
            let det = a[n * n - 1];
            Some(if negated { -det } else { det })
        }
    }
}

/// `None` on overflow, `Some(None)` when singular.
fn small_solve(mut a: Vec<i128>, n: usize) -> Option<Option<(Vec<i128>, i128)>> {
    let cols = n + 1;
    if small_forward(&mut a, n, cols)?.is_none() {
        return Some(None);
    }
    let mut det = a[(n - 1) * cols + n - 1];
    if det == 0 {
        return Some(None);
    }
    let mut y = vec![0i128; n];
    for i in (0..n).rev() {
        let mut acc = det.checked_mul(a[i * cols + n])?;
        for j in i + 1..n {
            acc = acc.checked_sub(a[i * cols + j].checked_mul(y[j])?)?;
        }
        y[i] = acc / a[i * cols + i];
    }
    if det < 0 {
        det = -det;
        y.iter_mut().for_each(|v| *v = -*v);
    }
    Some(Some((y, det)))
}

/// Adjugate matrix, `adj(m) * m = det(m) * I`, for nonsingular `m`.
pub fn adjugate(m: &IntMatrix) -> Result<(IntMatrix, BigInt)> {
    require_square(m)?;
    let n = m.rows;
    let det = determinant(m)?;
    if det.is_zero() {
        return Err(Error::Singular);
    }
    let mut adj = IntMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![BigInt::zero(); n];
        e[j] = BigInt::one();
        let col = solve_rational(m, &e)?;
        for i in 0..n {
            let v = &col[i] * BigRational::from_integer(det.clone());
            debug_assert!(v.is_integer());
            adj[(i, j)] = v.to_integer();
        }
    }
    Ok((adj, det))
}

/// Basis of the kernel of `m mod 2` over GF(2), one free variable per basis
/// vector in increasing column order.
pub fn nullspace_mod2(m: &IntMatrix) -> Result<Vec<Vec<u8>>> {
    require_square(m)?;
    let (rows, cols) = (m.rows, m.cols);
    let mut a: Vec<Vec<u8>> = (0..rows)
        .map(|i| m.row(i).iter().map(|v| u8::from(v.is_odd())).collect())
        .collect();

    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| a[i][c] == 1) else {
            continue;
        };
        a.swap(r, p);
        for i in 0..rows {
            if i != r && a[i][c] == 1 {
                for j in c..cols {
                    a[i][j] ^= a[r][j];
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }

    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivot_cols.contains(c)) {
        let mut v = vec![0u8; cols];
        v[free] = 1;
        for (row, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = a[row][free];
        }
        basis.push(v);
    }
    Ok(basis)
}

/// Smith normal form `left * m * right = diag(diag)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub diag: Vec<BigInt>,
    pub left: IntMatrix,
    pub right: IntMatrix,
}

/// Smith normal form of a nonsingular square matrix.
///
/// Pivots are chosen as the entry of smallest absolute value in the active
/// block, scanning rows first and then columns, so the transforms are fully
/// deterministic.
pub fn smith_normal_form(m: &IntMatrix) -> Result<SmithForm> {
    require_square(m)?;
    let n = m.rows;
    let mut a = m.clone();
    let mut left = IntMatrix::identity(n);
    let mut right = IntMatrix::identity(n);

    for t in 0..n {
        loop {
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if a[(i, j)].is_zero() {
                        continue;
                    }
                    let better = match pivot {
                        None => true,
                        Some(p) => a[(i, j)].abs() < a[p].abs(),
                    };
                    if better {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                return Err(Error::Singular);
            };
            a.swap_rows(t, pi);
            left.swap_rows(t, pi);
            a.swap_cols(t, pj);
            right.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..n {
                if a[(i, t)].is_zero() {
                    continue;
                }
                let q = -a[(i, t)].div_floor(&a[(t, t)]);
                a.add_row_multiple(i, t, &q);
                left.add_row_multiple(i, t, &q);
                clean &= a[(i, t)].is_zero();
            }
            for j in t + 1..n {
                if a[(t, j)].is_zero() {
                    continue;
                }
                let q = -a[(t, j)].div_floor(&a[(t, t)]);
                a.add_col_multiple(j, t, &q);
                right.add_col_multiple(j, t, &q);
                clean &= a[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }

            // Divisibility: fold any row with an entry the pivot does not divide
            // into the pivot row and go around again.
            let offender = (t + 1..n)
                .find(|&i| (t + 1..n).any(|j| !a[(i, j)].is_multiple_of(&a[(t, t)])));
            match offender {
                Some(i) => {
                    let one = BigInt::one();
                    a.add_row_multiple(t, i, &one);
                    left.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if a[(t, t)].is_negative() {
            a.negate_row(t);
            left.negate_row(t);
        }
    }

    let diag = (0..n).map(|i| a[(i, i)].clone()).collect();
    Ok(SmithForm { diag, left, right })
}
