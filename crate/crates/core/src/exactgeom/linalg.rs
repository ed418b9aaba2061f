//! Dense exact vectors and matrices over arbitrary-precision rationals.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number, always kept in lowest terms with a positive denominator.
pub type Rat = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    Rat::from_str(s.trim()).map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))
}

/// Formats as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rat(r: &Rat) -> String {
    r.to_string()
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact rational vector with dimension `len()`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RVec(pub Vec<Rat>);

impl RVec {
    pub fn zeros(dim: usize) -> Self {
        RVec(vec![Rat::zero(); dim])
    }

    pub fn unit(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[k] = Rat::one();
        v
    }

    pub fn from_ints(vals: &[i64]) -> Self {
        RVec(vals.iter().map(|&v| int(v)).collect())
    }

    pub fn from_pairs(vals: &[(i64, i64)]) -> Self {
        RVec(vals.iter().map(|&(p, q)| rat(p, q)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rat> {
        self.0.iter()
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: self.dim(),
            });
        }
        Ok(())
    }

    pub fn dot(&self, other: &RVec) -> Rat {
        debug_assert_eq!(self.dim(), other.dim());
        let mut acc = Rat::zero();
        for (a, b) in self.0.iter().zip(&other.0) {
            if !a.is_zero() && !b.is_zero() {
                acc += a * b;
            }
        }
        acc
    }

    pub fn add(&self, other: &RVec) -> RVec {
        RVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &RVec) -> RVec {
        RVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: &Rat) -> RVec {
        RVec(self.0.iter().map(|a| a * c).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rat_to_f64).collect()
    }
}

impl Index<usize> for RVec {
    type Output = Rat;
    fn index(&self, i: usize) -> &Rat {
        &self.0[i]
    }
}

impl IndexMut<usize> for RVec {
    fn index_mut(&mut self, i: usize) -> &mut Rat {
        &mut self.0[i]
    }
}

impl fmt::Display for RVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Dense row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RMat {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RMat {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch {
                expected: c,
                got: bad.len(),
            });
        }
        Ok(RMat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Convenience constructor from `(numerator, denominator)` pairs; panics on ragged input.
    pub fn from_pairs(rows: &[&[(i64, i64)]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&(p, q)| rat(p, q)).collect())
                .collect(),
        )
        .expect("rectangular matrix literal")
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|row| row.iter().map(|&v| int(v)).collect()).collect())
            .expect("rectangular matrix literal")
    }

    pub fn diag(entries: &[Rat]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
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

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Rat] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> RMat {
        let mut t = RMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &RMat) -> Result<RMat> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = RMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &RVec) -> Result<RVec> {
        v.check_dim(self.cols)?;
        Ok(RVec(
            (0..self.rows)
                .map(|i| {
                    let mut acc = Rat::zero();
                    for (a, b) in self.row(i).iter().zip(&v.0) {
                        if !a.is_zero() && !b.is_zero() {
                            acc += a * b;
                        }
                    }
                    acc
                })
                .collect(),
        ))
    }

    pub fn scale(&self, c: &Rat) -> RMat {
        RMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = &self[(i, j)];
                    if i == j {
                        e.is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    /// Exact determinant by Gaussian elimination over the rationals.
    pub fn det(&self) -> Result<Rat> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: self.cols,
            });
        }
        let n = self.rows;
        let mut m = self.to_rows();
        let mut det = Rat::one();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
                return Ok(Rat::zero());
            };
            if piv != col {
                m.swap(piv, col);
                det = -det;
            }
            let p = m[col][col].clone();
            det *= &p;
            for r in col + 1..n {
                if m[r][col].is_zero() {
                    continue;
                }
                let factor = &m[r][col] / &p;
                for c in col..n {
                    let delta = &factor * &m[col][c];
                    m[r][c] -= delta;
                }
            }
        }
        Ok(det)
    }

    /// Exact inverse; fails with `SingularMatrix` when the determinant is zero.
    pub fn inverse(&self) -> Result<RMat> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: self.cols,
            });
        }
        let n = self.rows;
        let mut a = self.to_rows();
        let mut inv = RMat::identity(n).to_rows();
        for col in 0..n {
            let piv = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(Error::SingularMatrix)?;
            a.swap(piv, col);
            inv.swap(piv, col);
            let p = a[col][col].clone();
            for c in 0..n {
                a[col][c] /= &p;
                inv[col][c] /= &p;
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let factor = a[r][col].clone();
                for c in 0..n {
                    let da = &factor * &a[col][c];
                    a[r][c] -= da;
                    let di = &factor * &inv[col][c];
                    inv[r][c] -= di;
                }
            }
        }
        RMat::from_rows(inv)
    }

    /// Exact rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.to_rows();
        let (rows, cols) = (self.rows, self.cols);
        let mut rank = 0;
        for col in 0..cols {
            let Some(piv) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
                continue;
            };
            m.swap(piv, rank);
            for r in rank + 1..rows {
                if m[r][col].is_zero() {
                    continue;
                }
                let factor = &m[r][col] / &m[rank][col];
                for c in col..cols {
                    let delta = &factor * &m[rank][c];
                    m[r][c] -= delta;
                }
            }
            rank += 1;
            if rank == rows {
                break;
            }
        }
        rank
    }

    /// Block-diagonal sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &RMat) -> RMat {
        let mut out = RMat::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out[(self.rows + i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        out
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> RMat {
        let mut out = RMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out[(i, j)] = self[(r0 + i, c0 + j)].clone();
            }
        }
        out
    }

    /// Converts once to floating point; all composition happens before this call.
    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| rat_to_f64(&self[(i, j)]))
    }
}

impl Index<(usize, usize)> for RMat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

/// Solves the square system `m x = rhs`; `None` when `m` is singular.
pub fn solve(m: &[Vec<Rat>], rhs: &[Rat]) -> Option<Vec<Rat>> {
    let n = rhs.len();
    let mut a: Vec<Vec<Rat>> = m
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(piv, col);
        let p = a[col][col].clone();
        for c in col..=n {
            a[col][c] /= &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in col..=n {
                let delta = &factor * &a[col][c];
                a[r][c] -= delta;
            }
        }
    }
    Some(a.into_iter().map(|mut row| row.pop().unwrap()).collect())
}

/// Affine map `x ↦ A x + b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineMap {
    pub linear: RMat,
    pub shift: RVec,
}

impl AffineMap {
    pub fn new(linear: RMat, shift: RVec) -> Result<Self> {
        if !linear.is_square() {
            return Err(Error::DimensionMismatch {
                expected: linear.rows(),
                got: linear.cols(),
            });
        }
        shift.check_dim(linear.rows())?;
        Ok(AffineMap { linear, shift })
    }

    pub fn identity(d: usize) -> Self {
        AffineMap {
            linear: RMat::identity(d),
            shift: RVec::zeros(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.shift.dim()
    }

    pub fn apply(&self, x: &RVec) -> Result<RVec> {
        Ok(self.linear.mul_vec(x)?.add(&self.shift))
    }

    /// `next ∘ self`: apply `self` first, then `next`.
    pub fn then(&self, next: &AffineMap) -> Result<AffineMap> {
        let linear = next.linear.mul(&self.linear)?;
        let shift = next.linear.mul_vec(&self.shift)?.add(&next.shift);
        Ok(AffineMap { linear, shift })
    }

    pub fn det(&self) -> Rat {
        self.linear.det().expect("square by construction")
    }

    pub fn inverse(&self) -> Result<AffineMap> {
        let inv = self.linear.inverse()?;
        let shift = inv.mul_vec(&self.shift)?.scale(&-Rat::one());
        Ok(AffineMap { linear: inv, shift })
    }

    /// `x ↦ (A ⊕ B)(x, y) + (a, b)` on the product space.
    pub fn product(&self, other: &AffineMap) -> AffineMap {
        let mut shift = self.shift.0.clone();
        shift.extend(other.shift.0.iter().cloned());
        AffineMap {
            linear: self.linear.direct_sum(&other.linear),
            shift: RVec(shift),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        assert_eq!(parse_rat("-3/6").unwrap(), rat(-1, 2));
        assert_eq!(format_rat(&rat(4, 2)), "2");
        assert_eq!(format_rat(&rat(-1, 2)), "-1/2");
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
    }

    #[test]
    fn det_and_inverse() {
        let a = RMat::from_pairs(&[&[(1, 1), (-1, 2)], &[(0, 1), (1, 2)]]);
        assert_eq!(a.det().unwrap(), rat(1, 2));
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).unwrap().is_identity());
        let sing = RMat::from_ints(&[&[1, 2], &[2, 4]]);
        assert_eq!(sing.det().unwrap(), int(0));
        assert_eq!(sing.inverse(), Err(Error::SingularMatrix));
        assert_eq!(sing.rank(), 1);
    }

    #[test]
    fn det_with_row_swap() {
        let a = RMat::from_ints(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 3]]);
        assert_eq!(a.det().unwrap(), int(-3));
    }

    #[test]
    fn affine_composition_order() {
        let double = AffineMap::new(RMat::from_ints(&[&[2]]), RVec::from_ints(&[0])).unwrap();
        let shift = AffineMap::new(RMat::from_ints(&[&[1]]), RVec::from_ints(&[1])).unwrap();
        // x -> 2x -> 2x + 1
        let g = double.then(&shift).unwrap();
        assert_eq!(g.apply(&RVec::from_ints(&[3])).unwrap(), RVec::from_ints(&[7]));
        let inv = g.inverse().unwrap();
        assert_eq!(inv.apply(&RVec::from_ints(&[7])).unwrap(), RVec::from_ints(&[3]));
    }

    #[test]
    fn dimension_checks() {
        let a = RMat::identity(2);
        assert!(a.mul_vec(&RVec::zeros(3)).is_err());
        assert!(a.mul(&RMat::identity(3)).is_err());
        assert!(AffineMap::new(RMat::identity(2), RVec::zeros(1)).is_err());
    }
}
