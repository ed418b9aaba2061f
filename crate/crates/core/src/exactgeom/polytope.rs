//! Convex polytopes in half-space form with per-constraint strictness.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::linalg::{solve, AffineMap, RMat, RVec, Rat};
use super::lp::{maximize, LpOutcome};
use crate::error::{Error, Result};

/// Largest dimension for which vertex enumeration is supported.
pub const MAX_VERTEX_DIM: usize = 4;

/// `normal · x < offset` when `strict`, `normal · x ≤ offset` otherwise.
///
/// Constructors scale the constraint so that the normal has coprime integer
/// entries; equal half-spaces therefore compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfSpace {
    normal: RVec,
    offset: Rat,
    strict: bool,
}

impl HalfSpace {
    pub fn new(normal: RVec, offset: Rat, strict: bool) -> Result<Self> {
        if normal.is_zero() {
            return Err(Error::InvalidInput("half-space normal must be non-zero".into()));
        }
        let (normal, offset) = canonicalize(normal, offset);
        Ok(HalfSpace { normal, offset, strict })
    }

    /// `normal · x ≥ offset` (or `>` when strict).
    pub fn ge(normal: RVec, offset: Rat, strict: bool) -> Result<Self> {
        Self::new(normal.scale(&-Rat::one()), -offset, strict)
    }

    pub fn le(normal: RVec, offset: Rat, strict: bool) -> Result<Self> {
        Self::new(normal, offset, strict)
    }

    pub fn normal(&self) -> &RVec {
        &self.normal
    }

    pub fn offset(&self) -> &Rat {
        &self.offset
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    pub fn with_strict(&self, strict: bool) -> Self {
        HalfSpace { strict, ..self.clone() }
    }

    /// `offset − normal · x`; positive strictly inside.
    pub fn slack(&self, x: &RVec) -> Rat {
        &self.offset - self.normal.dot(x)
    }

    pub fn satisfied_by(&self, x: &RVec) -> bool {
        let s = self.slack(x);
        if self.strict {
            s.is_positive()
        } else {
            !s.is_negative()
        }
    }

    pub fn relaxed_satisfied_by(&self, x: &RVec) -> bool {
        !self.slack(x).is_negative()
    }
}

fn canonicalize(normal: RVec, offset: Rat) -> (RVec, Rat) {
    let mut lcm = BigInt::one();
    for v in normal.iter() {
        lcm = lcm.lcm(v.denom());
    }
    let mut gcd = BigInt::zero();
    for v in normal.iter() {
        let scaled = v.numer() * (&lcm / v.denom());
        gcd = gcd.gcd(&scaled);
    }
    let factor = Rat::new(lcm, gcd);
    if factor.is_one() {
        return (normal, offset);
    }
    (normal.scale(&factor), offset * factor)
}

/// Convex polytope `{x : every constraint holds}` in dimension `dim`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polytope {
    dim: usize,
    constraints: Vec<HalfSpace>,
}

impl Polytope {
    pub fn new(dim: usize, constraints: Vec<HalfSpace>) -> Result<Self> {
        for h in &constraints {
            if h.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: h.dim(),
                });
            }
        }
        let mut p = Polytope { dim, constraints };
        p.dedup();
        Ok(p)
    }

    /// Canonical empty polytope (both closure and interior empty).
    pub fn empty(dim: usize) -> Self {
        let e0 = RVec::unit(dim, 0);
        Polytope {
            dim,
            constraints: vec![
                HalfSpace::new(e0.clone(), -Rat::one(), false).unwrap(),
                HalfSpace::ge(e0, Rat::zero(), false).unwrap(),
            ],
        }
    }

    /// Axis-aligned box `lo ≤ x ≤ hi` (or `lo < x < hi` when `strict`).
    pub fn from_box(lo: &RVec, hi: &RVec, strict: bool) -> Result<Self> {
        hi.check_dim(lo.dim())?;
        let d = lo.dim();
        let mut cs = Vec::with_capacity(2 * d);
        for k in 0..d {
            cs.push(HalfSpace::ge(RVec::unit(d, k), lo[k].clone(), strict)?);
            cs.push(HalfSpace::le(RVec::unit(d, k), hi[k].clone(), strict)?);
        }
        Self::new(d, cs)
    }

    pub fn unit_cube(d: usize, strict: bool) -> Self {
        let lo = RVec::zeros(d);
        let hi = RVec(vec![Rat::one(); d]);
        Self::from_box(&lo, &hi, strict).expect("unit cube")
    }

    /// Convex polygon from its vertices listed in boundary order (either orientation).
    pub fn convex_polygon(vertices: &[RVec], strict: bool) -> Result<Self> {
        if vertices.len() < 3 || vertices.iter().any(|v| v.dim() != 2) {
            return Err(Error::InvalidInput(
                "a polygon needs at least three planar vertices".into(),
            ));
        }
        let n = vertices.len();
        let mut cs = Vec::with_capacity(n);
        for i in 0..n {
            let p = &vertices[i];
            let q = &vertices[(i + 1) % n];
            let edge = q.sub(p);
            let normal = RVec(vec![edge[1].clone(), -edge[0].clone()]);
            let offset = normal.dot(p);
            // orient so that the remaining vertices are inside
            let other = &vertices[(i + 2) % n];
            let h = if normal.dot(other) <= offset {
                HalfSpace::le(normal, offset, strict)?
            } else {
                HalfSpace::ge(normal, offset, strict)?
            };
            cs.push(h);
        }
        Self::new(2, cs)
    }

    /// Simplex spanned by `d + 1` affinely independent points in `R^d`.
    pub fn simplex(vertices: &[RVec], strict: bool) -> Result<Self> {
        let d = vertices.len().saturating_sub(1);
        if d == 0 || vertices.iter().any(|v| v.dim() != d) {
            return Err(Error::InvalidInput("a simplex needs d + 1 points in R^d".into()));
        }
        let mut cs = Vec::with_capacity(d + 1);
        for skip in 0..=d {
            let pts: Vec<&RVec> = (0..=d).filter(|&i| i != skip).map(|i| &vertices[i]).collect();
            // facet hyperplane through the other d vertices
            let normal = hyperplane_normal(&pts)
                .ok_or_else(|| Error::InvalidInput("simplex vertices are affinely dependent".into()))?;
            let offset = normal.dot(pts[0]);
            let h = if normal.dot(&vertices[skip]) < offset {
                HalfSpace::le(normal, offset, strict)?
            } else {
                HalfSpace::ge(normal, offset, strict)?
            };
            cs.push(h);
        }
        Self::new(d, cs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[HalfSpace] {
        &self.constraints
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    fn check_same_dim(&self, other: &Polytope) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(())
    }

    /// Sorts constraints and merges exact duplicates (strict wins).
    fn dedup(&mut self) {
        self.constraints
            .sort_by(|a, b| (&a.normal, &a.offset, a.strict).cmp(&(&b.normal, &b.offset, b.strict)));
        let mut out: Vec<HalfSpace> = Vec::with_capacity(self.constraints.len());
        for h in self.constraints.drain(..) {
            match out.last_mut() {
                Some(last) if last.normal == h.normal && last.offset == h.offset => {
                    last.strict |= h.strict;
                }
                _ => out.push(h),
            }
        }
        self.constraints = out;
    }

    /// Closure: all constraints made non-strict.
    pub fn relaxed(&self) -> Polytope {
        Polytope {
            dim: self.dim,
            constraints: self.constraints.iter().map(|h| h.with_strict(false)).collect(),
        }
    }

    /// All constraints made strict (the interior of the closure when full-dimensional).
    pub fn opened(&self) -> Polytope {
        Polytope {
            dim: self.dim,
            constraints: self.constraints.iter().map(|h| h.with_strict(true)).collect(),
        }
    }

    /// Relaxes strict constraints whose hyperplane supports `ambient` from the
    /// inside, so boundary points of `ambient` are kept. An open piece becomes
    /// open relative to `ambient`.
    pub fn relatively_open_in(&self, ambient: &Polytope) -> Result<Polytope> {
        self.check_same_dim(ambient)?;
        let constraints = self
            .constraints
            .iter()
            .map(|h| {
                let supports = h.strict && matches!(ambient.maximize(&h.normal), Some(Some(v)) if v == h.offset);
                if supports {
                    h.with_strict(false)
                } else {
                    h.clone()
                }
            })
            .collect();
        Ok(Polytope {
            dim: self.dim,
            constraints,
        })
    }

    /// Point set `p ∩ q` by constraint concatenation.
    pub fn intersect(&self, other: &Polytope) -> Result<Polytope> {
        self.check_same_dim(other)?;
        let mut cs = self.constraints.clone();
        cs.extend(other.constraints.iter().cloned());
        let mut p = Polytope {
            dim: self.dim,
            constraints: cs,
        };
        p.dedup();
        Ok(p)
    }

    /// `{x : g(x) ∈ self}`; works for singular linear parts.
    pub fn affine_preimage(&self, g: &AffineMap) -> Result<Polytope> {
        if g.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: g.dim(),
            });
        }
        let at = g.linear.transpose();
        let mut cs = Vec::with_capacity(self.constraints.len());
        for h in &self.constraints {
            let normal = at.mul_vec(&h.normal)?;
            let offset = &h.offset - h.normal.dot(&g.shift);
            if normal.is_zero() {
                let ok = if h.strict {
                    offset.is_positive()
                } else {
                    !offset.is_negative()
                };
                if ok {
                    continue;
                }
                return Ok(Polytope::empty(self.dim));
            }
            cs.push(HalfSpace::new(normal, offset, h.strict)?);
        }
        Polytope::new(self.dim, cs)
    }

    /// `g(self)` for invertible `g`.
    pub fn affine_image(&self, g: &AffineMap) -> Result<Polytope> {
        if g.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: g.dim(),
            });
        }
        let inv = g.inverse()?;
        self.affine_preimage(&inv)
    }

    /// Slack-maximization LP: `max t` s.t. `a·x + t ≤ b` for every constraint, `0 ≤ t ≤ 1`.
    fn slack_lp(&self) -> Option<(RVec, Rat)> {
        let d = self.dim;
        let mut a = Vec::with_capacity(self.constraints.len() + 1);
        let mut b = Vec::with_capacity(self.constraints.len() + 1);
        for h in &self.constraints {
            let mut row = Vec::with_capacity(2 * d + 1);
            row.extend(h.normal.iter().cloned());
            row.extend(h.normal.iter().map(|v| -v.clone()));
            row.push(Rat::one());
            a.push(row);
            b.push(h.offset.clone());
        }
        let mut cap = vec![Rat::zero(); 2 * d + 1];
        cap[2 * d] = Rat::one();
        a.push(cap.clone());
        b.push(Rat::one());
        match maximize(&cap, &a, &b) {
            LpOutcome::Optimal { point, value } => {
                let x = (0..d).map(|j| &point[j] - &point[d + j]).collect();
                Some((RVec(x), value))
            }
            LpOutcome::Infeasible => None,
            LpOutcome::Unbounded => unreachable!("slack LP objective is capped"),
        }
    }

    /// True iff the system with every constraint strict is feasible.
    pub fn has_interior(&self) -> bool {
        matches!(self.slack_lp(), Some((_, t)) if t.is_positive())
    }

    /// Exact optimizer of the slack-maximization LP; strictly inside every constraint.
    pub fn interior_point(&self) -> Result<RVec> {
        match self.slack_lp() {
            Some((x, t)) if t.is_positive() => Ok(x),
            _ => Err(Error::EmptyInterior),
        }
    }

    /// Whether the closure is non-empty.
    pub fn closure_is_feasible(&self) -> bool {
        self.slack_lp().is_some()
    }

    pub fn contains(&self, x: &RVec) -> bool {
        x.dim() == self.dim && self.constraints.iter().all(|h| h.satisfied_by(x))
    }

    pub fn closure_contains(&self, x: &RVec) -> bool {
        x.dim() == self.dim && self.constraints.iter().all(|h| h.relaxed_satisfied_by(x))
    }

    /// `max c·x` over the closure; `None` when the closure is empty, `Some(None)` when unbounded.
    pub fn maximize(&self, c: &RVec) -> Option<Option<Rat>> {
        let d = self.dim;
        let split_c: Vec<Rat> = c.iter().cloned().chain(c.iter().map(|v| -v.clone())).collect();
        let a: Vec<Vec<Rat>> = self
            .constraints
            .iter()
            .map(|h| {
                h.normal
                    .iter()
                    .cloned()
                    .chain(h.normal.iter().map(|v| -v.clone()))
                    .collect()
            })
            .collect();
        let b: Vec<Rat> = self.constraints.iter().map(|h| h.offset.clone()).collect();
        debug_assert_eq!(split_c.len(), 2 * d);
        match maximize(&split_c, &a, &b) {
            LpOutcome::Optimal { value, .. } => Some(Some(value)),
            LpOutcome::Unbounded => Some(None),
            LpOutcome::Infeasible => None,
        }
    }

    pub fn is_bounded(&self) -> bool {
        if !self.closure_is_feasible() {
            return true;
        }
        (0..self.dim).all(|k| {
            let e = RVec::unit(self.dim, k);
            matches!(self.maximize(&e), Some(Some(_))) && matches!(self.maximize(&e.scale(&-Rat::one())), Some(Some(_)))
        })
    }

    /// Whether the closure lies inside the closed half-space of `h`.
    pub fn closure_implies(&self, h: &HalfSpace) -> bool {
        match self.maximize(&h.normal) {
            None => true,
            Some(None) => false,
            Some(Some(v)) => v <= h.offset,
        }
    }

    /// `closure(self) ⊆ closure(other)`, decided constraint by constraint.
    pub fn closure_subset_of(&self, other: &Polytope) -> Result<bool> {
        self.check_same_dim(other)?;
        Ok(other.constraints.iter().all(|h| self.closure_implies(h)))
    }

    /// Exact vertices of the closure (dimension at most [`MAX_VERTEX_DIM`]).
    pub fn vertices(&self) -> Result<Vec<RVec>> {
        if self.dim > MAX_VERTEX_DIM {
            return Err(Error::InvalidInput(format!(
                "vertex enumeration supports dim ≤ {MAX_VERTEX_DIM}, got {}",
                self.dim
            )));
        }
        if !self.is_bounded() {
            return Err(Error::UnboundedPolytope);
        }
        Ok(self.vertices_unchecked())
    }

    /// Vertex enumeration without the boundedness check; callers guarantee it.
    pub(crate) fn vertices_unchecked(&self) -> Vec<RVec> {
        let d = self.dim;
        let m = self.constraints.len();
        let mut out = BTreeSet::new();
        if m < d {
            return Vec::new();
        }
        let fl = self.to_f64();
        for_each_combination(m, d, &mut |idx| {
            if float_vertex_excluded(&fl, idx) {
                return;
            }
            let rows: Vec<Vec<Rat>> = idx.iter().map(|&i| self.constraints[i].normal.0.clone()).collect();
            let rhs: Vec<Rat> = idx.iter().map(|&i| self.constraints[i].offset.clone()).collect();
            if let Some(x) = solve(&rows, &rhs) {
                let x = RVec(x);
                if self.closure_contains(&x) {
                    out.insert(x);
                }
            }
        });
        out.into_iter().collect()
    }

    /// Drops constraints that do not define facets, given the closure's vertices.
    ///
    /// Interior and closure are unchanged. With mixed strictness, membership
    /// of lower-dimensional faces may change where a dropped strict constraint
    /// touched the closure in a face of dimension below `d − 1`.
    pub(crate) fn prune_with_vertices(&self, vertices: &[RVec]) -> Polytope {
        if vertices.is_empty() {
            return self.clone();
        }
        let d = self.dim;
        let kept = self
            .constraints
            .iter()
            .filter(|h| {
                let tight: Vec<&RVec> = vertices.iter().filter(|v| h.slack(v).is_zero()).collect();
                if tight.len() < d {
                    return false;
                }
                if d == 1 {
                    return true;
                }
                let base = tight[0];
                let diffs: Vec<Vec<Rat>> = tight[1..].iter().map(|v| v.sub(base).0).collect();
                RMat::from_rows(diffs).map(|m| m.rank() == d - 1).unwrap_or(false)
            })
            .cloned()
            .collect();
        Polytope {
            dim: d,
            constraints: kept,
        }
    }

    /// Facet-only representation for bounded full-dimensional polytopes of dimension ≤ 4.
    pub fn pruned(&self) -> Result<Polytope> {
        let v = self.vertices()?;
        if !self.has_interior() {
            return Ok(self.clone());
        }
        Ok(self.prune_with_vertices(&v))
    }

    /// Exact axis-aligned bounding box of the closure.
    pub fn bounding_box(&self) -> Result<(RVec, RVec)> {
        let mut lo = Vec::with_capacity(self.dim);
        let mut hi = Vec::with_capacity(self.dim);
        for k in 0..self.dim {
            let e = RVec::unit(self.dim, k);
            let up = self.maximize(&e).ok_or(Error::EmptyInterior)?;
            let down = self.maximize(&e.scale(&-Rat::one())).ok_or(Error::EmptyInterior)?;
            match (up, down) {
                (Some(u), Some(l)) => {
                    hi.push(u);
                    lo.push(-l);
                }
                _ => return Err(Error::UnboundedPolytope),
            }
        }
        Ok((RVec(lo), RVec(hi)))
    }

    /// Float copy for fast point classification.
    pub fn to_f64(&self) -> FloatPolytope {
        FloatPolytope {
            normals: self.constraints.iter().map(|h| h.normal.to_f64()).collect(),
            offsets: self
                .constraints
                .iter()
                .map(|h| super::linalg::rat_to_f64(&h.offset))
                .collect(),
        }
    }
}

/// Floating-point mirror of a polytope for sampling and exact-path prefilters.
#[derive(Clone, Debug)]
pub struct FloatPolytope {
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
}

impl FloatPolytope {
    /// Strict membership in the open polytope.
    pub fn contains_open(&self, x: &[f64]) -> bool {
        self.normals.iter().zip(&self.offsets).all(|(a, b)| dot_f64(a, x) < *b)
    }

    pub fn contains_closed(&self, x: &[f64]) -> bool {
        self.contains_closed_within(x, 0.0)
    }

    /// `a·x ≤ b + tol·(1 + |a|₁)` for every constraint.
    pub fn contains_closed_within(&self, x: &[f64], tol: f64) -> bool {
        self.normals.iter().zip(&self.offsets).all(|(a, b)| {
            let scale = 1.0 + a.iter().map(|v| v.abs()).sum::<f64>();
            dot_f64(a, x) <= *b + tol * scale
        })
    }
}

fn dot_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn hyperplane_normal(pts: &[&RVec]) -> Option<RVec> {
    // normal n with n·(p_i − p_0) = 0 for all i: null space of a (d−1)×d matrix
    let d = pts[0].dim();
    let rows: Vec<Vec<Rat>> = pts[1..].iter().map(|p| p.sub(pts[0]).0).collect();
    for k in 0..d {
        // try fixing n_k = 1 and solving the rest
        let mut sq = Vec::with_capacity(d);
        let mut rhs = Vec::with_capacity(d);
        for r in &rows {
            sq.push(r.clone());
            rhs.push(Rat::zero());
        }
        let mut pin = vec![Rat::zero(); d];
        pin[k] = Rat::one();
        sq.push(pin);
        rhs.push(Rat::one());
        if let Some(n) = solve(&sq, &rhs) {
            return Some(RVec(n));
        }
    }
    None
}

/// Whether the float solve for the constraints `idx` is clearly singular or
/// clearly outside the closure, so the exact solve can be skipped.
fn float_vertex_excluded(fl: &FloatPolytope, idx: &[usize]) -> bool {
    const TOL: f64 = 1e-6;
    let d = idx.len();
    let mut a: Vec<Vec<f64>> = idx
        .iter()
        .map(|&i| {
            let mut row = fl.normals[i].clone();
            row.push(fl.offsets[i]);
            row
        })
        .collect();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return false;
    }
    for c in 0..d {
        let p = (c..d)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .expect("non-empty");
        if a[p][c].abs() < 1e-2 * scale {
            // near-singular: let the exact solve decide
            return false;
        }
        a.swap(c, p);
        for r in 0..d {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=d {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    let x: Vec<f64> = (0..d).map(|r| a[r][d] / a[r][r]).collect();
    let xmax = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    fl.normals.iter().zip(&fl.offsets).any(|(n, b)| {
        let nx: f64 = n.iter().zip(&x).map(|(u, v)| u * v).sum();
        let mag = 1.0 + b.abs() + n.iter().map(|u| u.abs()).sum::<f64>() * xmax;
        nx - b > TOL * mag
    })
}

fn for_each_combination(m: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + m - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::linalg::{int, rat, RMat};

    fn pt(v: &[(i64, i64)]) -> RVec {
        RVec::from_pairs(v)
    }

    fn example1_left() -> Polytope {
        Polytope::simplex(
            &[pt(&[(-1, 1), (0, 1)]), pt(&[(0, 1), (0, 1)]), pt(&[(0, 1), (1, 1)])],
            true,
        )
        .unwrap()
    }

    fn example1_right() -> Polytope {
        Polytope::simplex(
            &[pt(&[(0, 1), (0, 1)]), pt(&[(1, 1), (0, 1)]), pt(&[(0, 1), (1, 1)])],
            true,
        )
        .unwrap()
    }

    fn example1_ambient() -> Polytope {
        Polytope::simplex(
            &[pt(&[(-1, 1), (0, 1)]), pt(&[(1, 1), (0, 1)]), pt(&[(0, 1), (1, 1)])],
            false,
        )
        .unwrap()
    }

    #[test]
    fn canonical_half_spaces_compare_equal() {
        let a = HalfSpace::new(RVec::from_pairs(&[(1, 2), (1, 3)]), rat(1, 6), true).unwrap();
        let b = HalfSpace::new(RVec::from_ints(&[3, 2]), int(1), true).unwrap();
        assert_eq!(a, b);
        assert!(HalfSpace::new(RVec::zeros(2), int(0), false).is_err());
    }

    #[test]
    fn intersect_idempotent_and_disjoint() {
        let sq = Polytope::unit_cube(2, false);
        let both = sq.intersect(&sq).unwrap();
        assert_eq!(both, sq);
        let neg = Polytope::new(1, vec![HalfSpace::le(RVec::from_ints(&[1]), int(0), true).unwrap()]).unwrap();
        let pos = Polytope::new(1, vec![HalfSpace::ge(RVec::from_ints(&[1]), int(0), true).unwrap()]).unwrap();
        let cap = neg.intersect(&pos).unwrap();
        assert!(!cap.has_interior());
        assert!(cap.interior_point().is_err());
        assert!(sq.intersect(&Polytope::unit_cube(3, false)).is_err());
    }

    #[test]
    fn example1_triangles_share_only_an_edge() {
        let cap = example1_left().intersect(&example1_right()).unwrap();
        assert!(!cap.has_interior());
        // but the closures meet along the segment bf
        assert!(cap.closure_is_feasible());
    }

    #[test]
    fn preimage_scalar_and_identity() {
        let unit = Polytope::from_box(&RVec::from_ints(&[0]), &RVec::from_ints(&[1]), true).unwrap();
        let double = AffineMap::new(RMat::from_ints(&[&[2]]), RVec::from_ints(&[0])).unwrap();
        let pre = unit.affine_preimage(&double).unwrap();
        let half = Polytope::from_box(&RVec::from_ints(&[0]), &RVec::from_pairs(&[(1, 2)]), true).unwrap();
        assert_eq!(pre, half);
        let sq = Polytope::unit_cube(2, true);
        assert_eq!(sq.affine_preimage(&AffineMap::identity(2)).unwrap(), sq);
    }

    #[test]
    fn preimage_with_singular_map() {
        // project onto the x-axis; preimage of the unit square is a vertical strip ∩ {0 ≤ 0 ≤ 1}
        let proj = AffineMap::new(RMat::from_ints(&[&[1, 0], &[0, 0]]), RVec::zeros(2)).unwrap();
        let sq = Polytope::unit_cube(2, false);
        let strip = sq.affine_preimage(&proj).unwrap();
        assert_eq!(strip.num_constraints(), 2);
        assert!(strip.contains(&RVec::from_ints(&[0, 7])));
        // shifted out of range: fibre misses the square entirely
        let off = AffineMap::new(RMat::from_ints(&[&[1, 0], &[0, 0]]), RVec::from_ints(&[0, 5])).unwrap();
        assert!(!sq.affine_preimage(&off).unwrap().closure_is_feasible());
    }

    #[test]
    fn image_of_example1_left_triangle() {
        let a1 = AffineMap::new(
            RMat::from_pairs(&[&[(1, 1), (-1, 2)], &[(0, 1), (1, 2)]]),
            RVec::from_pairs(&[(1, 2), (1, 2)]),
        )
        .unwrap();
        let img = example1_left().affine_image(&a1).unwrap();
        let v = img.vertices().unwrap();
        // d = (-1/2, 1/2), e = (1/2, 1/2), f = (0, 1)
        assert_eq!(
            v,
            vec![pt(&[(-1, 2), (1, 2)]), pt(&[(0, 1), (1, 1)]), pt(&[(1, 2), (1, 2)])]
        );
        // pulling back recovers the original triangle (closure-equal)
        let back = img.affine_preimage(&a1).unwrap();
        assert!(back.closure_subset_of(&example1_left()).unwrap());
        assert!(example1_left().closure_subset_of(&back).unwrap());
    }

    #[test]
    fn image_axis_scaling_and_singular() {
        let sq = Polytope::unit_cube(2, false);
        let g = AffineMap::new(RMat::from_ints(&[&[2, 0], &[0, 1]]), RVec::zeros(2)).unwrap();
        let img = sq.affine_image(&g).unwrap();
        let expect = Polytope::from_box(&RVec::zeros(2), &RVec::from_ints(&[2, 1]), false).unwrap();
        assert_eq!(img, expect);
        assert_eq!(sq.affine_image(&AffineMap::identity(2)).unwrap(), sq);
        let sing = AffineMap::new(RMat::from_ints(&[&[1, 1], &[1, 1]]), RVec::zeros(2)).unwrap();
        assert_eq!(sq.affine_image(&sing), Err(Error::SingularMatrix));
    }

    #[test]
    fn interior_checks() {
        let seg = Polytope::new(
            2,
            vec![
                HalfSpace::le(RVec::from_ints(&[1, 0]), int(0), false).unwrap(),
                HalfSpace::ge(RVec::from_ints(&[1, 0]), int(0), false).unwrap(),
                HalfSpace::le(RVec::from_ints(&[0, 1]), int(1), false).unwrap(),
                HalfSpace::ge(RVec::from_ints(&[0, 1]), int(-1), false).unwrap(),
            ],
        )
        .unwrap();
        assert!(!seg.has_interior());
        assert!(seg.closure_is_feasible());
        assert!(Polytope::unit_cube(2, false).has_interior());
    }

    #[test]
    fn interior_points() {
        let unit = Polytope::unit_cube(1, false);
        assert_eq!(unit.interior_point().unwrap(), RVec::from_pairs(&[(1, 2)]));
        let sq = Polytope::unit_cube(2, false);
        assert_eq!(sq.interior_point().unwrap(), RVec::from_pairs(&[(1, 2), (1, 2)]));
        let x = example1_ambient();
        let p = x.interior_point().unwrap();
        for h in x.constraints() {
            assert!(h.slack(&p).is_positive());
        }
    }

    #[test]
    fn vertex_enumeration() {
        let sq = Polytope::unit_cube(2, false);
        assert_eq!(
            sq.vertices().unwrap(),
            vec![
                RVec::from_ints(&[0, 0]),
                RVec::from_ints(&[0, 1]),
                RVec::from_ints(&[1, 0]),
                RVec::from_ints(&[1, 1])
            ]
        );
        let x = example1_ambient();
        assert_eq!(
            x.vertices().unwrap(),
            vec![
                RVec::from_ints(&[-1, 0]),
                RVec::from_ints(&[0, 1]),
                RVec::from_ints(&[1, 0])
            ]
        );
        let mut cs: Vec<HalfSpace> = (0..3)
            .map(|k| HalfSpace::ge(RVec::unit(3, k), int(0), false).unwrap())
            .collect();
        cs.push(HalfSpace::le(RVec::from_ints(&[1, 1, 1]), int(1), false).unwrap());
        let simplex = Polytope::new(3, cs).unwrap();
        let v = simplex.vertices().unwrap();
        assert_eq!(v.len(), 4);
        for k in 0..3 {
            assert!(v.contains(&RVec::unit(3, k)));
        }
        assert!(v.contains(&RVec::zeros(3)));
        let half = Polytope::new(1, vec![HalfSpace::ge(RVec::from_ints(&[1]), int(0), false).unwrap()]).unwrap();
        assert_eq!(half.vertices(), Err(Error::UnboundedPolytope));
    }

    #[test]
    fn closure_membership() {
        let left = example1_left();
        let f = RVec::from_ints(&[0, 1]);
        assert!(left.closure_contains(&f));
        assert!(!left.contains(&f));
        let sq = Polytope::unit_cube(2, true);
        assert!(sq.closure_contains(&RVec::from_pairs(&[(1, 2), (1, 2)])));
        assert!(!sq.closure_contains(&RVec::from_ints(&[2, 0])));
    }

    #[test]
    fn pruning_removes_redundant_constraints() {
        let sq = Polytope::unit_cube(2, true);
        let extra = Polytope::new(2, vec![HalfSpace::le(RVec::from_ints(&[1, 1]), int(5), true).unwrap()]).unwrap();
        let both = sq.intersect(&extra).unwrap();
        assert_eq!(both.num_constraints(), 5);
        let p = both.pruned().unwrap();
        assert_eq!(p, sq);
    }

    #[test]
    fn polygon_orientation_independent() {
        let ccw = [
            RVec::from_ints(&[0, 0]),
            RVec::from_ints(&[1, 0]),
            RVec::from_ints(&[1, 1]),
            RVec::from_ints(&[0, 1]),
        ];
        let mut cw = ccw.clone();
        cw.reverse();
        let a = Polytope::convex_polygon(&ccw, true).unwrap();
        let b = Polytope::convex_polygon(&cw, true).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, Polytope::unit_cube(2, true));
    }

    #[test]
    fn bounding_box_of_triangle() {
        let (lo, hi) = example1_ambient().bounding_box().unwrap();
        assert_eq!(lo, RVec::from_ints(&[-1, 0]));
        assert_eq!(hi, RVec::from_ints(&[1, 1]));
    }

    #[test]
    fn relatively_open_keeps_outer_boundary() {
        let amb = Polytope::unit_cube(2, false);
        let half = rat(1, 2);
        let left = Polytope::from_box(&RVec::zeros(2), &RVec(vec![half.clone(), int(1)]), true)
            .unwrap()
            .relatively_open_in(&amb)
            .unwrap();
        assert!(left.contains(&RVec(vec![rat(1, 4), int(0)])));
        assert!(left.contains(&RVec::zeros(2)));
        assert!(!left.contains(&RVec(vec![half, rat(1, 3)])));
        // a strict constraint strictly outside the ambient stays strict
        let big = Polytope::from_box(&RVec::from_ints(&[-1, -1]), &RVec::from_ints(&[2, 2]), true).unwrap();
        assert_eq!(big.relatively_open_in(&amb).unwrap(), big);
    }
}
