//! Piecewise affine maps `(X, Z, f)` and their iterated continuity partitions.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use num_traits::{One, Signed};

use crate::exactgeom::{rat_to_f64, AffineMap, FloatPolytope, HalfSpace, Polytope, RMat, RVec, Rat};

/// Default upper bound on the number of cells a partition may hold.
pub const DEFAULT_CELL_CAP: usize = 2_000_000;

/// An open polytope together with the affine map applied on it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub domain: Polytope,
    pub map: AffineMap,
}

/// Piecewise affine self-map of a compact polytope.
///
/// Pieces are open, pairwise disjoint, and their union is dense in the
/// ambient polytope; every piece is mapped into the ambient closure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PwaMap {
    ambient: Polytope,
    pieces: Vec<Piece>,
}

impl PwaMap {
    /// Builds and validates a map. See [`PwaMap::validate`] for the checks.
    pub fn new(ambient: Polytope, pieces: Vec<Piece>) -> Result<Self> {
        let f = PwaMap { ambient, pieces };
        f.validate()?;
        Ok(f)
    }

    pub(crate) fn new_unchecked(ambient: Polytope, pieces: Vec<Piece>) -> Self {
        PwaMap { ambient, pieces }
    }

    pub fn dim(&self) -> usize {
        self.ambient.dim()
    }

    pub fn ambient(&self) -> &Polytope {
        &self.ambient
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn linear_parts(&self) -> Vec<RMat> {
        self.pieces.iter().map(|p| p.map.linear.clone()).collect()
    }

    /// Every piece has an invertible linear part.
    pub fn is_non_degenerate(&self) -> bool {
        self.pieces.iter().all(|p| !num_traits::Zero::is_zero(&p.map.det()))
    }

    pub fn degenerate_piece(&self) -> Option<usize> {
        self.pieces.iter().position(|p| num_traits::Zero::is_zero(&p.map.det()))
    }

    /// Checks every structural invariant of a piecewise affine map.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        let invalid = |msg: String| Err(Error::InvalidMap(msg));
        if self.pieces.is_empty() {
            return invalid("a map needs at least one piece".into());
        }
        if !self.ambient.has_interior() {
            return invalid("ambient polytope has empty interior".into());
        }
        if d <= crate::exactgeom::MAX_VERTEX_DIM {
            match self.ambient.vertices() {
                Ok(_) => {}
                Err(Error::UnboundedPolytope) => return invalid("ambient polytope is unbounded".into()),
                Err(e) => return Err(e),
            }
        } else if !self.ambient.is_bounded() {
            return invalid("ambient polytope is unbounded".into());
        }
        for (i, p) in self.pieces.iter().enumerate() {
            if p.domain.dim() != d || p.map.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: p.domain.dim().max(p.map.dim()),
                });
            }
            if !p.domain.has_interior() {
                return invalid(format!("piece {i} has empty interior"));
            }
            if !p.domain.closure_subset_of(&self.ambient)? {
                return invalid(format!("piece {i} is not contained in the ambient polytope"));
            }
            let verts = p.domain.vertices()?;
            for v in &verts {
                let img = p.map.apply(v)?;
                if !self.ambient.closure_contains(&img) {
                    return invalid(format!("piece {i} maps vertex {v} outside the ambient polytope"));
                }
            }
        }
        for i in 0..self.pieces.len() {
            for j in i + 1..self.pieces.len() {
                let cap = self.pieces[i].domain.intersect(&self.pieces[j].domain)?;
                if cap.has_interior() {
                    return invalid(format!("pieces {i} and {j} overlap"));
                }
            }
        }
        if let Some(witness) = self.uncovered_point()? {
            return invalid(format!("pieces are not dense: {witness} is uncovered"));
        }
        Ok(())
    }

    /// A point of `X` at positive distance from every piece closure, if any.
    ///
    /// Splits the ambient interior by the complement of each piece closure and
    /// keeps only full-dimensional fragments; the map is dense iff none survive.
    pub fn uncovered_point(&self) -> Result<Option<RVec>> {
        let mut parts = vec![self.ambient.opened()];
        for p in &self.pieces {
            let closed: Vec<&HalfSpace> = p.domain.constraints().iter().collect();
            let mut next = Vec::new();
            for part in &parts {
                for k in 0..closed.len() {
                    let mut cs: Vec<HalfSpace> = Vec::with_capacity(k + 1);
                    // outside constraint k, inside all earlier ones
                    let h = closed[k];
                    cs.push(HalfSpace::new(
                        h.normal().scale(&-Rat::one()),
                        -h.offset().clone(),
                        true,
                    )?);
                    for prev in &closed[..k] {
                        cs.push(prev.with_strict(false));
                    }
                    let frag = part.intersect(&Polytope::new(part.dim(), cs)?)?;
                    if frag.has_interior() {
                        next.push(frag);
                    }
                }
            }
            parts = next;
            if parts.is_empty() {
                return Ok(None);
            }
        }
        parts.first().map(|p| p.interior_point()).transpose()
    }

    /// Index of the open piece containing `x`, if any.
    pub fn piece_of(&self, x: &RVec) -> Option<usize> {
        self.pieces.iter().position(|p| p.domain.contains(x))
    }

    /// `f(x)`; fails with `SingularPoint` on `X \ X'`.
    pub fn evaluate(&self, x: &RVec) -> Result<RVec> {
        x.check_dim(self.dim())?;
        let i = self.piece_of(x).ok_or(Error::SingularPoint)?;
        self.pieces[i].map.apply(x)
    }

    /// Up to `n` applications of `f`, stopping early at the singular set.
    pub fn orbit(&self, x: &RVec, n: usize) -> Result<Orbit> {
        x.check_dim(self.dim())?;
        let mut points = vec![x.clone()];
        let mut itinerary = Vec::with_capacity(n);
        for _ in 0..n {
            let cur = points.last().unwrap();
            let Some(i) = self.piece_of(cur) else {
                return Ok(Orbit {
                    points,
                    itinerary,
                    complete: false,
                });
            };
            let next = self.pieces[i].map.apply(cur)?;
            itinerary.push(i);
            points.push(next);
        }
        Ok(Orbit {
            points,
            itinerary,
            complete: true,
        })
    }

    /// `f^t` as a piecewise affine map whose pieces are the cells of `Z^t`.
    pub fn power(&self, t: usize, cap: usize) -> Result<PwaMap> {
        let part = iterate_partition(self, t, cap)?;
        Ok(PwaMap::new_unchecked(
            self.ambient.clone(),
            part.cells
                .into_iter()
                .map(|c| Piece {
                    domain: c.region,
                    map: c.composed,
                })
                .collect(),
        ))
    }

    /// Float mirror used by the sampling estimators.
    pub fn to_float(&self) -> FloatMap {
        FloatMap {
            dim: self.dim(),
            pieces: self
                .pieces
                .iter()
                .map(|p| FloatPiece {
                    domain: p.domain.to_f64(),
                    linear: p.map.linear.entries().iter().map(rat_to_f64).collect(),
                    shift: p.map.shift.to_f64(),
                })
                .collect(),
        }
    }
}

/// Visited points `x, f(x), …` and the piece indices used.
#[derive(Clone, Debug, PartialEq)]
pub struct Orbit {
    pub points: Vec<RVec>,
    pub itinerary: Vec<usize>,
    /// Whether all requested steps were taken.
    pub complete: bool,
}

#[derive(Clone, Debug)]
pub struct FloatPiece {
    pub domain: FloatPolytope,
    /// Row-major `d × d`.
    pub linear: Vec<f64>,
    pub shift: Vec<f64>,
}

/// Floating-point copy of a [`PwaMap`].
#[derive(Clone, Debug)]
pub struct FloatMap {
    pub dim: usize,
    pub pieces: Vec<FloatPiece>,
}

impl FloatMap {
    pub fn piece_of(&self, x: &[f64]) -> Option<usize> {
        self.pieces.iter().position(|p| p.domain.contains_open(x))
    }

    /// One step; `None` on the singular set.
    pub fn step(&self, x: &[f64]) -> Option<(usize, Vec<f64>)> {
        let i = self.piece_of(x)?;
        let p = &self.pieces[i];
        let d = self.dim;
        let y = (0..d)
            .map(|r| {
                let row = &p.linear[r * d..(r + 1) * d];
                row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + p.shift[r]
            })
            .collect();
        Some((i, y))
    }
}

/// A cell of `Z^n`: an open region on which `f^n` is the affine map `composed`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub region: Polytope,
    /// Piece indices visited by the first `n` iterates.
    pub word: Vec<usize>,
    pub composed: AffineMap,
    /// Vertices of the closure of `region`.
    pub vertices: Vec<RVec>,
}

impl Cell {
    fn new(region: Polytope, word: Vec<usize>, composed: AffineMap) -> Self {
        let vertices = region.vertices_unchecked();
        let region = region.prune_with_vertices(&vertices);
        Cell {
            region,
            word,
            composed,
            vertices,
        }
    }

    /// Like [`Cell::new`] but `None` when `region` has empty interior;
    /// `region` must be bounded.
    fn with_interior(region: Polytope, word: Vec<usize>, composed: AffineMap) -> Option<Self> {
        let vertices = region.vertices_unchecked();
        let d = region.dim();
        if vertices.len() <= d {
            return None;
        }
        let diffs: Vec<Vec<Rat>> = vertices[1..].iter().map(|v| v.sub(&vertices[0]).0).collect();
        if RMat::from_rows(diffs).ok()?.rank() < d {
            return None;
        }
        let region = region.prune_with_vertices(&vertices);
        Some(Cell {
            region,
            word,
            composed,
            vertices,
        })
    }

    fn bbox_f64(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.region.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for v in &self.vertices {
            for k in 0..d {
                let x = rat_to_f64(&v[k]);
                lo[k] = lo[k].min(x);
                hi[k] = hi[k].max(x);
            }
        }
        (lo, hi)
    }
}

/// The continuity partition `Z^n`, cells sorted by word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub n: usize,
    pub cells: Vec<Cell>,
}

impl Partition {
    /// `Z^1`: the pieces themselves.
    pub fn initial(f: &PwaMap) -> Partition {
        let cells = f
            .pieces
            .iter()
            .enumerate()
            .map(|(i, p)| Cell::new(p.domain.clone(), vec![i], p.map.clone()))
            .collect();
        Partition { n: 1, cells }
    }

    /// The trivial partition `{X}` with the identity map (`n = 0`).
    pub fn trivial(ambient: &Polytope) -> Partition {
        let region = ambient.opened();
        Partition {
            n: 0,
            cells: vec![Cell::new(region, Vec::new(), AffineMap::identity(ambient.dim()))],
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn words(&self) -> BTreeSet<Vec<usize>> {
        self.cells.iter().map(|c| c.word.clone()).collect()
    }
}

/// Refines `p` by one more application of `g` (normally the map `p` was built from).
///
/// Each cell `(R, w, h)` is split into `R ∩ h⁻¹(Z_j)` for every piece `Z_j`
/// of `g`; only candidates with non-empty interior are kept.
pub fn refine_by(p: &Partition, g: &PwaMap) -> Result<Partition> {
    let mut cells: Vec<Cell> = p
        .cells
        .par_iter()
        .map(|cell| -> Result<Vec<Cell>> {
            let images = cell
                .vertices
                .iter()
                .map(|v| cell.composed.apply(v))
                .collect::<Result<Vec<_>>>()?;
            let mut out = Vec::new();
            for (j, piece) in g.pieces.iter().enumerate() {
                let fit = if images.is_empty() {
                    Fit::Split
                } else {
                    classify(&piece.domain, &images)
                };
                if fit == Fit::Outside {
                    continue;
                }
                let pre = piece.domain.affine_preimage(&cell.composed)?;
                let cand = cell.region.intersect(&pre)?;
                let mut word = cell.word.clone();
                word.push(j);
                let composed = cell.composed.then(&piece.map)?;
                if fit == Fit::Inside {
                    // same closure as the parent: reuse its vertices
                    let region = cand.prune_with_vertices(&cell.vertices);
                    out.push(Cell {
                        region,
                        word,
                        composed,
                        vertices: cell.vertices.clone(),
                    });
                } else if let Some(c) = Cell::with_interior(cand, word, composed) {
                    out.push(c);
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    cells.sort_by(|a, b| a.word.cmp(&b.word));
    Ok(Partition { n: p.n + 1, cells })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Fit {
    /// The cell's image misses the interior of the domain.
    Outside,
    /// The cell's interior maps into the domain.
    Inside,
    Split,
}

/// Locates the image of a cell, given the images of its closure's vertices.
///
/// The image closure is the hull of `images`. A constraint that every image
/// vertex violates or meets with equality, at least one strictly, leaves no
/// interior. If every constraint is met by every image vertex, interior
/// points map strictly inside unless a strict constraint is tight at all of
/// them.
fn classify(domain: &Polytope, images: &[RVec]) -> Fit {
    let mut inside = true;
    for h in domain.constraints() {
        let (mut pos, mut neg) = (false, false);
        for y in images {
            let s = h.slack(y);
            pos |= s.is_positive();
            neg |= s.is_negative();
        }
        if neg && !pos {
            return Fit::Outside;
        }
        if neg || (!pos && h.is_strict()) {
            inside = false;
        }
    }
    if inside {
        Fit::Inside
    } else {
        Fit::Split
    }
}

/// `Z^{n+1}` from `Z^n`.
pub fn refine(p: &Partition, f: &PwaMap) -> Result<Partition> {
    refine_by(p, f)
}

/// `Z^n` by `n − 1` refinements of the piece partition.
pub fn iterate_partition(f: &PwaMap, n: usize, cap: usize) -> Result<Partition> {
    let mut out = None;
    iterate_partition_with(f, n, cap, |p| {
        if p.n == n {
            out = Some(p.clone());
        }
        Ok(())
    })?;
    Ok(out.expect("n ≥ 1 yields a final partition"))
}

/// Calls `visit` on `Z^1, …, Z^n` in order.
pub fn iterate_partition_with(
    f: &PwaMap,
    n: usize,
    cap: usize,
    mut visit: impl FnMut(&Partition) -> Result<()>,
) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("partition level must be ≥ 1".into()));
    }
    let mut p = Partition::initial(f);
    check_cap(&p, cap)?;
    visit(&p)?;
    for _ in 1..n {
        p = refine(&p, f)?;
        check_cap(&p, cap)?;
        visit(&p)?;
    }
    Ok(())
}

fn check_cap(p: &Partition, cap: usize) -> Result<()> {
    if p.len() > cap {
        return Err(Error::ResourceLimit(format!(
            "partition Z^{} has {} cells (cap {cap})",
            p.n,
            p.len()
        )));
    }
    Ok(())
}

/// Number of cells whose closure contains `a`.
pub fn multiplicity_at(p: &Partition, a: &RVec) -> usize {
    p.cells.iter().filter(|c| c.region.closure_contains(a)).count()
}

/// `mult(Z^k, a)` for `k = 1..=n`, refining only cells whose closure contains `a`.
///
/// A refined cell's closure lies inside its parent's, so this is exact.
pub fn local_multiplicities(f: &PwaMap, a: &RVec, n: usize, cap: usize) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::InvalidInput("partition level must be ≥ 1".into()));
    }
    let keep = |p: Partition| Partition {
        n: p.n,
        cells: p.cells.into_iter().filter(|c| c.region.closure_contains(a)).collect(),
    };
    let mut p = keep(Partition::initial(f));
    let mut out = vec![p.len()];
    for _ in 1..n {
        p = keep(refine(&p, f)?);
        check_cap(&p, cap)?;
        out.push(p.len());
    }
    Ok(out)
}

/// `max_a mult(Z^n, a)` over all cell vertices, with the smallest maximizing vertex.
pub fn max_multiplicity(p: &Partition) -> Result<(usize, RVec)> {
    let (m, mut all) = max_multiplicity_all(p)?;
    Ok((m, all.swap_remove(0)))
}

/// `max_a mult(Z^n, a)` with every maximizing vertex, in increasing order.
pub fn max_multiplicity_all(p: &Partition) -> Result<(usize, Vec<RVec>)> {
    if let Some(c) = p.cells.first() {
        if c.region.dim() > crate::exactgeom::MAX_VERTEX_DIM {
            return Err(Error::InvalidInput(
                "multiplicity needs vertex enumeration (dim ≤ 4)".into(),
            ));
        }
    }
    let candidates: Vec<RVec> = p
        .cells
        .iter()
        .flat_map(|c| c.vertices.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if candidates.is_empty() {
        return Err(Error::EmptyInterior);
    }
    let boxes: Vec<(Vec<f64>, Vec<f64>)> = p.cells.iter().map(Cell::bbox_f64).collect();
    let floats: Vec<FloatPolytope> = p.cells.iter().map(|c| c.region.to_f64()).collect();
    let counts: Vec<usize> = candidates
        .par_iter()
        .map(|a| {
            let af = a.to_f64();
            let scale = 1.0 + af.iter().map(|x| x.abs()).fold(0.0, f64::max);
            p.cells
                .iter()
                .zip(&boxes)
                .zip(&floats)
                .filter(|((c, (lo, hi)), fp)| {
                    // cheap float rejections, exact test on survivors
                    let slack = 1e-9 * scale;
                    af.iter()
                        .enumerate()
                        .all(|(k, x)| *x >= lo[k] - slack && *x <= hi[k] + slack)
                        && fp.contains_closed_within(&af, slack)
                        && c.region.closure_contains(a)
                })
                .count()
        })
        .collect();
    let best = *counts.iter().max().expect("non-empty candidates");
    let witnesses = candidates
        .into_iter()
        .zip(&counts)
        .filter(|(_, c)| **c == best)
        .map(|(a, _)| a)
        .collect();
    Ok((best, witnesses))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthEntry {
    pub n: usize,
    pub value: u64,
    /// `(1/n) ln value`.
    pub rate: f64,
}

/// A sequence `v_1, v_2, …` whose exponential growth rate is sought.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GrowthSeq {
    pub entries: Vec<GrowthEntry>,
}

impl GrowthSeq {
    pub fn push(&mut self, n: usize, value: u64) {
        assert!(value >= 1 && n >= 1, "growth values and indices start at 1");
        self.entries.push(GrowthEntry {
            n,
            value,
            rate: (value as f64).ln() / n as f64,
        });
    }

    pub fn value_at(&self, n: usize) -> Option<u64> {
        self.entries.iter().find(|e| e.n == n).map(|e| e.value)
    }

    /// `(1/N) ln v_N` at the last index.
    pub fn last_rate(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.rate)
    }

    /// `(ln v_N − ln v_M) / (N − M)` with `M = ⌈N/2⌉`; cancels polynomial prefactors.
    pub fn two_point_slope(&self) -> f64 {
        let Some(last) = self.entries.last() else {
            return 0.0;
        };
        two_point_slope_by(last.n, |n| self.value_at(n).map(|v| v as f64))
    }
}

/// Two-point tail slope between `⌈N/2⌉` and `N` for any positive sequence.
pub fn two_point_slope_by(n_max: usize, value: impl Fn(usize) -> Option<f64>) -> f64 {
    let mid = n_max.div_ceil(2);
    if mid == n_max {
        return value(n_max).map_or(0.0, |v| v.ln() / n_max as f64);
    }
    match (value(n_max), value(mid)) {
        (Some(hi), Some(lo)) => (hi.ln() - lo.ln()) / (n_max - mid) as f64,
        _ => f64::NAN,
    }
}

/// `|Z^n|` and `mult(Z^n)` for `n = 1..=n_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub cells: GrowthSeq,
    pub mult: GrowthSeq,
    pub mult_witness: Vec<String>,
    /// Entries of `mult` past this level are tracked at the final witnesses only.
    pub mult_tracked_after: Option<usize>,
}

impl GrowthReport {
    pub fn sing_slope(&self) -> f64 {
        self.cells.two_point_slope()
    }

    pub fn mult_slope(&self) -> f64 {
        self.mult.two_point_slope()
    }
}

pub fn growth_sequences(f: &PwaMap, n_max: usize, cap: usize) -> Result<GrowthReport> {
    Ok(growth_with_partition(f, n_max, n_max, cap)?.0)
}

/// Growth sequences up to `n_max` together with `Z^{n_max}`.
///
/// When `mult_n > n_max`, `mult` is continued to `mult_n` by exact local
/// refinement around every vertex maximizing `mult(Z^{n_max}, ·)`. The
/// continuation follows those points only, so it can miss a new maximizer.
pub fn growth_with_partition(f: &PwaMap, n_max: usize, mult_n: usize, cap: usize) -> Result<(GrowthReport, Partition)> {
    let mut report = GrowthReport {
        cells: GrowthSeq::default(),
        mult: GrowthSeq::default(),
        mult_witness: Vec::new(),
        mult_tracked_after: None,
    };
    let mut last = None;
    let mut witnesses = Vec::new();
    iterate_partition_with(f, n_max, cap, |p| {
        let (m, w) = max_multiplicity_all(p)?;
        report.cells.push(p.n, p.len() as u64);
        report.mult.push(p.n, m as u64);
        report.mult_witness.push(w[0].to_string());
        if p.n == n_max {
            last = Some(p.clone());
            witnesses = w;
        }
        Ok(())
    })?;
    if mult_n > n_max {
        report.mult_tracked_after = Some(n_max);
        let tracks = witnesses
            .par_iter()
            .map(|a| local_multiplicities(f, a, mult_n, cap))
            .collect::<Result<Vec<_>>>()?;
        for n in n_max + 1..=mult_n {
            let (k, m) = tracks
                .iter()
                .enumerate()
                .map(|(k, t)| (k, t[n - 1]))
                .max_by(|x, y| x.1.cmp(&y.1).then(y.0.cmp(&x.0)))
                .expect("at least one witness");
            report.mult.push(n, m as u64);
            report.mult_witness.push(witnesses[k].to_string());
        }
    }
    Ok((report, last.expect("n_max ≥ 1")))
}
