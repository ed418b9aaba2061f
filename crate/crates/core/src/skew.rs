//! Piecewise affine skew products `f(x, y) = (S(x), T_x(y))`.
//!
//! The fibre map is constant on each base piece (or each shift symbol).
//! Fibre suprema are taken over all words in the fibre alphabet, which
//! dominates the words realized along base orbits.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::entropyest::{estimate, EntropyReport, EstimateConfig};
use crate::error::{Error, Result};
use crate::exactgeom::{HalfSpace, Polytope, RVec};
use crate::pwamap::{growth_sequences, max_multiplicity, refine_by, two_point_slope_by, Partition, Piece, PwaMap};
use crate::rates::log_exterior_norms;

#[derive(Clone, Debug, PartialEq)]
pub enum BaseDynamics {
    Map(PwaMap),
    /// One-sided full shift on `N` symbols.
    FullShift(usize),
}

impl BaseDynamics {
    /// Base pieces or shift symbols.
    pub fn alphabet_size(&self) -> usize {
        match self {
            BaseDynamics::Map(f) => f.pieces().len(),
            BaseDynamics::FullShift(n) => *n,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkewProduct {
    pub base: BaseDynamics,
    pub fiber_space: Polytope,
    pub fibers: Vec<PwaMap>,
    /// `assignment[i]` is the fibre map over base piece (or symbol) `i`.
    pub assignment: Vec<usize>,
}

impl SkewProduct {
    pub fn new(base: BaseDynamics, fiber_space: Polytope, fibers: Vec<PwaMap>, assignment: Vec<usize>) -> Result<Self> {
        if let BaseDynamics::FullShift(n) = base {
            if n < 2 {
                return Err(Error::InvalidInput("full shift needs at least 2 symbols".into()));
            }
        }
        if assignment.len() != base.alphabet_size() {
            return Err(Error::InvalidMap(format!(
                "assignment covers {} of {} base symbols",
                assignment.len(),
                base.alphabet_size()
            )));
        }
        if let Some(&bad) = assignment.iter().find(|&&a| a >= fibers.len()) {
            return Err(Error::InvalidMap(format!(
                "assignment refers to missing fibre map {bad}"
            )));
        }
        for (k, t) in fibers.iter().enumerate() {
            let same = t.ambient() == &fiber_space
                || (t.ambient().closure_subset_of(&fiber_space)? && fiber_space.closure_subset_of(t.ambient())?);
            if !same {
                return Err(Error::InvalidMap(format!(
                    "fibre map {k} lives on a different fibre space"
                )));
            }
        }
        Ok(SkewProduct {
            base,
            fiber_space,
            fibers,
            assignment,
        })
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_space.dim()
    }

    /// The skew product as a piecewise affine map on `X × Y`.
    pub fn flatten(&self) -> Result<PwaMap> {
        let BaseDynamics::Map(base) = &self.base else {
            return Err(Error::InvalidInput("a full-shift base cannot be flattened".into()));
        };
        let ambient = product(base.ambient(), &self.fiber_space)?;
        let mut pieces = Vec::new();
        for (i, bp) in base.pieces().iter().enumerate() {
            for fp in self.fibers[self.assignment[i]].pieces() {
                pieces.push(Piece {
                    domain: product(&bp.domain, &fp.domain)?,
                    map: bp.map.product(&fp.map),
                });
            }
        }
        PwaMap::new(ambient, pieces)
    }
}

/// `P × Q` with constraints lifted to the product coordinates.
pub fn product(p: &Polytope, q: &Polytope) -> Result<Polytope> {
    let (dp, dq) = (p.dim(), q.dim());
    let lift = |h: &HalfSpace, before: usize, after: usize| -> Result<HalfSpace> {
        let mut normal = RVec::zeros(before).0;
        normal.extend(h.normal().iter().cloned());
        normal.extend(RVec::zeros(after).0);
        HalfSpace::new(RVec(normal), h.offset().clone(), h.is_strict())
    };
    let mut cs = Vec::with_capacity(p.num_constraints() + q.num_constraints());
    for h in p.constraints() {
        cs.push(lift(h, 0, dq)?);
    }
    for h in q.constraints() {
        cs.push(lift(h, dp, 0)?);
    }
    Polytope::new(dp + dq, cs)
}

/// `ln N`, the entropy of the full shift on `N` symbols.
pub fn shift_base_entropy(n: usize) -> f64 {
    assert!(n >= 2, "full shift needs at least 2 symbols");
    (n as f64).ln()
}

/// Fibre terms from all words of length `m` over the fibre alphabet.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberWordReport {
    pub m: usize,
    /// `max_w (1/m) max_k ln ‖Λ^k L‖` over words `w` and cells of the word partition.
    pub lambda_plus_fiber: f64,
    /// Two-point slope of `M(k) = max_w mult` between `k = ⌈m/2⌉` and `m`.
    pub mult_fiber: f64,
    /// `(1/m) ln M(m)`.
    pub mult_fiber_rate: f64,
    pub max_mult: usize,
    pub lambda_witness: Vec<usize>,
    pub mult_witness: Vec<usize>,
    pub words: usize,
}

struct WordStats {
    log_ext: f64,
    mult: usize,
}

fn word_stats(sp: &SkewProduct, word: &[usize], cap: usize) -> Result<WordStats> {
    let mut p = Partition::trivial(&sp.fiber_space);
    for &s in word {
        p = refine_by(&p, &sp.fibers[s])?;
        if p.len() > cap {
            return Err(Error::ResourceLimit(format!(
                "word partition has {} cells (cap {cap})",
                p.len()
            )));
        }
    }
    let log_ext = p
        .cells
        .iter()
        .map(|c| {
            log_exterior_norms(&c.composed.linear.to_f64())
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let mult = if sp.fiber_dim() <= crate::exactgeom::MAX_VERTEX_DIM {
        max_multiplicity(&p)?.0
    } else {
        1
    };
    Ok(WordStats { log_ext, mult })
}

fn all_words(alphabet: usize, m: usize, cap: usize) -> Result<Vec<Vec<usize>>> {
    let count = (alphabet as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(Error::ResourceLimit(format!("{alphabet}^{m} fibre words (cap {cap})")));
    }
    let mut words = vec![Vec::new()];
    for _ in 0..m {
        words = words
            .into_iter()
            .flat_map(|w| {
                (0..alphabet).map(move |s| {
                    let mut v = w.clone();
                    v.push(s);
                    v
                })
            })
            .collect();
    }
    Ok(words)
}

/// Maximal per-word `λ⁺` and multiplicity over all fibre words of length `m`.
pub fn fiber_word_rates(sp: &SkewProduct, m: usize, cap: usize) -> Result<FiberWordReport> {
    if m == 0 {
        return Err(Error::InvalidInput("word length must be ≥ 1".into()));
    }
    // fibre maps actually in use, in index order
    let used: Vec<usize> = sp
        .assignment
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let scan = |len: usize| -> Result<Vec<(Vec<usize>, WordStats)>> {
        all_words(used.len(), len, cap)?
            .into_par_iter()
            .map(|w| {
                let word: Vec<usize> = w.iter().map(|&s| used[s]).collect();
                let st = word_stats(sp, &word, cap)?;
                Ok((word, st))
            })
            .collect()
    };
    let full = scan(m)?;
    let mid = m.div_ceil(2);
    let half_mult = if mid == m {
        None
    } else {
        Some(scan(mid)?.iter().map(|(_, s)| s.mult).max().unwrap_or(1))
    };

    // first maximizer in word order
    let mut lam = (f64::NEG_INFINITY, Vec::new());
    let mut mult = (0usize, Vec::new());
    for (w, s) in &full {
        if s.log_ext > lam.0 {
            lam = (s.log_ext, w.clone());
        }
        if s.mult > mult.0 {
            mult = (s.mult, w.clone());
        }
    }
    let mf = m as f64;
    let rate = (mult.0 as f64).ln() / mf;
    let slope = match half_mult {
        Some(h) => two_point_slope_by(m, |k| Some(if k == m { mult.0 as f64 } else { h as f64 })),
        None => rate,
    };
    Ok(FiberWordReport {
        m,
        lambda_plus_fiber: lam.0 / mf,
        mult_fiber: slope,
        mult_fiber_rate: rate,
        max_mult: mult.0,
        lambda_witness: lam.1,
        mult_witness: mult.1,
        words: full.len(),
    })
}

/// Terms of the fibred entropy bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FibredBounds {
    pub lower: f64,
    pub upper: f64,
    /// Base entropy estimate (exact for a full shift).
    pub base_entropy: f64,
    /// Upper counterpart of the base estimate.
    pub base_entropy_upper: f64,
    /// Multiplicity growth slope of the base (zero for a full shift).
    pub base_mult_slope: f64,
    pub fiber: FiberWordReport,
    pub base_report: Option<EntropyReport>,
}

/// `h(S) ≤ h(f) ≤ h(S) + H_mult(S) + sup_x (λ⁺(T_x) + H_mult(T_x))`, finite-`n`, finite-`m` form.
pub fn fibred_bounds(sp: &SkewProduct, n: usize, m: usize, cfg: &EstimateConfig) -> Result<FibredBounds> {
    let fiber = fiber_word_rates(sp, m, cfg.cell_cap)?;
    let fiber_term = fiber.lambda_plus_fiber + fiber.mult_fiber;
    match &sp.base {
        BaseDynamics::FullShift(k) => {
            let h = shift_base_entropy(*k);
            Ok(FibredBounds {
                lower: h,
                upper: h + fiber_term,
                base_entropy: h,
                base_entropy_upper: h,
                base_mult_slope: 0.0,
                fiber,
                base_report: None,
            })
        }
        BaseDynamics::Map(base) => {
            let report = estimate(base, cfg)?;
            let mult_slope = growth_sequences(base, n, cfg.cell_cap)?.mult_slope();
            let (lo, hi) = (report.verdict[0], report.verdict[1].max(report.verdict[0]));
            Ok(FibredBounds {
                lower: lo,
                upper: hi + mult_slope + fiber_term,
                base_entropy: lo,
                base_entropy_upper: hi,
                base_mult_slope: mult_slope,
                fiber,
                base_report: Some(report),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::exactgeom::RMat;
    use crate::pwamap::{iterate_partition, DEFAULT_CELL_CAP};

    #[test]
    fn example2_flattens_to_three_pieces() {
        let sp = catalog::example2_skew();
        let f = sp.flatten().unwrap();
        assert_eq!(f.dim(), 3);
        assert_eq!(f.pieces().len(), 3);
        for p in f.pieces() {
            let l = &p.map.linear;
            assert_eq!(l.block(2, 2, 1, 1), RMat::identity(1));
        }
    }

    #[test]
    fn identity_fibres_copy_base_partition() {
        let base = catalog::example1_map();
        let sp = SkewProduct::new(
            BaseDynamics::Map(base.clone()),
            Polytope::unit_cube(1, false),
            vec![catalog::identity_on(Polytope::unit_cube(1, false))],
            vec![0, 0],
        )
        .unwrap();
        let f = sp.flatten().unwrap();
        assert_eq!(f.pieces().len(), 2);
        let a = iterate_partition(&f, 4, DEFAULT_CELL_CAP).unwrap();
        let b = iterate_partition(&base, 4, DEFAULT_CELL_CAP).unwrap();
        assert_eq!(a.words(), b.words());
    }

    #[test]
    fn flattened_word_products_are_block_diagonal() {
        let sp = catalog::example2_skew();
        let BaseDynamics::Map(base) = &sp.base else {
            unreachable!()
        };
        let f = sp.flatten().unwrap();
        let z = iterate_partition(&f, 4, DEFAULT_CELL_CAP).unwrap();
        // base piece of flattened piece j: X1×Y is piece 0, the X2 halves are 1 and 2
        let base_of = [0usize, 1, 1];
        for c in &z.cells {
            let l = &c.composed.linear;
            assert_eq!(l.block(0, 2, 2, 1), RMat::zeros(2, 1));
            let mut expect = RMat::identity(2);
            for &j in &c.word {
                expect = base.pieces()[base_of[j]].map.linear.mul(&expect).unwrap();
            }
            assert_eq!(l.block(0, 0, 2, 2), expect);
        }
    }

    #[test]
    fn rejects_bad_assignment() {
        let base = catalog::example1_map();
        let y = Polytope::unit_cube(1, false);
        let fib = vec![catalog::identity_on(y.clone())];
        assert!(SkewProduct::new(BaseDynamics::Map(base.clone()), y.clone(), fib.clone(), vec![0]).is_err());
        assert!(SkewProduct::new(BaseDynamics::Map(base), y.clone(), fib.clone(), vec![0, 1]).is_err());
        assert!(SkewProduct::new(BaseDynamics::FullShift(1), y, fib, vec![0]).is_err());
    }

    #[test]
    fn fiber_rates_of_isometric_fibres_vanish() {
        let sp = catalog::example2_skew();
        for m in [2, 4, 8] {
            let r = fiber_word_rates(&sp, m, DEFAULT_CELL_CAP).unwrap();
            assert!(r.lambda_plus_fiber.abs() < 1e-12, "{r:?}");
            assert!(r.mult_fiber.abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn contraction_fibre_has_zero_lambda_plus() {
        let y = Polytope::unit_cube(1, false);
        let sp = SkewProduct::new(
            BaseDynamics::FullShift(2),
            y,
            vec![catalog::half_contraction()],
            vec![0, 0],
        )
        .unwrap();
        let r = fiber_word_rates(&sp, 3, DEFAULT_CELL_CAP).unwrap();
        assert_eq!(r.lambda_plus_fiber, 0.0);
        assert_eq!(r.mult_fiber, 0.0);
        assert_eq!(r.words, 1);
    }

    #[test]
    fn shift_entropy() {
        assert_eq!(shift_base_entropy(2), 2f64.ln());
        assert_eq!(shift_base_entropy(10), 10f64.ln());
    }
}
