//! Expansion rates of composed linear parts and angular expansion of the spherization.
//!
//! Linear parts are composed exactly (they come from [`Cell::composed`]) and
//! converted to floating point once, right before singular values are taken.

use nalgebra::{DMatrix, DVector};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactgeom::{rat_to_f64, RMat, Rat};
use crate::pwamap::{Partition, PwaMap};

/// Singular values in non-increasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `‖Λ^k M‖`: product of the `k` largest singular values (`1` for `k = 0`).
pub fn exterior_norm(m: &DMatrix<f64>, k: usize) -> f64 {
    singular_values(m).iter().take(k).product()
}

/// `ln ‖Λ^k M‖` for `k = 0..=d`, as cumulative sums of log singular values.
pub fn log_exterior_norms(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut acc = 0.0;
    for s in singular_values(m) {
        acc += s.ln();
        out.push(acc);
    }
    out
}

fn max_prefix(v: &[f64], upto: usize) -> f64 {
    v[..=upto.min(v.len() - 1)]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `ln ‖M⁻¹‖` from the exact inverse; `None` when `M` is singular.
fn log_inverse_norm(m: &RMat) -> Option<f64> {
    let inv = m.inverse().ok()?;
    Some(singular_values(&inv.to_f64())[0].ln())
}

fn ser_neg_inf<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

/// Words attaining each maximum in a [`RateReport`].
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RateWitnesses {
    pub lambda_plus: Vec<usize>,
    pub lambda_max: Vec<usize>,
    pub lambda_min: Vec<usize>,
    pub rho_bound: Vec<Vec<usize>>,
}

/// Finite-`n` rate functionals over the cells of `Z^n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub n: usize,
    pub lambda_plus: f64,
    pub lambda_max: f64,
    /// `−∞` (serialized as `null`) when some composed linear part is singular.
    #[serde(serialize_with = "ser_neg_inf")]
    pub lambda_min: f64,
    /// Entry `i − 1` holds `λ⁺_[i]` for `i = 1..=d`.
    pub lambda_plus_graded: Vec<f64>,
    /// Entry `i − 1` holds the bound on `ρ_i` for `i = 1..d`; empty for degenerate maps.
    pub rho_bound: Vec<f64>,
    /// Entry `i − 1` holds the sampled `ρ_i`, when requested.
    pub rho_sampled: Option<Vec<f64>>,
    pub per_word_max: RateWitnesses,
}

struct CellRates {
    log_ext: Vec<f64>,
    log_inv: Option<f64>,
}

fn cell_rates(p: &Partition) -> Vec<CellRates> {
    p.cells
        .par_iter()
        .map(|c| CellRates {
            log_ext: log_exterior_norms(&c.composed.linear.to_f64()),
            log_inv: log_inverse_norm(&c.composed.linear),
        })
        .collect()
}

fn argmax(vals: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in vals.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

/// `λ⁺`, `λ_max`, `λ_min`, graded `λ⁺_[i]` and the `ρ_i` bounds on `Z^n`.
pub fn lambda_rates(p: &Partition) -> Result<RateReport> {
    if p.is_empty() {
        return Err(Error::EmptyInterior);
    }
    let n = p.n.max(1) as f64;
    let d = p.cells[0].region.dim();
    let rates = cell_rates(p);
    let word = |i: usize| p.cells[i].word.clone();

    let (lp_i, lp) = argmax(rates.iter().map(|r| max_prefix(&r.log_ext, d)));
    let (lm_i, lm) = argmax(rates.iter().map(|r| r.log_ext[1]));
    let graded = (1..=d)
        .map(|i| {
            rates
                .iter()
                .map(|r| max_prefix(&r.log_ext, i))
                .fold(f64::NEG_INFINITY, f64::max)
                / n
        })
        .collect();

    let degenerate = rates.iter().any(|r| r.log_inv.is_none());
    let (lambda_min, lmin_word) = if degenerate {
        let i = rates.iter().position(|r| r.log_inv.is_none()).unwrap();
        (f64::NEG_INFINITY, word(i))
    } else {
        let (i, v) = argmax(rates.iter().map(|r| r.log_inv.unwrap()));
        (-v / n, word(i))
    };

    let mut rho_bound = Vec::new();
    let mut rho_words = Vec::new();
    if !degenerate {
        for i in 1..d {
            let (w, v) = argmax(
                rates
                    .iter()
                    .map(|r| max_prefix(&r.log_ext, i) + i as f64 * r.log_inv.unwrap()),
            );
            rho_bound.push(v / n);
            rho_words.push(word(w));
        }
    }

    Ok(RateReport {
        n: p.n,
        lambda_plus: lp / n,
        lambda_max: lm / n,
        lambda_min,
        lambda_plus_graded: graded,
        rho_bound,
        rho_sampled: None,
        per_word_max: RateWitnesses {
            lambda_plus: word(lp_i),
            lambda_max: word(lm_i),
            lambda_min: lmin_word,
            rho_bound: rho_words,
        },
    })
}

/// `max_w (1/n) max_k ln ‖Λ^k L_w‖` over all `|L|^n` words of length `n`,
/// realized or not. Bounds the cell value `λ⁺_n` from above.
pub fn word_lambda_plus_bound(linear: &[RMat], n: usize, cap: usize) -> Result<f64> {
    if linear.is_empty() || n == 0 {
        return Err(Error::InvalidInput("need at least one matrix and n ≥ 1".into()));
    }
    let words = (linear.len() as u128)
        .checked_pow(n as u32)
        .filter(|w| *w <= cap as u128);
    if words.is_none() {
        return Err(Error::ResourceLimit(format!(
            "{}^{n} words exceed cap {cap}",
            linear.len()
        )));
    }
    let mats: Vec<DMatrix<f64>> = linear.iter().map(RMat::to_f64).collect();
    let d = mats[0].nrows();
    // depth-first over words; the first symbol fans out across threads
    fn descend(mats: &[DMatrix<f64>], acc: &DMatrix<f64>, left: usize, d: usize) -> f64 {
        if left == 0 {
            return max_prefix(&log_exterior_norms(acc), d);
        }
        mats.iter()
            .map(|m| descend(mats, &(m * acc), left - 1, d))
            .fold(f64::NEG_INFINITY, f64::max)
    }
    let best = mats
        .par_iter()
        .map(|m| descend(&mats, m, n - 1, d))
        .reduce(|| f64::NEG_INFINITY, f64::max);
    Ok(best / n as f64)
}

/// Finite-`n` bound on `ρ_i`: `max_w (1/n)[max_{k≤i} ln‖Λ^k L_w‖ + i ln‖L_w⁻¹‖]`.
pub fn rho_upper_bound(p: &Partition, i: usize) -> Result<f64> {
    let report = lambda_rates(p)?;
    if report.rho_bound.is_empty() && p.cells[0].region.dim() > 1 {
        return Err(Error::SingularMatrix);
    }
    report
        .rho_bound
        .get(i.wrapping_sub(1))
        .copied()
        .ok_or_else(|| Error::InvalidInput(format!("frame size {i} outside 1..d")))
}

/// Derivative of the spherization `x ↦ Ax/‖Ax‖` at the unit vector `x`, applied to `v`.
pub fn sph_derivative(a: &DMatrix<f64>, x: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    let ax = a * x;
    let norm = ax.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::SingularMatrix);
    }
    let w = ax / norm;
    let av = a * v / norm;
    let along = w.dot(&av);
    Ok(av - w * along)
}

/// One sampled frame trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SphSample {
    pub x: Vec<f64>,
    pub word: Vec<usize>,
    pub start_direction: Vec<f64>,
    pub start_frame: Vec<Vec<f64>>,
    /// Final direction and tangent frame (columns).
    pub direction: Vec<f64>,
    pub frame: Vec<Vec<f64>>,
    /// `ln |det R|` of each re-orthonormalization step.
    pub step_log_growth: Vec<f64>,
    /// `(1/n) max_{k≤i} ln ‖Λ^k‖` of the accumulated frame map.
    pub rate: f64,
    /// Largest deviation from orthonormality seen after any step.
    pub max_frame_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SampleConfig {
    pub samples: usize,
    pub seed: u64,
    /// Number of best draws refined by local search over `(v, frame)`.
    pub polish: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            samples: 4096,
            seed: 0,
            polish: 256,
        }
    }
}

const POLISH_ITERATIONS: usize = 400;

/// Result of [`rho_sampled`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhoEstimate {
    pub i: usize,
    pub n: usize,
    pub value: f64,
    pub best: Option<SphSample>,
    pub used: usize,
    /// Random seeds that met the singular set before `n` steps.
    pub discarded: usize,
    pub max_frame_error: f64,
}

/// `(n ρ̂(n) − m ρ̂(m)) / (n − m)` from estimates at `m < n`; cancels the constant in the log growth.
pub fn rho_two_point_slope(short: &RhoEstimate, long: &RhoEstimate) -> f64 {
    let (m, n) = (short.n as f64, long.n as f64);
    (n * long.value - m * short.value) / (n - m)
}

/// Each linear part divided exactly by its first entry of maximal modulus.
///
/// The spherization only sees linear parts up to scalars, so this makes the
/// float input identical for `A` and `cA`.
fn normalized_cocycle(cocycle: &[RMat]) -> Vec<DMatrix<f64>> {
    cocycle
        .iter()
        .map(|m| {
            let mut pivot = Rat::zero();
            for v in m.entries() {
                if v.abs() > pivot.abs() {
                    pivot = v.clone();
                }
            }
            let inv = if pivot.is_zero() { pivot.clone() } else { pivot.recip() };
            let scaled = m.scale(&inv);
            DMatrix::from_row_iterator(m.rows(), m.cols(), scaled.entries().iter().map(rat_to_f64))
        })
        .collect()
}

/// Sampled angular expansion rate `ρ̂_i` of `f` at time `n`.
pub fn rho_sampled(f: &PwaMap, p: &Partition, i: usize, cfg: SampleConfig) -> Result<RhoEstimate> {
    rho_sampled_with_cocycle(f, &f.linear_parts(), p, i, cfg)
}

/// As [`rho_sampled`], with the linear parts replaced by `cocycle` (one per piece).
///
/// Orbits are still driven by `f`; only the matrices fed to the spherization change.
pub fn rho_sampled_with_cocycle(
    f: &PwaMap,
    cocycle: &[RMat],
    p: &Partition,
    i: usize,
    cfg: SampleConfig,
) -> Result<RhoEstimate> {
    let d = f.dim();
    if i == 0 || i >= d {
        return Err(Error::InvalidInput(format!("frame size {i} outside 1..{d}")));
    }
    if cocycle.len() != f.pieces().len() {
        return Err(Error::DimensionMismatch {
            expected: f.pieces().len(),
            got: cocycle.len(),
        });
    }
    for (j, m) in cocycle.iter().enumerate() {
        if m.det()?.is_zero() {
            return Err(Error::DegeneratePiece(j));
        }
    }
    if p.is_empty() {
        return Err(Error::EmptyInterior);
    }
    let mats = normalized_cocycle(cocycle);
    let n = p.n;
    let fm = f.to_float();
    let amb = f.ambient().to_f64();
    let (lo, hi) = f.ambient().bounding_box()?;
    let (lo, hi) = (lo.to_f64(), hi.to_f64());
    let cell_points: Vec<Vec<f64>> = p
        .cells
        .par_iter()
        .map(|c| c.region.interior_point().map(|x| x.to_f64()))
        .collect::<Result<_>>()?;

    // even draws walk the cells, odd draws use uniform random seeds
    let outcomes: Vec<Option<SphSample>> = (0..cfg.samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
            rng.set_stream(s as u64);
            let (x, word) = if s % 2 == 0 {
                let c = (s / 2) % p.len();
                (cell_points[c].clone(), p.cells[c].word.clone())
            } else {
                let x = loop {
                    let x: Vec<f64> = (0..d).map(|k| rng.random_range(lo[k]..=hi[k])).collect();
                    if amb.contains_open(&x) {
                        break x;
                    }
                };
                let mut word = Vec::with_capacity(n);
                let mut y = x.clone();
                for _ in 0..n {
                    let (j, next) = fm.step(&y)?;
                    word.push(j);
                    y = next;
                }
                (x, word)
            };
            Some(random_walk(&mats, x, word, i, &mut rng))
        })
        .collect();

    // refine the best draws; ties go to the lower sample index
    let mut order: Vec<usize> = (0..outcomes.len()).filter(|&s| outcomes[s].is_some()).collect();
    let rate_of = |s: usize| outcomes[s].as_ref().map_or(f64::NEG_INFINITY, |o| o.rate);
    order.sort_by(|&a, &b| rate_of(b).total_cmp(&rate_of(a)).then(a.cmp(&b)));
    let polished: Vec<(usize, SphSample)> = order
        .into_iter()
        .take(cfg.polish)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed ^ 0x9017_15ed);
            rng.set_stream(s as u64);
            (s, polish(&mats, outcomes[s].clone().unwrap(), &mut rng))
        })
        .collect();
    let mut outcomes = outcomes;
    for (s, sample) in polished {
        outcomes[s] = Some(sample);
    }

    let mut est = RhoEstimate {
        i,
        n,
        value: f64::NEG_INFINITY,
        best: None,
        used: 0,
        discarded: 0,
        max_frame_error: 0.0,
    };
    for o in outcomes {
        match o {
            None => est.discarded += 1,
            Some(sample) => {
                est.used += 1;
                est.max_frame_error = est.max_frame_error.max(sample.max_frame_error);
                if sample.rate > est.value {
                    est.value = sample.rate;
                    est.best = Some(sample);
                }
            }
        }
    }
    if est.used == 0 {
        return Err(Error::InvalidInput("no sample survived".into()));
    }
    Ok(est)
}

fn gaussian(d: usize, rng: &mut ChaCha20Rng) -> DVector<f64> {
    DVector::from_iterator(d, (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// Orthonormal columns spanning the tangent space at `v` (which must be unit).
fn tangent_frame(v: &DVector<f64>, i: usize, rng: &mut ChaCha20Rng) -> DMatrix<f64> {
    let d = v.len();
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(i);
    while cols.len() < i {
        let mut g = gaussian(d, rng);
        g -= v * v.dot(&g);
        for c in &cols {
            g -= c * c.dot(&g);
        }
        let norm = g.norm();
        if norm > 1e-6 {
            cols.push(g / norm);
        }
    }
    DMatrix::from_columns(&cols)
}

fn frame_error(q: &DMatrix<f64>, w: &DVector<f64>) -> f64 {
    let gram = q.transpose() * q;
    let id = DMatrix::<f64>::identity(gram.nrows(), gram.ncols());
    let ortho = (gram - id).amax();
    let tangent = (q.transpose() * w).amax();
    ortho.max(tangent).max((w.norm() - 1.0).abs())
}

/// Orthonormal tangent frame at unit `v` from arbitrary columns; `None` if they degenerate.
fn tangent_orthonormalize(v: &DVector<f64>, cols: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(cols.ncols());
    for c in cols.column_iter() {
        let mut g = c.into_owned();
        g -= v * v.dot(&g);
        for o in &out {
            g -= o * o.dot(&g);
        }
        let norm = g.norm();
        if norm < 1e-9 {
            return None;
        }
        out.push(g / norm);
    }
    Some(DMatrix::from_columns(&out))
}

fn frame_walk(
    mats: &[DMatrix<f64>],
    x: Vec<f64>,
    word: Vec<usize>,
    v0: DVector<f64>,
    frame0: DMatrix<f64>,
) -> SphSample {
    let i = frame0.ncols();
    let mut v = v0.clone();
    let mut frame = frame0.clone();
    let mut r_total = DMatrix::<f64>::identity(i, i);
    let mut steps = Vec::with_capacity(word.len());
    let mut max_err: f64 = 0.0;
    for &j in &word {
        let a = &mats[j];
        let cols: Vec<DVector<f64>> = frame
            .column_iter()
            .map(|c| sph_derivative(a, &v, &c.into_owned()).expect("invertible piece"))
            .collect();
        let av = a * &v;
        v = &av / av.norm();
        let image = DMatrix::from_columns(&cols);
        let qr = image.qr();
        let (mut q, mut r) = (qr.q(), qr.r());
        // the image is tangent at the new direction; re-project to remove drift
        for mut c in q.column_iter_mut() {
            let along = c.dot(&v);
            c -= &v * along;
        }
        let re = q.clone().qr();
        let r2 = re.r();
        q = re.q();
        r = &r2 * r;
        steps.push(r.diagonal().iter().map(|x| x.abs().ln()).sum());
        r_total = r * r_total;
        frame = q;
        max_err = max_err.max(frame_error(&frame, &v));
    }
    let n = word.len().max(1) as f64;
    let rate = max_prefix(&log_exterior_norms(&r_total), i) / n;
    let cols = |m: &DMatrix<f64>| m.column_iter().map(|c| c.iter().copied().collect()).collect();
    SphSample {
        x,
        word,
        start_direction: v0.iter().copied().collect(),
        start_frame: cols(&frame0),
        direction: v.iter().copied().collect(),
        frame: cols(&frame),
        step_log_growth: steps,
        rate,
        max_frame_error: max_err,
    }
}

fn random_walk(mats: &[DMatrix<f64>], x: Vec<f64>, word: Vec<usize>, i: usize, rng: &mut ChaCha20Rng) -> SphSample {
    let d = mats[0].nrows();
    let g = gaussian(d, rng);
    let v = &g / g.norm();
    let frame = tangent_frame(&v, i, rng);
    frame_walk(mats, x, word, v, frame)
}

/// Local search over the starting direction and frame of one sample, keeping its word.
fn polish(mats: &[DMatrix<f64>], sample: SphSample, rng: &mut ChaCha20Rng) -> SphSample {
    let d = sample.start_direction.len();
    let i = sample.start_frame.len();
    let mut best = sample;
    let mut step = 1e-2;
    for _ in 0..POLISH_ITERATIONS {
        if step < 1e-14 {
            break;
        }
        let v0 = DVector::from_column_slice(&best.start_direction);
        let f0 = DMatrix::from_columns(
            &best
                .start_frame
                .iter()
                .map(|c| DVector::from_column_slice(c))
                .collect::<Vec<_>>(),
        );
        let v = &v0 + gaussian(d, rng) * step;
        let v = &v / v.norm();
        let noise = DMatrix::from_fn(d, i, |_, _| rng.sample::<f64, _>(StandardNormal) * step);
        let Some(frame) = tangent_orthonormalize(&v, &(f0 + noise)) else {
            step *= 0.5;
            continue;
        };
        let cand = frame_walk(mats, best.x.clone(), best.word.clone(), v, frame);
        if cand.rate > best.rate {
            best = SphSample {
                max_frame_error: cand.max_frame_error.max(best.max_frame_error),
                ..cand
            };
            step = (step * 2.0).min(0.5);
        } else {
            step *= 0.8;
        }
    }
    best
}

/// Terms of the assembled entropy bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub lambda_plus: f64,
    /// Two-point slope of `ln mult(Z^k)` up to `k = n`.
    pub mult_slope: f64,
    /// `Σ_{i<d} ρ-bound_i`; absent for degenerate maps.
    pub rho_sum: Option<f64>,
    /// `d(d−1)/2 · (λ_max − λ_min)`; absent for degenerate maps.
    pub exponent_spread: Option<f64>,
    /// Smallest of the available multiplicity terms.
    pub mult_term: f64,
    pub bound: f64,
}

/// `λ⁺_n + min(mult slope, Σ ρ-bounds, d(d−1)/2 (λ_max − λ_min))`.
pub fn entropy_upper_bound(rates: &RateReport, dim: usize, mult_slope: f64) -> BoundReport {
    let degenerate = !rates.lambda_min.is_finite();
    let rho_sum = (!degenerate).then(|| rates.rho_bound.iter().sum::<f64>());
    let pairs = (dim * dim.saturating_sub(1) / 2) as f64;
    let spread = (!degenerate).then_some(pairs * (rates.lambda_max - rates.lambda_min));
    let mult_term = [Some(mult_slope), rho_sum, spread]
        .into_iter()
        .flatten()
        .fold(f64::INFINITY, f64::min);
    BoundReport {
        n: rates.n,
        lambda_plus: rates.lambda_plus,
        mult_slope,
        rho_sum,
        exponent_spread: spread,
        mult_term,
        bound: rates.lambda_plus + mult_term,
    }
}

/// Whether the exact 2×2 matrix has spectral radius exactly one.
///
/// Complex eigenvalues have modulus `√det`; real ones are `(t ± √(t² − 4δ))/2`
/// and the larger modulus is one iff `δ = |t| − 1` with `|t| ≤ 2`.
pub fn spectral_radius_is_one_2x2(m: &RMat) -> bool {
    assert!(m.rows() == 2 && m.cols() == 2, "2×2 only");
    let t = &m[(0, 0)] + &m[(1, 1)];
    let det = m.det().expect("square");
    let four = Rat::from_integer(4.into());
    let one = Rat::from_integer(1.into());
    let disc = &t * &t - &four * &det;
    if disc.is_negative() {
        det == one
    } else {
        t.abs() <= Rat::from_integer(2.into()) && det == t.abs() - one
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::{int, rat};

    fn dm(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows.len(), rows[0].len(), &rows.concat())
    }

    #[test]
    fn word_bound_dominates_cells() {
        let f = crate::catalog::example1_map();
        let p = crate::pwamap::iterate_partition(&f, 6, 1 << 20).unwrap();
        let cells = lambda_rates(&p).unwrap().lambda_plus;
        let words = word_lambda_plus_bound(&f.linear_parts(), 6, 1 << 20).unwrap();
        assert!(words >= cells - 1e-12, "{words} < {cells}");
        let cat = RMat::from_ints(&[&[2, 1], &[1, 1]]);
        let v = word_lambda_plus_bound(&[cat], 5, 10).unwrap();
        assert!((v - ((3.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-9);
        assert!(word_lambda_plus_bound(&f.linear_parts(), 30, 1 << 20).is_err());
    }

    #[test]
    fn exterior_norm_of_diagonal() {
        let m = dm(&[&[3.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert!((exterior_norm(&m, 2) - 6.0).abs() < 1e-12);
        assert_eq!(exterior_norm(&m, 0), 1.0);
        assert!((exterior_norm(&m, 3) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn norm_dominates_spectral_radius() {
        // eigenvalues 1 and 1/2
        let a = RMat::from_pairs(&[&[(1, 1), (-1, 2)], &[(0, 1), (1, 2)]]);
        assert!(exterior_norm(&a.to_f64(), 1) >= 1.0);
        assert!((exterior_norm(&a.to_f64(), 2) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sph_derivative_by_hand() {
        let a = dm(&[&[2.0, 0.0], &[0.0, 1.0]]);
        let x = DVector::from_vec(vec![0.0, 1.0]);
        let v = DVector::from_vec(vec![1.0, 0.0]);
        let out = sph_derivative(&a, &x, &v).unwrap();
        assert!((out - DVector::from_vec(vec![2.0, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn sph_derivative_isometry_and_scaling() {
        let (c, s) = (0.6, 0.8);
        let rot = dm(&[&[c, -s], &[s, c]]);
        let x = DVector::from_vec(vec![c, s]);
        let v = DVector::from_vec(vec![-s, c]);
        let out = sph_derivative(&rot, &x, &v).unwrap();
        assert!((out - &rot * &v).norm() < 1e-15);
        let a = dm(&[&[1.0, 2.0], &[0.5, 3.0]]);
        let scaled = &a * 4.0;
        let p = sph_derivative(&a, &x, &v).unwrap();
        let q = sph_derivative(&scaled, &x, &v).unwrap();
        assert!((p - q).norm() < 1e-15);
        let zero = DMatrix::<f64>::zeros(2, 2);
        assert_eq!(sph_derivative(&zero, &x, &v), Err(Error::SingularMatrix));
    }

    #[test]
    fn spectral_radius_one() {
        assert!(spectral_radius_is_one_2x2(&RMat::identity(2)));
        assert!(spectral_radius_is_one_2x2(&RMat::from_ints(&[&[0, -1], &[1, 0]])));
        assert!(spectral_radius_is_one_2x2(&RMat::from_pairs(&[
            &[(1, 1), (-1, 2)],
            &[(0, 1), (1, 2)]
        ])));
        assert!(spectral_radius_is_one_2x2(&RMat::from_ints(&[&[1, 5], &[0, 1]])));
        assert!(!spectral_radius_is_one_2x2(&RMat::from_ints(&[&[2, 1], &[1, 1]])));
        assert!(!spectral_radius_is_one_2x2(&RMat::diag(&[rat(1, 2), rat(1, 3)])));
        assert!(!spectral_radius_is_one_2x2(&RMat::diag(&[int(2), rat(1, 2)])));
        assert!(spectral_radius_is_one_2x2(&RMat::diag(&[int(-1), rat(1, 2)])));
    }

    #[test]
    fn bound_takes_smallest_mult_term() {
        let r = RateReport {
            n: 4,
            lambda_plus: 0.1,
            lambda_max: 0.5,
            lambda_min: -0.5,
            lambda_plus_graded: vec![0.1, 0.1],
            rho_bound: vec![0.7],
            rho_sampled: None,
            per_word_max: RateWitnesses::default(),
        };
        let b = entropy_upper_bound(&r, 2, 0.3);
        assert_eq!(b.mult_term, 0.3);
        assert!((b.bound - 0.4).abs() < 1e-15);
        let b = entropy_upper_bound(&r, 2, 2.0);
        assert_eq!(b.mult_term, 0.7);
        let mut deg = r.clone();
        deg.lambda_min = f64::NEG_INFINITY;
        let b = entropy_upper_bound(&deg, 2, 0.3);
        assert_eq!(b.rho_sum, None);
        assert_eq!(b.mult_term, 0.3);
        assert!(serde_json::to_string(&deg).unwrap().contains("\"lambda_min\":null"));
    }
}
