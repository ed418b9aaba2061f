//! Built-in, exactly specified fixtures.
//!
//! Besides the worked examples (a non-expanding triangle map with exponential
//! multiplicity growth, its three-dimensional skew extension with positive
//! entropy, and a map with vanishing Lyapunov exponents but positive entropy)
//! the catalog holds toral linear maps and small toy maps with known answers.
//!
//! Two classical examples are deliberately absent: a piecewise isometry of
//! the torus with countably many continuity domains, and the piecewise smooth
//! map `(x, y) ↦ (x/2, y/2 − sgn(y) x²)`. Neither is a finite piecewise affine
//! map, so neither satisfies the [`PwaMap`] invariants.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactgeom::{rat, AffineMap, HalfSpace, Polytope, RMat, RVec, Rat};
use crate::pwamap::{Piece, PwaMap};
use crate::skew::{BaseDynamics, SkewProduct};

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Stated in the literature for this exact system.
    Published,
    /// Computed independently (closed form or brute-force oracle).
    Derived,
    /// Immediate from the construction.
    Trivial,
}

/// Quantities a fixture can assert.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Topological entropy (checked against the estimator verdict interval).
    Entropy,
    /// Two-point slope of `ln mult(Z^n)`.
    MultEntropy,
    /// Two-point slope of `ln |Z^n|`.
    SingEntropy,
    LambdaPlus,
    LambdaMax,
    /// Sampled angular expansion rate for one-frames.
    Rho1,
    /// Assembled upper bound on the entropy.
    UpperBound,
    /// Exact `mult(Z^n, point)` at the configured level.
    MultAtPoint,
    /// Number of pieces.
    PieceCount,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Expected {
    pub quantity: Quantity,
    pub value: f64,
    /// Accept `|measured − value| ≤ tol`; for [`Quantity::UpperBound`] accept `measured ≤ value + tol`.
    pub tol: f64,
    pub provenance: Provenance,
    pub note: &'static str,
}

impl Expected {
    fn new(quantity: Quantity, value: f64, tol: f64, provenance: Provenance, note: &'static str) -> Self {
        Expected {
            quantity,
            value,
            tol,
            provenance,
            note,
        }
    }
}

#[derive(Clone, Debug)]
pub enum FixtureMap {
    Map(PwaMap),
    Skew(SkewProduct),
}

/// A named system with its table of known quantities.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub map: FixtureMap,
    pub expected: Vec<Expected>,
    /// Point at which [`Quantity::MultAtPoint`] is evaluated, with the level `n`.
    pub mult_probe: Option<(RVec, usize)>,
}

impl Fixture {
    /// The map itself, or the flattened skew product.
    pub fn pwamap(&self) -> Result<PwaMap> {
        match &self.map {
            FixtureMap::Map(f) => Ok(f.clone()),
            FixtureMap::Skew(sp) => sp.flatten(),
        }
    }
}

fn pt(v: &[(i64, i64)]) -> RVec {
    RVec::from_pairs(v)
}

fn affine(a: &[&[(i64, i64)]], b: &[(i64, i64)]) -> AffineMap {
    AffineMap::new(RMat::from_pairs(a), RVec::from_pairs(b)).expect("square literal")
}

fn interval(lo: Rat, hi: Rat, strict: bool) -> Polytope {
    Polytope::from_box(&RVec(vec![lo]), &RVec(vec![hi]), strict).expect("interval")
}

// ---------------------------------------------------------------------------
// worked examples

/// Triangle `a=(−1,0), c=(1,0), f=(0,1)` split along `bf` with `b=(0,0)`.
pub fn example1_map() -> PwaMap {
    let a = pt(&[(-1, 1), (0, 1)]);
    let b = pt(&[(0, 1), (0, 1)]);
    let c = pt(&[(1, 1), (0, 1)]);
    let f = pt(&[(0, 1), (1, 1)]);
    let ambient = Polytope::simplex(&[a.clone(), c.clone(), f.clone()], false).unwrap();
    // open relative to X: only the cut along bf is strict
    let left = Polytope::simplex(&[a, b.clone(), f.clone()], true)
        .and_then(|p| p.relatively_open_in(&ambient))
        .unwrap();
    let right = Polytope::simplex(&[b, c, f], true)
        .and_then(|p| p.relatively_open_in(&ambient))
        .unwrap();
    let a1 = affine(&[&[(1, 1), (-1, 2)], &[(0, 1), (1, 2)]], &[(1, 2), (1, 2)]);
    let a2 = affine(&[&[(1, 1), (1, 2)], &[(0, 1), (1, 2)]], &[(-1, 2), (1, 2)]);
    PwaMap::new(
        ambient,
        vec![Piece { domain: left, map: a1 }, Piece { domain: right, map: a2 }],
    )
    .expect("example1 is a valid map")
}

/// The vertex `f = (0, 1)` of the example1 map, where multiplicity doubles each step.
pub fn example1_apex() -> RVec {
    RVec::from_ints(&[0, 1])
}

/// `x ↦ ½(S(x) + f)`: strictly contracting, same partition combinatorics.
pub fn example1_contracted_map() -> PwaMap {
    let base = example1_map();
    let half = rat(1, 2);
    let apex_half = example1_apex().scale(&half);
    let pieces = base
        .pieces()
        .iter()
        .map(|p| Piece {
            domain: p.domain.clone(),
            map: AffineMap::new(p.map.linear.scale(&half), p.map.shift.scale(&half).add(&apex_half)).unwrap(),
        })
        .collect();
    PwaMap::new(base.ambient().clone(), pieces).expect("contracted example1 is valid")
}

/// Two-interval exchange on `[0, 1]`: swap `(0, ½)` and `(½, 1)`.
pub fn interval_swap() -> PwaMap {
    let half = rat(1, 2);
    PwaMap::new(
        Polytope::unit_cube(1, false),
        vec![
            Piece {
                domain: interval(Rat::zero(), half.clone(), true),
                map: AffineMap::new(RMat::identity(1), RVec(vec![half.clone()])).unwrap(),
            },
            Piece {
                domain: interval(half.clone(), Rat::one(), true),
                map: AffineMap::new(RMat::identity(1), RVec(vec![-half])).unwrap(),
            },
        ],
    )
    .expect("interval swap is valid")
}

pub fn identity_on(ambient: Polytope) -> PwaMap {
    let d = ambient.dim();
    PwaMap::new(
        ambient.clone(),
        vec![Piece {
            domain: ambient.opened(),
            map: AffineMap::identity(d),
        }],
    )
    .expect("identity is valid")
}

/// The example1 base with fibre `Id` over the left triangle and the interval swap over the right.
pub fn example2_skew() -> SkewProduct {
    SkewProduct::new(
        BaseDynamics::Map(example1_map()),
        Polytope::unit_cube(1, false),
        vec![identity_on(Polytope::unit_cube(1, false)), interval_swap()],
        vec![0, 1],
    )
    .expect("example2 is a valid skew product")
}

/// Vertex coordinates for the example3 map.
pub struct Example3Points {
    pub a: RVec,
    pub b: RVec,
    pub c: RVec,
    pub d: RVec,
    pub e: RVec,
    pub f: RVec,
}

pub fn example3_points() -> Example3Points {
    Example3Points {
        a: pt(&[(1, 2), (1, 1)]),
        b: pt(&[(1, 4), (1, 2)]),
        c: pt(&[(1, 2), (1, 2)]),
        d: pt(&[(3, 4), (1, 2)]),
        e: pt(&[(0, 1), (0, 1)]),
        f: pt(&[(1, 1), (0, 1)]),
    }
}

/// Unique affine map of the plane sending triangle `src` onto `dst` vertex by vertex.
pub fn affine_from_triangles(src: [&RVec; 3], dst: [&RVec; 3]) -> Result<AffineMap> {
    let u = [src[1].sub(src[0]), src[2].sub(src[0])];
    let w = [dst[1].sub(dst[0]), dst[2].sub(dst[0])];
    // L [u0 u1] = [w0 w1]  ⇒  L = W U⁻¹
    let umat = RMat::from_rows(vec![
        vec![u[0][0].clone(), u[1][0].clone()],
        vec![u[0][1].clone(), u[1][1].clone()],
    ])?;
    let wmat = RMat::from_rows(vec![
        vec![w[0][0].clone(), w[1][0].clone()],
        vec![w[0][1].clone(), w[1][1].clone()],
    ])?;
    let linear = wmat.mul(&umat.inverse()?)?;
    let shift = dst[0].sub(&linear.mul_vec(src[0])?);
    AffineMap::new(linear, shift)
}

/// Index of the identity piece `BDFE` in [`example3_map`].
pub const EXAMPLE3_IDENTITY_PIECE: usize = 2;

/// `ABC → AEF`, `ADC → AFE`, identity on `BDFE`.
pub fn example3_map() -> PwaMap {
    let p = example3_points();
    let ambient = Polytope::simplex(&[p.a.clone(), p.e.clone(), p.f.clone()], false).unwrap();
    let open = |q: Result<Polytope>| q.and_then(|q| q.relatively_open_in(&ambient)).unwrap();
    let abc = open(Polytope::simplex(&[p.a.clone(), p.b.clone(), p.c.clone()], true));
    let adc = open(Polytope::simplex(&[p.a.clone(), p.d.clone(), p.c.clone()], true));
    let bdfe = open(Polytope::convex_polygon(
        &[p.b.clone(), p.d.clone(), p.f.clone(), p.e.clone()],
        true,
    ));
    let m_abc = affine_from_triangles([&p.a, &p.b, &p.c], [&p.a, &p.e, &p.f]).unwrap();
    let m_adc = affine_from_triangles([&p.a, &p.d, &p.c], [&p.a, &p.f, &p.e]).unwrap();
    PwaMap::new(
        ambient,
        vec![
            Piece {
                domain: abc,
                map: m_abc,
            },
            Piece {
                domain: adc,
                map: m_adc,
            },
            Piece {
                domain: bdfe,
                map: AffineMap::identity(2),
            },
        ],
    )
    .expect("example3 is a valid map")
}

// ---------------------------------------------------------------------------
// toral maps

/// `x ↦ A x mod Z^d` on `[0, 1]^d`, one piece per integer translate hit by `A (0,1)^d`.
pub fn torus_map(a: &RMat) -> Result<PwaMap> {
    let d = a.rows();
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: a.cols(),
        });
    }
    if a.det()?.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let ambient = Polytope::unit_cube(d, false);
    let open = Polytope::unit_cube(d, true);
    // exact bounding box of A [0,1]^d, row by row
    let mut ranges = Vec::with_capacity(d);
    for r in 0..d {
        let (mut lo, mut hi) = (Rat::zero(), Rat::zero());
        for v in a.row(r) {
            if *v < Rat::zero() {
                lo += v;
            } else {
                hi += v;
            }
        }
        let lo_k = lo.floor().to_integer();
        let hi_k = hi.ceil().to_integer() - num_bigint::BigInt::one();
        ranges.push((lo_k, hi_k));
    }
    let mut pieces = Vec::new();
    let mut k: Vec<num_bigint::BigInt> = ranges.iter().map(|(lo, _)| lo.clone()).collect();
    loop {
        let kv = RVec(k.iter().map(|v| Rat::from_integer(v.clone())).collect());
        let map = AffineMap::new(a.clone(), kv.scale(&-Rat::one()))?;
        let region = open.intersect(&open.affine_preimage(&map)?)?;
        if region.has_interior() {
            pieces.push(Piece {
                domain: region.pruned()?,
                map,
            });
        }
        // odometer over the integer box
        let mut i = 0;
        loop {
            if i == d {
                return PwaMap::new(ambient, pieces);
            }
            if k[i] < ranges[i].1 {
                k[i] += 1;
                break;
            }
            k[i] = ranges[i].0.clone();
            i += 1;
        }
    }
}

pub fn cat_matrix() -> RMat {
    RMat::from_ints(&[&[2, 1], &[1, 1]])
}

pub fn cat_map() -> PwaMap {
    torus_map(&cat_matrix()).expect("cat map is valid")
}

/// `ln Jac⁺` of the cat map: `ln((3 + √5)/2)`.
pub fn cat_map_entropy() -> f64 {
    ((3.0 + 5f64.sqrt()) / 2.0).ln()
}

/// `x ↦ 2x mod 1`.
pub fn doubling_map() -> PwaMap {
    torus_map(&RMat::from_ints(&[&[2]])).expect("doubling map is valid")
}

// ---------------------------------------------------------------------------
// toys

pub fn identity_square() -> PwaMap {
    identity_on(Polytope::unit_cube(2, false))
}

/// Rotation of the unit square by a quarter turn about its centre.
pub fn quarter_turn() -> PwaMap {
    let rot = affine(&[&[(0, 1), (-1, 1)], &[(1, 1), (0, 1)]], &[(1, 1), (0, 1)]);
    PwaMap::new(
        Polytope::unit_cube(2, false),
        vec![Piece {
            domain: Polytope::unit_cube(2, true),
            map: rot,
        }],
    )
    .expect("quarter turn is valid")
}

/// `x ↦ ½ R x + b` with `R` the rotation with cosine 3/5; a conformal contraction of the square.
pub fn rotation_contraction() -> PwaMap {
    // ½R = [[3/10, -2/5], [2/5, 3/10]]; image of the square spans x ∈ [-2/5, 3/10], y ∈ [0, 7/10]
    let m = affine(&[&[(3, 10), (-2, 5)], &[(2, 5), (3, 10)]], &[(1, 2), (1, 10)]);
    PwaMap::new(
        Polytope::unit_cube(2, false),
        vec![Piece {
            domain: Polytope::unit_cube(2, true),
            map: m,
        }],
    )
    .expect("rotation-contraction is valid")
}

/// `x ↦ x/2` on `[0, 1]`.
pub fn half_contraction() -> PwaMap {
    PwaMap::new(
        Polytope::unit_cube(1, false),
        vec![Piece {
            domain: Polytope::unit_cube(1, true),
            map: affine(&[&[(1, 2)]], &[(0, 1)]),
        }],
    )
    .expect("contraction is valid")
}

/// Three-interval exchange with lengths ½, ¼, ¼ reversed in order.
pub fn three_interval_exchange() -> PwaMap {
    let cuts = [Rat::zero(), rat(1, 2), rat(3, 4), Rat::one()];
    // (0,½) → (½,1), (½,¾) → (¼,½), (¾,1) → (0,¼)
    let shifts = [rat(1, 2), rat(-1, 4), rat(-3, 4)];
    let pieces = (0..3)
        .map(|i| Piece {
            domain: interval(cuts[i].clone(), cuts[i + 1].clone(), true),
            map: AffineMap::new(RMat::identity(1), RVec(vec![shifts[i].clone()])).unwrap(),
        })
        .collect();
    PwaMap::new(Polytope::unit_cube(1, false), pieces).expect("exchange is valid")
}

/// Left and right halves of the square, each rotated and shrunk by ½ about the centre
/// (the right half is also reflected). Conformal and non-expanding with two pieces.
pub fn conformal_two_piece() -> PwaMap {
    let half = rat(1, 2);
    let left = Polytope::from_box(&RVec::zeros(2), &RVec(vec![half.clone(), Rat::one()]), true).unwrap();
    let right = Polytope::from_box(&RVec(vec![half, Rat::zero()]), &RVec::from_ints(&[1, 1]), true).unwrap();
    // x ↦ ½ R90 (x − c) + c, c = (½, ½)
    let rot = affine(&[&[(0, 1), (-1, 2)], &[(1, 2), (0, 1)]], &[(3, 4), (1, 4)]);
    // x ↦ ½ diag(1,−1) (x − c) + c
    let refl = affine(&[&[(1, 2), (0, 1)], &[(0, 1), (-1, 2)]], &[(1, 4), (3, 4)]);
    PwaMap::new(
        Polytope::unit_cube(2, false),
        vec![
            Piece { domain: left, map: rot },
            Piece {
                domain: right,
                map: refl,
            },
        ],
    )
    .expect("conformal two-piece map is valid")
}

/// `diag(2, ½)` on the square, wrapped on the first coordinate.
pub fn hyperbolic_wrap() -> PwaMap {
    let half = rat(1, 2);
    let left = Polytope::from_box(&RVec::zeros(2), &RVec(vec![half.clone(), Rat::one()]), true).unwrap();
    let right = Polytope::from_box(&RVec(vec![half, Rat::zero()]), &RVec::from_ints(&[1, 1]), true).unwrap();
    PwaMap::new(
        Polytope::unit_cube(2, false),
        vec![
            Piece {
                domain: left,
                map: affine(&[&[(2, 1), (0, 1)], &[(0, 1), (1, 2)]], &[(0, 1), (0, 1)]),
            },
            Piece {
                domain: right,
                map: affine(&[&[(2, 1), (0, 1)], &[(0, 1), (1, 2)]], &[(-1, 1), (1, 2)]),
            },
        ],
    )
    .expect("hyperbolic wrap is valid")
}

/// Full shift on `symbols` letters over the unit square; letter `k` moves the
/// fibre by the `k`-th of identity, quarter turn and rotation-contraction (cyclically).
pub fn shift_conformal_skew(symbols: usize) -> Result<SkewProduct> {
    let fibers = vec![identity_square(), quarter_turn(), rotation_contraction()];
    let assignment = (0..symbols).map(|k| k % fibers.len()).collect();
    SkewProduct::new(
        BaseDynamics::FullShift(symbols),
        Polytope::unit_cube(2, false),
        fibers,
        assignment,
    )
}

// ---------------------------------------------------------------------------
// random maps

/// Seeded random non-degenerate map on `[0, 1]^d` with at most four pieces.
///
/// Up to two random rational hyperplanes cut the cube; each resulting piece
/// gets a random invertible linear part, rescaled and shifted so that the
/// image of the whole cube lies in the cube.
pub fn random_map(d: usize, seed: u64) -> Result<PwaMap> {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    if d == 0 || d > 3 {
        return Err(Error::InvalidInput("random maps are generated for 1 ≤ d ≤ 3".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let cube = Polytope::unit_cube(d, false);
    let corners: Vec<RVec> = cube.vertices()?;

    let mut cuts = Vec::new();
    for _ in 0..rng.random_range(0..=2usize) {
        let normal: Vec<i64> = loop {
            let v: Vec<i64> = (0..d).map(|_| rng.random_range(-2..=2)).collect();
            if v.iter().any(|x| *x != 0) {
                break v;
            }
        };
        // through a point of (¼, ¾)^d on the 1/8 lattice
        let through = RVec((0..d).map(|_| rat(rng.random_range(2..=6), 8)).collect());
        let normal = RVec::from_ints(&normal);
        let offset = normal.dot(&through);
        cuts.push(HalfSpace::le(normal, offset, true)?);
    }
    let mut domains = vec![cube.clone()];
    for h in &cuts {
        let below = Polytope::new(d, vec![h.clone()])?;
        let above = Polytope::new(d, vec![HalfSpace::ge(h.normal().clone(), h.offset().clone(), true)?])?;
        let mut next = Vec::new();
        for p in &domains {
            for side in [&below, &above] {
                let q = p.intersect(side)?;
                if q.has_interior() {
                    next.push(q);
                }
            }
        }
        domains = next;
    }

    let mut pieces = Vec::with_capacity(domains.len());
    for domain in domains {
        let linear = loop {
            let m = RMat::from_rows(
                (0..d)
                    .map(|_| {
                        (0..d)
                            .map(|_| rat(rng.random_range(-3..=3), rng.random_range(1..=3)))
                            .collect()
                    })
                    .collect(),
            )?;
            if !m.det()?.is_zero() {
                break m;
            }
        };
        // shrink so the image of the cube fits, then translate into it
        let images: Vec<RVec> = corners.iter().map(|c| linear.mul_vec(c)).collect::<Result<_>>()?;
        let mut lo = images[0].clone();
        let mut hi = images[0].clone();
        for y in &images {
            for k in 0..d {
                if y[k] < lo[k] {
                    lo.0[k] = y[k].clone();
                }
                if y[k] > hi[k] {
                    hi.0[k] = y[k].clone();
                }
            }
        }
        let extent = (0..d).map(|k| &hi[k] - &lo[k]).max().expect("d ≥ 1");
        let shrink = rat(rng.random_range(3..=8), 8);
        let scale = if extent > Rat::one() { shrink / extent } else { shrink };
        let linear = linear.scale(&scale);
        let lo = lo.scale(&scale);
        let hi = hi.scale(&scale);
        let shift = RVec(
            (0..d)
                .map(|k| {
                    let room = Rat::one() - (&hi[k] - &lo[k]);
                    let t = rat(rng.random_range(0..=4), 4);
                    room * t - &lo[k]
                })
                .collect(),
        );
        pieces.push(Piece {
            domain: domain.relatively_open_in(&cube)?,
            map: AffineMap::new(linear, shift)?,
        });
    }
    PwaMap::new(cube, pieces)
}

// ---------------------------------------------------------------------------
// fixtures with expected tables

use Provenance::{Derived, Published, Trivial};
use Quantity::*;

pub fn example1() -> Fixture {
    let ln2 = 2f64.ln();
    Fixture {
        name: "example1",
        map: FixtureMap::Map(example1_map()),
        expected: vec![
            Expected::new(Entropy, 0.0, 0.15, Published, "orbits converge to the apex"),
            Expected::new(MultEntropy, ln2, 0.05, Published, "multiplicity 2^n at the apex"),
            Expected::new(SingEntropy, ln2, 0.05, Published, "|Z^n| = 2^n"),
            Expected::new(LambdaPlus, 0.0, 0.02, Published, "non-expanding pieces"),
            Expected::new(Rho1, ln2, 0.05, Published, "spherization conjugate to doubling"),
            Expected::new(MultAtPoint, 8.0, 0.0, Published, "mult(Z^3, f) = 2^3"),
        ],
        mult_probe: Some((example1_apex(), 3)),
    }
}

pub fn example2() -> Fixture {
    let ln2 = 2f64.ln();
    Fixture {
        name: "example2",
        map: FixtureMap::Skew(example2_skew()),
        expected: vec![
            Expected::new(Entropy, ln2, 0.15, Published, "non-expanding map with entropy log 2"),
            Expected::new(UpperBound, ln2, 0.1, Published, "assembled bound is sharp up to slack"),
            Expected::new(PieceCount, 3.0, 0.0, Published, "three continuity domains"),
        ],
        mult_probe: None,
    }
}

pub fn example3() -> Fixture {
    let ln2 = 2f64.ln();
    let p = example3_points();
    Fixture {
        name: "example3",
        map: FixtureMap::Map(example3_map()),
        expected: vec![
            Expected::new(Entropy, ln2, 0.15, Published, "zero exponents, positive entropy"),
            Expected::new(MultEntropy, ln2, 0.05, Published, "multiplicity of A grows like 2^n"),
            Expected::new(MultAtPoint, 16.0, 0.0, Derived, "mult(Z^4, A) by exact refinement"),
        ],
        mult_probe: Some((p.a, 4)),
    }
}

pub fn catmap() -> Fixture {
    let h = cat_map_entropy();
    Fixture {
        name: "catmap",
        map: FixtureMap::Map(cat_map()),
        expected: vec![
            Expected::new(Entropy, h, 0.15, Derived, "log of the expanding eigenvalue"),
            Expected::new(LambdaMax, h, 1e-9, Derived, "symmetric matrix, commuting powers"),
        ],
        mult_probe: None,
    }
}

pub fn doubling() -> Fixture {
    let ln2 = 2f64.ln();
    Fixture {
        name: "doubling",
        map: FixtureMap::Map(doubling_map()),
        expected: vec![
            Expected::new(Entropy, ln2, 0.15, Derived, "uniformly expanding by 2"),
            Expected::new(SingEntropy, ln2, 1e-9, Derived, "|Z^n| = 2^n"),
            Expected::new(LambdaMax, ln2, 1e-9, Trivial, "slope 2"),
        ],
        mult_probe: None,
    }
}

pub fn identity() -> Fixture {
    Fixture {
        name: "identity",
        map: FixtureMap::Map(identity_square()),
        expected: vec![
            Expected::new(Entropy, 0.0, 0.05, Trivial, "identity"),
            Expected::new(MultEntropy, 0.0, 1e-12, Trivial, "single cell"),
            Expected::new(SingEntropy, 0.0, 1e-12, Trivial, "single cell"),
            Expected::new(LambdaPlus, 0.0, 1e-12, Trivial, "identity"),
            Expected::new(Rho1, 0.0, 1e-9, Trivial, "conformal"),
            Expected::new(UpperBound, 0.0, 1e-9, Trivial, "identity"),
        ],
        mult_probe: None,
    }
}

pub fn quarter_turn_fixture() -> Fixture {
    Fixture {
        name: "quarter-turn",
        map: FixtureMap::Map(quarter_turn()),
        expected: vec![
            Expected::new(Rho1, 0.0, 1e-9, Trivial, "rotation"),
            Expected::new(UpperBound, 0.0, 0.02, Trivial, "conformal isometry"),
        ],
        mult_probe: None,
    }
}

pub fn rotation_contraction_fixture() -> Fixture {
    Fixture {
        name: "rotation-contraction",
        map: FixtureMap::Map(rotation_contraction()),
        expected: vec![
            Expected::new(Rho1, 0.0, 1e-9, Trivial, "conformal"),
            Expected::new(UpperBound, 0.0, 0.02, Trivial, "conformal non-expanding"),
            Expected::new(Entropy, 0.0, 0.05, Trivial, "contraction"),
        ],
        mult_probe: None,
    }
}

pub fn conformal_two_piece_fixture() -> Fixture {
    Fixture {
        name: "conformal-two-piece",
        map: FixtureMap::Map(conformal_two_piece()),
        expected: vec![
            Expected::new(Rho1, 0.0, 1e-9, Trivial, "conformal pieces"),
            Expected::new(UpperBound, 0.0, 0.02, Trivial, "conformal non-expanding"),
        ],
        mult_probe: None,
    }
}

pub fn half_contraction_fixture() -> Fixture {
    Fixture {
        name: "half-contraction",
        map: FixtureMap::Map(half_contraction()),
        expected: vec![
            Expected::new(UpperBound, 0.0, 0.02, Trivial, "contraction"),
            Expected::new(Entropy, 0.0, 0.05, Trivial, "contraction"),
        ],
        mult_probe: None,
    }
}

pub fn interval_exchange_fixture() -> Fixture {
    Fixture {
        name: "interval-exchange",
        map: FixtureMap::Map(three_interval_exchange()),
        expected: vec![
            Expected::new(LambdaPlus, 0.0, 1e-12, Trivial, "isometric pieces"),
            Expected::new(UpperBound, 0.0, 0.02, Trivial, "1-D isometry"),
        ],
        mult_probe: None,
    }
}

fn shift_fixture(name: &'static str, symbols: usize) -> Fixture {
    let h = (symbols as f64).ln();
    Fixture {
        name,
        map: FixtureMap::Skew(shift_conformal_skew(symbols).expect("valid skew product")),
        expected: vec![Expected::new(
            Entropy,
            h,
            1e-9,
            Published,
            "full shift with conformal non-expanding fibres: entropy of the shift",
        )],
        mult_probe: None,
    }
}

pub fn fixture_names() -> Vec<&'static str> {
    vec![
        "example1",
        "example2",
        "example3",
        "catmap",
        "doubling",
        "identity",
        "quarter-turn",
        "rotation-contraction",
        "conformal-two-piece",
        "half-contraction",
        "interval-exchange",
        "shift2-conformal",
        "shift3-conformal",
        "shift5-conformal",
    ]
}

pub fn fixture(name: &str) -> Option<Fixture> {
    Some(match name {
        "example1" => example1(),
        "example2" => example2(),
        "example3" => example3(),
        "catmap" => catmap(),
        "doubling" => doubling(),
        "identity" => identity(),
        "quarter-turn" => quarter_turn_fixture(),
        "rotation-contraction" => rotation_contraction_fixture(),
        "conformal-two-piece" => conformal_two_piece_fixture(),
        "half-contraction" => half_contraction_fixture(),
        "interval-exchange" => interval_exchange_fixture(),
        "shift2-conformal" => shift_fixture("shift2-conformal", 2),
        "shift3-conformal" => shift_fixture("shift3-conformal", 3),
        "shift5-conformal" => shift_fixture("shift5-conformal", 5),
        _ => return None,
    })
}

pub fn toys() -> Vec<Fixture> {
    vec![
        identity(),
        quarter_turn_fixture(),
        rotation_contraction_fixture(),
        conformal_two_piece_fixture(),
        half_contraction_fixture(),
        interval_exchange_fixture(),
        doubling(),
    ]
}

pub fn all_fixtures() -> Vec<Fixture> {
    fixture_names().into_iter().filter_map(fixture).collect()
}

/// Half-space helper for callers building maps by hand.
pub fn halfspace(normal: &[i64], offset: (i64, i64), strict: bool) -> HalfSpace {
    HalfSpace::le(RVec::from_ints(normal), rat(offset.0, offset.1), strict).expect("non-zero normal")
}
