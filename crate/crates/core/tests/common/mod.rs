//! Brute-force itinerary oracle sharing no code with the refinement:
//! pointwise itineraries computed from raw constraints.

use std::collections::BTreeSet;

use pwaff_core::exactgeom::{rat, RVec, Rat};
use pwaff_core::pwamap::{iterate_partition, PwaMap};

fn in_piece(f: &PwaMap, k: usize, x: &RVec) -> bool {
    f.pieces()[k].domain.constraints().iter().all(|h| {
        let lhs: Rat = h.normal().iter().zip(x.iter()).map(|(a, b)| a * b).sum();
        if h.is_strict() {
            lhs < *h.offset()
        } else {
            lhs <= *h.offset()
        }
    })
}

/// Piece indices of the first `n` iterates, or `None` if the orbit meets the singular set.
fn itinerary(f: &PwaMap, x: &RVec, n: usize) -> Option<Vec<usize>> {
    let mut x = x.clone();
    let mut word = Vec::with_capacity(n);
    for _ in 0..n {
        let k = (0..f.pieces().len()).find(|&k| in_piece(f, k, &x))?;
        let m = &f.pieces()[k].map;
        let d = x.dim();
        let y: Vec<Rat> = (0..d)
            .map(|i| {
                let row: Rat = (0..d).map(|j| &m.linear[(i, j)] * &x[j]).sum();
                row + &m.shift[i]
            })
            .collect();
        x = RVec(y);
        word.push(k);
    }
    Some(word)
}

/// Words of grid points with odd numerators over `2g`, inside the ambient box.
fn grid_words(f: &PwaMap, n: usize, g: i64) -> BTreeSet<Vec<usize>> {
    let (lo, hi) = f.ambient().bounding_box().unwrap();
    let d = f.dim();
    let mut out = BTreeSet::new();
    let mut idx = vec![0i64; d];
    loop {
        let x = RVec(
            (0..d)
                .map(|i| &lo[i] + (&hi[i] - &lo[i]) * rat(2 * idx[i] + 1, 2 * g))
                .collect(),
        );
        if let Some(w) = itinerary(f, &x, n) {
            out.insert(w);
        }
        let mut i = 0;
        loop {
            if i == d {
                return out;
            }
            idx[i] += 1;
            if idx[i] < g {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Compares the word set of `Z^n` with the oracle's; returns the number of words.
pub fn check_words(name: &str, f: &PwaMap, n: usize, g: i64) -> Result<usize, String> {
    let p = iterate_partition(f, n, 2_000_000).map_err(|e| format!("{name}: {e}"))?;
    let exact = p.words();
    let mut oracle = grid_words(f, n, g);
    for c in &p.cells {
        let x = c.region.interior_point().map_err(|e| format!("{name}: {e}"))?;
        let w = itinerary(f, &x, n).ok_or_else(|| format!("{name}: interior point of {:?} is singular", c.word))?;
        if w != c.word {
            return Err(format!("{name}: interior point of {:?} lands in {w:?}", c.word));
        }
        oracle.insert(w);
    }
    if exact != oracle {
        let missing = oracle.difference(&exact).count();
        let extra = exact.difference(&oracle).count();
        return Err(format!(
            "{name}: word sets differ at n={n} ({missing} oracle-only, {extra} partition-only)"
        ));
    }
    Ok(exact.len())
}
