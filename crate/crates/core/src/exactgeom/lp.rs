//! Dense two-phase simplex over exact rationals with Bland's anti-cycling rule.
//!
//! Solves `maximize c·y subject to A y ≤ b, y ≥ 0`. Rows with negative
//! right-hand side are flipped and given an artificial variable; phase one
//! drives the artificials to zero, phase two optimizes the real objective.
//! There are no tolerances anywhere: every pivot is exact.

use num_traits::{One, Signed, Zero};

use super::linalg::Rat;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { point: Vec<Rat>, value: Rat },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// `rows × (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<Rat>>,
    /// Reduced-cost row for the objective currently being maximized, plus the
    /// negated objective value in the last slot.
    obj: Vec<Rat>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        if !p.is_one() {
            for v in self.t[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
        }
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        if !self.obj[c].is_zero() {
            let factor = self.obj[c].clone();
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Sets the objective row from costs `c` (length `cols`) expressed in the current basis.
    fn load_objective(&mut self, costs: &[Rat]) {
        let mut obj: Vec<Rat> = costs.to_vec();
        obj.push(Rat::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &costs[b];
            if cb.is_zero() {
                continue;
            }
            for (v, tv) in obj.iter_mut().zip(&self.t[i]) {
                if !tv.is_zero() {
                    *v -= cb * tv;
                }
            }
        }
        self.obj = obj;
    }

    /// Runs Bland-rule iterations; `allowed` masks columns that may enter.
    /// Returns `false` if the objective is unbounded.
    fn optimize(&mut self, allowed: &[bool]) -> bool {
        let rhs = self.cols;
        loop {
            let Some(enter) = (0..self.cols).find(|&j| allowed[j] && self.obj[j].is_positive()) else {
                return true;
            };
            let mut leave: Option<(usize, Rat)> = None;
            for (i, row) in self.t.iter().enumerate() {
                let a = &row[enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }

    fn objective_value(&self) -> Rat {
        -self.obj[self.cols].clone()
    }
}

/// Maximizes `c·y` over `{y ≥ 0 : A y ≤ b}`.
pub fn maximize(c: &[Rat], a: &[Vec<Rat>], b: &[Rat]) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    debug_assert_eq!(b.len(), m);
    debug_assert!(a.iter().all(|row| row.len() == n));

    let negative: Vec<usize> = (0..m).filter(|&i| b[i].is_negative()).collect();
    let n_art = negative.len();
    let slack0 = n;
    let art0 = n + m;
    let cols = n + m + n_art;

    let mut t = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art_idx = 0;
    for i in 0..m {
        let mut row = vec![Rat::zero(); cols + 1];
        let flip = b[i].is_negative();
        for j in 0..n {
            row[j] = if flip { -a[i][j].clone() } else { a[i][j].clone() };
        }
        row[slack0 + i] = if flip { -Rat::one() } else { Rat::one() };
        row[cols] = if flip { -b[i].clone() } else { b[i].clone() };
        if flip {
            row[art0 + art_idx] = Rat::one();
            basis.push(art0 + art_idx);
            art_idx += 1;
        } else {
            basis.push(slack0 + i);
        }
        t.push(row);
    }

    let mut tab = Tableau {
        t,
        obj: Vec::new(),
        basis,
        cols,
    };

    if n_art > 0 {
        let mut phase1 = vec![Rat::zero(); cols];
        for v in phase1.iter_mut().skip(art0) {
            *v = -Rat::one();
        }
        tab.load_objective(&phase1);
        let all = vec![true; cols];
        // phase one is bounded above by zero
        tab.optimize(&all);
        if tab.objective_value().is_negative() {
            return LpOutcome::Infeasible;
        }
        // drive remaining zero-level artificials out of the basis
        let mut r = 0;
        while r < tab.t.len() {
            if tab.basis[r] >= art0 {
                if let Some(j) = (0..art0).find(|&j| !tab.t[r][j].is_zero()) {
                    tab.pivot(r, j);
                    r += 1;
                } else {
                    tab.t.remove(r);
                    tab.basis.remove(r);
                }
            } else {
                r += 1;
            }
        }
    }

    let mut costs = vec![Rat::zero(); cols];
    costs[..n].clone_from_slice(c);
    tab.load_objective(&costs);
    let allowed: Vec<bool> = (0..cols).map(|j| j < art0).collect();
    if !tab.optimize(&allowed) {
        return LpOutcome::Unbounded;
    }

    let mut point = vec![Rat::zero(); n];
    for (i, &bcol) in tab.basis.iter().enumerate() {
        if bcol < n {
            point[bcol] = tab.t[i][cols].clone();
        }
    }
    let value = tab.objective_value();
    LpOutcome::Optimal { point, value }
}

/// Maximizes `c·x` over `{x : A x ≤ b}` with every variable free (split into
/// positive and negative parts internally).
pub fn maximize_free(c: &[Rat], a: &[Vec<Rat>], b: &[Rat]) -> LpOutcome {
    let n = c.len();
    let split_c: Vec<Rat> = c.iter().cloned().chain(c.iter().map(|v| -v.clone())).collect();
    let split_a: Vec<Vec<Rat>> = a
        .iter()
        .map(|row| row.iter().cloned().chain(row.iter().map(|v| -v.clone())).collect())
        .collect();
    match maximize(&split_c, &split_a, b) {
        LpOutcome::Optimal { point, value } => {
            let x = (0..n).map(|j| &point[j] - &point[n + j]).collect();
            LpOutcome::Optimal { point: x, value }
        }
        other => other,
    }
}
