//! Exact two-phase primal simplex over rationals, with Bland's rule.
//!
//! Sized for the fractional-chromatic oracle: tens of constraints, a few
//! hundred variables. Everything is `BigRational`; no floating point.

use crate::Rational;
use num_traits::{One, Signed, Zero};

/// Row sense of a constraint `a · x ⋈ b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
}

/// Minimizes `c · x` subject to `rows` and `x ≥ 0`. Right-hand sides must be
/// nonnegative. Returns the optimum and an optimal `x`.
pub fn solve_min(
    c: &[Rational],
    rows: &[(Vec<Rational>, Sense, Rational)],
) -> Result<(Rational, Vec<Rational>), LpError> {
    let n = c.len();
    let m = rows.len();
    debug_assert!(rows.iter().all(|(a, _, b)| a.len() == n && !b.is_negative()));

    // Columns: n structural, then one slack/surplus per row, then artificials
    // for Ge rows.
    let n_slack = m;
    let art_of_row: Vec<Option<usize>> = {
        let mut next = n + n_slack;
        rows.iter()
            .map(|(_, s, _)| match s {
                Sense::Le => None,
                Sense::Ge => {
                    let c = next;
                    next += 1;
                    Some(c)
                }
            })
            .collect()
    };
    let n_total = n + n_slack + art_of_row.iter().flatten().count();

    let mut tab: Vec<Vec<Rational>> = Vec::with_capacity(m);
    let mut rhs: Vec<Rational> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    for (i, (a, sense, b)) in rows.iter().enumerate() {
        let mut row = vec![Rational::zero(); n_total];
        row[..n].clone_from_slice(a);
        match sense {
            Sense::Le => {
                row[n + i] = Rational::one();
                basis.push(n + i);
            }
            Sense::Ge => {
                row[n + i] = -Rational::one();
                let art = art_of_row[i].unwrap();
                row[art] = Rational::one();
                basis.push(art);
            }
        }
        tab.push(row);
        rhs.push(b.clone());
    }

    let is_artificial = |j: usize| j >= n + n_slack;

    // Phase 1: minimize the sum of artificials.
    if n_total > n + n_slack {
        let mut cost1 = vec![Rational::zero(); n_total];
        for j in (n + n_slack)..n_total {
            cost1[j] = Rational::one();
        }
        simplex(&mut tab, &mut rhs, &mut basis, &cost1, |_| false)?;
        let obj: Rational = basis
            .iter()
            .zip(&rhs)
            .filter(|(b, _)| is_artificial(**b))
            .map(|(_, r)| r.clone())
            .sum();
        if !obj.is_zero() {
            return Err(LpError::Infeasible);
        }
        // Drive any zero-level artificials out of the basis.
        for i in 0..m {
            if is_artificial(basis[i]) {
                if let Some(j) = (0..n + n_slack).find(|&j| !tab[i][j].is_zero()) {
                    pivot(&mut tab, &mut rhs, &mut basis, i, j);
                }
                // A fully zero row is a redundant constraint; the artificial
                // stays basic at level zero and is banned in phase 2.
            }
        }
    }

    // Phase 2: true objective; artificial columns may not re-enter.
    let mut cost2 = vec![Rational::zero(); n_total];
    cost2[..n].clone_from_slice(c);
    simplex(&mut tab, &mut rhs, &mut basis, &cost2, is_artificial)?;

    let mut x = vec![Rational::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = rhs[i].clone();
        }
    }
    let obj = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
    Ok((obj, x))
}

/// Maximizes `c · x`; thin wrapper over [`solve_min`].
pub fn solve_max(
    c: &[Rational],
    rows: &[(Vec<Rational>, Sense, Rational)],
) -> Result<(Rational, Vec<Rational>), LpError> {
    let neg: Vec<Rational> = c.iter().map(|v| -v).collect();
    let (obj, x) = solve_min(&neg, rows)?;
    Ok((-obj, x))
}

/// Runs Bland-rule simplex to optimality for the given cost vector.
fn simplex(
    tab: &mut [Vec<Rational>],
    rhs: &mut [Rational],
    basis: &mut [usize],
    cost: &[Rational],
    banned: impl Fn(usize) -> bool,
) -> Result<(), LpError> {
    let n_total = cost.len();
    loop {
        // Reduced costs from scratch: c̄_j = c_j − Σ_i c_{basis[i]} T[i][j].
        let entering = (0..n_total)
            .filter(|&j| !banned(j) && !basis.contains(&j))
            .find(|&j| {
                let mut red = cost[j].clone();
                for (i, row) in tab.iter().enumerate() {
                    if !row[j].is_zero() && !cost[basis[i]].is_zero() {
                        red -= &cost[basis[i]] * &row[j];
                    }
                }
                red.is_negative()
            });
        let Some(j) = entering else { return Ok(()) };
        // Ratio test; Bland tie-break on the lowest basis index.
        let mut leave: Option<(Rational, usize, usize)> = None;
        for (i, row) in tab.iter().enumerate() {
            if row[j].is_positive() {
                let ratio = &rhs[i] / &row[j];
                let better = match &leave {
                    None => true,
                    Some((r, b, _)) => ratio < *r || (ratio == *r && basis[i] < *b),
                };
                if better {
                    leave = Some((ratio, basis[i], i));
                }
            }
        }
        let Some((_, _, i)) = leave else {
            return Err(LpError::Unbounded);
        };
        pivot(tab, rhs, basis, i, j);
    }
}

fn pivot(tab: &mut [Vec<Rational>], rhs: &mut [Rational], basis: &mut [usize], i: usize, j: usize) {
    let piv = tab[i][j].clone();
    for x in tab[i].iter_mut() {
        *x /= &piv;
    }
    rhs[i] /= &piv;
    for r in 0..tab.len() {
        if r == i || tab[r][j].is_zero() {
            continue;
        }
        let f = tab[r][j].clone();
        for c in 0..tab[r].len() {
            let delta = &f * &tab[i][c];
            tab[r][c] -= delta;
        }
        let delta = &f * &rhs[i];
        rhs[r] -= delta;
    }
    basis[i] = j;
}
