//! Small numerical kernels: bracketing root finders, 1-D maximisation,
//! adaptive quadrature, dense linear solves and a bounded simplex.

use crate::scalar::Scalar;

/// Bisection for a root of `f` on `[lo, hi]`, assuming `f(lo) <= 0 <= f(hi)`
/// (increasing crossing). Returns the smallest point found with `f >= 0`.
pub fn bisect_increasing<S: Scalar>(mut lo: S, mut hi: S, tol: S, mut f: impl FnMut(S) -> S) -> S {
    let half = S::lit(0.5);
    for _ in 0..400 {
        if hi - lo <= tol * S::one().max(hi.abs()) {
            break;
        }
        let mid = lo + (hi - lo) * half;
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= S::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Maximises `f` over `[lo, hi]`: dense grid scan followed by golden-section
/// refinement inside the bracket around the best grid point.
pub fn maximize_1d<S: Scalar>(lo: S, hi: S, grid: usize, tol: S, f: impl Fn(S) -> S) -> (S, S) {
    let grid = grid.max(2);
    let step = (hi - lo) / S::count(grid);
    let mut best_k = 0;
    let mut best_v = f(lo);
    for k in 1..=grid {
        let v = f(lo + step * S::count(k));
        if v > best_v {
            best_v = v;
            best_k = k;
        }
    }
    let a = if best_k == 0 {
        lo
    } else {
        lo + step * S::count(best_k - 1)
    };
    let b = if best_k == grid {
        hi
    } else {
        lo + step * S::count(best_k + 1)
    };
    let (x, v) = golden_max(a, b, tol, &f);
    let centre = lo + step * S::count(best_k);
    if v >= best_v {
        (x, v)
    } else {
        (centre, best_v)
    }
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<S: Scalar>(mut a: S, mut b: S, tol: S, f: &impl Fn(S) -> S) -> (S, S) {
    let inv_phi = (S::lit(5.0).sqrt() - S::one()) * S::lit(0.5);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..300 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    let x = (a + b) * S::lit(0.5);
    let fx = f(x);
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |acc, cand| if cand.1 > acc.1 { cand } else { acc })
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` with absolute tolerance `eps`.
pub fn integrate<S: Scalar>(a: S, b: S, eps: S, f: &impl Fn(S) -> S) -> S {
    if b <= a {
        return S::zero();
    }
    // A few fixed panels first so narrow features are not skipped.
    let panels = 16;
    let h = (b - a) / S::count(panels);
    let local_eps = eps / S::count(panels);
    (0..panels)
        .map(|k| {
            let lo = a + h * S::count(k);
            let hi = if k + 1 == panels { b } else { lo + h };
            let mid = (lo + hi) * S::lit(0.5);
            let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
            let whole = simpson(lo, hi, flo, fmid, fhi);
            simpson_rec(f, lo, hi, flo, fmid, fhi, whole, local_eps, 48)
        })
        .sum()
}

fn simpson<S: Scalar>(a: S, b: S, fa: S, fm: S, fb: S) -> S {
    (b - a) / S::lit(6.0) * (fa + S::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<S: Scalar>(f: &impl Fn(S) -> S, a: S, b: S, fa: S, fm: S, fb: S, whole: S, eps: S, depth: u32) -> S {
    let m = (a + b) * S::lit(0.5);
    let lm = (a + m) * S::lit(0.5);
    let rm = (m + b) * S::lit(0.5);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= S::lit(15.0) * eps {
        return left + right + delta / S::lit(15.0);
    }
    let half = eps * S::lit(0.5);
    simpson_rec(f, a, m, fa, flm, fm, left, half, depth - 1) + simpson_rec(f, m, b, fm, frm, fb, right, half, depth - 1)
}

/// Result of Gaussian elimination on a (possibly rank-deficient) square system.
pub enum LinearSolve<S> {
    Unique(Vec<S>),
    Singular { rank: usize },
}

/// Solves `a x = b` for square `a` with partial pivoting. Pivots below `tol`
/// are treated as zero.
pub fn solve_square<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>, tol: S) -> LinearSolve<S> {
    let n = b.len();
    let rank = eliminate(&mut a, &mut b, n, tol);
    if rank < n {
        return LinearSolve::Singular { rank };
    }
    let mut x = vec![S::zero(); n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        for j in i + 1..n {
            acc = acc - a[i][j] * x[j];
        }
        x[i] = acc / a[i][i];
    }
    LinearSolve::Unique(x)
}

/// Solves a consistent system with full column rank (`rows.len() >= cols`).
/// Returns `None` when the columns are dependent or the rows disagree.
pub fn solve_full_column_rank<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>, cols: usize, tol: S) -> Option<Vec<S>> {
    if eliminate(&mut a, &mut b, cols, tol) < cols {
        return None;
    }
    let scale = b.iter().fold(S::one(), |m, v| m.max(v.abs()));
    if b[cols..].iter().any(|v| v.abs() > tol * scale) {
        return None;
    }
    let mut x = vec![S::zero(); cols];
    for i in (0..cols).rev() {
        let mut acc = b[i];
        for j in i + 1..cols {
            acc = acc - a[i][j] * x[j];
        }
        x[i] = acc / a[i][i];
    }
    Some(x)
}

/// Rank of a dense matrix (rows of equal length).
pub fn rank<S: Scalar>(rows: &[Vec<S>], tol: S) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut a = rows.to_vec();
    let mut rhs = vec![S::zero(); a.len()];
    eliminate(&mut a, &mut rhs, cols, tol)
}

/// Row-echelon elimination over the first `cols` columns; returns the rank.
/// On full square rank the matrix is left upper-triangular in row order.
fn eliminate<S: Scalar>(a: &mut [Vec<S>], b: &mut [S], cols: usize, tol: S) -> usize {
    let rows = a.len();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (piv, val) = (r..rows)
            .map(|i| (i, a[i][c].abs()))
            .fold((r, S::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= tol {
            continue;
        }
        a.swap(r, piv);
        b.swap(r, piv);
        for i in r + 1..rows {
            let factor = a[i][c] / a[r][c];
            if factor != S::zero() {
                for j in c..cols {
                    let v = a[r][j];
                    a[i][j] = a[i][j] - factor * v;
                }
                b[i] = b[i] - factor * b[r];
            }
        }
        r += 1;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// `a·x >= b`
    Ge,
    /// `a·x = b`
    Eq,
}

#[derive(Debug, Clone)]
pub enum LpOutcome<S> {
    Optimal { x: Vec<S>, value: S },
    Infeasible,
}

/// Minimises `c·x` subject to the given rows and `0 <= x_j <= upper_j`.
///
/// Dense two-phase tableau simplex with Bland's rule. Right-hand sides must be
/// non-negative, which holds for every program built in this crate.
pub fn simplex_min<S: Scalar>(c: &[S], rows: &[(Vec<S>, RowKind, S)], upper: &[S]) -> LpOutcome<S> {
    let n = c.len();
    let tol = S::tol(1e-10);
    // Constraint list: given rows plus one `x_j <= u_j` row per variable.
    // Column layout: x (n) | slack/surplus (one per inequality) | artificials.
    struct Row<S> {
        coef: Vec<S>,
        rhs: S,
        kind: i8, // 1: >=, 0: =, -1: <=
    }
    let mut cons: Vec<Row<S>> = rows
        .iter()
        .map(|(a, k, b)| Row {
            coef: a.clone(),
            rhs: *b,
            kind: if *k == RowKind::Ge { 1 } else { 0 },
        })
        .collect();
    for (j, &u) in upper.iter().enumerate() {
        let mut coef = vec![S::zero(); n];
        coef[j] = S::one();
        cons.push(Row { coef, rhs: u, kind: -1 });
    }
    let m = cons.len();
    let n_slack = cons.iter().filter(|r| r.kind != 0).count();
    let n_art = cons.iter().filter(|r| r.kind >= 0).count();
    let width = n + n_slack + n_art;
    let mut t = vec![vec![S::zero(); width + 1]; m];
    let mut basis = vec![0usize; m];
    let mut s_col = n;
    let mut a_col = n + n_slack;
    for (i, r) in cons.iter().enumerate() {
        debug_assert!(r.rhs >= S::zero());
        t[i][..n].copy_from_slice(&r.coef);
        t[i][width] = r.rhs;
        match r.kind {
            -1 => {
                t[i][s_col] = S::one();
                basis[i] = s_col;
                s_col += 1;
            }
            1 => {
                t[i][s_col] = -S::one();
                s_col += 1;
                t[i][a_col] = S::one();
                basis[i] = a_col;
                a_col += 1;
            }
            _ => {
                t[i][a_col] = S::one();
                basis[i] = a_col;
                a_col += 1;
            }
        }
    }
    let art_start = n + n_slack;

    // Phase 1: minimise the sum of artificials.
    let mut cost1 = vec![S::zero(); width];
    for c in cost1.iter_mut().skip(art_start) {
        *c = S::one();
    }
    run_simplex(&mut t, &mut basis, &cost1, width, width, tol);
    let infeas: S = basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= art_start)
        .map(|(i, _)| t[i][width])
        .sum();
    if infeas > S::tol(1e-8) {
        return LpOutcome::Infeasible;
    }
    // Drive remaining (zero-valued) artificials out of the basis.
    for i in 0..m {
        if basis[i] >= art_start {
            if let Some(j) = (0..art_start).find(|&j| t[i][j].abs() > tol) {
                pivot(&mut t, &mut basis, i, j, width);
            }
        }
    }

    // Phase 2 on the original objective; artificial columns are frozen.
    let mut cost2 = vec![S::zero(); width];
    cost2[..n].copy_from_slice(c);
    run_simplex(&mut t, &mut basis, &cost2, art_start, width, tol);
    let mut x = vec![S::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = t[i][width];
        }
    }
    let value = x.iter().zip(c).map(|(&xi, &ci)| xi * ci).sum();
    LpOutcome::Optimal { x, value }
}

fn run_simplex<S: Scalar>(t: &mut [Vec<S>], basis: &mut [usize], cost: &[S], enterable: usize, width: usize, tol: S) {
    let m = t.len();
    // Reduced costs r_j = c_j - c_B B^-1 A_j, kept up to date across pivots.
    let mut r: Vec<S> = (0..=width)
        .map(|j| if j < width { cost[j] } else { S::zero() })
        .collect();
    for i in 0..m {
        let cb = cost[basis[i]];
        if cb != S::zero() {
            for (rj, &tij) in r.iter_mut().zip(&t[i]) {
                *rj = *rj - cb * tij;
            }
        }
    }
    for _ in 0..200_000 {
        let Some(j) = (0..enterable).find(|&j| r[j] < -tol) else {
            return;
        };
        let mut leave: Option<(usize, S)> = None;
        for i in 0..m {
            if t[i][j] > tol {
                let ratio = t[i][width] / t[i][j];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - tol || (ratio <= lr + tol && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        match leave {
            // Unbounded never happens with finite variable bounds.
            None => return,
            Some((i, _)) => {
                pivot(t, basis, i, j, width);
                let f = r[j];
                for (rk, &tik) in r.iter_mut().zip(&t[i]) {
                    *rk = *rk - f * tik;
                }
            }
        }
    }
}

fn pivot<S: Scalar>(t: &mut [Vec<S>], basis: &mut [usize], r: usize, c: usize, width: usize) {
    let p = t[r][c];
    for v in t[r].iter_mut() {
        *v = *v / p;
    }
    let pivot_row = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == r {
            continue;
        }
        let f = row[c];
        if f != S::zero() {
            for j in 0..=width {
                row[j] = row[j] - f * pivot_row[j];
            }
        }
    }
    basis[r] = c;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_sqrt_two() {
        let r = bisect_increasing(0.0_f64, 2.0, 1e-14, |x| x * x - 2.0);
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn golden_section_peak() {
        let (x, v) = maximize_1d(0.0_f64, 1.0, 100, 1e-12, |t| t * (1.0 - t * t));
        assert!((x - 1.0 / 3f64.sqrt()).abs() < 1e-7);
        assert!((v - 2.0 / (3.0 * 3f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn simpson_polynomial_and_exponential() {
        let v = integrate(0.0_f64, 1.0, 1e-13, &|x| 3.0 * x * x);
        assert!((v - 1.0).abs() < 1e-12);
        let e = integrate(0.0_f64, 30.0, 1e-13, &|x| (-x).exp());
        assert!((e - (1.0 - (-30f64).exp())).abs() < 1e-10);
    }

    #[test]
    fn singular_system_reports_rank() {
        let a = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        match solve_square(a, vec![1.0, 2.0], 1e-12) {
            LinearSolve::Singular { rank } => assert_eq!(rank, 1),
            LinearSolve::Unique(_) => panic!("expected singular"),
        }
        assert_eq!(rank(&[vec![1.0, 0.0], vec![0.0, 3.0]], 1e-12), 2);
    }

    #[test]
    fn overdetermined_consistent_and_not() {
        let a: Vec<Vec<f64>> = vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![2.0, 0.0]];
        let x = solve_full_column_rank(a.clone(), vec![2.0, 0.0, 2.0], 2, 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
        assert!(solve_full_column_rank(a, vec![2.0, 0.0, 3.0], 2, 1e-12).is_none());
        assert!(solve_full_column_rank(vec![vec![1.0, 1.0], vec![2.0, 2.0]], vec![1.0, 2.0], 2, 1e-12).is_none());
    }

    #[test]
    fn simplex_small_programs() {
        // min x + y s.t. x + y >= 1, x + 2y = 1.5 -> x = 0.5, y = 0.5
        let rows = vec![(vec![1.0, 1.0], RowKind::Ge, 1.0), (vec![1.0, 2.0], RowKind::Eq, 1.5)];
        match simplex_min::<f64>(&[1.0, 1.0], &rows, &[1.0, 1.0]) {
            LpOutcome::Optimal { x, value } => {
                assert!((value - 1.0).abs() < 1e-12, "{x:?}");
            }
            LpOutcome::Infeasible => panic!(),
        }
        // x >= 2 with x <= 1 is infeasible.
        let rows = vec![(vec![1.0], RowKind::Ge, 2.0)];
        assert!(matches!(simplex_min(&[1.0], &rows, &[1.0]), LpOutcome::Infeasible));
        // Fractional domination of C5: optimum 5/3.
        let n = 5;
        let rows: Vec<_> = (0..n)
            .map(|i| {
                let mut a = vec![0.0; n];
                a[i] = 1.0;
                a[(i + 1) % n] = 1.0;
                a[(i + n - 1) % n] = 1.0;
                (a, RowKind::Ge, 1.0)
            })
            .collect();
        match simplex_min::<f64>(&[1.0; 5], &rows, &[1.0; 5]) {
            LpOutcome::Optimal { value, .. } => assert!((value - 5.0 / 3.0).abs() < 1e-10),
            LpOutcome::Infeasible => panic!(),
        }
    }
}
