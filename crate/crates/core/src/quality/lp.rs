//! Linear-programming route to origin containment, independent of the
//! convex hull: for each of the twelve signed coordinate directions `u`,
//! find the largest `delta` with `delta*u` expressible as a convex
//! combination of the wrenches. The origin is strictly interior iff every
//! direction admits `delta > 0`, because the twelve extremal points then
//! span a cross-polytope around the origin.
//!
//! The minimum over directions also brackets the inscribed-ball radius
//! `eps` of the hull route: `delta_min / sqrt(6) <= eps <= delta_min`.

use super::hull::Vec6;

const DIM: usize = 6;
const EPS_PIVOT: f64 = 1e-11;
const EPS_COST: f64 = 1e-9;
const MAX_ITERS: usize = 5000;

/// Largest `delta` such that `delta * dir` lies in the convex hull of
/// `points`; `None` when the ray through `dir` misses the hull entirely.
pub fn max_delta_along(points: &[Vec6], dir: &Vec6) -> Option<f64> {
    let n = points.len();
    // Variables: alpha_1..alpha_n, delta+ and delta- (free delta split).
    // Rows 0..6: sum_j alpha_j w_j - (delta+ - delta-) dir = 0.
    // Row 6: sum_j alpha_j = 1.
    let cols = n + 2;
    let mut a = vec![vec![0.0; cols]; DIM + 1];
    let mut b = vec![0.0; DIM + 1];
    for k in 0..DIM {
        for (j, w) in points.iter().enumerate() {
            a[k][j] = w[k];
        }
        a[k][n] = -dir[k];
        a[k][n + 1] = dir[k];
    }
    a[DIM][..n].fill(1.0);
    b[DIM] = 1.0;
    let mut c = vec![0.0; cols];
    c[n] = 1.0;
    c[n + 1] = -1.0;
    simplex_max(&a, &b, &c).map(|(obj, _)| obj)
}

/// Smallest `max_delta_along` over the twelve signed axes; `None` when any
/// axis ray misses the hull (origin certainly not interior).
pub fn min_axis_delta(points: &[Vec6]) -> Option<f64> {
    let mut worst = f64::INFINITY;
    for axis in 0..DIM {
        for sign in [1.0, -1.0] {
            let mut dir = Vec6::zeros();
            dir[axis] = sign;
            worst = worst.min(max_delta_along(points, &dir)?);
        }
    }
    Some(worst)
}

/// Maximises `c·x` subject to `A x = b`, `x >= 0` (all `b >= 0` required)
/// with a dense two-phase tableau simplex using Bland's rule.
/// Returns the optimum and the primal solution; `None` when infeasible.
fn simplex_max(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Option<(f64, Vec<f64>)> {
    let m = a.len();
    let n = c.len();
    debug_assert!(b.iter().all(|&x| x >= 0.0));
    // Tableau columns: n structural, m artificial, then the RHS.
    let mut t = vec![vec![0.0; n + m + 1]; m];
    for i in 0..m {
        t[i][..n].copy_from_slice(&a[i]);
        t[i][n + i] = 1.0;
        t[i][n + m] = b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase 1: maximise -(sum of artificials).
    let mut c1 = vec![0.0; n + m];
    c1[n..].fill(-1.0);
    run_simplex(&mut t, &mut basis, &c1, n + m)?;
    let phase1: f64 = basis
        .iter()
        .enumerate()
        .filter(|(_, &bv)| bv >= n)
        .map(|(i, _)| t[i][n + m])
        .sum();
    if phase1 > 1e-7 {
        return None;
    }
    // Drive leftover artificials (basic at zero) out of the basis where a
    // structural pivot exists; rows with none are redundant and inert.
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[i][j].abs() > EPS_PIVOT) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }

    // Phase 2 on the structural columns only; the cost vector is padded so
    // leftover artificial basis entries index zero cost.
    let mut c2 = c.to_vec();
    c2.resize(n + m, 0.0);
    run_simplex(&mut t, &mut basis, &c2, n)?;
    let mut x = vec![0.0; n];
    let mut obj = 0.0;
    for (i, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[i][n + m];
            obj += c[bv] * t[i][n + m];
        }
    }
    Some((obj, x))
}

/// Primal simplex over the first `active` columns; `None` on unbounded or
/// iteration overflow (neither arises for the bounded programs above, but
/// the caller treats them as "no certificate").
fn run_simplex(
    t: &mut [Vec<f64>],
    basis: &mut [usize],
    c: &[f64],
    active: usize,
) -> Option<()> {
    let m = t.len();
    let rhs = t[0].len() - 1;
    for _ in 0..MAX_ITERS {
        // Reduced costs r_j = c_j - c_B . column_j; Bland: first positive.
        let mut entering = None;
        for j in 0..active {
            if basis.contains(&j) {
                continue;
            }
            let z: f64 = (0..m).map(|i| c[basis[i]] * t[i][j]).sum();
            if c[j] - z > EPS_COST {
                entering = Some(j);
                break;
            }
        }
        let Some(j) = entering else {
            return Some(());
        };
        let mut leaving: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][j] > EPS_PIVOT {
                let ratio = t[i][rhs] / t[i][j];
                let better = match leaving {
                    None => true,
                    // Bland on ties: smallest basis variable leaves.
                    Some((li, lr)) => {
                        ratio < lr - 1e-12 || (ratio < lr + 1e-12 && basis[i] < basis[li])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
        }
        let (i, _) = leaving?;
        pivot(t, basis, i, j);
    }
    None
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let m = t.len();
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    for i in 0..m {
        if i == row {
            continue;
        }
        let f = t[i][col];
        if f == 0.0 {
            continue;
        }
        let (pivot_row, target) = if i < row {
            let (head, tail) = t.split_at_mut(row);
            (&tail[0], &mut head[i])
        } else {
            let (head, tail) = t.split_at_mut(i);
            (&head[row], &mut tail[0])
        };
        for (v, &pv) in target.iter_mut().zip(pivot_row.iter()) {
            *v -= f * pv;
        }
    }
    basis[row] = col;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(axis: usize, sign: f64) -> Vec6 {
        let mut v = Vec6::zeros();
        v[axis] = sign;
        v
    }

    #[test]
    fn cross_polytope_delta_is_one_on_every_axis() {
        let pts: Vec<Vec6> = (0..6).flat_map(|a| [unit(a, 1.0), unit(a, -1.0)]).collect();
        let d = min_axis_delta(&pts).unwrap();
        assert!((d - 1.0).abs() < 1e-9, "delta = {d}");
    }

    #[test]
    fn simplex_delta_matches_hand_computation() {
        // conv{e_1..e_6, -(1,..,1)}: along -e_1 the convex combination
        // (1-6d)/7 e_1 + ... caps d at 1/6.
        let mut pts: Vec<Vec6> = (0..6).map(|a| unit(a, 1.0)).collect();
        pts.push(Vec6::from_element(-1.0));
        let d = min_axis_delta(&pts).unwrap();
        assert!((d - 1.0 / 6.0).abs() < 1e-9, "delta = {d}");
    }

    #[test]
    fn shifted_set_is_not_interior() {
        let shift = unit(0, 2.0);
        let pts: Vec<Vec6> = (0..6)
            .flat_map(|a| [unit(a, 1.0) + shift, unit(a, -1.0) + shift])
            .collect();
        // Along -e_0 the ray leaves the hull immediately: delta <= 0 or the
        // ray misses entirely.
        let d = min_axis_delta(&pts);
        assert!(d.is_none() || d.unwrap() <= 0.0, "delta = {d:?}");
    }

    #[test]
    fn flat_set_caps_delta_at_zero() {
        // All points have x0 = 0, so along +/-e_0 only delta = 0 is
        // expressible: feasible but not strictly interior.
        let pts: Vec<Vec6> = (1..6).flat_map(|a| [unit(a, 1.0), unit(a, -1.0)]).collect();
        let d = min_axis_delta(&pts).unwrap();
        assert!(d.abs() < 1e-9, "delta = {d}");
    }

    #[test]
    fn single_point_at_origin_degenerates() {
        // {0} admits delta = 0 along every axis: not strictly interior.
        let pts = vec![Vec6::zeros()];
        let d = min_axis_delta(&pts).unwrap();
        assert!(d.abs() < 1e-12);
    }
}
