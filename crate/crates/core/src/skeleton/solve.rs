//! Direct solver for the contraction systems: symmetric positive-definite
//! matrices with a fixed mesh-edge sparsity pattern, solved by profile
//! (skyline) Cholesky after a reverse Cuthill-McKee reordering.
//!
//! A direct factorization is used instead of an iterative method because the
//! late contraction steps are badly conditioned (the smoothing weight grows
//! geometrically) and because the skeleton contract requires bit-for-bit
//! deterministic output: a fixed elimination order has no tolerance knobs.

use crate::error::{Error, Result};

/// Profile Cholesky solver with a precomputed ordering. The sparsity
/// pattern is fixed at construction; values are supplied per factorization.
pub(super) struct SpdSolver {
    n: usize,
    /// `perm[new] = old` vertex index.
    perm: Vec<u32>,
    /// `inv[old] = new` vertex index.
    inv: Vec<u32>,
    /// First in-profile column of each row, in the new ordering.
    first: Vec<u32>,
    /// Skyline rows: row `i` stores columns `first[i]..=i`. Holds the matrix
    /// during scatter and is overwritten by the Cholesky factor in place.
    rows: Vec<Vec<f64>>,
    /// Scratch for permuted right-hand sides.
    work: Vec<f64>,
}

impl SpdSolver {
    /// Prepares the ordering and profile for an `n x n` matrix whose
    /// off-diagonal pattern is the given undirected edge list.
    pub fn new(n: usize, edges: &[(u32, u32)]) -> SpdSolver {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let perm = rcm_order(n, &adj);
        let mut inv = vec![0u32; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old as usize] = new as u32;
        }
        let mut first: Vec<u32> = (0..n as u32).collect();
        for &(a, b) in edges {
            let (na, nb) = (inv[a as usize], inv[b as usize]);
            let (lo, hi) = (na.min(nb), na.max(nb));
            first[hi as usize] = first[hi as usize].min(lo);
        }
        let rows = first
            .iter()
            .enumerate()
            .map(|(i, &f)| vec![0.0; i - f as usize + 1])
            .collect();
        SpdSolver {
            n,
            perm,
            inv,
            first,
            rows,
            work: vec![0.0; n],
        }
    }

    /// Total number of stored entries; exposed for ordering-quality tests.
    #[cfg(test)]
    pub fn profile_size(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Factors the matrix with diagonal `diag` and symmetric off-diagonal
    /// values `off[k]` on `edges[k]` (old indexing, same list as `new`).
    /// Fails only if the matrix is not numerically positive definite.
    pub fn factor(&mut self, diag: &[f64], edges: &[(u32, u32)], off: &[f64]) -> Result<()> {
        debug_assert_eq!(diag.len(), self.n);
        debug_assert_eq!(edges.len(), off.len());
        for (i, row) in self.rows.iter_mut().enumerate() {
            row.fill(0.0);
            *row.last_mut().expect("profile rows are never empty") =
                diag[self.perm[i] as usize];
        }
        for (&(a, b), &v) in edges.iter().zip(off) {
            let (na, nb) = (self.inv[a as usize], self.inv[b as usize]);
            let (lo, hi) = (na.min(nb) as usize, na.max(nb) as usize);
            self.rows[hi][lo - self.first[hi] as usize] = v;
        }
        // Row-wise skyline Cholesky: fill stays inside the profile.
        for i in 0..self.n {
            let fi = self.first[i] as usize;
            let (done, tail) = self.rows.split_at_mut(i);
            let row = &mut tail[0];
            for j in fi..i {
                let fj = self.first[j] as usize;
                let lo = fi.max(fj);
                let mut s = row[j - fi];
                for k in lo..j {
                    s -= row[k - fi] * done[j][k - fj];
                }
                row[j - fi] = s / done[j][j - fj];
            }
            let mut d = row[i - fi];
            for k in fi..i {
                d -= row[k - fi] * row[k - fi];
            }
            if !d.is_finite() || d <= 0.0 {
                return Err(Error::Internal(format!(
                    "contraction system lost positive definiteness at row {i} (pivot {d:.3e})"
                )));
            }
            row[i - fi] = d.sqrt();
        }
        Ok(())
    }

    /// Solves `A x = b` using the most recent factorization. `b` and `x` are
    /// in the caller's (old) indexing and may alias the same buffer.
    pub fn solve(&mut self, b: &[f64], x: &mut [f64]) {
        debug_assert_eq!(b.len(), self.n);
        debug_assert_eq!(x.len(), self.n);
        let y = &mut self.work;
        for (new, &old) in self.perm.iter().enumerate() {
            y[new] = b[old as usize];
        }
        // Forward substitution L y' = y.
        for i in 0..self.n {
            let fi = self.first[i] as usize;
            let row = &self.rows[i];
            let mut s = y[i];
            for k in fi..i {
                s -= row[k - fi] * y[k];
            }
            y[i] = s / row[i - fi];
        }
        // Back substitution L^T x = y', processed column by column.
        for i in (0..self.n).rev() {
            let fi = self.first[i] as usize;
            let row = &self.rows[i];
            let xi = y[i] / row[i - fi];
            y[i] = xi;
            for k in fi..i {
                y[k] -= row[k - fi] * xi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            x[old as usize] = y[new];
        }
    }
}

/// Reverse Cuthill-McKee ordering: per connected component, a breadth-first
/// sweep from a pseudo-peripheral start with degree-sorted neighbor visits,
/// reversed at the end. Returns `perm[new] = old`.
fn rcm_order(n: usize, adj: &[Vec<u32>]) -> Vec<u32> {
    let mut order: Vec<u32> = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let degree = |v: u32| adj[v as usize].len();
    loop {
        // Lowest-degree unseen vertex starts the component.
        let Some(seed) = (0..n as u32)
            .filter(|&v| !seen[v as usize])
            .min_by_key(|&v| (degree(v), v))
        else {
            break;
        };
        let start = pseudo_peripheral(seed, adj);
        let base = order.len();
        order.push(start);
        seen[start as usize] = true;
        let mut head = base;
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut next: Vec<u32> = adj[v as usize]
                .iter()
                .copied()
                .filter(|&u| !seen[u as usize])
                .collect();
            next.sort_unstable_by_key(|&u| (degree(u), u));
            for u in next {
                seen[u as usize] = true;
                order.push(u);
            }
        }
        order[base..].reverse();
    }
    order
}

/// Two BFS sweeps toward an eccentric vertex: from `seed`, take a
/// lowest-degree vertex in the farthest level, then repeat once.
fn pseudo_peripheral(seed: u32, adj: &[Vec<u32>]) -> u32 {
    let mut start = seed;
    for _ in 0..2 {
        let mut dist = vec![u32::MAX; adj.len()];
        dist[start as usize] = 0;
        let mut queue = std::collections::VecDeque::from([start]);
        let mut far = start;
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v as usize] {
                if dist[u as usize] == u32::MAX {
                    dist[u as usize] = dist[v as usize] + 1;
                    queue.push_back(u);
                    if dist[u as usize] > dist[far as usize]
                        || (dist[u as usize] == dist[far as usize]
                            && (adj[u as usize].len(), u) < (adj[far as usize].len(), far))
                    {
                        far = u;
                    }
                }
            }
        }
        if far == start {
            break;
        }
        start = far;
    }
    start
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};

    /// Dense reference solve on a random diagonally dominant SPD system.
    #[test]
    fn matches_dense_cholesky_on_random_spd_systems() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5071_d001);
        for case in 0..20 {
            let n = 3 + (case % 7) * 5;
            // Random sparse symmetric pattern.
            let mut edges = Vec::new();
            for a in 0..n as u32 {
                for b in a + 1..n as u32 {
                    if rng.gen_bool(0.3) {
                        edges.push((a, b));
                    }
                }
            }
            let off: Vec<f64> = edges.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut diag = vec![0.0; n];
            for (&(a, b), &v) in edges.iter().zip(&off) {
                diag[a as usize] += v.abs();
                diag[b as usize] += v.abs();
            }
            for d in &mut diag {
                *d += rng.gen_range(0.5..2.0);
            }
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();

            let mut solver = SpdSolver::new(n, &edges);
            solver.factor(&diag, &edges, &off).unwrap();
            let mut x = vec![0.0; n];
            solver.solve(&b, &mut x);

            let mut dense = DMatrix::zeros(n, n);
            for i in 0..n {
                dense[(i, i)] = diag[i];
            }
            for (&(a, b), &v) in edges.iter().zip(&off) {
                dense[(a as usize, b as usize)] = v;
                dense[(b as usize, a as usize)] = v;
            }
            let want = dense
                .cholesky()
                .expect("reference matrix is SPD")
                .solve(&DMatrix::from_column_slice(n, 1, &b));
            for i in 0..n {
                assert!(
                    (x[i] - want[(i, 0)]).abs() < 1e-9,
                    "case {case} row {i}: {} vs {}",
                    x[i],
                    want[(i, 0)]
                );
            }
        }
    }

    #[test]
    fn rcm_keeps_a_path_graph_tridiagonal() {
        let n = 50;
        let edges: Vec<(u32, u32)> = (0..n as u32 - 1).map(|i| (i, i + 1)).collect();
        let solver = SpdSolver::new(n, &edges);
        // A path reordered by RCM has profile rows of width at most 2.
        assert!(solver.profile_size() <= 2 * n);
    }

    #[test]
    fn singular_matrix_is_reported_not_panicked() {
        let edges = vec![(0u32, 1u32)];
        // [[1, 1], [1, 1]] is singular.
        let mut solver = SpdSolver::new(2, &edges);
        let err = solver.factor(&[1.0, 1.0], &edges, &[1.0]).unwrap_err();
        assert!(matches!(err, Error::Internal(_)));
    }
}
