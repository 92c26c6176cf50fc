//! Incremental convex hull in 6-D, specialised to one query: the signed
//! radius of the largest origin-centred ball inscribed in the hull.
//!
//! Beneath-beyond construction over simplicial facets. Point-facet
//! visibility is decided in f64 against a per-facet error bound; verdicts
//! inside the band fall back to exact integer arithmetic (the f64
//! coordinates are scaled to a common binary exponent, making every
//! orientation determinant an exact `BigInt` Bareiss elimination), so the
//! facet complex stays globally consistent. Input points receive a
//! deterministic jitter first, which breaks the exact coincidences
//! (coplanar point groups, duplicate wrenches) that a simplicial complex
//! cannot represent; the perturbation is 1e-11 of the data scale, so the
//! returned radius is within ~1e-10 of the unjittered value, far below
//! every tolerance built on top of this module.

use std::collections::BTreeMap;

use nalgebra::SVector;
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Vec6 = SVector<f64, 6>;


const DIM: usize = 6;
const JITTER_REL: f64 = 1e-11;
const JITTER_KEY: u64 = 0x6875_6c6c_3664;
const MAX_ATTEMPTS: u64 = 4;
/// Multiplier on the facet's Hadamard roundoff bound below which a
/// visibility verdict is re-derived exactly. Generous (the worst-case LU
/// error constant for the 5x5 cofactors is a few hundred epsilon); ties
/// are cheap to resolve exactly.
const TIE_BAND: f64 = 1024.0 * f64::EPSILON;

/// Signed distance from the origin to the nearest facet hyperplane of the
/// convex hull of `points` (positive iff the origin is strictly inside).
/// `None` when the points do not affinely span 6-D.
pub fn inscribed_radius(points: &[Vec6]) -> Option<f64> {
    if points.len() < DIM + 1 {
        return None;
    }
    let scale = points
        .iter()
        .map(|p| p.amax())
        .fold(0.0_f64, f64::max)
        .max(1e-6);
    for attempt in 0..MAX_ATTEMPTS {
        let jittered = jitter(points, scale, attempt);
        match Hull::build(&jittered, scale) {
            Ok(Some(hull)) => return Some(hull.min_origin_offset()),
            Ok(None) => return None,
            Err(Degenerate) => {}
        }
    }
    // Coincidences survived every jitter key; the input is pathologically
    // structured. Report "not spanning", the conservative verdict.
    None
}

fn jitter(points: &[Vec6], scale: f64, attempt: u64) -> Vec<Vec6> {
    let mut rng = ChaCha8Rng::seed_from_u64(JITTER_KEY.wrapping_add(attempt));
    let eta = JITTER_REL * scale;
    points
        .iter()
        .map(|p| {
            let mut q = *p;
            for k in 0..DIM {
                q[k] += eta * rng.gen_range(-1.0..1.0);
            }
            q
        })
        .collect()
}

/// Construction failed on this jitter key (a degenerate facet appeared).
struct Degenerate;

struct Facet {
    verts: [u32; 6],
    /// Outward (away from the hull interior), unnormalised.
    normal: Vec6,
    /// `normal · v0`; the hyperplane is `normal · x = offset`.
    offset: f64,
    /// Sign of `n·(x - v0)` (with `n` the [`cross5`] normal in vertex
    /// order) for points strictly outside.
    outside_sign: i8,
    /// Hadamard bound on the facet's edge rows: `prod ||v_i - v_0||`.
    hadamard: f64,
    /// Absolute f64 error band for `normal·x - offset` values.
    tol: f64,
    alive: bool,
}

struct Hull<'a> {
    points: &'a [Vec6],
    /// Vertices of the seed simplex; the exact interior reference is the
    /// (rational) centroid of these, handled scale-free in integer space.
    simplex: [u32; 7],
    interior: Vec6,
    facets: Vec<Facet>,
    /// Max point norm, part of every facet's error band.
    reach: f64,
}

impl<'a> Hull<'a> {
    fn build(points: &'a [Vec6], scale: f64) -> Result<Option<Self>, Degenerate> {
        let Some(simplex) = initial_simplex(points, scale) else {
            return Ok(None);
        };
        let mut interior = Vec6::zeros();
        for &i in &simplex {
            interior += points[i as usize];
        }
        interior /= (DIM + 1) as f64;
        let reach = points.iter().map(|p| p.norm()).fold(1e-12, f64::max);
        let mut hull = Hull {
            points,
            simplex,
            interior,
            facets: Vec::new(),
            reach,
        };
        for drop in 0..=DIM {
            let mut verts = [0u32; 6];
            let mut w = 0;
            for (pos, &v) in simplex.iter().enumerate() {
                if pos != drop {
                    verts[w] = v;
                    w += 1;
                }
            }
            let facet = hull.make_facet(verts)?;
            hull.facets.push(facet);
        }
        // Far points first: extreme points stand a chance of absorbing
        // later ones without facet churn. Ties break by index to keep the
        // construction deterministic.
        let mut order: Vec<u32> = (0..points.len() as u32)
            .filter(|idx| !simplex.contains(idx))
            .collect();
        order.sort_by(|&a, &b| {
            let da = (points[a as usize] - interior).norm_squared();
            let db = (points[b as usize] - interior).norm_squared();
            db.partial_cmp(&da).unwrap().then(a.cmp(&b))
        });
        for idx in order {
            hull.insert(idx)?;
        }
        Ok(Some(hull))
    }

    fn make_facet(&self, verts: [u32; 6]) -> Result<Facet, Degenerate> {
        #[cfg(test)]
        let t0 = std::time::Instant::now();
        #[cfg(test)]
        probe_counters::FACETS.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        #[cfg(test)]
        let _guard = scopeguard(move || {
            probe_counters::FACET_NS.fetch_add(
                t0.elapsed().as_nanos() as u64,
                std::sync::atomic::Ordering::Relaxed,
            );
        });
        let v0 = self.points[verts[0] as usize];
        let mut rows = [Vec6::zeros(); 5];
        let mut hadamard = 1.0;
        for i in 0..5 {
            rows[i] = self.points[verts[i + 1] as usize] - v0;
            hadamard *= rows[i].norm();
        }
        let normal = cross5(&rows);
        let tol = TIE_BAND * hadamard * 2.0 * self.reach;
        let s_int = normal.dot(&(self.interior - v0));
        let interior_sign = if s_int.abs() > tol {
            sign_of(s_int)
        } else {
            self.exact_orientation(&verts, Exact::Interior)
        };
        if interior_sign == 0 {
            return Err(Degenerate);
        }
        let outward = if interior_sign < 0 { normal } else { -normal };
        Ok(Facet {
            verts,
            offset: outward.dot(&v0),
            normal: outward,
            outside_sign: -interior_sign,
            hadamard,
            tol,
            alive: true,
        })
    }

    fn is_visible(&self, facet: &Facet, idx: u32) -> bool {
        let p = self.points[idx as usize];
        let d = facet.normal.dot(&p) - facet.offset;
        if d.abs() > facet.tol {
            return d > 0.0;
        }
        self.exact_orientation(&facet.verts, Exact::Point(idx)) == facet.outside_sign
    }

    /// Exact sign of `n·(x-v0)` where `n` is the [`cross5`] normal of the
    /// facet, evaluated as an orientation determinant: first in
    /// double-double precision against a rigorous magnitude band, then (for
    /// the rare coincidences double-double cannot separate from zero) as an
    /// exact integer determinant. Laplace expansion of that determinant
    /// along its last row equals `-n·(x-v0)`, hence the final negations.
    ///
    /// The interior query point is the centroid of the seed simplex; its
    /// determinant row is used in the form `sum(simplex) - 7*v0`, which
    /// scales the determinant by the positive constant 7 and keeps every
    /// entry an exact dyadic value.
    fn exact_orientation(&self, verts: &[u32; 6], query: Exact) -> i8 {
        #[cfg(test)]
        let t0 = std::time::Instant::now();
        #[cfg(test)]
        probe_counters::EXACT_ORIENT.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        #[cfg(test)]
        let _guard = scopeguard(move || {
            probe_counters::EXACT_NS.fetch_add(
                t0.elapsed().as_nanos() as u64,
                std::sync::atomic::Ordering::Relaxed,
            );
        });
        let v0 = &self.points[verts[0] as usize];
        let mut dd = [[Dd::ZERO; DIM]; DIM];
        for i in 1..DIM {
            let vi = &self.points[verts[i] as usize];
            for k in 0..DIM {
                dd[i - 1][k] = Dd::from_diff(vi[k], v0[k]);
            }
        }
        match query {
            Exact::Interior => {
                for k in 0..DIM {
                    let mut acc = Dd::from_prod(-(DIM as f64 + 1.0), v0[k]);
                    for &s in &self.simplex {
                        acc = acc.add_f64(self.points[s as usize][k]);
                    }
                    dd[DIM - 1][k] = acc;
                }
            }
            Exact::Point(idx) => {
                let p = &self.points[idx as usize];
                for k in 0..DIM {
                    dd[DIM - 1][k] = Dd::from_diff(p[k], v0[k]);
                }
            }
        }
        // Band: double-double LU keeps ~1e-28 relative accuracy against
        // the row-product scale; anything larger in magnitude has a
        // trustworthy sign.
        let mut had = 1.0;
        for row in &dd {
            let mut s = 0.0;
            for e in row {
                s += e.hi * e.hi;
            }
            had *= s.sqrt();
        }
        let det = dd_det(dd);
        if det.abs() > 1e-24 * had {
            return -sign_of(det);
        }
        #[cfg(test)]
        probe_counters::BIGINT.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        // Every matrix entry is an integer combination of input
        // coordinates; `ExactMat` rescales them to a common exponent.
        let mut m = ExactMat::default();
        for (i, &vert) in verts.iter().enumerate().skip(1) {
            let vi = &self.points[vert as usize];
            for k in 0..DIM {
                m.push_term(i - 1, k, 1, vi[k]);
                m.push_term(i - 1, k, -1, v0[k]);
            }
        }
        match query {
            Exact::Interior => {
                for k in 0..DIM {
                    for &s in &self.simplex {
                        m.push_term(DIM - 1, k, 1, self.points[s as usize][k]);
                    }
                    m.push_term(DIM - 1, k, -(DIM as i64 + 1), v0[k]);
                }
            }
            Exact::Point(idx) => {
                let p = &self.points[idx as usize];
                for k in 0..DIM {
                    m.push_term(DIM - 1, k, 1, p[k]);
                    m.push_term(DIM - 1, k, -1, v0[k]);
                }
            }
        }
        -m.det_sign()
    }

    fn insert(&mut self, idx: u32) -> Result<(), Degenerate> {
        let visible: Vec<usize> = (0..self.facets.len())
            .filter(|&f| self.facets[f].alive && self.is_visible(&self.facets[f], idx))
            .collect();
        if visible.is_empty() {
            return Ok(());
        }
        // A ridge of the visible region's boundary belongs to exactly one
        // visible facet; shared ridges are interior to the region.
        let mut ridges: BTreeMap<[u32; 5], u32> = BTreeMap::new();
        for &f in &visible {
            let verts = self.facets[f].verts;
            for drop in 0..DIM {
                let mut r = [0u32; 5];
                let mut w = 0;
                for (pos, &v) in verts.iter().enumerate() {
                    if pos != drop {
                        r[w] = v;
                        w += 1;
                    }
                }
                r.sort_unstable();
                *ridges.entry(r).or_insert(0) += 1;
            }
        }
        let mut new_facets = Vec::new();
        for (ridge, count) in &ridges {
            match count {
                1 => {
                    let mut verts = [0u32; 6];
                    verts[..5].copy_from_slice(ridge);
                    verts[5] = idx;
                    new_facets.push(self.make_facet(verts)?);
                }
                2 => {}
                _ => return Err(Degenerate),
            }
        }
        for f in visible {
            self.facets[f].alive = false;
        }
        self.facets.extend(new_facets);
        Ok(())
    }

    fn min_origin_offset(&self) -> f64 {
        #[cfg(test)]
        let t0 = std::time::Instant::now();
        #[cfg(test)]
        let _guard = scopeguard(move || {
            probe_counters::OFFSET_NS.fetch_add(
                t0.elapsed().as_nanos() as u64,
                std::sync::atomic::Ordering::Relaxed,
            );
        });
        // Well-conditioned facets first: their f64 plane distances carry
        // ~1e-13 relative error and usually pin the minimum.
        let mut best = f64::INFINITY;
        let mut slivers = Vec::new();
        for facet in self.facets.iter().filter(|f| f.alive) {
            let norm = facet.normal.norm();
            if norm < 1e-7 * facet.hadamard.max(1e-300) {
                slivers.push(facet);
            } else {
                best = best.min(facet.offset / norm);
            }
        }
        // A near-degenerate facet's f64 normal is pure noise, but its
        // `outside_sign` was fixed exactly at construction: the outward
        // normal is `outside_sign` times the vertex-order cofactor normal.
        // Re-derive that normal in double-double, whose error interval is
        // tight enough to discard facets that cannot beat `best`; only
        // genuine contenders pay for the exact integer normal.
        for facet in slivers {
            let v0 = self.points[facet.verts[0] as usize];
            let s = facet.outside_sign as f64;
            let (n_dd, err_comp) = self.dd_normal(&facet.verts);
            let nn = n_dd.norm();
            if nn > 0.0 {
                let d_dd = s * n_dd.dot(&v0) / nn;
                // Componentwise normal error err_comp propagates to the
                // plane distance with lever reach + |d|.
                let err = 3.0 * err_comp * (self.reach + d_dd.abs()) / nn;
                if err.is_finite() && d_dd - err > best {
                    continue;
                }
            }
            #[cfg(test)]
            probe_counters::EXNORM.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            let n = self.exact_normal(&facet.verts) * s;
            let nn = n.norm();
            if nn == 0.0 {
                continue;
            }
            best = best.min(n.dot(&v0) / nn);
        }
        best
    }

    /// Facet normal via double-double cofactors, mirroring [`cross5`]'s
    /// vertex-order convention. Returns the normal and a bound on the
    /// absolute error of each component.
    fn dd_normal(&self, verts: &[u32; 6]) -> (Vec6, f64) {
        let v0 = &self.points[verts[0] as usize];
        let mut rows = [[Dd::ZERO; DIM]; 5];
        let mut had = 1.0;
        for i in 0..5 {
            let vi = &self.points[verts[i + 1] as usize];
            let mut sq = 0.0;
            for k in 0..DIM {
                rows[i][k] = Dd::from_diff(vi[k], v0[k]);
                sq += rows[i][k].hi * rows[i][k].hi;
            }
            had *= sq.sqrt();
        }
        let mut n = Vec6::zeros();
        for j in 0..DIM {
            let mut m = [[Dd::ZERO; 5]; 5];
            for (r, row) in rows.iter().enumerate() {
                let mut w = 0;
                for (c, &e) in row.iter().enumerate() {
                    if c != j {
                        m[r][w] = e;
                        w += 1;
                    }
                }
            }
            let d = dd_det(m);
            n[j] = if j % 2 == 0 { d } else { -d };
        }
        (n, 1e-27 * had)
    }

    /// Facet normal from exact integer cofactors, rounded to f64. All six
    /// cofactor determinants share one power-of-two scale (the common
    /// exponent is fixed up front), so the direction is exact up to the
    /// final rounding.
    fn exact_normal(&self, verts: &[u32; 6]) -> Vec6 {
        let v0 = &self.points[verts[0] as usize];
        let mut shared_exp = i64::MAX;
        for &vert in &verts[1..] {
            let vi = &self.points[vert as usize];
            for k in 0..DIM {
                for v in [vi[k], v0[k]] {
                    let (mant, exp) = decompose(v);
                    if mant != 0 {
                        shared_exp = shared_exp.min(exp);
                    }
                }
            }
        }
        let mut cof: Vec<BigInt> = Vec::with_capacity(DIM);
        for j in 0..DIM {
            let mut m = ExactMat {
                forced_min_exp: Some(shared_exp),
                ..ExactMat::default()
            };
            for (i, &vert) in verts.iter().enumerate().skip(1) {
                let vi = &self.points[vert as usize];
                let mut col = 0;
                for k in 0..DIM {
                    if k == j {
                        continue;
                    }
                    m.push_term(i - 1, col, 1, vi[k]);
                    m.push_term(i - 1, col, -1, v0[k]);
                    col += 1;
                }
            }
            let d = m.det_bigint(DIM - 1);
            cof.push(if j % 2 == 0 { d } else { -d });
        }
        // Bring the common magnitude into f64 range before rounding.
        let max_bits = cof.iter().map(|d| d.bits()).max().unwrap_or(0);
        let shift = max_bits.saturating_sub(63);
        let mut n = Vec6::zeros();
        for (j, d) in cof.into_iter().enumerate() {
            n[j] = (d >> shift).to_f64().unwrap_or(0.0);
        }
        n
    }
}

enum Exact {
    Interior,
    Point(u32),
}

/// A square matrix of exact integer entries assembled from f64 terms
/// scaled to a common binary exponent: with `e` the smallest exponent over
/// all terms, entry `(r,c)` holds `2^-e * sum(coeff * value)` exactly, so
/// [`ExactMat::det_bigint`] is the true determinant times the positive
/// constant `2^(-e*n)`. Sign and ratios are therefore exact.
struct ExactMat {
    terms: Vec<(usize, usize, i64, f64)>,
    /// Overrides the automatic common exponent (must not exceed any term's
    /// own exponent); lets several matrices share one scale.
    forced_min_exp: Option<i64>,
}

impl Default for ExactMat {
    fn default() -> Self {
        ExactMat {
            terms: Vec::with_capacity(80),
            forced_min_exp: None,
        }
    }
}

impl ExactMat {
    fn push_term(&mut self, row: usize, col: usize, coeff: i64, value: f64) {
        self.terms.push((row, col, coeff, value));
    }

    fn materialise(&self, n: usize) -> Vec<Vec<BigInt>> {
        // Common exponent: every f64 is mantissa * 2^exp; shifting all
        // mantissas to the smallest exponent keeps integers exact.
        let mut min_exp = i64::MAX;
        let mut decomposed: Vec<(usize, usize, i64, i64, i64)> = Vec::with_capacity(self.terms.len());
        for &(r, c, k, v) in &self.terms {
            let (mant, exp) = decompose(v);
            if mant != 0 {
                min_exp = min_exp.min(exp);
            }
            decomposed.push((r, c, k, mant, exp));
        }
        if let Some(forced) = self.forced_min_exp {
            debug_assert!(forced <= min_exp || min_exp == i64::MAX);
            min_exp = forced;
        } else if min_exp == i64::MAX {
            min_exp = 0;
        }
        let mut m = vec![vec![BigInt::zero(); n]; n];
        for (r, c, k, mant, exp) in decomposed {
            if mant == 0 {
                continue;
            }
            let shifted = BigInt::from(mant) << u64::try_from(exp - min_exp).expect("exp >= min");
            m[r][c] += shifted * BigInt::from(k);
        }
        m
    }

    fn det_sign(&self) -> i8 {
        let d = self.det_bigint(DIM);
        match d.sign() {
            num_bigint::Sign::Plus => 1,
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
        }
    }

    /// Determinant of the materialised integer matrix (the true f64-matrix
    /// determinant times `2^(-min_exp*n)`) by fraction-free Bareiss
    /// elimination.
    fn det_bigint(&self, n: usize) -> BigInt {
        let mut m = self.materialise(n);
        let mut sign = 1i8;
        let mut prev = BigInt::from(1);
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                let Some(p) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                    return BigInt::zero();
                };
                m.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                    m[i][j] = num / &prev;
                }
            }
            prev = m[k][k].clone();
        }
        let d = std::mem::take(&mut m[n - 1][n - 1]);
        if sign < 0 {
            -d
        } else {
            d
        }
    }
}

/// Double-double value: `hi + lo` with `|lo| <= ulp(hi)/2`, carrying about
/// 106 significant bits. Used as a fast filter in front of the exact
/// integer path; only arithmetic needed by the LU determinant is provided.
#[derive(Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    /// Exact difference of two f64 values (Knuth two-sum).
    fn from_diff(a: f64, b: f64) -> Dd {
        let s = a - b;
        let bb = s - a;
        let err = (a - (s - bb)) - (b + bb);
        Dd { hi: s, lo: err }
    }

    /// Exact product of two f64 values (Dekker split).
    fn from_prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        let (ah, al) = dekker_split(a);
        let (bh, bl) = dekker_split(b);
        let err = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
        Dd { hi: p, lo: err }
    }

    fn add(self, o: Dd) -> Dd {
        let s = self.hi + o.hi;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (o.hi - bb);
        renorm(s, err + self.lo + o.lo)
    }

    fn add_f64(self, x: f64) -> Dd {
        let s = self.hi + x;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (x - bb);
        renorm(s, err + self.lo)
    }

    fn sub(self, o: Dd) -> Dd {
        self.add(Dd {
            hi: -o.hi,
            lo: -o.lo,
        })
    }

    fn mul(self, o: Dd) -> Dd {
        let p = Dd::from_prod(self.hi, o.hi);
        renorm(p.hi, p.lo + self.hi * o.lo + self.lo * o.hi)
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd { hi: q1, lo: 0.0 }));
        let q2 = r.hi / o.hi;
        renorm(q1, q2)
    }
}

fn renorm(hi: f64, lo: f64) -> Dd {
    let s = hi + lo;
    Dd {
        hi: s,
        lo: lo - (s - hi),
    }
}

fn dekker_split(a: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134_217_729.0;
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

/// Determinant of an NxN double-double matrix by LU with partial pivoting
/// (pivot chosen on `hi`). Returns the `hi` word; NaN or zero simply fails
/// the caller's magnitude band and escalates to exact arithmetic.
fn dd_det<const N: usize>(mut m: [[Dd; N]; N]) -> f64 {
    let mut sign = 1.0;
    let mut det = Dd { hi: 1.0, lo: 0.0 };
    for k in 0..N {
        let mut p = k;
        for r in k + 1..N {
            if m[r][k].hi.abs() > m[p][k].hi.abs() {
                p = r;
            }
        }
        if m[p][k].hi == 0.0 {
            return 0.0;
        }
        if p != k {
            m.swap(p, k);
            sign = -sign;
        }
        let pivot_row = m[k];
        for row in m.iter_mut().skip(k + 1) {
            let f = row[k].div(pivot_row[k]);
            for (j, &pkj) in pivot_row.iter().enumerate().skip(k + 1) {
                row[j] = row[j].sub(f.mul(pkj));
            }
        }
        det = det.mul(pivot_row[k]);
    }
    sign * det.hi
}

/// Exact mantissa/exponent decomposition of a finite f64:
/// `value = mant * 2^exp`.
fn decompose(value: f64) -> (i64, i64) {
    debug_assert!(value.is_finite());
    if value == 0.0 {
        return (0, 0);
    }
    let bits = value.to_bits();
    let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = (bits & 0x000f_ffff_ffff_ffff) as i64;
    if exp_bits == 0 {
        (sign * frac, -1074)
    } else {
        (sign * (frac | (1 << 52)), exp_bits - 1075)
    }
}

/// Greedy affinely-independent seed: start from point 0, repeatedly take the
/// point with the largest residual after projecting onto the current span.
fn initial_simplex(points: &[Vec6], scale: f64) -> Option<[u32; 7]> {
    let mut chosen = [0u32; 7];
    let mut basis: Vec<Vec6> = Vec::new();
    let origin = points[0];
    let tol = 1e-10 * scale;
    for slot in chosen.iter_mut().skip(1) {
        let mut best: Option<(f64, u32)> = None;
        for (i, p) in points.iter().enumerate() {
            let mut r = p - origin;
            for b in &basis {
                r -= b * r.dot(b);
            }
            let n = r.norm();
            if n > best.map_or(tol, |(bn, _)| bn) {
                best = Some((n, i as u32));
            }
        }
        let (n, i) = best?;
        *slot = i;
        let mut r = points[i as usize] - origin;
        for b in &basis {
            r -= b * r.dot(b);
        }
        basis.push(r / n);
    }
    Some(chosen)
}

/// Generalised cross product: the vector orthogonal to five 6-D rows,
/// via signed 5x5 cofactor determinants.
fn cross5(rows: &[Vec6; 5]) -> Vec6 {
    let mut n = Vec6::zeros();
    for j in 0..DIM {
        let mut m = [[0.0; 5]; 5];
        for (out, row) in m.iter_mut().zip(rows.iter()) {
            let mut w = 0;
            for (c, &v) in row.iter().enumerate() {
                if c != j {
                    out[w] = v;
                    w += 1;
                }
            }
        }
        let d = det5(&m);
        n[j] = if j % 2 == 0 { d } else { -d };
    }
    n
}

fn det5(m: &[[f64; 5]; 5]) -> f64 {
    let mut det = 0.0;
    for j in 0..5 {
        let mut sub = [[0.0; 4]; 4];
        for (out, row) in sub.iter_mut().zip(m[1..].iter()) {
            let mut w = 0;
            for (c, &v) in row.iter().enumerate() {
                if c != j {
                    out[w] = v;
                    w += 1;
                }
            }
        }
        let term = m[0][j] * det4(&sub);
        det += if j % 2 == 0 { term } else { -term };
    }
    det
}

/// 4x4 determinant from the 2x2 minors of the top and bottom row pairs.
fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let s0 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let s1 = m[0][0] * m[1][2] - m[0][2] * m[1][0];
    let s2 = m[0][0] * m[1][3] - m[0][3] * m[1][0];
    let s3 = m[0][1] * m[1][2] - m[0][2] * m[1][1];
    let s4 = m[0][1] * m[1][3] - m[0][3] * m[1][1];
    let s5 = m[0][2] * m[1][3] - m[0][3] * m[1][2];
    let c5 = m[2][2] * m[3][3] - m[2][3] * m[3][2];
    let c4 = m[2][1] * m[3][3] - m[2][3] * m[3][1];
    let c3 = m[2][1] * m[3][2] - m[2][2] * m[3][1];
    let c2 = m[2][0] * m[3][3] - m[2][3] * m[3][0];
    let c1 = m[2][0] * m[3][2] - m[2][2] * m[3][0];
    let c0 = m[2][0] * m[3][1] - m[2][1] * m[3][0];
    s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
}

#[cfg(test)]
fn scopeguard<F: FnMut()>(f: F) -> impl Drop {
    struct G<F: FnMut()>(F);
    impl<F: FnMut()> Drop for G<F> {
        fn drop(&mut self) {
            (self.0)();
        }
    }
    G(f)
}

fn sign_of(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
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
    fn decompose_reconstructs_f64() {
        for v in [1.0, -3.5, 0.1, 1e-300, -4.9e-324, 12345.6789e230, 0.0] {
            let (m, e) = decompose(v);
            assert_eq!(m as f64 * 2f64.powi(e as i32), v, "value {v}");
        }
    }

    #[test]
    fn exact_det_matches_integer_oracle() {
        // Integer entries, one forced to 1.0 so the common exponent is
        // exactly -52 and det_bigint equals the true determinant << 312.
        // The f64 determinant of a small integer matrix is itself exact.
        let mut m = ExactMat::default();
        let mut f = nalgebra::Matrix6::<f64>::zeros();
        let mut seed = 3u64;
        for r in 0..6 {
            for c in 0..6 {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let v = if (r, c) == (0, 0) {
                    1.0
                } else {
                    ((seed >> 33) % 17) as f64 - 8.0
                };
                m.push_term(r, c, 1, v);
                f[(r, c)] = v;
            }
        }
        let expected = BigInt::from(f.determinant() as i64) << 312;
        assert_eq!(m.det_bigint(6), expected, "f64 det {}", f.determinant());
    }

    #[test]
    fn exact_det_sign_agrees_with_f64_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let mut m = ExactMat::default();
            let mut f = nalgebra::Matrix6::<f64>::zeros();
            for r in 0..6 {
                for c in 0..6 {
                    let v: f64 = rng.gen_range(-5.0..5.0);
                    m.push_term(r, c, 1, v);
                    f[(r, c)] = v;
                }
            }
            let d = f.determinant();
            // Random matrices are far from singular in practice; skip any
            // that are not, where the f64 sign itself is untrustworthy.
            if d.abs() < 1e-6 {
                continue;
            }
            assert_eq!(m.det_sign() as f64, d.signum(), "f64 det {d}");
        }
    }

    #[test]
    fn cross_polytope_radius_is_inv_sqrt6() {
        // Facets of conv{±e_i} have hyperplane sum(±x_i) = 1, at distance
        // 1/sqrt(6) from the origin.
        let pts: Vec<Vec6> = (0..6).flat_map(|a| [unit(a, 1.0), unit(a, -1.0)]).collect();
        let r = inscribed_radius(&pts).unwrap();
        assert!((r - 1.0 / 6.0_f64.sqrt()).abs() < 1e-6, "r = {r}");
    }

    #[test]
    fn hypercube_radius_is_one() {
        // 64 vertices with massive coplanarity; exercises the jitter path.
        let mut pts = Vec::new();
        for mask in 0..64u32 {
            let mut v = Vec6::zeros();
            for k in 0..6 {
                v[k] = if mask & (1 << k) != 0 { 1.0 } else { -1.0 };
            }
            pts.push(v);
        }
        let r = inscribed_radius(&pts).unwrap();
        assert!((r - 1.0).abs() < 1e-6, "r = {r}");
    }

    #[test]
    fn simplex_with_origin_inside_is_positive() {
        let mut pts: Vec<Vec6> = (0..6).map(|a| unit(a, 1.0)).collect();
        pts.push(Vec6::from_element(-1.0));
        let r = inscribed_radius(&pts).unwrap();
        assert!(r > 0.0, "r = {r}");
    }

    #[test]
    fn origin_outside_gives_negative_radius() {
        let shift = unit(0, 2.0);
        let pts: Vec<Vec6> = (0..6)
            .flat_map(|a| [unit(a, 1.0) + shift, unit(a, -1.0) + shift])
            .collect();
        let r = inscribed_radius(&pts).unwrap();
        assert!(r < 0.0, "r = {r}");
    }

    #[test]
    fn flat_set_never_reports_a_real_ball() {
        // All points share x0 = 0: rank 5. The jitter thickness (1e-11)
        // sits below the spanning gate (1e-10), so this reads as "does not
        // span"; a slab radius below 1e-7 would be equally acceptable.
        let pts: Vec<Vec6> = (1..6).flat_map(|a| [unit(a, 1.0), unit(a, -1.0)]).collect();
        let r = inscribed_radius(&pts);
        assert!(r.is_none_or(|r| r.abs() < 1e-7), "r = {r:?}");
        assert!(inscribed_radius(&pts[..4]).is_none(), "fewer than 7 points");
    }

    #[test]
    #[ignore = "timing probe, run with --ignored --nocapture"]
    fn timing_probe() {
        // Friction-cone wrench sets carry the worst-case structure: each
        // contact's m edges share a 2-flat, so facet candidates are
        // degeneracy-rich and lean on the exact path.
        let mu = 0.3;
        let inv = 1.0 / (1.0_f64 + mu * mu).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for contacts in [2usize, 3, 4, 5, 8] {
            let n = contacts * 8;
            let mut elapsed = std::time::Duration::ZERO;
            let reps = 20;
            for _ in 0..reps {
                let mut pts = Vec::with_capacity(n);
                for _ in 0..contacts {
                    let dir = nalgebra::Vector3::new(
                        rng.gen_range(-1.0..1.0_f64),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    )
                    .normalize();
                    let p = dir * 10.0;
                    let axis = -dir;
                    let (t1, t2) = crate::geometry::plane_basis(&axis);
                    for k in 0..8 {
                        let phi = std::f64::consts::TAU * k as f64 / 8.0;
                        let f = (axis + mu * (phi.cos() * t1 + phi.sin() * t2)) * inv;
                        let tau = p.cross(&f) / 10.0;
                        pts.push(Vec6::new(f.x, f.y, f.z, tau.x, tau.y, tau.z));
                    }
                }
                let t0 = std::time::Instant::now();
                let _ = inscribed_radius(&pts);
                elapsed += t0.elapsed();
            }
            use std::sync::atomic::Ordering::Relaxed;
            eprintln!(
                "{n} wrenches: {:?} per hull | exact {} calls ({} bigint) {:?} | facets {} {:?} | offset {:?} ({} exnorm)",
                elapsed / reps,
                probe_counters::EXACT_ORIENT.swap(0, Relaxed) / reps as u64,
                probe_counters::BIGINT.swap(0, Relaxed) / reps as u64,
                std::time::Duration::from_nanos(probe_counters::EXACT_NS.swap(0, Relaxed) / reps as u64),
                probe_counters::FACETS.swap(0, Relaxed) / reps as u64,
                std::time::Duration::from_nanos(probe_counters::FACET_NS.swap(0, Relaxed) / reps as u64),
                std::time::Duration::from_nanos(probe_counters::OFFSET_NS.swap(0, Relaxed) / reps as u64),
                probe_counters::EXNORM.swap(0, Relaxed) / reps as u64,
            );
        }
    }

    #[test]
    fn interior_points_do_not_change_radius() {
        let mut pts: Vec<Vec6> = (0..6).flat_map(|a| [unit(a, 1.0), unit(a, -1.0)]).collect();
        let base = inscribed_radius(&pts).unwrap();
        pts.push(Vec6::from_element(0.01));
        pts.push(Vec6::zeros());
        let r = inscribed_radius(&pts).unwrap();
        assert!((r - base).abs() < 1e-7, "base {base} vs {r}");
    }
}
