//! Dense-free numerical linear algebra: symmetric tridiagonal eigenpairs by
//! Sturm bisection + inverse iteration, Lanczos with full
//! reorthogonalization for the product-grid operator, tridiagonal solves
//! for the implicit steppers, and a small cyclic-Jacobi reference path.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix: `diag` of length n, `off` of length n − 1.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal must have n-1 entries");
        SymTridiag { diag, off }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin bounds on the spectrum.
    pub fn spectrum_bounds(&self) -> (f64, f64) {
        let n = self.n();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let r = self.off.get(i).map_or(0.0, |e| e.abs())
                + if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn pivmin(&self) -> f64 {
        let max_e2 = self.off.iter().map(|e| e * e).fold(1.0f64, f64::max);
        f64::MIN_POSITIVE * max_e2
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = self.pivmin();
        let mut count = 0usize;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.n() {
            if q.abs() < pivmin {
                q = -pivmin;
            }
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// j-th smallest eigenvalue (0-based) by bisection, to floating-point
    /// resolution. Deterministic.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        assert!(j < self.n());
        let (mut lo, mut hi) = self.spectrum_bounds();
        let width = (hi - lo).max(1.0);
        lo -= 1e-12 * width;
        hi += 1e-12 * width;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Lowest `k` eigenpairs, ascending, with unit Euclidean norm.
    ///
    /// Eigenvalues come from bisection; eigenvectors from inverse iteration
    /// with orthogonalization inside near-degenerate clusters.
    pub fn lowest_eigenpairs(&self, k: usize) -> Result<Vec<(f64, Vec<f64>)>> {
        let n = self.n();
        assert!(k >= 1 && k <= n, "need 1 <= k <= n, got k = {k}, n = {n}");
        let (blo, bhi) = self.spectrum_bounds();
        let anorm = bhi.abs().max(blo.abs()).max(f64::MIN_POSITIVE);
        let cluster_tol = 1e3 * f64::EPSILON * anorm;

        let values: Vec<f64> = (0..k).map(|j| self.eigenvalue(j)).collect();
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut cluster_start = 0usize;
        for j in 0..k {
            if j > 0 && values[j] - values[j - 1] > cluster_tol {
                cluster_start = j;
            }
            let v = self.inverse_iteration(values[j], &vectors[cluster_start..j], anorm, j as u64)?;
            vectors.push(v);
        }
        Ok(values.into_iter().zip(vectors).collect())
    }

    fn inverse_iteration(
        &self,
        lambda: f64,
        cluster: &[Vec<f64>],
        anorm: f64,
        salt: u64,
    ) -> Result<Vec<f64>> {
        let n = self.n();
        // pivot floor keeps solutions of the near-singular system finite
        let pivot_floor = f64::EPSILON * anorm;
        let lu = TridiagLu::factor(&self.diag, &self.off, lambda, pivot_floor);
        let mut v = deterministic_unit_noise(n, 0x1517_d00d ^ salt);
        normalize(&mut v);
        let mut best: Option<(f64, Vec<f64>)> = None;
        for attempt in 0..6u64 {
            lu.solve_in_place(&mut v);
            for c in cluster {
                let o = dot(c, &v);
                axpy(-o, c, &mut v);
            }
            let nrm = norm2(&v);
            if !nrm.is_finite() || nrm == 0.0 {
                v = deterministic_unit_noise(n, 0xfeed_5eed ^ salt.wrapping_mul(31 + attempt));
                normalize(&mut v);
                continue;
            }
            scale(1.0 / nrm, &mut v);
            let res = self.residual(lambda, &v);
            if best.as_ref().is_none_or(|(r, _)| res < *r) {
                best = Some((res, v.clone()));
            }
            if res <= 50.0 * f64::EPSILON * anorm * (n as f64).sqrt() {
                break;
            }
        }
        let (res, v) = best.ok_or_else(|| Error::Convergence {
            context: format!("inverse iteration at lambda = {lambda:.6e} kept overflowing"),
            residual: f64::INFINITY,
        })?;
        if res > 1e-8 * anorm {
            return Err(Error::Convergence {
                context: format!("inverse iteration at lambda = {lambda:.6e}"),
                residual: res,
            });
        }
        Ok(v)
    }

    fn residual(&self, lambda: f64, v: &[f64]) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            let mut r = (self.diag[i] - lambda) * v[i];
            if i > 0 {
                r += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                r += self.off[i] * v[i + 1];
            }
            worst = worst.max(r.abs());
        }
        worst
    }
}

/// Tridiagonal LU with partial pivoting, for (T − λ) solves.
struct TridiagLu {
    dl: Vec<f64>,
    dd: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(diag: &[f64], off: &[f64], shift: f64, pivot_floor: f64) -> Self {
        let n = diag.len();
        let mut dl: Vec<f64> = off.to_vec();
        let mut dd: Vec<f64> = diag.iter().map(|d| d - shift).collect();
        let mut du: Vec<f64> = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let tiny = pivot_floor.max(f64::MIN_POSITIVE);
        for i in 0..n.saturating_sub(1) {
            if dd[i].abs() >= dl[i].abs() {
                if dd[i].abs() < tiny {
                    dd[i] = if dd[i] < 0.0 { -tiny } else { tiny };
                }
                let fact = dl[i] / dd[i];
                dl[i] = fact;
                dd[i + 1] -= fact * du[i];
            } else {
                let fact = dd[i] / dl[i];
                dd[i] = dl[i];
                dl[i] = fact;
                let tmp = dd[i + 1];
                dd[i + 1] = du[i] - fact * tmp;
                du[i] = tmp;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if dd[n - 1].abs() < tiny {
            dd[n - 1] = if dd[n - 1] < 0.0 { -tiny } else { tiny };
        }
        TridiagLu { dl, dd, du, du2, swapped }
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.dl[i] * b[i];
        }
        b[n - 1] /= self.dd[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.dd[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.dd[i];
        }
    }
}

/// Options for [`lanczos_lowest`].
#[derive(Debug, Clone)]
pub struct LanczosOpts {
    /// Number of lowest eigenpairs wanted.
    pub k: usize,
    /// Maximum Krylov dimension.
    pub max_iter: usize,
    /// Residual tolerance relative to the operator scale.
    pub tol: f64,
    /// Salt for the deterministic start vector.
    pub seed: u64,
    /// Convergence is checked every this many iterations.
    pub check_every: usize,
}

impl Default for LanczosOpts {
    fn default() -> Self {
        LanczosOpts { k: 1, max_iter: 450, tol: 1e-10, seed: 0x00c0_ffee, check_every: 8 }
    }
}

/// Lowest-k eigenpairs of a real symmetric operator given by `matvec`,
/// using Lanczos with full reorthogonalization.
///
/// `project` is applied to every new basis vector; passing an orthogonal
/// projector that commutes with the operator restricts the solve to an
/// invariant subspace (symmetry sector) and suppresses roundoff drift out
/// of it. Deterministic for fixed inputs.
pub fn lanczos_lowest(
    dim: usize,
    mut matvec: impl FnMut(&[f64], &mut [f64]),
    mut project: impl FnMut(&mut [f64]),
    start: Option<&[f64]>,
    opts: &LanczosOpts,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let k = opts.k;
    assert!(k >= 1, "need k >= 1");
    let m_max = opts.max_iter.min(dim);
    if k > dim {
        return Err(Error::Domain(format!("asked for {k} eigenpairs of a dim-{dim} operator")));
    }

    let mut q = match start {
        Some(v) => {
            assert_eq!(v.len(), dim, "start vector length mismatch");
            v.to_vec()
        }
        None => deterministic_unit_noise(dim, opts.seed),
    };
    project(&mut q);
    let nrm = norm2(&q);
    if nrm < 1e-12 {
        return Err(Error::Domain("start vector has no component in the requested sector".into()));
    }
    scale(1.0 / nrm, &mut q);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let mut scale_est = f64::MIN_POSITIVE;
    let mut last_residual = f64::INFINITY;

    for j in 0..m_max {
        matvec(&basis[j], &mut w);
        project(&mut w);
        let a = dot(&basis[j], &w);
        alpha.push(a);
        axpy(-a, &basis[j], &mut w);
        if j > 0 {
            axpy(-beta[j - 1], &basis[j - 1], &mut w);
        }
        // full reorthogonalization, twice if significant cancellation occurred
        for _ in 0..2 {
            let before = norm2(&w);
            for qi in &basis {
                let o = dot(qi, &w);
                axpy(-o, qi, &mut w);
            }
            if norm2(&w) > 0.5 * before {
                break;
            }
        }
        project(&mut w);
        scale_est = scale_est.max(a.abs() + 2.0 * beta.last().copied().unwrap_or(0.0).abs());
        let b = norm2(&w);

        let m = alpha.len();
        let at_end = j + 1 == m_max;
        let breakdown = b <= 1e-13 * scale_est.max(1.0);
        if m >= k && (m.is_multiple_of(opts.check_every) || at_end || breakdown) {
            let tri = SymTridiag::new(alpha.clone(), beta.clone());
            let ritz = tri.lowest_eigenpairs(k)?;
            let worst = ritz
                .iter()
                .map(|(_, s)| (b * s[m - 1]).abs())
                .fold(0.0f64, f64::max);
            last_residual = worst;
            if worst <= opts.tol * scale_est {
                return finish_lanczos(&ritz, &basis, &mut matvec, &mut project, scale_est, opts);
            }
        }

        if breakdown {
            // invariant subspace exhausted; bring in a fresh direction
            let mut fresh = deterministic_unit_noise(dim, opts.seed ^ (0x9e37_79b9 + j as u64));
            project(&mut fresh);
            for qi in &basis {
                let o = dot(qi, &fresh);
                axpy(-o, qi, &mut fresh);
            }
            let fn_norm = norm2(&fresh);
            if fn_norm < 1e-10 {
                // sector fully spanned: current Ritz pairs are exact
                let tri = SymTridiag::new(alpha.clone(), beta.clone());
                let m_now = alpha.len();
                let ritz = tri.lowest_eigenpairs(k.min(m_now))?;
                if ritz.len() < k {
                    return Err(Error::Convergence {
                        context: format!("sector contains fewer than {k} states"),
                        residual: b,
                    });
                }
                return finish_lanczos(&ritz, &basis, &mut matvec, &mut project, scale_est, opts);
            }
            scale(1.0 / fn_norm, &mut fresh);
            beta.push(0.0);
            basis.push(fresh);
        } else {
            beta.push(b);
            let mut next = w.clone();
            scale(1.0 / b, &mut next);
            basis.push(next);
        }
    }

    Err(Error::Convergence {
        context: format!("Lanczos reached max_iter = {m_max} (k = {k}, dim = {dim})"),
        residual: last_residual,
    })
}

fn finish_lanczos(
    ritz: &[(f64, Vec<f64>)],
    basis: &[Vec<f64>],
    matvec: &mut impl FnMut(&[f64], &mut [f64]),
    project: &mut impl FnMut(&mut [f64]),
    scale_est: f64,
    opts: &LanczosOpts,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let dim = basis[0].len();
    let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(ritz.len());
    let mut hv = vec![0.0; dim];
    for (theta, s) in ritz {
        let mut v = vec![0.0; dim];
        for (j, qj) in basis.iter().enumerate().take(s.len()) {
            axpy(s[j], qj, &mut v);
        }
        project(&mut v);
        for (_, prev) in &out {
            let o = dot(prev, &v);
            axpy(-o, prev, &mut v);
        }
        let nrm = norm2(&v);
        if nrm < 1e-8 {
            return Err(Error::Convergence {
                context: "Ritz vector collapsed during recovery".into(),
                residual: nrm,
            });
        }
        scale(1.0 / nrm, &mut v);
        matvec(&v, &mut hv);
        let theta_refined = dot(&v, &hv);
        let mut res = 0.0f64;
        for i in 0..dim {
            res += (hv[i] - theta_refined * v[i]).powi(2);
        }
        let res = res.sqrt();
        if res > 100.0 * opts.tol * scale_est {
            return Err(Error::Convergence {
                context: format!("Ritz pair at theta = {theta:.6e} failed the residual check"),
                residual: res,
            });
        }
        out.push((theta_refined, v));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// Cyclic Jacobi eigensolver for small dense symmetric matrices (row-major).
/// Reference path for cross-checking the iterative solvers; O(n³) per sweep.
pub fn jacobi_eigh(matrix: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + frobenius_diag(&a, n)) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let api = a[p * n + i];
                    let aqi = a[q * n + i];
                    a[p * n + i] = c * api - s * aqi;
                    a[q * n + i] = s * api + c * aqi;
                }
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors: Vec<Vec<f64>> =
        order.iter().map(|&j| (0..n).map(|i| v[i * n + j]).collect()).collect();
    (values, vectors)
}

fn frobenius_diag(a: &[f64], n: usize) -> f64 {
    (0..n).map(|i| a[i * n + i] * a[i * n + i]).sum::<f64>().sqrt()
}

/// Solver for complex tridiagonal systems with constant coefficients
/// (diagonal `b`, both off-diagonals `a`), prefactored once and reused for
/// every row, column and time step. Stable without pivoting for the
/// diagonally dominant Cayley matrices used by the steppers.
#[derive(Debug, Clone)]
pub struct ConstTridiagSolver {
    a: Complex64,
    cp: Vec<Complex64>,
    inv_den: Vec<Complex64>,
}

impl ConstTridiagSolver {
    pub fn new(n: usize, a: Complex64, b: Complex64) -> Self {
        assert!(n >= 1);
        let mut cp = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
        let mut inv_den = vec![Complex64::new(0.0, 0.0); n];
        let mut den = b;
        inv_den[0] = den.finv();
        if n > 1 {
            cp[0] = a * inv_den[0];
        }
        for i in 1..n {
            den = b - a * cp[i - 1];
            inv_den[i] = den.finv();
            if i + 1 < n {
                cp[i] = a * inv_den[i];
            }
        }
        ConstTridiagSolver { a, cp, inv_den }
    }

    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        let n = x.len();
        debug_assert_eq!(n, self.inv_den.len());
        x[0] *= self.inv_den[0];
        for i in 1..n {
            x[i] = (x[i] - self.a * x[i - 1]) * self.inv_den[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.cp[i] * x[i + 1];
        }
    }

    /// Strided variant for column sweeps over a row-major field.
    pub fn solve_strided(&self, data: &mut [Complex64], start: usize, stride: usize, len: usize) {
        debug_assert_eq!(len, self.inv_den.len());
        let mut idx = start;
        data[idx] *= self.inv_den[0];
        for i in 1..len {
            let prev = data[idx];
            idx += stride;
            data[idx] = (data[idx] - self.a * prev) * self.inv_den[i];
        }
        for i in (0..len - 1).rev() {
            let next = data[idx];
            idx -= stride;
            data[idx] -= self.cp[i] * next;
        }
    }
}

/// One-shot Thomas solve for a complex tridiagonal system with a varying
/// diagonal and constant off-diagonal `a` (the single-particle Cayley step).
pub fn thomas_const_offdiag(
    a: Complex64,
    diag: &[Complex64],
    rhs: &mut [Complex64],
    scratch: &mut Vec<Complex64>,
) {
    let n = diag.len();
    debug_assert_eq!(rhs.len(), n);
    scratch.clear();
    scratch.resize(n.saturating_sub(1), Complex64::new(0.0, 0.0));
    let mut den = diag[0];
    rhs[0] /= den;
    if n > 1 {
        scratch[0] = a / den;
    }
    for i in 1..n {
        den = diag[i] - a * scratch[i - 1];
        let inv = den.finv();
        rhs[i] = (rhs[i] - a * rhs[i - 1]) * inv;
        if i + 1 < n {
            scratch[i] = a * inv;
        }
    }
    for i in (0..n.saturating_sub(1)).rev() {
        let t = scratch[i] * rhs[i + 1];
        rhs[i] -= t;
    }
}

/// Deterministic pseudo-random unit vector (splitmix64 per index).
pub fn deterministic_unit_noise(dim: usize, seed: u64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim)
        .map(|i| {
            let h = splitmix64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(i as u64 + 1)));
            (h >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    normalize(&mut v);
    v
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x {
        *xi *= alpha;
    }
}

pub fn normalize(x: &mut [f64]) {
    let n = norm2(x);
    if n > 0.0 {
        scale(1.0 / n, x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dirichlet Laplacian tridiagonal: exact eigenvalues
    /// λ_k = (1 − cos kπ/(n+1))/dx², eigenvectors sin(kπ(i+1)/(n+1)).
    fn dirichlet_box(n: usize, dx: f64) -> SymTridiag {
        SymTridiag::new(vec![1.0 / (dx * dx); n], vec![-0.5 / (dx * dx); n - 1])
    }

    #[test]
    fn bisection_matches_exact_box_eigenvalues() {
        let n = 500;
        let dx = 1.0 / (n as f64 + 1.0);
        let t = dirichlet_box(n, dx);
        for k in 1..=5usize {
            let exact = (1.0 - (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos()) / (dx * dx);
            let got = t.eigenvalue(k - 1);
            assert!(
                (got - exact).abs() < 1e-9 * exact.abs().max(1.0),
                "k = {k}: got {got}, exact {exact}"
            );
        }
    }

    #[test]
    fn eigenvectors_match_discrete_sines() {
        let n = 200;
        let dx = 1.0 / (n as f64 + 1.0);
        let t = dirichlet_box(n, dx);
        let pairs = t.lowest_eigenpairs(3).unwrap();
        for (k, (_, v)) in pairs.iter().enumerate() {
            let k1 = k as f64 + 1.0;
            let mut exact: Vec<f64> = (0..n)
                .map(|i| (k1 * std::f64::consts::PI * (i as f64 + 1.0) / (n as f64 + 1.0)).sin())
                .collect();
            normalize(&mut exact);
            if dot(&exact, v) < 0.0 {
                scale(-1.0, &mut exact);
            }
            let err: f64 = exact.iter().zip(v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-8, "state {k} max err {err}");
        }
    }

    #[test]
    fn clustered_pair_stays_orthogonal() {
        // two nearly decoupled blocks give a near-degenerate lowest pair
        let n = 40;
        let mut diag = vec![2.0; n];
        let mut off = vec![-1.0; n - 1];
        off[n / 2] = 1e-13;
        diag[0] += 1e-13;
        let t = SymTridiag::new(diag, off);
        let pairs = t.lowest_eigenpairs(2).unwrap();
        let overlap = dot(&pairs[0].1, &pairs[1].1).abs();
        assert!(overlap < 1e-9, "overlap {overlap}");
    }

    #[test]
    fn lanczos_agrees_with_bisection_on_tridiagonal() {
        let n = 300;
        let dx = 1.0 / (n as f64 + 1.0);
        let t = dirichlet_box(n, dx);
        let dense = t.lowest_eigenpairs(4).unwrap();
        let t2 = t.clone();
        let matvec = move |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let mut acc = t2.diag[i] * x[i];
                if i > 0 {
                    acc += t2.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    acc += t2.off[i] * x[i + 1];
                }
                y[i] = acc;
            }
        };
        let opts = LanczosOpts { k: 4, ..Default::default() };
        let got = lanczos_lowest(n, matvec, |_| {}, None, &opts).unwrap();
        for (g, d) in got.iter().zip(&dense) {
            assert!((g.0 - d.0).abs() < 1e-8 * d.0.abs().max(1.0), "{} vs {}", g.0, d.0);
            assert!(dot(&g.1, &d.1).abs() > 1.0 - 1e-8);
        }
    }

    #[test]
    fn lanczos_agrees_with_jacobi_on_small_dense() {
        // random-ish symmetric matrix via deterministic noise
        let n = 60;
        let mut m = vec![0.0; n * n];
        let noise = deterministic_unit_noise(n * n, 42);
        for i in 0..n {
            for j in 0..=i {
                let v = noise[i * n + j] + if i == j { 2.0 + i as f64 * 0.1 } else { 0.0 };
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
        let (jac_vals, _) = jacobi_eigh(&m, n);
        let mref = m.clone();
        let matvec = move |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                y[i] = (0..n).map(|j| mref[i * n + j] * x[j]).sum();
            }
        };
        let opts = LanczosOpts { k: 3, ..Default::default() };
        let got = lanczos_lowest(n, matvec, |_| {}, None, &opts).unwrap();
        for (g, jv) in got.iter().zip(jac_vals.iter().take(3)) {
            assert!((g.0 - jv).abs() < 1e-9, "{} vs {jv}", g.0);
        }
    }

    #[test]
    fn const_tridiag_solver_round_trip() {
        let n = 50;
        let a = Complex64::new(0.0, -0.35);
        let b = Complex64::new(1.0, 0.8);
        let solver = ConstTridiagSolver::new(n, a, b);
        let orig: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((i as f64 * 0.1).sin(), (i as f64 * 0.07).cos()))
            .collect();
        // y = A x, then solve A z = y, expect z == x
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = b * orig[i];
            if i > 0 {
                acc += a * orig[i - 1];
            }
            if i + 1 < n {
                acc += a * orig[i + 1];
            }
            y[i] = acc;
        }
        solver.solve_in_place(&mut y);
        let err = y.iter().zip(&orig).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "round trip error {err}");

        // strided path must match the contiguous one
        let mut strided = orig.clone();
        let mut contiguous = orig.clone();
        solver.solve_in_place(&mut contiguous);
        solver.solve_strided(&mut strided, 0, 1, n);
        let err = strided.iter().zip(&contiguous).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-14);
    }

    #[test]
    fn thomas_with_varying_diagonal() {
        let n = 30;
        let a = Complex64::new(0.0, -0.2);
        let diag: Vec<Complex64> =
            (0..n).map(|i| Complex64::new(1.0 + 0.01 * i as f64, 0.6)).collect();
        let x: Vec<Complex64> =
            (0..n).map(|i| Complex64::new((i as f64).cos(), (i as f64 * 0.3).sin())).collect();
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = diag[i] * x[i];
            if i > 0 {
                acc += a * x[i - 1];
            }
            if i + 1 < n {
                acc += a * x[i + 1];
            }
            y[i] = acc;
        }
        let mut scratch = Vec::new();
        thomas_const_offdiag(a, &diag, &mut y, &mut scratch);
        let err = y.iter().zip(&x).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "err {err}");
    }
}
