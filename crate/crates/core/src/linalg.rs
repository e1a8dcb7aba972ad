//! Banded symmetric storage, LDLᵀ factorisation, symmetric tridiagonal
//! eigenvalues by bisection, and a shift-invert block Lanczos solver for the
//! generalized problem H x = λ S x.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Result};

/// Symmetric matrix stored as its lower band, row by row.
///
/// Row `i` keeps columns `i - bw ..= i` at offsets `0 ..= bw`.
#[derive(Debug, Clone)]
pub struct BandedSym {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedSym {
    pub fn zeros(n: usize, bw: usize) -> Self {
        let bw = bw.min(n.saturating_sub(1));
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    /// Entry (i, j); zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if i - j > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Adds `v` to entry (i, j) with i >= j.
    #[inline]
    pub fn add_lower(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * (self.bw + 1)..(i + 1) * (self.bw + 1)]
    }

    /// self + alpha * other (same shape).
    pub fn axpy(&self, alpha: f64, other: &BandedSym) -> BandedSym {
        assert_eq!(self.n, other.n);
        assert_eq!(self.bw, other.bw);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + alpha * b).collect();
        BandedSym {
            n: self.n,
            bw: self.bw,
            data,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let bw = self.bw;
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.n {
            let j0 = i.saturating_sub(bw);
            let row = &self.row(i)[(j0 + bw - i)..];
            let xi = x[i];
            let mut acc = 0.0;
            for (k, a) in row[..row.len() - 1].iter().enumerate() {
                let j = j0 + k;
                acc += a * x[j];
                y[j] += a * xi;
            }
            y[i] += acc + row[row.len() - 1] * xi;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// LDLᵀ factorisation without pivoting.
    pub fn ldlt(&self) -> Result<Ldlt> {
        let n = self.n;
        let bw = self.bw;
        let mut l = self.data.clone();
        let mut d = vec![0.0; n];
        let mut scaled = vec![0.0; bw + 1];
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            let base_i = i * (bw + 1);
            for j in j0..i {
                // Columns shared by rows i and j.
                let k0 = j0.max(j.saturating_sub(bw));
                let base_j = j * (bw + 1);
                let mut s = l[base_i + j + bw - i];
                let off_i = base_i + bw - i;
                let off_j = base_j + bw - j;
                let li = &l[off_i + k0..off_i + j];
                let lj = &l[off_j + k0..off_j + j];
                let sc = &scaled[(k0 + bw - i)..(j + bw - i)];
                let mut acc = 0.0;
                for ((a, _b), c) in sc.iter().zip(li).zip(lj) {
                    acc += a * c;
                }
                s -= acc;
                let lij = s / d[j];
                l[base_i + j + bw - i] = lij;
                scaled[j + bw - i] = lij * d[j];
            }
            let mut di = l[base_i + bw];
            for j in j0..i {
                di -= scaled[j + bw - i] * l[base_i + j + bw - i];
            }
            if di.abs() <= 1e-300 || !di.is_finite() || di.abs() < 1e-15 * scale * f64::EPSILON {
                return Err(Error::numerical(
                    "LDLt breakdown",
                    format!("pivot {i} = {di:e} (matrix scale {scale:e})"),
                ));
            }
            d[i] = di;
            l[base_i + bw] = 1.0;
            for v in scaled.iter_mut() {
                *v = 0.0;
            }
        }
        Ok(Ldlt { n, bw, l, d })
    }
}

/// Unit lower-triangular band factor and diagonal.
#[derive(Debug, Clone)]
pub struct Ldlt {
    n: usize,
    bw: usize,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl Ldlt {
    /// Number of negative pivots, i.e. eigenvalues below the shift (Sylvester).
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|v| **v < 0.0).count()
    }

    pub fn min_pivot(&self) -> f64 {
        self.d.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let bw = self.bw;
        for i in 0..self.n {
            let j0 = i.saturating_sub(bw);
            let base = i * (bw + 1) + bw - i;
            let row = &self.l[base + j0..base + i];
            let mut acc = 0.0;
            for (a, xv) in row.iter().zip(&x[j0..i]) {
                acc += a * xv;
            }
            x[i] -= acc;
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for i in (0..self.n).rev() {
            let j0 = i.saturating_sub(bw);
            let base = i * (bw + 1) + bw - i;
            let xi = x[i];
            let row = &self.l[base + j0..base + i];
            for (a, xv) in row.iter().zip(x[j0..i].iter_mut()) {
                *xv -= a * xi;
            }
        }
    }
}

/// Number of eigenvalues of the symmetric tridiagonal (d, e) below `x`.
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let denom = if q == 0.0 {
            f64::EPSILON * (e[i - 1].abs() + 1.0)
        } else {
            q
        };
        q = d[i] - x - e[i - 1] * e[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval of a symmetric tridiagonal matrix.
pub fn gershgorin(d: &[f64], e: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..d.len() {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i < e.len() { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    (lo, hi)
}

/// The k-th smallest eigenvalue (0-based) by Sturm bisection.
pub fn tridiagonal_eigenvalue(d: &[f64], e: &[f64], k: usize) -> f64 {
    let (mut lo, mut hi) = gershgorin(d, e);
    let span = (hi - lo).abs().max(1.0);
    lo -= 1e-12 * span;
    hi += 1e-12 * span;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvector of the symmetric tridiagonal (d, e) for eigenvalue `lambda`
/// by inverse iteration; unit Euclidean norm.
pub fn tridiagonal_eigenvector(d: &[f64], e: &[f64], lambda: f64) -> Vec<f64> {
    let n = d.len();
    let shift = lambda + 1e-12 * (lambda.abs() + 1.0);
    // LU with partial pivoting of the tridiagonal (T - shift I).
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    for _ in 0..3 {
        x = solve_tridiagonal_pivoted(d, e, shift, &x);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
    }
    x
}

fn solve_tridiagonal_pivoted(d: &[f64], e: &[f64], shift: f64, b: &[f64]) -> Vec<f64> {
    let n = d.len();
    if n == 1 {
        let p = d[0] - shift;
        return vec![b[0] / if p == 0.0 { f64::EPSILON } else { p }];
    }
    // Rows stored as (diag, super, super2) after elimination with row swaps.
    let mut a = vec![0.0; n];
    let mut c = vec![0.0; n];
    let mut c2 = vec![0.0; n];
    let mut rhs = b.to_vec();
    let mut cur_diag = d[0] - shift;
    let mut cur_sup = e[0];
    let mut cur_sup2 = 0.0;
    for i in 0..n - 1 {
        let sub = e[i];
        let next_diag = d[i + 1] - shift;
        let next_sup = if i + 1 < n - 1 { e[i + 1] } else { 0.0 };
        if cur_diag.abs() >= sub.abs() {
            let piv = if cur_diag == 0.0 { f64::EPSILON } else { cur_diag };
            let m = sub / piv;
            a[i] = piv;
            c[i] = cur_sup;
            c2[i] = cur_sup2;
            rhs[i + 1] -= m * rhs[i];
            cur_diag = next_diag - m * cur_sup;
            cur_sup = next_sup - m * cur_sup2;
            cur_sup2 = 0.0;
        } else {
            // Swap rows i and i+1.
            let m = cur_diag / sub;
            a[i] = sub;
            c[i] = next_diag;
            c2[i] = next_sup;
            rhs.swap(i, i + 1);
            rhs[i + 1] -= m * rhs[i];
            let nd = cur_sup - m * next_diag;
            let ns = cur_sup2 - m * next_sup;
            cur_diag = nd;
            cur_sup = ns;
            cur_sup2 = 0.0;
        }
    }
    a[n - 1] = if cur_diag == 0.0 { f64::EPSILON } else { cur_diag };
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= c[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= c2[i] * x[i + 2];
        }
        x[i] = s / a[i];
    }
    x
}

/// Lowest eigenpairs of the pencil (H, S).
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// Column-major: vector `k` is `vectors[k]`, S-orthonormal.
    pub vectors: Vec<Vec<f64>>,
    pub iterations: usize,
    pub max_residual: f64,
}

/// Options for [`lowest_eigenpairs`].
#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub block_size: usize,
    pub max_vectors: usize,
    pub tolerance: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            block_size: 3,
            max_vectors: 900,
            tolerance: 1e-12,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Deterministic pseudo-random start vector.
fn start_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..n)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
        .collect()
}

/// Lowest `k` eigenpairs of H x = λ S x with S positive definite and
/// `sigma` strictly below the spectrum, by block Lanczos on
/// (H - σS)⁻¹ S in the S inner product with full reorthogonalisation.
pub fn lowest_eigenpairs(
    h: &BandedSym,
    s: &BandedSym,
    sigma: f64,
    k: usize,
    opts: LanczosOptions,
) -> Result<EigenPairs> {
    let n = h.dim();
    if k == 0 || k > n {
        return Err(Error::domain(format!(
            "requested {k} eigenpairs of a {n}-dimensional pencil"
        )));
    }
    let shifted = h.axpy(-sigma, s);
    let fact = shifted.ldlt()?;
    if fact.negative_pivots() > 0 {
        return Err(Error::numerical(
            "shift is not below the spectrum",
            format!("{} negative pivots at sigma = {sigma}", fact.negative_pivots()),
        ));
    }
    let p = opts.block_size.max(1).min(n);
    let max_vectors = opts.max_vectors.min(n);

    // Small problems: dense route.
    if n <= 3 * p + k + 20 || max_vectors >= n {
        return dense_pencil(h, s, k);
    }

    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut sq: Vec<Vec<f64>> = Vec::new();
    let mut tmp = vec![0.0; n];
    let mut seed = 17u64;

    // S-orthonormalise a candidate against the basis; returns None when it is
    // numerically contained in the span.
    let orthonormalise = |v: &mut Vec<f64>, q: &[Vec<f64>], sq: &[Vec<f64>], tmp: &mut Vec<f64>| -> Option<Vec<f64>> {
        s.matvec(v, tmp);
        let norm0 = dot(v, tmp).max(0.0).sqrt();
        for _ in 0..2 {
            for (qi, sqi) in q.iter().zip(sq) {
                let c = dot(sqi, v);
                axpy(-c, qi, v);
            }
        }
        s.matvec(v, tmp);
        let norm = dot(v, tmp).max(0.0).sqrt();
        if !(norm > 1e-10 * norm0) || norm == 0.0 {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        tmp.iter_mut().for_each(|x| *x /= norm);
        Some(tmp.clone())
    };

    for _ in 0..p {
        loop {
            let mut v = start_vector(n, seed);
            seed += 1;
            if let Some(sv) = orthonormalise(&mut v, &q, &sq, &mut tmp) {
                q.push(v);
                sq.push(sv);
                break;
            }
        }
    }

    // Projected matrix T = Qᵀ S Op Q; column j holds the coefficients of
    // Op q_j against the vectors that existed when it was formed.
    let mut t_entries: Vec<Vec<f64>> = Vec::new();
    let mut block_start = 0;
    let mut iterations = 0;
    loop {
        let block_end = q.len();
        let mut raw = Vec::new();
        for j in block_start..block_end {
            let mut w = sq[j].clone();
            fact.solve_in_place(&mut w);
            iterations += 1;
            let coeffs: Vec<f64> = sq.iter().map(|sqi| dot(sqi, &w)).collect();
            t_entries.push(coeffs);
            raw.push(w);
        }
        let m = block_end;
        let mut capped = false;
        for w in &raw {
            if q.len() >= max_vectors {
                capped = true;
                break;
            }
            let mut w = w.clone();
            match orthonormalise(&mut w, &q, &sq, &mut tmp) {
                Some(sv) => {
                    q.push(w);
                    sq.push(sv);
                }
                None => {
                    // Direction already contained in the span: inject a fresh vector.
                    let mut v = start_vector(n, seed);
                    seed += 1;
                    if let Some(sv) = orthonormalise(&mut v, &q, &sq, &mut tmp) {
                        q.push(v);
                        sq.push(sv);
                    }
                }
            }
        }
        // Components of the last block's images along the new vectors.
        let coupling: Vec<Vec<f64>> = raw
            .iter()
            .map(|w| sq[m..].iter().map(|sqa| dot(sqa, w)).collect())
            .collect();
        let exhausted = q.len() == m;
        let check = (m >= k + p && (m / p) % 3 == 0) || capped || exhausted;
        if !check {
            block_start = block_end;
            continue;
        }
        let mut t = DMatrix::<f64>::zeros(m, m);
        for j in 0..m {
            for i in 0..=j {
                let v = t_entries[j][i];
                t[(i, j)] = v;
                t[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|a, b| eig.eigenvalues[*b].partial_cmp(&eig.eigenvalues[*a]).unwrap());
        let theta_max = eig.eigenvalues[order[0]].abs();
        let mut converged = true;
        let mut max_res = 0.0f64;
        for &idx in order.iter().take(k) {
            let y = eig.eigenvectors.column(idx);
            let extra = q.len() - m;
            let mut res2 = 0.0;
            for a in 0..extra {
                let mut acc = 0.0;
                for (jj, row) in coupling.iter().enumerate() {
                    acc += row[a] * y[block_start + jj];
                }
                res2 += acc * acc;
            }
            let res = res2.sqrt() / theta_max;
            max_res = max_res.max(res);
            if res > opts.tolerance {
                converged = false;
            }
        }
        if converged || capped || exhausted {
            if !converged {
                return Err(Error::numerical(
                    "block Lanczos did not converge",
                    format!("{} vectors, relative residual {max_res:e}", q.len()),
                ));
            }
            let mut pairs: Vec<(f64, Vec<f64>)> = order
                .iter()
                .take(k)
                .map(|&idx| {
                    let y = eig.eigenvectors.column(idx);
                    let mut x = vec![0.0; n];
                    for (i, qi) in q.iter().take(m).enumerate() {
                        axpy(y[i], qi, &mut x);
                    }
                    (sigma + 1.0 / eig.eigenvalues[idx], x)
                })
                .collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let (values, vectors) = pairs.into_iter().unzip();
            return Ok(EigenPairs {
                values,
                vectors,
                iterations,
                max_residual: max_res,
            });
        }
        block_start = block_end;
    }
}

/// Dense generalized solve via Cholesky of S; used for small pencils.
pub fn dense_pencil(h: &BandedSym, s: &BandedSym, k: usize) -> Result<EigenPairs> {
    let hd = h.to_dense();
    let sd = s.to_dense();
    let chol =
        nalgebra::Cholesky::new(sd).ok_or_else(|| Error::Basis("overlap matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Basis("singular overlap factor".into()))?;
    let c = &linv * hd * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|a, b| eig.eigenvalues[*a].partial_cmp(&eig.eigenvalues[*b]).unwrap());
    let lt_inv = linv.transpose();
    let mut values = Vec::new();
    let mut vectors = Vec::new();
    for &i in order.iter().take(k) {
        values.push(eig.eigenvalues[i]);
        let x = &lt_inv * eig.eigenvectors.column(i);
        vectors.push(x.iter().cloned().collect());
    }
    Ok(EigenPairs {
        values,
        vectors,
        iterations: 0,
        max_residual: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> BandedSym {
        let mut a = BandedSym::zeros(n, 1);
        for i in 0..n {
            a.add_lower(i, i, 2.0);
            if i > 0 {
                a.add_lower(i, i - 1, -1.0);
            }
        }
        a
    }

    fn random_banded(n: usize, bw: usize, seed: u64, diag: f64) -> BandedSym {
        let r = start_vector(n * (bw + 1), seed);
        let mut a = BandedSym::zeros(n, bw);
        let mut k = 0;
        for i in 0..n {
            for j in i.saturating_sub(bw)..=i {
                let v = if i == j { diag + r[k] } else { r[k] };
                a.add_lower(i, j, v);
                k += 1;
            }
        }
        a
    }

    #[test]
    fn ldlt_solves_and_counts_inertia() {
        let a = random_banded(60, 5, 3, 4.0);
        let f = a.ldlt().unwrap();
        let x: Vec<f64> = (0..60).map(|i| (i as f64).sin()).collect();
        let mut b = vec![0.0; 60];
        a.matvec(&x, &mut b);
        f.solve_in_place(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-12);
        }
        let lap = laplacian(50);
        let dense = SymmetricEigen::new(lap.to_dense());
        let shift = 1.3;
        let below = dense.eigenvalues.iter().filter(|v| **v < shift).count();
        let mut id = BandedSym::zeros(50, 1);
        for i in 0..50 {
            id.add_lower(i, i, 1.0);
        }
        assert_eq!(lap.axpy(-shift, &id).ldlt().unwrap().negative_pivots(), below);
    }

    #[test]
    fn tridiagonal_bisection_matches_dense() {
        let d: Vec<f64> = (0..40).map(|i| (i as f64 * 0.3).cos() * 3.0).collect();
        let e: Vec<f64> = (0..39).map(|i| 0.5 + (i as f64 * 0.7).sin()).collect();
        let mut m = DMatrix::zeros(40, 40);
        for i in 0..40 {
            m[(i, i)] = d[i];
            if i < 39 {
                m[(i, i + 1)] = e[i];
                m[(i + 1, i)] = e[i];
            }
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().cloned().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for k in [0, 5, 20, 39] {
            let lam = tridiagonal_eigenvalue(&d, &e, k);
            assert!((lam - ev[k]).abs() < 1e-12);
            let v = tridiagonal_eigenvector(&d, &e, lam);
            let mv = &m * nalgebra::DVector::from_vec(v.clone());
            let res: f64 = mv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - lam * b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-9, "residual {res}");
        }
    }

    #[test]
    fn block_lanczos_matches_dense_pencil() {
        let n = 400;
        let h = random_banded(n, 6, 11, 0.0).axpy(1.0, &laplacian(n).pad(6));
        let s = random_banded(n, 6, 5, 0.0);
        // S = I + small symmetric perturbation, positive definite.
        let mut s2 = BandedSym::zeros(n, 6);
        for i in 0..n {
            for j in i.saturating_sub(6)..=i {
                let v = if i == j { 1.0 } else { 0.02 * s.get(i, j) };
                s2.add_lower(i, j, v);
            }
        }
        let dense = dense_pencil(&h, &s2, 8).unwrap();
        let sigma = dense.values[0] - 1.0;
        let res = lowest_eigenpairs(
            &h,
            &s2,
            sigma,
            8,
            LanczosOptions {
                block_size: 2,
                max_vectors: 300,
                tolerance: 1e-12,
            },
        )
        .unwrap();
        for (a, b) in res.values.iter().zip(&dense.values) {
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    impl BandedSym {
        fn pad(&self, bw: usize) -> BandedSym {
            let mut out = BandedSym::zeros(self.n, bw);
            for i in 0..self.n {
                for j in i.saturating_sub(self.bw)..=i {
                    out.add_lower(i, j, self.get(i, j));
                }
            }
            out
        }
    }

    #[test]
    fn degenerate_pair_is_resolved() {
        // Two decoupled identical chains: every eigenvalue is doubly degenerate.
        let n = 300;
        let mut h = BandedSym::zeros(2 * n, 2);
        let mut s = BandedSym::zeros(2 * n, 2);
        for i in 0..2 * n {
            h.add_lower(i, i, 2.0);
            s.add_lower(i, i, 1.0);
            if i >= 2 {
                h.add_lower(i, i - 2, -1.0);
            }
        }
        let opts = LanczosOptions {
            block_size: 3,
            max_vectors: 400,
            tolerance: 1e-12,
        };
        let res = lowest_eigenpairs(&h, &s, -1e-3, 4, opts).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!((res.values[0] - exact).abs() < 1e-10);
        assert!((res.values[1] - exact).abs() < 1e-10);
    }
}
