//! Complex Schur decomposition: permutation balancing, Householder
//! Hessenberg reduction, then single-shift QR with Wilkinson shifts.
//!
//! Works on column-major `Vec<Complex64>` storage, `a[i + j * n]`.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
fn cabs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Result of [`schur`]: `a = z · t · zᴴ`, with `t` upper triangular.
pub(crate) struct SchurForm {
    pub n: usize,
    pub t: Vec<Complex64>,
    /// Present when the unitary factor was requested.
    pub z: Option<Vec<Complex64>>,
}

impl SchurForm {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.n).map(|i| self.t[i + i * self.n]).collect()
    }
}

pub(crate) struct NoConvergence;

/// Symmetric permutation isolating eigenvalues that are exposed by zero
/// rows or columns, like LAPACK's `gebal` with job `P`. Returns the core
/// window `[lo, hi]` after permuting `a` and `perm` in place.
fn permute_balance(n: usize, a: &mut [Complex64], perm: &mut [usize]) -> (usize, usize) {
    let swap = |a: &mut [Complex64], perm: &mut [usize], i: usize, j: usize| {
        if i == j {
            return;
        }
        for c in 0..n {
            a.swap(i + c * n, j + c * n);
        }
        for r in 0..n {
            a.swap(r + i * n, r + j * n);
        }
        perm.swap(i, j);
    };
    let mut lo = 0usize;
    let mut hi = n - 1;
    // rows with no off-diagonal entries inside the window go to the bottom
    'rows: loop {
        for j in (0..=hi).rev() {
            if (0..=hi).all(|c| c == j || a[j + c * n] == ZERO) {
                swap(a, perm, j, hi);
                if hi == 0 {
                    return (0, 0);
                }
                hi -= 1;
                continue 'rows;
            }
        }
        break;
    }
    // columns with no off-diagonal entries inside the window go to the top
    'cols: loop {
        for j in lo..=hi {
            if (lo..=hi).all(|r| r == j || a[r + j * n] == ZERO) {
                swap(a, perm, j, lo);
                lo += 1;
                if lo > hi {
                    return (hi, hi);
                }
                continue 'cols;
            }
        }
        break;
    }
    (lo, hi)
}

/// Householder reduction of the window `[lo, hi]` to upper Hessenberg form,
/// applied to the full matrix so that blocks outside the window stay
/// consistent.
fn hessenberg(n: usize, a: &mut [Complex64], z: &mut Option<Vec<Complex64>>, lo: usize, hi: usize) {
    if hi < lo + 2 {
        return;
    }
    let mut v = vec![ZERO; n];
    for k in lo..hi - 1 {
        // annihilate a[k+2..=hi, k]
        let len = hi - k;
        let mut norm2 = 0.0;
        for i in 0..len {
            let x = a[(k + 1 + i) + k * n];
            v[i] = x;
            norm2 += x.norm_sqr();
        }
        let tail: f64 = (1..len).map(|i| v[i].norm_sqr()).sum();
        if tail == 0.0 {
            continue;
        }
        let alpha = norm2.sqrt();
        let x0 = v[0];
        let phase = if x0 == ZERO { ONE } else { x0 / x0.norm() };
        v[0] = x0 + phase * alpha;
        let vnorm2: f64 = (0..len).map(|i| v[i].norm_sqr()).sum();
        let beta = 2.0 / vnorm2;
        // left: rows k+1..=hi, columns k..n
        for c in k..n {
            let col = &mut a[c * n..(c + 1) * n];
            let mut s = ZERO;
            for i in 0..len {
                s += v[i].conj() * col[k + 1 + i];
            }
            s *= beta;
            for i in 0..len {
                col[k + 1 + i] -= v[i] * s;
            }
        }
        // right: all rows 0..=hi (rows below hi are zero in these columns), columns k+1..=hi
        let right = |m: &mut [Complex64], rows: usize| {
            for r in 0..rows {
                let mut s = ZERO;
                for i in 0..len {
                    s += m[r + (k + 1 + i) * n] * v[i];
                }
                s *= beta;
                for i in 0..len {
                    m[r + (k + 1 + i) * n] -= s * v[i].conj();
                }
            }
        };
        right(a, hi + 1);
        if let Some(zm) = z.as_mut() {
            right(zm, n);
        }
        a[(k + 1) + k * n] = -phase * alpha;
        for i in 1..len {
            a[(k + 1 + i) + k * n] = ZERO;
        }
    }
}

/// Givens rotation `[[c, s], [-s̄, c]]` mapping `(x, y)` to `(r, 0)`.
#[inline]
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    if y == ZERO {
        return (1.0, ZERO);
    }
    if x == ZERO {
        return (0.0, y.conj() / y.norm());
    }
    let ax = x.norm();
    let nu = ax.hypot(y.norm());
    (ax / nu, (x / ax) * y.conj() / nu)
}

/// Complex Schur decomposition of the column-major `n × n` matrix `a`.
pub(crate) fn schur(n: usize, mut a: Vec<Complex64>, want_z: bool) -> Result<SchurForm, NoConvergence> {
    if n == 0 {
        return Ok(SchurForm { n, t: a, z: want_z.then(Vec::new) });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let (lo, hi) = permute_balance(n, &mut a, &mut perm);
    let mut z = want_z.then(|| {
        let mut p = vec![ZERO; n * n];
        for (col, &row) in perm.iter().enumerate() {
            p[row + col * n] = ONE;
        }
        p
    });
    hessenberg(n, &mut a, &mut z, lo, hi);
    qr_iterate(n, &mut a, &mut z, lo, hi, want_z)?;
    Ok(SchurForm { n, t: a, z })
}

fn qr_iterate(
    n: usize,
    h: &mut [Complex64],
    z: &mut Option<Vec<Complex64>>,
    lo: usize,
    hi_init: usize,
    want_t: bool,
) -> Result<(), NoConvergence> {
    if hi_init <= lo {
        return Ok(());
    }
    let ulp = f64::EPSILON;
    let safmin = f64::MIN_POSITIVE;
    let smlnum = safmin * ((hi_init - lo + 1) as f64 / ulp);
    let at = |h: &[Complex64], i: usize, j: usize| h[i + j * n];
    let mut hi = hi_init;
    let itmax = 30 * (hi_init - lo + 1).max(10);
    let mut its = 0usize;
    while hi > lo {
        // find the lowest negligible subdiagonal in [lo, hi]
        let mut l = lo;
        for k in (lo + 1..=hi).rev() {
            let sub = cabs1(at(h, k, k - 1));
            if sub <= smlnum {
                l = k;
                break;
            }
            let mut tst = cabs1(at(h, k - 1, k - 1)) + cabs1(at(h, k, k));
            if tst == 0.0 {
                if k >= lo + 2 {
                    tst += cabs1(at(h, k - 1, k - 2));
                }
                if k < hi {
                    tst += cabs1(at(h, k + 1, k));
                }
            }
            if sub <= ulp * tst {
                // Ahues & Tisseur conservative deflation test
                let ab = cabs1(at(h, k, k - 1)).max(cabs1(at(h, k - 1, k)));
                let ba = cabs1(at(h, k, k - 1)).min(cabs1(at(h, k - 1, k)));
                let d = at(h, k - 1, k - 1) - at(h, k, k);
                let aa = cabs1(at(h, k, k)).max(cabs1(d));
                let bb = cabs1(at(h, k, k)).min(cabs1(d));
                let s = aa + ab;
                if ba * (ab / s) <= smlnum.max(ulp * (bb * (aa / s))) {
                    l = k;
                    break;
                }
            }
        }
        if l > lo {
            h[l + (l - 1) * n] = ZERO;
        }
        if l >= hi {
            // one eigenvalue converged
            hi = l.saturating_sub(1).max(lo);
            if l == lo {
                break;
            }
            its = 0;
            continue;
        }
        its += 1;
        if its > itmax {
            return Err(NoConvergence);
        }
        let shift = if its % 10 == 0 {
            // exceptional shifts
            if its % 20 == 0 {
                at(h, hi, hi) + 0.75 * cabs1(at(h, hi, hi - 1))
            } else {
                at(h, l, l) + 0.75 * cabs1(at(h, l + 1, l))
            }
        } else {
            wilkinson(at(h, hi - 1, hi - 1), at(h, hi - 1, hi), at(h, hi, hi - 1), at(h, hi, hi))
        };
        let (i1, i2) = if want_t { (0, n) } else { (l, hi + 1) };
        let mut x = at(h, l, l) - shift;
        let mut y = at(h, l + 1, l);
        for k in l..hi {
            if k > l {
                x = at(h, k, k - 1);
                y = at(h, k + 1, k - 1);
            }
            let (c, s) = givens(x, y);
            if k > l {
                h[k + (k - 1) * n] = c * x + s * y;
                h[(k + 1) + (k - 1) * n] = ZERO;
            }
            // rows k, k+1 from column k to i2
            for col in k..i2 {
                let a = h[k + col * n];
                let b = h[(k + 1) + col * n];
                h[k + col * n] = a * c + s * b;
                h[(k + 1) + col * n] = b * c - s.conj() * a;
            }
            // columns k, k+1, rows i1 ..= min(k+2, hi)
            let rmax = (k + 2).min(hi);
            for r in i1..=rmax {
                let a = h[r + k * n];
                let b = h[r + (k + 1) * n];
                h[r + k * n] = a * c + b * s.conj();
                h[r + (k + 1) * n] = b * c - a * s;
            }
            if let Some(zm) = z.as_mut() {
                for r in 0..n {
                    let a = zm[r + k * n];
                    let b = zm[r + (k + 1) * n];
                    zm[r + k * n] = a * c + b * s.conj();
                    zm[r + (k + 1) * n] = b * c - a * s;
                }
            }
        }
    }
    Ok(())
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let r1 = d + half + disc;
    let r2 = d + half - disc;
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Right eigenvectors of the upper-triangular `t` (columns, not normalized).
/// Near-singular pivots are perturbed to `smin`, as `ztrevc` does.
pub(crate) fn triangular_eigenvectors(n: usize, t: &[Complex64]) -> Vec<Complex64> {
    let ulp = f64::EPSILON;
    let norm = (0..n * n).map(|k| cabs1(t[k])).fold(0.0, f64::max);
    let smlnum = f64::MIN_POSITIVE * (n as f64 / ulp);
    let mut x = vec![ZERO; n * n];
    for k in 0..n {
        let lambda = t[k + k * n];
        let smin = (ulp * cabs1(lambda)).max(ulp * norm).max(smlnum);
        let col = &mut x[k * n..(k + 1) * n];
        col[k] = ONE;
        for i in 0..k {
            col[i] = -t[i + k * n];
        }
        for i in (0..k).rev() {
            let mut d = t[i + i * n] - lambda;
            if cabs1(d) < smin {
                d = Complex64::new(smin, 0.0);
            }
            let xi = col[i] / d;
            col[i] = xi;
            if cabs1(xi) > 1e150 {
                let s = 1.0 / cabs1(xi);
                for v in col.iter_mut().take(k + 1) {
                    *v *= s;
                }
            }
            let xi = col[i];
            for r in 0..i {
                col[r] -= t[r + i * n] * xi;
            }
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand_matrix(n: usize, seed: u64) -> Vec<Complex64> {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        (0..n * n).map(|_| Complex64::new(next(), next())).collect()
    }

    fn matmul(n: usize, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let mut c = vec![ZERO; n * n];
        for j in 0..n {
            for k in 0..n {
                let bkj = b[k + j * n];
                for i in 0..n {
                    c[i + j * n] += a[i + k * n] * bkj;
                }
            }
        }
        c
    }

    #[test]
    fn reconstructs_random_matrices() {
        for (n, seed) in [(1, 1), (2, 2), (3, 3), (7, 4), (30, 5), (64, 6)] {
            let a = rand_matrix(n, seed);
            let f = schur(n, a.clone(), true).ok().unwrap();
            let z = f.z.as_ref().unwrap();
            for j in 0..n {
                for i in j + 1..n {
                    assert!(f.t[i + j * n].norm() == 0.0, "below-diagonal entry at ({i},{j})");
                }
            }
            let zh: Vec<Complex64> = (0..n * n).map(|k| z[(k / n) + (k % n) * n].conj()).collect();
            let back = matmul(n, &matmul(n, z, &f.t), &zh);
            let err: f64 = back.iter().zip(&a).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "n={n} err={err}");
        }
    }

    #[test]
    fn permutation_exposes_exact_nilpotent_spectrum() {
        // a 6-cycle broken open, scrambled by a permutation
        let n = 6;
        let order = [3, 0, 5, 1, 4, 2];
        let mut a = vec![ZERO; n * n];
        for k in 0..n - 1 {
            a[order[k + 1] + order[k] * n] = ONE;
        }
        let f = schur(n, a, false).ok().unwrap();
        assert!(f.eigenvalues().iter().all(|e| *e == ZERO));
    }

    #[test]
    fn cyclic_shift_with_complex_links() {
        // the subdiagonal is not real here, so deflation must look at its full modulus
        let n = 7;
        let link = Complex64::from_polar(1.0, 1.3);
        let mut a = vec![ZERO; n * n];
        for k in 0..n {
            a[(k + 1) % n + k * n] = link * Complex64::i();
        }
        for want_z in [false, true] {
            let f = schur(n, a.clone(), want_z).ok().unwrap();
            for e in f.eigenvalues() {
                assert!((e.norm() - 1.0).abs() < 1e-12, "{e}");
            }
        }
    }

    #[test]
    fn eigenvectors_of_triangular() {
        let n = 4;
        let mut t = vec![ZERO; n * n];
        for j in 0..n {
            for i in 0..=j {
                t[i + j * n] = Complex64::new((i + 2 * j) as f64, (i as f64) - 0.5 * j as f64);
            }
        }
        let x = triangular_eigenvectors(n, &t);
        for k in 0..n {
            let lambda = t[k + k * n];
            for i in 0..n {
                let mut r = -lambda * x[i + k * n];
                for j in 0..n {
                    r += t[i + j * n] * x[j + k * n];
                }
                assert!(r.norm() < 1e-12);
            }
        }
    }
}
