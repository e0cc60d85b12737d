//! Banded LU with partial pivoting and preconditioned Krylov iterations on
//! complex vectors.

use periodic_core::C64;

/// LU factorisation of a square band matrix with `kl` sub- and `kl`
/// super-diagonals, stored column-major with room for pivoting fill.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    kv: usize,
    ldab: usize,
    ab: Vec<C64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    /// Factors the matrix given by `(row, col, value)` entries (duplicates add up).
    /// Returns the column of the first exactly zero pivot on failure.
    pub fn factor(n: usize, kl: usize, entries: &[(usize, usize, C64)], pivoting: bool) -> Result<Self, usize> {
        let ku = kl;
        let kv = ku + kl;
        let ldab = 2 * kl + ku + 1;
        let mut ab = vec![C64::new(0.0, 0.0); ldab * n];
        for &(i, j, v) in entries {
            ab[kv + i - j + j * ldab] += v;
        }
        let mut ipiv = vec![0; n];
        let mut ju = 0;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let col = j * ldab;
            let mut jp = 0;
            if pivoting {
                let mut best = ab[kv + col].norm();
                for t in 1..=km {
                    let v = ab[kv + t + col].norm();
                    if v > best {
                        best = v;
                        jp = t;
                    }
                }
            }
            if ab[kv + jp + col] == C64::new(0.0, 0.0) {
                return Err(j);
            }
            ipiv[j] = j + jp;
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    ab.swap(kv + j - c + c * ldab, kv + j + jp - c + c * ldab);
                }
            }
            let p = ab[kv + col];
            for t in 1..=km {
                ab[kv + t + col] /= p;
            }
            for c in j + 1..=ju {
                let ujc = ab[kv + j - c + c * ldab];
                if ujc == C64::new(0.0, 0.0) {
                    continue;
                }
                for t in 1..=km {
                    let l = ab[kv + t + col];
                    ab[kv + j + t - c + c * ldab] -= l * ujc;
                }
            }
        }
        Ok(Self { n, kl, kv, ldab, ab, ipiv })
    }

    /// Diagonal of `U`.
    pub fn pivots(&self) -> Vec<C64> {
        (0..self.n).map(|j| self.ab[self.kv + j * self.ldab]).collect()
    }

    pub fn solve(&self, b: &mut [C64]) {
        let (n, kv, ldab) = (self.n, self.kv, self.ldab);
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let km = self.kl.min(n - 1 - j);
            let bj = b[j];
            for t in 1..=km {
                b[j + t] -= self.ab[kv + t + j * ldab] * bj;
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.ab[kv + j * ldab];
            let bj = b[j];
            for i in j.saturating_sub(kv)..j {
                b[i] -= self.ab[kv + i - j + j * ldab] * bj;
            }
        }
    }
}

pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) enum KrylovOutcome {
    Converged,
    Breakdown,
    MaxIter,
}

/// Preconditioned conjugate gradients for Hermitian positive definite `A`.
/// `x` holds the initial guess and receives the iterate.
pub(crate) fn pcg(
    apply: &dyn Fn(&[C64], &mut [C64]),
    precond: &dyn Fn(&[C64], &mut [C64]),
    b: &[C64],
    x: &mut [C64],
    target: f64,
    max_iter: usize,
) -> KrylovOutcome {
    let len = b.len();
    let mut r = vec![C64::new(0.0, 0.0); len];
    apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z = vec![C64::new(0.0, 0.0); len];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut q = vec![C64::new(0.0, 0.0); len];
    let mut rz = dot(&r, &z);
    for _ in 0..max_iter {
        if norm(&r) <= target {
            return KrylovOutcome::Converged;
        }
        apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq.re > 0.0) || !rz.re.is_finite() || rz.re <= 0.0 {
            return KrylovOutcome::Breakdown;
        }
        let alpha = rz / pq;
        for i in 0..len {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..len {
            p[i] = z[i] + beta * p[i];
        }
    }
    if norm(&r) <= target {
        KrylovOutcome::Converged
    } else {
        KrylovOutcome::MaxIter
    }
}

/// Right-preconditioned BiCGStab for general `A`.
pub(crate) fn bicgstab(
    apply: &dyn Fn(&[C64], &mut [C64]),
    precond: &dyn Fn(&[C64], &mut [C64]),
    b: &[C64],
    x: &mut [C64],
    target: f64,
    max_iter: usize,
) -> KrylovOutcome {
    let len = b.len();
    let zero = C64::new(0.0, 0.0);
    let mut r = vec![zero; len];
    apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0));
    let mut v = vec![zero; len];
    let mut p = vec![zero; len];
    let mut y = vec![zero; len];
    let mut s = vec![zero; len];
    let mut zz = vec![zero; len];
    let mut t = vec![zero; len];
    for _ in 0..max_iter {
        if norm(&r) <= target {
            return KrylovOutcome::Converged;
        }
        let rho_new = dot(&r_hat, &r);
        if rho_new.norm() == 0.0 || omega.norm() == 0.0 {
            return KrylovOutcome::Breakdown;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..len {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond(&p, &mut y);
        apply(&y, &mut v);
        let rv = dot(&r_hat, &v);
        if rv.norm() == 0.0 {
            return KrylovOutcome::Breakdown;
        }
        alpha = rho / rv;
        for i in 0..len {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) <= target {
            for i in 0..len {
                x[i] += alpha * y[i];
            }
            return KrylovOutcome::Converged;
        }
        precond(&s, &mut zz);
        apply(&zz, &mut t);
        let tt = dot(&t, &t);
        if tt.norm() == 0.0 {
            return KrylovOutcome::Breakdown;
        }
        omega = dot(&t, &s) / tt;
        for i in 0..len {
            x[i] += alpha * y[i] + omega * zz[i];
            r[i] = s[i] - omega * t[i];
        }
    }
    if norm(&r) <= target {
        KrylovOutcome::Converged
    } else {
        KrylovOutcome::MaxIter
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize, lo: C64, di: C64, up: C64) -> Vec<(usize, usize, C64)> {
        let mut e = Vec::new();
        for i in 0..n {
            e.push((i, i, di));
            if i > 0 {
                e.push((i, i - 1, lo));
            }
            if i + 1 < n {
                e.push((i, i + 1, up));
            }
        }
        e
    }

    fn matvec(n: usize, e: &[(usize, usize, C64)], x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); n];
        for &(i, j, v) in e {
            y[i] += v * x[j];
        }
        y
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [[0, 1], [1, 0]] needs a row swap
        let e = vec![(0, 1, C64::new(1.0, 0.0)), (1, 0, C64::new(1.0, 0.0))];
        assert!(BandLu::factor(2, 1, &e, false).is_err());
        let lu = BandLu::factor(2, 1, &e, true).unwrap();
        let mut b = vec![C64::new(2.0, 0.0), C64::new(3.0, 1.0)];
        lu.solve(&mut b);
        assert_eq!(b, vec![C64::new(3.0, 1.0), C64::new(2.0, 0.0)]);
    }

    #[test]
    fn complex_tridiagonal_solve() {
        let n = 50;
        let e = tridiag(n, C64::new(-1.0, 0.3), C64::new(0.5, 2.0), C64::new(-1.0, -0.7));
        let x: Vec<C64> = (0..n).map(|i| C64::new(i as f64, (i * i) as f64 * 0.01)).collect();
        let mut b = matvec(n, &e, &x);
        BandLu::factor(n, 1, &e, true).unwrap().solve(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).norm() < 1e-10);
        }
    }

    #[test]
    fn krylov_methods_agree_with_lu() {
        let n = 40;
        let e = tridiag(n, C64::new(-1.0, 0.0), C64::new(2.5, 0.0), C64::new(-1.0, 0.0));
        let b: Vec<C64> = (0..n).map(|i| C64::new((i as f64).sin(), 0.0)).collect();
        let apply = |x: &[C64], y: &mut [C64]| y.copy_from_slice(&matvec(n, &e, x));
        let id = |x: &[C64], y: &mut [C64]| y.copy_from_slice(x);
        let mut x1 = vec![C64::new(0.0, 0.0); n];
        assert!(matches!(pcg(&apply, &id, &b, &mut x1, 1e-12, 500), KrylovOutcome::Converged));
        let mut x2 = vec![C64::new(0.0, 0.0); n];
        assert!(matches!(bicgstab(&apply, &id, &b, &mut x2, 1e-12, 500), KrylovOutcome::Converged));
        let mut x3 = b.clone();
        BandLu::factor(n, 1, &e, false).unwrap().solve(&mut x3);
        for i in 0..n {
            assert!((x1[i] - x3[i]).norm() < 1e-10);
            assert!((x2[i] - x3[i]).norm() < 1e-10);
        }
    }
}
