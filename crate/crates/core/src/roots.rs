//! Polynomial roots as eigenvalues of a balanced companion matrix.

use num_complex::Complex64;

use crate::error::{Error, Result};

const RADIX: f64 = 2.0;
const MAX_ITERATIONS: usize = 60;

/// Dense row-major square matrix.
struct Square {
    n: usize,
    a: Vec<f64>,
}

#[cfg(test)]
impl Square {
    fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }
}

impl std::ops::Index<(usize, usize)> for Square {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.a[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Square {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.a[i * self.n + j]
    }
}

/// Parlett-Reinsch balancing: diagonal similarity by powers of two until
/// every row and column pair have comparable norms. Eigenvalues are
/// preserved exactly.
fn balance(m: &mut Square) {
    let n = m.n;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut g = r / RADIX;
            let mut f = 1.0;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    m[(i, j)] *= g;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// Companion matrix of the monic polynomial with descending coefficients
/// `c[0] z^n + ... + c[n]`, in upper-Hessenberg form.
fn companion(c: &[f64]) -> Square {
    let n = c.len() - 1;
    let mut m = Square { n, a: vec![0.0; n * n] };
    for j in 0..n {
        m[(0, j)] = -c[j + 1] / c[0];
    }
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    m
}

/// Eigenvalues of an upper-Hessenberg matrix by Francis double-shift QR.
/// Only the active block is updated, since no Schur vectors are kept.
fn hessenberg_eigenvalues(mut a: Square) -> Result<Vec<Complex64>> {
    let n = a.n;
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let u = nn as usize;
            // look for a negligible subdiagonal element
            let mut l = u;
            while l >= 1 {
                let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[(l, l - 1)].abs() + s == s {
                    a[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[(u, u)];
            if l == u {
                eig[u] = Complex64::new(x + t, 0.0);
                nn -= 1;
                break;
            }
            let mut y = a[(u - 1, u - 1)];
            let mut w = a[(u, u - 1)] * a[(u - 1, u)];
            if l == u - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + z.copysign(p);
                    eig[u - 1] = Complex64::new(x + z, 0.0);
                    eig[u] = Complex64::new(if z != 0.0 { x - w / z } else { x + z }, 0.0);
                } else {
                    eig[u - 1] = Complex64::new(x + p, -z);
                    eig[u] = Complex64::new(x + p, z);
                }
                nn -= 2;
                break;
            }
            if its == MAX_ITERATIONS {
                return Err(Error::NoConvergence);
            }
            if its > 0 && its % 10 == 0 {
                // exceptional shift
                t += x;
                for i in 0..=u {
                    a[(i, i)] -= x;
                }
                let s = a[(u, u - 1)].abs() + a[(u - 1, u - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            // two consecutive small subdiagonal elements
            let (mut p, mut q, mut r);
            let mut m = u - 2;
            loop {
                let z = a[(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[(m + 1, m)] + a[(m, m + 1)];
                q = a[(m + 1, m + 1)] - z - rr - ss;
                r = a[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let uu = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                let vv = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                if uu + vv == vv {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=u {
                a[(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[(i, i - 3)] = 0.0;
                }
            }
            // double QR step on rows l..=u and columns m..=u
            for k in m..u {
                if k != m {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = if k != u - 1 { a[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        a[(k, k - 1)] = -a[(k, k - 1)];
                    }
                } else {
                    a[(k, k - 1)] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                let (rk, rest) = a.a[k * n..].split_at_mut(n);
                let (rk1, rest) = rest.split_at_mut(n);
                let (rk, rk1) = (&mut rk[k..=u], &mut rk1[k..=u]);
                if k != u - 1 {
                    let rk2 = &mut rest[k..=u];
                    for ((e0, e1), e2) in rk.iter_mut().zip(rk1.iter_mut()).zip(rk2.iter_mut()) {
                        let p = *e0 + q * *e1 + r * *e2;
                        *e2 -= p * z;
                        *e1 -= p * y;
                        *e0 -= p * x;
                    }
                } else {
                    for (e0, e1) in rk.iter_mut().zip(rk1.iter_mut()) {
                        let p = *e0 + q * *e1;
                        *e1 -= p * y;
                        *e0 -= p * x;
                    }
                }
                for i in l..=u.min(k + 3) {
                    let mut p = x * a[(i, k)] + y * a[(i, k + 1)];
                    if k != u - 1 {
                        p += z * a[(i, k + 2)];
                        a[(i, k + 2)] -= p * r;
                    }
                    a[(i, k + 1)] -= p * q;
                    a[(i, k)] -= p;
                }
            }
            if l >= u - 1 {
                break;
            }
        }
    }
    Ok(eig)
}

/// All roots of `c[0] z^n + c[1] z^{n-1} + ... + c[n]`.
///
/// Leading zeros are dropped; trailing zeros contribute exact roots at the
/// origin. The remaining roots are the eigenvalues of the balanced companion
/// matrix.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let first = coeffs
        .iter()
        .position(|&c| c != 0.0)
        .ok_or(Error::ZeroPolynomial)?;
    let last = coeffs.iter().rposition(|&c| c != 0.0).unwrap();
    let c = &coeffs[first..=last];
    let zeros_at_origin = coeffs.len() - 1 - last;
    if c.len() == 1 && zeros_at_origin == 0 {
        return Err(Error::InvalidParameter(
            "polynomial of degree 0 has no roots".into(),
        ));
    }
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
    match c.len() {
        1 => {}
        2 => roots.push(Complex64::new(-c[1] / c[0], 0.0)),
        _ => {
            let mut m = companion(c);
            balance(&mut m);
            if m.a.iter().any(|v| !v.is_finite()) {
                return Err(Error::NoConvergence);
            }
            let mut eig = hessenberg_eigenvalues(m)?;
            polish(c, &mut eig);
            roots.extend(eig);
        }
    }
    Ok(roots)
}

/// `p(z)` and `p'(z)` for descending coefficients, both scaled by the same
/// factor. Outside the unit disk the reversed polynomial is evaluated at
/// `1/z`, which keeps Horner's recurrence bounded.
fn eval_scaled(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let n = c.len() - 1;
    if z.norm() <= 1.0 {
        let mut p = Complex64::new(c[0], 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &ck in &c[1..] {
            dp = dp * z + p;
            p = p * z + ck;
        }
        (p, dp)
    } else {
        // p(z) = z^n q(w), q(w) = sum c[k] w^k, w = 1/z
        let w = 1.0 / z;
        let mut q = Complex64::new(c[n], 0.0);
        let mut dq = Complex64::new(0.0, 0.0);
        for &ck in c[..n].iter().rev() {
            dq = dq * w + q;
            q = q * w + ck;
        }
        // p'(z) / z^n = (n q(w) - w q'(w)) / z
        (q, (n as f64 * q - w * dq) * w)
    }
}

const POLISH_STEPS: usize = 8;

/// Newton refinement of eigenvalue estimates. A step is kept only when it
/// reduces the residual and stays closer to its start than to any other
/// root estimate, so neighbouring roots cannot merge.
fn polish(c: &[f64], roots: &mut [Complex64]) {
    let snapshot = roots.to_vec();
    for (i, z) in roots.iter_mut().enumerate() {
        let sep = snapshot
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, w)| (w - snapshot[i]).norm())
            .fold(f64::INFINITY, f64::min);
        for _ in 0..POLISH_STEPS {
            let (p, dp) = eval_scaled(c, *z);
            if p.norm() == 0.0 || dp.norm() == 0.0 {
                break;
            }
            let next = *z - p / dp;
            if !(next.re.is_finite() && next.im.is_finite())
                || (next - snapshot[i]).norm() > 0.5 * sep
            {
                break;
            }
            let (pn, _) = eval_scaled(c, next);
            let scale = if next.norm() > 1.0 && z.norm() <= 1.0 {
                // compare residuals on the same scale
                next.norm().powi((c.len() - 1) as i32)
            } else if next.norm() <= 1.0 && z.norm() > 1.0 {
                1.0 / z.norm().powi((c.len() - 1) as i32)
            } else {
                1.0
            };
            if !(pn.norm() * scale < p.norm()) {
                break;
            }
            let done = (next - *z).norm() <= 4.0 * f64::EPSILON * next.norm();
            *z = next;
            if done {
                break;
            }
        }
    }
}

/// Descending real coefficients of `prod (z - r)`, monic. Complex parts
/// cancel for conjugate-closed root sets and are discarded.
pub fn polynomial_from_roots(roots: &[Complex64]) -> Vec<f64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (i, &ci) in c.iter().enumerate() {
            next[i] += ci;
            next[i + 1] -= ci * r;
        }
        c = next;
    }
    c.into_iter().map(|z| z.re).collect()
}

/// Horner evaluation of descending real coefficients at `z`.
pub fn evaluate(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}
