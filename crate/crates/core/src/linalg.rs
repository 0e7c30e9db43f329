//! Eigenvalues of real upper Hessenberg matrices by the Francis double-shift
//! QR iteration with exceptional shifts after 10 and 20 stalled sweeps.

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

fn with_sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// All eigenvalues of the upper Hessenberg matrix `a` (row-major, entries
/// below the subdiagonal ignored). The matrix is overwritten.
pub fn hessenberg_eigenvalues(a: &mut [Vec<f64>]) -> Result<Vec<Complex64>> {
    let n = a.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(out);
    }
    let mut anorm = 0.0;
    for (i, row) in a.iter().enumerate() {
        for v in &row[i.saturating_sub(1)..] {
            anorm += v.abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            // deflation point
            let mut l = nu;
            while l >= 1 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nu][nu];
            if l == nu {
                out[nu] = Complex64::new(x + t, 0.0);
                nn -= 1;
                break;
            }
            let mut y = a[nu - 1][nu - 1];
            let mut w = a[nu][nu - 1] * a[nu - 1][nu];
            if l == nu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + with_sign(z, p);
                    out[nu - 1] = Complex64::new(x + z, 0.0);
                    out[nu] = Complex64::new(if z != 0.0 { x - w / z } else { x + z }, 0.0);
                } else {
                    out[nu - 1] = Complex64::new(x + p, -z);
                    out[nu] = Complex64::new(x + p, z);
                }
                nn -= 2;
                break;
            }
            if its == MAX_SWEEPS {
                return Err(Error::Numerical("Hessenberg QR did not converge".into()));
            }
            if its == 10 || its == 20 {
                t += x;
                for (i, row) in a.iter_mut().enumerate().take(nu + 1) {
                    row[i] -= x;
                }
                let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;

            // two consecutive small subdiagonal elements
            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[m][m];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - ss;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nu {
                a[i][i - 2] = 0.0;
                if i != m + 2 {
                    a[i][i - 3] = 0.0;
                }
            }

            // double-shift QR sweep on rows l..=nu
            for k in m..nu {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = if k != nu - 1 { a[k + 2][k - 1] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = with_sign((p * p + q * q + r * r).sqrt(), p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        a[k][k - 1] = -a[k][k - 1];
                    }
                } else {
                    a[k][k - 1] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=nu {
                    let mut pp = a[k][j] + q * a[k + 1][j];
                    if k != nu - 1 {
                        pp += r * a[k + 2][j];
                        a[k + 2][j] -= pp * z;
                    }
                    a[k + 1][j] -= pp * y;
                    a[k][j] -= pp * x;
                }
                let last = nu.min(k + 3);
                for row in a.iter_mut().take(last + 1).skip(l) {
                    let mut pp = x * row[k] + y * row[k + 1];
                    if k != nu - 1 {
                        pp += z * row[k + 2];
                        row[k + 2] -= pp * r;
                    }
                    row[k + 1] -= pp * q;
                    row[k] -= pp;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn triangular_and_rotation() {
        let mut a = vec![vec![1.0, 2.0], vec![0.0, 3.0]];
        let e = sorted(hessenberg_eigenvalues(&mut a).unwrap());
        assert_eq!(e, vec![Complex64::new(1.0, 0.0), Complex64::new(3.0, 0.0)]);
        let mut r = vec![vec![0.0, -1.0], vec![1.0, 0.0]];
        let e = sorted(hessenberg_eigenvalues(&mut r).unwrap());
        assert!((e[0] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((e[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn companion_with_symmetric_spectrum() {
        // x⁶ - 6x⁴ + 9x² - 16 = (x³ - 3x - 4)(x³ - 3x + 4)
        let coeffs = [-16.0, 0.0, 9.0, 0.0, -6.0, 0.0];
        let n = coeffs.len();
        let mut a = vec![vec![0.0; n]; n];
        for i in 1..n {
            a[i][i - 1] = 1.0;
        }
        for i in 0..n {
            a[i][n - 1] = -coeffs[i];
        }
        let e = hessenberg_eigenvalues(&mut a).unwrap();
        for z in e {
            let v = z.powi(6) - 6.0 * z.powi(4) + 9.0 * z * z - 16.0;
            assert!(v.norm() < 1e-10, "{z}");
        }
    }

    #[test]
    fn general_hessenberg_trace_and_determinant() {
        let mut a = vec![
            vec![4.0, 1.0, -2.0, 2.0],
            vec![1.0, 2.0, 0.0, 1.0],
            vec![0.0, 3.0, -3.0, 4.0],
            vec![0.0, 0.0, 1.5, 1.0],
        ];
        let trace = 4.0 + 2.0 - 3.0 + 1.0;
        let e = hessenberg_eigenvalues(&mut a.clone()).unwrap();
        let sum: Complex64 = e.iter().sum();
        assert!((sum.re - trace).abs() < 1e-12 && sum.im.abs() < 1e-12);
        let _ = hessenberg_eigenvalues(&mut a);
    }
}
