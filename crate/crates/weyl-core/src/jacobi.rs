//! Cyclic Jacobi diagonalization for dense Hermitian matrices. This is the
//! ingestion path for matrix data: spectra come out sorted together with the
//! accumulated unitary, and the reconstruction residual is checkable.

use num_complex::Complex;
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum JacobiError {
    #[error("matrix is not Hermitian: max |H - H*| entry is {max_asymmetry}")]
    NotHermitian { max_asymmetry: f64 },
    #[error("no convergence after {sweeps} sweeps; off-diagonal mass {residual}")]
    NoConvergence { sweeps: usize, residual: f64 },
    #[error("dimension {n} exceeds the supported maximum of 512")]
    TooLarge { n: usize },
    #[error("matrix data is not square: {len} entries")]
    NotSquare { len: usize },
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix<F> {
    n: usize,
    data: Vec<Complex<F>>,
}

impl<F: Real> ComplexMatrix<F> {
    pub fn zeros(n: usize) -> Self {
        ComplexMatrix {
            n,
            data: vec![Complex::new(F::zero(), F::zero()); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, Complex::new(F::one(), F::zero()));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex<F>>>) -> Result<Self, JacobiError> {
        let n = rows.len();
        let data: Vec<Complex<F>> = rows.into_iter().flatten().collect();
        if data.len() != n * n {
            return Err(JacobiError::NotSquare { len: data.len() });
        }
        Ok(ComplexMatrix { n, data })
    }

    pub fn from_real(rows: &[Vec<F>]) -> Result<Self, JacobiError> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|x| Complex::new(*x, F::zero())).collect())
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<F> {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex<F>) {
        self.data[i * self.n + j] = v;
    }

    pub fn frobenius_norm(&self) -> F {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(F::zero(), |a, b| a + b)
            .sqrt()
    }

    pub fn max_asymmetry(&self) -> F {
        let mut worst = F::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    fn off_diagonal_norm(&self) -> F {
        let mut sum = F::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    sum = sum + self.get(i, j).norm_sqr();
                }
            }
        }
        sum.sqrt()
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.norm_sqr() == F::zero() {
                    continue;
                }
                for j in 0..n {
                    out.set(i, j, out.get(i, j) + a * other.get(k, j));
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }
}

/// `|| U diag(eigs) U* - H ||_F / max(||H||_F, 1)`.
pub fn reconstruction_residual<F: Real>(
    h: &ComplexMatrix<F>,
    eigenvalues: &[F],
    transform: &ComplexMatrix<F>,
) -> F {
    let n = h.dim();
    let mut scaled = transform.clone();
    for j in 0..n {
        for i in 0..n {
            scaled.set(i, j, scaled.get(i, j) * eigenvalues[j]);
        }
    }
    let rebuilt = scaled.mul(&transform.adjoint());
    let mut diff = F::zero();
    for i in 0..n {
        for j in 0..n {
            diff = diff + (rebuilt.get(i, j) - h.get(i, j)).norm_sqr();
        }
    }
    diff.sqrt() / h.frobenius_norm().max(F::one())
}

/// Union of Gershgorin discs as `(center, radius)` pairs; every eigenvalue
/// lies in some disc.
pub fn gershgorin_discs<F: Real>(h: &ComplexMatrix<F>) -> Vec<(F, F)> {
    let n = h.dim();
    (0..n)
        .map(|i| {
            let center = h.get(i, i).re;
            let radius = (0..n)
                .filter(|j| *j != i)
                .map(|j| h.get(i, j).norm())
                .fold(F::zero(), |a, b| a + b);
            (center, radius)
        })
        .collect()
}

const MAX_SWEEPS: usize = 60;

/// Diagonalizes a Hermitian matrix by cyclic Jacobi rotations, sweeping until
/// the off-diagonal Frobenius mass drops below `tol` relative to `||H||_F`.
/// Returns the eigenvalues sorted ascending and the accumulated unitary with
/// matching column order, so `U diag(eigs) U* ~ H`.
pub fn jacobi_diagonalize<F: Real>(
    h: &ComplexMatrix<F>,
    tol: F,
) -> Result<(Vec<F>, ComplexMatrix<F>), JacobiError> {
    let n = h.dim();
    if n > 512 {
        return Err(JacobiError::TooLarge { n });
    }
    let scale = h.frobenius_norm().max(F::one());
    let asym = h.max_asymmetry();
    if asym > tol * scale {
        return Err(JacobiError::NotHermitian {
            max_asymmetry: asym.as_f64(),
        });
    }
    if n == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0)));
    }

    // Work on the Hermitian average so the iteration sees an exactly
    // Hermitian matrix whatever the input rounding.
    let mut a = ComplexMatrix::zeros(n);
    let half = F::of(0.5);
    for i in 0..n {
        for j in 0..n {
            let v = (h.get(i, j) + h.get(j, i).conj()) * half;
            a.set(i, j, v);
        }
    }
    for i in 0..n {
        let d = a.get(i, i);
        a.set(i, i, Complex::new(d.re, F::zero()));
    }
    let mut u = ComplexMatrix::identity(n);
    let threshold = tol * scale;

    for _sweep in 0..MAX_SWEEPS {
        if a.off_diagonal_norm() <= threshold {
            return Ok(finish(a, u));
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let g = a.get(p, q);
                let m = g.norm();
                if m == F::zero() {
                    continue;
                }
                let phase = g / m;
                let alpha = a.get(p, p).re;
                let beta = a.get(q, q).re;
                let tau = (beta - alpha) / (F::of(2.0) * m);
                // Smaller root of t^2 - 2 tau t - 1 = 0.
                let t = if tau >= F::zero() {
                    -F::one() / (tau + (F::one() + tau * tau).sqrt())
                } else {
                    F::one() / (-tau + (F::one() + tau * tau).sqrt())
                };
                let c = F::one() / (F::one() + t * t).sqrt();
                let s = t * c;

                let cs = Complex::new(c, F::zero());
                let sp = phase * s; // s * e^{i phi}
                let sm = phase.conj() * s; // s * e^{-i phi}

                // Rows p and q of A (columns follow by Hermitian symmetry).
                for j in 0..n {
                    if j == p || j == q {
                        continue;
                    }
                    let apj = a.get(p, j);
                    let aqj = a.get(q, j);
                    let new_pj = cs * apj + sp * aqj;
                    let new_qj = cs * aqj - sm * apj;
                    a.set(p, j, new_pj);
                    a.set(q, j, new_qj);
                    a.set(j, p, new_pj.conj());
                    a.set(j, q, new_qj.conj());
                }
                let two = F::of(2.0);
                let new_pp = alpha * c * c + two * m * s * c + beta * s * s;
                let new_qq = alpha * s * s - two * m * s * c + beta * c * c;
                a.set(p, p, Complex::new(new_pp, F::zero()));
                a.set(q, q, Complex::new(new_qq, F::zero()));
                a.set(p, q, Complex::new(F::zero(), F::zero()));
                a.set(q, p, Complex::new(F::zero(), F::zero()));

                // U <- U R.
                for i in 0..n {
                    let uip = u.get(i, p);
                    let uiq = u.get(i, q);
                    u.set(i, p, cs * uip + sm * uiq);
                    u.set(i, q, cs * uiq - sp * uip);
                }
            }
        }
    }

    Err(JacobiError::NoConvergence {
        sweeps: MAX_SWEEPS,
        residual: a.off_diagonal_norm().as_f64(),
    })
}

fn finish<F: Real>(a: ComplexMatrix<F>, u: ComplexMatrix<F>) -> (Vec<F>, ComplexMatrix<F>) {
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.get(i, i)
            .re
            .partial_cmp(&a.get(j, j).re)
            .expect("real diagonal")
    });
    let eigenvalues = order.iter().map(|&i| a.get(i, i).re).collect();
    let mut sorted_u = ComplexMatrix::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..n {
            sorted_u.set(i, new_col, u.get(i, old_col));
        }
    }
    (eigenvalues, sorted_u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unitary_defect(u: &ComplexMatrix<f64>) -> f64 {
        let n = u.dim();
        let prod = u.adjoint().mul(u);
        let mut diff = 0.0;
        for i in 0..n {
            for j in 0..n {
                let expect = if i == j { 1.0 } else { 0.0 };
                diff += (prod.get(i, j) - Complex::new(expect, 0.0)).norm_sqr();
            }
        }
        diff.sqrt()
    }

    #[test]
    fn diagonal_input_sorts() {
        let h = ComplexMatrix::from_real(&[
            vec![3.0f64, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
        ])
        .unwrap();
        let (eigs, u) = jacobi_diagonalize(&h, 1e-13).unwrap();
        assert_eq!(eigs, vec![1.0, 2.0, 3.0]);
        // The transform is the sorting permutation.
        assert_eq!(u.get(1, 0), Complex::new(1.0, 0.0));
        assert_eq!(u.get(2, 1), Complex::new(1.0, 0.0));
        assert_eq!(u.get(0, 2), Complex::new(1.0, 0.0));
    }

    #[test]
    fn pauli_x() {
        let h = ComplexMatrix::from_real(&[vec![0.0f64, 1.0], vec![1.0, 0.0]]).unwrap();
        let (eigs, u) = jacobi_diagonalize(&h, 1e-13).unwrap();
        assert!((eigs[0] + 1.0).abs() < 1e-14);
        assert!((eigs[1] - 1.0).abs() < 1e-14);
        assert!(reconstruction_residual(&h, &eigs, &u) < 1e-14);
    }

    #[test]
    fn complex_hermitian_two_by_two() {
        let h = ComplexMatrix::from_rows(vec![
            vec![Complex::new(2.0f64, 0.0), Complex::new(0.0, 1.0)],
            vec![Complex::new(0.0, -1.0), Complex::new(2.0, 0.0)],
        ])
        .unwrap();
        let (eigs, u) = jacobi_diagonalize(&h, 1e-13).unwrap();
        assert!((eigs[0] - 1.0).abs() < 1e-14);
        assert!((eigs[1] - 3.0).abs() < 1e-14);
        assert!(reconstruction_residual(&h, &eigs, &u) < 1e-14);
        assert!(unitary_defect(&u) < 1e-14);
    }

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix<f64> {
        // Splitmix-style generator keeps the test free of extra deps.
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            ((z ^ (z >> 31)) as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        let mut g = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                g.set(i, j, Complex::new(next(), next()));
            }
        }
        let mut h = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                h.set(i, j, (g.get(i, j) + g.get(j, i).conj()) * 0.5);
            }
        }
        h
    }

    #[test]
    fn random_hermitian_reconstructs() {
        for seed in 0..20 {
            let h = random_hermitian(16, 1000 + seed);
            let (eigs, u) = jacobi_diagonalize(&h, 1e-13).unwrap();
            let res = reconstruction_residual(&h, &eigs, &u);
            assert!(res < 1e-12, "seed {seed}: residual {res}");
            assert!(unitary_defect(&u) < 1e-12);

            let discs = gershgorin_discs(&h);
            for e in &eigs {
                assert!(
                    discs.iter().any(|(c, r)| (e - c).abs() <= r + 1e-12),
                    "eigenvalue {e} escapes the Gershgorin union"
                );
            }
        }
    }

    #[test]
    fn not_hermitian_rejected() {
        let h = ComplexMatrix::from_real(&[vec![0.0f64, 1.0], vec![2.0, 0.0]]).unwrap();
        assert!(matches!(
            jacobi_diagonalize(&h, 1e-13),
            Err(JacobiError::NotHermitian { .. })
        ));
    }

    #[test]
    fn oversized_rejected() {
        let h = ComplexMatrix::<f64>::zeros(513);
        assert!(matches!(
            jacobi_diagonalize(&h, 1e-13),
            Err(JacobiError::TooLarge { n: 513 })
        ));
    }
}
