//! Dense real-symmetric eigendecomposition (Householder reduction to
//! tridiagonal form followed by implicit QL with Wilkinson-style shifts).

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::oscbasis::{BasisConfig, HamiltonianMatrix};
use crate::scalar::Real;

const MAX_QL_SWEEPS: usize = 60;

/// Ascending energies and eigenvectors; row n of `vectors` holds d_{nk},
/// the components of eigenstate n in the basis.
#[derive(Debug, Clone)]
pub struct EigenSolution<T> {
    energies: Vec<T>,
    vectors: Matrix<T>,
    config: BasisConfig<T>,
}

impl<T: Real> EigenSolution<T> {
    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn vectors(&self) -> &Matrix<T> {
        &self.vectors
    }

    pub fn config(&self) -> &BasisConfig<T> {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Row n of d.
    pub fn vector(&self, n: usize) -> &[T] {
        self.vectors.row(n)
    }

    /// max |Σ_k d_{nk} d_{mk} − δ_{nm}|.
    pub fn orthonormality_defect(&self) -> T {
        let n = self.dim();
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..=i {
                let dot: T = self
                    .vector(i)
                    .iter()
                    .zip(self.vector(j))
                    .map(|(&a, &b)| a * b)
                    .sum();
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// max_n ‖H d_n − E_n d_n‖ / max(1, |E_n|).
    pub fn residual(&self, h: &Matrix<T>) -> T {
        let mut worst = T::zero();
        for (n, &e) in self.energies.iter().enumerate() {
            let v = self.vector(n);
            let hv = h.mul_vec(v);
            let norm = hv
                .iter()
                .zip(v)
                .map(|(&a, &b)| (a - e * b) * (a - e * b))
                .sum::<T>()
                .sqrt();
            worst = worst.max(norm / e.abs().max(T::one()));
        }
        worst
    }
}

/// Full eigendecomposition of an assembled Hamiltonian.
pub fn diagonalize<T: Real>(h: &HamiltonianMatrix<T>) -> Result<EigenSolution<T>> {
    let (energies, vectors) = symmetric_eigen(h.entries())?;
    Ok(EigenSolution {
        energies,
        vectors,
        config: *h.config(),
    })
}

/// Eigenvalues ascending and eigenvectors as rows, each row signed so its
/// largest-magnitude entry is positive.
pub fn symmetric_eigen<T: Real>(a: &Matrix<T>) -> Result<(Vec<T>, Matrix<T>)> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: a.cols(),
        });
    }
    let n = a.rows();
    if n == 0 {
        return Ok((Vec::new(), Matrix::zeros(0, 0)));
    }
    // z holds the matrix and is overwritten with the eigenvectors (columns).
    let mut z: Vec<Vec<T>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tridiagonalize(&mut z, &mut d, &mut e);
    implicit_ql(&mut d, &mut e, &mut z)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j)));
    let energies = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (row, &col) in order.iter().enumerate() {
        let mut big = T::zero();
        let mut sign = T::one();
        for k in 0..n {
            let v = z[k][col];
            if v.abs() > big {
                big = v.abs();
                sign = v.signum();
            }
        }
        for k in 0..n {
            vectors[(row, k)] = sign * z[k][col];
        }
    }
    Ok((energies, vectors))
}

/// Householder reduction; on return `d` is the diagonal, `e[1..]` the
/// sub-diagonal and `z` the accumulated orthogonal transform.
fn tridiagonalize<T: Real>(z: &mut [Vec<T>], d: &mut [T], e: &mut [T]) {
    let n = d.len();
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = T::zero();
        if l > 0 {
            let scale: T = (0..i).map(|k| z[i][k].abs()).sum();
            if scale == T::zero() {
                e[i] = z[i][l];
            } else {
                for k in 0..i {
                    z[i][k] /= scale;
                    h += z[i][k] * z[i][k];
                }
                let mut f = z[i][l];
                let g = if f >= T::zero() { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z[i][l] = f - g;
                f = T::zero();
                for j in 0..i {
                    z[j][i] = z[i][j] / h;
                    let mut g = T::zero();
                    for k in 0..=j {
                        g += z[j][k] * z[i][k];
                    }
                    for k in j + 1..i {
                        g += z[k][j] * z[i][k];
                    }
                    e[j] = g / h;
                    f += e[j] * z[i][j];
                }
                let hh = f / (h + h);
                for j in 0..i {
                    let f = z[i][j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        let zik = z[i][k];
                        z[j][k] -= f * e[k] + g * zik;
                    }
                }
            }
        } else {
            e[i] = z[i][l];
        }
        d[i] = h;
    }
    d[0] = T::zero();
    e[0] = T::zero();
    for i in 0..n {
        if d[i] != T::zero() {
            for j in 0..i {
                let mut g = T::zero();
                for k in 0..i {
                    g += z[i][k] * z[k][j];
                }
                for k in 0..i {
                    let zki = z[k][i];
                    z[k][j] -= g * zki;
                }
            }
        }
        d[i] = z[i][i];
        z[i][i] = T::one();
        for j in 0..i {
            z[j][i] = T::zero();
            z[i][j] = T::zero();
        }
    }
}

fn implicit_ql<T: Real>(d: &mut [T], e: &mut [T], z: &mut [Vec<T>]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_SWEEPS {
                return Err(Error::NonConvergence {
                    what: "implicit QL eigenvalue iteration",
                    iterations: MAX_QL_SWEEPS,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (T::two() * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + T::two() * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}
