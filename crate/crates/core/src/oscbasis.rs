//! Harmonic-oscillator basis of frequency Ω = α² and its matrix elements.
//!
//! Position powers are built from the tridiagonal ladder matrix
//! x_{n,n+1} = √(n+1)/√(2Ω) on an index range enlarged by `p` on each side,
//! multiplied `p` times and cropped, so every returned entry is exact up to
//! rounding. The closed-form finite sums for (x^p)_{nℓ} are kept as an
//! independent route.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::potential::PolynomialPotential;
use crate::scalar::Real;
use crate::special::{binomial, hermite_functions, ln_factorial};

/// Truncated basis: `dim` functions φ_center..φ_{center+dim−1} of frequency
/// `omega`, applied to the potential translated by `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisConfig<T> {
    pub dim: usize,
    pub omega: T,
    pub sigma: T,
    pub center: usize,
}

impl<T: Real> BasisConfig<T> {
    pub fn new(dim: usize, omega: T) -> Result<Self> {
        let cfg = Self {
            dim,
            omega,
            sigma: T::zero(),
            center: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_sigma(mut self, sigma: T) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_center(mut self, center: usize) -> Self {
        self.center = center;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidBasis("dimension must be at least 1".into()));
        }
        check_omega(self.omega)?;
        if !self.sigma.is_finite() {
            return Err(Error::InvalidBasis("sigma must be finite".into()));
        }
        Ok(())
    }

    /// α = √Ω.
    pub fn alpha(&self) -> T {
        self.omega.sqrt()
    }

    /// Global basis indices covered by the block.
    pub fn indices(&self) -> std::ops::Range<usize> {
        self.center..self.center + self.dim
    }
}

fn check_omega<T: Real>(omega: T) -> Result<()> {
    if !(omega > T::zero()) || !omega.is_finite() {
        return Err(Error::InvalidBasis(format!(
            "frequency must be positive and finite (got {omega})"
        )));
    }
    Ok(())
}

/// Hamiltonian matrix in a truncated oscillator basis.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix<T> {
    entries: Matrix<T>,
    config: BasisConfig<T>,
    potential: PolynomialPotential<T>,
}

impl<T: Real> HamiltonianMatrix<T> {
    pub fn entries(&self) -> &Matrix<T> {
        &self.entries
    }

    pub fn config(&self) -> &BasisConfig<T> {
        &self.config
    }

    pub fn potential(&self) -> &PolynomialPotential<T> {
        &self.potential
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn trace(&self) -> T {
        self.entries.trace()
    }

    /// Largest |n − ℓ| for which H_{nℓ} can be non-zero.
    pub fn half_bandwidth(&self) -> usize {
        self.potential.degree().max(2)
    }
}

/// Multiplies a symmetric banded `power` (half-bandwidth `band`) by the ladder
/// position matrix on global indices [lo, lo + m). Only the upper triangle is
/// computed and mirrored, so the result is exactly symmetric.
fn times_position<T: Real>(power: &Matrix<T>, band: usize, lo: usize, scale: T) -> Matrix<T> {
    let m = power.rows();
    let ladder = |j: usize| T::from_index(lo + j).sqrt() * scale; // x_{j-1,j}
    let mut out = Matrix::zeros(m, m);
    let new_band = band + 1;
    for i in 0..m {
        let jmax = (i + new_band).min(m - 1);
        for j in i..=jmax {
            let mut v = T::zero();
            if j >= 1 && (j - 1).abs_diff(i) <= band {
                v += power[(i, j - 1)] * ladder(j);
            }
            if j + 1 < m && (j + 1).abs_diff(i) <= band {
                v += power[(i, j + 1)] * ladder(j + 1);
            }
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// (x^k)_{nℓ} for k = 0..=max_power on the block [center, center + dim).
pub fn position_power_matrices<T: Real>(
    max_power: usize,
    omega: T,
    dim: usize,
    center: usize,
) -> Result<Vec<Matrix<T>>> {
    check_omega(omega)?;
    let lo = center.saturating_sub(max_power);
    let hi = center + dim + max_power;
    let m = hi - lo;
    let offset = center - lo;
    let scale = (T::two() * omega).sqrt().recip();
    let mut power = Matrix::identity(m);
    let mut out = Vec::with_capacity(max_power + 1);
    out.push(power.principal_block(offset, dim));
    for k in 1..=max_power {
        power = times_position(&power, k - 1, lo, scale);
        out.push(power.principal_block(offset, dim));
    }
    Ok(out)
}

/// Exact (x^p)_{nℓ} for n, ℓ ∈ [center, center + dim).
pub fn position_power_matrix<T: Real>(
    p: usize,
    omega: T,
    dim: usize,
    center: usize,
) -> Result<Matrix<T>> {
    Ok(position_power_matrices(p, omega, dim, center)?
        .pop()
        .expect("at least the identity"))
}

/// (p²)_{nℓ}: diagonal Ω(2n+1)/2, second off-diagonal −(Ω/2)√((n+1)(n+2)).
pub fn momentum_squared_matrix<T: Real>(omega: T, dim: usize, center: usize) -> Result<Matrix<T>> {
    check_omega(omega)?;
    let mut m = Matrix::zeros(dim, dim);
    let half_omega = omega * T::half();
    for i in 0..dim {
        let n = T::from_index(center + i);
        m[(i, i)] = half_omega * (T::two() * n + T::one());
        if i + 2 < dim {
            let v = -half_omega * ((n + T::one()) * (n + T::two())).sqrt();
            m[(i, i + 2)] = v;
            m[(i + 2, i)] = v;
        }
    }
    Ok(m)
}

/// H = ½ p² + Σ_j κ′_j x^j where κ′ are the coefficients of V(x + σ).
pub fn assemble_hamiltonian<T: Real>(
    pot: &PolynomialPotential<T>,
    cfg: &BasisConfig<T>,
) -> Result<HamiltonianMatrix<T>> {
    cfg.validate()?;
    let shifted = pot.shift(cfg.sigma);
    let powers = position_power_matrices(shifted.degree(), cfg.omega, cfg.dim, cfg.center)?;
    let mut h = Matrix::zeros(cfg.dim, cfg.dim);
    h.axpy(T::half(), &momentum_squared_matrix(cfg.omega, cfg.dim, cfg.center)?);
    for (j, &kj) in shifted.coeffs().iter().enumerate() {
        if !kj.is_zero() {
            h.axpy(kj, &powers[j]);
        }
    }
    Ok(HamiltonianMatrix {
        entries: h,
        config: *cfg,
        potential: pot.clone(),
    })
}

/// φ_n(x) = N_n e^{−α²x²/2} H_n(αx), via the normalised Hermite recurrence.
pub fn basis_function_value<T: Real>(n: usize, omega: T, x: T) -> T {
    basis_function_values(n, omega, x)[n]
}

/// φ_0(x)..φ_nmax(x).
pub fn basis_function_values<T: Real>(nmax: usize, omega: T, x: T) -> Vec<T> {
    let alpha = omega.sqrt();
    let norm = alpha.sqrt();
    let mut v = hermite_functions(nmax, alpha * x);
    for e in &mut v {
        *e *= norm;
    }
    v
}

/// Closed-form finite sum for (x^p)_{nℓ}, with d = |ℓ − n|:
///
/// √(n! ℓ!) Ω^{−p/2} Σ_k p! / (2^{p − d/2 − k} ((p−d)/2 − k)! (n−k)! (d+k)! k!)
///
/// covering both the even (p = 2r, d = 2λ) and odd (p = 2r+1, d = 2λ+1)
/// cases. The length scale is Ω^{−1/2}, fixed by (x²)₀₀ = 1/(2Ω).
pub fn position_power_element_closed_form<T: Real>(p: usize, n: usize, l: usize, omega: T) -> T {
    let (n, l) = if n <= l { (n, l) } else { (l, n) };
    let d = l - n;
    if (p + d) % 2 == 1 || d > p {
        return T::zero();
    }
    let top = (p - d) / 2;
    let ln2 = T::two().ln();
    let base: T = ln_factorial::<T>(p) + (ln_factorial::<T>(n) + ln_factorial::<T>(l)) * T::half()
        - T::from_index(p) * T::half() * omega.ln();
    let mut sum = T::zero();
    for k in 0..=top.min(n) {
        let pow2 = T::from_index(p) - T::from_index(d) * T::half() - T::from_index(k);
        let ln_term = base
            - pow2 * ln2
            - ln_factorial::<T>(top - k)
            - ln_factorial::<T>(n - k)
            - ln_factorial::<T>(d + k)
            - ln_factorial::<T>(k);
        sum += ln_term.exp();
    }
    sum
}

/// (x^p)_{nn} at Ω = 1, as Σ_k p! C(n,k) / (2^{p−k} (p/2 − k)! k!).
/// Zero for odd p.
pub fn diagonal_moment<T: Real>(p: usize, n: usize) -> T {
    if p % 2 == 1 {
        return T::zero();
    }
    let r = p / 2;
    let pf: T = (1..=p).map(T::from_index).fold(T::one(), |a, b| a * b);
    let mut sum = T::zero();
    for k in 0..=r.min(n) {
        let rk: T = (1..=r - k).map(T::from_index).fold(T::one(), |a, b| a * b);
        let kf: T = (1..=k).map(T::from_index).fold(T::one(), |a, b| a * b);
        sum += pf * binomial::<T>(n, k) / (T::two().powi((p - k) as i32) * rk * kf);
    }
    sum
}
