//! Method of stationary states: project an initial wave function on the
//! basis, rotate into the eigenbasis and attach phases e^{−iE_n t}.

use num_complex::Complex;
use rayon::prelude::*;

use crate::eigen::EigenSolution;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::oscbasis::{basis_function_values, position_power_matrix, BasisConfig};
use crate::quadrature::GaussHermite;
use crate::scalar::Real;
use crate::special::{hermite_functions, ln_factorial, ln_gamma};

/// Modes with |a_n| below this are left out of the double sums. The
/// neglected part of ⟨O⟩ is at most 2·Σ_dropped|a_n|·Σ|a_n|·‖O‖.
pub const MODE_CUTOFF: f64 = 1e-14;

/// Floor of the accepted ‖DᵀD − I‖; raised to 100·ε·N for short floats.
const ORTHONORMALITY_LIMIT: f64 = 1e-8;
const TAIL_LIMIT: f64 = 1e-6;

/// Ψ(x, 0) = (w/2π)^{1/4} e^{−w(x−x₀)²/4}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialGaussian<T> {
    pub width: T,
    pub x0: T,
}

impl<T: Real> InitialGaussian<T> {
    pub fn new(width: T, x0: T) -> Result<Self> {
        if !(width > T::zero()) || !width.is_finite() || !x0.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "Gaussian needs width > 0 and finite centre (got width={width}, x0={x0})"
            )));
        }
        Ok(Self { width, x0 })
    }

    pub fn centered(width: T) -> Result<Self> {
        Self::new(width, T::zero())
    }

    pub fn evaluate(&self, x: T) -> T {
        let d = x - self.x0;
        (self.width / (T::two() * T::PI())).powf(T::lit(0.25))
            * (-self.width * d * d / T::lit(4.0)).exp()
    }

    /// ⟨x²⟩ of the packet, x₀² + 1/w.
    pub fn second_moment(&self) -> T {
        self.x0 * self.x0 + self.width.recip()
    }
}

fn require_origin_basis<T: Real>(basis: &BasisConfig<T>) -> Result<()> {
    basis.validate()?;
    if basis.sigma != T::zero() || basis.center != 0 {
        return Err(Error::UnsupportedBasis);
    }
    Ok(())
}

/// c_n for a Gaussian centred at the origin. Odd coefficients vanish and
///
/// c_{2ℓ} = (w/2π)^{1/4} π^{1/4} α^{1/2} (√2/β) r_ℓ (q − 1)^ℓ,
///
/// with β² = w/2 + α², q = 2α²/β², r_ℓ = √((2ℓ)!)/(2^ℓ ℓ!).
pub fn project_centered_gaussian<T: Real>(
    g: &InitialGaussian<T>,
    basis: &BasisConfig<T>,
) -> Result<Vec<T>> {
    require_origin_basis(basis)?;
    if g.x0 != T::zero() {
        return Err(Error::InvalidArgument("centred projection needs x0 = 0".into()));
    }
    let alpha2 = basis.omega;
    let beta2 = g.width * T::half() + alpha2;
    let q = T::two() * alpha2 / beta2;
    let mut term = (g.width / (T::two() * T::PI())).powf(T::lit(0.25))
        * T::PI().powf(T::lit(0.25))
        * alpha2.sqrt().sqrt()
        * T::two().sqrt()
        / beta2.sqrt();
    let mut c = vec![T::zero(); basis.dim];
    for (l, slot) in c.iter_mut().step_by(2).enumerate() {
        *slot = term;
        let l = T::from_index(l);
        term *= ((T::two() * l + T::one()) / (T::two() * l + T::two())).sqrt() * (q - T::one());
    }
    Ok(c)
}

/// c_n for a Gaussian centred at x₀, from the generating function of the
/// Hermite polynomials: c_n = A g_n with
///
/// g₀ = 1, g_{n+1} = w √(2/(n+1)) g_n − ε √(n/(n+1)) g_{n−1},
///
/// w = (α/β)(μx₀/2β), ε = 1 − 2α²/β², β² = μ/2 + α²,
/// A = (μ/2π)^{1/4} π^{−1/4} α^{1/2} √(2π)/β · e^{−μx₀²α²/4β²}.
pub fn project_shifted_gaussian<T: Real>(
    g: &InitialGaussian<T>,
    basis: &BasisConfig<T>,
) -> Result<Vec<T>> {
    require_origin_basis(basis)?;
    let alpha2 = basis.omega;
    let alpha = alpha2.sqrt();
    let beta2 = g.width * T::half() + alpha2;
    let beta = beta2.sqrt();
    let eps = T::one() - T::two() * alpha2 / beta2;
    let w = (alpha / beta) * (g.width * g.x0 / (T::two() * beta));
    let amp = (g.width / (T::two() * T::PI())).powf(T::lit(0.25))
        * T::PI().powf(T::lit(-0.25))
        * alpha.sqrt()
        * (T::two() * T::PI()).sqrt()
        / beta
        * (-g.width * g.x0 * g.x0 * alpha2 / (T::lit(4.0) * beta2)).exp();
    let mut c = Vec::with_capacity(basis.dim);
    let (mut prev, mut cur) = (T::zero(), T::one());
    for n in 0..basis.dim {
        c.push(amp * cur);
        let nf = T::from_index(n);
        let next = w * (T::two() / (nf + T::one())).sqrt() * cur
            - eps * (nf / (nf + T::one())).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    Ok(c)
}

/// Term-by-term alternating sum for c_{2ℓ} of the centred Gaussian. Loses
/// all precision by 2ℓ ≈ 60 for generic Ω; kept for cross-checks.
pub fn project_centered_gaussian_series<T: Real>(
    g: &InitialGaussian<T>,
    basis: &BasisConfig<T>,
) -> Result<Vec<T>> {
    require_origin_basis(basis)?;
    let alpha = basis.alpha();
    let beta = (g.width * T::half() + basis.omega).sqrt();
    let ratio = T::two().sqrt() * alpha / beta;
    let pre = (g.width / (T::two() * T::PI())).powf(T::lit(0.25)) / alpha;
    let mut c = vec![T::zero(); basis.dim];
    for n in (0..basis.dim).step_by(2) {
        let l = n / 2;
        let mut sum = T::zero();
        for k in 0..=l {
            let e = l - k;
            let ln_mag = ln_factorial::<T>(n) - ln_factorial::<T>(2 * e) - ln_factorial::<T>(k)
                + T::from_index(2 * e) * T::two().ln()
                + T::from_index(2 * e + 1) * ratio.ln()
                + ln_gamma(T::from_index(e) + T::half());
            let sign = if k % 2 == 0 { T::one() } else { -T::one() };
            sum += sign * ln_mag.exp();
        }
        c[n] = pre * normalisation(n, alpha) * sum;
    }
    Ok(c)
}

/// Term-by-term double sum for the shifted Gaussian, with the even moments
/// K_{2j} = 2^{j+½} Γ(j+½). Same precision caveat as the centred series.
pub fn project_shifted_gaussian_series<T: Real>(
    g: &InitialGaussian<T>,
    basis: &BasisConfig<T>,
) -> Result<Vec<T>> {
    require_origin_basis(basis)?;
    let alpha = basis.alpha();
    let beta2 = g.width * T::half() + basis.omega;
    let beta = beta2.sqrt();
    let ab = alpha / beta;
    let shift = g.width * g.x0 / (T::two() * beta);
    let pre = (g.width / (T::two() * T::PI())).powf(T::lit(0.25)) / beta
        * (-g.width * g.x0 * g.x0 * basis.omega / (T::lit(4.0) * beta2)).exp();
    let mut c = Vec::with_capacity(basis.dim);
    for n in 0..basis.dim {
        let mut sum = T::zero();
        for k in 0..=n / 2 {
            for j in 0..=(n / 2 - k) {
                let rest = n - 2 * k - 2 * j;
                let mag = (ln_factorial::<T>(n)
                    - ln_factorial::<T>(k)
                    - ln_factorial::<T>(2 * j)
                    - ln_factorial::<T>(rest)
                    + T::from_index(n - 2 * k) * T::two().ln()
                    + ln_gamma(T::from_index(j) + T::half()))
                .exp()
                    * ab.powi((n - 2 * k) as i32)
                    * shift.powi(rest as i32)
                    * T::two().sqrt().powi((2 * j + 1) as i32);
                sum += if k % 2 == 0 { mag } else { -mag };
            }
        }
        c.push(pre * normalisation(n, alpha) * sum);
    }
    Ok(c)
}

/// N_n = (α/(2ⁿ n! √π))^{1/2}.
fn normalisation<T: Real>(n: usize, alpha: T) -> T {
    (T::half()
        * (alpha.ln()
            - T::from_index(n) * T::two().ln()
            - ln_factorial::<T>(n)
            - T::half() * T::PI().ln()))
    .exp()
}

/// c_k = ∫ φ_k(x − σ) ψ₀(x) dx by Gauss–Hermite quadrature whose weight
/// e^{−t²} matches the basis exponent (t = αy/√2). Default node count is
/// N + center + 40. No resolution check.
pub fn quadrature_coefficients<T: Real>(
    psi0: impl Fn(T) -> T + Sync,
    basis: &BasisConfig<T>,
    n_nodes: Option<usize>,
) -> Result<Vec<T>> {
    basis.validate()?;
    let top = basis.center + basis.dim;
    let rule = GaussHermite::<T>::new(n_nodes.unwrap_or(top + 40))?;
    let alpha = basis.alpha();
    let root2 = T::two().sqrt();
    let parts: Vec<Vec<T>> = rule
        .nodes()
        .par_iter()
        .zip(rule.scaled_weights().par_iter())
        .map(|(&t, &wt)| {
            let y = root2 * t;
            let f = psi0(basis.sigma + y / alpha);
            let psi = hermite_functions(top - 1, y);
            psi[basis.center..top].iter().map(|&p| wt * p * f).collect()
        })
        .collect();
    let scale = (T::two() / alpha).sqrt();
    let mut c = vec![T::zero(); basis.dim];
    for part in &parts {
        for (ci, &v) in c.iter_mut().zip(part) {
            *ci += v;
        }
    }
    for ci in &mut c {
        *ci *= scale;
    }
    Ok(c)
}

/// Quadrature projection that refuses a basis whose last coefficient still
/// carries weight |c_{N−1}|² > 1e-6.
pub fn project_by_quadrature<T: Real>(
    psi0: impl Fn(T) -> T + Sync,
    basis: &BasisConfig<T>,
    n_nodes: Option<usize>,
) -> Result<Vec<T>> {
    let c = quadrature_coefficients(psi0, basis, n_nodes)?;
    let tail = c.last().map_or(0.0, |&v| (v * v).to_f64_lossy());
    if tail > TAIL_LIMIT {
        return Err(Error::UnderResolved { tail });
    }
    Ok(c)
}

/// ⟨x⟩, ⟨x²⟩ and ⟨x²⟩^{1/2} at time t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables<T> {
    pub t: T,
    pub x_mean: T,
    pub x2_mean: T,
    pub sqrt_x2: T,
}

/// Eigenbasis amplitudes a_n with precomputed observable matrices.
#[derive(Debug, Clone)]
pub struct EvolutionState<T> {
    a: Vec<T>,
    energies: Vec<T>,
    vectors: Matrix<T>,
    basis: BasisConfig<T>,
    truncation_loss: T,
    active: Vec<usize>,
    mx: Matrix<T>,
    mx2: Matrix<T>,
}

/// a_n = Σ_k d_{nk} c_k. Rows of d are orthonormal, so this is the printed
/// Σ_ℓ c_ℓ (d^{−1})_{ℓn}.
pub fn make_evolution<T: Real>(c: &[T], sol: &EigenSolution<T>) -> Result<EvolutionState<T>> {
    if c.len() != sol.dim() {
        return Err(Error::DimensionMismatch {
            expected: sol.dim(),
            got: c.len(),
        });
    }
    let defect = sol.orthonormality_defect();
    let limit = ORTHONORMALITY_LIMIT.max(100.0 * T::epsilon().to_f64_lossy() * sol.energies().len() as f64);
    if !(defect.to_f64_lossy() <= limit) {
        return Err(Error::NotOrthonormal {
            defect: defect.to_f64_lossy(),
        });
    }
    let d = sol.vectors();
    let a = d.mul_vec(c);
    let norm: T = a.iter().map(|&v| v * v).sum();
    let cutoff = T::lit(MODE_CUTOFF);
    let active: Vec<usize> = (0..a.len()).filter(|&n| a[n].abs() >= cutoff).collect();
    let cfg = *sol.config();
    let project = |op: &Matrix<T>| -> Matrix<T> {
        // rows of d restricted to active modes: M = D O Dᵀ
        let dk = Matrix::from_fn(active.len(), cfg.dim, |i, k| d[(active[i], k)]);
        dk.matmul(op).matmul(&dk.transpose())
    };
    let x1 = position_power_matrix(1, cfg.omega, cfg.dim, cfg.center)?;
    let x2 = position_power_matrix(2, cfg.omega, cfg.dim, cfg.center)?;
    Ok(EvolutionState {
        mx: project(&x1),
        mx2: project(&x2),
        truncation_loss: T::one() - norm,
        a,
        energies: sol.energies().to_vec(),
        vectors: d.clone(),
        basis: cfg,
        active,
    })
}

impl<T: Real> EvolutionState<T> {
    /// a_n at t = 0 (real for real initial data).
    pub fn a(&self) -> &[T] {
        &self.a
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn vectors(&self) -> &Matrix<T> {
        &self.vectors
    }

    pub fn basis(&self) -> &BasisConfig<T> {
        &self.basis
    }

    /// 1 − Σ|a_n|².
    pub fn truncation_loss(&self) -> T {
        self.truncation_loss
    }

    /// Indices of the modes kept in the double sums.
    pub fn active_modes(&self) -> &[usize] {
        &self.active
    }

    /// b_n(t) = a_n e^{−iE_n t} over every mode.
    pub fn amplitudes(&self, t: T) -> Vec<Complex<T>> {
        self.a
            .iter()
            .zip(&self.energies)
            .map(|(&a, &e)| Complex::from_polar(a, -e * t))
            .collect()
    }

    fn active_amplitudes(&self, t: T) -> Vec<Complex<T>> {
        self.active
            .iter()
            .map(|&n| Complex::from_polar(self.a[n], -self.energies[n] * t))
            .collect()
    }

    /// Σ|b_n(t)|².
    pub fn norm(&self, t: T) -> T {
        self.amplitudes(t).iter().map(|b| b.norm_sqr()).sum()
    }

    /// Σ|b_n(t)|² E_n.
    pub fn energy(&self, t: T) -> T {
        self.amplitudes(t)
            .iter()
            .zip(&self.energies)
            .map(|(b, &e)| b.norm_sqr() * e)
            .sum()
    }

    fn quadratic_form(m: &Matrix<T>, b: &[Complex<T>]) -> T {
        let mut total = T::zero();
        for (i, bi) in b.iter().enumerate() {
            let row = m.row(i);
            let mut acc = Complex::new(T::zero(), T::zero());
            for (&mij, bj) in row.iter().zip(b) {
                acc = acc + bj * mij;
            }
            total += (bi.conj() * acc).re;
        }
        total
    }

    /// ⟨y⟩ and ⟨y²⟩ in the basis coordinate y = x − σ.
    fn basis_moments(&self, t: T) -> (T, T) {
        let b = self.active_amplitudes(t);
        (Self::quadratic_form(&self.mx, &b), Self::quadratic_form(&self.mx2, &b))
    }

    fn active_norm(&self) -> T {
        self.active.iter().map(|&n| self.a[n] * self.a[n]).sum()
    }

    pub fn expectation_x(&self, t: T) -> T {
        let (y, _) = self.basis_moments(t);
        y + self.basis.sigma * self.active_norm()
    }

    pub fn expectation_x2(&self, t: T) -> T {
        let (y, y2) = self.basis_moments(t);
        let s = self.basis.sigma;
        y2 + T::two() * s * y + s * s * self.active_norm()
    }

    pub fn observables(&self, t: T) -> Observables<T> {
        let (y, y2) = self.basis_moments(t);
        let s = self.basis.sigma;
        let norm = self.active_norm();
        let x2 = y2 + T::two() * s * y + s * s * norm;
        Observables {
            t,
            x_mean: y + s * norm,
            x2_mean: x2,
            sqrt_x2: x2.max(T::zero()).sqrt(),
        }
    }

    /// Observables at every time, in input order.
    pub fn time_series(&self, times: &[T]) -> Vec<Observables<T>> {
        times.par_iter().map(|&t| self.observables(t)).collect()
    }

    /// Ψ(x, t) = Σ_n b_n(t) Σ_k d_{nk} φ_k(x − σ).
    pub fn wavefunction_at(&self, x: T, t: T) -> Complex<T> {
        let cfg = &self.basis;
        let phi = basis_function_values(cfg.center + cfg.dim - 1, cfg.omega, x - cfg.sigma);
        let phi = &phi[cfg.center..];
        let mut psi = Complex::new(T::zero(), T::zero());
        for (&n, b) in self.active.iter().zip(self.active_amplitudes(t)) {
            let u: T = self.vectors.row(n).iter().zip(phi).map(|(&d, &p)| d * p).sum();
            psi = psi + b * u;
        }
        psi
    }
}
