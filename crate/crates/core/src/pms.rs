//! Truncated trace 𝒯_N(Ω, σ) = Σ_n H_nn and its stationary point.
//!
//! Only diagonal elements enter, so the trace is the closed function
//!
//! 𝒯 = Ω Σ(2n+1)/4 + Σ_{j even} κ′_j(σ) S_j Ω^{−j/2},  S_j = Σ_n (x^j)_nn|_{Ω=1},
//!
//! which gives exact gradients and Hessians in (ln Ω, σ).

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optimize::{golden_section, nelder_mead};
use crate::oscbasis::{diagonal_moment, BasisConfig};
use crate::potential::{shifted_coeffs, PolynomialPotential};
use crate::scalar::Real;

/// Which diagonal elements the trace runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceSpan {
    /// The N diagonal elements of the block.
    #[default]
    Dimension,
    /// N + 1 elements, one past the block edge.
    DimensionPlusOne,
}

impl TraceSpan {
    pub fn len(self, dim: usize) -> usize {
        match self {
            TraceSpan::Dimension => dim,
            TraceSpan::DimensionPlusOne => dim + 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmsOptions<T> {
    pub optimize_sigma: bool,
    /// Starting guess (Ω₀, σ₀).
    pub init: Option<(T, T)>,
    pub trace_span: TraceSpan,
    /// First basis index of the block.
    pub center: usize,
    /// Bracket width in ln Ω at which golden section stops.
    pub omega_tol: T,
    /// Simplex diameter at which Nelder–Mead stops.
    pub simplex_tol: T,
    pub max_iter_1d: usize,
    pub max_iter_2d: usize,
    /// Largest accepted gradient norm, relative to max(1, |𝒯|).
    pub stationarity_tol: T,
}

impl<T: Real> Default for PmsOptions<T> {
    fn default() -> Self {
        Self {
            optimize_sigma: false,
            init: None,
            trace_span: TraceSpan::Dimension,
            center: 0,
            omega_tol: T::lit(1e-10),
            simplex_tol: T::lit(1e-8),
            max_iter_1d: 200,
            max_iter_2d: 2000,
            stationarity_tol: T::lit(1e-7).max(T::lit(100.0) * T::epsilon()),
        }
    }
}

impl<T: Real> PmsOptions<T> {
    pub fn with_sigma(mut self, on: bool) -> Self {
        self.optimize_sigma = on;
        self
    }

    pub fn with_span(mut self, span: TraceSpan) -> Self {
        self.trace_span = span;
        self
    }

    pub fn with_center(mut self, center: usize) -> Self {
        self.center = center;
        self
    }

    pub fn with_init(mut self, omega: T, sigma: T) -> Self {
        self.init = Some((omega, sigma));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmsResult<T> {
    pub omega: T,
    pub sigma: T,
    pub trace_value: T,
    /// Norm of the gradient of 𝒯 in (ln Ω, σ) (ln Ω only when σ is frozen).
    pub stationarity_residual: T,
}

/// Analytic model of the truncated trace for one potential and block.
#[derive(Debug, Clone)]
pub struct TraceModel<T> {
    coeffs: Vec<T>,
    kinetic: T,
    moments: Vec<T>,
}

impl<T: Real> TraceModel<T> {
    /// Trace over basis indices center..center+len.
    pub fn new(pot: &PolynomialPotential<T>, len: usize, center: usize) -> Self {
        let coeffs = pot.coeffs().to_vec();
        let kinetic = (center..center + len)
            .map(|n| (T::two() * T::from_index(n) + T::one()) / T::lit(4.0))
            .sum();
        let moments = (0..coeffs.len())
            .map(|j| {
                if j % 2 == 1 {
                    T::zero()
                } else {
                    (center..center + len).map(|n| diagonal_moment::<T>(j, n)).sum()
                }
            })
            .collect();
        Self {
            coeffs,
            kinetic,
            moments,
        }
    }

    pub fn value(&self, omega: T, sigma: T) -> T {
        self.value_log(omega.ln(), sigma)
    }

    /// 𝒯 as a function of u = ln Ω.
    pub fn value_log(&self, u: T, sigma: T) -> T {
        let k = shifted_coeffs(&self.coeffs, sigma);
        let mut t = self.kinetic * u.exp();
        for j in (0..k.len()).step_by(2) {
            t += k[j] * self.moments[j] * self.scale(j, u);
        }
        t
    }

    /// (∂𝒯/∂u, ∂𝒯/∂σ).
    pub fn gradient_log(&self, u: T, sigma: T) -> [T; 2] {
        let k = shifted_coeffs(&self.coeffs, sigma);
        let mut gu = self.kinetic * u.exp();
        let mut gs = T::zero();
        for j in (0..k.len()).step_by(2) {
            let w = self.moments[j] * self.scale(j, u);
            gu -= k[j] * w * T::from_index(j) * T::half();
            gs += Self::dk(&k, j, 1) * w;
        }
        [gu, gs]
    }

    /// Hessian in (u, σ).
    pub fn hessian_log(&self, u: T, sigma: T) -> [[T; 2]; 2] {
        let k = shifted_coeffs(&self.coeffs, sigma);
        let mut huu = self.kinetic * u.exp();
        let mut hus = T::zero();
        let mut hss = T::zero();
        for j in (0..k.len()).step_by(2) {
            let w = self.moments[j] * self.scale(j, u);
            let hj = T::from_index(j) * T::half();
            huu += k[j] * w * hj * hj;
            hus -= Self::dk(&k, j, 1) * w * hj;
            hss += Self::dk(&k, j, 2) * w;
        }
        [[huu, hus], [hus, hss]]
    }

    fn scale(&self, j: usize, u: T) -> T {
        (-T::from_index(j) * T::half() * u).exp()
    }

    /// d^r κ′_j / dσ^r = (j+1)…(j+r) κ′_{j+r}.
    fn dk(k: &[T], j: usize, r: usize) -> T {
        if j + r >= k.len() {
            return T::zero();
        }
        let f: T = (j + 1..=j + r).map(T::from_index).fold(T::one(), |a, b| a * b);
        f * k[j + r]
    }

    /// Ω at which kinetic and potential parts balance, used to place grids.
    fn natural_omega(&self) -> T {
        let mut best = T::one();
        let mut found = false;
        for j in (2..self.coeffs.len()).step_by(2) {
            let c = self.coeffs[j].abs() * self.moments[j];
            if c > T::zero() {
                let om = (c / self.kinetic).powf(T::one() / (T::one() + T::from_index(j) * T::half()));
                best = if found { best.max(om) } else { om };
                found = true;
            }
        }
        best
    }
}

/// 𝒯_N for the block described by `cfg`, from diagonal elements only.
pub fn trace<T: Real>(pot: &PolynomialPotential<T>, cfg: &BasisConfig<T>) -> Result<T> {
    cfg.validate()?;
    Ok(TraceModel::new(pot, cfg.dim, cfg.center).value(cfg.omega, cfg.sigma))
}

/// Closed-form Ω_PMS for H = ½p² + ½s x² + g x⁴ with the trace over N
/// elements starting at index 0. Solves N Ω³ − N s Ω − 2gK = 0,
/// K = 1 + 2N², via Ω = −s/X^{1/3} − X^{1/3}/3 and returns the largest
/// positive real branch.
pub fn pms_omega_quartic_closed_form<T: Real>(s: T, g: T, n: usize) -> Result<T> {
    if !(g > T::zero()) || !g.is_finite() || !s.is_finite() {
        return Err(Error::InvalidArgument(format!("need g > 0 and finite m² (got g={g}, m²={s})")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let nn = T::from_index(n);
    let k = T::one() + T::two() * nn * nn;
    if s == T::zero() {
        return Ok((T::two() * g * k / nn).cbrt());
    }
    let c = |x: T| Complex::new(x, T::zero());
    let disc = c(T::lit(81.0) * g * g * k * k - T::lit(3.0) * nn * nn * s * s * s).sqrt();
    let x = c(-T::lit(9.0) * nn * s * s * s) / (c(T::lit(9.0) * g * k) + disc);
    let root = x.cbrt();
    let turn = Complex::from_polar(T::one(), T::two() * T::PI() / T::lit(3.0));
    let mut best: Option<T> = None;
    let mut w = root;
    for _ in 0..3 {
        let om = -c(s) / w - w / c(T::lit(3.0));
        let tol = T::lit(1e3) * T::epsilon() * (T::one() + om.re.abs());
        if om.re > T::zero() && om.im.abs() <= tol && om.re.is_finite() {
            best = Some(best.map_or(om.re, |b| b.max(om.re)));
        }
        w = w * turn;
    }
    best.ok_or_else(|| Error::ClosedFormInvalid(format!("no positive real root for m²={s}, g={g}, N={n}")))
}

/// Locates the minimum of the truncated trace for an N-dimensional block.
pub fn pms_optimize<T: Real>(
    pot: &PolynomialPotential<T>,
    dim: usize,
    opts: &PmsOptions<T>,
) -> Result<PmsResult<T>> {
    if dim == 0 {
        return Err(Error::InvalidBasis("dimension must be at least 1".into()));
    }
    if let Some((om, sg)) = opts.init {
        if !(om > T::zero()) || !om.is_finite() || !sg.is_finite() {
            return Err(Error::InvalidArgument(format!("initial guess (Ω={om}, σ={sg}) is invalid")));
        }
    }
    let model = TraceModel::new(pot, opts.trace_span.len(dim), opts.center);
    let sigma0 = if opts.optimize_sigma {
        T::zero()
    } else {
        opts.init.map_or(T::zero(), |(_, s)| s)
    };
    let u1 = minimize_log_omega(&model, sigma0, opts)?;
    let result = if opts.optimize_sigma {
        minimize_2d(pot, &model, u1, opts)?
    } else {
        let t = model.value_log(u1, sigma0);
        PmsResult {
            omega: u1.exp(),
            sigma: sigma0,
            trace_value: t,
            stationarity_residual: model.gradient_log(u1, sigma0)[0].abs(),
        }
    };
    if !(result.stationarity_residual <= opts.stationarity_tol * result.trace_value.abs().max(T::one())) {
        return Err(Error::NonConvergence {
            what: "PMS stationarity",
            iterations: if opts.optimize_sigma { opts.max_iter_2d } else { opts.max_iter_1d },
        });
    }
    Ok(result)
}

fn minimize_log_omega<T: Real>(model: &TraceModel<T>, sigma: T, opts: &PmsOptions<T>) -> Result<T> {
    let centre = match opts.init {
        Some((om, _)) if !opts.optimize_sigma => om.ln(),
        _ => model.natural_omega().ln(),
    };
    let f = |u: T| model.value_log(u, sigma);
    let half_width = T::lit(12.0);
    let points = 97;
    let step = T::two() * half_width / T::from_index(points - 1);
    let mut lo = centre - half_width;
    let mut best_i;
    // widen the window while the minimum sits on its edge
    let mut widenings = 0;
    loop {
        let vals: Vec<T> = (0..points).map(|i| f(lo + step * T::from_index(i))).collect();
        best_i = (0..points)
            .filter(|&i| vals[i].is_finite())
            .min_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(std::cmp::Ordering::Equal))
            .ok_or(Error::AllStartsDiverged { starts: points })?;
        if best_i == 0 && widenings < 8 {
            lo -= half_width;
        } else if best_i == points - 1 && widenings < 8 {
            lo += half_width;
        } else {
            break;
        }
        widenings += 1;
    }
    let a = lo + step * T::from_index(best_i.saturating_sub(1));
    let b = lo + step * T::from_index((best_i + 1).min(points - 1));
    let tol = opts.omega_tol.max(T::lit(10.0) * T::epsilon() * (T::one() + a.abs().max(b.abs())));
    let m = golden_section(f, a, b, tol, opts.max_iter_1d)?;
    Ok(newton_1d(model, m.x, sigma))
}

fn newton_1d<T: Real>(model: &TraceModel<T>, mut u: T, sigma: T) -> T {
    for _ in 0..50 {
        let g = model.gradient_log(u, sigma)[0];
        let h = model.hessian_log(u, sigma)[0][0];
        if !(h > T::zero()) {
            break;
        }
        let step = g / h;
        if step.abs() > T::one() || !step.is_finite() {
            break;
        }
        u -= step;
        if step.abs() <= T::lit(4.0) * T::epsilon() * (T::one() + u.abs()) {
            break;
        }
    }
    u
}

fn newton_2d<T: Real>(model: &TraceModel<T>, mut u: T, mut s: T) -> (T, T) {
    for _ in 0..50 {
        let g = model.gradient_log(u, s);
        let h = model.hessian_log(u, s);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if !(h[0][0] > T::zero()) || !(det > T::zero()) {
            break;
        }
        let du = (h[1][1] * g[0] - h[0][1] * g[1]) / det;
        let ds = (h[0][0] * g[1] - h[1][0] * g[0]) / det;
        if !du.is_finite() || !ds.is_finite() || du.abs() > T::one() || ds.abs() > T::one() + s.abs() {
            break;
        }
        u -= du;
        s -= ds;
        let small = T::lit(4.0) * T::epsilon();
        if du.abs() <= small * (T::one() + u.abs()) && ds.abs() <= small * (T::one() + s.abs()) {
            break;
        }
    }
    (u, s)
}

fn minimize_2d<T: Real>(
    pot: &PolynomialPotential<T>,
    model: &TraceModel<T>,
    u_star: T,
    opts: &PmsOptions<T>,
) -> Result<PmsResult<T>> {
    let omega_star = u_star.exp();
    let x_range = pot
        .stationary_points()
        .iter()
        .fold(T::zero(), |m, &x| m.max(x.abs()))
        .max(omega_star.sqrt().recip());
    let ln10 = T::lit(10.0).ln();
    let mut starts: Vec<(T, T)> = Vec::with_capacity(26);
    for i in 0..5 {
        for j in 0..5 {
            let u = u_star - ln10 + T::two() * ln10 * T::from_index(i) / T::lit(4.0);
            let s = -x_range + T::two() * x_range * T::from_index(j) / T::lit(4.0);
            starts.push((u, s));
        }
    }
    if let Some((om, sg)) = opts.init {
        starts.push((om.ln(), sg));
    }
    let step = [T::half(), x_range / T::lit(4.0)];
    let runs: Vec<Option<(bool, T, T, T)>> = starts
        .par_iter()
        .map(|&(u0, s0)| {
            let r = nelder_mead(
                |v: &[T]| {
                    let t = model.value_log(v[0], v[1]);
                    if t.is_finite() {
                        t
                    } else {
                        T::infinity()
                    }
                },
                &[u0, s0],
                &step,
                opts.simplex_tol,
                opts.max_iter_2d,
            );
            let (u, s) = newton_2d(model, r.x[0], r.x[1]);
            let t = model.value_log(u, s);
            (t.is_finite() && u.is_finite() && s.is_finite()).then_some((r.converged, t, u, s))
        })
        .collect();
    let finite: Vec<_> = runs.into_iter().flatten().collect();
    if finite.is_empty() {
        return Err(Error::AllStartsDiverged { starts: starts.len() });
    }
    let best = finite
        .iter()
        .filter(|r| r.0)
        .min_by(|a, b| {
            a.1.partial_cmp(&b.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.2.partial_cmp(&b.2).unwrap_or(std::cmp::Ordering::Equal))
        })
        .ok_or(Error::NonConvergence {
            what: "Nelder-Mead PMS search",
            iterations: opts.max_iter_2d,
        })?;
    let (_, t, u, s) = *best;
    let g = model.gradient_log(u, s);
    Ok(PmsResult {
        omega: u.exp(),
        sigma: s,
        trace_value: t,
        stationarity_residual: (g[0] * g[0] + g[1] * g[1]).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscbasis::assemble_hamiltonian;
    use crate::potential::Sign;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn quartic_trace_oracle(n: usize, omega: f64, s: f64, g: f64) -> f64 {
        // direct diagonal summation of ½p² + ½s x² + g x⁴
        (0..n)
            .map(|k| {
                let k = k as f64;
                omega * (2.0 * k + 1.0) / 4.0
                    + 0.5 * s * (2.0 * k + 1.0) / (2.0 * omega)
                    + g * 3.0 * (2.0 * k * k + 2.0 * k + 1.0) / (4.0 * omega * omega)
            })
            .sum()
    }

    #[test]
    fn harmonic_trace_small() {
        let pot = PolynomialPotential::harmonic(1.0).unwrap();
        let t = trace(&pot, &BasisConfig::new(3, 1.0).unwrap()).unwrap();
        assert_relative_eq!(t, 4.5, epsilon = 1e-15);
    }

    #[test]
    fn quartic_trace_formula() {
        for &(s, sign) in &[(1.0, Sign::Plus), (-1.0, Sign::Minus)] {
            let pot = PolynomialPotential::quartic(1.0, 7.0, sign).unwrap();
            for &n in &[1usize, 5, 33] {
                let om = 2.3;
                let t = trace(&pot, &BasisConfig::new(n, om).unwrap()).unwrap();
                let nf = n as f64;
                let closed = nf * nf / 4.0 * (om + s / om) + 7.0 * nf * (1.0 + 2.0 * nf * nf) / (4.0 * om * om);
                assert_relative_eq!(t, closed, max_relative = 1e-13);
                assert_relative_eq!(t, quartic_trace_oracle(n, om, s, 7.0), max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn harmonic_pms_is_matched_frequency() {
        for &n in &[1usize, 7, 40] {
            let pot = PolynomialPotential::harmonic(1.0).unwrap();
            let r = pms_optimize(&pot, n, &PmsOptions::default()).unwrap();
            assert_relative_eq!(r.omega, 1.0, max_relative = 1e-12);
            assert_eq!(r.sigma, 0.0);
        }
    }

    #[test]
    fn closed_form_matches_numeric() {
        for &g in &[1.0f64, 10.0, 1000.0] {
            for &n in &[2usize, 10, 50] {
                for &sign in &[Sign::Plus, Sign::Minus] {
                    let pot = PolynomialPotential::quartic(1.0, g, sign).unwrap();
                    let s = pot.coeff(2) * 2.0;
                    let closed = pms_omega_quartic_closed_form(s, g, n).unwrap();
                    let numeric = pms_optimize(&pot, n, &PmsOptions::default()).unwrap().omega;
                    assert!(
                        ((closed - numeric) / numeric).abs() <= 1e-8,
                        "g={g} N={n} s={s}: {closed} vs {numeric}"
                    );
                    let nf = n as f64;
                    let k = 1.0 + 2.0 * nf * nf;
                    let dt = nf * nf / 4.0 - s * nf * nf / (4.0 * closed * closed) - g * nf * k / (2.0 * closed.powi(3));
                    assert!(dt.abs() <= 1e-9 * nf * nf / 4.0, "dT/dΩ = {dt}");
                }
            }
        }
    }

    #[test]
    fn closed_form_small_coupling_limit() {
        let om = pms_omega_quartic_closed_form(1.0f64, 1e-9, 10).unwrap();
        assert!((om - 1.0).abs() < 1e-6, "{om}");
    }

    #[test]
    fn closed_form_rejects_bad_input() {
        assert!(pms_omega_quartic_closed_form(1.0, 0.0, 10).is_err());
        assert!(pms_omega_quartic_closed_form(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn symmetric_potential_keeps_sigma_zero() {
        let dw = PolynomialPotential::double_well(0.01f64, 5.0).unwrap();
        let q = PolynomialPotential::quartic(1.0, 1000.0, Sign::Plus).unwrap();
        for pot in [dw, q] {
            let r = pms_optimize(&pot, 20, &PmsOptions::default().with_sigma(true)).unwrap();
            assert!(r.sigma.abs() <= 1e-6, "σ = {}", r.sigma);
        }
    }

    #[test]
    fn span_plus_one_equals_next_dimension() {
        let pot = PolynomialPotential::<f64>::asymmetric_quartic();
        let a = pms_optimize(&pot, 10, &PmsOptions::default().with_span(TraceSpan::DimensionPlusOne)).unwrap();
        let b = pms_optimize(&pot, 11, &PmsOptions::default()).unwrap();
        assert_relative_eq!(a.omega, b.omega, max_relative = 1e-12);
    }

    #[test]
    fn gradient_and_hessian_match_finite_differences() {
        let pot = PolynomialPotential::new(vec![0.3, -1.0, 0.7, 0.2, 0.05, 0.0, 0.01]).unwrap();
        let m = TraceModel::new(&pot, 12, 3);
        let (u, s, h) = (0.4, -0.3, 1e-5);
        let g = m.gradient_log(u, s);
        let fd_u = (m.value_log(u + h, s) - m.value_log(u - h, s)) / (2.0 * h);
        let fd_s = (m.value_log(u, s + h) - m.value_log(u, s - h)) / (2.0 * h);
        assert_relative_eq!(g[0], fd_u, max_relative = 1e-7);
        assert_relative_eq!(g[1], fd_s, max_relative = 1e-7);
        let hs = m.hessian_log(u, s);
        let fd_us = (m.gradient_log(u, s + h)[0] - m.gradient_log(u, s - h)[0]) / (2.0 * h);
        let fd_ss = (m.gradient_log(u, s + h)[1] - m.gradient_log(u, s - h)[1]) / (2.0 * h);
        let fd_uu = (m.gradient_log(u + h, s)[0] - m.gradient_log(u - h, s)[0]) / (2.0 * h);
        assert_relative_eq!(hs[0][1], fd_us, max_relative = 1e-7);
        assert_relative_eq!(hs[1][1], fd_ss, max_relative = 1e-7);
        assert_relative_eq!(hs[0][0], fd_uu, max_relative = 1e-7);
    }

    fn arb_potential() -> impl Strategy<Value = PolynomialPotential<f64>> {
        (1usize..=4)
            .prop_flat_map(|half| (proptest::collection::vec(-2.0f64..2.0, 2 * half), 0.1f64..3.0))
            .prop_map(|(mut c, lead)| {
                c.push(lead);
                PolynomialPotential::new(c).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn diagonal_trace_equals_assembled_trace(
            pot in arb_potential(),
            n in 1usize..=30,
            omega in 0.1f64..20.0,
            sigma in -1.5f64..1.5,
            center in 0usize..5,
        ) {
            let cfg = BasisConfig::new(n, omega).unwrap().with_sigma(sigma).with_center(center);
            let fast = trace(&pot, &cfg).unwrap();
            let h = assemble_hamiltonian(&pot, &cfg).unwrap();
            let full = h.trace();
            let scale: f64 = (0..n).map(|k| h.entries()[(k, k)].abs()).sum::<f64>().max(1.0);
            prop_assert!((fast - full).abs() <= 1e-12 * scale, "{} vs {}", fast, full);
        }

        #[test]
        fn optimum_is_stationary_by_central_differences(
            pot in arb_potential(),
            n in 1usize..=25,
        ) {
            let r = pms_optimize(&pot, n, &PmsOptions::default().with_sigma(true)).unwrap();
            let m = TraceModel::new(&pot, n, 0);
            let (u, s, h) = (r.omega.ln(), r.sigma, 1e-5);
            let gu = (m.value_log(u + h, s) - m.value_log(u - h, s)) / (2.0 * h);
            let gs = (m.value_log(u, s + h) - m.value_log(u, s - h)) / (2.0 * h);
            prop_assert!(gu.hypot(gs) <= 1e-7 * r.trace_value.abs().max(1.0), "grad {} {}", gu, gs);
        }
    }
}
