//! Polynomial potentials V(x) = Σ κ_j x^j with only bound states.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::binomial;

/// Sign applied to the quadratic term of a quartic oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_i32(s: i32) -> Option<Self> {
        match s {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    fn apply<T: Real>(self, x: T) -> T {
        match self {
            Sign::Plus => x,
            Sign::Minus => -x,
        }
    }
}

/// Dense coefficient list κ_0..κ_𝒩. Degree is even, leading coefficient
/// positive, trailing zeros stripped.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPotential<T> {
    coeffs: Vec<T>,
}

impl<T: Real> PolynomialPotential<T> {
    pub fn new(mut coeffs: Vec<T>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPotential("coefficients must be finite".into()));
        }
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        let Some(&lead) = coeffs.last() else {
            return Err(Error::InvalidPotential("empty coefficient list".into()));
        };
        let degree = coeffs.len() - 1;
        if degree < 2 || degree % 2 != 0 {
            return Err(Error::InvalidPotential(format!(
                "degree must be even and at least 2 (got {degree})"
            )));
        }
        if lead <= T::zero() {
            return Err(Error::InvalidPotential(
                "leading coefficient must be positive for a bound spectrum".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    /// ½ sign·m² x² + g x⁴.
    pub fn quartic(m_squared: T, g: T, sign: Sign) -> Result<Self> {
        if !(g > T::zero()) {
            return Err(Error::InvalidPotential(format!(
                "quartic coupling g must be positive (got {g})"
            )));
        }
        Self::new(vec![
            T::zero(),
            T::zero(),
            sign.apply(m_squared) * T::half(),
            T::zero(),
            g,
        ])
    }

    /// ½ m² x².
    pub fn harmonic(m: T) -> Result<Self> {
        Self::new(vec![T::zero(), T::zero(), m * m * T::half()])
    }

    /// λ(x² − a²)²/24 with the additive constant dropped:
    /// κ₂ = −λa²/12, κ₄ = λ/24.
    pub fn double_well(lambda: T, a: T) -> Result<Self> {
        if !(lambda > T::zero()) {
            return Err(Error::InvalidPotential(format!(
                "double-well lambda must be positive (got {lambda})"
            )));
        }
        Self::new(vec![
            T::zero(),
            T::zero(),
            -lambda * a * a / T::lit(12.0),
            T::zero(),
            lambda / T::lit(24.0),
        ])
    }

    /// V(x) = 11 − 118x − 44x² + 80x³ + 16x⁴.
    pub fn asymmetric_quartic() -> Self {
        Self::new(
            [11.0, -118.0, -44.0, 80.0, 16.0]
                .into_iter()
                .map(T::lit)
                .collect(),
        )
        .expect("valid built-in potential")
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// κ_j, zero beyond the degree.
    pub fn coeff(&self, j: usize) -> T {
        self.coeffs.get(j).copied().unwrap_or_else(T::zero)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> T {
        self.coeffs[self.degree()]
    }

    /// True when all odd coefficients vanish.
    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(|c| c.is_zero())
    }

    /// Coefficients of V(x + σ), by binomial re-expansion.
    pub fn shift(&self, sigma: T) -> Self {
        Self {
            coeffs: shifted_coeffs(&self.coeffs, sigma),
        }
    }

    pub fn evaluate(&self, x: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * x + c)
    }

    /// Coefficients of V′.
    pub fn derivative_coeffs(&self) -> Vec<T> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, &c)| c * T::from_index(j))
            .collect()
    }

    /// Real roots of V′, ascending. Found by sign changes on a fine grid
    /// inside the Cauchy bound followed by bisection; tangential double
    /// roots are not reported.
    pub fn stationary_points(&self) -> Vec<T> {
        let d = self.derivative_coeffs();
        let lead = *d.last().expect("degree >= 2");
        let bound = T::one()
            + d[..d.len() - 1]
                .iter()
                .fold(T::zero(), |m, &c| m.max((c / lead).abs()));
        let eval = |x: T| d.iter().rev().fold(T::zero(), |acc, &c| acc * x + c);
        let samples = 4000;
        let step = T::two() * bound / T::from_index(samples);
        let mut roots = Vec::new();
        let mut a = -bound;
        let mut fa = eval(a);
        for i in 1..=samples {
            let b = -bound + step * T::from_index(i);
            let fb = eval(b);
            if fa == T::zero() {
                roots.push(a);
            } else if fa * fb < T::zero() {
                let (mut lo, mut hi, mut flo) = (a, b, fa);
                for _ in 0..200 {
                    let mid = (lo + hi) * T::half();
                    let fm = eval(mid);
                    if fm == T::zero() || (hi - lo).abs() <= T::epsilon() * mid.abs() {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if flo * fm < T::zero() {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                roots.push((lo + hi) * T::half());
            }
            a = b;
            fa = fb;
        }
        roots
    }
}

pub(crate) fn shifted_coeffs<T: Real>(coeffs: &[T], sigma: T) -> Vec<T> {
    let mut out = vec![T::zero(); coeffs.len()];
    for (j, &kj) in coeffs.iter().enumerate() {
        if kj.is_zero() {
            continue;
        }
        let mut sp = T::one();
        for k in 0..=j {
            out[j - k] += kj * binomial::<T>(j, k) * sp;
            sp *= sigma;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn quartic_coefficients() {
        let p = PolynomialPotential::quartic(1.0, 1000.0, Sign::Plus).unwrap();
        assert_eq!(p.coeffs(), &[0.0, 0.0, 0.5, 0.0, 1000.0]);
        let p = PolynomialPotential::quartic(1.0, 1.0, Sign::Minus).unwrap();
        assert_eq!(p.coeffs(), &[0.0, 0.0, -0.5, 0.0, 1.0]);
        let p = PolynomialPotential::quartic(0.0, 1.0, Sign::Plus).unwrap();
        assert_eq!(p.coeffs(), &[0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn quartic_rejects_nonpositive_coupling() {
        assert!(PolynomialPotential::quartic(1.0, 0.0, Sign::Plus).is_err());
        assert!(PolynomialPotential::quartic(1.0, -2.0, Sign::Plus).is_err());
    }

    #[test]
    fn double_well_coefficients() {
        let p = PolynomialPotential::double_well(0.01, 5.0).unwrap();
        assert_relative_eq!(p.coeff(2), -1.0 / 48.0, max_relative = 1e-15);
        assert_relative_eq!(p.coeff(4), 1.0 / 2400.0, max_relative = 1e-15);
        assert_eq!(p.coeff(0), 0.0);
        // equivalently m² = 1/24 with reversed sign, g = 1/2400
        let q = PolynomialPotential::quartic(1.0 / 24.0, 1.0 / 2400.0, Sign::Minus).unwrap();
        for j in 0..5 {
            assert_relative_eq!(p.coeff(j), q.coeff(j), max_relative = 1e-15);
        }
        let pure = PolynomialPotential::double_well(24.0, 0.0).unwrap();
        assert_eq!(pure.coeffs(), &[0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(PolynomialPotential::double_well(0.0, 5.0).is_err());
    }

    #[test]
    fn rejects_unbounded_or_odd() {
        assert!(PolynomialPotential::new(vec![0.0, 1.0, 0.0, 1.0]).is_err());
        assert!(PolynomialPotential::new(vec![0.0, 0.0, -1.0]).is_err());
        assert!(PolynomialPotential::<f64>::new(vec![]).is_err());
        assert!(PolynomialPotential::new(vec![3.0]).is_err());
        assert!(PolynomialPotential::new(vec![0.0, 0.0, 1.0, f64::NAN]).is_err());
        // trailing zeros stripped
        let p = PolynomialPotential::new(vec![0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.degree(), 2);
    }

    #[test]
    fn shift_binomial_identities() {
        let sq = PolynomialPotential::new(vec![0.0, 0.0, 1.0]).unwrap();
        let s = sq.shift(1.5);
        assert_eq!(s.coeffs(), &[2.25, 3.0, 1.0]);
        let q = PolynomialPotential::new(vec![0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(q.shift(1.0).coeffs(), &[1.0, 4.0, 6.0, 4.0, 1.0]);
    }

    #[test]
    fn evaluate_asymmetric() {
        let v = PolynomialPotential::<f64>::asymmetric_quartic();
        assert_eq!(v.evaluate(0.0), 11.0);
        assert_eq!(v.evaluate(1.0), -55.0);
    }

    #[test]
    fn asymmetric_minimum_location() {
        let v = PolynomialPotential::<f64>::asymmetric_quartic();
        let roots = v.stationary_points();
        assert_eq!(roots.len(), 3);
        // global minimum near x ≈ −3.979
        let xmin = roots
            .iter()
            .copied()
            .min_by(|a, b| v.evaluate(*a).total_cmp(&v.evaluate(*b)))
            .unwrap();
        assert!((xmin + 3.979).abs() < 1e-3, "{xmin}");
    }

    fn arb_potential() -> impl Strategy<Value = PolynomialPotential<f64>> {
        (1usize..=3, prop::collection::vec(-5.0f64..5.0, 8), 0.1f64..5.0).prop_map(
            |(half_deg, mut c, lead)| {
                c.truncate(2 * half_deg);
                c.push(lead);
                PolynomialPotential::new(c).unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn shift_roundtrip(p in arb_potential(), sigma in -3.0f64..3.0) {
            let back = p.shift(sigma).shift(-sigma);
            // relative to the size of the intermediate binomial terms
            let scale = p.coeffs().iter().fold(1.0f64, |m, c| m.max(c.abs()))
                * (1.0 + sigma.abs()).powi(p.degree() as i32);
            for (a, b) in p.coeffs().iter().zip(back.coeffs()) {
                prop_assert!((a - b).abs() <= 1e-12 * scale, "{a} vs {b}");
            }
            prop_assert_eq!(back.degree(), p.degree());
        }

        #[test]
        fn shift_matches_translated_evaluation(p in arb_potential(), sigma in -2.0f64..2.0, x in -2.0f64..2.0) {
            let lhs = p.shift(sigma).evaluate(x);
            let rhs = p.evaluate(x + sigma);
            let scale = p.coeffs().iter().map(|c| c.abs()).sum::<f64>() * 4f64.powi(p.degree() as i32);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0) + 1e-14 * scale);
        }

        #[test]
        fn shift_preserves_degree_and_leading(p in arb_potential(), sigma in -3.0f64..3.0) {
            let s = p.shift(sigma);
            prop_assert_eq!(s.degree(), p.degree());
            prop_assert_eq!(s.leading(), p.leading());
        }
    }
}
