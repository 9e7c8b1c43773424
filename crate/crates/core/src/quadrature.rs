//! Gauss–Hermite quadrature.
//!
//! Nodes are found by Newton iteration on the normalised Hermite function
//! ψ_n, which also yields the "scaled" weights w̃_i = w_i e^{t_i²} used to
//! integrate functions that already carry their own Gaussian decay:
//!
//! ∫ f(t) dt ≈ Σ w̃_i f(t_i).

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::hermite_functions;

#[derive(Debug, Clone)]
pub struct GaussHermite<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
    scaled_weights: Vec<T>,
}

impl<T: Real> GaussHermite<T> {
    /// Rule with `n` nodes; exact for p(t) e^{-t²} with deg p ≤ 2n − 1.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("quadrature needs at least one node".into()));
        }
        let nf = T::from_index(n);
        let max_iter = 100;
        let tol = T::epsilon() * T::lit(8.0);
        let half = n.div_ceil(2);
        let mut roots: Vec<T> = Vec::with_capacity(half);
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let mut scaled = vec![T::zero(); n];

        let mut z = T::zero();
        for i in 0..half {
            z = match i {
                0 => {
                    let m = T::two() * nf + T::one();
                    m.sqrt() - T::lit(1.855_75) * m.powf(T::lit(-1.0 / 6.0))
                }
                1 => z - T::lit(1.14) * nf.powf(T::lit(0.426)) / z,
                2 => T::lit(1.86) * z - T::lit(0.86) * roots[0],
                3 => T::lit(1.91) * z - T::lit(0.91) * roots[1],
                _ => T::two() * z - roots[i - 2],
            };
            let mut converged = false;
            let mut deriv = T::zero();
            for _ in 0..max_iter {
                let psi = hermite_functions(n, z);
                // ψ_n'(t) = √(2n) ψ_{n-1}(t) − t ψ_n(t)
                deriv = (T::two() * nf).sqrt() * psi[n - 1] - z * psi[n];
                let step = psi[n] / deriv;
                z -= step;
                if step.abs() <= tol * z.abs().max(T::one()) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NonConvergence {
                    what: "Gauss-Hermite node search",
                    iterations: max_iter,
                });
            }
            // refresh derivative at the converged node
            let psi = hermite_functions(n, z);
            let d = (T::two() * nf).sqrt() * psi[n - 1] - z * psi[n];
            if d.abs() > T::zero() {
                deriv = d;
            }
            roots.push(z);
            let ws = T::two() / (deriv * deriv);
            let w = ws * (-z * z).exp();
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            scaled[i] = ws;
            scaled[n - 1 - i] = ws;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[half - 1] = T::zero();
        }
        // nodes ascending
        nodes.reverse();
        weights.reverse();
        scaled.reverse();
        Ok(Self {
            nodes,
            weights,
            scaled_weights: scaled,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    /// Weights for ∫ e^{-t²} g(t) dt.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Weights for ∫ f(t) dt where f carries its own Gaussian decay.
    pub fn scaled_weights(&self) -> &[T] {
        &self.scaled_weights
    }

    /// ∫ e^{-t²} g(t) dt.
    pub fn integrate_weighted(&self, g: impl Fn(T) -> T) -> T {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * g(t)).sum()
    }

    /// ∫ f(t) dt for Gaussian-decaying f.
    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.nodes
            .iter()
            .zip(&self.scaled_weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_sqrt_pi() {
        for n in [1, 2, 5, 20, 64, 150] {
            let q = GaussHermite::<f64>::new(n).unwrap();
            let s: f64 = q.weights().iter().sum();
            assert_relative_eq!(s, std::f64::consts::PI.sqrt(), max_relative = 1e-13);
        }
    }

    #[test]
    fn even_moments_exact() {
        // ∫ t^{2k} e^{-t²} dt = Γ(k + 1/2)
        let q = GaussHermite::<f64>::new(12).unwrap();
        let sp = std::f64::consts::PI.sqrt();
        assert_relative_eq!(q.integrate_weighted(|t| t * t), sp / 2.0, max_relative = 1e-13);
        assert_relative_eq!(q.integrate_weighted(|t| t.powi(4)), 0.75 * sp, max_relative = 1e-13);
        assert_relative_eq!(q.integrate_weighted(|t| t.powi(10)), 945.0 / 32.0 * sp, max_relative = 1e-12);
        assert!(q.integrate_weighted(|t| t.powi(7)).abs() < 1e-12);
    }

    #[test]
    fn scaled_weights_integrate_plain_gaussian() {
        let q = GaussHermite::<f64>::new(40).unwrap();
        // ∫ e^{-t²/2} dt = √(2π)
        let v = q.integrate(|t| (-t * t / 2.0).exp());
        assert_relative_eq!(v, (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn nodes_sorted_and_symmetric() {
        let q = GaussHermite::<f64>::new(31).unwrap();
        let x = q.nodes();
        assert!(x.windows(2).all(|w| w[0] < w[1]));
        for i in 0..x.len() {
            assert_relative_eq!(x[i], -x[x.len() - 1 - i], epsilon = 1e-14);
        }
        assert_eq!(x[15], 0.0);
    }

    #[test]
    fn zero_nodes_rejected() {
        assert!(GaussHermite::<f64>::new(0).is_err());
    }
}
