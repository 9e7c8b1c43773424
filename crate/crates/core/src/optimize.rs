//! Derivative-free minimisers: golden-section search on a bracket and
//! Nelder–Mead simplex.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum1D<T> {
    pub x: T,
    pub value: T,
    pub iterations: usize,
}

/// Minimises `f` on [lo, hi] (assumed unimodal) until the bracket width is
/// below `xtol`.
pub fn golden_section<T: Real>(
    f: impl Fn(T) -> T,
    lo: T,
    hi: T,
    xtol: T,
    max_iter: usize,
) -> Result<Minimum1D<T>> {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::half();
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for it in 0..max_iter {
        if (b - a).abs() <= xtol {
            let (x, value) = if fc <= fd { (c, fc) } else { (d, fd) };
            return Ok(Minimum1D {
                x,
                value,
                iterations: it,
            });
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    Err(Error::NonConvergence {
        what: "golden-section search",
        iterations: max_iter,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexMinimum<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Nelder–Mead with standard coefficients. Stops when the simplex diameter
/// (max distance of a vertex from the best vertex) falls below `size_tol`.
pub fn nelder_mead<T: Real>(
    f: impl Fn(&[T]) -> T,
    start: &[T],
    initial_step: &[T],
    size_tol: T,
    max_iter: usize,
) -> SimplexMinimum<T> {
    let n = start.len();
    let (alpha, gamma, rho, shrink) = (T::one(), T::two(), T::half(), T::half());
    let mut simplex: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += initial_step[i];
        simplex.push(v);
    }
    let mut values: Vec<T> = simplex.iter().map(|v| f(v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| {
            values[i]
                .partial_cmp(&values[j])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diameter = simplex[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
            })
            .fold(T::zero(), T::max);
        if diameter <= size_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![T::zero(); n];
        for v in &simplex[..n] {
            for (c, &x) in centroid.iter_mut().zip(v) {
                *c += x;
            }
        }
        for c in &mut centroid {
            *c /= T::from_index(n);
        }
        let worst = simplex[n].clone();
        let along = |t: T| -> Vec<T> {
            centroid
                .iter()
                .zip(&worst)
                .map(|(&c, &w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(alpha);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = along(gamma);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let c = along(rho);
            let fc = f(&c);
            (c, fc)
        } else {
            let c = along(-rho);
            let fc = f(&c);
            (c, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=n {
            for (x, &b) in simplex[i].iter_mut().zip(&best) {
                *x = b + shrink * (*x - b);
            }
            values[i] = f(&simplex[i]);
        }
    }
    let best = (0..=n)
        .min_by(|&i, &j| {
            values[i]
                .partial_cmp(&values[j])
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    SimplexMinimum {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn golden_section_parabola() {
        let m = golden_section(|x: f64| (x - 1.3).powi(2) + 2.0, -4.0, 5.0, 1e-10, 200).unwrap();
        assert!((m.x - 1.3).abs() < 1e-7);
        assert_relative_eq!(m.value, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn golden_section_iteration_cap() {
        assert!(golden_section(|x: f64| x * x, -1.0, 1.0, 1e-30, 10).is_err());
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let r = nelder_mead(
            |v: &[f64]| (1.0 - v[0]).powi(2) + 100.0 * (v[1] - v[0] * v[0]).powi(2),
            &[-1.2, 1.0],
            &[0.5, 0.5],
            1e-10,
            5000,
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r.x);
    }
}
