//! Special functions: log-Gamma, log-factorials, binomials and normalised
//! Hermite functions.

use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Γ(x) for real x (Lanczos, g = 7), using reflection below 1/2.
/// Returns ln|Γ(x)| for negative non-integer arguments.
pub fn ln_gamma<T: Real>(x: T) -> T {
    if x < T::half() {
        let pi = T::PI();
        let s = (pi * x).sin().abs();
        return (pi / s).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += T::lit(c) / (x + T::from_index(i));
    }
    let t = x + T::lit(LANCZOS_G + 0.5);
    T::lit(0.5 * (2.0 * std::f64::consts::PI).ln()) + (x + T::half()) * t.ln() - t + acc.ln()
}

/// ln(n!). Exact table up to 20!, log-Gamma beyond.
pub fn ln_factorial<T: Real>(n: usize) -> T {
    if n <= 20 {
        let f: u64 = (1..=n as u64).product();
        T::lit((f as f64).ln())
    } else {
        ln_gamma(T::from_index(n + 1))
    }
}

/// Binomial coefficient C(n, k) as a real number.
pub fn binomial<T: Real>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut c = T::one();
    for i in 0..k {
        c = c * T::from_index(n - i) / T::from_index(i + 1);
    }
    c
}

/// Normalised Hermite functions ψ_0(t)..ψ_nmax(t), with
/// ψ_n(t) = (2ⁿ n! √π)^{-1/2} H_n(t) e^{-t²/2}.
///
/// Three-term recurrence on the normalised functions; the Gaussian factor is
/// carried as a running log-scale so large |t| does not underflow early.
pub fn hermite_functions<T: Real>(nmax: usize, t: T) -> Vec<T> {
    let big = T::max_value().sqrt().sqrt();
    let ln_big = big.ln();
    let mut out = Vec::with_capacity(nmax + 1);
    let mut log_scale = -t * t * T::half();
    let mut prev = T::zero();
    let mut cur = T::PI().powf(T::lit(-0.25));
    out.push(cur * log_scale.exp());
    for j in 1..=nmax {
        let jf = T::from_index(j);
        let next = (T::two() / jf).sqrt() * t * cur - ((jf - T::one()) / jf).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > big {
            cur = cur / big;
            prev = prev / big;
            log_scale += ln_big;
        }
        out.push(cur * log_scale.exp());
    }
    out
}
