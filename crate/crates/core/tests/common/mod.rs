//! Reference formulas written independently of the library.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// `ζ(s)` by a partial sum plus Euler–Maclaurin tail, `s > 1`.
pub fn zeta(s: f64) -> f64 {
    let n = 2000.0f64;
    let head: f64 = (1..2000).map(|k| (k as f64).powf(-s)).sum();
    head + n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0
}

pub fn binomial(n: u64, k: u64) -> u64 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

pub fn r_alpha(alpha: f64, gamma: &[f64], k: &[i64]) -> f64 {
    k.iter()
        .zip(gamma)
        .map(|(&kj, &g)| ((kj.unsigned_abs() as f64).powf(2.0 * alpha) / g).max(1.0))
        .product()
}

/// Step-cross membership from the dyadic definition: every `j ≥ 2` needs
/// the smallest `t_j` with `r_j ≤ 2^{t_j}`, and the first coordinate takes
/// what is left of `m`.
pub fn in_step_cross(alpha: f64, gamma: &[f64], k: &[i64], m: u32) -> bool {
    let slack = 1.0 + 1e-12;
    let level = |r: f64| -> u32 {
        let mut t = 0;
        while r > 2f64.powi(t as i32) * slack {
            t += 1;
        }
        t
    };
    let mut used = 0;
    for j in 1..k.len() {
        used += level(r_alpha(alpha, &gamma[j..j + 1], &k[j..j + 1]));
        if used > m {
            return false;
        }
    }
    r_alpha(alpha, &gamma[..1], &k[..1]) <= 2f64.powi((m - used) as i32) * slack
}

/// All `k` with `r_α(γ,k) ≤ ν`, by pruned recursion over coordinates.
pub fn cross_points(alpha: f64, gamma: &[f64], nu: f64) -> Vec<Vec<i64>> {
    fn rec(alpha: f64, gamma: &[f64], budget: f64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        let j = prefix.len();
        if j == gamma.len() {
            out.push(prefix.clone());
            return;
        }
        let mut kj = 0i64;
        loop {
            let r = ((kj as f64).powf(2.0 * alpha) / gamma[j]).max(1.0);
            if r > budget * (1.0 + 1e-12) {
                break;
            }
            for s in if kj == 0 { vec![0] } else { vec![kj, -kj] } {
                prefix.push(s);
                rec(alpha, gamma, budget / r, prefix, out);
                prefix.pop();
            }
            kj += 1;
        }
    }
    let mut out = Vec::new();
    if nu >= 1.0 {
        rec(alpha, gamma, nu, &mut Vec::new(), &mut out);
    }
    out.sort();
    out
}

/// `Σ_h e^{2πihx}/|h|^{2α}` over `h ≠ 0` for integer `α ∈ {1, 2}`.
pub fn phi_bernoulli(alpha: u32, x: f64) -> f64 {
    let x = x - x.floor();
    match alpha {
        1 => 2.0 * PI * PI * (x * x - x + 1.0 / 6.0),
        2 => {
            let b4 = x.powi(4) - 2.0 * x.powi(3) + x * x - 1.0 / 30.0;
            -(2.0 * PI).powi(4) / 24.0 * b4
        }
        _ => unimplemented!("reference φ only for α ∈ {{1, 2}}"),
    }
}

pub fn squared_worst_case_error(size: u64, g: &[u64], alpha: u32, gamma: &[f64]) -> f64 {
    let mut acc = 0.0;
    for l in 0..size {
        let mut p = 1.0;
        for (gj, wj) in g.iter().zip(gamma) {
            p *= 1.0 + wj * phi_bernoulli(alpha, ((l * gj) % size) as f64 / size as f64);
        }
        acc += p;
    }
    acc / size as f64 - 1.0
}

pub fn bound_constant(alpha: f64, tau: f64, gamma: &[f64]) -> f64 {
    let b = alpha - tau;
    let z = zeta(alpha / b);
    2f64.powf(b) * gamma.iter().map(|g| (1.0 + 2.0 * g.powf(0.5 / b) * z).powf(b)).product::<f64>()
}

pub fn expi(t: f64) -> Complex64 {
    let r = t - t.round();
    let (s, c) = (2.0 * PI * r).sin_cos();
    Complex64::new(c, s)
}

/// `Σ θ_k e^{2πi k·x}`, term by term.
pub fn trig_eval(freqs: &[Vec<i64>], theta: &[Complex64], x: &[f64]) -> Complex64 {
    freqs
        .iter()
        .zip(theta)
        .map(|(k, t)| t * expi(k.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum()))
        .sum()
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|p| p * p <= n).all(|p| n % p != 0)
}
