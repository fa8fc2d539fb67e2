//! Special functions used by the error bounds and the lattice kernels.
//!
//! Everything here is evaluated in plain `f64`. The zeta functions use
//! Euler–Maclaurin summation with a fixed number of head terms and
//! Bernoulli corrections, which gives close to full double precision for
//! every real argument `s > 1`.

use std::f64::consts::PI;

/// Even-index Bernoulli numbers `B_2, B_4, …, B_24`.
const BERNOULLI_EVEN: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

const EM_HEAD_TERMS: usize = 16;

/// Hurwitz zeta function `ζ(s, a) = Σ_{k≥0} (k + a)^{-s}` for `s > 1`, `a > 0`.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    assert!(s > 1.0, "hurwitz_zeta requires s > 1, got {s}");
    assert!(a > 0.0, "hurwitz_zeta requires a > 0, got {a}");

    let mut head = 0.0;
    for k in 0..EM_HEAD_TERMS {
        head += (k as f64 + a).powf(-s);
    }
    let x = EM_HEAD_TERMS as f64 + a;
    let x_pow = x.powf(-s);
    let mut tail = x * x_pow / (s - 1.0) + 0.5 * x_pow;

    // Correction j carries B_{2j}/(2j)! · s(s+1)…(s+2j−2) · x^{-s-2j+1}.
    let mut rising = s; // s(s+1)…(s+2j-2)
    let mut factorial = 2.0; // (2j)!
    let mut x_term = x_pow / x; // x^{-s-2j+1}
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / factorial * rising * x_term;
        tail += term;
        if term.abs() < 1e-18 * tail.abs() {
            break;
        }
        let jj = (j + 1) as f64;
        rising *= (s + 2.0 * jj - 1.0) * (s + 2.0 * jj);
        factorial *= (2.0 * jj + 1.0) * (2.0 * jj + 2.0);
        x_term /= x * x;
    }
    head + tail
}

/// Riemann zeta function for real `s > 1`.
pub fn zeta(s: f64) -> f64 {
    hurwitz_zeta(s, 1.0)
}

/// Bernoulli numbers `B_0 … B_n` from the recurrence `Σ_{k≤m} C(m+1, k) B_k = 0`.
pub fn bernoulli_numbers(n: usize) -> Vec<f64> {
    let mut b = vec![0.0; n + 1];
    b[0] = 1.0;
    for m in 1..=n {
        let mut acc = 0.0;
        let mut c = 1.0; // C(m+1, k)
        for (k, bk) in b.iter().enumerate().take(m) {
            acc += c * bk;
            c = c * (m + 1 - k) as f64 / (k + 1) as f64;
        }
        b[m] = -acc / (m + 1) as f64;
    }
    b
}

/// Bernoulli polynomial `B_n(x)`.
///
/// Orders 2, 4, 6 and 8 are written out; everything else is assembled from
/// the Bernoulli numbers as `Σ_k C(n, k) B_k x^{n-k}`.
pub fn bernoulli_polynomial(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x - 0.5,
        2 => x * x - x + 1.0 / 6.0,
        4 => {
            let x2 = x * x;
            x2 * x2 - 2.0 * x2 * x + x2 - 1.0 / 30.0
        }
        6 => {
            let x2 = x * x;
            let x4 = x2 * x2;
            x4 * x2 - 3.0 * x4 * x + 2.5 * x4 - 0.5 * x2 + 1.0 / 42.0
        }
        8 => {
            let x2 = x * x;
            let x4 = x2 * x2;
            x4 * x4 - 4.0 * x4 * x2 * x + 14.0 / 3.0 * x4 * x2 - 7.0 / 3.0 * x4 + 2.0 / 3.0 * x2
                - 1.0 / 30.0
        }
        _ => {
            let b = bernoulli_numbers(n);
            // Horner in x over the coefficients C(n, k) B_k of x^{n-k}.
            let mut coeffs = vec![0.0; n + 1];
            let mut c = 1.0;
            for (k, bk) in b.iter().enumerate() {
                coeffs[k] = c * bk;
                c = c * (n - k) as f64 / (k + 1) as f64;
            }
            coeffs.iter().fold(0.0, |acc, &ck| acc * x + ck)
        }
    }
}

/// `n!` as a float.
pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Binomial coefficient `C(n, k)`; `None` on `u64` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// `(2π)^{p}` — shows up in every Bernoulli scaling.
pub(crate) fn two_pi_pow(p: f64) -> f64 {
    (2.0 * PI).powf(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force ζ by direct summation plus the integral tail.
    fn zeta_brute(s: f64) -> f64 {
        let n = 2_000_000u64;
        let mut acc = 0.0;
        for k in (1..=n).rev() {
            acc += (k as f64).powf(-s);
        }
        let x = n as f64 + 0.5;
        acc + x.powf(1.0 - s) / (s - 1.0)
    }

    #[test]
    fn zeta_closed_forms() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta(4.0) - PI.powi(4) / 90.0).abs() < 1e-15);
        assert!((zeta(6.0) - PI.powi(6) / 945.0).abs() < 1e-15);
    }

    #[test]
    fn zeta_near_one_matches_brute_force() {
        for &s in &[1.02, 1.1, 1.5, 2.5, 3.3] {
            let fast = zeta(s);
            let slow = zeta_brute(s);
            assert!((fast - slow).abs() < 1e-9 * slow, "s={s}: {fast} vs {slow}");
        }
        // Known high-precision value ζ(1.5) = 2.612375348685488343348567567924...
        assert!((zeta(1.5) - 2.612_375_348_685_488_3).abs() < 1e-14);
        // ζ(3) = 1.202056903159594285399738161511...
        assert!((zeta(3.0) - 1.202_056_903_159_594_3).abs() < 1e-14);
    }

    #[test]
    fn hurwitz_shift_identity() {
        // ζ(s, a) = a^{-s} + ζ(s, a + 1)
        for &(s, a) in &[(1.3, 0.2), (2.48, 0.75), (4.0, 0.01)] {
            let lhs = hurwitz_zeta(s, a);
            let rhs = a.powf(-s) + hurwitz_zeta(s, a + 1.0);
            assert!((lhs - rhs).abs() < 1e-13 * lhs.abs());
        }
        // ζ(s, 1/2) = (2^s − 1) ζ(s)
        let s = 2.7;
        assert!((hurwitz_zeta(s, 0.5) - (2f64.powf(s) - 1.0) * zeta(s)).abs() < 1e-13);
    }

    #[test]
    fn bernoulli_numbers_match_table() {
        let b = bernoulli_numbers(24);
        assert!((b[1] + 0.5).abs() < 1e-15);
        for (j, expected) in BERNOULLI_EVEN.iter().enumerate() {
            let got = b[2 * (j + 1)];
            assert!((got - expected).abs() < 1e-9 * expected.abs(), "B_{}", 2 * (j + 1));
        }
        assert!(b[3].abs() < 1e-14 && b[5].abs() < 1e-14);
    }

    #[test]
    fn hard_coded_polynomials_agree_with_recurrence() {
        let b = bernoulli_numbers(8);
        for &n in &[2usize, 4, 6, 8] {
            for i in 0..=20 {
                let x = i as f64 / 20.0;
                let mut generic = 0.0;
                let mut c = 1.0;
                for k in 0..=n {
                    generic += c * b[k] * x.powi((n - k) as i32);
                    c = c * (n - k) as f64 / (k + 1) as f64;
                }
                assert!((bernoulli_polynomial(n, x) - generic).abs() < 1e-13);
            }
        }
        // B_n(0) = B_n and B_n(1 − x) = B_n(x) for even n
        assert!((bernoulli_polynomial(10, 0.0) - 5.0 / 66.0).abs() < 1e-13);
        assert!((bernoulli_polynomial(12, 0.3) - bernoulli_polynomial(12, 0.7)).abs() < 1e-12);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(13, 7), Some(1716));
        assert_eq!(binomial(3, 1), Some(3));
        assert_eq!(binomial(5, 0), Some(1));
        assert_eq!(binomial(2, 5), Some(0));
        assert_eq!(binomial(200, 100), None);
    }
}
