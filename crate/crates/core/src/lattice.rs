//! Rank-1 lattice point sets, the Korobov-space worst-case error of a
//! lattice rule, and component-by-component (CBC) construction of
//! generating vectors.
//!
//! A rule with `L` points and generating vector `g ∈ {1,…,L−1}^d` has the
//! points `z_ℓ = frac(ℓ·g / L)` for `ℓ = 0,…,L−1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::special::{bernoulli_polynomial, factorial, hurwitz_zeta, two_pi_pow, zeta};

/// A rank-1 lattice rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawRule", into = "RawRule")]
pub struct LatticeRule {
    size: u64,
    generator: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct RawRule {
    #[serde(rename = "L")]
    size: u64,
    g: Vec<u64>,
}

impl TryFrom<RawRule> for LatticeRule {
    type Error = Error;
    fn try_from(raw: RawRule) -> Result<Self> {
        LatticeRule::new(raw.size, raw.g)
    }
}

impl From<LatticeRule> for RawRule {
    fn from(rule: LatticeRule) -> Self {
        RawRule {
            size: rule.size,
            g: rule.generator,
        }
    }
}

impl LatticeRule {
    /// Builds a rule, checking `1 ≤ g_j ≤ L − 1` (any positive `g_j` for `L = 1`).
    pub fn new(size: u64, generator: Vec<u64>) -> Result<Self> {
        if size == 0 {
            return Err(invalid("lattice size must be positive"));
        }
        if generator.is_empty() {
            return Err(invalid("generating vector must have at least one component"));
        }
        for (j, &g) in generator.iter().enumerate() {
            let ok = if size == 1 { g >= 1 } else { (1..size).contains(&g) };
            if !ok {
                return Err(invalid(format!(
                    "generator component {j} = {g} outside 1..{}",
                    size.max(2) - 1
                )));
            }
        }
        Ok(Self { size, generator })
    }

    /// Number of points `L`.
    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn generator(&self) -> &[u64] {
        &self.generator
    }

    pub fn dim(&self) -> usize {
        self.generator.len()
    }

    /// The point `z_ℓ`.
    pub fn point(&self, index: u64) -> Vec<f64> {
        let l = self.size as u128;
        let i = (index % self.size) as u128;
        self.generator
            .iter()
            .map(|&g| ((i * g as u128) % l) as f64 / self.size as f64)
            .collect()
    }

    /// `k · g mod L` for an integer frequency vector.
    pub fn residue(&self, k: &[i64]) -> u64 {
        let l = self.size as i128;
        let mut acc: i128 = 0;
        for (&kj, &gj) in k.iter().zip(&self.generator) {
            acc = (acc + (kj as i128 % l) * gj as i128) % l;
        }
        acc.rem_euclid(l) as u64
    }
}

/// All `L` points of `rule`, in index order.
pub fn generate_points(rule: &LatticeRule, dim: usize) -> Result<Vec<Vec<f64>>> {
    if rule.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: rule.dim(),
        });
    }
    Ok((0..rule.size).map(|l| rule.point(l)).collect())
}

/// Nonincreasing coordinate weights `1 ≥ γ_1 ≥ … ≥ γ_d > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProductWeights(Vec<f64>);

impl TryFrom<Vec<f64>> for ProductWeights {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ProductWeights::new(v)
    }
}

impl From<ProductWeights> for Vec<f64> {
    fn from(w: ProductWeights) -> Self {
        w.0
    }
}

impl ProductWeights {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        for (j, &g) in gamma.iter().enumerate() {
            if !(g > 0.0 && g <= 1.0) {
                return Err(invalid(format!("weight γ_{} = {g} outside (0, 1]", j + 1)));
            }
            if j > 0 && g > gamma[j - 1] {
                return Err(invalid(format!(
                    "weights must be nonincreasing: γ_{} = {} < γ_{} = {g}",
                    j,
                    gamma[j - 1],
                    j + 1
                )));
            }
        }
        Ok(Self(gamma))
    }

    /// `γ_j = 1` for all `j`.
    pub fn ones(dim: usize) -> Self {
        Self(vec![1.0; dim])
    }

    /// `γ_j = r^j`, `0 < r ≤ 1`.
    pub fn geometric(ratio: f64, dim: usize) -> Result<Self> {
        Self::new((1..=dim).map(|j| ratio.powi(j as i32)).collect())
    }

    /// `γ_j = j^{-p}`, `p ≥ 0`.
    pub fn polynomial(power: f64, dim: usize) -> Result<Self> {
        if power < 0.0 {
            return Err(invalid("polynomial weight decay must be nonnegative"));
        }
        Self::new((1..=dim).map(|j| (j as f64).powf(-power)).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// The first `dim` weights.
    pub fn truncated(&self, dim: usize) -> Self {
        Self(self.0[..dim.min(self.0.len())].to_vec())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.5 && alpha.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("smoothness α = {alpha} must exceed 1/2")))
    }
}

fn integer_alpha(alpha: f64) -> Option<u32> {
    if alpha.fract() == 0.0 && alpha <= 40.0 {
        Some(alpha as u32)
    } else {
        None
    }
}

fn phi_bernoulli(order: u32, x: f64) -> f64 {
    let n = 2 * order;
    let sign = if order % 2 == 1 { 1.0 } else { -1.0 };
    sign * two_pi_pow(n as f64) / factorial(n) * bernoulli_polynomial(n as usize, x)
}

/// Most terms the pointwise series for non-integer `α` will sum.
pub const PHI_SERIES_MAX_TERMS: u64 = 1 << 24;

/// Target accuracy of the pointwise series.
pub const PHI_SERIES_TOLERANCE: f64 = 1e-12;

/// Upper bound on `|Σ_{|h|>H} e^{2πihx} / |h|^{2α}|`.
///
/// The smaller of the absolute-convergence bound `2 H^{1−2α}/(2α−1)` and the
/// Abel-summation bound `2 (H+1)^{-2α} / sin(π·dist(x, ℤ))`.
pub fn phi_series_tail_bound(alpha: f64, x: f64, terms: u64) -> f64 {
    let s = 2.0 * alpha;
    let h = terms.max(1) as f64;
    let absolute = 2.0 * h.powf(1.0 - s) / (s - 1.0);
    let frac = x.rem_euclid(1.0);
    let dist = frac.min(1.0 - frac);
    if dist > 0.0 {
        let oscillatory = 2.0 * (h + 1.0).powf(-s) / (PI * dist).sin();
        absolute.min(oscillatory)
    } else {
        absolute
    }
}

fn phi_series_terms(alpha: f64, x: f64) -> u64 {
    let mut terms = 1024u64;
    while terms < PHI_SERIES_MAX_TERMS && phi_series_tail_bound(alpha, x, terms) > PHI_SERIES_TOLERANCE {
        terms *= 2;
    }
    terms.min(PHI_SERIES_MAX_TERMS)
}

/// `φ_α(x) = Σ_{h≠0} e^{2πihx} / |h|^{2α}`.
///
/// Integer `α` uses the Bernoulli closed form
/// `φ_α(x) = (−1)^{α+1} (2π)^{2α} / (2α)! · B_{2α}(frac x)`.
/// Other `α` sum the cosine series until [`phi_series_tail_bound`] drops
/// below [`PHI_SERIES_TOLERANCE`] or [`PHI_SERIES_MAX_TERMS`] is reached;
/// the latter only happens for `α` close to 1/2 and `x` very close to an
/// integer. Lattice-level routines use [`phi_on_lattice`] instead, which is
/// accurate for every `α`.
pub fn phi_alpha(alpha: f64, x: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let x = x.rem_euclid(1.0);
    if let Some(order) = integer_alpha(alpha) {
        return Ok(phi_bernoulli(order, x));
    }
    if x == 0.0 {
        return Ok(2.0 * zeta(2.0 * alpha));
    }
    let terms = phi_series_terms(alpha, x);
    let s = 2.0 * alpha;
    let mut acc = 0.0;
    for h in (1..=terms).rev() {
        let hf = h as f64;
        acc += (2.0 * PI * hf * x).cos() * hf.powf(-s);
    }
    Ok(2.0 * acc)
}

/// `φ_α(j / L)` for `j = 0,…,L−1`.
///
/// For non-integer `α` the series is regrouped by residues `h ≡ r (mod L)`:
/// `φ_α(j/L) = 2 L^{-2α} Σ_{r=1}^{L} ζ(2α, r/L) cos(2π r j / L)`, evaluated
/// with one length-`L` FFT.
pub fn phi_on_lattice(alpha: f64, size: u64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let n = size as usize;
    if let Some(order) = integer_alpha(alpha) {
        return Ok((0..n)
            .map(|j| phi_bernoulli(order, j as f64 / size as f64))
            .collect());
    }
    let s = 2.0 * alpha;
    let scale = 2.0 * (size as f64).powf(-s);
    let mut buf: Vec<Complex64> = (0..n)
        .map(|idx| {
            let r = if idx == 0 { n } else { idx };
            Complex64::new(hurwitz_zeta(s, r as f64 / size as f64), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    Ok(buf.into_iter().map(|c| scale * c.re).collect())
}

/// Closed-form worst-case error expression of a lattice rule in the
/// weighted Korobov space:
/// `−1 + (1/L) Σ_ℓ Π_j (1 + γ_j φ_α(frac(ℓ g_j / L)))`.
///
/// This is the classical closed form for the *squared* worst-case error
/// of the rule. Nonnegative up to round-off.
pub fn worst_case_error(rule: &LatticeRule, alpha: f64, gamma: &ProductWeights) -> Result<f64> {
    if gamma.dim() != rule.dim() {
        return Err(Error::DimensionMismatch {
            expected: rule.dim(),
            got: gamma.dim(),
        });
    }
    let table = phi_on_lattice(alpha, rule.size)?;
    let l = rule.size;
    let mut acc = 0.0;
    for i in 0..l {
        let mut prod = 1.0;
        for (&g, &w) in rule.generator.iter().zip(gamma.as_slice()) {
            let idx = ((i as u128 * g as u128) % l as u128) as usize;
            prod *= 1.0 + w * table[idx];
        }
        acc += prod;
    }
    Ok(acc / l as f64 - 1.0)
}

/// Deterministic primality test by trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 || n % 3 == 0 {
        return false;
    }
    let mut d = 5u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 || n % (d + 2) == 0 {
            return false;
        }
        d += 6;
    }
    true
}

fn pow_mod(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    let m = modulus as u128;
    let mut acc: u128 = 1 % m;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    base = acc as u64;
    base
}

/// Smallest primitive root modulo a prime `p`.
pub fn primitive_root(p: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p == 2 {
        return Ok(1);
    }
    let order = p - 1;
    let mut factors = Vec::new();
    let mut rest = order;
    let mut f = 2u64;
    while f * f <= rest {
        if rest % f == 0 {
            factors.push(f);
            while rest % f == 0 {
                rest /= f;
            }
        }
        f += 1;
    }
    if rest > 1 {
        factors.push(rest);
    }
    (2..p)
        .find(|&r| factors.iter().all(|&q| pow_mod(r, order / q, p) != 1))
        .ok_or_else(|| invalid(format!("no primitive root found modulo {p}")))
}

/// Relative tolerance under which two CBC candidates count as tied.
pub const CBC_TIE_TOLERANCE: f64 = 1e-12;

/// Component-by-component construction of a generating vector.
///
/// `g_1 = 1`; each further component minimises the closed-form error in
/// the current dimension, ties going to the smallest candidate. Since the
/// error at `z` and `L − z` coincide, only `z ≤ (L−1)/2` is scanned. With
/// `fast` the scan is a circulant product evaluated by FFT after reordering
/// indices by powers of a primitive root; both paths return the same vector.
pub fn cbc_construct(
    size: u64,
    dim: usize,
    alpha: f64,
    gamma: &ProductWeights,
    fast: bool,
) -> Result<LatticeRule> {
    if size < 2 {
        return Err(invalid(format!("CBC needs L ≥ 2, got {size}")));
    }
    if !is_prime(size) {
        return Err(Error::NotPrime(size));
    }
    if dim == 0 {
        return Err(invalid("dimension must be positive"));
    }
    if gamma.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: gamma.dim(),
        });
    }
    let table = phi_on_lattice(alpha, size)?;
    let n = size as usize;
    let weights = gamma.as_slice();

    let mut products: Vec<f64> = table.iter().map(|&p| 1.0 + weights[0] * p).collect();
    let mut generator = vec![1u64];
    let half = ((n - 1) / 2).max(1);

    let circulant = if fast && n > 2 {
        Some(Circulant::new(&table, size)?)
    } else {
        None
    };

    for &w in &weights[1..] {
        let scores: Vec<f64> = match &circulant {
            Some(c) => c.scores(&products, half),
            None => (1..=half)
                .into_par_iter()
                .map(|z| {
                    let mut acc = 0.0;
                    for (l, &p) in products.iter().enumerate().skip(1) {
                        acc += p * table[(l * z) % n];
                    }
                    acc
                })
                .collect(),
        };
        let scale: f64 = products[1..].iter().map(|p| p.abs()).sum::<f64>()
            * table.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let best = select_candidate(&scores, CBC_TIE_TOLERANCE * scale.max(f64::MIN_POSITIVE));
        let z = best + 1;
        generator.push(z as u64);
        for (l, p) in products.iter_mut().enumerate() {
            *p *= 1.0 + w * table[(l * z) % n];
        }
    }
    LatticeRule::new(size, generator)
}

/// Index of the minimal score; anything within `tol` of the minimum is a
/// tie and the first such index wins.
fn select_candidate(scores: &[f64], tol: f64) -> usize {
    let min = scores.iter().cloned().fold(f64::INFINITY, f64::min);
    scores
        .iter()
        .position(|&s| s <= min + tol)
        .unwrap_or(0)
}

/// Circulant structure of the CBC scan: with a primitive root `r`,
/// `Σ_{ℓ≥1} p(ℓ) φ(ℓ z / L)` at `z = r^a` is the cyclic correlation
/// `Σ_b p(r^b) φ(r^{a+b} / L)` of length `L − 1`.
struct Circulant {
    n: usize,
    powers: Vec<usize>,
    log: Vec<usize>,
    kernel_hat: Vec<Complex64>,
    planner: std::sync::Mutex<FftPlanner<f64>>,
}

impl Circulant {
    fn new(table: &[f64], size: u64) -> Result<Self> {
        let root = primitive_root(size)? as usize;
        let modulus = size as usize;
        let n = modulus - 1;
        let mut powers = Vec::with_capacity(n);
        let mut log = vec![0usize; modulus];
        let mut acc = 1usize;
        for a in 0..n {
            powers.push(acc);
            log[acc] = a;
            acc = acc * root % modulus;
        }
        let mut planner = FftPlanner::new();
        let mut kernel_hat: Vec<Complex64> = powers
            .iter()
            .map(|&v| Complex64::new(table[v], 0.0))
            .collect();
        planner.plan_fft_forward(n).process(&mut kernel_hat);
        Ok(Self {
            n,
            powers,
            log,
            kernel_hat,
            planner: std::sync::Mutex::new(planner),
        })
    }

    fn scores(&self, products: &[f64], half: usize) -> Vec<f64> {
        let n = self.n;
        let mut buf: Vec<Complex64> = self
            .powers
            .iter()
            .map(|&v| Complex64::new(products[v], 0.0))
            .collect();
        let mut planner = self.planner.lock().expect("fft planner poisoned");
        planner.plan_fft_forward(n).process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b = b.conj() * k;
        }
        planner.plan_fft_inverse(n).process(&mut buf);
        let inv = 1.0 / n as f64;
        (1..=half).map(|z| buf[self.log[z]].re * inv).collect()
    }
}

/// `C_{γ,d}(α, τ) = 2^{α−τ} Π_j [1 + 2 γ_j^{1/(2(α−τ))} ζ(α/(α−τ))]^{α−τ}`,
/// the constant in the CBC error guarantee `e ≤ C L^{−α+τ}`.
pub fn bound_constant_c(alpha: f64, tau: f64, gamma: &ProductWeights) -> Result<f64> {
    check_alpha(alpha)?;
    if !(tau > 0.0 && tau <= alpha - 0.5) {
        return Err(invalid(format!(
            "τ = {tau} outside (0, α − 1/2] = (0, {}]",
            alpha - 0.5
        )));
    }
    let beta = alpha - tau;
    let z = zeta(alpha / beta);
    let prod: f64 = gamma
        .as_slice()
        .iter()
        .map(|&g| (1.0 + 2.0 * g.powf(1.0 / (2.0 * beta)) * z).powf(beta))
        .product();
    Ok(2f64.powf(beta) * prod)
}

/// Sums `h_j e^{2πi jℓ/L}` over `j` for every `ℓ` (unnormalised inverse DFT).
pub(crate) fn lattice_synthesis(mut buckets: Vec<Complex64>) -> Vec<Complex64> {
    let n = buckets.len();
    if n > 1 {
        FftPlanner::new().plan_fft_inverse(n).process(&mut buckets);
    }
    buckets
}
