//! Compression weights.
//!
//! For data `x_1,…,x_N` with coefficients `c_n` (all ones, or the
//! responses `y_n`) and a frequency set `K`, the weight at lattice point
//! `z_ℓ` is
//!
//! ```text
//! φ_K(z_ℓ) = (1/N) Σ_{k∈K} Σ_n c_n exp(2πi k·(x_n − z_ℓ)).
//! ```
//!
//! Four routes compute it:
//!
//! * [`weights_naive`]: the triple sum as written, used as the oracle;
//! * [`weights_general_fft`]: Fourier coefficients `φ̌_k`, bucketed by
//!   `−k·g mod L`, then one length-`L` inverse FFT;
//! * [`weights_rectangle`]: products of Dirichlet kernels, `O(LNd)`;
//! * [`weights_step_cross`]: sums over shape vectors of products of
//!   Dirichlet-kernel differences.
//!
//! [`weights_lattice_data`] covers data that itself sits on a rank-1 lattice.
//! All routes parallelise over output entries with a fixed sequential
//! inner order, so results do not depend on the thread count.

use std::borrow::Cow;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{invalid, Error, Result};
use crate::index_sets::{halfwidth, rectangle_halfwidths, Family, IndexSet};
use crate::lattice::{lattice_synthesis, LatticeRule, ProductWeights};

/// Points in `[0,1)^d` with real responses.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    dim: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Dataset {
    /// Validates `N ≥ 1`, equal row lengths, coordinates in `[0,1)` and
    /// finite responses. Out-of-range coordinates are rejected, not wrapped.
    pub fn new(points: Vec<Vec<f64>>, responses: Vec<f64>) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        let mut flat = Vec::with_capacity(points.len() * dim);
        for (n, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidData(format!(
                    "row {n} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            flat.extend_from_slice(p);
        }
        Self::from_flat(dim, flat, responses)
    }

    /// Row-major `N × d` coordinates.
    pub fn from_flat(dim: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::InvalidData("dataset is empty".into()));
        }
        if dim == 0 {
            return Err(Error::InvalidData("points must have at least one coordinate".into()));
        }
        if x.len() != y.len() * dim {
            return Err(Error::InvalidData(format!(
                "{} coordinates do not form {} rows of dimension {dim}",
                x.len(),
                y.len()
            )));
        }
        for (i, &v) in x.iter().enumerate() {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::InvalidData(format!(
                    "row {}: coordinate {} = {v} outside [0, 1)",
                    i / dim,
                    i % dim + 1
                )));
            }
        }
        if let Some(n) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("row {n}: response is not finite")));
        }
        Ok(Self { dim, x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, n: usize) -> &[f64] {
        &self.x[n * self.dim..(n + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.x.chunks_exact(self.dim)
    }

    pub fn responses(&self) -> &[f64] {
        &self.y
    }

    /// `(1/N) Σ y_n²`.
    pub fn mean_y2(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum::<f64>() / self.len() as f64
    }
}

/// Which coefficients `c_n` enter the weights.
#[derive(Clone, Copy, Debug)]
pub enum Coefficients<'a> {
    /// `c_n = 1`, giving the input-dependent weights.
    Ones,
    /// `c_n = y_n`, giving the input-output weights.
    Responses,
    /// Any real vector of length `N`.
    Custom(&'a [f64]),
}

impl<'a> Coefficients<'a> {
    fn resolve(self, data: &'a Dataset) -> Result<Cow<'a, [f64]>> {
        match self {
            Coefficients::Ones => Ok(Cow::Owned(vec![1.0; data.len()])),
            Coefficients::Responses => Ok(Cow::Borrowed(&data.y)),
            Coefficients::Custom(c) if c.len() == data.len() => Ok(Cow::Borrowed(c)),
            Coefficients::Custom(c) => Err(Error::DimensionMismatch {
                expected: data.len(),
                got: c.len(),
            }),
        }
    }
}

/// Upper limit on `|K|·N·L` for [`weights_naive`].
pub const NAIVE_CAP: u128 = 4_000_000_000;

/// `D_n(x) = sin(2π(n+½)x) / sin(πx)`, with `2n+1` within `1e−8` of an integer.
pub fn dirichlet_kernel(n: u64, x: f64) -> f64 {
    if (x - x.round()).abs() < 1e-8 {
        return (2 * n + 1) as f64;
    }
    let t = PI * x;
    ((2 * n + 1) as f64 * t).sin() / t.sin()
}

fn check_dims(data: &Dataset, rule: &LatticeRule) -> Result<()> {
    if data.dim() != rule.dim() {
        return Err(Error::DimensionMismatch {
            expected: rule.dim(),
            got: data.dim(),
        });
    }
    Ok(())
}

fn check_set(data: &Dataset, k: &IndexSet) -> Result<()> {
    if data.dim() != k.dim() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            got: data.dim(),
        });
    }
    Ok(())
}

/// `e^{2πi t}` with the argument reduced to `[−½, ½]` first.
fn unit(t: f64) -> Complex64 {
    let r = t - t.round();
    let (s, c) = (2.0 * PI * r).sin_cos();
    Complex64::new(c, s)
}

/// The defining triple sum, evaluated term by term.
pub fn weights_naive(data: &Dataset, c: Coefficients, rule: &LatticeRule, k: &IndexSet) -> Result<Vec<Complex64>> {
    check_dims(data, rule)?;
    check_set(data, k)?;
    let work = k.len() as u128 * data.len() as u128 * rule.size() as u128;
    if work > NAIVE_CAP {
        return Err(Error::CapExceeded {
            what: "naive weights (|K|·N·L)",
            predicted: work,
            cap: NAIVE_CAP,
        });
    }
    let c = c.resolve(data)?;
    let n_inv = 1.0 / data.len() as f64;
    Ok((0..rule.size())
        .into_par_iter()
        .map(|l| {
            let z = rule.point(l);
            let mut acc = Complex64::new(0.0, 0.0);
            for freq in k.iter() {
                for (x, &cn) in data.points().zip(c.iter()) {
                    let phase: f64 = freq
                        .iter()
                        .zip(x.iter().zip(&z))
                        .map(|(&kj, (&xj, &zj))| kj as f64 * (xj - zj))
                        .sum();
                    acc += cn * unit(phase);
                }
            }
            acc * n_inv
        })
        .collect())
}

/// `φ̌_k = (1/N) Σ_n c_n e^{2πi k·x_n}` for every `k ∈ K`, in the order of `K`.
///
/// Per data point, one table of `e^{2πi k_j x_{n,j}}` per coordinate is
/// built from direct evaluations; each `φ̌_k` is then a product of table
/// entries summed over `n` in data order.
pub fn fourier_coefficients(data: &Dataset, c: Coefficients, k: &IndexSet) -> Result<Vec<Complex64>> {
    check_set(data, k)?;
    let c = c.resolve(data)?;
    Ok(fourier_coefficients_many(data, &[&c], k).pop().expect("one coefficient set"))
}

fn frequency_ranges(k: &IndexSet) -> Vec<(i64, i64)> {
    let mut ranges = vec![(0i64, 0i64); k.dim()];
    for freq in k.iter() {
        for (r, &v) in ranges.iter_mut().zip(freq) {
            r.0 = r.0.min(v);
            r.1 = r.1.max(v);
        }
    }
    ranges
}

const COEFF_CHUNK: usize = 4096;

fn fourier_coefficients_many(data: &Dataset, cs: &[&[f64]], k: &IndexSet) -> Vec<Vec<Complex64>> {
    let d = data.dim();
    let ranges = frequency_ranges(k);
    let n_inv = 1.0 / data.len() as f64;
    let chunks: Vec<Vec<Vec<Complex64>>> = (0..k.len())
        .step_by(COEFF_CHUNK)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|start| {
            let end = (start + COEFF_CHUNK).min(k.len());
            let mut acc = vec![vec![Complex64::new(0.0, 0.0); end - start]; cs.len()];
            let mut tables: Vec<Vec<Complex64>> = ranges
                .iter()
                .map(|&(lo, hi)| vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize])
                .collect();
            for (n, x) in data.points().enumerate() {
                for j in 0..d {
                    let lo = ranges[j].0;
                    for (i, e) in tables[j].iter_mut().enumerate() {
                        *e = unit((lo + i as i64) as f64 * x[j]);
                    }
                }
                for (idx, slot) in (start..end).enumerate() {
                    let freq = k.get(slot);
                    let mut w = tables[0][(freq[0] - ranges[0].0) as usize];
                    for j in 1..d {
                        w *= tables[j][(freq[j] - ranges[j].0) as usize];
                    }
                    for (a, c) in acc.iter_mut().zip(cs) {
                        a[idx] += c[n] * w;
                    }
                }
            }
            acc
        })
        .collect();
    let mut out = vec![Vec::with_capacity(k.len()); cs.len()];
    for chunk in chunks {
        for (o, part) in out.iter_mut().zip(chunk) {
            o.extend(part.into_iter().map(|v| v * n_inv));
        }
    }
    out
}

/// Buckets `h_j = Σ_{k : −k·g ≡ j (mod L)} φ̌_k` and returns
/// `φ_K(z_ℓ) = Σ_j h_j e^{2πi jℓ/L}`.
pub fn synthesize_on_lattice(coeffs: &[Complex64], k: &IndexSet, rule: &LatticeRule) -> Vec<Complex64> {
    let l = rule.size();
    let mut buckets = vec![Complex64::new(0.0, 0.0); l as usize];
    for (freq, &v) in k.iter().zip(coeffs) {
        let j = (l - rule.residue(freq)) % l;
        buckets[j as usize] += v;
    }
    lattice_synthesis(buckets)
}

/// Fourier coefficients, bucketing and one inverse FFT of length `L`.
/// Cost `O(d|K|N + L log L)`.
pub fn weights_general_fft(
    data: &Dataset,
    c: Coefficients,
    rule: &LatticeRule,
    k: &IndexSet,
) -> Result<Vec<Complex64>> {
    check_dims(data, rule)?;
    let coeffs = fourier_coefficients(data, c, k)?;
    Ok(synthesize_on_lattice(&coeffs, k, rule))
}

/// Runs `body(ℓ, diff)` for each lattice index with `diff[n·d + j] = x_{n,j} − z_{ℓ,j}`,
/// collecting one value per coefficient vector.
fn per_lattice_point<F>(data: &Dataset, rule: &LatticeRule, outputs: usize, body: F) -> Vec<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    let d = data.dim();
    let rows: Vec<Vec<f64>> = (0..rule.size())
        .into_par_iter()
        .map(|l| {
            let z = rule.point(l);
            let diff: Vec<f64> = data
                .x
                .iter()
                .enumerate()
                .map(|(i, &x)| x - z[i % d])
                .collect();
            let mut out = vec![0.0; outputs];
            body(&diff, &mut out);
            out
        })
        .collect();
    (0..outputs)
        .map(|o| rows.iter().map(|r| r[o]).collect())
        .collect()
}

/// Dirichlet-kernel weights for the rectangle `R^α_{ν,γ,d}`:
/// `(1/N) Σ_n c_n Π_j D_{k*_j}(x_{n,j} − z_{ℓ,j})`, cost `O(LNd)`.
pub fn weights_rectangle(
    data: &Dataset,
    c: Coefficients,
    rule: &LatticeRule,
    alpha: f64,
    gamma: &ProductWeights,
    nu: f64,
) -> Result<Vec<f64>> {
    check_dims(data, rule)?;
    let c = c.resolve(data)?;
    Ok(rectangle_many(data, &[&c], rule, alpha, gamma, nu)?.pop().expect("one output"))
}

fn rectangle_many(
    data: &Dataset,
    cs: &[&[f64]],
    rule: &LatticeRule,
    alpha: f64,
    gamma: &ProductWeights,
    nu: f64,
) -> Result<Vec<Vec<f64>>> {
    let widths = rectangle_halfwidths(alpha, gamma, data.dim(), nu)?;
    let d = data.dim();
    let n_inv = 1.0 / data.len() as f64;
    Ok(per_lattice_point(data, rule, cs.len(), |diff, out| {
        for (n, row) in diff.chunks_exact(d).enumerate() {
            let mut p = 1.0;
            for (&x, &w) in row.iter().zip(&widths) {
                p *= dirichlet_kernel(w, x);
            }
            for (o, c) in out.iter_mut().zip(cs) {
                *o += c[n] * p;
            }
        }
        for o in out.iter_mut() {
            *o *= n_inv;
        }
    }))
}

/// Per-coordinate Dirichlet cut-offs `(τ^low, τ^up)` for every level
/// `t = 0..=m`; `τ^low = None` means the lower kernel is absent.
fn step_levels(alpha: f64, gamma: &ProductWeights, m: u32) -> Vec<Vec<(Option<u64>, u64)>> {
    gamma
        .as_slice()
        .iter()
        .enumerate()
        .map(|(j, &g)| {
            (0..=m)
                .map(|t| {
                    let up = halfwidth(alpha, g, 2f64.powi(t as i32)).expect("2^t ≥ 1");
                    let low = if j == 0 || t == 0 {
                        None
                    } else {
                        halfwidth(alpha, g, 2f64.powi(t as i32 - 1))
                    };
                    (low, up)
                })
                .collect()
        })
        .collect()
}

/// Step hyperbolic cross weights: for each shape vector `t` with
/// `‖t‖₁ = m`, coordinate 1 contributes `D_{τ₁^up}` and coordinate
/// `j ≥ 2` contributes `D_{τ_j^up} − D_{τ_j^low}`; the products are summed
/// over shape vectors and data points and scaled by `1/N`.
pub fn weights_step_cross(
    data: &Dataset,
    c: Coefficients,
    rule: &LatticeRule,
    alpha: f64,
    gamma: &ProductWeights,
    m: u32,
) -> Result<Vec<f64>> {
    check_dims(data, rule)?;
    let c = c.resolve(data)?;
    Ok(step_cross_many(data, &[&c], rule, alpha, gamma, m)?.pop().expect("one output"))
}

fn step_cross_many(
    data: &Dataset,
    cs: &[&[f64]],
    rule: &LatticeRule,
    alpha: f64,
    gamma: &ProductWeights,
    m: u32,
) -> Result<Vec<Vec<f64>>> {
    let d = data.dim();
    if gamma.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: gamma.dim(),
        });
    }
    if !(alpha > 0.0) {
        return Err(invalid(format!("smoothness α = {alpha} must be positive")));
    }
    let shapes = crate::index_sets::enumerate_shape_vectors(m, d)?;
    let flat_shapes: Vec<usize> = shapes.iter().flatten().map(|&t| t as usize).collect();
    let levels = step_levels(alpha, gamma, m);
    let stride = m as usize + 1;
    let n_inv = 1.0 / data.len() as f64;
    Ok(per_lattice_point(data, rule, cs.len(), |diff, out| {
        let mut table = vec![0.0; d * stride];
        for (n, row) in diff.chunks_exact(d).enumerate() {
            for (j, &x) in row.iter().enumerate() {
                for (t, &(low, up)) in levels[j].iter().enumerate() {
                    let mut v = dirichlet_kernel(up, x);
                    if let Some(lo) = low {
                        v -= dirichlet_kernel(lo, x);
                    }
                    table[j * stride + t] = v;
                }
            }
            let mut total = 0.0;
            for shape in flat_shapes.chunks_exact(d) {
                let mut p = 1.0;
                for (j, &t) in shape.iter().enumerate() {
                    p *= table[j * stride + t];
                }
                total += p;
            }
            for (o, c) in out.iter_mut().zip(cs) {
                *o += c[n] * total;
            }
        }
        for o in out.iter_mut() {
            *o *= n_inv;
        }
    }))
}

/// Whether every point of `rule` is a point of `data_rule`, i.e. `L | N`
/// and `(N/L)·g ≡ j·h (mod N)` for some `j`. Returns that `j`.
pub fn sublattice_multiplier(data_rule: &LatticeRule, rule: &LatticeRule) -> Option<u64> {
    let (n, l) = (data_rule.size(), rule.size());
    if data_rule.dim() != rule.dim() || n % l != 0 {
        return None;
    }
    let q = (n / l) as u128;
    let target: Vec<u128> = rule.generator().iter().map(|&g| q * g as u128 % n as u128).collect();
    (0..n).find(|&j| {
        data_rule
            .generator()
            .iter()
            .zip(&target)
            .all(|(&h, &t)| j as u128 * h as u128 % n as u128 == t)
    })
}

/// Weights for data on the lattice `data_rule` (points `x_n = frac(n·h/N)`).
///
/// With `responses = None` (`c_n = 1`) the Fourier coefficients are the
/// dual-lattice indicator `φ̌_k = [k·h ≡ 0 mod N]`; when the weight lattice
/// is contained in the data lattice every weight equals `|K ∩ X^⊥|`. With
/// responses `y_n` (indexed like the data points), `φ̌_k` is read off one
/// length-`N` FFT of `y` at `k·h mod N`.
pub fn weights_lattice_data(
    data_rule: &LatticeRule,
    responses: Option<&[f64]>,
    rule: &LatticeRule,
    k: &IndexSet,
) -> Result<Vec<Complex64>> {
    if data_rule.dim() != rule.dim() {
        return Err(Error::DimensionMismatch {
            expected: rule.dim(),
            got: data_rule.dim(),
        });
    }
    if k.dim() != rule.dim() {
        return Err(Error::DimensionMismatch {
            expected: rule.dim(),
            got: k.dim(),
        });
    }
    let n = data_rule.size() as usize;
    let coeffs: Vec<Complex64> = match responses {
        None => {
            let hits: Vec<bool> = k.iter().map(|f| data_rule.residue(f) == 0).collect();
            if sublattice_multiplier(data_rule, rule).is_some() {
                let count = hits.iter().filter(|&&h| h).count() as f64;
                return Ok(vec![Complex64::new(count, 0.0); rule.size() as usize]);
            }
            hits.into_iter()
                .map(|h| Complex64::new(if h { 1.0 } else { 0.0 }, 0.0))
                .collect()
        }
        Some(y) => {
            if y.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: y.len() });
            }
            let mut spectrum: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            FftPlanner::new().plan_fft_inverse(n).process(&mut spectrum);
            let n_inv = 1.0 / n as f64;
            k.iter()
                .map(|f| spectrum[data_rule.residue(f) as usize] * n_inv)
                .collect()
        }
    };
    Ok(synthesize_on_lattice(&coeffs, k, rule))
}

/// How a [`WeightSet`] was computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    Naive,
    General,
    Rectangle,
    StepCross,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Naive => "naive",
            Algorithm::General => "general",
            Algorithm::Rectangle => "rectangle",
            Algorithm::StepCross => "step-cross",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "naive" => Algorithm::Naive,
            "general" => Algorithm::General,
            "rectangle" => Algorithm::Rectangle,
            "step-cross" => Algorithm::StepCross,
            other => return Err(invalid(format!("unknown algorithm {other:?}"))),
        })
    }

    /// The family-specific algorithm for a set, or the general one.
    pub fn preferred(k: &IndexSet) -> Self {
        match k.family() {
            Family::Rectangle { .. } => Algorithm::Rectangle,
            Family::StepCross { .. } => Algorithm::StepCross,
            _ => Algorithm::General,
        }
    }
}

/// Largest imaginary part tolerated before complex weights of a named
/// family are reported as an error, relative to `1 + max |w|`.
pub const IMAG_TOLERANCE: f64 = 1e-9;

/// The two weight vectors that replace a dataset in loss evaluation.
///
/// Named families store real weights. Custom sets may produce complex
/// weights; their imaginary parts are kept in `w_xz_imag` / `w_xyz_imag`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSet {
    pub rule: LatticeRule,
    pub index_set: IndexSet,
    pub algorithm: Algorithm,
    pub mean_y2: f64,
    pub w_xz: Vec<f64>,
    pub w_xyz: Vec<f64>,
    pub w_xz_imag: Option<Vec<f64>>,
    pub w_xyz_imag: Option<Vec<f64>>,
}

impl WeightSet {
    pub fn len(&self) -> usize {
        self.w_xz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w_xz.is_empty()
    }

    pub fn is_complex(&self) -> bool {
        self.w_xz_imag.is_some()
    }

    /// `w_xz` as complex numbers.
    pub fn w_xz_complex(&self) -> Vec<Complex64> {
        zip_complex(&self.w_xz, self.w_xz_imag.as_deref())
    }

    /// `w_xyz` as complex numbers.
    pub fn w_xyz_complex(&self) -> Vec<Complex64> {
        zip_complex(&self.w_xyz, self.w_xyz_imag.as_deref())
    }
}

fn zip_complex(re: &[f64], im: Option<&[f64]>) -> Vec<Complex64> {
    match im {
        Some(im) => re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect(),
        None => re.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
    }
}

/// Splits complex weights; for named families the imaginary part must
/// be round-off and is dropped.
fn split(w: Vec<Complex64>, keep_imag: bool) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let re: Vec<f64> = w.iter().map(|v| v.re).collect();
    if keep_imag {
        return Ok((re, Some(w.iter().map(|v| v.im).collect())));
    }
    let scale = 1.0 + w.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if let Some((l, v)) = w.iter().enumerate().find(|(_, v)| v.im.abs() > IMAG_TOLERANCE * scale) {
        return Err(Error::InvalidData(format!(
            "weight {l} has imaginary part {} for a symmetric index set",
            v.im
        )));
    }
    Ok((re, None))
}

/// Computes both weight vectors for `data` with the chosen algorithm.
pub fn compress(data: &Dataset, rule: &LatticeRule, k: &IndexSet, algorithm: Algorithm) -> Result<WeightSet> {
    check_dims(data, rule)?;
    check_set(data, k)?;
    let keep_imag = !k.is_symmetric();
    let (w_xz, w_xyz, w_xz_imag, w_xyz_imag) = match algorithm {
        Algorithm::Naive | Algorithm::General => {
            let (a, b) = if algorithm == Algorithm::Naive {
                (
                    weights_naive(data, Coefficients::Ones, rule, k)?,
                    weights_naive(data, Coefficients::Responses, rule, k)?,
                )
            } else {
                let ones = vec![1.0; data.len()];
                let mut both = fourier_coefficients_many(data, &[&ones, &data.y], k);
                let b = synthesize_on_lattice(&both.pop().expect("two"), k, rule);
                let a = synthesize_on_lattice(&both.pop().expect("two"), k, rule);
                (a, b)
            };
            let (ar, ai) = split(a, keep_imag)?;
            let (br, bi) = split(b, keep_imag)?;
            (ar, br, ai, bi)
        }
        Algorithm::Rectangle => {
            let Family::Rectangle { nu } = *k.family() else {
                return Err(Error::Incompatible(format!(
                    "rectangle algorithm needs a rectangle index set, got {}",
                    k.family().name()
                )));
            };
            let ones = vec![1.0; data.len()];
            let mut w = rectangle_many(data, &[&ones, &data.y], rule, k.alpha(), k.gamma(), nu)?;
            let b = w.pop().expect("two");
            (w.pop().expect("two"), b, None, None)
        }
        Algorithm::StepCross => {
            let Family::StepCross { m } = *k.family() else {
                return Err(Error::Incompatible(format!(
                    "step-cross algorithm needs a step-cross index set, got {}",
                    k.family().name()
                )));
            };
            let ones = vec![1.0; data.len()];
            let mut w = step_cross_many(data, &[&ones, &data.y], rule, k.alpha(), k.gamma(), m)?;
            let b = w.pop().expect("two");
            (w.pop().expect("two"), b, None, None)
        }
    };
    Ok(WeightSet {
        rule: rule.clone(),
        index_set: k.clone(),
        algorithm,
        mean_y2: data.mean_y2(),
        w_xz,
        w_xyz,
        w_xz_imag,
        w_xyz_imag,
    })
}
