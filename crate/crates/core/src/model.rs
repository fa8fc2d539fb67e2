//! Trigonometric-polynomial models `f_θ(x) = Σ_{k∈K} θ_k e^{2πi k·x}` and
//! the exact and compressed mean-squared-error losses.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compression::{Dataset, WeightSet};
use crate::error::{invalid, Error, Result};
use crate::index_sets::{r_alpha, IndexSet};
use crate::lattice::{lattice_synthesis, LatticeRule, ProductWeights};

/// Largest imaginary residue for a model to count as real-valued.
pub const REAL_TOLERANCE: f64 = 1e-9;

/// Most terms [`TrigModel::square`] may produce.
pub const SQUARE_CAP: usize = 1_000_000;

/// A finite Fourier series with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigModel {
    dim: usize,
    freqs: Vec<i64>,
    theta: Vec<Complex64>,
}

impl TrigModel {
    /// Frequencies must be distinct and share one dimension.
    pub fn new(frequencies: Vec<Vec<i64>>, theta: Vec<Complex64>) -> Result<Self> {
        if frequencies.len() != theta.len() {
            return Err(Error::DimensionMismatch {
                expected: frequencies.len(),
                got: theta.len(),
            });
        }
        let dim = frequencies.first().map(Vec::len).unwrap_or(0);
        let mut seen = std::collections::HashSet::with_capacity(frequencies.len());
        let mut freqs = Vec::with_capacity(frequencies.len() * dim);
        for k in &frequencies {
            if k.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: k.len() });
            }
            if !seen.insert(k.as_slice()) {
                return Err(Error::InvalidData(format!("duplicate frequency {k:?}")));
            }
            freqs.extend_from_slice(k);
        }
        if theta.iter().any(|t| !t.re.is_finite() || !t.im.is_finite()) {
            return Err(Error::InvalidData("model coefficients must be finite".into()));
        }
        Ok(Self { dim, freqs, theta })
    }

    /// A model supported on an index set, one coefficient per frequency.
    pub fn on_index_set(k: &IndexSet, theta: Vec<Complex64>) -> Result<Self> {
        if k.len() != theta.len() {
            return Err(Error::DimensionMismatch {
                expected: k.len(),
                got: theta.len(),
            });
        }
        Ok(Self {
            dim: k.dim(),
            freqs: k.iter().flatten().copied().collect(),
            theta,
        })
    }

    /// A model that must be real-valued: `θ_{−k} = conj(θ_k)` for every `k`
    /// up to [`REAL_TOLERANCE`].
    pub fn real(frequencies: Vec<Vec<i64>>, theta: Vec<Complex64>) -> Result<Self> {
        let model = Self::new(frequencies, theta)?;
        let residue = model.conjugate_symmetry_residue();
        if residue > REAL_TOLERANCE {
            return Err(Error::InvalidData(format!(
                "model is not conjugate-symmetric (worst residue {residue:e})"
            )));
        }
        Ok(model)
    }

    /// The constant model `c`.
    pub fn constant(dim: usize, c: f64) -> Self {
        Self {
            dim,
            freqs: vec![0; dim],
            theta: vec![Complex64::new(c, 0.0)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn frequency(&self, i: usize) -> &[i64] {
        &self.freqs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn frequencies(&self) -> impl ExactSizeIterator<Item = &[i64]> + '_ {
        self.freqs.chunks_exact(self.dim.max(1)).take(self.theta.len())
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.theta
    }

    /// `max_k |θ_{−k} − conj(θ_k)|`, with a missing `−k` counting as `θ_{−k} = 0`.
    pub fn conjugate_symmetry_residue(&self) -> f64 {
        let index: std::collections::HashMap<&[i64], usize> =
            self.frequencies().enumerate().map(|(i, k)| (k, i)).collect();
        self.frequencies()
            .zip(&self.theta)
            .map(|(k, t)| {
                let neg: Vec<i64> = k.iter().map(|v| -v).collect();
                let other = index.get(neg.as_slice()).map(|&i| self.theta[i]).unwrap_or_default();
                (other - t.conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `f_θ(x)`, one complex exponential per term.
    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        self.check_point(x)?;
        Ok(self
            .frequencies()
            .zip(&self.theta)
            .map(|(k, t)| {
                let phase: f64 = k.iter().zip(x).map(|(&kj, &xj)| kj as f64 * xj).sum();
                let r = phase - phase.round();
                let (s, c) = (2.0 * PI * r).sin_cos();
                t * Complex64::new(c, s)
            })
            .sum())
    }

    /// `f_θ` at every data point, using per-coordinate tables of
    /// `e^{2πi k_j x_j}` for each point.
    pub fn eval_points(&self, data: &Dataset) -> Result<Vec<Complex64>> {
        if data.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: data.dim(),
            });
        }
        let mut ranges = vec![(0i64, 0i64); self.dim];
        for k in self.frequencies() {
            for (r, &v) in ranges.iter_mut().zip(k) {
                r.0 = r.0.min(v);
                r.1 = r.1.max(v);
            }
        }
        let points: Vec<&[f64]> = data.points().collect();
        Ok(points
            .par_iter()
            .map(|x| {
                let tables: Vec<Vec<Complex64>> = ranges
                    .iter()
                    .zip(x.iter())
                    .map(|(&(lo, hi), &xj)| {
                        (lo..=hi)
                            .map(|k| {
                                let p = k as f64 * xj;
                                let (s, c) = (2.0 * PI * (p - p.round())).sin_cos();
                                Complex64::new(c, s)
                            })
                            .collect()
                    })
                    .collect();
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, t) in self.frequencies().zip(&self.theta) {
                    let mut w = *t;
                    for (j, &kj) in k.iter().enumerate() {
                        w *= tables[j][(kj - ranges[j].0) as usize];
                    }
                    acc += w;
                }
                acc
            })
            .collect())
    }

    /// `f_θ(z_ℓ)` for `ℓ = 0,…,L−1`: coefficients are bucketed by
    /// `k·g mod L` and one length-`L` FFT finishes the job.
    pub fn eval_on_lattice(&self, rule: &LatticeRule) -> Result<Vec<Complex64>> {
        if rule.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: rule.dim(),
            });
        }
        let mut buckets = vec![Complex64::new(0.0, 0.0); rule.size() as usize];
        for (k, t) in self.frequencies().zip(&self.theta) {
            buckets[rule.residue(k) as usize] += t;
        }
        Ok(lattice_synthesis(buckets))
    }

    /// `f_θ²` as an explicit trigonometric polynomial on the Minkowski sum
    /// `K ⊕ K`, coefficients by discrete convolution. At most `cap` terms.
    pub fn square(&self, cap: usize) -> Result<TrigModel> {
        let d = self.dim;
        let mut lo = vec![0i64; d];
        let mut hi = vec![0i64; d];
        for k in self.frequencies() {
            for j in 0..d {
                lo[j] = lo[j].min(2 * k[j]);
                hi[j] = hi[j].max(2 * k[j]);
            }
        }
        let widths: Vec<u128> = lo.iter().zip(&hi).map(|(&a, &b)| (b - a + 1) as u128).collect();
        let volume = widths.iter().fold(1u128, |a, &w| a.saturating_mul(w));
        let n = self.len();
        let mut terms: Vec<(Vec<i64>, Complex64)> = Vec::new();
        if volume <= 4 * cap as u128 {
            let mut dense = vec![Complex64::new(0.0, 0.0); volume as usize];
            let mut touched = vec![false; volume as usize];
            let index = |k: &[i64]| -> usize {
                let mut idx = 0u128;
                for j in 0..d {
                    idx = idx * widths[j] + (k[j] - lo[j]) as u128;
                }
                idx as usize
            };
            let mut sum = vec![0i64; d];
            for a in 0..n {
                let ka = self.frequency(a);
                for b in 0..n {
                    let kb = self.frequency(b);
                    for j in 0..d {
                        sum[j] = ka[j] + kb[j];
                    }
                    let i = index(&sum);
                    dense[i] += self.theta[a] * self.theta[b];
                    touched[i] = true;
                }
            }
            let count = touched.iter().filter(|&&t| t).count();
            if count > cap {
                return Err(Error::CapExceeded {
                    what: "squared model support",
                    predicted: count as u128,
                    cap: cap as u128,
                });
            }
            let mut k = lo.clone();
            for i in 0..volume as usize {
                if touched[i] {
                    terms.push((k.clone(), dense[i]));
                }
                for j in (0..d).rev() {
                    if k[j] < hi[j] {
                        k[j] += 1;
                        break;
                    }
                    k[j] = lo[j];
                }
            }
        } else {
            let mut sparse: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
            for a in 0..n {
                let ka = self.frequency(a);
                for b in 0..n {
                    let kb = self.frequency(b);
                    let key: Vec<i64> = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
                    *sparse.entry(key).or_default() += self.theta[a] * self.theta[b];
                    if sparse.len() > cap {
                        return Err(Error::CapExceeded {
                            what: "squared model support",
                            predicted: sparse.len() as u128,
                            cap: cap as u128,
                        });
                    }
                }
            }
            terms.extend(sparse);
        }
        let (freqs, theta): (Vec<Vec<i64>>, Vec<Complex64>) = terms.into_iter().unzip();
        Ok(TrigModel {
            dim: d,
            freqs: freqs.into_iter().flatten().collect(),
            theta,
        })
    }

    /// Weighted Wiener-algebra norm `Σ_k √r_α(γ,k) |θ_k|`.
    pub fn wiener_norm(&self, alpha: f64, gamma: &ProductWeights) -> Result<f64> {
        self.check_gamma(gamma)?;
        Ok(self
            .frequencies()
            .zip(&self.theta)
            .map(|(k, t)| r_alpha(alpha, gamma, k).sqrt() * t.norm())
            .sum())
    }

    /// Weighted Korobov norm `(Σ_k r_α(γ,k) |θ_k|²)^{1/2}`.
    pub fn korobov_norm(&self, alpha: f64, gamma: &ProductWeights) -> Result<f64> {
        self.check_gamma(gamma)?;
        Ok(self
            .frequencies()
            .zip(&self.theta)
            .map(|(k, t)| r_alpha(alpha, gamma, k) * t.norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    fn check_gamma(&self, gamma: &ProductWeights) -> Result<()> {
        if gamma.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: gamma.dim(),
            });
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    frequencies: Vec<Vec<i64>>,
    coefficients: Vec<f64>,
}

impl Serialize for TrigModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawModel {
            frequencies: self.frequencies().map(<[i64]>::to_vec).collect(),
            coefficients: self.theta.iter().flat_map(|t| [t.re, t.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TrigModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawModel::deserialize(d)?;
        if raw.coefficients.len() != 2 * raw.frequencies.len() {
            return Err(D::Error::custom(format!(
                "{} frequencies need {} interleaved coefficient values, got {}",
                raw.frequencies.len(),
                2 * raw.frequencies.len(),
                raw.coefficients.len()
            )));
        }
        let theta = raw
            .coefficients
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        TrigModel::new(raw.frequencies, theta).map_err(D::Error::custom)
    }
}

/// Penalties on the coefficient vector.
#[derive(Clone, Debug, PartialEq)]
pub enum Regularizer {
    None,
    /// `‖θ‖₀`.
    BestSubset,
    /// `‖θ‖₁`.
    Lasso,
    /// `‖Tθ‖₂²`; `None` means `T = I`. `T` is given row by row.
    Ridge(Option<Vec<Vec<f64>>>),
    /// `a‖θ‖₁ + (1 − a)‖θ‖₂²`, `a ∈ [0, 1]`.
    Elastic(f64),
}

impl Regularizer {
    pub fn eval(&self, theta: &[Complex64]) -> Result<f64> {
        let l1 = || theta.iter().map(|t| t.norm()).sum::<f64>();
        let l2sq = || theta.iter().map(|t| t.norm_sqr()).sum::<f64>();
        match self {
            Regularizer::None => Ok(0.0),
            Regularizer::BestSubset => Ok(theta.iter().filter(|t| t.norm() != 0.0).count() as f64),
            Regularizer::Lasso => Ok(l1()),
            Regularizer::Ridge(None) => Ok(l2sq()),
            Regularizer::Ridge(Some(t)) => {
                let mut acc = 0.0;
                for (i, row) in t.iter().enumerate() {
                    if row.len() != theta.len() {
                        return Err(invalid(format!(
                            "Tikhonov row {i} has {} columns, model has {} coefficients",
                            row.len(),
                            theta.len()
                        )));
                    }
                    let v: Complex64 = row.iter().zip(theta).map(|(&a, t)| a * t).sum();
                    acc += v.norm_sqr();
                }
                Ok(acc)
            }
            Regularizer::Elastic(a) => {
                if !(0.0..=1.0).contains(a) {
                    return Err(invalid(format!("elastic-net mixing {a} outside [0, 1]")));
                }
                Ok(a * l1() + (1.0 - a) * l2sq())
            }
        }
    }
}

/// `value = quadratic − 2·cross + constant + lambda·regularization`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LossReport {
    pub value: f64,
    pub quadratic: f64,
    pub cross: f64,
    pub constant: f64,
    pub regularization: f64,
    pub lambda: f64,
}

impl LossReport {
    pub fn new(quadratic: f64, cross: f64, constant: f64, regularization: f64, lambda: f64) -> Self {
        Self {
            value: quadratic - 2.0 * cross + constant + lambda * regularization,
            quadratic,
            cross,
            constant,
            regularization,
            lambda,
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("λ = {lambda} must be a finite nonnegative number")))
    }
}

fn is_real(values: &[Complex64]) -> bool {
    values.iter().all(|v| v.im.abs() <= REAL_TOLERANCE)
}

/// `(1/N) Σ_n (f_θ(x_n) − y_n)² + λ r(θ)`, split into its three sums.
/// A model that is not real on the data is scored by `|f_θ(x_n) − y_n|²`.
pub fn exact_loss(model: &TrigModel, data: &Dataset, reg: &Regularizer, lambda: f64) -> Result<LossReport> {
    check_lambda(lambda)?;
    let f = model.eval_points(data)?;
    let n_inv = 1.0 / data.len() as f64;
    let real = is_real(&f);
    let quadratic = f
        .iter()
        .map(|v| if real { v.re * v.re } else { v.norm_sqr() })
        .sum::<f64>()
        * n_inv;
    let cross = f.iter().zip(data.responses()).map(|(v, &y)| v.re * y).sum::<f64>() * n_inv;
    let r = reg.eval(model.coefficients())?;
    Ok(LossReport::new(quadratic, cross, data.mean_y2(), r, lambda))
}

/// `(1/L) Σ_ℓ f_θ²(z_ℓ) W_{XZ,ℓ} − (2/L) Σ_ℓ f_θ(z_ℓ) W_{XYZ,ℓ} + mean(y²) + λ r(θ)`.
///
/// Complex weights (custom index sets) contribute the real part of each sum.
pub fn compressed_loss(
    model: &TrigModel,
    weights: &WeightSet,
    rule: &LatticeRule,
    reg: &Regularizer,
    lambda: f64,
) -> Result<LossReport> {
    check_lambda(lambda)?;
    if &weights.rule != rule {
        return Err(Error::Incompatible(format!(
            "weights were computed on lattice (L = {}, g = {:?}), evaluation uses (L = {}, g = {:?})",
            weights.rule.size(),
            weights.rule.generator(),
            rule.size(),
            rule.generator()
        )));
    }
    let f = model.eval_on_lattice(rule)?;
    let l_inv = 1.0 / rule.size() as f64;
    let real = is_real(&f);
    let (quadratic, cross) = if weights.is_complex() {
        let wxz = weights.w_xz_complex();
        let wxyz = weights.w_xyz_complex();
        let q: f64 = f
            .iter()
            .zip(&wxz)
            .map(|(v, w)| if real { (v.re * v.re * w).re } else { (v * v * w).re })
            .sum();
        let c: f64 = f.iter().zip(&wxyz).map(|(v, w)| (v * w).re).sum();
        (q * l_inv, c * l_inv)
    } else {
        let q: f64 = f
            .iter()
            .zip(&weights.w_xz)
            .map(|(v, &w)| if real { v.re * v.re * w } else { v.norm_sqr() * w })
            .sum();
        let c: f64 = f.iter().zip(&weights.w_xyz).map(|(v, &w)| v.re * w).sum();
        (q * l_inv, c * l_inv)
    };
    let r = reg.eval(model.coefficients())?;
    Ok(LossReport::new(quadratic, cross, weights.mean_y2, r, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compression::{compress, Algorithm};
    use crate::index_sets::enumerate_cross;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        let m = TrigModel::constant(2, 3.5);
        assert_eq!(m.eval(&[0.3, 0.9]).unwrap(), c(3.5, 0.0));
        let m = TrigModel::new(vec![vec![1, 0]], vec![c(1.0, 0.0)]).unwrap();
        let v = m.eval(&[0.25, 0.7]).unwrap();
        assert!((v - c(0.0, 1.0)).norm() < 1e-15);
        assert!(m.eval(&[0.1]).is_err());
    }

    #[test]
    fn lattice_eval_matches_pointwise() {
        let rule = LatticeRule::new(31, vec![1, 12]).unwrap();
        let freqs = vec![vec![0, 0], vec![1, -2], vec![3, 5], vec![-7, 1]];
        let theta = vec![c(1.0, 0.5), c(-0.3, 0.2), c(0.7, -1.1), c(0.05, 0.0)];
        let m = TrigModel::new(freqs, theta).unwrap();
        let fast = m.eval_on_lattice(&rule).unwrap();
        for (l, v) in fast.iter().enumerate() {
            let direct = m.eval(&rule.point(l as u64)).unwrap();
            assert!((v - direct).norm() < 1e-13);
        }
        // k·g ≡ 0 mod L gives a constant vector.
        let m = TrigModel::new(vec![vec![12, -1]], vec![c(2.0, -1.0)]).unwrap();
        assert_eq!(rule.residue(&[12, -1]), 0);
        for v in m.eval_on_lattice(&rule).unwrap() {
            assert!((v - c(2.0, -1.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn eval_points_matches_eval() {
        let data = Dataset::new(vec![vec![0.1, 0.2], vec![0.77, 0.31]], vec![0.0, 1.0]).unwrap();
        let m = TrigModel::new(vec![vec![2, -3], vec![-1, 4]], vec![c(0.5, 0.1), c(-1.0, 2.0)]).unwrap();
        let fast = m.eval_points(&data).unwrap();
        for (n, v) in fast.iter().enumerate() {
            assert!((v - m.eval(data.point(n)).unwrap()).norm() < 1e-14);
        }
    }

    #[test]
    fn square_matches_pointwise_square() {
        let m = TrigModel::real(
            vec![vec![0, 0], vec![1, 2], vec![-1, -2], vec![3, 0], vec![-3, 0]],
            vec![c(0.5, 0.0), c(0.2, 0.3), c(0.2, -0.3), c(-0.4, 0.0), c(-0.4, 0.0)],
        )
        .unwrap();
        let sq = m.square(SQUARE_CAP).unwrap();
        for x in [[0.1, 0.2], [0.6, 0.35], [0.99, 0.0]] {
            let f = m.eval(&x).unwrap();
            let g = sq.eval(&x).unwrap();
            assert!((f * f - g).norm() < 1e-13);
        }
        assert!(m.square(3).is_err());
    }

    #[test]
    fn real_constructor_rejects_asymmetric() {
        assert!(TrigModel::real(vec![vec![1]], vec![c(1.0, 0.0)]).is_err());
        assert!(TrigModel::real(vec![vec![1], vec![-1]], vec![c(1.0, 1.0), c(1.0, -1.0)]).is_ok());
        assert!(TrigModel::new(vec![vec![1], vec![1]], vec![c(1.0, 0.0); 2]).is_err());
    }

    #[test]
    fn regularizer_examples() {
        let theta = [c(0.0, 0.0), c(3.0, 0.0), c(-4.0, 0.0)];
        assert_eq!(Regularizer::BestSubset.eval(&theta).unwrap(), 2.0);
        assert_eq!(Regularizer::Lasso.eval(&theta).unwrap(), 7.0);
        assert_eq!(Regularizer::Ridge(None).eval(&theta).unwrap(), 25.0);
        assert_eq!(Regularizer::Elastic(0.5).eval(&theta).unwrap(), 16.0);
        assert!(Regularizer::Elastic(1.5).eval(&theta).is_err());
        let t = vec![vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0]];
        assert_eq!(Regularizer::Ridge(Some(t)).eval(&theta).unwrap(), 36.0);
        assert!(Regularizer::Ridge(Some(vec![vec![1.0]])).eval(&theta).is_err());
        let zero = [c(0.0, 0.0); 3];
        for r in [Regularizer::None, Regularizer::BestSubset, Regularizer::Lasso, Regularizer::Ridge(None), Regularizer::Elastic(0.3)] {
            assert_eq!(r.eval(&zero).unwrap(), 0.0);
        }
    }

    #[test]
    fn exact_loss_examples() {
        let data = Dataset::new(vec![vec![0.1], vec![0.6]], vec![1.0, -1.0]).unwrap();
        let one = TrigModel::constant(1, 1.0);
        let r = exact_loss(&one, &data, &Regularizer::None, 0.0).unwrap();
        assert!((r.value - 2.0).abs() < 1e-15);
        let zero = TrigModel::constant(1, 0.0);
        let r = exact_loss(&zero, &data, &Regularizer::Lasso, 0.0).unwrap();
        assert_eq!(r.value, 1.0);
        let r = exact_loss(&one, &data, &Regularizer::Lasso, 0.5).unwrap();
        assert_eq!(r.value, r.quadratic - 2.0 * r.cross + r.constant + r.lambda * r.regularization);
        assert!(exact_loss(&one, &data, &Regularizer::None, -1.0).is_err());
    }

    #[test]
    fn compressed_constant_model_is_exact() {
        let pts: Vec<Vec<f64>> = (0..40).map(|i| vec![(i as f64 * 0.618_034).fract(), (i as f64 * 0.414_21).fract()]).collect();
        let ys: Vec<f64> = pts.iter().map(|p| (6.0 * p[0]).sin() + p[1]).collect();
        let data = Dataset::new(pts, ys).unwrap();
        let rule = LatticeRule::new(31, vec![1, 12]).unwrap();
        let g = ProductWeights::ones(2);
        let k = enumerate_cross(1.0, &g, 2, 8.0).unwrap();
        assert!(k.iter().all(|f| f.iter().all(|&v| v == 0) || rule.residue(f) != 0));
        let w = compress(&data, &rule, &k, Algorithm::General).unwrap();
        for cst in [1.0, -2.5] {
            let m = TrigModel::constant(2, cst);
            let a = exact_loss(&m, &data, &Regularizer::None, 0.0).unwrap();
            let b = compressed_loss(&m, &w, &rule, &Regularizer::None, 0.0).unwrap();
            assert!((a.value - b.value).abs() < 1e-12);
        }
        let zero = TrigModel::constant(2, 0.0);
        let b = compressed_loss(&zero, &w, &rule, &Regularizer::None, 0.0).unwrap();
        assert_eq!(b.value, data.mean_y2());
        let other = LatticeRule::new(31, vec![1, 11]).unwrap();
        assert!(compressed_loss(&zero, &w, &other, &Regularizer::None, 0.0).is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let m = TrigModel::new(vec![vec![1, -2], vec![0, 3]], vec![c(0.25, -1.5), c(1e-300, 7.0)]).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        let back: TrigModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
}
