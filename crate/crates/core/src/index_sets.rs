//! Frequency truncation sets built from the decay function
//! `r_α(γ, k) = Π_j max(|k_j|^{2α} / γ_j, 1)`.
//!
//! Three families are supported:
//!
//! * the weighted continuous hyperbolic cross `K_ν = {k : r_α(γ, k) ≤ ν}`,
//! * the weighted rectangle `R_ν = {k : max_j r_α(γ_j, k_j) ≤ ν}`,
//! * the weighted step hyperbolic cross
//!   `Q_m = ∪_{‖t‖₁ = m} {k : r_α(γ_j, k_j) ≤ 2^{t_j} for all j}`.
//!
//! Every enumerator lists frequencies in lexicographic order, and all
//! membership decisions go through one boundary predicate so that
//! [`contains`] and the enumerators never disagree.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::ProductWeights;
use crate::special::{binomial, zeta};

/// Default limit on the number of frequencies an enumerator may produce.
pub const DEFAULT_CAP: usize = 10_000_000;

/// Relative slack of the `≤` comparisons at a family boundary.
pub const BOUNDARY_SLACK: f64 = 1e-12;

/// `r_α(γ, k) = Π_j max(|k_j|^{2α} / γ_j, 1)`.
pub fn r_alpha(alpha: f64, gamma: &ProductWeights, k: &[i64]) -> f64 {
    k.iter()
        .zip(gamma.as_slice())
        .map(|(&kj, &g)| factor(alpha, g, kj))
        .product()
}

fn factor(alpha: f64, gamma: f64, k: i64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let a = k.unsigned_abs() as f64;
    let p = 2.0 * alpha;
    let pow = if p.fract() == 0.0 && p <= 64.0 {
        a.powi(p as i32)
    } else {
        a.powf(p)
    };
    (pow / gamma).max(1.0)
}

fn within(value: f64, bound: f64) -> bool {
    value <= bound * (1.0 + BOUNDARY_SLACK)
}

/// Largest `k ≥ 0` with `max(k^{2α}/γ, 1) ≤ bound` (boundary slack
/// included); `None` when even `k = 0` is excluded (`bound < 1`).
pub(crate) fn halfwidth(alpha: f64, gamma: f64, bound: f64) -> Option<u64> {
    if !within(1.0, bound) {
        return None;
    }
    let guess = (gamma * bound).powf(1.0 / (2.0 * alpha)).floor();
    let mut k = if guess.is_finite() { guess.max(0.0) as i64 } else { 0 };
    while k > 0 && !within(factor(alpha, gamma, k), bound) {
        k -= 1;
    }
    while within(factor(alpha, gamma, k + 1), bound) {
        k += 1;
    }
    Some(k as u64)
}

/// Dyadic level of one coordinate: the least `t ≥ 0` with
/// `r_α(γ_j, k_j) ≤ 2^t`.
fn level(alpha: f64, gamma: f64, k: i64) -> u32 {
    let r = factor(alpha, gamma, k);
    let mut t = r.log2().ceil().max(0.0) as u32;
    while t > 0 && within(r, 2f64.powi(t as i32 - 1)) {
        t -= 1;
    }
    while !within(r, 2f64.powi(t as i32)) {
        t += 1;
    }
    t
}

/// Which family a frequency set belongs to, with its size parameter.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    ContinuousCross { nu: f64 },
    Rectangle { nu: f64 },
    StepCross { m: u32 },
    Custom,
}

impl Family {
    /// Short name used in files and on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            Family::ContinuousCross { .. } => "cross",
            Family::Rectangle { .. } => "rectangle",
            Family::StepCross { .. } => "step-cross",
            Family::Custom => "custom",
        }
    }

    fn param(&self) -> Option<f64> {
        match *self {
            Family::ContinuousCross { nu } | Family::Rectangle { nu } => Some(nu),
            Family::StepCross { m } => Some(m as f64),
            Family::Custom => None,
        }
    }

    fn from_parts(name: &str, param: Option<f64>) -> Result<Self> {
        let need = || param.ok_or_else(|| Error::Format(format!("family {name} needs a parameter")));
        Ok(match name {
            "cross" => Family::ContinuousCross { nu: need()? },
            "rectangle" => Family::Rectangle { nu: need()? },
            "step-cross" => {
                let m = need()?;
                if m < 0.0 || m.fract() != 0.0 || m > u32::MAX as f64 {
                    return Err(Error::Format(format!("step-cross level {m} is not a nonnegative integer")));
                }
                Family::StepCross { m: m as u32 }
            }
            "custom" => Family::Custom,
            other => return Err(Error::Format(format!("unknown index-set family {other:?}"))),
        })
    }
}

/// A finite, duplicate-free set of integer frequency vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexSet {
    family: Family,
    alpha: f64,
    gamma: ProductWeights,
    dim: usize,
    flat: Vec<i64>,
}

impl IndexSet {
    /// Enumerates a named family. `Family::Custom` is rejected; use
    /// [`IndexSet::custom`].
    pub fn enumerate(family: Family, alpha: f64, gamma: &ProductWeights, cap: usize) -> Result<Self> {
        match family {
            Family::ContinuousCross { nu } => enumerate_cross_capped(alpha, gamma, gamma.dim(), nu, cap),
            Family::Rectangle { nu } => enumerate_rectangle_capped(alpha, gamma, gamma.dim(), nu, cap),
            Family::StepCross { m } => enumerate_step_cross_capped(alpha, gamma, gamma.dim(), m, cap),
            Family::Custom => Err(invalid("custom sets are built from an explicit frequency list")),
        }
    }

    /// An explicit set. Frequencies are sorted lexicographically and
    /// duplicates rejected. `alpha` and `gamma` are recorded for bound
    /// computations only.
    pub fn custom(frequencies: Vec<Vec<i64>>, alpha: f64, gamma: ProductWeights) -> Result<Self> {
        let dim = gamma.dim();
        let mut sorted = BTreeSet::new();
        for k in frequencies {
            if k.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: k.len() });
            }
            if !sorted.insert(k.clone()) {
                return Err(Error::InvalidData(format!("duplicate frequency {k:?}")));
            }
        }
        let flat = sorted.into_iter().flatten().collect();
        Ok(Self {
            family: Family::Custom,
            alpha,
            gamma,
            dim,
            flat,
        })
    }

    fn from_sorted(family: Family, alpha: f64, gamma: &ProductWeights, flat: Vec<i64>) -> Self {
        Self {
            family,
            alpha,
            gamma: gamma.clone(),
            dim: gamma.dim(),
            flat,
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> &ProductWeights {
        &self.gamma
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.flat.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> &[i64] {
        &self.flat[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[i64]> + '_ {
        self.flat.chunks_exact(self.dim.max(1))
    }

    /// Membership by the family rule (binary search for custom sets).
    pub fn contains(&self, k: &[i64]) -> bool {
        if k.len() != self.dim {
            return false;
        }
        match self.family {
            Family::Custom => {
                let (mut lo, mut hi) = (0, self.len());
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    match self.get(mid).cmp(k) {
                        std::cmp::Ordering::Less => lo = mid + 1,
                        std::cmp::Ordering::Greater => hi = mid,
                        std::cmp::Ordering::Equal => return true,
                    }
                }
                false
            }
            ref family => contains(family, self.alpha, &self.gamma, k),
        }
    }

    /// Checks that the set was built for the given `(α, γ)`.
    pub fn ensure_parameters(&self, alpha: f64, gamma: &ProductWeights) -> Result<()> {
        if self.alpha != alpha || &self.gamma != gamma {
            return Err(Error::Incompatible(format!(
                "index set built for α = {}, γ = {:?}; requested α = {alpha}, γ = {:?}",
                self.alpha,
                self.gamma.as_slice(),
                gamma.as_slice()
            )));
        }
        Ok(())
    }

    /// True when `k ∈ K` implies `−k ∈ K`.
    pub fn is_symmetric(&self) -> bool {
        match self.family {
            Family::Custom => self.iter().all(|k| {
                let neg: Vec<i64> = k.iter().map(|v| -v).collect();
                self.contains(&neg)
            }),
            _ => true,
        }
    }
}

/// Membership test for a named family, `O(d)`.
pub fn contains(family: &Family, alpha: f64, gamma: &ProductWeights, k: &[i64]) -> bool {
    let g = gamma.as_slice();
    if k.len() != g.len() {
        return false;
    }
    match *family {
        Family::ContinuousCross { nu } => within(r_alpha(alpha, gamma, k), nu),
        Family::Rectangle { nu } => k
            .iter()
            .zip(g)
            .all(|(&kj, &gj)| within(factor(alpha, gj, kj), nu)),
        Family::StepCross { m } => {
            let mut total = 0u64;
            for (&kj, &gj) in k.iter().zip(g) {
                total += level(alpha, gj, kj) as u64;
                if total > m as u64 {
                    return false;
                }
            }
            true
        }
        Family::Custom => false,
    }
}

fn check_common(alpha: f64, gamma: &ProductWeights, d: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid(format!("smoothness α = {alpha} must be positive")));
    }
    if gamma.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: gamma.dim() });
    }
    if d == 0 {
        return Err(invalid("dimension must be positive"));
    }
    Ok(())
}

fn check_nu(nu: f64) -> Result<()> {
    if nu >= 1.0 && nu.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("ν = {nu} must be a finite number ≥ 1")))
    }
}

fn cap_error(what: &'static str, predicted: u128, cap: usize) -> Error {
    Error::CapExceeded {
        what,
        predicted,
        cap: cap as u128,
    }
}

/// `{k ∈ ℤ^d : r_α(γ, k) ≤ ν}` with the default cap.
pub fn enumerate_cross(alpha: f64, gamma: &ProductWeights, d: usize, nu: f64) -> Result<IndexSet> {
    enumerate_cross_capped(alpha, gamma, d, nu, DEFAULT_CAP)
}

/// Weighted continuous hyperbolic cross, enumerated coordinate by
/// coordinate: `k_j` ranges over `|k_j| ≤ (γ_j b)^{1/(2α)}` for the
/// remaining budget `b`, which is then divided by the realised factor.
pub fn enumerate_cross_capped(
    alpha: f64,
    gamma: &ProductWeights,
    d: usize,
    nu: f64,
    cap: usize,
) -> Result<IndexSet> {
    check_common(alpha, gamma, d)?;
    check_nu(nu)?;
    let g = gamma.as_slice();

    let mut count = 0u128;
    if !count_cross(alpha, g, nu, 0, nu, cap as u128, &mut count) {
        return Err(cap_error("continuous hyperbolic cross", count, cap));
    }

    let mut flat = Vec::with_capacity(count as usize * d);
    let mut k = vec![0i64; d];
    walk_cross(alpha, gamma, nu, 0, nu, &mut k, &mut flat);
    Ok(IndexSet::from_sorted(Family::ContinuousCross { nu }, alpha, gamma, flat))
}

/// Generous per-coordinate bound for the budget walk; the leaf applies
/// the exact predicate.
fn budget_width(alpha: f64, gamma: f64, budget: f64) -> Option<u64> {
    halfwidth(alpha, gamma, budget * (1.0 + 1e-9))
}

fn count_cross(alpha: f64, g: &[f64], nu: f64, j: usize, budget: f64, cap: u128, count: &mut u128) -> bool {
    let Some(w) = budget_width(alpha, g[j], budget) else {
        return true;
    };
    if j + 1 == g.len() {
        *count += 2 * w as u128 + 1;
        return *count <= cap;
    }
    for a in 0..=w as i64 {
        let f = factor(alpha, g[j], a);
        let mult = if a == 0 { 1 } else { 2 };
        for _ in 0..mult {
            if !count_cross(alpha, g, nu, j + 1, budget / f, cap, count) {
                return false;
            }
        }
    }
    true
}

fn walk_cross(
    alpha: f64,
    gamma: &ProductWeights,
    nu: f64,
    j: usize,
    budget: f64,
    k: &mut Vec<i64>,
    out: &mut Vec<i64>,
) {
    let g = gamma.as_slice();
    let Some(w) = budget_width(alpha, g[j], budget) else {
        return;
    };
    let w = w as i64;
    for v in -w..=w {
        k[j] = v;
        if j + 1 == g.len() {
            if within(r_alpha(alpha, gamma, k), nu) {
                out.extend_from_slice(k);
            }
        } else {
            walk_cross(alpha, gamma, nu, j + 1, budget / factor(alpha, g[j], v), k, out);
        }
    }
    k[j] = 0;
}

/// Rectangle halfwidths `k*_j = ⌊(γ_j ν)^{1/(2α)}⌋`.
pub fn rectangle_halfwidths(alpha: f64, gamma: &ProductWeights, d: usize, nu: f64) -> Result<Vec<u64>> {
    check_common(alpha, gamma, d)?;
    check_nu(nu)?;
    Ok(gamma
        .as_slice()
        .iter()
        .map(|&g| halfwidth(alpha, g, nu).unwrap_or(0))
        .collect())
}

/// The weighted rectangle `Π_j {−k*_j, …, k*_j}` with the default cap.
pub fn enumerate_rectangle(alpha: f64, gamma: &ProductWeights, d: usize, nu: f64) -> Result<IndexSet> {
    enumerate_rectangle_capped(alpha, gamma, d, nu, DEFAULT_CAP)
}

pub fn enumerate_rectangle_capped(
    alpha: f64,
    gamma: &ProductWeights,
    d: usize,
    nu: f64,
    cap: usize,
) -> Result<IndexSet> {
    let widths = rectangle_halfwidths(alpha, gamma, d, nu)?;
    let ranges: Vec<(i64, i64)> = widths.iter().map(|&w| (-(w as i64), w as i64)).collect();
    let predicted = box_size(&ranges);
    if predicted > cap as u128 {
        return Err(cap_error("rectangle", predicted, cap));
    }
    let mut flat = Vec::with_capacity(predicted as usize * d);
    push_box(&ranges, &mut flat);
    Ok(IndexSet::from_sorted(Family::Rectangle { nu }, alpha, gamma, flat))
}

fn box_size(ranges: &[(i64, i64)]) -> u128 {
    ranges
        .iter()
        .map(|&(lo, hi)| if hi < lo { 0 } else { (hi - lo + 1) as u128 })
        .fold(1u128, |acc, w| acc.saturating_mul(w))
}

/// Appends every point of an axis-aligned integer box in lexicographic order.
fn push_box(ranges: &[(i64, i64)], out: &mut Vec<i64>) {
    let axes: Vec<Vec<i64>> = ranges.iter().map(|&(lo, hi)| (lo..=hi).collect()).collect();
    for_each_in_product(&axes, |k| out.extend_from_slice(k));
}

/// Calls `f` on every element of `axes[0] × … × axes[d−1]`, last axis fastest.
fn for_each_in_product(axes: &[Vec<i64>], mut f: impl FnMut(&[i64])) {
    if axes.iter().any(|a| a.is_empty()) {
        return;
    }
    let d = axes.len();
    let mut idx = vec![0usize; d];
    let mut k: Vec<i64> = axes.iter().map(|a| a[0]).collect();
    loop {
        f(&k);
        let mut j = d;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            if idx[j] + 1 < axes[j].len() {
                idx[j] += 1;
                k[j] = axes[j][idx[j]];
                break;
            }
            idx[j] = 0;
            k[j] = axes[j][0];
        }
    }
}

/// A shape vector `t ∈ ℕ₀^d`.
pub type ShapeVector = Vec<u32>;

/// `|T(m, d)| = C(d − 1 + m, d − 1)`.
pub fn shape_vector_count(m: u32, d: usize) -> Option<u64> {
    if d == 0 {
        return Some(if m == 0 { 1 } else { 0 });
    }
    binomial(d as u64 - 1 + m as u64, d as u64 - 1)
}

/// All `t ∈ ℕ₀^d` with `‖t‖₁ = m` in lexicographic order, default cap.
pub fn enumerate_shape_vectors(m: u32, d: usize) -> Result<Vec<ShapeVector>> {
    enumerate_shape_vectors_capped(m, d, DEFAULT_CAP)
}

pub fn enumerate_shape_vectors_capped(m: u32, d: usize, cap: usize) -> Result<Vec<ShapeVector>> {
    if d == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let count = shape_vector_count(m, d).map(u128::from).unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(cap_error("shape vectors", count, cap));
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut t = vec![0u32; d];
    fill_shapes(m, 0, &mut t, &mut out);
    Ok(out)
}

fn fill_shapes(rest: u32, j: usize, t: &mut Vec<u32>, out: &mut Vec<ShapeVector>) {
    if j + 1 == t.len() {
        t[j] = rest;
        out.push(t.clone());
        return;
    }
    for v in 0..=rest {
        t[j] = v;
        fill_shapes(rest - v, j + 1, t, out);
    }
}

/// One disjoint piece of a step hyperbolic cross: coordinate `j` ranges
/// over `lower_j < |k_j| ≤ upper_j`, where `lower_j = None` means no
/// lower cut (`k_j = 0` included).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepPiece {
    pub shape: ShapeVector,
    pub lower: Vec<Option<u64>>,
    pub upper: Vec<u64>,
}

impl StepPiece {
    fn size(&self) -> u128 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, &up)| match lo {
                None => 2 * up as u128 + 1,
                Some(l) => 2 * up.saturating_sub(*l) as u128,
            })
            .fold(1u128, |a, w| a.saturating_mul(w))
    }
}

/// Disjoint rectangle decomposition of `Q_m`: for each shape vector `t`
/// the first coordinate spans its full dyadic box, and coordinate
/// `j ≥ 2` spans the shell `τ_j^low < |k_j| ≤ τ_j^up` with
/// `τ^up = ⌊(γ_j 2^{t_j})^{1/(2α)}⌋`, `τ^low = ⌊(γ_j 2^{t_j − 1})^{1/(2α)}⌋`.
/// For `t_j = 0` the shell has no lower cut, so `k_j = 0` stays in.
pub fn step_cross_pieces(alpha: f64, gamma: &ProductWeights, m: u32) -> Result<Vec<StepPiece>> {
    step_cross_pieces_capped(alpha, gamma, m, DEFAULT_CAP)
}

fn step_cross_pieces_capped(alpha: f64, gamma: &ProductWeights, m: u32, cap: usize) -> Result<Vec<StepPiece>> {
    let g = gamma.as_slice();
    let shapes = enumerate_shape_vectors_capped(m, g.len(), cap)?;
    Ok(shapes
        .into_iter()
        .map(|t| {
            let mut lower = Vec::with_capacity(t.len());
            let mut upper = Vec::with_capacity(t.len());
            for (j, (&tj, &gj)) in t.iter().zip(g).enumerate() {
                let up = halfwidth(alpha, gj, 2f64.powi(tj as i32)).expect("2^t ≥ 1");
                let lo = if j == 0 || tj == 0 {
                    None
                } else {
                    Some(halfwidth(alpha, gj, 2f64.powi(tj as i32 - 1)).expect("2^{t-1} ≥ 1"))
                };
                lower.push(lo);
                upper.push(up);
            }
            StepPiece { shape: t, lower, upper }
        })
        .collect())
}

/// Weighted step hyperbolic cross with the default cap.
pub fn enumerate_step_cross(alpha: f64, gamma: &ProductWeights, d: usize, m: u32) -> Result<IndexSet> {
    enumerate_step_cross_capped(alpha, gamma, d, m, DEFAULT_CAP)
}

/// `Q_m`, assembled from the disjoint pieces of [`step_cross_pieces`]
/// and sorted lexicographically.
pub fn enumerate_step_cross_capped(
    alpha: f64,
    gamma: &ProductWeights,
    d: usize,
    m: u32,
    cap: usize,
) -> Result<IndexSet> {
    check_common(alpha, gamma, d)?;
    let pieces = step_cross_pieces_capped(alpha, gamma, m, cap)?;
    let predicted = pieces.iter().map(StepPiece::size).fold(0u128, |a, s| a.saturating_add(s));
    if predicted > cap as u128 {
        return Err(cap_error("step hyperbolic cross", predicted, cap));
    }
    let mut rows: Vec<Vec<i64>> = Vec::with_capacity(predicted as usize);
    for piece in &pieces {
        let axes: Vec<Vec<i64>> = piece
            .lower
            .iter()
            .zip(&piece.upper)
            .map(|(lo, &up)| {
                let up = up as i64;
                match lo {
                    None => (-up..=up).collect(),
                    Some(l) => {
                        let l = *l as i64;
                        (-up..-l).chain(l + 1..=up).collect()
                    }
                }
            })
            .collect();
        for_each_in_product(&axes, |k| rows.push(k.to_vec()));
    }
    rows.sort_unstable();
    let flat = rows.into_iter().flatten().collect();
    Ok(IndexSet::from_sorted(Family::StepCross { m }, alpha, gamma, flat))
}

/// `ν^{1/(2α)+ε} Π_j (1 + 2 ζ(1 + 2αε) γ_j^{1/(2α)+ε})`, an upper bound on
/// the size of the weighted continuous hyperbolic cross.
pub fn cardinality_bound_cross(alpha: f64, gamma: &ProductWeights, d: usize, nu: f64, eps: f64) -> Result<f64> {
    check_common(alpha, gamma, d)?;
    check_nu(nu)?;
    if !(eps > 0.0) {
        return Err(invalid(format!("ε = {eps} must be positive")));
    }
    let e = 1.0 / (2.0 * alpha) + eps;
    let z = zeta(1.0 + 2.0 * alpha * eps);
    let prod: f64 = gamma.as_slice().iter().map(|&g| 1.0 + 2.0 * z * g.powf(e)).product();
    Ok(nu.powf(e) * prod)
}

#[derive(Serialize, Deserialize)]
struct RawIndexSet {
    family: String,
    alpha: f64,
    gamma: ProductWeights,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    param: Option<f64>,
    count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frequencies: Option<Vec<Vec<i64>>>,
}

impl Serialize for IndexSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let frequencies = match self.family {
            Family::Custom => Some(self.iter().map(<[i64]>::to_vec).collect()),
            _ => None,
        };
        RawIndexSet {
            family: self.family.name().to_string(),
            alpha: self.alpha,
            gamma: self.gamma.clone(),
            param: self.family.param(),
            count: self.len(),
            frequencies,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawIndexSet::deserialize(d)?;
        let family = Family::from_parts(&raw.family, raw.param).map_err(D::Error::custom)?;
        let set = match family {
            Family::Custom => {
                let freqs = raw
                    .frequencies
                    .ok_or_else(|| D::Error::custom("custom index set needs a frequency list"))?;
                IndexSet::custom(freqs, raw.alpha, raw.gamma)
            }
            named => IndexSet::enumerate(named, raw.alpha, &raw.gamma, DEFAULT_CAP),
        }
        .map_err(D::Error::custom)?;
        if set.len() != raw.count {
            return Err(D::Error::custom(format!(
                "index set count {} does not match the {} frequencies it describes",
                raw.count,
                set.len()
            )));
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones(d: usize) -> ProductWeights {
        ProductWeights::ones(d)
    }

    #[test]
    fn r_alpha_examples() {
        assert_eq!(r_alpha(1.0, &ones(3), &[0, 0, 0]), 1.0);
        assert_eq!(r_alpha(0.5, &ones(2), &[6, 5]), 30.0);
        let quarter = ProductWeights::new(vec![0.25]).unwrap();
        assert_eq!(r_alpha(1.0, &quarter, &[2]), 16.0);
        assert_eq!(r_alpha(1.0, &quarter, &[-2]), 16.0);
    }

    #[test]
    fn cross_at_nu_one_is_unit_cube() {
        for d in 1..=4 {
            let k = enumerate_cross(1.3, &ones(d), d, 1.0).unwrap();
            assert_eq!(k.len(), 3usize.pow(d as u32));
            assert!(k.iter().all(|v| v.iter().all(|x| x.abs() <= 1)));
        }
    }

    #[test]
    fn remark_witness() {
        let g = ones(2);
        let k = enumerate_cross(0.5, &g, 2, 32.0).unwrap();
        assert!(k.contains(&[6, 5]));
        assert!(k.iter().any(|v| v == [6, 5]));
        let q = enumerate_step_cross(0.5, &g, 2, 5).unwrap();
        assert!(!q.contains(&[6, 5]));
        assert!(!q.iter().any(|v| v == [6, 5]));
        assert!(contains(&Family::ContinuousCross { nu: 32.0 }, 0.5, &g, &[6, 5]));
        assert!(!contains(&Family::StepCross { m: 5 }, 0.5, &g, &[6, 5]));
    }

    #[test]
    fn halfwidth_examples() {
        assert_eq!(rectangle_halfwidths(1.0, &ones(2), 2, 1.0).unwrap(), vec![1, 1]);
        assert_eq!(rectangle_halfwidths(1.0, &ones(1), 1, 16.0).unwrap(), vec![4]);
        let small = ProductWeights::new(vec![0.01]).unwrap();
        assert_eq!(rectangle_halfwidths(1.0, &small, 1, 16.0).unwrap(), vec![0]);
    }

    #[test]
    fn shape_vectors() {
        assert_eq!(enumerate_shape_vectors(0, 4).unwrap(), vec![vec![0; 4]]);
        assert_eq!(
            enumerate_shape_vectors(2, 2).unwrap(),
            vec![vec![0, 2], vec![1, 1], vec![2, 0]]
        );
        assert_eq!(enumerate_shape_vectors(6, 8).unwrap().len(), 1716);
        assert!(matches!(
            enumerate_shape_vectors_capped(6, 8, 100),
            Err(Error::CapExceeded { predicted: 1716, .. })
        ));
    }

    #[test]
    fn step_cross_small_cases() {
        let q = enumerate_step_cross(1.0, &ones(3), 3, 0).unwrap();
        assert_eq!(q.len(), 27);
        for m in 0..6 {
            let q = enumerate_step_cross(1.2, &ones(1), 1, m).unwrap();
            let k = enumerate_cross(1.2, &ones(1), 1, 2f64.powi(m as i32)).unwrap();
            assert_eq!(q.flat, k.flat, "m={m}");
        }
    }

    #[test]
    fn enumeration_is_sorted_and_unique() {
        let g = ProductWeights::polynomial(1.0, 3).unwrap();
        for set in [
            enumerate_cross(0.8, &g, 3, 40.0).unwrap(),
            enumerate_rectangle(0.8, &g, 3, 7.0).unwrap(),
            enumerate_step_cross(0.8, &g, 3, 4).unwrap(),
        ] {
            let rows: Vec<&[i64]> = set.iter().collect();
            assert!(rows.windows(2).all(|w| w[0] < w[1]));
            assert!(set.contains(&[0, 0, 0]));
        }
    }

    #[test]
    fn caps_are_enforced() {
        let err = enumerate_cross_capped(1.0, &ones(3), 3, 1000.0, 50).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }));
        let err = enumerate_rectangle_capped(1.0, &ones(3), 3, 100.0, 50).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { predicted: 9261, .. }));
    }

    #[test]
    fn cardinality_bound_holds() {
        let k = enumerate_cross(1.0, &ones(3), 3, 64.0).unwrap();
        let b = cardinality_bound_cross(1.0, &ones(3), 3, 64.0, 0.25).unwrap();
        assert!((k.len() as f64) <= b);
        let tiny = ProductWeights::new(vec![1e-300; 2]).unwrap();
        let b = cardinality_bound_cross(1.0, &tiny, 2, 9.0, 0.5).unwrap();
        assert!((b - 9f64.powf(1.0)).abs() < 1e-9);
    }

    #[test]
    fn json_round_trip() {
        let g = ProductWeights::geometric(0.5, 2).unwrap();
        let set = enumerate_step_cross(1.0, &g, 2, 3).unwrap();
        let text = serde_json::to_string(&set).unwrap();
        assert!(text.contains("\"family\":\"step-cross\""));
        let back: IndexSet = serde_json::from_str(&text).unwrap();
        assert_eq!(back, set);

        let custom = IndexSet::custom(vec![vec![1, 0], vec![0, 0], vec![2, -1]], 1.0, ones(2)).unwrap();
        let text = serde_json::to_string(&custom).unwrap();
        let back: IndexSet = serde_json::from_str(&text).unwrap();
        assert_eq!(back, custom);
        assert_eq!(back.get(0), &[0, 0]);
        assert!(!back.is_symmetric());
    }

    #[test]
    fn custom_rejects_duplicates() {
        assert!(IndexSet::custom(vec![vec![1], vec![1]], 1.0, ones(1)).is_err());
        assert!(IndexSet::custom(vec![vec![1, 2]], 1.0, ones(1)).is_err());
    }
}
