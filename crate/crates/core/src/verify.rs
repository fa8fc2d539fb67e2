//! Self-check suites: fast weights against the naive sum, step-cross
//! inclusions, lattice evaluation by aliasing, exactness for constant
//! models and the loss-gap bound.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{loss_gap_bound, BoundFamily, BoundQuery, Space};
use crate::bench::uniform_dataset;
use crate::compression::{compress, Algorithm, Dataset};
use crate::error::Result;
use crate::index_sets::{contains, enumerate_cross, enumerate_step_cross, Family, IndexSet};
use crate::lattice::{cbc_construct, LatticeRule, ProductWeights};
use crate::model::{compressed_loss, exact_loss, Regularizer, TrigModel};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub passed: bool,
    pub max_residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

/// Options for [`run_all`].
#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Adds `1e−3` to fast weight `W_XZ[ℓ]` of the first oracle instance.
    pub perturb_weight: Option<usize>,
}

pub fn run_all(opts: &VerifyOptions) -> Result<Vec<SuiteResult>> {
    Ok(vec![
        oracle_equivalence(opts.seed, opts.perturb_weight)?,
        step_cross_inclusions()?,
        aliasing_identity(opts.seed)?,
        exactness_identity(opts.seed)?,
        loss_gap_envelope(opts.seed)?,
    ])
}

fn max_rel(fast: &[Complex64], naive: &[Complex64]) -> (f64, usize) {
    let scale = naive.iter().fold(0.0f64, |m, v| m.max(v.norm())).max(f64::MIN_POSITIVE);
    fast.iter()
        .zip(naive)
        .enumerate()
        .map(|(l, (a, b))| ((a - b).norm() / scale, l))
        .fold((0.0, 0), |best, cur| if cur.0 > best.0 { cur } else { best })
}

fn random_custom_set(rng: &mut impl Rng, dim: usize, alpha: f64, gamma: &ProductWeights) -> Result<IndexSet> {
    let mut set = std::collections::BTreeSet::new();
    let target = rng.gen_range(3..12);
    while set.len() < target {
        set.insert((0..dim).map(|_| rng.gen_range(-6..=6)).collect::<Vec<i64>>());
    }
    IndexSet::custom(set.into_iter().collect(), alpha, gamma.clone())
}

/// Family-specific and general weights against the naive triple sum.
pub fn oracle_equivalence(seed: u64, perturb: Option<usize>) -> Result<SuiteResult> {
    const TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (0.0, String::new());
    let mut first = true;
    for instance in 0..12 {
        let d = 1 + instance % 3;
        let size = [13, 31, 53][instance % 3];
        let data = uniform_dataset(&mut rng, 40, d)?;
        let gamma = ProductWeights::geometric(0.7, d)?;
        let alpha = 1.0;
        let rule = cbc_construct(size, d, 1.0, &gamma, true)?;
        let (k, algos) = match instance % 4 {
            0 => (IndexSet::enumerate(Family::ContinuousCross { nu: 20.0 }, alpha, &gamma, usize::MAX)?, vec![Algorithm::General]),
            1 => (
                IndexSet::enumerate(Family::Rectangle { nu: 9.0 }, alpha, &gamma, usize::MAX)?,
                vec![Algorithm::General, Algorithm::Rectangle],
            ),
            2 => (
                IndexSet::enumerate(Family::StepCross { m: 4 }, alpha, &gamma, usize::MAX)?,
                vec![Algorithm::General, Algorithm::StepCross],
            ),
            _ => (random_custom_set(&mut rng, d, alpha, &gamma)?, vec![Algorithm::General]),
        };
        let naive = compress(&data, &rule, &k, Algorithm::Naive)?;
        for algo in algos {
            let fast = compress(&data, &rule, &k, algo)?;
            let mut xz = fast.w_xz_complex();
            if first {
                if let Some(l) = perturb {
                    if l < xz.len() {
                        xz[l] += 1e-3;
                    }
                }
                first = false;
            }
            for (name, a, b) in [
                ("W_XZ", xz, naive.w_xz_complex()),
                ("W_XYZ", fast.w_xyz_complex(), naive.w_xyz_complex()),
            ] {
                let (r, l) = max_rel(&a, &b);
                if r > worst.0 {
                    worst = (
                        r,
                        format!(
                            "instance {instance} ({} d={d} L={size}), {} {name}: worst at ℓ = {l}",
                            k.family().name(),
                            algo.name()
                        ),
                    );
                }
            }
        }
    }
    Ok(SuiteResult {
        suite: "oracle-equivalence",
        passed: worst.0 <= TOL,
        max_residual: worst.0,
        tolerance: TOL,
        detail: worst.1,
    })
}

/// `K_{2^{m−d+1}} ⊆ Q_m ⊆ K_{2^m}` for small `d`, `m`, `α`, `γ`, checked by
/// walking each enumerated set through the other families' predicates.
pub fn step_cross_inclusions() -> Result<SuiteResult> {
    let mut violations = Vec::new();
    let mut checked = 0usize;
    for d in 1..=3usize {
        for gamma in [ProductWeights::ones(d), ProductWeights::geometric(0.5, d)?] {
            for alpha in [0.5, 1.0, 2.0] {
                for m in 0..=8u32 {
                    let q = enumerate_step_cross(alpha, &gamma, d, m)?;
                    let outer = Family::ContinuousCross { nu: 2f64.powi(m as i32) };
                    for k in q.iter() {
                        checked += 1;
                        if !contains(&outer, alpha, &gamma, k) {
                            violations.push(format!("{k:?} ∈ Q_{m} \\ K_{{2^{m}}} (d={d}, α={alpha})"));
                        }
                    }
                    let inner_nu = 2f64.powi(m as i32 - d as i32 + 1);
                    if inner_nu >= 1.0 {
                        for k in enumerate_cross(alpha, &gamma, d, inner_nu)?.iter() {
                            checked += 1;
                            if !q.contains(k) {
                                violations.push(format!("{k:?} ∈ K_{{{inner_nu}}} \\ Q_{m} (d={d}, α={alpha})"));
                            }
                        }
                    }
                }
            }
        }
    }
    let g = ProductWeights::ones(2);
    let witness = [6, 5];
    let in_k = contains(&Family::ContinuousCross { nu: 32.0 }, 0.5, &g, &witness);
    let in_q = contains(&Family::StepCross { m: 5 }, 0.5, &g, &witness);
    let mut detail = format!(
        "{checked} memberships checked; witness (6,5): in K_32 = {in_k}, in Q_5 = {in_q}"
    );
    if !(in_k && !in_q) {
        violations.push("witness (6,5) ∈ K_32 \\ Q_5 does not hold".into());
    }
    if let Some(v) = violations.first() {
        detail = format!("{} violations, first: {v}; {detail}", violations.len());
    }
    Ok(SuiteResult {
        suite: "step-cross-inclusions",
        passed: violations.is_empty(),
        max_residual: violations.len() as f64,
        tolerance: 0.0,
        detail,
    })
}

fn random_model(rng: &mut impl Rng, dim: usize, terms: usize, radius: i64) -> Result<TrigModel> {
    let available = (2 * radius as u64 + 1).saturating_pow(dim as u32);
    let terms = terms.min(available as usize);
    let mut seen = std::collections::BTreeMap::new();
    while seen.len() < terms {
        let k: Vec<i64> = (0..dim).map(|_| rng.gen_range(-radius..=radius)).collect();
        seen.insert(k, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    }
    let (f, t): (Vec<_>, Vec<_>) = seen.into_iter().unzip();
    TrigModel::new(f, t)
}

/// Lattice evaluation through `k·g mod L` bucketing against direct sums.
pub fn aliasing_identity(seed: u64) -> Result<SuiteResult> {
    const TOL: f64 = 1e-11;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut worst = (0.0f64, String::new());
    for i in 0..10 {
        let d = 1 + i % 4;
        let size = [31, 61, 127, 251, 509][i % 5];
        let model = random_model(&mut rng, d, 50 + 20 * i, 40)?;
        let rule = LatticeRule::new(size, (0..d).map(|_| rng.gen_range(1..size)).collect())?;
        let fast = model.eval_on_lattice(&rule)?;
        let scale = model.coefficients().iter().map(|t| t.norm()).sum::<f64>();
        for (l, v) in fast.iter().enumerate() {
            let r = (v - model.eval(&rule.point(l as u64))?).norm() / scale;
            if r > worst.0 {
                worst = (r, format!("instance {i} (d={d} L={size}) at ℓ = {l}"));
            }
        }
    }
    Ok(SuiteResult {
        suite: "aliasing-identity",
        passed: worst.0 <= TOL,
        max_residual: worst.0,
        tolerance: TOL,
        detail: worst.1,
    })
}

/// Constant models give identical exact and compressed losses when no
/// nonzero frequency of `K` lies in the dual lattice.
pub fn exactness_identity(seed: u64) -> Result<SuiteResult> {
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    let mut worst = (0.0f64, String::new());
    for i in 0..6 {
        let d = 1 + i % 3;
        let data = uniform_dataset(&mut rng, 50, d)?;
        let gamma = ProductWeights::ones(d);
        let rule = cbc_construct(61, d, 1.0, &gamma, true)?;
        let k = enumerate_cross(1.0, &gamma, d, 9.0)?;
        if k.iter().any(|f| f.iter().any(|&v| v != 0) && rule.residue(f) == 0) {
            continue;
        }
        let w = compress(&data, &rule, &k, Algorithm::General)?;
        for c in [1.0, -2.5] {
            let m = TrigModel::constant(d, c);
            let a = exact_loss(&m, &data, &Regularizer::None, 0.0)?.value;
            let b = compressed_loss(&m, &w, &rule, &Regularizer::None, 0.0)?.value;
            if (a - b).abs() >= worst.0 {
                worst = ((a - b).abs(), format!("dataset {i} (d={d}), c = {c}"));
            }
        }
    }
    Ok(SuiteResult {
        suite: "exactness-identity",
        passed: worst.0 <= TOL,
        max_residual: worst.0,
        tolerance: TOL,
        detail: worst.1,
    })
}

/// Measured loss gap against the explicit Wiener step-cross bound.
pub fn loss_gap_envelope(seed: u64) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
    let d = 2;
    let gamma = ProductWeights::ones(d);
    let alpha = 2.0;
    let mut worst = (0.0f64, String::new());
    for size in [31u64, 61, 127] {
        let pts: Vec<f64> = (0..300 * d).map(|_| rng.gen::<f64>()).collect();
        let y: Vec<f64> = (0..300)
            .map(|n| (2.0 * std::f64::consts::PI * pts[n * d]).cos() * pts[n * d + 1])
            .collect();
        let data = Dataset::from_flat(d, pts, y)?;
        let model = TrigModel::real(
            vec![vec![0, 0], vec![1, 0], vec![-1, 0], vec![1, -2], vec![-1, 2]],
            vec![
                Complex64::new(0.2, 0.0),
                Complex64::new(0.3, 0.1),
                Complex64::new(0.3, -0.1),
                Complex64::new(-0.05, 0.02),
                Complex64::new(-0.05, -0.02),
            ],
        )?;
        let mut q = BoundQuery::new(Space::Wiener, BoundFamily::StepCross, alpha, gamma.clone(), size);
        q.delta = 0.5;
        q.tau = 0.25;
        let m = crate::analysis::select_parameter(&q)? as u32;
        let rule = cbc_construct(size, d, alpha - 0.5 - q.delta, &gamma, true)?;
        let k = enumerate_step_cross(alpha, &gamma, d, m)?;
        let w = compress(&data, &rule, &k, Algorithm::StepCross)?;
        let gap = (exact_loss(&model, &data, &Regularizer::None, 0.0)?.value
            - compressed_loss(&model, &w, &rule, &Regularizer::None, 0.0)?.value)
            .abs();
        let bound = loss_gap_bound(&q, &model, &data, m as f64)?;
        let ratio = gap / bound;
        if ratio >= worst.0 {
            worst = (ratio, format!("L = {size}, m = {m}: gap {gap:.3e}, bound {bound:.3e}"));
        }
    }
    Ok(SuiteResult {
        suite: "loss-gap-envelope",
        passed: worst.0 <= 1.0,
        max_residual: worst.0,
        tolerance: 1.0,
        detail: worst.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suites_pass() {
        for r in run_all(&VerifyOptions::default()).unwrap() {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn perturbation_is_caught_and_located() {
        let r = oracle_equivalence(0, Some(5)).unwrap();
        assert!(!r.passed);
        assert!(r.detail.contains("ℓ = 5"), "{}", r.detail);
    }

    #[test]
    fn witness_reported() {
        let r = step_cross_inclusions().unwrap();
        assert!(r.detail.contains("in K_32 = true, in Q_5 = false"), "{}", r.detail);
    }
}
