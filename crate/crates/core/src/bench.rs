//! Timing grid for the step-cross weight algorithm.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compression::{weights_step_cross, Coefficients, Dataset};
use crate::error::Result;
use crate::index_sets::shape_vector_count;
use crate::lattice::{LatticeRule, ProductWeights};

/// Grid settings. [`BenchConfig::default`] is `N = 1000`, `d = 2..=8`,
/// `L ∈ {32, 64, 128}`, `m ∈ {2, 4, 6}`, `α = 1.001`, `γ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub points: usize,
    pub dims: Vec<usize>,
    pub sizes: Vec<u64>,
    pub levels: Vec<u32>,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            points: 1000,
            dims: (2..=8).collect(),
            sizes: vec![32, 64, 128],
            levels: vec![2, 4, 6],
            alpha: 1.001,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub d: usize,
    #[serde(rename = "L")]
    pub size: u64,
    pub m: u32,
    pub seconds: f64,
    pub shapes: u64,
    pub generator: Vec<u64>,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Generating vector with every component drawn uniformly from the units
/// modulo `size`.
pub fn random_coprime_generator(rng: &mut impl Rng, size: u64, dim: usize) -> Vec<u64> {
    if size == 1 {
        return vec![1; dim];
    }
    (0..dim)
        .map(|_| loop {
            let g = rng.gen_range(1..size);
            if gcd(g, size) == 1 {
                break g;
            }
        })
        .collect()
}

/// Uniform points in `[0,1)^d` with uniform responses in `[0,1)`.
pub fn uniform_dataset(rng: &mut impl Rng, n: usize, dim: usize) -> Result<Dataset> {
    let x: Vec<f64> = (0..n * dim).map(|_| rng.gen::<f64>()).collect();
    let y: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    Dataset::from_flat(dim, x, y)
}

/// One row per `(d, L, m)`, in that nesting order. Each dimension gets its
/// own seeded dataset; each `(d, L)` its own seeded generating vector.
pub fn run(config: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &d in &config.dims {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (d as u64) << 32);
        let data = uniform_dataset(&mut rng, config.points, d)?;
        let gamma = ProductWeights::ones(d);
        for &size in &config.sizes {
            let rule = LatticeRule::new(size, random_coprime_generator(&mut rng, size, d))?;
            for &m in &config.levels {
                let start = Instant::now();
                let w = weights_step_cross(&data, Coefficients::Responses, &rule, config.alpha, &gamma, m)?;
                let seconds = start.elapsed().as_secs_f64();
                std::hint::black_box(w);
                rows.push(BenchRow {
                    d,
                    size,
                    m,
                    seconds,
                    shapes: shape_vector_count(m, d).unwrap_or(u64::MAX),
                    generator: rule.generator().to_vec(),
                });
            }
        }
    }
    Ok(rows)
}

/// `d,L,m,seconds,shapes` rows with a header line.
pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("d,L,m,seconds,shapes\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{:.6},{}\n", r.d, r.size, r.m, r.seconds, r.shapes));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_units() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for size in [32, 64, 128, 30] {
            for g in random_coprime_generator(&mut rng, size, 8) {
                assert_eq!(gcd(g, size), 1);
            }
        }
    }

    #[test]
    fn small_grid_shape() {
        let cfg = BenchConfig {
            points: 20,
            dims: vec![2, 3],
            sizes: vec![8],
            levels: vec![1, 2],
            ..BenchConfig::default()
        };
        let rows = run(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[3].shapes, 6);
        assert_eq!(to_csv(&rows).lines().count(), 5);
    }
}
