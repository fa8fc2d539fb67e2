//! Evaluable error bounds for the compressed loss and the matching
//! parameter-selection rules.

use serde::{Deserialize, Serialize};

use crate::compression::Dataset;
use crate::error::{invalid, Result};
use crate::lattice::{bound_constant_c, ProductWeights};
use crate::model::{TrigModel, SQUARE_CAP};
use crate::special::zeta;

/// Function space the target belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Wiener,
    Korobov,
}

impl Space {
    pub fn name(self) -> &'static str {
        match self {
            Space::Wiener => "wiener",
            Space::Korobov => "korobov",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "wiener" => Ok(Space::Wiener),
            "korobov" => Ok(Space::Korobov),
            _ => Err(invalid(format!("unknown space {s:?} (expected wiener or korobov)"))),
        }
    }
}

/// Index-set family the bound refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundFamily {
    Cross,
    Rectangle,
    StepCross,
}

impl BoundFamily {
    pub fn name(self) -> &'static str {
        match self {
            BoundFamily::Cross => "cross",
            BoundFamily::Rectangle => "rectangle",
            BoundFamily::StepCross => "step-cross",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "cross" => Ok(BoundFamily::Cross),
            "rectangle" => Ok(BoundFamily::Rectangle),
            "step-cross" => Ok(BoundFamily::StepCross),
            _ => Err(invalid(format!(
                "unknown family {s:?} (expected cross, rectangle or step-cross)"
            ))),
        }
    }
}

/// `c_{α,γ,d} = √∏ max(1, 2^{2α}γ_j)` and `ζ_{δ,d} = [1 + 2ζ(1+2δ)]^{d/2}`.
pub fn constants(alpha: f64, gamma: &ProductWeights, delta: f64) -> Result<(f64, f64)> {
    if !(delta > 0.0) {
        return Err(invalid(format!("δ = {delta} must be positive")));
    }
    let c = gamma
        .as_slice()
        .iter()
        .map(|&g| (4f64.powf(alpha) * g).max(1.0))
        .product::<f64>()
        .sqrt();
    let z = (1.0 + 2.0 * zeta(1.0 + 2.0 * delta)).powf(gamma.dim() as f64 / 2.0);
    Ok((c, z))
}

/// `C̃(α,ε) = ∏ (1 + 2ζ(1+2αε) γ_j^{1/(2α)+ε})`, the constant of the
/// hyperbolic-cross cardinality estimate.
pub fn cardinality_constant(alpha: f64, gamma: &ProductWeights, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(invalid(format!("ε = {eps} must be positive")));
    }
    let z = zeta(1.0 + 2.0 * alpha * eps);
    let e = 1.0 / (2.0 * alpha) + eps;
    Ok(gamma.as_slice().iter().map(|&g| 1.0 + 2.0 * z * g.powf(e)).product())
}

/// Inputs of a bound evaluation. `d` is the dimension of `gamma`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub space: Space,
    pub family: BoundFamily,
    pub alpha: f64,
    pub gamma: ProductWeights,
    pub size: u64,
    /// `‖g‖` in the chosen space.
    pub norm_g: f64,
    /// `(1/N) Σ |c_n|`.
    pub mu_bar: f64,
    pub delta: f64,
    pub tau: f64,
    pub eps: f64,
    pub sigma: f64,
    /// Factor applied to bounds that only hold up to an absolute constant.
    pub implicit_constant: f64,
    /// Factor in `ν = κ L^{…}`; the step-cross rule ignores it.
    pub proportionality: f64,
}

impl BoundQuery {
    /// A query with `‖g‖ = μ̄ = 1` and default slack parameters
    /// `δ = (α−1)/2`, `τ = (α−1−δ)/2`, `σ = ε = 0.01`.
    pub fn new(space: Space, family: BoundFamily, alpha: f64, gamma: ProductWeights, size: u64) -> Self {
        let delta = (alpha - 1.0) / 2.0;
        Self {
            space,
            family,
            alpha,
            gamma,
            size,
            norm_g: 1.0,
            mu_bar: 1.0,
            delta,
            tau: (alpha - 1.0 - delta) / 2.0,
            eps: 0.01,
            sigma: 0.01,
            implicit_constant: 1.0,
            proportionality: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }

    /// True when the evaluated bound holds only up to an absolute constant.
    pub fn up_to_constant(&self) -> bool {
        self.space == Space::Korobov
    }

    fn validate(&self) -> Result<()> {
        let a = self.alpha;
        if !(a > 1.0 && a.is_finite()) {
            return Err(invalid(format!("α = {a} must be greater than 1")));
        }
        if !(self.delta > 0.0 && self.delta < a - 1.0) {
            return Err(invalid(format!("δ = {} outside (0, α − 1) = (0, {})", self.delta, a - 1.0)));
        }
        let tmax = a - 1.0 - self.delta;
        if !(self.tau > 0.0 && self.tau <= tmax) {
            return Err(invalid(format!("τ = {} outside (0, α − 1 − δ] = (0, {tmax}]", self.tau)));
        }
        if !(self.eps > 0.0) {
            return Err(invalid(format!("ε = {} must be positive", self.eps)));
        }
        if !(self.sigma > 0.0) {
            return Err(invalid(format!("σ = {} must be positive", self.sigma)));
        }
        if !(self.mu_bar >= 0.0) {
            return Err(invalid(format!("μ̄ = {} must be nonnegative", self.mu_bar)));
        }
        if !(self.norm_g >= 0.0) {
            return Err(invalid(format!("‖g‖ = {} must be nonnegative", self.norm_g)));
        }
        if !(self.implicit_constant > 0.0) {
            return Err(invalid("implicit constant must be positive"));
        }
        if !(self.proportionality > 0.0) {
            return Err(invalid("proportionality constant must be positive"));
        }
        if self.size < 2 {
            return Err(invalid(format!("L = {} must be at least 2", self.size)));
        }
        Ok(())
    }

    /// `c·ζ·C(α−½−δ, τ)·L^{−(α−½−δ−τ)}`, the lattice part of every `err₂`.
    fn lattice_factor(&self) -> Result<f64> {
        let (c, z) = constants(self.alpha, &self.gamma, self.delta)?;
        let a2 = self.alpha - 0.5 - self.delta;
        let big_c = bound_constant_c(a2, self.tau, &self.gamma)?;
        Ok(c * z * big_c * (self.size as f64).powf(-(a2 - self.tau)))
    }
}

/// Evaluated bound. `total = err1 + err2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bound {
    pub err1: f64,
    pub err2: f64,
    pub total: f64,
}

fn korobov_cross(q: &BoundQuery, nu: f64, lattice: f64) -> Result<(f64, f64)> {
    let a = q.alpha;
    let d = q.dim() as f64;
    let err1 = nu.ln().powf((d - 1.0) / 2.0) / nu.powf(0.5 - 1.0 / (4.0 * a));
    let ct = cardinality_constant(a, &q.gamma, q.eps)?;
    let err2 = nu.powf(0.5 + 1.0 / (4.0 * a) + q.eps) * lattice * ct;
    Ok((err1, err2))
}

/// `err₁`, `err₂` and their sum for parameter `nu_or_m` (`ν > 1` for cross
/// and rectangle, integer `m ≥ 1` for the step cross; the Korobov step
/// cross needs `m ≥ d`).
pub fn total_bound(q: &BoundQuery, nu_or_m: f64) -> Result<Bound> {
    q.validate()?;
    let d = q.dim() as f64;
    let lattice = q.lattice_factor()?;
    let (err1, err2) = match q.family {
        BoundFamily::Cross | BoundFamily::Rectangle => {
            let nu = nu_or_m;
            if !(nu > 1.0 && nu.is_finite()) {
                return Err(invalid(format!("ν = {nu} must be greater than 1")));
            }
            match (q.space, q.family) {
                (Space::Wiener, BoundFamily::Cross) => (nu.powf(-0.5), nu.sqrt() * lattice),
                (Space::Wiener, _) => (nu.powf(-0.5), nu.powf(d / 2.0) * lattice),
                (Space::Korobov, BoundFamily::Cross) => korobov_cross(q, nu, lattice)?,
                (Space::Korobov, _) => {
                    let e = 0.5 + 1.0 / (4.0 * q.alpha);
                    (nu.powf(-(0.5 - 1.0 / (4.0 * q.alpha))), nu.powf(e * d) * lattice)
                }
            }
        }
        BoundFamily::StepCross => {
            let m = nu_or_m;
            if !(m >= 1.0 && m.fract() == 0.0 && m < 1024.0) {
                return Err(invalid(format!("m = {m} must be a positive integer")));
            }
            match q.space {
                Space::Wiener => (
                    2f64.powf(-(m - d + 1.0) / 2.0),
                    2f64.powf(m / 2.0) * lattice,
                ),
                Space::Korobov => {
                    if m < d {
                        return Err(invalid(format!(
                            "m = {m} must be at least d = {d} for the Korobov step-cross bound"
                        )));
                    }
                    let (e1, _) = korobov_cross(q, 2f64.powf(m - d + 1.0), lattice)?;
                    let (_, e2) = korobov_cross(q, 2f64.powf(m), lattice)?;
                    (e1, e2)
                }
            }
        }
    };
    let scale = q.norm_g * q.mu_bar * if q.up_to_constant() { q.implicit_constant } else { 1.0 };
    let (err1, err2) = (scale * err1, scale * err2);
    Ok(Bound { err1, err2, total: err1 + err2 })
}

/// `ν` (cross, rectangle) or `m` (step cross) balancing the two error terms.
pub fn select_parameter(q: &BoundQuery) -> Result<f64> {
    let a = q.alpha;
    let s = q.sigma;
    if !(s > 0.0 && s < a - 0.5) {
        return Err(invalid(format!("σ = {s} outside (0, α − 1/2) = (0, {})", a - 0.5)));
    }
    if q.size < 2 {
        return Err(invalid(format!("L = {} must be at least 2", q.size)));
    }
    let l = q.size as f64;
    let d = q.dim() as f64;
    let base = a - 0.5 - s;
    let exponent = match (q.family, q.space) {
        (BoundFamily::Cross, _) => base,
        (BoundFamily::Rectangle, Space::Wiener) => 2.0 * base / (1.0 + d),
        (BoundFamily::Rectangle, Space::Korobov) => {
            base * 4.0 * a / ((2.0 * a + 1.0) * d + 2.0 * a - 1.0)
        }
        (BoundFamily::StepCross, _) => {
            let m = (base * l.log2() + (d - 1.0) / 2.0 - 1e-12).ceil();
            return Ok(m.max(1.0));
        }
    };
    Ok(q.proportionality * l.powf(exponent))
}

/// Bound on `|exact − compressed|` for the unregularized loss of `model`:
/// `err(f², c = 1) + 2·err(f, c = y)`, with `‖f‖` and `‖f²‖` computed exactly
/// in `q.space` and `q.norm_g`, `q.mu_bar` ignored.
pub fn loss_gap_bound(q: &BoundQuery, model: &TrigModel, data: &Dataset, nu_or_m: f64) -> Result<f64> {
    let norm = |f: &TrigModel| match q.space {
        Space::Wiener => f.wiener_norm(q.alpha, &q.gamma),
        Space::Korobov => f.korobov_norm(q.alpha, &q.gamma),
    };
    let square = model.square(SQUARE_CAP)?;
    let mut quad = q.clone();
    quad.norm_g = norm(&square)?;
    quad.mu_bar = 1.0;
    let mut cross = q.clone();
    cross.norm_g = norm(model)?;
    cross.mu_bar = data.responses().iter().map(|y| y.abs()).sum::<f64>() / data.len() as f64;
    Ok(total_bound(&quad, nu_or_m)?.total + 2.0 * total_bound(&cross, nu_or_m)?.total)
}

/// One JSON row of a bound report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub family: &'static str,
    pub space: &'static str,
    #[serde(rename = "L")]
    pub size: u64,
    pub nu_or_m: f64,
    pub err1: f64,
    pub err2: f64,
    pub total: f64,
    pub params: serde_json::Value,
}

impl BoundReport {
    /// Evaluates the bound at `nu_or_m`, or at the selected parameter when `None`.
    pub fn evaluate(q: &BoundQuery, nu_or_m: Option<f64>) -> Result<Self> {
        let p = match nu_or_m {
            Some(p) => p,
            None => select_parameter(q)?,
        };
        let b = total_bound(q, p)?;
        Ok(Self {
            family: q.family.name(),
            space: q.space.name(),
            size: q.size,
            nu_or_m: p,
            err1: b.err1,
            err2: b.err2,
            total: b.total,
            params: serde_json::json!({
                "alpha": q.alpha,
                "gamma": q.gamma,
                "d": q.dim(),
                "norm_g": q.norm_g,
                "mu_bar": q.mu_bar,
                "delta": q.delta,
                "tau": q.tau,
                "eps": q.eps,
                "sigma": q.sigma,
                "implicit_constant": q.implicit_constant,
                "up_to_constant": q.up_to_constant(),
            }),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn query(space: Space, family: BoundFamily, d: usize) -> BoundQuery {
        BoundQuery::new(space, family, 2.0, ProductWeights::ones(d), 101)
    }

    #[test]
    fn constants_examples() {
        let (c, _) = constants(1.0, &ProductWeights::ones(2), 0.5).unwrap();
        assert!((c - 4.0).abs() < 1e-14);
        let g = ProductWeights::new(vec![0.25, 0.1]).unwrap();
        assert_eq!(constants(1.0, &g, 0.5).unwrap().0, 1.0);
        assert_eq!(constants(1.5, &ProductWeights::ones(0), 0.3).unwrap(), (1.0, 1.0));
        assert!(constants(1.0, &g, 0.0).is_err());
    }

    #[test]
    fn wiener_cross_plug_in() {
        let mut q = query(Space::Wiener, BoundFamily::Cross, 1);
        q.delta = 0.5;
        q.tau = 0.25;
        let b = total_bound(&q, 101.0).unwrap();
        let c = 16f64.sqrt();
        let z = (1.0 + 2.0 * zeta(2.0)).sqrt();
        let beta = 1.0 - 0.25;
        let big_c = 2f64.powf(beta) * (1.0 + 2.0 * zeta(1.0 / beta)).powf(beta);
        let e2 = 101f64.sqrt() * 101f64.powf(-0.75) * c * z * big_c;
        assert!((b.err1 - 101f64.powf(-0.5)).abs() < 1e-15);
        assert!((b.err2 - e2).abs() < 1e-12 * e2);
        assert_eq!(b.total, b.err1 + b.err2);
    }

    #[test]
    fn zero_mu_gives_zero() {
        for space in [Space::Wiener, Space::Korobov] {
            for (family, p) in [(BoundFamily::Cross, 10.0), (BoundFamily::Rectangle, 10.0), (BoundFamily::StepCross, 4.0)] {
                let mut q = query(space, family, 2);
                q.mu_bar = 0.0;
                assert_eq!(total_bound(&q, p).unwrap().total, 0.0);
            }
        }
    }

    #[test]
    fn monotonicity() {
        for space in [Space::Wiener, Space::Korobov] {
            for (family, params) in [
                (BoundFamily::Cross, vec![3.0, 10.0, 100.0, 1e4]),
                (BoundFamily::Rectangle, vec![3.0, 10.0, 100.0, 1e4]),
                (BoundFamily::StepCross, vec![3.0, 4.0, 7.0, 12.0]),
            ] {
                let q = query(space, family, 3);
                let bs: Vec<Bound> = params.iter().map(|&p| total_bound(&q, p).unwrap()).collect();
                for w in bs.windows(2) {
                    assert!(w[1].err2 >= w[0].err2);
                    if space == Space::Wiener {
                        assert!(w[1].err1 <= w[0].err1);
                    }
                }
                let mut prev = f64::INFINITY;
                for l in [31, 101, 1009, 100_003] {
                    let mut q = q.clone();
                    q.size = l;
                    let e = total_bound(&q, params[1]).unwrap().err2;
                    assert!(e <= prev);
                    prev = e;
                }
            }
        }
    }

    #[test]
    fn korobov_step_is_cross_composition() {
        let q = query(Space::Korobov, BoundFamily::StepCross, 2);
        let b = total_bound(&q, 6.0).unwrap();
        let mut qc = q.clone();
        qc.family = BoundFamily::Cross;
        assert_eq!(b.err1, total_bound(&qc, 32.0).unwrap().err1);
        assert_eq!(b.err2, total_bound(&qc, 64.0).unwrap().err2);
        assert!(total_bound(&q, 1.0).is_err());
    }

    #[test]
    fn implicit_constant_only_scales_korobov() {
        let mut w = query(Space::Wiener, BoundFamily::Cross, 2);
        let mut k = query(Space::Korobov, BoundFamily::Cross, 2);
        let (w1, k1) = (total_bound(&w, 50.0).unwrap(), total_bound(&k, 50.0).unwrap());
        w.implicit_constant = 3.0;
        k.implicit_constant = 3.0;
        assert_eq!(total_bound(&w, 50.0).unwrap(), w1);
        assert!((total_bound(&k, 50.0).unwrap().total - 3.0 * k1.total).abs() < 1e-12 * k1.total);
    }

    #[test]
    fn select_parameter_examples() {
        let mut q = BoundQuery::new(Space::Wiener, BoundFamily::StepCross, 1.5, ProductWeights::ones(1), 64);
        q.sigma = 0.5;
        assert_eq!(select_parameter(&q).unwrap(), 3.0);
        q.family = BoundFamily::Cross;
        q.size = 100;
        assert!((select_parameter(&q).unwrap() - 10.0).abs() < 1e-12);
        q.sigma = 1.0;
        assert!(select_parameter(&q).is_err());
        q.sigma = 0.0;
        assert!(select_parameter(&q).is_err());
    }

    #[test]
    fn parameter_domain_errors() {
        let mut q = query(Space::Wiener, BoundFamily::Cross, 2);
        assert!(total_bound(&q, 1.0).is_err());
        q.tau = 0.6;
        assert!(total_bound(&q, 10.0).is_err());
        let mut q = query(Space::Wiener, BoundFamily::StepCross, 2);
        assert!(total_bound(&q, 2.5).is_err());
        q.alpha = 1.0;
        assert!(total_bound(&q, 2.0).is_err());
    }

    #[test]
    fn report_row_shape() {
        let q = query(Space::Korobov, BoundFamily::Rectangle, 2);
        let row = serde_json::to_value(BoundReport::evaluate(&q, None).unwrap()).unwrap();
        for key in ["family", "space", "L", "nu_or_m", "err1", "err2", "total", "params"] {
            assert!(row.get(key).is_some(), "{key}");
        }
        assert_eq!(row["params"]["up_to_constant"], true);
        assert_eq!(row["family"], "rectangle");
    }
}
