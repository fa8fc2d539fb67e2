//! Product-weight specifications: `one`, `geo:r`, `poly:p` or `a,b,c`.

use anyhow::{anyhow, bail, Context, Result};
use qmc_compress::lattice::ProductWeights;

/// Named forms need `dim`; an explicit list fixes it and must agree with it.
pub fn parse(spec: &str, dim: Option<usize>) -> Result<ProductWeights> {
    let spec = spec.trim();
    let need = || dim.ok_or_else(|| anyhow!("γ = {spec:?} needs the dimension (--dim)"));
    let named = |prefix: &str| spec.strip_prefix(prefix).map(str::trim);
    let g = if spec == "one" {
        ProductWeights::ones(need()?)
    } else if let Some(r) = named("geo:") {
        let r: f64 = r.parse().with_context(|| format!("bad ratio in {spec:?}"))?;
        ProductWeights::geometric(r, need()?)?
    } else if let Some(p) = named("poly:") {
        let p: f64 = p.parse().with_context(|| format!("bad power in {spec:?}"))?;
        ProductWeights::polynomial(p, need()?)?
    } else {
        let values = spec
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("γ = {spec:?} is not one, geo:r, poly:p or a list of numbers"))?;
        ProductWeights::new(values)?
    };
    if let Some(d) = dim {
        if g.dim() != d {
            bail!("γ has {} entries, dimension is {d}", g.dim());
        }
    }
    Ok(g)
}
