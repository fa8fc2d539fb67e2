use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qmc_compress::analysis::{self, BoundFamily, BoundQuery, BoundReport, Space};
use qmc_compress::bench::{self, BenchConfig};
use qmc_compress::compression::{compress, Algorithm, Dataset};
use qmc_compress::index_sets::{Family, IndexSet, DEFAULT_CAP};
use qmc_compress::io;
use qmc_compress::lattice::{cbc_construct, worst_case_error, LatticeRule, ProductWeights};
use qmc_compress::model::{compressed_loss, exact_loss, Regularizer, TrigModel};
use qmc_compress::verify::{self, VerifyOptions};
use qmc_compress::Error;

mod gamma;

#[derive(Parser)]
#[command(name = "qmc-compress", version, about = "Lattice-based compression of least-squares training data")]
struct Cli {
    /// Seed for generated data, lattices and test instances.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores). `1` gives bitwise-reproducible runs.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Largest index set that may be enumerated.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    cap_frequencies: usize,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Emit reports as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a rank-1 lattice by component-by-component search.
    Cbc(CbcArgs),
    /// Enumerate an index set and write it as JSON.
    IndexSet(IndexSetArgs),
    /// Precompute the compression weights of a dataset.
    Compress(CompressArgs),
    /// Evaluate a model's compressed (and optionally exact) loss.
    Eval(EvalArgs),
    /// Evaluate the theoretical error bound.
    Bound(BoundArgs),
    /// Run the self-check suites.
    Verify(VerifyArgs),
    /// Time the step-cross weights over the benchmark grid.
    Bench(BenchArgs),
}

#[derive(Args)]
struct CbcArgs {
    /// Number of points, prime.
    #[arg(long = "size", short = 'L')]
    size: u64,
    #[arg(long, short = 'd')]
    dim: usize,
    #[arg(long)]
    alpha: f64,
    /// `one`, `geo:r`, `poly:p` or a comma-separated list.
    #[arg(long, default_value = "one")]
    gamma: String,
    /// Use the O(dL²) scan instead of the FFT version.
    #[arg(long)]
    standard: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Cross,
    Rectangle,
    StepCross,
}

#[derive(Args, Clone)]
struct SetSpec {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value = "one")]
    gamma: String,
    #[arg(long, short = 'd')]
    dim: Option<usize>,
    /// Cross or rectangle parameter.
    #[arg(long, conflicts_with_all = ["m", "auto"])]
    nu: Option<f64>,
    /// Step-cross level.
    #[arg(long, conflicts_with = "auto")]
    m: Option<u32>,
    /// Choose ν or m from the lattice size by the balancing rule.
    #[arg(long)]
    auto: bool,
    /// σ for `--auto`.
    #[arg(long, default_value_t = 0.01)]
    sigma: f64,
    /// Function space for the `--auto` exponent (rectangle only differs).
    #[arg(long, value_enum, default_value = "wiener")]
    space: SpaceArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Wiener,
    Korobov,
}

impl From<SpaceArg> for Space {
    fn from(s: SpaceArg) -> Self {
        match s {
            SpaceArg::Wiener => Space::Wiener,
            SpaceArg::Korobov => Space::Korobov,
        }
    }
}

impl From<FamilyArg> for BoundFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Cross => BoundFamily::Cross,
            FamilyArg::Rectangle => BoundFamily::Rectangle,
            FamilyArg::StepCross => BoundFamily::StepCross,
        }
    }
}

#[derive(Args)]
struct IndexSetArgs {
    #[command(flatten)]
    set: SetSpec,
    /// Lattice size used by `--auto`.
    #[arg(long = "size", short = 'L')]
    size: Option<u64>,
    /// Also list every frequency.
    #[arg(long)]
    list: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Auto,
    Naive,
    General,
    Rectangle,
    StepCross,
}

#[derive(Args)]
struct CompressArgs {
    /// CSV (`x_1..x_d,y`, optional header) or binary dataset matrix.
    #[arg(long)]
    data: PathBuf,
    /// Lattice JSON `{"L": …, "g": […]}`. Without it a CBC lattice of `--size` points is built.
    #[arg(long, conflicts_with = "size")]
    lattice: Option<PathBuf>,
    #[arg(long = "size", short = 'L')]
    size: Option<u64>,
    /// Smoothness for the on-the-fly CBC search (default: the index-set α).
    #[arg(long)]
    lattice_alpha: Option<f64>,
    #[command(flatten)]
    set: SetSpec,
    #[arg(long, value_enum, default_value = "auto")]
    algorithm: AlgorithmArg,
    /// Write the weight arrays to a `.w64` file next to the envelope.
    #[arg(long)]
    sidecar: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Model JSON: `{"frequencies": [[…]], "coefficients": [re, im, …]}`.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    weights: PathBuf,
    /// Dataset for the exact loss.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Also compute the exact loss, the gap and its bound (needs `--data`).
    #[arg(long, requires = "data")]
    exact: bool,
    /// `none`, `l0`, `l1`, `ridge` or `elastic:a`.
    #[arg(long, default_value = "none")]
    regularizer: String,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Smoothness of the bound (must exceed 1); default: the index-set α when it does.
    #[arg(long)]
    bound_alpha: Option<f64>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long, value_enum, default_value = "wiener")]
    space: SpaceArg,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value = "one")]
    gamma: String,
    #[arg(long, short = 'd')]
    dim: Option<usize>,
    #[arg(long = "size", short = 'L')]
    size: u64,
    /// ν or m; selected automatically when absent.
    #[arg(long)]
    param: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    norm_g: f64,
    #[arg(long, default_value_t = 1.0)]
    mu_bar: f64,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    #[arg(long, default_value_t = 0.01)]
    sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    implicit_constant: f64,
    #[arg(long, default_value_t = 1.0)]
    proportionality: f64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Test hook: perturb fast weight ℓ by 1e−3 before comparison.
    #[arg(long, hide = true)]
    perturb_weight: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 1000)]
    points: usize,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7,8")]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "32,64,128")]
    sizes: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
    levels: Vec<u32>,
    #[arg(long, default_value_t = 1.001)]
    alpha: f64,
}

/// Exit status for a failed command.
enum Failure {
    Validation(anyhow::Error),
    Suite(String),
    Cap(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<Error>() {
            Some(Error::CapExceeded { .. }) => Failure::Cap(e),
            _ => Failure::Validation(e),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::from(anyhow::Error::new(e))
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Cbc(a) => cmd_cbc(&cli, a),
        Command::IndexSet(a) => cmd_index_set(&cli, a),
        Command::Compress(a) => cmd_compress(&cli, a),
        Command::Eval(a) => cmd_eval(&cli, a),
        Command::Bound(a) => cmd_bound(&cli, a),
        Command::Verify(a) => cmd_verify(&cli, a),
        Command::Bench(a) => cmd_bench(&cli, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Suite(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Cap(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(4)
        }
    }
}

fn emit(cli: &Cli, text: &str) -> Outcome {
    match &cli.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn weights_for(spec: &str, dim: Option<usize>) -> Outcome<ProductWeights> {
    Ok(gamma::parse(spec, dim)?)
}

fn cmd_cbc(cli: &Cli, a: &CbcArgs) -> Outcome {
    let g = weights_for(&a.gamma, Some(a.dim))?;
    let start = Instant::now();
    let rule = cbc_construct(a.size, a.dim, a.alpha, &g, !a.standard)?;
    let e2 = worst_case_error(&rule, a.alpha, &g)?;
    eprintln!(
        "cbc: L = {}, d = {}, {} search in {:.3} s, squared worst-case error {e2:.6e}",
        a.size,
        a.dim,
        if a.standard { "standard" } else { "fast" },
        start.elapsed().as_secs_f64()
    );
    emit(cli, &to_json(&rule)?)
}

fn resolve_set(cli: &Cli, s: &SetSpec, size: Option<u64>) -> Outcome<(IndexSet, Option<f64>)> {
    let g = weights_for(&s.gamma, s.dim)?;
    let d = g.dim();
    let (family, selected) = if s.auto {
        let size = size.ok_or_else(|| anyhow!("--auto needs the lattice size"))?;
        let mut q = BoundQuery::new(s.space.into(), s.family.into(), s.alpha, g.clone(), size);
        q.sigma = s.sigma;
        let p = analysis::select_parameter(&q)?;
        let f = match s.family {
            FamilyArg::Cross => Family::ContinuousCross { nu: p },
            FamilyArg::Rectangle => Family::Rectangle { nu: p },
            FamilyArg::StepCross => Family::StepCross { m: p as u32 },
        };
        eprintln!("auto-selected {} = {p} for L = {size}", if matches!(s.family, FamilyArg::StepCross) { "m" } else { "ν" });
        (f, Some(p))
    } else {
        let f = match s.family {
            FamilyArg::Cross => Family::ContinuousCross { nu: s.nu.ok_or_else(|| anyhow!("--nu or --auto required"))? },
            FamilyArg::Rectangle => Family::Rectangle { nu: s.nu.ok_or_else(|| anyhow!("--nu or --auto required"))? },
            FamilyArg::StepCross => Family::StepCross { m: s.m.ok_or_else(|| anyhow!("--m or --auto required"))? },
        };
        (f, None)
    };
    let k = IndexSet::enumerate(family, s.alpha, &g, cli.cap_frequencies)?;
    if k.dim() != d {
        return Err(anyhow!("index set dimension {} differs from γ dimension {d}", k.dim()).into());
    }
    Ok((k, selected))
}

fn cmd_index_set(cli: &Cli, a: &IndexSetArgs) -> Outcome {
    let (k, _) = resolve_set(cli, &a.set, a.size)?;
    eprintln!("index set: {} with {} frequencies", k.family().name(), k.len());
    let mut value = serde_json::to_value(&k).map_err(anyhow::Error::from)?;
    if a.list {
        value["frequencies"] = serde_json::to_value(k.iter().collect::<Vec<_>>()).map_err(anyhow::Error::from)?;
    }
    emit(cli, &to_json(&value)?)
}

fn cost_class(algo: Algorithm) -> &'static str {
    match algo {
        Algorithm::Naive => "O(|K| N L)",
        Algorithm::General => "O(d |K| N + L log L)",
        Algorithm::Rectangle => "O(d L N)",
        Algorithm::StepCross => "O(|T(m,d)| d L N)",
    }
}

fn load_dataset(path: &Path) -> Outcome<Dataset> {
    let data = io::load_dataset(path).with_context(|| format!("loading {}", path.display()))?;
    eprintln!("dataset: N = {}, d = {}", data.len(), data.dim());
    Ok(data)
}

fn cmd_compress(cli: &Cli, a: &CompressArgs) -> Outcome {
    let data = load_dataset(&a.data)?;
    let rule = match (&a.lattice, a.size) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<LatticeRule>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        (None, Some(size)) => {
            let g = weights_for(&a.set.gamma, Some(data.dim()))?;
            let alpha = a.lattice_alpha.unwrap_or(a.set.alpha);
            let rule = cbc_construct(size, data.dim(), alpha, &g, true)?;
            eprintln!("lattice: CBC with α = {alpha}, generator {:?}", rule.generator());
            rule
        }
        (None, None) => return Err(anyhow!("give --lattice or --size").into()),
    };
    let mut set = a.set.clone();
    set.dim = set.dim.or(Some(data.dim()));
    let (k, selected) = resolve_set(cli, &set, Some(rule.size()))?;
    let algo = match a.algorithm {
        AlgorithmArg::Auto => Algorithm::preferred(&k),
        AlgorithmArg::Naive => Algorithm::Naive,
        AlgorithmArg::General => Algorithm::General,
        AlgorithmArg::Rectangle => Algorithm::Rectangle,
        AlgorithmArg::StepCross => Algorithm::StepCross,
    };
    let start = Instant::now();
    let w = compress(&data, &rule, &k, algo)?;
    eprintln!(
        "compress: algorithm {}, |K| = {}, L = {}, {:.3} s, cost class {}{}",
        algo.name(),
        k.len(),
        rule.size(),
        start.elapsed().as_secs_f64(),
        cost_class(algo),
        selected.map(|p| format!(", auto parameter {p}")).unwrap_or_default()
    );
    match &cli.out {
        Some(path) => io::save_weights(path, &w, a.sidecar)?,
        None if a.sidecar => return Err(anyhow!("--sidecar needs --out").into()),
        None => println!("{}", io::weights_to_json(&w)?),
    }
    Ok(())
}

fn parse_regularizer(s: &str) -> anyhow::Result<Regularizer> {
    Ok(match s {
        "none" => Regularizer::None,
        "l0" => Regularizer::BestSubset,
        "l1" => Regularizer::Lasso,
        "ridge" => Regularizer::Ridge(None),
        _ => match s.strip_prefix("elastic:") {
            Some(a) => Regularizer::Elastic(a.parse().with_context(|| format!("bad elastic-net mixing {a:?}"))?),
            None => bail!("unknown regularizer {s:?} (none, l0, l1, ridge, elastic:a)"),
        },
    })
}

#[derive(Serialize)]
struct EvalRow {
    kind: &'static str,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<qmc_compress::model::LossReport>,
}

fn cmd_eval(cli: &Cli, a: &EvalArgs) -> Outcome {
    let text = std::fs::read_to_string(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    let model: TrigModel = serde_json::from_str(&text).with_context(|| format!("parsing {}", a.model.display()))?;
    let w = io::load_weights(&a.weights)?;
    let reg = parse_regularizer(&a.regularizer)?;
    let comp = compressed_loss(&model, &w, &w.rule, &reg, a.lambda)?;
    let mut rows = vec![EvalRow { kind: "compressed", value: comp.value, report: Some(comp.clone()) }];
    if a.exact {
        let data = load_dataset(a.data.as_deref().expect("clap enforces --data"))?;
        let exact = exact_loss(&model, &data, &reg, a.lambda)?;
        rows.push(EvalRow { kind: "gap", value: (exact.value - comp.value).abs(), report: None });
        rows.insert(1, EvalRow { kind: "exact", value: exact.value, report: Some(exact) });
        let k = &w.index_set;
        let family = match k.family() {
            Family::ContinuousCross { nu } => Some((BoundFamily::Cross, *nu)),
            Family::Rectangle { nu } => Some((BoundFamily::Rectangle, *nu)),
            Family::StepCross { m } => Some((BoundFamily::StepCross, *m as f64)),
            Family::Custom => None,
        };
        let alpha = a.bound_alpha.unwrap_or(k.alpha());
        match family {
            Some((f, p)) if alpha > 1.0 && p > 1.0 => {
                let q = BoundQuery::new(Space::Wiener, f, alpha, k.gamma().clone(), w.rule.size());
                match analysis::loss_gap_bound(&q, &model, &data, p) {
                    Ok(b) => rows.push(EvalRow { kind: "bound", value: b, report: None }),
                    Err(e) => eprintln!("bound not available: {e}"),
                }
            }
            _ => eprintln!("bound not available: needs a named index set with α > 1 (see --bound-alpha)"),
        }
    }
    if cli.json {
        emit(cli, &to_json(&rows)?)
    } else {
        let text: String = rows.iter().map(|r| format!("{:<10} {:.12e}\n", r.kind, r.value)).collect();
        emit(cli, &text)
    }
}

fn cmd_bound(cli: &Cli, a: &BoundArgs) -> Outcome {
    let g = weights_for(&a.gamma, a.dim)?;
    let mut q = BoundQuery::new(a.space.into(), a.family.into(), a.alpha, g, a.size);
    q.norm_g = a.norm_g;
    q.mu_bar = a.mu_bar;
    if let Some(d) = a.delta {
        q.delta = d;
        q.tau = (a.alpha - 1.0 - d) / 2.0;
    }
    if let Some(t) = a.tau {
        q.tau = t;
    }
    q.eps = a.eps;
    q.sigma = a.sigma;
    q.implicit_constant = a.implicit_constant;
    q.proportionality = a.proportionality;
    let row = BoundReport::evaluate(&q, a.param)?;
    if cli.json {
        emit(cli, &to_json(&row)?)
    } else {
        emit(
            cli,
            &format!(
                "{} × {}, L = {}, parameter {}: err1 = {:.6e}, err2 = {:.6e}, total = {:.6e}{}\n",
                row.space,
                row.family,
                row.size,
                row.nu_or_m,
                row.err1,
                row.err2,
                row.total,
                if q.up_to_constant() { " (up to an absolute constant)" } else { "" }
            ),
        )
    }
}

fn cmd_verify(cli: &Cli, a: &VerifyArgs) -> Outcome {
    let results = verify::run_all(&VerifyOptions { seed: cli.seed, perturb_weight: a.perturb_weight })?;
    if cli.json {
        emit(cli, &to_json(&results)?)?;
    } else {
        let text: String = results
            .iter()
            .map(|r| {
                format!(
                    "{:<24} {}  residual {:.3e} (tolerance {:.1e})  {}\n",
                    r.suite,
                    if r.passed { "PASS" } else { "FAIL" },
                    r.max_residual,
                    r.tolerance,
                    r.detail
                )
            })
            .collect();
        emit(cli, &text)?;
    }
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("{} ({})", r.suite, r.detail))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Suite(failed.join("; ")))
    }
}

fn cmd_bench(cli: &Cli, a: &BenchArgs) -> Outcome {
    let cfg = BenchConfig {
        points: a.points,
        dims: a.dims.clone(),
        sizes: a.sizes.clone(),
        levels: a.levels.clone(),
        alpha: a.alpha,
        seed: cli.seed,
    };
    let rows = bench::run(&cfg)?;
    if cli.json {
        emit(cli, &to_json(&rows)?)
    } else {
        emit(cli, &bench::to_csv(&rows))
    }
}
