//! Command-line front end for `rdflb-core`: curve sweeps to CSV, validation
//! runs against the Monte-Carlo oracle, and SVG plots of curve files.
//!
//! The text parsers (`parse_n_range`, `parse_config`, `parse_curve_csv`)
//! are public so the fuzz targets can drive them directly.

pub mod config;
pub mod error;
pub mod plot;
pub mod range;
pub mod table;
pub mod validate;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rdflb_core::curve::{self, Constraint, CurveSpec};
use rdflb_core::rd::SourceModel;

pub use config::parse_config;
pub use error::{CliError, Result};
pub use range::parse_n_range;
pub use table::{parse_curve_csv, CurveTable};

use config::{parse_bool, parse_f64, parse_list};
use error::usage;
use validate::{run_validate, ValidateArgs};

pub const DEFAULT_N_RANGE: &str = "100:1000:100";

#[derive(Debug, Parser)]
#[command(
    name = "rdflb",
    version,
    about = "Finite-blocklength rate-distortion bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the bounds over a blocklength range and write a CSV.
    Curve(CurveArgs),
    /// Check the bounds against exact enumeration and Monte-Carlo runs.
    Validate(ValidateCmd),
    /// Render a curve CSV as an SVG line plot.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Bss,
    Bns,
    Gauss,
}

impl Family {
    fn parse(s: &str) -> Result<Self> {
        Family::from_str(s.trim(), true).or_else(|_| usage(format!("unknown source {s:?}")))
    }

    fn name(self) -> &'static str {
        match self {
            Family::Bss => "bss",
            Family::Bns => "bns",
            Family::Gauss => "gauss",
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct CurveArgs {
    /// Source family; may come from the config file instead.
    #[arg(value_enum)]
    pub source: Option<Family>,
    /// Probability of a one for the BNS.
    #[arg(long)]
    pub p: Option<f64>,
    /// Gaussian source variance.
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Rate in bits per symbol.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Blocklengths as A:B:C (inclusive) or a single N.
    #[arg(long)]
    pub n: Option<String>,
    /// Ordered-statistics ε values.
    #[arg(long, num_args = 1..)]
    pub eps: Vec<f64>,
    /// Reference rates for the reference-rate bounds.
    #[arg(long = "ref-rate", num_args = 1..)]
    pub ref_rate: Vec<f64>,
    /// Gaussian codeword bounds R_m² = α n.
    #[arg(long, num_args = 1..)]
    pub alpha: Vec<f64>,
    /// Include the unbounded Gaussian codebook.
    #[arg(long)]
    pub unbounded: bool,
    /// Rate slack of the legacy BSS bound (one column per reference rate).
    #[arg(long = "legacy-eps")]
    pub legacy_eps: Option<f64>,
    /// Gaussian outer-ball margin δ.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Worker threads for the row computations.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateCmd {
    #[arg(value_enum)]
    pub source: Family,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub rate: f64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// ε of the ordered-statistics upper bound.
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// Random codebooks in the residue and duality corpus (BSS only).
    #[arg(long, default_value_t = 100)]
    pub codebooks: u64,
    /// Gaussian codeword bound R_m² = α n.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Cap on Q · trials · n for the Monte-Carlo run.
    #[arg(long, default_value_t = rdflb_core::mc::DEFAULT_BUDGET)]
    pub budget: f64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

/// What a successful command prints and its exit status.
#[derive(Debug, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

fn source_model(f: Family, p: Option<f64>, sigma2: Option<f64>) -> Result<SourceModel> {
    let m = match f {
        Family::Bss => SourceModel::BinarySymmetric,
        Family::Bns => match p {
            Some(p) => SourceModel::BinaryNonSymmetric { p },
            None => return usage("bns needs --p"),
        },
        Family::Gauss => SourceModel::Gaussian {
            sigma2: sigma2.unwrap_or(1.0),
        },
    };
    m.validate()?;
    Ok(m)
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// A fully resolved curve request.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePlan {
    pub spec: CurveSpec,
    /// The resolved parameters as `key=value` pairs, echoed into the CSV.
    pub params: String,
    pub jobs: Option<usize>,
    pub out: PathBuf,
}

/// Merges flags over the config file entries and fills defaults.
pub fn resolve_curve(a: &CurveArgs, file: &BTreeMap<String, String>) -> Result<CurvePlan> {
    let get = |k: &str| file.get(k).map(String::as_str);
    let scalar = |flag: Option<f64>, k: &str| -> Result<Option<f64>> {
        match (flag, get(k)) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(s)) => parse_f64(k, s).map(Some),
            (None, None) => Ok(None),
        }
    };
    let list = |flag: &[f64], k: &str| -> Result<Vec<f64>> {
        match (flag.is_empty(), get(k)) {
            (false, _) => Ok(flag.to_vec()),
            (true, Some(s)) => parse_list(k, s),
            (true, None) => Ok(Vec::new()),
        }
    };
    let family = match (a.source, get("source")) {
        (Some(f), _) => f,
        (None, Some(s)) => Family::parse(s)?,
        (None, None) => return usage("missing source (bss, bns or gauss)"),
    };
    let p = scalar(a.p, "p")?;
    let sigma2 = scalar(a.sigma2, "sigma2")?;
    let source = source_model(family, p, sigma2)?;
    let Some(rate) = scalar(a.rate, "rate")? else {
        return usage("missing --rate");
    };
    let n_text = a.n.clone().or_else(|| get("n").map(str::to_string));
    let n_text = n_text.unwrap_or_else(|| DEFAULT_N_RANGE.to_string());
    let ns = parse_n_range(&n_text)?;
    let mut eps = list(&a.eps, "eps")?;
    let mut ref_rates = list(&a.ref_rate, "ref-rate")?;
    let alphas = list(&a.alpha, "alpha")?;
    let unbounded = a.unbounded
        || get("unbounded")
            .map(|s| parse_bool("unbounded", s))
            .transpose()?
            .unwrap_or(false);
    let legacy_eps = scalar(a.legacy_eps, "legacy-eps")?;
    let delta = scalar(a.delta, "delta")?.unwrap_or(0.5);
    let jobs = match (a.jobs, get("jobs")) {
        (Some(j), _) => Some(j),
        (None, Some(s)) => Some(
            s.trim()
                .parse::<usize>()
                .or_else(|_| usage(format!("jobs: bad value {s:?}")))?,
        ),
        (None, None) => None,
    };
    if jobs == Some(0) {
        return usage("--jobs must be at least 1");
    }
    let out = match (&a.out, get("out")) {
        (Some(o), _) => o.clone(),
        (None, Some(s)) => PathBuf::from(s),
        (None, None) => return usage("missing --out"),
    };

    let mut constraints = Vec::new();
    if family == Family::Gauss {
        if eps.is_empty() {
            eps = vec![0.005];
        }
        if unbounded || alphas.is_empty() {
            constraints.push(Constraint::Unbounded);
        }
        constraints.extend(alphas.iter().map(|&al| Constraint::Alpha(al)));
    } else {
        if !alphas.is_empty() || unbounded {
            return usage("--alpha/--unbounded only apply to gauss");
        }
        if eps.is_empty() && ref_rates.is_empty() {
            eps = vec![0.005, 0.01];
            ref_rates = vec![0.4, 0.45];
        }
    }
    let mut spec = CurveSpec::new(source, rate, ns);
    spec.eps = eps;
    spec.ref_rates = ref_rates;
    spec.legacy_eps = legacy_eps;
    spec.constraints = constraints;
    spec.delta = delta;
    spec.validate()?;

    let mut params = vec![format!("source={}", family.name())];
    match source {
        SourceModel::BinaryNonSymmetric { p } => params.push(format!("p={p}")),
        SourceModel::Gaussian { sigma2 } => params.push(format!("sigma2={sigma2}")),
        SourceModel::BinarySymmetric => {}
    }
    params.push(format!("rate={rate}"));
    params.push(format!("n={}", n_text.trim()));
    params.push(format!("eps={}", join(&spec.eps)));
    if !spec.ref_rates.is_empty() {
        params.push(format!("ref-rate={}", join(&spec.ref_rates)));
    }
    if let Some(le) = legacy_eps {
        params.push(format!("legacy-eps={le}"));
    }
    if family == Family::Gauss {
        if !alphas.is_empty() {
            params.push(format!("alpha={}", join(&alphas)));
        }
        params.push(format!(
            "unbounded={}",
            spec.constraints.contains(&Constraint::Unbounded)
        ));
        params.push(format!("delta={delta}"));
    }
    Ok(CurvePlan {
        spec,
        params: params.join(" "),
        jobs,
        out,
    })
}

/// Computes the rows and writes the CSV to `plan.out`.
pub fn cmd_curve(plan: &CurvePlan) -> Result<CurveTable> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = plan.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(e.to_string()))?;
    let rows = pool.install(|| curve::compute(&plan.spec))?;
    let table = CurveTable::from_rows(Some(plan.params.clone()), plan.spec.columns(), &rows);
    fs::write(&plan.out, table.to_csv()).map_err(CliError::io(&plan.out))?;
    Ok(table)
}

pub fn cmd_validate(c: &ValidateCmd) -> Result<validate::Report> {
    let source = source_model(c.source, c.p, Some(c.sigma2))?;
    if c.trials == 0 {
        return usage("--trials must be at least 1");
    }
    if c.alpha.is_some() && c.source != Family::Gauss {
        return usage("--alpha only applies to gauss");
    }
    let mut a = ValidateArgs::new(source, c.n, c.rate, c.trials, c.seed);
    a.eps = c.eps;
    a.codebooks = c.codebooks;
    a.alpha = c.alpha;
    a.budget = c.budget;
    run_validate(&a)
}

pub fn cmd_plot(input: &Path, out: &Path) -> Result<()> {
    let text = fs::read_to_string(input).map_err(CliError::io(input))?;
    let table = parse_curve_csv(&text)?;
    fs::write(out, plot::render_svg(&table)).map_err(CliError::io(out))
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Curve(a) => {
            let file = match &a.config {
                Some(path) => parse_config(&fs::read_to_string(path).map_err(CliError::io(path))?)?,
                None => BTreeMap::new(),
            };
            let plan = resolve_curve(a, &file)?;
            let table = cmd_curve(&plan)?;
            let flagged = table.rows.iter().filter(|r| !r.flags.is_empty()).count();
            let mut stdout = format!(
                "wrote {} rows to {}\n",
                table.rows.len(),
                plan.out.display()
            );
            if flagged > 0 {
                stdout.push_str(&format!("{flagged} rows carry flags\n"));
            }
            Ok(Outcome { stdout, code: 0 })
        }
        Command::Validate(c) => {
            let report = cmd_validate(c)?;
            let text = report.to_string();
            let code = if report.pass { 0 } else { 1 };
            match &c.out {
                Some(path) => {
                    fs::write(path, &text).map_err(CliError::io(path))?;
                    Ok(Outcome {
                        stdout: String::new(),
                        code,
                    })
                }
                None => Ok(Outcome { stdout: text, code }),
            }
        }
        Command::Plot(p) => {
            cmd_plot(&p.input, &p.out)?;
            Ok(Outcome {
                stdout: String::new(),
                code: 0,
            })
        }
    }
}
