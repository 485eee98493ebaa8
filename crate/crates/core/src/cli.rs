//! Command-line front end.
//!
//! Exit codes: 0 success, 1 input or estimation error, 2 fit did not converge
//! (reports are still written).

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bayes::{
    gibbs_binary_probit, gibbs_ordinal_probit, posterior_summary, PriorSpec, DEFAULT_BURN,
    DEFAULT_DRAWS, DEFAULT_MH_STEP,
};
use crate::data::{
    build_dataset, parse_csv, simulate_dataset, to_csv_string, to_raw_table, ColumnKind, Dataset,
    SchemaConfig,
};
use crate::distributions::Link;
use crate::effects::{effects_table, EffectsTable};
use crate::estimation::{fit_ml, FitOptions, FitReport, FitResult};
use crate::likelihood::{Family, ModelSpec};

pub const DEFAULT_SEED: u64 = 20_240_601;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ordchoice",
    version,
    about = "Binary and ordinal probit/logit estimation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit by maximum likelihood and write `<out>.txt` and `<out>.json`.
    Fit(FitArgs),
    /// Fit, then write average covariate effects to `<out>.txt` and `<out>.json`.
    Effects(EffectsArgs),
    /// Simulate a dataset from known parameters and write it as CSV.
    Simulate(SimulateArgs),
    /// Run the probit Gibbs sampler and write the chain and its summary.
    Bayes(BayesArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// Defaults to binary for two response labels, ordinal otherwise.
    #[arg(long)]
    pub family: Option<Family>,
    #[arg(long, default_value = "probit")]
    pub link: Link,
    /// Output path stem.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct OptimArgs {
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Gradient sup-norm tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

impl OptimArgs {
    fn options(&self) -> FitOptions {
        FitOptions {
            max_iter: self.max_iter,
            grad_tol: self.tol,
            ..FitOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub optim: OptimArgs,
}

#[derive(Debug, Args)]
pub struct EffectsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub optim: OptimArgs,
    /// Multiply a continuous covariate's effect, e.g. `age=10`. Repeatable.
    #[arg(long = "scale", value_name = "COL=MULT")]
    pub scales: Vec<String>,
    /// Keep only covariates whose coefficient p-value is below this level.
    #[arg(long)]
    pub pfilter: Option<f64>,
    /// Restrict the table to these design columns. Repeatable.
    #[arg(long = "covariate", value_name = "NAME")]
    pub covariates: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// CSV file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write a schema file that reads the CSV back.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long, default_value = "binary")]
    pub family: Family,
    #[arg(long, default_value = "probit")]
    pub link: Link,
    /// Comma-separated coefficients, intercept first.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    pub beta: Vec<f64>,
    /// Comma-separated interior cut-points γ_2 < … < γ_{J-1} (γ_1 = 0).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub cutpoints: Vec<f64>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Omit the intercept column; every coefficient then multiplies a covariate.
    #[arg(long)]
    pub no_intercept: bool,
}

#[derive(Debug, Args)]
pub struct BayesArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = DEFAULT_DRAWS)]
    pub draws: usize,
    #[arg(long, default_value_t = DEFAULT_BURN)]
    pub burn: usize,
    #[arg(long = "mh-step", default_value_t = DEFAULT_MH_STEP)]
    pub mh_step: f64,
}

/// Error carrying the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

pub fn execute(command: &Command) -> CliResult<i32> {
    match command {
        Command::Fit(args) => cmd_fit(args),
        Command::Effects(args) => cmd_effects(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Bayes(args) => cmd_bayes(args),
    }
}

fn read_text(path: &Path, what: &str) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {what} `{}`: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents)
        .map_err(|e| CliError::input(format!("cannot write `{}`: {e}", path.display())))
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn load(model: &ModelArgs) -> CliResult<(Dataset, ModelSpec)> {
    let schema_text = read_text(&model.schema, "schema")?;
    let schema = SchemaConfig::parse(&schema_text)
        .map_err(|e| CliError::input(format!("{}: {e}", model.schema.display())))?;
    let file = fs::File::open(&model.data).map_err(|e| {
        CliError::input(format!("cannot read data `{}`: {e}", model.data.display()))
    })?;
    let raw = parse_csv(std::io::BufReader::new(file))
        .map_err(|e| CliError::input(format!("{}: {e}", model.data.display())))?;
    let (data, report) = build_dataset(&raw, &schema)
        .map_err(|e| CliError::input(format!("{}: {e}", model.data.display())))?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let family = model.family.unwrap_or(if data.n_categories() == 2 {
        Family::Binary
    } else {
        Family::Ordinal
    });
    let spec = ModelSpec::for_dataset(family, model.link, &data)
        .map_err(|e| CliError::input(e.to_string()))?;
    Ok((data, spec))
}

fn fit(data: &Dataset, spec: &ModelSpec, optim: &OptimArgs) -> CliResult<FitResult> {
    let opts = optim.options();
    opts.validate()
        .map_err(|e| CliError::input(e.to_string()))?;
    fit_ml(spec, data, &opts).map_err(|e| CliError::input(e.to_string()))
}

fn status(fit: &FitResult) -> i32 {
    if fit.converged {
        EXIT_OK
    } else {
        eprintln!(
            "warning: no convergence after {} iterations (|grad| = {:.3e})",
            fit.iterations, fit.gradient_norm
        );
        EXIT_NOT_CONVERGED
    }
}

pub fn cmd_fit(args: &FitArgs) -> CliResult<i32> {
    let (data, spec) = load(&args.model)?;
    let fit = fit(&data, &spec, &args.optim)?;
    let report = FitReport::new(&fit, data.names());
    write_file(&with_suffix(&args.model.out, ".txt"), &report.to_text())?;
    write_file(&with_suffix(&args.model.out, ".json"), &report.to_json())?;
    Ok(status(&fit))
}

fn parse_scales(raw: &[String], data: &Dataset) -> CliResult<HashMap<String, f64>> {
    let mut scales = HashMap::new();
    for item in raw {
        let (name, mult) = item
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("--scale expects COL=MULT, got `{item}`")))?;
        let mult: f64 = mult
            .trim()
            .parse()
            .ok()
            .filter(|m: &f64| m.is_finite() && *m != 0.0)
            .ok_or_else(|| CliError::input(format!("invalid multiplier in `{item}`")))?;
        let name = name.trim();
        match data.column_index(name) {
            None => {
                return Err(CliError::input(format!(
                    "--scale: unknown covariate `{name}`"
                )))
            }
            Some(c) if data.kinds()[c] == ColumnKind::Intercept => {
                return Err(CliError::input("the intercept has no covariate effect"))
            }
            Some(_) => {}
        }
        scales.insert(name.to_string(), mult);
    }
    Ok(scales)
}

pub fn cmd_effects(args: &EffectsArgs) -> CliResult<i32> {
    let (data, spec) = load(&args.model)?;
    let scales = parse_scales(&args.scales, &data)?;
    let columns: Vec<usize> = if args.covariates.is_empty() {
        (0..data.k())
            .filter(|&c| data.kinds()[c] != ColumnKind::Intercept)
            .collect()
    } else {
        let mut cols = Vec::new();
        for name in &args.covariates {
            let c = data
                .column_index(name)
                .ok_or_else(|| CliError::input(format!("unknown covariate `{name}`")))?;
            if data.kinds()[c] == ColumnKind::Intercept {
                return Err(CliError::input("the intercept has no covariate effect"));
            }
            cols.push(c);
        }
        // schema order regardless of how they were requested
        cols.sort_unstable();
        cols.dedup();
        cols
    };
    if let Some(level) = args.pfilter {
        if !(level > 0.0 && level <= 1.0) {
            return Err(CliError::input(format!(
                "--pfilter must lie in (0, 1], got {level}"
            )));
        }
    }

    let fit = fit(&data, &spec, &args.optim)?;
    let report = FitReport::new(&fit, data.names());
    let p_values: Vec<f64> = report.coefficients.iter().map(|r| r.p_value).collect();
    let columns: Vec<usize> = match args.pfilter {
        Some(level) => columns
            .into_iter()
            .filter(|&c| p_values[c] < level)
            .collect(),
        None => columns,
    };
    let mut table = effects_table(&spec, &fit.params, &data, &columns, &scales)
        .map_err(|e| CliError::input(e.to_string()))?;
    for (row, &c) in table.rows.iter_mut().zip(&columns) {
        row.p_value = Some(p_values[c]);
    }

    write_file(
        &with_suffix(&args.model.out, ".txt"),
        &effects_text(&table, &spec, &data),
    )?;
    write_file(&with_suffix(&args.model.out, ".json"), &table.to_json())?;
    Ok(status(&fit))
}

fn effects_text(table: &EffectsTable, spec: &ModelSpec, data: &Dataset) -> String {
    let mut out = format!(
        "average covariate effects, {} {} model (n = {})\n",
        spec.family,
        spec.link,
        data.n()
    );
    out.push_str(&table.to_text());
    let logged: Vec<&str> = table
        .rows
        .iter()
        .filter(|r| {
            data.column_index(&r.covariate)
                .is_some_and(|c| data.kinds()[c] == ColumnKind::LogContinuous)
        })
        .map(|r| r.covariate.as_str())
        .collect();
    if !logged.is_empty() {
        out.push_str(&format!(
            "note: effects of {} are per unit of the log-transformed variable\n",
            logged.join(", ")
        ));
    }
    out
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<i32> {
    let n_categories = match args.family {
        Family::Binary => {
            if !args.cutpoints.is_empty() {
                return Err(CliError::input("a binary model has no free cut-points"));
            }
            2
        }
        Family::Ordinal => args.cutpoints.len() + 2,
    };
    let spec = ModelSpec::new(
        args.family,
        args.link,
        n_categories,
        args.beta.len(),
        !args.no_intercept,
    )
    .map_err(|e| CliError::input(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let data = simulate_dataset(&spec, &args.beta, &args.cutpoints, args.n, &mut rng)
        .map_err(|e| CliError::input(e.to_string()))?;
    let (table, schema) = to_raw_table(&data, "y").map_err(|e| CliError::input(e.to_string()))?;
    let csv = to_csv_string(&table).map_err(|e| CliError::input(e.to_string()))?;
    write_file(&args.out, &csv)?;
    if let Some(path) = &args.schema {
        write_file(path, &schema.to_text())?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_bayes(args: &BayesArgs) -> CliResult<i32> {
    if args.model.link != Link::Probit {
        return Err(CliError::input(
            "the Gibbs sampler supports the probit link only",
        ));
    }
    let (data, spec) = load(&args.model)?;
    let prior = PriorSpec::diffuse(data.k());
    let mut rng = ChaCha8Rng::seed_from_u64(args.model.seed);
    let chain = match spec.family {
        Family::Binary => gibbs_binary_probit(&data, &prior, args.draws, args.burn, &mut rng),
        Family::Ordinal => {
            gibbs_ordinal_probit(&data, &prior, args.draws, args.burn, args.mh_step, &mut rng)
        }
    }
    .map_err(|e| CliError::input(e.to_string()))?
    .with_seed(args.model.seed);
    let summary = posterior_summary(&chain).map_err(|e| CliError::input(e.to_string()))?;
    write_file(&with_suffix(&args.model.out, ".chain.csv"), &chain.to_csv())?;
    write_file(
        &with_suffix(&args.model.out, ".summary.txt"),
        &summary.to_text(),
    )?;
    write_file(
        &with_suffix(&args.model.out, ".summary.json"),
        &summary.to_json(),
    )?;
    Ok(EXIT_OK)
}
