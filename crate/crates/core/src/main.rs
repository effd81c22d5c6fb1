use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bt_explain::batch::{run_batch, BatchConfig, Mode};
use bt_explain::fixtures::{discrepancy_instance, discrepancy_model};
use bt_explain::io::{instances, native, terms, xgboost};
use bt_explain::{BoostedTree, OrderingPolicy, SrConfig, TsConfig};

#[derive(Parser)]
#[command(name = "bt-explain", version, about = "Abductive explanations for boosted trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Explain (or check explanations of) every instance of a CSV file.
    Explain(ExplainArgs),
    /// Print the predicted class and forest weights of every instance.
    Classify(ClassifyArgs),
    /// Convert a model to the native JSON format.
    Convert(ConvertArgs),
    /// Write the discrepancy model over n Boolean attributes.
    GenDiscrepancy(GenDiscrepancyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Native,
    Xgb,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Ts,
    Sr,
    TsSr,
    Check,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Instance,
    Random,
}

impl From<OrderArg> for OrderingPolicy {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::Instance => OrderingPolicy::InstanceOrder,
            OrderArg::Random => OrderingPolicy::Random,
        }
    }
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value = "native")]
    format: Format,
    /// Override the tie class.
    #[arg(long)]
    tie_class: Option<usize>,
    /// XGBoost: number of classes (1 = binary).
    #[arg(long)]
    num_class: Option<usize>,
    /// XGBoost: base margins, one per class, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    base_margin: Option<Vec<f64>>,
    /// XGBoost: feature names, comma-separated.
    #[arg(long, value_delimiter = ',')]
    feature_names: Option<Vec<String>>,
}

impl ModelArgs {
    fn load(&self) -> Result<BoostedTree> {
        let bt = match self.format {
            Format::Native => native::load(&self.model)?,
            Format::Xgb => xgboost::load(
                &self.model,
                &xgboost::XgbOptions {
                    num_class: self.num_class,
                    base_margin: self.base_margin.clone(),
                    feature_names: self.feature_names.clone(),
                    tie_class: self.tie_class.unwrap_or(0),
                },
            )?,
        };
        let bt = match self.tie_class {
            Some(c) => bt.with_tie_class(c)?,
            None => bt,
        };
        Ok(bt)
    }
}

#[derive(Args)]
struct ExplainArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    instances: PathBuf,
    #[arg(long, value_enum, default_value = "ts-sr")]
    mode: ModeArg,
    /// Check mode: JSON array with one array of attribute names per instance.
    #[arg(long)]
    terms: Option<PathBuf>,
    /// Tree-specific runs per instance.
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Elimination order of the tree-specific runs.
    #[arg(long, value_enum, default_value = "random")]
    ts_order: OrderArg,
    /// Elimination order of the sufficient-reason stage.
    #[arg(long, value_enum, default_value = "instance")]
    sr_order: OrderArg,
    /// Per-instance time limit in seconds.
    #[arg(long, default_value_t = 100.0)]
    timeout: f64,
    /// Node budget of each oracle call.
    #[arg(long, default_value_t = 10_000_000)]
    max_nodes: u64,
    /// Explain instances one at a time.
    #[arg(long)]
    sequential: bool,
    /// Report path (JSON); stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    instances: PathBuf,
}

#[derive(Args)]
struct ConvertArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenDiscrepancyArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    out: PathBuf,
    /// Also write the all-zero instance as CSV.
    #[arg(long)]
    instance_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Explain(a) => explain(a),
        Command::Classify(a) => {
            let bt = a.model.load()?;
            let xs = instances::load(bt.schema(), &a.instances)
                .with_context(|| format!("reading {}", a.instances.display()))?;
            let mut out = std::io::stdout().lock();
            let header: Vec<String> = (0..bt.forests().len()).map(|j| format!("weight_{j}")).collect();
            writeln!(out, "id,class,{}", header.join(","))?;
            for (i, x) in xs.iter().enumerate() {
                let w: Vec<String> = bt.forest_weights(x).iter().map(f64::to_string).collect();
                writeln!(out, "{i},{},{}", bt.classify(x), w.join(","))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Convert(a) => {
            native::save(&a.model.load()?, &a.out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::GenDiscrepancy(a) => {
            if a.n == 0 {
                bail!("--n must be at least 1");
            }
            let bt = discrepancy_model(a.n);
            native::save(&bt, &a.out)?;
            if let Some(p) = a.instance_out {
                let f = fs::File::create(&p)?;
                instances::write(bt.schema(), &[discrepancy_instance(&bt)], f)?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn explain(a: ExplainArgs) -> Result<ExitCode> {
    let bt = a.model.load()?;
    let xs = instances::load(bt.schema(), &a.instances)
        .with_context(|| format!("reading {}", a.instances.display()))?;
    let mode = match a.mode {
        ModeArg::Ts => Mode::Ts,
        ModeArg::Sr => Mode::Sr,
        ModeArg::TsSr => Mode::TsSr,
        ModeArg::Check => Mode::Check,
    };
    let given = match (&a.terms, mode) {
        (Some(p), _) => Some(terms::load(bt.schema(), p)?),
        (None, Mode::Check) => bail!("--mode check needs --terms"),
        (None, _) => None,
    };
    if !(a.timeout.is_finite() && a.timeout > 0.0) {
        bail!("--timeout must be a positive number of seconds");
    }
    let limit = Duration::from_secs_f64(a.timeout);
    let mut sr = SrConfig {
        time_limit: Some(limit),
        ordering: a.sr_order.into(),
        seed: a.seed,
        ..SrConfig::default()
    };
    sr.oracle.max_nodes = a.max_nodes;
    sr.oracle.time_limit = Some(limit);
    let cfg = BatchConfig {
        mode,
        ts: TsConfig {
            runs: a.runs,
            seed: a.seed,
            ordering: a.ts_order.into(),
        },
        sr,
        parallel: !a.sequential,
    };
    let report = run_batch(&bt, &xs, given.as_deref(), &cfg)?;
    let json = serde_json::to_string_pretty(&report)?;
    write_output(a.out.as_deref(), &json)?;
    Ok(if report.any_timeout() {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn write_output(path: Option<&Path>, s: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, format!("{s}\n")).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{s}");
            Ok(())
        }
    }
}
