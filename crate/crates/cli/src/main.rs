//! `bvarcast`: ingest price files, run rolling Bayesian VAR forecasts and
//! tabulate their accuracy.

mod commands;
mod config;
mod fetch;

use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use chrono::NaiveDate;
use clap::{Parser, Subcommand};

use config::{Overrides, Profile, RunConfig, DATA_DIR_ENV};

#[derive(Parser)]
#[command(name = "bvarcast", version, about = "Rolling Bayesian VAR forecasts for daily return panels")]
struct Cli {
    #[arg(long, global = true, default_value = "bvarcast.toml")]
    config: PathBuf,
    #[arg(long, global = true, value_enum)]
    profile: Option<Profile>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated model labels, e.g. `BVAR,BVAR-SV,BAR(1)`.
    #[arg(long, global = true, value_delimiter = ',')]
    models: Option<Vec<String>>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert price files into return and predictor panels.
    Ingest,
    /// Descriptive statistics of the return panel.
    Describe,
    /// Rolling estimation and one-step-ahead forecasts for every model.
    Run,
    /// Forecast accuracy tables from the stored draws.
    Evaluate,
    /// Realizations with point forecasts and 95% bands for one model and series.
    PlotData {
        #[arg(long)]
        model: String,
        #[arg(long)]
        series: String,
    },
    /// Download daily prices for one coin into the data directory.
    Fetch {
        /// Coin id, e.g. `bitcoin`.
        #[arg(long)]
        coin: String,
        /// File name (without `.csv`) to write.
        #[arg(long)]
        name: String,
        #[arg(long)]
        from: NaiveDate,
        #[arg(long)]
        to: NaiveDate,
    },
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format(|buf, record| {
            writeln!(
                buf,
                "{} {:<5} {}",
                chrono::Local::now().format("%Y-%m-%dT%H:%M:%S%:z"),
                record.level(),
                record.args()
            )
        })
        .init();
    if let Err(e) = real_main() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn real_main() -> Result<()> {
    let cli = Cli::parse();
    let overrides = Overrides {
        profile: cli.profile,
        seed: cli.seed,
        models: cli.models.clone(),
        out: cli.out.clone(),
        data_dir: std::env::var_os(DATA_DIR_ENV).map(PathBuf::from),
    };
    let cfg = || RunConfig::load(&cli.config, &overrides);
    match &cli.command {
        Command::Ingest => commands::ingest(&cfg()?),
        Command::Describe => commands::describe_cmd(&cfg()?),
        Command::Run => commands::run(&cfg()?),
        Command::Evaluate => commands::evaluate(&cfg()?),
        Command::PlotData { model, series } => commands::plot_data(&cfg()?, model, series),
        Command::Fetch { coin, name, from, to } => {
            let cfg = cfg()?;
            let body = fetch::download(coin, *from, *to)?;
            let series = fetch::parse_market_chart(name, &body)?;
            std::fs::create_dir_all(&cfg.data.dir)?;
            let path = cfg.data.dir.join(format!("{name}.csv"));
            series
                .write_csv(std::fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?)?;
            log::info!("{}: {} daily prices written to {}", name, series.len(), path.display());
            Ok(())
        }
    }
}
