//! Thin command-line wrapper over [`defix::pipeline`].

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use defix::pipeline::{run, Command as PipelineCommand, Predictor, RunConfig};
use defix::series::Frequency;

#[derive(Parser)]
#[command(name = "defix", version, about = "Divisor-chained token market index and analysis suite")]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PredictorArg {
    Btc,
    Eth,
    Crix,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FrequencyArg {
    Weekly,
    Monthly,
}

#[derive(Debug, clap::Args)]
struct CommonArgs {
    /// Path to the run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config and the OUTPUT_DIR variable).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Build the index: levels, epoch history and data-cleaning reports.
    BuildIndex(CommonArgs),
    /// Summary statistics table (t1).
    Summary(CommonArgs),
    /// Correlation matrices (t2, t6).
    Correlations(CommonArgs),
    /// Lagged-return regressions for one predictor (t3/t4/t5).
    LaggedRegressions {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        predictor: PredictorArg,
    },
    /// Network-effect suite (t7..t13) and the feature export.
    NetworkSuite(CommonArgs),
    /// Search-attention regressions (t14).
    Attention(CommonArgs),
    /// Valuation-ratio panels (t15/t16 weekly, d1/d2 monthly) and fig2.
    Valuation {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value = "weekly")]
        frequency: FrequencyArg,
    },
    /// Cumulative-return export (fig1).
    Cumulative(CommonArgs),
    /// Run every command; valuation at both frequencies.
    All(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, command) = match &cli.command {
        CliCommand::BuildIndex(c) => (c, PipelineCommand::BuildIndex),
        CliCommand::Summary(c) => (c, PipelineCommand::Summary),
        CliCommand::Correlations(c) => (c, PipelineCommand::Correlations),
        CliCommand::LaggedRegressions { common, predictor } => {
            let p = match predictor {
                PredictorArg::Btc => Predictor::Btc,
                PredictorArg::Eth => Predictor::Eth,
                PredictorArg::Crix => Predictor::Crix,
            };
            (common, PipelineCommand::Lagged(p))
        }
        CliCommand::NetworkSuite(c) => (c, PipelineCommand::NetworkSuite),
        CliCommand::Attention(c) => (c, PipelineCommand::Attention),
        CliCommand::Valuation { common, frequency } => {
            let f = match frequency {
                FrequencyArg::Weekly => Frequency::Weekly,
                FrequencyArg::Monthly => Frequency::Monthly,
            };
            (common, PipelineCommand::Valuation(f))
        }
        CliCommand::Cumulative(c) => (c, PipelineCommand::Cumulative),
        CliCommand::All(c) => (c, PipelineCommand::All),
    };

    let mut config = match RunConfig::load(&common.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("defix: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(out) = &common.out {
        config.output_dir = out.clone();
    }

    match run(&config, command) {
        Ok(report) => {
            for artifact in &report.artifacts {
                println!("wrote {}", config.output_dir.join(&artifact.file).display());
            }
            for failure in &report.failures {
                eprintln!("FAILED {}: {}", failure.table_id, failure.error);
            }
            println!("manifest: {}", report.manifest_path.display());
            if report.success() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("defix: {e}");
            ExitCode::from(2)
        }
    }
}
