mod inputs;

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use stylodist::classify::{classify, feature_distance, Feature, TextInputs};
use stylodist::features::{
    build_grammar_pts, build_letter_pts_with, build_pos_pts, parse_tagged_tsv, parse_trees,
};
use stylodist::transport::TransportError;
use stylodist::{coarsest_bisimulation, distance_matrix, DistanceParams, Pts};

#[derive(Parser, Debug)]
#[command(
    name = "stylodist",
    version,
    about = "Behavioural distances between texts"
)]
struct Cli {
    /// Discount factor c in (0, 1).
    #[arg(long, global = true, default_value_t = 0.9)]
    discount: f64,
    /// Accuracy alpha in (0, 1].
    #[arg(long, global = true, default_value_t = 0.01)]
    accuracy: f64,
    /// Feature to use; repeat for several.
    #[arg(long = "feature", global = true)]
    features: Vec<Feature>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the payload to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Sentence terminators for raw text.
    #[arg(long, global = true, default_value = ".!?")]
    terminators: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the transition system of one feature and print it as JSON.
    Build { input: PathBuf },
    /// Distance matrix of a system, or the distance between two texts.
    Dist {
        #[arg(num_args = 1..=2, required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Coarsest bisimulation of a system, one block per line.
    Bisim { input: PathBuf },
    /// Rank the categories under DIR by distance to the text.
    Classify {
        #[arg(long, value_name = "DIR")]
        categories: PathBuf,
        /// Text files or directories (.txt, .tsv, .trees).
        #[arg(required = true)]
        text: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

/// Failure that is not caused by the user's input.
#[derive(Debug)]
struct Internal(String);

impl fmt::Display for Internal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Internal {}

impl Cli {
    fn params(&self) -> Result<DistanceParams> {
        Ok(DistanceParams::new(self.discount, self.accuracy)?)
    }

    fn terminators(&self) -> Result<Vec<char>> {
        if self.terminators.is_empty() {
            bail!("--terminators must not be empty");
        }
        Ok(self.terminators.chars().collect())
    }

    /// The single feature of `build` and two-text `dist`, letters by default.
    fn single_feature(&self) -> Result<Feature> {
        match self.features.as_slice() {
            [] => Ok(Feature::Letters),
            [f] => Ok(*f),
            _ => bail!("this command takes exactly one --feature"),
        }
    }

    fn emit(&self, payload: &str) -> Result<()> {
        match &self.output {
            Some(path) => fs::write(path, payload)
                .map_err(|e| Internal(format!("cannot write {}: {e}", path.display())).into()),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(payload.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| Internal(format!("cannot write to stdout: {e}")).into())
            }
        }
    }
}

fn build_feature(
    feature: Feature,
    path: &Path,
    terminators: &[char],
) -> Result<stylodist::features::FeaturePts> {
    let text = inputs::read(path)?;
    let built = match feature {
        Feature::Letters => build_letter_pts_with(&text, terminators),
        Feature::Pos => parse_tagged_tsv(&text).and_then(|s| build_pos_pts(&s)),
        Feature::Grammar => parse_trees(&text).and_then(|t| build_grammar_pts(&t)),
    };
    built.with_context(|| path.display().to_string())
}

fn read_pts(path: &Path) -> Result<Pts> {
    let text = inputs::read(path)?;
    Pts::from_json(&text).with_context(|| path.display().to_string())
}

fn cmd_build(cli: &Cli, input: &Path) -> Result<String> {
    let system = build_feature(cli.single_feature()?, input, &cli.terminators()?)?;
    let mut json = system.pts().to_json();
    json.push('\n');
    Ok(json)
}

fn cmd_dist(cli: &Cli, paths: &[PathBuf]) -> Result<String> {
    let params = cli.params()?;
    if let [path] = paths {
        let pts = read_pts(path)?;
        let d = distance_matrix(&pts, &params)?;
        return Ok(match cli.format {
            Format::Json => d.to_json(&pts, &params) + "\n",
            Format::Table => labelled_matrix(&pts, d.rows()),
        });
    }

    let feature = cli.single_feature()?;
    let terminators = cli.terminators()?;
    let load = |path: &Path| -> Result<TextInputs> {
        Ok(TextInputs::new().with_system(feature, build_feature(feature, path, &terminators)?))
    };
    let (a, b) = (load(&paths[0])?, load(&paths[1])?);
    let d = feature_distance(&a, &b, feature, &params)?;
    Ok(match cli.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Report {
                format_version: u32,
                feature: Feature,
                params: DistanceParams,
                distance: String,
            }
            let report = Report {
                format_version: 1,
                feature,
                params,
                distance: d.to_string(),
            };
            serde_json::to_string_pretty(&report)? + "\n"
        }
        Format::Table => format!("{}  {d:.4}\n", feature.heading()),
    })
}

fn labelled_matrix<'a>(pts: &Pts, rows: impl Iterator<Item = &'a [f64]>) -> String {
    let labels = pts.labels();
    let width = labels
        .iter()
        .map(|l| l.chars().count())
        .max()
        .unwrap_or(0)
        .max(6);
    let mut out = format!("{:width$}", "");
    for label in labels {
        out.push_str(&format!("  {label:>width$}"));
    }
    out.push('\n');
    for (label, row) in labels.iter().zip(rows) {
        out.push_str(&format!("{label:width$}"));
        for v in row {
            out.push_str(&format!("  {v:>width$.4}"));
        }
        out.push('\n');
    }
    out
}

fn cmd_bisim(cli: &Cli, input: &Path) -> Result<String> {
    let pts = read_pts(input)?;
    let partition = coarsest_bisimulation(&pts);
    Ok(match cli.format {
        Format::Json => {
            let blocks: Vec<Vec<&str>> = partition
                .blocks()
                .iter()
                .map(|b| b.iter().map(|&s| &*pts.labels()[s.position()]).collect())
                .collect();
            #[derive(Serialize)]
            struct Report<'a> {
                format_version: u32,
                blocks: Vec<Vec<&'a str>>,
            }
            serde_json::to_string_pretty(&Report {
                format_version: 1,
                blocks,
            })? + "\n"
        }
        Format::Table => partition.render(&pts),
    })
}

fn cmd_classify(cli: &Cli, dir: &Path, text: &[PathBuf]) -> Result<String> {
    let params = cli.params()?;
    let terminators = cli.terminators()?;
    let text = inputs::load(text, &terminators)?;
    let categories = inputs::load_categories(dir, &terminators)?;
    let features: Vec<Feature> = if cli.features.is_empty() {
        Feature::DEFAULT_ORDER
            .into_iter()
            .filter(|&f| text.system(f).is_some())
            .collect()
    } else {
        cli.features.clone()
    };
    let report = classify(&text, &categories, &features, &params)?;
    Ok(match cli.format {
        Format::Json => report.to_json() + "\n",
        Format::Table => report.to_table(),
    })
}

fn run(cli: &Cli) -> Result<()> {
    let payload = match &cli.command {
        Command::Build { input } => cmd_build(cli, input)?,
        Command::Dist { inputs } => cmd_dist(cli, inputs)?,
        Command::Bisim { input } => cmd_bisim(cli, input)?,
        Command::Classify { categories, text } => cmd_classify(cli, categories, text)?,
    };
    cli.emit(&payload)
}

/// The error and its causes, skipping causes whose text is already shown.
fn describe(err: &anyhow::Error) -> String {
    let mut message = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if message.contains(&text) {
            continue;
        }
        if !message.is_empty() {
            message.push_str(": ");
        }
        message.push_str(&text);
    }
    message
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let internal = err
        .chain()
        .any(|e| e.is::<Internal>() || e.is::<TransportError>());
    if internal {
        1
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(0) => Err(anyhow::anyhow!("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Internal(format!("cannot start thread pool: {e}")).into())
            .and_then(|pool| pool.install(|| run(&cli))),
        None => run(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", describe(&err));
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn repeated_causes_are_not_printed_twice() {
        let err =
            anyhow::Error::new(Internal("disk full".into())).context("cannot save: disk full");
        assert_eq!(describe(&err), "cannot save: disk full");
        let err = anyhow::anyhow!("line 3").context("in.tsv");
        assert_eq!(describe(&err), "in.tsv: line 3");
    }

    #[test]
    fn solver_failures_are_internal() {
        let err = anyhow::Error::new(TransportError::Stalled(9)).context("pair");
        assert_eq!(exit_code(&err), 1);
        assert_eq!(exit_code(&anyhow::anyhow!("empty input")), 2);
    }
}
