//! Command-line front end. Every command writes its main output file plus a
//! `<output>.meta.json` sidecar recording the tool version and the effective
//! configuration.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{
    filter_groups, group_by_source, normalize, parse_parallel, write_parallel, FilterOptions,
    Layout, Sample, SourceGroup,
};
use crate::edits::{
    self, apply_edits, extract_edits, parse_m2_file, to_m2_file, Annotation, M2Entry,
};
use crate::scorer::{evaluate_corpus, ScoreEntry};
use crate::select::{build_ablation, clean_corpus, SelectionConfig, StrategyKind};
use crate::stats::{bucket_stats, overall_stats, render_buckets, render_overall};

#[derive(Debug, Parser)]
#[command(
    name = "onetarget",
    version,
    about = "Clean, convert, describe and score multi-reference GEC corpora"
)]
pub struct Cli {
    /// Worker threads for per-group work (0 = all cores). Output bytes do
    /// not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Keep one target per unique source.
    Clean(CleanArgs),
    /// Corpus statistics, overall and by number of targets.
    Stats(StatsArgs),
    /// Convert a parallel corpus to M2 (one block per unique source).
    ToM2(ToM2Args),
    /// Apply every annotation of an M2 file, one corrected sentence per line.
    ApplyM2(ApplyM2Args),
    /// Build n-target ablation datasets.
    Ablate(AblateArgs),
    /// Score hypotheses against gold M2 annotations.
    Score(ScoreArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Clean(_) => "clean",
            Command::Stats(_) => "stats",
            Command::ToM2(_) => "to-m2",
            Command::ApplyM2(_) => "apply-m2",
            Command::Ablate(_) => "ablate",
            Command::Score(_) => "score",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct CorpusInput {
    /// Tab-separated parallel corpus.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Lines are `source<TAB>t1<TAB>t2...`.
    #[arg(long)]
    pub multi_target_lines: bool,
}

impl CorpusInput {
    fn layout(&self) -> Layout {
        if self.multi_target_lines {
            Layout::MultiTargetPerLine
        } else {
            Layout::PairPerLine
        }
    }

    fn read_samples(&self) -> Result<Vec<Sample>> {
        let file =
            File::open(&self.input).with_context(|| format!("opening {}", self.input.display()))?;
        parse_parallel(BufReader::new(file), self.layout())
            .with_context(|| format!("reading {}", self.input.display()))
    }

    fn read_groups(&self, drop_correct: bool) -> Result<Vec<SourceGroup>> {
        let samples = self.read_samples()?;
        let groups = group_by_source(&samples);
        Ok(if drop_correct {
            filter_groups(groups, FilterOptions::both())
        } else {
            groups
        })
    }
}

fn parse_strategy(s: &str) -> Result<StrategyKind, String> {
    s.parse()
        .map_err(|e: crate::select::SelectError| e.to_string())
}

#[derive(Debug, Args, Serialize)]
pub struct CleanArgs {
    #[command(flatten)]
    pub corpus: CorpusInput,
    #[arg(long, short)]
    pub output: PathBuf,
    /// lev_sim, lev_dis, jac_sim, jac_dis, edi_least, edi_most or random.
    #[arg(long, value_parser = parse_strategy)]
    pub strategy: StrategyKind,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Drop targets equal to their source and fully correct sources.
    #[arg(long)]
    pub drop_correct: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct StatsArgs {
    #[command(flatten)]
    pub corpus: CorpusInput,
    #[arg(long, short)]
    pub output: PathBuf,
    /// Emit JSON instead of aligned text tables.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ToM2Args {
    #[command(flatten)]
    pub corpus: CorpusInput,
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long)]
    pub drop_correct: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ApplyM2Args {
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AblateArgs {
    #[command(flatten)]
    pub corpus: CorpusInput,
    /// Directory receiving `ablation_n<N>.tsv` files.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Keep only sources with at least this many targets.
    #[arg(long, default_value_t = 3)]
    pub k_min: usize,
    /// Comma-separated dataset sizes.
    #[arg(long = "n", value_delimiter = ',', default_values_t = [1usize, 2, 3])]
    pub n_values: Vec<usize>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Randomly keep at most this many qualifying sources.
    #[arg(long)]
    pub max_groups: Option<usize>,
    #[arg(long)]
    pub drop_correct: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ScoreArgs {
    /// Gold annotations in M2 format.
    #[arg(long)]
    pub gold: PathBuf,
    /// One hypothesis per line, aligned with the gold blocks.
    #[arg(long)]
    pub hypotheses: PathBuf,
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: Option<u64>,
    config: &'a Command,
}

fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn write_metadata(output: &Path, command: &Command) -> Result<()> {
    let seed = match command {
        Command::Clean(a) => Some(a.seed),
        Command::Ablate(a) => Some(a.seed),
        _ => None,
    };
    let meta = Metadata {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: command.name(),
        seed,
        config: command,
    };
    let path = sidecar_path(output);
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn run(cli: Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()?;
    pool.install(|| execute(&cli.command))
}

fn execute(command: &Command) -> Result<()> {
    let output = match command {
        Command::Clean(args) => clean(args)?,
        Command::Stats(args) => stats(args)?,
        Command::ToM2(args) => to_m2(args)?,
        Command::ApplyM2(args) => apply_m2(args)?,
        Command::Ablate(args) => ablate(args)?,
        Command::Score(args) => score(args)?,
    };
    write_metadata(output, command)
}

fn clean(args: &CleanArgs) -> Result<&Path> {
    let groups = args.corpus.read_groups(args.drop_correct)?;
    let samples = clean_corpus(&groups, SelectionConfig::new(args.strategy, args.seed))?;
    let mut out = create(&args.output)?;
    write_parallel(&mut out, &samples)?;
    out.flush()?;
    Ok(&args.output)
}

#[derive(Serialize)]
struct StatsReport<'a> {
    overall: &'a crate::stats::CorpusStats,
    by_target_count: &'a [crate::stats::TargetCountBucketStats],
}

fn stats(args: &StatsArgs) -> Result<&Path> {
    let samples = args.corpus.read_samples()?;
    let overall = overall_stats(&samples);
    let groups = filter_groups(group_by_source(&samples), FilterOptions::both());
    let buckets = bucket_stats(&groups);
    let text = if args.json {
        let mut s = serde_json::to_string_pretty(&StatsReport {
            overall: &overall,
            by_target_count: &buckets,
        })?;
        s.push('\n');
        s
    } else {
        format!(
            "# overall\n{}\n# erroneous sources by number of targets\n{}",
            render_overall(&overall),
            render_buckets(&buckets)
        )
    };
    write_text(&args.output, &text)?;
    Ok(&args.output)
}

fn to_m2(args: &ToM2Args) -> Result<&Path> {
    let groups = args.corpus.read_groups(args.drop_correct)?;
    let long = groups
        .iter()
        .flat_map(|g| g.targets.iter().map(move |t| (&g.source, t)))
        .filter(|(s, t)| edits::exceeds_length_cap(s, t))
        .count();
    if long > 0 {
        eprintln!(
            "warning: {long} pair(s) exceed {} tokens; alignment memory grows quadratically",
            edits::LENGTH_CAP
        );
    }
    let entries: Vec<M2Entry> = groups
        .par_iter()
        .map(|g| M2Entry {
            source: g.source.clone(),
            annotations: g
                .targets
                .iter()
                .enumerate()
                .map(|(i, t)| Annotation::new(i, extract_edits(&g.source, t).edits))
                .collect(),
        })
        .collect();
    write_text(&args.output, &to_m2_file(&entries)?)?;
    Ok(&args.output)
}

fn read_m2(path: &Path) -> Result<Vec<M2Entry>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_m2_file(&text).with_context(|| format!("parsing {}", path.display()))
}

fn apply_m2(args: &ApplyM2Args) -> Result<&Path> {
    let entries = read_m2(&args.input)?;
    let mut out = create(&args.output)?;
    for (k, entry) in entries.iter().enumerate() {
        for ann in &entry.annotations {
            let corrected =
                apply_edits(&entry.source, ann).with_context(|| format!("block {}", k + 1))?;
            writeln!(out, "{corrected}")?;
        }
    }
    out.flush()?;
    Ok(&args.output)
}

fn ablate(args: &AblateArgs) -> Result<&Path> {
    let groups = args.corpus.read_groups(args.drop_correct)?;
    let sets = build_ablation(
        &groups,
        args.k_min,
        &args.n_values,
        args.seed,
        args.max_groups,
    )?;
    fs::create_dir_all(&args.output)
        .with_context(|| format!("creating {}", args.output.display()))?;
    for set in &sets {
        let path = args.output.join(format!("ablation_n{}.tsv", set.n));
        let mut out = create(&path)?;
        write_parallel(&mut out, &set.samples)?;
        out.flush()?;
    }
    Ok(&args.output)
}

fn score(args: &ScoreArgs) -> Result<&Path> {
    let gold = read_m2(&args.gold)?;
    let hyp_text = fs::read_to_string(&args.hypotheses)
        .with_context(|| format!("reading {}", args.hypotheses.display()))?;
    let hyps: Vec<&str> = hyp_text.lines().collect();
    if hyps.len() != gold.len() {
        bail!(
            "{} has {} lines but {} has {} blocks",
            args.hypotheses.display(),
            hyps.len(),
            args.gold.display(),
            gold.len()
        );
    }
    let entries: Vec<ScoreEntry> = gold
        .into_iter()
        .zip(hyps)
        .map(|(g, h)| ScoreEntry {
            source: g.source,
            hypothesis: normalize(h),
            gold: g.annotations,
        })
        .collect();
    let report = evaluate_corpus(&entries)?;
    let text = if args.json {
        serde_json::to_string_pretty(&report)? + "\n"
    } else {
        report.to_string()
    };
    write_text(&args.output, &text)?;
    Ok(&args.output)
}
