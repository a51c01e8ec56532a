//! Staged command-line pipeline: `ingest`, `rank`, `score`, `compare`.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disparity::DisparityReport;
use crate::ingest::{BusinessCounters, BusinessReader, BusinessRecord, ReviewCounters, ReviewReader, ReviewRecord};
use crate::taxonomy::{self, FeatureTaxonomy, RankedList};
use crate::text::{
    build_profiles, cohort_scores, write_topics_tsv, CorpusStats, SentimentLexicon,
    StarDocumentBuilder, DEFAULT_TOPIC_COUNT,
};
use crate::workspace::{self, sha256_file, Workspace, WorkspaceError};

#[derive(Debug, Parser)]
#[command(name = "rating-disparity", version, about = "Restaurant rating disparity analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse business and review files into a workspace.
    Ingest(IngestArgs),
    /// Rank restaurants by feature count and write the frequency table.
    Rank(RankArgs),
    /// Build per-star topic profiles for the ranked cohort and score them.
    Score(ScoreArgs),
    /// Compare two restaurants.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long, value_name = "PATH")]
    pub business: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub reviews: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub workspace: PathBuf,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long, value_name = "DIR")]
    pub workspace: PathBuf,
    /// Cohort size; 0 keeps every restaurant.
    #[arg(long, default_value_t = 500)]
    pub cutoff: usize,
    /// Taxonomy config (TOML); the built-in default when omitted.
    #[arg(long, value_name = "PATH")]
    pub taxonomy: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long, value_name = "DIR")]
    pub workspace: PathBuf,
    /// Sentiment lexicon, `term<TAB>valence` per line.
    #[arg(long, value_name = "PATH")]
    pub lexicon: PathBuf,
    /// Topics kept per (restaurant, star) document.
    #[arg(long = "k", default_value_t = DEFAULT_TOPIC_COUNT, value_parser = parse_topic_count)]
    pub k: usize,
}

fn parse_topic_count(raw: &str) -> Result<usize, String> {
    match raw.parse::<usize>() {
        Ok(k) if k >= 1 => Ok(k),
        _ => Err(format!("`{raw}` is not a positive integer")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, value_name = "DIR")]
    pub workspace: PathBuf,
    #[arg(long = "a", value_name = "ID")]
    pub a: String,
    #[arg(long = "b", value_name = "ID")]
    pub b: String,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
}

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Workspace(#[from] WorkspaceError),
}

impl CommandError {
    /// 1 for input errors, 2 for stale or busy workspaces.
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Input(_) => 1,
            CommandError::Workspace(WorkspaceError::Io { .. }) => 1,
            CommandError::Workspace(_) => 2,
        }
    }
}

fn input_err(context: impl std::fmt::Display, err: impl std::fmt::Display) -> CommandError {
    CommandError::Input(format!("{context}: {err}"))
}

/// Counters written to `ingest_summary.json`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub businesses: BusinessCounters,
    pub reviews: ReviewCounters,
}

pub fn run<W: Write>(cli: Cli, out: &mut W) -> Result<(), CommandError> {
    match cli.command {
        Command::Ingest(args) => cmd_ingest(&args, out),
        Command::Rank(args) => cmd_rank(&args, out),
        Command::Score(args) => cmd_score(&args, out),
        Command::Compare(args) => cmd_compare(&args, out),
    }
}

fn open_input(path: &Path) -> Result<BufReader<File>, CommandError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| input_err(path.display(), e))
}

fn create_output(ws: &Workspace, name: &str) -> Result<BufWriter<File>, CommandError> {
    let path = ws.path(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| input_err(path.display(), e))
}

fn write_jsonl<W: Write, T: Serialize>(out: &mut W, value: &T) -> std::io::Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    out.write_all(b"\n")
}

pub fn cmd_ingest<W: Write>(args: &IngestArgs, out: &mut W) -> Result<(), CommandError> {
    let business_input = open_input(&args.business)?;
    let review_input = open_input(&args.reviews)?;
    let mut ws = Workspace::create(&args.workspace)?;

    let mut known = HashSet::new();
    let mut businesses_out = create_output(&ws, workspace::BUSINESSES)?;
    let mut reader = BusinessReader::new(business_input);
    for record in reader.by_ref() {
        let record = record.map_err(|e| input_err(args.business.display(), e))?;
        write_jsonl(&mut businesses_out, &record)
            .map_err(|e| input_err(workspace::BUSINESSES, e))?;
        known.insert(record.business_id);
    }
    businesses_out
        .flush()
        .map_err(|e| input_err(workspace::BUSINESSES, e))?;
    let business_counters = reader.counters();

    let mut reviews_out = create_output(&ws, workspace::REVIEWS)?;
    let mut reader = ReviewReader::new(review_input, &known);
    for review in reader.by_ref() {
        let review = review.map_err(|e| input_err(args.reviews.display(), e))?;
        write_jsonl(&mut reviews_out, &review).map_err(|e| input_err(workspace::REVIEWS, e))?;
    }
    reviews_out
        .flush()
        .map_err(|e| input_err(workspace::REVIEWS, e))?;

    let summary = IngestSummary {
        businesses: business_counters,
        reviews: reader.counters(),
    };
    let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    text.push('\n');
    std::fs::write(ws.path(workspace::INGEST_SUMMARY), &text)
        .map_err(|e| input_err(workspace::INGEST_SUMMARY, e))?;

    ws.record(&workspace::INGEST_ARTIFACTS)?;
    ws.save_manifest()?;
    out.write_all(text.as_bytes())
        .map_err(|e| input_err("stdout", e))?;
    Ok(())
}

fn load_businesses(ws: &Workspace) -> Result<Vec<BusinessRecord>, CommandError> {
    let path = ws.path(workspace::BUSINESSES);
    let reader = open_input(&path)?;
    let mut records = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| input_err(path.display(), e))?;
        let record = serde_json::from_str(&line).map_err(|e| {
            ws.stale(format!("{} line {}: {e}", workspace::BUSINESSES, index + 1))
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Streams the workspace's reviews through `f`.
fn for_each_review<F: FnMut(ReviewRecord)>(ws: &Workspace, mut f: F) -> Result<(), CommandError> {
    let path = ws.path(workspace::REVIEWS);
    let reader = open_input(&path)?;
    for (index, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| input_err(path.display(), e))?;
        let review = serde_json::from_str(&line)
            .map_err(|e| ws.stale(format!("{} line {}: {e}", workspace::REVIEWS, index + 1)))?;
        f(review);
    }
    Ok(())
}

fn workspace_taxonomy(ws: &Workspace) -> Result<FeatureTaxonomy, CommandError> {
    let taxonomy = FeatureTaxonomy::load(&ws.path(workspace::TAXONOMY))
        .map_err(|e| ws.stale(e.to_string()))?;
    if ws.manifest().config_hash.as_deref() != Some(taxonomy.config_hash().as_str()) {
        return Err(ws.stale("taxonomy config hash does not match the manifest").into());
    }
    Ok(taxonomy)
}

fn load_ranked(ws: &Workspace) -> Result<RankedList, CommandError> {
    let cutoff = ws.manifest().cutoff.unwrap_or(0);
    RankedList::read_csv(open_input(&ws.path(workspace::RANKED))?, cutoff)
        .map_err(|e| ws.stale(format!("{}: {e}", workspace::RANKED)).into())
}

pub fn cmd_rank<W: Write>(args: &RankArgs, out: &mut W) -> Result<(), CommandError> {
    let taxonomy = match &args.taxonomy {
        Some(path) => FeatureTaxonomy::load(path).map_err(|e| CommandError::Input(e.to_string()))?,
        None => FeatureTaxonomy::default(),
    };
    let mut ws = Workspace::open(&args.workspace)?;
    ws.verify(&workspace::INGEST_ARTIFACTS)?;
    ws.remove_artifacts(&workspace::RANK_ARTIFACTS)?;
    ws.remove_artifacts(&workspace::SCORE_ARTIFACTS)?;
    {
        let m = ws.manifest_mut();
        m.config_hash = None;
        m.cutoff = None;
        m.k = None;
        m.lexicon_path = None;
        m.lexicon_sha256 = None;
        m.corpus_documents = None;
    }

    let businesses = load_businesses(&ws)?;
    let ranked = taxonomy::rank_restaurants(&businesses, &taxonomy, args.cutoff)
        .map_err(|e| ws.stale(e.to_string()))?;
    let frequency = taxonomy::feature_frequency(&ranked, &businesses);

    std::fs::write(ws.path(workspace::TAXONOMY), taxonomy.to_toml_string())
        .map_err(|e| input_err(workspace::TAXONOMY, e))?;
    ranked
        .write_csv(create_output(&ws, workspace::RANKED)?)
        .map_err(|e| input_err(workspace::RANKED, e))?;
    taxonomy::write_frequency_csv(&frequency, create_output(&ws, workspace::FEATURE_FREQUENCY)?)
        .map_err(|e| input_err(workspace::FEATURE_FREQUENCY, e))?;

    ws.manifest_mut().config_hash = Some(taxonomy.config_hash());
    ws.manifest_mut().cutoff = Some(args.cutoff);
    ws.record(&workspace::RANK_ARTIFACTS)?;
    ws.save_manifest()?;

    let mut report = format!("ranked {} restaurants\n\n{:<32}{:>10}\n", ranked.len(), "feature", "frequency");
    for (feature, count) in taxonomy::frequency_table(&frequency) {
        report.push_str(&format!("{feature:<32}{count:>10}\n"));
    }
    out.write_all(report.as_bytes())
        .map_err(|e| input_err("stdout", e))
}

fn load_lexicon(path: &Path) -> Result<SentimentLexicon, CommandError> {
    let lexicon = SentimentLexicon::from_reader(open_input(path)?)
        .map_err(|e| input_err(path.display(), e))?;
    if lexicon.skipped_multiword() > 0 {
        eprintln!(
            "warning: {}: ignored {} multi-word lexicon entries",
            path.display(),
            lexicon.skipped_multiword()
        );
    }
    Ok(lexicon)
}

fn write_corpus_tsv<W: Write>(stats: &CorpusStats, writer: W) -> Result<(), csv::Error> {
    let mut out = csv::WriterBuilder::new().delimiter(b'\t').from_writer(writer);
    out.write_record(["term", "df"])?;
    for (term, df) in stats.frequencies() {
        out.write_record([term, &df.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

fn read_corpus_tsv(ws: &Workspace) -> Result<CorpusStats, CommandError> {
    let documents = ws
        .manifest()
        .corpus_documents
        .ok_or_else(|| ws.stale("score stage has not been run"))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .from_reader(open_input(&ws.path(workspace::CORPUS))?);
    let mut df = HashMap::new();
    for row in reader.deserialize() {
        let (term, count): (String, u32) =
            row.map_err(|e| ws.stale(format!("{}: {e}", workspace::CORPUS)))?;
        df.insert(term, count);
    }
    Ok(CorpusStats::from_parts(documents, df))
}

pub fn cmd_score<W: Write>(args: &ScoreArgs, out: &mut W) -> Result<(), CommandError> {
    let lexicon = load_lexicon(&args.lexicon)?;
    let lexicon_sha = sha256_file(&args.lexicon)?;
    let mut ws = Workspace::open(&args.workspace)?;
    ws.verify(&workspace::INGEST_ARTIFACTS)?;
    ws.verify(&workspace::RANK_ARTIFACTS)?;
    workspace_taxonomy(&ws)?;
    ws.remove_artifacts(&workspace::SCORE_ARTIFACTS)?;

    let ranked = load_ranked(&ws)?;
    let cohort: HashSet<String> = ranked.ids().map(str::to_string).collect();
    let mut builder = StarDocumentBuilder::new();
    for_each_review(&ws, |review| {
        if cohort.contains(&review.business_id) {
            builder.add(&review);
        }
    })?;
    let documents = builder.finish();
    let stats = CorpusStats::from_documents(&documents);
    let profiles = build_profiles(&documents, &stats, &lexicon, args.k);
    let scores = cohort_scores(&profiles);

    write_topics_tsv(&profiles, create_output(&ws, workspace::TOPICS)?)
        .map_err(|e| input_err(workspace::TOPICS, e))?;
    scores
        .write_csv(create_output(&ws, workspace::COHORT_SCORES)?)
        .map_err(|e| input_err(workspace::COHORT_SCORES, e))?;
    write_corpus_tsv(&stats, create_output(&ws, workspace::CORPUS)?)
        .map_err(|e| input_err(workspace::CORPUS, e))?;

    {
        let m = ws.manifest_mut();
        m.k = Some(args.k);
        m.lexicon_path = Some(args.lexicon.display().to_string());
        m.lexicon_sha256 = Some(lexicon_sha);
        m.corpus_documents = Some(stats.documents());
    }
    ws.record(&workspace::SCORE_ARTIFACTS)?;
    ws.save_manifest()?;

    let mut table = format!(
        "{} documents over {} restaurants\n\n{:<8}{:>12}{:>14}{:>12}\n",
        documents.len(),
        ranked.len(),
        "stars",
        "combined",
        "average",
        "populated"
    );
    for (stars, combined) in &scores.combined {
        table.push_str(&format!(
            "{:<8}{:>12}{:>14.6}{:>12}\n",
            stars, combined, scores.average[stars], scores.populated_counts[stars]
        ));
    }
    out.write_all(table.as_bytes())
        .map_err(|e| input_err("stdout", e))
}

pub fn cmd_compare<W: Write>(args: &CompareArgs, out: &mut W) -> Result<(), CommandError> {
    let ws = Workspace::open(&args.workspace)?;
    ws.verify(&workspace::INGEST_ARTIFACTS)?;
    ws.verify(&workspace::RANK_ARTIFACTS)?;
    ws.verify(&workspace::SCORE_ARTIFACTS)?;
    let taxonomy = workspace_taxonomy(&ws)?;
    let manifest = ws.manifest();
    let (Some(k), Some(lexicon_path), Some(lexicon_sha)) =
        (manifest.k, &manifest.lexicon_path, &manifest.lexicon_sha256)
    else {
        return Err(ws.stale("score stage has not been run").into());
    };
    let lexicon_path = PathBuf::from(lexicon_path);
    let lexicon = load_lexicon(&lexicon_path)?;
    if &sha256_file(&lexicon_path)? != lexicon_sha {
        return Err(ws
            .stale(format!("lexicon {} changed since scoring", lexicon_path.display()))
            .into());
    }
    let stats = read_corpus_tsv(&ws)?;

    let mut a = None;
    let mut b = None;
    for record in load_businesses(&ws)? {
        if record.business_id == args.a {
            a = Some(record.clone());
        }
        if record.business_id == args.b {
            b = Some(record);
        }
    }
    let a = a.ok_or_else(|| CommandError::Input(format!("unknown business id `{}`", args.a)))?;
    let b = b.ok_or_else(|| CommandError::Input(format!("unknown business id `{}`", args.b)))?;

    let mut builder_a = StarDocumentBuilder::new();
    let mut builder_b = StarDocumentBuilder::new();
    for_each_review(&ws, |review| {
        if review.business_id == a.business_id {
            builder_a.add(&review);
        }
        if review.business_id == b.business_id {
            builder_b.add(&review);
        }
    })?;
    let profiles_a = build_profiles(&builder_a.finish(), &stats, &lexicon, k);
    let profiles_b = build_profiles(&builder_b.finish(), &stats, &lexicon, k);
    let report = DisparityReport::build(&a, &b, &profiles_a, &profiles_b, &taxonomy)
        .map_err(|e| ws.stale(e.to_string()))?;

    let rendered = match args.format {
        ReportFormat::Json => {
            let mut json = report.to_json();
            json.push('\n');
            json
        }
        ReportFormat::Text => report.to_text(),
    };
    out.write_all(rendered.as_bytes())
        .map_err(|e| input_err("stdout", e))
}
