use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wrac::eval::CostModel;
use wrac::llm::{CachedClient, ChatModel, LlmConfig, LlmMode};
use wrac::pipeline::{self, Method, PipelineError, RunConfig};

#[derive(Parser)]
#[command(name = "wrac", version, about = "Retrieval-aware chunking and retrieval evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the corpus into unit files and print a length summary.
    Ingest(RunArgs),
    /// Write chunk plans (wrac and wrac-structural only).
    Plan(RunArgs),
    /// Write chunks.jsonl and usage.jsonl.
    Chunk(RunArgs),
    /// Chunk the corpus and write index.json.
    Index(RunArgs),
    /// Query a saved index.
    Retrieve(RetrieveArgs),
    /// Chunk, index and score every query; writes reports.
    Eval(RunArgs),
    /// Compare two eval output directories.
    Compare(CompareArgs),
}

#[derive(Args)]
struct Prices {
    /// Price per input token.
    #[arg(long, default_value_t = 0.000002)]
    price_input: f64,
    /// Price per output token.
    #[arg(long, default_value_t = 0.000008)]
    price_output: f64,
    /// Price per cached token.
    #[arg(long, default_value_t = 0.0000005)]
    price_cache: f64,
}

impl Prices {
    fn model(&self) -> CostModel {
        CostModel {
            price_input: self.price_input,
            price_output: self.price_output,
            price_cache: self.price_cache,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Corpus root containing docs/ (and queries.jsonl for eval).
    #[arg(long)]
    corpus: PathBuf,
    /// wrac, wrac-structural, fixed, structural or agentic.
    #[arg(long, default_value = "wrac-structural")]
    method: Method,
    /// Model access: record, replay or live. Defaults to WRAC_LLM_MODE, then replay.
    #[arg(long)]
    mode: Option<LlmMode>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = 512)]
    max_chunk_tokens: usize,
    /// Window size of the fixed-size baseline, in tokens.
    #[arg(long, default_value_t = 512)]
    fixed_size: usize,
    #[arg(long, default_value_t = 64)]
    fixed_overlap: usize,
    /// Retrieval cut-offs.
    #[arg(long, value_delimiter = ',', default_values_t = [3, 6])]
    k: Vec<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[command(flatten)]
    prices: Prices,
}

#[derive(Args)]
struct RetrieveArgs {
    /// Saved index file.
    #[arg(long, default_value = "out/index.json")]
    index: PathBuf,
    #[arg(long)]
    query: String,
    #[arg(long, default_value_t = 6)]
    k: usize,
}

#[derive(Args)]
struct CompareArgs {
    /// Baseline run directory.
    run_a: PathBuf,
    /// Candidate run directory.
    run_b: PathBuf,
    /// Directory for compare.txt.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    prices: Prices,
}

impl RunArgs {
    fn config(&self, llm: Option<&LlmConfig>) -> RunConfig {
        RunConfig {
            corpus_root: self.corpus.clone(),
            method: self.method,
            mode: llm.map_or(LlmMode::Replay, |c| c.mode),
            jobs: self.jobs,
            max_chunk_tokens: self.max_chunk_tokens,
            fixed_size: self.fixed_size,
            fixed_overlap: self.fixed_overlap,
            ks: self.k.clone(),
            cost: self.prices.model(),
            model: llm.map_or_else(|| wrac::llm::DEFAULT_MODEL.to_string(), |c| c.model.clone()),
            out: self.out.clone(),
        }
    }

    fn llm(&self) -> Result<Option<(LlmConfig, CachedClient)>, PipelineError> {
        if !self.method.needs_model() {
            return Ok(None);
        }
        let mut cfg = LlmConfig::from_env().map_err(PipelineError::Config)?;
        if let Some(mode) = self.mode {
            cfg.mode = mode;
        }
        let client = cfg.build()?.with_max_in_flight(self.jobs.max(1));
        Ok(Some((cfg, client)))
    }
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Ingest(args) => {
            let summary = pipeline::cmd_ingest(&args.config(None))?;
            print!("{}", summary.table().render());
            for (path, message) in &summary.failures {
                eprintln!("failed: {path}: {message}");
            }
        }
        Command::Plan(args) => {
            let llm = args.llm()?;
            let client = llm.as_ref().map(|(_, c)| c as &dyn ChatModel);
            let run = pipeline::cmd_plan(&args.config(llm.as_ref().map(|(c, _)| c)), client)?;
            println!("{} plans written to {}", run.plans.len(), args.out.join("plans").display());
            report_failures(&run.failures);
        }
        Command::Chunk(args) => {
            let llm = args.llm()?;
            let client = llm.as_ref().map(|(_, c)| c as &dyn ChatModel);
            let run = pipeline::cmd_chunk(&args.config(llm.as_ref().map(|(c, _)| c)), client)?;
            println!("{} chunks written to {}", run.chunks.len(), args.out.join("chunks.jsonl").display());
            report_failures(&run.failures);
        }
        Command::Index(args) => {
            let llm = args.llm()?;
            let client = llm.as_ref().map(|(_, c)| c as &dyn ChatModel);
            let index = pipeline::cmd_index(&args.config(llm.as_ref().map(|(c, _)| c)), client)?;
            println!("{} chunks indexed in {}", index.len(), args.out.join("index.json").display());
        }
        Command::Retrieve(args) => {
            let result = pipeline::cmd_retrieve(&args.index, &args.query, args.k)?;
            for (rank, hit) in result.ranked.iter().enumerate() {
                println!("{:>2}  {:.4}  {}", rank + 1, hit.score, hit.chunk_id);
            }
        }
        Command::Eval(args) => {
            let llm = args.llm()?;
            let client = llm.as_ref().map(|(_, c)| c as &dyn ChatModel);
            let output = pipeline::cmd_eval(&args.config(llm.as_ref().map(|(c, _)| c)), client)?;
            print!("{}", output.text);
            report_failures(&output.info.failures);
        }
        Command::Compare(args) => {
            let report = pipeline::cmd_compare(&args.run_a, &args.run_b, &args.prices.model(), args.out.as_deref())?;
            print!("{}", report.text);
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
        }
    }
    Ok(())
}

fn report_failures(failures: &[(String, String)]) {
    for (doc, message) in failures {
        eprintln!("failed: {doc}: {message}");
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
