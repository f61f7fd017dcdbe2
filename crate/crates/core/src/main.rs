use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use ontoekg::config::PipelineConfig;
use ontoekg::entailment::SubsumptionVerdict;
use ontoekg::evaluation::{exact_match_score, fuzzy_match_score, render_report, to_eval_triples};
use ontoekg::llm::BackendMode;
use ontoekg::pipeline::{
    self, entail_artifact, load_documents, read_json, run_extraction, write_json, write_outputs, Backends,
    BuildOutput, ExtractionArtifact, Needs, PipelineError,
};
use ontoekg::prompts::Prompts;
use ontoekg::serialization::{parse_turtle_with, ParseOptions};
use ontoekg::validate::{has_fatal, validate_ontology};
use ontoekg::{Iri, Ontology};

/// Build OWL ontologies from enterprise text with LLMs, and score them
/// against gold ontologies.
#[derive(Parser, Debug)]
#[command(name = "ontoekg", version)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// How LLM and embedding calls are served.
    #[arg(long, global = true, default_value = "live")]
    llm_mode: BackendMode,
    /// Cassette file for record, replay and mock modes.
    #[arg(long, global = true)]
    cassette: Option<PathBuf>,
    /// Fail (exit 2) on fatal validation findings or hierarchy conflicts.
    #[arg(long, global = true)]
    strict: bool,
    /// Base IRI for minted class and property IRIs.
    #[arg(long, global = true)]
    base_iri: Option<String>,
    /// Similarity threshold for fuzzy evaluation.
    #[arg(long, global = true)]
    threshold: Option<f64>,
    /// Score label and comment triples too.
    #[arg(long, global = true)]
    include_annotations: bool,
    /// More logging on stderr (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the whole pipeline over a document or a directory of .txt files.
    Build {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Extract classes and properties into a JSON artifact.
    Extract {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Build the hierarchy from an extraction artifact and write Turtle.
    Entail {
        artifact: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Verdicts from an earlier run; matching pairs are not re-judged.
        #[arg(long)]
        verdicts: Option<PathBuf>,
    },
    /// Score a predicted ontology against a gold ontology.
    Evaluate {
        pred: PathBuf,
        gold: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        /// Row name in the report (defaults to the gold file stem).
        #[arg(long)]
        use_case: Option<String>,
        /// Report JSON path (defaults to `<pred stem>.report.json`).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a Turtle ontology and print its findings.
    Validate { input: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Fuzzy,
}

/// Exit statuses: 0 success, 1 pipeline error, 2 strict-mode validation
/// failure, 3 configuration or usage error.
#[derive(Debug)]
enum Failure {
    Pipeline(anyhow::Error),
    Strict(String),
    Usage(anyhow::Error),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        if e.is_usage() {
            Failure::Usage(e.into())
        } else {
            Failure::Pipeline(e.into())
        }
    }
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path).map_err(usage)?,
        None => PipelineConfig::default(),
    };
    if let Some(base) = &cli.base_iri {
        cfg.base_iri = Iri::new(base.clone()).context("--base-iri").map_err(usage)?;
    }
    if let Some(t) = cli.threshold {
        cfg.fuzzy_threshold = t;
    }
    if let Some(c) = &cli.cassette {
        cfg.cassette = Some(c.clone());
    }
    cfg.strict_validation |= cli.strict;
    if cli.llm_mode == BackendMode::Mock {
        // sequence replay only lines up with a single request stream
        cfg.max_in_flight = 1;
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn load_prompts(cfg: &PipelineConfig) -> Result<Prompts, Failure> {
    Prompts::load(cfg.prompt_dir.as_deref()).context("reading prompt overrides").map_err(usage)
}

fn read_ontology(path: &Path, strict: bool) -> Result<Ontology, Failure> {
    if !path.exists() {
        return Err(usage(anyhow::anyhow!("{} does not exist", path.display())));
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(Failure::Pipeline)?;
    let parsed = parse_turtle_with(&text, ParseOptions { strict })
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(Failure::Pipeline)?;
    for w in &parsed.warnings {
        log::warn!("{}: {} {}", path.display(), w.code, w.message);
    }
    Ok(parsed.ontology)
}

fn finish_build(output: &Path, result: &BuildOutput, strict: bool) -> Result<(), Failure> {
    if strict && result.fails_strict() {
        write_outputs(output, result, false)?;
        return Err(Failure::Strict(format!(
            "strict mode: {} fatal finding(s), {} hierarchy conflict(s); logs written next to {}",
            result.violations.iter().filter(|v| v.code.is_fatal()).count(),
            result.conflicts.len(),
            output.display()
        )));
    }
    write_outputs(output, result, true)?;
    log::info!(
        "wrote {} ({} classes, {} properties, {} subclass edges)",
        output.display(),
        result.manifest.classes,
        result.manifest.properties,
        result.manifest.subclass_edges
    );
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Build { input, output } => {
            let prompts = load_prompts(&cfg)?;
            if !input.exists() {
                return Err(usage(anyhow::anyhow!("input {} does not exist", input.display())));
            }
            let backends = Backends::from_config(&cfg, cli.llm_mode, Needs::CHAT)?;
            let result = pipeline::build(input, &backends, &cfg, &prompts)?;
            finish_build(output, &result, cfg.strict_validation)
        }
        Command::Extract { input, output } => {
            let prompts = load_prompts(&cfg)?;
            if !input.exists() {
                return Err(usage(anyhow::anyhow!("input {} does not exist", input.display())));
            }
            let backends = Backends::from_config(&cfg, cli.llm_mode, Needs::CHAT)?;
            let docs = load_documents(input)?;
            let artifact = run_extraction(&docs, backends.chat.as_ref(), &cfg, &prompts)?;
            write_json(output, &artifact)?;
            Ok(())
        }
        Command::Entail { artifact, output, verdicts } => {
            let prompts = load_prompts(&cfg)?;
            let artifact: ExtractionArtifact = read_json(artifact)?;
            let prior: Vec<SubsumptionVerdict> = match verdicts {
                Some(path) => read_json(path)?,
                None => Vec::new(),
            };
            let backends = Backends::from_config(&cfg, cli.llm_mode, Needs::CHAT)?;
            let result = entail_artifact(&artifact, &backends, &cfg, &prompts, &prior)?;
            finish_build(output, &result, cfg.strict_validation)
        }
        Command::Evaluate { pred, gold, mode, use_case, output } => {
            let pred_onto = read_ontology(pred, false)?;
            let gold_onto = read_ontology(gold, false)?;
            let p = to_eval_triples(&pred_onto, cli.include_annotations);
            let g = to_eval_triples(&gold_onto, cli.include_annotations);
            let report = match mode {
                Mode::Exact => exact_match_score(&p, &g),
                Mode::Fuzzy => {
                    let backends = Backends::from_config(&cfg, cli.llm_mode, Needs::EMBEDDINGS)?;
                    fuzzy_match_score(&p, &g, backends.embedder.as_ref(), cfg.fuzzy_threshold)
                        .context("fuzzy matching")
                        .map_err(Failure::Pipeline)?
                }
            };
            let use_case = use_case.clone().unwrap_or_else(|| {
                gold.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "ontology".into())
            });
            let report = report.with_use_case(use_case.clone());
            let rendered = render_report(&BTreeMap::from([(use_case, report.clone())]));
            print!("{}", rendered.text);
            let path = output.clone().unwrap_or_else(|| pipeline::sibling(pred, ".report.json"));
            write_json(&path, &report)?;
            Ok(())
        }
        Command::Validate { input } => {
            let ontology = read_ontology(input, cfg.strict_validation)?;
            let violations = validate_ontology(&ontology);
            for v in &violations {
                let iris: Vec<&str> = v.iris.iter().map(Iri::as_str).collect();
                println!("{}\t{:?}\t{}\t{}", v.code.as_str(), v.severity, iris.join(" "), v.message);
            }
            if cfg.strict_validation && has_fatal(&violations) {
                return Err(Failure::Strict(format!("{} has fatal findings", input.display())));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Pipeline(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Strict(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
