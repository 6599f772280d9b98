//! `telebrain`: run the stage server, import content, apply venue files,
//! run simulations and regenerate protocol fixtures.
//!
//! Data goes to stdout as JSON. Any failure prints one JSON object
//! `{"error":{"code","message"}}` on stderr and exits nonzero.

mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use telebrain_core::audio::HttpTts;
use telebrain_core::config::ServerConfig;
use telebrain_core::model::ContentKind;
use telebrain_core::perpl::scenario::SimConfig;
use telebrain_core::perpl::{performatize_bubble_sort, SwapPolicy, DEFAULT_MAX_ITERATIONS};
use telebrain_core::store::{ContentStore, VenueFile, WebAudioOptions};

use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "telebrain", version, about = "Telebrain stage server and tools")]
struct Cli {
    /// Server config file (JSON). Defaults apply when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Store directory; overrides TELEBRAIN_DATA_DIR and the config.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the HTTP, WebSocket and OSC server.
    Serve,
    /// Add content to the store.
    #[command(subcommand)]
    Import(Import),
    /// Manage venues.
    #[command(subcommand)]
    Venue(VenueCmd),
    /// Run simulations.
    #[command(subcommand)]
    Simulate(Simulate),
    /// Wire protocol fixtures.
    #[command(subcommand)]
    Protocol(Protocol),
}

#[derive(Subcommand, Debug)]
enum Import {
    /// Audio from a URL or a local file.
    Audio {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        name: Option<String>,
        /// Declares the material copyrighted; such imports are refused.
        #[arg(long)]
        copyrighted: bool,
    },
    /// An image from a direct .jpg/.png URL or a local file.
    Image {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        name: Option<String>,
    },
    /// Text rendered to speech (at most 100 characters).
    Tts {
        #[arg(long)]
        text: String,
        #[arg(long, default_value = "en")]
        lang: String,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    #[arg(long)]
    url: Option<String>,
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum VenueCmd {
    /// Create or update the documents in a venue file.
    Apply { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum Simulate {
    /// Performatized bubble sort over a shuffled line of 1..=n.
    BubbleSort {
        #[arg(long, required_unless_present = "values")]
        n: Option<usize>,
        /// Explicit comma-separated starting line instead of a shuffle.
        #[arg(long, value_delimiter = ',', conflicts_with = "n")]
        values: Option<Vec<i64>>,
        #[arg(long, value_enum, default_value = "obedient")]
        policy: PolicyArg,
        /// Defiance probability for the willful policy.
        #[arg(long, default_value_t = 0.3)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
        max_iterations: usize,
        /// Trace file, one JSON iteration per line. Without it the whole
        /// trace is printed.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Virtual performers from a simulation config file.
    Perpl {
        /// Simulation file (JSON).
        #[arg(long = "file")]
        file: PathBuf,
        /// Timelines file, one JSON performer per line.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyArg {
    Obedient,
    Willful,
}

#[derive(Subcommand, Debug)]
enum Protocol {
    /// Write one golden frame per message type.
    Golden {
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(CliError::Usage(e.render().to_string().trim().to_string())),
    };
    match run(cli) {
        Ok(Some(v)) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::FAILURE
}

fn config(cli: &Cli) -> Result<ServerConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ServerConfig::load(path)?,
        None => {
            let mut cfg = ServerConfig::default();
            cfg.apply_env();
            cfg
        }
    };
    if let Some(dir) = &cli.data_dir {
        cfg.data_dir = dir.clone();
    }
    Ok(cfg)
}

fn open_store(cfg: &ServerConfig) -> Result<ContentStore, CliError> {
    let mut store = ContentStore::open(&cfg.data_dir)?;
    if let Some(tts) = &cfg.tts {
        store = store.with_tts(Arc::new(HttpTts::new(tts.clone())));
    }
    Ok(store)
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_slice(&read(path)?).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source,
    })
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("output values serialize")
}

fn run(cli: Cli) -> Result<Option<Value>, CliError> {
    match &cli.command {
        Command::Serve => {
            let cfg = config(&cli)?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Serve(e.into()))?;
            rt.block_on(telebrain_server::serve(cfg))?;
            Ok(None)
        }
        Command::Import(import) => {
            let store = open_store(&config(&cli)?)?;
            let saved = match import {
                Import::Audio { source, name, copyrighted } => match (&source.url, &source.file) {
                    (Some(url), _) => store.save_web_audio(
                        url,
                        WebAudioOptions {
                            name: name.clone(),
                            copyrighted: *copyrighted,
                        },
                    )?,
                    (None, Some(path)) => {
                        if *copyrighted {
                            return Err(telebrain_core::store::StoreError::Copyrighted.into());
                        }
                        let name = name.clone().unwrap_or_else(|| file_stem(path));
                        store.save_upload(&read(path)?, None, ContentKind::AudioUpload, &name)?
                    }
                    (None, None) => unreachable!("clap requires a source"),
                },
                Import::Image { source, name } => match (&source.url, &source.file) {
                    (Some(url), _) => store.save_web_image(url, name.clone())?,
                    (None, Some(path)) => {
                        let name = name.clone().unwrap_or_else(|| file_stem(path));
                        store.save_upload(&read(path)?, None, ContentKind::ImageUpload, &name)?
                    }
                    (None, None) => unreachable!("clap requires a source"),
                },
                Import::Tts { text, lang } => store.save_tts(text, lang)?,
            };
            Ok(Some(to_json(&saved)))
        }
        Command::Venue(VenueCmd::Apply { file }) => {
            let store = open_store(&config(&cli)?)?;
            let venue_file: VenueFile = parse_json(file)?;
            let applied = store.apply(&venue_file)?;
            Ok(Some(json!({ "applied": applied })))
        }
        Command::Simulate(Simulate::BubbleSort {
            n,
            values,
            policy,
            p,
            seed,
            max_iterations,
            out,
        }) => {
            let initial = match (values, n) {
                (Some(v), _) => v.clone(),
                (None, Some(n)) => {
                    let mut line: Vec<i64> = (1..=*n as i64).collect();
                    line.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed));
                    line
                }
                (None, None) => unreachable!("clap requires --n or --values"),
            };
            let policy = match policy {
                PolicyArg::Obedient => SwapPolicy::Obedient,
                PolicyArg::Willful => SwapPolicy::Willful { p: *p, seed: *seed },
            };
            let trace = performatize_bubble_sort(&initial, policy, *max_iterations)?;
            let Some(out) = out else {
                return Ok(Some(to_json(&trace)));
            };
            write(out, &trace.to_json_lines())?;
            Ok(Some(json!({
                "initial": trace.initial,
                "final_order": trace.final_order,
                "verdict": trace.verdict,
                "iterations": trace.iterations.len(),
                "swaps": trace.iterations.iter().map(|i| i.swaps()).sum::<usize>(),
                "trace": out,
            })))
        }
        Command::Simulate(Simulate::Perpl { file, out }) => {
            let sim: SimConfig = parse_json(file)?;
            let timelines = sim.run()?;
            let Some(out) = out else {
                return Ok(Some(json!({ "timelines": timelines })));
            };
            let lines: String = timelines.iter().map(|t| to_json(t).to_string() + "\n").collect();
            write(out, &lines)?;
            Ok(Some(json!({
                "performers": timelines.len(),
                "events": timelines.iter().map(|t| t.events.len()).sum::<usize>(),
                "confusions": timelines.iter().map(|t| t.confusions()).sum::<usize>(),
                "timelines": out,
            })))
        }
        Command::Protocol(Protocol::Golden { out }) => {
            let written = telebrain_core::wire::write_golden(out).map_err(|source| CliError::Write {
                path: out.display().to_string(),
                source,
            })?;
            Ok(Some(json!({ "written": written })))
        }
    }
}
