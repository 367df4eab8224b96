use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lattice_core::engine::{Session, SessionConfig, SessionEvent};
use lattice_core::geometry::{label_zone_distance, validate_layout};
use lattice_core::harness::experiment::{execute, schedule};
use lattice_core::harness::summary::write_csv;
use lattice_core::harness::{
    distance_sweep, dispersion_table, run_experiment, run_trial_with_samples, summarize, ExperimentConfig, Structure,
    SweepConfig, TrialRecord,
};
use lattice_core::menu::MenuSpec;
use lattice_core::synth::Expertise;
use lattice_core::{io, Technique, UnfoldMode};
use lattice_service::{ClientMessage, ServerMessage, ServiceConfig, PROTOCOL_VERSION};

#[derive(Parser)]
#[command(name = "lattice", version, about = "Gaze marking-menu simulator and session server")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid and write a run directory.
    Simulate(SimulateArgs),
    /// Recompute summary.csv and dispersion.csv from a trial log.
    Analyze {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check layouts of a config (or the default grid) for violations.
    ValidateLayout {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        margin: Option<f64>,
        #[command(flatten)]
        filter: Filter,
    },
    /// Feed a recorded sample log through a decoder and print its events.
    Replay(ReplayArgs),
    /// Error rate of novice trials over label-to-zone margins.
    DistanceSweep {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        noise_scale: Option<f64>,
        /// Path sampling units per margin (16 trials each).
        #[arg(long)]
        units: Option<u32>,
        #[arg(long, value_delimiter = ',')]
        margins: Vec<f64>,
    },
    /// Start the WebSocket session service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// TOML file with defaults for configure messages.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args, Default)]
struct Filter {
    /// Restrict to techniques (lattice, border_pie, peye).
    #[arg(long, value_delimiter = ',')]
    technique: Vec<String>,
    /// Restrict to structures such as 4x4x4.
    #[arg(long, value_delimiter = ',')]
    structure: Vec<String>,
    /// Restrict to effective radii in degrees.
    #[arg(long, value_delimiter = ',')]
    size: Vec<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run directory; defaults to runs/seed-<seed>.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials_scale: Option<u32>,
    #[arg(long)]
    noise_scale: Option<f64>,
    #[command(flatten)]
    filter: Filter,
    /// Also write the gaze samples of these trial indices to samples/.
    #[arg(long, value_delimiter = ',')]
    samples_for: Vec<u64>,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    log: PathBuf,
    #[arg(long, default_value = "lattice")]
    technique: String,
    #[arg(long, default_value = "4x4x4")]
    structure: String,
    #[arg(long, default_value_t = 10.0)]
    size: f64,
    #[arg(long)]
    full: bool,
    #[arg(long)]
    back_reserved: bool,
    /// Include dwell progress and zone enter/exit events.
    #[arg(long)]
    telemetry: bool,
    /// Replay through a running service, e.g. ws://127.0.0.1:8080/session.
    #[arg(long)]
    service: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
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
        Command::Simulate(args) => simulate(args),
        Command::Analyze { log, out } => analyze(&log, out.as_deref()),
        Command::ValidateLayout { config, margin, filter } => validate(config.as_deref(), margin, &filter),
        Command::Replay(args) => replay(args),
        Command::DistanceSweep { seed, out, noise_scale, units, margins } => {
            let mut c = SweepConfig::default();
            if let Some(s) = seed {
                c.master_seed = s;
            }
            if let Some(k) = noise_scale {
                c.noise.noise_scale = k;
            }
            if let Some(u) = units {
                c.units = u;
            }
            if !margins.is_empty() {
                c.margins = margins;
            }
            let rows = distance_sweep(&c)?;
            println!("margin  trials  errors  er");
            for r in &rows {
                println!("{:>6}  {:>6}  {:>6}  {:.2}%", r.margin, r.trials, r.errors, 100.0 * r.er);
            }
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                write_csv(File::create(dir.join("sweep.csv"))?, &rows)?;
                fs::write(dir.join("sweep.toml"), toml::to_string(&c)?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve { port, host, config } => serve(&host, port, config.as_deref()),
    }
}

fn parse_techniques(names: &[String]) -> Result<Vec<Technique>> {
    names.iter().map(|n| Technique::parse(n).with_context(|| format!("unknown technique {n:?}"))).collect()
}

fn apply_filter(config: &mut ExperimentConfig, filter: &Filter) -> Result<()> {
    if !filter.technique.is_empty() {
        config.techniques = parse_techniques(&filter.technique)?;
    }
    if !filter.structure.is_empty() {
        let mut picked = Vec::new();
        for name in &filter.structure {
            let (breadth, depth) = Structure::parse_name(name).with_context(|| format!("bad structure {name:?}"))?;
            let s = config
                .structures
                .iter()
                .find(|s| s.breadth == breadth && s.depth == depth)
                .cloned()
                .with_context(|| format!("structure {name} is not part of the config"))?;
            picked.push(s);
        }
        config.structures = picked;
    }
    if !filter.size.is_empty() {
        config.sizes = filter.size.clone();
    }
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(ExperimentConfig::default()),
    }
}

fn simulate(args: SimulateArgs) -> Result<ExitCode> {
    let mut config = load_config(args.config.as_deref())?;
    if let Some(s) = args.seed {
        config.master_seed = s;
    }
    if let Some(t) = args.trials_scale {
        config.trials_scale = t;
    }
    if let Some(k) = args.noise_scale {
        config.noise.noise_scale = k;
    }
    apply_filter(&mut config, &args.filter)?;
    config.validate()?;
    let dir = args.out.unwrap_or_else(|| PathBuf::from(format!("runs/seed-{}", config.master_seed)));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("config.toml"), config.to_toml())?;

    let mut log = BufWriter::new(File::create(dir.join("trials.jsonl"))?);
    let records = run_experiment(&config, Some(&mut log))?;
    log.flush()?;
    write_reports(&dir, &records)?;

    if !args.samples_for.is_empty() {
        let samples_dir = dir.join("samples");
        fs::create_dir_all(&samples_dir)?;
        let specs = schedule(&config)?;
        for &index in &args.samples_for {
            let spec = specs.get(index as usize).with_context(|| format!("no trial with index {index}"))?;
            let record = execute(&config, spec);
            let structure = &config.structures[spec.structure];
            let menu = MenuSpec::build(structure.breadth, structure.depth, 0, config.back_reserved)?;
            let session = config.session_config(spec.technique, menu, spec.size);
            let run = run_trial_with_samples(
                &session,
                &spec.target,
                spec.repetition,
                Expertise::for_repetition(spec.repetition),
                &config.noise,
                spec.seed,
            );
            io::write_samples(samples_dir.join(format!("trial{index}.jsonl")), &run.samples)?;
            debug_assert_eq!(run.record.events, record.events);
        }
    }
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    println!("{} trials ({} failed) written to {}", records.len(), failed, dir.display());
    print_summary(&records);
    Ok(ExitCode::SUCCESS)
}

fn write_reports(dir: &Path, records: &[TrialRecord]) -> Result<()> {
    write_csv(File::create(dir.join("summary.csv"))?, &summarize(records))?;
    write_csv(File::create(dir.join("dispersion.csv"))?, &dispersion_table(records))?;
    Ok(())
}

fn print_summary(records: &[TrialRecord]) {
    println!("{:<11} {:<6} {:>5} {:<12} {:>6} {:>8} {:>9}", "technique", "menu", "size", "expertise", "n", "ER", "CT (ms)");
    for r in summarize(records) {
        let er = r.er.map_or("-".into(), |e| format!("{:.2}%", 100.0 * e));
        let ct = r.mean_ct_ms.map_or("-".into(), |c| format!("{c:.0}"));
        println!(
            "{:<11} {:<6} {:>5} {:<12} {:>6} {:>8} {:>9}",
            r.technique.name(),
            r.structure,
            r.size,
            format!("{:?}", r.expertise).to_lowercase(),
            r.trials,
            er,
            ct
        );
    }
}

fn analyze(log: &Path, out: Option<&Path>) -> Result<ExitCode> {
    let records: Vec<TrialRecord> = io::read_jsonl_file(log).with_context(|| format!("reading {}", log.display()))?;
    if records.is_empty() {
        bail!("{} contains no trials", log.display());
    }
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| log.parent().unwrap_or(Path::new(".")).to_path_buf());
    fs::create_dir_all(&dir)?;
    write_reports(&dir, &records)?;
    print_summary(&records);
    Ok(ExitCode::SUCCESS)
}

fn validate(config: Option<&Path>, margin: Option<f64>, filter: &Filter) -> Result<ExitCode> {
    let mut c = load_config(config)?;
    if let Some(m) = margin {
        c.label_margin = m;
    }
    apply_filter(&mut c, filter)?;
    let mut clean = true;
    for s in &c.structures {
        for &size in &c.sizes {
            let params = c.layout(size);
            let violations = validate_layout(&params, s.breadth);
            let status = if violations.is_empty() { "ok" } else { "VIOLATION" };
            println!("{s} d3={size}: {status} (label-to-zone distance {:.3})", label_zone_distance(&params));
            for v in &violations {
                println!("  {}", serde_json::to_string(v)?);
            }
            clean &= violations.is_empty();
        }
    }
    Ok(if clean { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn replay(args: ReplayArgs) -> Result<ExitCode> {
    let technique = Technique::parse(&args.technique).with_context(|| format!("unknown technique {:?}", args.technique))?;
    let (breadth, depth) = Structure::parse_name(&args.structure).with_context(|| format!("bad structure {:?}", args.structure))?;
    let samples = io::read_samples(&args.log).with_context(|| format!("reading {}", args.log.display()))?;
    let mode = if args.full { UnfoldMode::Full } else { UnfoldMode::Progressive };
    let events: Vec<SessionEvent<f64>> = match &args.service {
        None => {
            let menu = MenuSpec::build(breadth, depth, 0, args.back_reserved)?;
            let params = ExperimentConfig::default().layout(args.size);
            let mut session = Session::open(SessionConfig::new(technique, menu, params).with_mode(mode))?;
            let mut out = Vec::new();
            for s in &samples {
                if session.is_closed() {
                    break;
                }
                out.extend(session.feed_sample(*s)?);
            }
            out
        }
        Some(url) => {
            let setup = [
                ClientMessage::Hello { protocol_version: PROTOCOL_VERSION },
                ClientMessage::Configure {
                    technique: Some(technique),
                    mode: Some(mode),
                    breadth: Some(breadth),
                    depth: Some(depth),
                    size: Some(args.size),
                    back_reserved: Some(args.back_reserved),
                    seed: None,
                },
            ];
            let rt = tokio::runtime::Runtime::new()?;
            let replies = rt.block_on(lattice_service::client::replay(url, &setup, &samples))?;
            replies
                .into_iter()
                .filter_map(|m| match m {
                    ServerMessage::Event { event } => Some(event),
                    _ => None,
                })
                .collect()
        }
    };
    let events: Vec<_> = events.into_iter().filter(|e| args.telemetry || !e.is_telemetry()).collect();
    match &args.out {
        Some(path) => io::write_jsonl_file(path, &events)?,
        None => io::write_jsonl(std::io::stdout().lock(), &events)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn serve(host: &str, port: u16, config: Option<&Path>) -> Result<ExitCode> {
    let config: ServiceConfig = match config {
        Some(p) => toml::from_str(&fs::read_to_string(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => ServiceConfig::default(),
    };
    let addr: SocketAddr = format!("{host}:{port}").parse().with_context(|| format!("bad address {host}:{port}"))?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("listening on ws://{}/session", listener.local_addr()?);
        lattice_service::serve(listener, config).await
    })?;
    Ok(ExitCode::SUCCESS)
}
