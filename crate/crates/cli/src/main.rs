use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rwroute_client::{fetch_live_snapshot, ClientError, ServiceClient};
use rwroute_core::api::{parse_lat_lon, ProfileRef, RouteRequest};
use rwroute_core::error::{IngestError, RouteError};
use rwroute_core::fusion::LengthMode;
use rwroute_core::geo::Coord;
use rwroute_core::graph::geojson::load_network;
use rwroute_core::graph::{RoadNetwork, DEFAULT_SNAP_TOLERANCE_M};
use rwroute_core::ingest::live::EndpointConfig;
use rwroute_core::ingest::replay::replay_file;
use rwroute_core::ingest::{parse_scenario_bundle, write_scenario_bundle};
use rwroute_core::pipeline::{load_scale_config, route_text, to_pretty, weights_document, LoadedScenario, ScenarioCatalog};
use rwroute_core::router::{preset, PreferenceVector, Profile, Route, PRESET_NAMES};
use rwroute_core::weights::ScaleRegistry;
use serde_json::{json, Value};

/// Road-weather aware personalized routing.
///
/// The data directory holds `network.geojson`, an optional `nodes.geojson`,
/// an optional `scales.json` and scenario bundles under `scenarios/`.
#[derive(Parser)]
#[command(name = "rwroute", version)]
struct Cli {
    /// Data directory.
    #[arg(long, global = true, env = "RWROUTE_DATA", default_value = ".")]
    data: PathBuf,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a scenario bundle and report record counts.
    Ingest {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute per-segment weight vectors as GeoJSON.
    Weights {
        #[command(flatten)]
        net: NetworkArgs,
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long, default_value = "raw")]
        length_mode: LengthMode,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Ask a running service instead of computing locally.
        #[arg(long)]
        server: Option<String>,
    },
    /// Plan the cheapest route for a profile.
    Plan {
        #[command(flatten)]
        net: NetworkArgs,
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Preset name (tapio, teemu, tuire) or a profile JSON file.
        #[arg(long)]
        profile: String,
        #[arg(long, value_parser = parse_coord, allow_hyphen_values = true)]
        from: Coord,
        #[arg(long, value_parser = parse_coord, allow_hyphen_values = true)]
        to: Coord,
        #[arg(long, default_value = "raw")]
        length_mode: LengthMode,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        server: Option<String>,
    },
    /// Serve the HTTP API over every scenario in the data directory.
    Serve {
        #[command(flatten)]
        net: NetworkArgs,
        /// Scenario directory; defaults to `<data>/scenarios`.
        #[arg(long)]
        scenarios: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Static files served outside `/api`.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
    /// Capture a bundle from the live API or from a message log.
    Record {
        /// Endpoint configuration JSON.
        #[arg(long, conflicts_with = "log", required_unless_present = "log")]
        config: Option<PathBuf>,
        /// Append-only message log to replay.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Bundle timestamp for live captures; defaults to the newest data time.
        #[arg(long)]
        recorded_at: Option<DateTime<Utc>>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct NetworkArgs {
    /// Road network GeoJSON; defaults to `<data>/network.geojson`.
    #[arg(long)]
    network: Option<PathBuf>,
    /// Node GeoJSON; defaults to `<data>/nodes.geojson` when present.
    #[arg(long)]
    nodes: Option<PathBuf>,
    /// Scale configuration; defaults to `<data>/scales.json` when present.
    #[arg(long)]
    scales: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArg {
    /// Bundle directory, or a scenario name under `<data>/scenarios`.
    #[arg(long)]
    scenario: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

fn parse_coord(s: &str) -> Result<Coord, String> {
    parse_lat_lon(s)
}

fn scenario_dir(data: &Path, s: &str) -> PathBuf {
    let p = PathBuf::from(s);
    if p.is_dir() {
        p
    } else {
        data.join("scenarios").join(s)
    }
}

/// The name a scenario is known by on a server.
fn scenario_name(s: &str) -> String {
    Path::new(s).file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| s.to_string())
}

fn load_net(data: &Path, a: &NetworkArgs) -> Result<RoadNetwork> {
    let network = a.network.clone().unwrap_or_else(|| data.join("network.geojson"));
    let nodes = a.nodes.clone().or_else(|| Some(data.join("nodes.geojson")).filter(|p| p.is_file()));
    Ok(load_network(&network, nodes.as_deref(), DEFAULT_SNAP_TOLERANCE_M)?)
}

fn load_scales(data: &Path, a: &NetworkArgs) -> Result<ScaleRegistry> {
    match a.scales.clone().or_else(|| Some(data.join("scales.json")).filter(|p| p.is_file())) {
        Some(p) => Ok(load_scale_config(&p)?),
        None => Ok(ScaleRegistry::default()),
    }
}

fn load_profile(s: &str) -> Result<ProfileRef> {
    if preset(s).is_some() {
        return Ok(ProfileRef::Preset(s.to_string()));
    }
    let p = Path::new(s);
    if !p.is_file() {
        bail!(InputError(format!("`{s}` is neither a preset ({}) nor a profile file", PRESET_NAMES.join(", "))));
    }
    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    let profile: Profile =
        serde_json::from_str(&text).map_err(|e| InputError(format!("{}: {e}", p.display())))?;
    profile.preference()?;
    Ok(ProfileRef::Inline(profile))
}

#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render_route(doc: &Value, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(to_pretty(doc)),
        Format::Text => {
            let props = &doc["properties"];
            let route: Route = serde_json::from_value(props.clone()).context("route document")?;
            let p: PreferenceVector = serde_json::from_value(props["preference"].clone()).context("route preference")?;
            let incomplete = props["data_incomplete_segments"].as_u64().unwrap_or(0) as usize;
            Ok(route_text(&route, &p, incomplete))
        }
    }
}

async fn run(cli: Cli) -> Result<()> {
    let data = cli.data;
    match cli.cmd {
        Command::Ingest { scenario, out } => {
            let (bundle, report) = parse_scenario_bundle(scenario_dir(&data, &scenario.scenario))?;
            for w in &report.warnings {
                tracing::warn!("{w}");
            }
            let doc = json!({ "scenario": bundle.header.name, "recorded_at": bundle.header.recorded_at, "report": report });
            emit(out.as_deref(), &to_pretty(&doc))
        }
        Command::Weights { net, scenario, length_mode, out, server } => {
            let doc = match server {
                Some(url) => ServiceClient::new(&url)?.weights(&scenario_name(&scenario.scenario), length_mode).await?,
                None => {
                    let network = load_net(&data, &net)?;
                    let scales = load_scales(&data, &net)?;
                    let sc = LoadedScenario::load(&scenario_dir(&data, &scenario.scenario), &network, &scales)?;
                    weights_document(&network, sc.weights(length_mode))
                }
            };
            emit(out.as_deref(), &to_pretty(&doc))
        }
        Command::Plan { net, scenario, profile, from, to, length_mode, format, out, server } => {
            let profile = load_profile(&profile)?;
            let doc = match server {
                Some(url) => {
                    let req = RouteRequest { scenario: scenario_name(&scenario.scenario), from, to, profile, length_mode };
                    ServiceClient::new(&url)?.route(&req).await?
                }
                None => {
                    let network = load_net(&data, &net)?;
                    let scales = load_scales(&data, &net)?;
                    let sc = LoadedScenario::load(&scenario_dir(&data, &scenario.scenario), &network, &scales)?;
                    let name = sc.bundle.header.name.clone();
                    let mut cat = ScenarioCatalog::new(network);
                    cat.insert(sc)?;
                    cat.plan(&RouteRequest { scenario: name, from, to, profile, length_mode })?
                }
            };
            emit(out.as_deref(), &render_route(&doc, format)?)
        }
        Command::Serve { net, scenarios, addr, static_dir } => {
            let network = load_net(&data, &net)?;
            let scales = load_scales(&data, &net)?;
            let dir = scenarios.unwrap_or_else(|| data.join("scenarios"));
            let cat = ScenarioCatalog::load_dir(network, &dir, &scales)?;
            if cat.scenarios.is_empty() {
                bail!(InputError(format!("no scenario bundles under {}", dir.display())));
            }
            rwroute_server::serve(addr, Arc::new(cat), static_dir)
                .await
                .map_err(|e| anyhow::Error::new(IngestError::Transport(e.to_string())))
        }
        Command::Record { config, log, recorded_at, out } => {
            let bundle = match (config, log) {
                (_, Some(log)) => replay_file(&log)?,
                (Some(cfg), None) => {
                    let text = std::fs::read_to_string(&cfg).with_context(|| format!("reading {}", cfg.display()))?;
                    let cfg: EndpointConfig =
                        serde_json::from_str(&text).map_err(|e| InputError(format!("{}: {e}", cfg.display())))?;
                    fetch_live_snapshot(&cfg, recorded_at).await?
                }
                (None, None) => unreachable!("clap requires one source"),
            };
            write_scenario_bundle(&bundle, &out)?;
            // Round-trip so a capture that cannot be read back is reported now.
            let (_, report) = parse_scenario_bundle(&out)?;
            eprintln!(
                "recorded `{}`: {} weather, {} traffic stations, {} readings, {} events -> {}",
                bundle.header.name,
                report.weather_snapshots,
                report.traffic_snapshots,
                report.readings,
                report.events,
                out.display()
            );
            Ok(())
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<rwroute_core::Error>() {
            return e.exit_code() as u8;
        }
        if let Some(e) = cause.downcast_ref::<ClientError>() {
            return e.exit_code() as u8;
        }
        if let Some(e) = cause.downcast_ref::<RouteError>() {
            return if matches!(e, RouteError::NoRoute { .. }) { 3 } else { 2 };
        }
        if let Some(IngestError::Transport(_)) = cause.downcast_ref::<IngestError>() {
            return 4;
        }
    }
    2
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_env("RWROUTE_LOG").unwrap_or_else(|_| "warn,rwroute_server=info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
