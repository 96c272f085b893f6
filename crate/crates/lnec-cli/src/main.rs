//! Command-line surface for the four LNEC code classes: construct codes,
//! analyze and certify them, decode received vectors, and report field-size
//! bounds. All inputs and outputs are JSON; every run with the same inputs
//! and seed is byte-identical.
//!
//! Exit codes: 0 success, 1 usage or malformed input, 2 field too small
//! (choice-step exhaustion), 3 size guard.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use lnec::analyze::{full_report, AnalyzeOpts};
use lnec::code::LnecCode;
use lnec::construct::{self, ConstructOpts, ConstructReport, Method};
use lnec::decode::{decode_min_distance, transmit, DecodeOpts};
use lnec::galois::{Elem, FieldSpec};
use lnec::network::{EnumLimits, Network, Target};

const EXIT_USAGE: i32 = 1;
const EXIT_FIELD: i32 = 2;
const EXIT_GUARD: i32 = 3;

#[derive(Parser)]
#[command(
    name = "lnec",
    version,
    about = "Linear network error-correction codes: construct, analyze, decode"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a multicast/broadcast/dispersion/generic MDS code.
    Construct(ConstructArgs),
    /// Classify a code, compute per-target distances, and certify MDS kinds.
    Analyze(AnalyzeArgs),
    /// Decode a received vector (or a simulated injection) at a node.
    Decode(DecodeArgs),
    /// Field-size sufficiency bounds for all four construction kinds.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct ConstructArgs {
    /// Network JSON file.
    #[arg(long)]
    network: PathBuf,
    /// Code class to construct.
    #[arg(long, value_parser = ["multicast", "broadcast", "dispersion", "generic"])]
    kind: String,
    /// Field as "p[,m[,c0,c1,...,cm]]", e.g. "13" or "2,4" or "2,4,1,1,0,0,1".
    /// Falls back to the network file's "field" entry when omitted.
    #[arg(long)]
    field: Option<String>,
    /// Candidate choice: lexicographic sweep or seeded sampling.
    #[arg(long, value_parser = ["det", "rand"], default_value = "det")]
    method: String,
    /// Seed for --method rand.
    #[arg(long)]
    seed: Option<u64>,
    /// Explicit node collections for dispersion: "a+b,c" means {a,b}, {c}.
    #[arg(long)]
    collections: Option<String>,
    /// Lift the enumeration size guard (a scan budget still applies).
    #[arg(long)]
    force: bool,
    /// Output path for the code JSON; a manifest lands next to it.
    #[arg(long)]
    out: PathBuf,
    /// Also write the derived extended kernels to this path.
    #[arg(long = "kernels-out")]
    kernels_out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    code: PathBuf,
    /// Extra node targets, comma separated.
    #[arg(long)]
    targets: Option<String>,
    /// Node collections "a+b,c" used both as report targets and as the
    /// dispersion certification family.
    #[arg(long)]
    collections: Option<String>,
    /// Channel sets "e1+e2,e3" used both as report targets and as the
    /// generic certification family.
    #[arg(long = "channel-sets")]
    channel_sets: Option<String>,
    /// Cap the distance search weight (mandatory on large networks).
    #[arg(long = "max-weight")]
    max_weight: Option<usize>,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    code: PathBuf,
    /// Node to decode at.
    #[arg(long)]
    node: String,
    /// Received vector "v1,v2,..." in canonical in-channel order.
    #[arg(long, conflicts_with = "inject")]
    received: Option<String>,
    /// Simulated run "X=1,2;Z=e3:2,e5:1": transmit X under the error
    /// assignment Z and decode what arrives.
    #[arg(long)]
    inject: Option<String>,
    #[arg(long = "max-weight")]
    max_weight: Option<usize>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    network: PathBuf,
    /// Information rate to evaluate the bounds at.
    #[arg(long)]
    rate: usize,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own exit code conventions differ from ours; usage
            // problems are exit 1 here.
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Construct(args) => cmd_construct(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Decode(args) => cmd_decode(args),
        Command::Bounds(args) => cmd_bounds(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                lnec::Error::FieldTooSmall { .. } => EXIT_FIELD,
                lnec::Error::SizeGuard(_)
                | lnec::Error::SearchSpace { .. }
                | lnec::Error::DistanceExceedsCap { .. } => EXIT_GUARD,
                _ => EXIT_USAGE,
            }
        }
    }
}

fn read_file(path: &Path) -> lnec::Result<String> {
    fs::read_to_string(path)
        .map_err(|e| lnec::Error::InvalidNetwork(format!("cannot read {}: {e}", path.display())))
}

fn load_network(path: &Path) -> lnec::Result<Network> {
    Network::from_json(&read_file(path)?)
}

/// FNV-1a over the file bytes, for the manifest's input fingerprints.
fn fnv1a64(bytes: &[u8]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

fn parse_field(text: &str) -> lnec::Result<FieldSpec> {
    let parts: Vec<&str> = text.split(',').collect();
    let bad = |what: &str| lnec::Error::InvalidField(format!("{what} in --field {text:?}"));
    let p: u64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| bad("bad characteristic"))?;
    if parts.len() == 1 {
        return Ok(FieldSpec::prime(p));
    }
    let m: u32 = parts[1].trim().parse().map_err(|_| bad("bad degree"))?;
    if parts.len() == 2 {
        return Ok(FieldSpec {
            p,
            m,
            modulus: None,
        });
    }
    let coeffs: Vec<u8> = parts[2..]
        .iter()
        .map(|c| c.trim().parse().map_err(|_| bad("bad modulus coefficient")))
        .collect::<lnec::Result<_>>()?;
    Ok(FieldSpec {
        p,
        m,
        modulus: Some(coeffs),
    })
}

/// "a+b,c" -> [[a, b], [c]]
fn parse_groups(text: &str) -> Vec<Vec<String>> {
    text.split(',')
        .filter(|g| !g.trim().is_empty())
        .map(|g| g.split('+').map(|s| s.trim().to_string()).collect())
        .collect()
}

fn parse_vector(text: &str) -> lnec::Result<Vec<Elem>> {
    text.split(',')
        .map(|v| {
            v.trim()
                .parse::<Elem>()
                .map_err(|_| lnec::Error::InvalidNetwork(format!("bad vector entry {v:?}")))
        })
        .collect()
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    network_hash: String,
    wall_ms: u128,
    construction: &'a ConstructReport,
}

fn cmd_construct(args: ConstructArgs) -> lnec::Result<i32> {
    let started = Instant::now();
    let network_text = read_file(&args.network)?;
    let net = Network::from_json(&network_text)?;
    let spec = match (&args.field, net.default_field()) {
        (Some(text), _) => parse_field(text)?,
        (None, Some(spec)) => spec.clone(),
        (None, None) => {
            return Err(lnec::Error::InvalidField(
                "no --field given and the network file declares none".into(),
            ))
        }
    };
    let method = match args.method.as_str() {
        "det" => Method::Deterministic,
        "rand" => Method::Random {
            seed: args.seed.ok_or_else(|| {
                lnec::Error::InvalidNetwork("--method rand requires --seed".into())
            })?,
        },
        _ => unreachable!("clap validates the value"),
    };
    let limits = if args.force {
        EnumLimits::budget(EnumLimits::default().max_patterns)
    } else {
        EnumLimits::default()
    };
    let opts = ConstructOpts { method, limits };

    let collections = args.collections.as_deref().map(parse_groups);
    let built = match args.kind.as_str() {
        "multicast" => construct::multicast_mds(&net, &spec, &opts)?,
        "broadcast" => construct::broadcast_mds(&net, &spec, &opts)?,
        "dispersion" => construct::dispersion_mds(&net, &spec, collections.as_deref(), &opts)?,
        "generic" => construct::generic_mds(&net, &spec, &opts)?,
        _ => unreachable!("clap validates the value"),
    };
    if let Some(w) = &built.manifest.field_warning {
        eprintln!("warning: {w}");
    }

    fs::write(&args.out, built.code.to_json()).map_err(|e| {
        lnec::Error::InvalidNetwork(format!("cannot write {}: {e}", args.out.display()))
    })?;
    if let Some(path) = &args.kernels_out {
        fs::write(path, built.code.extended_kernels_json()).map_err(|e| {
            lnec::Error::InvalidNetwork(format!("cannot write {}: {e}", path.display()))
        })?;
    }
    let manifest = Manifest {
        command: "construct",
        version: env!("CARGO_PKG_VERSION"),
        network_hash: fnv1a64(network_text.as_bytes()),
        wall_ms: started.elapsed().as_millis(),
        construction: &built.manifest,
    };
    let manifest_path = args.out.with_extension("manifest.json");
    fs::write(
        &manifest_path,
        serde_json::to_string_pretty(&manifest).expect("serializable"),
    )
    .map_err(|e| {
        lnec::Error::InvalidNetwork(format!("cannot write {}: {e}", manifest_path.display()))
    })?;
    eprintln!(
        "wrote {} and {} ({} kind, field order {})",
        args.out.display(),
        manifest_path.display(),
        built.manifest.kind,
        spec.order()
    );
    Ok(0)
}

fn analyze_opts(
    collections: &Option<String>,
    channel_sets: &Option<String>,
    max_weight: Option<usize>,
) -> AnalyzeOpts {
    AnalyzeOpts {
        max_weight,
        collections: collections.as_deref().map(parse_groups),
        channel_sets: channel_sets.as_deref().map(parse_groups),
        ..AnalyzeOpts::default()
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> lnec::Result<i32> {
    let net = load_network(&args.network)?;
    let code = LnecCode::from_json(&net, &read_file(&args.code)?)?;
    let opts = analyze_opts(&args.collections, &args.channel_sets, args.max_weight);

    let mut extra: Vec<Target> = Vec::new();
    if let Some(ts) = &args.targets {
        extra.extend(ts.split(',').map(|t| Target::Node(t.trim().to_string())));
    }
    for group in args
        .collections
        .as_deref()
        .map(parse_groups)
        .unwrap_or_default()
    {
        extra.push(Target::Nodes(group));
    }
    for group in args
        .channel_sets
        .as_deref()
        .map(parse_groups)
        .unwrap_or_default()
    {
        extra.push(Target::Channels(group));
    }

    let report = full_report(&code, &extra, &opts)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("serializable")
    );

    // Distances computed three ways must agree; a disagreement is reported
    // and fails the run.
    for record in &report.targets {
        if let lnec::analyze::TargetRecord::Distance(d) = record {
            if !d.consistent() {
                eprintln!("error: distance definitions disagree at {:?}", d.target);
                return Ok(EXIT_USAGE);
            }
            let hypothesis = match d.target {
                Target::Node(_) => report.regularity.strongly_regular,
                Target::Nodes(_) => report.regularity.strongly_sup_regular == Some(true),
                Target::Channels(_) => report.regularity.channel_regular == Some(true),
            };
            if hypothesis && d.slack < 0 {
                eprintln!("error: Singleton bound violated at {:?}", d.target);
                return Ok(EXIT_USAGE);
            }
        }
    }
    Ok(0)
}

fn cmd_decode(args: DecodeArgs) -> lnec::Result<i32> {
    let net = load_network(&args.network)?;
    let code = LnecCode::from_json(&net, &read_file(&args.code)?)?;
    let node = net.node_index(&args.node)?;
    let received: Vec<Elem> = match (&args.received, &args.inject) {
        (Some(text), None) => parse_vector(text)?,
        (None, Some(text)) => {
            let (x, z) = parse_injection(&net, text)?;
            transmit(&code, &x, &z)?.received_at(&code, node)
        }
        _ => {
            return Err(lnec::Error::InvalidNetwork(
                "exactly one of --received / --inject is required".into(),
            ))
        }
    };
    let opts = DecodeOpts {
        analyze: AnalyzeOpts {
            max_weight: args.max_weight,
            ..AnalyzeOpts::default()
        },
        ..DecodeOpts::default()
    };
    let result = decode_min_distance(&code, node, &received, &opts)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&result).expect("serializable")
    );
    Ok(0)
}

/// "X=1,2;Z=e3:2,e5:1" -> message vector and full error vector.
fn parse_injection(net: &Network, text: &str) -> lnec::Result<(Vec<Elem>, Vec<Elem>)> {
    let mut x = None;
    let mut z = vec![0 as Elem; net.n_channels()];
    for part in text.split(';') {
        let part = part.trim();
        if let Some(rest) = part.strip_prefix("X=") {
            x = Some(parse_vector(rest)?);
        } else if let Some(rest) = part.strip_prefix("Z=") {
            if rest.trim().is_empty() {
                continue;
            }
            for assign in rest.split(',') {
                let (id, val) = assign.split_once(':').ok_or_else(|| {
                    lnec::Error::InvalidNetwork(format!("bad error assignment {assign:?}"))
                })?;
                let e = net.channel_index(id.trim())?;
                z[e] = val
                    .trim()
                    .parse()
                    .map_err(|_| lnec::Error::InvalidNetwork(format!("bad error value {val:?}")))?;
            }
        } else if !part.is_empty() {
            return Err(lnec::Error::InvalidNetwork(format!(
                "bad injection part {part:?}"
            )));
        }
    }
    let x = x.ok_or_else(|| lnec::Error::InvalidNetwork("injection needs X=...".into()))?;
    Ok((x, z))
}

fn cmd_bounds(args: BoundsArgs) -> lnec::Result<i32> {
    let net = load_network(&args.network)?.with_rate(args.rate)?;
    let report = construct::field_size_bounds(&net, &EnumLimits::default())?;
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("serializable")
    );
    Ok(0)
}
