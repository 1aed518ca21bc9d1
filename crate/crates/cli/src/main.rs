use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dadda_core::adders::{AdderKind, FinalAdderPlan};
use dadda_core::analysis::GateCostModel;
use dadda_core::multiplier::{build, verify, MultiplierConfig, Variant, VerifyMode, DEFAULT_PART_ADDER};
use dadda_core::netlist::Netlist;
use dadda_core::report::{analyze, compare, to_csv, to_markdown, AnalysisReport, VectorStream, DEFAULT_VECTOR_COUNT};
use dadda_core::verilog::to_verilog;

/// Generate, verify and analyze gate-level Dadda multipliers.
#[derive(Parser)]
#[command(name = "dadda", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a multiplier netlist and write it as JSON.
    Gen(GenArgs),
    /// Check a netlist against integer multiplication.
    Verify(VerifyArgs),
    /// Unit-gate area, depth and toggle report, with baseline comparisons.
    Report(ReportArgs),
    /// Write a netlist as structural Verilog.
    EmitVerilog(EmitArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    /// regular-cla, partitioned-cla or partitioned-hybrid
    #[arg(long)]
    variant: String,
    /// Final adder plan JSON file, or `default` (hybrid only)
    #[arg(long)]
    plan: Option<String>,
    /// Adder summing each part's two rows: ripple or lookahead
    #[arg(long)]
    part_adder: Option<String>,
    /// Output file; defaults to <root>/<n>/<variant>/netlist.json
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    root: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, conflicts_with = "random")]
    exhaustive: bool,
    #[arg(long, value_name = "N")]
    random: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ReportArgs {
    /// Comma-separated design ids (`<n>/<variant>`) or netlist paths
    #[arg(long, value_delimiter = ',', required = true)]
    designs: Vec<String>,
    #[arg(long, default_value = "out")]
    dir: PathBuf,
    /// Cost model JSON file, or `default`
    #[arg(long, default_value = "default")]
    cost_model: String,
    #[arg(long, default_value_t = DEFAULT_VECTOR_COUNT)]
    vectors: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    md: Option<PathBuf>,
}

#[derive(Args)]
struct EmitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// Error that maps to exit code 2.
struct Usage(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.into())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct ManifestEntry {
    subcommand: String,
    flags: BTreeMap<String, String>,
    seeds: Vec<u64>,
    tool_version: String,
    sha256: String,
}

/// Writes `contents` to `path` and records it in `manifest.json` next to it.
fn write_artifact(
    path: &Path,
    contents: &str,
    subcommand: &str,
    flags: &BTreeMap<String, String>,
    seeds: &[u64],
) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;

    let manifest_path = dir.join("manifest.json");
    let mut manifest: BTreeMap<String, ManifestEntry> = match fs::read_to_string(&manifest_path) {
        Ok(text) => serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", manifest_path.display()))?,
        Err(_) => BTreeMap::new(),
    };
    let name = path.file_name().unwrap().to_string_lossy().into_owned();
    manifest.insert(
        name,
        ManifestEntry {
            subcommand: subcommand.to_string(),
            flags: flags.clone(),
            seeds: seeds.to_vec(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            sha256: hex::encode(Sha256::digest(contents.as_bytes())),
        },
    );
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&manifest_path, text).with_context(|| format!("writing {}", manifest_path.display()))?;
    Ok(())
}

fn load_netlist(path: &Path) -> Result<Netlist> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Netlist::from_json(&text).with_context(|| format!("loading {}", path.display()))
}

fn gen(args: GenArgs) -> Result<ExitCode, Usage> {
    let variant: Variant = args.variant.parse()?;
    let part_adder: AdderKind = match &args.part_adder {
        Some(s) => s.parse()?,
        None => DEFAULT_PART_ADDER,
    };
    let mut config = MultiplierConfig::new(args.n, variant).with_part_adder(part_adder);
    match args.plan.as_deref() {
        None | Some("default") => {}
        Some(file) => {
            let text = fs::read_to_string(file).with_context(|| format!("reading plan {file}"))?;
            let plan = FinalAdderPlan::from_json(&text).with_context(|| format!("parsing plan {file}"))?;
            config = config.with_plan(plan);
        }
    }
    config.validate()?;
    let design = build(&config)?;

    let out = args
        .out
        .unwrap_or_else(|| args.root.join(args.n.to_string()).join(variant.name()).join("netlist.json"));
    let mut flags = BTreeMap::new();
    flags.insert("n".into(), args.n.to_string());
    flags.insert("variant".into(), variant.name().to_string());
    flags.insert("plan".into(), args.plan.clone().unwrap_or_else(|| "default".into()));
    flags.insert("part_adder".into(), serde_json::to_value(part_adder)?.as_str().unwrap().to_string());
    flags.insert("config_digest".into(), config.digest());
    write_artifact(&out, &design.netlist.to_json(), "gen", &flags, &[])?;
    println!(
        "wrote {} ({} gates, {} reduction stages)",
        out.display(),
        design.netlist.gates().len(),
        design.stage_count()
    );
    Ok(ExitCode::SUCCESS)
}

fn verify_cmd(args: VerifyArgs) -> Result<ExitCode, Usage> {
    let mode = match (args.exhaustive, args.random) {
        (true, None) => VerifyMode::Exhaustive,
        (false, Some(count)) => VerifyMode::Random { count, seed: args.seed },
        _ => return Err(Usage(anyhow!("pass exactly one of --exhaustive or --random N"))),
    };
    let netlist = load_netlist(&args.input)?;
    let report = verify(&netlist, mode)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    match &report.counterexample {
        None => Ok(ExitCode::SUCCESS),
        Some(c) => {
            eprintln!(
                "FAIL: {} * {} gave {} (expected {}), {} cases checked",
                c.a, c.b, c.got, c.want, report.cases
            );
            Ok(ExitCode::from(1))
        }
    }
}

/// Returns the design id, its netlist path and, for ids resolved through
/// the `<dir>/<n>/<variant>/` layout, the design directory.
fn resolve_design(dir: &Path, id: &str) -> Result<(String, PathBuf, Option<PathBuf>)> {
    let direct = Path::new(id);
    if direct.is_file() {
        return Ok((id.to_string(), direct.to_path_buf(), None));
    }
    let (n, variant) = id
        .split_once('/')
        .ok_or_else(|| anyhow!("unknown design `{id}`: expected <n>/<variant> or a netlist path"))?;
    let n: usize = n.parse().map_err(|_| anyhow!("unknown design `{id}`: bad width"))?;
    let variant: Variant = variant.parse()?;
    let design_dir = dir.join(n.to_string()).join(variant.name());
    let path = design_dir.join("netlist.json");
    if !path.is_file() {
        bail!("unknown design `{id}`: {} does not exist (run gen first)", path.display());
    }
    Ok((format!("{n}/{}", variant.name()), path, Some(design_dir)))
}

fn report_cmd(args: ReportArgs) -> Result<ExitCode, Usage> {
    let model = match args.cost_model.as_str() {
        "default" => GateCostModel::default(),
        file => {
            let text = fs::read_to_string(file).with_context(|| format!("reading cost model {file}"))?;
            GateCostModel::from_json(&text).with_context(|| format!("parsing cost model {file}"))?
        }
    };
    let stream = VectorStream::new(args.seed, args.vectors);
    let mut flags = BTreeMap::new();
    flags.insert("designs".into(), args.designs.join(","));
    flags.insert("cost_model".into(), args.cost_model.clone());
    flags.insert("cost_model_digest".into(), model.digest());
    flags.insert("vectors".into(), args.vectors.to_string());

    let mut reports: Vec<AnalysisReport> = Vec::new();
    let mut design_dirs = Vec::new();
    for id in &args.designs {
        let (id, path, design_dir) = resolve_design(&args.dir, id)?;
        let netlist = load_netlist(&path)?;
        reports.push(analyze(&id, &netlist, &model, stream)?);
        design_dirs.push(design_dir);
    }

    let mut comparisons = Vec::new();
    for base in reports.iter().filter(|r| r.variant == Variant::RegularCla.name()) {
        for cand in reports.iter().filter(|r| r.n == base.n && r.variant != base.variant) {
            comparisons.push(compare(base, cand)?);
        }
    }

    for (report, dir) in reports.iter().zip(&design_dirs) {
        if let Some(dir) = dir {
            let csv = to_csv(std::slice::from_ref(report))?;
            write_artifact(&dir.join("report.csv"), &csv, "report", &flags, &[args.seed])?;
        }
    }
    let md = to_markdown(&reports, &comparisons);
    if let Some(path) = &args.csv {
        write_artifact(path, &to_csv(&reports)?, "report", &flags, &[args.seed])?;
    }
    if let Some(path) = &args.md {
        write_artifact(path, &md, "report", &flags, &[args.seed])?;
    }
    print!("{md}");
    Ok(ExitCode::SUCCESS)
}

fn emit_verilog(args: EmitArgs) -> Result<ExitCode, Usage> {
    let netlist = load_netlist(&args.input)?;
    let module = match (netlist.meta().get("variant"), netlist.meta().get("n")) {
        (Some(v), Some(n)) => format!("{}_{n}", v.replace('-', "_")),
        _ => "netlist".to_string(),
    };
    let text = to_verilog(&netlist, &module);
    let mut flags = BTreeMap::new();
    flags.insert("in".into(), args.input.display().to_string());
    write_artifact(&args.out, &text, "emit-verilog", &flags, &[])?;
    println!("wrote {} (module {module})", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Report(a) => report_cmd(a),
        Command::EmitVerilog(a) => emit_verilog(a),
    };
    match result {
        Ok(code) => code,
        Err(Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
