//! Command-line front end: point checks, plane scans with CSV/SVG output,
//! witness evaluation and derivation, and local-model verification.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_traits::{One, Signed, Zero};

use crate::certificates::{
    classify_point_with, derive_witness, paper_witness, Classification, WitnessPolynomial,
};
use crate::dist::{constant, ConstantTag, DEFAULT_PRECISION_BITS};
use crate::inflation::{assemble, FamilySet, HierarchyLevel, RingSpec, Scope};
use crate::localmodel::{resolve_wiring, simulate_triangle, TriangleLocalModel};
use crate::lp::{verify_certificate, LpOutcome, SolveOptions};
use crate::scalar::{format_rat, parse_rat, rat, Rat};

pub const EXIT_UNDECIDED: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_GRAY: i32 = 3;
pub const EXIT_ERROR: i32 = 4;
/// witness derive: the anchor LP was feasible, nothing written.
pub const EXIT_NOT_REFUTED: i32 = 2;
/// verify-model: residuals exceeded the tolerance.
pub const EXIT_MISMATCH: i32 = 1;

pub const THREADS_ENV: &str = "SYMRING_THREADS";

#[derive(Parser)]
#[command(
    name = "symring",
    about = "Certifies that symmetric tripartite distributions admit no symmetric triangle-network realization",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a single (E1, E2) point.
    Check(CheckArgs),
    /// Scan a rectangle of the (E1, E2) plane to CSV (and optionally SVG).
    Scan(ScanArgs),
    /// Evaluate or derive witness polynomials.
    Witness(WitnessArgs),
    /// Rebuild the triangle-local model and compare against the target correlators.
    VerifyModel(VerifyModelArgs),
}

#[derive(Args)]
struct ScopeArgs {
    /// Single inflation ring size m.
    #[arg(long, conflicts_with = "level")]
    ring: Option<usize>,
    /// Hierarchy level n (rings 4..=n+3).
    #[arg(long)]
    level: Option<usize>,
}

impl ScopeArgs {
    fn scope(&self) -> Result<Scope, String> {
        match (self.ring, self.level) {
            (Some(m), None) => Ok(Scope::Ring(RingSpec::new(m).map_err(|e| e.to_string())?)),
            (None, n) => Ok(Scope::Level(
                HierarchyLevel::new(n.unwrap_or(1)).map_err(|e| e.to_string())?,
            )),
            (Some(_), Some(_)) => Err("--ring and --level are mutually exclusive".into()),
        }
    }
}

#[derive(Args)]
struct CheckArgs {
    /// E1 as num/den or exact decimal.
    #[arg(long, allow_hyphen_values = true)]
    e1: String,
    /// E2 as num/den or exact decimal.
    #[arg(long, allow_hyphen_values = true)]
    e2: String,
    #[command(flatten)]
    scope: ScopeArgs,
    /// Comma-separated constraint families (default L1,L2,COUPLING; NORMALIZATION always on).
    #[arg(long)]
    families: Option<String>,
    #[arg(long)]
    pivot_limit: Option<u64>,
    /// Write the Farkas certificate (one rational per line) here on infeasibility.
    #[arg(long)]
    dump_certificate: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ScanArgs {
    /// key=value config file; flags override.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    e1_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    e1_max: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    e2_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    e2_max: Option<String>,
    /// Grid step on both axes (default 1/100).
    #[arg(long)]
    step: Option<String>,
    /// Scan levels 1..=n per point, recording the first refuting level.
    #[arg(long, conflicts_with = "ring")]
    level: Option<usize>,
    /// Test a single ring size instead of the level hierarchy.
    #[arg(long)]
    ring: Option<usize>,
    #[arg(long)]
    families: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    pivot_limit: Option<u64>,
    /// CSV output path; existing rows are kept and skipped (resume).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional SVG region plot.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct WitnessArgs {
    #[command(subcommand)]
    action: WitnessAction,
}

#[derive(Subcommand)]
enum WitnessAction {
    /// Print the exact value and sign of a witness at a point.
    Eval {
        /// Use the published witness.
        #[arg(long, conflicts_with = "file")]
        paper: bool,
        /// Load a witness file instead.
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        e1: String,
        #[arg(long, allow_hyphen_values = true)]
        e2: String,
    },
    /// Solve the factorized-family LP at an anchor and write the witness.
    Derive {
        /// Anchor point as "e1,e2".
        #[arg(long, allow_hyphen_values = true)]
        anchor: String,
        #[arg(long, conflicts_with = "level")]
        ring: Option<usize>,
        #[arg(long)]
        level: Option<usize>,
        /// Default FACTORIZED,DIRECT_MARGINAL; L1/L2 are not allowed here.
        #[arg(long)]
        families: Option<String>,
        #[arg(long)]
        pivot_limit: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct VerifyModelArgs {
    /// Working precision in bits for the irrational model parameters.
    #[arg(long, default_value_t = DEFAULT_PRECISION_BITS)]
    precision: u32,
    /// Verify a model file instead of the built-in construction.
    #[arg(long)]
    model: Option<PathBuf>,
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successful exits per clap convention
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Witness(a) => match a.action {
            WitnessAction::Eval { paper, file, e1, e2 } => cmd_witness_eval(paper, file, &e1, &e2),
            WitnessAction::Derive { anchor, ring, level, families, pivot_limit, out } => {
                cmd_witness_derive(&anchor, ring, level, families, pivot_limit, &out)
            }
        },
        Command::VerifyModel(a) => cmd_verify_model(a),
    }
}

fn parse_point(e1: &str, e2: &str) -> Result<(Rat, Rat), String> {
    let e1 = parse_rat(e1)?;
    let e2 = parse_rat(e2)?;
    for v in [&e1, &e2] {
        if v.abs() > Rat::one() {
            return Err(format!("correlator {} outside [-1, 1]", format_rat(v)));
        }
    }
    Ok((e1, e2))
}

fn parse_families(spec: Option<&str>, default: FamilySet) -> Result<FamilySet, String> {
    match spec {
        Some(s) => FamilySet::parse(s),
        None => Ok(default),
    }
}

fn solve_options(pivot_limit: Option<u64>) -> SolveOptions {
    let mut opts = SolveOptions::default();
    if let Some(limit) = pivot_limit {
        opts.pivot_limit = limit;
    }
    opts
}

fn cmd_check(a: CheckArgs) -> Result<i32, String> {
    let (e1, e2) = parse_point(&a.e1, &a.e2)?;
    let scope = a.scope.scope()?;
    let families = parse_families(a.families.as_deref(), FamilySet::scan_default())?;
    let opts = solve_options(a.pivot_limit);

    if crate::dist::e3_interval(&e1, &e2).is_empty() {
        println!("verdict: {}", Classification::InvalidGray.name());
        println!("reason: no tripartite binary distribution has these marginals for any E3");
        return Ok(EXIT_GRAY);
    }

    let t0 = Instant::now();
    let d = crate::dist::SymmetricDist::marginal_only(e1.clone(), e2.clone())
        .map_err(|e| e.to_string())?;
    let assembly = assemble(&scope, &d, &families).map_err(|e| e.to_string())?;
    let report = crate::lp::solve_with(&assembly.lp, &opts).map_err(|e| e.to_string())?;
    let ms = t0.elapsed().as_millis();

    println!("rings: {:?}", assembly.ring_sizes);
    println!("families: {families}");
    println!("lp: {} rows x {} cols", assembly.lp.n_rows(), assembly.lp.n_cols());
    println!("pivots: {}  ms: {ms}", report.pivots);
    match report.outcome {
        LpOutcome::Feasible { .. } => {
            println!("verdict: {}", Classification::Undecided.name());
            Ok(EXIT_UNDECIDED)
        }
        LpOutcome::Infeasible { ref y } => {
            let ok = verify_certificate(&assembly.lp, &report.outcome);
            println!("verdict: {}", Classification::InfeasibleSymmetric.name());
            println!("certificate: {}", if ok { "verified" } else { "REJECTED" });
            if !ok {
                return Err("solver returned a certificate that failed verification".into());
            }
            if let Some(path) = a.dump_certificate {
                let body: String = y.iter().map(|v| format!("{}\n", format_rat(v))).collect();
                std::fs::write(&path, body).map_err(|e| format!("{}: {e}", path.display()))?;
                println!("certificate written to {}", path.display());
            }
            Ok(EXIT_INFEASIBLE)
        }
    }
}

/// Fully resolved scan configuration.
struct ScanConfig {
    e1_min: Rat,
    e1_max: Rat,
    e2_min: Rat,
    e2_max: Rat,
    step: Rat,
    scope_levels: ScanScope,
    families: FamilySet,
    threads: usize,
    opts: SolveOptions,
    out: PathBuf,
    svg: Option<PathBuf>,
}

enum ScanScope {
    Levels(usize),
    Ring(usize),
}

fn read_config_file(path: &Path) -> Result<std::collections::BTreeMap<String, String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut map = std::collections::BTreeMap::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("{}:{}: expected key=value", path.display(), ln + 1))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    const KNOWN: [&str; 13] = [
        "e1_min", "e1_max", "e2_min", "e2_max", "step", "level", "ring", "families", "threads",
        "precision_bits", "max_denominator", "pivot_limit", "out",
    ];
    for k in map.keys() {
        if !KNOWN.contains(&k.as_str()) && k != "svg" {
            return Err(format!("unknown config key {k:?}"));
        }
    }
    Ok(map)
}

fn resolve_scan_config(a: &ScanArgs) -> Result<ScanConfig, String> {
    let file = match &a.config {
        Some(p) => read_config_file(p)?,
        None => Default::default(),
    };
    let pick = |flag: &Option<String>, key: &str| -> Option<String> {
        flag.clone().or_else(|| file.get(key).cloned())
    };
    let rat_of = |flag: &Option<String>, key: &str, default: Rat| -> Result<Rat, String> {
        match pick(flag, key) {
            Some(s) => parse_rat(&s),
            None => Ok(default),
        }
    };
    let e1_min = rat_of(&a.e1_min, "e1_min", rat(-1, 1))?;
    let e1_max = rat_of(&a.e1_max, "e1_max", Rat::one())?;
    let e2_min = rat_of(&a.e2_min, "e2_min", rat(-1, 1))?;
    let e2_max = rat_of(&a.e2_max, "e2_max", Rat::one())?;
    let step = rat_of(&a.step, "step", rat(1, 100))?;
    if !step.is_positive() {
        return Err("step must be positive".into());
    }
    for v in [&e1_min, &e1_max, &e2_min, &e2_max] {
        if v.abs() > Rat::one() {
            return Err("scan ranges must lie within [-1, 1]".into());
        }
    }
    let usize_of = |flag: Option<usize>, key: &str| -> Result<Option<usize>, String> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => file
                .get(key)
                .map(|s| s.parse().map_err(|e| format!("config {key}: {e}")))
                .transpose(),
        }
    };
    let level = usize_of(a.level, "level")?;
    let ring = usize_of(a.ring, "ring")?;
    let scope_levels = match (ring, level) {
        (Some(m), None) => {
            RingSpec::new(m).map_err(|e| e.to_string())?;
            ScanScope::Ring(m)
        }
        (None, n) => {
            let n = n.unwrap_or(1);
            HierarchyLevel::new(n).map_err(|e| e.to_string())?;
            ScanScope::Levels(n)
        }
        (Some(_), Some(_)) => return Err("ring and level are mutually exclusive".into()),
    };
    let families = parse_families(
        pick(&a.families, "families").as_deref(),
        FamilySet::scan_default(),
    )?;
    let threads = match usize_of(a.threads, "threads")? {
        Some(t) => t.max(1),
        None => std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(0), // 0: rayon default
    };
    let pivot_limit = match a.pivot_limit {
        Some(v) => Some(v),
        None => file
            .get("pivot_limit")
            .map(|s| s.parse().map_err(|e| format!("config pivot_limit: {e}")))
            .transpose()?,
    };
    let out = a
        .out
        .clone()
        .or_else(|| file.get("out").map(PathBuf::from))
        .ok_or("scan needs an output path (--out or out= in config)")?;
    let svg = a.svg.clone().or_else(|| file.get("svg").map(PathBuf::from));
    Ok(ScanConfig {
        e1_min,
        e1_max,
        e2_min,
        e2_max,
        step,
        scope_levels,
        families,
        threads,
        opts: solve_options(pivot_limit),
        out,
        svg,
    })
}

fn grid_axis(min: &Rat, max: &Rat, step: &Rat) -> Vec<Rat> {
    let mut out = Vec::new();
    let mut v = min.clone();
    while v <= *max {
        out.push(v.clone());
        v += step;
    }
    out
}

struct ScanRow {
    verdict: Classification,
    min_level: Option<usize>,
    pivots: u64,
    ms: u128,
}

fn scan_point(cfg: &ScanConfig, e1: &Rat, e2: &Rat) -> Result<ScanRow, String> {
    let t0 = Instant::now();
    if crate::dist::e3_interval(e1, e2).is_empty() {
        return Ok(ScanRow {
            verdict: Classification::InvalidGray,
            min_level: None,
            pivots: 0,
            ms: t0.elapsed().as_millis(),
        });
    }
    let mut pivots = 0u64;
    let scopes: Vec<(Option<usize>, Scope)> = match cfg.scope_levels {
        ScanScope::Ring(m) => vec![(Some(m), Scope::Ring(RingSpec { m }))],
        ScanScope::Levels(n) => (1..=n)
            .map(|k| (Some(k), Scope::Level(HierarchyLevel { n: k })))
            .collect(),
    };
    for (tag, scope) in scopes {
        let report = classify_point_with(e1, e2, scope, &cfg.families, &cfg.opts)
            .map_err(|e| e.to_string())?;
        pivots += report.pivots;
        if report.verdict == Classification::InfeasibleSymmetric {
            return Ok(ScanRow {
                verdict: Classification::InfeasibleSymmetric,
                min_level: tag,
                pivots,
                ms: t0.elapsed().as_millis(),
            });
        }
    }
    Ok(ScanRow {
        verdict: Classification::Undecided,
        min_level: None,
        pivots,
        ms: t0.elapsed().as_millis(),
    })
}

const CSV_HEADER: &str = "e1_num,e1_den,e2_num,e2_den,verdict,min_level,pivots,ms";

fn point_key(e1: &Rat, e2: &Rat) -> String {
    format!("{},{},{},{}", e1.numer(), e1.denom(), e2.numer(), e2.denom())
}

fn cmd_scan(a: ScanArgs) -> Result<i32, String> {
    let cfg = resolve_scan_config(&a)?;
    let e1s = grid_axis(&cfg.e1_min, &cfg.e1_max, &cfg.step);
    let e2s = grid_axis(&cfg.e2_min, &cfg.e2_max, &cfg.step);

    // resume: keep verdicts of already-written rows
    let mut done: std::collections::HashMap<String, String> = Default::default();
    if cfg.out.exists() {
        let text =
            std::fs::read_to_string(&cfg.out).map_err(|e| format!("{}: {e}", cfg.out.display()))?;
        for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() == 8 {
                done.insert(fields[..4].join(","), fields[4].to_string());
            }
        }
    }
    let fresh = done.is_empty();
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&cfg.out)
        .map_err(|e| format!("{}: {e}", cfg.out.display()))?;
    if fresh {
        writeln!(file, "{CSV_HEADER}").map_err(|e| e.to_string())?;
    }

    let mut points = Vec::new();
    for e2 in &e2s {
        for e1 in &e1s {
            if !done.contains_key(&point_key(e1, e2)) {
                points.push((e1.clone(), e2.clone()));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| e.to_string())?;
    use rayon::prelude::*;
    for chunk in points.chunks(64) {
        let results: Vec<Result<ScanRow, String>> =
            pool.install(|| chunk.par_iter().map(|(e1, e2)| scan_point(&cfg, e1, e2)).collect());
        for ((e1, e2), res) in chunk.iter().zip(results) {
            let row = res?;
            let min_level = row.min_level.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                file,
                "{},{},{},{}",
                point_key(e1, e2),
                row.verdict.name(),
                min_level,
                format_args!("{},{}", row.pivots, row.ms)
            )
            .map_err(|e| e.to_string())?;
            done.insert(point_key(e1, e2), row.verdict.name().to_string());
        }
        file.flush().map_err(|e| e.to_string())?;
    }
    println!("scan complete: {} points -> {}", e1s.len() * e2s.len(), cfg.out.display());

    if let Some(svg_path) = &cfg.svg {
        let svg = render_svg(&e1s, &e2s, |e1, e2| {
            done.get(&point_key(e1, e2)).map(String::as_str).unwrap_or("UNDECIDED").to_string()
        });
        std::fs::write(svg_path, svg).map_err(|e| format!("{}: {e}", svg_path.display()))?;
        println!("svg written to {}", svg_path.display());
    }
    Ok(0)
}

/// One rect per grid cell; E1 horizontal, E2 vertical (increasing upward).
fn render_svg(e1s: &[Rat], e2s: &[Rat], verdict: impl Fn(&Rat, &Rat) -> String) -> String {
    const CELL: usize = 6;
    const MARGIN: usize = 30;
    let w = e1s.len() * CELL + 2 * MARGIN;
    let h = e2s.len() * CELL + 2 * MARGIN;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    for (j, e2) in e2s.iter().enumerate() {
        let y = MARGIN + (e2s.len() - 1 - j) * CELL;
        for (i, e1) in e1s.iter().enumerate() {
            let x = MARGIN + i * CELL;
            let fill = match verdict(e1, e2).as_str() {
                "INVALID_GRAY" => "#b3b3b3",
                "INFEASIBLE_SYMMETRIC" => "#e8821e",
                _ => "#eef5ec",
            };
            out.push_str(&format!(
                "<rect x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{fill}\"/>\n"
            ));
        }
    }
    let x_axis_y = h - MARGIN;
    out.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{x_axis_y}\" x2=\"{}\" y2=\"{x_axis_y}\" stroke=\"black\"/>\n",
        w - MARGIN
    ));
    out.push_str(&format!(
        "<line x1=\"{MARGIN}\" y1=\"{MARGIN}\" x2=\"{MARGIN}\" y2=\"{x_axis_y}\" stroke=\"black\"/>\n"
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"10\">E1</text>\n",
        w / 2,
        h - MARGIN / 3
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"10\">E2</text>\n",
        MARGIN / 4,
        h / 2
    ));
    out.push_str("</svg>\n");
    out
}

fn cmd_witness_eval(
    paper: bool,
    file: Option<PathBuf>,
    e1: &str,
    e2: &str,
) -> Result<i32, String> {
    let (e1, e2) = parse_point(e1, e2)?;
    let witness = match (paper, file) {
        (true, None) => paper_witness(),
        (false, Some(path)) => {
            let text =
                std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            WitnessPolynomial::from_text(&text).map_err(|e| e.to_string())?
        }
        _ => return Err("choose exactly one of --paper or --file".into()),
    };
    let value = witness.eval(&e1, &e2);
    let sign = if value.is_positive() {
        "positive (no symmetric realization exists)"
    } else if value.is_zero() {
        "zero (inconclusive)"
    } else {
        "negative (inconclusive)"
    };
    println!("value: {}", format_rat(&value));
    println!("sign: {sign}");
    Ok(0)
}

fn cmd_witness_derive(
    anchor: &str,
    ring: Option<usize>,
    level: Option<usize>,
    families: Option<String>,
    pivot_limit: Option<u64>,
    out: &Path,
) -> Result<i32, String> {
    let (e1_s, e2_s) = anchor
        .split_once(',')
        .ok_or("anchor must be \"e1,e2\"")?;
    let (e1, e2) = parse_point(e1_s, e2_s)?;
    let scope = ScopeArgs { ring, level }.scope()?;
    let default = FamilySet::new()
        .with(crate::inflation::Family::Factorized)
        .with(crate::inflation::Family::DirectMarginal);
    let families = parse_families(families.as_deref(), default)?;
    let opts = solve_options(pivot_limit);
    match derive_witness(scope, &families, &e1, &e2, &opts).map_err(|e| e.to_string())? {
        Some(w) => {
            std::fs::write(out, w.to_text()).map_err(|e| format!("{}: {e}", out.display()))?;
            println!("witness written to {} ({} terms)", out.display(), w.poly.n_terms());
            println!("value at anchor: {}", format_rat(&w.eval(&e1, &e2)));
            Ok(0)
        }
        None => {
            println!("anchor not refuted at this level; no witness written");
            Ok(EXIT_NOT_REFUTED)
        }
    }
}

fn cmd_verify_model(a: VerifyModelArgs) -> Result<i32, String> {
    let model: TriangleLocalModel = match &a.model {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            TriangleLocalModel::from_text(&text).map_err(|e| e.to_string())?
        }
        None => resolve_wiring(a.precision).map_err(|e| e.to_string())?,
    };
    model.validate().map_err(|e| e.to_string())?;
    let dist = simulate_triangle(&model);
    let (e1, e2, e3) = dist.correlators();
    let e1c = constant(ConstantTag::E1C, a.precision).map_err(|e| e.to_string())?;
    let e3c = constant(ConstantTag::E3C, a.precision).map_err(|e| e.to_string())?;
    let targets = [e1c.value().clone(), rat(-1, 3), e3c.value().clone()];
    let achieved = [e1, e2, e3];

    // 64-bit parameters cannot be trusted below 1e-6
    let (tol, tol_name) = if a.precision >= 128 {
        (rat(1, 100_000_000), "1e-8")
    } else {
        (rat(1, 1_000_000), "1e-6")
    };
    println!("precision: {} bits, tolerance {tol_name}", a.precision);
    let mut ok = true;
    for (name, (got, want)) in ["E1", "E2", "E3"].iter().zip(achieved.iter().zip(&targets)) {
        let residual = (got - want).abs();
        let within = residual <= tol;
        ok &= within;
        println!(
            "{name}: achieved {:.12}  target {:.12}  residual {:.3e}  {}",
            rat_f64(got),
            rat_f64(want),
            rat_f64(&residual),
            if within { "ok" } else { "MISMATCH" }
        );
    }
    let asym = dist.permutation_asymmetry();
    println!("permutation asymmetry: {:.3e}", rat_f64(&asym));
    ok &= asym <= tol;
    Ok(if ok { 0 } else { EXIT_MISMATCH })
}

fn rat_f64(v: &Rat) -> f64 {
    crate::scalar::rat_to_f64(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> i32 {
        run(std::iter::once("symring").chain(args.iter().copied()))
    }

    #[test]
    fn check_exit_codes() {
        assert_eq!(
            run_args(&["check", "--e1", "1753/10000", "--e2", "-1/3", "--ring", "7",
                       "--families", "L1,L2"]),
            EXIT_INFEASIBLE
        );
        assert_eq!(run_args(&["check", "--e1", "0", "--e2", "0", "--ring", "7"]), EXIT_UNDECIDED);
        assert_eq!(run_args(&["check", "--e1", "9/10", "--e2", "0", "--ring", "4"]), EXIT_GRAY);
        assert_eq!(run_args(&["check", "--e1", "5", "--e2", "0", "--ring", "4"]), EXIT_ERROR);
    }

    #[test]
    fn witness_eval_paper() {
        assert_eq!(run_args(&["witness", "eval", "--paper", "--e1", "0", "--e2", "0"]), 0);
        assert_eq!(
            run_args(&["witness", "eval", "--paper", "--e1", "1656/10000", "--e2", "-1/3"]),
            0
        );
    }

    #[test]
    fn witness_derive_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.txt");
        assert_eq!(
            run_args(&["witness", "derive", "--anchor", "3/10,-1/3", "--ring", "7", "--out",
                       path.to_str().unwrap()]),
            0
        );
        let text = std::fs::read_to_string(&path).unwrap();
        let w = WitnessPolynomial::from_text(&text).unwrap();
        assert!(w.eval(&rat(3, 10), &rat(-1, 3)).is_positive());
        // feasible anchor: documented exit, no file
        let path2 = dir.path().join("none.txt");
        assert_eq!(
            run_args(&["witness", "derive", "--anchor", "0,0", "--ring", "7", "--out",
                       path2.to_str().unwrap()]),
            EXIT_NOT_REFUTED
        );
        assert!(!path2.exists());
    }

    #[test]
    fn scan_small_grid_and_resume() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("scan.csv");
        let svg = dir.path().join("scan.svg");
        let args = [
            "scan", "--e1-min", "0", "--e1-max", "1/10", "--e2-min", "0", "--e2-max", "0",
            "--step", "1/10", "--ring", "4", "--threads", "1",
        ];
        let mut with_out: Vec<&str> = args.to_vec();
        let csv_s = csv.to_str().unwrap().to_string();
        let svg_s = svg.to_str().unwrap().to_string();
        with_out.extend(["--out", &csv_s, "--svg", &svg_s]);
        assert_eq!(run_args(&with_out), 0);
        let text = std::fs::read_to_string(&csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 3); // header + 2 points
        assert!(lines[1].starts_with("0,1,0,1,UNDECIDED"));
        // resume adds nothing
        assert_eq!(run_args(&with_out), 0);
        assert_eq!(std::fs::read_to_string(&csv).unwrap(), text);
        let svg_text = std::fs::read_to_string(&svg).unwrap();
        assert_eq!(svg_text.matches("<rect").count(), 2);
        assert!(svg_text.starts_with("<svg"));
    }

    #[test]
    fn scan_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("scan.cfg");
        let csv = dir.path().join("out.csv");
        std::fs::write(
            &cfg,
            format!(
                "e1_min=0\ne1_max=0\ne2_min=0\ne2_max=0\nstep=1/10\nring=4\nthreads=1\nout={}\n",
                csv.display()
            ),
        )
        .unwrap();
        assert_eq!(run_args(&["scan", "--config", cfg.to_str().unwrap()]), 0);
        assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 2);
        // unknown key rejected
        std::fs::write(&cfg, "bogus=1\n").unwrap();
        assert_eq!(run_args(&["scan", "--config", cfg.to_str().unwrap()]), EXIT_ERROR);
    }

    #[test]
    fn verify_model_paths() {
        assert_eq!(run_args(&["verify-model", "--precision", "128"]), 0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        let model = resolve_wiring(128).unwrap();
        std::fs::write(&path, model.to_text().replace("f_c 0 1 0", "f_c 0 9 0")).unwrap();
        assert_eq!(run_args(&["verify-model", "--model", path.to_str().unwrap()]), EXIT_ERROR);
    }

    #[test]
    fn empty_range_gives_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("empty.csv");
        let csv_s = csv.to_str().unwrap().to_string();
        let args = [
            "scan", "--e1-min", "1/2", "--e1-max", "1/4", "--e2-min", "0", "--e2-max", "0",
            "--step", "1/10", "--ring", "4", "--out", &csv_s,
        ];
        assert_eq!(run_args(&args), 0);
        assert_eq!(std::fs::read_to_string(&csv).unwrap().trim(), CSV_HEADER);
    }
}
