use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use genus_iso::double_cover::{LabeledGraphFile, MatchingFile};
use genus_iso::grid::InstanceFile;
use genus_iso::{
    verify_isolation, CombinedWeight, Corner, GenusGrid, MatchingOracle, OracleError, SchemaWord, SegmentLayout,
    DEFAULT_MAX_CYCLES,
};
use rayon::prelude::*;
use serde::Serialize;

const MAX_CYCLES_ENV: &str = "GENUS_ISO_MAX_CYCLES";

#[derive(Parser)]
#[command(name = "genus-iso", version, about = "Perfect-matching isolation on genus-g grid graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded instance.
    Gen(GenArgs),
    /// Check that every simple cycle has non-zero circulation.
    Verify(VerifyArgs),
    /// Weight tables.
    #[command(subcommand)]
    Weights(WeightsCommand),
    /// Decide, construct and check uniqueness of perfect matchings.
    Match(MatchArgs),
    /// Polygonal schema words.
    #[command(subcommand)]
    Schema(SchemaCommand),
    /// Double a labelled graph, or project a matching of the double back.
    Double(DoubleArgs),
    /// Verify isolation over many seeded instances in parallel.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    g: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fraction of legal edges to keep, in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    /// Plant a perfect matching first.
    #[arg(long)]
    ensure_pm: bool,
    /// Explicit segment lengths `l1,l2,...`; drawn from the seed otherwise.
    #[arg(long, value_delimiter = ',')]
    lengths: Option<Vec<usize>>,
    /// Origin corner of the border scan, used with --lengths.
    #[arg(long, default_value = "NW")]
    origin: String,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_cycles: Option<u64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum WeightsCommand {
    /// CSV of every elementary weight and W per edge.
    Dump {
        #[arg(long)]
        instance: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Build the minimum-weight perfect matching.
    #[arg(long)]
    construct: bool,
    /// Decide whether the perfect matching is unique.
    #[arg(long)]
    unique: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SchemaCommand {
    /// Rewrite a word into normal form, printing the trace.
    Normalize {
        /// Space-separated sides; a trailing `-` marks an inverted side.
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DoubleArgs {
    /// Labelled graph `{"case", "vertices", "edges", "crossing"}`.
    #[arg(long)]
    instance: PathBuf,
    /// Project a perfect matching of the doubled graph instead.
    #[arg(long, requires = "matching")]
    project: bool,
    /// Matching `{"matching": [[u, v]]}` of the doubled graph.
    #[arg(long)]
    matching: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2")]
    g: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6")]
    m: Vec<usize>,
    /// Seeds 0..N for every (g, m, density).
    #[arg(long, default_value_t = 200)]
    seeds: u64,
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.6,1.0")]
    densities: Vec<f64>,
    #[arg(long)]
    ensure_pm: bool,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_cycles: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Exit 0 rather than 3 when some instance stops at the cycle cap.
    #[arg(long)]
    allow_capped: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Error carrying its exit code.
struct Fail {
    code: u8,
    msg: String,
}

fn usage(msg: impl Into<String>) -> Fail {
    Fail { code: 1, msg: msg.into() }
}

fn property(msg: impl Into<String>) -> Fail {
    Fail { code: 2, msg: msg.into() }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Fail> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Fail> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| usage(e.to_string()))
        }
    }
}

fn emit<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), Fail> {
    let mut text = serde_json::to_string_pretty(value).expect("serialisable");
    text.push('\n');
    write_out(path, &text)
}

fn load_grid(path: &Path) -> Result<GenusGrid, Fail> {
    let file: InstanceFile = read_json(path)?;
    file.to_grid().map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// `--max-cycles`, then the environment, then the default.
fn cycle_cap(flag: Option<u64>) -> Result<u64, Fail> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(MAX_CYCLES_ENV) {
        Ok(v) => match v.trim().parse::<u64>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(usage(format!("{MAX_CYCLES_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(DEFAULT_MAX_CYCLES),
    }
}

fn gen(a: GenArgs) -> Result<(), Fail> {
    let grid = match &a.lengths {
        Some(lengths) => {
            let origin: Corner = a.origin.parse().map_err(|e| usage(format!("{e}")))?;
            let layout = SegmentLayout::new(a.g, a.m, lengths.clone(), origin).map_err(|e| usage(e.to_string()))?;
            GenusGrid::generate(&layout, a.seed, a.density, a.ensure_pm)
        }
        None => GenusGrid::from_seed(a.g, a.m, a.seed, a.density, a.ensure_pm),
    }
    .map_err(|e| usage(e.to_string()))?;
    emit(a.output.as_deref(), &InstanceFile::from_grid(&grid))
}

fn verify(a: VerifyArgs) -> Result<(), Fail> {
    let grid = load_grid(&a.instance)?;
    let cap = cycle_cap(a.max_cycles)?;
    let w = CombinedWeight::new(&grid);
    match verify_isolation(&grid, &w, cap) {
        Ok(report) => {
            emit(a.output.as_deref(), &report)?;
            if report.passed() {
                Ok(())
            } else {
                Err(property(format!("{} cycles with zero circulation", report.failures.len())))
            }
        }
        Err(OracleError::BudgetExceeded { cap, partial }) => {
            if let Some(report) = &partial {
                emit(a.output.as_deref(), report)?;
                if !report.passed() {
                    return Err(property(format!("{} cycles with zero circulation", report.failures.len())));
                }
            }
            Err(Fail { code: 3, msg: format!("stopped after {cap} cycles") })
        }
        Err(e) => Err(property(e.to_string())),
    }
}

fn weights_dump(instance: &Path, output: Option<&Path>) -> Result<(), Fail> {
    let grid = load_grid(instance)?;
    let w = CombinedWeight::new(&grid);
    let mut csv = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["edge".to_string()];
    header.extend(w.order().iter().map(|f| f.to_string()));
    header.push("W".into());
    csv.write_record(&header).map_err(|e| usage(e.to_string()))?;
    for e in 0..grid.edge_count() {
        let mut row = vec![e.to_string()];
        row.extend(w.elementary(e).iter().map(|v| v.to_string()));
        row.push(w.value(e).to_string());
        csv.write_record(&row).map_err(|e| usage(e.to_string()))?;
    }
    let bytes = csv.into_inner().map_err(|e| usage(e.to_string()))?;
    write_out(output, &String::from_utf8(bytes).expect("ascii"))
}

#[derive(Serialize)]
struct MatchOut {
    has_pm: bool,
    /// Minimum total of `W` over perfect matchings, as a decimal string.
    min_weight: Option<String>,
    matching: Option<Vec<usize>>,
    unique: Option<bool>,
}

fn run_match(a: MatchArgs) -> Result<(), Fail> {
    let grid = load_grid(&a.instance)?;
    let w = CombinedWeight::new(&grid);
    let o = MatchingOracle::new(grid.graph(), w.values()).map_err(|e| usage(e.to_string()))?;
    let has_pm = o.has_pm();
    let min_weight = o.min_pm_weight().map(|k| o.unshift(&k).to_string());
    let matching = if a.construct {
        match o.construct_pm().map_err(|e| property(e.to_string()))? {
            Some(m) if !m.is_perfect_in(grid.graph()) => {
                return Err(property("constructed edge set is not a perfect matching"))
            }
            Some(m) => Some(m.edges),
            None => None,
        }
    } else {
        None
    };
    let unique = a.unique.then(|| o.is_unique_pm());
    emit(a.output.as_deref(), &MatchOut { has_pm, min_weight, matching, unique })
}

#[derive(Serialize)]
struct StepOut {
    rule: String,
    word: String,
}

#[derive(Serialize)]
struct SchemaOut {
    input: String,
    word: String,
    form: Option<genus_iso::NormalForm>,
    form_id: Option<u8>,
    orientable: bool,
    euler_char: i64,
    genus: i64,
    trace: Vec<StepOut>,
}

fn schema_normalize(word: &str, output: Option<&Path>) -> Result<(), Fail> {
    let start: SchemaWord = word.parse().map_err(|e| usage(format!("{e}")))?;
    let (out, trace) = start.normalize();
    let inv = start.invariants();
    let form = out.is_normal_form();
    emit(
        output,
        &SchemaOut {
            input: start.to_string(),
            word: out.to_string(),
            form,
            form_id: form.map(|f| f.id()),
            orientable: inv.orientable,
            euler_char: inv.euler_char,
            genus: inv.genus,
            trace: trace.iter().map(|s| StepOut { rule: s.rule.to_string(), word: s.word.to_string() }).collect(),
        },
    )?;
    if form.is_none() {
        return Err(property(format!("{out} is not in normal form")));
    }
    if trace.iter().any(|s| s.word.invariants() != inv) || out.invariants() != inv {
        return Err(property("a rewrite changed the surface invariants"));
    }
    Ok(())
}

fn double(a: DoubleArgs) -> Result<(), Fail> {
    let file: LabeledGraphFile = read_json(&a.instance)?;
    let g = file.to_graph().map_err(|e| usage(format!("{}: {e}", a.instance.display())))?;
    if a.project {
        let path = a.matching.as_deref().expect("clap requires --matching");
        let m: MatchingFile = read_json(path)?;
        let doubled = g.double();
        let edges = doubled.edges_from_pairs(&m.matching).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let projected = g.project_matching(&edges).map_err(|e| property(e.to_string()))?;
        emit(a.output.as_deref(), &MatchingFile { matching: g.pairs_from_edges(&projected) })
    } else {
        if a.matching.is_some() {
            return Err(usage("--matching needs --project"));
        }
        emit(a.output.as_deref(), &g.double().to_file())
    }
}

#[derive(Serialize, Default, Clone)]
struct Group {
    g: usize,
    m: usize,
    density: f64,
    instances: u64,
    cycles_checked: u64,
    capped: u64,
    zero_circulation: u64,
    alternation_failed: u64,
    weight_lemma_failed: u64,
    disjunction_failed: u64,
}

#[derive(Serialize)]
struct SweepOut {
    max_cycles: u64,
    workers: usize,
    instances: u64,
    cycles_checked: u64,
    capped: u64,
    zero_circulation: u64,
    lemma_failures: u64,
    /// `[g, m, seed, density]` of instances with some failure.
    failing: Vec<(usize, usize, u64, f64)>,
    groups: Vec<Group>,
}

fn sweep(a: SweepArgs) -> Result<(), Fail> {
    let cap = cycle_cap(a.max_cycles)?;
    if let Some(d) = a.densities.iter().find(|d| !(0.0..=1.0).contains(*d)) {
        return Err(usage(format!("density {d} outside [0, 1]")));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(a.workers).build().map_err(|e| usage(e.to_string()))?;
    let mut keys = Vec::new();
    for &g in &a.g {
        for &m in &a.m {
            if g == 0 || m < g + 1 {
                continue;
            }
            for &d in &a.densities {
                keys.push((g, m, d));
            }
        }
    }
    let jobs: Vec<(usize, usize, f64, u64)> =
        keys.iter().flat_map(|&(g, m, d)| (0..a.seeds).map(move |s| (g, m, d, s))).collect();
    let runs: Vec<Result<(usize, Group), String>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(g, m, d, seed)| {
                let grid = GenusGrid::from_seed(g, m, seed, d, a.ensure_pm).map_err(|e| e.to_string())?;
                let w = CombinedWeight::new(&grid);
                let report = match verify_isolation(&grid, &w, cap) {
                    Ok(r) => r,
                    Err(OracleError::BudgetExceeded { partial: Some(r), .. }) => *r,
                    Err(e) => return Err(e.to_string()),
                };
                let key = keys.iter().position(|&k| k == (g, m, d)).expect("known key");
                Ok((
                    key,
                    Group {
                        g,
                        m,
                        density: d,
                        instances: 1,
                        cycles_checked: report.cycles_checked,
                        capped: u64::from(!report.complete),
                        zero_circulation: report.failures.len() as u64,
                        alternation_failed: report.alternation.failed,
                        weight_lemma_failed: report.weight_lemma.failed,
                        disjunction_failed: report.disjunction.failed,
                    },
                ))
            })
            .collect()
    });
    let mut groups: Vec<Group> =
        keys.iter().map(|&(g, m, density)| Group { g, m, density, ..Group::default() }).collect();
    let mut failing = Vec::new();
    for (run, &(g, m, d, seed)) in runs.into_iter().zip(&jobs) {
        let (key, r) = run.map_err(usage)?;
        if r.zero_circulation + r.alternation_failed + r.weight_lemma_failed + r.disjunction_failed > 0 {
            failing.push((g, m, seed, d));
        }
        let t = &mut groups[key];
        t.instances += 1;
        t.cycles_checked += r.cycles_checked;
        t.capped += r.capped;
        t.zero_circulation += r.zero_circulation;
        t.alternation_failed += r.alternation_failed;
        t.weight_lemma_failed += r.weight_lemma_failed;
        t.disjunction_failed += r.disjunction_failed;
    }
    let sum = |f: fn(&Group) -> u64| groups.iter().map(f).sum::<u64>();
    let out = SweepOut {
        max_cycles: cap,
        workers: pool.current_num_threads(),
        instances: sum(|t| t.instances),
        cycles_checked: sum(|t| t.cycles_checked),
        capped: sum(|t| t.capped),
        zero_circulation: sum(|t| t.zero_circulation),
        lemma_failures: sum(|t| t.alternation_failed + t.weight_lemma_failed + t.disjunction_failed),
        failing,
        groups,
    };
    emit(a.output.as_deref(), &out)?;
    if out.zero_circulation + out.lemma_failures > 0 {
        return Err(property(format!("{} failing instances", out.failing.len())));
    }
    if out.capped > 0 && !a.allow_capped {
        return Err(Fail { code: 3, msg: format!("{} instances stopped at {cap} cycles", out.capped) });
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Fail> {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Verify(a) => verify(a),
        Command::Weights(WeightsCommand::Dump { instance, output }) => weights_dump(&instance, output.as_deref()),
        Command::Match(a) => run_match(a),
        Command::Schema(SchemaCommand::Normalize { word, output }) => schema_normalize(&word, output.as_deref()),
        Command::Double(a) => double(a),
        Command::Sweep(a) => sweep(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("genus-iso: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
