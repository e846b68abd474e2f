//! Command-line front end: `tropmod classify|fan|tropicalize|survey`.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::complex::{enumerate_complex, ComplexSummary};
use crate::fan::{build_trop_fan_from, check_balanced, embedding_report_from, FaceCheck, FanError, FACE_CHECK_BOUND};
use crate::graphs::{enumerate_stability_graphs, GraphError, StabilityGraph};
use crate::pluecker::{gamma_open_check, gamma_open_generic, limit_tree, pluecker, trop_family, PlueckerError, PointFamily};
use crate::trees::NestedFamily;
use crate::valuation::{injectivity_report, valuation_matrix, CoordinateFrame};
use crate::Rational;

pub const SCHEMA: &str = "tropmod/1";

/// Largest `n` accepted by `survey`.
pub const SURVEY_BOUND: usize = 6;

#[derive(Debug, Parser)]
#[command(name = "tropmod", version, about = "Tropical fans of graphically stable moduli spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Multipartite verdict, injectivity and embedding report.
    Classify,
    /// Boundary complex, weighted fan and balancing certificate.
    Fan,
    /// Tropicalize a one-parameter point family.
    Tropicalize,
    /// Cross-tabulate the classification over all graphs on n markings.
    Survey {
        #[arg(long)]
        n: usize,
        /// Examine at most this many graphs, sampled with --seed.
        #[arg(long)]
        bound: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct Options {
    /// Graph as `n=5;edges=2-3,2-4,...`.
    #[arg(long, global = true, conflicts_with = "graph_file")]
    pub graph: Option<String>,
    #[arg(long, global = true)]
    pub graph_file: Option<PathBuf>,
    /// Point family file, one `p3 = (1+t : 1)` per line.
    #[arg(long, global = true)]
    pub family: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true, value_enum, default_value_t = Level::Quick)]
    pub level: Level,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Include wall-clock timing (makes output non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Tsv,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("consistency failure: {0}")]
    Consistency(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) | CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Consistency(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Parse(_) => "parse",
            CliError::Validation(_) => "validation",
            CliError::Consistency(_) => "consistency",
            CliError::Io(_) => "io",
        }
    }

    /// Machine-readable diagnostic.
    pub fn to_json(&self) -> Value {
        json!({"schema": SCHEMA, "error": {"kind": self.kind(), "message": self.to_string()}})
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Parse(_) => CliError::Parse(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<PlueckerError> for CliError {
    fn from(e: PlueckerError) -> Self {
        match e {
            PlueckerError::Parse(_) => CliError::Parse(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<FanError> for CliError {
    fn from(e: FanError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn load_graph(opts: &Options) -> Result<StabilityGraph, CliError> {
    let text = match (&opts.graph, &opts.graph_file) {
        (Some(s), _) => s.clone(),
        (None, Some(p)) => std::fs::read_to_string(p)?,
        (None, None) => return Err(CliError::Usage("one of --graph or --graph-file is required".into())),
    };
    Ok(text.trim().parse()?)
}

fn graph_hash(g: &StabilityGraph) -> String {
    Sha256::digest(g.to_string().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn envelope(command: &str, g: Option<&StabilityGraph>, result: Value) -> Value {
    json!({
        "schema": SCHEMA,
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "graph": g.map(|g| g.to_string()),
        "graph_sha256": g.map(graph_hash),
        "result": result,
    })
}

fn unsupported(cmd: &str, f: Format) -> CliError {
    CliError::Usage(format!("{cmd} does not support --format {f:?}").to_lowercase())
}

fn face_check(g: &StabilityGraph, level: Level) -> Result<FaceCheck, CliError> {
    match level {
        Level::Full if g.n() > FACE_CHECK_BOUND => Err(FanError::DimensionTooLarge(g.n()).into()),
        Level::Full => Ok(FaceCheck::All),
        Level::Quick if g.n() > FACE_CHECK_BOUND => Ok(FaceCheck::Skip),
        Level::Quick => Ok(FaceCheck::Maximal),
    }
}

fn classify(opts: &Options) -> Result<String, CliError> {
    let g = load_graph(opts)?;
    match opts.format {
        Format::Tsv => return Ok(valuation_matrix(&g).to_tsv()),
        Format::Dot => return Ok(enumerate_complex(&g).to_dot()),
        _ => {}
    }
    let check = face_check(&g, opts.level)?;
    let partition = g.is_complete_multipartite();
    let witness = g.multipartite_witness();
    let cover = g.neighbor_cover_check();
    let inj = injectivity_report(&g);
    let emb = embedding_report_from(&g, &enumerate_complex(&g), check);
    let multipartite = partition.is_some();
    if witness.is_some() == multipartite || cover != multipartite {
        return Err(CliError::Consistency(format!("multipartite characterizations disagree on {g}")));
    }
    if inj.injective != multipartite || emb.is_embedding != multipartite {
        return Err(CliError::Consistency(format!(
            "multipartite={multipartite} injective={} embedding={} on {g}",
            inj.injective, emb.is_embedding
        )));
    }
    let parts: Option<Vec<String>> = partition.as_ref().map(|p| p.parts.iter().map(|s| s.to_string()).collect());
    if opts.format == Format::Text {
        let mut s = String::new();
        writeln!(s, "graph {g}").unwrap();
        writeln!(s, "multipartite {multipartite}").unwrap();
        if let Some(p) = &parts {
            writeln!(s, "partition {}", p.join(" ")).unwrap();
        }
        if let Some((i, j, k)) = witness {
            writeln!(s, "witness {i} {j} {k}").unwrap();
        }
        writeln!(s, "injective {}", inj.injective).unwrap();
        for c in &inj.collisions {
            let d: Vec<String> = c.divisors.iter().map(|x| x.to_string()).collect();
            writeln!(s, "collision {}", d.join(" ")).unwrap();
        }
        writeln!(s, "embedding {}", emb.is_embedding).unwrap();
        return Ok(s);
    }
    Ok(to_json_string(&envelope(
        "classify",
        Some(&g),
        json!({
            "multipartite": multipartite,
            "partition": parts,
            "witness": witness.map(|(i, j, k)| [i, j, k]),
            "neighbor_cover": cover,
            "injectivity": inj,
            "embedding": emb,
        }),
    )))
}

fn fan(opts: &Options) -> Result<String, CliError> {
    let g = load_graph(opts)?;
    let complex = enumerate_complex(&g);
    if opts.format == Format::Dot {
        return Ok(complex.to_dot());
    }
    if opts.format == Format::Tsv {
        return Ok(valuation_matrix(&g).to_tsv());
    }
    let fan = build_trop_fan_from(&g, &complex);
    let cert = check_balanced(&fan)?;
    if !cert.balanced {
        return Err(CliError::Consistency(format!("fan of {g} is not balanced")));
    }
    let summary = ComplexSummary::from(&complex);
    let multipartite = g.is_complete_multipartite().is_some();
    let counts_match =
        fan.rays().len() == summary.divisors && fan.maximal_cones().len() == summary.maximal_cells;
    if multipartite && !counts_match {
        return Err(CliError::Consistency(format!("fan of multipartite {g} differs from its complex")));
    }
    if opts.format == Format::Text {
        let mut s = fan.to_text();
        writeln!(s, "balanced {}", cert.balanced).unwrap();
        return Ok(s);
    }
    Ok(to_json_string(&envelope(
        "fan",
        Some(&g),
        json!({
            "frame": CoordinateFrame::for_graph(&g).labels(),
            "divisors": complex.divisors(),
            "complex": summary,
            "fan": fan.to_json(),
            "counts": {"rays": fan.rays().len(), "maximal_cones": fan.maximal_cones().len()},
            "matches_complex": counts_match,
            "balancing": {
                "balanced": cert.balanced,
                "codim_one_cones": cert.facets.len(),
                "facets": cert.facets,
            },
        }),
    )))
}

fn tropicalize(opts: &Options) -> Result<String, CliError> {
    if !matches!(opts.format, Format::Json | Format::Text) {
        return Err(unsupported("tropicalize", opts.format));
    }
    let g = load_graph(opts)?;
    let path = opts.family.as_ref().ok_or_else(|| CliError::Usage("--family is required".into()))?;
    let family = PointFamily::parse(&std::fs::read_to_string(path)?)?;
    if family.n() != g.n() {
        return Err(CliError::Validation(format!("family has {} points, graph has n = {}", family.n(), g.n())));
    }
    let pv = pluecker(&family);
    if !gamma_open_generic(&pv, &g) {
        return Err(PlueckerError::NotGammaOpen.into());
    }
    let v = trop_family(&pv, &g)?;
    let point: Vec<Rational> = v.coords().iter().map(|&x| Rational::from_integer(x.into())).collect();
    let fan = build_trop_fan_from(&g, &enumerate_complex(&g));
    let cone = fan.minimal_cone_containing(&point);
    if cone.is_none() && !v.is_zero() {
        return Err(CliError::Consistency(format!("{:?} lies outside the fan", v.coords())));
    }
    let limit = limit_tree(&pv)?;
    let stable = limit.stabilize(&g);
    let stable_family = NestedFamily::new(g.n(), stable.weighted_cuts().iter().map(|c| c.0).collect())
        .expect("cuts of a tree are nested");
    let provenance: Vec<String> = cone.map_or(Vec::new(), |k| fan.provenance(k).iter().map(|f| f.to_string()).collect());
    let placed = !fan.unplaced_cells().contains(&stable_family);
    if cone.is_some() && placed && !provenance.contains(&stable_family.to_string()) {
        return Err(CliError::Consistency(format!("stabilized limit {stable_family} is not in the containing cone")));
    }
    let cuts = |m: &crate::trees::MetricTree| {
        m.weighted_cuts()
            .into_iter()
            .map(|(s, l)| json!({"set": s.to_string(), "length": l.to_string()}))
            .collect::<Vec<_>>()
    };
    if opts.format == Format::Text {
        let mut s = String::new();
        let coords: Vec<String> = v.coords().iter().map(i64::to_string).collect();
        writeln!(s, "vector {}", coords.join(" ")).unwrap();
        match cone {
            Some(k) => writeln!(s, "cone {} provenance {}", k, provenance.join(" | ")).unwrap(),
            None => writeln!(s, "cone interior").unwrap(),
        }
        writeln!(s, "limit {}", limit.weighted_cuts().iter().map(|(c, l)| format!("{c}:{l}")).collect::<Vec<_>>().join(" ")).unwrap();
        writeln!(s, "stabilized {}", stable.weighted_cuts().iter().map(|(c, l)| format!("{c}:{l}")).collect::<Vec<_>>().join(" ")).unwrap();
        return Ok(s);
    }
    Ok(to_json_string(&envelope(
        "tropicalize",
        Some(&g),
        json!({
            "frame": CoordinateFrame::for_graph(&g).labels(),
            "vector": v.coords(),
            "special_fiber_gamma_open": gamma_open_check(&pv, &g),
            "cone": cone.map(|k| json!({
                "index": k,
                "rays": fan.cone_rays(k),
                "provenance": provenance,
                "merged_provenance": provenance.len() > 1,
            })),
            "limit_tree": cuts(&limit),
            "stabilized_tree": cuts(&stable),
        }),
    )))
}

struct SurveyRow {
    graph: StabilityGraph,
    multipartite: bool,
    characterizations_agree: bool,
    injective: bool,
    embedding: bool,
}

fn survey(opts: &Options, n: usize, bound: Option<usize>) -> Result<String, CliError> {
    if !matches!(opts.format, Format::Json | Format::Text) {
        return Err(unsupported("survey", opts.format));
    }
    if !(4..=SURVEY_BOUND).contains(&n) {
        return Err(GraphError::BoundExceeded { n, max: SURVEY_BOUND }.into());
    }
    let check = face_check(&StabilityGraph::complete(n)?, opts.level)?;
    let mut graphs: Vec<StabilityGraph> = enumerate_stability_graphs(n)?.collect();
    let total = graphs.len();
    if let Some(b) = bound.filter(|&b| b < total) {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut keep = sample(&mut rng, total, b).into_vec();
        keep.sort_unstable();
        graphs = keep.into_iter().map(|k| graphs[k].clone()).collect();
    }
    let rows: Vec<SurveyRow> = graphs
        .into_par_iter()
        .map(|g| {
            let partition = g.is_complete_multipartite().is_some();
            let witness = g.multipartite_witness().is_none();
            let cover = g.neighbor_cover_check();
            let injective = injectivity_report(&g).injective;
            let embedding = embedding_report_from(&g, &enumerate_complex(&g), check).is_embedding;
            SurveyRow {
                multipartite: partition,
                characterizations_agree: partition == witness && partition == cover,
                injective,
                embedding,
                graph: g,
            }
        })
        .collect();
    let disagreements: Vec<String> = rows
        .iter()
        .filter(|r| !r.characterizations_agree || r.injective != r.multipartite || r.embedding != r.multipartite)
        .map(|r| r.graph.to_string())
        .collect();
    let non_multipartite: Vec<String> = rows.iter().filter(|r| !r.multipartite).map(|r| r.graph.to_string()).collect();
    let count = |f: &dyn Fn(&SurveyRow) -> bool| rows.iter().filter(|r| f(r)).count();
    let table = json!({
        "multipartite": {"injective": count(&|r| r.multipartite && r.injective), "not_injective": count(&|r| r.multipartite && !r.injective)},
        "not_multipartite": {"injective": count(&|r| !r.multipartite && r.injective), "not_injective": count(&|r| !r.multipartite && !r.injective)},
    });
    let body = if opts.format == Format::Text {
        let mut s = String::new();
        writeln!(s, "n {n}").unwrap();
        writeln!(s, "graphs {} of {total}", rows.len()).unwrap();
        writeln!(s, "multipartite {}", count(&|r| r.multipartite)).unwrap();
        writeln!(s, "injective {}", count(&|r| r.injective)).unwrap();
        writeln!(s, "embedding {}", count(&|r| r.embedding)).unwrap();
        writeln!(s, "disagreements {}", disagreements.len()).unwrap();
        s
    } else {
        to_json_string(&envelope(
            "survey",
            None,
            json!({
                "n": n,
                "graphs_total": total,
                "graphs_examined": rows.len(),
                "seed": bound.filter(|&b| b < total).map(|_| opts.seed),
                "face_check": check,
                "multipartite": count(&|r| r.multipartite),
                "injective": count(&|r| r.injective),
                "embedding": count(&|r| r.embedding),
                "cross_table": table,
                "non_multipartite": non_multipartite,
                "disagreements": disagreements,
            }),
        ))
    };
    if !disagreements.is_empty() {
        return Err(CliError::Consistency(format!("{} graphs disagree: {}", disagreements.len(), disagreements.join(" "))));
    }
    Ok(body)
}

fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

/// Runs a parsed command and returns the text it prints.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let start = Instant::now();
    let out = match &cli.command {
        Command::Classify => classify(&cli.opts),
        Command::Fan => fan(&cli.opts),
        Command::Tropicalize => tropicalize(&cli.opts),
        Command::Survey { n, bound } => survey(&cli.opts, *n, *bound),
    }?;
    if cli.opts.timing && cli.opts.format == Format::Json {
        let mut v: Value = serde_json::from_str(&out).expect("own output parses");
        v["timing_ms"] = json!(start.elapsed().as_millis() as u64);
        return Ok(to_json_string(&v));
    }
    Ok(out)
}

/// Parses `args`, runs, writes output, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = execute(&cli).and_then(|out| match &cli.opts.out {
        Some(p) => std::fs::write(p, out).map_err(CliError::from),
        None => {
            print!("{out}");
            Ok(())
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
