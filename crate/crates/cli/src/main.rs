//! Command-line workbench around the `halfswitch` library.
//!
//! Vertex indices are 1-based everywhere on the wire (arguments, JSON,
//! CSV); the library itself is 0-based. Usage errors exit with 2 (clap's
//! default), domain errors print to stderr and exit with 1.

use std::fs;
use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use halfswitch::{
    build_buffer, count_hk_matrix, decompose, enumerate_realizations_with_limit, exact_mixing,
    flow_representation, greedy_realization, hk_sequence, run_suite, sample, stability_probe,
    BipartiteDegreeSequence, BipartiteRealization, ChainConfig, FlowRep, PathSystem, Vertex,
};

#[derive(Parser)]
#[command(
    name = "halfswitch",
    version,
    about = "Sample, count, decompose and analyze bipartite realizations of near-staircase degree sequences"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the switch chain and print the final realization
    Sample(SampleArgs),
    /// List every realization of a degree sequence (exhaustive oracle)
    Enumerate(EnumerateArgs),
    /// Count realizations of the defect family via transfer matrices
    Count(CountArgs),
    /// Split a degree sequence into indecomposable factors
    Decompose(DecomposeArgs),
    /// Print the flow representation of a realization
    Flow(FlowArgs),
    /// Build a buffer realization agreeing with two endpoints outside a window
    Buffer(BufferArgs),
    /// Canonical switch path between two realizations, or the whole family's load
    Path(PathArgs),
    /// Exact mixing diagnostics on a desk-scale state space
    Mix(MixArgs),
    /// Growth of realization counts between consecutive defects
    Stability(StabilityArgs),
    /// Run the built-in verification suite
    Check(CheckArgs),
}

/// Degree sequence selection: either the defect family via --n/--k or an
/// explicit JSON file.
#[derive(Args)]
struct SeqArgs {
    /// Order of the near-staircase family
    #[arg(long)]
    n: Option<usize>,
    /// Defect of the near-staircase family
    #[arg(long, default_value_t = 0)]
    k: usize,
    /// JSON file with {"degA": [...], "degB": [...]}; use '-' for stdin
    #[arg(long, value_name = "FILE", conflicts_with = "n")]
    degrees: Option<PathBuf>,
}

impl SeqArgs {
    fn resolve(&self) -> Result<BipartiteDegreeSequence, String> {
        match (&self.degrees, self.n) {
            (Some(path), _) => {
                let text = if path.as_os_str() == "-" {
                    let mut buf = String::new();
                    std::io::stdin()
                        .read_to_string(&mut buf)
                        .map_err(|e| format!("reading stdin: {e}"))?;
                    buf
                } else {
                    fs::read_to_string(path)
                        .map_err(|e| format!("reading {}: {e}", path.display()))?
                };
                serde_json::from_str(&text).map_err(|e| format!("parsing degrees: {e}"))
            }
            (None, Some(n)) => {
                if self.k > n {
                    return Err(format!("defect {} exceeds order {n}", self.k));
                }
                Ok(hk_sequence(n, self.k))
            }
            (None, None) => Err("provide either --n (with optional --k) or --degrees".into()),
        }
    }
}

#[derive(Args)]
struct OutArgs {
    /// Emit JSON instead of text
    #[arg(long)]
    json: bool,
    /// Write the output to a file instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

impl OutArgs {
    fn emit(&self, text: String, json: Value) -> Result<(), String> {
        let body = if self.json {
            let mut s = serde_json::to_string_pretty(&json).map_err(|e| e.to_string())?;
            s.push('\n');
            s
        } else {
            text
        };
        match &self.out {
            Some(path) => {
                fs::write(path, body).map_err(|e| format!("writing {}: {e}", path.display()))
            }
            None => {
                print!("{body}");
                Ok(())
            }
        }
    }
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    seq: SeqArgs,
    /// Number of chain steps
    #[arg(long, default_value_t = 10_000)]
    steps: u64,
    /// Random seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    seq: SeqArgs,
    /// Maximum grid size (cells) the oracle may enumerate
    #[arg(long, default_value_t = 36)]
    oracle_limit: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct CountArgs {
    /// Order of the near-staircase family
    #[arg(long)]
    n: usize,
    /// Defect of the near-staircase family
    #[arg(long, default_value_t = 0)]
    k: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    seq: SeqArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct FlowArgs {
    #[command(flatten)]
    seq: SeqArgs,
    /// JSON file with 1-based edges [[a, b], ...] realizing the sequence;
    /// defaults to the greedy realization
    #[arg(long, value_name = "FILE")]
    edges: Option<PathBuf>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct BufferArgs {
    /// Order of the near-staircase family
    #[arg(long)]
    n: usize,
    /// Defect of the near-staircase family
    #[arg(long, default_value_t = 0)]
    k: usize,
    /// Index of the far-side endpoint in enumeration order
    #[arg(long)]
    x: usize,
    /// Index of the prefix-side endpoint in enumeration order
    #[arg(long)]
    y: usize,
    /// First window column (1-based)
    #[arg(long, default_value_t = 1)]
    start: usize,
    /// Window width
    #[arg(long)]
    width: usize,
    /// Maximum grid size (cells) the oracle may enumerate
    #[arg(long, default_value_t = 49)]
    oracle_limit: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct PathArgs {
    /// Order of the near-staircase family
    #[arg(long)]
    n: usize,
    /// Defect of the near-staircase family
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Start state index in enumeration order
    #[arg(long, default_value_t = 0)]
    x: usize,
    /// Target state index in enumeration order
    #[arg(long, default_value_t = 0)]
    y: usize,
    /// Measure the congestion of the whole path family instead
    #[arg(long, conflicts_with_all = ["x", "y"])]
    load: bool,
    /// Maximum grid size (cells) the oracle may enumerate
    #[arg(long, default_value_t = 49)]
    oracle_limit: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct MixArgs {
    #[command(flatten)]
    seq: SeqArgs,
    /// Total-variation tolerance
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    /// Maximum grid size (cells) the oracle may enumerate
    #[arg(long, default_value_t = 36)]
    oracle_limit: usize,
    /// Emit the distance curve as CSV (t,tv)
    #[arg(long, conflicts_with = "json")]
    csv: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct StabilityArgs {
    /// Lower defect of the compared pair (k versus k+1)
    #[arg(long, default_value_t = 0)]
    k: usize,
    /// First order
    #[arg(long)]
    from: usize,
    /// Last order
    #[arg(long)]
    to: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    out: OutArgs,
}

fn edges_one_indexed(g: &BipartiteRealization) -> Vec<[usize; 2]> {
    g.edges().iter().map(|&(i, j)| [i + 1, j + 1]).collect()
}

fn realization_text(g: &BipartiteRealization) -> String {
    let mut out = String::new();
    for i in 0..g.n_a() {
        let nbrs: Vec<String> = g
            .neighbors_a(i)
            .iter()
            .map(|j| format!("b{}", j + 1))
            .collect();
        out.push_str(&format!("a{}: {}\n", i + 1, nbrs.join(" ")));
    }
    out
}

fn realization_json(g: &BipartiteRealization) -> Value {
    let d = g.degree_sequence();
    json!({
        "degA": d.deg_a,
        "degB": d.deg_b,
        "edges": edges_one_indexed(g),
    })
}

fn vertex_name(v: Vertex) -> String {
    match v {
        Vertex::A(i) => format!("a{}", i + 1),
        Vertex::B(j) => format!("b{}", j + 1),
    }
}

fn flow_json(f: &FlowRep) -> Value {
    let arcs: Vec<Value> = f
        .arcs
        .iter()
        .map(|arc| {
            let (ft, fi) = match arc.from {
                Vertex::A(i) => ("a", i + 1),
                Vertex::B(j) => ("b", j + 1),
            };
            let (tt, ti) = match arc.to {
                Vertex::A(i) => ("a", i + 1),
                Vertex::B(j) => ("b", j + 1),
            };
            json!([ft, fi, tt, ti])
        })
        .collect();
    let mut excess = serde_json::Map::new();
    for (idx, &e) in f.excess.per_a.iter().enumerate() {
        if e != 0 {
            excess.insert(format!("a{}", idx + 1), json!(e));
        }
    }
    for (idx, &e) in f.excess.per_b.iter().enumerate() {
        if e != 0 {
            excess.insert(format!("b{}", idx + 1), json!(e));
        }
    }
    json!({ "n": f.n, "arcs": arcs, "excess": excess })
}

fn state_by_index(
    d: &BipartiteDegreeSequence,
    idx: usize,
    limit: usize,
) -> Result<BipartiteRealization, String> {
    let all = enumerate_realizations_with_limit(d, limit).map_err(|e| e.to_string())?;
    all.get(idx)
        .cloned()
        .ok_or_else(|| format!("state index {idx} out of range ({} states)", all.len()))
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.cmd {
        Command::Sample(a) => {
            let d = a.seq.resolve()?;
            let cfg = ChainConfig {
                seed: a.seed,
                steps: a.steps,
            };
            let outcome = sample(&d, &cfg).map_err(|e| e.to_string())?;
            let text = format!(
                "{}accepted {} of {} moves\n",
                realization_text(&outcome.realization),
                outcome.accepted,
                a.steps
            );
            let mut js = realization_json(&outcome.realization);
            js["steps"] = json!(a.steps);
            js["accepted"] = json!(outcome.accepted);
            js["seed"] = json!(a.seed);
            a.out.emit(text, js)
        }
        Command::Enumerate(a) => {
            let d = a.seq.resolve()?;
            let all =
                enumerate_realizations_with_limit(&d, a.oracle_limit).map_err(|e| e.to_string())?;
            let mut text = format!("{} realizations\n", all.len());
            for g in &all {
                let rows: Vec<String> = (0..g.n_a())
                    .map(|i| {
                        (0..g.n_b())
                            .map(|j| if g.has_edge(i, j) { '1' } else { '0' })
                            .collect()
                    })
                    .collect();
                text.push_str(&rows.join("|"));
                text.push('\n');
            }
            let js = json!({
                "count": all.len(),
                "realizations": all.iter().map(|g| json!(edges_one_indexed(g))).collect::<Vec<_>>(),
            });
            a.out.emit(text, js)
        }
        Command::Count(a) => {
            let count = count_hk_matrix(a.n, a.k).map_err(|e| e.to_string())?;
            let text = format!("{count}\n");
            let js = json!({ "n": a.n, "k": a.k, "count": count.to_string() });
            a.out.emit(text, js)
        }
        Command::Decompose(a) => {
            let d = a.seq.resolve()?;
            let report = decompose(&d);
            let mut text = format!("{} factors\n", report.components.len());
            for (idx, c) in report.components.iter().enumerate() {
                text.push_str(&format!(
                    "factor {}: degA={:?} degB={:?}\n",
                    idx + 1,
                    c.deg_a,
                    c.deg_b
                ));
            }
            let js = serde_json::to_value(&report).map_err(|e| e.to_string())?;
            a.out.emit(text, js)
        }
        Command::Flow(a) => {
            let d = a.seq.resolve()?;
            let g = match &a.edges {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .map_err(|e| format!("reading {}: {e}", path.display()))?;
                    let pairs: Vec<[usize; 2]> =
                        serde_json::from_str(&text).map_err(|e| format!("parsing edges: {e}"))?;
                    let mut zero_based = Vec::with_capacity(pairs.len());
                    for [ai, bj] in pairs {
                        if ai == 0 || bj == 0 || ai > d.n_a() || bj > d.n_b() {
                            return Err(format!("edge [{ai}, {bj}] is out of range"));
                        }
                        zero_based.push((ai - 1, bj - 1));
                    }
                    let g = BipartiteRealization::from_edges(d.n_a(), d.n_b(), &zero_based);
                    if g.degree_sequence() != d {
                        return Err("edges do not realize the given degree sequence".into());
                    }
                    g
                }
                None => greedy_realization(&d).map_err(|e| e.to_string())?,
            };
            let f = flow_representation(&g).map_err(|e| e.to_string())?;
            let mut text = String::new();
            for arc in &f.arcs {
                text.push_str(&format!(
                    "{} -> {}\n",
                    vertex_name(arc.from),
                    vertex_name(arc.to)
                ));
            }
            for (idx, &e) in f.excess.per_a.iter().enumerate() {
                if e != 0 {
                    text.push_str(&format!("excess a{}: {e:+}\n", idx + 1));
                }
            }
            for (idx, &e) in f.excess.per_b.iter().enumerate() {
                if e != 0 {
                    text.push_str(&format!("excess b{}: {e:+}\n", idx + 1));
                }
            }
            a.out.emit(text, flow_json(&f))
        }
        Command::Buffer(a) => {
            if a.start == 0 {
                return Err("--start is 1-based; the first column is 1".into());
            }
            let d = hk_sequence(a.n, a.k.min(a.n));
            if a.k > a.n {
                return Err(format!("defect {} exceeds order {}", a.k, a.n));
            }
            let x = state_by_index(&d, a.x, a.oracle_limit)?;
            let y = state_by_index(&d, a.y, a.oracle_limit)?;
            let i = a.start - 1;
            let t = build_buffer(&x, &y, i, a.width).map_err(|e| e.to_string())?;
            let far = (i + a.width).min(a.n);
            let text = format!(
                "{}window columns {}..{} free; mirrors y before, x after\n",
                realization_text(&t),
                i + 1,
                far
            );
            let mut js = realization_json(&t);
            js["window"] = json!([i + 1, far]);
            a.out.emit(text, js)
        }
        Command::Path(a) => {
            let sys = PathSystem::new(a.n, a.k, a.oracle_limit).map_err(|e| e.to_string())?;
            if a.load {
                let report = sys.measure_load().map_err(|e| e.to_string())?;
                let text = format!(
                    "states {}, pairs {}, max load {:.2}, longest path {}, longest segment {}, distinct encodings {}, congestion bound {:.0}\n{}",
                    report.state_count,
                    report.pair_count,
                    report.max_load,
                    report.max_path_len,
                    report.max_segment,
                    report.distinct_encodings,
                    report.sinclair_tau_quarter,
                    report.to_csv()
                );
                let js = serde_json::to_value(&report).map_err(|e| e.to_string())?;
                return a.out.emit(text, js);
            }
            let x = sys
                .space
                .states
                .get(a.x)
                .ok_or_else(|| format!("state index {} out of range", a.x))?;
            let y = sys
                .space
                .states
                .get(a.y)
                .ok_or_else(|| format!("state index {} out of range", a.y))?;
            let path = sys.canonical_path(x, y).map_err(|e| e.to_string())?;
            let moves: Vec<[usize; 4]> = path.moves.iter().map(|m| m.to_one_indexed()).collect();
            let mut text = format!(
                "{} moves, longest segment {}\n",
                moves.len(),
                path.max_segment
            );
            for m in &moves {
                text.push_str(&format!("a{} a{} b{} b{}\n", m[0], m[1], m[2], m[3]));
            }
            let js = json!({
                "states": path.states.len(),
                "moves": moves,
                "maxSegment": path.max_segment,
            });
            a.out.emit(text, js)
        }
        Command::Mix(a) => {
            let d = a.seq.resolve()?;
            let report = exact_mixing(&d, a.eps, a.oracle_limit).map_err(|e| e.to_string())?;
            let text = if a.csv {
                report.to_csv()
            } else {
                format!(
                    "states {}, tau({}) = {}, spectral gap {:.6}, diameter {}\n",
                    report.state_count,
                    report.eps,
                    report.tau_epsilon,
                    report.spectral_gap,
                    report.diameter
                )
            };
            let js = serde_json::to_value(&report).map_err(|e| e.to_string())?;
            a.out.emit(text, js)
        }
        Command::Stability(a) => {
            let report = stability_probe(a.k, a.from, a.to).map_err(|e| e.to_string())?;
            let js = serde_json::to_value(&report).map_err(|e| e.to_string())?;
            a.out.emit(report.to_csv(), js)
        }
        Command::Check(a) => {
            let outcomes = run_suite();
            let mut text = String::new();
            for o in &outcomes {
                text.push_str(&format!("{o}\n"));
            }
            let js = Value::Array(
                outcomes
                    .iter()
                    .map(|o| json!({ "name": o.name, "passed": o.passed, "detail": o.detail }))
                    .collect(),
            );
            a.out.emit(text, js)?;
            if outcomes.iter().any(|o| !o.passed) {
                return Err("verification suite reported failures".into());
            }
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(msg) = run(cli) {
        eprintln!("error: {msg}");
        std::process::exit(1);
    }
}
