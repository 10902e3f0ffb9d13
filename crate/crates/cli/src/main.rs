//! Batch driver for the relhyp experiment suites.
//!
//! Every run writes `<out-dir>/<experiment>/<suite>.csv` and
//! `<out-dir>/<experiment>/summary.json`. Outputs depend only on the
//! configuration, so reruns are byte-identical. The exit status is nonzero
//! when any suite reports a violation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use relhyp::cusped::CuspedBall;
use relhyp::experiments::{self as ex, Outcome};
use relhyp::filling::{build_surgered, fill, injectivity_check, quotient_delta, quotient_growth, shell_check, survival_check, Finiteness};
use relhyp::graph::{Distances, VertexId};
use relhyp::horoball::HoroballGraph;
use relhyp::metric::{delta_fourpoint, delta_thin, Budget, Constants};
use relhyp::oracle::GroupOracle;
use relhyp::preferred::Geometry;
use relhyp::presentation::{parse_manifest, FillingKernel, RelativePresentation};
use relhyp::word::Word;

#[derive(Parser)]
#[command(name = "relhyp", about = "Experiments on relatively hyperbolic groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Presentation or filling manifest file.
    #[arg(long)]
    presentation: Option<PathBuf>,
    /// Cayley radius of the ball.
    #[arg(long)]
    radius: Option<usize>,
    /// Truncation depth of the horoballs.
    #[arg(long)]
    depth: Option<u32>,
    /// Theoretical constants from this `δ`.
    #[arg(long, conflicts_with = "constants")]
    delta: Option<u32>,
    /// Explicit constants `δ,K,L1,L2`.
    #[arg(long)]
    constants: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Vertex cap for every ball built.
    #[arg(long, default_value_t = 2_000_000)]
    max_vertices: usize,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Debug)]
enum Suite {
    All,
    // horoball
    Metric,
    Geodesics,
    Fill,
    Delta,
    // bicombing
    Bicombing,
    Decomposition,
    // preferred
    Quasigeodesic,
    Axioms,
    Skeleton,
    Defect,
    // fill
    Triangle,
    Injectivity,
    Survival,
    Shell,
}

impl Suite {
    fn wants(self, s: Suite) -> bool {
        self == Suite::All || self == s
    }
}

#[derive(Subcommand)]
enum Command {
    /// Combinatorial horoball suites.
    Horoball {
        #[command(flatten)]
        common: Common,
        /// Base graph: `cycle:N`, `path:N` or `grid:WxH`; all three defaults when omitted.
        #[arg(long)]
        base: Option<String>,
        /// Print the explicit truncation in `v w k kind` form and exit.
        #[arg(long)]
        dump: bool,
    },
    /// Cusped ball construction and hyperbolicity estimates.
    Cusped {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dump: bool,
    },
    /// Homological bicombing and chain decomposition suites.
    Bicombing {
        #[command(flatten)]
        common: Common,
    },
    /// Preferred paths, axioms, skeletons and the thick defect.
    Preferred {
        #[command(flatten)]
        common: Common,
        /// A single pair of Cayley words, `w1,w2`.
        #[arg(long)]
        pair: Option<String>,
    },
    /// Dehn filling experiments.
    Fill {
        #[command(flatten)]
        common: Common,
        /// Kernel exponents, one per rank-one parabolic.
        #[arg(long, value_delimiter = ',')]
        slopes: Option<Vec<i64>>,
        /// Word-length bound for the injectivity check.
        #[arg(long, default_value_t = 24)]
        bound: u64,
    },
    /// Every acceptance suite with its default configuration.
    All {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
}

#[derive(Serialize)]
struct SuiteSummary {
    suite: String,
    passed: bool,
    rows: usize,
    summary: String,
}

#[derive(Serialize)]
struct Summary {
    experiment: String,
    config: serde_json::Value,
    passed: bool,
    suites: Vec<SuiteSummary>,
}

fn write_outputs(out_dir: &Path, experiment: &str, config: serde_json::Value, seed: u64, outcomes: &[Outcome]) -> Result<bool> {
    let dir = out_dir.join(experiment);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut suites = Vec::new();
    for o in outcomes {
        let path = dir.join(format!("{}.csv", o.name));
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        let mut header = vec!["seed".to_string()];
        header.extend(o.table.header.iter().cloned());
        w.write_record(&header)?;
        for r in &o.table.rows {
            let mut rec = vec![seed.to_string()];
            rec.extend(r.iter().cloned());
            w.write_record(&rec)?;
        }
        w.flush()?;
        println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.summary);
        suites.push(SuiteSummary { suite: o.name.clone(), passed: o.passed, rows: o.table.rows.len(), summary: o.summary.clone() });
    }
    let passed = suites.iter().all(|s| s.passed);
    let summary = Summary { experiment: experiment.to_string(), config, passed, suites };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(passed)
}

/// Constants from `--delta` or `--constants`, falling back to `default`.
fn constants(c: &Common, default: Constants) -> Result<Constants> {
    if let Some(d) = c.delta {
        return Ok(Constants::theoretical(d));
    }
    match &c.constants {
        None => Ok(default),
        Some(s) => {
            let v: Vec<u32> = s.split(',').map(|x| x.trim().parse()).collect::<Result<_, _>>().context("constants must be δ,K,L1,L2")?;
            if v.len() != 4 {
                bail!("constants must be δ,K,L1,L2");
            }
            Ok(Constants::explicit(v[0], v[1], v[2], v[3]))
        }
    }
}

fn read_manifest(c: &Common) -> Result<Option<(RelativePresentation, Vec<FillingKernel>)>> {
    let Some(p) = &c.presentation else { return Ok(None) };
    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    Ok(Some(parse_manifest(&text)?))
}

fn base_config(c: &Common) -> serde_json::Value {
    serde_json::json!({
        "presentation": c.presentation.as_ref().map(|p| p.display().to_string()),
        "radius": c.radius,
        "depth": c.depth,
        "delta": c.delta,
        "constants": c.constants,
        "seed": c.seed,
        "suite": format!("{:?}", c.suite),
        "max_vertices": c.max_vertices,
    })
}

fn cmd_horoball(c: &Common, base: Option<String>, dump: bool) -> Result<bool> {
    let depth = c.depth.unwrap_or(8);
    if dump {
        let spec = base.as_deref().unwrap_or("path:3");
        let b = ex::parse_base(spec).with_context(|| format!("unknown base {spec}"))?;
        print!("{}", HoroballGraph::build(b, depth).to_text());
        return Ok(true);
    }
    let bases: Vec<String> = match base {
        Some(b) => {
            ex::parse_base(&b).with_context(|| format!("unknown base {b}"))?;
            vec![b]
        }
        None => ex::HOROBALL_BASES.iter().map(|s| s.to_string()).collect(),
    };
    let mut outs = Vec::new();
    let budget = Budget { exhaustive_below: 150, samples: 10_000, seed: c.seed };
    let merge = |name: &str, parts: Vec<Outcome>| merge_outcomes(name, parts);
    if c.suite.wants(Suite::Metric) {
        outs.push(merge("horoball-metric", bases.iter().map(|b| ex::horoball_metric(b, depth, 500, c.seed)).collect()));
    }
    if c.suite.wants(Suite::Geodesics) {
        outs.push(merge("horoball-geodesics", bases.iter().map(|b| ex::horoball_geodesics(b, depth, 200, c.seed)).collect()));
    }
    if c.suite.wants(Suite::Fill) {
        outs.push(merge("horoball-isoperimetry", bases.iter().map(|b| ex::horoball_isoperimetry(b, depth, 200, c.seed)).collect()));
    }
    if c.suite.wants(Suite::Delta) {
        outs.push(merge("horoball-thinness", bases.iter().map(|b| ex::horoball_thinness(b, depth, budget)).collect()));
    }
    let mut cfg = base_config(c);
    cfg["bases"] = serde_json::json!(bases);
    cfg["depth"] = serde_json::json!(depth);
    write_outputs(&c.out_dir, "horoball", cfg, c.seed, &outs)
}

/// Concatenates the tables of several runs of one suite.
fn merge_outcomes(name: &str, parts: Vec<Outcome>) -> Outcome {
    let mut out = Outcome { name: name.to_string(), passed: true, summary: String::new(), table: Default::default() };
    let mut summaries = Vec::new();
    for p in parts {
        out.passed &= p.passed;
        summaries.push(p.summary);
        out.table.header = p.table.header;
        out.table.rows.extend(p.table.rows);
    }
    out.summary = summaries.join("; ");
    out
}

fn cmd_cusped(c: &Common, dump: bool) -> Result<bool> {
    let rp = read_manifest(c)?.map(|m| m.0).unwrap_or_else(ex::free_group_rel_generators);
    let radius = c.radius.unwrap_or(2);
    let depth = c.depth.unwrap_or(6);
    let o = GroupOracle::for_presentation(&rp);
    let b = CuspedBall::build(&o, &rp, radius, depth, c.max_vertices)?;
    if dump {
        print!("{}", b.to_text());
        return Ok(true);
    }
    let dist = Distances::new(&b.graph);
    let inner_radius = radius.saturating_sub(1).max(1).min(radius);
    let inner: Vec<VertexId> = b.inner(inner_radius).into_iter().filter(|&v| b.depth_of(v) < depth).collect();
    let budget = Budget { exhaustive_below: 150, samples: 2_000, seed: c.seed };
    let thin = delta_thin(&dist, &inner, budget);
    let four = delta_fourpoint(&dist, &inner, budget);
    let measured = Constants::from_measured(&thin.value);
    let mut t = ex::Table::default();
    t.header = ["group", "radius", "depth", "vertices", "edges", "cosets", "inner", "delta_thin", "delta_fourpoint", "samples", "theoretical_K", "theoretical_L1", "theoretical_L2"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    t.rows.push(vec![
        rp.name.clone(),
        radius.to_string(),
        depth.to_string(),
        b.len().to_string(),
        b.graph.edge_count().to_string(),
        b.cosets.len().to_string(),
        inner.len().to_string(),
        thin.value.to_string(),
        four.value.to_string(),
        thin.samples.to_string(),
        measured.k.to_string(),
        measured.l1.to_string(),
        measured.l2.to_string(),
    ]);
    let connected = b.graph.is_connected();
    let o = Outcome {
        name: "cusped".into(),
        passed: connected,
        summary: format!("{} vertices, thin {} four-point {}, connected {connected}", b.len(), thin.value, four.value),
        table: t,
    };
    write_outputs(&c.out_dir, "cusped", base_config(c), c.seed, &[o])
}

fn cmd_bicombing(c: &Common) -> Result<bool> {
    let mut outs = Vec::new();
    if c.suite.wants(Suite::Bicombing) {
        let graphs = match read_manifest(c)? {
            Some((rp, _)) => {
                let o = GroupOracle::for_presentation(&rp);
                let b = CuspedBall::build(&o, &rp, c.radius.unwrap_or(2), c.depth.unwrap_or(3), c.max_vertices)?;
                vec![(rp.name.clone(), b.graph.clone())]
            }
            None => ex::bicombing_graphs(),
        };
        outs.push(merge_outcomes("bicombing", graphs.iter().map(|(n, g)| ex::bicombing_checks(n, g)).collect()));
    }
    if c.suite.wants(Suite::Decomposition) {
        outs.push(ex::chain_decomposition(100, c.seed));
    }
    write_outputs(&c.out_dir, "bicombing", base_config(c), c.seed, &outs)
}

fn cmd_preferred(c: &Common, pair: Option<String>) -> Result<bool> {
    if let Some(pair) = pair {
        return preferred_pair(c, &pair);
    }
    let mut outs = Vec::new();
    let mut cfg = base_config(c);
    if c.suite.wants(Suite::Quasigeodesic) {
        let budget = Budget { exhaustive_below: 150, samples: 2_000, seed: c.seed };
        let qc = match (c.delta, &c.constants) {
            (None, None) => Constants::from_measured(&ex::free_group_delta(3, 6, 2, budget)),
            _ => constants(c, Constants::theoretical(3))?,
        };
        cfg["quasigeodesic_constants"] = serde_json::to_value(qc)?;
        outs.push(ex::preferred_quasigeodesics(qc, c.radius.unwrap_or(2), 100, 30, c.seed));
    }
    let small = constants(c, Constants::explicit(1, 2, 4, 6))?;
    if c.suite.wants(Suite::Axioms) {
        outs.push(ex::axioms_curated(small));
    }
    if c.suite.wants(Suite::Skeleton) {
        outs.push(ex::skeleton_curated(constants(c, Constants::theoretical(3))?, c.radius.unwrap_or(2)));
    }
    if c.suite.wants(Suite::Defect) {
        outs.push(ex::thick_defect(small, 3, [2, 3], 30, c.seed));
    }
    write_outputs(&c.out_dir, "preferred", cfg, c.seed, &outs)
}

fn preferred_pair(c: &Common, pair: &str) -> Result<bool> {
    let rp = read_manifest(c)?.map(|m| m.0).unwrap_or_else(ex::free_group_rel_generators);
    let (x, y) = pair.split_once(',').context("pair must be w1,w2")?;
    let o = GroupOracle::for_presentation(&rp);
    let (x, y) = (o.normal_form(&rp.parse_word(x.trim())?)?, o.normal_form(&rp.parse_word(y.trim())?)?);
    let k = constants(c, Constants::explicit(1, 2, 4, 6))?;
    let radius = c.radius.unwrap_or(x.len().max(y.len()));
    let depth = c.depth.unwrap_or(k.l2 + k.l1 + 8);
    let b = CuspedBall::build(&o, &rp, radius, depth, c.max_vertices)?;
    let geo = Geometry::new(&b, k, radius);
    let (a, z) = (b.cayley_vertex(&x).context("first word outside the ball")?, b.cayley_vertex(&y).context("second word outside the ball")?);
    let f = geo.family_ck(a, z)?;
    let p = geo.preferred_path(a, z, &f.members)?;
    let q = geo.quasigeodesic_check(&p)?;
    let mut t = ex::Table::default();
    t.header = ["a", "b", "distance", "length", "length_bound", "hausdorff", "hausdorff_bound", "family", "path", "ok"].iter().map(|s| s.to_string()).collect();
    let path: Vec<String> = p.vertices.iter().map(|&v| b.label(v)).collect();
    let fam: Vec<String> = f.members.iter().map(|&ci| b.cosets[ci].id.to_string()).collect();
    t.rows.push(vec![
        rp.show(&x),
        rp.show(&y),
        q.distance.to_string(),
        q.length.to_string(),
        q.length_bound.to_string(),
        q.hausdorff.to_string(),
        q.hausdorff_bound.to_string(),
        fam.join(" "),
        path.join(" "),
        q.ok().to_string(),
    ]);
    let o = Outcome {
        name: "pair".into(),
        passed: q.ok(),
        summary: format!("length {} at distance {}, Hausdorff {} (bounds {} and {})", q.length, q.distance, q.hausdorff, q.length_bound, q.hausdorff_bound),
        table: t,
    };
    write_outputs(&c.out_dir, "preferred", base_config(c), c.seed, &[o])
}

fn cmd_fill(c: &Common, slopes: Option<Vec<i64>>, bound: u64) -> Result<bool> {
    let (rp, mut kernels) = match read_manifest(c)? {
        Some(m) => m,
        None => {
            let rp = relhyp::filling::thrice_punctured_sphere();
            let ks = rp.parabolics.iter().map(|p| FillingKernel::trivial(p.id)).collect();
            (rp, ks)
        }
    };
    if let Some(s) = &slopes {
        if s.len() != rp.parabolics.len() {
            bail!("{} slopes given for {} parabolics", s.len(), rp.parabolics.len());
        }
        kernels = rp
            .parabolics
            .iter()
            .zip(s)
            .map(|(p, &n)| {
                if p.generators.len() != 1 {
                    bail!("--slopes needs rank-one parabolics; use fill lines for parabolic {}", p.id);
                }
                Ok(if n == 0 { FillingKernel::trivial(p.id) } else { FillingKernel::word(p.id, Word::power(p.generators[0], n)) })
            })
            .collect::<Result<_>>()?;
    }
    let k = constants(c, Constants::theoretical(1))?;
    let fs = fill(&rp, &kernels, &k, 1 << 20)?;
    let radius = c.radius.unwrap_or(10);
    let budget = Budget { exhaustive_below: 150, samples: 2_000, seed: c.seed };
    let slope_text: Vec<String> = fs.slopes.iter().map(|s| s.to_string()).collect();
    let slope_text = slope_text.join(" ");
    let mut outs = Vec::new();
    if c.suite.wants(Suite::Triangle) {
        let q = quotient_growth(&fs, radius, c.max_vertices, budget)?;
        let verdict = match &q.finiteness {
            Finiteness::Finite { order } => format!("finite, order {order}"),
            Finiteness::GrowingTo { radius } => format!("growing to radius {radius}"),
            Finiteness::Inconclusive => "inconclusive".into(),
            Finiteness::Undecided => "undecided: completion did not finish".into(),
        };
        let mut t = ex::Table::default();
        t.header = ["slopes", "threshold_theoretical", "threshold_configured", "clears_threshold", "verdict", "ball_sizes", "delta_thin", "rules"].iter().map(|s| s.to_string()).collect();
        let sizes: Vec<String> = q.ball_sizes.iter().map(|s| s.to_string()).collect();
        t.rows.push(vec![
            slope_text.clone(),
            fs.threshold.theoretical.clone(),
            fs.threshold.configured.clone(),
            fs.clears_threshold().to_string(),
            verdict.clone(),
            sizes.join(" "),
            q.delta_hat.map(|d| d.to_string()).unwrap_or_default(),
            q.rules.map(|r| r.to_string()).unwrap_or_default(),
        ]);
        let flag = if fs.clears_threshold() { "" } else { " (below the slope threshold)" };
        outs.push(Outcome { name: "quotient".into(), passed: q.finiteness != Finiteness::Undecided, summary: format!("{verdict}{flag}"), table: t });
    }
    if c.suite.wants(Suite::Injectivity) {
        let rep = injectivity_check(&fs, bound)?;
        let mut t = ex::Table::default();
        t.header = ["slopes", "parabolic", "elements_checked", "failures", "intersections", "threshold_met"].iter().map(|s| s.to_string()).collect();
        for (i, n) in rep.checked.iter().enumerate() {
            t.rows.push(vec![
                slope_text.clone(),
                rp.parabolics[i].id.to_string(),
                n.to_string(),
                rep.failures.len().to_string(),
                rep.intersections.len().to_string(),
                rep.threshold_met.to_string(),
            ]);
        }
        let note = if rep.threshold_met { "" } else { "; threshold not met, agreement is empirical" };
        outs.push(Outcome {
            name: "injectivity".into(),
            passed: rep.passed(),
            summary: format!("{} failures, {} intersections{note}", rep.failures.len(), rep.intersections.len()),
            table: t,
        });
    }
    if c.suite.wants(Suite::Survival) {
        let base = GroupOracle::for_presentation(&fs.base);
        let words = relhyp::oracle::cayley_ball(&base, 2, c.max_vertices)?.elements;
        let rep = survival_check(&fs, &words)?;
        let mut t = ex::Table::default();
        t.header = ["slopes", "words", "expected_identifications", "unexpected_identifications"].iter().map(|s| s.to_string()).collect();
        t.rows.push(vec![slope_text.clone(), rep.size.to_string(), rep.expected.len().to_string(), rep.unexpected.len().to_string()]);
        outs.push(Outcome {
            name: "survival".into(),
            passed: true,
            summary: format!("{} words of the radius-2 ball: {} expected and {} unexpected identifications", rep.size, rep.expected.len(), rep.unexpected.len()),
            table: t,
        });
    }
    if c.suite.wants(Suite::Shell) && !fs.is_trivial() && fs.quotient_oracle().is_ok() {
        let min = match fs.min_slope() {
            relhyp::presentation::SlopeLength::Finite(n) => n as i64,
            relhyp::presentation::SlopeLength::Infinite => i64::MAX,
        };
        let shell = ex::desk_shell_depth(min);
        let r = c.radius.unwrap_or(3).min(4);
        let ss = build_surgered(&fs, r, shell + 1, c.max_vertices)?;
        let rep = shell_check(&ss, shell);
        let qd = quotient_delta(&ss, 1, budget, 5);
        let mut t = ex::Table::default();
        t.header = ["slopes", "radius", "shell_depth", "vertices", "cosets_checked", "mismatches", "self_loops", "delta_thin", "area_ratio"].iter().map(|s| s.to_string()).collect();
        t.rows.push(vec![
            slope_text.clone(),
            r.to_string(),
            shell.to_string(),
            ss.ball.len().to_string(),
            rep.cosets_checked.to_string(),
            rep.mismatches.to_string(),
            rep.self_loops.to_string(),
            qd.delta_hat.to_string(),
            qd.area_ratio.map(|x| x.to_string()).unwrap_or_default(),
        ]);
        outs.push(Outcome {
            name: "shell".into(),
            passed: rep.mismatches == 0 && rep.self_loops == 0,
            summary: format!("{} cosets, {} mismatches at shell depth {shell}, surgered thin constant {}", rep.cosets_checked, rep.mismatches, qd.delta_hat),
            table: t,
        });
    }
    let mut cfg = base_config(c);
    cfg["slopes"] = serde_json::json!(slope_text);
    cfg["bound"] = serde_json::json!(bound);
    write_outputs(&c.out_dir, "fill", cfg, c.seed, &outs)
}

fn cmd_all(seed: u64, out_dir: PathBuf) -> Result<bool> {
    let common = |suite| Common {
        presentation: None,
        radius: None,
        depth: None,
        delta: None,
        constants: None,
        seed,
        suite,
        out_dir: out_dir.clone(),
        max_vertices: 5_000_000,
    };
    let mut ok = cmd_horoball(&common(Suite::All), None, false)?;
    ok &= cmd_bicombing(&common(Suite::All))?;
    ok &= cmd_preferred(&common(Suite::All), None)?;
    let budget = Budget { exhaustive_below: 150, samples: 2_000, seed };
    let outs = vec![ex::triangle_family(10, budget), ex::filling_injectivity(&[8, 12], 24), ex::surgered_shell(&[(4, 3), (8, 5)])];
    ok &= write_outputs(&out_dir, "fill", serde_json::json!({ "seed": seed }), seed, &outs)?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.command {
        Command::Horoball { common, base, dump } => cmd_horoball(&common, base, dump),
        Command::Cusped { common, dump } => cmd_cusped(&common, dump),
        Command::Bicombing { common } => cmd_bicombing(&common),
        Command::Preferred { common, pair } => cmd_preferred(&common, pair),
        Command::Fill { common, slopes, bound } => cmd_fill(&common, slopes, bound),
        Command::All { seed, out_dir } => cmd_all(seed, out_dir),
    };
    match r {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
