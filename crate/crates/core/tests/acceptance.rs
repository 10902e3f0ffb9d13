//! Acceptance suite: one line per criterion, then a nonzero exit status if
//! any criterion failed. Criteria run one after another to bound memory.

use std::time::{Duration, Instant};

use relhyp::experiments::*;
use relhyp::metric::{Budget, Constants};

struct Line {
    id: usize,
    title: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
}

fn run(id: usize, title: &'static str, limit: Option<Duration>, f: impl FnOnce() -> Vec<Outcome>) -> Line {
    let t = Instant::now();
    let outs = f();
    let elapsed = t.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let mut detail: Vec<String> = outs.iter().map(|o| o.summary.clone()).collect();
    if !in_time {
        detail.push(format!("over the time limit of {:?}", limit.unwrap()));
    }
    let line = Line { id, title, passed: in_time && outs.iter().all(|o| o.passed), detail: detail.join("; "), elapsed };
    println!(
        "{} criterion {:>2} {}: {} ({:.1}s)",
        if line.passed { "PASS" } else { "FAIL" },
        line.id,
        line.title,
        line.detail,
        line.elapsed.as_secs_f64()
    );
    line
}

const SEED: u64 = 20240601;

fn main() {
    let minutes = |m: u64| Some(Duration::from_secs(60 * m));
    let mut lines = Vec::new();
    lines.push(run(1, "horoball metric exactness", minutes(1), || {
        HOROBALL_BASES.iter().map(|b| horoball_metric(b, 8, 500, SEED)).collect()
    }));
    lines.push(run(2, "horoball geodesic shape", None, || {
        HOROBALL_BASES.iter().map(|b| horoball_geodesics(b, 8, 200, SEED)).collect()
    }));
    lines.push(run(3, "horoball isoperimetric constant", None, || {
        HOROBALL_BASES.iter().map(|b| horoball_isoperimetry(b, 8, 200, SEED)).collect()
    }));
    lines.push(run(4, "horoball hyperbolicity", minutes(5), || {
        let budget = Budget { exhaustive_below: 150, samples: 10_000, seed: SEED };
        HOROBALL_BASES.iter().map(|b| horoball_thinness(b, 8, budget)).collect()
    }));
    lines.push(run(5, "Mineyev bicombing", minutes(5), || {
        bicombing_graphs().iter().map(|(name, g)| bicombing_checks(name, g)).collect()
    }));
    lines.push(run(6, "chain decomposition coherence", None, || vec![chain_decomposition(100, SEED)]));
    lines.push(run(7, "preferred paths", None, || {
        let dhat = free_group_delta(3, 6, 2, Budget { exhaustive_below: 150, samples: 2_000, seed: SEED });
        let c = Constants::from_measured(&dhat);
        vec![preferred_quasigeodesics(c, 2, 100, 30, SEED)]
    }));
    lines.push(run(8, "family axioms", None, || vec![axioms_curated(Constants::explicit(1, 2, 4, 6))]));
    lines.push(run(9, "skeleton combinatorics", None, || vec![skeleton_curated(Constants::theoretical(3), 2)]));
    lines.push(run(10, "q-bicombing thick defect", None, || {
        vec![thick_defect(Constants::explicit(1, 2, 4, 6), 3, [2, 3], 30, SEED)]
    }));
    lines.push(run(11, "triangle family", minutes(10), || {
        vec![triangle_family(10, Budget { exhaustive_below: 150, samples: 2_000, seed: SEED })]
    }));
    lines.push(run(12, "filling injectivity", None, || vec![filling_injectivity(&[8, 12], 24)]));
    lines.push(run(13, "surgered space", None, || vec![surgered_shell(&[(4, 3), (8, 5)])]));
    let failed: Vec<usize> = lines.iter().filter(|l| !l.passed).map(|l| l.id).collect();
    println!("{} of {} criteria passed", lines.len() - failed.len(), lines.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
