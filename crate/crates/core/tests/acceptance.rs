//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use genus_iso::cycles::IsolationReport;
use genus_iso::{
    verify_isolation, CombinedWeight, CoverCase, GenusGrid, LabeledGraph, MatchingOracle, OracleError, SchemaWord,
    DEFAULT_MAX_CYCLES,
};
use num_bigint::BigInt;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SEEDS: u64 = 200;
const DENSITIES: [f64; 3] = [0.3, 0.6, 1.0];
const SMALL: usize = 24;

struct Line {
    ok: bool,
    text: String,
}

fn line(ok: bool, n: usize, name: &str, detail: String) -> Line {
    Line { ok, text: format!("{} criterion {n} {name}: {detail}", if ok { "PASS" } else { "FAIL" }) }
}

/// Report of a run that may have stopped at the cap.
fn isolation(grid: &GenusGrid, w: &CombinedWeight) -> IsolationReport {
    match verify_isolation(grid, w, DEFAULT_MAX_CYCLES) {
        Ok(r) => r,
        Err(OracleError::BudgetExceeded { partial: Some(r), .. }) => *r,
        Err(e) => panic!("unexpected oracle error {e}"),
    }
}

struct SmallCheck {
    unique_min: bool,
    enumerator_agrees: bool,
    unit_coefficient: bool,
}

/// Brute-force checks for criteria 2 and 3.
fn small_checks(grid: &GenusGrid, w: &CombinedWeight) -> SmallCheck {
    let g = grid.graph();
    let pms = common::perfect_matchings(g);
    let totals: Vec<BigInt> = pms.iter().map(|m| m.iter().map(|&e| w.value(e)).sum()).collect();
    let unique_min = match totals.iter().min() {
        Some(min) => totals.iter().filter(|t| *t == min).count() == 1,
        None => true,
    };
    let o = MatchingOracle::new(g, w.values()).unwrap();
    let colors = g.two_coloring().unwrap();
    let mut expect: BTreeMap<BigInt, i64> = BTreeMap::new();
    for m in &pms {
        let k: BigInt = m.iter().map(|&e| &o.shifted_weights()[e]).sum();
        *expect.entry(k).or_default() += common::leibniz_sign(g, &colors, m);
    }
    expect.retain(|_, c| *c != 0);
    let got: Option<BTreeMap<BigInt, i64>> =
        o.weight_enumerator().map(|e| e.poly().terms().map(|(k, c)| (k.clone(), i64::try_from(c).unwrap())).collect());
    let enumerator_agrees = match &got {
        Some(got) => *got == expect && o.has_pm() == !pms.is_empty(),
        None => pms.is_empty(),
    };
    let unit_coefficient = pms.is_empty()
        || o.weight_enumerator().and_then(|e| e.min_coefficient()).is_some_and(|c| c.abs() == BigInt::from(1));
    SmallCheck { unique_min, enumerator_agrees, unit_coefficient }
}

struct Run {
    checked: u64,
    capped: bool,
    zero: usize,
    alternation: (u64, u64),
    weight_lemma: (u64, u64),
    small: Option<SmallCheck>,
}

fn criteria_1_to_3_and_5() -> Vec<Line> {
    let mut jobs = Vec::new();
    for g in 1..=2usize {
        for m in 2..=6usize {
            // Four segments per handle need m >= g + 1.
            if m < g + 1 {
                continue;
            }
            for seed in 0..SEEDS {
                for d in DENSITIES {
                    jobs.push((g, m, seed, d));
                }
            }
        }
    }
    let runs: Vec<Run> = jobs
        .par_iter()
        .map(|&(g, m, seed, d)| {
            let grid = GenusGrid::from_seed(g, m, seed, d, true).unwrap();
            let w = CombinedWeight::new(&grid);
            let r = isolation(&grid, &w);
            Run {
                checked: r.cycles_checked,
                capped: !r.complete,
                zero: r.failures.len(),
                alternation: (r.alternation.checked, r.alternation.failed),
                weight_lemma: (r.weight_lemma.checked, r.weight_lemma.failed),
                small: (grid.vertex_count() <= SMALL).then(|| small_checks(&grid, &w)),
            }
        })
        .collect();

    let checked: u64 = runs.iter().map(|r| r.checked).sum();
    let capped = runs.iter().filter(|r| r.capped).count();
    let zero: usize = runs.iter().map(|r| r.zero).sum();
    let c1 = line(
        zero == 0,
        1,
        "isolation",
        format!(
            "{} instances, {checked} cycles, {zero} with zero circulation, {capped} stopped at the {} cycle cap",
            runs.len(),
            DEFAULT_MAX_CYCLES
        ),
    );

    let small: Vec<&SmallCheck> = runs.iter().filter_map(|r| r.small.as_ref()).collect();
    let not_unique = small.iter().filter(|s| !s.unique_min).count();
    let c2 = line(
        !small.is_empty() && not_unique == 0,
        2,
        "unique minimum matching",
        format!("{} instances with at most {SMALL} vertices, {not_unique} with a tied minimum", small.len()),
    );
    let disagree = small.iter().filter(|s| !s.enumerator_agrees).count();
    let bad_coeff = small.iter().filter(|s| !s.unit_coefficient).count();
    let c3 = line(
        !small.is_empty() && disagree == 0 && bad_coeff == 0,
        3,
        "oracle equivalence",
        format!(
            "{} instances, {disagree} enumerator mismatches, {bad_coeff} minimal coefficients of magnitude other than 1",
            small.len()
        ),
    );

    let (alt_c, alt_f) = runs.iter().fold((0, 0), |a, r| (a.0 + r.alternation.0, a.1 + r.alternation.1));
    let (wl_c, wl_f) = runs.iter().fold((0, 0), |a, r| (a.0 + r.weight_lemma.0, a.1 + r.weight_lemma.1));
    let c5 = line(
        alt_f == 0 && wl_f == 0 && alt_c > 0 && wl_c > 0,
        5,
        "alternation and weight lemma",
        format!("alternation {alt_c} checked / {alt_f} failed, weight lemma {wl_c} checked / {wl_f} failed"),
    );
    vec![c1, c2, c3, c5]
}

fn criterion_4() -> Line {
    let mut jobs = Vec::new();
    let mut seed = 0u64;
    while jobs.len() < 200 {
        let g = 1 + (seed % 2) as usize;
        let m = g + 1 + (seed / 2 % 2) as usize;
        let d = DENSITIES[(seed / 4 % 3) as usize];
        let grid = GenusGrid::from_seed(g, m, 10_000 + seed, d, true).unwrap();
        if grid.vertex_count() <= 32 {
            jobs.push(grid);
        }
        seed += 1;
    }
    // PM-free and multi-matching cases for the uniqueness mapping.
    let extra: Vec<GenusGrid> = (0..100)
        .map(|s| GenusGrid::from_seed(1, 2, 20_000 + s, 0.6, false).unwrap())
        .filter(|g| g.vertex_count() <= 32)
        .collect();
    let wrong_construct = jobs
        .par_iter()
        .filter(|grid| {
            let w = CombinedWeight::new(grid);
            let o = MatchingOracle::new(grid.graph(), w.values()).unwrap();
            let pms = common::perfect_matchings(grid.graph());
            let total = |m: &Vec<usize>| m.iter().map(|&e| w.value(e)).sum::<BigInt>();
            let best = pms.iter().min_by_key(|m| total(m));
            let got = o.construct_pm().unwrap();
            match (best, got) {
                (Some(b), Some(got)) => got.edges != *b || got.weight != total(b),
                _ => true,
            }
        })
        .count();
    let mut counts = [0usize; 3];
    let wrong_unique = jobs
        .par_iter()
        .chain(extra.par_iter())
        .map(|grid| {
            let w = CombinedWeight::new(grid);
            let o = MatchingOracle::new(grid.graph(), w.values()).unwrap();
            let k = common::perfect_matchings(grid.graph()).len();
            (k.min(2), o.is_unique_pm() != (k == 1))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .inspect(|(k, _)| counts[*k] += 1)
        .filter(|(_, wrong)| *wrong)
        .count();
    line(
        wrong_construct == 0 && wrong_unique == 0,
        4,
        "construction",
        format!(
            "{} PM-positive instances, {wrong_construct} constructions differ from brute force; uniqueness over {}/{}/{} instances with 0/1/>1 matchings, {wrong_unique} wrong",
            jobs.len(),
            counts[0],
            counts[1],
            counts[2]
        ),
    )
}

fn criterion_6() -> Line {
    let bad: Vec<String> = (0..1000u64)
        .into_par_iter()
        .filter_map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let labels = rng.gen_range(1..=16);
            let start = SchemaWord::random(&mut rng, labels);
            let inv = common::invariants_oracle(&start);
            let (out, trace) = start.normalize();
            let steps_ok = trace.iter().all(|s| common::invariants_oracle(&s.word) == inv);
            let ok = steps_ok && out.is_normal_form().is_some() && common::invariants_oracle(&out) == inv;
            (!ok).then(|| start.to_string())
        })
        .collect();
    line(
        bad.is_empty(),
        6,
        "schema normalization",
        format!(
            "1000 words, {} failed{}",
            bad.len(),
            bad.first().map(|w| format!(" (first: {w})")).unwrap_or_default()
        ),
    )
}

fn is_pm(g: &genus_iso::UGraph, m: &[usize]) -> bool {
    let mut hit = vec![0u8; g.vertex_count()];
    for &e in m {
        let (a, b) = g.edge(e);
        hit[a] += 1;
        hit[b] += 1;
    }
    hit.iter().all(|&k| k == 1)
}

fn criterion_7() -> Line {
    let results: Vec<(bool, bool, usize)> = (0..200u64)
        .into_par_iter()
        .map(|seed| {
            let case = if seed % 2 == 0 { CoverCase::Klein } else { CoverCase::Projective };
            let g = LabeledGraph::random(&mut ChaCha8Rng::seed_from_u64(seed), case, 20);
            let d = g.double();
            let base = common::perfect_matchings(g.graph());
            let up = common::perfect_matchings(d.graph());
            let existence =
                g.has_pm() == d.has_pm() && base.is_empty() == up.is_empty() && g.has_pm() == !base.is_empty();
            let round_trip =
                base.iter().all(|m| g.lift_matching(m).is_ok_and(|l| g.project_matching(&l).as_ref() == Ok(m)));
            let projected = up.iter().all(|m| g.project_matching(m).is_ok_and(|p| is_pm(g.graph(), &p)));
            (existence, round_trip && projected, up.len())
        })
        .collect();
    let existence = results.iter().filter(|r| !r.0).count();
    let matchings = results.iter().filter(|r| !r.1).count();
    let lifted: usize = results.iter().map(|r| r.2).sum();
    line(
        existence == 0 && matchings == 0,
        7,
        "doubling",
        format!(
            "200 graphs, {existence} existence mismatches, {matchings} lift/projection failures over {lifted} matchings of the doubled graphs"
        ),
    )
}

fn criterion_8() -> Line {
    let jobs: Vec<(u64, u64)> = (0..50u64).flat_map(|i| (0..10u64).map(move |k| (i, k))).collect();
    let results: Vec<(usize, bool)> = jobs
        .par_iter()
        .map(|&(i, k)| {
            let g = 1 + (i % 2) as usize;
            let m = g + 1 + (i / 2 % 3) as usize;
            let grid = GenusGrid::from_seed(g, m, 30_000 + i, 0.6, true).unwrap();
            let w = CombinedWeight::new(&grid);
            let mut rng = ChaCha8Rng::seed_from_u64(i * 1000 + k);
            let p = rng.gen_range(0.05..0.5);
            let removed: Vec<usize> = (0..grid.edge_count()).filter(|_| rng.gen_bool(p)).collect();
            let kept: Vec<usize> = (0..grid.edge_count()).filter(|e| !removed.contains(e)).collect();
            let h = grid.without_edges(&removed);
            let wr = w.restrict(&kept);
            let same_w = kept.iter().enumerate().all(|(new, &old)| wr.value(new) == w.value(old))
                && h.edges().iter().zip(&kept).all(|(a, &old)| a == grid.edge(old));
            let r = isolation(&h, &wr);
            (r.failures.len(), same_w)
        })
        .collect();
    let zero: usize = results.iter().map(|r| r.0).sum();
    let moved = results.iter().filter(|r| !r.1).count();
    line(
        zero == 0 && moved == 0,
        8,
        "subgraph stability",
        format!("500 subgraphs, {zero} zero circulations, {moved} with altered weights"),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut lines = criteria_1_to_3_and_5();
    lines.push(criterion_4());
    lines.push(criterion_6());
    lines.push(criterion_7());
    lines.push(criterion_8());
    lines.sort_by_key(|l| l.text.split(' ').nth(2).and_then(|n| n.parse::<u32>().ok()));
    for l in &lines {
        println!("{}", l.text);
    }
    println!("acceptance finished in {:.0} s", start.elapsed().as_secs_f64());
    if lines.iter().all(|l| l.ok) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
