//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankset::ident::check_membership_matrix;
use rankset::inference::{stream_rng, ExactNullDistribution, ExactOptions, PreparedTest, Tail};
use rankset::montecarlo::simulate_with;
use rankset::ranking::{is_valid_ranking, DEFAULT_ENUMERATION_CAP};
use rankset::{
    check_membership, enumerate_rankings, identified_set, rejection_rate, restricted_mle, run_experiment,
    solve_linear_parametric, test_ranking, test_statistic, ConstraintSystem, ExperimentConfig, Link, Method,
    Probabilities, Ranking, TestOptions, TournamentGraph,
};
use rankset_cli::{pagerank, read_transitions_csv, run_cli_with, transitions_to_outcomes};

type Outcome = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn chain_dgp() -> Probabilities {
    Probabilities::new(TournamentGraph::chain(4).unwrap(), vec![0.75, 0.7, 0.2]).unwrap()
}

fn rk(r: &[u32]) -> Ranking {
    Ranking::new(r.to_vec()).unwrap()
}

/// Teams A, B, C; A-B played 9 times (A won 8), B-C twice (B won both).
fn example_design() -> (TournamentGraph, ConstraintSystem) {
    let g = TournamentGraph::new(3, [(0, 1), (1, 2)]).unwrap();
    let c = ConstraintSystem::build(&g, &rk(&[2, 1, 3])).unwrap();
    (g, c)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn se(p: f64, m: usize) -> f64 {
    (p * (1.0 - p) / m as f64).sqrt()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let set = identified_set(&chain_dgp(), false, DEFAULT_ENUMERATION_CAP).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let expected = vec![rk(&[1, 3, 4, 2]), rk(&[2, 3, 4, 1])];
    let mut out = Vec::new();
    let code = run_cli_with(
        ["rankset", "ident", "--probs", fixture("chain_probs.csv").to_str().unwrap()],
        &mut out,
        &mut Vec::new(),
    );
    let json: serde_json::Value = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
    let cli_rankings = json["results"]["rankings"].clone();
    let cli_ok = code == 0 && cli_rankings == serde_json::json!([[1, 3, 4, 2], [2, 3, 4, 1]]);
    check(
        set.rankings() == expected && elapsed < 1.0 && cli_ok,
        format!(
            "library {} in {elapsed:.4}s; cli exit {code} rankings {cli_rankings}",
            set.rankings().iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" ")
        ),
    )
}

fn criterion_2() -> Outcome {
    let merits = solve_linear_parametric(&chain_dgp(), &Link::logistic(), 0, 1.0, 1e-8).map_err(|e| e.to_string())?;
    let expected = [1.0, 2.099, 2.946, 1.559];
    let worst = merits.as_slice().iter().zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    check(worst <= 1e-3, format!("merits {:?}, max deviation {worst:.2e}", merits.as_slice()))
}

fn random_instance(rng: &mut ChaCha8Rng) -> (Probabilities, Ranking) {
    let q = rng.random_range(2..=5usize);
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for a in 0..q {
        for b in a + 1..q {
            if rng.random_bool(0.6) {
                pairs.push((a, b));
            }
        }
    }
    if pairs.is_empty() {
        pairs.push((0, 1));
    }
    let g = TournamentGraph::new(q, pairs).unwrap();
    let mut perm: Vec<u32> = (1..=q as u32).collect();
    perm.shuffle(rng);
    let p = match rng.random_range(0..3) {
        // Logistic probabilities from merits ordered like the ranking, so
        // the ranking is often a member.
        0 => {
            let theta: Vec<f64> = perm.iter().map(|&r| r as f64 + rng.random_range(-0.4..0.4)).collect();
            Probabilities::from_fn(g, |a, b| 1.0 / (1.0 + (theta[a] - theta[b]).exp())).unwrap()
        }
        // Coarse values produce exact ties between entries.
        1 => {
            let values = (0..g.edge_count()).map(|_| rng.random_range(1..10) as f64 / 10.0).collect();
            Probabilities::new(g, values).unwrap()
        }
        _ => {
            let values = (0..g.edge_count()).map(|_| rng.random_range(0.01..0.99)).collect();
            Probabilities::new(g, values).unwrap()
        }
    };
    (p, Ranking::new(perm).unwrap())
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut disagree, mut members) = (0, 0);
    for _ in 0..200 {
        let (p, r) = random_instance(&mut rng);
        let a = check_membership(&p, &r).map_err(|e| e.to_string())?;
        let b = check_membership_matrix(&p, &r).map_err(|e| e.to_string())?;
        disagree += usize::from(a != b);
        members += usize::from(a);
    }
    check(disagree == 0, format!("200 instances, {members} members, {disagree} disagreements"))
}

/// Minimizes the weighted squared distance over a 0.001 grid of feasible
/// points.
fn grid_projection(p_hat: &[f64], w: &[f64], c: &ConstraintSystem) -> Option<Vec<f64>> {
    let mut best: Option<(f64, [f64; 2])> = None;
    for i in 0..=1000 {
        for j in 0..=1000 {
            let x = [i as f64 / 1000.0, j as f64 / 1000.0];
            if !c.is_satisfied(&x, 1e-9) {
                continue;
            }
            let obj = w[0] * (x[0] - p_hat[0]).powi(2) + w[1] * (x[1] - p_hat[1]).powi(2);
            if best.is_none_or(|(b, _)| obj < b) {
                best = Some((obj, x));
            }
        }
    }
    best.map(|(_, x)| x.to_vec())
}

fn criterion_4() -> Outcome {
    let (_, c) = example_design();
    let fit = restricted_mle(&[8.0 / 9.0, 1.0], &[9.0, 2.0], &c).map_err(|e| e.to_string())?;
    // Canonical storage holds P(B beats C) = 1 - P(C beats B).
    let example_exact = fit.p_star == [0.5, 1.0];

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let all_pairs = [(0, 1), (0, 2), (1, 2)];
    let weak_orders = enumerate_rankings(3, true, 8).unwrap();
    let (mut done, mut worst) = (0, 0.0f64);
    while done < 100 {
        let skip = rng.random_range(0..3);
        let pairs: Vec<_> = (0..3).filter(|&i| i != skip).map(|i| all_pairs[i]).collect();
        let g = TournamentGraph::new(3, pairs).unwrap();
        let r = weak_orders[rng.random_range(0..weak_orders.len())].clone();
        let c = ConstraintSystem::build(&g, &r).unwrap();
        if c.boundary().len() + c.order().len() > 4 {
            continue;
        }
        let n: Vec<f64> = (0..2).map(|_| rng.random_range(1..=20) as f64).collect();
        let p_hat: Vec<f64> = n.iter().map(|&ni| rng.random_range(0..=ni as u32) as f64 / ni).collect();
        let fit = restricted_mle(&p_hat, &n, &c).map_err(|e| e.to_string())?;
        let oracle = grid_projection(&p_hat, &n, &c).ok_or("empty grid")?;
        let dev = fit.p_star.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(dev);
        done += 1;
    }
    check(
        example_exact && worst <= 2e-3,
        format!("example p* = {:?} (canonical); 100 grid instances, max deviation {worst:.2e}", fit.p_star),
    )
}

fn criterion_5() -> Outcome {
    let (g, c) = example_design();
    let null = ExactNullDistribution::new(&[9, 2], &c, ExactOptions::default()).map_err(|e| e.to_string())?;
    let t = null.statistic_of(&[8, 2]).map_err(|e| e.to_string())?;
    let tail = Tail::Inclusive;
    let weights = [9.0, 2.0];
    let m = 100_000;
    // Directed (P(A beats B), P(C beats B)) with P(C beats B) <= P(A beats B) <= 1/2.
    let points = [
        (0.5, 0.5),
        (0.5, 0.25),
        (0.5, 0.02),
        (0.45, 0.3),
        (0.4, 0.4),
        (0.35, 0.1),
        (0.3, 0.2),
        (0.25, 0.25),
        (0.18, 0.18),
        (0.1, 0.05),
    ];
    let mut worst_z = 0.0f64;
    for (k, &(ab, cb)) in points.iter().enumerate() {
        let canonical = [ab, 1.0 - cb];
        let exact = null.region_probability(t, tail, &canonical);
        let p = Probabilities::new(g.clone(), canonical.to_vec()).unwrap();
        let mut hits = 0usize;
        for i in 0..m {
            let d = simulate_with(&p, &[9, 2], &mut stream_rng(500 + k as u64, i as u64)).unwrap();
            let p_hat: Vec<f64> = d.wins().iter().zip(d.games()).map(|(&w, &n)| w as f64 / n as f64).collect();
            let fit = restricted_mle(&p_hat, &weights, &c).map_err(|e| e.to_string())?;
            hits += usize::from(tail.contains(test_statistic(&p_hat, &fit.p_star, &weights), t));
        }
        let freq = hits as f64 / m as f64;
        let z = (freq - exact).abs() / se(exact, m).max(1e-12);
        worst_z = worst_z.max(z);
    }
    let sup = null.pvalue(t, tail);
    let poly_half = {
        let (p1, p2) = (0.5f64, 0.5f64);
        p1.powi(9) * p2.powi(2) + 2.0 * p1.powi(9) * p2 * (1.0 - p2) + p1.powi(9) * (1.0 - p2).powi(2)
            + p2.powi(2) * (1.0 - p1).powi(9)
    };
    check(
        worst_z <= 3.0 && sup.p_value >= poly_half,
        format!(
            "t = {t:.4}; worst |MC - exact| = {worst_z:.2} se over 10 points; sup = {:.6} at {:?} (>= {poly_half:.6})",
            sup.p_value, sup.argmax
        ),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let (g, _) = example_design();
    let alpha = 0.1;
    let opts = TestOptions { alpha, method: Method::FiniteSample, ..TestOptions::default() };
    let test = PreparedTest::new(&g, &[9, 2], &rk(&[2, 1, 3]), &opts).map_err(|e| e.to_string())?;
    let reps = 2000;
    let mut worst = (f64::NEG_INFINITY, 0.0, 0.0, 0.0);
    for (i, ab) in [0.05, 0.15, 0.25, 0.35, 0.5].into_iter().enumerate() {
        for (j, frac) in [0.05, 0.25, 0.5, 0.75, 1.0].into_iter().enumerate() {
            let cb = ab * frac;
            let p = Probabilities::new(g.clone(), vec![ab, 1.0 - cb]).unwrap();
            let mut rejected = 0;
            for k in 0..reps {
                let d = simulate_with(&p, &[9, 2], &mut stream_rng(600 + (5 * i + j) as u64, k)).unwrap();
                rejected += usize::from(test.rejects(&d).map_err(|e| e.to_string())?);
            }
            let rate = rejected as f64 / reps as f64;
            let excess = rate - (alpha + 3.0 * se(alpha, reps as usize));
            if excess > worst.0 {
                worst = (excess, rate, ab, cb);
            }
        }
    }
    check(
        worst.0 <= 0.0,
        format!(
            "max rejection rate {:.4} at P(A>B)={}, P(C>B)={:.4}; bound {:.4}; {:.1}s",
            worst.1,
            worst.2,
            worst.3,
            alpha + 3.0 * se(alpha, reps as usize),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn asymptotic(alpha: f64) -> TestOptions {
    TestOptions { alpha, method: Method::Asymptotic, seed: 77, ..TestOptions::default() }
}

fn criterion_7() -> Outcome {
    let g = TournamentGraph::chain(4).unwrap();
    let p = Probabilities::new(g, vec![0.5; 3]).unwrap();
    let reps = 1000;
    let mut lines = Vec::new();
    let mut ok = true;
    for r in [rk(&[1, 3, 4, 2]), rk(&[1, 2, 3, 4])] {
        let rate = rejection_rate(&p, &[200; 3], &r, &asymptotic(0.1), reps, 7).map_err(|e| e.to_string())?;
        ok &= rate <= 0.1 + 3.0 * se(0.1, reps);
        lines.push(format!("{r}: {rate:.3}"));
    }
    check(ok, format!("rejection rates {} (bound {:.4})", lines.join(", "), 0.1 + 3.0 * se(0.1, reps)))
}

fn criterion_8() -> Outcome {
    let r = rk(&[4, 2, 1, 3]);
    let mut rates = Vec::new();
    for n in [50, 100, 200] {
        rates.push(rejection_rate(&chain_dgp(), &[n; 3], &r, &asymptotic(0.1), 1000, 8).map_err(|e| e.to_string())?);
    }
    check(
        rates.windows(2).all(|w| w[0] <= w[1]) && rates[2] >= 0.99,
        format!("rejection rates at N = 50, 100, 200: {rates:?}"),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let identified = [rk(&[1, 3, 4, 2]), rk(&[2, 3, 4, 1])];
    let mut details = Vec::new();
    let mut ok = true;
    let mut sizes = Vec::new();
    for (n, method) in [(5, Method::FiniteSample), (15, Method::FiniteSample), (200, Method::Asymptotic)] {
        let mut cfg = ExperimentConfig::new(chain_dgp(), n, method);
        cfg.seed = 9;
        let out = run_experiment(&cfg).map_err(|e| e.to_string())?;
        sizes.push(out.mean_set_size);
        let reps = cfg.replications;
        if n < 200 {
            for r in &identified {
                let cov = out.coverage(r);
                ok &= cov >= 0.9 - 3.0 * se(0.9, reps);
                details.push(format!("N={n} cover {r} {cov:.3}"));
            }
        } else {
            let c_only_four = out.projected_set_frequency(2, &[4]);
            let a_outside = out.table.frequency(0, 3) + out.table.frequency(0, 4);
            ok &= c_only_four >= 0.95 && a_outside == 0.0;
            details.push(format!("N=200 C={{4}} {c_only_four:.3}, A outside {{1,2}} {a_outside:.3}"));
        }
    }
    details.push(format!("mean set sizes {sizes:.2?}, {:.0}s", start.elapsed().as_secs_f64()));
    check(ok, details.join("; "))
}

fn criterion_10() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (q, expected) in [(4usize, 75usize), (5, 541)] {
        let got: BTreeSet<Vec<u32>> =
            enumerate_rankings(q, true, 8).unwrap().iter().map(|r| r.ranks().to_vec()).collect();
        let mut oracle = BTreeSet::new();
        let total = q.pow(q as u32);
        for mut code in 0..total {
            let v: Vec<i64> = (0..q)
                .map(|_| {
                    let d = code % q;
                    code /= q;
                    d as i64 + 1
                })
                .collect();
            if is_valid_ranking(&v) {
                oracle.insert(v.iter().map(|&x| x as u32).collect::<Vec<u32>>());
            }
        }
        ok &= got.len() == expected && got == oracle;
        parts.push(format!("q={q}: {} (oracle {})", got.len(), oracle.len()));
    }
    check(ok, parts.join(", "))
}

fn criterion_11() -> Outcome {
    let path = fixture("transitions_10firms.csv");
    let table = read_transitions_csv(&path).map_err(|e| e.to_string())?;
    let outcomes = transitions_to_outcomes(&table, 20).map_err(|e| e.to_string())?;
    let keep: Vec<usize> =
        outcomes.names.iter().map(|n| table.names.iter().position(|m| m == n).unwrap()).collect();
    let pr = pagerank(&table.restrict(&keep), 0.85, 1e-12, 10_000).map_err(|e| e.to_string())?;
    let opts = TestOptions { alpha: 0.05, method: Method::Asymptotic, seed: 11, ..TestOptions::default() };
    let lib = test_ranking(&outcomes.data, &pr.ranking, &opts).map_err(|e| e.to_string())?;

    let run = || -> Result<serde_json::Value, String> {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = [
            "rankset",
            "pagerank",
            "--transitions",
            path.to_str().unwrap(),
            "--test",
            "--method",
            "as",
            "--seed",
            "11",
            "--alpha",
            "0.05",
        ];
        let code = run_cli_with(argv, &mut out, &mut err);
        if code != 0 {
            return Err(format!("exit {code}: {}", String::from_utf8_lossy(&err)));
        }
        serde_json::from_slice(&out).map_err(|e| e.to_string())
    };
    let (first, second) = (run()?, run()?);
    let reproducible = first["results"] == second["results"] && first["config"] == second["config"];
    let cli_p = first["results"]["test"]["p_value"].as_f64().unwrap_or(f64::NAN);
    let sane = lib.statistic >= 0.0 && (0.0..=1.0).contains(&lib.p_value) && cli_p == lib.p_value;
    check(
        reproducible && sane && first["schema_version"] == 1,
        format!(
            "{} firms, {} edges, ranking {}, T = {:.3}, p = {:.4}, reproducible {reproducible}",
            outcomes.names.len(),
            outcomes.data.graph().edge_count(),
            pr.ranking,
            lib.statistic,
            lib.p_value
        ),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 11] = [
        ("identified set of the chain example", criterion_1),
        ("logistic merits of the chain example", criterion_2),
        ("sign conditions vs matrix form", criterion_3),
        ("restricted estimate vs grid oracle", criterion_4),
        ("exact tail probability vs simulation", criterion_5),
        ("finite-sample validity", criterion_6),
        ("asymptotic validity", criterion_7),
        ("consistency against a false ranking", criterion_8),
        ("confidence-set coverage experiment", criterion_9),
        ("weak-ordering counts", criterion_10),
        ("transition pipeline report", criterion_11),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = format!("criterion {:>2}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| id.ends_with(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("{id} PASS  {name} [{secs:.1}s]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("{id} FAIL  {name} [{secs:.1}s]: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
