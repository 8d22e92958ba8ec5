//! Acceptance criteria, one test per criterion. Each prints a single
//! `criterion <k> ...: PASS|FAIL` line before asserting.

use std::collections::BTreeMap;
use std::io::Write;
use std::process::Command;
use std::time::Instant;

use patricia_bridges::bridges::{caterpillar, rtree_bridge, BinaryCompletion, IntervalZigZag, ZigzagBridge};
use patricia_bridges::didendritic::{
    check_axioms, dds_from_tree, dds_to_tree, extract_seed, left_right_extend, permute, restrict, zigzag_dds,
    DdsJson, FiniteDDS,
};
use patricia_bridges::rng::{par_trials, rng_from_seed};
use patricia_bridges::stats::{
    backward_kernel_check, chi_square_independence, dynkin_gap, empirical, height_experiment, kernel_universality,
    marginal_law, neininger_event, neininger_t, persistence_experiment, remy_uniformity, tv_distance,
    BridgeSampler, ChainSpec, PersistenceChain,
};
use patricia_bridges::trees::{enumerate_full_trees, FullBinaryTree, LabeledTree};
use patricia_bridges::words::{SourceMeasure, Word};
use sha2::{Digest, Sha256};

const KERNEL_TV: f64 = 0.01;
const LAW_TV: f64 = 0.02;
const P_MIN: f64 = 0.001;
const DYNKIN_TOL: f64 = 0.005;
const PERSISTENCE_MIN: usize = 99;

fn report(k: &str, what: &str, pass: bool, detail: &str, started: Instant) -> bool {
    // Written to the raw handle so the line shows even when output is captured.
    let _ = writeln!(
        std::io::stderr(),
        "criterion {k} ({what}): {} {detail} [{:.1}s]",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
    pass
}

fn permutations(n: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n);
            out.push(q);
        }
    }
    out
}

/// Exact marginal of the zig-zag bridge: uniform spines of length `n − 1`.
fn zigzag_exact_law(n: usize) -> BTreeMap<FullBinaryTree, f64> {
    let spines = Word::all_of_length(n - 1);
    let p = 1.0 / spines.len() as f64;
    let mut law = BTreeMap::new();
    for s in spines {
        *law.entry(caterpillar(&s)).or_insert(0.0) += p;
    }
    law
}

#[test]
fn criterion_01_backward_kernel_exactness() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    let mut trees = 0;
    for n in 2..=5 {
        for (i, t) in enumerate_full_trees(n).unwrap().iter().enumerate() {
            let r = backward_kernel_check(t, 100_000, 1000 * n as u64 + i as u64).unwrap();
            worst = worst.max(r.get("tv", None).unwrap());
            trees += 1;
        }
    }
    let pass = trees == 22 && worst < KERNEL_TV;
    assert!(report("1", "backward-kernel exactness", pass, &format!("{trees} trees, max tv {worst:.4} < {KERNEL_TV}"), t0));
}

#[test]
fn criterion_02_kernel_universality() {
    let t0 = Instant::now();
    let samplers = [
        BridgeSampler::Patricia(SourceMeasure::fair()),
        BridgeSampler::Patricia(SourceMeasure::harmonic()),
        BridgeSampler::Remy,
    ];
    let mut worst = 0.0f64;
    let mut min_hits = f64::INFINITY;
    let mut pass = true;
    for (i, t) in enumerate_full_trees(4).unwrap().iter().enumerate() {
        let r = kernel_universality(t, &samplers, 100_000, 200 + i as u64).unwrap();
        pass &= r.pass == Some(true);
        for s in &r.statistics {
            if s.name.starts_with("tv[") {
                worst = worst.max(s.value);
            } else {
                min_hits = min_hits.min(s.value);
            }
        }
    }
    let detail = format!("5 endpoints x 3 chains, max tv {worst:.4} < {LAW_TV}, min conditioned sample {min_hits}");
    assert!(report("2", "kernel universality", pass, &detail, t0));
}

#[test]
fn criterion_03_remy_uniformity() {
    let t0 = Instant::now();
    let r = remy_uniformity(5, 100_000, 3).unwrap();
    let tv = r.get("tv", None).unwrap();
    let p = r.get("p_value", None).unwrap();
    let pass = tv < LAW_TV && p > P_MIN;
    assert!(report("3", "Rémy uniformity", pass, &format!("n=5, tv {tv:.4} < {LAW_TV}, p {p:.3} > {P_MIN}"), t0));
}

#[test]
fn criterion_04_dynkin_failure() {
    let t0 = Instant::now();
    let r = dynkin_gap(1_000_000, 4).unwrap();
    let e1 = r.get("estimate_s1", None).unwrap();
    let e2 = r.get("estimate_s2", None).unwrap();
    let pass = (e1 - 0.25).abs() <= DYNKIN_TOL && (e2 - 0.375).abs() <= DYNKIN_TOL;
    let detail = format!("{e1:.4} vs 1/4, {e2:.4} vs 3/8, tolerance {DYNKIN_TOL}");
    assert!(report("4", "Dynkin failure", pass, &detail, t0));
}

#[test]
fn criterion_05_dds_bijection() {
    let t0 = Instant::now();
    let mut cases = Vec::new();
    let mut ok = true;
    for n in 1..=5u32 {
        let mut count = 0;
        for t in enumerate_full_trees(n as usize).unwrap() {
            for p in permutations(n) {
                let lt = LabeledTree::from_lex_labels(t.clone(), &p).unwrap();
                let d = dds_from_tree(&lt).unwrap();
                ok &= check_axioms(&d).is_empty();
                ok &= dds_to_tree(&d).unwrap() == lt;
                ok &= left_right_extend(&extract_seed(&d)).unwrap() == d;
                count += 1;
            }
        }
        cases.push(count);
    }
    let fixture = include_str!("fixtures/six_class.json");
    let bad = FiniteDDS::from_json(&serde_json::from_str::<DdsJson>(fixture).unwrap()).unwrap();
    let violations = check_axioms(&bad);
    let rejected = bad.class_count() == 6
        && !violations.is_empty()
        && violations.iter().all(|v| v.axiom == "C")
        && dds_to_tree(&bad).is_err();
    let pass = ok && cases == vec![1, 2, 12, 120, 1680] && rejected;
    let detail = format!("round trips {cases:?}, six-class system rejected with (C): {rejected}");
    assert!(report("5", "DDS bijection", pass, &detail, t0));
}

#[test]
fn criterion_06_zigzag_heights_and_marginal() {
    let t0 = Instant::now();
    let mut heights_ok = true;
    for seed in 0..100 {
        let b = ZigzagBridge::draw(200, &mut rng_from_seed(seed)).unwrap();
        for (k, t) in b.trajectory().iter().enumerate() {
            heights_ok &= t.height() == k && t.leaf_count() == k + 1;
        }
    }
    let tv3 = tv_distance(
        &empirical(&marginal_law(&BridgeSampler::Zigzag, 3, 100_000, 61).unwrap()),
        &zigzag_exact_law(3),
    );
    let tv4 = tv_distance(
        &empirical(&marginal_law(&BridgeSampler::Zigzag, 4, 100_000, 62).unwrap()),
        &zigzag_exact_law(4),
    );
    let pass = heights_ok && tv3 < LAW_TV && tv4 < LAW_TV;
    let detail = format!(
        "ht = n-1 for n <= 200 on 100 seeds: {heights_ok}; n=3 tv {tv3:.4} (4 spines, 2 shapes); n=4 tv {tv4:.4} (4 caterpillars)"
    );
    assert!(report("6a", "zig-zag heights and marginal", pass, &detail, t0));
}

#[test]
fn criterion_06_zigzag_persistence() {
    let t0 = Instant::now();
    let r = persistence_experiment(&PersistenceChain::ZigzagBridge, 512, 1, 100, 66).unwrap();
    let hits = (r.get("frequency", None).unwrap() * 100.0).round() as usize;
    let pass = hits >= PERSISTENCE_MIN;
    let detail = format!("window 512, persistence set = {{e,0,1}} in {hits}/100 trials (need >= {PERSISTENCE_MIN})");
    assert!(report("6b", "zig-zag persistence", pass, &detail, t0));
}

#[test]
fn criterion_07_rtree_construction() {
    let t0 = Instant::now();
    let interval = marginal_law(&BridgeSampler::Interval, 3, 100_000, 71).unwrap();
    let tv_interval = tv_distance(&empirical(&interval), &zigzag_exact_law(3));
    let binary = marginal_law(&BridgeSampler::Binary(SourceMeasure::fair()), 4, 100_000, 72).unwrap();
    let direct = marginal_law(&BridgeSampler::Patricia(SourceMeasure::fair()), 4, 100_000, 73).unwrap();
    let tv_binary = tv_distance(&empirical(&binary), &empirical(&direct));
    // Every draw re-checks (T) and (LR); a violation surfaces as an error.
    let draws = 2_000;
    let valid = par_trials(draws, 74, |_, rng| {
        rtree_bridge(&IntervalZigZag, 16, rng).is_ok()
            && rtree_bridge(&BinaryCompletion::new(SourceMeasure::harmonic()), 16, rng).is_ok()
    })
    .into_iter()
    .filter(|&v| v)
    .count();
    let pass = tv_interval < LAW_TV && tv_binary < LAW_TV && valid == draws;
    let detail = format!(
        "interval n=3 tv {tv_interval:.4}, binary(fair) n=4 vs PATRICIA tv {tv_binary:.4}, (T)/(LR) on {valid}/{draws} draws"
    );
    assert!(report("7", "R-tree construction", pass, &detail, t0));
}

#[test]
fn criterion_08_heights() {
    let t0 = Instant::now();
    let n = 1usize << 16;
    let g = height_experiment(&ChainSpec::Patricia(SourceMeasure::fair()), &[n], 20, 81).unwrap();
    let mean = g.get("mean_height", Some(n)).unwrap();
    let l = (n as f64).log2();
    let (lo, hi) = (l + 0.5 * (2.0 * l).sqrt(), l + 2.0 * (2.0 * l).sqrt());
    let gamma_ok = (lo..=hi).contains(&mean);

    let sizes = [1usize << 10, 1 << 12, 1 << 14];
    let r = height_experiment(&ChainSpec::Remy, &sizes, 200, 82).unwrap();
    let norm: Vec<f64> = sizes.iter().map(|&n| r.get("height_over_sqrt_n", Some(n)).unwrap()).collect();
    let ratios: Vec<f64> = norm.windows(2).map(|w| w[1] / w[0]).collect();
    let remy_ok = ratios.iter().all(|q| (0.8..=1.25).contains(q));

    let n_h = 10_000;
    let t = neininger_t(n_h);
    let h = neininger_event(n_h, t, 1000, 83).unwrap();
    let freq = h.get("frequency", None).unwrap();
    let threshold = 1.0 - (2.0 / (n_h as f64).ln()).sqrt();
    let short = h.get("height_below_t_on_event", None).unwrap();
    let harmonic_ok = freq >= threshold && short == 0.0;

    let pass = gamma_ok && remy_ok && harmonic_ok;
    let detail = format!(
        "heuristic; fair PATRICIA mean ht {mean:.2} in [{lo:.2}, {hi:.2}]; Rémy ht/sqrt(n) ratios {:?}; harmonic P(A) {freq:.3} >= {threshold:.3} (t={t}, ht<t on A: {short})",
        ratios.iter().map(|q| (q * 1000.0).round() / 1000.0).collect::<Vec<_>>()
    );
    assert!(report("8", "heights", pass, &detail, t0));
}

#[test]
fn criterion_09_exchangeability_and_ergodicity() {
    let t0 = Instant::now();
    let trees: Vec<LabeledTree> = par_trials(100_000, 91, |_, rng| dds_to_tree(&zigzag_dds(3, rng).unwrap()).unwrap());
    let base = empirical(&trees);
    let mut worst = 0.0f64;
    for (a, b) in [(1u32, 2u32), (1, 3), (2, 3)] {
        let sigma: BTreeMap<u32, u32> = (1..=3).map(|i| (i, if i == a { b } else if i == b { a } else { i })).collect();
        let moved: Vec<LabeledTree> = trees
            .iter()
            .map(|t| dds_to_tree(&permute(&dds_from_tree(t).unwrap(), &sigma).unwrap()).unwrap())
            .collect();
        worst = worst.max(tv_distance(&base, &empirical(&moved)));
    }
    let pairs: Vec<(String, String)> = par_trials(100_000, 92, |_, rng| {
        let d = zigzag_dds(4, rng).unwrap();
        (
            dds_to_tree(&restrict(&d, &[1, 2]).unwrap()).unwrap().to_newick(),
            dds_to_tree(&restrict(&d, &[3, 4]).unwrap()).unwrap().to_newick(),
        )
    });
    let (_, _, p) = chi_square_independence(&pairs);
    let pass = base.len() == 12 && worst < LAW_TV && p > P_MIN;
    let detail = format!("{} labeled trees, max transposition tv {worst:.4} < {LAW_TV}; independence p {p:.3} > {P_MIN}", base.len());
    assert!(report("9", "exchangeability and ergodicity", pass, &detail, t0));
}

fn pbridge(args: &[&str]) -> (Vec<u8>, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_pbridge")).args(args).output().expect("run pbridge");
    (out.stdout, out.status.code().unwrap_or(-1))
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn criterion_10_determinism() {
    let t0 = Instant::now();
    let commands: Vec<Vec<&str>> = vec![
        vec!["enumerate", "--n", "5"],
        vec!["simulate", "--chain", "patricia", "--measure", "harmonic", "--steps", "40", "--seed", "5"],
        vec!["simulate", "--chain", "remy", "--steps", "30", "--format", "newick"],
        vec!["simulate", "--chain", "rtree:binary:fair", "--steps", "12", "--format", "dot"],
        vec!["simulate", "--chain", "bridge-from:00,010,011,1"],
        vec!["verify", "dynkin", "--trials", "20000", "--seed", "7"],
        vec!["verify", "remy-uniform", "--n", "4", "--trials", "5000", "--format", "csv"],
        vec!["heights", "--chain", "patricia:harmonic", "--n-list", "64,256", "--trials", "30"],
        vec!["dds", "sample", "--n", "6", "--seed", "3"],
    ];
    let mut same = 0;
    for args in &commands {
        let (a, code_a) = pbridge(args);
        let (b, code_b) = pbridge(args);
        let mut jobs = vec!["--jobs", "1"];
        jobs.extend(args.iter().copied());
        let (c, _) = pbridge(&jobs);
        let mut jobs4 = vec!["--jobs", "4"];
        jobs4.extend(args.iter().copied());
        let (d, _) = pbridge(&jobs4);
        let h = digest(&a);
        if !a.is_empty() && code_a == code_b && [digest(&b), digest(&c), digest(&d)].iter().all(|x| *x == h) {
            same += 1;
        } else {
            println!("  differs: {args:?}");
        }
    }
    let pass = same == commands.len();
    let detail = format!("{same}/{} commands byte-identical across reruns and --jobs 1/4 (sha256)", commands.len());
    assert!(report("10", "determinism", pass, &detail, t0));
}
