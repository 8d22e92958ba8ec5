//! Exact oracles and the Monte Carlo harness.
//!
//! Every experiment is a pure function of its parameters and seed: trials run
//! in parallel, each on a generator derived from the run seed and the trial
//! index, and results are collected in trial order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::bridges::{caterpillar, rtree_bridge_shapes, zigzag_bridge, BinaryCompletion, IntervalZigZag, ZigzagBridge};
use crate::error::{Error, Result};
use crate::kernels::{backward_sample, kappa_bar, patricia_chain, remy_chain, remy_graft, RemyGrower};
use crate::rng::{derive_seed, par_trials, ProjectRng};
use crate::trees::{
    catalan, distinguishing_prefixes, enumerate_full_trees, patricia_contract, patricia_height, span_tree,
    BinaryTree, FullBinaryTree,
};
use crate::words::{SourceMeasure, Word, WordStream};

/// Depth cap used by the experiments. Harmonic streams share zero runs of
/// several thousand bits at `n = 10⁴`.
pub const EXPERIMENT_DEPTH_CAP: usize = 1 << 22;

/// Exact backward transition law out of one tree.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelTable {
    pub endpoint: FullBinaryTree,
    pub masses: BTreeMap<FullBinaryTree, Ratio<u64>>,
}

impl KernelTable {
    pub fn mass(&self, s: &FullBinaryTree) -> Ratio<u64> {
        self.masses.get(s).copied().unwrap_or_else(Ratio::zero)
    }

    pub fn total(&self) -> Ratio<u64> {
        self.masses.values().fold(Ratio::zero(), |a, &b| a + b)
    }

    pub fn as_f64(&self) -> BTreeMap<FullBinaryTree, f64> {
        self.masses
            .iter()
            .map(|(t, p)| (t.clone(), *p.numer() as f64 / *p.denom() as f64))
            .collect()
    }
}

/// Groups the leaves of `t` by their `κ̄` image; each leaf carries `1/(n+1)`.
pub fn exact_backward_kernel(t: &FullBinaryTree) -> Result<KernelTable> {
    if t.is_trivial() {
        return Err(Error::TrivialTree);
    }
    let leaves = t.leaves();
    let share = Ratio::new(1u64, leaves.len() as u64);
    let mut masses: BTreeMap<FullBinaryTree, Ratio<u64>> = BTreeMap::new();
    for v in &leaves {
        *masses.entry(kappa_bar(t, v)?).or_insert_with(Ratio::zero) += share;
    }
    Ok(KernelTable {
        endpoint: t.clone(),
        masses,
    })
}

/// Law of the Rémy chain after `n − 1` steps from `{∅}`, by enumerating every
/// (vertex, side) choice.
pub fn exact_remy_law(n: usize) -> Result<BTreeMap<FullBinaryTree, BigRational>> {
    if n == 0 {
        return Err(Error::InvalidArgument("leaf count must be at least 1".into()));
    }
    let mut law = BTreeMap::from([(FullBinaryTree::trivial(), BigRational::one())]);
    for _ in 1..n {
        let mut next: BTreeMap<FullBinaryTree, BigRational> = BTreeMap::new();
        for (t, p) in &law {
            let choices = BigInt::from(2 * t.len());
            let share = p / BigRational::from_integer(choices);
            for v in t.vertices() {
                for c in 0..2 {
                    *next.entry(remy_graft(t, v, c)?).or_insert_with(BigRational::zero) += share.clone();
                }
            }
        }
        law = next;
    }
    Ok(law)
}

/// Streams `Ẑ_k ~ ν(· | τ(y_k))`, one per leaf of `t` in lexicographic order.
pub fn conditional_resample(t: &BinaryTree, nu: &SourceMeasure, rng: &mut ProjectRng) -> Result<Vec<WordStream>> {
    t.leaves_lex()
        .iter()
        .map(|y| nu.sample_conditioned(y, rng.random()))
        .collect()
}

/// Total variation distance between two laws given as probability maps.
pub fn tv_distance<K: Ord>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let keys: BTreeSet<&K> = p.keys().chain(q.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| (p.get(k).copied().unwrap_or(0.0) - q.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// Empirical law of a sample.
pub fn empirical<K: Ord + Clone>(samples: &[K]) -> BTreeMap<K, f64> {
    let counts = counts(samples);
    let n = samples.len() as f64;
    counts.into_iter().map(|(k, c)| (k, c as f64 / n)).collect()
}

pub fn counts<K: Ord + Clone>(samples: &[K]) -> BTreeMap<K, u64> {
    let mut out = BTreeMap::new();
    for s in samples {
        *out.entry(s.clone()).or_insert(0u64) += 1;
    }
    out
}

/// Pearson goodness of fit: `(statistic, degrees of freedom, p-value)`.
/// Observations in a zero-probability cell give `p = 0`.
pub fn chi_square_gof<K: Ord>(observed: &BTreeMap<K, u64>, expected: &BTreeMap<K, f64>) -> (f64, usize, f64) {
    let total: u64 = observed.values().sum();
    if observed.keys().any(|k| expected.get(k).copied().unwrap_or(0.0) <= 0.0) {
        return (f64::INFINITY, expected.len().saturating_sub(1), 0.0);
    }
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (k, &p) in expected {
        if p <= 0.0 {
            continue;
        }
        cells += 1;
        let e = p * total as f64;
        let o = observed.get(k).copied().unwrap_or(0) as f64;
        stat += (o - e) * (o - e) / e;
    }
    let df = cells.saturating_sub(1);
    (stat, df, chi_square_sf(stat, df))
}

/// Pearson test of independence on a contingency table given as counts of
/// `(row, column)` pairs.
pub fn chi_square_independence<A: Ord + Clone, B: Ord + Clone>(pairs: &[(A, B)]) -> (f64, usize, f64) {
    let n = pairs.len() as f64;
    let joint = counts(pairs);
    let rows = counts(&pairs.iter().map(|p| p.0.clone()).collect::<Vec<_>>());
    let cols = counts(&pairs.iter().map(|p| p.1.clone()).collect::<Vec<_>>());
    let mut stat = 0.0;
    for (a, &ra) in &rows {
        for (b, &cb) in &cols {
            let e = ra as f64 * cb as f64 / n;
            let o = joint.get(&(a.clone(), b.clone())).copied().unwrap_or(0) as f64;
            stat += (o - e) * (o - e) / e;
        }
    }
    let df = (rows.len().saturating_sub(1)) * (cols.len().saturating_sub(1));
    (stat, df, chi_square_sf(stat, df))
}

fn chi_square_sf(stat: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    if !stat.is_finite() {
        return 0.0;
    }
    ChiSquared::new(df as f64).map(|d| d.sf(stat)).unwrap_or(0.0)
}

/// One named number in a report, optionally tied to a size `n` and a band.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Statistic {
    pub n: Option<usize>,
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl Statistic {
    pub fn new(name: &str, value: f64) -> Self {
        Statistic {
            n: None,
            name: name.to_string(),
            value,
            lower: None,
            upper: None,
        }
    }

    pub fn at(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn band(mut self, lower: f64, upper: f64) -> Self {
        self.lower = Some(lower);
        self.upper = Some(upper);
        self
    }
}

/// Result of an experiment, serializable to JSON and CSV.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: BTreeMap<String, String>,
    pub trials: usize,
    pub seed: u64,
    pub statistics: Vec<Statistic>,
    /// `None` for report-only experiments.
    pub pass: Option<bool>,
    /// Finite-n trend check of an asymptotic statement.
    pub heuristic: bool,
}

impl ExperimentReport {
    pub fn new(name: &str, trials: usize, seed: u64) -> Self {
        ExperimentReport {
            name: name.to_string(),
            parameters: BTreeMap::new(),
            trials,
            seed,
            statistics: Vec::new(),
            pass: None,
            heuristic: false,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, s: Statistic) {
        self.statistics.push(s);
    }

    /// First statistic with the given name (and `n`, if given).
    pub fn get(&self, name: &str, n: Option<usize>) -> Option<f64> {
        self.statistics
            .iter()
            .find(|s| s.name == name && (n.is_none() || s.n == n))
            .map(|s| s.value)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report json")
    }

    /// One row per `(n, statistic)`.
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let mut out = String::from("experiment,n,statistic,value,lower,upper\n");
        for s in &self.statistics {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.name,
                s.n.map(|n| n.to_string()).unwrap_or_default(),
                s.name,
                s.value,
                opt(s.lower),
                opt(s.upper)
            ));
        }
        out
    }
}

/// TV and chi-square of `samples` against the uniform law on `𝕊̄_n`.
pub fn uniformity_test(samples: &[FullBinaryTree], n: usize) -> Result<ExperimentReport> {
    if let Some(bad) = samples.iter().find(|t| t.leaf_count() != n) {
        return Err(Error::WrongLeafCount {
            expected: n,
            found: bad.leaf_count(),
        });
    }
    if n > 8 {
        return Err(Error::TooLarge { n, max: 8 });
    }
    let all = enumerate_full_trees(n)?;
    let p = 1.0 / all.len() as f64;
    let uniform: BTreeMap<FullBinaryTree, f64> = all.into_iter().map(|t| (t, p)).collect();
    goodness_of_fit_report("uniformity", samples, &uniform, 0)
}

/// TV and chi-square of `samples` against an exact law.
pub fn goodness_of_fit_report(
    name: &str,
    samples: &[FullBinaryTree],
    law: &BTreeMap<FullBinaryTree, f64>,
    seed_for_report: u64,
) -> Result<ExperimentReport> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (stat, df, p) = chi_square_gof(&counts(samples), law);
    let tv = tv_distance(&empirical(samples), law);
    let mut r = ExperimentReport::new(name, samples.len(), seed_for_report).param("support", law.len());
    r.push(Statistic::new("tv", tv));
    r.push(Statistic::new("chi_square", stat));
    r.push(Statistic::new("df", df as f64));
    r.push(Statistic::new("p_value", p));
    Ok(r)
}

/// Empirical backward frequencies from `t` versus the exact kernel.
pub fn backward_kernel_check(t: &FullBinaryTree, draws: usize, seed: u64) -> Result<ExperimentReport> {
    let table = exact_backward_kernel(t)?;
    let samples = par_trials(draws, seed, |_, rng| backward_sample(t, rng)).into_iter().collect::<Result<Vec<_>>>()?;
    let tv = tv_distance(&empirical(&samples), &table.as_f64());
    let mut r = ExperimentReport::new("backward-kernel", draws, seed).param("endpoint", t.to_newick());
    r.push(Statistic::new("tv", tv).band(0.0, 0.01));
    r.pass = Some(tv < 0.01);
    Ok(r)
}

/// `t(n) = ⌊√(2n / ln n) − 1⌋`.
pub fn neininger_t(n: usize) -> usize {
    let n = n as f64;
    ((2.0 * n / n.ln()).sqrt() - 1.0).floor().max(0.0) as usize
}

/// `Σ_{ℓ ≤ t} (1 − 1/(ℓ(ℓ+1)))ⁿ`, an upper bound on `P(A_{n,t}ᶜ)`.
pub fn neininger_union_bound(n: usize, t: usize) -> f64 {
    (1..=t)
        .map(|l| {
            let l = l as f64;
            (1.0 - 1.0 / (l * (l + 1.0))).powf(n as f64)
        })
        .sum()
}

/// Whether each `ℓ ≤ t` is the first-one position of some stream.
pub fn neininger_event_holds(zs: &mut [WordStream], t: usize) -> bool {
    let mut hit = vec![false; t + 1];
    for z in zs.iter_mut() {
        if let Some(l) = (0..t).find(|&k| z.bit(k) == 1) {
            hit[l + 1] = true;
        }
    }
    hit[1..].iter().all(|&h| h)
}

/// Frequency of `A_{n,t}` under the harmonic measure, together with the
/// number of trials in which the event held but the PATRICIA height was
/// below `t`.
pub fn neininger_event(n: usize, t: usize, trials: usize, seed: u64) -> Result<ExperimentReport> {
    if t == 0 {
        return Err(Error::InvalidArgument("t must be at least 1".into()));
    }
    let nu = SourceMeasure::harmonic();
    let results = par_trials(trials, seed, |_, rng| -> Result<(bool, bool)> {
        let mut zs: Vec<WordStream> = (0..n).map(|_| nu.sample(rng.random())).collect();
        let event = neininger_event_holds(&mut zs, t);
        let tall = !event || patricia_height(&mut zs, EXPERIMENT_DEPTH_CAP)? >= t;
        Ok((event, tall))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let freq = results.iter().filter(|r| r.0).count() as f64 / trials as f64;
    let short = results.iter().filter(|r| !r.1).count();
    let bound = neininger_union_bound(n, t);
    let sigma = (freq * (1.0 - freq) / trials as f64).sqrt();
    let mut r = ExperimentReport::new("neininger-event", trials, seed)
        .param("n", n)
        .param("t", t)
        .param("measure", "harmonic");
    r.push(Statistic::new("frequency", freq).at(n));
    r.push(Statistic::new("complement_union_bound", bound).at(n));
    r.push(Statistic::new("height_below_t_on_event", short as f64).at(n));
    r.pass = Some(short == 0 && 1.0 - freq <= bound + 3.0 * sigma);
    Ok(r)
}

/// Which chain a height experiment runs.
#[derive(Clone, Debug, PartialEq)]
pub enum ChainSpec {
    Patricia(SourceMeasure),
    Remy,
    ZigzagBridge,
}

impl fmt::Display for ChainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainSpec::Patricia(m) => write!(f, "patricia:{m}"),
            ChainSpec::Remy => f.write_str("remy"),
            ChainSpec::ZigzagBridge => f.write_str("zigzag-bridge"),
        }
    }
}

impl FromStr for ChainSpec {
    type Err = Error;

    /// `remy`, `zigzag-bridge`, `patricia` (fair coins) or
    /// `patricia:<measure>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "remy" => Ok(ChainSpec::Remy),
            "zigzag-bridge" => Ok(ChainSpec::ZigzagBridge),
            "patricia" => Ok(ChainSpec::Patricia(SourceMeasure::fair())),
            _ => match s.strip_prefix("patricia:") {
                Some(m) => Ok(ChainSpec::Patricia(m.parse()?)),
                None => Err(Error::InvalidArgument(format!("unknown chain {s:?}"))),
            },
        }
    }
}

/// Heights of one trajectory at each `n` in `n_list` (ascending).
fn trajectory_heights(chain: &ChainSpec, n_list: &[usize], rng: &mut ProjectRng) -> Result<Vec<(usize, Option<bool>)>> {
    let n_max = *n_list.iter().max().expect("non-empty");
    match chain {
        ChainSpec::Patricia(nu) => {
            let harmonic = *nu == SourceMeasure::harmonic();
            let mut zs: Vec<WordStream> = (0..n_max).map(|_| nu.sample(rng.random())).collect();
            n_list
                .iter()
                .map(|&n| {
                    let h = patricia_height(&mut zs[..n], EXPERIMENT_DEPTH_CAP)?;
                    let a = harmonic.then(|| neininger_event_holds(&mut zs[..n], neininger_t(n)));
                    Ok((h, a))
                })
                .collect()
        }
        ChainSpec::Remy => {
            let mut g = RemyGrower::new();
            Ok(n_list
                .iter()
                .map(|&n| {
                    g.grow_to(n, rng);
                    (g.height(), None)
                })
                .collect())
        }
        ChainSpec::ZigzagBridge => {
            let b = ZigzagBridge::draw(n_max, rng)?;
            Ok(n_list.iter().map(|&n| (caterpillar(&b.spine(n)).height(), None)).collect())
        }
    }
}

/// Heights along independent trajectories, with the normalization that
/// matches each chain's growth regime.
pub fn height_experiment(chain: &ChainSpec, n_list: &[usize], trials: usize, seed: u64) -> Result<ExperimentReport> {
    let mut n_list = n_list.to_vec();
    n_list.sort_unstable();
    n_list.dedup();
    if n_list.is_empty() || n_list[0] == 0 || trials == 0 {
        return Err(Error::InvalidArgument("need a non-empty n-list of positive sizes and trials ≥ 1".into()));
    }
    let runs = par_trials(trials, seed, |_, rng| trajectory_heights(chain, &n_list, rng))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut r = ExperimentReport::new("heights", trials, seed)
        .param("chain", chain)
        .param("n_list", n_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","));
    r.heuristic = true;
    for (idx, &n) in n_list.iter().enumerate() {
        let hs: Vec<f64> = runs.iter().map(|run| run[idx].0 as f64).collect();
        let mean = hs.iter().sum::<f64>() / trials as f64;
        let var = hs.iter().map(|h| (h - mean).powi(2)).sum::<f64>() / (trials.max(2) - 1) as f64;
        let half = 1.96 * (var / trials as f64).sqrt();
        r.push(Statistic::new("mean_height", mean).at(n).band(mean - half, mean + half));
        r.push(Statistic::new("sd_height", var.sqrt()).at(n));
        let nf = n as f64;
        let (name, norm) = match chain {
            ChainSpec::Patricia(_) => {
                let l = nf.log2();
                ("normalized_height", (mean - l) / (2.0 * l).sqrt().max(f64::MIN_POSITIVE))
            }
            ChainSpec::Remy => ("height_over_sqrt_n", mean / nf.sqrt()),
            ChainSpec::ZigzagBridge => ("height_over_n", mean / nf),
        };
        r.push(Statistic::new(name, norm).at(n));
        if runs[0][idx].1.is_some() {
            let freq = runs.iter().filter(|run| run[idx].1 == Some(true)).count() as f64 / trials as f64;
            r.push(Statistic::new("a_event_frequency", freq).at(n));
        }
    }
    Ok(r)
}

/// The radix tree with the given leaves (trees of `𝕊`).
fn radix_from_leaves(leaves: &[&str]) -> BinaryTree {
    let words: Vec<Word> = leaves.iter().map(|s| s.parse().expect("valid word")).collect();
    span_tree(&words).expect("non-empty")
}

/// Monte Carlo estimates of `P{Φ(R₄) = t̄ | R₃ = s′}` and
/// `P{Φ(R₄) = t̄ | R₃ = s″}` under fair coins, where `Φ(s′) = Φ(s″)`.
/// The exact values are 1/4 and 3/8.
pub fn dynkin_gap(trials: usize, seed: u64) -> Result<ExperimentReport> {
    let gamma = SourceMeasure::fair();
    let s1 = radix_from_leaves(&["00", "01", "1"]);
    let s2 = radix_from_leaves(&["000", "001", "1"]);
    let target: FullBinaryTree = "000,001,01,1".parse().expect("valid tree");
    let hit = |s: &BinaryTree, rng: &mut ProjectRng| -> Result<bool> {
        let mut zs = conditional_resample(s, &gamma, rng)?;
        zs.push(gamma.sample(rng.random()));
        let ys = distinguishing_prefixes(&mut zs, EXPERIMENT_DEPTH_CAP)?;
        Ok(patricia_contract(&span_tree(&ys)?)? == target)
    };
    let results = par_trials(trials, seed, |_, rng| -> Result<(bool, bool)> { Ok((hit(&s1, rng)?, hit(&s2, rng)?)) })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let e1 = results.iter().filter(|r| r.0).count() as f64 / trials as f64;
    let e2 = results.iter().filter(|r| r.1).count() as f64 / trials as f64;
    let mut r = ExperimentReport::new("dynkin", trials, seed).param("measure", "fair");
    r.push(Statistic::new("estimate_s1", e1).band(0.25 - 0.005, 0.25 + 0.005));
    r.push(Statistic::new("target_s1", 0.25));
    r.push(Statistic::new("estimate_s2", e2).band(0.375 - 0.005, 0.375 + 0.005));
    r.push(Statistic::new("target_s2", 0.375));
    r.pass = Some((e1 - 0.25).abs() <= 0.005 && (e2 - 0.375).abs() <= 0.005);
    Ok(r)
}

/// `⋂_{n=m}^{N} t_n` for a trajectory `t_1, …, t_N` (`m` is 1-based).
pub fn persistence_set(trajectory: &[BinaryTree], m: usize) -> Result<BinaryTree> {
    if trajectory.is_empty() {
        return Err(Error::EmptyInput);
    }
    if m == 0 || m > trajectory.len() {
        return Err(Error::InvalidArgument(format!("m must lie in 1..={}", trajectory.len())));
    }
    let mut acc = trajectory[m - 1].vertices().clone();
    for t in &trajectory[m..] {
        acc.retain(|v| t.contains(v));
    }
    Ok(BinaryTree::from_set_unchecked(acc))
}

/// `⋃_{m ≤ m_max} ⋂_{n=m}^{N} t_n`.
pub fn persistence_union(trajectory: &[BinaryTree], m_max: usize) -> Result<BinaryTree> {
    if trajectory.is_empty() {
        return Err(Error::EmptyInput);
    }
    if m_max == 0 || m_max > trajectory.len() {
        return Err(Error::InvalidArgument(format!("m must lie in 1..={}", trajectory.len())));
    }
    let mut suffix = trajectory.last().expect("non-empty").vertices().clone();
    let mut union = BTreeSet::new();
    for m in (1..=trajectory.len()).rev() {
        suffix.retain(|v| trajectory[m - 1].contains(v));
        if m <= m_max {
            union.extend(suffix.iter().cloned());
        }
    }
    Ok(BinaryTree::from_set_unchecked(union))
}

/// [`persistence_union`] for a zig-zag bridge, computed from the spines:
/// a non-root vertex lies in every caterpillar of the window exactly when its
/// parent is a prefix of every spine and it is no deeper than the shortest
/// one.
pub fn zigzag_persistence_union(bridge: &ZigzagBridge, m_max: usize) -> Result<BinaryTree> {
    let spines = bridge.spines();
    let n = spines.len();
    if m_max == 0 || m_max > n {
        return Err(Error::InvalidArgument(format!("m must lie in 1..={n}")));
    }
    let mut common = spines[n - 1].clone();
    let mut union = BTreeSet::from([Word::empty()]);
    for m in (1..=n).rev() {
        common = common.meet(&spines[m - 1]);
        if m <= m_max {
            let depth = common.len().min((m - 1).saturating_sub(1));
            for k in 0..=depth {
                if k + 1 < m {
                    let p = common.prefix(k);
                    union.insert(p.child(0));
                    union.insert(p.child(1));
                }
            }
        }
    }
    Ok(BinaryTree::from_set_unchecked(union))
}

/// `{0,1}^{≤k}` as a tree.
pub fn complete_tree(k: usize) -> BinaryTree {
    BinaryTree::from_set_unchecked((0..=k).flat_map(Word::all_of_length).collect())
}

/// Number of full binary trees with `n` leaves.
pub fn full_tree_count(n: usize) -> u64 {
    catalan(n.saturating_sub(1))
}

/// Exact law to a float map.
pub fn law_to_f64(law: &BTreeMap<FullBinaryTree, BigRational>) -> BTreeMap<FullBinaryTree, f64> {
    law.iter().map(|(t, p)| (t.clone(), p.to_f64().unwrap_or(0.0))).collect()
}

/// Sources of bridge trajectories for the kernel check.
#[derive(Clone, Debug, PartialEq)]
pub enum BridgeSampler {
    Zigzag,
    Interval,
    Binary(SourceMeasure),
    Patricia(SourceMeasure),
    Remy,
}

impl fmt::Display for BridgeSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BridgeSampler::Zigzag => f.write_str("zigzag-bridge"),
            BridgeSampler::Interval => f.write_str("rtree:interval"),
            BridgeSampler::Binary(m) => write!(f, "rtree:binary:{m}"),
            BridgeSampler::Patricia(m) => write!(f, "patricia:{m}"),
            BridgeSampler::Remy => f.write_str("remy"),
        }
    }
}

impl FromStr for BridgeSampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zigzag-bridge" => Ok(BridgeSampler::Zigzag),
            "rtree:interval" => Ok(BridgeSampler::Interval),
            "remy" => Ok(BridgeSampler::Remy),
            "patricia" => Ok(BridgeSampler::Patricia(SourceMeasure::fair())),
            _ => {
                if let Some(m) = s.strip_prefix("rtree:binary:") {
                    Ok(BridgeSampler::Binary(m.parse()?))
                } else if s == "rtree:binary" {
                    Ok(BridgeSampler::Binary(SourceMeasure::fair()))
                } else if let Some(m) = s.strip_prefix("patricia:") {
                    Ok(BridgeSampler::Patricia(m.parse()?))
                } else {
                    Err(Error::InvalidArgument(format!("unknown sampler {s:?}")))
                }
            }
        }
    }
}

impl BridgeSampler {
    /// Shapes `t_1, …, t_{n_max}` of one trajectory.
    pub fn trajectory(&self, n_max: usize, rng: &mut ProjectRng) -> Result<Vec<FullBinaryTree>> {
        match self {
            BridgeSampler::Zigzag => zigzag_bridge(n_max, rng),
            BridgeSampler::Interval => rtree_bridge_shapes(&IntervalZigZag, n_max, rng),
            BridgeSampler::Binary(m) => rtree_bridge_shapes(&BinaryCompletion::new(m.clone()), n_max, rng),
            BridgeSampler::Patricia(m) => patricia_chain(m, n_max, rng.random(), EXPERIMENT_DEPTH_CAP),
            BridgeSampler::Remy => Ok(remy_chain(n_max, rng)),
        }
    }
}

/// Per-endpoint TV between the empirical law of `t_n` given `t_{n+1}` and
/// the exact kernel, averaged with the endpoint frequencies as weights.
/// `trajectories[i][k]` has `k + 1` leaves.
pub fn bridge_kernel_tv(trajectories: &[Vec<FullBinaryTree>], n: usize) -> Result<f64> {
    if trajectories.is_empty() {
        return Err(Error::EmptyInput);
    }
    if n == 0 || trajectories.iter().any(|t| t.len() <= n) {
        return Err(Error::InvalidArgument(format!("trajectories must reach {} leaves", n + 1)));
    }
    let mut groups: BTreeMap<&FullBinaryTree, Vec<FullBinaryTree>> = BTreeMap::new();
    for t in trajectories {
        groups.entry(&t[n]).or_default().push(t[n - 1].clone());
    }
    let total = trajectories.len() as f64;
    let mut acc = 0.0;
    for (end, prevs) in groups {
        let table = exact_backward_kernel(end)?;
        acc += prevs.len() as f64 / total * tv_distance(&empirical(&prevs), &table.as_f64());
    }
    Ok(acc)
}

/// Conditional law of step `n` given step `n+1` against the exact kernel,
/// for every `n ≤ n_max`.
pub fn bridge_kernel_check(sampler: &BridgeSampler, n_max: usize, trials: usize, seed: u64) -> Result<ExperimentReport> {
    if n_max == 0 || trials == 0 {
        return Err(Error::InvalidArgument("n_max and trials must be positive".into()));
    }
    let runs = par_trials(trials, seed, |_, rng| sampler.trajectory(n_max + 1, rng))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut r = ExperimentReport::new("bridge-kernel", trials, seed)
        .param("sampler", sampler)
        .param("n_max", n_max);
    let mut pass = true;
    for n in 1..=n_max {
        let tv = bridge_kernel_tv(&runs, n)?;
        pass &= tv < 0.02;
        r.push(Statistic::new("weighted_tv", tv).at(n).band(0.0, 0.02));
    }
    r.pass = Some(pass);
    Ok(r)
}

/// Empirical law of `t_n` under `sampler`.
pub fn marginal_law(sampler: &BridgeSampler, n: usize, trials: usize, seed: u64) -> Result<Vec<FullBinaryTree>> {
    par_trials(trials, seed, |_, rng| -> Result<FullBinaryTree> {
        Ok(sampler.trajectory(n, rng)?.pop().expect("n ≥ 1"))
    })
    .into_iter()
    .collect()
}

/// Rémy chain at `n` leaves against the uniform law on `𝕊̄_n`.
pub fn remy_uniformity(n: usize, trials: usize, seed: u64) -> Result<ExperimentReport> {
    let samples = marginal_law(&BridgeSampler::Remy, n, trials, seed)?;
    let mut r = uniformity_test(&samples, n)?;
    r.name = "remy-uniform".into();
    r.seed = seed;
    r.parameters.insert("n".into(), n.to_string());
    let tv = r.get("tv", None).expect("tv");
    let p = r.get("p_value", None).expect("p");
    r.pass = Some(tv < 0.02 && p > 0.001);
    Ok(r)
}

/// Backward law into `endpoint` along forward chains, against the exact
/// kernel: one TV per sampler, over the trajectories that reach `endpoint`.
pub fn kernel_universality(
    endpoint: &FullBinaryTree,
    samplers: &[BridgeSampler],
    trials: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    let n = endpoint.leaf_count();
    let table = exact_backward_kernel(endpoint)?.as_f64();
    let mut r = ExperimentReport::new("kernel-universality", trials, seed).param("endpoint", endpoint.to_newick());
    let mut pass = true;
    for (i, s) in samplers.iter().enumerate() {
        let runs = par_trials(trials, derive_seed(seed, i as u64), |_, rng| s.trajectory(n, rng))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let prevs: Vec<FullBinaryTree> = runs.iter().filter(|t| t[n - 1] == *endpoint).map(|t| t[n - 2].clone()).collect();
        if prevs.is_empty() {
            return Err(Error::DegenerateSample(format!("{s} never reached {endpoint}")));
        }
        let tv = tv_distance(&empirical(&prevs), &table);
        pass &= tv < 0.02;
        r.push(Statistic::new(&format!("tv[{s}]"), tv).band(0.0, 0.02));
        r.push(Statistic::new(&format!("hits[{s}]"), prevs.len() as f64));
    }
    r.pass = Some(pass);
    Ok(r)
}

/// Chains for the persistence experiment.
#[derive(Clone, Debug, PartialEq)]
pub enum PersistenceChain {
    Patricia(SourceMeasure),
    ZigzagBridge,
}

/// Over `trials` trajectories of length `window`, the persistence union
/// `⋃_{m ≤ window/2} ⋂_{n=m}^{window} t_n`. For PATRICIA chains the report
/// counts how often it contains `{0,1}^{≤k}`; for the zig-zag bridge how
/// often it equals `{∅, 0, 1}`.
pub fn persistence_experiment(
    chain: &PersistenceChain,
    window: usize,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    if window < 2 || trials == 0 {
        return Err(Error::InvalidArgument("window must be at least 2 and trials positive".into()));
    }
    let m_max = window / 2;
    let hits = par_trials(trials, seed, |_, rng| -> Result<(bool, usize)> {
        match chain {
            PersistenceChain::Patricia(nu) => {
                let traj: Vec<BinaryTree> = patricia_chain(nu, window, rng.random(), EXPERIMENT_DEPTH_CAP)?
                    .into_iter()
                    .map(FullBinaryTree::into_tree)
                    .collect();
                let p = persistence_union(&traj, m_max)?;
                let full = complete_tree(k);
                Ok((full.vertices().iter().all(|v| p.contains(v)), p.len()))
            }
            PersistenceChain::ZigzagBridge => {
                let b = ZigzagBridge::draw(window, rng)?;
                let p = zigzag_persistence_union(&b, m_max)?;
                Ok((p == complete_tree(1), p.len()))
            }
        }
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let freq = hits.iter().filter(|h| h.0).count() as f64 / trials as f64;
    let mean_size = hits.iter().map(|h| h.1 as f64).sum::<f64>() / trials as f64;
    let name = match chain {
        PersistenceChain::Patricia(nu) => format!("patricia:{nu}"),
        PersistenceChain::ZigzagBridge => "zigzag-bridge".into(),
    };
    let mut r = ExperimentReport::new("persistence", trials, seed)
        .param("chain", name)
        .param("window", window)
        .param("m_max", m_max)
        .param("k", k);
    r.push(Statistic::new("frequency", freq).band(0.99, 1.0));
    r.push(Statistic::new("mean_size", mean_size));
    r.pass = Some(freq >= 0.99);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn full(s: &str) -> FullBinaryTree {
        s.parse().unwrap()
    }

    #[test]
    fn kernel_of_cherry_and_caterpillar() {
        let k = exact_backward_kernel(&FullBinaryTree::cherry()).unwrap();
        assert_eq!(k.masses.len(), 1);
        assert_eq!(k.mass(&FullBinaryTree::trivial()), Ratio::one());

        let k = exact_backward_kernel(&full("000,001,01,1")).unwrap();
        assert_eq!(k.mass(&full("00,01,1")), Ratio::one());

        let k = exact_backward_kernel(&full("00,01,10,11")).unwrap();
        assert_eq!(k.mass(&full("00,01,1")), Ratio::new(1, 2));
        assert_eq!(k.mass(&full("0,10,11")), Ratio::new(1, 2));
    }

    #[test]
    fn kernel_masses_sum_to_one() {
        for n in 2..=7 {
            for t in enumerate_full_trees(n).unwrap() {
                let k = exact_backward_kernel(&t).unwrap();
                assert_eq!(k.total(), Ratio::one());
                for p in k.masses.values() {
                    assert_eq!((*p * Ratio::from_integer(n as u64)).denom(), &1);
                }
            }
        }
    }

    #[test]
    fn exact_remy_law_is_uniform() {
        for n in 1..=6 {
            let law = exact_remy_law(n).unwrap();
            assert_eq!(law.len() as u64, catalan(n - 1));
            let p = BigRational::new(BigInt::one(), BigInt::from(catalan(n - 1)));
            assert!(law.values().all(|q| *q == p));
        }
    }

    #[test]
    fn tv_of_point_mass_against_uniform() {
        let trees = enumerate_full_trees(5).unwrap();
        let samples = vec![trees[0].clone(); 100];
        let r = uniformity_test(&samples, 5).unwrap();
        assert!((r.get("tv", None).unwrap() - (1.0 - 1.0 / 14.0)).abs() < 1e-12);
        assert!(matches!(uniformity_test(&samples, 4), Err(Error::WrongLeafCount { .. })));
    }

    #[test]
    fn chi_square_sanity() {
        let observed: BTreeMap<u8, u64> = [(0, 500), (1, 500)].into();
        let expected: BTreeMap<u8, f64> = [(0, 0.5), (1, 0.5)].into();
        let (stat, df, p) = chi_square_gof(&observed, &expected);
        assert_eq!(stat, 0.0);
        assert_eq!(df, 1);
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn neininger_t_at_ten_thousand() {
        assert_eq!(neininger_t(10_000), 45);
        let threshold = 1.0 - (2.0 / (10_000f64).ln()).sqrt();
        assert!((threshold - 0.534).abs() < 1e-3);
    }

    #[test]
    fn conditional_resample_prefixes() {
        let t = radix_from_leaves(&["00", "01", "1"]);
        let mut rng = rng_from_seed(0);
        let mut zs = conditional_resample(&t, &SourceMeasure::fair(), &mut rng).unwrap();
        assert_eq!(zs[0].prefix(2), "00".parse().unwrap());
        assert_eq!(zs[1].prefix(2), "01".parse().unwrap());
        assert_eq!(zs[2].prefix(1), "1".parse().unwrap());
        let trivial = conditional_resample(&BinaryTree::trivial(), &SourceMeasure::fair(), &mut rng).unwrap();
        assert_eq!(trivial.len(), 1);
    }

    #[test]
    fn persistence_of_single_tree_is_itself() {
        let t = full("00,01,1").into_tree();
        assert_eq!(persistence_set(std::slice::from_ref(&t), 1).unwrap(), t);
        assert_eq!(persistence_union(std::slice::from_ref(&t), 1).unwrap(), t);
    }

    #[test]
    fn zigzag_persistence_matches_generic() {
        for seed in 0..30 {
            let b = ZigzagBridge::draw(40, &mut rng_from_seed(seed)).unwrap();
            let traj: Vec<BinaryTree> = b.trajectory().into_iter().map(FullBinaryTree::into_tree).collect();
            for m_max in [1, 2, 3, 10, 20, 40] {
                assert_eq!(
                    zigzag_persistence_union(&b, m_max).unwrap(),
                    persistence_union(&traj, m_max).unwrap(),
                    "seed {seed} m_max {m_max}"
                );
            }
        }
    }

    #[test]
    fn report_csv_has_one_row_per_statistic() {
        let mut r = ExperimentReport::new("x", 10, 1);
        r.push(Statistic::new("a", 1.5).at(4));
        r.push(Statistic::new("b", 2.0).band(1.0, 3.0));
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.contains("x,4,a,1.5,,"));
    }
}
