//! Forward dynamics of the radix, PATRICIA and Rémy chains, and their
//! backward operators.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, ProjectRng};
use crate::trees::{patricia_contract, patricia_correspondence, BinaryTree, FullBinaryTree, LabeledTree};
use crate::words::{common_prefix_len_capped, SourceMeasure, Word, WordStream};

/// `κ(t, v)`: the radix tree with input `v` removed.
pub fn kappa(t: &BinaryTree, v: &Word) -> Result<BinaryTree> {
    if !t.is_leaf(v) {
        return Err(Error::NotALeaf(v.to_cli_string()));
    }
    if !t.is_radix_shaped() {
        return Err(Error::NotRadixShaped(format!("{t:?}")));
    }
    if t.is_trivial() {
        return Err(Error::TrivialTree);
    }
    let sibling = v.sibling().expect("non-root leaf");
    let mut vertices = t.vertices().clone();
    if !t.is_leaf(&sibling) {
        vertices.remove(v);
        return Ok(BinaryTree::from_set_unchecked(vertices));
    }
    let m = v.len();
    let ell = (1..m)
        .rev()
        .find(|&l| {
            let u = v.prefix(l);
            t.contains(&u.sibling().expect("non-empty prefix"))
        })
        .unwrap_or(0);
    for p in ell + 1..=m {
        vertices.remove(&v.prefix(p));
    }
    vertices.remove(&sibling);
    Ok(BinaryTree::from_set_unchecked(vertices))
}

/// `κ̄(t̄, v)`: delete leaf `v` and its sibling and close the gap.
pub fn kappa_bar(t: &FullBinaryTree, v: &Word) -> Result<FullBinaryTree> {
    if !t.is_leaf(v) {
        return Err(Error::NotALeaf(v.to_cli_string()));
    }
    if t.is_trivial() {
        return Err(Error::TrivialTree);
    }
    let m = v.len();
    let parent = v.parent().expect("non-root leaf");
    let sibling = v.sibling().expect("non-root leaf");
    let mut vertices: BTreeSet<Word> = t
        .vertices()
        .iter()
        .filter(|w| !parent.is_strict_prefix_of(w))
        .cloned()
        .collect();
    for w in t.vertices() {
        if sibling.is_prefix_of(w) {
            vertices.insert(w.without_bit(m - 1));
        }
    }
    Ok(FullBinaryTree::from_set_unchecked(vertices))
}

/// One step of the backward kernel: `κ̄` at a uniformly chosen leaf
/// (indexed in shortlex order).
pub fn backward_sample(t: &FullBinaryTree, rng: &mut ProjectRng) -> Result<FullBinaryTree> {
    if t.is_trivial() {
        return Err(Error::TrivialTree);
    }
    let leaves = t.leaves();
    let v = &leaves[rng.random_range(0..leaves.len())];
    kappa_bar(t, v)
}

/// Cuts the subtree at `v`, puts a cherry in its place and re-attaches the
/// subtree below side `c` of the cherry.
pub fn remy_graft(t: &FullBinaryTree, v: &Word, c: u8) -> Result<FullBinaryTree> {
    if !t.contains(v) {
        return Err(Error::InvalidArgument(format!("{} is not a vertex", v.to_cli_string())));
    }
    let k = v.len();
    let moved = v.child(c);
    let mut vertices = BTreeSet::new();
    for w in t.vertices() {
        if v.is_prefix_of(w) {
            vertices.insert(moved.concat(&Word::from_bits(w.bits()[k..].iter().copied())));
        } else {
            vertices.insert(w.clone());
        }
    }
    vertices.insert(v.clone());
    vertices.insert(v.child(1 - c));
    Ok(FullBinaryTree::from_set_unchecked(vertices))
}

/// One Rémy step: a uniform vertex (shortlex index) and a uniform side.
pub fn remy_step(t: &FullBinaryTree, rng: &mut ProjectRng) -> FullBinaryTree {
    let idx = rng.random_range(0..t.len());
    let v = t.vertices().iter().nth(idx).expect("index in range").clone();
    let c = u8::from(rng.random_bool(0.5));
    remy_graft(t, &v, c).expect("vertex of t")
}

/// Rémy trajectory `t₁ = {∅}, …, t_{n_max}`.
pub fn remy_chain(n_max: usize, rng: &mut ProjectRng) -> Vec<FullBinaryTree> {
    let mut out = Vec::with_capacity(n_max);
    let mut t = FullBinaryTree::trivial();
    for n in 1..=n_max {
        if n > 1 {
            t = remy_step(&t, rng);
        }
        out.push(t.clone());
    }
    out
}

/// Deletes the leaf with the largest label `n+1` and its sibling; labels of
/// surviving leaves follow their leaves.
pub fn labeled_backward_step(lt: &LabeledTree) -> Result<LabeledTree> {
    let labels = lt.label_set();
    let top = labels.len() as u32;
    if labels.len() < 2 || labels.iter().copied().ne(1..=top) {
        return Err(Error::BadLabelSet(format!(
            "expected labels 1..=n+1 with n ≥ 1, found {labels:?}"
        )));
    }
    let v = lt.leaf_of(top).expect("label present").clone();
    let m = v.len();
    let sibling = v.sibling().expect("non-root leaf");
    let tree = kappa_bar(lt.tree(), &v)?;
    let relabeled: BTreeMap<Word, u32> = lt
        .labels()
        .iter()
        .filter(|(w, _)| **w != v)
        .map(|(w, &l)| {
            if sibling.is_prefix_of(w) {
                (w.without_bit(m - 1), l)
            } else {
                (w.clone(), l)
            }
        })
        .collect();
    Ok(LabeledTree::from_parts_unchecked(tree, relabeled))
}

/// Arena-backed Rémy chain with O(1) steps, for large leaf counts.
///
/// Vertices are chosen uniformly by arena index rather than shortlex index,
/// which gives the same law.
#[derive(Clone, Debug)]
pub struct RemyGrower {
    parent: Vec<usize>,
    children: Vec<[usize; 2]>,
    root: usize,
}

const NONE: usize = usize::MAX;

impl Default for RemyGrower {
    fn default() -> Self {
        Self::new()
    }
}

impl RemyGrower {
    pub fn new() -> Self {
        RemyGrower {
            parent: vec![NONE],
            children: vec![[NONE, NONE]],
            root: 0,
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.parent.len().div_ceil(2)
    }

    pub fn step(&mut self, rng: &mut ProjectRng) {
        let v = rng.random_range(0..self.parent.len());
        let c = usize::from(rng.random_bool(0.5));
        let u = self.parent.len();
        let leaf = u + 1;
        let p = self.parent[v];
        self.parent.push(p);
        let mut kids = [NONE, NONE];
        kids[c] = v;
        kids[1 - c] = leaf;
        self.children.push(kids);
        self.parent.push(u);
        self.children.push([NONE, NONE]);
        if p == NONE {
            self.root = u;
        } else {
            let slot = usize::from(self.children[p][1] == v);
            self.children[p][slot] = u;
        }
        self.parent[v] = u;
    }

    pub fn grow_to(&mut self, leaves: usize, rng: &mut ProjectRng) {
        while self.leaf_count() < leaves {
            self.step(rng);
        }
    }

    pub fn height(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(self.root, 0usize)];
        while let Some((v, d)) = stack.pop() {
            best = best.max(d);
            for &c in &self.children[v] {
                if c != NONE {
                    stack.push((c, d + 1));
                }
            }
        }
        best
    }

    pub fn to_tree(&self) -> FullBinaryTree {
        let mut vertices = BTreeSet::new();
        let mut stack = vec![(self.root, Word::empty())];
        while let Some((v, w)) = stack.pop() {
            for (b, &c) in self.children[v].iter().enumerate() {
                if c != NONE {
                    stack.push((c, w.child(b as u8)));
                }
            }
            vertices.insert(w);
        }
        FullBinaryTree::from_set_unchecked(vertices)
    }
}

/// The radix sort chain driven by i.i.d. draws from a source measure.
///
/// Each input's stream is retained and read further only when a later input
/// shares its current leaf.
#[derive(Clone, Debug)]
pub struct RadixChain {
    measure: SourceMeasure,
    seed: u64,
    depth_cap: usize,
    streams: Vec<WordStream>,
    leaves: Vec<Word>,
    vertices: BTreeSet<Word>,
}

impl RadixChain {
    pub fn new(measure: SourceMeasure, seed: u64, depth_cap: usize) -> Self {
        RadixChain {
            measure,
            seed,
            depth_cap,
            streams: Vec::new(),
            leaves: Vec::new(),
            vertices: BTreeSet::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.streams.len()
    }

    /// Draws `Z_{n+1}` and inserts it.
    pub fn push(&mut self) -> Result<()> {
        let z = self.measure.sample(derive_seed(self.seed, self.streams.len() as u64));
        self.push_stream(z)
    }

    /// Inserts a given stream as the next input.
    pub fn push_stream(&mut self, mut z: WordStream) -> Result<()> {
        if self.streams.is_empty() {
            self.streams.push(z);
            self.leaves.push(Word::empty());
            self.vertices.insert(Word::empty());
            return Ok(());
        }
        let mut best = 0;
        let mut hit = None;
        for (j, old) in self.streams.iter_mut().enumerate() {
            let l = common_prefix_len_capped(&mut z, old, self.depth_cap)?;
            if l >= self.leaves[j].len() {
                hit = Some((j, l));
            }
            best = best.max(l);
        }
        if let Some((j, l)) = hit {
            let extended = self.streams[j].prefix(l + 1);
            self.vertices.extend(extended.prefixes());
            self.leaves[j] = extended;
        }
        let y = z.prefix(best + 1);
        self.vertices.extend(y.prefixes());
        self.leaves.push(y);
        self.streams.push(z);
        Ok(())
    }

    /// Leaf `y_i` of input `i` (0-based).
    pub fn leaf(&self, i: usize) -> &Word {
        &self.leaves[i]
    }

    pub fn leaves(&self) -> &[Word] {
        &self.leaves
    }

    pub fn streams(&self) -> &[WordStream] {
        &self.streams
    }

    pub fn radix_tree(&self) -> BinaryTree {
        BinaryTree::from_set_unchecked(self.vertices.clone())
    }

    pub fn patricia_tree(&self) -> FullBinaryTree {
        patricia_contract(&self.radix_tree()).expect("radix trees lie in 𝕊")
    }

    /// The leaf of `Φ(t)` that corresponds to input `i`.
    pub fn patricia_leaf(&self, i: usize) -> Word {
        let t = self.radix_tree();
        patricia_correspondence(&t)[&self.leaves[i]].clone()
    }
}

/// `(𝐑(Z₁,…,Z_n))_{n ≤ n_max}`.
pub fn radix_chain(nu: &SourceMeasure, n_max: usize, seed: u64, depth_cap: usize) -> Result<Vec<BinaryTree>> {
    let mut chain = RadixChain::new(nu.clone(), seed, depth_cap);
    let mut out = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        chain.push()?;
        out.push(chain.radix_tree());
    }
    Ok(out)
}

/// `(Φ(𝐑(Z₁,…,Z_n)))_{n ≤ n_max}`.
pub fn patricia_chain(nu: &SourceMeasure, n_max: usize, seed: u64, depth_cap: usize) -> Result<Vec<FullBinaryTree>> {
    Ok(radix_chain(nu, n_max, seed, depth_cap)?
        .iter()
        .map(|t| patricia_contract(t).expect("radix trees lie in 𝕊"))
        .collect())
}

/// One line of a JSONL trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub n: usize,
    pub vertices: Vec<Word>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<BTreeMap<Word, u32>>,
    pub seed: u64,
    pub chain: String,
}

impl StepRecord {
    pub fn new(n: usize, tree: &BinaryTree, seed: u64, chain: &str) -> Self {
        StepRecord {
            n,
            vertices: tree.vertices().iter().cloned().collect(),
            labels: None,
            seed,
            chain: chain.to_string(),
        }
    }

    pub fn labeled(n: usize, tree: &LabeledTree, seed: u64, chain: &str) -> Self {
        StepRecord {
            labels: Some(tree.labels().clone()),
            ..StepRecord::new(n, tree.tree(), seed, chain)
        }
    }
}
