//! Finite rooted binary trees as prefix-closed sets of words.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{common_prefix_len_capped, Word, WordStream};

/// Largest leaf count accepted by [`enumerate_full_trees`].
pub const ENUMERATION_GUARD: usize = 12;

/// A finite, non-empty, prefix-closed set of words.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryTree {
    vertices: BTreeSet<Word>,
}

impl BinaryTree {
    /// The trivial tree `{∅}`.
    pub fn trivial() -> Self {
        BinaryTree {
            vertices: BTreeSet::from([Word::empty()]),
        }
    }

    /// Validates a vertex set: non-empty and closed under prefixes.
    pub fn from_vertices<I: IntoIterator<Item = Word>>(vertices: I) -> Result<Self> {
        let vertices: BTreeSet<Word> = vertices.into_iter().collect();
        if vertices.is_empty() {
            return Err(Error::NotATree("empty vertex set".into()));
        }
        for v in &vertices {
            if let Some(p) = v.parent() {
                if !vertices.contains(&p) {
                    return Err(Error::NotATree(format!(
                        "vertex {} present but its parent {} is missing",
                        v.to_cli_string(),
                        p.to_cli_string()
                    )));
                }
            }
        }
        Ok(BinaryTree { vertices })
    }

    pub(crate) fn from_set_unchecked(vertices: BTreeSet<Word>) -> Self {
        debug_assert!(BinaryTree::from_vertices(vertices.iter().cloned()).is_ok());
        BinaryTree { vertices }
    }

    pub fn vertices(&self) -> &BTreeSet<Word> {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, v: &Word) -> bool {
        self.vertices.contains(v)
    }

    pub fn is_trivial(&self) -> bool {
        self.vertices.len() == 1
    }

    pub fn out_degree(&self, v: &Word) -> usize {
        usize::from(self.contains(&v.child(0))) + usize::from(self.contains(&v.child(1)))
    }

    pub fn is_leaf(&self, v: &Word) -> bool {
        self.contains(v) && self.out_degree(v) == 0
    }

    /// Leaves in shortlex order.
    pub fn leaves(&self) -> Vec<Word> {
        self.vertices
            .iter()
            .filter(|v| self.out_degree(v) == 0)
            .cloned()
            .collect()
    }

    /// Leaves in depth-first (lexicographic) order.
    pub fn leaves_lex(&self) -> Vec<Word> {
        let mut leaves = self.leaves();
        leaves.sort_by(|a, b| a.bits().cmp(b.bits()));
        leaves
    }

    pub fn leaf_count(&self) -> usize {
        self.vertices.iter().filter(|v| self.out_degree(v) == 0).count()
    }

    /// Maximum leaf depth.
    pub fn height(&self) -> usize {
        self.vertices.iter().map(Word::len).max().unwrap_or(0)
    }

    /// Every vertex has out-degree 0 or 2.
    pub fn is_full(&self) -> bool {
        self.vertices.iter().all(|v| self.out_degree(v) != 1)
    }

    /// Membership in 𝕊: trivial, or at least two leaves each of whose
    /// sibling is a vertex.
    pub fn is_radix_shaped(&self) -> bool {
        if self.is_trivial() {
            return true;
        }
        self.leaves().iter().all(|v| match v.sibling() {
            Some(s) => self.contains(&s),
            None => false,
        })
    }

    /// The subtree rooted at `u`, re-rooted: `{w : uw ∈ t}`.
    pub fn subtree(&self, u: &Word) -> Option<BinaryTree> {
        if !self.contains(u) {
            return None;
        }
        let vertices = self
            .vertices
            .iter()
            .filter_map(|w| w.strip_prefix(u))
            .collect();
        Some(BinaryTree { vertices })
    }

    /// Vertices paired with their labels in DOT and text output.
    pub fn to_dot(&self, name: &str) -> String {
        dot_string(self, name, &BTreeMap::new())
    }
}

impl fmt::Debug for BinaryTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.vertices.iter()).finish()
    }
}

/// `𝐓(y₁,…,y_m)`: all prefixes of all given words.
pub fn span_tree(ys: &[Word]) -> Result<BinaryTree> {
    if ys.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut vertices = BTreeSet::new();
    for y in ys {
        for p in y.prefixes() {
            vertices.insert(p);
        }
    }
    Ok(BinaryTree { vertices })
}

/// Minimal distinguishing prefixes of a list of streams.
///
/// `y_i` has length `1 + max_{j≠i} |z_i ∧ z_j|` when there are at least two
/// inputs, and is `∅` for a single input.
pub fn distinguishing_prefixes(zs: &mut [WordStream], depth_cap: usize) -> Result<Vec<Word>> {
    if zs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut lengths = vec![0usize; zs.len()];
    // Explicit stack of (group, depth); groups only shrink as depth grows.
    let mut stack: Vec<(Vec<usize>, usize)> = vec![((0..zs.len()).collect(), 0)];
    while let Some((group, depth)) = stack.pop() {
        if group.len() == 1 {
            lengths[group[0]] = depth;
            continue;
        }
        if depth >= depth_cap {
            // Surface the cap through the same check used by `meet`.
            let (a, b) = (group[0], group[1]);
            let (left, right) = split_pair(zs, a, b);
            common_prefix_len_capped(left, right, depth_cap)?;
            return Err(Error::DepthCapExceeded { cap: depth_cap });
        }
        let (zeros, ones): (Vec<usize>, Vec<usize>) =
            group.into_iter().partition(|&i| zs[i].bit(depth) == 0);
        for g in [ones, zeros] {
            if !g.is_empty() {
                stack.push((g, depth + 1));
            }
        }
    }
    Ok(zs
        .iter_mut()
        .zip(lengths)
        .map(|(z, l)| z.prefix(l))
        .collect())
}

fn split_pair(zs: &mut [WordStream], a: usize, b: usize) -> (&mut WordStream, &mut WordStream) {
    debug_assert_ne!(a, b);
    if a < b {
        let (lo, hi) = zs.split_at_mut(b);
        (&mut lo[a], &mut hi[0])
    } else {
        let (lo, hi) = zs.split_at_mut(a);
        (&mut hi[0], &mut lo[b])
    }
}

/// The radix sort tree `𝐑(z₁,…,z_n)` and the leaf `y_i` assigned to each input.
pub fn radix_sort_tree(zs: &mut [WordStream], depth_cap: usize) -> Result<(BinaryTree, Vec<Word>)> {
    let ys = distinguishing_prefixes(zs, depth_cap)?;
    let tree = span_tree(&ys)?;
    Ok((tree, ys))
}

/// Height of `Φ(𝐑(z₁,…,z_n))` without building either tree: the largest
/// number of branching ancestors of any leaf.
pub fn patricia_height(zs: &mut [WordStream], depth_cap: usize) -> Result<usize> {
    if zs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut best = 0;
    let mut stack: Vec<(Vec<usize>, usize, usize)> = vec![((0..zs.len()).collect(), 0, 0)];
    while let Some((group, depth, branchings)) = stack.pop() {
        if group.len() == 1 {
            best = best.max(branchings);
            continue;
        }
        if depth >= depth_cap {
            return Err(Error::DepthCapExceeded { cap: depth_cap });
        }
        let (zeros, ones): (Vec<usize>, Vec<usize>) =
            group.into_iter().partition(|&i| zs[i].bit(depth) == 0);
        if zeros.is_empty() || ones.is_empty() {
            let g = if zeros.is_empty() { ones } else { zeros };
            stack.push((g, depth + 1, branchings));
        } else {
            stack.push((zeros, depth + 1, branchings + 1));
            stack.push((ones, depth + 1, branchings + 1));
        }
    }
    Ok(best)
}

/// The image of `v` under `Φ`: the directions taken at its branching
/// ancestors.
fn contracted_word(s: &BinaryTree, v: &Word) -> Word {
    Word::from_bits(
        (0..v.len())
            .filter(|&k| s.out_degree(&v.prefix(k)) == 2)
            .map(|k| v.bit(k)),
    )
}

/// The PATRICIA contraction `Φ`, removing out-degree-1 vertices and closing
/// the gaps.
pub fn patricia_contract(s: &BinaryTree) -> Result<FullBinaryTree> {
    if !s.is_radix_shaped() {
        return Err(Error::NotRadixShaped(format!("{s:?}")));
    }
    let vertices = s
        .vertices
        .iter()
        .filter(|v| s.out_degree(v) != 1)
        .map(|v| contracted_word(s, v))
        .collect();
    Ok(FullBinaryTree(BinaryTree { vertices }))
}

/// Map from each vertex of `s` with out-degree 0 or 2 to its image in `Φ(s)`.
pub fn patricia_correspondence(s: &BinaryTree) -> BTreeMap<Word, Word> {
    s.vertices
        .iter()
        .filter(|v| s.out_degree(v) != 1)
        .map(|v| (v.clone(), contracted_word(s, v)))
        .collect()
}

/// A binary tree in which every vertex has zero or two children.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FullBinaryTree(BinaryTree);

impl FullBinaryTree {
    pub fn new(tree: BinaryTree) -> Result<Self> {
        if tree.is_full() {
            Ok(FullBinaryTree(tree))
        } else {
            Err(Error::NotFull(format!("{tree:?}")))
        }
    }

    pub fn from_vertices<I: IntoIterator<Item = Word>>(vertices: I) -> Result<Self> {
        FullBinaryTree::new(BinaryTree::from_vertices(vertices)?)
    }

    /// The full tree spanned by the given leaves.
    pub fn from_leaves(leaves: &[Word]) -> Result<Self> {
        let tree = span_tree(leaves)?;
        if tree.leaf_count() != leaves.len() {
            return Err(Error::NotFull("some listed words are not leaves".into()));
        }
        FullBinaryTree::new(tree)
    }

    pub(crate) fn from_set_unchecked(vertices: BTreeSet<Word>) -> Self {
        let t = BinaryTree::from_set_unchecked(vertices);
        debug_assert!(t.is_full());
        FullBinaryTree(t)
    }

    pub fn trivial() -> Self {
        FullBinaryTree(BinaryTree::trivial())
    }

    /// ℵ = `{∅, 0, 1}`.
    pub fn cherry() -> Self {
        FullBinaryTree::from_leaves(&[Word::from_bits([0]), Word::from_bits([1])])
            .expect("cherry is full")
    }

    pub fn as_tree(&self) -> &BinaryTree {
        &self.0
    }

    pub fn into_tree(self) -> BinaryTree {
        self.0
    }

    /// Newick-like text: leaves are `*`, internal vertices `(L,R)`.
    pub fn to_newick(&self) -> String {
        newick_string(self, &|_| "*".to_string())
    }

    /// Graft the two subtrees under a new root.
    pub fn join(left: &FullBinaryTree, right: &FullBinaryTree) -> FullBinaryTree {
        let mut vertices = BTreeSet::from([Word::empty()]);
        for (b, side) in [(0u8, left), (1u8, right)] {
            let prefix = Word::from_bits([b]);
            vertices.extend(side.vertices().iter().map(|w| prefix.concat(w)));
        }
        FullBinaryTree(BinaryTree { vertices })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(TreeJson {
            vertices: self.vertices().iter().cloned().collect(),
            labels: None,
        })
        .expect("tree json")
    }
}

impl Deref for FullBinaryTree {
    type Target = BinaryTree;

    fn deref(&self) -> &BinaryTree {
        &self.0
    }
}

impl fmt::Debug for FullBinaryTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_newick())
    }
}

impl fmt::Display for FullBinaryTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_newick())
    }
}

impl FromStr for FullBinaryTree {
    type Err = Error;

    /// Accepts Newick-like text (`((*,*),*)`) or a comma-separated leaf list
    /// (`000,001,01,1`; `e` for the trivial tree).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('(') || s == "*" {
            let (tree, _) = parse_newick(s)?;
            return Ok(tree);
        }
        let leaves = s
            .split(',')
            .map(|w| w.trim().parse())
            .collect::<Result<Vec<Word>>>()?;
        FullBinaryTree::from_leaves(&leaves)
    }
}

/// Every full binary tree with `n` leaves, each once, ordered by left-subtree
/// leaf count and then recursively by the subtrees.
pub fn enumerate_full_trees(n: usize) -> Result<Vec<FullBinaryTree>> {
    if n == 0 {
        return Err(Error::InvalidArgument("leaf count must be at least 1".into()));
    }
    if n > ENUMERATION_GUARD {
        return Err(Error::TooLarge {
            n,
            max: ENUMERATION_GUARD,
        });
    }
    let mut table: Vec<Vec<FullBinaryTree>> = vec![Vec::new(), vec![FullBinaryTree::trivial()]];
    for m in 2..=n {
        let mut trees = Vec::new();
        for k in 1..m {
            for l in &table[k] {
                for r in &table[m - k] {
                    trees.push(FullBinaryTree::join(l, r));
                }
            }
        }
        table.push(trees);
    }
    Ok(table.swap_remove(n))
}

/// Catalan number `C_m`.
pub fn catalan(m: usize) -> u64 {
    let mut c: u64 = 1;
    for k in 0..m as u64 {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c
}

/// A full binary tree whose leaves carry distinct labels.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledTree {
    tree: FullBinaryTree,
    labels: BTreeMap<Word, u32>,
}

impl LabeledTree {
    pub fn new(tree: FullBinaryTree, labels: BTreeMap<Word, u32>) -> Result<Self> {
        let leaves: BTreeSet<Word> = tree.leaves().into_iter().collect();
        let keys: BTreeSet<Word> = labels.keys().cloned().collect();
        if leaves != keys {
            return Err(Error::BadLabelSet("labels must cover exactly the leaves".into()));
        }
        let values: BTreeSet<u32> = labels.values().copied().collect();
        if values.len() != labels.len() {
            return Err(Error::BadLabelSet("leaf labels must be distinct".into()));
        }
        Ok(LabeledTree { tree, labels })
    }

    /// Labels the leaves in lexicographic order with the given labels.
    pub fn from_lex_labels(tree: FullBinaryTree, labels: &[u32]) -> Result<Self> {
        let leaves = tree.leaves_lex();
        if leaves.len() != labels.len() {
            return Err(Error::BadLabelSet(format!(
                "{} labels for {} leaves",
                labels.len(),
                leaves.len()
            )));
        }
        let map = leaves.into_iter().zip(labels.iter().copied()).collect();
        LabeledTree::new(tree, map)
    }

    pub(crate) fn from_parts_unchecked(tree: FullBinaryTree, labels: BTreeMap<Word, u32>) -> Self {
        LabeledTree { tree, labels }
    }

    pub fn tree(&self) -> &FullBinaryTree {
        &self.tree
    }

    pub fn labels(&self) -> &BTreeMap<Word, u32> {
        &self.labels
    }

    /// The label set, sorted.
    pub fn label_set(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.labels.values().copied().collect();
        v.sort_unstable();
        v
    }

    pub fn label_of(&self, leaf: &Word) -> Option<u32> {
        self.labels.get(leaf).copied()
    }

    pub fn leaf_of(&self, label: u32) -> Option<&Word> {
        self.labels.iter().find(|(_, &l)| l == label).map(|(w, _)| w)
    }

    /// Drops the labels.
    pub fn strip(&self) -> FullBinaryTree {
        self.tree.clone()
    }

    pub fn to_newick(&self) -> String {
        newick_string(&self.tree, &|w| self.labels[w].to_string())
    }

    pub fn to_dot(&self, name: &str) -> String {
        dot_string(&self.tree, name, &self.labels)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(TreeJson {
            vertices: self.tree.vertices().iter().cloned().collect(),
            labels: Some(self.labels.clone()),
        })
        .expect("tree json")
    }
}

impl fmt::Debug for LabeledTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_newick())
    }
}

impl FromStr for LabeledTree {
    type Err = Error;

    /// Newick-like text with numeric leaf labels, e.g. `((1,3),2)`.
    fn from_str(s: &str) -> Result<Self> {
        let (tree, labels) = parse_newick(s.trim())?;
        let labels = labels
            .into_iter()
            .map(|(w, l)| {
                l.parse::<u32>()
                    .map(|l| (w, l))
                    .map_err(|_| Error::Parse(format!("leaf label {l:?} is not a number")))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        LabeledTree::new(tree, labels)
    }
}

/// JSON form shared by plain and labeled trees.
#[derive(Serialize, Deserialize)]
pub struct TreeJson {
    pub vertices: Vec<Word>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub labels: Option<BTreeMap<Word, u32>>,
}

impl TreeJson {
    pub fn into_full(self) -> Result<FullBinaryTree> {
        FullBinaryTree::from_vertices(self.vertices)
    }

    pub fn into_labeled(self) -> Result<LabeledTree> {
        let labels = self
            .labels
            .clone()
            .ok_or_else(|| Error::BadLabelSet("missing \"labels\"".into()))?;
        LabeledTree::new(self.into_full()?, labels)
    }
}

impl Serialize for FullBinaryTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl Serialize for LabeledTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

fn newick_string(t: &BinaryTree, leaf: &dyn Fn(&Word) -> String) -> String {
    fn go(t: &BinaryTree, v: &Word, leaf: &dyn Fn(&Word) -> String, out: &mut String) {
        if t.out_degree(v) == 0 {
            out.push_str(&leaf(v));
        } else {
            out.push('(');
            go(t, &v.child(0), leaf, out);
            out.push(',');
            go(t, &v.child(1), leaf, out);
            out.push(')');
        }
    }
    let mut out = String::new();
    go(t, &Word::empty(), leaf, &mut out);
    out
}

fn parse_newick(s: &str) -> Result<(FullBinaryTree, BTreeMap<Word, String>)> {
    fn go(
        chars: &[char],
        pos: &mut usize,
        at: Word,
        vertices: &mut BTreeSet<Word>,
        labels: &mut BTreeMap<Word, String>,
    ) -> Result<()> {
        vertices.insert(at.clone());
        if chars.get(*pos) == Some(&'(') {
            *pos += 1;
            go(chars, pos, at.child(0), vertices, labels)?;
            expect(chars, pos, ',')?;
            go(chars, pos, at.child(1), vertices, labels)?;
            expect(chars, pos, ')')?;
        } else {
            let start = *pos;
            while *pos < chars.len() && !matches!(chars[*pos], ',' | ')' | '(') {
                *pos += 1;
            }
            let name: String = chars[start..*pos].iter().collect::<String>().trim().to_string();
            if name.is_empty() {
                return Err(Error::Parse(format!("empty leaf at offset {start}")));
            }
            labels.insert(at, name);
        }
        Ok(())
    }
    fn expect(chars: &[char], pos: &mut usize, c: char) -> Result<()> {
        if chars.get(*pos) == Some(&c) {
            *pos += 1;
            Ok(())
        } else {
            Err(Error::Parse(format!("expected {c:?} at offset {pos}")))
        }
    }
    let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace() && *c != ';').collect();
    let mut pos = 0;
    let mut vertices = BTreeSet::new();
    let mut labels = BTreeMap::new();
    go(&chars, &mut pos, Word::empty(), &mut vertices, &mut labels)?;
    if pos != chars.len() {
        return Err(Error::Parse(format!("trailing input at offset {pos}")));
    }
    Ok((FullBinaryTree::from_vertices(vertices)?, labels))
}

fn dot_string(t: &BinaryTree, name: &str, labels: &BTreeMap<Word, u32>) -> String {
    let id = |w: &Word| format!("\"v{}\"", w);
    let mut out = format!("digraph {name} {{\n  ordering=out;\n");
    for v in t.vertices() {
        let text = match labels.get(v) {
            Some(l) => format!("{} [{}]", v.to_cli_string(), l),
            None => v.to_cli_string(),
        };
        let shape = if t.out_degree(v) == 0 { "box" } else { "ellipse" };
        out.push_str(&format!("  {} [label=\"{}\", shape={}];\n", id(v), text, shape));
    }
    for v in t.vertices() {
        for (b, style) in [(0u8, "solid"), (1u8, "dashed")] {
            let c = v.child(b);
            if t.contains(&c) {
                out.push_str(&format!(
                    "  {} -> {} [label=\"{}\", style={}];\n",
                    id(v),
                    id(&c),
                    b,
                    style
                ));
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{SourceMeasure, DEFAULT_DEPTH_CAP};

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn words(list: &[&str]) -> Vec<Word> {
        list.iter().map(|s| w(s)).collect()
    }

    #[test]
    fn span_examples() {
        assert_eq!(span_tree(&[Word::empty()]).unwrap(), BinaryTree::trivial());
        let t = span_tree(&words(&["000", "001", "1"])).unwrap();
        assert_eq!(
            t.vertices().iter().cloned().collect::<Vec<_>>(),
            words(&["", "0", "1", "00", "000", "001"])
        );
        let t = span_tree(&words(&["0", "01"])).unwrap();
        assert_eq!(t.leaves(), words(&["01"]));
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn radix_tree_of_three_streams() {
        let fair = SourceMeasure::fair();
        let mut zs = vec![
            fair.sample_conditioned(&w("000"), 1).unwrap(),
            fair.sample_conditioned(&w("001"), 2).unwrap(),
            fair.sample_conditioned(&w("1"), 3).unwrap(),
        ];
        let (t, ys) = radix_sort_tree(&mut zs, DEFAULT_DEPTH_CAP).unwrap();
        assert_eq!(ys, words(&["000", "001", "1"]));
        assert_eq!(t.leaves_lex(), ys);
        assert!(t.is_radix_shaped());

        let (single, ys) = radix_sort_tree(&mut zs[..1], DEFAULT_DEPTH_CAP).unwrap();
        assert_eq!(single, BinaryTree::trivial());
        assert_eq!(ys, vec![Word::empty()]);
    }

    #[test]
    fn radix_rejects_identical_streams() {
        let fair = SourceMeasure::fair();
        let mut zs = vec![fair.sample(4), fair.sample(4)];
        assert_eq!(
            radix_sort_tree(&mut zs, 64).unwrap_err(),
            Error::DepthCapExceeded { cap: 64 }
        );
        assert_eq!(radix_sort_tree(&mut [], 64).unwrap_err(), Error::EmptyInput);
    }

    #[test]
    fn contraction_examples() {
        let trivial = BinaryTree::trivial();
        assert_eq!(patricia_contract(&trivial).unwrap(), FullBinaryTree::trivial());
        let s2 = span_tree(&words(&["000", "001", "1"])).unwrap();
        let s1 = FullBinaryTree::from_leaves(&words(&["00", "01", "1"])).unwrap();
        assert_eq!(patricia_contract(&s2).unwrap(), s1);
        assert_eq!(patricia_contract(&s1).unwrap(), s1);
        let bad = span_tree(&words(&["00", "1"])).unwrap();
        assert!(matches!(patricia_contract(&bad), Err(Error::NotRadixShaped(_))));
    }

    #[test]
    fn full_trees_are_fixed_points_of_contraction() {
        for n in 1..=5 {
            for t in enumerate_full_trees(n).unwrap() {
                assert_eq!(patricia_contract(&t).unwrap(), t);
            }
        }
    }

    #[test]
    fn enumeration_counts_are_catalan() {
        for n in 1..=ENUMERATION_GUARD {
            let trees = enumerate_full_trees(n).unwrap();
            assert_eq!(trees.len() as u64, catalan(n - 1));
            let distinct: BTreeSet<_> = trees.iter().collect();
            assert_eq!(distinct.len(), trees.len());
            assert!(trees.iter().all(|t| t.is_full() && t.leaf_count() == n));
        }
        assert_eq!(enumerate_full_trees(2).unwrap(), vec![FullBinaryTree::cherry()]);
        assert!(matches!(enumerate_full_trees(13), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn heights() {
        assert_eq!(BinaryTree::trivial().height(), 0);
        assert_eq!(FullBinaryTree::cherry().height(), 1);
        let t = FullBinaryTree::from_leaves(&words(&["000", "001", "01", "1"])).unwrap();
        assert_eq!(t.height(), 3);
    }

    #[test]
    fn newick_round_trip() {
        for n in 1..=6 {
            for t in enumerate_full_trees(n).unwrap() {
                let text = t.to_newick();
                assert_eq!(text.parse::<FullBinaryTree>().unwrap(), t);
            }
        }
        let t: FullBinaryTree = "000,001,01,1".parse().unwrap();
        assert_eq!(t.to_newick(), "(((*,*),*),*)");
        assert_eq!("e".parse::<FullBinaryTree>().unwrap(), FullBinaryTree::trivial());
    }

    #[test]
    fn labeled_newick_and_json_round_trip() {
        let t: FullBinaryTree = "000,001,01,1".parse().unwrap();
        let lt = LabeledTree::from_lex_labels(t, &[1, 4, 2, 3]).unwrap();
        assert_eq!(lt.to_newick(), "(((1,4),2),3)");
        assert_eq!(lt.to_newick().parse::<LabeledTree>().unwrap(), lt);
        let json = serde_json::to_string(&lt).unwrap();
        let back: TreeJson = serde_json::from_str(&json).unwrap();
        assert_eq!(back.into_labeled().unwrap(), lt);
        assert!(json.starts_with("{\"labels\":{\"000\":1"));
    }

    #[test]
    fn plain_json_is_shortlex() {
        let t: FullBinaryTree = "000,001,01,1".parse().unwrap();
        assert_eq!(
            serde_json::to_string(&t).unwrap(),
            r#"{"vertices":["","0","1","00","01","000","001"]}"#
        );
    }

    #[test]
    fn dot_lists_left_child_first() {
        let dot = FullBinaryTree::cherry().to_dot("t");
        let left = dot.find("\"v\" -> \"v0\"").unwrap();
        let right = dot.find("\"v\" -> \"v1\"").unwrap();
        assert!(left < right);
    }

    #[test]
    fn patricia_height_matches_contracted_tree() {
        let fair = SourceMeasure::harmonic();
        for seed in 0..20 {
            let mut zs: Vec<_> = (0..30).map(|i| fair.sample(seed * 100 + i)).collect();
            let (t, _) = radix_sort_tree(&mut zs, DEFAULT_DEPTH_CAP).unwrap();
            let h = patricia_contract(&t).unwrap().height();
            assert_eq!(patricia_height(&mut zs, DEFAULT_DEPTH_CAP).unwrap(), h);
        }
    }
}
