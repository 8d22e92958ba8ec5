//! Finite didendritic systems and their correspondence with leaf-labeled
//! full binary trees.
//!
//! A system on a label set `𝒩` is an equivalence relation on `𝒩 × 𝒩` whose
//! classes `⟨i,j⟩` carry three strict partial orders `<`, `<_L` and `<_R`.
//! Classes are identified by their smallest member pair in lexicographic
//! order, and the orders are stored as full transitive relations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::ProjectRng;
use crate::trees::{FullBinaryTree, LabeledTree};
use crate::words::Word;

/// Largest label set the module accepts.
pub const LABEL_GUARD: usize = 64;

/// Canonical class identifier: the smallest pair `(i, j)` in the class.
pub type ClassId = (u32, u32);

type Relation = BTreeSet<(ClassId, ClassId)>;

/// The left/right prescription for an ordered pair of distinct labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arrow {
    /// `↷`: `⟨i,j⟩ <_L i` and `⟨i,j⟩ <_R j`.
    Cw,
    /// `↶`: `⟨i,j⟩ <_R i` and `⟨i,j⟩ <_L j`.
    Ccw,
}

impl Arrow {
    pub fn flip(self) -> Arrow {
        match self {
            Arrow::Cw => Arrow::Ccw,
            Arrow::Ccw => Arrow::Cw,
        }
    }
}

/// One failed axiom instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// `A`–`E` for the axioms, `order` for partial-order laws, `structure`
    /// for malformed input.
    pub axiom: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) {}", self.axiom, self.detail)
    }
}

fn violation(axiom: &str, detail: String) -> Violation {
    Violation {
        axiom: axiom.to_string(),
        detail,
    }
}

fn show(c: ClassId) -> String {
    format!("({},{})", c.0, c.1)
}

fn check_label_count(n: usize) -> Result<()> {
    if n > LABEL_GUARD {
        Err(Error::TooManyLabels { n, max: LABEL_GUARD })
    } else {
        Ok(())
    }
}

/// Assigns canonical ids to the classes induced by `key`.
fn canonical_classes<K: Ord + Clone>(
    labels: &[u32],
    key: impl Fn(u32, u32) -> K,
) -> (BTreeMap<(u32, u32), ClassId>, BTreeMap<K, ClassId>) {
    let mut by_key: BTreeMap<K, ClassId> = BTreeMap::new();
    let mut class_of = BTreeMap::new();
    for &i in labels {
        for &j in labels {
            let k = key(i, j);
            let id = *by_key.entry(k).or_insert((i, j));
            class_of.insert((i, j), id);
        }
    }
    (class_of, by_key)
}

fn transitive_closure(rel: &mut Relation) {
    loop {
        let mut added = Vec::new();
        let mut succ: BTreeMap<ClassId, Vec<ClassId>> = BTreeMap::new();
        for &(x, y) in rel.iter() {
            succ.entry(x).or_default().push(y);
        }
        for &(x, y) in rel.iter() {
            for &z in succ.get(&y).into_iter().flatten() {
                if !rel.contains(&(x, z)) {
                    added.push((x, z));
                }
            }
        }
        if added.is_empty() {
            return;
        }
        rel.extend(added);
    }
}

/// A didendritic system (or a candidate for one) on a finite label set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteDDS {
    labels: Vec<u32>,
    class_of: BTreeMap<(u32, u32), ClassId>,
    lt: Relation,
    lt_l: Relation,
    lt_r: Relation,
}

impl FiniteDDS {
    /// Assembles a candidate system from explicit parts. Class ids are
    /// canonicalized; nothing else is checked (see [`check_axioms`]).
    pub fn from_parts(
        labels: Vec<u32>,
        class_of: BTreeMap<(u32, u32), ClassId>,
        lt: Relation,
        lt_l: Relation,
        lt_r: Relation,
    ) -> Result<Self> {
        let mut labels = labels;
        labels.sort_unstable();
        labels.dedup();
        if labels.is_empty() {
            return Err(Error::EmptyInput);
        }
        check_label_count(labels.len())?;
        // Rename every class to its smallest member pair.
        let mut smallest: BTreeMap<ClassId, ClassId> = BTreeMap::new();
        for (&pair, &id) in &class_of {
            let e = smallest.entry(id).or_insert(pair);
            if pair < *e {
                *e = pair;
            }
        }
        let rename = |c: &ClassId| smallest.get(c).copied().unwrap_or(*c);
        let map_rel = |r: &Relation| r.iter().map(|(a, b)| (rename(a), rename(b))).collect();
        Ok(FiniteDDS {
            class_of: class_of.iter().map(|(&p, id)| (p, rename(id))).collect(),
            lt: map_rel(&lt),
            lt_l: map_rel(&lt_l),
            lt_r: map_rel(&lt_r),
            labels,
        })
    }

    /// Sorted label set.
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// `⟨i,j⟩`; panics if the pair is unassigned.
    pub fn class(&self, i: u32, j: u32) -> ClassId {
        self.class_of[&(i, j)]
    }

    pub fn try_class(&self, i: u32, j: u32) -> Option<ClassId> {
        self.class_of.get(&(i, j)).copied()
    }

    /// Classes with their member pairs.
    pub fn classes(&self) -> BTreeMap<ClassId, Vec<(u32, u32)>> {
        let mut out: BTreeMap<ClassId, Vec<(u32, u32)>> = BTreeMap::new();
        for (&p, &c) in &self.class_of {
            out.entry(c).or_default().push(p);
        }
        out
    }

    pub fn class_count(&self) -> usize {
        self.classes().len()
    }

    pub fn lt(&self, x: ClassId, y: ClassId) -> bool {
        self.lt.contains(&(x, y))
    }

    pub fn lt_l(&self, x: ClassId, y: ClassId) -> bool {
        self.lt_l.contains(&(x, y))
    }

    pub fn lt_r(&self, x: ClassId, y: ClassId) -> bool {
        self.lt_r.contains(&(x, y))
    }

    pub fn lt_relation(&self) -> &BTreeSet<(ClassId, ClassId)> {
        &self.lt
    }

    pub fn lt_l_relation(&self) -> &BTreeSet<(ClassId, ClassId)> {
        &self.lt_l
    }

    pub fn lt_r_relation(&self) -> &BTreeSet<(ClassId, ClassId)> {
        &self.lt_r
    }

    pub fn to_json(&self) -> DdsJson {
        DdsJson {
            labels: self.labels.clone(),
            classes: self
                .classes()
                .into_iter()
                .map(|(id, pairs)| ClassJson {
                    id: show(id),
                    pairs: pairs.into_iter().map(|(i, j)| [i, j]).collect(),
                })
                .collect(),
            lt: rel_json(&self.lt),
            lt_l: rel_json(&self.lt_l),
            lt_r: rel_json(&self.lt_r),
        }
    }

    pub fn from_json(json: &DdsJson) -> Result<Self> {
        let mut class_of = BTreeMap::new();
        let mut ids: BTreeMap<&str, ClassId> = BTreeMap::new();
        for class in &json.classes {
            let first = class
                .pairs
                .iter()
                .min()
                .ok_or_else(|| Error::Parse(format!("class {} has no pairs", class.id)))?;
            let id = (first[0], first[1]);
            if ids.insert(class.id.as_str(), id).is_some() {
                return Err(Error::Parse(format!("duplicate class id {}", class.id)));
            }
            for p in &class.pairs {
                if class_of.insert((p[0], p[1]), id).is_some() {
                    return Err(Error::Parse(format!("pair ({},{}) listed twice", p[0], p[1])));
                }
            }
        }
        let rel = |r: &Vec<[String; 2]>| -> Result<Relation> {
            r.iter()
                .map(|[a, b]| {
                    let look = |s: &String| {
                        ids.get(s.as_str())
                            .copied()
                            .ok_or_else(|| Error::Parse(format!("unknown class id {s}")))
                    };
                    Ok((look(a)?, look(b)?))
                })
                .collect()
        };
        FiniteDDS::from_parts(
            json.labels.clone(),
            class_of,
            rel(&json.lt)?,
            rel(&json.lt_l)?,
            rel(&json.lt_r)?,
        )
    }
}

fn rel_json(r: &Relation) -> Vec<[String; 2]> {
    r.iter().map(|&(a, b)| [show(a), show(b)]).collect()
}

/// JSON form of a system.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DdsJson {
    pub labels: Vec<u32>,
    pub classes: Vec<ClassJson>,
    pub lt: Vec<[String; 2]>,
    #[serde(rename = "ltL")]
    pub lt_l: Vec<[String; 2]>,
    #[serde(rename = "ltR")]
    pub lt_r: Vec<[String; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ClassJson {
    pub id: String,
    pub pairs: Vec<[u32; 2]>,
}

fn check_partial_order(name: &str, rel: &Relation, out: &mut Vec<Violation>) {
    let mut succ: BTreeMap<ClassId, BTreeSet<ClassId>> = BTreeMap::new();
    for &(x, y) in rel {
        if x == y {
            out.push(violation("order", format!("{name} is not irreflexive at {}", show(x))));
        }
        succ.entry(x).or_default().insert(y);
    }
    for (&x, ys) in &succ {
        for y in ys {
            for z in succ.get(y).into_iter().flatten() {
                if !ys.contains(z) {
                    out.push(violation(
                        "order",
                        format!("{name} is not transitive: {} {name} {} {name} {}", show(x), show(*y), show(*z)),
                    ));
                }
            }
        }
    }
}

/// Exhaustive check of axioms (A)–(E) and the partial-order laws. An empty
/// list means the candidate is a didendritic system.
pub fn check_axioms(d: &FiniteDDS) -> Vec<Violation> {
    let mut out = Vec::new();
    let labels = &d.labels;
    let ids: BTreeSet<ClassId> = d.class_of.values().copied().collect();
    for &i in labels {
        for &j in labels {
            if !d.class_of.contains_key(&(i, j)) {
                out.push(violation("structure", format!("pair ({i},{j}) has no class")));
            }
        }
    }
    if d.class_of.keys().any(|(i, j)| labels.binary_search(i).is_err() || labels.binary_search(j).is_err()) {
        out.push(violation("structure", "a class contains a pair outside the label set".into()));
    }
    for (name, rel) in [("<", &d.lt), ("<_L", &d.lt_l), ("<_R", &d.lt_r)] {
        if rel.iter().any(|(a, b)| !ids.contains(a) || !ids.contains(b)) {
            out.push(violation("structure", format!("{name} mentions an unknown class")));
        }
        check_partial_order(name, rel, &mut out);
    }
    if !out.is_empty() {
        return out;
    }

    // (A)
    for &i in labels {
        for &j in labels {
            if d.class(i, j) != d.class(j, i) {
                out.push(violation("A", format!("({i},{j}) and ({j},{i}) lie in different classes")));
            }
        }
    }
    // (B)
    for &i in labels {
        for &j in labels {
            if i == j {
                continue;
            }
            let c = d.class(i, j);
            let (ci, cj) = (d.class(i, i), d.class(j, j));
            let first = d.lt_l(c, ci) && d.lt_r(c, cj);
            let second = d.lt_r(c, ci) && d.lt_l(c, cj);
            if first == second {
                out.push(violation(
                    "B",
                    format!("⟨{i},{j}⟩ is not split left/right between {i} and {j}"),
                ));
            }
        }
    }
    // (C)
    for &i in labels {
        for &j in labels {
            for &k in labels {
                if i >= j || j >= k {
                    continue;
                }
                let alt = |a: u32, b: u32, c: u32| {
                    d.class(a, b) == d.class(a, c) && d.lt(d.class(a, b), d.class(b, c))
                };
                let count = [alt(i, j, k), alt(j, k, i), alt(k, i, j)]
                    .iter()
                    .filter(|&&x| x)
                    .count();
                if count != 1 {
                    out.push(violation(
                        "C",
                        format!("triplet {{{i},{j},{k}}} satisfies {count} of the three alternatives"),
                    ));
                }
            }
        }
    }
    // (D)
    for &x in &ids {
        for &y in &ids {
            let l = d.lt_l(x, y);
            let r = d.lt_r(x, y);
            if l && r {
                out.push(violation("D", format!("{} is both <_L and <_R {}", show(x), show(y))));
            }
            if d.lt(x, y) != (l || r) {
                out.push(violation(
                    "D",
                    format!("< and <_L ∪ <_R disagree on ({}, {})", show(x), show(y)),
                ));
            }
        }
    }
    // (E)
    for &(x, y) in &d.lt_l {
        for &z in &ids {
            if d.lt(y, z) && !d.lt_l(x, z) {
                out.push(violation(
                    "E",
                    format!("{} <_L {} < {} but not {} <_L {}", show(x), show(y), show(z), show(x), show(z)),
                ));
            }
        }
    }
    for &(x, y) in &d.lt_r {
        for &z in &ids {
            if d.lt(y, z) && !d.lt_r(x, z) {
                out.push(violation(
                    "E",
                    format!("{} <_R {} < {} but not {} <_R {}", show(x), show(y), show(z), show(x), show(z)),
                ));
            }
        }
    }
    out
}

/// The system induced by a leaf-labeled tree: pairs are equivalent when the
/// meets of their leaves coincide, and the orders come from the vertices.
pub fn dds_from_tree(lt: &LabeledTree) -> Result<FiniteDDS> {
    let mut labels = lt.label_set();
    labels.sort_unstable();
    check_label_count(labels.len())?;
    let leaf: BTreeMap<u32, &Word> = lt.labels().iter().map(|(w, &l)| (l, w)).collect();
    let (class_of, by_word) = canonical_classes(&labels, |i, j| leaf[&i].meet(leaf[&j]));
    let mut lt_rel = Relation::new();
    let mut lt_l = Relation::new();
    let mut lt_r = Relation::new();
    for (u, &cu) in &by_word {
        for (v, &cv) in &by_word {
            if u.is_strict_prefix_of(v) {
                lt_rel.insert((cu, cv));
                if v.bit(u.len()) == 0 {
                    lt_l.insert((cu, cv));
                } else {
                    lt_r.insert((cu, cv));
                }
            }
        }
    }
    Ok(FiniteDDS {
        labels,
        class_of,
        lt: lt_rel,
        lt_l,
        lt_r,
    })
}

/// Binary tree with labeled leaves, used while inserting labels one at a time.
#[derive(Clone, Debug)]
enum Node {
    Leaf(u32),
    Fork(Box<Node>, Box<Node>),
}

impl Node {
    fn any_label(&self) -> u32 {
        match self {
            Node::Leaf(l) => *l,
            Node::Fork(l, _) => l.any_label(),
        }
    }

    fn into_labeled(self) -> LabeledTree {
        fn go(n: Node, at: Word, vertices: &mut BTreeSet<Word>, labels: &mut BTreeMap<Word, u32>) {
            vertices.insert(at.clone());
            match n {
                Node::Leaf(l) => {
                    labels.insert(at, l);
                }
                Node::Fork(l, r) => {
                    go(*l, at.child(0), vertices, labels);
                    go(*r, at.child(1), vertices, labels);
                }
            }
        }
        let mut vertices = BTreeSet::new();
        let mut labels = BTreeMap::new();
        go(self, Word::empty(), &mut vertices, &mut labels);
        LabeledTree::from_parts_unchecked(FullBinaryTree::from_set_unchecked(vertices), labels)
    }
}

/// How a new label `x` enters a tree whose root class is `⟨a,b⟩`.
enum Placement {
    /// `x` becomes a leaf child of a new root, on the left if `true`.
    NewRoot { x_left: bool },
    /// The root stays; `x` goes into the left subtree if `true`.
    Descend { left: bool },
}

/// Inserts `x` into `node`. `leaf_side(g)` decides the two-leaf case and
/// `place(a, b)` the general case, with `a` in the left subtree and `b` in
/// the right.
fn insert(
    node: Node,
    x: u32,
    leaf_side: &dyn Fn(u32) -> Result<bool>,
    place: &dyn Fn(u32, u32) -> Result<Placement>,
) -> Result<Node> {
    let (a, b) = match &node {
        Node::Leaf(g) => {
            let g = *g;
            return Ok(if leaf_side(g)? {
                Node::Fork(Box::new(Node::Leaf(x)), Box::new(node))
            } else {
                Node::Fork(Box::new(node), Box::new(Node::Leaf(x)))
            });
        }
        Node::Fork(l, r) => (l.any_label(), r.any_label()),
    };
    match place(a, b)? {
        Placement::NewRoot { x_left: true } => Ok(Node::Fork(Box::new(Node::Leaf(x)), Box::new(node))),
        Placement::NewRoot { x_left: false } => Ok(Node::Fork(Box::new(node), Box::new(Node::Leaf(x)))),
        Placement::Descend { left } => {
            let Node::Fork(l, r) = node else { unreachable!() };
            if left {
                Ok(Node::Fork(Box::new(insert(*l, x, leaf_side, place)?), r))
            } else {
                Ok(Node::Fork(l, Box::new(insert(*r, x, leaf_side, place)?)))
            }
        }
    }
}

fn axiom_error(v: &Violation) -> Error {
    Error::AxiomViolation {
        axiom: v.axiom.clone(),
        detail: v.detail.clone(),
    }
}

/// The unique labeled tree whose induced system is `d`.
///
/// Labels are added in increasing order. With `⟨a,b⟩` the root class of the
/// tree built so far, a new label `x` either becomes a child of a new root
/// (when `⟨x,a⟩ = ⟨x,b⟩ < ⟨a,b⟩`), or is inserted into the subtree on the
/// side given by `⟨a,b⟩ <_L x` or `⟨a,b⟩ <_R x`.
pub fn dds_to_tree(d: &FiniteDDS) -> Result<LabeledTree> {
    if let Some(v) = check_axioms(d).first() {
        return Err(axiom_error(v));
    }
    let leaf_side = |x: u32| {
        move |g: u32| -> Result<bool> {
            let c = d.class(x, g);
            Ok(d.lt_l(c, d.class(x, x)))
        }
    };
    let place = |x: u32| {
        move |a: u32, b: u32| -> Result<Placement> {
            let (cxa, cxb, cab) = (d.class(x, a), d.class(x, b), d.class(a, b));
            if cxa == cxb && d.lt(cxa, cab) {
                // The old tree sits on the side of the new root given by the
                // relation between ⟨x,a⟩ and ⟨a,b⟩.
                return Ok(Placement::NewRoot {
                    x_left: d.lt_r(cxa, cab),
                });
            }
            let cx = d.class(x, x);
            if d.lt_l(cab, cx) {
                Ok(Placement::Descend { left: true })
            } else if d.lt_r(cab, cx) {
                Ok(Placement::Descend { left: false })
            } else {
                Err(Error::AxiomViolation {
                    axiom: "C".into(),
                    detail: format!("label {x} is neither left nor right of the root class"),
                })
            }
        }
    };
    let mut labels = d.labels.iter().copied();
    let mut node = Node::Leaf(labels.next().ok_or(Error::EmptyInput)?);
    for x in labels {
        node = insert(node, x, &leaf_side(x), &place(x))?;
    }
    let tree = node.into_labeled();
    if dds_from_tree(&tree)? != *d {
        return Err(Error::AxiomViolation {
            axiom: "consistency".into(),
            detail: "reconstructed tree does not induce the given system".into(),
        });
    }
    Ok(tree)
}

/// An equivalence relation and the order `<` on its classes, together with a
/// left/right prescription `w` for ordered pairs of distinct labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeftRightSeed {
    labels: Vec<u32>,
    class_of: BTreeMap<(u32, u32), ClassId>,
    lt: Relation,
    w: BTreeMap<(u32, u32), Arrow>,
}

impl LeftRightSeed {
    /// Canonicalizes class ids and closes `lt` transitively; the axioms are
    /// checked by [`left_right_extend`].
    pub fn new(
        labels: Vec<u32>,
        class_of: BTreeMap<(u32, u32), ClassId>,
        lt: BTreeSet<(ClassId, ClassId)>,
        w: BTreeMap<(u32, u32), Arrow>,
    ) -> Result<Self> {
        let d = FiniteDDS::from_parts(labels, class_of, lt, Relation::new(), Relation::new())?;
        let mut lt = d.lt;
        transitive_closure(&mut lt);
        Ok(LeftRightSeed {
            labels: d.labels,
            class_of: d.class_of,
            lt,
            w,
        })
    }

    /// Builds a seed from class keys: pairs with equal keys share a class and
    /// `lt_key` orders the keys.
    pub fn from_keys<K: Ord + Clone>(
        labels: &[u32],
        key: impl Fn(u32, u32) -> K,
        lt_key: impl Fn(&K, &K) -> bool,
        w: impl Fn(u32, u32) -> Arrow,
    ) -> Result<Self> {
        let mut labels = labels.to_vec();
        labels.sort_unstable();
        labels.dedup();
        if labels.is_empty() {
            return Err(Error::EmptyInput);
        }
        check_label_count(labels.len())?;
        let (class_of, by_key) = canonical_classes(&labels, key);
        let mut lt = Relation::new();
        for (k1, &c1) in &by_key {
            for (k2, &c2) in &by_key {
                if lt_key(k1, k2) {
                    lt.insert((c1, c2));
                }
            }
        }
        let mut arrows = BTreeMap::new();
        for &i in &labels {
            for &j in &labels {
                if i != j {
                    arrows.insert((i, j), w(i, j));
                }
            }
        }
        Ok(LeftRightSeed {
            labels,
            class_of,
            lt,
            w: arrows,
        })
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn class(&self, i: u32, j: u32) -> ClassId {
        self.class_of[&(i, j)]
    }

    pub fn lt(&self, x: ClassId, y: ClassId) -> bool {
        self.lt.contains(&(x, y))
    }

    pub fn w(&self, i: u32, j: u32) -> Arrow {
        self.w[&(i, j)]
    }

    /// Checks (A), (B′), (B″), (C), (E′) and the partial-order laws of `<`.
    pub fn check(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let labels = &self.labels;
        for &i in labels {
            for &j in labels {
                if !self.class_of.contains_key(&(i, j)) {
                    out.push(violation("structure", format!("pair ({i},{j}) has no class")));
                }
                if i != j && !self.w.contains_key(&(i, j)) {
                    out.push(violation("structure", format!("w({i},{j}) is missing")));
                }
            }
        }
        check_partial_order("<", &self.lt, &mut out);
        if !out.is_empty() {
            return out;
        }
        for &i in labels {
            for &j in labels {
                if self.class(i, j) != self.class(j, i) {
                    out.push(violation("A", format!("({i},{j}) and ({j},{i}) lie in different classes")));
                }
                if i == j {
                    continue;
                }
                let c = self.class(i, j);
                if !(self.lt(c, self.class(i, i)) && self.lt(c, self.class(j, j))) {
                    out.push(violation("B′", format!("⟨{i},{j}⟩ is not below both {i} and {j}")));
                }
                if self.w(i, j) != self.w(j, i).flip() {
                    out.push(violation("B″", format!("w({i},{j}) and w({j},{i}) agree")));
                }
            }
        }
        for &i in labels {
            for &j in labels {
                for &k in labels {
                    if i == j || j == k || i == k {
                        continue;
                    }
                    let first = self.class(i, j) == self.class(i, k)
                        && self.lt(self.class(i, j), self.class(j, k));
                    if i < j && j < k {
                        let alt = |a: u32, b: u32, c: u32| {
                            self.class(a, b) == self.class(a, c)
                                && self.lt(self.class(a, b), self.class(b, c))
                        };
                        let count = [alt(i, j, k), alt(j, k, i), alt(k, i, j)]
                            .iter()
                            .filter(|&&x| x)
                            .count();
                        if count != 1 {
                            out.push(violation(
                                "C",
                                format!("triplet {{{i},{j},{k}}} satisfies {count} of the three alternatives"),
                            ));
                        }
                    }
                    if first && self.w(i, j) != self.w(i, k) {
                        out.push(violation("E′", format!("w({i},{j}) ≠ w({i},{k})")));
                    }
                }
            }
        }
        out
    }
}

/// The unique `(<_L, <_R)` turning a seed into a didendritic system with
/// `⟨i,j⟩ <_L i` and `⟨i,j⟩ <_R j` exactly when `w(i,j) = ↷`.
pub fn left_right_extend(seed: &LeftRightSeed) -> Result<FiniteDDS> {
    if let Some(v) = seed.check().first() {
        return Err(Error::SeedAxiomViolation {
            axiom: v.axiom.clone(),
            detail: v.detail.clone(),
        });
    }
    let tree = seed_to_tree(seed)?;
    let d = dds_from_tree(&tree)?;
    let consistent = seed.labels.iter().all(|&i| {
        seed.labels.iter().all(|&j| {
            d.class(i, j) == seed.class(i, j) && (i == j || (seed.w(i, j) == Arrow::Cw) == d.lt_l(d.class(i, j), d.class(i, i)))
        })
    }) && d.lt == seed.lt;
    if !consistent {
        return Err(Error::SeedAxiomViolation {
            axiom: "consistency".into(),
            detail: "extension does not reproduce the seed".into(),
        });
    }
    Ok(d)
}

fn seed_to_tree(seed: &LeftRightSeed) -> Result<LabeledTree> {
    let leaf_side = |x: u32| move |g: u32| -> Result<bool> { Ok(seed.w(x, g) == Arrow::Cw) };
    let place = |x: u32| {
        move |a: u32, b: u32| -> Result<Placement> {
            let (cxa, cxb, cab) = (seed.class(x, a), seed.class(x, b), seed.class(a, b));
            if cxa == cxb && seed.lt(cxa, cab) {
                Ok(Placement::NewRoot {
                    x_left: seed.w(x, a) == Arrow::Cw,
                })
            } else if cab == cxa && seed.lt(cab, cxb) {
                // x splits from a at the root, so it joins b.
                Ok(Placement::Descend { left: false })
            } else if cab == cxb && seed.lt(cab, cxa) {
                Ok(Placement::Descend { left: true })
            } else {
                Err(Error::SeedAxiomViolation {
                    axiom: "C".into(),
                    detail: format!("triplet {{{a},{b},{x}}} fits none of the alternatives"),
                })
            }
        }
    };
    let mut labels = seed.labels.iter().copied();
    let mut node = Node::Leaf(labels.next().ok_or(Error::EmptyInput)?);
    for x in labels {
        node = insert(node, x, &leaf_side(x), &place(x))?;
    }
    Ok(node.into_labeled())
}

/// `(≡, <, w)` of a system, with `w(i,j) = ↷` iff `⟨i,j⟩ <_L i`.
pub fn extract_seed(d: &FiniteDDS) -> LeftRightSeed {
    let mut w = BTreeMap::new();
    for &i in &d.labels {
        for &j in &d.labels {
            if i != j {
                let arrow = if d.lt_l(d.class(i, j), d.class(i, i)) {
                    Arrow::Cw
                } else {
                    Arrow::Ccw
                };
                w.insert((i, j), arrow);
            }
        }
    }
    LeftRightSeed {
        labels: d.labels.clone(),
        class_of: d.class_of.clone(),
        lt: d.lt.clone(),
        w,
    }
}

/// The induced system on a non-empty subset of the labels.
pub fn restrict(d: &FiniteDDS, subset: &[u32]) -> Result<FiniteDDS> {
    let mut sub = subset.to_vec();
    sub.sort_unstable();
    sub.dedup();
    if sub.is_empty() {
        return Err(Error::EmptySubset);
    }
    if let Some(x) = sub.iter().find(|x| d.labels.binary_search(x).is_err()) {
        return Err(Error::BadLabelSet(format!("label {x} is not in the system")));
    }
    let (class_of, by_old) = canonical_classes(&sub, |i, j| d.class(i, j));
    let induce = |rel: &Relation| -> Relation {
        rel.iter()
            .filter_map(|(a, b)| Some((*by_old.get(a)?, *by_old.get(b)?)))
            .collect()
    };
    Ok(FiniteDDS {
        labels: sub,
        class_of,
        lt: induce(&d.lt),
        lt_l: induce(&d.lt_l),
        lt_r: induce(&d.lt_r),
    })
}

/// `𝒟^σ`: pair `(i,j)` of the new system behaves as `(σ(i), σ(j))` in `d`.
pub fn permute(d: &FiniteDDS, sigma: &BTreeMap<u32, u32>) -> Result<FiniteDDS> {
    let domain: BTreeSet<u32> = sigma.keys().copied().collect();
    let image: BTreeSet<u32> = sigma.values().copied().collect();
    let labels: BTreeSet<u32> = d.labels.iter().copied().collect();
    if domain != labels || image != labels {
        return Err(Error::BadLabelSet("permutation must be a bijection of the label set".into()));
    }
    let (class_of, by_old) = canonical_classes(&d.labels, |i, j| d.class(sigma[&i], sigma[&j]));
    let map = |rel: &Relation| -> Relation { rel.iter().map(|(a, b)| (by_old[a], by_old[b])).collect() };
    Ok(FiniteDDS {
        labels: d.labels.clone(),
        class_of,
        lt: map(&d.lt),
        lt_l: map(&d.lt_l),
        lt_r: map(&d.lt_r),
    })
}

/// Marks drawn for the zig-zag system: a uniform position and a fair arrow
/// per label.
#[derive(Clone, Debug, PartialEq)]
pub struct ZigzagMarks {
    pub u: Vec<f64>,
    pub eps: Vec<Arrow>,
}

impl ZigzagMarks {
    /// Draws marks for labels `1..=n` sequentially, so the first `m` marks
    /// of a longer draw equal a draw of length `m` from the same generator.
    pub fn draw(n: usize, rng: &mut ProjectRng) -> Result<Self> {
        let mut u = Vec::with_capacity(n);
        let mut eps = Vec::with_capacity(n);
        for _ in 0..n {
            let x: f64 = rng.random();
            if u.contains(&x) {
                return Err(Error::DegenerateSample("tied uniform marks".into()));
            }
            u.push(x);
            eps.push(if rng.random_bool(0.5) { Arrow::Cw } else { Arrow::Ccw });
        }
        Ok(ZigzagMarks { u, eps })
    }

    /// The seed on labels `1..=n`: `⟨i,j⟩` is determined by the argmin `h`
    /// of `U_i, U_j`, ordered by `U_h`, and `w(i,j)` is `ε_h` seen from `i`.
    pub fn seed(&self, n: usize) -> Result<LeftRightSeed> {
        let labels: Vec<u32> = (1..=n as u32).collect();
        let u = |i: u32| self.u[i as usize - 1];
        let argmin = |i: u32, j: u32| if u(i) < u(j) { i } else { j };
        // Key: (h, diagonal?) so that ⟨i,i⟩ is kept apart from the classes
        // whose argmin is i.
        let key = |i: u32, j: u32| if i == j { (i, true) } else { (argmin(i, j), false) };
        let lt_key = |a: &(u32, bool), b: &(u32, bool)| match (a.1, b.1) {
            (true, _) => false,
            (false, true) => u(a.0) <= u(b.0),
            (false, false) => u(a.0) < u(b.0),
        };
        let w = |i: u32, j: u32| {
            let h = argmin(i, j);
            let e = self.eps[h as usize - 1];
            if h == i {
                e
            } else {
                e.flip()
            }
        };
        LeftRightSeed::from_keys(&labels, key, lt_key, w)
    }
}

/// The exchangeable zig-zag system restricted to labels `1..=n`.
pub fn zigzag_dds(n: usize, rng: &mut ProjectRng) -> Result<FiniteDDS> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    check_label_count(n)?;
    let marks = ZigzagMarks::draw(n, rng)?;
    left_right_extend(&marks.seed(n)?)
}
