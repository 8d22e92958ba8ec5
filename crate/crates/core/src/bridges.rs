//! Infinite-bridge samplers: finite bridges by backward simulation, the
//! zig-zag bridge, and the construction from a rooted ℝ-tree model.

use std::cell::RefCell;
use std::rc::Rc;

use rand::Rng;

use crate::didendritic::{dds_to_tree, left_right_extend, Arrow, LeftRightSeed, LABEL_GUARD};
use crate::error::{Error, Result};
use crate::kernels::backward_sample;
use crate::rng::ProjectRng;
use crate::trees::{FullBinaryTree, LabeledTree};
use crate::words::{common_prefix_len_capped, SourceMeasure, Word, WordStream, DEFAULT_DEPTH_CAP};

/// `(t₁,…,t_m)` with `t_m` the endpoint and each earlier tree drawn from the
/// backward kernel of the next.
pub fn finite_bridge(endpoint: &FullBinaryTree, rng: &mut ProjectRng) -> Result<Vec<FullBinaryTree>> {
    let m = endpoint.leaf_count();
    let mut out = vec![endpoint.clone()];
    for _ in 1..m {
        let prev = backward_sample(out.last().expect("non-empty"), rng)?;
        out.push(prev);
    }
    out.reverse();
    Ok(out)
}

/// The caterpillar with spine `ε₂…ε_n`: the spine's prefixes, each with its
/// sibling, plus the root.
pub fn caterpillar(spine: &Word) -> FullBinaryTree {
    let mut vertices = std::collections::BTreeSet::from([Word::empty()]);
    for k in 1..=spine.len() {
        let p = spine.prefix(k);
        vertices.insert(p.sibling().expect("non-empty"));
        vertices.insert(p);
    }
    FullBinaryTree::from_set_unchecked(vertices)
}

/// The marks `(Y_k, η_k)`, `k ≥ 1`, behind a zig-zag bridge trajectory.
///
/// `R̄_n^∞` is the caterpillar whose spine lists the `η`'s of the first `n`
/// marks in increasing `Y` order, with the last one dropped: the mark with
/// the largest `Y` only decides which of the two deepest leaves is which.
#[derive(Clone, Debug)]
pub struct ZigzagBridge {
    marks: Vec<(f64, u8)>,
}

impl ZigzagBridge {
    /// Draws marks for `k = 1..=n_max`.
    pub fn draw(n_max: usize, rng: &mut ProjectRng) -> Result<Self> {
        let mut marks: Vec<(f64, u8)> = Vec::with_capacity(n_max);
        for _ in 0..n_max {
            let y: f64 = rng.random();
            let eta = u8::from(rng.random_bool(0.5));
            marks.push((y, eta));
        }
        let mut ys: Vec<f64> = marks.iter().map(|m| m.0).collect();
        ys.sort_by(f64::total_cmp);
        if ys.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::DegenerateSample("tied uniform marks".into()));
        }
        Ok(ZigzagBridge { marks })
    }

    pub fn n_max(&self) -> usize {
        self.marks.len()
    }

    /// `ε_{n,1}…ε_{n,n−1}`: the `η`'s of the first `n` marks sorted by `Y`,
    /// without the last.
    pub fn spine(&self, n: usize) -> Word {
        let mut first: Vec<(f64, u8)> = self.marks[..n].to_vec();
        first.sort_by(|a, b| a.0.total_cmp(&b.0));
        Word::from_bits(first.into_iter().take(n.saturating_sub(1)).map(|m| m.1))
    }

    /// Spines for every `n ≤ n_max` (index `n − 1`), computed incrementally.
    pub fn spines(&self) -> Vec<Word> {
        let mut sorted: Vec<(f64, u8)> = Vec::with_capacity(self.marks.len());
        let mut out = Vec::with_capacity(self.marks.len());
        for &m in &self.marks {
            let pos = sorted.partition_point(|x| x.0 < m.0);
            sorted.insert(pos, m);
            out.push(Word::from_bits(sorted[..sorted.len() - 1].iter().map(|x| x.1)));
        }
        out
    }

    pub fn tree(&self, n: usize) -> FullBinaryTree {
        caterpillar(&self.spine(n))
    }

    pub fn trajectory(&self) -> Vec<FullBinaryTree> {
        self.spines().iter().map(caterpillar).collect()
    }
}

/// `(R̄_n^∞)_{n ≤ n_max}` for the zig-zag bridge.
pub fn zigzag_bridge(n_max: usize, rng: &mut ProjectRng) -> Result<Vec<FullBinaryTree>> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    Ok(ZigzagBridge::draw(n_max, rng)?.trajectory())
}

/// A rooted ℝ-tree `S` with sampling measure `μ` and left/right rule `W`.
pub trait RTreeModel {
    type Point: Clone + PartialEq;

    fn name(&self) -> String;

    /// A draw `(ξ, ϑ)` from `μ ⊗ λ`.
    fn sample_point(&self, rng: &mut ProjectRng) -> Result<(Self::Point, f64)>;

    /// `x ⋏ y`, the point of `[x, y]` closest to the root.
    fn meet(&self, x: &Self::Point, y: &Self::Point) -> Result<Self::Point>;

    /// `x ≺ y`, i.e. `x ∈ [ρ, y)`.
    fn precedes(&self, x: &Self::Point, y: &Self::Point) -> bool;

    #[allow(non_snake_case)]
    fn W(&self, x: &Self::Point, s: f64, y: &Self::Point, t: f64) -> Result<Arrow>;
}

/// `S = [0, ½]` rooted at 0 with uniform `μ`; the zig-zag bridge.
#[derive(Clone, Copy, Debug, Default)]
pub struct IntervalZigZag;

impl RTreeModel for IntervalZigZag {
    type Point = f64;

    fn name(&self) -> String {
        "interval".into()
    }

    fn sample_point(&self, rng: &mut ProjectRng) -> Result<(f64, f64)> {
        let u: f64 = rng.random();
        let theta: f64 = rng.random();
        Ok((u / 2.0, theta))
    }

    fn meet(&self, x: &f64, y: &f64) -> Result<f64> {
        Ok(x.min(*y))
    }

    fn precedes(&self, x: &f64, y: &f64) -> bool {
        x < y
    }

    /// The mark of the point nearer the root decides; seen from the other
    /// point the arrow is reversed.
    fn W(&self, x: &f64, s: f64, y: &f64, t: f64) -> Result<Arrow> {
        Ok(if x < y {
            if s < 0.5 {
                Arrow::Cw
            } else {
                Arrow::Ccw
            }
        } else if y < x {
            if t < 0.5 {
                Arrow::Ccw
            } else {
                Arrow::Cw
            }
        } else {
            Arrow::Ccw
        })
    }
}

/// A point of the completed binary tree: a vertex of `{0,1}*` or an end in
/// `{0,1}^∞`.
#[derive(Clone, Debug)]
pub enum CompletionPoint {
    Vertex(Word),
    End(Rc<RefCell<WordStream>>),
}

impl PartialEq for CompletionPoint {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (CompletionPoint::Vertex(u), CompletionPoint::Vertex(v)) => u == v,
            (CompletionPoint::End(a), CompletionPoint::End(b)) => Rc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// The completed binary tree with `μ` the image of a source measure on its
/// ends.
#[derive(Clone, Debug)]
pub struct BinaryCompletion {
    pub measure: SourceMeasure,
    pub depth_cap: usize,
}

impl BinaryCompletion {
    pub fn new(measure: SourceMeasure) -> Self {
        BinaryCompletion {
            measure,
            depth_cap: DEFAULT_DEPTH_CAP,
        }
    }

    fn prefix_len(&self, x: &CompletionPoint, y: &CompletionPoint) -> Result<usize> {
        use CompletionPoint::*;
        match (x, y) {
            (Vertex(u), Vertex(v)) => Ok(u.meet(v).len()),
            (Vertex(u), End(z)) | (End(z), Vertex(u)) => {
                let mut u = u;
                common_prefix_len_capped(&mut u, &mut *z.borrow_mut(), usize::MAX)
            }
            (End(a), End(b)) => {
                if Rc::ptr_eq(a, b) {
                    return Err(Error::DepthCapExceeded { cap: self.depth_cap });
                }
                common_prefix_len_capped(&mut *a.borrow_mut(), &mut *b.borrow_mut(), self.depth_cap)
            }
        }
    }

    fn bit(x: &CompletionPoint, k: usize) -> Option<u8> {
        match x {
            CompletionPoint::Vertex(u) => u.bits().get(k).copied(),
            CompletionPoint::End(z) => Some(z.borrow_mut().bit(k)),
        }
    }
}

impl RTreeModel for BinaryCompletion {
    type Point = CompletionPoint;

    fn name(&self) -> String {
        format!("binary:{}", self.measure)
    }

    fn sample_point(&self, rng: &mut ProjectRng) -> Result<(CompletionPoint, f64)> {
        let z = self.measure.sample(rng.random());
        let theta: f64 = rng.random();
        Ok((CompletionPoint::End(Rc::new(RefCell::new(z))), theta))
    }

    fn meet(&self, x: &CompletionPoint, y: &CompletionPoint) -> Result<CompletionPoint> {
        if x == y {
            return Ok(x.clone());
        }
        let len = self.prefix_len(x, y)?;
        let word = match x {
            CompletionPoint::Vertex(u) => u.prefix(len),
            CompletionPoint::End(z) => z.borrow_mut().prefix(len),
        };
        Ok(CompletionPoint::Vertex(word))
    }

    fn precedes(&self, x: &CompletionPoint, y: &CompletionPoint) -> bool {
        match (x, y) {
            (CompletionPoint::Vertex(u), CompletionPoint::Vertex(v)) => u.is_strict_prefix_of(v),
            (CompletionPoint::Vertex(u), CompletionPoint::End(z)) => {
                let mut z = z.borrow_mut();
                (0..u.len()).all(|k| z.bit(k) == u.bit(k))
            }
            (CompletionPoint::End(_), _) => false,
        }
    }

    /// `↷` when `u ∧ v <_L u`, i.e. `u` turns to 0 where it leaves `v`. The
    /// marks are not used.
    fn W(&self, x: &CompletionPoint, _s: f64, y: &CompletionPoint, _t: f64) -> Result<Arrow> {
        let m = self.prefix_len(x, y)?;
        match (Self::bit(x, m), Self::bit(y, m)) {
            (Some(0), _) | (None, Some(1)) => Ok(Arrow::Cw),
            (Some(1), _) | (None, Some(0)) => Ok(Arrow::Ccw),
            _ => Err(Error::InvalidArgument("left/right is undefined for comparable points".into())),
        }
    }
}

/// Meets, classes and orders of a growing sample from an ℝ-tree model.
struct RTreeSample<'m, M: RTreeModel> {
    model: &'m M,
    points: Vec<(M::Point, f64)>,
    /// Distinct meet points seen so far.
    reps: Vec<M::Point>,
    /// `meet_id[i][j]` for `i ≠ j`, indices into `reps`.
    meet_id: Vec<Vec<usize>>,
    /// `rep_lt[a][b]`: `reps[a] ≺ reps[b]`.
    rep_lt: Vec<Vec<bool>>,
    /// `rep_le_point[a][k]`: `reps[a] ≼ ξ_k`.
    rep_le_point: Vec<Vec<bool>>,
    w: Vec<Vec<Arrow>>,
}

impl<'m, M: RTreeModel> RTreeSample<'m, M> {
    fn new(model: &'m M) -> Self {
        RTreeSample {
            model,
            points: Vec::new(),
            reps: Vec::new(),
            meet_id: Vec::new(),
            rep_lt: Vec::new(),
            rep_le_point: Vec::new(),
            w: Vec::new(),
        }
    }

    fn rep_of(&mut self, p: M::Point) -> usize {
        if let Some(a) = self.reps.iter().position(|r| *r == p) {
            return a;
        }
        let a = self.reps.len();
        for b in 0..a {
            let lt = self.model.precedes(&self.reps[b], &p);
            self.rep_lt[b].push(lt);
        }
        let row: Vec<bool> = (0..=a)
            .map(|b| b < a && self.model.precedes(&p, &self.reps[b]))
            .collect();
        self.rep_lt.push(row);
        let le: Vec<bool> = self
            .points
            .iter()
            .map(|(x, _)| p == *x || self.model.precedes(&p, x))
            .collect();
        self.rep_le_point.push(le);
        self.reps.push(p);
        a
    }

    /// Adds `(ξ, ϑ)` as label `n+1` and checks (T) and (LR) on every pair
    /// and triple that involves it.
    fn push(&mut self, xi: M::Point, theta: f64) -> Result<()> {
        let k = self.points.len();
        for a in 0..self.reps.len() {
            let le = self.reps[a] == xi || self.model.precedes(&self.reps[a], &xi);
            self.rep_le_point[a].push(le);
        }
        self.points.push((xi, theta));
        let mut row = Vec::with_capacity(k + 1);
        for j in 0..k {
            let m = self.model.meet(&self.points[k].0, &self.points[j].0)?;
            let id = self.rep_of(m);
            row.push(id);
            self.meet_id[j].push(id);
        }
        row.push(usize::MAX);
        self.meet_id.push(row);

        let mut wrow = Vec::with_capacity(k + 1);
        for j in 0..k {
            let (x, s) = &self.points[k];
            let (y, t) = &self.points[j];
            let a = self.model.W(x, *s, y, *t)?;
            let b = self.model.W(y, *t, x, *s)?;
            if a != b.flip() {
                return Err(Error::PropertyLRViolated(format!(
                    "W is not antisymmetric on labels {} and {}",
                    k + 1,
                    j + 1
                )));
            }
            wrow.push(a);
            self.w[j].push(b);
        }
        wrow.push(Arrow::Cw);
        self.w.push(wrow);

        for i in 0..k {
            for j in i + 1..k {
                self.check_triple(i, j, k)?;
            }
        }
        Ok(())
    }

    fn first_alt(&self, i: usize, j: usize, k: usize) -> bool {
        let (ij, ik, jk) = (self.meet_id[i][j], self.meet_id[i][k], self.meet_id[j][k]);
        ij == ik && self.rep_lt[ij][jk]
    }

    fn check_triple(&self, i: usize, j: usize, k: usize) -> Result<()> {
        let count = [self.first_alt(i, j, k), self.first_alt(j, k, i), self.first_alt(k, i, j)]
            .iter()
            .filter(|&&b| b)
            .count();
        if count != 1 {
            return Err(Error::PropertyTViolated(format!(
                "labels {}, {}, {} satisfy {count} of the three meet relations",
                i + 1,
                j + 1,
                k + 1
            )));
        }
        for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
            for (a, b, c) in [(a, b, c), (a, c, b)] {
                if self.first_alt(a, b, c) && self.w[a][b] != self.w[a][c] {
                    return Err(Error::PropertyLRViolated(format!(
                        "W({},{}) ≠ W({},{})",
                        a + 1,
                        b + 1,
                        a + 1,
                        c + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// The seed on labels `1..=n`.
    fn seed(&self, n: usize) -> Result<LeftRightSeed> {
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
        enum Key {
            Meet(usize),
            Leaf(usize),
        }
        let labels: Vec<u32> = (1..=n as u32).collect();
        let key = |i: u32, j: u32| {
            let (i, j) = (i as usize - 1, j as usize - 1);
            if i == j {
                Key::Leaf(i)
            } else {
                Key::Meet(self.meet_id[i][j])
            }
        };
        let lt_key = |a: &Key, b: &Key| match (a, b) {
            (Key::Leaf(_), _) => false,
            (Key::Meet(x), Key::Leaf(k)) => self.rep_le_point[*x][*k],
            (Key::Meet(x), Key::Meet(y)) => self.rep_lt[*x][*y],
        };
        let w = |i: u32, j: u32| self.w[i as usize - 1][j as usize - 1];
        LeftRightSeed::from_keys(&labels, key, lt_key, w)
    }
}

/// `(t̃_n)_{n ≤ n_max}`: the labeled trees of the didendritic system built
/// from i.i.d. draws of `(ξ, ϑ)`. Strip labels for the bridge itself.
pub fn rtree_bridge<M: RTreeModel>(model: &M, n_max: usize, rng: &mut ProjectRng) -> Result<Vec<LabeledTree>> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    if n_max > LABEL_GUARD {
        return Err(Error::TooManyLabels {
            n: n_max,
            max: LABEL_GUARD,
        });
    }
    let draws = (0..n_max)
        .map(|_| model.sample_point(rng))
        .collect::<Result<Vec<_>>>()?;
    let mut sample = RTreeSample::new(model);
    let mut out = Vec::with_capacity(n_max);
    for (n, (xi, theta)) in draws.into_iter().enumerate() {
        sample.push(xi, theta)?;
        let d = left_right_extend(&sample.seed(n + 1)?)?;
        out.push(dds_to_tree(&d)?);
    }
    Ok(out)
}

/// Unlabeled shapes of [`rtree_bridge`].
pub fn rtree_bridge_shapes<M: RTreeModel>(model: &M, n_max: usize, rng: &mut ProjectRng) -> Result<Vec<FullBinaryTree>> {
    Ok(rtree_bridge(model, n_max, rng)?.iter().map(LabeledTree::strip).collect())
}
