#![allow(dead_code)]

use patricia_bridges::trees::{BinaryTree, FullBinaryTree};
use patricia_bridges::words::{SourceMeasure, Word, WordStream};
use std::collections::BTreeSet;

/// Nested shape, independent of the word encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    Leaf,
    Node(Box<Shape>, Box<Shape>),
}

impl Shape {
    /// Reads a tree of `𝕊` top down, skipping out-degree-1 vertices.
    pub fn contract(t: &BinaryTree, v: &Word) -> Shape {
        let kids: Vec<Word> = [0, 1].into_iter().map(|b| v.child(b)).filter(|c| t.contains(c)).collect();
        match kids.len() {
            0 => Shape::Leaf,
            1 => Shape::contract(t, &kids[0]),
            _ => Shape::Node(Box::new(Shape::contract(t, &kids[0])), Box::new(Shape::contract(t, &kids[1]))),
        }
    }

    pub fn of(t: &FullBinaryTree) -> Shape {
        Shape::contract(t.as_tree(), &Word::empty())
    }

    pub fn words(&self, at: &Word, out: &mut BTreeSet<Word>) {
        out.insert(at.clone());
        if let Shape::Node(l, r) = self {
            l.words(&at.child(0), out);
            r.words(&at.child(1), out);
        }
    }

    pub fn to_tree(&self) -> FullBinaryTree {
        let mut out = BTreeSet::new();
        self.words(&Word::empty(), &mut out);
        FullBinaryTree::from_vertices(out).unwrap()
    }

    /// Deletes the leaf reached by `path`; its sibling subtree takes the
    /// parent's place.
    pub fn delete(&self, path: &[u8]) -> Shape {
        match self {
            Shape::Leaf => panic!("path runs past a leaf"),
            Shape::Node(l, r) => {
                let (hit, other) = if path[0] == 0 { (l, r) } else { (r, l) };
                if path.len() == 1 {
                    assert_eq!(**hit, Shape::Leaf);
                    return (**other).clone();
                }
                let rest = hit.delete(&path[1..]);
                if path[0] == 0 {
                    Shape::Node(Box::new(rest), other.clone())
                } else {
                    Shape::Node(other.clone(), Box::new(rest))
                }
            }
        }
    }
}

/// Minimal distinguishing prefixes of distinct finite words, by brute force.
pub fn brute_distinguishing(zs: &[Word]) -> Vec<Word> {
    if zs.len() == 1 {
        return vec![Word::empty()];
    }
    zs.iter()
        .enumerate()
        .map(|(i, z)| {
            let l = zs
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, w)| z.meet(w).len())
                .max()
                .unwrap();
            z.prefix(l + 1)
        })
        .collect()
}

/// The tree spanned by a set of words: all their prefixes.
pub fn brute_span(ys: &[Word]) -> BinaryTree {
    BinaryTree::from_vertices(ys.iter().flat_map(|y| y.prefixes().collect::<Vec<_>>())).unwrap()
}

/// Streams that begin with the given words.
pub fn streams_from(zs: &[Word]) -> Vec<WordStream> {
    zs.iter()
        .enumerate()
        .map(|(i, z)| SourceMeasure::prefixed(z.clone(), SourceMeasure::fair()).sample(i as u64))
        .collect()
}
