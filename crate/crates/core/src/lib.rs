//! Tree-valued Markov chains built from binary words.
//!
//! This crate implements radix sort chains, PATRICIA chains and the Rémy
//! chain on full binary trees, their common backward kernel, samplers for
//! infinite bridges (including the zig-zag bridge and a pluggable ℝ-tree
//! construction), and finite didendritic systems together with their
//! bijection to leaf-labeled full binary trees.
//!
//! The [`stats`] module holds exact oracles and the Monte Carlo harness used
//! by the acceptance suite and the `pbridge` command-line tool.
//!
//! ```
//! use patricia_bridges::trees::{enumerate_full_trees, FullBinaryTree};
//! use patricia_bridges::kernels::kappa_bar;
//! use patricia_bridges::words::Word;
//!
//! let trees = enumerate_full_trees(4).unwrap();
//! assert_eq!(trees.len(), 5);
//!
//! let cherry = FullBinaryTree::cherry();
//! let leaf: Word = "1".parse().unwrap();
//! assert_eq!(kappa_bar(&cherry, &leaf).unwrap(), FullBinaryTree::trivial());
//! ```

pub mod bridges;
pub mod didendritic;
pub mod error;
pub mod kernels;
pub mod rng;
pub mod stats;
pub mod trees;
pub mod words;

pub use error::{Error, Result};
