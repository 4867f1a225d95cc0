//! Finite binary trees: the initial algebra of the signature {0, [-,-]}.
//!
//! Trees are immutable values with structural equality and a total
//! size-lexicographic order, so enumeration and test reports are stable.

use std::cmp::Ordering;
use std::fmt;

use crate::error::ParseError;

/// A finite binary tree. `Empty` is the tree 0; `Node(l, r)` is `[l,r]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Tree {
    Empty,
    Node(Box<Tree>, Box<Tree>),
}

impl Tree {
    pub fn node(left: Tree, right: Tree) -> Tree {
        Tree::Node(Box::new(left), Box::new(right))
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Tree::Empty)
    }

    /// Splits a non-empty tree into its two subtrees.
    pub fn destructure(&self) -> Option<(&Tree, &Tree)> {
        match self {
            Tree::Empty => None,
            Tree::Node(l, r) => Some((l, r)),
        }
    }

    /// Number of non-empty nodes.
    pub fn size(&self) -> usize {
        match self {
            Tree::Empty => 0,
            Tree::Node(l, r) => 1 + l.size() + r.size(),
        }
    }

    /// Depth: the root has depth 1, the empty tree depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Tree::Empty => 0,
            Tree::Node(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// Number of nodes on the leftward path (root, its left child, ...).
    pub fn leftward_path_len(&self) -> usize {
        match self {
            Tree::Empty => 0,
            Tree::Node(l, _) => 1 + l.leftward_path_len(),
        }
    }

    /// True when no node anywhere has a non-empty right child.
    pub fn is_leftward_path(&self) -> bool {
        match self {
            Tree::Empty => true,
            Tree::Node(l, r) => r.is_empty() && l.is_leftward_path(),
        }
    }

    /// The leftward path with exactly `n` nodes.
    pub fn leftward_path(n: usize) -> Tree {
        let mut t = Tree::Empty;
        for _ in 0..n {
            t = Tree::node(t, Tree::Empty);
        }
        t
    }
}

impl Ord for Tree {
    fn cmp(&self, other: &Self) -> Ordering {
        self.size().cmp(&other.size()).then_with(|| match (self, other) {
            (Tree::Empty, Tree::Empty) => Ordering::Equal,
            (Tree::Empty, Tree::Node(..)) => Ordering::Less,
            (Tree::Node(..), Tree::Empty) => Ordering::Greater,
            (Tree::Node(l1, r1), Tree::Node(l2, r2)) => l1.cmp(l2).then_with(|| r1.cmp(r2)),
        })
    }
}

impl PartialOrd for Tree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Empty => write!(f, "0"),
            Tree::Node(l, r) => write!(f, "[{},{}]", l, r),
        }
    }
}

/// Canonical text for a tree: `0` or `[l,r]`, no whitespace.
pub fn render_tree(t: &Tree) -> String {
    t.to_string()
}

/// Parses the grammar `tree := "0" | "[" tree "," tree "]"`, ignoring whitespace.
pub fn parse_tree(text: &str) -> Result<Tree, ParseError> {
    let mut p = TreeParser::new(text);
    let t = p.parse()?;
    p.expect_end()?;
    Ok(t)
}

pub(crate) struct TreeParser<'a> {
    bytes: &'a [u8],
    pub(crate) pos: usize,
}

impl<'a> TreeParser<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        TreeParser { bytes: text.as_bytes(), pos: 0 }
    }

    pub(crate) fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    pub(crate) fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    /// Peek without skipping whitespace; identifiers end at whitespace.
    pub(crate) fn peek_raw(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    pub(crate) fn expect(&mut self, b: u8) -> Result<(), ParseError> {
        match self.peek() {
            Some(c) if c == b => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(ParseError::new(
                self.pos,
                format!("expected '{}'", b as char),
            )),
        }
    }

    pub(crate) fn expect_end(&mut self) -> Result<(), ParseError> {
        if self.peek().is_some() {
            Err(ParseError::new(self.pos, "trailing input".into()))
        } else {
            Ok(())
        }
    }

    pub(crate) fn parse(&mut self) -> Result<Tree, ParseError> {
        match self.peek() {
            Some(b'0') => {
                self.pos += 1;
                Ok(Tree::Empty)
            }
            Some(b'[') => {
                self.pos += 1;
                let l = self.parse()?;
                self.expect(b',')?;
                let r = self.parse()?;
                self.expect(b']')?;
                Ok(Tree::node(l, r))
            }
            _ => Err(ParseError::new(self.pos, "expected '0' or '['".into())),
        }
    }
}

/// All trees with exactly `n` internal nodes, each once, in a deterministic
/// order. The count is the Catalan number C(n).
pub fn enumerate_trees(n: usize) -> Vec<Tree> {
    let mut table: Vec<Vec<Tree>> = vec![vec![Tree::Empty]];
    for m in 1..=n {
        let mut level = Vec::new();
        for i in 0..m {
            for l in &table[i] {
                for r in &table[m - 1 - i] {
                    level.push(Tree::node(l.clone(), r.clone()));
                }
            }
        }
        table.push(level);
    }
    table.pop().unwrap()
}

/// All trees of size at most `n`, in size order.
pub fn enumerate_trees_up_to(n: usize) -> Vec<Tree> {
    (0..=n).flat_map(enumerate_trees).collect()
}
