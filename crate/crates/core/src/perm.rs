//! Permutations in one-line notation and the structural helpers built on them.
//!
//! Positions and values are 1-based in the public API: `p.at(1)` is the first
//! letter. The empty permutation is a regular value.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A permutation of `[1, n]` in one-line notation.
///
/// Ordering is by length first, then lexicographic on the word, so sorted
/// collections list `e, 1, 12, 21, 123, ...`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Permutation {
    word: Vec<usize>,
}

impl Permutation {
    /// Builds a permutation from a word that must be a bijection onto `[1, n]`.
    pub fn new(word: Vec<usize>) -> Result<Self> {
        let n = word.len();
        let mut seen = vec![false; n + 1];
        for &v in &word {
            if v == 0 || v > n {
                return Err(Error::InvalidInput(format!(
                    "letter {v} is outside [1, {n}]"
                )));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(Error::InvalidInput(format!("letter {v} repeated")));
            }
        }
        Ok(Self { word })
    }

    /// Skips validation; callers guarantee the word is a permutation.
    pub(crate) fn from_word_unchecked(word: Vec<usize>) -> Self {
        debug_assert!(Self::new(word.clone()).is_ok());
        Self { word }
    }

    pub fn empty() -> Self {
        Self { word: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            word: (1..=n).collect(),
        }
    }

    /// The decreasing permutation `n ... 2 1`.
    pub fn decreasing(n: usize) -> Self {
        Self {
            word: (1..=n).rev().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.word
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.word
    }

    /// The letter at 1-based position `i`.
    pub fn at(&self, i: usize) -> usize {
        self.word[i - 1]
    }

    /// The 1-based position of value `v`.
    pub fn position_of(&self, v: usize) -> usize {
        self.word.iter().position(|&x| x == v).expect("value in range") + 1
    }

    pub fn is_identity(&self) -> bool {
        self.word.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    /// Standardizes a word of distinct letters to the order-isomorphic permutation.
    pub fn flatten<T: Ord>(word: &[T]) -> Result<Self> {
        let mut idx: Vec<usize> = (0..word.len()).collect();
        idx.sort_by(|&a, &b| word[a].cmp(&word[b]));
        if idx.windows(2).any(|w| word[w[0]] == word[w[1]]) {
            return Err(Error::InvalidInput(
                "cannot flatten a word with repeated letters".into(),
            ));
        }
        let mut out = vec![0; word.len()];
        for (rank, &i) in idx.iter().enumerate() {
            out[i] = rank + 1;
        }
        Ok(Self { word: out })
    }

    /// `self ⊕ other`: `other` shifted up by `|self|` and appended.
    pub fn direct_sum(&self, other: &Permutation) -> Permutation {
        let shift = self.len();
        let mut word = self.word.clone();
        word.extend(other.word.iter().map(|&v| v + shift));
        Self { word }
    }

    /// Number of summands in the finest direct-sum decomposition.
    pub fn components(&self) -> usize {
        let mut max = 0;
        let mut count = 0;
        for (i, &v) in self.word.iter().enumerate() {
            max = max.max(v);
            if max == i + 1 {
                count += 1;
            }
        }
        count
    }

    pub fn reverse(&self) -> Permutation {
        Self {
            word: self.word.iter().rev().copied().collect(),
        }
    }

    pub fn complement(&self) -> Permutation {
        let n = self.len();
        Self {
            word: self.word.iter().map(|&v| n + 1 - v).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut word = vec![0; self.len()];
        for (i, &v) in self.word.iter().enumerate() {
            word[v - 1] = i + 1;
        }
        Self { word }
    }

    /// The four quadrant value sets around the point `(j, p(j))`.
    pub fn quadrants(&self, j: usize) -> Result<Quadrants> {
        if j == 0 || j > self.len() {
            return Err(Error::OutOfRange {
                index: j as i64,
                lo: 1,
                hi: self.len() as i64,
            });
        }
        let x = self.at(j);
        let mut q = Quadrants::default();
        for (i, &v) in self.word.iter().enumerate() {
            let pos = i + 1;
            match (pos.cmp(&j), v.cmp(&x)) {
                (Ordering::Greater, Ordering::Greater) => q.q1.push(v),
                (Ordering::Less, Ordering::Greater) => q.q2.push(v),
                (Ordering::Less, Ordering::Less) => q.q3.push(v),
                (Ordering::Greater, Ordering::Less) => q.q4.push(v),
                _ => {}
            }
        }
        for set in [&mut q.q1, &mut q.q2, &mut q.q3, &mut q.q4] {
            set.sort_unstable();
        }
        Ok(q)
    }

    /// Quadrant cardinalities `(|Q1|, |Q2|, |Q3|, |Q4|)` for every position.
    pub(crate) fn quadrant_sizes(&self) -> Vec<[usize; 4]> {
        let n = self.len();
        (0..n)
            .map(|j| {
                let x = self.word[j];
                let mut s = [0; 4];
                for (i, &v) in self.word.iter().enumerate() {
                    if i > j && v > x {
                        s[0] += 1;
                    } else if i < j && v > x {
                        s[1] += 1;
                    } else if i < j && v < x {
                        s[2] += 1;
                    } else if i > j && v < x {
                        s[3] += 1;
                    }
                }
                s
            })
            .collect()
    }

    pub fn increasing_binary_tree(&self) -> IncreasingBinaryTree {
        IncreasingBinaryTree::build(&self.word)
    }

    /// Whether every two-son vertex of `T(p)` off the leftmost branch has a
    /// left son with smaller label than its right son.
    pub fn bbd_chain_valid(&self) -> bool {
        self.increasing_binary_tree().bbd_valid(true)
    }

    /// Two passes through a stack sort the permutation.
    pub fn two_stack_sortable(&self) -> bool {
        stack_sort(&stack_sort(&self.word))
            .iter()
            .enumerate()
            .all(|(i, &v)| v == i + 1)
    }

    /// Positions `I` and values `M` of the right-to-left maxima, ascending.
    pub fn right_to_left_maxima(&self) -> (Vec<usize>, Vec<usize>) {
        let mut positions = Vec::new();
        let mut values = Vec::new();
        let mut max = 0;
        for (i, &v) in self.word.iter().enumerate().rev() {
            if v > max {
                max = v;
                positions.push(i + 1);
                values.push(v);
            }
        }
        positions.reverse();
        values.sort_unstable();
        (positions, values)
    }

    /// All permutations of length `n` in lexicographic order.
    pub fn all(n: usize) -> AllPermutations {
        AllPermutations {
            next: Some((1..=n).collect()),
        }
    }

    /// All permutations of length `0..=n`, in length-then-lexicographic order.
    pub fn all_up_to(n: usize) -> impl Iterator<Item = Permutation> {
        (0..=n).flat_map(Permutation::all)
    }
}

/// One pass of stack sorting: `s(L n R) = s(L) s(R) n`.
pub(crate) fn stack_sort(word: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(word.len());
    let mut stack: Vec<usize> = Vec::new();
    for &x in word {
        while let Some(&top) = stack.last() {
            if top < x {
                out.push(top);
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(x);
    }
    out.extend(stack.into_iter().rev());
    out
}

impl Ord for Permutation {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.word.cmp(&other.word))
    }
}

impl PartialOrd for Permutation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return f.write_str("e");
        }
        if self.len() <= 9 {
            for v in &self.word {
                write!(f, "{v}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.word.iter().map(|v| v.to_string()).collect();
            f.write_str(&parts.join(","))
        }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation({self})")
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "e" {
            return Ok(Self::empty());
        }
        if s.is_empty() {
            return Err(Error::Parse("empty permutation must be spelled `e`".into()));
        }
        let word = if s.contains(',') {
            s.split(',')
                .map(|part| {
                    part.trim()
                        .parse::<usize>()
                        .map_err(|e| Error::Parse(format!("bad letter `{part}`: {e}")))
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            s.chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as usize)
                        .ok_or_else(|| Error::Parse(format!("bad letter `{c}` in `{s}`")))
                })
                .collect::<Result<Vec<_>>>()?
        };
        Permutation::new(word)
    }
}

/// Iterator over `S_n` in lexicographic order.
pub struct AllPermutations {
    next: Option<Vec<usize>>,
}

impl Iterator for AllPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_permutation(&mut succ) {
            self.next = Some(succ);
        }
        Some(Permutation::from_word_unchecked(current))
    }
}

fn next_permutation(w: &mut [usize]) -> bool {
    let n = w.len();
    if n < 2 {
        return false;
    }
    let Some(i) = (0..n - 1).rev().find(|&i| w[i] < w[i + 1]) else {
        return false;
    };
    let j = (i + 1..n).rev().find(|&j| w[j] > w[i]).unwrap();
    w.swap(i, j);
    w[i + 1..].reverse();
    true
}

/// Value sets of the four quadrants around a point: `q1` right-above,
/// `q2` left-above, `q3` left-below, `q4` right-below.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Quadrants {
    pub q1: Vec<usize>,
    pub q2: Vec<usize>,
    pub q3: Vec<usize>,
    pub q4: Vec<usize>,
}

/// The increasing binary tree `T(p)`: root is the minimum, left subtree is
/// built from the letters before it, right subtree from those after.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IncreasingBinaryTree {
    Empty,
    Node {
        label: usize,
        left: Box<IncreasingBinaryTree>,
        right: Box<IncreasingBinaryTree>,
    },
}

impl IncreasingBinaryTree {
    fn build(word: &[usize]) -> Self {
        let Some((split, &label)) = word.iter().enumerate().min_by_key(|(_, &v)| v) else {
            return Self::Empty;
        };
        Self::Node {
            label,
            left: Box::new(Self::build(&word[..split])),
            right: Box::new(Self::build(&word[split + 1..])),
        }
    }

    pub fn label(&self) -> Option<usize> {
        match self {
            Self::Empty => None,
            Self::Node { label, .. } => Some(*label),
        }
    }

    pub fn in_order(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.walk(&mut out);
        out
    }

    fn walk(&self, out: &mut Vec<usize>) {
        if let Self::Node { label, left, right } = self {
            left.walk(out);
            out.push(*label);
            right.walk(out);
        }
    }

    fn bbd_valid(&self, on_leftmost_branch: bool) -> bool {
        let Self::Node { left, right, .. } = self else {
            return true;
        };
        if !on_leftmost_branch {
            if let (Some(l), Some(r)) = (left.label(), right.label()) {
                if l > r {
                    return false;
                }
            }
        }
        left.bbd_valid(on_leftmost_branch) && right.bbd_valid(false)
    }
}
