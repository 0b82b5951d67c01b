//! Mesh patterns and occurrence counting.
//!
//! A mesh pattern `(π, R)` pairs a permutation `π` of length `k` with a set
//! `R` of shaded unit cells in `[0, k] × [0, k]`. Cell `(i, j)` is the square
//! with bottom-left corner `(i, j)` in the plot of `π`. An occurrence in a host
//! `τ` is a classical occurrence of `π` whose shaded cells map to empty
//! rectangles of the plot of `τ`.
//!
//! Rectangle emptiness is answered in O(1) from a dominance prefix-count table
//! of the host (see [`Host`]).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// Longest pattern whose region fits in a 64-bit mask: `(7 + 1)^2 = 64`.
pub const MAX_PATTERN_LEN: usize = 7;

/// A set of cells of `[0, k]²`, stored row-major: bit `i·(k+1) + j` is cell `(i, j)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct RegionMask {
    k: usize,
    bits: u64,
}

impl RegionMask {
    pub fn empty(k: usize) -> Self {
        Self { k, bits: 0 }
    }

    pub fn full(k: usize) -> Self {
        Self {
            k,
            bits: full_bits(k),
        }
    }

    pub fn from_bits(k: usize, bits: u64) -> Result<Self> {
        if k > MAX_PATTERN_LEN {
            return Err(Error::PatternTooLong {
                len: k,
                max: MAX_PATTERN_LEN,
            });
        }
        if bits & !full_bits(k) != 0 {
            return Err(Error::InvalidInput(format!(
                "mask {bits:#x} has bits outside the {} cells of [0,{k}]^2",
                (k + 1) * (k + 1)
            )));
        }
        Ok(Self { k, bits })
    }

    pub fn from_cells<I>(k: usize, cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut region = Self::from_bits(k, 0)?;
        for (i, j) in cells {
            region.insert(i, j)?;
        }
        Ok(region)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn cell_count(&self) -> usize {
        (self.k + 1) * (self.k + 1)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    fn index(&self, i: usize, j: usize) -> usize {
        i * (self.k + 1) + j
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i <= self.k && j <= self.k && self.bits >> self.index(i, j) & 1 == 1
    }

    pub fn insert(&mut self, i: usize, j: usize) -> Result<()> {
        for c in [i, j] {
            if c > self.k {
                return Err(Error::OutOfRange {
                    index: c as i64,
                    lo: 0,
                    hi: self.k as i64,
                });
            }
        }
        self.bits |= 1 << self.index(i, j);
        Ok(())
    }

    pub fn is_subset(&self, other: &RegionMask) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn complement(&self) -> Self {
        Self {
            k: self.k,
            bits: !self.bits & full_bits(self.k),
        }
    }

    /// Cells in lexicographic order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.k + 1;
        BitIter(self.bits).map(move |b| (b / w, b % w))
    }

    fn map_cells(&self, f: impl Fn(usize, usize) -> (usize, usize)) -> Self {
        let mut out = Self::empty(self.k);
        for (i, j) in self.cells() {
            let (a, b) = f(i, j);
            out.bits |= 1 << out.index(a, b);
        }
        out
    }
}

pub(crate) fn full_bits(k: usize) -> u64 {
    let cells = (k + 1) * (k + 1);
    if cells >= 64 {
        u64::MAX
    } else {
        (1u64 << cells) - 1
    }
}

/// Iterator over set bit indices, ascending.
pub(crate) struct BitIter(pub(crate) u64);

impl Iterator for BitIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(b)
    }
}

/// A mesh pattern `(π, R)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MeshPattern {
    pattern: Permutation,
    region: RegionMask,
}

impl MeshPattern {
    pub fn new(pattern: Permutation, region: RegionMask) -> Result<Self> {
        if region.k() != pattern.len() {
            return Err(Error::InvalidInput(format!(
                "region is over [0,{}]^2 but pattern has length {}",
                region.k(),
                pattern.len()
            )));
        }
        Ok(Self { pattern, region })
    }

    pub fn with_cells<I>(pattern: Permutation, cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let region = RegionMask::from_cells(pattern.len(), cells)?;
        Ok(Self { pattern, region })
    }

    /// `(π, ∅)`.
    pub fn classical(pattern: Permutation) -> Result<Self> {
        let region = RegionMask::from_bits(pattern.len(), 0)?;
        Ok(Self { pattern, region })
    }

    /// Shades the full vertical strips `{c} × [0, k]` for each glued column.
    pub fn vincular(pattern: Permutation, columns: &[usize]) -> Result<Self> {
        Self::bivincular(pattern, columns, &[])
    }

    /// Shades full vertical strips at `columns` and full horizontal strips at `rows`.
    pub fn bivincular(pattern: Permutation, columns: &[usize], rows: &[usize]) -> Result<Self> {
        let k = pattern.len();
        let mut region = RegionMask::from_bits(k, 0)?;
        for &c in columns {
            for j in 0..=k {
                region.insert(c, j)?;
            }
        }
        for &r in rows {
            for i in 0..=k {
                region.insert(i, r)?;
            }
        }
        Ok(Self { pattern, region })
    }

    /// The mesh pattern of a barred pattern with one barred letter at
    /// 1-based position `barred`: remove that letter, standardize, and shade
    /// the single cell `(barred - 1, π(barred) - 1)`.
    pub fn barred<T: Ord + Copy>(word: &[T], barred: usize) -> Result<Self> {
        if barred == 0 || barred > word.len() {
            return Err(Error::OutOfRange {
                index: barred as i64,
                lo: 1,
                hi: word.len() as i64,
            });
        }
        let full = Permutation::flatten(word)?;
        let bar_value = full.at(barred);
        let rest: Vec<usize> = full
            .as_slice()
            .iter()
            .enumerate()
            .filter(|&(i, _)| i + 1 != barred)
            .map(|(_, &v)| v)
            .collect();
        let pattern = Permutation::flatten(&rest)?;
        Self::with_cells(pattern, [(barred - 1, bar_value - 1)])
    }

    pub fn pattern(&self) -> &Permutation {
        &self.pattern
    }

    pub fn region(&self) -> RegionMask {
        self.region
    }

    pub fn k(&self) -> usize {
        self.pattern.len()
    }

    /// `(π, R^c)`.
    pub fn complement_region(&self) -> Self {
        Self {
            pattern: self.pattern.clone(),
            region: self.region.complement(),
        }
    }

    pub fn count(&self, t: &Permutation) -> u64 {
        Host::new(t).count(self)
    }

    pub fn avoided_by(&self, t: &Permutation) -> bool {
        Host::new(t).avoids(self)
    }

    pub fn apply(&self, sym: Symmetry) -> Self {
        let k = self.k();
        match sym {
            Symmetry::Reverse => Self {
                pattern: self.pattern.reverse(),
                region: self.region.map_cells(|i, j| (k - i, j)),
            },
            Symmetry::Complement => Self {
                pattern: self.pattern.complement(),
                region: self.region.map_cells(|i, j| (i, k - j)),
            },
            Symmetry::Inverse => Self {
                pattern: self.pattern.inverse(),
                region: self.region.map_cells(|i, j| (j, i)),
            },
        }
    }

    /// Lexicographically least member of the orbit under the eight trivial symmetries.
    pub fn canonical(&self) -> Self {
        self.canonical_under(&GroupElement::ALL)
    }

    /// Least member of the orbit under the given group elements; the
    /// elements must form a group for the result to be a class invariant.
    pub fn canonical_under(&self, group: &[GroupElement]) -> Self {
        group
            .iter()
            .map(|g| g.apply(self))
            .min_by(|a, b| a.order_key().cmp(&b.order_key()))
            .expect("non-empty group")
    }

    fn order_key(&self) -> (&[usize], Vec<(usize, usize)>) {
        (self.pattern.as_slice(), self.region.cells().collect())
    }
}

/// Count of occurrences of `p` in `t`.
pub fn count_occurrences(p: &MeshPattern, t: &Permutation) -> u64 {
    p.count(t)
}

/// Whether `t` has no occurrence of `p`.
pub fn avoids(p: &MeshPattern, t: &Permutation) -> bool {
    p.avoided_by(t)
}

impl fmt::Display for MeshPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pattern)?;
        if !self.region.is_empty() {
            f.write_str(" | ")?;
            for (i, j) in self.region.cells() {
                write!(f, "({i},{j})")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MeshPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MeshPattern({self})")
    }
}

impl FromStr for MeshPattern {
    type Err = Error;

    /// Parses `<perm> | (i,j)(i,j)...`; the `|` clause is optional.
    fn from_str(s: &str) -> Result<Self> {
        let (perm, cells) = match s.split_once('|') {
            Some((a, b)) => (a, b),
            None => (s, ""),
        };
        let pattern: Permutation = perm.parse()?;
        let mut parsed = Vec::new();
        let mut rest = cells.trim();
        while !rest.is_empty() {
            let inner = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::Parse(format!("expected `(` in `{rest}`")))?;
            let (cell, tail) = inner
                .split_once(')')
                .ok_or_else(|| Error::Parse(format!("unclosed cell in `{rest}`")))?;
            let (i, j) = cell
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("cell `{cell}` needs two coordinates")))?;
            let coord = |x: &str| {
                x.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("bad coordinate `{x}`: {e}")))
            };
            parsed.push((coord(i)?, coord(j)?));
            rest = tail.trim_start();
        }
        Self::with_cells(pattern, parsed)
    }
}

/// One of the three generating symmetries of the square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symmetry {
    Reverse,
    Complement,
    Inverse,
}

impl Symmetry {
    pub fn apply_perm(self, t: &Permutation) -> Permutation {
        match self {
            Symmetry::Reverse => t.reverse(),
            Symmetry::Complement => t.complement(),
            Symmetry::Inverse => t.inverse(),
        }
    }
}

/// An element of the dihedral group of the square, written as
/// inverse (optional), then reverse (optional), then complement (optional).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    pub inverse: bool,
    pub reverse: bool,
    pub complement: bool,
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement::new(false, false, false);

    pub const ALL: [GroupElement; 8] = [
        GroupElement::new(false, false, false),
        GroupElement::new(false, false, true),
        GroupElement::new(false, true, false),
        GroupElement::new(false, true, true),
        GroupElement::new(true, false, false),
        GroupElement::new(true, false, true),
        GroupElement::new(true, true, false),
        GroupElement::new(true, true, true),
    ];

    /// The elements fixing `12` (and `321`): identity, reverse-complement,
    /// inverse, and their product.
    pub const STABILIZER_OF_IDENTITY: [GroupElement; 4] = [
        GroupElement::new(false, false, false),
        GroupElement::new(false, true, true),
        GroupElement::new(true, false, false),
        GroupElement::new(true, true, true),
    ];

    pub const fn new(inverse: bool, reverse: bool, complement: bool) -> Self {
        Self {
            inverse,
            reverse,
            complement,
        }
    }

    fn steps(self) -> impl Iterator<Item = Symmetry> {
        [
            (self.inverse, Symmetry::Inverse),
            (self.reverse, Symmetry::Reverse),
            (self.complement, Symmetry::Complement),
        ]
        .into_iter()
        .filter(|&(on, _)| on)
        .map(|(_, s)| s)
    }

    pub fn apply(self, p: &MeshPattern) -> MeshPattern {
        self.steps().fold(p.clone(), |acc, s| acc.apply(s))
    }

    pub fn apply_perm(self, t: &Permutation) -> Permutation {
        self.steps().fold(t.clone(), |acc, s| s.apply_perm(&acc))
    }
}

/// Steps in application order: `i`, `r`, `c`; the identity prints as `id`.
impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == GroupElement::IDENTITY {
            return f.write_str("id");
        }
        for s in self.steps() {
            f.write_str(match s {
                Symmetry::Inverse => "i",
                Symmetry::Reverse => "r",
                Symmetry::Complement => "c",
            })?;
        }
        Ok(())
    }
}

/// An occurrence: 1-based positions `α(1) < … < α(k)` and the sorted values
/// `β(1) < … < β(k)` of the selected letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OccurrenceWitness {
    pub positions: Vec<usize>,
    pub values: Vec<usize>,
}

/// A host permutation with its dominance table
/// `dom[a][b] = #{i ≤ a : τ(i) ≤ b}` for `a, b ∈ [0, n]`.
pub struct Host {
    word: Vec<usize>,
    dom: Vec<u32>,
}

impl Host {
    pub fn new(t: &Permutation) -> Self {
        let n = t.len();
        let w = n + 1;
        let mut dom = vec![0u32; w * w];
        for a in 1..=n {
            let v = t.at(a);
            for b in 0..=n {
                dom[a * w + b] = dom[(a - 1) * w + b] + u32::from(v <= b);
            }
        }
        Self {
            word: t.as_slice().to_vec(),
            dom,
        }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    fn dom(&self, a: usize, b: usize) -> u32 {
        self.dom[a * (self.word.len() + 1) + b]
    }

    /// Whether the closed rectangle `[x1, x2] × [y1, y2]` holds no point.
    fn rect_empty(&self, x1: usize, x2: usize, y1: usize, y2: usize) -> bool {
        if x1 > x2 || y1 > y2 {
            return true;
        }
        self.dom(x2, y2) + self.dom(x1 - 1, y1 - 1) == self.dom(x1 - 1, y2) + self.dom(x2, y1 - 1)
    }

    pub fn occurrences<'a>(&'a self, p: &'a MeshPattern) -> Occurrences<'a> {
        Occurrences {
            host: self,
            pattern: p.pattern.as_slice(),
            region: p.region,
            stack: Vec::with_capacity(p.k()),
            cursor: 0,
            started: false,
            done: p.k() > self.len(),
        }
    }

    pub fn count(&self, p: &MeshPattern) -> u64 {
        self.occurrences(p).count() as u64
    }

    pub fn avoids(&self, p: &MeshPattern) -> bool {
        self.occurrences(p).next().is_none()
    }

    /// Sentinel-extended position and value boundaries of a classical occurrence.
    fn bounds(&self, pattern: &[usize], chosen: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let k = pattern.len();
        let n = self.word.len();
        let mut alpha = vec![0; k + 2];
        let mut beta = vec![0; k + 2];
        for (i, &pos) in chosen.iter().enumerate() {
            alpha[i + 1] = pos + 1;
            beta[pattern[i]] = self.word[pos];
        }
        alpha[k + 1] = n + 1;
        beta[k + 1] = n + 1;
        (alpha, beta)
    }

    fn cell_empty(&self, alpha: &[usize], beta: &[usize], i: usize, j: usize) -> bool {
        self.rect_empty(alpha[i] + 1, alpha[i + 1] - 1, beta[j] + 1, beta[j + 1] - 1)
    }

    /// The cells of `[0, k]²` whose rectangles are empty for a classical
    /// occurrence of `pattern` at 0-based positions `chosen`.
    pub(crate) fn empty_cells(&self, pattern: &[usize], chosen: &[usize]) -> u64 {
        let k = pattern.len();
        let (alpha, beta) = self.bounds(pattern, chosen);
        let mut mask = 0u64;
        for i in 0..=k {
            for j in 0..=k {
                if self.cell_empty(&alpha, &beta, i, j) {
                    mask |= 1 << (i * (k + 1) + j);
                }
            }
        }
        mask
    }

    /// Empty-cell masks of every classical occurrence of `pattern`.
    pub fn empty_cell_masks(&self, pattern: &Permutation) -> Vec<u64> {
        let classical = MeshPattern {
            pattern: pattern.clone(),
            region: RegionMask::empty(pattern.len()),
        };
        let mut it = self.occurrences(&classical);
        let mut out = Vec::new();
        while it.advance() {
            out.push(self.empty_cells(it.pattern, &it.stack));
        }
        out
    }
}

/// Lazy enumeration of occurrences, position subsets in lexicographic order.
pub struct Occurrences<'a> {
    host: &'a Host,
    pattern: &'a [usize],
    region: RegionMask,
    stack: Vec<usize>,
    cursor: usize,
    started: bool,
    done: bool,
}

impl Occurrences<'_> {
    /// Whether placing pattern letter `d` at host position `pos` keeps the
    /// chosen subword order-isomorphic to the pattern prefix.
    fn consistent(&self, pos: usize) -> bool {
        let d = self.stack.len();
        let v = self.host.word[pos];
        let pd = self.pattern[d];
        self.stack
            .iter()
            .zip(self.pattern)
            .all(|(&q, &pl)| (self.host.word[q] < v) == (pl < pd))
    }

    fn shading_holds(&self) -> bool {
        if self.region.is_empty() {
            return true;
        }
        let (alpha, beta) = self.host.bounds(self.pattern, &self.stack);
        self.region
            .cells()
            .all(|(i, j)| self.host.cell_empty(&alpha, &beta, i, j))
    }

    /// Moves to the next classical occurrence, leaving it in `stack`.
    /// Mesh conditions are not checked here.
    fn advance(&mut self) -> bool {
        let k = self.pattern.len();
        let n = self.host.len();
        if self.done {
            return false;
        }
        if std::mem::replace(&mut self.started, true) && self.stack.len() == k {
            // Step past the occurrence reported last time.
            match self.stack.pop() {
                Some(last) => self.cursor = last + 1,
                None => {
                    self.done = true;
                    return false;
                }
            }
        }
        loop {
            let d = self.stack.len();
            if d == k {
                return true;
            }
            if self.cursor + (k - d) > n {
                match self.stack.pop() {
                    Some(last) => self.cursor = last + 1,
                    None => {
                        self.done = true;
                        return false;
                    }
                }
                continue;
            }
            let pos = self.cursor;
            if self.consistent(pos) {
                self.stack.push(pos);
            }
            self.cursor = pos + 1;
        }
    }
}

impl Iterator for Occurrences<'_> {
    type Item = OccurrenceWitness;

    fn next(&mut self) -> Option<OccurrenceWitness> {
        while self.advance() {
            if self.shading_holds() {
                let positions: Vec<usize> = self.stack.iter().map(|&p| p + 1).collect();
                let mut values: Vec<usize> = self.stack.iter().map(|&p| self.host.word[p]).collect();
                values.sort_unstable();
                return Some(OccurrenceWitness { positions, values });
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn mp(s: &str) -> MeshPattern {
        s.parse().unwrap()
    }

    /// Straight from the definition: every k-subset of positions, flatten,
    /// then scan every shaded rectangle point by point.
    fn naive_count(pat: &MeshPattern, t: &Permutation) -> u64 {
        let k = pat.k();
        let n = t.len();
        let mut total = 0;
        for subset in 0u32..(1 << n) {
            if subset.count_ones() as usize != k {
                continue;
            }
            let chosen: Vec<usize> = (0..n).filter(|&i| subset >> i & 1 == 1).collect();
            let vals: Vec<usize> = chosen.iter().map(|&i| t.as_slice()[i]).collect();
            if Permutation::flatten(&vals).unwrap() != *pat.pattern() {
                continue;
            }
            let mut alpha = vec![0];
            alpha.extend(chosen.iter().map(|&i| i + 1));
            alpha.push(n + 1);
            let mut beta = vec![0];
            let mut sorted = vals.clone();
            sorted.sort();
            beta.extend(sorted);
            beta.push(n + 1);
            let ok = pat.region().cells().all(|(i, j)| {
                (1..=n).all(|x| {
                    let y = t.at(x);
                    !(alpha[i] < x && x < alpha[i + 1] && beta[j] < y && y < beta[j + 1])
                })
            });
            if ok {
                total += 1;
            }
        }
        total
    }

    fn random_perm(rng: &mut ChaCha8Rng, n: usize) -> Permutation {
        let mut w: Vec<usize> = (1..=n).collect();
        for i in (1..n).rev() {
            w.swap(i, rng.gen_range(0..=i));
        }
        Permutation::new(w).unwrap()
    }

    fn random_pattern(rng: &mut ChaCha8Rng, max_k: usize) -> MeshPattern {
        let k = rng.gen_range(0..=max_k);
        let bits = rng.gen::<u64>() & full_bits(k);
        MeshPattern::new(random_perm(rng, k), RegionMask::from_bits(k, bits).unwrap()).unwrap()
    }

    #[test]
    fn count_examples() {
        assert_eq!(mp("3241 | (0,2)(1,3)(1,4)(4,2)(4,3)").count(&p("3241")), 1);
        assert_eq!(mp("1 | (0,1)").count(&p("2413")), 2);
        assert_eq!(mp("21 | (1,0)(1,1)(1,2)").count(&p("3142")), 2);
        assert_eq!(mp("21").count(&p("321")), 3);
    }

    #[test]
    fn witnesses_are_lexicographic() {
        let host = Host::new(&p("321"));
        let pat = mp("21");
        let ws: Vec<_> = host.occurrences(&pat).map(|w| w.positions).collect();
        assert_eq!(ws, vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
        let w = host.occurrences(&pat).next().unwrap();
        assert_eq!(w.values, vec![2, 3]);
    }

    #[test]
    fn avoidance_examples() {
        let simsun = mp("321 | (1,0)(1,1)(1,2)(2,0)(2,1)(2,2)");
        assert!(!simsun.avoided_by(&p("321")));
        assert!(mp("4321").avoided_by(&p("321")));
        let end_max = mp("21 | (2,0)(2,1)(2,2)");
        assert!(!end_max.avoided_by(&p("231")));
        assert!(end_max.avoided_by(&p("213")));
    }

    #[test]
    fn empty_pattern_conventions() {
        let e = MeshPattern::classical(Permutation::empty()).unwrap();
        for t in Permutation::all_up_to(4) {
            assert_eq!(e.count(&t), 1);
        }
        // The only cell of the empty pattern covers the whole plot.
        let full = MeshPattern::new(Permutation::empty(), RegionMask::full(0)).unwrap();
        assert_eq!(full.to_string(), "e | (0,0)");
        for t in Permutation::all_up_to(4) {
            assert_eq!(full.count(&t), u64::from(t.is_empty()));
        }
    }

    #[test]
    fn complement_examples() {
        assert_eq!(mp("21").complement_region().region().len(), 9);
        assert_eq!(mp("1 | (0,1)").complement_region(), mp("1 | (0,0)(1,0)(1,1)"));
    }

    #[test]
    fn conversions() {
        assert_eq!(MeshPattern::classical(p("21")).unwrap(), mp("21"));
        assert_eq!(
            MeshPattern::vincular(p("21"), &[1]).unwrap(),
            mp("21 | (1,0)(1,1)(1,2)")
        );
        assert_eq!(
            MeshPattern::vincular(p("132"), &[2]).unwrap(),
            mp("132 | (2,0)(2,1)(2,2)(2,3)")
        );
        assert_eq!(MeshPattern::vincular(p("12"), &[]).unwrap(), mp("12"));
        assert_eq!(
            MeshPattern::bivincular(p("231"), &[1], &[1]).unwrap(),
            mp("231 | (0,1)(1,0)(1,1)(1,2)(1,3)(2,1)(3,1)")
        );
        assert_eq!(MeshPattern::bivincular(p("21"), &[], &[]).unwrap(), mp("21"));
        assert_eq!(
            MeshPattern::bivincular(p("1"), &[0, 1], &[0, 1]).unwrap().region(),
            RegionMask::full(1)
        );
        assert!(MeshPattern::vincular(p("21"), &[3]).is_err());
        assert!(MeshPattern::bivincular(p("21"), &[], &[5]).is_err());
        assert_eq!(MeshPattern::barred(&[3, 5, 2, 4, 1], 2).unwrap(), mp("3241 | (1,4)"));
        assert_eq!(MeshPattern::barred(&[2, 1], 1).unwrap(), mp("1 | (0,1)"));
        assert_eq!(MeshPattern::barred(&[1, 2], 2).unwrap(), mp("1 | (1,1)"));
        assert!(MeshPattern::barred(&[1, 2], 3).is_err());
    }

    #[test]
    fn symmetry_examples() {
        assert_eq!(mp("21").apply(Symmetry::Reverse), mp("12"));
        assert_eq!(mp("1 | (0,1)").apply(Symmetry::Inverse), mp("1 | (1,0)"));
        assert_eq!(mp("21").canonical(), mp("12"));
        let c = mp("3241 | (1,4)").canonical();
        assert_eq!(c.canonical(), c);
    }

    #[test]
    fn symmetries_preserve_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let patterns: Vec<MeshPattern> = (0..40).map(|_| random_pattern(&mut rng, 3)).collect();
        for t in Permutation::all_up_to(6) {
            for pat in &patterns {
                let c = pat.count(&t);
                for g in GroupElement::ALL {
                    assert_eq!(g.apply(pat).count(&g.apply_perm(&t)), c, "{pat} on {t} via {g:?}");
                }
            }
        }
    }

    #[test]
    fn orbit_sizes_divide_eight() {
        for k in 0..=2 {
            for pat in Permutation::all(k) {
                for bits in 0..=full_bits(k) {
                    let m = MeshPattern::new(pat.clone(), RegionMask::from_bits(k, bits).unwrap()).unwrap();
                    let mut orbit: Vec<MeshPattern> = GroupElement::ALL.iter().map(|g| g.apply(&m)).collect();
                    orbit.sort_by(|a, b| a.order_key().cmp(&b.order_key()));
                    orbit.dedup();
                    assert_eq!(8 % orbit.len(), 0);
                    assert_eq!(orbit[0], m.canonical());
                }
            }
        }
        // length 3 is sampled: 6 · 2^16 patterns is more than a unit test needs
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let bits = rng.gen::<u64>() & full_bits(3);
            let m = MeshPattern::new(random_perm(&mut rng, 3), RegionMask::from_bits(3, bits).unwrap()).unwrap();
            let mut orbit: Vec<MeshPattern> = GroupElement::ALL.iter().map(|g| g.apply(&m)).collect();
            orbit.sort_by(|a, b| a.order_key().cmp(&b.order_key()));
            orbit.dedup();
            assert_eq!(8 % orbit.len(), 0);
        }
    }

    #[test]
    fn classical_counts_match_naive_counter() {
        for pat in Permutation::all_up_to(3) {
            let m = MeshPattern::classical(pat.clone()).unwrap();
            for t in Permutation::all_up_to(7) {
                let subsets = naive_count(&m, &t);
                assert_eq!(m.count(&t), subsets, "{pat} in {t}");
            }
        }
    }

    #[test]
    fn dominance_kernel_matches_rectangle_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000);
        for _ in 0..1000 {
            let pat = random_pattern(&mut rng, 4);
            let n = rng.gen_range(0..=8);
            let t = random_perm(&mut rng, n);
            assert_eq!(pat.count(&t), naive_count(&pat, &t), "{pat} in {t}");
        }
    }

    #[test]
    fn shading_more_never_counts_more() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let small = random_pattern(&mut rng, 3);
            let extra = rng.gen::<u64>() & full_bits(small.k());
            let big = MeshPattern::new(
                small.pattern().clone(),
                RegionMask::from_bits(small.k(), small.region().bits() | extra).unwrap(),
            )
            .unwrap();
            let t = random_perm(&mut rng, 7);
            assert!(big.count(&t) <= small.count(&t));
        }
    }

    #[test]
    fn fully_shaded_is_delta() {
        for pat in Permutation::all_up_to(3) {
            let full = MeshPattern::new(pat.clone(), RegionMask::full(pat.len())).unwrap();
            for t in Permutation::all_up_to(5) {
                assert_eq!(full.count(&t), u64::from(t == pat));
            }
        }
    }

    #[test]
    fn parse_errors() {
        assert!("21 | (3,0)".parse::<MeshPattern>().is_err());
        assert!("21 | (1,0".parse::<MeshPattern>().is_err());
        assert!("21 | 1,0)".parse::<MeshPattern>().is_err());
        assert!("21 | (1)".parse::<MeshPattern>().is_err());
        assert!("12345678 | (0,0)".parse::<MeshPattern>().is_err());
        assert_eq!("21 |".parse::<MeshPattern>().unwrap(), mp("21"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn pattern_strategy() -> impl Strategy<Value = MeshPattern> {
            (0usize..=4)
                .prop_flat_map(|k| (Just((1..=k).collect::<Vec<_>>()).prop_shuffle(), 0..=full_bits(k), Just(k)))
                .prop_map(|(w, bits, k)| {
                    MeshPattern::new(Permutation::new(w).unwrap(), RegionMask::from_bits(k, bits).unwrap()).unwrap()
                })
        }

        proptest! {
            #[test]
            fn text_round_trip(m in pattern_strategy()) {
                prop_assert_eq!(m.to_string().parse::<MeshPattern>().unwrap(), m);
            }

            #[test]
            fn complement_is_involution(m in pattern_strategy()) {
                prop_assert_eq!(m.complement_region().complement_region(), m);
            }

            #[test]
            fn canonical_is_idempotent(m in pattern_strategy()) {
                let c = m.canonical();
                prop_assert_eq!(c.canonical(), c);
            }
        }
    }
}
