//! Mahonian statistics: polynomial bookkeeping, the inversion and
//! non-inversion splits, the `ψ` involution and the joint distribution
//! `F_n` of `(S1, S2, T1, T2)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::stats;

/// The five variables a [`MultiPoly`] can mention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    P1,
    P2,
    Q1,
    Q2,
    Q,
}

impl Var {
    pub const ALL: [Var; 5] = [Var::P1, Var::P2, Var::Q1, Var::Q2, Var::Q];

    fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::P1 => "p1",
            Var::P2 => "p2",
            Var::Q1 => "q1",
            Var::Q2 => "q2",
            Var::Q => "q",
        }
    }

    fn from_name(s: &str) -> Option<Var> {
        Var::ALL.into_iter().find(|v| v.name() == s)
    }
}

pub type Exponents = [u32; 5];

/// Integer polynomial in `p1, p2, q1, q2, q`; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    terms: BTreeMap<Exponents, i64>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(1)
    }

    pub fn constant(c: i64) -> Self {
        Self::monomial(c, [0; 5])
    }

    pub fn var(v: Var) -> Self {
        Self::var_pow(v, 1)
    }

    pub fn var_pow(v: Var, e: u32) -> Self {
        let mut exps = [0; 5];
        exps[v.index()] = e;
        Self::monomial(1, exps)
    }

    pub fn monomial(c: i64, exps: Exponents) -> Self {
        let mut p = Self::zero();
        p.add_term(exps, c);
        p
    }

    fn add_term(&mut self, exps: Exponents, c: i64) {
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(exps).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.terms.remove(&exps);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exps: &Exponents) -> i64 {
        self.terms.get(exps).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, i64)> {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Replaces every variable by a polynomial at once.
    pub fn substitute(&self, images: &[MultiPoly; 5]) -> Self {
        let mut out = Self::zero();
        for (exps, c) in self.terms() {
            let mut term = Self::constant(c);
            for (v, &e) in exps.iter().enumerate() {
                if e > 0 {
                    term = &term * &images[v].pow(e);
                }
            }
            out = &out + &term;
        }
        out
    }

    /// Shorthand for [`substitute`](Self::substitute) where each variable maps
    /// to `1` (`None`) or to a single variable.
    pub fn specialize(&self, images: [Option<Var>; 5]) -> Self {
        let images = images.map(|v| v.map_or_else(Self::one, Self::var));
        self.substitute(&images)
    }

    /// Exchanges two variables.
    pub fn swap(&self, a: Var, b: Var) -> Self {
        let mut out = Self::zero();
        for (exps, c) in self.terms() {
            let mut e = *exps;
            e.swap(a.index(), b.index());
            out.add_term(e, c);
        }
        out
    }

    /// Coefficients of a polynomial in `q` alone, indexed by degree.
    pub fn univariate_coeffs(&self, v: Var) -> Result<Vec<i64>> {
        let mut out = Vec::new();
        for (exps, c) in self.terms() {
            if exps.iter().enumerate().any(|(i, &e)| i != v.index() && e != 0) {
                return Err(Error::InvalidInput(format!("{self} is not a polynomial in {}", v.name())));
            }
            let d = exps[v.index()] as usize;
            if out.len() <= d {
                out.resize(d + 1, 0);
            }
            out[d] = c;
        }
        Ok(out)
    }

    /// `Σ c_d v^d`.
    pub fn from_univariate(v: Var, coeffs: &[i64]) -> Self {
        let mut out = Self::zero();
        for (d, &c) in coeffs.iter().enumerate() {
            out = &out + &(&Self::constant(c) * &Self::var_pow(v, d as u32));
        }
        out
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (e, c) in rhs.terms() {
            out.add_term(*e, c);
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self + &(-rhs)
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (a, x) in self.terms() {
            for (b, y) in rhs.terms() {
                let mut e = [0; 5];
                for i in 0..5 {
                    e[i] = a[i] + b[i];
                }
                out.add_term(e, x * y);
            }
        }
        out
    }
}

impl std::iter::Sum for MultiPoly {
    fn sum<I: Iterator<Item = MultiPoly>>(iter: I) -> Self {
        iter.fold(MultiPoly::zero(), |acc, p| &acc + &p)
    }
}

/// Monomials by total degree, then by exponent vector with earlier
/// variables first: `1 + 2*q + 2*q^2 + q^3`, `q1^2 + q1*q2 + q2^2`.
impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut terms: Vec<(&Exponents, i64)> = self.terms().collect();
        terms.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            da.cmp(&db).then_with(|| b.cmp(a))
        });
        for (i, (exps, c)) in terms.into_iter().enumerate() {
            let abs = c.unsigned_abs();
            match (i, c < 0) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let vars: Vec<String> = Var::ALL
                .iter()
                .filter(|v| exps[v.index()] > 0)
                .map(|v| match exps[v.index()] {
                    1 => v.name().to_string(),
                    e => format!("{}^{e}", v.name()),
                })
                .collect();
            match (abs, vars.is_empty()) {
                (_, true) => write!(f, "{abs}")?,
                (1, false) => write!(f, "{}", vars.join("*"))?,
                (_, false) => write!(f, "{abs}*{}", vars.join("*"))?,
            }
        }
        Ok(())
    }
}

impl FromStr for MultiPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut out = MultiPoly::zero();
        let mut start = 0;
        let bytes = compact.as_bytes();
        for i in 1..=bytes.len() {
            if i == bytes.len() || ((bytes[i] == b'+' || bytes[i] == b'-') && bytes[i - 1] != b'^') {
                out = &out + &parse_term(&compact[start..i])?;
                start = i;
            }
        }
        Ok(out)
    }
}

fn parse_term(term: &str) -> Result<MultiPoly> {
    let bad = || Error::Parse(format!("bad monomial `{term}`"));
    let (sign, body) = match term.as_bytes().first() {
        Some(b'-') => (-1, &term[1..]),
        Some(b'+') => (1, &term[1..]),
        _ => (1, term),
    };
    if body.is_empty() {
        return Err(bad());
    }
    let mut coeff = sign;
    let mut exps = [0u32; 5];
    for factor in body.split('*') {
        if let Ok(c) = factor.parse::<i64>() {
            coeff *= c;
            continue;
        }
        let (name, e) = match factor.split_once('^') {
            Some((n, e)) => (n, e.parse::<u32>().map_err(|_| bad())?),
            None => (factor, 1),
        };
        let v = Var::from_name(name).ok_or_else(bad)?;
        exps[v.index()] += e;
    }
    Ok(MultiPoly::monomial(coeff, exps))
}

/// `[n] = q1^{n-1} + q1^{n-2} q2 + ... + q2^{n-1}`; `[0] = 0`.
pub fn bracket(n: u32) -> MultiPoly {
    let mut out = MultiPoly::zero();
    for i in 0..n {
        out.add_term([0, 0, n - 1 - i, i, 0], 1);
    }
    out
}

/// `[1][2]...[n]`.
pub fn bracket_factorial(n: u32) -> MultiPoly {
    (1..=n).fold(MultiPoly::one(), |acc, i| &acc * &bracket(i))
}

/// The `q1,q2`-binomial via `B(n,k) = q2^k B(n-1,k) + q1^{n-k} B(n-1,k-1)`.
pub fn pq_binomial(n: u32, k: u32) -> Result<MultiPoly> {
    if k > n {
        return Err(Error::OutOfRange {
            index: i64::from(k),
            lo: 0,
            hi: i64::from(n),
        });
    }
    // row[j] = B(m, j) for the current m.
    let mut row = vec![MultiPoly::one()];
    for m in 1..=n {
        let mut next = Vec::with_capacity(m as usize + 1);
        for j in 0..=m {
            let keep = if j < m {
                &MultiPoly::var_pow(Var::Q2, j) * &row[j as usize]
            } else {
                MultiPoly::zero()
            };
            let take = if j > 0 {
                &MultiPoly::var_pow(Var::Q1, m - j) * &row[j as usize - 1]
            } else {
                MultiPoly::zero()
            };
            next.push(&keep + &take);
        }
        row = next;
    }
    Ok(row.swap_remove(k as usize))
}

/// `#{(i, j) : i ∈ A, j ∈ [n] \ A, i > j}`.
pub fn gamma(a: &BTreeSet<usize>, n: usize) -> usize {
    debug_assert!(a.iter().all(|&i| (1..=n).contains(&i)));
    a.iter()
        .map(|&i| (1..i).filter(|j| !a.contains(j)).count())
        .sum()
}

/// `Σ_{A ⊆ [n], |A| = k} q1^{k(n-k) - γ(A)} q2^{γ(A)}`.
pub fn pq_binomial_by_subsets(n: u32, k: u32) -> Result<MultiPoly> {
    if k > n {
        return Err(Error::OutOfRange {
            index: i64::from(k),
            lo: 0,
            hi: i64::from(n),
        });
    }
    let mut out = MultiPoly::zero();
    for mask in 0u64..(1 << n) {
        if mask.count_ones() != k {
            continue;
        }
        let a: BTreeSet<usize> = (1..=n as usize).filter(|i| mask >> (i - 1) & 1 == 1).collect();
        let g = gamma(&a, n as usize) as u32;
        out.add_term([0, 0, k * (n - k) - g, g, 0], 1);
    }
    Ok(out)
}

/// Position pairs `(i, j)`, `i < j`, 1-based.
pub type PositionPairs = Vec<(usize, usize)>;

/// Splits pairs `i < j` selected by `is_pair` by whether some later letter
/// exceeds both entries.
fn split_pairs<F>(t: &Permutation, is_pair: F) -> (PositionPairs, PositionPairs)
where
    F: Fn(usize, usize) -> bool,
{
    let w = t.as_slice();
    let n = w.len();
    // suffix_max[j] = max of w[j..], 0 past the end
    let mut suffix_max = vec![0; n + 1];
    for j in (0..n).rev() {
        suffix_max[j] = suffix_max[j + 1].max(w[j]);
    }
    let (mut plus, mut minus) = (Vec::new(), Vec::new());
    for i in 0..n {
        for j in i + 1..n {
            if !is_pair(w[i], w[j]) {
                continue;
            }
            let top = w[i].max(w[j]);
            if suffix_max[j + 1] > top {
                plus.push((i + 1, j + 1));
            } else {
                minus.push((i + 1, j + 1));
            }
        }
    }
    (plus, minus)
}

/// `(I⁺, I⁻)`: inversions that do, resp. do not, play `21` in some `213`.
pub fn inv_decomposition(t: &Permutation) -> (PositionPairs, PositionPairs) {
    split_pairs(t, |a, b| a > b)
}

/// `(A⁺, A⁻)`: non-inversions that do, resp. do not, play `12` in some `123`.
pub fn noninv_decomposition(t: &Permutation) -> (PositionPairs, PositionPairs) {
    split_pairs(t, |a, b| a < b)
}

/// Values of `t` that are not right-to-left maxima.
fn non_maxima(t: &Permutation) -> BTreeSet<usize> {
    let (_, values) = t.right_to_left_maxima();
    (1..=t.len()).filter(|v| !values.contains(v)).collect()
}

/// `ci(t)(y) = #{x : (y, x) ∈ I⁺(t)}`, keyed by the values `y` that are not
/// right-to-left maxima.
pub fn ci_code(t: &Permutation) -> BTreeMap<usize, usize> {
    let mut code: BTreeMap<usize, usize> = non_maxima(t).into_iter().map(|y| (y, 0)).collect();
    for (i, _) in inv_decomposition(t).0 {
        *code.get_mut(&t.at(i)).expect("left entry of an I+ pair is not a maximum") += 1;
    }
    code
}

/// `ca(t)(y) = #{x : (x, y) ∈ A⁺(t)}`, keyed like [`ci_code`].
pub fn ca_code(t: &Permutation) -> BTreeMap<usize, usize> {
    let mut code: BTreeMap<usize, usize> = non_maxima(t).into_iter().map(|y| (y, 0)).collect();
    for (_, j) in noninv_decomposition(t).0 {
        *code.get_mut(&t.at(j)).expect("right entry of an A+ pair is not a maximum") += 1;
    }
    code
}

/// Permutations of `[n]` with right-to-left maxima exactly at positions `I`
/// with values `M`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MIClass {
    n: usize,
    m: BTreeSet<usize>,
    i: BTreeSet<usize>,
}

impl MIClass {
    pub fn new(n: usize, m: BTreeSet<usize>, i: BTreeSet<usize>) -> Result<Self> {
        let show = || format!("n = {n}, M = {m:?}, I = {i:?}");
        if m.len() != i.len() || !m.contains(&n) || !i.contains(&n) {
            return Err(Error::InvalidClass(show()));
        }
        if m.iter().chain(&i).any(|&x| x == 0 || x > n) {
            return Err(Error::InvalidClass(show()));
        }
        Ok(Self { n, m, i })
    }

    /// The class containing `t`; `None` for the empty permutation.
    pub fn of(t: &Permutation) -> Option<Self> {
        if t.is_empty() {
            return None;
        }
        let (positions, values) = t.right_to_left_maxima();
        Some(Self {
            n: t.len(),
            m: values.into_iter().collect(),
            i: positions.into_iter().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn maxima_values(&self) -> &BTreeSet<usize> {
        &self.m
    }

    pub fn maxima_positions(&self) -> &BTreeSet<usize> {
        &self.i
    }

    pub fn contains(&self, t: &Permutation) -> bool {
        Self::of(t).as_ref() == Some(self)
    }

    /// Every `(M, I)` satisfying the class conditions for this `n`.
    pub fn all(n: usize) -> Vec<MIClass> {
        if n == 0 {
            return Vec::new();
        }
        let subsets_with_n = |size: usize| -> Vec<BTreeSet<usize>> {
            (0u64..1 << (n - 1))
                .filter(|mask| mask.count_ones() as usize + 1 == size)
                .map(|mask| {
                    (1..n)
                        .filter(|x| mask >> (x - 1) & 1 == 1)
                        .chain([n])
                        .collect()
                })
                .collect()
        };
        let mut out = Vec::new();
        for size in 1..=n {
            let sets = subsets_with_n(size);
            for m in &sets {
                for i in &sets {
                    out.push(MIClass {
                        n,
                        m: m.clone(),
                        i: i.clone(),
                    });
                }
            }
        }
        out
    }
}

pub fn enumerate_mi(class: &MIClass) -> Vec<Permutation> {
    Permutation::all(class.n).filter(|t| class.contains(t)).collect()
}

/// Reverses the values of `s` across the positions that hold them.
fn reverse_on(word: &mut [usize], s: &BTreeSet<usize>) {
    let positions: Vec<usize> = (0..word.len()).filter(|&p| s.contains(&word[p])).collect();
    let values: Vec<usize> = positions.iter().map(|&p| word[p]).collect();
    for (&p, &v) in positions.iter().zip(values.iter().rev()) {
        word[p] = v;
    }
}

/// The sets `B_i` of entries smaller than and left of the `i`-th smallest
/// right-to-left maximum.
fn b_sets(t: &Permutation) -> Vec<BTreeSet<usize>> {
    let (positions, values) = t.right_to_left_maxima();
    // Right-to-left maxima decrease left to right, so sorting by value
    // pairs each value with its position.
    let mut pairs: Vec<(usize, usize)> = values.into_iter().zip(positions.into_iter().rev()).collect();
    pairs.sort_unstable();
    pairs
        .into_iter()
        .map(|(m, pos)| t.as_slice()[..pos - 1].iter().copied().filter(|&v| v < m).collect())
        .collect()
}

/// `ψ = ψ_{B_1} ∘ ψ_{B_2 ∩ B_1} ∘ ... ∘ ψ_{B_k ∩ B_{k-1}} ∘ ψ_{B_k}`.
pub fn psi(t: &Permutation) -> Permutation {
    psi_steps(t).pop().unwrap_or_else(|| t.clone())
}

/// The intermediate words of [`psi`], ending with the image.
pub fn psi_steps(t: &Permutation) -> Vec<Permutation> {
    let b = b_sets(t);
    let mut word = t.as_slice().to_vec();
    let mut steps = Vec::new();
    for i in (0..b.len()).rev() {
        if i + 1 < b.len() {
            let meet: BTreeSet<usize> = b[i].intersection(&b[i + 1]).copied().collect();
            reverse_on(&mut word, &meet);
            steps.push(Permutation::new(word.clone()).expect("reversal permutes"));
        }
        reverse_on(&mut word, &b[i]);
        steps.push(Permutation::new(word.clone()).expect("reversal permutes"));
    }
    steps
}

/// The four statistics `(S1, S2, T1, T2)` recorded by `F_n`.
pub fn s_t_quadruple(t: &Permutation) -> [u32; 4] {
    ["S1", "S2", "T1", "T2"].map(|name| {
        stats::descriptor(name)
            .expect("builtin descriptor")
            .evaluate(t) as u32
    })
}

/// `F_n = Σ_{t ∈ S_n} p1^{S1} p2^{S2} q1^{T1} q2^{T2}`, by enumeration.
pub fn f_direct(n: usize) -> MultiPoly {
    let names = ["S1", "S2", "T1", "T2"].map(|s| stats::descriptor(s).expect("builtin"));
    let perms: Vec<Permutation> = Permutation::all(n).collect();
    let counts: BTreeMap<Exponents, i64> = perms
        .par_iter()
        .map(|t| {
            let host = crate::mesh::Host::new(t);
            let v = names.each_ref().map(|d| d.evaluate_on(&host) as u32);
            [v[0], v[1], v[2], v[3], 0]
        })
        .fold(BTreeMap::new, |mut acc, e| {
            *acc.entry(e).or_insert(0) += 1;
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (e, c) in b {
                *a.entry(e).or_insert(0) += c;
            }
            a
        });
    let mut out = MultiPoly::zero();
    for (e, c) in counts {
        out.add_term(e, c);
    }
    out
}

/// `F_0 ..= F_n` from `F_{m+1} = Σ_k B(m,k) p1^k p2^{m-k} F_k F_{m-k}`.
pub fn f_recursive_all(n: usize) -> Vec<MultiPoly> {
    let mut f = vec![MultiPoly::one()];
    for m in 0..n {
        let next = (0..=m)
            .map(|k| {
                let b = pq_binomial(m as u32, k as u32).expect("k ≤ m");
                let p = &MultiPoly::var_pow(Var::P1, k as u32) * &MultiPoly::var_pow(Var::P2, (m - k) as u32);
                &(&b * &p) * &(&f[k] * &f[m - k])
            })
            .sum();
        f.push(next);
    }
    f
}

pub fn f_recursive(n: usize) -> MultiPoly {
    f_recursive_all(n).pop().expect("F_0 exists")
}

/// `Σ_{t ∈ S_n} q^{stat(t)}`; negative values are rejected.
pub fn distribution<F>(stat: F, n: usize) -> Result<MultiPoly>
where
    F: Fn(&Permutation) -> i64 + Sync,
{
    let values: Vec<i64> = Permutation::all(n)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|t| stat(t))
        .collect();
    let mut coeffs: Vec<i64> = Vec::new();
    for v in values {
        let d = usize::try_from(v)
            .map_err(|_| Error::InvalidInput(format!("negative statistic value {v}")))?;
        if coeffs.len() <= d {
            coeffs.resize(d + 1, 0);
        }
        coeffs[d] += 1;
    }
    Ok(MultiPoly::from_univariate(Var::Q, &coeffs))
}

/// `Π_{i ≤ n} [i]_q` in the single variable `q`.
pub fn q_factorial(n: usize) -> MultiPoly {
    // [i] with q1 = 1 and q2 = q is 1 + q + ... + q^{i-1}.
    bracket_factorial(n as u32).specialize([None, None, None, Some(Var::Q), None])
}

/// Equidistributed with `inv` on every `S_n`, `n ≤ n_max`.
pub fn is_mahonian<F>(stat: F, n_max: usize) -> Result<bool>
where
    F: Fn(&Permutation) -> i64 + Sync,
{
    for n in 0..=n_max {
        if distribution(&stat, n)? != q_factorial(n) {
            return Ok(false);
        }
    }
    Ok(true)
}
