//! Expansions `stat = Σ λ(σ) σ` in the incidence algebra of classical
//! pattern containment, where `σ(τ)` is the number of occurrences of `σ`
//! in `τ`.
//!
//! Expansions are infinite in general, so every [`PatternExpansion`] carries
//! an explicit length bound and refuses to evaluate beyond it.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::MeshPattern;
use crate::perm::Permutation;
use crate::stats::{self, Statistic};

/// Classical occurrence counts of every pattern contained in a host.
#[derive(Debug, Clone)]
pub struct PatternProfile {
    len: usize,
    counts: HashMap<Permutation, u64>,
}

impl PatternProfile {
    /// Walks all `2^n` subsequences of `t`.
    pub fn new(t: &Permutation) -> Self {
        let w = t.as_slice();
        let n = w.len();
        assert!(n < 64, "profile of a permutation of length {n}");
        let mut counts: HashMap<Permutation, u64> = HashMap::new();
        let mut sub = Vec::with_capacity(n);
        for mask in 0u64..(1 << n) {
            sub.clear();
            sub.extend((0..n).filter(|i| mask >> i & 1 == 1).map(|i| w[i]));
            let key = Permutation::flatten(&sub).expect("distinct letters");
            *counts.entry(key).or_insert(0) += 1;
        }
        Self { len: n, counts }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `P(σ, t)`.
    pub fn get(&self, sigma: &Permutation) -> u64 {
        self.counts.get(sigma).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Permutation, u64)> {
        self.counts.iter().map(|(k, &v)| (k, v))
    }
}

/// `a ≤ b` in the containment order.
pub fn pattern_leq(a: &Permutation, b: &Permutation) -> bool {
    a.len() <= b.len() && !MeshPattern::classical(a.clone()).expect("empty region").avoided_by(b)
}

/// `P(a, b)`: classical occurrences of `a` in `b`.
pub fn incidence_p(a: &Permutation, b: &Permutation) -> u64 {
    if a.len() > b.len() {
        return 0;
    }
    MeshPattern::classical(a.clone()).expect("empty region").count(b)
}

/// Finitely many coefficients `λ(σ)`, `|σ| ≤ bound`, of a pattern expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternExpansion {
    bound: usize,
    coeffs: BTreeMap<Permutation, i64>,
}

impl PatternExpansion {
    pub fn new(bound: usize) -> Self {
        Self {
            bound,
            coeffs: BTreeMap::new(),
        }
    }

    /// Collects coefficients, dropping zeros; keys beyond `bound` are an error.
    pub fn from_coeffs<I>(bound: usize, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Permutation, i64)>,
    {
        let mut e = Self::new(bound);
        for (sigma, c) in coeffs {
            e.add(sigma, c)?;
        }
        Ok(e)
    }

    fn add(&mut self, sigma: Permutation, c: i64) -> Result<()> {
        if sigma.len() > self.bound {
            return Err(Error::Truncation {
                len: sigma.len(),
                bound: self.bound,
            });
        }
        let entry = self.coeffs.entry(sigma).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.coeffs.retain(|_, v| *v != 0);
        }
        Ok(())
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn coefficient(&self, sigma: &Permutation) -> i64 {
        self.coeffs.get(sigma).copied().unwrap_or(0)
    }

    /// Nonzero coefficients in length-then-lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&Permutation, i64)> {
        self.coeffs.iter().map(|(k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `Σ c_i e_i`; all parts must share a bound.
    pub fn linear_combination<'a, I>(bound: usize, parts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, &'a PatternExpansion)>,
    {
        let mut out = Self::new(bound);
        for (c, e) in parts {
            if e.bound != bound {
                return Err(Error::InvalidInput(format!(
                    "expansion bounds differ: {} vs {bound}",
                    e.bound
                )));
            }
            for (sigma, v) in e.iter() {
                out.add(sigma.clone(), c * v)?;
            }
        }
        Ok(out)
    }

    /// `Σ_σ λ(σ) P(σ, t)`.
    pub fn evaluate(&self, t: &Permutation) -> Result<i64> {
        self.check_bound(t)?;
        Ok(self.evaluate_profile(&PatternProfile::new(t)))
    }

    pub fn evaluate_with(&self, profile: &PatternProfile) -> Result<i64> {
        if profile.len() > self.bound {
            return Err(Error::Truncation {
                len: profile.len(),
                bound: self.bound,
            });
        }
        Ok(self.evaluate_profile(profile))
    }

    fn evaluate_profile(&self, profile: &PatternProfile) -> i64 {
        // Iterate the smaller side.
        if profile.counts.len() < self.coeffs.len() {
            profile
                .iter()
                .map(|(sigma, c)| self.coefficient(sigma) * c as i64)
                .sum()
        } else {
            self.iter().map(|(sigma, l)| l * profile.get(sigma) as i64).sum()
        }
    }

    fn check_bound(&self, t: &Permutation) -> Result<()> {
        if t.len() > self.bound {
            Err(Error::Truncation {
                len: t.len(),
                bound: self.bound,
            })
        } else {
            Ok(())
        }
    }
}

pub fn evaluate_expansion(e: &PatternExpansion, t: &Permutation) -> Result<i64> {
    e.evaluate(t)
}

/// Dump format: a `# bound N` header, then `<sign><perm> <|coefficient|>`
/// per nonzero coefficient in length-then-lexicographic order.
impl fmt::Display for PatternExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# bound {}", self.bound)?;
        for (sigma, c) in self.iter() {
            let sign = if c < 0 { '-' } else { '+' };
            writeln!(f, "{sign}{sigma} {}", c.unsigned_abs())?;
        }
        Ok(())
    }
}

impl FromStr for PatternExpansion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bound = None;
        let mut coeffs = Vec::new();
        for (lineno, line) in s.lines().enumerate() {
            let line = line.trim();
            let bad = |why: &str| Error::Parse(format!("line {}: {why}: `{line}`", lineno + 1));
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(n) = rest.trim().strip_prefix("bound") {
                    bound = Some(n.trim().parse::<usize>().map_err(|_| bad("bad bound"))?);
                }
                continue;
            }
            let (head, abs) = line.split_once(char::is_whitespace).ok_or_else(|| bad("expected `<sign><perm> <coefficient>`"))?;
            let sign = match head.chars().next() {
                Some('+') => 1,
                Some('-') => -1,
                _ => return Err(bad("missing sign")),
            };
            let sigma: Permutation = head[1..].parse()?;
            let abs: i64 = abs.trim().parse().map_err(|_| bad("bad coefficient"))?;
            coeffs.push((sigma, sign * abs));
        }
        let bound = match bound {
            Some(b) => b,
            None => coeffs.iter().map(|(s, _)| s.len()).max().unwrap_or(0),
        };
        Self::from_coeffs(bound, coeffs)
    }
}

/// `λ(σ) = (−1)^{|σ|−|π|} · (π, R^c)(σ)` for `|π| ≤ |σ| ≤ bound`.
pub fn reciprocity_expansion(p: &MeshPattern, bound: usize) -> PatternExpansion {
    let k = p.k();
    let dual = p.complement_region();
    let hosts: Vec<Permutation> = (k..=bound).flat_map(Permutation::all).collect();
    let coeffs: Vec<(Permutation, i64)> = hosts
        .into_par_iter()
        .filter_map(|sigma| {
            let c = dual.count(&sigma) as i64;
            let signed = if (sigma.len() - k) % 2 == 0 { c } else { -c };
            (signed != 0).then_some((sigma, signed))
        })
        .collect();
    PatternExpansion::from_coeffs(bound, coeffs).expect("keys within bound")
}

/// Solves `Σ_{σ≤τ} λ(σ) P(σ,τ) = stat(τ)` by forward substitution over
/// `τ` in length-then-lexicographic order. `P(τ,τ) = 1`, so no division.
pub fn invert_by_triangular_solve<F>(stat: F, bound: usize) -> PatternExpansion
where
    F: Fn(&Permutation) -> i64,
{
    let mut e = PatternExpansion::new(bound);
    for tau in Permutation::all_up_to(bound) {
        let profile = PatternProfile::new(&tau);
        assert_eq!(profile.get(&tau), 1, "unitriangularity at {tau}");
        let known: i64 = profile
            .iter()
            .filter(|(sigma, _)| **sigma != tau)
            .map(|(sigma, c)| e.coefficient(sigma) * c as i64)
            .sum();
        let lambda = stat(&tau) - known;
        e.add(tau, lambda).expect("within bound");
    }
    e
}

/// `Σ_{a≤σ≤b} (−1)^{|σ|−|a|} P(a,σ) P(σ,b) = δ(a,b)`.
pub fn inverse_theorem_check(a: &Permutation, b: &Permutation) -> bool {
    let profile = PatternProfile::new(b);
    let sum: i64 = profile
        .iter()
        .filter(|(sigma, _)| sigma.len() >= a.len())
        .map(|(sigma, p_sigma_b)| {
            let p_a_sigma = incidence_p(a, sigma) as i64;
            let sign = if (sigma.len() - a.len()) % 2 == 0 { 1 } else { -1 };
            sign * p_a_sigma * p_sigma_b as i64
        })
        .sum();
    sum == i64::from(a == b)
}

fn sign(exp: i64) -> i64 {
    if exp.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// `C(n, k)`, zero whenever `k < 0`, `n < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> i64 {
    if n < 0 || k < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1i64, |acc, i| acc * (n - i) / (i + 1))
}

pub fn maj_coefficient(s: &Permutation) -> i64 {
    let n = s.len();
    if s.as_slice() == [2, 1] {
        return 1;
    }
    if n < 3 {
        return 0;
    }
    let (first, second, last) = (s.at(1), s.at(2), s.at(n));
    if second < last && last < first {
        sign(n as i64)
    } else if first < last && last < second {
        sign(n as i64 + 1)
    } else {
        0
    }
}

pub fn des_coefficient(s: &Permutation) -> i64 {
    let n = s.len();
    if n >= 2 && s.at(1) > s.at(n) {
        sign(n as i64)
    } else {
        0
    }
}

pub fn lmax_coefficient(s: &Permutation) -> i64 {
    let n = s.len();
    if n >= 1 && s.at(n) == 1 {
        sign(n as i64 - 1)
    } else {
        0
    }
}

pub fn exc_k_coefficient(s: &Permutation, k: i64) -> i64 {
    let n = s.len() as i64;
    let sum: i64 = stats::ssf_set(s)
        .into_iter()
        .map(|x| binomial(n - 1, x as i64 - k - 1))
        .sum();
    sign(n - k - 1) * sum
}

pub fn fix_coefficient(s: &Permutation) -> i64 {
    exc_k_coefficient(s, 0)
}

pub fn exc_coefficient(s: &Permutation) -> i64 {
    let n = s.len() as i64;
    let sum: i64 = stats::ssf_set(s)
        .into_iter()
        .map(|x| binomial(n - 2, x as i64 - 2))
        .sum();
    sign(n - 2) * sum
}

pub fn sfix_coefficient(s: &Permutation) -> i64 {
    sign(s.len() as i64 - 1) * stats::ssfix(s) as i64
}

/// A statistic whose expansion coefficients have a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    Maj,
    Des,
    Lmax,
    Fix,
    Exc,
    ExcK(i64),
    Sfix,
}

impl ClosedForm {
    pub fn coefficient(self, s: &Permutation) -> i64 {
        match self {
            ClosedForm::Maj => maj_coefficient(s),
            ClosedForm::Des => des_coefficient(s),
            ClosedForm::Lmax => lmax_coefficient(s),
            ClosedForm::Fix => fix_coefficient(s),
            ClosedForm::Exc => exc_coefficient(s),
            ClosedForm::ExcK(k) => exc_k_coefficient(s, k),
            ClosedForm::Sfix => sfix_coefficient(s),
        }
    }

    pub fn statistic(self) -> stats::DirectStat {
        use stats::DirectStat as D;
        match self {
            ClosedForm::Maj => D::Maj,
            ClosedForm::Des => D::Des,
            ClosedForm::Lmax => D::Lmax,
            ClosedForm::Fix => D::Fix,
            ClosedForm::Exc => D::Exc,
            ClosedForm::ExcK(k) => D::ExcK(k),
            ClosedForm::Sfix => D::Sfix,
        }
    }

    pub fn expansion(self, bound: usize) -> PatternExpansion {
        let coeffs = Permutation::all_up_to(bound)
            .filter(|s| !s.is_empty())
            .map(|s| {
                let c = self.coefficient(&s);
                (s, c)
            });
        PatternExpansion::from_coeffs(bound, coeffs).expect("within bound")
    }
}

/// Expansion of a named statistic: by reciprocity term by term for mesh
/// descriptors, by triangular solve for the directly computed ones.
pub fn expand_statistic(stat: &Statistic, bound: usize) -> PatternExpansion {
    match stat {
        Statistic::Mesh { descriptor, .. } => {
            let parts: Vec<(i64, PatternExpansion)> = descriptor
                .terms()
                .iter()
                .map(|(c, p)| (*c, reciprocity_expansion(p, bound)))
                .collect();
            PatternExpansion::linear_combination(bound, parts.iter().map(|(c, e)| (*c, e)))
                .expect("shared bound")
        }
        Statistic::Direct(d) => invert_by_triangular_solve(|t| d.eval(t), bound),
    }
}
