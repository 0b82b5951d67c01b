//! Permutation statistics, computed two ways: straight from their definitions,
//! and as integer combinations of mesh patterns ([`StatisticDescriptor`]).

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::mesh::{Host, MeshPattern};
use crate::perm::Permutation;

pub fn lmax(t: &Permutation) -> usize {
    let mut max = 0;
    t.as_slice()
        .iter()
        .filter(|&&v| {
            let top = v > max;
            max = max.max(v);
            top
        })
        .count()
}

pub fn des(t: &Permutation) -> usize {
    t.as_slice().windows(2).filter(|w| w[0] > w[1]).count()
}

/// Sum of descent positions.
pub fn maj(t: &Permutation) -> usize {
    t.as_slice()
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] > w[1])
        .map(|(i, _)| i + 1)
        .sum()
}

pub fn inv(t: &Permutation) -> usize {
    pairs(t).filter(|(a, b)| a > b).count()
}

/// Number of non-inversions, i.e. occurrences of `12`.
pub fn noninv(t: &Permutation) -> usize {
    pairs(t).filter(|(a, b)| a < b).count()
}

fn pairs(t: &Permutation) -> impl Iterator<Item = (usize, usize)> + '_ {
    let w = t.as_slice();
    (0..w.len()).flat_map(move |i| (i + 1..w.len()).map(move |j| (w[i], w[j])))
}

pub fn comp(t: &Permutation) -> usize {
    t.components()
}

/// Points whose excess `|Q4| - |Q2|` equals `k`.
pub fn exc_k(t: &Permutation, k: i64) -> usize {
    t.quadrant_sizes()
        .iter()
        .filter(|s| s[3] as i64 - s[1] as i64 == k)
        .count()
}

pub fn fix(t: &Permutation) -> usize {
    exc_k(t, 0)
}

/// Excedance tops: points with `|Q4| > |Q2|`.
pub fn exc(t: &Permutation) -> usize {
    t.quadrant_sizes().iter().filter(|s| s[3] > s[1]).count()
}

/// Strong fixed points: `Q2 = Q4 = ∅`.
pub fn sfix(t: &Permutation) -> usize {
    t.quadrant_sizes()
        .iter()
        .filter(|s| s[1] == 0 && s[3] == 0)
        .count()
}

pub fn ssfix(t: &Permutation) -> usize {
    ssf_set(t).len()
}

/// Values of the skew strong fixed points (`Q1 = Q3 = ∅`), ascending.
pub fn ssf_set(t: &Permutation) -> Vec<usize> {
    let mut out: Vec<usize> = t
        .quadrant_sizes()
        .iter()
        .zip(t.as_slice())
        .filter(|(s, _)| s[0] == 0 && s[2] == 0)
        .map(|(_, &v)| v)
        .collect();
    out.sort_unstable();
    out
}

/// `π(1) > π(2) < π(3) > ...`; words of length at most one qualify.
pub fn is_alternating(t: &Permutation) -> bool {
    t.as_slice()
        .windows(2)
        .enumerate()
        .all(|(i, w)| (w[0] > w[1]) == (i % 2 == 0))
}

fn has_double_descent(w: &[usize]) -> bool {
    w.windows(3).any(|x| x[0] > x[1] && x[1] > x[2])
}

/// No double descent remains after deleting the `i` largest letters, for every `0 ≤ i ≤ n`.
pub fn is_simsun(t: &Permutation) -> bool {
    let n = t.len();
    (0..=n).all(|i| {
        let kept: Vec<usize> = t.as_slice().iter().copied().filter(|&v| v <= n - i).collect();
        !has_double_descent(&kept)
    })
}

/// André permutation of the first kind: for every letter, the maximum of
/// its left window never exceeds the maximum of its right window. Windows
/// stop at the nearest smaller letter on each side, with `−∞` sentinels at
/// both ends.
pub fn is_andre_first_kind(t: &Permutation) -> bool {
    let w = t.as_slice();
    let n = w.len();
    (0..n).all(|i| {
        let x = w[i];
        let lo = w[..i].iter().rposition(|&v| v < x).map_or(0, |j| j + 1);
        let hi = w[i + 1..].iter().position(|&v| v < x).map_or(n, |j| i + 1 + j);
        // Option orders None below Some, matching max ∅ = −∞.
        w[lo..i].iter().max() <= w[i + 1..hi].iter().max()
    })
}

/// A finite integer combination of mesh patterns, evaluated by counting.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct StatisticDescriptor {
    terms: Vec<(i64, MeshPattern)>,
}

impl StatisticDescriptor {
    /// Merges repeated patterns and drops zero coefficients.
    pub fn new<I: IntoIterator<Item = (i64, MeshPattern)>>(terms: I) -> Self {
        let mut merged: Vec<(i64, MeshPattern)> = Vec::new();
        for (c, p) in terms {
            match merged.iter_mut().find(|(_, q)| *q == p) {
                Some(slot) => slot.0 += c,
                None => merged.push((c, p)),
            }
        }
        merged.retain(|(c, _)| *c != 0);
        Self { terms: merged }
    }

    pub fn single(p: MeshPattern) -> Self {
        Self::new([(1, p)])
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a StatisticDescriptor>>(parts: I) -> Self {
        Self::new(parts.into_iter().flat_map(|d| d.terms.iter().cloned()))
    }

    pub fn terms(&self) -> &[(i64, MeshPattern)] {
        &self.terms
    }

    pub fn evaluate(&self, t: &Permutation) -> i64 {
        self.evaluate_on(&Host::new(t))
    }

    pub fn evaluate_on(&self, host: &Host) -> i64 {
        self.terms
            .iter()
            .map(|(c, p)| c * host.count(p) as i64)
            .sum()
    }
}

impl fmt::Display for StatisticDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, (c, p)) in self.terms.iter().enumerate() {
            let sign = if *c < 0 { "-" } else { "+" };
            if idx > 0 {
                write!(f, " {sign} ")?;
            } else if *c < 0 {
                f.write_str("-")?;
            }
            if c.abs() != 1 {
                write!(f, "{}*", c.abs())?;
            }
            write!(f, "[{p}]")?;
        }
        Ok(())
    }
}

fn pat(s: &str) -> MeshPattern {
    s.parse().expect("built-in pattern literal")
}

fn one(s: &str) -> StatisticDescriptor {
    StatisticDescriptor::single(pat(s))
}

fn plus(parts: &[&str]) -> StatisticDescriptor {
    StatisticDescriptor::new(parts.iter().map(|s| (1, pat(s))))
}

/// Shading sets recovered by exhaustive search and frozen in the data file.
pub struct DerivedConstants {
    pub simsun: MeshPattern,
    pub andre: MeshPattern,
    pub header: Vec<String>,
}

pub const DERIVED_CONSTANTS_TEXT: &str = include_str!("../data/derived_constants.tsv");

impl DerivedConstants {
    pub fn parse(text: &str) -> Result<Self> {
        let mut simsun = None;
        let mut andre = None;
        let mut header = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(comment) = line.strip_prefix('#') {
                header.push(comment.trim().to_string());
                continue;
            }
            let (name, p) = line
                .split_once('\t')
                .ok_or_else(|| Error::Parse(format!("constants line without tab: `{line}`")))?;
            let p: MeshPattern = p.parse()?;
            match name.trim() {
                "simsun" => simsun = Some(p),
                "andre" => andre = Some(p),
                other => return Err(Error::Parse(format!("unknown constant `{other}`"))),
            }
        }
        Ok(Self {
            simsun: simsun.ok_or_else(|| Error::Parse("missing simsun constant".into()))?,
            andre: andre.ok_or_else(|| Error::Parse("missing andre constant".into()))?,
            header,
        })
    }

    /// The checked-in constants.
    pub fn builtin() -> &'static DerivedConstants {
        static CONSTANTS: OnceLock<DerivedConstants> = OnceLock::new();
        CONSTANTS.get_or_init(|| {
            DerivedConstants::parse(DERIVED_CONSTANTS_TEXT).expect("checked-in constants parse")
        })
    }
}

pub fn simsun_pattern() -> MeshPattern {
    DerivedConstants::builtin().simsun.clone()
}

pub fn andre_pattern() -> MeshPattern {
    DerivedConstants::builtin().andre.clone()
}

/// `(21, {2}×[0,2])`: avoided exactly by permutations ending in their maximum.
pub fn end_with_max_pattern() -> MeshPattern {
    pat("21 | (2,0)(2,1)(2,2)")
}

/// The three vincular patterns avoided exactly by alternating permutations.
pub fn alternating_patterns() -> [MeshPattern; 3] {
    [
        MeshPattern::vincular("12".parse().unwrap(), &[0, 1]).unwrap(),
        MeshPattern::vincular("123".parse().unwrap(), &[1, 2]).unwrap(),
        MeshPattern::vincular("321".parse().unwrap(), &[1, 2]).unwrap(),
    ]
}

/// `(1423, [1,3]×[0,3])`, avoided exactly by the saturated-chain encodings.
pub fn bbd_pattern() -> MeshPattern {
    MeshPattern::with_cells(
        "1423".parse().unwrap(),
        (1..=3).flat_map(|i| (0..=3).map(move |j| (i, j))),
    )
    .unwrap()
}

/// West's obstructions to two-stack sortability: `2341` and barred `3 5̄ 2 4 1`.
pub fn two_stack_patterns() -> [MeshPattern; 2] {
    [
        pat("2341"),
        MeshPattern::barred(&[3, 5, 2, 4, 1], 2).unwrap(),
    ]
}

/// Every named mesh-pattern combination, in a fixed order.
pub fn builtin_descriptors() -> Vec<(&'static str, StatisticDescriptor)> {
    let [alt12, alt123, alt321] = alternating_patterns();
    vec![
        ("lmax", one("1 | (0,1)")),
        ("inv", one("21")),
        ("ninv", one("12")),
        ("des", one("21 | (1,0)(1,1)(1,2)")),
        ("comp", plus(&["1 | (0,1)(1,1)", "12 | (0,1)(0,2)(1,1)(1,2)(2,0)"])),
        (
            "maj",
            plus(&[
                "21 | (1,0)(1,1)(1,2)",
                "132 | (2,0)(2,1)(2,2)(2,3)",
                "231 | (2,0)(2,1)(2,2)(2,3)",
                "321 | (2,0)(2,1)(2,2)(2,3)",
            ]),
        ),
        ("sfix", one("1 | (0,1)(1,0)")),
        ("ssfix", one("1 | (0,0)(1,1)")),
        ("S1", one("12 | (1,2)")),
        ("S2", one("21 | (1,2)")),
        ("T1", one("132 | (1,3)(2,3)")),
        ("T2", one("231 | (1,3)(2,3)")),
        ("mix", plus(&["12 | (2,2)", "213 | (3,2)(3,3)"])),
        ("mixp", plus(&["12 | (1,2)", "231 | (1,3)(2,3)"])),
        ("inv_minus", one("21 | (2,2)")),
        ("inv_plus", one("213 | (3,2)(3,3)")),
        ("inv_split", plus(&["21 | (2,2)", "213 | (3,2)(3,3)"])),
        ("ninv_minus", one("12 | (2,2)")),
        ("ninv_plus", one("123 | (3,2)(3,3)")),
        ("ninv_split", plus(&["12 | (2,2)", "123 | (3,2)(3,3)"])),
        ("alt12", StatisticDescriptor::single(alt12)),
        ("alt123", StatisticDescriptor::single(alt123)),
        ("alt321", StatisticDescriptor::single(alt321)),
        ("endmax", StatisticDescriptor::single(end_with_max_pattern())),
        ("bbd", StatisticDescriptor::single(bbd_pattern())),
        ("simsun", StatisticDescriptor::single(simsun_pattern())),
        ("andre", StatisticDescriptor::single(andre_pattern())),
    ]
}

pub fn descriptor(name: &str) -> Option<StatisticDescriptor> {
    builtin_descriptors()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, d)| d)
}

/// The literal four-cell reading of the first `comp` term, `(1, [0,1]²)`.
/// It only occurs in `1`, so with it the sum undercounts every longer
/// permutation by one; kept for the regression test that documents this.
pub fn comp_literal_first_term() -> MeshPattern {
    pat("1 | (0,0)(0,1)(1,0)(1,1)")
}

/// Statistics computed from their definitions rather than from patterns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirectStat {
    Lmax,
    Des,
    Inv,
    Noninv,
    Comp,
    Maj,
    Fix,
    Exc,
    ExcK(i64),
    Sfix,
    Ssfix,
}

impl DirectStat {
    pub fn eval(self, t: &Permutation) -> i64 {
        let v = match self {
            DirectStat::Lmax => lmax(t),
            DirectStat::Des => des(t),
            DirectStat::Inv => inv(t),
            DirectStat::Noninv => noninv(t),
            DirectStat::Comp => comp(t),
            DirectStat::Maj => maj(t),
            DirectStat::Fix => fix(t),
            DirectStat::Exc => exc(t),
            DirectStat::ExcK(k) => exc_k(t, k),
            DirectStat::Sfix => sfix(t),
            DirectStat::Ssfix => ssfix(t),
        };
        v as i64
    }
}

/// A statistic addressable by its command-line name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Statistic {
    Mesh {
        name: String,
        descriptor: StatisticDescriptor,
    },
    Direct(DirectStat),
}

/// Names accepted by [`Statistic::from_name`]; `exc_k:<k>` takes any integer.
pub const STATISTIC_NAMES: [&str; 18] = [
    "lmax", "des", "inv", "maj", "comp", "fix", "exc", "exc_k:<k>", "sfix", "ssfix", "mix",
    "mixp", "S1", "S2", "T1", "T2", "simsun", "andre",
];

impl Statistic {
    pub fn from_name(name: &str) -> Result<Self> {
        let unknown = || Error::UnknownStatistic {
            name: name.to_string(),
            known: STATISTIC_NAMES.join(", "),
        };
        let direct = match name {
            "fix" => Some(DirectStat::Fix),
            "exc" => Some(DirectStat::Exc),
            _ => match name.strip_prefix("exc_k:") {
                Some(k) => Some(DirectStat::ExcK(k.trim().parse().map_err(|_| unknown())?)),
                None => None,
            },
        };
        if let Some(d) = direct {
            return Ok(Statistic::Direct(d));
        }
        if !STATISTIC_NAMES.contains(&name) {
            return Err(unknown());
        }
        let descriptor = descriptor(name).ok_or_else(unknown)?;
        Ok(Statistic::Mesh {
            name: name.to_string(),
            descriptor,
        })
    }

    pub fn eval(&self, t: &Permutation) -> i64 {
        match self {
            Statistic::Mesh { descriptor, .. } => descriptor.evaluate(t),
            Statistic::Direct(d) => d.eval(t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn d(name: &str) -> StatisticDescriptor {
        descriptor(name).unwrap()
    }

    #[test]
    fn direct_examples() {
        assert_eq!(maj(&p("31524")), 4);
        for n in 0..6 {
            assert_eq!(fix(&Permutation::identity(n)), n);
            assert_eq!(exc(&Permutation::identity(n)), 0);
        }
        assert_eq!(exc_k(&p("231"), 1), 2);
        assert_eq!(sfix(&p("125634")), 2);
        assert_eq!(ssfix(&p("321")), 3);
        assert_eq!(lmax(&p("2413")), 2);
        assert_eq!(des(&p("3142")), 2);
        assert_eq!(inv(&p("321")), 3);
        assert_eq!(noninv(&p("132")), 2);
    }

    #[test]
    fn ssf_examples() {
        assert_eq!(ssf_set(&p("321")), vec![1, 2, 3]);
        assert!(ssf_set(&p("12")).is_empty());
        assert_eq!(ssf_set(&p("1")), vec![1]);
    }

    #[test]
    fn alternating_examples() {
        assert!(is_alternating(&p("213")));
        assert!(!is_alternating(&p("123")));
        assert!(is_alternating(&Permutation::empty()));
        assert!(is_alternating(&p("1")));
        assert!(!is_alternating(&p("12")));
    }

    #[test]
    fn simsun_examples() {
        assert!(!is_simsun(&p("321")));
        let simsun3: Vec<Permutation> = Permutation::all(3).filter(is_simsun).collect();
        assert_eq!(simsun3.len(), 5);
        assert!(!simsun3.contains(&p("321")));
        for s in ["e", "1", "12", "21"] {
            assert!(is_simsun(&p(s)));
        }
    }

    #[test]
    fn simsun_removal_must_start_at_zero() {
        // Starting the removal loop at one largest letter never inspects the
        // full word, so 321 slips through and the counts leave the Euler numbers.
        let from_one = |t: &Permutation| {
            let n = t.len();
            (1..=n).all(|i| {
                let kept: Vec<usize> = t.as_slice().iter().copied().filter(|&v| v <= n - i).collect();
                !has_double_descent(&kept)
            })
        };
        assert!(from_one(&p("321")));
        assert!(!is_simsun(&p("321")));
        assert_eq!(Permutation::all(3).filter(|t| from_one(t)).count(), 6);
        // Removing from one agrees with removing from zero on the words
        // that have no double descent themselves.
        for t in Permutation::all_up_to(7) {
            if !has_double_descent(t.as_slice()) {
                assert_eq!(is_simsun(&t), from_one(&t), "{t}");
            }
        }
    }

    #[test]
    fn andre_examples() {
        assert!(!is_andre_first_kind(&p("21")));
        assert!(is_andre_first_kind(&p("1")));
        assert!(is_andre_first_kind(&Permutation::empty()));
        let euler = [1usize, 1, 1, 2, 5, 16, 61, 272, 1385];
        for (n, &e) in euler.iter().enumerate() {
            assert_eq!(Permutation::all(n).filter(is_andre_first_kind).count(), e, "n = {n}");
        }
    }

    #[test]
    fn andre_permutations_end_in_max_without_double_descents() {
        for t in Permutation::all_up_to(7).filter(is_andre_first_kind) {
            let n = t.len();
            if n >= 1 {
                assert_eq!(t.at(n), n);
            }
            if n >= 2 {
                assert!(t.at(n - 1) < t.at(n));
            }
            assert!(!has_double_descent(t.as_slice()));
        }
    }

    #[test]
    fn descriptor_examples() {
        assert_eq!(d("maj").evaluate(&p("31524")), 4);
        assert_eq!(d("des").evaluate(&p("3142")), 2);
        assert_eq!(d("lmax").evaluate(&p("2413")), 2);
    }

    #[test]
    fn descriptors_agree_with_definitions() {
        let pairs: [(&str, fn(&Permutation) -> usize); 9] = [
            ("lmax", lmax),
            ("inv", inv),
            ("ninv", noninv),
            ("des", des),
            ("comp", comp),
            ("maj", maj),
            ("sfix", sfix),
            ("ssfix", ssfix),
            ("inv_split", inv),
        ];
        let ninv_split = d("ninv_split");
        for t in Permutation::all_up_to(7) {
            let host = Host::new(&t);
            for (name, f) in &pairs {
                assert_eq!(d(name).evaluate_on(&host), f(&t) as i64, "{name} on {t}");
            }
            assert_eq!(ninv_split.evaluate_on(&host), noninv(&t) as i64, "12 split on {t}");
        }
    }

    #[test]
    fn literal_comp_first_term_undercounts() {
        let literal = StatisticDescriptor::new([
            (1, comp_literal_first_term()),
            (1, pat("12 | (0,1)(0,2)(1,1)(1,2)(2,0)")),
        ]);
        assert_eq!(literal.evaluate(&p("1")), 1);
        assert_eq!(literal.evaluate(&p("12")), 1);
        assert_eq!(comp(&p("12")), 2);
        for t in Permutation::all_up_to(6).filter(|t| t.len() >= 2) {
            assert_eq!(literal.evaluate(&t), comp(&t) as i64 - 1);
        }
    }

    #[test]
    fn quadrant_identities() {
        for t in Permutation::all_up_to(7) {
            let n = t.len() as i64;
            assert_eq!(fix(&t), exc_k(&t, 0));
            assert_eq!(exc(&t), (1..n.max(1)).map(|k| exc_k(&t, k)).sum::<usize>());
            assert_eq!((-n..=n).map(|k| exc_k(&t, k)).sum::<usize>(), t.len());
        }
    }

    #[test]
    fn alternating_iff_avoids_triple() {
        let triple = alternating_patterns();
        for t in Permutation::all_up_to(8) {
            let host = Host::new(&t);
            assert_eq!(is_alternating(&t), triple.iter().all(|q| host.avoids(q)), "{t}");
        }
    }

    #[test]
    fn end_with_max_characterization() {
        let q = end_with_max_pattern();
        for t in Permutation::all_up_to(8).filter(|t| !t.is_empty()) {
            assert_eq!(q.avoided_by(&t), t.at(t.len()) == t.len(), "{t}");
        }
    }

    #[test]
    fn simsun_constant_characterizes_simsun() {
        let q = simsun_pattern();
        for t in Permutation::all_up_to(8) {
            assert_eq!(q.avoided_by(&t), is_simsun(&t), "{t}");
        }
    }

    #[test]
    fn andre_constant_characterizes_andre() {
        let a = andre_pattern();
        let e = end_with_max_pattern();
        for t in Permutation::all_up_to(8) {
            let host = Host::new(&t);
            assert_eq!(host.avoids(&a) && host.avoids(&e), is_andre_first_kind(&t), "{t}");
        }
    }

    #[test]
    fn statistic_names() {
        for name in STATISTIC_NAMES {
            let name = name.replace("<k>", "2");
            assert!(Statistic::from_name(&name).is_ok(), "{name}");
        }
        assert!(matches!(Statistic::from_name("bogus"), Err(Error::UnknownStatistic { .. })));
        assert!(Statistic::from_name("exc_k:x").is_err());
        assert_eq!(Statistic::from_name("exc_k:-1").unwrap(), Statistic::Direct(DirectStat::ExcK(-1)));
        let mixp = Statistic::from_name("mixp").unwrap();
        assert_eq!(mixp.eval(&p("231")), 2);
    }

    #[test]
    fn descriptor_merging_and_display() {
        let dd = StatisticDescriptor::new([(1, pat("21")), (2, pat("21")), (-1, pat("12")), (1, pat("12"))]);
        assert_eq!(dd.terms().len(), 1);
        assert_eq!(dd.to_string(), "3*[21]");
        assert_eq!(d("mix").to_string(), "[12 | (2,2)] + [213 | (3,2)(3,3)]");
        assert_eq!(StatisticDescriptor::default().to_string(), "0");
    }
}
