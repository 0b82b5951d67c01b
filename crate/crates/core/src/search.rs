//! Exhaustive searches over shading sets.
//!
//! Most of the work here reduces to one primitive: for a base permutation
//! `π` and a host `τ`, list the *empty-cell masks* `E(ω)` of the classical
//! occurrences `ω` of `π` in `τ`. Then `(π, R)` occurs at `ω` iff `R ⊆ E(ω)`,
//! so a whole family of shadings can be tested against one host at once.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mesh::{full_bits, GroupElement, Host, MeshPattern, RegionMask};
use crate::perm::Permutation;
use crate::stats::{self, end_with_max_pattern, is_andre_first_kind, is_simsun};

/// `E_0 ..= E_max` by the boustrophedon (Seidel–Entringer) triangle.
pub fn euler_numbers(max: usize) -> Vec<BigUint> {
    let mut out = vec![BigUint::from(1u32)];
    let mut row = vec![BigUint::from(1u32)];
    for n in 1..=max {
        let mut next = Vec::with_capacity(n + 1);
        next.push(BigUint::from(0u32));
        for k in 1..=n {
            let v = &next[k - 1] + &row[n - k];
            next.push(v);
        }
        out.push(next[n].clone());
        row = next;
    }
    out
}

/// `E_0 ..= E_max` from `E_{n+1} = Σ_{k=0}^{n-1} C(n-1,k) E_{k+1} E_{n-k-1}`,
/// seeded with `E_0 = E_1 = 1`.
pub fn euler_numbers_by_recursion(max: usize) -> Vec<BigUint> {
    let mut e = vec![BigUint::from(1u32), BigUint::from(1u32)];
    let mut binom_row = vec![BigUint::from(1u32)]; // row n-1 of Pascal's triangle
    for n in 1..max {
        let next = (0..n)
            .map(|k| &binom_row[k] * &e[k + 1] * &e[n - k - 1])
            .sum::<BigUint>();
        e.push(next);
        let mut row = vec![BigUint::from(1u32); n + 1];
        for k in 1..n {
            row[k] = &binom_row[k - 1] + &binom_row[k];
        }
        binom_row = row;
    }
    e.truncate(max + 1);
    e
}

/// Members of `S_n` avoiding every pattern in `patterns`.
pub fn enumerate_avoiders(patterns: &[MeshPattern], n: usize) -> Vec<Permutation> {
    let all: Vec<Permutation> = Permutation::all(n).collect();
    all.into_par_iter()
        .filter(|t| {
            let host = Host::new(t);
            patterns.iter().all(|p| host.avoids(p))
        })
        .collect()
}

pub fn count_avoiders(patterns: &[MeshPattern], n: usize) -> u64 {
    let all: Vec<Permutation> = Permutation::all(n).collect();
    all.par_iter()
        .filter(|t| {
            let host = Host::new(t);
            patterns.iter().all(|p| host.avoids(p))
        })
        .count() as u64
}

/// Distinct empty-cell masks of the classical occurrences of `base` in `t`.
pub fn occurrence_masks(base: &Permutation, t: &Permutation) -> Vec<u64> {
    let mut masks = Host::new(t).empty_cell_masks(base);
    masks.sort_unstable();
    masks.dedup();
    masks
}

fn contains_shading(masks: &[u64], region: u64) -> bool {
    masks.iter().any(|&e| region & !e == 0)
}

/// Largest base length accepted by [`census_by_region`]: `2^16` regions.
pub const MAX_CENSUS_LEN: usize = 3;

/// Occurrence counts of `(base, S)` in `t` for every region `S` at once,
/// indexed by region bits. Built by a superset-sum transform over the
/// `(k+1)²`-cell lattice of the occurrence masks.
pub fn census_by_region(base: &Permutation, t: &Permutation) -> Result<Vec<u32>> {
    let k = base.len();
    if k > MAX_CENSUS_LEN {
        return Err(Error::PatternTooLong {
            len: k,
            max: MAX_CENSUS_LEN,
        });
    }
    let mut table = vec![0u32; 1 << ((k + 1) * (k + 1))];
    for e in Host::new(t).empty_cell_masks(base) {
        table[e as usize] += 1;
    }
    superset_sums(&mut table);
    Ok(table)
}

/// In place: `table[S] <- Σ_{T ⊇ S} table[T]`.
fn superset_sums(table: &mut [u32]) {
    let len = table.len();
    debug_assert!(len.is_power_of_two());
    let mut bit = 1;
    while bit < len {
        for mask in 0..len {
            if mask & bit == 0 {
                table[mask] += table[mask | bit];
            }
        }
        bit <<= 1;
    }
}

/// SHA-256 hex digest over the given lines, each terminated by `\n`.
pub fn content_hash<I, S>(lines: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut h = Sha256::new();
    for line in lines {
        h.update(line.as_ref().as_bytes());
        h.update(b"\n");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn all_regions(k: usize) -> Vec<u64> {
    (0..=full_bits(k)).collect()
}

fn three_two_one() -> Permutation {
    Permutation::decreasing(3)
}

/// Keeps the regions `R` for which `keep(t, avoids (321, R))` holds on every
/// `t ∈ S_n`, for `n = 1..=n_max` in turn.
fn filter_321_pointwise<F>(n_max: usize, mut candidates: Vec<u64>, keep: F) -> Vec<u64>
where
    F: Fn(&Permutation, bool) -> bool + Sync,
{
    let base = three_two_one();
    for n in 1..=n_max {
        let hosts: Vec<(Permutation, Vec<u64>)> = Permutation::all(n)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|t| {
                let masks = occurrence_masks(&base, &t);
                (t, masks)
            })
            .collect();
        candidates = candidates
            .into_par_iter()
            .filter(|&r| hosts.iter().all(|(t, m)| keep(t, !contains_shading(m, r))))
            .collect();
    }
    candidates
}

/// Regions matching `count(n) = |S_n((321, R))|` for `n = 1..=n_max`.
fn filter_321_by_count<F>(n_max: usize, mut candidates: Vec<u64>, count: F) -> Vec<u64>
where
    F: Fn(usize) -> u64,
{
    let base = three_two_one();
    for n in 1..=n_max {
        let target = count(n);
        let hosts: Vec<Vec<u64>> = Permutation::all(n)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|t| occurrence_masks(&base, &t))
            .collect();
        candidates = candidates
            .into_par_iter()
            .filter(|&r| hosts.iter().filter(|m| !contains_shading(m, r)).count() as u64 == target)
            .collect();
    }
    candidates
}

fn euler_u64(max: usize) -> Vec<u64> {
    euler_numbers(max)
        .iter()
        .map(|e| u64::try_from(e).expect("Euler number fits in u64"))
        .collect()
}

/// Outcome of recovering the SimSun and André shadings of `321`.
#[derive(Debug, Clone)]
pub struct DerivedShadings {
    pub n_max: usize,
    /// Every region whose avoidance class equals the simsun permutations up to `n_max`.
    pub simsun_matches: Vec<RegionMask>,
    /// Every region that, together with the end-with-maximum pattern,
    /// characterizes André permutations of the first kind up to `n_max`
    /// and on its own is counted by `E_{n+1}`.
    pub andre_matches: Vec<RegionMask>,
}

impl DerivedShadings {
    /// Fewest shaded cells, ties to the smallest mask.
    fn pick(matches: &[RegionMask]) -> Option<MeshPattern> {
        matches
            .iter()
            .min_by_key(|r| (r.len(), r.bits()))
            .map(|r| MeshPattern::new(three_two_one(), *r).expect("k = 3 region"))
    }

    pub fn simsun(&self) -> Option<MeshPattern> {
        Self::pick(&self.simsun_matches)
    }

    pub fn andre(&self) -> Option<MeshPattern> {
        Self::pick(&self.andre_matches)
    }

    /// The constants file consumed by [`stats::DerivedConstants`].
    pub fn constants_file(&self) -> Result<String> {
        let simsun = self
            .simsun()
            .ok_or_else(|| Error::InvalidInput("no region characterizes simsun".into()))?;
        let andre = self
            .andre()
            .ok_or_else(|| Error::InvalidInput("no region characterizes Andre".into()))?;
        let body = [format!("simsun\t{simsun}"), format!("andre\t{andre}")];
        let mut out = String::new();
        out.push_str("# Shadings of 321 recovered by exhaustive search over all 2^16 regions.\n");
        out.push_str("# Regenerate with scripts/derive-constants.sh (meshpat search-euler --emit-constants).\n");
        out.push_str(&format!(
            "# params: nmax={} simsun_matches={} andre_matches={} choice=fewest-cells-then-smallest-mask\n",
            self.n_max,
            self.simsun_matches.len(),
            self.andre_matches.len()
        ));
        out.push_str(&format!("# sha256: {}\n", content_hash(&body)));
        for line in body {
            out.push_str(&line);
            out.push('\n');
        }
        Ok(out)
    }
}

/// Searches every `R ⊆ [0,3]²` for the SimSun and André shadings of `321`.
pub fn derive_shadings(n_max: usize) -> DerivedShadings {
    let to_regions = |v: Vec<u64>| -> Vec<RegionMask> {
        v.into_iter()
            .map(|b| RegionMask::from_bits(3, b).expect("k = 3 mask"))
            .collect()
    };
    let simsun = filter_321_pointwise(n_max, all_regions(3), |t, avoids| avoids == is_simsun(t));
    let end_max = end_with_max_pattern();
    let andre = filter_321_pointwise(n_max, all_regions(3), |t, avoids| {
        (avoids && end_max.avoided_by(t)) == is_andre_first_kind(t)
    });
    let euler = euler_u64(n_max + 1);
    let andre = filter_321_by_count(n_max, andre, |n| euler[n + 1]);
    DerivedShadings {
        n_max,
        simsun_matches: to_regions(simsun),
        andre_matches: to_regions(andre),
    }
}

/// One essentially different `(321, R)`: regions related by a symmetry
/// fixing `321` or by having the same avoiders are merged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShadingClass {
    /// Fewest shaded cells, ties to the smallest mask.
    pub representative: MeshPattern,
    pub members: Vec<RegionMask>,
}

impl ShadingClass {
    pub fn contains(&self, p: &MeshPattern) -> bool {
        p.pattern() == self.representative.pattern() && self.members.contains(&p.region())
    }
}

/// Regions `R` with `|S_n((321, R))| = E_{n+1}` for all `1 ≤ n ≤ n_max`,
/// merged into essentially different classes.
pub fn search_321_regions(n_max: usize) -> Vec<ShadingClass> {
    let euler = euler_u64(n_max + 1);
    let survivors = filter_321_by_count(n_max, all_regions(3), |n| euler[n + 1]);
    merge_classes(&three_two_one(), &survivors, n_max.max(COINCIDENCE_HORIZON))
}

/// Smallest host size used to decide that two shadings coincide.
pub const COINCIDENCE_HORIZON: usize = 6;

/// Regions with the same avoiders in every `S_n`, `n ≤ horizon`, are treated
/// as coincident; classes are the connected components of coincidence and
/// the stabilizer action.
fn merge_classes(base: &Permutation, regions: &[u64], horizon: usize) -> Vec<ShadingClass> {
    let k = base.len();
    let hosts: Vec<Vec<u64>> = (0..=horizon)
        .flat_map(Permutation::all)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|t| occurrence_masks(base, t))
        .collect();
    let fingerprints: Vec<Vec<u64>> = regions
        .par_iter()
        .map(|&r| {
            let mut bits = vec![0u64; hosts.len().div_ceil(64)];
            for (i, m) in hosts.iter().enumerate() {
                if !contains_shading(m, r) {
                    bits[i / 64] |= 1 << (i % 64);
                }
            }
            bits
        })
        .collect();

    let index: HashMap<u64, usize> = regions.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let mut parent: Vec<usize> = (0..regions.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let union = |parent: &mut Vec<usize>, a: usize, b: usize| {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    };

    let mut by_fingerprint: HashMap<&[u64], usize> = HashMap::new();
    for (i, f) in fingerprints.iter().enumerate() {
        match by_fingerprint.get(f.as_slice()) {
            Some(&j) => union(&mut parent, i, j),
            None => {
                by_fingerprint.insert(f, i);
            }
        }
    }
    for (i, &r) in regions.iter().enumerate() {
        let p = MeshPattern::new(base.clone(), RegionMask::from_bits(k, r).expect("valid mask"))
            .expect("matching length");
        for g in GroupElement::STABILIZER_OF_IDENTITY {
            let image = g.apply(&p);
            debug_assert_eq!(image.pattern(), base);
            if let Some(&j) = index.get(&image.region().bits()) {
                union(&mut parent, i, j);
            }
        }
    }

    let mut groups: BTreeMap<usize, Vec<RegionMask>> = BTreeMap::new();
    for (i, &r) in regions.iter().enumerate() {
        let root = find(&mut parent, i);
        groups
            .entry(root)
            .or_default()
            .push(RegionMask::from_bits(k, r).expect("valid mask"));
    }
    let mut classes: Vec<ShadingClass> = groups
        .into_values()
        .map(|mut members| {
            members.sort_by_key(|r| (r.len(), r.bits()));
            let representative =
                MeshPattern::new(base.clone(), members[0]).expect("matching length");
            ShadingClass {
                representative,
                members,
            }
        })
        .collect();
    classes.sort_by_key(|c| (c.representative.region().len(), c.representative.region().bits()));
    classes
}

/// `inv` value counts over `S_n`: coefficients of `Π_{i≤n} [i]_q`.
pub fn mahonian_counts(n: usize) -> Vec<u64> {
    let mut coeffs = vec![1u64];
    for i in 1..=n {
        let mut next = vec![0u64; coeffs.len() + i - 1];
        for (d, &c) in coeffs.iter().enumerate() {
            for s in 0..i {
                next[d + s] += c;
            }
        }
        coeffs = next;
    }
    coeffs
}

/// A candidate statistic `(12, R) + (base, S)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MahonianCandidate {
    pub r: u16,
    pub s: u16,
}

impl MahonianCandidate {
    pub fn patterns(&self, base: &Permutation) -> (MeshPattern, MeshPattern) {
        let twelve = MeshPattern::new(
            Permutation::identity(2),
            RegionMask::from_bits(2, u64::from(self.r)).expect("k = 2 mask"),
        )
        .expect("length 2");
        let other = MeshPattern::new(
            base.clone(),
            RegionMask::from_bits(3, u64::from(self.s)).expect("k = 3 mask"),
        )
        .expect("length 3");
        (twelve, other)
    }

    pub fn descriptor(&self, base: &Permutation) -> stats::StatisticDescriptor {
        let (a, b) = self.patterns(base);
        stats::StatisticDescriptor::new([(1, a), (1, b)])
    }
}

/// Per-`n` evaluation tables for the two pattern families.
enum Tables {
    /// Full census per host: `twelve[t][R]`, `base[t][S]`.
    Census { twelve: Vec<Vec<u8>>, base: Vec<Vec<u8>> },
    /// Occurrence masks per host, for sizes where the census is too large.
    Masks { twelve: Vec<Vec<u64>>, base: Vec<Vec<u64>> },
}

/// Census tables hold `n! · 2^16` bytes for the base pattern; beyond this
/// size hosts are evaluated from their occurrence masks instead.
const CENSUS_MAX_N: usize = 6;

impl Tables {
    fn build(base: &Permutation, n: usize) -> Self {
        Self::build_with(base, n, n <= CENSUS_MAX_N)
    }

    fn build_with(base: &Permutation, n: usize, census: bool) -> Self {
        let hosts: Vec<Permutation> = Permutation::all(n).collect();
        let twelve_base = Permutation::identity(2);
        if census {
            let to_u8 = |v: Vec<u32>| v.into_iter().map(|c| c as u8).collect::<Vec<u8>>();
            let (twelve, base) = hosts
                .par_iter()
                .map(|t| {
                    (
                        to_u8(census_by_region(&twelve_base, t).expect("k = 2")),
                        to_u8(census_by_region(base, t).expect("k = 3")),
                    )
                })
                .unzip();
            Tables::Census { twelve, base }
        } else {
            let (twelve, base) = hosts
                .par_iter()
                .map(|t| {
                    let h = Host::new(t);
                    (h.empty_cell_masks(&twelve_base), h.empty_cell_masks(base))
                })
                .unzip();
            Tables::Masks { twelve, base }
        }
    }

    fn hosts(&self) -> usize {
        match self {
            Tables::Census { twelve, .. } => twelve.len(),
            Tables::Masks { twelve, .. } => twelve.len(),
        }
    }

    fn value(&self, host: usize, c: MahonianCandidate) -> usize {
        twelve_part(self, host, c.r) + base_part(self, host, c.s)
    }

    fn is_mahonian(&self, c: MahonianCandidate, target: &[u64]) -> bool {
        let mut hist = vec![0u64; target.len()];
        for h in 0..self.hosts() {
            let v = self.value(h, c);
            if v >= hist.len() {
                return false;
            }
            hist[v] += 1;
            if hist[v] > target[v] {
                return false;
            }
        }
        hist == target
    }
}

/// Parameters of a Mahonian search run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MahonianSearch {
    pub base: Permutation,
    pub schedule: Vec<usize>,
}

impl MahonianSearch {
    /// Default schedule `3, 4, ..., n_max`.
    pub fn new(base: Permutation, n_max: usize) -> Result<Self> {
        Self::with_schedule(base, (3..=n_max).collect())
    }

    pub fn with_schedule(base: Permutation, schedule: Vec<usize>) -> Result<Self> {
        if base.len() != 3 {
            return Err(Error::InvalidInput(format!(
                "Mahonian search base must have length 3, got {base}"
            )));
        }
        if schedule.is_empty() {
            return Err(Error::InvalidInput("empty filter schedule".into()));
        }
        if let Some(&n) = schedule.iter().find(|&&n| n > 7) {
            return Err(Error::OutOfRange {
                index: n as i64,
                lo: 0,
                hi: 7,
            });
        }
        Ok(Self { base, schedule })
    }

    /// Every `(R, S)` with `(12, R) + (base, S)` Mahonian at each scheduled `n`.
    pub fn run(&self) -> Vec<MahonianCandidate> {
        let mut candidates: Option<Vec<MahonianCandidate>> = None;
        for &n in &self.schedule {
            let tables = Tables::build(&self.base, n);
            let target = mahonian_counts(n);
            let next = match candidates {
                None => self.seed(&tables, &target),
                Some(c) => c
                    .into_par_iter()
                    .filter(|&c| tables.is_mahonian(c, &target))
                    .collect(),
            };
            candidates = Some(next);
        }
        let mut out = candidates.unwrap_or_default();
        out.sort_unstable();
        out
    }

    /// First pass over all `2^9 · 2^16` pairs: join on the column sums
    /// `Σ_t (12,R)(t) + Σ_t (base,S)(t) = Σ_t inv(t)`, then check the
    /// full distribution of each joined pair.
    fn seed(&self, tables: &Tables, target: &[u64]) -> Vec<MahonianCandidate> {
        let hosts = tables.hosts();
        let target_sum: u64 = target.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();
        let column_sum = |f: &dyn Fn(usize) -> usize| -> u64 { (0..hosts).map(|h| f(h) as u64).sum() };
        let r_sums: Vec<u64> = (0..=full_bits(2) as u16)
            .map(|r| column_sum(&|h| twelve_part(tables, h, r)))
            .collect();
        let s_sums: Vec<u64> = (0..=full_bits(3) as u32)
            .into_par_iter()
            .map(|s| column_sum(&|h| base_part(tables, h, s as u16)))
            .collect();
        let mut by_sum: HashMap<u64, Vec<u16>> = HashMap::new();
        for (s, &sum) in s_sums.iter().enumerate() {
            by_sum.entry(sum).or_default().push(s as u16);
        }
        r_sums
            .par_iter()
            .enumerate()
            .flat_map_iter(|(r, &rs)| {
                let matches = target_sum
                    .checked_sub(rs)
                    .and_then(|need| by_sum.get(&need))
                    .map(Vec::as_slice)
                    .unwrap_or(&[]);
                matches
                    .iter()
                    .map(move |&s| MahonianCandidate { r: r as u16, s })
                    .filter(|&c| tables.is_mahonian(c, target))
            })
            .collect()
    }
}

fn twelve_part(tables: &Tables, host: usize, r: u16) -> usize {
    match tables {
        Tables::Census { twelve, .. } => twelve[host][r as usize] as usize,
        Tables::Masks { twelve, .. } => twelve[host]
            .iter()
            .filter(|&&e| u64::from(r) & !e == 0)
            .count(),
    }
}

fn base_part(tables: &Tables, host: usize, s: u16) -> usize {
    match tables {
        Tables::Census { base, .. } => base[host][s as usize] as usize,
        Tables::Masks { base, .. } => base[host]
            .iter()
            .filter(|&&e| u64::from(s) & !e == 0)
            .count(),
    }
}

/// Values of a statistic on every permutation of length `≤ n_max`, in
/// length-then-lexicographic order.
pub fn fingerprint<F>(n_max: usize, stat: F) -> Vec<i64>
where
    F: Fn(&Permutation) -> i64 + Sync,
{
    let hosts: Vec<Permutation> = Permutation::all_up_to(n_max).collect();
    hosts.par_iter().map(|t| stat(t)).collect()
}

/// A known Mahonian statistic composed with a symmetry of the square,
/// optionally reflected in value: `t ↦ X(g(t))` or `t ↦ C(n,2) − X(g(t))`.
/// Reflection preserves Mahonian-ness since `Π [i]_q` is palindromic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnownFamily {
    pub name: &'static str,
    pub symmetry: GroupElement,
    pub reflected: bool,
}

impl std::fmt::Display for KnownFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.reflected {
            f.write_str("C(n,2) - ")?;
        }
        if self.symmetry == GroupElement::IDENTITY {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}∘{}", self.name, self.symmetry)
        }
    }
}

/// Recognizes statistics equal to `inv`, `mix` or `mixp` up to the trivial
/// symmetries, by comparing values on all permutations of length `≤ n_max`.
pub struct FamilyClassifier {
    n_max: usize,
    known: HashMap<Vec<i64>, KnownFamily>,
}

pub const KNOWN_MAHONIAN: [&str; 3] = ["inv", "mix", "mixp"];

impl FamilyClassifier {
    pub fn new(n_max: usize) -> Self {
        let mut known = HashMap::new();
        for name in KNOWN_MAHONIAN {
            let d = stats::descriptor(name).expect("builtin descriptor");
            for reflected in [false, true] {
                for g in GroupElement::ALL {
                    let fp = fingerprint(n_max, |t| {
                        let v = d.evaluate(&g.apply_perm(t));
                        if reflected {
                            let n = t.len() as i64;
                            n * (n - 1) / 2 - v
                        } else {
                            v
                        }
                    });
                    known.entry(fp).or_insert(KnownFamily {
                        name,
                        symmetry: g,
                        reflected,
                    });
                }
            }
        }
        Self { n_max, known }
    }

    pub fn classify(&self, stat: &stats::StatisticDescriptor) -> Option<&KnownFamily> {
        self.known.get(&fingerprint(self.n_max, |t| stat.evaluate(t)))
    }
}

/// One survivor of a Mahonian search with its recognized family.
#[derive(Debug, Clone)]
pub struct ClassifiedSurvivor {
    pub base: Permutation,
    pub candidate: MahonianCandidate,
    pub family: Option<KnownFamily>,
}

/// Runs the Mahonian search over every base in `S_3` and classifies the
/// survivors against the known families.
pub fn mahonian_sweep(n_max: usize) -> Result<Vec<ClassifiedSurvivor>> {
    let classifier = FamilyClassifier::new(n_max);
    let mut out = Vec::new();
    for base in Permutation::all(3) {
        for candidate in MahonianSearch::new(base.clone(), n_max)?.run() {
            let family = classifier.classify(&candidate.descriptor(&base)).cloned();
            out.push(ClassifiedSurvivor {
                base: base.clone(),
                candidate,
                family,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{
        alternating_patterns, andre_pattern, bbd_pattern, simsun_pattern, two_stack_patterns,
    };
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn mp(s: &str) -> MeshPattern {
        s.parse().unwrap()
    }

    fn factorial(n: usize) -> u64 {
        (1..=n as u64).product()
    }

    #[test]
    fn euler_numbers_small() {
        let e: Vec<u64> = euler_numbers(6).iter().map(|x| x.try_into().unwrap()).collect();
        assert_eq!(e, [1, 1, 1, 2, 5, 16, 61]);
    }

    #[test]
    fn euler_recursion_agrees_with_triangle() {
        assert_eq!(euler_numbers(12), euler_numbers_by_recursion(12));
        assert_eq!(euler_numbers(40), euler_numbers_by_recursion(40));
        assert_eq!(euler_numbers_by_recursion(0).len(), 1);
        assert_eq!(euler_numbers_by_recursion(1).len(), 2);
    }

    #[test]
    fn euler_counts_alternating_permutations() {
        let e = euler_u64(9);
        for n in 0..=9 {
            let alt = Permutation::all(n).filter(stats::is_alternating).count() as u64;
            assert_eq!(alt, e[n], "n = {n}");
        }
    }

    #[test]
    fn count_avoiders_examples() {
        assert_eq!(count_avoiders(&alternating_patterns(), 5), 16);
        for n in 0..=6 {
            assert_eq!(count_avoiders(&[], n), factorial(n));
            assert_eq!(count_avoiders(&[mp("21")], n), 1);
        }
        let avoiders = enumerate_avoiders(&[mp("21")], 4);
        assert_eq!(avoiders, vec![Permutation::identity(4)]);
    }

    #[test]
    fn alternating_triple_matches_direct_check() {
        let triple = alternating_patterns();
        for n in 0..=8 {
            let mut listed = enumerate_avoiders(&triple, n);
            listed.sort();
            let direct: Vec<Permutation> = Permutation::all(n).filter(stats::is_alternating).collect();
            assert_eq!(listed, direct, "n = {n}");
        }
    }

    #[test]
    fn simsun_and_andre_counted_by_euler() {
        let e = euler_u64(9);
        for n in 0..=8 {
            assert_eq!(count_avoiders(&[simsun_pattern()], n), e[n + 1], "simsun n = {n}");
            assert_eq!(count_avoiders(&[andre_pattern()], n), e[n + 1], "andre n = {n}");
            assert_eq!(
                count_avoiders(&[andre_pattern(), end_with_max_pattern()], n),
                e[n],
                "andre first kind n = {n}"
            );
        }
    }

    fn split_at_one(t: &Permutation) -> (Permutation, Permutation) {
        let w = t.as_slice();
        let i = t.position_of(1) - 1;
        (
            Permutation::flatten(&w[..i]).unwrap(),
            Permutation::flatten(&w[i + 1..]).unwrap(),
        )
    }

    #[test]
    fn andre_decomposes_around_one() {
        let andre = andre_pattern();
        let end_max = end_with_max_pattern();
        for t in Permutation::all_up_to(8).filter(|t| !t.is_empty()) {
            let (l, r) = split_at_one(&t);
            if t.at(t.len()) != t.len() {
                continue;
            }
            assert_eq!(
                is_andre_first_kind(&t),
                is_andre_first_kind(&l) && is_andre_first_kind(&r),
                "{t}"
            );
            let parts_avoid = [&l, &r]
                .iter()
                .all(|x| andre.avoided_by(x) && end_max.avoided_by(x));
            assert_eq!(andre.avoided_by(&t), parts_avoid, "{t}");
        }
    }

    #[test]
    fn two_stack_sortable_characterization() {
        let pats = two_stack_patterns();
        assert_eq!(pats[1], mp("3241 | (1,4)"));
        for t in Permutation::all_up_to(8) {
            let h = Host::new(&t);
            assert_eq!(t.two_stack_sortable(), pats.iter().all(|q| h.avoids(q)), "{t}");
        }
    }

    #[test]
    fn bbd_characterization() {
        let q = bbd_pattern();
        for t in Permutation::all_up_to(8) {
            assert_eq!(t.bbd_chain_valid(), q.avoided_by(&t), "{t}");
        }
    }

    #[test]
    fn census_of_21_in_21_is_all_ones() {
        let c = census_by_region(&p("21"), &p("21")).unwrap();
        assert_eq!(c.len(), 512);
        assert!(c.iter().all(|&x| x == 1));
    }

    #[test]
    fn census_spot_checks_against_counting() {
        let base = p("321");
        let t = p("4321");
        let c = census_by_region(&base, &t).unwrap();
        assert_eq!(c[0] as u64, base.clone().into_vec().len() as u64 + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let bits = rng.gen_range(0..=full_bits(3));
            let q = MeshPattern::new(base.clone(), RegionMask::from_bits(3, bits).unwrap()).unwrap();
            assert_eq!(c[bits as usize] as u64, q.count(&t), "{q}");
        }
    }

    #[test]
    fn census_rejects_long_bases() {
        assert!(matches!(
            census_by_region(&p("1234"), &p("1234")),
            Err(Error::PatternTooLong { len: 4, max: 3 })
        ));
    }

    proptest! {
        #[test]
        fn census_agrees_with_count(
            base in (0usize..=3).prop_flat_map(|k| Just((1..=k).collect::<Vec<_>>()).prop_shuffle()),
            host in (0usize..=7).prop_flat_map(|n| Just((1..=n).collect::<Vec<_>>()).prop_shuffle()),
            seed in any::<u64>(),
        ) {
            let base = Permutation::new(base).unwrap();
            let t = Permutation::new(host).unwrap();
            let c = census_by_region(&base, &t).unwrap();
            let classical = MeshPattern::classical(base.clone()).unwrap().count(&t);
            prop_assert_eq!(c[0] as u64, classical);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..20 {
                let bits = rng.gen_range(0..=full_bits(base.len()));
                let q = MeshPattern::new(base.clone(), RegionMask::from_bits(base.len(), bits).unwrap()).unwrap();
                prop_assert_eq!(c[bits as usize] as u64, q.count(&t));
            }
        }
    }

    #[test]
    fn content_hash_is_stable() {
        assert_eq!(
            content_hash(["abc"]),
            // sha256 of "abc\n"
            "edeaaff3f1774ad2888673770c6d64097e391bc362d7d6fb34982ddf0efd18cb"
        );
        assert_ne!(content_hash(["a", "b"]), content_hash(["ab"]));
    }

    #[test]
    fn frozen_constants_match_a_fresh_derivation() {
        let fresh = derive_shadings(7);
        assert_eq!(fresh.constants_file().unwrap(), include_str!("../data/derived_constants.tsv"));
        assert_eq!(fresh.simsun().unwrap(), simsun_pattern());
        assert_eq!(fresh.andre().unwrap(), andre_pattern());
        // The full-rectangle reading of the simsun shading is one of the matches.
        let wide = mp("321 | (1,0)(1,1)(1,2)(2,0)(2,1)(2,2)").region();
        assert!(fresh.simsun_matches.contains(&wide));
    }

    #[test]
    fn weak_321_filter_leaves_many_classes() {
        assert!(search_321_regions(2).len() > 2);
    }

    #[test]
    fn search_321_finds_simsun_and_andre() {
        let classes = search_321_regions(6);
        assert_eq!(classes.len(), 2);
        let simsun = simsun_pattern();
        let andre = andre_pattern();
        assert!(classes.iter().any(|c| c.contains(&simsun)));
        assert!(classes.iter().any(|c| c.contains(&andre)));
        assert!(!classes.iter().any(|c| c.contains(&simsun) && c.contains(&andre)));
    }

    #[test]
    fn mahonian_counts_are_q_factorial() {
        assert_eq!(mahonian_counts(0), [1]);
        assert_eq!(mahonian_counts(3), [1, 2, 2, 1]);
        for n in 0usize..=6 {
            let mut h = vec![0u64; n * n.saturating_sub(1) / 2 + 1];
            for t in Permutation::all(n) {
                h[stats::inv(&t)] += 1;
            }
            assert_eq!(mahonian_counts(n), h);
        }
    }

    fn candidate(r: &[(usize, usize)], s: &[(usize, usize)]) -> MahonianCandidate {
        MahonianCandidate {
            r: RegionMask::from_cells(2, r.iter().copied()).unwrap().bits() as u16,
            s: RegionMask::from_cells(3, s.iter().copied()).unwrap().bits() as u16,
        }
    }

    #[test]
    fn mahonian_search_recovers_mix_and_mixp() {
        let mix = candidate(&[(2, 2)], &[(3, 2), (3, 3)]);
        let mixp = candidate(&[(1, 2)], &[(1, 3), (2, 3)]);
        assert!(MahonianSearch::new(p("213"), 6).unwrap().run().contains(&mix));
        assert!(MahonianSearch::new(p("231"), 6).unwrap().run().contains(&mixp));
        assert_eq!(mix.descriptor(&p("213")), stats::descriptor("mix").unwrap());
        assert_eq!(mixp.descriptor(&p("231")), stats::descriptor("mixp").unwrap());
    }

    #[test]
    fn mahonian_search_filters_plain_counts() {
        let plain = candidate(&[], &[]);
        let twelve = candidate(&[(2, 2)], &[(3, 2), (3, 3)]);
        let survivors = MahonianSearch::with_schedule(p("123"), vec![3]).unwrap().run();
        assert!(!survivors.contains(&plain));
        assert!(survivors.contains(&twelve));
        assert_eq!(plain.descriptor(&p("123")).evaluate(&p("123")), 4);
    }

    #[test]
    fn mahonian_seed_matches_brute_force() {
        // Every pair at n = 3, evaluated by direct counting.
        let base = p("231");
        let hosts: Vec<Permutation> = Permutation::all(3).collect();
        let twelve: Vec<Vec<u64>> = (0..=full_bits(2))
            .map(|r| {
                let q = MeshPattern::new(p("12"), RegionMask::from_bits(2, r).unwrap()).unwrap();
                hosts.iter().map(|t| q.count(t)).collect()
            })
            .collect();
        let other: Vec<Vec<u64>> = (0..=full_bits(3))
            .map(|s| {
                let q = MeshPattern::new(base.clone(), RegionMask::from_bits(3, s).unwrap()).unwrap();
                hosts.iter().map(|t| q.count(t)).collect()
            })
            .collect();
        let mut expected = Vec::new();
        for (r, a) in twelve.iter().enumerate() {
            for (s, b) in other.iter().enumerate() {
                let mut h = [0u64; 4];
                let ok = a.iter().zip(b).all(|(x, y)| {
                    let v = (x + y) as usize;
                    v < 4 && {
                        h[v] += 1;
                        true
                    }
                });
                if ok && h == [1, 2, 2, 1] {
                    expected.push(MahonianCandidate { r: r as u16, s: s as u16 });
                }
            }
        }
        let found = MahonianSearch::with_schedule(base, vec![3]).unwrap().run();
        assert_eq!(found, expected);
    }

    #[test]
    fn census_and_mask_tables_agree() {
        let base = p("213");
        let census = Tables::build_with(&base, 5, true);
        let masks = Tables::build_with(&base, 5, false);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let c = MahonianCandidate {
                r: rng.gen_range(0..512),
                s: rng.gen_range(0..=u16::MAX),
            };
            for h in 0..census.hosts() {
                assert_eq!(census.value(h, c), masks.value(h, c));
            }
        }
    }

    #[test]
    fn mahonian_search_parameter_checks() {
        assert!(MahonianSearch::new(p("12"), 5).is_err());
        assert!(MahonianSearch::with_schedule(p("123"), vec![]).is_err());
        assert!(MahonianSearch::with_schedule(p("123"), vec![3, 8]).is_err());
    }

    #[test]
    fn sweep_survivors_are_known_families() {
        let sweep = mahonian_sweep(5).unwrap();
        assert!(!sweep.is_empty());
        for s in &sweep {
            assert!(s.family.is_some(), "{}", s.candidate.descriptor(&s.base));
        }
    }

    #[test]
    fn classifier_recognizes_symmetric_images() {
        let classifier = FamilyClassifier::new(5);
        let inv = stats::descriptor("inv").unwrap();
        assert_eq!(classifier.classify(&inv).unwrap().to_string(), "inv");
        assert!(classifier.classify(&stats::descriptor("des").unwrap()).is_none());
        let ninv = stats::descriptor("ninv").unwrap();
        assert!(classifier.classify(&ninv).is_some());
    }
}
