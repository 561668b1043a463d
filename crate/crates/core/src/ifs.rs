//! Rational self-similar IFSs and their finite-scale geometry.
//!
//! An IFS here is an ordered list of branches `f_i(x) = x/q_i + p_i/q_i`
//! with integer `q_i >= 2` and integer `p_i`. Branch order is the alphabet
//! order and words are sequences of 0-based branch indices.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::rational::ExactRational;

/// One branch `x -> x/q + p/q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Branch {
    pub q: u64,
    pub p: i64,
}

impl Branch {
    /// Contraction ratio 1/q.
    pub fn ratio(&self) -> ExactRational {
        BigRational::new(BigInt::one(), BigInt::from(self.q))
    }

    pub fn offset(&self) -> ExactRational {
        BigRational::new(BigInt::from(self.p), BigInt::from(self.q))
    }

    /// Fixed point p/(q-1).
    pub fn fixed_point(&self) -> ExactRational {
        BigRational::new(BigInt::from(self.p), BigInt::from(self.q - 1))
    }
}

/// An ordered rational IFS with at least two branches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalIfs {
    branches: Vec<Branch>,
    homogeneous: Option<u64>,
}

impl RationalIfs {
    pub fn new(branches: Vec<Branch>) -> Result<Self> {
        if branches.len() < 2 {
            return Err(Error::InvalidIfs("need at least 2 branches".into()));
        }
        if let Some(b) = branches.iter().find(|b| b.q < 2) {
            return Err(Error::InvalidIfs(format!("branch denominator {} < 2", b.q)));
        }
        let q0 = branches[0].q;
        let homogeneous = branches.iter().all(|b| b.q == q0).then_some(q0);
        Ok(Self {
            branches,
            homogeneous,
        })
    }

    /// Homogeneous IFS with common base `b` and digit set `digits`.
    pub fn homogeneous(base: u64, digits: &[i64]) -> Result<Self> {
        Self::new(digits.iter().map(|&p| Branch { q: base, p }).collect())
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn alphabet_len(&self) -> usize {
        self.branches.len()
    }

    pub fn branch(&self, i: usize) -> Result<Branch> {
        self.branches.get(i).copied().ok_or(Error::IndexOutOfRange {
            index: i,
            alphabet: self.branches.len(),
        })
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous.is_some()
    }

    /// The common base when all branch denominators agree.
    pub fn homogeneous_base(&self) -> Option<u64> {
        self.homogeneous
    }

    pub fn require_homogeneous(&self) -> Result<u64> {
        self.homogeneous.ok_or(Error::InhomogeneousInput)
    }

    /// Convex hull of the attractor: the branches are increasing maps, so the
    /// hull endpoints are the extreme branch fixed points p_i/(q_i - 1).
    pub fn hull(&self) -> Interval {
        let mut lo = self.branches[0].fixed_point();
        let mut hi = lo.clone();
        for b in &self.branches[1..] {
            let f = b.fixed_point();
            if f < lo {
                lo = f.clone();
            }
            if f > hi {
                hi = f;
            }
        }
        Interval { lo, hi }
    }

    /// Composed map `f_{w_1} o ... o f_{w_n}` for a non-empty word.
    pub fn compose(&self, word: &[usize]) -> Result<AffineMap> {
        if word.is_empty() {
            return Err(Error::InvalidArgument("empty word".into()));
        }
        let mut acc = AffineMap::identity();
        for &i in word {
            acc = acc.compose(&self.branch(i)?.into());
        }
        Ok(acc)
    }

    pub fn digits(&self) -> Vec<i64> {
        self.branches.iter().map(|b| b.p).collect()
    }
}

/// Composed affine map `x -> ratio*x + offset` with `ratio` in (0, 1].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AffineMap {
    pub ratio: ExactRational,
    pub offset: ExactRational,
}

impl From<Branch> for AffineMap {
    fn from(b: Branch) -> Self {
        AffineMap {
            ratio: b.ratio(),
            offset: b.offset(),
        }
    }
}

impl AffineMap {
    pub fn identity() -> Self {
        AffineMap {
            ratio: BigRational::one(),
            offset: BigRational::zero(),
        }
    }

    pub fn apply(&self, x: &ExactRational) -> ExactRational {
        &self.ratio * x + &self.offset
    }

    /// `self o other`: apply `other` first.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        AffineMap {
            ratio: &self.ratio * &other.ratio,
            offset: &self.ratio * &other.offset + &self.offset,
        }
    }

    /// Unique fixed point offset/(1 - ratio); requires ratio != 1.
    pub fn fixed_point(&self) -> ExactRational {
        &self.offset / (BigRational::one() - &self.ratio)
    }

    /// Image of a closed interval (the map is increasing).
    pub fn image(&self, iv: &Interval) -> Interval {
        Interval {
            lo: self.apply(&iv.lo),
            hi: self.apply(&iv.hi),
        }
    }
}

/// Closed interval with exact rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: ExactRational,
    pub hi: ExactRational,
}

impl Interval {
    pub fn new(lo: ExactRational, hi: ExactRational) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidArgument("interval with lo > hi".into()));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, x: &ExactRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn width(&self) -> ExactRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> ExactRational {
        (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
    }
}

/// Distinct numerators of level-n cylinder offsets over b^n, computed by
/// iterated set expansion N_{k+1} = b*N_k + {p_i}. The cardinality is the
/// number of distinct level-n maps.
pub fn level_translates(ifs: &RationalIfs, n: u32) -> Result<BTreeSet<BigInt>> {
    let base = ifs.require_homogeneous()?;
    if n == 0 {
        return Err(Error::InvalidArgument("level must be >= 1".into()));
    }
    let b = BigInt::from(base);
    let digits: Vec<BigInt> = ifs.branches().iter().map(|br| BigInt::from(br.p)).collect();
    let mut set: BTreeSet<BigInt> = digits.iter().cloned().collect();
    for _ in 1..n {
        let mut next = BTreeSet::new();
        for t in &set {
            let scaled = t * &b;
            for d in &digits {
                next.insert(&scaled + d);
            }
        }
        set = next;
    }
    Ok(set)
}

/// All words of the same length whose composed map equals `compose(word)`
/// exactly. DFS over the word tree, pruning prefixes whose image interval
/// cannot contain the target image or whose ratio cannot reach the target.
pub fn overlap_class(ifs: &RationalIfs, word: &[usize]) -> Result<Vec<Vec<usize>>> {
    let target = ifs.compose(word)?;
    Ok(words_with_map(ifs, word.len(), &target))
}

/// All words of length `n` composing to exactly `target`.
pub fn words_with_map(ifs: &RationalIfs, n: usize, target: &AffineMap) -> Vec<Vec<usize>> {
    let hull = ifs.hull();
    let target_image = target.image(&hull);
    let (rmin, rmax) = {
        let mut rmin = ifs.branches()[0].ratio();
        let mut rmax = rmin.clone();
        for b in &ifs.branches()[1..] {
            let r = b.ratio();
            if r < rmin {
                rmin = r.clone();
            }
            if r > rmax {
                rmax = r;
            }
        }
        (rmin, rmax)
    };
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(n);
    let mut stack_map = vec![AffineMap::identity()];
    dfs_words(
        ifs,
        n,
        target,
        &target_image,
        &hull,
        &rmin,
        &rmax,
        &mut prefix,
        &mut stack_map,
        &mut out,
    );
    out.sort();
    out
}

#[allow(clippy::too_many_arguments)]
fn dfs_words(
    ifs: &RationalIfs,
    n: usize,
    target: &AffineMap,
    target_image: &Interval,
    hull: &Interval,
    rmin: &ExactRational,
    rmax: &ExactRational,
    prefix: &mut Vec<usize>,
    stack_map: &mut Vec<AffineMap>,
    out: &mut Vec<Vec<usize>>,
) {
    let cur = stack_map.last().unwrap().clone();
    if prefix.len() == n {
        if cur == *target {
            out.push(prefix.clone());
        }
        return;
    }
    let remaining = (n - prefix.len()) as u32;
    for i in 0..ifs.alphabet_len() {
        let child = cur.compose(&ifs.branches()[i].into());
        // ratio feasibility: target.ratio = child.ratio * (product of
        // `remaining - 1` branch ratios), which lies in [rmin^k, rmax^k].
        let k = remaining - 1;
        let quotient = &target.ratio / &child.ratio;
        let lo_bound = rmax_pow(rmin, k);
        let hi_bound = rmax_pow(rmax, k);
        if quotient < lo_bound || quotient > hi_bound {
            continue;
        }
        // image feasibility: target(hull) must sit inside child(hull).
        let child_image = child.image(hull);
        if target_image.lo < child_image.lo || target_image.hi > child_image.hi {
            continue;
        }
        prefix.push(i);
        stack_map.push(child);
        dfs_words(
            ifs, n, target, target_image, hull, rmin, rmax, prefix, stack_map, out,
        );
        stack_map.pop();
        prefix.pop();
    }
}

fn rmax_pow(r: &ExactRational, k: u32) -> ExactRational {
    let mut acc = BigRational::one();
    for _ in 0..k {
        acc *= r;
    }
    acc
}

/// The cutting set: all words with `c_word <= r < c_parent`.
/// For a homogeneous IFS this is every word of one fixed length.
pub fn cutting_set(ifs: &RationalIfs, r: &ExactRational) -> Result<Vec<Vec<usize>>> {
    if r <= &BigRational::zero() || r >= &BigRational::one() {
        return Err(Error::InvalidArgument(
            "cutting scale must lie in (0, 1)".into(),
        ));
    }
    let mut out = Vec::new();
    let mut word = Vec::new();
    cut_rec(ifs, r, &BigRational::one(), &mut word, &mut out);
    Ok(out)
}

fn cut_rec(
    ifs: &RationalIfs,
    r: &ExactRational,
    ratio: &ExactRational,
    word: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    for i in 0..ifs.alphabet_len() {
        let child = ratio * ifs.branches()[i].ratio();
        word.push(i);
        if &child <= r {
            out.push(word.clone());
        } else {
            cut_rec(ifs, r, &child, word, out);
        }
        word.pop();
    }
}

/// A cutting set together with the distinct composed maps it induces.
pub fn cutting_set_maps(ifs: &RationalIfs, r: &ExactRational) -> Result<Vec<AffineMap>> {
    let words = cutting_set(ifs, r)?;
    let mut dedup = BTreeSet::new();
    for w in &words {
        dedup.insert(ifs.compose(w)?);
    }
    Ok(dedup.into_iter().collect())
}

/// One row of a separation profile.
#[derive(Debug, Clone)]
pub struct SeparationRow {
    pub scale: ExactRational,
    /// Max over probe centers of the number of distinct cutting-set maps
    /// whose hull image meets the closed ball of radius `scale`.
    pub max_count: usize,
    /// log(count) / -log(scale); tends to 0 under the AWSC.
    pub awsc_exponent: f64,
}

/// Finite-scale separation diagnostic. Probes default to all distinct
/// cylinder left endpoints at the matching cutting depth; `probe_cap`
/// subsamples them evenly when set.
pub fn separation_profile(
    ifs: &RationalIfs,
    scales: &[ExactRational],
    probe_cap: Option<usize>,
) -> Result<Vec<SeparationRow>> {
    if scales.is_empty() {
        return Err(Error::InvalidArgument("empty scale list".into()));
    }
    let hull = ifs.hull();
    let mut rows = Vec::with_capacity(scales.len());
    for r in scales {
        if r <= &BigRational::zero() || r >= &BigRational::one() {
            return Err(Error::InvalidArgument(
                "separation scales must lie in (0, 1)".into(),
            ));
        }
        let maps = cutting_set_maps(ifs, r)?;
        let mut images: Vec<Interval> = maps.iter().map(|m| m.image(&hull)).collect();
        images.sort_by(|a, b| a.lo.cmp(&b.lo).then(a.hi.cmp(&b.hi)));
        let max_width = images
            .iter()
            .map(|iv| iv.width())
            .max()
            .unwrap_or_else(BigRational::zero);

        let mut probes: Vec<ExactRational> = images.iter().map(|iv| iv.lo.clone()).collect();
        probes.dedup();
        if let Some(cap) = probe_cap {
            if cap > 0 && probes.len() > cap {
                let step = probes.len() as f64 / cap as f64;
                probes = (0..cap)
                    .map(|k| probes[(k as f64 * step) as usize].clone())
                    .collect();
            }
        }

        let los: Vec<&ExactRational> = images.iter().map(|iv| &iv.lo).collect();
        let mut max_count = 0usize;
        for x in &probes {
            let ball_lo = x - r;
            let ball_hi = x + r;
            // images intersecting the ball have lo in [ball_lo - max_width, ball_hi]
            let from = lower_bound(&los, &(&ball_lo - &max_width));
            let mut count = 0usize;
            for iv in &images[from..] {
                if iv.lo > ball_hi {
                    break;
                }
                if iv.hi >= ball_lo {
                    count += 1;
                }
            }
            max_count = max_count.max(count);
        }
        let exponent = if max_count == 0 {
            0.0
        } else {
            let rf = r.to_f64().unwrap_or(f64::NAN);
            (max_count as f64).ln() / -rf.ln()
        };
        rows.push(SeparationRow {
            scale: r.clone(),
            max_count,
            awsc_exponent: exponent,
        });
    }
    Ok(rows)
}

fn lower_bound(sorted: &[&ExactRational], key: &ExactRational) -> usize {
    let mut lo = 0usize;
    let mut hi = sorted.len();
    while lo < hi {
        let mid = (lo + hi) / 2;
        if sorted[mid] < key {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IfsSpecFile {
    Homogeneous { base: u64, digits: Vec<i64> },
    General { branches: Vec<BranchSpec> },
}

#[derive(Deserialize)]
struct BranchSpec {
    q: u64,
    p: i64,
}

/// Parses an IFS spec file: either `{"base": b, "digits": [p_1, ...]}` or
/// `{"branches": [{"q": q_i, "p": p_i}, ...]}`, digits in alphabet order.
pub fn parse_ifs_json(text: &str) -> Result<RationalIfs> {
    let spec: IfsSpecFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("bad IFS spec: {e}")))?;
    match spec {
        IfsSpecFile::Homogeneous { base, digits } => RationalIfs::homogeneous(base, &digits),
        IfsSpecFile::General { branches } => {
            RationalIfs::new(branches.into_iter().map(|b| Branch { q: b.q, p: b.p }).collect())
        }
    }
}

/// Built-in fixture IFSs used across tests and `--selftest`.
pub mod fixtures {
    use super::*;

    /// Middle-third Cantor set: base 3, digits {0, 2}.
    pub fn cantor() -> RationalIfs {
        RationalIfs::homogeneous(3, &[0, 2]).unwrap()
    }

    /// Base 3 with digits {0, 1, 3}: exact overlaps at level 2.
    pub fn overlap3() -> RationalIfs {
        RationalIfs::homogeneous(3, &[0, 1, 3]).unwrap()
    }

    /// Base 3 with the full digit set {0, 1, 2}: the unit interval.
    pub fn full3() -> RationalIfs {
        RationalIfs::homogeneous(3, &[0, 1, 2]).unwrap()
    }

    /// Inhomogeneous pair {x/2, x/3 + 2/3}.
    pub fn mixed23() -> RationalIfs {
        RationalIfs::new(vec![Branch { q: 2, p: 0 }, Branch { q: 3, p: 2 }]).unwrap()
    }

    pub fn by_name(name: &str) -> Option<RationalIfs> {
        match name {
            "cantor" => Some(cantor()),
            "overlap3" => Some(overlap3()),
            "full3" => Some(full3()),
            "mixed23" => Some(mixed23()),
            _ => None,
        }
    }
}

/// Groups all words of length `n` by their exact composed map.
/// Only feasible within the given word budget.
pub fn level_overlap_classes(
    ifs: &RationalIfs,
    n: usize,
    budget: u64,
) -> Result<BTreeMap<AffineMap, Vec<Vec<usize>>>> {
    let m = ifs.alphabet_len() as u64;
    let total = m.checked_pow(n as u32).ok_or_else(|| {
        Error::Budget(format!("m^n overflows at level {n}"))
    })?;
    if total > budget {
        return Err(Error::Budget(format!(
            "level {n} needs {total} words > budget {budget}"
        )));
    }
    let mut classes: BTreeMap<AffineMap, Vec<Vec<usize>>> = BTreeMap::new();
    let mut word = vec![0usize; n];
    loop {
        let map = ifs.compose(&word)?;
        classes.entry(map).or_default().push(word.clone());
        // odometer increment
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(classes);
            }
            pos -= 1;
            word[pos] += 1;
            if word[pos] < ifs.alphabet_len() {
                break;
            }
            word[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::rational::{rational_from_i64, rational_int};

    #[test]
    fn hull_endpoints_from_fixed_points() {
        assert_eq!(
            cantor().hull(),
            Interval {
                lo: rational_int(0),
                hi: rational_int(1)
            }
        );
        let shifted = RationalIfs::homogeneous(3, &[1, 2]).unwrap();
        assert_eq!(
            shifted.hull(),
            Interval {
                lo: rational_from_i64(1, 2),
                hi: rational_int(1)
            }
        );
        assert_eq!(
            mixed23().hull(),
            Interval {
                lo: rational_int(0),
                hi: rational_int(1)
            }
        );
    }

    #[test]
    fn compose_matches_hand_composition() {
        let ifs = cantor();
        // digits (0, 2) are branches (0, 1): f_0(f_1(x)) = (x/3 + 2/3)/3
        let m = ifs.compose(&[0, 1]).unwrap();
        assert_eq!(m.ratio, rational_from_i64(1, 9));
        assert_eq!(m.offset, rational_from_i64(2, 9));
        let single = ifs.compose(&[1]).unwrap();
        assert_eq!(single.ratio, rational_from_i64(1, 3));
        assert_eq!(single.offset, rational_from_i64(2, 3));
        let m22 = ifs.compose(&[1, 1]).unwrap();
        assert_eq!(m22.offset, rational_from_i64(8, 9));
    }

    #[test]
    fn compose_is_a_monoid_morphism() {
        let ifs = mixed23();
        let u = [0usize, 1, 1, 0];
        let v = [1usize, 0];
        let uv: Vec<usize> = u.iter().chain(v.iter()).copied().collect();
        assert_eq!(
            ifs.compose(&uv).unwrap(),
            ifs.compose(&u).unwrap().compose(&ifs.compose(&v).unwrap())
        );
    }

    #[test]
    fn level_translates_counts() {
        let ifs = cantor();
        let n2 = level_translates(&ifs, 2).unwrap();
        let expect: BTreeSet<BigInt> = [0, 2, 6, 8].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(n2, expect);
        assert_eq!(level_translates(&ifs, 10).unwrap().len(), 1024);

        let ov = overlap3();
        let n2 = level_translates(&ov, 2).unwrap();
        let expect: BTreeSet<BigInt> = [0, 1, 3, 4, 6, 9, 10, 12]
            .iter()
            .map(|&x| BigInt::from(x))
            .collect();
        assert_eq!(n2, expect);

        assert!(matches!(
            level_translates(&mixed23(), 2),
            Err(Error::InhomogeneousInput)
        ));
    }

    #[test]
    fn level_translates_submultiplicative() {
        for ifs in [cantor(), overlap3()] {
            let counts: Vec<usize> = (1..=6)
                .map(|n| level_translates(&ifs, n).unwrap().len())
                .collect();
            for n in 1..=3usize {
                for k in 1..=3usize {
                    assert!(counts[n + k - 1] <= counts[n - 1] * counts[k - 1]);
                }
            }
        }
        // equality for Cantor digits {0, 2}
        let counts: Vec<usize> = (1..=6)
            .map(|n| level_translates(&cantor(), n).unwrap().len())
            .collect();
        for n in 1..=3usize {
            for k in 1..=3usize {
                assert_eq!(counts[n + k - 1], counts[n - 1] * counts[k - 1]);
            }
        }
    }

    #[test]
    fn overlap_classes() {
        let ifs = cantor();
        assert_eq!(overlap_class(&ifs, &[0, 1]).unwrap(), vec![vec![0, 1]]);

        // digits {0,1,3}: digit-word (1,0) collides with (0,3), i.e. branch
        // words (1,0) and (0,2) since 3*1+0 = 3*0+3.
        let ov = overlap3();
        let class = overlap_class(&ov, &[1, 0]).unwrap();
        assert_eq!(class, vec![vec![0, 2], vec![1, 0]]);
        // partition property: every member has the same composed map and
        // membership is symmetric.
        let target = ov.compose(&[1, 0]).unwrap();
        for w in &class {
            assert_eq!(ov.compose(w).unwrap(), target);
            assert_eq!(overlap_class(&ov, w).unwrap(), class);
        }
    }

    #[test]
    fn level_overlap_classes_match_per_word_classes() {
        let ov = overlap3();
        let classes = level_overlap_classes(&ov, 3, 10_000).unwrap();
        let total: usize = classes.values().map(|v| v.len()).sum();
        assert_eq!(total, 27);
        assert_eq!(classes.len(), level_translates(&ov, 3).unwrap().len());
        for (map, words) in &classes {
            for w in words {
                assert_eq!(&ov.compose(w).unwrap(), map);
            }
            assert_eq!(&overlap_class(&ov, &words[0]).unwrap(), words);
        }
    }

    #[test]
    fn cutting_sets() {
        let ifs = cantor();
        let words = cutting_set(&ifs, &rational_from_i64(1, 3)).unwrap();
        assert_eq!(words, vec![vec![0], vec![1]]);
        let words = cutting_set(&ifs, &rational_from_i64(1, 4)).unwrap();
        assert_eq!(words.len(), 4);
        assert!(words.iter().all(|w| w.len() == 2));

        let mixed = mixed23();
        let words = cutting_set(&mixed, &rational_from_i64(1, 5)).unwrap();
        assert!(words.contains(&vec![0, 0, 0])); // ratio 1/8, parent 1/4
        assert!(words.contains(&vec![1, 1])); // ratio 1/9, parent 1/3
        for w in &words {
            let c = mixed.compose(w).unwrap().ratio;
            let parent = mixed.compose(&w[..w.len() - 1]).unwrap_or(AffineMap::identity());
            assert!(c <= rational_from_i64(1, 5));
            assert!(parent.ratio > rational_from_i64(1, 5));
        }
    }

    #[test]
    fn cutting_set_covers_each_branch_once() {
        for (ifs, r, depth) in [
            (cantor(), rational_from_i64(1, 4), 4usize),
            (mixed23(), rational_from_i64(1, 5), 5),
        ] {
            let words = cutting_set(&ifs, &r).unwrap();
            let m = ifs.alphabet_len();
            let mut deep = vec![vec![]];
            for _ in 0..depth {
                let mut next = Vec::new();
                for w in &deep {
                    for i in 0..m {
                        let mut w2: Vec<usize> = w.clone();
                        w2.push(i);
                        next.push(w2);
                    }
                }
                deep = next;
            }
            for w in &deep {
                let hits = words
                    .iter()
                    .filter(|cut| w.len() >= cut.len() && &w[..cut.len()] == cut.as_slice())
                    .count();
                assert_eq!(hits, 1, "branch {w:?} must pass through exactly one cut word");
            }
        }
    }

    #[test]
    fn separation_profile_cantor_is_two() {
        let ifs = cantor();
        let scales: Vec<ExactRational> = (1..=8)
            .map(|k| BigRational::new(BigInt::one(), BigInt::from(3u64.pow(k))))
            .collect();
        let rows = separation_profile(&ifs, &scales, None).unwrap();
        for row in &rows {
            assert!(row.max_count <= 2, "scale {} count {}", row.scale, row.max_count);
            assert!(row.max_count >= 1);
        }
    }

    #[test]
    fn separation_profile_trivial_probe() {
        let ifs = mixed23();
        let rows = separation_profile(&ifs, &[rational_from_i64(1, 2)], None).unwrap();
        assert!(rows[0].max_count >= 1);
    }

    #[test]
    fn parse_ifs_spec_files() {
        let h = parse_ifs_json(r#"{"base": 3, "digits": [0, 2]}"#).unwrap();
        assert_eq!(h, cantor());
        let g = parse_ifs_json(r#"{"branches": [{"q":2,"p":0},{"q":3,"p":2}]}"#).unwrap();
        assert_eq!(g, mixed23());
        assert!(parse_ifs_json(r#"{"base": 1, "digits": [0]}"#).is_err());
    }
}
