//! Eventually periodic codings and the rational inventory they generate.
//!
//! A coding is a preperiod word (possibly empty) followed by an infinitely
//! repeated non-empty period word. Its projection is an exact rational:
//! apply the preperiod map to the unique fixed point of the period map.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::ifs::{overlap_class, AffineMap, RationalIfs};
use crate::rational::{format_rational, height, ExactRational};

/// `preperiod . (period)^inf` over 0-based branch indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Coding {
    preperiod: Vec<usize>,
    period: Vec<usize>,
}

impl Coding {
    pub fn new(preperiod: Vec<usize>, period: Vec<usize>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidArgument("empty period".into()));
        }
        Ok(Coding { preperiod, period })
    }

    pub fn preperiod(&self) -> &[usize] {
        &self.preperiod
    }

    pub fn period(&self) -> &[usize] {
        &self.period
    }

    /// Canonical form: primitive period, minimal preperiod. While the last
    /// preperiod letter equals the last period letter the boundary shifts
    /// left one step (rotating the period right), leaving the infinite
    /// sequence unchanged. Idempotent.
    pub fn canonicalize(&self) -> Coding {
        let mut period = primitive_root(&self.period);
        let mut preperiod = self.preperiod.clone();
        while let Some(&last) = preperiod.last() {
            if last != *period.last().unwrap() {
                break;
            }
            preperiod.pop();
            period.rotate_right(1);
        }
        Coding { preperiod, period }
    }

    pub fn is_canonical(&self) -> bool {
        self == &self.canonicalize()
    }

    fn word_string(word: &[usize]) -> String {
        word.iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }

    /// Dash-joined index words, e.g. "0-1"; empty preperiod renders as "".
    pub fn preperiod_string(&self) -> String {
        Self::word_string(&self.preperiod)
    }

    pub fn period_string(&self) -> String {
        Self::word_string(&self.period)
    }
}

/// Smallest word whose power equals `word`.
fn primitive_root(word: &[usize]) -> Vec<usize> {
    let n = word.len();
    for d in 1..=n {
        if n % d != 0 {
            continue;
        }
        if word.chunks(d).all(|c| c == &word[..d]) {
            return word[..d].to_vec();
        }
    }
    word.to_vec()
}

fn is_primitive(word: &[usize]) -> bool {
    primitive_root(word).len() == word.len()
}

fn least_rotation(word: &[usize]) -> Vec<usize> {
    let n = word.len();
    let mut best = word.to_vec();
    let mut rot = word.to_vec();
    for _ in 1..n {
        rot.rotate_left(1);
        if rot < best {
            best = rot.clone();
        }
    }
    best
}

/// Exact projection of an eventually periodic coding.
pub fn project(ifs: &RationalIfs, coding: &Coding) -> Result<ExactRational> {
    let fix = ifs.compose(coding.period())?.fixed_point();
    if coding.preperiod().is_empty() {
        Ok(fix)
    } else {
        Ok(ifs.compose(coding.preperiod())?.apply(&fix))
    }
}

/// `prod_{preperiod} q_i * (prod_{period} q_i - 1)` for the coding as given
/// (no canonicalization).
pub fn raw_intrinsic_height(ifs: &RationalIfs, coding: &Coding) -> Result<BigInt> {
    let mut pre = BigInt::one();
    for &i in coding.preperiod() {
        pre *= BigInt::from(ifs.branch(i)?.q);
    }
    let mut per = BigInt::one();
    for &i in coding.period() {
        per *= BigInt::from(ifs.branch(i)?.q);
    }
    Ok(pre * (per - BigInt::one()))
}

/// One deduplicated rational with its best known representation.
#[derive(Debug, Clone)]
pub struct InventoryEntry {
    pub value: ExactRational,
    /// Reduced denominator.
    pub height: BigInt,
    /// Minimum raw intrinsic height over the generated representations:
    /// a certified upper bound on the true intrinsic height.
    pub intrinsic_height: BigInt,
    pub witness: Coding,
}

/// Enumerates all projections with |preperiod| <= k_max, |period| <= l_max,
/// deduplicated on exact values and sorted by value.
///
/// Periods are iterated as primitive least-rotation representatives; each
/// rotation contributes its own fixed point, which yields the same value set
/// as iterating every period word directly.
pub fn enumerate_rationals(
    ifs: &RationalIfs,
    k_max: u32,
    l_max: u32,
    budget: u64,
) -> Result<Vec<InventoryEntry>> {
    if l_max == 0 {
        return Err(Error::InvalidArgument("l_max must be >= 1".into()));
    }
    let m = ifs.alphabet_len() as u64;
    let cost = m
        .checked_pow(k_max + l_max)
        .ok_or_else(|| Error::Budget("m^(k_max+l_max) overflows".into()))?;
    if cost > budget {
        return Err(Error::Budget(format!(
            "enumeration needs ~{cost} words > budget {budget}"
        )));
    }

    // All preperiod maps, identity included.
    let mut preperiods: Vec<(Vec<usize>, AffineMap)> = vec![(vec![], AffineMap::identity())];
    let mut frontier = vec![(vec![], AffineMap::identity())];
    for _ in 0..k_max {
        let mut next = Vec::new();
        for (word, map) in &frontier {
            for i in 0..ifs.alphabet_len() {
                let mut w: Vec<usize> = word.clone();
                w.push(i);
                let m2 = map.compose(&ifs.branch(i)?.into());
                next.push((w, m2));
            }
        }
        preperiods.extend(next.iter().cloned());
        frontier = next;
    }

    let mut best: BTreeMap<ExactRational, (BigInt, Coding)> = BTreeMap::new();
    let mut consider = |value: ExactRational, raw: BigInt, coding: Coding| {
        best.entry(value)
            .and_modify(|(h, w)| {
                if raw < *h {
                    *h = raw.clone();
                    *w = coding.clone();
                }
            })
            .or_insert((raw, coding));
    };

    for len in 1..=l_max as usize {
        let mut word = vec![0usize; len];
        loop {
            if is_primitive(&word) && least_rotation(&word) == word {
                let mut rot = word.clone();
                for _ in 0..len {
                    let per_map = ifs.compose(&rot)?;
                    let fix = per_map.fixed_point();
                    let per_den = per_map.ratio.denom().clone();
                    for (pre_word, pre_map) in &preperiods {
                        let value = if pre_word.is_empty() {
                            fix.clone()
                        } else {
                            pre_map.apply(&fix)
                        };
                        let raw = pre_map.ratio.denom() * (&per_den - BigInt::one());
                        let coding = Coding::new(pre_word.clone(), rot.clone())?;
                        consider(value, raw, coding);
                    }
                    rot.rotate_left(1);
                }
            }
            if !odometer(&mut word, ifs.alphabet_len()) {
                break;
            }
        }
    }

    Ok(best
        .into_iter()
        .map(|(value, (intrinsic_height, witness))| InventoryEntry {
            height: height(&value),
            value,
            intrinsic_height,
            witness,
        })
        .collect())
}

fn odometer(word: &mut [usize], alphabet: usize) -> bool {
    for pos in (0..word.len()).rev() {
        word[pos] += 1;
        if word[pos] < alphabet {
            return true;
        }
        word[pos] = 0;
    }
    false
}

/// The set of periodic-suffix projections over the overlap class of `word`:
/// `{ pi((j_{k+1}..j_n)^inf) : j in cl(word), 0 <= k <= n-1 }`.
pub fn uper(ifs: &RationalIfs, word: &[usize]) -> Result<Vec<ExactRational>> {
    let class = overlap_class(ifs, word)?;
    Ok(uper_of_class(ifs, &class))
}

/// Same as [`uper`] when the overlap class is already known.
pub fn uper_of_class(ifs: &RationalIfs, class: &[Vec<usize>]) -> Vec<ExactRational> {
    let mut values = BTreeSet::new();
    for w in class {
        for k in 0..w.len() {
            let suffix = &w[k..];
            let fix = ifs
                .compose(suffix)
                .expect("class words use valid indices")
                .fixed_point();
            values.insert(fix);
        }
    }
    values.into_iter().collect()
}

/// CSV header for inventory exports.
pub const INVENTORY_CSV_HEADER: &str =
    "value_num,value_den,height,intrinsic_height,preperiod,period";

pub fn inventory_csv_row(e: &InventoryEntry) -> String {
    format!(
        "{},{},{},{},{},{}",
        e.value.numer(),
        e.value.denom(),
        e.height,
        e.intrinsic_height,
        e.witness.preperiod_string(),
        e.witness.period_string()
    )
}

pub fn inventory_jsonl_row(e: &InventoryEntry) -> String {
    format!(
        "{{\"value\":\"{}\",\"height\":\"{}\",\"intrinsic_height\":\"{}\",\"preperiod\":\"{}\",\"period\":\"{}\"}}",
        format_rational(&e.value),
        e.height,
        e.intrinsic_height,
        e.witness.preperiod_string(),
        e.witness.period_string()
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::fixtures::*;
    use crate::rational::{rational_from_i64, rational_int};

    fn coding(pre: &[usize], per: &[usize]) -> Coding {
        Coding::new(pre.to_vec(), per.to_vec()).unwrap()
    }

    #[test]
    fn projections_match_hand_computation() {
        let ifs = cantor();
        // digits (0,2) are branches (0,1)
        assert_eq!(
            project(&ifs, &coding(&[], &[0, 1])).unwrap(),
            rational_from_i64(1, 4)
        );
        assert_eq!(
            project(&ifs, &coding(&[1], &[0])).unwrap(),
            rational_from_i64(2, 3)
        );
        for (i, b) in ifs.branches().iter().enumerate() {
            assert_eq!(project(&ifs, &coding(&[], &[i])).unwrap(), b.fixed_point());
        }
    }

    #[test]
    fn raw_heights() {
        let ifs = cantor();
        assert_eq!(
            raw_intrinsic_height(&ifs, &coding(&[], &[0, 1])).unwrap(),
            BigInt::from(8)
        );
        assert_eq!(
            raw_intrinsic_height(&ifs, &coding(&[1], &[0])).unwrap(),
            BigInt::from(6)
        );
        let mixed = mixed23();
        assert_eq!(
            raw_intrinsic_height(&mixed, &coding(&[0], &[1])).unwrap(),
            BigInt::from(4)
        );
    }

    #[test]
    fn canonicalization_is_idempotent_and_value_preserving() {
        let ifs = mixed23();
        let cases = [
            coding(&[0, 1], &[1, 0]),
            coding(&[1, 1], &[1]),
            coding(&[], &[0, 1, 0, 1]),
            coding(&[0], &[0]),
            coding(&[1, 0, 0], &[1, 0, 0]),
        ];
        for c in &cases {
            let canon = c.canonicalize();
            assert_eq!(canon.canonicalize(), canon, "idempotent for {c:?}");
            assert!(is_primitive(canon.period()));
            if let Some(&last) = canon.preperiod().last() {
                assert_ne!(last, *canon.period().last().unwrap());
            }
            assert_eq!(
                project(&ifs, c).unwrap(),
                project(&ifs, &canon).unwrap(),
                "value preserved for {c:?}"
            );
        }
        // (1,1)(1)^inf collapses to the pure fixed point
        assert_eq!(coding(&[1, 1], &[1]).canonicalize(), coding(&[], &[1]));
        // power periods reduce to the primitive root
        assert_eq!(
            coding(&[], &[0, 1, 0, 1]).canonicalize(),
            coding(&[], &[0, 1])
        );
    }

    #[test]
    fn shift_consistency() {
        let ifs = cantor();
        for per in [vec![0], vec![1], vec![0, 1], vec![1, 0, 0]] {
            let fix = project(&ifs, &coding(&[], &per)).unwrap();
            // fixed point property
            assert_eq!(ifs.compose(&per).unwrap().apply(&fix), fix);
            for pre in [vec![0], vec![1, 1], vec![0, 1, 0]] {
                let whole = project(&ifs, &coding(&pre, &per)).unwrap();
                assert_eq!(whole, ifs.compose(&pre).unwrap().apply(&fix));
            }
        }
    }

    #[test]
    fn enumerate_small_inventories() {
        let ifs = cantor();
        let inv = enumerate_rationals(&ifs, 0, 1, 1 << 20).unwrap();
        let values: Vec<ExactRational> = inv.iter().map(|e| e.value.clone()).collect();
        assert_eq!(values, vec![rational_int(0), rational_int(1)]);
        assert!(inv
            .iter()
            .all(|e| e.intrinsic_height == BigInt::from(2) && e.height == BigInt::one()));

        let inv = enumerate_rationals(&ifs, 0, 2, 1 << 20).unwrap();
        let values: BTreeSet<ExactRational> = inv.iter().map(|e| e.value.clone()).collect();
        assert!(values.contains(&rational_from_i64(1, 4)));
        assert!(values.contains(&rational_from_i64(3, 4)));
        let q14 = inv.iter().find(|e| e.value == rational_from_i64(1, 4)).unwrap();
        assert_eq!(q14.intrinsic_height, BigInt::from(8));

        let inv = enumerate_rationals(&ifs, 1, 1, 1 << 20).unwrap();
        let values: BTreeSet<ExactRational> = inv.iter().map(|e| e.value.clone()).collect();
        assert_eq!(
            values,
            [
                rational_int(0),
                rational_from_i64(1, 3),
                rational_from_i64(2, 3),
                rational_int(1)
            ]
            .into_iter()
            .collect()
        );
        let q23 = inv.iter().find(|e| e.value == rational_from_i64(2, 3)).unwrap();
        assert_eq!(q23.intrinsic_height, BigInt::from(6));
        assert_eq!(q23.height, BigInt::from(3));
    }

    /// Brute-force enumeration over every (preperiod, period) pair.
    fn full_enumeration(ifs: &RationalIfs, k_max: u32, l_max: u32) -> BTreeSet<ExactRational> {
        let m = ifs.alphabet_len();
        let mut values = BTreeSet::new();
        let mut pres: Vec<Vec<usize>> = vec![vec![]];
        for _ in 0..k_max {
            let mut next = Vec::new();
            for w in &pres {
                for i in 0..m {
                    let mut w2 = w.clone();
                    w2.push(i);
                    next.push(w2);
                }
            }
            pres.extend(next.clone());
            pres.dedup();
        }
        pres.sort();
        pres.dedup();
        for len in 1..=l_max as usize {
            let mut per = vec![0usize; len];
            loop {
                for pre in &pres {
                    let c = Coding::new(pre.clone(), per.clone()).unwrap();
                    values.insert(project(ifs, &c).unwrap());
                }
                if !odometer(&mut per, m) {
                    break;
                }
            }
        }
        values
    }

    #[test]
    fn enumeration_matches_brute_force_and_is_monotone() {
        for ifs in [cantor(), overlap3()] {
            let fast: BTreeSet<ExactRational> = enumerate_rationals(&ifs, 2, 4, 1 << 20)
                .unwrap()
                .into_iter()
                .map(|e| e.value)
                .collect();
            assert_eq!(fast, full_enumeration(&ifs, 2, 4));

            let smaller: BTreeSet<ExactRational> = enumerate_rationals(&ifs, 1, 3, 1 << 20)
                .unwrap()
                .into_iter()
                .map(|e| e.value)
                .collect();
            assert!(smaller.is_subset(&fast));
        }
    }

    #[test]
    fn inventory_invariants() {
        let ifs = overlap3();
        for e in enumerate_rationals(&ifs, 2, 3, 1 << 20).unwrap() {
            // height divides the witness raw denominator
            let raw_den = raw_intrinsic_height(&ifs, &e.witness).unwrap();
            assert_eq!(&raw_den % &e.height, BigInt::from(0), "{e:?}");
            assert!(e.intrinsic_height >= e.height, "{e:?}");
            assert_eq!(project(&ifs, &e.witness).unwrap(), e.value);
            assert_eq!(e.intrinsic_height, raw_den);
        }
    }

    #[test]
    fn budget_guard() {
        assert!(matches!(
            enumerate_rationals(&cantor(), 10, 10, 100),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn uper_examples() {
        let ifs = cantor();
        let u = uper(&ifs, &[0, 1]).unwrap();
        assert_eq!(u, vec![rational_from_i64(1, 4), rational_int(1)]);
        assert_eq!(uper(&ifs, &[0]).unwrap(), vec![rational_int(0)]);

        // digit-word (1,0) over digits {0,1,3} = branch word (1,0);
        // class {(1,0),(0,2)}; suffix periods give {3/8, 0, 3/2}.
        let ov = overlap3();
        let u = uper(&ov, &[1, 0]).unwrap();
        assert_eq!(
            u,
            vec![
                rational_int(0),
                rational_from_i64(3, 8),
                rational_from_i64(3, 2)
            ]
        );
        assert!(u.len() <= 4);
    }

    #[test]
    fn uper_size_bounds() {
        let ov = overlap3();
        for n in 1..=5usize {
            let classes = crate::ifs::level_overlap_classes(&ov, n, 1 << 20).unwrap();
            let max_class = classes.values().map(|v| v.len()).max().unwrap();
            for words in classes.values() {
                let u = uper_of_class(&ov, words);
                assert!(!u.is_empty());
                assert!(u.len() <= n * words.len());
                assert!(u.len() <= n * max_class);
            }
        }
        // Cantor: no overlaps, so #uper is at most the word length.
        let ifs = cantor();
        for w in [vec![0, 1, 1], vec![1, 1, 1], vec![0, 0, 1, 0]] {
            let u = uper(&ifs, &w).unwrap();
            assert!((1..=w.len()).contains(&u.len()));
        }
    }
}
