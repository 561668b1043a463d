//! Desk-scale dimension quantities: shrinking rates, the dimension quotient,
//! Q_{b,n} counting, box-dimension estimates, covering-series threshold
//! bracketing, and the b-adic lower-bound ball systems.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::coding::uper_of_class;
use crate::error::{Error, Result};
use crate::ifs::{level_overlap_classes, level_translates, RationalIfs};
use crate::membership::MembershipContext;
use crate::number_theory::factorize;
use crate::rational::ExactRational;

/// A non-increasing approximation function psi.
#[derive(Debug, Clone)]
pub enum ApproxFunction {
    /// psi(q) = coeff * q^(-delta)
    Power {
        coeff: ExactRational,
        delta: ExactRational,
    },
    /// Finite table of (q, psi(q)) pairs with a step-function rule: the
    /// value at the largest tabulated q not exceeding the query.
    Table(Vec<(u64, ExactRational)>),
}

impl ApproxFunction {
    pub fn power(delta: ExactRational) -> Result<ApproxFunction> {
        Self::power_with_coeff(ExactRational::one(), delta)
    }

    pub fn power_with_coeff(coeff: ExactRational, delta: ExactRational) -> Result<ApproxFunction> {
        if coeff <= ExactRational::zero() {
            return Err(Error::InvalidArgument("psi coefficient must be > 0".into()));
        }
        if delta < ExactRational::zero() {
            return Err(Error::InvalidArgument("psi exponent must be >= 0".into()));
        }
        Ok(ApproxFunction::Power { coeff, delta })
    }

    /// Positive table with strictly increasing keys. Values are allowed to
    /// oscillate so that mixed-rate gauges can be probed; operations that
    /// genuinely need monotonicity (ball radii) re-check where it matters.
    pub fn table(entries: Vec<(u64, ExactRational)>) -> Result<ApproxFunction> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("empty psi table".into()));
        }
        for w in entries.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidArgument("psi table keys must increase".into()));
            }
        }
        if entries.iter().any(|(_, v)| v <= &ExactRational::zero()) {
            return Err(Error::InvalidArgument("psi must be positive".into()));
        }
        Ok(ApproxFunction::Table(entries))
    }

    pub fn eval_f64(&self, q: f64) -> f64 {
        match self {
            ApproxFunction::Power { coeff, delta } => {
                let c = coeff.to_f64().unwrap_or(f64::NAN);
                let d = delta.to_f64().unwrap_or(f64::NAN);
                c * q.powf(-d)
            }
            ApproxFunction::Table(entries) => {
                let mut value = &entries[0].1;
                for (k, v) in entries {
                    if (*k as f64) <= q {
                        value = v;
                    } else {
                        break;
                    }
                }
                value.to_f64().unwrap_or(f64::NAN)
            }
        }
    }

    /// Exact evaluation at an integer argument. Available for power gauges
    /// with integer exponent and for tables.
    pub fn eval_exact(&self, q: &BigInt) -> Result<ExactRational> {
        match self {
            ApproxFunction::Power { coeff, delta } => {
                if !delta.denom().is_one() {
                    return Err(Error::InvalidArgument(
                        "exact psi values need an integer exponent".into(),
                    ));
                }
                let d = delta
                    .numer()
                    .to_u32()
                    .ok_or_else(|| Error::InvalidArgument("psi exponent too large".into()))?;
                Ok(coeff * ExactRational::new(BigInt::one(), q.pow(d)))
            }
            ApproxFunction::Table(entries) => {
                let mut value = &entries[0].1;
                for (k, v) in entries {
                    if &BigInt::from(*k) <= q {
                        value = v;
                    } else {
                        break;
                    }
                }
                Ok(value.clone())
            }
        }
    }
}

/// The shrinking rate estimate for psi.
#[derive(Debug, Clone)]
pub struct DeltaEstimate {
    pub value: f64,
    /// Exact rate for power gauges.
    pub exact: Option<ExactRational>,
    /// True when the value is a finite-table liminf proxy.
    pub is_estimate: bool,
}

/// liminf of -log psi(q) / log q. Exact for powers; for tables, the minimum
/// over the table tail starting at `tail_start`.
pub fn delta_psi(psi: &ApproxFunction, tail_start: u64) -> DeltaEstimate {
    match psi {
        ApproxFunction::Power { delta, .. } => DeltaEstimate {
            value: delta.to_f64().unwrap_or(f64::NAN),
            exact: Some(delta.clone()),
            is_estimate: false,
        },
        ApproxFunction::Table(entries) => {
            let mut best = f64::INFINITY;
            for (q, v) in entries {
                if *q < tail_start.max(2) {
                    continue;
                }
                let rate = -v.to_f64().unwrap_or(f64::NAN).ln() / (*q as f64).ln();
                best = best.min(rate);
            }
            if best == f64::INFINITY {
                // table entirely below the tail start: fall back to the
                // last entry
                let (q, v) = entries.last().unwrap();
                best = -v.to_f64().unwrap_or(f64::NAN).ln() / (*q as f64).max(2.0).ln();
            }
            DeltaEstimate {
                value: best,
                exact: None,
                is_estimate: true,
            }
        }
    }
}

/// dim_K / max{1, delta}.
pub fn dimension_formula(dim_k: f64, delta: f64) -> f64 {
    dim_k / delta.max(1.0)
}

/// The series threshold for power gauges in the non-empty-interior regime:
/// s(psi_delta) = 2/delta, independent of the distinct-prime-factor cap
/// (prime density already saturates the count lower bound).
#[derive(Debug, Clone)]
pub struct SPsi {
    pub value: f64,
    pub exact: Option<ExactRational>,
    pub is_estimate: bool,
}

pub fn s_psi(psi: &ApproxFunction) -> SPsi {
    let d = delta_psi(psi, 2);
    match (&d.exact, d.value) {
        (Some(exact), _) if exact.is_zero() => SPsi {
            value: f64::INFINITY,
            exact: None,
            is_estimate: false,
        },
        (Some(exact), _) => SPsi {
            value: 2.0 / d.value,
            exact: Some(ExactRational::from_integer(BigInt::from(2)) / exact),
            is_estimate: false,
        },
        (None, v) => SPsi {
            value: 2.0 / v,
            exact: None,
            is_estimate: true,
        },
    }
}

/// One level of the Q_{b,n}(S) count.
#[derive(Debug, Clone)]
pub struct CountQRow {
    pub n: u32,
    /// Denominators q in (b^{n-1}, b^n] with some coprime p/q in S mod 1.
    pub qs: Vec<u64>,
    pub count: u64,
    /// log(count) / (n log b); 0 when the count is 0.
    pub log_ratio: f64,
    /// False when the fiber budget forced the coding-side fallback, which
    /// only certifies a subset.
    pub complete: bool,
}

pub const DEFAULT_FIBER_SCAN_CAP: u64 = 100_000;

/// Exact Q_{b,n,P_N}(S) count via whole-fiber scans (S = attractor mod 1).
pub fn count_q(
    ctx: &MembershipContext,
    n: u32,
    omega_max: Option<u32>,
    fiber_cap: u64,
) -> Result<CountQRow> {
    let b = ctx.ifs().require_homogeneous()?;
    if n == 0 {
        return Err(Error::InvalidArgument("level must be >= 1".into()));
    }
    let hi = b
        .checked_pow(n)
        .filter(|&x| x <= fiber_cap)
        .ok_or_else(|| {
            Error::Budget(format!(
                "q range for n={n} exceeds the fiber scan cap {fiber_cap}"
            ))
        })?;
    let lo = b.pow(n - 1);
    let range: Vec<u64> = (lo + 1..=hi).collect();
    let flags: Vec<Result<bool>> = range
        .par_iter()
        .map(|&q| {
            if let Some(cap) = omega_max {
                if factorize(q).omega() > cap {
                    return Ok(false);
                }
            }
            Ok(!ctx.members_for_denominator(q, true)?.is_empty())
        })
        .collect();
    let mut qs = Vec::new();
    for (q, f) in range.iter().zip(flags) {
        if f? {
            qs.push(*q);
        }
    }
    let count = qs.len() as u64;
    let log_ratio = if count == 0 {
        0.0
    } else {
        (count as f64).ln() / (n as f64 * (b as f64).ln())
    };
    Ok(CountQRow {
        n,
        qs,
        count,
        log_ratio,
        complete: true,
    })
}

/// log(#distinct level-n maps) / (n log b). When the count is a perfect
/// power c^j the exponent fraction j/n is reduced first, so exactly
/// geometric counts give bit-stable values (full digit sets give exactly 1).
pub fn box_dimension_estimate(ifs: &RationalIfs, n: u32) -> Result<f64> {
    let b = ifs.require_homogeneous()?;
    let count = level_translates(ifs, n)?.len() as u64;
    if count == 1 {
        return Ok(0.0);
    }
    let (c, j) = largest_perfect_power(count);
    let g = gcd_u32(j, n);
    Ok(((j / g) as f64 * (c as f64).ln()) / ((n / g) as f64 * (b as f64).ln()))
}

fn gcd_u32(a: u32, b: u32) -> u32 {
    a.gcd(&b)
}

/// count = c^j with j maximal (j = 1 when count is not a perfect power).
fn largest_perfect_power(count: u64) -> (u64, u32) {
    for j in (2..=63u32).rev() {
        let c = (count as f64).powf(1.0 / j as f64).round() as u64;
        for cand in [c.saturating_sub(1), c, c + 1] {
            if cand >= 2 && cand.checked_pow(j) == Some(count) {
                return (cand, j);
            }
        }
    }
    (count, 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesMode {
    /// sum over n of sum_{q in Q_{b,n,N}} #{p : p/q in S} * psi(q)^s
    Extrinsic,
    /// sum over n of sum_{words at level n} #Uper * eta(cyl diameter)^s,
    /// with eta(r) = psi(1/r)
    Intrinsic,
}

#[derive(Debug, Clone)]
pub struct SeriesRow {
    pub n: u32,
    pub term: f64,
    pub partial: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Converging,
    Diverging,
}

#[derive(Debug, Clone)]
pub struct SeriesRun {
    pub s: f64,
    pub rows: Vec<SeriesRow>,
    /// Long-baseline geometric ratio of increments; >= 1 reads as divergence.
    pub trend_ratio: f64,
    /// Heuristic verdict from finite partial sums; never a proof.
    pub verdict: Verdict,
}

/// Caches the per-level weights so that threshold bisection re-evaluates
/// cheaply: intrinsic levels carry (sum of #Uper over words, diameter),
/// extrinsic levels carry (q, coprime member count) pairs.
pub struct SeriesContext<'a> {
    ctx: &'a MembershipContext,
    mode: SeriesMode,
    omega_max: Option<u32>,
    word_budget: u64,
    fiber_cap: u64,
    intrinsic: Vec<(f64, f64)>,
    extrinsic: Vec<Vec<(u64, u64)>>,
    levels_built: u32,
}

impl<'a> SeriesContext<'a> {
    pub fn new(
        ctx: &'a MembershipContext,
        mode: SeriesMode,
        omega_max: Option<u32>,
        word_budget: u64,
        fiber_cap: u64,
    ) -> Result<SeriesContext<'a>> {
        ctx.ifs().require_homogeneous()?;
        Ok(SeriesContext {
            ctx,
            mode,
            omega_max,
            word_budget,
            fiber_cap,
            intrinsic: Vec::new(),
            extrinsic: Vec::new(),
            levels_built: 0,
        })
    }

    fn build_to(&mut self, n_max: u32) -> Result<()> {
        let ifs = self.ctx.ifs();
        let b = ifs.require_homogeneous()?;
        let hull_width = ifs.hull().width().to_f64().unwrap_or(1.0);
        for n in (self.levels_built + 1)..=n_max {
            match self.mode {
                SeriesMode::Intrinsic => {
                    let classes = level_overlap_classes(ifs, n as usize, self.word_budget)?;
                    let mut weight = 0f64;
                    for words in classes.values() {
                        let u = uper_of_class(ifs, words).len() as f64;
                        weight += u * words.len() as f64;
                    }
                    let diam = hull_width * (b as f64).powi(-(n as i32));
                    self.intrinsic.push((weight, diam));
                }
                SeriesMode::Extrinsic => {
                    let row_qs = {
                        let lo = b.pow(n - 1);
                        let hi = b.checked_pow(n).filter(|&x| x <= self.fiber_cap).ok_or_else(
                            || {
                                Error::Budget(format!(
                                    "extrinsic series level {n} exceeds fiber cap"
                                ))
                            },
                        )?;
                        let range: Vec<u64> = (lo + 1..=hi).collect();
                        let counts: Vec<Result<u64>> = range
                            .par_iter()
                            .map(|&q| {
                                if let Some(cap) = self.omega_max {
                                    if factorize(q).omega() > cap {
                                        return Ok(0);
                                    }
                                }
                                Ok(self.ctx.members_for_denominator(q, true)?.len() as u64)
                            })
                            .collect();
                        let mut out = Vec::new();
                        for (q, c) in range.iter().zip(counts) {
                            let c = c?;
                            if c > 0 {
                                out.push((*q, c));
                            }
                        }
                        out
                    };
                    self.extrinsic.push(row_qs);
                }
            }
            self.levels_built = n;
        }
        Ok(())
    }

    /// Partial sums at exponent s with the convergence-trend verdict.
    pub fn evaluate(&mut self, psi: &ApproxFunction, s: f64, n_max: u32) -> Result<SeriesRun> {
        if s <= 0.0 {
            return Err(Error::InvalidArgument("series exponent must be > 0".into()));
        }
        self.build_to(n_max)?;
        let mut rows = Vec::with_capacity(n_max as usize);
        let mut partial = 0f64;
        for n in 1..=n_max {
            let term = match self.mode {
                SeriesMode::Intrinsic => {
                    let (weight, diam) = self.intrinsic[(n - 1) as usize];
                    // eta(r) = psi(1/r)
                    weight * psi.eval_f64(1.0 / diam).powf(s)
                }
                SeriesMode::Extrinsic => self.extrinsic[(n - 1) as usize]
                    .iter()
                    .map(|&(q, c)| c as f64 * psi.eval_f64(q as f64).powf(s))
                    .sum(),
            };
            partial += term;
            rows.push(SeriesRow { n, term, partial });
        }
        // Trend on the exponential part only: the per-level weights carry a
        // ~linear polynomial factor (word count times suffix multiplicity)
        // which never affects convergence, so compare terms divided by n
        // over a long baseline.
        let n_lo = (n_max / 2).max(1);
        let base = rows
            .iter()
            .take(n_lo as usize)
            .rev()
            .find(|r| r.term > 0.0)
            .map(|r| (r.n, r.term / r.n as f64));
        let last = rows
            .iter()
            .rev()
            .find(|r| r.term > 0.0)
            .map(|r| (r.n, r.term / r.n as f64));
        let trend_ratio = match (base, last) {
            (Some((n0, t0)), Some((n1, t1))) if n1 > n0 => {
                (t1 / t0).powf(1.0 / (n1 - n0) as f64)
            }
            _ => 0.0,
        };
        let verdict = if trend_ratio >= 1.0 {
            Verdict::Diverging
        } else {
            Verdict::Converging
        };
        Ok(SeriesRun {
            s,
            rows,
            trend_ratio,
            verdict,
        })
    }

    /// Bisection bracket for the convergence threshold s*: shrinks
    /// [s_lo, s_hi] (which must straddle the verdict flip) to width <= tol.
    pub fn threshold_bracket(
        &mut self,
        psi: &ApproxFunction,
        mut s_lo: f64,
        mut s_hi: f64,
        n_max: u32,
        tol: f64,
    ) -> Result<(f64, f64)> {
        if !(s_lo > 0.0 && s_hi > s_lo) {
            return Err(Error::InvalidArgument("need 0 < s_lo < s_hi".into()));
        }
        let lo_run = self.evaluate(psi, s_lo, n_max)?;
        let hi_run = self.evaluate(psi, s_hi, n_max)?;
        if lo_run.verdict != Verdict::Diverging || hi_run.verdict != Verdict::Converging {
            return Err(Error::InvalidArgument(format!(
                "bracket [{s_lo}, {s_hi}] does not straddle the verdict flip"
            )));
        }
        while s_hi - s_lo > tol {
            let mid = 0.5 * (s_lo + s_hi);
            match self.evaluate(psi, mid, n_max)?.verdict {
                Verdict::Diverging => s_lo = mid,
                Verdict::Converging => s_hi = mid,
            }
        }
        Ok((s_lo, s_hi))
    }
}

/// One ball of a lower-bound system.
#[derive(Debug, Clone)]
pub struct Ball {
    pub stage: u32,
    pub center: ExactRational,
    pub radius: ExactRational,
    /// Reduced denominator of the center.
    pub height: BigInt,
    pub omega_height: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedKind {
    /// den(seed) divides b^k: radii use psi(b^{n+k}).
    BAdic { k: u32 },
    /// den(seed) divides b^k (b-1): radii use psi(b^{n+k} (b-1)).
    UnitShifted { k: u32 },
}

#[derive(Debug, Clone)]
pub struct StageSummary {
    pub stage: u32,
    pub count: usize,
    pub min_gap: Option<ExactRational>,
    pub max_omega: u32,
    pub radius: ExactRational,
}

#[derive(Debug, Clone)]
pub struct BallSystem {
    pub seed: ExactRational,
    pub seed_kind: SeedKind,
    pub balls: Vec<Ball>,
    pub stages: Vec<StageSummary>,
}

/// Generates the b-adic ball system seeded at a member rational whose
/// denominator divides b^k or b^k (b-1): all balls B(f_w(seed), psi(h_n))
/// over words up to `depth`, with per-stage dedup of centers.
pub fn badic_ball_system(
    ctx: &MembershipContext,
    seed: &ExactRational,
    psi: &ApproxFunction,
    depth: u32,
) -> Result<BallSystem> {
    let ifs = ctx.ifs();
    let b = ifs.require_homogeneous()?;
    if depth == 0 {
        return Err(Error::InvalidArgument("depth must be >= 1".into()));
    }
    if ctx.is_member(seed)?.is_none() {
        return Err(Error::InvalidArgument(format!(
            "seed {seed} is not in the attractor"
        )));
    }
    let seed_kind = classify_seed(seed.denom(), b)?;

    // prime support of b and b-1 for exact omega of heights
    let mut support: BTreeSet<u64> = factorize(b).factors().iter().map(|&(p, _)| p).collect();
    support.extend(factorize(b - 1).factors().iter().map(|&(p, _)| p));
    let omega_of = |h: &BigInt| -> u32 {
        support
            .iter()
            .filter(|&&p| (h % BigInt::from(p)).is_zero())
            .count() as u32
    };

    let mut balls = Vec::new();
    let mut stages = Vec::new();
    let mut frontier: BTreeSet<ExactRational> = BTreeSet::new();
    frontier.insert(seed.clone());
    for stage in 1..=depth {
        let mut next = BTreeSet::new();
        for x in &frontier {
            for branch in ifs.branches() {
                let m: crate::ifs::AffineMap = (*branch).into();
                next.insert(m.apply(x));
            }
        }
        frontier = next;
        let k = match seed_kind {
            SeedKind::BAdic { k } => k,
            SeedKind::UnitShifted { k } => k,
        };
        let mut param = BigInt::from(b).pow(stage + k);
        if matches!(seed_kind, SeedKind::UnitShifted { .. }) {
            param *= BigInt::from(b - 1);
        }
        let radius = psi.eval_exact(&param)?;
        if radius <= ExactRational::zero() {
            return Err(Error::InvalidArgument("psi must be positive".into()));
        }

        let centers: Vec<&ExactRational> = frontier.iter().collect();
        let mut min_gap: Option<ExactRational> = None;
        for w in centers.windows(2) {
            let gap = w[1] - w[0];
            if min_gap.as_ref().map_or(true, |g| &gap < g) {
                min_gap = Some(gap);
            }
        }
        let mut max_omega = 0;
        for c in &centers {
            let height = c.denom().clone();
            let om = omega_of(&height);
            max_omega = max_omega.max(om);
            balls.push(Ball {
                stage,
                center: (*c).clone(),
                radius: radius.clone(),
                height,
                omega_height: om,
            });
        }
        stages.push(StageSummary {
            stage,
            count: centers.len(),
            min_gap,
            max_omega,
            radius,
        });
    }
    Ok(BallSystem {
        seed: seed.clone(),
        seed_kind,
        balls,
        stages,
    })
}

fn classify_seed(den: &BigInt, b: u64) -> Result<SeedKind> {
    let b_big = BigInt::from(b);
    let unit = BigInt::from(b - 1);
    let mut power = BigInt::one();
    for k in 0..=64u32 {
        if (&power % den).is_zero() {
            return Ok(SeedKind::BAdic { k });
        }
        if ((&power * &unit) % den).is_zero() {
            return Ok(SeedKind::UnitShifted { k });
        }
        power *= &b_big;
    }
    Err(Error::InvalidArgument(format!(
        "seed denominator {den} does not divide b^k or b^k(b-1)"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::fixtures::*;
    use crate::rational::{rational_from_i64, rational_int};

    fn psi_pow(delta: i64) -> ApproxFunction {
        ApproxFunction::power(rational_from_i64(delta, 1)).unwrap()
    }

    #[test]
    fn delta_psi_examples() {
        let d = delta_psi(&psi_pow(2), 2);
        assert_eq!(d.exact, Some(rational_from_i64(2, 1)));
        assert!(!d.is_estimate);

        let scaled =
            ApproxFunction::power_with_coeff(rational_from_i64(5, 1), rational_from_i64(3, 1))
                .unwrap();
        assert_eq!(delta_psi(&scaled, 2).exact, Some(rational_from_i64(3, 1)));

        // tabulated q^-2 for even q, q^-4 for odd: liminf estimate 2, the
        // even subsequence dominating the tail minimum
        let mut entries = Vec::new();
        for q in 2..=60u64 {
            let d = if q % 2 == 0 { 2 } else { 4 };
            entries.push((q, ExactRational::new(BigInt::one(), BigInt::from(q).pow(d))));
        }
        let t = ApproxFunction::table(entries).unwrap();
        let d = delta_psi(&t, 10);
        assert!(d.is_estimate);
        assert!((d.value - 2.0).abs() < 1e-9, "liminf estimate {}", d.value);
    }

    #[test]
    fn dimension_formula_and_threshold() {
        let dim = 2f64.ln() / 3f64.ln();
        assert!((dimension_formula(dim, 3.0) - 0.21031).abs() < 1e-4);
        assert_eq!(dimension_formula(dim, 0.5), dim);
        assert_eq!(dimension_formula(dim, 1.0), dim);
        // monotone non-increasing in delta
        let mut prev = f64::INFINITY;
        for d in [0.2, 0.9, 1.0, 1.5, 2.0, 4.0] {
            let v = dimension_formula(dim, d);
            assert!(v <= prev);
            prev = v;
        }

        let s = s_psi(&psi_pow(3));
        assert_eq!(s.exact, Some(rational_from_i64(2, 3)));
        let s = s_psi(&ApproxFunction::power(rational_from_i64(0, 1)).unwrap());
        assert!(s.value.is_infinite());
    }

    #[test]
    fn count_q_examples() {
        let ctx = MembershipContext::new(cantor());
        let r1 = count_q(&ctx, 1, None, DEFAULT_FIBER_SCAN_CAP).unwrap();
        assert_eq!(r1.qs, vec![3]);
        let r2 = count_q(&ctx, 2, None, DEFAULT_FIBER_SCAN_CAP).unwrap();
        assert_eq!(r2.qs, vec![4, 9]);
        // omega filter: both 4 and 9 are prime powers
        let r2f = count_q(&ctx, 2, Some(1), DEFAULT_FIBER_SCAN_CAP).unwrap();
        assert_eq!(r2f.qs, vec![4, 9]);
        // budget guard
        assert!(count_q(&ctx, 20, None, DEFAULT_FIBER_SCAN_CAP).is_err());
    }

    #[test]
    fn box_dimension_examples() {
        let ifs = cantor();
        let est = box_dimension_estimate(&ifs, 10).unwrap();
        assert_eq!(est, 2f64.ln() / 3f64.ln());
        let full = full3();
        assert_eq!(box_dimension_estimate(&full, 5).unwrap(), 1.0);
        let ov = overlap3();
        let e2 = box_dimension_estimate(&ov, 2).unwrap();
        assert!((e2 - 8f64.ln() / (2.0 * 3f64.ln())).abs() < 1e-12);
        // Fekete: non-increasing over the tested range
        let mut prev = f64::INFINITY;
        for n in 1..=8 {
            let e = box_dimension_estimate(&ov, n).unwrap();
            assert!(e <= prev + 1e-12, "n={n}: {e} > {prev}");
            prev = e;
        }
    }

    #[test]
    fn perfect_power_reduction() {
        assert_eq!(largest_perfect_power(1024), (2, 10));
        assert_eq!(largest_perfect_power(243), (3, 5));
        assert_eq!(largest_perfect_power(8), (2, 3));
        assert_eq!(largest_perfect_power(12), (12, 1));
        assert_eq!(largest_perfect_power(36), (6, 2));
    }

    #[test]
    fn intrinsic_series_brackets_the_dimension_quotient() {
        let ctx = MembershipContext::new(cantor());
        let dim = 2f64.ln() / 3f64.ln();
        for delta in [2i64, 3] {
            let mut sc =
                SeriesContext::new(&ctx, SeriesMode::Intrinsic, None, 1 << 20, 1 << 20).unwrap();
            let psi = psi_pow(delta);
            let (lo, hi) = sc
                .threshold_bracket(&psi, 0.02, 1.2, 12, 0.01)
                .unwrap();
            let target = dim / delta as f64;
            assert!(
                lo - 0.05 <= target && target <= hi + 0.05,
                "delta={delta}: target {target} vs bracket [{lo}, {hi}]"
            );
        }
    }

    #[test]
    fn series_verdicts() {
        let ctx = MembershipContext::new(cantor());
        let dim = 2f64.ln() / 3f64.ln();
        let mut sc =
            SeriesContext::new(&ctx, SeriesMode::Intrinsic, None, 1 << 20, 1 << 20).unwrap();
        let psi = psi_pow(3);
        let conv = sc.evaluate(&psi, dim / 3.0 + 0.1, 12).unwrap();
        assert_eq!(conv.verdict, Verdict::Converging);
        let div = sc.evaluate(&psi, dim / 3.0 - 0.1, 12).unwrap();
        assert_eq!(div.verdict, Verdict::Diverging);

        // psi = 1 (table with a single constant entry): terms are counts
        let one = ApproxFunction::table(vec![(1, ExactRational::one())]).unwrap();
        let run = sc.evaluate(&one, 1.0, 10).unwrap();
        assert_eq!(run.verdict, Verdict::Diverging);
    }

    #[test]
    fn extrinsic_series_runs() {
        let ctx = MembershipContext::new(cantor());
        let mut sc =
            SeriesContext::new(&ctx, SeriesMode::Extrinsic, None, 1 << 20, 10_000).unwrap();
        let run = sc.evaluate(&psi_pow(3), 0.4, 8).unwrap();
        assert_eq!(run.rows.len(), 8);
        // terms at n=1: q=3 contributes 2 points (1/3, 2/3): 2 * 3^(-1.2)
        let expect = 2.0 * 3f64.powf(-3.0 * 0.4);
        assert!((run.rows[0].term - expect).abs() < 1e-12);
    }

    #[test]
    fn ball_system_examples() {
        let ctx = MembershipContext::new(cantor());
        // seed 0, depth 2, psi_2: stage-2 centers {0, 2/9, 2/3, 8/9},
        // radius 1/81
        let sys = badic_ball_system(&ctx, &rational_int(0), &psi_pow(2), 2).unwrap();
        assert_eq!(sys.seed_kind, SeedKind::BAdic { k: 0 });
        let stage2: Vec<&Ball> = sys.balls.iter().filter(|b| b.stage == 2).collect();
        let centers: Vec<ExactRational> = stage2.iter().map(|b| b.center.clone()).collect();
        assert_eq!(
            centers,
            vec![
                rational_int(0),
                rational_from_i64(2, 9),
                rational_from_i64(2, 3),
                rational_from_i64(8, 9)
            ]
        );
        assert!(stage2
            .iter()
            .all(|b| b.radius == rational_from_i64(1, 81)));

        // seed 1 = 2/(3-1) has denominator 1: b-adic with k = 0, so depth 1
        // gives centers {1/3, 1} and radius psi(3) = 1/3
        let sys = badic_ball_system(&ctx, &rational_int(1), &psi_pow(1), 1).unwrap();
        let centers: Vec<ExactRational> = sys.balls.iter().map(|b| b.center.clone()).collect();
        assert_eq!(centers, vec![rational_from_i64(1, 3), rational_int(1)]);
        assert_eq!(sys.balls[0].radius, rational_from_i64(1, 3));

        // every emitted height has omega <= omega(3) + omega(2) = 2
        let sys = badic_ball_system(&ctx, &rational_int(1), &psi_pow(2), 5).unwrap();
        for b in &sys.balls {
            assert!(b.omega_height <= 2);
        }
        // radii non-increasing over stages
        for w in sys.stages.windows(2) {
            assert!(w[1].radius <= w[0].radius);
        }
    }

    #[test]
    fn ball_system_rejects_bad_seeds() {
        let ctx = MembershipContext::new(cantor());
        // 1/2 is not a member
        assert!(badic_ball_system(&ctx, &rational_from_i64(1, 2), &psi_pow(2), 2).is_err());
        // 1/13 is a member but 13 does not divide 3^k or 3^k * 2
        assert!(badic_ball_system(&ctx, &rational_from_i64(1, 13), &psi_pow(2), 2).is_err());
        // non-integer exponent cannot give exact radii
        let frac = ApproxFunction::power(rational_from_i64(5, 2)).unwrap();
        assert!(badic_ball_system(&ctx, &rational_int(0), &frac, 2).is_err());
    }

    #[test]
    fn unit_shifted_seed_classification() {
        let ctx = MembershipContext::new(cantor());
        // 1/4 is a member; 4 divides 3^0 * 2? no; 4 | 3^k * 2 never (v_2 = 2)
        assert!(matches!(
            classify_seed(&BigInt::from(2), 3),
            Ok(SeedKind::UnitShifted { k: 0 })
        ));
        assert!(classify_seed(&BigInt::from(4), 3).is_err());
        assert!(badic_ball_system(&ctx, &rational_from_i64(1, 4), &psi_pow(2), 2).is_err());
        // mixed: den 6 = 2 * 3 divides 3^1 * 2
        assert!(matches!(
            classify_seed(&BigInt::from(6), 3),
            Ok(SeedKind::UnitShifted { k: 1 })
        ));
    }
}
