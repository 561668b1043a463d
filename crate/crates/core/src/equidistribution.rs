//! Orbits of x -> b*x mod 1 on rational points, exact extremal discrepancy,
//! certified Weyl sums, and the Erdos-Turan upper bound as a computable
//! functional.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::hp::{Fp, FpCtx, DEFAULT_BITS};
use crate::number_theory::{mult_order, mulmod};
use crate::rational::ExactRational;

/// The multiplication-by-b orbit of p/q on the torus, as the indexed list
/// u_k = b^k p/q mod 1 for 0 <= k < O_q(b).
#[derive(Debug, Clone)]
pub struct Orbit {
    pub b: u64,
    pub q: u64,
    pub p: u64,
    /// Numerators over the common denominator q, in orbit order.
    pub numerators: Vec<u64>,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    pub fn points(&self) -> Vec<ExactRational> {
        self.numerators
            .iter()
            .map(|&t| ExactRational::new(BigInt::from(t), BigInt::from(self.q)))
            .collect()
    }
}

/// Builds the orbit of p/q under multiplication by b; the length is the
/// multiplicative order of b modulo q.
pub fn orbit(b: u64, p: u64, q: u64) -> Result<Orbit> {
    if q == 0 {
        return Err(Error::InvalidArgument("q must be >= 1".into()));
    }
    if p >= q && !(q == 1 && p == 0) {
        return Err(Error::InvalidArgument("need 0 <= p < q".into()));
    }
    let order = mult_order(q, b)?;
    let mut numerators = Vec::with_capacity(order as usize);
    let mut t = p % q.max(1);
    for _ in 0..order {
        numerators.push(t);
        t = mulmod(t, b % q.max(2), q.max(2)) % q.max(1);
    }
    if q == 1 {
        numerators = vec![0];
    }
    Ok(Orbit { b, q, p, numerators })
}

/// Exact extremal discrepancy of a finite point multiset in [0, 1).
#[derive(Debug, Clone)]
pub struct DiscrepancyReport {
    pub n_points: usize,
    pub discrepancy: ExactRational,
    /// Witness interval endpoints.
    pub witness: (ExactRational, ExactRational),
    /// True when a closed interval attains the value; false when the
    /// supremum is only approached by intervals shrinking to the open gap
    /// between the witnesses.
    pub attained: bool,
}

/// Two-scan exact discrepancy: the supremum over subintervals of
/// |empirical proportion - length| is attained either by a closed interval
/// spanning a block of points (overfill), or approached by open gaps
/// between consecutive points extended with virtual endpoints 0 and 1
/// (underfill). Both scans are exact over rationals.
pub fn discrepancy(points: &[ExactRational]) -> Result<DiscrepancyReport> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty point set".into()));
    }
    for p in points {
        if p < &ExactRational::zero() || p >= &ExactRational::one() {
            return Err(Error::InvalidArgument(format!(
                "point {p} outside [0, 1)"
            )));
        }
    }
    let mut xs: Vec<ExactRational> = points.to_vec();
    xs.sort();
    let n = xs.len();
    let n_rat = |k: i64| ExactRational::new(BigInt::from(k), BigInt::from(n as i64));

    // overfill: max over i <= j with x_i > 0 of (j-i+1)/n - (x_j - x_i)
    //         = [(j+1)/n - x_j] + [x_i - i/n]   (1-based indices)
    let mut best_over: Option<(ExactRational, usize, usize)> = None;
    let mut best_left: Option<(ExactRational, usize)> = None;
    for (idx, x) in xs.iter().enumerate() {
        let i = idx + 1;
        if x > &ExactRational::zero() {
            let term = x - n_rat(i as i64);
            if best_left.as_ref().map_or(true, |(t, _)| term > *t) {
                best_left = Some((term, idx));
            }
        }
        if let Some((left_term, left_idx)) = &best_left {
            let value = n_rat(i as i64 + 1) - x + left_term;
            if best_over.as_ref().map_or(true, |(v, _, _)| value > *v) {
                best_over = Some((value, *left_idx, idx));
            }
        }
    }

    // underfill with virtual endpoints x_0 = 0 and x_{n+1} = 1:
    // max over i < j of (x_j - x_i) - (j-i-1)/n
    //   = [x_j - j/n] + [i/n - x_i] + 1/n
    let ext = |k: usize| -> ExactRational {
        if k == 0 {
            ExactRational::zero()
        } else if k == n + 1 {
            ExactRational::one()
        } else {
            xs[k - 1].clone()
        }
    };
    let mut best_under: Option<(ExactRational, usize, usize)> = None;
    let mut best_left_u: Option<(ExactRational, usize)> = None;
    for j in 0..=(n + 1) {
        if j > 0 {
            if let Some((left_term, left_idx)) = &best_left_u {
                let value = ext(j) - n_rat(j as i64) + n_rat(1) + left_term;
                if best_under.as_ref().map_or(true, |(v, _, _)| value > *v) {
                    best_under = Some((value, *left_idx, j));
                }
            }
        }
        let term = n_rat(j as i64) - ext(j);
        if best_left_u.as_ref().map_or(true, |(t, _)| term > *t) {
            best_left_u = Some((term, j));
        }
    }

    let (under_val, ui, uj) = best_under.expect("n >= 1 always yields a gap candidate");
    let report = match best_over {
        Some((over_val, oi, oj)) if over_val >= under_val => DiscrepancyReport {
            n_points: n,
            discrepancy: over_val.max(ExactRational::zero()),
            witness: (xs[oi].clone(), xs[oj].clone()),
            attained: true,
        },
        _ => DiscrepancyReport {
            n_points: n,
            discrepancy: under_val.max(ExactRational::zero()),
            witness: (ext(ui), ext(uj)),
            attained: false,
        },
    };
    Ok(report)
}

/// A value with a certified rational enclosure.
#[derive(Debug, Clone)]
pub struct Certified {
    pub lo: ExactRational,
    pub hi: ExactRational,
}

impl Certified {
    fn from_fp(ctx: &FpCtx, v: &Fp) -> Certified {
        let (lo, hi) = ctx.to_interval(v);
        Certified { lo, hi }
    }

    pub fn approx(&self) -> f64 {
        ((&self.lo + &self.hi) / ExactRational::from_integer(BigInt::from(2)))
            .to_f64()
            .unwrap_or(f64::NAN)
    }

    pub fn error_bound(&self) -> ExactRational {
        (&self.hi - &self.lo) / ExactRational::from_integer(BigInt::from(2))
    }

    pub fn contains(&self, r: &ExactRational) -> bool {
        &self.lo <= r && r <= &self.hi
    }

    pub fn definitely_ge(&self, r: &ExactRational) -> bool {
        &self.lo >= r
    }
}

/// |sum over points of exp(2 pi i j u)| with a certified enclosure.
///
/// When the points share a moderate common denominator Q the roots of unity
/// are tabulated from one certified evaluation of exp(2 pi i / Q); otherwise
/// each phase is evaluated directly. Either way the error term is tracked
/// through every operation.
pub fn weyl_sum(points: &[ExactRational], j: u64, bits: u32) -> Result<Certified> {
    if j == 0 {
        return Err(Error::InvalidArgument("frequency j must be >= 1".into()));
    }
    if points.is_empty() {
        return Err(Error::InvalidArgument("empty point set".into()));
    }
    let ctx = FpCtx::new(bits);
    let (re, im) = weyl_sum_components(&ctx, points, j)?;
    let mag = ctx.magnitude(&re, &im);
    Ok(Certified::from_fp(&ctx, &mag))
}

const TABLE_DENOM_CAP: u64 = 1 << 17;

fn weyl_sum_components(ctx: &FpCtx, points: &[ExactRational], j: u64) -> Result<(Fp, Fp)> {
    // common denominator, if it stays small
    let mut lcm = BigInt::one();
    for p in points {
        lcm = lcm.lcm(p.denom());
        if lcm > BigInt::from(TABLE_DENOM_CAP) {
            break;
        }
    }
    let mut re = ctx.zero();
    let mut im = ctx.zero();
    if let Some(q) = lcm.to_u64().filter(|&q| q <= TABLE_DENOM_CAP) {
        let table = roots_of_unity(ctx, q);
        for p in points {
            let t = (p.numer() * (q / p.denom().to_u64().unwrap())).mod_floor(&BigInt::from(q));
            let idx = mulmod(t.to_u64().unwrap(), j % q.max(1), q.max(1)) as usize;
            re = ctx.add(&re, &table[idx].0);
            im = ctx.add(&im, &table[idx].1);
        }
    } else {
        let jr = ExactRational::from_integer(BigInt::from(j));
        for p in points {
            let phase = p * &jr;
            let (c, s) = ctx.cis_two_pi(&phase);
            re = ctx.add(&re, &c);
            im = ctx.add(&im, &s);
        }
    }
    Ok((re, im))
}

/// cis(2 pi t / q) for t = 0..q-1, built by repeated multiplication with a
/// certified primitive root.
fn roots_of_unity(ctx: &FpCtx, q: u64) -> Vec<(Fp, Fp)> {
    let base = ctx.cis_two_pi(&ExactRational::new(BigInt::one(), BigInt::from(q)));
    let mut table = Vec::with_capacity(q as usize);
    table.push((ctx.from_integer(1), ctx.zero()));
    for k in 1..q as usize {
        let (pre, pim) = &table[k - 1];
        let re = ctx.sub(&ctx.mul(pre, &base.0), &ctx.mul(pim, &base.1));
        let im = ctx.add(&ctx.mul(pre, &base.1), &ctx.mul(pim, &base.0));
        table.push((re, im));
    }
    table
}

/// The Erdos-Turan functional C*(1/A + sum_{j<=A} |S_j|/(N j)), certified.
pub fn erdos_turan_bound(
    points: &[ExactRational],
    a: u64,
    c: &ExactRational,
    bits: u32,
) -> Result<Certified> {
    if a == 0 {
        return Err(Error::InvalidArgument("A must be >= 1".into()));
    }
    if c <= &ExactRational::zero() {
        return Err(Error::InvalidArgument("C must be > 0".into()));
    }
    let ctx = FpCtx::new(bits);
    let n = points.len() as u64;
    let mut acc = ctx.from_rational(&ExactRational::new(BigInt::one(), BigInt::from(a)));
    for j in 1..=a {
        let (re, im) = weyl_sum_components(&ctx, points, j)?;
        let mag = ctx.magnitude(&re, &im);
        acc = ctx.add(&acc, &ctx.div_u64(&mag, n * j));
    }
    let bound = ctx.mul(&ctx.from_rational(c), &acc);
    Ok(Certified::from_fp(&ctx, &bound))
}

/// Order-vs-equidistribution diagnostic for one modulus.
#[derive(Debug, Clone)]
pub struct OrbitProfile {
    pub q: u64,
    pub b: u64,
    pub order: u64,
    /// Number of distinct orbits of the multiplication action on Z_q^*.
    pub cosets: u64,
    /// max over p in Z_q^* of |sum_k cis(2 pi p b^k / q)| / O_q(b).
    pub max_normalized_weyl: Certified,
    /// min over p in Z_q^* of the orbit discrepancy.
    pub min_discrepancy: ExactRational,
}

pub fn orbit_profile(b: u64, q: u64, bits: u32) -> Result<OrbitProfile> {
    let order = mult_order(q, b)?;
    if q == 1 {
        let one = ExactRational::one();
        return Ok(OrbitProfile {
            q,
            b,
            order: 1,
            cosets: 1,
            max_normalized_weyl: Certified {
                lo: one.clone(),
                hi: one.clone(),
            },
            min_discrepancy: one,
        });
    }
    let ctx = FpCtx::new(bits);
    let table = roots_of_unity(&ctx, q);

    // orbit of 1 under multiplication by b
    let mut h = Vec::with_capacity(order as usize);
    let mut t = 1u64;
    for _ in 0..order {
        h.push(t);
        t = mulmod(t, b % q, q);
    }

    let mut visited = vec![false; q as usize];
    let mut max_weyl: Option<Certified> = None;
    let mut min_disc: Option<ExactRational> = None;
    let mut cosets = 0u64;
    for p in 1..q {
        if visited[p as usize] || p.gcd(&q) != 1 {
            continue;
        }
        cosets += 1;
        let members: Vec<u64> = h.iter().map(|&x| mulmod(p, x, q)).collect();
        for &m in &members {
            visited[m as usize] = true;
        }
        // Weyl sum over the orbit (identical for every p in the coset)
        let mut re = ctx.zero();
        let mut im = ctx.zero();
        for &m in &members {
            re = ctx.add(&re, &table[m as usize].0);
            im = ctx.add(&im, &table[m as usize].1);
        }
        let mag = ctx.magnitude(&re, &im);
        let normalized = ctx.div_u64(&mag, order);
        let cert = Certified::from_fp(&ctx, &normalized);
        if max_weyl.as_ref().map_or(true, |m| cert.hi > m.hi) {
            max_weyl = Some(cert);
        }
        let pts: Vec<ExactRational> = members
            .iter()
            .map(|&m| ExactRational::new(BigInt::from(m), BigInt::from(q)))
            .collect();
        let d = discrepancy(&pts)?.discrepancy;
        if min_disc.as_ref().map_or(true, |m| &d < m) {
            min_disc = Some(d);
        }
    }
    Ok(OrbitProfile {
        q,
        b,
        order,
        cosets,
        max_normalized_weyl: max_weyl
            .ok_or_else(|| Error::InvalidArgument("no invertible residues".into()))?,
        min_discrepancy: min_disc.unwrap(),
    })
}

/// True iff some point lies in the closed interval [lo, hi].
pub fn gap_hit(points: &[ExactRational], lo: &ExactRational, hi: &ExactRational) -> Result<bool> {
    if lo > hi {
        return Err(Error::InvalidArgument("interval with lo > hi".into()));
    }
    Ok(points.iter().any(|p| lo <= p && p <= hi))
}

/// Default Erdos-Turan constant; validated against the whole orbit corpus in
/// the acceptance suite rather than assumed.
pub fn default_et_constant() -> ExactRational {
    ExactRational::from_integer(BigInt::from(3))
}

pub fn default_bits() -> u32 {
    DEFAULT_BITS
}
