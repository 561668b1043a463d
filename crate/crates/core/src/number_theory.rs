//! Multiplicative order machinery: factorization, omega/phi/valuations,
//! prime-power orders via the lifting lemma, the composite order statistic
//! built from prime-power parts, the order census, and the partial sums of
//! the series sum 1/O~_n(b)^t.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{to_decimal, ExactRational};

/// Prime factorization with strictly increasing primes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn reconstruct(&self) -> u64 {
        self.factors
            .iter()
            .fold(1u64, |acc, &(p, a)| acc * p.pow(a))
    }

    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }
}

pub fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn modpow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = modpow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_brent(n: u64) -> u64 {
    // deterministic retries over (c, x0)
    for c in 1u64.. {
        let f = |x: u64| (mulmod(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        let mut count = 0u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
            count += 1;
            if count > 1 << 24 {
                break;
            }
        }
        if d != n && d != 1 {
            return d;
        }
    }
    unreachable!()
}

/// Complete factorization: trial division below 10^6, then rho with a
/// primality certificate on every remaining cofactor.
pub fn factorize(n: u64) -> Factorization {
    assert!(n >= 1, "factorize needs n >= 1");
    let mut factors: HashMap<u64, u32> = HashMap::new();
    let mut rest = n;
    let mut d = 2u64;
    while d < 1_000_000 && d * d <= rest {
        while rest % d == 0 {
            *factors.entry(d).or_insert(0) += 1;
            rest /= d;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    let mut stack = vec![rest];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            *factors.entry(m).or_insert(0) += 1;
            continue;
        }
        let d = pollard_brent(m);
        stack.push(d);
        stack.push(m / d);
    }
    let mut factors: Vec<(u64, u32)> = factors.into_iter().collect();
    factors.sort_unstable();
    debug_assert_eq!(
        factors.iter().fold(1u64, |acc, &(p, a)| acc * p.pow(a)),
        n
    );
    Factorization { factors }
}

/// Number of distinct prime factors; omega(1) = 0.
pub fn omega(n: u64) -> u32 {
    factorize(n).omega()
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .factors()
        .iter()
        .fold(1u64, |acc, &(p, a)| acc * (p - 1) * p.pow(a - 1))
}

/// Exact p-adic valuation of n; p must be prime.
pub fn valuation(p: u64, n: u64) -> Result<u32> {
    if !is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("valuation of 0".into()));
    }
    let mut v = 0;
    let mut n = n;
    while n % p == 0 {
        v += 1;
        n /= p;
    }
    Ok(v)
}

/// Multiplicative order of b modulo a prime p (divisor descent over p - 1).
pub fn ord_prime(p: u64, b: u64) -> Result<u64> {
    if b % p == 0 {
        return Err(Error::NotCoprime { q: p, b });
    }
    let mut o = p - 1;
    for &(f, _) in factorize(p - 1).factors() {
        while o % f == 0 && modpow(b, o / f, p) == 1 {
            o /= f;
        }
    }
    debug_assert_eq!(modpow(b, o, p), 1);
    Ok(o)
}

/// Order of b modulo p^t via the lifting lemma: with k_p the order mod p and
/// u_p the p-adic valuation of b^{k_p} - 1, the order is k_p when t <= u_p
/// and k_p * p^{t - u_p} otherwise.
///
/// The closed form is sound for odd p. For p = 2 with b = 3 (mod 4) the
/// binomial step behind it breaks (v_2 jumps by more than one at the first
/// squaring), so that case lifts iteratively instead; the result is always
/// the true order.
pub fn prime_power_order(p: u64, t: u32, b: u64) -> Result<u64> {
    if t == 0 {
        return Err(Error::InvalidArgument("exponent t must be >= 1".into()));
    }
    if !is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    if b % p == 0 {
        return Err(Error::NotCoprime { q: p, b });
    }
    let k_p = ord_prime(p, b)?;
    if p == 2 {
        let mut o = k_p; // = 1
        for j in 2..=t {
            let m = 1u64
                .checked_shl(j)
                .filter(|_| j < 64)
                .ok_or_else(|| Error::InvalidArgument("2^t overflows u64".into()))?;
            if modpow(b % m, o, m) != 1 {
                o = o
                    .checked_mul(2)
                    .ok_or_else(|| Error::InvalidArgument("order overflows u64".into()))?;
            }
            debug_assert_eq!(modpow(b % m, o, m), 1);
        }
        return Ok(o);
    }
    // u capped at t: p^j stays <= p^t which fits u64 by assumption
    let mut u = 1u32;
    while u < t {
        let m = p.checked_pow(u + 1).ok_or_else(|| {
            Error::InvalidArgument(format!("p^t overflows u64 for p={p}, t={t}"))
        })?;
        if modpow(b % m, k_p, m) != 1 {
            break;
        }
        u += 1;
    }
    let order = k_p as u128 * (p as u128).pow(t.saturating_sub(u));
    order
        .to_u64()
        .ok_or_else(|| Error::InvalidArgument("order overflows u64".into()))
}

fn lcm_u64(a: u64, b: u64) -> Result<u64> {
    let g = a.gcd(&b);
    (a / g)
        .checked_mul(b)
        .ok_or_else(|| Error::InvalidArgument("lcm overflows u64".into()))
}

/// O_q(b): least k >= 1 with b^k = 1 mod q. Computed as the lcm of the
/// prime-power orders, then verified directly.
pub fn mult_order(q: u64, b: u64) -> Result<u64> {
    if q == 0 {
        return Err(Error::InvalidArgument("q must be >= 1".into()));
    }
    if q == 1 {
        return Ok(1);
    }
    if q.gcd(&b) != 1 {
        return Err(Error::NotCoprime { q, b });
    }
    let mut o = 1u64;
    for &(p, a) in factorize(q).factors() {
        o = lcm_u64(o, prime_power_order(p, a, b)?)?;
    }
    assert_eq!(modpow(b % q, o, q), 1, "order verification failed");
    Ok(o)
}

/// The composite statistic: product (not lcm) of the prime-power orders.
pub fn tilde_order(q: u64, b: u64) -> Result<u64> {
    if q == 0 {
        return Err(Error::InvalidArgument("q must be >= 1".into()));
    }
    if q == 1 {
        return Ok(1);
    }
    if q.gcd(&b) != 1 {
        return Err(Error::NotCoprime { q, b });
    }
    let mut prod: u128 = 1;
    for &(p, a) in factorize(q).factors() {
        prod *= prime_power_order(p, a, b)? as u128;
        if prod > u64::MAX as u128 {
            return Err(Error::InvalidArgument("tilde order overflows u64".into()));
        }
    }
    Ok(prod as u64)
}

/// Per-q record driving the census.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderProfile {
    pub q: u64,
    pub omega: u32,
    pub order: u64,
    pub tilde_order: u64,
    pub coprime_to_b: bool,
}

pub fn order_profile(q: u64, b: u64) -> Result<OrderProfile> {
    if q == 0 {
        return Err(Error::InvalidArgument("q must be >= 1".into()));
    }
    let coprime = q == 1 || q.gcd(&b) == 1;
    if !coprime {
        return Err(Error::NotCoprime { q, b });
    }
    Ok(OrderProfile {
        q,
        omega: omega(q),
        order: mult_order(q, b)?,
        tilde_order: tilde_order(q, b)?,
        coprime_to_b: true,
    })
}

/// Smallest-prime-factor sieve for fast factorization over a range.
pub struct SpfSieve {
    spf: Vec<u32>,
}

impl SpfSieve {
    pub fn new(limit: u64) -> Result<SpfSieve> {
        let limit: usize = limit
            .to_usize()
            .filter(|&l| l <= u32::MAX as usize)
            .ok_or_else(|| Error::Budget(format!("sieve limit {limit} too large")))?;
        let mut spf: Vec<u32> = vec![0; limit + 1];
        for i in 2..=limit {
            if spf[i] == 0 {
                let mut j = i;
                while j <= limit {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Ok(SpfSieve { spf })
    }

    pub fn limit(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    pub fn factorize(&self, n: u64) -> Factorization {
        assert!(n >= 1 && n <= self.limit());
        let mut factors = Vec::new();
        let mut n = n as usize;
        while n > 1 {
            let p = self.spf[n] as u64;
            let mut a = 0;
            while n as u64 % p == 0 {
                n /= p as usize;
                a += 1;
            }
            factors.push((p, a));
        }
        Factorization { factors }
    }

    pub fn omega(&self, n: u64) -> u32 {
        self.factorize(n).omega()
    }
}

/// Ascending stream of integers with at most `n_max_factors` distinct prime
/// factors (1 has zero and is always included).
pub fn pn_sieve(x_max: u64, n_max_factors: u32) -> Result<Vec<u64>> {
    let sieve = SpfSieve::new(x_max)?;
    Ok((1..=x_max)
        .filter(|&n| sieve.omega(n) <= n_max_factors)
        .collect())
}

/// The elementary totient lower bound on P_N members:
/// phi(n) >= n * prod_{i=2}^{N+1} (1 - 1/i) = n/(N+1), checked exactly.
pub fn phi_lower_bound_holds(n: u64, n_max_factors: u32) -> bool {
    euler_phi(n) as u128 * (n_max_factors as u128 + 1) >= n as u128
}

/// Exact comparison value <= base^(num/den), all integers.
fn pow_leq(value: u64, base: u64, num: u32, den: u32) -> bool {
    BigInt::from(value).pow(den) <= BigInt::from(base).pow(num)
}

#[derive(Debug, Clone)]
pub struct CensusRow {
    pub x: u64,
    pub epsilon: ExactRational,
    /// #{q <= x : gcd(q,b)=1, O~_q(b) <= q^eps}
    pub count: u64,
    pub log_ratio: f64,
    /// The comparison exponent 2*eps.
    pub bound_2eps: f64,
    /// Exact check count <= x^(2 eps).
    pub ok: bool,
    /// #{q <= x : gcd(q,b)=1, omega(q) <= N, O_q(b) <= q^eps}, when a
    /// factor-count cap N was supplied.
    pub filtered_count: Option<u64>,
    pub filtered_log_ratio: Option<f64>,
}

/// Converts an epsilon in (0,1) into a (num, den) exponent pair.
fn eps_parts(eps: &ExactRational) -> Result<(u32, u32)> {
    if eps <= &ExactRational::zero() || eps >= &ExactRational::one() {
        return Err(Error::InvalidArgument("epsilon must lie in (0,1)".into()));
    }
    let num = eps
        .numer()
        .to_u32()
        .ok_or_else(|| Error::InvalidArgument("epsilon numerator too large".into()))?;
    let den = eps
        .denom()
        .to_u32()
        .ok_or_else(|| Error::InvalidArgument("epsilon denominator too large".into()))?;
    Ok((num, den))
}

/// Geometric checkpoint ladder {100, 1000, ...} up to and including x_max.
pub fn census_checkpoints(x_max: u64) -> Vec<u64> {
    let mut points = Vec::new();
    let mut x = 100u64;
    while x < x_max {
        points.push(x);
        match x.checked_mul(10) {
            Some(next) => x = next,
            None => break,
        }
    }
    points.push(x_max);
    points
}

/// Precomputed per-q order data for one base, reusable across sweeps.
pub struct CensusContext {
    pub b: u64,
    sieve: SpfSieve,
    pp_order: HashMap<u64, u64>,
}

impl CensusContext {
    pub fn new(b: u64, x_max: u64) -> Result<CensusContext> {
        if b < 2 {
            return Err(Error::InvalidArgument("base must be >= 2".into()));
        }
        let sieve = SpfSieve::new(x_max)?;
        let mut pp_order = HashMap::new();
        for p in 2..=x_max {
            if sieve.spf.get(p as usize).copied() != Some(p as u32) {
                continue; // not prime
            }
            if b % p == 0 {
                continue;
            }
            let k_p = {
                // divisor descent using the sieve for p - 1
                let mut o = p - 1;
                if p == 2 {
                    o = 1;
                }
                for &(f, _) in sieve.factorize(p.max(2) - 1).factors() {
                    while o % f == 0 && modpow(b, o / f, p) == 1 {
                        o /= f;
                    }
                }
                o
            };
            pp_order.insert(p, k_p);
            // lift to higher powers within range
            let mut m = p;
            let mut alpha = 1u32;
            loop {
                let Some(next) = m.checked_mul(p) else { break };
                if next > x_max {
                    break;
                }
                m = next;
                alpha += 1;
                let o = prime_power_order(p, alpha, b).expect("coprime by construction");
                pp_order.insert(m, o);
            }
        }
        Ok(CensusContext { b, sieve, pp_order })
    }

    /// (omega, O_q(b), O~_q(b)) for q coprime to b; None otherwise.
    pub fn profile(&self, q: u64) -> Option<(u32, u64, u64)> {
        if q == 1 {
            return Some((0, 1, 1));
        }
        if q.gcd(&self.b) != 1 {
            return None;
        }
        let f = self.sieve.factorize(q);
        let mut order = 1u64;
        let mut tilde: u128 = 1;
        for &(p, a) in f.factors() {
            let o = self.pp_order[&p.pow(a)];
            order = lcm_u64(order, o).ok()?;
            tilde *= o as u128;
        }
        Some((f.omega(), order, tilde.to_u64()?))
    }
}

/// The order census: for each epsilon and each checkpoint x, counts
/// #{q <= x : gcd(q,b)=1, O~_q(b) <= q^eps} with exact integer power
/// comparisons, plus the filtered variant (omega cap, plain order) when
/// `omega_max` is given.
pub fn order_census(
    b: u64,
    x_max: u64,
    epsilons: &[ExactRational],
    omega_max: Option<u32>,
) -> Result<Vec<CensusRow>> {
    if x_max < 2 {
        return Err(Error::InvalidArgument("x_max must be >= 2".into()));
    }
    if epsilons.is_empty() {
        return Err(Error::InvalidArgument("need at least one epsilon".into()));
    }
    let parts: Vec<(u32, u32)> = epsilons.iter().map(eps_parts).collect::<Result<_>>()?;
    let ctx = CensusContext::new(b, x_max)?;
    let checkpoints = census_checkpoints(x_max);

    let mut rows = Vec::new();
    let mut counts = vec![0u64; parts.len()];
    let mut filtered_counts = vec![0u64; parts.len()];
    let mut next_cp = 0usize;
    for q in 1..=x_max {
        if let Some((om, order, tilde)) = ctx.profile(q) {
            for (i, &(num, den)) in parts.iter().enumerate() {
                if pow_leq(tilde, q, num, den) {
                    counts[i] += 1;
                }
                if let Some(cap) = omega_max {
                    if om <= cap && pow_leq(order, q, num, den) {
                        filtered_counts[i] += 1;
                    }
                }
            }
        }
        while next_cp < checkpoints.len() && checkpoints[next_cp] == q {
            for (i, eps) in epsilons.iter().enumerate() {
                let (num, den) = parts[i];
                let xf = q as f64;
                rows.push(CensusRow {
                    x: q,
                    epsilon: eps.clone(),
                    count: counts[i],
                    log_ratio: if counts[i] == 0 {
                        0.0
                    } else {
                        (counts[i] as f64).ln() / xf.ln()
                    },
                    bound_2eps: 2.0 * eps.to_f64().unwrap_or(f64::NAN),
                    ok: pow_leq_count(counts[i], q, num, den),
                    filtered_count: omega_max.map(|_| filtered_counts[i]),
                    filtered_log_ratio: omega_max.map(|_| {
                        if filtered_counts[i] == 0 {
                            0.0
                        } else {
                            (filtered_counts[i] as f64).ln() / xf.ln()
                        }
                    }),
                });
            }
            next_cp += 1;
        }
    }
    Ok(rows)
}

/// Exact check count <= x^(2 num/den).
fn pow_leq_count(count: u64, x: u64, num: u32, den: u32) -> bool {
    BigInt::from(count).pow(den) <= BigInt::from(x).pow(2 * num)
}

/// Partial sums of sum_{n <= n_max, gcd(n,b)=1} O~_n(b)^{-t}.
#[derive(Debug, Clone)]
pub struct StPartial {
    pub n_max: u64,
    /// t as an exact rational.
    pub t: ExactRational,
    /// The partial sum, exact when t is a positive integer.
    pub sum_exact: Option<ExactRational>,
    /// Decimal rendering of the partial sum (always present).
    pub sum_decimal: String,
    /// (decade end, increment over that decade) as decimals: the tail-trend
    /// diagnostic. Decades are (n_max/10^k, n_max/10^{k-1}] style splits of
    /// (1, n_max] at powers of ten.
    pub decade_increments: Vec<(u64, String)>,
}

pub fn s_t_partial(b: u64, t: &ExactRational, n_max: u64, digits: usize) -> Result<StPartial> {
    if t <= &ExactRational::zero() {
        return Err(Error::InvalidArgument("t must be > 0".into()));
    }
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be >= 1".into()));
    }
    let ctx = CensusContext::new(b, n_max.max(2))?;
    let t_num = t
        .numer()
        .to_u32()
        .ok_or_else(|| Error::InvalidArgument("t numerator too large".into()))?;
    let t_den = t
        .denom()
        .to_u32()
        .ok_or_else(|| Error::InvalidArgument("t denominator too large".into()))?;

    // scaled-integer accumulation at `digits` plus guard digits
    let guard = 12usize;
    let scale_digits = digits + guard;
    let scale = BigInt::from(10u32).pow(scale_digits as u32);

    let exact_mode = t_den == 1;
    let mut sum_e = ExactRational::zero();
    let mut sum_s = BigInt::zero();

    let mut decades: Vec<(u64, BigInt, ExactRational)> = Vec::new();
    let mut decade_end = n_max;
    let mut bounds = vec![n_max];
    while decade_end > 10 {
        decade_end /= 10;
        bounds.push(decade_end);
    }
    bounds.reverse();
    let mut bound_idx = 0usize;
    let mut decade_s = BigInt::zero();
    let mut decade_e = ExactRational::zero();

    for n in 1..=n_max {
        if let Some((_, _, tilde)) = ctx.profile(n) {
            if exact_mode {
                let term = ExactRational::new(BigInt::one(), BigInt::from(tilde).pow(t_num));
                sum_e += &term;
                decade_e += &term;
            } else {
                // floor(10^scale * tilde^(-num/den)) via an integer root
                let pow = BigInt::from(tilde).pow(t_num);
                let numerator = scale.clone().pow(t_den) / &pow;
                let term = numerator.nth_root(t_den);
                sum_s += &term;
                decade_s += &term;
            }
        }
        if bound_idx < bounds.len() && bounds[bound_idx] == n {
            decades.push((n, decade_s.clone(), decade_e.clone()));
            decade_s = BigInt::zero();
            decade_e = ExactRational::zero();
            bound_idx += 1;
        }
    }

    let render_scaled = |s: &BigInt| -> String {
        let r = ExactRational::new(s.clone(), scale.clone());
        to_decimal(&r, digits)
    };
    let (sum_exact, sum_decimal) = if exact_mode {
        (Some(sum_e.clone()), to_decimal(&sum_e, digits))
    } else {
        (None, render_scaled(&sum_s))
    };
    let decade_increments = decades
        .into_iter()
        .map(|(end, s, e)| {
            let inc = if exact_mode {
                to_decimal(&e, digits)
            } else {
                render_scaled(&s)
            };
            (end, inc)
        })
        .collect();

    Ok(StPartial {
        n_max,
        t: t.clone(),
        sum_exact,
        sum_decimal,
        decade_increments,
    })
}
