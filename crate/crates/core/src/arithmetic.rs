//! Continued fractions, exact torus norms, beta exponents, scale
//! classification and non-resonance margins.
//!
//! All frequency arithmetic here is exact (big integers / big rationals).
//! Double precision loses `||q_n omega||` entirely once `q_{n+1}` passes
//! `1/eps`, so the frequency is kept as an exact rational: either the parsed
//! decimal input or, for quotient input, the value of the continued fraction
//! extended by repeating the final quotient until `||q_K omega||` is resolved
//! far beyond ten significant digits.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Natural log of a positive big integer, accurate to ~1e-15 relative.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().expect("fits") as f64).ln();
    }
    let top = (x >> (bits - 64)).to_u64().expect("top 64 bits");
    (top as f64).ln() + (bits - 64) as f64 * std::f64::consts::LN_2
}

fn ln_bigint(x: &BigInt) -> f64 {
    ln_big(x.magnitude())
}

/// Convert an exact rational to the nearest `f64` (within ~1 ulp).
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    let mut a = r.numer().magnitude().clone();
    let mut b = r.denom().magnitude().clone();
    let shift: i64 = 55 - (a.bits() as i64 - b.bits() as i64);
    if shift > 0 {
        a <<= shift as usize;
    } else {
        b <<= (-shift) as usize;
    }
    let q = (&a / &b).to_u64().expect("quotient fits in 64 bits") as f64;
    sign * q * (-shift as f64).exp2()
}

/// Natural log of a positive rational.
pub fn ln_rational(r: &BigRational) -> f64 {
    debug_assert!(r.is_positive());
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

/// Parse a decimal string like `"0.6180339887"` into an exact rational.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = |m: &str| Error::BadFrequencyInput(format!("{m}: {s:?}"));
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad("empty decimal"));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad("not a decimal number"));
    }
    let digits: String = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().map_err(|_| bad("unparseable digits"))?;
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(BigRational::new(numer * sign, denom))
}

/// Exact distance from `x` to the nearest integer.
pub fn torus_norm_exact(x: &BigRational) -> BigRational {
    let floor = x.floor();
    let frac = x - &floor;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if frac > half {
        BigRational::one() - frac
    } else {
        frac
    }
}

/// Where the stored frequency came from; affects how deep the exact rational
/// stand-in resolves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum FrequencySource {
    /// Parsed from a decimal string with the given number of digits.
    Decimal { digits: usize },
    /// Synthesized from partial quotients, extended by repeating the final
    /// quotient `extension` more times.
    Quotients { extension: usize },
}

/// A frequency with its continued-fraction data.
///
/// `convergents[k]` is `(p_k, q_k)` with the seed row `(p_0, q_0) = (0, 1)`,
/// so `convergents.len() == quotients.len() + 1`. `beta_seq[k-1]` is
/// `beta_k = log(q_{k+1}) / q_k`.
#[derive(Debug, Clone)]
pub struct ContinuedFraction {
    omega: BigRational,
    quotients: Vec<BigUint>,
    convergents: Vec<(BigInt, BigInt)>,
    beta_seq: Vec<f64>,
    source: FrequencySource,
}

/// Report from [`ContinuedFraction::qn_norm_identities`].
#[derive(Debug, Clone, Serialize)]
pub struct NormIdentityReport {
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// `||q_n omega||` lies in the open window `(1/(2 q_{n+1}), 1/q_{n+1})`.
    pub window_ok: bool,
}

/// Weak/strong dichotomy of a scale relative to the threshold `delta1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScaleKind {
    Weak,
    Strong,
}

/// One classified scale. `kind` is `Strong` iff `log q_{n+1} >= delta1 * q_n`
/// (ties resolve to `Strong`).
#[derive(Debug, Clone, Serialize)]
pub struct ScaleClass {
    pub index: usize,
    pub qn: f64,
    pub qn1: f64,
    pub beta_n: f64,
    pub kind: ScaleKind,
}

/// Scale-gluing case label for the consecutive pair `(n-1, n)`:
/// 1 = weak/weak, 2 = strong/weak, 3 = weak/strong, 4 = strong/strong.
#[derive(Debug, Clone, Serialize)]
pub struct ScalePairCase {
    pub index: usize,
    pub case: u8,
}

/// Output of [`classify_scales`].
#[derive(Debug, Clone, Serialize)]
pub struct ScaleClassification {
    pub delta1: f64,
    pub scales: Vec<ScaleClass>,
    pub pairs: Vec<ScalePairCase>,
}

fn expand_rational(omega: &BigRational, depth: usize) -> Result<Vec<BigUint>> {
    if !(omega > &BigRational::zero() && omega < &BigRational::one()) {
        return Err(Error::BadFrequencyInput(format!(
            "frequency must lie in (0,1), got {omega}"
        )));
    }
    let mut n = omega.numer().magnitude().clone();
    let mut d = omega.denom().magnitude().clone();
    let mut quotients = Vec::with_capacity(depth);
    while quotients.len() < depth {
        // omega_k = n/d in (0,1): next quotient is floor(d/n).
        let (a, rem) = d.div_rem(&n);
        quotients.push(a);
        if rem.is_zero() {
            if quotients.len() < depth {
                return Err(Error::RationalFrequency {
                    depth: quotients.len(),
                });
            }
            break;
        }
        d = n;
        n = rem;
    }
    Ok(quotients)
}

fn convergents_from(quotients: &[BigUint]) -> Vec<(BigInt, BigInt)> {
    let mut conv = Vec::with_capacity(quotients.len() + 1);
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero()); // (p_{-1}, q_{-1})
    let (mut p, mut q) = (BigInt::zero(), BigInt::one()); // (p_0, q_0)
    conv.push((p.clone(), q.clone()));
    for a in quotients {
        let a = BigInt::from_biguint(Sign::Plus, a.clone());
        let p_next = &a * &p + &p_prev;
        let q_next = &a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        conv.push((p.clone(), q.clone()));
    }
    conv
}

fn beta_seq_from(conv: &[(BigInt, BigInt)]) -> Vec<f64> {
    // beta_k = log(q_{k+1})/q_k for k = 1..len-2
    let mut betas = Vec::new();
    for k in 1..conv.len().saturating_sub(1) {
        let qk = rational_to_f64(&BigRational::from(conv[k].1.clone()));
        let qk1 = ln_bigint(&conv[k + 1].1);
        betas.push(qk1 / qk);
    }
    betas
}

/// Expand a frequency given as a decimal string to `depth` partial quotients.
///
/// Errors with `RationalFrequency` if the expansion terminates early (the
/// input is rational at the stored precision).
pub fn cf_expand_decimal(decimal: &str, depth: usize) -> Result<ContinuedFraction> {
    if depth == 0 {
        return Err(Error::invalid("arithmetic", "depth must be >= 1"));
    }
    let omega = parse_decimal(decimal)?;
    let digits = decimal.trim().split_once('.').map_or(0, |(_, f)| f.len());
    let quotients = expand_rational(&omega, depth)?;
    let convergents = convergents_from(&quotients);
    let beta_seq = beta_seq_from(&convergents);
    Ok(ContinuedFraction {
        omega,
        quotients,
        convergents,
        beta_seq,
        source: FrequencySource::Decimal { digits },
    })
}

/// Build a frequency from partial quotients.
///
/// The stored exact value is the finite continued fraction extended by
/// repeating the final quotient until the tail is resolved far beyond the
/// scales of interest (`q_M q_{M+1} > 10^14 q_K q_{K+1}`), so every stored
/// `||q_k omega||` carries at least ten significant digits of the ideal
/// (quadratic-irrational) extension.
pub fn cf_expand_quotients(quotients: &[u64]) -> Result<ContinuedFraction> {
    if quotients.is_empty() {
        return Err(Error::invalid("arithmetic", "need at least one quotient"));
    }
    if quotients.contains(&0) {
        return Err(Error::invalid("arithmetic", "partial quotients must be positive"));
    }
    let quotients: Vec<BigUint> = quotients.iter().map(|&a| BigUint::from(a)).collect();
    let stored = convergents_from(&quotients);
    let k = quotients.len();
    let target: BigInt = &stored[k - 1].1 * &stored[k].1 * BigInt::from(10u64).pow(14);

    let mut extended = quotients.clone();
    let last = quotients.last().expect("nonempty").clone();
    let mut conv = stored.clone();
    let mut extension = 0usize;
    loop {
        let m = conv.len() - 1;
        if &conv[m - 1].1 * &conv[m].1 > target {
            break;
        }
        extended.push(last.clone());
        let a = BigInt::from_biguint(Sign::Plus, last.clone());
        let p_next = &a * &conv[m].0 + &conv[m - 1].0;
        let q_next = &a * &conv[m].1 + &conv[m - 1].1;
        conv.push((p_next, q_next));
        extension += 1;
    }
    let (p_m, q_m) = conv.last().expect("nonempty").clone();
    let omega = BigRational::new(p_m, q_m);

    let beta_seq = beta_seq_from(&stored);
    Ok(ContinuedFraction {
        omega,
        quotients,
        convergents: stored,
        beta_seq,
        source: FrequencySource::Quotients { extension },
    })
}

impl ContinuedFraction {
    /// Number of stored partial quotients.
    pub fn depth(&self) -> usize {
        self.quotients.len()
    }

    pub fn source(&self) -> &FrequencySource {
        &self.source
    }

    /// The exact rational stand-in for the frequency.
    pub fn omega_exact(&self) -> &BigRational {
        &self.omega
    }

    pub fn omega_f64(&self) -> f64 {
        rational_to_f64(&self.omega)
    }

    /// Partial quotient `a_k`, `k >= 1`.
    pub fn quotient(&self, k: usize) -> Result<&BigUint> {
        self.quotients.get(k - 1).ok_or(Error::InsufficientDepth {
            needed: k,
            stored: self.depth(),
        })
    }

    /// Convergent `(p_k, q_k)`; `k = 0` is the seed row `(0, 1)`.
    pub fn convergent(&self, k: usize) -> Result<(&BigInt, &BigInt)> {
        self.convergents
            .get(k)
            .map(|(p, q)| (p, q))
            .ok_or(Error::InsufficientDepth {
                needed: k,
                stored: self.depth(),
            })
    }

    pub fn q_f64(&self, k: usize) -> Result<f64> {
        let (_, q) = self.convergent(k)?;
        Ok(rational_to_f64(&BigRational::from(q.clone())))
    }

    pub fn p_over_q_f64(&self, k: usize) -> Result<(i64, u64)> {
        let (p, q) = self.convergent(k)?;
        let p = p.to_i64().ok_or_else(|| {
            Error::invalid("arithmetic", format!("p_{k} does not fit in i64"))
        })?;
        let q = q.to_u64().ok_or_else(|| {
            Error::invalid("arithmetic", format!("q_{k} does not fit in u64"))
        })?;
        Ok((p, q))
    }

    /// `beta_k = log(q_{k+1})/q_k` for `k = 1..depth-1`.
    pub fn beta_seq(&self) -> &[f64] {
        &self.beta_seq
    }

    /// Finite-depth proxy for `beta(omega)`: the maximum of `beta_k` over the
    /// trailing half of the stored scales. The lim sup lives at large `k`;
    /// including the seed scales would let `beta_1 = log q_2` dominate every
    /// frequency.
    pub fn beta_proxy(&self) -> f64 {
        let betas = &self.beta_seq;
        if betas.is_empty() {
            return 0.0;
        }
        let start = betas.len() / 2;
        betas[start..]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Running maximum of the `beta_k` sequence.
    pub fn beta_running_max(&self) -> Vec<f64> {
        let mut acc = f64::NEG_INFINITY;
        self.beta_seq
            .iter()
            .map(|&b| {
                acc = acc.max(b);
                acc
            })
            .collect()
    }

    /// Exact `||q_k omega||`.
    pub fn norm_q_omega(&self, k: usize) -> Result<BigRational> {
        let (_, q) = self.convergent(k)?;
        Ok(torus_norm_exact(&(&self.omega * BigRational::from(q.clone()))))
    }

    pub fn norm_q_omega_f64(&self, k: usize) -> Result<f64> {
        Ok(rational_to_f64(&self.norm_q_omega(k)?))
    }

    /// Verify `||q_{n-1} omega|| = a_{n+1} ||q_n omega|| + ||q_{n+1} omega||`
    /// together with the window `||q_n omega|| in (1/(2 q_{n+1}), 1/q_{n+1})`,
    /// all in exact arithmetic.
    pub fn qn_norm_identities(&self, n: usize) -> Result<NormIdentityReport> {
        if n == 0 {
            return Err(Error::invalid("arithmetic", "identity needs n >= 1"));
        }
        let a_n1 = BigRational::from(BigInt::from_biguint(
            Sign::Plus,
            self.quotient(n + 1)?.clone(),
        ));
        let lhs = self.norm_q_omega(n - 1)?;
        let rhs = &a_n1 * self.norm_q_omega(n)? + self.norm_q_omega(n + 1)?;
        let residual = (&lhs - &rhs).abs();

        let (_, q_n1) = self.convergent(n + 1)?;
        let norm_n = self.norm_q_omega(n)?;
        let upper = BigRational::new(BigInt::one(), q_n1.clone());
        let lower = BigRational::new(BigInt::one(), q_n1 * BigInt::from(2));
        let window_ok = norm_n > lower && norm_n < upper;

        Ok(NormIdentityReport {
            n,
            lhs: rational_to_f64(&lhs),
            rhs: rational_to_f64(&rhs),
            residual: rational_to_f64(&residual),
            window_ok,
        })
    }
}

/// Label every stored scale weak/strong against `delta1` and emit the
/// four-case gluing label for each consecutive pair.
pub fn classify_scales(cf: &ContinuedFraction, delta1: f64) -> Result<ScaleClassification> {
    if delta1 <= 0.0 {
        return Err(Error::invalid("arithmetic", "delta1 must be positive"));
    }
    let mut scales = Vec::new();
    for n in 1..cf.depth() {
        let (_, qn) = cf.convergent(n)?;
        let (_, qn1) = cf.convergent(n + 1)?;
        let qn_f = rational_to_f64(&BigRational::from(qn.clone()));
        let beta_n = ln_bigint(qn1) / qn_f;
        // Strong iff log q_{n+1} >= delta1 * q_n; ties resolve Strong.
        let kind = if beta_n >= delta1 {
            ScaleKind::Strong
        } else {
            ScaleKind::Weak
        };
        scales.push(ScaleClass {
            index: n,
            qn: qn_f,
            qn1: rational_to_f64(&BigRational::from(qn1.clone())),
            beta_n,
            kind,
        });
    }
    let pairs = scales
        .windows(2)
        .map(|w| ScalePairCase {
            index: w[1].index,
            case: match (w[0].kind, w[1].kind) {
                (ScaleKind::Weak, ScaleKind::Weak) => 1,
                (ScaleKind::Strong, ScaleKind::Weak) => 2,
                (ScaleKind::Weak, ScaleKind::Strong) => 3,
                (ScaleKind::Strong, ScaleKind::Strong) => 4,
            },
        })
        .collect();
    Ok(ScaleClassification {
        delta1,
        scales,
        pairs,
    })
}

/// `min_{0 < |n| <= N} ||2 theta + n omega|| e^{delta' |n|}`.
///
/// A strictly positive return certifies the non-resonance variant at range
/// `N`; zero signals exact resonance.
pub fn nonresonance_margin(
    theta: &BigRational,
    cf: &ContinuedFraction,
    n_max: u64,
    delta_prime: f64,
) -> Result<f64> {
    if n_max == 0 {
        return Err(Error::invalid("arithmetic", "N must be >= 1"));
    }
    if delta_prime <= 0.0 {
        return Err(Error::invalid("arithmetic", "delta' must be positive"));
    }
    let two_theta = theta * BigRational::from(BigInt::from(2));
    let mut min_log = f64::INFINITY;
    for n in 1..=n_max {
        let n_omega = &self_omega_times(cf, n);
        for signed in [n_omega.clone(), -n_omega.clone()] {
            let norm = torus_norm_exact(&(&two_theta + signed));
            if norm.is_zero() {
                return Ok(0.0);
            }
            let log_margin = ln_rational(&norm) + delta_prime * n as f64;
            min_log = min_log.min(log_margin);
        }
    }
    Ok(if min_log > 700.0 {
        f64::MAX
    } else {
        min_log.exp()
    })
}

fn self_omega_times(cf: &ContinuedFraction, n: u64) -> BigRational {
    cf.omega_exact() * BigRational::from(BigInt::from(n))
}
