//! p-adic reduction of rationals and the registry of prime congruences for
//! even and odd sequences.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::exact::{binom, Rational};
use crate::sequences::{SequenceError, SequenceHandle};
use crate::transforms::{parity_signs, Sign};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CongruenceError {
    #[error("{value} is not p-integral for p = {p}")]
    NotPIntegral { value: String, p: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{id}: not applicable for p = {p}: {reason}")]
    NotApplicable { id: String, p: u64, reason: String },
    #[error("{id}: hypothesis not satisfied for p = {p}: {reason}")]
    Hypothesis { id: String, p: u64, reason: String },
    #[error("{id}: missing parameter {name}")]
    MissingParam { id: String, name: &'static str },
    #[error("unknown congruence {0:?}")]
    UnknownId(String),
    #[error("residues modulo different prime powers")]
    ModulusMismatch,
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

/// p-adic valuation, with zero mapped to `Infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinity,
}

impl Valuation {
    pub fn at_least(self, k: i64) -> bool {
        match self {
            Valuation::Finite(v) => v >= k,
            Valuation::Infinity => true,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinity => write!(f, "inf"),
        }
    }
}

fn int_valuation(n: &BigInt, p: &BigInt) -> i64 {
    let mut n = n.clone();
    let mut v = 0;
    while !n.is_zero() && n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

pub fn p_valuation(r: &Rational, p: u64) -> Valuation {
    if r.is_zero() {
        return Valuation::Infinity;
    }
    let pb = BigInt::from(p);
    Valuation::Finite(int_valuation(r.numer(), &pb) - int_valuation(r.denom(), &pb))
}

pub fn is_p_integral(r: &Rational, p: u64) -> bool {
    p_valuation(r, p).at_least(0)
}

/// A residue class modulo `p^exponent`, stored as its representative in
/// `[0, p^exponent)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Residue {
    pub prime: u64,
    pub exponent: u32,
    pub value: BigInt,
}

impl Residue {
    pub fn modulus(&self) -> BigInt {
        num_traits::pow(BigInt::from(self.prime), self.exponent as usize)
    }

    fn combine(&self, other: &Residue, f: impl Fn(&BigInt, &BigInt) -> BigInt) -> Result<Residue, CongruenceError> {
        if self.prime != other.prime || self.exponent != other.exponent {
            return Err(CongruenceError::ModulusMismatch);
        }
        Ok(Residue {
            prime: self.prime,
            exponent: self.exponent,
            value: f(&self.value, &other.value).mod_floor(&self.modulus()),
        })
    }

    pub fn add(&self, other: &Residue) -> Result<Residue, CongruenceError> {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Residue) -> Result<Residue, CongruenceError> {
        self.combine(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Residue) -> Result<Residue, CongruenceError> {
        self.combine(other, |a, b| a * b)
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {}^{})", self.value, self.prime, self.exponent)
    }
}

impl Serialize for Residue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.value.to_string())
    }
}

/// `numerator * denominator^{-1} mod p^k` for p-integral `r`.
pub fn reduce_mod(r: &Rational, p: u64, k: u32) -> Result<Residue, CongruenceError> {
    if !is_p_integral(r, p) {
        return Err(CongruenceError::NotPIntegral {
            value: r.to_string(),
            p,
        });
    }
    let modulus = num_traits::pow(BigInt::from(p), k as usize);
    let den = r.denom().mod_floor(&modulus);
    let inv = den.extended_gcd(&modulus).x;
    Ok(Residue {
        prime: p,
        exponent: k,
        value: (r.numer() * inv).mod_floor(&modulus),
    })
}

/// `a ≡ b (mod p^k)` for p-integral `a`, `b`.
pub fn congruent(a: &Rational, b: &Rational, p: u64, k: u32) -> Result<bool, CongruenceError> {
    Ok(reduce_mod(a, p, k)? == reduce_mod(b, p, k)?)
}

/// Deterministic trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Legendre symbol `(a/p)` by Euler's criterion.
pub fn legendre(a: &BigInt, p: u64) -> i8 {
    let pb = BigInt::from(p);
    let a = a.mod_floor(&pb);
    if a.is_zero() {
        return 0;
    }
    let e = BigInt::from((p - 1) / 2);
    if a.modpow(&e, &pb).is_one() {
        1
    } else {
        -1
    }
}

/// `p = a^2 + b^2` with `a ≡ 1 (mod 4)` and `b > 0`, by exhaustive search.
pub fn two_square_decompose(p: u64) -> Result<(i64, i64), CongruenceError> {
    if p % 4 != 1 {
        return Err(CongruenceError::NotApplicable {
            id: "two_square_decompose".into(),
            p,
            reason: "p must be 1 mod 4".into(),
        });
    }
    if !is_prime(p) {
        return Err(CongruenceError::NotPrime(p));
    }
    let mut a = 1u64;
    while a * a < p {
        let rest = p - a * a;
        let b = (rest as f64).sqrt().round() as u64;
        if a % 2 == 1 && b * b == rest {
            let a = a as i64;
            let a = if a % 4 == 1 { a } else { -a };
            return Ok((a, b as i64));
        }
        a += 1;
    }
    unreachable!("every prime 1 mod 4 is a sum of two squares")
}

/// Per-prime data shared by the congruences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeContext {
    pub p: u64,
    /// `(p/5)`.
    pub legendre_5: i8,
    pub two_square: Option<(i64, i64)>,
}

impl PrimeContext {
    pub fn new(p: u64) -> Result<Self, CongruenceError> {
        if p == 2 || !is_prime(p) {
            return Err(CongruenceError::NotPrime(p));
        }
        Ok(PrimeContext {
            p,
            legendre_5: legendre(&BigInt::from(p), 5),
            two_square: if p % 4 == 1 { Some(two_square_decompose(p)?) } else { None },
        })
    }
}

macro_rules! congruence_ids {
    ($($variant:ident => $key:literal),* $(,)?) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum CongruenceId {
            $($variant),*
        }

        impl CongruenceId {
            pub const ALL: &'static [CongruenceId] = &[$(CongruenceId::$variant),*];

            pub fn key(self) -> &'static str {
                match self {
                    $(CongruenceId::$variant => $key),*
                }
            }
        }
    };
}

congruence_ids! {
    T4_1 => "T4.1",
    C4_1 => "C4.1",
    C4_2a => "C4.2a",
    C4_2b => "C4.2b",
    C4_3 => "C4.3",
    C4_4 => "C4.4",
    T4_2 => "T4.2",
    C4_5 => "C4.5",
    C4_6 => "C4.6",
    C4_7 => "C4.7",
    C4_8 => "C4.8",
    T4_3a => "T4.3a",
    T4_3b => "T4.3b",
    T4_3c => "T4.3c",
    T4_3d => "T4.3d",
    C4_9 => "C4.9",
    C4_10 => "C4.10",
    T4_4 => "T4.4",
    T4_5a => "T4.5a",
    T4_5b => "T4.5b",
    T4_5c => "T4.5c",
    Wolst => "WOLST",
}

impl CongruenceId {
    /// Resolves a key; the group keys `C4.2`, `T4.3` and `T4.5` expand to
    /// all of their parts.
    pub fn expand(key: &str) -> Result<Vec<CongruenceId>, CongruenceError> {
        use CongruenceId::*;
        let key = key.trim();
        match key {
            "C4.2" => return Ok(vec![C4_2a, C4_2b]),
            "T4.3" => return Ok(vec![T4_3a, T4_3b, T4_3c, T4_3d]),
            "T4.5" => return Ok(vec![T4_5a, T4_5b, T4_5c]),
            _ => {}
        }
        Ok(vec![key.parse()?])
    }

    /// Exponent `k` of the stated modulus `p^k`.
    pub fn exponent(self) -> u32 {
        use CongruenceId::*;
        match self {
            T4_4 | T4_5a | T4_5b | T4_5c => 1,
            Wolst => 3,
            _ => 2,
        }
    }
}

impl FromStr for CongruenceId {
    type Err = CongruenceError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        CongruenceId::ALL
            .iter()
            .copied()
            .find(|id| id.key() == s)
            .ok_or_else(|| CongruenceError::UnknownId(s.to_string()))
    }
}

impl fmt::Display for CongruenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Default)]
pub struct CongruenceParams {
    pub seq: Option<SequenceHandle>,
    pub bc: Option<(Rational, Rational)>,
}

impl CongruenceParams {
    pub fn none() -> Self {
        CongruenceParams::default()
    }

    pub fn seq(seq: SequenceHandle) -> Self {
        CongruenceParams {
            seq: Some(seq),
            bc: None,
        }
    }

    pub fn lucas(b: impl Into<Rational>, c: impl Into<Rational>) -> Self {
        CongruenceParams {
            seq: None,
            bc: Some((b.into(), c.into())),
        }
    }
}

/// Outcome of one congruence at one prime. Both sides are multiplied by
/// `p^cleared` before reduction, so the comparison is modulo
/// `p^(exponent + cleared)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CongruenceReport {
    pub id: String,
    pub p: u64,
    pub exponent: u32,
    pub cleared: u32,
    #[serde(serialize_with = "ser_display")]
    pub modulus: BigInt,
    pub lhs: Residue,
    pub rhs: Residue,
    pub lhs_exact: Rational,
    pub rhs_exact: Rational,
    pub pass: bool,
}

fn ser_display<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

struct Ctx<'a> {
    id: CongruenceId,
    p: u64,
    params: &'a CongruenceParams,
}

impl Ctx<'_> {
    fn not_applicable(&self, reason: impl Into<String>) -> CongruenceError {
        CongruenceError::NotApplicable {
            id: self.id.key().into(),
            p: self.p,
            reason: reason.into(),
        }
    }

    fn hypothesis(&self, reason: impl Into<String>) -> CongruenceError {
        CongruenceError::Hypothesis {
            id: self.id.key().into(),
            p: self.p,
            reason: reason.into(),
        }
    }

    fn min_prime(&self, above: u64) -> Result<(), CongruenceError> {
        if self.p > above {
            Ok(())
        } else {
            Err(self.not_applicable(format!("needs p > {above}")))
        }
    }

    fn seq(&self) -> Result<&SequenceHandle, CongruenceError> {
        self.params.seq.as_ref().ok_or(CongruenceError::MissingParam {
            id: self.id.key().into(),
            name: "seq",
        })
    }

    fn bc(&self) -> Result<(Rational, Rational), CongruenceError> {
        let (b, c) = self.params.bc.clone().ok_or(CongruenceError::MissingParam {
            id: self.id.key().into(),
            name: "b,c",
        })?;
        if !is_p_integral(&b, self.p) || !is_p_integral(&c, self.p) {
            return Err(self.hypothesis("b and c must be p-integral"));
        }
        let disc = &b * (&b * &b - Rational::from(4) * &c);
        if p_valuation(&disc, self.p).at_least(1) {
            return Err(self.not_applicable("b(b^2 - 4c) is divisible by p"));
        }
        Ok((b, c))
    }

    fn signs(&self, seq: &SequenceHandle, upto: u64) -> Result<Vec<Sign>, CongruenceError> {
        let signs = parity_signs(seq, upto)?;
        if signs.is_empty() {
            return Err(self.hypothesis(format!("{seq} is neither even nor odd up to {upto}")));
        }
        Ok(signs)
    }

    fn require_parity(&self, seq: &SequenceHandle, want: Sign, upto: u64) -> Result<(), CongruenceError> {
        if self.signs(seq, upto)?.contains(&want) {
            Ok(())
        } else {
            let word = if want == Sign::Plus { "even" } else { "odd" };
            Err(self.hypothesis(format!("{seq} is not {word} up to {upto}")))
        }
    }

    /// Requires the sequence to be even with `p ≡ 3 (mod 4)` or odd with
    /// `p ≡ 1 (mod 4)`.
    fn require_class(&self, seq: &SequenceHandle, upto: u64) -> Result<(), CongruenceError> {
        let signs = self.signs(seq, upto)?;
        let want = if self.p % 4 == 3 { Sign::Plus } else { Sign::Minus };
        if signs.contains(&want) {
            Ok(())
        } else {
            Err(self.not_applicable(format!(
                "{seq} is {} and p = {} (mod 4)",
                if signs[0] == Sign::Plus { "even" } else { "odd" },
                self.p % 4
            )))
        }
    }

    fn require_integral(&self, seq: &SequenceHandle, indices: impl IntoIterator<Item = u64>) -> Result<(), CongruenceError> {
        for i in indices {
            let t = seq.term(i)?;
            if !is_p_integral(&t, self.p) {
                return Err(self.hypothesis(format!("term {i} of {seq} is {t}, not p-integral")));
            }
        }
        Ok(())
    }

    /// Integrality hypotheses of the even-sequence congruences: `A_0..A_{p-2}`,
    /// `A_p` and `p A_{p-1}`.
    fn require_even_hypotheses(&self, a: &SequenceHandle) -> Result<(), CongruenceError> {
        let p = self.p;
        self.require_parity(a, Sign::Plus, p)?;
        self.require_integral(a, (0..=p - 2).chain([p]))?;
        let scaled = Rational::from(p) * a.term(p - 1)?;
        if !is_p_integral(&scaled, p) {
            return Err(self.hypothesis(format!("p*A_(p-1) = {scaled} is not p-integral")));
        }
        Ok(())
    }

    fn require_odd_hypotheses(&self, a: &SequenceHandle, upto: u64) -> Result<(), CongruenceError> {
        self.require_parity(a, Sign::Minus, upto)?;
        if !a.term(0)?.is_zero() {
            return Err(self.hypothesis("odd sequence with A_0 != 0"));
        }
        self.require_integral(a, 1..=upto)
    }
}

fn q(v: u64) -> Rational {
    Rational::from(v)
}

fn sum(range: impl Iterator<Item = u64>, f: impl Fn(u64) -> Result<Rational, SequenceError>) -> Result<Rational, SequenceError> {
    let mut acc = Rational::zero();
    for k in range {
        acc += f(k)?;
    }
    Ok(acc)
}

fn central(k: u64) -> Rational {
    binom(2 * k, k)
}

/// Evaluates both sides of a congruence exactly.
fn sides(ctx: &Ctx<'_>) -> Result<(Rational, Rational), CongruenceError> {
    use CongruenceId::*;
    let p = ctx.p;
    let h = (p - 1) / 2;
    let pq = q(p);
    let zero = Rational::zero();
    let out = match ctx.id {
        T4_1 | C4_1 => {
            let a = ctx.seq()?;
            ctx.require_odd_hypotheses(a, p - 1)?;
            if ctx.id == T4_1 {
                (sum(1..p, |k| Ok(a.term(k)? / q(p + k)))?, zero)
            } else {
                let lhs = sum(1..p, |k| Ok(a.term(k)? / q(k)))?;
                let rhs = &pq * sum(1..p, |k| Ok(a.term(k)? / q(k * k)))?;
                (lhs, rhs)
            }
        }
        C4_2a => {
            let b = SequenceHandle::bernoulli();
            let lhs = sum(1..=h, |k| {
                Ok((Rational::int_pow(4, k) - Rational::one()) * b.term(2 * k)? / q(p + 2 * k))
            })?;
            (lhs, q(p - 1) / q(2))
        }
        C4_2b => {
            // even indices only, as displayed
            let e = SequenceHandle::euler();
            let lhs = sum(1..=h, |k| {
                Ok((e.term(2 * k)? - Rational::one()) / (q(p + 2 * k) * Rational::int_pow(4, k)))
            })?;
            (lhs, zero)
        }
        C4_3 => {
            let (b, c) = ctx.bc()?;
            let u = SequenceHandle::lucas_u(b.clone(), c);
            let lhs = sum(0..p, |k| {
                Ok(u.term(k)? / (q(p + k) * b.pow(k as i64).map_err(SequenceError::Arithmetic)?))
            })?;
            (lhs, zero)
        }
        C4_4 => {
            ctx.min_prime(5)?;
            let f = SequenceHandle::fibonacci();
            let l = legendre(&BigInt::from(p), 5) as i64;
            let lhs = sum(1..p, |k| Ok(f.term(k)? / q(k)))?;
            let fp = f.term((p as i64 - l) as u64)? / &pq;
            let rhs = -Rational::from(l) * Rational::from(5 * p) / Rational::from(4) * &fp * &fp;
            (lhs, rhs)
        }
        T4_2 | C4_6 => {
            ctx.min_prime(3)?;
            let a = ctx.seq()?;
            ctx.require_even_hypotheses(a)?;
            let a0 = a.term(0)?;
            let ap = a.term(p)?;
            let pap1 = &pq * a.term(p - 1)?;
            if ctx.id == T4_2 {
                let lhs = sum(1..=p - 2, |k| Ok(a.term(k)? / q(p - k)))?;
                (lhs, (Rational::from(2) * ap - a0 - pap1) / &pq)
            } else {
                let lhs = sum(1..=p - 2, |k| Ok(a.term(k)? / q(k)))?;
                let sq = sum(1..=p - 2, |k| Ok(a.term(k)? / q(k * k)))?;
                (lhs, -&pq * sq + (a0 + pap1 - Rational::from(2) * ap) / &pq)
            }
        }
        C4_5 => {
            ctx.min_prime(3)?;
            let b = SequenceHandle::bernoulli();
            let lhs = sum(1..=(p - 3) / 2, |k| Ok(b.term(2 * k)? / q(p - 2 * k)))?;
            let rhs = q(p + 1) / q(2) - (&pq * b.term(p - 1)? + Rational::one()) / &pq;
            (lhs, rhs)
        }
        C4_7 => {
            ctx.min_prime(3)?;
            let (b, c) = ctx.bc()?;
            let v = SequenceHandle::lucas_v(b.clone(), c);
            let bpow = |k: u64| b.pow(k as i64).map_err(SequenceError::Arithmetic);
            let lhs = sum(1..p, |k| Ok(v.term(k)? / (q(p - k) * bpow(k)?)))?;
            let bp = bpow(p)?;
            let rhs = Rational::from(2) * (v.term(p)? - &bp) / (&pq * bp);
            (lhs, rhs)
        }
        C4_8 => {
            ctx.min_prime(5)?;
            let l = SequenceHandle::lucas_num();
            let lhs = sum(1..p, |k| Ok(l.term(k)? / q(k)))?;
            (lhs, Rational::from(2) * (Rational::one() - l.term(p)?) / &pq)
        }
        T4_3a | T4_3b | T4_3c | T4_3d => {
            let a = ctx.seq()?;
            let s = match ctx.id {
                T4_3a => a.clone(),
                T4_3b => SequenceHandle::diff_shift(a),
                T4_3c => SequenceHandle::times_n_shift(a),
                _ => SequenceHandle::integrate_shift(a),
            };
            ctx.require_class(&s, h)?;
            ctx.require_integral(&s, 0..=h)?;
            let lhs = sum(0..=h, |k| {
                let c = central(k);
                Ok(&c * &c * s.term(k)? / Rational::int_pow(16, k))
            })?;
            (lhs, zero)
        }
        C4_9 => {
            if p % 4 != 3 {
                return Err(ctx.not_applicable("needs p = 3 (mod 4)"));
            }
            ctx.min_prime(3)?;
            let b = SequenceHandle::bernoulli();
            let lhs = sum(0..=(p - 3) / 4, |k| {
                let c = binom(4 * k, 2 * k);
                Ok(&c * &c * b.term(2 * k)? / Rational::int_pow(16, 2 * k))
            })?;
            (lhs, Rational::new(-1, 8).expect("nonzero"))
        }
        C4_10 => {
            if p % 4 != 1 {
                return Err(ctx.not_applicable("needs p = 1 (mod 4)"));
            }
            let (a, _) = two_square_decompose(p)?;
            let e = SequenceHandle::euler();
            let lhs = sum(0..=(p - 1) / 4, |k| {
                let c = binom(4 * k, 2 * k);
                Ok(&c * &c * e.term(2 * k)? / Rational::int_pow(32, 2 * k))
            })?;
            let a = Rational::from(a);
            (lhs, Rational::from(2) * &a - &pq / (Rational::from(2) * a))
        }
        T4_4 => {
            let a = ctx.seq()?;
            ctx.require_class(a, h)?;
            ctx.require_integral(a, 0..=h)?;
            let lhs = sum(0..=h, |k| Ok(central(k) / Rational::int_pow(2, k) * a.term(k)?))?;
            (lhs, zero)
        }
        T4_5a | T4_5b | T4_5c => {
            let a = ctx.seq()?;
            if ctx.id == T4_5a {
                ctx.require_parity(a, Sign::Minus, p)?;
            } else {
                ctx.require_parity(a, Sign::Plus, p)?;
            }
            ctx.require_integral(a, 0..=p)?;
            let lhs = match ctx.id {
                T4_5a => sum(0..=h, |k| Ok(central(k) / Rational::int_pow(4, k) * a.term(p - 1 - k)?))?,
                T4_5b => sum(0..=h, |k| {
                    Ok(central(k) * q(k + 1) / Rational::int_pow(4, k) * a.term(p - 2 - k)?)
                })?,
                _ => sum(1..=h, |k| Ok(central(k) / (Rational::int_pow(4, k) * q(k)) * a.term(p - k)?))?,
            };
            (lhs, zero)
        }
        Wolst => {
            ctx.min_prime(3)?;
            (binom(2 * p - 1, p - 1), Rational::one())
        }
    };
    Ok(out)
}

/// Checks one congruence at one prime. Sides that are not p-integral are
/// multiplied by the smallest power of `p` that makes both integral, and the
/// modulus grows by the same power.
pub fn verify_congruence(id: CongruenceId, p: u64, params: &CongruenceParams) -> Result<CongruenceReport, CongruenceError> {
    if p == 2 || !is_prime(p) {
        return Err(CongruenceError::NotPrime(p));
    }
    let ctx = Ctx { id, p, params };
    let (lhs, rhs) = sides(&ctx)?;
    let deficit = |v: Valuation| match v {
        Valuation::Finite(v) if v < 0 => (-v) as u32,
        _ => 0,
    };
    let cleared = deficit(p_valuation(&lhs, p)).max(deficit(p_valuation(&rhs, p)));
    let scale = Rational::from(num_traits::pow(BigInt::from(p), cleared as usize));
    let k = id.exponent() + cleared;
    let lr = reduce_mod(&(&lhs * &scale), p, k)?;
    let rr = reduce_mod(&(&rhs * &scale), p, k)?;
    Ok(CongruenceReport {
        id: id.key().into(),
        p,
        exponent: id.exponent(),
        cleared,
        modulus: lr.modulus(),
        pass: lr == rr,
        lhs: lr,
        rhs: rr,
        lhs_exact: lhs,
        rhs_exact: rhs,
    })
}

/// What happened at one prime of a scan.
#[derive(Debug, Clone)]
pub enum PrimeOutcome {
    Checked(CongruenceReport),
    Skipped(String),
    Failed(CongruenceError),
}

#[derive(Debug, Clone)]
pub struct PrimeScanEntry {
    pub p: u64,
    pub outcome: PrimeOutcome,
}

/// Odd primes in `lo..=hi`, ascending.
pub fn odd_primes(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(3)..=hi).filter(|&n| is_prime(n)).collect()
}

/// Runs `id` at every odd prime in `lo..=hi`. Primes outside the residue
/// class or bound of the congruence are skipped; other errors are recorded
/// and the scan continues.
pub fn scan_primes(id: CongruenceId, lo: u64, hi: u64, params: &CongruenceParams) -> Vec<PrimeScanEntry> {
    odd_primes(lo, hi)
        .into_par_iter()
        .map(|p| {
            let outcome = match verify_congruence(id, p, params) {
                Ok(report) => PrimeOutcome::Checked(report),
                Err(CongruenceError::NotApplicable { reason, .. }) => PrimeOutcome::Skipped(reason),
                Err(e) => PrimeOutcome::Failed(e),
            };
            PrimeScanEntry { p, outcome }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qq(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn valuations() {
        assert_eq!(p_valuation(&qq("1/6"), 3), Valuation::Finite(-1));
        assert_eq!(p_valuation(&qq("9/20"), 3), Valuation::Finite(2));
        assert_eq!(p_valuation(&qq("0"), 7), Valuation::Infinity);
        assert!(Valuation::Finite(1000) < Valuation::Infinity);
    }

    #[test]
    fn reduction() {
        assert_eq!(reduce_mod(&qq("1/2"), 5, 2).unwrap().value, BigInt::from(13));
        assert_eq!(reduce_mod(&qq("0"), 7, 3).unwrap().value, BigInt::from(0));
        assert_eq!(reduce_mod(&qq("-1"), 3, 2).unwrap().value, BigInt::from(8));
        assert!(matches!(reduce_mod(&qq("1/6"), 3, 2), Err(CongruenceError::NotPIntegral { .. })));
    }

    #[test]
    fn legendre_symbols() {
        assert_eq!(legendre(&BigInt::from(5), 11), 1);
        assert_eq!(legendre(&BigInt::from(33), 11), 0);
        assert_eq!(legendre(&BigInt::from(2), 3), -1);
        assert_eq!(legendre(&BigInt::from(-1), 13), 1);
    }

    #[test]
    fn two_squares() {
        assert_eq!(two_square_decompose(5).unwrap(), (1, 2));
        assert_eq!(two_square_decompose(13).unwrap(), (-3, 2));
        assert!(two_square_decompose(7).is_err());
        assert!(matches!(two_square_decompose(21), Err(CongruenceError::NotPrime(21))));
        for p in odd_primes(3, 400).into_iter().filter(|p| p % 4 == 1) {
            let (a, b) = two_square_decompose(p).unwrap();
            assert_eq!((a * a + b * b) as u64, p);
            assert_eq!(a.rem_euclid(4), 1);
            assert!(b > 0 && b % 2 == 0);
        }
    }

    #[test]
    fn prime_context() {
        let c = PrimeContext::new(13).unwrap();
        assert_eq!(c.legendre_5, -1);
        assert_eq!(c.two_square, Some((-3, 2)));
        assert_eq!(PrimeContext::new(11).unwrap().two_square, None);
        assert!(PrimeContext::new(15).is_err());
        assert!(PrimeContext::new(2).is_err());
    }

    #[test]
    fn worked_examples() {
        let fib = CongruenceParams::seq(SequenceHandle::fibonacci());
        let r = verify_congruence(CongruenceId::T4_1, 3, &fib).unwrap();
        assert_eq!(r.lhs_exact, qq("9/20"));
        assert!(r.pass);

        let w = verify_congruence(CongruenceId::Wolst, 5, &CongruenceParams::none()).unwrap();
        assert_eq!(w.lhs_exact, qq("126"));
        assert_eq!(w.modulus, BigInt::from(125));
        assert!(w.pass);

        let c = verify_congruence(CongruenceId::C4_10, 5, &CongruenceParams::none()).unwrap();
        assert_eq!(c.lhs.value, BigInt::from(12));
        assert_eq!(c.rhs.value, BigInt::from(12));
        assert!(c.pass);

        assert!(verify_congruence(CongruenceId::C4_9, 7, &CongruenceParams::none()).unwrap().pass);
        assert!(matches!(
            verify_congruence(CongruenceId::T4_1, 9, &fib),
            Err(CongruenceError::NotPrime(9))
        ));
    }

    #[test]
    fn cleared_denominators_match_valuation_test() {
        for p in odd_primes(5, 60) {
            let r = verify_congruence(CongruenceId::C4_5, p, &CongruenceParams::none()).unwrap();
            let diff = &r.lhs_exact - &r.rhs_exact;
            assert_eq!(r.pass, p_valuation(&diff, p).at_least(2), "p = {p}");
        }
    }

    #[test]
    fn scan_skips_wrong_classes() {
        let entries = scan_primes(CongruenceId::C4_9, 3, 50, &CongruenceParams::none());
        let checked: Vec<u64> = entries
            .iter()
            .filter_map(|e| match &e.outcome {
                PrimeOutcome::Checked(r) => {
                    assert!(r.pass);
                    Some(e.p)
                }
                _ => None,
            })
            .collect();
        assert_eq!(checked, vec![7, 11, 19, 23, 31, 43, 47]);
        assert!(scan_primes(CongruenceId::C4_9, 20, 10, &CongruenceParams::none()).is_empty());
    }

    #[test]
    fn group_keys_expand() {
        assert_eq!(CongruenceId::expand("T4.5").unwrap().len(), 3);
        assert_eq!(CongruenceId::expand("WOLST").unwrap(), vec![CongruenceId::Wolst]);
        assert!(CongruenceId::expand("T4.9").is_err());
    }
}
