//! Named, memoizing generators for the concrete sequences and the operators
//! that derive new sequences from old ones.
//!
//! A [`SequenceHandle`] is cheap to clone and safe to share between threads.
//! Terms are computed in increasing order of index under a per-handle lock, so
//! each index is computed at most once and the fill order never changes a
//! value. Wrappers such as `signed_bernoulli` read through to a shared base
//! handle, so the Bernoulli numbers are generated once per process no matter
//! how many wrappers consult them.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, MutexGuard, OnceLock};

use thiserror::Error;

use crate::exact::{binom, binomial_row, gen_binomial, ExactError, Rational};
use crate::polynomial::Polynomial;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SequenceError {
    #[error("invalid parameter for {kind}: {reason}")]
    InvalidParameter { kind: String, reason: String },
    #[error("unknown sequence kind {0:?}")]
    UnknownKind(String),
    #[error("cannot parse sequence spec {0:?}")]
    Parse(String),
    #[error("index {index} is outside the table of length {len}")]
    OutOfRange { index: u64, len: usize },
    #[error(transparent)]
    Arithmetic(#[from] ExactError),
}

/// The registry of built-in kinds, by canonical name.
pub const KIND_NAMES: &[&str] = &[
    "bernoulli",
    "euler",
    "s_seq",
    "lucas_u",
    "lucas_v",
    "lucas_u_norm",
    "lucas_v_norm",
    "fibonacci",
    "lucas_num",
    "signed_bernoulli",
    "euler_shift",
    "odd_bernoulli",
    "bernoulli_ratio",
    "half_pow",
    "harmonic_recip",
    "central_binom",
    "recip_binom",
    "times_n_shift",
    "integrate_shift",
    "diff_shift",
    "divide_factorial_shift",
    "average",
    "binom_weight",
    "table",
];

#[derive(Clone)]
enum Source {
    Bernoulli,
    Euler,
    SSeq,
    LucasU { b: Rational, c: Rational, name: &'static str },
    LucasV { b: Rational, c: Rational, name: &'static str },
    LucasUNorm { base: SequenceHandle, b: Rational },
    LucasVNorm { base: SequenceHandle, b: Rational },
    SignedBernoulli(SequenceHandle),
    EulerShift(SequenceHandle),
    OddBernoulli(SequenceHandle),
    BernoulliRatio(SequenceHandle),
    HalfPow,
    HarmonicRecip,
    CentralBinom,
    RecipBinom { m: u64 },
    TimesNShift(SequenceHandle),
    IntegrateShift(SequenceHandle),
    DiffShift(SequenceHandle),
    DivideFactorialShift { base: SequenceHandle, l: u64 },
    Average(SequenceHandle),
    BinomWeight { base: SequenceHandle, lambda: Rational },
    Table(Arc<[Rational]>),
}

struct Inner {
    source: Source,
    terms: Mutex<Vec<Rational>>,
    transforms: Mutex<Vec<Rational>>,
}

/// A named, parameterized, memoizing generator of rationals indexed by `n >= 0`.
#[derive(Clone)]
pub struct SequenceHandle(Arc<Inner>);

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

fn shared(cell: &'static OnceLock<SequenceHandle>, source: fn() -> Source) -> SequenceHandle {
    cell.get_or_init(|| SequenceHandle::from_source(source()))
        .clone()
}

static BERNOULLI: OnceLock<SequenceHandle> = OnceLock::new();
static EULER: OnceLock<SequenceHandle> = OnceLock::new();

impl SequenceHandle {
    fn from_source(source: Source) -> Self {
        SequenceHandle(Arc::new(Inner {
            source,
            terms: Mutex::new(Vec::new()),
            transforms: Mutex::new(Vec::new()),
        }))
    }

    /// Bernoulli numbers with `B_1 = -1/2`.
    pub fn bernoulli() -> Self {
        shared(&BERNOULLI, || Source::Bernoulli)
    }

    /// Euler numbers `E_n` (coefficients of `2e^t/(e^{2t}+1)`).
    pub fn euler() -> Self {
        shared(&EULER, || Source::Euler)
    }

    /// The sequence with `S_n + sum_k binom(n,k) S_k = 2`.
    pub fn s_seq() -> Self {
        Self::from_source(Source::SSeq)
    }

    pub fn lucas_u(b: Rational, c: Rational) -> Self {
        Self::from_source(Source::LucasU { b, c, name: "lucas_u" })
    }

    pub fn lucas_v(b: Rational, c: Rational) -> Self {
        Self::from_source(Source::LucasV { b, c, name: "lucas_v" })
    }

    /// `U_n(b,c) / b^n`; requires `b != 0`.
    pub fn lucas_u_norm(b: Rational, c: Rational) -> Result<Self, SequenceError> {
        if b.is_zero() {
            return Err(invalid("lucas_u_norm", "b must be nonzero"));
        }
        let base = Self::lucas_u(b.clone(), c);
        Ok(Self::from_source(Source::LucasUNorm { base, b }))
    }

    /// `V_n(b,c) / b^n`; requires `b != 0`.
    pub fn lucas_v_norm(b: Rational, c: Rational) -> Result<Self, SequenceError> {
        if b.is_zero() {
            return Err(invalid("lucas_v_norm", "b must be nonzero"));
        }
        let base = Self::lucas_v(b.clone(), c);
        Ok(Self::from_source(Source::LucasVNorm { base, b }))
    }

    /// `F_n = U_n(1, -1)`.
    pub fn fibonacci() -> Self {
        Self::from_source(Source::LucasU {
            b: Rational::one(),
            c: -Rational::one(),
            name: "fibonacci",
        })
    }

    /// `L_n = V_n(1, -1)`.
    pub fn lucas_num() -> Self {
        Self::from_source(Source::LucasV {
            b: Rational::one(),
            c: -Rational::one(),
            name: "lucas_num",
        })
    }

    /// `(-1)^n B_n`.
    pub fn signed_bernoulli() -> Self {
        Self::from_source(Source::SignedBernoulli(Self::bernoulli()))
    }

    /// `(E_n - 1) / 2^n`.
    pub fn euler_shift() -> Self {
        Self::from_source(Source::EulerShift(Self::euler()))
    }

    /// `(-1)^n (2^n - 1) B_n`.
    pub fn odd_bernoulli() -> Self {
        Self::from_source(Source::OddBernoulli(Self::bernoulli()))
    }

    /// `(-1)^{n+1} (2^{n+1} - 1) B_{n+1} / (n+1)`.
    pub fn bernoulli_ratio() -> Self {
        Self::from_source(Source::BernoulliRatio(Self::bernoulli()))
    }

    /// `1 / 2^n`.
    pub fn half_pow() -> Self {
        Self::from_source(Source::HalfPow)
    }

    /// `1 / (n+1)`.
    pub fn harmonic_recip() -> Self {
        Self::from_source(Source::HarmonicRecip)
    }

    /// `binom(2n, n) / 4^n`.
    pub fn central_binom() -> Self {
        Self::from_source(Source::CentralBinom)
    }

    /// `1 / binom(n + 2m - 1, m)` for `m >= 1`.
    pub fn recip_binom(m: u64) -> Result<Self, SequenceError> {
        if m == 0 {
            return Err(invalid("recip_binom", "m must be at least 1"));
        }
        Ok(Self::from_source(Source::RecipBinom { m }))
    }

    /// `b_n = n a_{n-1}`, with `b_0 = 0`.
    pub fn times_n_shift(base: &SequenceHandle) -> Self {
        Self::from_source(Source::TimesNShift(base.clone()))
    }

    /// `b_n = a_{n+1} / (n+1)`.
    pub fn integrate_shift(base: &SequenceHandle) -> Self {
        Self::from_source(Source::IntegrateShift(base.clone()))
    }

    /// `b_n = a_{n+2} - a_{n+1}`.
    pub fn diff_shift(base: &SequenceHandle) -> Self {
        Self::from_source(Source::DiffShift(base.clone()))
    }

    /// `b_n = A_{n+l} / ((n+1)(n+2)...(n+l))`, without precondition checks.
    /// See [`crate::transforms::divide_factorial_shift`] for the checked form.
    pub fn divide_factorial_shift_unchecked(base: &SequenceHandle, l: u64) -> Self {
        Self::from_source(Source::DivideFactorialShift { base: base.clone(), l })
    }

    /// `A_n = (a_0 + ... + a_n) / ((n+1)(n+2))`, without precondition checks.
    /// See [`crate::transforms::average_transform`] for the checked form.
    pub fn average_unchecked(base: &SequenceHandle) -> Self {
        Self::from_source(Source::Average(base.clone()))
    }

    /// `b_n = (-1)^n binom(lambda, n) a_n`.
    pub fn binom_weight(base: &SequenceHandle, lambda: Rational) -> Self {
        Self::from_source(Source::BinomWeight { base: base.clone(), lambda })
    }

    /// A finite table; indexing past the end is an error.
    pub fn table(values: Vec<Rational>) -> Self {
        Self::from_source(Source::Table(values.into()))
    }

    /// Parses `kind`, `kind:key=val,...`, `op(inner)` or `op(inner):key=val`.
    pub fn parse(spec: &str) -> Result<Self, SequenceError> {
        spec.parse()
    }

    /// Exact `n`-th term, memoized.
    pub fn term(&self, n: u64) -> Result<Rational, SequenceError> {
        if let Source::Table(values) = &self.0.source {
            return values.get(n as usize).cloned().ok_or(SequenceError::OutOfRange {
                index: n,
                len: values.len(),
            });
        }
        let mut cache = lock(&self.0.terms);
        while cache.len() as u64 <= n {
            let next = self.compute(cache.len() as u64, &cache)?;
            cache.push(next);
        }
        Ok(cache[n as usize].clone())
    }

    /// Terms `0..=upto`.
    pub fn prefix(&self, upto: u64) -> Result<Vec<Rational>, SequenceError> {
        // filling the last index fills everything before it
        self.term(upto)?;
        (0..=upto).map(|n| self.term(n)).collect()
    }

    /// Terms `0..len`; empty when `len == 0`.
    pub fn take(&self, len: usize) -> Result<Vec<Rational>, SequenceError> {
        if len == 0 {
            return Ok(Vec::new());
        }
        self.prefix(len as u64 - 1)
    }

    /// Length of a finite table, `None` for generated sequences.
    pub fn table_len(&self) -> Option<usize> {
        match &self.0.source {
            Source::Table(values) => Some(values.len()),
            _ => None,
        }
    }

    pub(crate) fn transform_cache(&self) -> MutexGuard<'_, Vec<Rational>> {
        lock(&self.0.transforms)
    }

    pub fn ptr_eq(&self, other: &SequenceHandle) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    fn compute(&self, n: u64, prev: &[Rational]) -> Result<Rational, SequenceError> {
        let q = |k: u64| Rational::from(k);
        Ok(match &self.0.source {
            Source::Bernoulli => {
                if n == 0 {
                    Rational::one()
                } else {
                    // sum_{k=0}^{n} binom(n+1, k) B_k = 0
                    let row = binomial_row(n + 1);
                    let s: Rational = prev
                        .iter()
                        .enumerate()
                        .filter(|(_, b)| !b.is_zero())
                        .map(|(k, b)| b * Rational::from_int(row[k].clone()))
                        .sum();
                    -s / q(n + 1)
                }
            }
            Source::Euler => {
                if n == 0 {
                    Rational::one()
                } else if n % 2 == 1 {
                    Rational::zero()
                } else {
                    let row = binomial_row(n);
                    -(0..n)
                        .step_by(2)
                        .map(|k| &prev[k as usize] * Rational::from_int(row[k as usize].clone()))
                        .sum::<Rational>()
                }
            }
            Source::SSeq => {
                let row = binomial_row(n);
                let s: Rational = prev
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * Rational::from_int(row[k].clone()))
                    .sum();
                (Rational::from(2i64) - s) / Rational::from(2i64)
            }
            Source::LucasU { b, c, .. } => match n {
                0 => Rational::zero(),
                1 => Rational::one(),
                _ => b * &prev[n as usize - 1] - c * &prev[n as usize - 2],
            },
            Source::LucasV { b, c, .. } => match n {
                0 => Rational::from(2i64),
                1 => b.clone(),
                _ => b * &prev[n as usize - 1] - c * &prev[n as usize - 2],
            },
            Source::LucasUNorm { base, b } | Source::LucasVNorm { base, b } => {
                base.term(n)? / b.pow(n as i64)?
            }
            Source::SignedBernoulli(base) => Rational::sign_pow(n) * base.term(n)?,
            Source::EulerShift(base) => (base.term(n)? - Rational::one()) / Rational::int_pow(2, n),
            Source::OddBernoulli(base) => {
                Rational::sign_pow(n) * (Rational::int_pow(2, n) - Rational::one()) * base.term(n)?
            }
            Source::BernoulliRatio(base) => {
                Rational::sign_pow(n + 1)
                    * (Rational::int_pow(2, n + 1) - Rational::one())
                    * base.term(n + 1)?
                    / q(n + 1)
            }
            Source::HalfPow => Rational::one() / Rational::int_pow(2, n),
            Source::HarmonicRecip => Rational::one() / q(n + 1),
            Source::CentralBinom => binom(2 * n, n) / Rational::int_pow(4, n),
            Source::RecipBinom { m } => Rational::one() / binom(n + 2 * m - 1, *m),
            Source::TimesNShift(base) => {
                if n == 0 {
                    Rational::zero()
                } else {
                    q(n) * base.term(n - 1)?
                }
            }
            Source::IntegrateShift(base) => base.term(n + 1)? / q(n + 1),
            Source::DiffShift(base) => base.term(n + 2)? - base.term(n + 1)?,
            Source::DivideFactorialShift { base, l } => {
                let rising: Rational = (1..=*l).map(|j| q(n + j)).product();
                base.term(n + l)? / rising
            }
            Source::Average(base) => {
                let total: Rational = base.prefix(n)?.iter().sum();
                total / (q(n + 1) * q(n + 2))
            }
            Source::BinomWeight { base, lambda } => {
                Rational::sign_pow(n) * gen_binomial(lambda, n) * base.term(n)?
            }
            Source::Table(_) => unreachable!("tables are served without the cache"),
        })
    }
}

fn invalid(kind: &str, reason: &str) -> SequenceError {
    SequenceError::InvalidParameter {
        kind: kind.to_string(),
        reason: reason.to_string(),
    }
}

impl fmt::Display for SequenceHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.source {
            Source::Bernoulli => write!(f, "bernoulli"),
            Source::Euler => write!(f, "euler"),
            Source::SSeq => write!(f, "s_seq"),
            Source::LucasU { b, c, name } | Source::LucasV { b, c, name } => {
                if name.starts_with("lucas_") && *name != "lucas_num" {
                    write!(f, "{name}:b={b},c={c}")
                } else {
                    write!(f, "{name}")
                }
            }
            Source::LucasUNorm { base, b } => write!(f, "lucas_u_norm:b={b},c={}", lucas_c(base)),
            Source::LucasVNorm { base, b } => write!(f, "lucas_v_norm:b={b},c={}", lucas_c(base)),
            Source::SignedBernoulli(_) => write!(f, "signed_bernoulli"),
            Source::EulerShift(_) => write!(f, "euler_shift"),
            Source::OddBernoulli(_) => write!(f, "odd_bernoulli"),
            Source::BernoulliRatio(_) => write!(f, "bernoulli_ratio"),
            Source::HalfPow => write!(f, "half_pow"),
            Source::HarmonicRecip => write!(f, "harmonic_recip"),
            Source::CentralBinom => write!(f, "central_binom"),
            Source::RecipBinom { m } => write!(f, "recip_binom:m={m}"),
            Source::TimesNShift(base) => write!(f, "times_n_shift({base})"),
            Source::IntegrateShift(base) => write!(f, "integrate_shift({base})"),
            Source::DiffShift(base) => write!(f, "diff_shift({base})"),
            Source::DivideFactorialShift { base, l } => {
                write!(f, "divide_factorial_shift({base}):l={l}")
            }
            Source::Average(base) => write!(f, "average({base})"),
            Source::BinomWeight { base, lambda } => write!(f, "binom_weight({base}):lambda={lambda}"),
            Source::Table(values) => {
                let vals: Vec<String> = values.iter().map(Rational::to_string).collect();
                write!(f, "table:{}", vals.join(";"))
            }
        }
    }
}

fn lucas_c(handle: &SequenceHandle) -> Rational {
    match &handle.0.source {
        Source::LucasU { c, .. } | Source::LucasV { c, .. } => c.clone(),
        _ => unreachable!("normalized Lucas wrappers always hold a Lucas base"),
    }
}

impl fmt::Debug for SequenceHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SequenceHandle({self})")
    }
}

/// `key=value` pairs from the parameter tail of a spec.
struct SpecParams<'a> {
    kind: &'a str,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> SpecParams<'a> {
    fn parse(kind: &'a str, tail: Option<&'a str>) -> Result<Self, SequenceError> {
        let mut pairs = Vec::new();
        if let Some(tail) = tail {
            for item in tail.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                let (k, v) = item
                    .split_once('=')
                    .ok_or_else(|| SequenceError::Parse(format!("{kind}:{tail}")))?;
                pairs.push((k.trim(), v.trim()));
            }
        }
        Ok(SpecParams { kind, pairs })
    }

    fn rational(&self, key: &str) -> Result<Rational, SequenceError> {
        let raw = self
            .pairs
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| invalid(self.kind, &format!("missing parameter {key}")))?;
        Ok(raw.parse::<Rational>()?)
    }

    fn natural(&self, key: &str) -> Result<u64, SequenceError> {
        let r = self.rational(key)?;
        r.to_i64()
            .filter(|v| *v >= 0)
            .map(|v| v as u64)
            .ok_or_else(|| invalid(self.kind, &format!("{key} must be a natural number")))
    }

    fn only(&self, allowed: &[&str]) -> Result<(), SequenceError> {
        match self.pairs.iter().find(|(k, _)| !allowed.contains(k)) {
            Some((k, _)) => Err(invalid(self.kind, &format!("unexpected parameter {k}"))),
            None => Ok(()),
        }
    }
}

impl FromStr for SequenceHandle {
    type Err = SequenceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let paren = s.find('(');
        let colon = s.find(':');
        let wrapped = matches!((paren, colon), (Some(p), Some(c)) if p < c) || (paren.is_some() && colon.is_none());
        if wrapped {
            let open = paren.unwrap();
            let close = matching_paren(s, open).ok_or_else(|| SequenceError::Parse(s.to_string()))?;
            let op = s[..open].trim();
            let inner: SequenceHandle = s[open + 1..close].parse()?;
            let rest = s[close + 1..].trim();
            let tail = match rest {
                "" => None,
                r => Some(r.strip_prefix(':').ok_or_else(|| SequenceError::Parse(s.to_string()))?),
            };
            let params = SpecParams::parse(op, tail)?;
            return match op {
                "times_n_shift" => params.only(&[]).map(|_| Self::times_n_shift(&inner)),
                "integrate_shift" => params.only(&[]).map(|_| Self::integrate_shift(&inner)),
                "diff_shift" => params.only(&[]).map(|_| Self::diff_shift(&inner)),
                "average" => params.only(&[]).map(|_| Self::average_unchecked(&inner)),
                "divide_factorial_shift" => {
                    params.only(&["l"])?;
                    Ok(Self::divide_factorial_shift_unchecked(&inner, params.natural("l")?))
                }
                "binom_weight" => {
                    params.only(&["lambda"])?;
                    Ok(Self::binom_weight(&inner, params.rational("lambda")?))
                }
                other => Err(SequenceError::UnknownKind(other.to_string())),
            };
        }
        let (kind, tail) = match s.split_once(':') {
            Some((k, t)) => (k.trim(), Some(t)),
            None => (s, None),
        };
        if kind == "table" {
            let values = tail
                .unwrap_or("")
                .split([';', ','])
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(|v| v.parse::<Rational>())
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(Self::table(values));
        }
        let params = SpecParams::parse(kind, tail)?;
        let plain = |h: SequenceHandle| params.only(&[]).map(|_| h);
        match kind {
            "bernoulli" => plain(Self::bernoulli()),
            "euler" => plain(Self::euler()),
            "s_seq" => plain(Self::s_seq()),
            "fibonacci" => plain(Self::fibonacci()),
            "lucas_num" => plain(Self::lucas_num()),
            "signed_bernoulli" => plain(Self::signed_bernoulli()),
            "euler_shift" => plain(Self::euler_shift()),
            "odd_bernoulli" => plain(Self::odd_bernoulli()),
            "bernoulli_ratio" => plain(Self::bernoulli_ratio()),
            "half_pow" => plain(Self::half_pow()),
            "harmonic_recip" => plain(Self::harmonic_recip()),
            "central_binom" => plain(Self::central_binom()),
            "recip_binom" => {
                params.only(&["m"])?;
                Self::recip_binom(params.natural("m")?)
            }
            "lucas_u" | "lucas_v" | "lucas_u_norm" | "lucas_v_norm" => {
                params.only(&["b", "c"])?;
                let (b, c) = (params.rational("b")?, params.rational("c")?);
                match kind {
                    "lucas_u" => Ok(Self::lucas_u(b, c)),
                    "lucas_v" => Ok(Self::lucas_v(b, c)),
                    "lucas_u_norm" => Self::lucas_u_norm(b, c),
                    _ => Self::lucas_v_norm(b, c),
                }
            }
            other => Err(SequenceError::UnknownKind(other.to_string())),
        }
    }
}

fn matching_paren(s: &str, open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (i, ch) in s.char_indices().skip_while(|(i, _)| *i < open) {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// `B_n(x) = sum_k binom(n,k) B_k x^{n-k}` as a polynomial in `x`.
pub fn bernoulli_polynomial(n: u64) -> Polynomial {
    let b = SequenceHandle::bernoulli();
    let coeffs = (0..=n)
        .map(|i| {
            // coefficient of x^i comes from k = n - i
            let k = n - i;
            binom(n, k) * b.term(k).expect("bernoulli terms are total")
        })
        .collect();
    Polynomial::new(coeffs)
}

/// Exact value of the Bernoulli polynomial `B_n(x)`.
pub fn bernoulli_poly_eval(n: u64, x: &Rational) -> Rational {
    let b = SequenceHandle::bernoulli();
    let mut acc = Rational::zero();
    let mut xp = Rational::one();
    // accumulate from k = n down to 0 so the power of x grows
    for k in (0..=n).rev() {
        acc += binom(n, k) * b.term(k).expect("bernoulli terms are total") * &xp;
        xp = xp * x;
    }
    acc
}
