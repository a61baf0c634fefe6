//! Registry-driven verification of the recurrence identities satisfied by even
//! and odd sequences.
//!
//! Every entry computes an exact left- and right-hand side for one parameter
//! tuple. Hypotheses (parity of the sequence on the prefix actually used,
//! parity of `n`, lower bounds) are checked first and reported as
//! [`IdentityError::Hypothesis`], never as a failed identity, so a scan can tell
//! "not applicable" apart from "refuted".

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exact::{binom, binomial_row, gen_binomial, Rational};
use crate::polynomial::Polynomial;
use crate::sequences::{SequenceError, SequenceHandle};
use crate::transforms::{gf_mobius_transform, parity_signs, shifted_signs, Sign};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdentityError {
    #[error("{id}: hypothesis not satisfied: {reason}")]
    Hypothesis { id: String, reason: String },
    #[error("{id}: missing parameter {name}")]
    MissingParam { id: String, name: &'static str },
    #[error("unknown identity {0:?}")]
    UnknownId(String),
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

macro_rules! identity_ids {
    ($($variant:ident => $key:literal),* $(,)?) => {
        /// Registry keys of the verifiable identities.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum IdentityId {
            $($variant),*
        }

        impl IdentityId {
            pub const ALL: &'static [IdentityId] = &[$(IdentityId::$variant),*];

            pub fn key(self) -> &'static str {
                match self {
                    $(IdentityId::$variant => $key),*
                }
            }
        }
    };
}

identity_ids! {
    T2_1 => "T2.1",
    C2_1a => "C2.1a",
    C2_1b => "C2.1b",
    T2_2a => "T2.2a",
    T2_2b => "T2.2b",
    T2_2c => "T2.2c",
    C2_2 => "C2.2",
    C2_3 => "C2.3",
    C2_4 => "C2.4",
    L2_3 => "L2.3",
    L2_4 => "L2.4",
    T2_3 => "T2.3",
    T2_6 => "T2.6",
    T2_7i => "T2.7i",
    T2_7ii => "T2.7ii",
    C2_6i => "C2.6i",
    C2_6ii => "C2.6ii",
    C2_7i => "C2.7i",
    C2_7ii => "C2.7ii",
    T2_10Plus => "T2.10+",
    T2_10Minus => "T2.10-",
    C2_8Plus => "C2.8+",
    C2_8Minus => "C2.8-",
    T2_11Plus => "T2.11+",
    T2_11Minus => "T2.11-",
    E2_5 => "E2.5",
    E2_6 => "E2.6",
    E2_7 => "E2.7",
    C2_5 => "C2.5",
    T3_1 => "T3.1",
    C3_1 => "C3.1",
    C3_2 => "C3.2",
    C3_3 => "C3.3",
    C3_4 => "C3.4",
}

impl IdentityId {
    /// Resolves a key, accepting `E2.2` for `C2.5` and a bare `T2.10`, `C2.8`
    /// or `T2.11` when an explicit sign is supplied.
    pub fn resolve(key: &str, sign: Option<Sign>) -> Result<IdentityId, IdentityError> {
        let key = key.trim();
        if key == "E2.2" {
            return Ok(IdentityId::C2_5);
        }
        let signed = match (key, sign) {
            ("T2.10", Some(Sign::Plus)) => Some(IdentityId::T2_10Plus),
            ("T2.10", Some(Sign::Minus)) => Some(IdentityId::T2_10Minus),
            ("C2.8", Some(Sign::Plus)) => Some(IdentityId::C2_8Plus),
            ("C2.8", Some(Sign::Minus)) => Some(IdentityId::C2_8Minus),
            ("T2.11", Some(Sign::Plus)) => Some(IdentityId::T2_11Plus),
            ("T2.11", Some(Sign::Minus)) => Some(IdentityId::T2_11Minus),
            _ => None,
        };
        if let Some(id) = signed {
            return Ok(id);
        }
        IdentityId::ALL
            .iter()
            .copied()
            .find(|id| id.key() == key)
            .ok_or_else(|| IdentityError::UnknownId(key.to_string()))
    }
}

impl FromStr for IdentityId {
    type Err = IdentityError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IdentityId::resolve(s, None)
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Parameter record for one evaluation. Unused fields are ignored by
/// identities that do not need them.
#[derive(Debug, Clone, Default)]
pub struct IdentityParams {
    /// The primary sequence (`A`, or `a` in two-sequence identities).
    pub seq: Option<SequenceHandle>,
    /// The second sequence of T2.6 (`b`) and T2.7 (`A`).
    pub seq2: Option<SequenceHandle>,
    pub n: u64,
    pub m: Option<Rational>,
    pub p: Option<Rational>,
    /// `None` in the lambda-parameterized identities means "verify as a
    /// polynomial identity in lambda".
    pub lambda: Option<Rational>,
    pub r: Option<u64>,
    pub bc: Option<(Rational, Rational)>,
    /// The function `F` of T2.10, as `F(0), F(1), ...`.
    pub table: Option<Vec<Rational>>,
    pub sign: Option<Sign>,
}

impl IdentityParams {
    pub fn new(n: u64) -> Self {
        IdentityParams {
            n,
            ..Default::default()
        }
    }

    pub fn seq(mut self, seq: SequenceHandle) -> Self {
        self.seq = Some(seq);
        self
    }

    pub fn seq2(mut self, seq: SequenceHandle) -> Self {
        self.seq2 = Some(seq);
        self
    }

    pub fn m(mut self, m: impl Into<Rational>) -> Self {
        self.m = Some(m.into());
        self
    }

    pub fn p(mut self, p: impl Into<Rational>) -> Self {
        self.p = Some(p.into());
        self
    }

    pub fn lambda(mut self, lambda: impl Into<Rational>) -> Self {
        self.lambda = Some(lambda.into());
        self
    }

    pub fn r(mut self, r: u64) -> Self {
        self.r = Some(r);
        self
    }

    pub fn bc(mut self, b: impl Into<Rational>, c: impl Into<Rational>) -> Self {
        self.bc = Some((b.into(), c.into()));
        self
    }

    pub fn table(mut self, table: Vec<Rational>) -> Self {
        self.table = Some(table);
        self
    }

    pub fn sign(mut self, sign: Sign) -> Self {
        self.sign = Some(sign);
        self
    }

    /// Flat, ordered `name -> value` view used in reports.
    pub fn record(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        if let Some(s) = &self.seq {
            out.insert("seq".into(), s.to_string());
        }
        if let Some(s) = &self.seq2 {
            out.insert("seq2".into(), s.to_string());
        }
        out.insert("n".into(), self.n.to_string());
        if let Some(m) = &self.m {
            out.insert("m".into(), m.to_string());
        }
        if let Some(p) = &self.p {
            out.insert("p".into(), p.to_string());
        }
        if let Some(l) = &self.lambda {
            out.insert("lambda".into(), l.to_string());
        }
        if let Some(r) = self.r {
            out.insert("r".into(), r.to_string());
        }
        if let Some((b, c)) = &self.bc {
            out.insert("b".into(), b.to_string());
            out.insert("c".into(), c.to_string());
        }
        if let Some(t) = &self.table {
            let vals: Vec<String> = t.iter().map(Rational::to_string).collect();
            out.insert("table".into(), vals.join(";"));
        }
        if let Some(s) = self.sign {
            out.insert("sign".into(), s.symbol().into());
        }
        out
    }
}

/// Exact outcome of one identity evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub id: String,
    pub params: BTreeMap<String, String>,
    pub lhs: Rational,
    pub rhs: Rational,
    pub residual: Rational,
    pub pass: bool,
    /// For identities checked as polynomials: the residual coefficients in
    /// `x` (C2.8) or the residual at each sampled lambda (T2.7, C2.6, C2.7).
    /// `lhs` is then the first nonzero entry, or zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_vector: Option<Vec<Rational>>,
}

impl IdentityReport {
    fn scalar(id: IdentityId, params: &IdentityParams, lhs: Rational, rhs: Rational) -> Self {
        let residual = &lhs - &rhs;
        IdentityReport {
            id: id.key().to_string(),
            params: params.record(),
            pass: residual.is_zero(),
            lhs,
            rhs,
            residual,
            residual_vector: None,
        }
    }

    fn vector(id: IdentityId, params: &IdentityParams, values: Vec<Rational>) -> Self {
        let lhs = values.iter().find(|v| !v.is_zero()).cloned().unwrap_or_default();
        let mut report = IdentityReport::scalar(id, params, lhs, Rational::zero());
        report.residual_vector = Some(values);
        report
    }
}

fn hypothesis(id: IdentityId, reason: impl Into<String>) -> IdentityError {
    IdentityError::Hypothesis {
        id: id.key().to_string(),
        reason: reason.into(),
    }
}

fn need<'a, T>(id: IdentityId, value: &'a Option<T>, name: &'static str) -> Result<&'a T, IdentityError> {
    value.as_ref().ok_or(IdentityError::MissingParam {
        id: id.key().to_string(),
        name,
    })
}

fn natural(id: IdentityId, value: &Rational, name: &str) -> Result<u64, IdentityError> {
    value
        .to_i64()
        .filter(|v| *v >= 0)
        .map(|v| v as u64)
        .ok_or_else(|| hypothesis(id, format!("{name} must be a natural number, got {value}")))
}

fn parity_word(sign: Sign) -> &'static str {
    match sign {
        Sign::Plus => "even",
        Sign::Minus => "odd",
    }
}

/// Signs for which `seq` is even/odd on `0..=upto`; errors when it is neither.
fn seq_signs(id: IdentityId, seq: &SequenceHandle, upto: u64) -> Result<Vec<Sign>, IdentityError> {
    let signs = parity_signs(seq, upto)?;
    if signs.is_empty() {
        return Err(hypothesis(id, format!("{seq} is neither even nor odd up to {upto}")));
    }
    Ok(signs)
}

fn require_parity(id: IdentityId, seq: &SequenceHandle, want: Sign, upto: u64) -> Result<(), IdentityError> {
    if parity_signs(seq, upto)?.contains(&want) {
        Ok(())
    } else {
        Err(hypothesis(
            id,
            format!("{seq} is not {} up to {upto}", parity_word(want)),
        ))
    }
}

fn require(id: IdentityId, cond: bool, reason: impl Into<String>) -> Result<(), IdentityError> {
    if cond {
        Ok(())
    } else {
        Err(hypothesis(id, reason))
    }
}

fn q(v: u64) -> Rational {
    Rational::from(v)
}

fn rint(v: i64) -> Rational {
    Rational::from(v)
}

/// Exact evaluation of one registry identity.
pub fn verify_identity(id: IdentityId, params: &IdentityParams) -> Result<IdentityReport, IdentityError> {
    use IdentityId::*;
    let n = params.n;
    let scalar = |lhs, rhs| Ok(IdentityReport::scalar(id, params, lhs, rhs));
    match id {
        T2_1 => {
            let a = need(id, &params.seq, "seq")?;
            require(id, n % 2 == 1, "n must be odd")?;
            require_parity(id, a, Sign::Plus, n)?;
            let row = gen_binomial_row_half(n);
            let lhs = (0..=n)
                .map(|k| Ok(&row[k as usize] * Rational::sign_pow(k) * a.term(n - k)?))
                .sum_result()?;
            scalar(lhs, Rational::zero())
        }
        C2_1a | C2_1b => {
            require(id, n % 2 == 1, "n must be odd")?;
            let b = SequenceHandle::bernoulli();
            let row = gen_binomial_row_half(n);
            let lhs = (0..=n)
                .map(|k| {
                    let c = &row[k as usize];
                    if id == C2_1a {
                        Ok(c * b.term(n - k)?)
                    } else {
                        let j = n - k + 1;
                        Ok(c * (Rational::int_pow(2, j) - Rational::one()) * b.term(j)? / q(j))
                    }
                })
                .sum_result()?;
            scalar(lhs, Rational::zero())
        }
        T2_2a => {
            let a = need(id, &params.seq, "seq")?;
            require_parity(id, a, Sign::Minus, 2 * n)?;
            let row = binomial_row(n);
            let lhs = (0..=n)
                .map(|k| Ok(Rational::from_int(row[k as usize].clone()) * Rational::sign_pow(k) * a.term(2 * n - k)?))
                .sum_result()?;
            scalar(lhs, Rational::zero())
        }
        T2_2b => {
            let a = need(id, &params.seq, "seq")?;
            require_parity(id, a, Sign::Plus, (2 * n).max(1) - 1)?;
            let row = binomial_row(n);
            let lhs = (0..=n)
                .map(|k| {
                    let j = 2 * n - k;
                    if j == 0 {
                        return Ok(Rational::zero());
                    }
                    Ok(Rational::from_int(row[k as usize].clone()) * Rational::sign_pow(k) * q(j) * a.term(j - 1)?)
                })
                .sum_result()?;
            scalar(lhs, Rational::zero())
        }
        T2_2c => {
            let a = need(id, &params.seq, "seq")?;
            require_parity(id, a, Sign::Plus, 2 * n + 1)?;
            // without A_0 = 0 the shifted sequence A_{n+1}/(n+1) is not odd
            require(id, a.term(0)?.is_zero(), format!("{a} must have A_0 = 0"))?;
            let row = binomial_row(n);
            let lhs = (0..=n)
                .map(|k| {
                    let j = 2 * n - k + 1;
                    Ok(Rational::from_int(row[k as usize].clone()) * Rational::sign_pow(k) * a.term(j)? / q(j))
                })
                .sum_result()?;
            scalar(lhs, Rational::zero())
        }
        C2_2 => {
            let e = SequenceHandle::euler();
            let lhs = (0..=n / 2)
                .map(|k| Ok(binom(n, 2 * k) * Rational::int_pow(2, 2 * k) * e.term(2 * n - 2 * k)?))
                .sum_result()?;
            scalar(lhs, Rational::sign_pow(n))
        }
        C2_3 => {
            require(id, n >= 3, "n must be at least 3")?;
            let b = SequenceHandle::bernoulli();
            let lhs = (1..=(n + 1) / 2)
                .map(|r| Ok(binom(n, 2 * r - 1) * q(2 * n - 2 * r + 1) * b.term(2 * n - 2 * r)?))
                .sum_result()?;
            scalar(lhs, Rational::zero())
        }
        C2_4 => {
            require(id, n >= 2, "n must be at least 2")?;
            let b = SequenceHandle::bernoulli();
            let lhs = (0..=n / 2)
                .map(|r| {
                    let j = 2 * n - 2 * r;
                    Ok(binom(n, 2 * r) * (Rational::int_pow(2, j) - Rational::one()) * b.term(j)?)
                })
                .sum_result()?;
            scalar(lhs, Rational::zero())
        }
        L2_3 => {
            let m = natural(id, need(id, &params.m, "m")?, "m")?;
            require(id, m <= n, "m must not exceed n")?;
            let lhs: Rational = (m..=n)
                .map(|k| binom(n, k) * binom(n + k, k) * Rational::sign_pow(n - k) * binom(k, m))
                .sum();
            scalar(lhs, binom(n, m) * binom(m + n, m))
        }
        L2_4 => {
            let a = need(id, &params.seq, "seq")?;
            let terms = a.prefix(n)?;
            let lhs: Rational = (0..=n)
                .map(|k| {
                    let inner: Rational = (0..=k).map(|s| binom(k, s) * &terms[s as usize]).sum();
                    binom(n, k) * binom(n + k, k) * (&terms[k as usize] - Rational::sign_pow(n - k) * inner)
                })
                .sum();
            scalar(lhs, Rational::zero())
        }
        T2_3 => {
            let a = need(id, &params.seq, "seq")?;
            let signs = seq_signs(id, a, n)?;
            require(
                id,
                signs.iter().any(|s| s.times(Sign::from_parity(n)) == Sign::Minus),
                format!("needs an even sequence with odd n or an odd sequence with even n (n = {n})"),
            )?;
            let lhs = (0..=n)
                .map(|k| Ok(binom(n, k) * binom(n + k, k) * Rational::sign_pow(k) * a.term(k)?))
                .sum_result()?;
            scalar(lhs, Rational::zero())
        }
        T2_6 => {
            let a = need(id, &params.seq, "seq")?;
            let b = need(id, &params.seq2, "seq2")?;
            let m = params.m.clone().unwrap_or_default();
            let p = params.p.clone().unwrap_or_default();
            let alphas = shifted_signs(a, &m, n)?;
            let betas = shifted_signs(b, &p, n)?;
            let n_sign = Sign::from_parity(n);
            let applicable = alphas
                .iter()
                .any(|al| betas.iter().any(|be| al.times(*be).times(n_sign) == Sign::Minus));
            require(
                id,
                applicable,
                format!("alpha + beta + n must be odd (alpha signs {alphas:?}, beta signs {betas:?}, n = {n})"),
            )?;
            scalar(mixed_parity_sum(a, b, &m, &p, n)?, Rational::zero())
        }
        T2_7i | T2_7ii | C2_6i | C2_6ii | C2_7i | C2_7ii => lambda_identity(id, params),
        T2_10Plus | T2_10Minus => {
            let a = need(id, &params.seq, "seq")?;
            let f = need(id, &params.table, "table")?;
            require(
                id,
                f.len() as u64 > n,
                format!("F table has {} entries, needs at least {}", f.len(), n + 1),
            )?;
            let sign = if id == T2_10Plus { Sign::Plus } else { Sign::Minus };
            require_parity(id, a, sign, n)?;
            let lhs = (0..=n)
                .map(|k| {
                    let inner: Rational = (0..=k)
                        .map(|s| {
                            let fs = &f[s as usize];
                            let fns = &f[(n - s) as usize];
                            let diff = match sign {
                                Sign::Plus => fs - fns,
                                Sign::Minus => fs + fns,
                            };
                            binom(k, s) * Rational::sign_pow(s) * diff
                        })
                        .sum();
                    Ok(binom(n, k) * Rational::sign_pow(k) * a.term(k)? * inner)
                })
                .sum_result()?;
            scalar(lhs, Rational::zero())
        }
        C2_8Plus | C2_8Minus => {
            let a = need(id, &params.seq, "seq")?;
            let sign = if id == C2_8Plus { Sign::Plus } else { Sign::Minus };
            require_parity(id, a, sign, n)?;
            let one = Rational::one();
            let mut total = Polynomial::zero();
            for k in 0..=n {
                let ak = a.term(k)?;
                if ak.is_zero() {
                    continue;
                }
                // 1 - (-1)^n x^{n-k} for even A, 1 + (-1)^n x^{n-k} for odd A
                let tail_sign = match sign {
                    Sign::Plus => -Rational::sign_pow(n),
                    Sign::Minus => Rational::sign_pow(n),
                };
                let factor = Polynomial::constant(one.clone()).add(&Polynomial::monomial(tail_sign, (n - k) as usize));
                let term = Polynomial::linear_pow(&one, &one, k)
                    .mul(&factor)
                    .scale(&(binom(n, k) * Rational::sign_pow(k) * ak));
                total = total.add(&term);
            }
            let coeffs = (0..=n as usize).map(|i| total.coeff(i)).collect();
            Ok(IdentityReport::vector(id, params, coeffs))
        }
        T2_11Plus | T2_11Minus | E2_5 | E2_6 | E2_7 => {
            let m = natural(id, need(id, &params.m, "m")?, "m")?;
            let (a, sign) = match id {
                T2_11Plus => (need(id, &params.seq, "seq")?.clone(), Sign::Plus),
                T2_11Minus => (need(id, &params.seq, "seq")?.clone(), Sign::Minus),
                E2_5 => {
                    let r = *need(id, &params.r, "r")?;
                    require(id, r >= 1, "r must be at least 1")?;
                    (SequenceHandle::recip_binom(r)?, Sign::Plus)
                }
                _ => {
                    let (b, c) = need(id, &params.bc, "b,c")?;
                    let disc = b * b - rint(4) * c;
                    require(id, !(b * &disc).is_zero(), "b(b^2 - 4c) must be nonzero")?;
                    if id == E2_6 {
                        (SequenceHandle::lucas_u_norm(b.clone(), c.clone())?, Sign::Minus)
                    } else {
                        (SequenceHandle::lucas_v_norm(b.clone(), c.clone())?, Sign::Plus)
                    }
                }
            };
            require_parity(id, &a, sign, m + n)?;
            let lhs = (0..=n)
                .map(|k| Ok(binom(n, k) * Rational::sign_pow(k) * a.term(k + m)?))
                .sum_result()?;
            let rhs = (0..=m)
                .map(|k| Ok(binom(m, k) * Rational::sign_pow(k) * a.term(k + n)?))
                .sum_result()?;
            scalar(lhs, sign.apply(rhs))
        }
        C2_5 => {
            let a = need(id, &params.seq, "seq")?;
            let m = need(id, &params.m, "m")?;
            let p = natural(id, need(id, &params.p, "p")?, "p")?;
            require(id, p <= n, "p must not exceed n")?;
            // (2.3) uses binom(j-m-1, k), i.e. shift parameter m + 1
            let signs = shifted_signs(a, &(m + Rational::one()), n)?;
            let sign = match params.sign {
                Some(s) if signs.contains(&s) => s,
                Some(s) => {
                    return Err(hypothesis(
                        id,
                        format!("shifted transform condition with sign {} fails up to {n}", s.symbol()),
                    ))
                }
                None => *signs
                    .first()
                    .ok_or_else(|| hypothesis(id, format!("shifted transform condition fails up to {n}")))?,
            };
            let upper = q(n) - m - Rational::one();
            let lhs = (0..=p)
                .map(|k| {
                    Ok(binom(p, k) * Rational::sign_pow(k) * gen_binomial(&upper, n - k) / binom(n, k) * a.term(k)?)
                })
                .sum_result()?;
            let rhs = gen_binomial(&upper, n - p) / binom(n, p) * a.term(p)?;
            scalar(lhs, sign.apply(rhs))
        }
        T3_1 => {
            let a = need(id, &params.seq, "seq")?;
            require(id, n >= 1, "n must be positive")?;
            let signs = seq_signs(id, a, n)?;
            require(
                id,
                signs.iter().any(|s| s.times(Sign::from_parity(n)) == Sign::Minus),
                format!("needs an even sequence with odd n or an odd sequence with even n (n = {n})"),
            )?;
            let lhs = (0..=n)
                .step_by(3)
                .map(|k| Ok(binom(n, k) * a.term(n - k)?))
                .sum_result()?;
            let rhs = (0..=n).map(|k| Ok(binom(n, k) * a.term(k)?)).sum_result()? / rint(3);
            scalar(lhs, rhs)
        }
        C3_1 => {
            require(id, n >= 3 && n % 2 == 1, "n must be odd and at least 3")?;
            let b = SequenceHandle::bernoulli();
            let lhs = (3..=n)
                .step_by(6)
                .map(|k| Ok(binom(n, k) * b.term(n - k)?))
                .sum_result()?;
            let rhs = if n % 6 == 1 { -q(n) / rint(6) } else { q(n) / rint(3) };
            scalar(lhs, rhs)
        }
        C3_2 => {
            require(id, n >= 6 && n % 2 == 0, "n must be even and at least 6")?;
            let b = SequenceHandle::bernoulli();
            let lead = Rational::new(4, 3).expect("nonzero") * (Rational::int_pow(2, n) - Rational::one()) * b.term(n)?;
            let tail = (1..=n / 6)
                .map(|k| {
                    let j = n - 6 * k;
                    Ok(binom(n, 6 * k) * (Rational::int_pow(2, j) - Rational::one()) * b.term(j)?)
                })
                .sum_result()?;
            let rhs = if n % 6 == 4 { -q(n) / rint(6) } else { q(n) / rint(3) };
            scalar(lead + tail, rhs)
        }
        C3_3 => {
            require(id, n >= 6 && n % 2 == 0, "n must be even and at least 6")?;
            let e = SequenceHandle::euler();
            let tail = (1..=n / 6)
                .map(|k| Ok(binom(n, 6 * k) * Rational::int_pow(2, 6 * k - 2) * e.term(n - 6 * k)?))
                .sum_result()?;
            let lhs = e.term(n)? + rint(3) * tail;
            let rhs = (Rational::one() + Rational::int_pow(-3, n / 2)) / rint(2);
            scalar(lhs, rhs)
        }
        C3_4 => {
            require(id, n % 2 == 1, "n must be odd")?;
            let s = SequenceHandle::s_seq();
            let tail = (1..=n / 6)
                .map(|k| Ok(binom(n, 6 * k) * s.term(n - 6 * k)?))
                .sum_result()?;
            let lhs = rint(4) * s.term(n)? + rint(3) * tail;
            let rhs = if n % 3 == 0 { rint(-1) } else { rint(2) };
            scalar(lhs, rhs)
        }
    }
}

/// `binom(n/2, k)` for `k = 0..=n`.
fn gen_binomial_row_half(n: u64) -> Vec<Rational> {
    crate::exact::gen_binomial_row(&(q(n) / rint(2)), n)
}

/// `sum_k binom(n-m,k) binom(n-p,n-k) / binom(n,k) (-1)^k a_{n-k} b_k`.
pub fn mixed_parity_sum(
    a: &SequenceHandle,
    b: &SequenceHandle,
    m: &Rational,
    p: &Rational,
    n: u64,
) -> Result<Rational, SequenceError> {
    let nm = q(n) - m;
    let np = q(n) - p;
    (0..=n)
        .map(|k| {
            Ok(gen_binomial(&nm, k) * gen_binomial(&np, n - k) / binom(n, k)
                * Rational::sign_pow(k)
                * a.term(n - k)?
                * b.term(k)?)
        })
        .sum_result()
}

/// Distinct sample points for checking a lambda-polynomial of the given degree.
pub fn lambda_samples(degree: u64) -> Vec<Rational> {
    let mut pts: Vec<Rational> = ["0", "1/2", "-1/2", "1", "2", "-3", "7/3"]
        .iter()
        .map(|s| s.parse().expect("literal rationals parse"))
        .collect();
    let mut next = 3i64;
    while (pts.len() as u64) < degree + 1 {
        let cand = Rational::from(next);
        if !pts.contains(&cand) {
            pts.push(cand);
        }
        next += 1;
    }
    pts
}

fn lambda_identity(id: IdentityId, params: &IdentityParams) -> Result<IdentityReport, IdentityError> {
    use IdentityId::*;
    let n = params.n;
    let seq = need(id, &params.seq, "seq")?;
    // (weight sequence, A, top index, upper-binomial offset, degree in lambda)
    let (weights, a, top, offset, degree): (Option<SequenceHandle>, &SequenceHandle, u64, i64, u64) = match id {
        T2_7i | T2_7ii => {
            let big_a = need(id, &params.seq2, "seq2")?;
            let top = if id == T2_7i { 2 * n + 1 } else { 2 * n };
            let sa = seq_signs(id, seq, top)?;
            let sb = seq_signs(id, big_a, top)?;
            let ok = if id == T2_7i {
                sa.iter().any(|s| sb.contains(s))
            } else {
                sa.contains(&Sign::Plus) && sb.contains(&Sign::Minus)
            };
            require(
                id,
                ok,
                if id == T2_7i {
                    "a and A must have the same parity"
                } else {
                    "a must be even and A odd"
                },
            )?;
            let offset = if id == T2_7i { 2 * n as i64 } else { 2 * n as i64 - 1 };
            (Some(seq.clone()), big_a, top, offset, top)
        }
        C2_6i | C2_7i => {
            require_parity(id, seq, Sign::Plus, 2 * n + 1)?;
            if id == C2_6i {
                (None, seq, 2 * n + 1, 2 * n as i64 + 1, 2 * n + 2)
            } else {
                (Some(SequenceHandle::half_pow()), seq, 2 * n + 1, 2 * n as i64, 2 * n + 1)
            }
        }
        C2_6ii | C2_7ii => {
            require_parity(id, seq, Sign::Minus, 2 * n)?;
            if id == C2_6ii {
                (None, seq, 2 * n, 2 * n as i64, 2 * n + 1)
            } else {
                (Some(SequenceHandle::half_pow()), seq, 2 * n, 2 * n as i64 - 1, 2 * n)
            }
        }
        _ => unreachable!("only lambda identities are routed here"),
    };
    let terms = a.prefix(top)?;
    let weight_terms = match &weights {
        Some(w) => Some(w.prefix(top)?),
        None => None,
    };
    let evaluate = |lambda: &Rational| -> Rational {
        let upper = rint(offset) - lambda;
        (0..=top)
            .map(|k| {
                let lower = match (id, &weight_terms) {
                    // C2.6 folds a_n = 1/(n+1) into binom(2n+1-l, 2n+2-k) (i) or binom(2n-l, 2n+1-k) (ii)
                    (C2_6i | C2_6ii, _) => top + 1 - k,
                    _ => top - k,
                };
                let mut t = gen_binomial(&upper, lower) * gen_binomial(lambda, k) * &terms[k as usize];
                match (id, &weight_terms) {
                    (C2_7i | C2_7ii, _) => t *= Rational::int_pow(2, k),
                    (_, Some(w)) => t *= &w[(top - k) as usize],
                    _ => {}
                }
                t
            })
            .sum()
    };
    match &params.lambda {
        Some(lambda) => Ok(IdentityReport::scalar(id, params, evaluate(lambda), Rational::zero())),
        None => {
            let values = lambda_samples(degree).iter().map(evaluate).collect();
            Ok(IdentityReport::vector(id, params, values))
        }
    }
}

trait SumResult {
    fn sum_result(self) -> Result<Rational, SequenceError>;
}

impl<I: Iterator<Item = Result<Rational, SequenceError>>> SumResult for I {
    fn sum_result(self) -> Result<Rational, SequenceError> {
        let mut acc = Rational::zero();
        for item in self {
            acc += item?;
        }
        Ok(acc)
    }
}

/// A named natural-number parameter and the values to scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamRange {
    pub name: String,
    pub values: Vec<u64>,
}

impl ParamRange {
    pub fn new(name: impl Into<String>, values: impl IntoIterator<Item = u64>) -> Self {
        ParamRange {
            name: name.into(),
            values: values.into_iter().collect(),
        }
    }
}

/// One scanned tuple: its parameters and either a report or the error that
/// kept it from being evaluated.
#[derive(Debug, Clone)]
pub struct ScanEntry {
    pub params: BTreeMap<String, String>,
    pub outcome: Result<IdentityReport, IdentityError>,
}

fn apply_range(params: &mut IdentityParams, name: &str, value: u64) -> Result<(), IdentityError> {
    match name {
        "n" => params.n = value,
        "m" => params.m = Some(Rational::from(value)),
        "p" => params.p = Some(Rational::from(value)),
        "r" => params.r = Some(value),
        other => return Err(IdentityError::UnknownId(format!("range parameter {other}"))),
    }
    Ok(())
}

/// Evaluates `id` on the Cartesian product of `ranges` (first range varies
/// slowest). Tuples run in parallel; output order is deterministic.
pub fn scan_identity(id: IdentityId, base: &IdentityParams, ranges: &[ParamRange]) -> Vec<ScanEntry> {
    let mut tuples: Vec<Vec<u64>> = vec![Vec::new()];
    for range in ranges {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                range.values.iter().map(move |v| {
                    let mut next = t.clone();
                    next.push(*v);
                    next
                })
            })
            .collect();
    }
    tuples
        .par_iter()
        .map(|tuple| {
            let mut params = base.clone();
            let applied = ranges
                .iter()
                .zip(tuple)
                .try_for_each(|(r, v)| apply_range(&mut params, &r.name, *v));
            let outcome = applied.and_then(|_| verify_identity(id, &params));
            ScanEntry {
                params: params.record(),
                outcome,
            }
        })
        .collect()
}

/// The five conditions of the polynomial-symmetry criterion, evaluated
/// independently for `P_m(x) = sum_k a_k x^{m-k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SymmetryReport {
    /// `(1-x)^m P*_m(x/(x-1)) = ± P*_m(x)` with `P*_m(x) = sum a_k x^k`.
    pub gf_form: bool,
    /// `P_m(1-x) = ± (-1)^m P_m(x)`.
    pub reflection: bool,
    /// Shifted-transform equalities for `n = 0..=m`.
    pub truncated: bool,
    /// Shifted-transform equalities for `n <= 2m+1` with zero padding.
    pub padded: bool,
    /// `sum_k binom(n,k) a_k / binom(m,k) = ± (-1)^n a_n / binom(m,n)`, `n <= m`.
    pub reweighted: bool,
}

impl SymmetryReport {
    pub fn all_agree(&self) -> bool {
        let v = [self.gf_form, self.reflection, self.truncated, self.padded, self.reweighted];
        v.iter().all(|b| *b == v[0])
    }

    pub fn all(&self) -> bool {
        self.all_agree() && self.gf_form
    }
}

/// Evaluates the five equivalent conditions for the coefficient vector
/// `a_0..a_m` (so `m = coeffs.len() - 1 >= 1`) and the given sign.
pub fn poly_symmetry_check(coeffs: &[Rational], sign: Sign) -> Result<SymmetryReport, IdentityError> {
    if coeffs.len() < 2 {
        return Err(IdentityError::Hypothesis {
            id: "T2.5".into(),
            reason: "need m >= 1, i.e. at least two coefficients".into(),
        });
    }
    let m = coeffs.len() as u64 - 1;
    let mq = q(m);
    let padded_len = 2 * m as usize + 2;
    let mut padded = coeffs.to_vec();
    padded.resize(padded_len, Rational::zero());

    let gf = gf_mobius_transform(&padded, &mq);
    let gf_form = gf.iter().zip(&padded).all(|(g, a)| g == &sign.apply(a.clone()));

    // P_m has a_k as the coefficient of x^{m-k}
    let p = Polynomial::new(coeffs.iter().rev().cloned().collect());
    let reflected = p.compose_linear(&Rational::one(), &-Rational::one());
    let reflection = reflected == p.scale(&sign.times(Sign::from_parity(m)).apply(Rational::one()));

    let shifted_ok = |len: u64| -> Result<bool, IdentityError> {
        let table = SequenceHandle::table(padded[..len as usize].to_vec());
        // binom(n - m - 1, k) is the shift by m + 1
        Ok(shifted_signs(&table, &(&mq + Rational::one()), len - 1)?.contains(&sign))
    };
    let truncated = shifted_ok(m + 1)?;
    let padded_ok = shifted_ok(padded_len as u64)?;

    let reweighted = (0..=m).all(|n| {
        let lhs: Rational = (0..=n).map(|k| binom(n, k) * &coeffs[k as usize] / binom(m, k)).sum();
        let rhs = sign.times(Sign::from_parity(n)).apply(&coeffs[n as usize] / binom(m, n));
        lhs == rhs
    });

    Ok(SymmetryReport {
        gf_form,
        reflection,
        truncated,
        padded: padded_ok,
        reweighted,
    })
}
