//! The alternating binomial transform `a -> (n -> sum_k binom(n,k)(-1)^k a_k)`,
//! finite-prefix parity classification, and the operators that map even
//! sequences to odd ones and back.

use serde::Serialize;
use thiserror::Error;

use crate::exact::{binomial_row, gen_binomial_row, Rational};
use crate::sequences::{SequenceError, SequenceHandle};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("precondition failed{}: {reason}", index.map(|i| format!(" at index {i}")).unwrap_or_default())]
    Precondition { index: Option<u64>, reason: String },
    #[error(transparent)]
    Sequence(#[from] SequenceError),
}

fn precondition(index: Option<u64>, reason: impl Into<String>) -> TransformError {
    TransformError::Precondition {
        index,
        reason: reason.into(),
    }
}

/// The `±` of a parity statement: `Plus` for even, `Minus` for odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn apply(self, x: Rational) -> Rational {
        match self {
            Sign::Plus => x,
            Sign::Minus => -x,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// `(-1)^k` as a sign.
    pub fn from_parity(k: u64) -> Sign {
        if k % 2 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

impl std::str::FromStr for Sign {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "+" | "plus" | "even" => Ok(Sign::Plus),
            "-" | "minus" | "odd" => Ok(Sign::Minus),
            other => Err(format!("sign must be + or -, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    EvenUpTo,
    OddUpTo,
    Neither,
}

impl Verdict {
    pub fn sign(self) -> Option<Sign> {
        match self {
            Verdict::EvenUpTo => Some(Sign::Plus),
            Verdict::OddUpTo => Some(Sign::Minus),
            Verdict::Neither => None,
        }
    }
}

/// One failed comparison `transform(a)_index = lhs` against `rhs = ±a_index`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub index: u64,
    pub lhs: Rational,
    pub rhs: Rational,
}

/// Where a `Neither` prefix stops being classifiable. `index` is the first n by
/// which both sign conditions have failed; `even` and `odd` carry the smallest
/// violation of each condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FirstViolation {
    pub index: u64,
    pub even: Violation,
    pub odd: Violation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParityReport {
    pub verdict: Verdict,
    pub checked_upto: u64,
    /// Set when both conditions hold, which happens only for an all-zero prefix.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub both: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<FirstViolation>,
}

/// `sum_{k=0}^n binom(n,k) (-1)^k a_k`, memoized on the handle.
pub fn alt_transform(a: &SequenceHandle, n: u64) -> Result<Rational, SequenceError> {
    let mut cache = a.transform_cache();
    while cache.len() as u64 <= n {
        let m = cache.len() as u64;
        let value = alt_transform_uncached(a, m)?;
        cache.push(value);
    }
    Ok(cache[n as usize].clone())
}

fn alt_transform_uncached(a: &SequenceHandle, n: u64) -> Result<Rational, SequenceError> {
    let terms = a.prefix(n)?;
    Ok(alt_sum(&terms, n))
}

fn alt_sum(terms: &[Rational], n: u64) -> Rational {
    let row = binomial_row(n);
    let mut acc = Rational::zero();
    for (k, t) in terms.iter().take(n as usize + 1).enumerate() {
        if t.is_zero() {
            continue;
        }
        let term = t * Rational::from_int(row[k].clone());
        if k % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// The alternating binomial transform of a finite prefix.
pub fn alt_transform_prefix(prefix: &[Rational]) -> Vec<Rational> {
    (0..prefix.len() as u64).map(|n| alt_sum(prefix, n)).collect()
}

/// Tests the even and odd conditions for every `n <= upto`.
pub fn classify(a: &SequenceHandle, upto: u64) -> Result<ParityReport, SequenceError> {
    let mut even_fail: Option<Violation> = None;
    let mut odd_fail: Option<Violation> = None;
    for n in 0..=upto {
        let lhs = alt_transform(a, n)?;
        let an = a.term(n)?;
        if even_fail.is_none() && lhs != an {
            even_fail = Some(Violation {
                index: n,
                lhs: lhs.clone(),
                rhs: an.clone(),
            });
        }
        if odd_fail.is_none() && lhs != -&an {
            odd_fail = Some(Violation { index: n, lhs, rhs: -an });
        }
        if even_fail.is_some() && odd_fail.is_some() {
            break;
        }
    }
    Ok(match (even_fail, odd_fail) {
        (None, None) => ParityReport {
            verdict: Verdict::EvenUpTo,
            checked_upto: upto,
            both: true,
            first_violation: None,
        },
        (None, Some(_)) => ParityReport {
            verdict: Verdict::EvenUpTo,
            checked_upto: upto,
            both: false,
            first_violation: None,
        },
        (Some(_), None) => ParityReport {
            verdict: Verdict::OddUpTo,
            checked_upto: upto,
            both: false,
            first_violation: None,
        },
        (Some(even), Some(odd)) => ParityReport {
            verdict: Verdict::Neither,
            checked_upto: upto,
            both: false,
            first_violation: Some(FirstViolation {
                index: even.index.max(odd.index),
                even,
                odd,
            }),
        },
    })
}

/// The signs `s` for which `transform(a)_n = s a_n` holds on `0..=upto`.
pub fn parity_signs(a: &SequenceHandle, upto: u64) -> Result<Vec<Sign>, SequenceError> {
    let report = classify(a, upto)?;
    Ok(if report.both {
        vec![Sign::Plus, Sign::Minus]
    } else {
        report.verdict.sign().into_iter().collect()
    })
}

/// `sum_{k=0}^n binom(n-m, k) (-1)^{n-k} a_{n-k}`.
pub fn shifted_transform(a: &SequenceHandle, m: &Rational, n: u64) -> Result<Rational, SequenceError> {
    let terms = a.prefix(n)?;
    Ok(shifted_sum(&terms, &(Rational::from(n) - m), n))
}

fn shifted_sum(terms: &[Rational], upper: &Rational, n: u64) -> Rational {
    let row = gen_binomial_row(upper, n);
    let mut acc = Rational::zero();
    for k in 0..=n {
        let t = &terms[(n - k) as usize];
        if t.is_zero() || row[k as usize].is_zero() {
            continue;
        }
        let term = &row[k as usize] * t;
        if (n - k) % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Checks `shifted_transform(a, m, j) = sign * a_j` for all `j <= upto`,
/// returning the signs for which it holds.
pub fn shifted_signs(a: &SequenceHandle, m: &Rational, upto: u64) -> Result<Vec<Sign>, SequenceError> {
    let terms = a.prefix(upto)?;
    let mut plus = true;
    let mut minus = true;
    for j in 0..=upto {
        let lhs = shifted_sum(&terms, &(Rational::from(j) - m), j);
        let aj = &terms[j as usize];
        plus &= &lhs == aj;
        minus &= lhs == -aj;
        if !plus && !minus {
            break;
        }
    }
    let mut out = Vec::new();
    if plus {
        out.push(Sign::Plus);
    }
    if minus {
        out.push(Sign::Minus);
    }
    Ok(out)
}

/// First `prefix.len()` coefficients of `(1-x)^m a(x/(x-1))`, from the closed
/// form `sum_k binom(n-m-1, k) (-1)^{n-k} a_{n-k}`.
pub fn gf_mobius_transform(prefix: &[Rational], m: &Rational) -> Vec<Rational> {
    (0..prefix.len() as u64)
        .map(|n| shifted_sum(prefix, &(Rational::from(n) - m - Rational::one()), n))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivedKind {
    /// `b_n = n a_{n-1}`
    TimesNShift,
    /// `b_n = a_{n+1} / (n+1)`
    IntegrateShift,
}

/// Builds the parity-flipping companion of `a`.
///
/// `TimesNShift` flips parity for every even or odd input. `IntegrateShift`
/// flips parity only when `a_0 = 0`, which odd sequences satisfy
/// automatically; for an even `a` the transform of the output picks up the
/// extra term `a_0 / (n+1)`.
pub fn derived_odd_even(a: &SequenceHandle, which: DerivedKind) -> SequenceHandle {
    match which {
        DerivedKind::TimesNShift => SequenceHandle::times_n_shift(a),
        DerivedKind::IntegrateShift => SequenceHandle::integrate_shift(a),
    }
}

/// `A_{n+l} / ((n+1)(n+2)...(n+l))` for an even `A` whose first nonzero term
/// is `A_l`. Preconditions are checked on `0..=check_upto`.
pub fn divide_factorial_shift(
    a: &SequenceHandle,
    l: u64,
    check_upto: u64,
) -> Result<SequenceHandle, TransformError> {
    if l == 0 {
        return Err(precondition(None, "l must be at least 1"));
    }
    if check_upto < l {
        return Err(precondition(None, format!("working prefix {check_upto} is shorter than l = {l}")));
    }
    let report = classify(a, check_upto)?;
    if report.verdict != Verdict::EvenUpTo {
        let index = report.first_violation.map(|v| v.even.index).or(Some(check_upto));
        return Err(precondition(index, "sequence is not even on the working prefix"));
    }
    if l % 2 == 1 {
        return Err(precondition(Some(l), "l must be even since A_l = (-1)^l A_l is nonzero"));
    }
    for i in 0..l {
        if !a.term(i)?.is_zero() {
            return Err(precondition(Some(i), "A must vanish below index l"));
        }
    }
    if a.term(l)?.is_zero() {
        return Err(precondition(Some(l), "A_l must be nonzero"));
    }
    Ok(SequenceHandle::divide_factorial_shift_unchecked(a, l))
}

/// `A_n = (a_0 + ... + a_n) / ((n+1)(n+2))` for an even `a` with `a_0 != 0`.
pub fn average_transform(a: &SequenceHandle, check_upto: u64) -> Result<SequenceHandle, TransformError> {
    let report = classify(a, check_upto)?;
    if report.verdict != Verdict::EvenUpTo {
        let index = report.first_violation.map(|v| v.even.index).or(Some(check_upto));
        return Err(precondition(index, "sequence is not even on the working prefix"));
    }
    if a.term(0)?.is_zero() {
        return Err(precondition(Some(0), "a_0 must be nonzero"));
    }
    Ok(SequenceHandle::average_unchecked(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn transform_examples() {
        let h = SequenceHandle::half_pow();
        assert_eq!(alt_transform(&h, 0).unwrap(), Rational::one());
        assert_eq!(alt_transform(&h, 2).unwrap(), q("1/4"));
        assert_eq!(alt_transform(&SequenceHandle::fibonacci(), 3).unwrap(), q("-2"));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&SequenceHandle::half_pow(), 50).unwrap().verdict, Verdict::EvenUpTo);
        assert_eq!(classify(&SequenceHandle::euler_shift(), 50).unwrap().verdict, Verdict::OddUpTo);
        let r = classify(&SequenceHandle::bernoulli(), 3).unwrap();
        assert_eq!(r.verdict, Verdict::Neither);
        let v = r.first_violation.unwrap();
        assert_eq!(v.index, 1);
        assert_eq!(v.even, Violation { index: 1, lhs: q("3/2"), rhs: q("-1/2") });
        assert_eq!(v.odd.index, 0);
    }

    #[test]
    fn all_zero_prefix_is_both() {
        let z = SequenceHandle::table(vec![Rational::zero(); 6]);
        let r = classify(&z, 5).unwrap();
        assert_eq!(r.verdict, Verdict::EvenUpTo);
        assert!(r.both);
        assert_eq!(parity_signs(&z, 5).unwrap(), vec![Sign::Plus, Sign::Minus]);
    }

    #[test]
    fn shifted_transform_examples() {
        let sb = SequenceHandle::signed_bernoulli();
        assert_eq!(shifted_transform(&sb, &Rational::zero(), 4).unwrap(), sb.term(4).unwrap());
        assert_eq!(shifted_transform(&SequenceHandle::half_pow(), &q("1/2"), 1).unwrap(), Rational::zero());
    }

    #[test]
    fn derived_sequence_examples() {
        let t = derived_odd_even(&SequenceHandle::half_pow(), DerivedKind::TimesNShift);
        assert_eq!(t.term(0).unwrap(), Rational::zero());
        let t = derived_odd_even(&SequenceHandle::signed_bernoulli(), DerivedKind::TimesNShift);
        assert_eq!(classify(&t, 30).unwrap().verdict, Verdict::OddUpTo);
        let t = derived_odd_even(&SequenceHandle::euler_shift(), DerivedKind::IntegrateShift);
        assert_eq!(classify(&t, 30).unwrap().verdict, Verdict::EvenUpTo);
    }

    #[test]
    fn integrate_shift_needs_zero_initial_term() {
        // a_0 = 1 breaks the parity flip at n = 0
        let t = derived_odd_even(&SequenceHandle::half_pow(), DerivedKind::IntegrateShift);
        assert_eq!(classify(&t, 10).unwrap().verdict, Verdict::Neither);
    }

    #[test]
    fn divide_factorial_shift_examples() {
        let prefix = SequenceHandle::table(vec![q("0"), q("0"), q("1"), q("-2"), q("3")]);
        // A_0 = A_1 = 0, A_2 = 1: the output starts at A_2 / 2
        let out = SequenceHandle::divide_factorial_shift_unchecked(&prefix, 2);
        assert_eq!(out.term(0).unwrap(), q("1/2"));

        // n(n-1) a_{n-2} with a even has a zero prefix of length 2
        let built = SequenceHandle::times_n_shift(&SequenceHandle::times_n_shift(&SequenceHandle::half_pow()));
        let shifted = divide_factorial_shift(&built, 2, 40).unwrap();
        assert_eq!(classify(&shifted, 38).unwrap().verdict, Verdict::EvenUpTo);
        assert_eq!(shifted.term(3).unwrap(), q("1/8"));

        let err = divide_factorial_shift(&SequenceHandle::fibonacci(), 1, 20).unwrap_err();
        assert!(matches!(err, TransformError::Precondition { .. }));
        assert!(divide_factorial_shift(&SequenceHandle::half_pow(), 2, 20).is_err());
    }

    #[test]
    fn average_examples() {
        let a = average_transform(&SequenceHandle::half_pow(), 40).unwrap();
        assert_eq!(a.term(0).unwrap(), q("1/2"));
        assert_eq!(a.term(1).unwrap(), q("1/4"));
        assert_eq!(classify(&a, 40).unwrap().verdict, Verdict::EvenUpTo);
        assert!(average_transform(&SequenceHandle::fibonacci(), 10).is_err());
        let z = SequenceHandle::times_n_shift(&SequenceHandle::fibonacci());
        assert!(matches!(
            average_transform(&z, 10),
            Err(TransformError::Precondition { index: Some(0), .. })
        ));
    }

    #[test]
    fn gf_closed_form_small_cases() {
        let unit = vec![q("1"), q("0"), q("0"), q("0")];
        assert_eq!(gf_mobius_transform(&unit, &Rational::zero()), unit);
        let hp = SequenceHandle::half_pow().prefix(12).unwrap();
        assert_eq!(gf_mobius_transform(&hp, &q("-1")), hp);
    }
}
