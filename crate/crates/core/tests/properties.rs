mod common;

use parityseq::exact::{binom, gen_binomial, int_binomial};
use parityseq::identities::poly_symmetry_check;
use parityseq::sequences::{bernoulli_polynomial, bernoulli_poly_eval};
use parityseq::transforms::{
    alt_transform_prefix, divide_factorial_shift, average_transform, gf_mobius_transform, parity_signs,
    shifted_signs, shifted_transform, Sign,
};
use parityseq::{Polynomial, Rational, SequenceHandle};
use common::series_oracle;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-60i64..60, 1i64..24).prop_map(|(n, d)| Rational::new(n, d).unwrap())
}

fn prefix(max_len: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(rational(), 1..=max_len)
}

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

proptest! {
    #[test]
    fn pascal_rule(x in rational(), k in 0u64..15) {
        prop_assert_eq!(
            gen_binomial(&x, k) + gen_binomial(&x, k + 1),
            gen_binomial(&(&x + Rational::one()), k + 1)
        );
    }

    #[test]
    fn vandermonde(x in rational(), y in rational(), n in 0u64..12) {
        let rhs: Rational = (0..=n).map(|k| gen_binomial(&x, k) * gen_binomial(&y, n - k)).sum();
        prop_assert_eq!(gen_binomial(&(&x + &y), n), rhs);
    }

    #[test]
    fn upper_negation(x in rational(), k in 0u64..15) {
        let shifted = &x + Rational::from(k) - Rational::one();
        prop_assert_eq!(gen_binomial(&-x.clone(), k), Rational::sign_pow(k) * gen_binomial(&shifted, k));
    }

    #[test]
    fn integer_binomials_agree(n in 0u64..60, k in 0u64..70) {
        prop_assert_eq!(Rational::from(int_binomial(n, k)), gen_binomial(&Rational::from(n), k));
    }

    #[test]
    fn inversion_is_an_involution(a in prefix(30)) {
        prop_assert_eq!(alt_transform_prefix(&alt_transform_prefix(&a)), a);
    }

    #[test]
    fn gf_transform_matches_series_composition(
        a in prefix(14),
        m in prop::sample::select(vec!["0", "1", "1/2", "-1", "3", "-5/3"]),
    ) {
        let m: Rational = m.parse().unwrap();
        prop_assert_eq!(gf_mobius_transform(&a, &m), series_oracle(&a, &m));
    }

    #[test]
    fn gf_transform_is_an_involution(a in prefix(14), m in rational()) {
        prop_assert_eq!(gf_mobius_transform(&gf_mobius_transform(&a, &m), &m), a);
    }

    #[test]
    fn minus_one_shift_is_the_plain_transform(a in prefix(20)) {
        prop_assert_eq!(gf_mobius_transform(&a, &-Rational::one()), alt_transform_prefix(&a));
    }

    #[test]
    fn weighted_sequences_satisfy_the_shift_rule(
        base in prop::sample::select(vec!["half_pow", "fibonacci", "signed_bernoulli", "euler_shift"]),
        lambda in rational(),
        p in rational(),
    ) {
        let a: SequenceHandle = base.parse().unwrap();
        let want = parity_signs(&a, 16).unwrap()[0];
        let w = SequenceHandle::binom_weight(&a, lambda.clone());
        let m = &lambda + Rational::one();
        prop_assert!(shifted_signs(&w, &m, 16).unwrap().contains(&want));
        // shifting the upper index by p moves the weight onto the other side
        let terms = w.prefix(12).unwrap();
        for n in 0..=12u64 {
            let lhs = shifted_transform(&w, &(&m + &p), n).unwrap();
            let rhs: Rational = (0..=n)
                .map(|k| gen_binomial(&p, k) * Rational::sign_pow(k) * &terms[(n - k) as usize])
                .sum();
            prop_assert_eq!(lhs, want.apply(rhs));
        }
    }

    #[test]
    fn shifted_condition_splits_at_m(a in prefix(14), m in 0u64..5, s in sign(), mode in 0u8..3) {
        let m_len = m as usize + 1;
        let mut a = a;
        if a.len() <= m_len {
            a.resize(m_len + 1, Rational::zero());
        }
        if mode > 0 {
            // (-1)^n binom(m, n) A_n with A of parity s satisfies the condition and vanishes past m
            let base: SequenceHandle = if s == Sign::Plus { "half_pow" } else { "fibonacci" }.parse().unwrap();
            let w = SequenceHandle::binom_weight(&base, Rational::from(m));
            let len = a.len();
            a = w.take(len).unwrap();
            if mode == 2 {
                // a nonzero tail breaks only the second half
                a[len - 1] += Rational::one();
            }
        }
        let h = SequenceHandle::table(a.clone());
        let n_max = a.len() as u64 - 1;
        let full = shifted_signs(&h, &Rational::from(m + 1), n_max).unwrap().contains(&s);
        let head = (0..=m).all(|n| {
            let lhs: Rational = (0..=n).map(|k| binom(n, k) * &a[k as usize] / binom(m, k)).sum();
            lhs == s.times(Sign::from_parity(n)).apply(&a[n as usize] / binom(m, n))
        });
        let tail = (0..=n_max - m - 1).all(|n| {
            let lhs: Rational = (0..=n)
                .map(|k| binom(n, k) * Rational::sign_pow(k) * &a[(k + m + 1) as usize])
                .sum();
            lhs == s.times(Sign::from_parity(m + 1)).apply(a[(n + m + 1) as usize].clone())
        });
        prop_assert_eq!(full, head && tail);
        if mode == 1 {
            prop_assert!(full);
        }
    }

    #[test]
    fn symmetry_conditions_agree_on_random_polynomials(coeffs in prop::collection::vec(rational(), 2..=9), s in sign()) {
        let r = poly_symmetry_check(&coeffs, s).unwrap();
        prop_assert!(r.all_agree(), "{:?}", r);
    }

    #[test]
    fn symmetrized_polynomials_pass_every_condition(coeffs in prop::collection::vec(rational(), 2..=9), s in sign()) {
        let m = coeffs.len() as u64 - 1;
        let q = Polynomial::new(coeffs.clone());
        let reflected = q.compose_linear(&Rational::one(), &-Rational::one());
        let factor = s.times(Sign::from_parity(m)).apply(Rational::one());
        let p = q.add(&reflected.scale(&factor));
        let a: Vec<Rational> = (0..=m as usize).map(|i| p.coeff(m as usize - i)).collect();
        let r = poly_symmetry_check(&a, s).unwrap();
        prop_assert!(r.all(), "{:?}", r);
    }
}

#[test]
fn special_number_facts() {
    let b = SequenceHandle::bernoulli();
    let e = SequenceHandle::euler();
    for n in 1..40u64 {
        assert!(b.term(2 * n + 1).unwrap().is_zero());
        assert!(e.term(2 * n - 1).unwrap().is_zero());
    }
    let u = SequenceHandle::lucas_u(3.into(), 2.into());
    let v = SequenceHandle::lucas_v(3.into(), 2.into());
    for n in 0..40u64 {
        assert_eq!(u.term(n).unwrap(), Rational::int_pow(2, n) - Rational::one());
        assert_eq!(v.term(n).unwrap(), Rational::int_pow(2, n) + Rational::one());
    }
}

#[test]
fn bernoulli_polynomial_reflection() {
    let one = Rational::one();
    for n in 0..16u64 {
        let p = bernoulli_polynomial(n);
        let reflected = p.compose_linear(&one, &-one.clone());
        assert_eq!(reflected, p.scale(&Rational::sign_pow(n)), "n = {n}");
        for x in ["0", "1/3", "-2", "5/7"] {
            let x: Rational = x.parse().unwrap();
            assert_eq!(p.eval(&x), bernoulli_poly_eval(n, &x));
        }
    }
}

#[test]
fn derived_sequences_keep_or_flip_parity() {
    let evens = ["half_pow", "central_binom", "lucas_num", "times_n_shift(fibonacci)"];
    let odds = ["fibonacci", "euler_shift", "odd_bernoulli"];
    let cases = evens.iter().map(|s| (s, Sign::Plus)).chain(odds.iter().map(|s| (s, Sign::Minus)));
    for (spec, sign) in cases {
        let a: SequenceHandle = spec.parse().unwrap();
        let zero_start = a.term(0).unwrap().is_zero();
        assert!(parity_signs(&a, 30).unwrap().contains(&sign), "{spec}");
        let flipped = SequenceHandle::times_n_shift(&a);
        assert!(parity_signs(&flipped, 30).unwrap().contains(&sign.flip()), "n a_(n-1) of {spec}");
        let integrated = SequenceHandle::integrate_shift(&a);
        assert_eq!(
            parity_signs(&integrated, 30).unwrap().contains(&sign.flip()),
            zero_start,
            "a_(n+1)/(n+1) of {spec}"
        );
        let diff = SequenceHandle::diff_shift(&a);
        assert!(parity_signs(&diff, 30).unwrap().contains(&sign), "difference of {spec}");
    }
}

#[test]
fn factorial_and_average_shifts_stay_even() {
    for spec in ["times_n_shift(fibonacci)", "times_n_shift(euler_shift)"] {
        let a: SequenceHandle = spec.parse().unwrap();
        let d = divide_factorial_shift(&a, 2, 30).unwrap();
        assert!(parity_signs(&d, 30).unwrap().contains(&Sign::Plus), "{spec}");
    }
    for spec in ["half_pow", "central_binom", "lucas_num", "signed_bernoulli"] {
        let a: SequenceHandle = spec.parse().unwrap();
        let avg = average_transform(&a, 30).unwrap();
        assert!(parity_signs(&avg, 30).unwrap().contains(&Sign::Plus), "{spec}");
    }
}
