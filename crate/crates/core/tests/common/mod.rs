use parityseq::exact::gen_binomial;
use parityseq::Rational;

/// First `a.len()` coefficients of `(1-x)^m a(x/(x-1))` by truncated
/// power-series composition, without the closed form.
pub fn series_oracle(a: &[Rational], m: &Rational) -> Vec<Rational> {
    let len = a.len();
    let mul = |x: &[Rational], y: &[Rational]| -> Vec<Rational> {
        let mut out = vec![Rational::zero(); len];
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate().take(len - i) {
                out[i + j] += xi * yj;
            }
        }
        out
    };
    // x/(x-1) = -(x + x^2 + ...)
    let u: Vec<Rational> = (0..len).map(|i| if i == 0 { Rational::zero() } else { -Rational::one() }).collect();
    let mut power = vec![Rational::zero(); len];
    power[0] = Rational::one();
    let mut composed = vec![Rational::zero(); len];
    for ak in a {
        for (c, pk) in composed.iter_mut().zip(&power) {
            *c += ak * pk;
        }
        power = mul(&power, &u);
    }
    let one_minus_x_m: Vec<Rational> = (0..len as u64).map(|j| gen_binomial(m, j) * Rational::sign_pow(j)).collect();
    mul(&one_minus_x_m, &composed)
}
