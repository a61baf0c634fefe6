use std::fmt;

use crate::exact::{binom, Rational};

/// Dense univariate polynomial with rational coefficients; `coeffs[i]` is the
/// coefficient of `x^i`. Trailing zeros are trimmed so the leading
/// coefficient is nonzero unless the polynomial is zero.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Rational::is_zero) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Polynomial::new(vec![c])
    }

    /// `c * x^k`.
    pub fn monomial(c: Rational, k: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); k + 1];
        coeffs[k] = c;
        Polynomial::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `x^i`, zero past the degree.
    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new((0..len).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new((0..len).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    /// `(a + b x)^k` expanded by the binomial theorem.
    pub fn linear_pow(a: &Rational, b: &Rational, k: u64) -> Polynomial {
        let coeffs = (0..=k)
            .map(|j| {
                binom(k, j)
                    * a.pow((k - j) as i64).expect("nonnegative exponent")
                    * b.pow(j as i64).expect("nonnegative exponent")
            })
            .collect();
        Polynomial::new(coeffs)
    }

    /// `p(a + b x)`, by Horner's scheme in the polynomial ring.
    pub fn compose_linear(&self, a: &Rational, b: &Rational) -> Polynomial {
        let inner = Polynomial::new(vec![a.clone(), b.clone()]);
        self.coeffs.iter().rev().fold(Polynomial::zero(), |acc, c| {
            acc.mul(&inner).add(&Polynomial::constant(c.clone()))
        })
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("({c})x"),
                _ => format!("({c})x^{i}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn poly(cs: &[&str]) -> Polynomial {
        Polynomial::new(cs.iter().map(|s| q(s)).collect())
    }

    #[test]
    fn trims_and_evaluates() {
        let p = poly(&["1", "0", "2", "0", "0"]);
        assert_eq!(p.degree(), 2);
        assert_eq!(p.eval(&q("1/2")), q("3/2"));
        assert!(poly(&["0", "0"]).is_zero());
    }

    #[test]
    fn reflection_of_quadratic() {
        // x^2 + x at 1 - x is x^2 - 3x + 2
        let p = poly(&["0", "1", "1"]);
        assert_eq!(p.compose_linear(&q("1"), &q("-1")), poly(&["2", "-3", "1"]));
    }

    #[test]
    fn linear_power_matches_repeated_product() {
        let a = q("2/3");
        let b = q("-5");
        let base = Polynomial::new(vec![a.clone(), b.clone()]);
        let mut acc = Polynomial::constant(Rational::one());
        for k in 0..6 {
            assert_eq!(Polynomial::linear_pow(&a, &b, k), acc);
            acc = acc.mul(&base);
        }
    }
}
