//! Exact arithmetic in `Q + Qλ` for an irrational `λ` given by its continued
//! fraction, with exact sign decisions and correctly rounded conversion.

use std::cmp::Ordering;
use std::fmt;

use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::cf::ContinuedFraction;
use crate::error::{Error, Result};

/// The number `a + bλ` with rational `a`, `b`.
#[derive(Clone)]
pub struct ZLambda {
    a: Rational,
    b: Rational,
    cf: ContinuedFraction,
}

impl PartialEq for ZLambda {
    fn eq(&self, other: &Self) -> bool {
        self.cf == other.cf && self.a == other.a && self.b == other.b
    }
}

impl Eq for ZLambda {}

impl fmt::Debug for ZLambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ZLambda({} + {}·λ)", self.a, self.b)
    }
}

impl fmt::Display for ZLambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}·λ", self.a, self.b)
    }
}

impl ZLambda {
    pub fn new(cf: &ContinuedFraction, a: Rational, b: Rational) -> Self {
        ZLambda { a, b, cf: cf.clone() }
    }

    pub fn from_integers(cf: &ContinuedFraction, a: impl Into<Integer>, b: impl Into<Integer>) -> Self {
        Self::new(cf, Rational::from(a.into()), Rational::from(b.into()))
    }

    pub fn zero(cf: &ContinuedFraction) -> Self {
        Self::from_integers(cf, 0, 0)
    }

    pub fn one(cf: &ContinuedFraction) -> Self {
        Self::from_integers(cf, 1, 0)
    }

    pub fn lambda(cf: &ContinuedFraction) -> Self {
        Self::from_integers(cf, 0, 1)
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn cf(&self) -> &ContinuedFraction {
        &self.cf
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if self.cf == other.cf {
            Ok(())
        } else {
            Err(Error::MixedLambda)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(ZLambda {
            a: Rational::from(&self.a + &other.a),
            b: Rational::from(&self.b + &other.b),
            cf: self.cf.clone(),
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.same_field(other)?;
        Ok(ZLambda {
            a: Rational::from(&self.a - &other.a),
            b: Rational::from(&self.b - &other.b),
            cf: self.cf.clone(),
        })
    }

    pub fn scale(&self, k: &Rational) -> Self {
        ZLambda {
            a: Rational::from(&self.a * k),
            b: Rational::from(&self.b * k),
            cf: self.cf.clone(),
        }
    }

    pub fn scale_int(&self, k: impl Into<Integer>) -> Self {
        self.scale(&Rational::from(k.into()))
    }

    /// Adds a rational constant.
    pub fn add_rational(&self, c: &Rational) -> Self {
        ZLambda {
            a: Rational::from(&self.a + c),
            b: self.b.clone(),
            cf: self.cf.clone(),
        }
    }

    /// Exact sign of `a + bλ`.
    ///
    /// Fails with [`Error::DepthExhausted`] only when the decision needs more
    /// partial quotients than a prefix-only expansion provides.
    pub fn sign(&self) -> Result<Ordering> {
        if self.b == 0 {
            return Ok(self.a.cmp0());
        }
        // clear denominators: A + Bλ with integers, B > 0 after normalisation
        let den = Integer::from(self.a.denom().lcm_ref(self.b.denom()));
        let mut big_a = self.a.numer() * Integer::from(&den / self.a.denom());
        let mut big_b = self.b.numer() * Integer::from(&den / self.b.denom());
        let flipped = big_b < 0;
        if flipped {
            big_a = -big_a;
            big_b = -big_b;
        }
        // a + bλ has the sign of λ − r with r = −A/B
        let r = Rational::from((-big_a, big_b));
        let lambda_vs_r = compare_lambda(&self.cf, &r)?;
        Ok(if flipped { lambda_vs_r.reverse() } else { lambda_vs_r })
    }

    /// Exact comparison of two elements over the same `λ`.
    pub fn cmp_exact(&self, other: &Self) -> Result<Ordering> {
        self.checked_sub(other)?.sign()
    }

    /// `a + bλ` correctly rounded to `prec` bits (barring exact ties).
    ///
    /// Uses a rational approximation `p_k/q_k` of `λ` whose error
    /// `|b|/q_k²` is below `2^-(prec+2)` of the magnitude, so cancellation
    /// never costs precision.
    pub fn to_float(&self, prec: u32) -> Result<Float> {
        if self.b == 0 {
            return Ok(Float::with_val(prec, &self.a));
        }
        let b_abs = Rational::from(self.b.abs_ref());
        let mut k: i64 = 1;
        loop {
            let pair = self.cf.convergent(k)?;
            let approx = &self.a + (&self.b * Rational::from((pair.p.clone(), pair.q.clone())));
            let q2 = Integer::from(pair.q.square_ref());
            let err = Rational::from(&b_abs / q2);
            let mut scaled = Rational::from(approx.abs_ref());
            scaled >>= prec + 4;
            if approx != 0 && err < scaled {
                return Ok(Float::with_val(prec, &approx));
            }
            k += 1;
        }
    }

    /// Fast evaluation through a cached binary value of `λ`.
    ///
    /// Suitable when `|b|` is moderate; accuracy is about
    /// `|b|·2^-(prec+64)` absolute.
    pub fn to_float_fast(&self, prec: u32) -> Result<Float> {
        let lambda = self.cf.lambda_float(prec + 64)?;
        let mut x = Float::with_val(prec + 64, &lambda * &self.b);
        x += &self.a;
        Ok(Float::with_val(prec, x))
    }

    /// `{"a": "p/q", "b": "r/s"}` with both components written as fractions.
    pub fn to_repr(&self) -> ZLambdaRepr {
        ZLambdaRepr {
            a: rational_string(&self.a),
            b: rational_string(&self.b),
        }
    }

    pub fn from_repr(cf: &ContinuedFraction, repr: &ZLambdaRepr) -> Result<Self> {
        Ok(Self::new(cf, parse_rational(&repr.a)?, parse_rational(&repr.b)?))
    }
}

impl std::ops::Neg for ZLambda {
    type Output = ZLambda;

    fn neg(self) -> ZLambda {
        ZLambda {
            a: -self.a,
            b: -self.b,
            cf: self.cf,
        }
    }
}

impl std::ops::Neg for &ZLambda {
    type Output = ZLambda;

    fn neg(self) -> ZLambda {
        -self.clone()
    }
}

/// JSON representation of a [`ZLambda`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZLambdaRepr {
    pub a: String,
    pub b: String,
}

fn rational_string(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

fn parse_rational(s: &str) -> Result<Rational> {
    Rational::parse(s.trim())
        .map(Rational::from)
        .map_err(|e| Error::Parse(format!("bad rational '{s}': {e}")))
}

/// Exact comparison of `λ` with a rational `r`.
fn compare_lambda(cf: &ContinuedFraction, r: &Rational) -> Result<Ordering> {
    if *r <= 0 {
        return Ok(Ordering::Greater);
    }
    if *r >= 1 {
        return Ok(Ordering::Less);
    }
    // λ = 1/ξ_1 and r = 1/ρ_1, so λ < r iff ξ_1 > ρ_1.
    // Then walk ξ_i = λ_i + 1/ξ_{i+1} against ρ_i, flipping at each level.
    let mut rho = Rational::from(r.recip_ref());
    let mut level = 1usize;
    let mut xi_greater_flipped = false;
    loop {
        let a = Integer::from(cf.quotient(level)?);
        let (_, f) = rho.clone().fract_floor(Integer::new());
        let rho_is_int = *rho.denom() == 1;
        let xi_greater = if rho_is_int {
            a >= f
        } else if a < f {
            false
        } else if a > f {
            true
        } else {
            // equal integer parts: ξ_i > ρ_i iff ξ_{i+1} < ρ_{i+1}
            rho -= &f;
            rho.recip_mut();
            level += 1;
            xi_greater_flipped = !xi_greater_flipped;
            continue;
        };
        let xi1_greater = xi_greater != xi_greater_flipped;
        return Ok(if xi1_greater { Ordering::Less } else { Ordering::Greater });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_float(prec: u32) -> Float {
        let five = Float::with_val(prec + 20, 5);
        Float::with_val(prec, (five.sqrt() - 1u32) / 2u32)
    }

    fn sqrt2m1_float(prec: u32) -> Float {
        let two = Float::with_val(prec + 20, 2);
        Float::with_val(prec, two.sqrt() - 1u32)
    }

    #[test]
    fn sign_examples() {
        let phi = ContinuedFraction::golden();
        // Φ² = 1 − Φ
        assert_eq!(ZLambda::from_integers(&phi, 1, -1).sign().unwrap(), Ordering::Greater);
        // 2Φ − 1 ≈ 0.236
        assert_eq!(ZLambda::from_integers(&phi, -1, 2).sign().unwrap(), Ordering::Greater);
        // 5Φ − 3 ≈ 0.09
        assert_eq!(ZLambda::from_integers(&phi, -3, 5).sign().unwrap(), Ordering::Greater);
        // 8Φ − 5 < 0
        assert_eq!(ZLambda::from_integers(&phi, -5, 8).sign().unwrap(), Ordering::Less);
        assert_eq!(ZLambda::zero(&phi).sign().unwrap(), Ordering::Equal);
        assert_eq!(ZLambda::from_integers(&phi, -2, 0).sign().unwrap(), Ordering::Less);
        let half = ZLambda::new(&phi, Rational::from((-1, 2)), Rational::from(1));
        assert_eq!(half.sign().unwrap(), Ordering::Greater);
    }

    #[test]
    fn sign_needs_depth_for_prefix_only() {
        let cf = ContinuedFraction::truncated(vec![1, 1, 1]).unwrap();
        // 8λ − 5 needs deep quotients
        assert!(matches!(
            ZLambda::from_integers(&cf, -5, 8).sign(),
            Err(Error::DepthExhausted { .. })
        ));
        assert_eq!(ZLambda::from_integers(&cf, -1, 2).sign().unwrap(), Ordering::Greater);
    }

    #[test]
    fn sign_matches_high_precision_floats() {
        let cases = [
            (ContinuedFraction::golden(), golden_float(400)),
            (ContinuedFraction::sqrt2_minus_1(), sqrt2m1_float(400)),
        ];
        for (cf, lam) in cases {
            for b in -40i64..=40 {
                for a in -40i64..=40 {
                    let z = ZLambda::from_integers(&cf, a, b);
                    let f = Float::with_val(400, &lam * b) + a;
                    let expect = if f.is_zero() {
                        Ordering::Equal
                    } else if f > 0 {
                        Ordering::Greater
                    } else {
                        Ordering::Less
                    };
                    assert_eq!(z.sign().unwrap(), expect, "{a} + {b}λ");
                }
            }
        }
    }

    #[test]
    fn arithmetic_and_mixing() {
        let phi = ContinuedFraction::golden();
        let s = ContinuedFraction::sqrt2_minus_1();
        let x = ZLambda::from_integers(&phi, 1, 2);
        let y = ZLambda::from_integers(&phi, 3, -1);
        assert_eq!(x.checked_add(&y).unwrap(), ZLambda::from_integers(&phi, 4, 1));
        assert_eq!(x.checked_sub(&y).unwrap(), ZLambda::from_integers(&phi, -2, 3));
        assert_eq!(-x.clone(), ZLambda::from_integers(&phi, -1, -2));
        assert_eq!(x.scale_int(3), ZLambda::from_integers(&phi, 3, 6));
        assert_eq!(x.checked_add(&ZLambda::lambda(&s)), Err(Error::MixedLambda));
        assert_eq!(x.cmp_exact(&y).unwrap(), Ordering::Less);
    }

    #[test]
    fn to_float_is_accurate_under_cancellation() {
        let phi = ContinuedFraction::golden();
        let lam = golden_float(1200);
        for m in [10usize, 40, 80] {
            let d = phi.delta(crate::cf::SemiIndex::new(m, 0)).unwrap();
            let got = d.to_float(256).unwrap();
            let exact = Float::with_val(1200, &lam * d.b().numer()) + d.a().numer();
            let rel = Float::with_val(256, (Float::with_val(1200, &got) - &exact) / &exact).abs();
            assert!(rel < Float::with_val(64, Float::i_exp(1, -254)), "m={m}");
        }
    }

    #[test]
    fn to_float_fast_agrees() {
        let s = ContinuedFraction::sqrt2_minus_1();
        let z = ZLambda::from_integers(&s, -7, 17);
        let a = z.to_float(256).unwrap();
        let b = z.to_float_fast(256).unwrap();
        assert!(Float::with_val(256, a - b).abs() < Float::with_val(64, Float::i_exp(1, -250)));
    }

    #[test]
    fn repr_roundtrip() {
        let phi = ContinuedFraction::golden();
        let z = ZLambda::new(&phi, Rational::from((3, 4)), Rational::from(-2));
        let repr = z.to_repr();
        assert_eq!(repr.a, "3/4");
        assert_eq!(repr.b, "-2/1");
        let json = serde_json::to_string(&repr).unwrap();
        assert_eq!(json, r#"{"a":"3/4","b":"-2/1"}"#);
        let back = ZLambda::from_repr(&phi, &serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, z);
        assert!(parse_rational("x/2").is_err());
    }
}
