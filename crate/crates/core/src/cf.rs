//! Continued fractions of irrationals in (0,1): convergents, semiconvergents,
//! their approximation errors, Gauss-map shifts and the semiconvergent
//! index set with its well-ordering.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ZLambda;

/// Index `(m, n)` of a semiconvergent.
///
/// `(m, n)` belongs to the full index set when `n <= λ_{m+1}` and to the
/// half-open set when `n < λ_{m+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SemiIndex {
    pub m: usize,
    pub n: u64,
}

impl SemiIndex {
    pub const fn new(m: usize, n: u64) -> Self {
        SemiIndex { m, n }
    }
}

impl fmt::Display for SemiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.n)
    }
}

/// Numerator and denominator of a (semi)convergent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergentPair {
    pub p: Integer,
    pub q: Integer,
}

impl ConvergentPair {
    pub fn new(p: impl Into<Integer>, q: impl Into<Integer>) -> Self {
        ConvergentPair {
            p: p.into(),
            q: q.into(),
        }
    }
}

struct Inner {
    prefix: Vec<u64>,
    tail: Vec<u64>,
    /// Entry `k` holds the convergent with index `k - 1`.
    convergents: RwLock<Vec<ConvergentPair>>,
    lambda_floats: RwLock<HashMap<u32, Float>>,
}

/// An irrational `λ = [0; λ_1, λ_2, ...]` in (0,1), given by a finite prefix
/// of partial quotients and an optional periodic tail.
///
/// Without a tail the value is only known to the depth of the prefix and any
/// request past it fails with [`Error::DepthExhausted`]. Clones share the
/// memoized convergent table.
#[derive(Clone)]
pub struct ContinuedFraction {
    inner: Arc<Inner>,
}

impl fmt::Debug for ContinuedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ContinuedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[0;")?;
        for (i, a) in self.inner.prefix.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, " {a}")?;
        }
        if !self.inner.tail.is_empty() {
            if !self.inner.prefix.is_empty() {
                write!(f, ",")?;
            }
            write!(f, " (")?;
            for (i, a) in self.inner.tail.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")*")?;
        } else {
            write!(f, ", ...")?;
        }
        write!(f, "]")
    }
}

impl PartialEq for ContinuedFraction {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.prefix == other.inner.prefix && self.inner.tail == other.inner.tail)
    }
}

impl Eq for ContinuedFraction {}

/// Smallest period of `tail`.
fn minimal_period(tail: &[u64]) -> usize {
    let len = tail.len();
    (1..=len)
        .find(|&p| len.is_multiple_of(p) && (p..len).all(|i| tail[i] == tail[i - p]))
        .unwrap_or(len)
}

impl ContinuedFraction {
    /// Builds `[0; prefix, (tail)*]`. An empty tail means "prefix only".
    pub fn new(prefix: Vec<u64>, tail: Vec<u64>) -> Result<Self> {
        if prefix.iter().chain(tail.iter()).any(|&a| a == 0) {
            return Err(Error::InvalidContinuedFraction(
                "partial quotients must be positive".into(),
            ));
        }
        if prefix.is_empty() && tail.is_empty() {
            return Err(Error::InvalidContinuedFraction(
                "at least one partial quotient is required".into(),
            ));
        }
        let mut prefix = prefix;
        let mut tail = tail;
        if !tail.is_empty() {
            let period = minimal_period(&tail);
            tail.truncate(period);
            // fold a prefix suffix that repeats the tail into the tail
            while let (Some(&last_pre), Some(&last_tail)) = (prefix.last(), tail.last()) {
                if last_pre != last_tail {
                    break;
                }
                prefix.pop();
                tail.rotate_right(1);
            }
        }
        let seeds = vec![ConvergentPair::new(1, 0), ConvergentPair::new(0, 1)];
        Ok(ContinuedFraction {
            inner: Arc::new(Inner {
                prefix,
                tail,
                convergents: RwLock::new(seeds),
                lambda_floats: RwLock::new(HashMap::new()),
            }),
        })
    }

    /// Eventually periodic expansion; the tail must be non-empty.
    pub fn periodic(prefix: Vec<u64>, tail: Vec<u64>) -> Result<Self> {
        if tail.is_empty() {
            return Err(Error::InvalidContinuedFraction("periodic tail is empty".into()));
        }
        Self::new(prefix, tail)
    }

    /// A prefix-only expansion of an irrational known to finite depth.
    pub fn truncated(prefix: Vec<u64>) -> Result<Self> {
        Self::new(prefix, Vec::new())
    }

    /// `Φ = (√5 − 1)/2 = [0; 1, 1, 1, ...]`.
    pub fn golden() -> Self {
        Self::new(Vec::new(), vec![1]).expect("valid expansion")
    }

    /// `√2 − 1 = [0; 2, 2, 2, ...]`.
    pub fn sqrt2_minus_1() -> Self {
        Self::new(Vec::new(), vec![2]).expect("valid expansion")
    }

    /// Parses the shorthands `phi` and `sqrt2m1`.
    pub fn from_shorthand(name: &str) -> Result<Self> {
        match name.trim() {
            "phi" => Ok(Self::golden()),
            "sqrt2m1" => Ok(Self::sqrt2_minus_1()),
            other => Err(Error::Parse(format!("unknown continued fraction shorthand '{other}'"))),
        }
    }

    pub fn prefix(&self) -> &[u64] {
        &self.inner.prefix
    }

    pub fn tail(&self) -> &[u64] {
        &self.inner.tail
    }

    pub fn is_periodic(&self) -> bool {
        !self.inner.tail.is_empty()
    }

    /// Number of available partial quotients, `None` when unbounded.
    pub fn available_depth(&self) -> Option<usize> {
        if self.is_periodic() {
            None
        } else {
            Some(self.inner.prefix.len())
        }
    }

    /// Partial quotient `λ_k` for `k >= 1`.
    pub fn quotient(&self, k: usize) -> Result<u64> {
        assert!(k >= 1, "partial quotients are indexed from 1");
        let i = k - 1;
        let prefix = &self.inner.prefix;
        if i < prefix.len() {
            return Ok(prefix[i]);
        }
        let tail = &self.inner.tail;
        if tail.is_empty() {
            return Err(Error::DepthExhausted {
                requested: k,
                available: prefix.len(),
            });
        }
        Ok(tail[(i - prefix.len()) % tail.len()])
    }

    /// Convergent `(p_m, q_m)` for `m >= -1`.
    pub fn convergent(&self, m: i64) -> Result<ConvergentPair> {
        assert!(m >= -1, "convergents are defined from index -1");
        let slot = (m + 1) as usize;
        {
            let table = self.inner.convergents.read().expect("convergent table poisoned");
            if let Some(pair) = table.get(slot) {
                return Ok(pair.clone());
            }
        }
        // compute the quotients before taking the write lock so errors leave the table intact
        let mut table = self.inner.convergents.write().expect("convergent table poisoned");
        while table.len() <= slot {
            let k = table.len() - 1;
            let a = self.quotient(k)?;
            let prev = &table[k];
            let prev2 = &table[k - 1];
            let p = Integer::from(&prev.p * a) + &prev2.p;
            let q = Integer::from(&prev.q * a) + &prev2.q;
            table.push(ConvergentPair { p, q });
        }
        Ok(table[slot].clone())
    }

    /// Whether `idx` lies in the full index set (`n <= λ_{m+1}`).
    pub fn contains(&self, idx: SemiIndex) -> Result<bool> {
        Ok(idx.n <= self.quotient(idx.m + 1)?)
    }

    /// Whether `idx` lies in the half-open index set (`n < λ_{m+1}`).
    pub fn contains_strict(&self, idx: SemiIndex) -> Result<bool> {
        Ok(idx.n < self.quotient(idx.m + 1)?)
    }

    fn check_index(&self, idx: SemiIndex) -> Result<()> {
        let limit = self.quotient(idx.m + 1)?;
        if idx.n > limit {
            return Err(Error::IndexOutOfRange {
                m: idx.m,
                n: idx.n,
                limit,
            });
        }
        Ok(())
    }

    /// Semiconvergent `(P_{m,n}, Q_{m,n}) = (n p_m + p_{m-1}, n q_m + q_{m-1})`,
    /// reducing to `(p_m, q_m)` when `n = 0`.
    pub fn semiconvergent(&self, idx: SemiIndex) -> Result<ConvergentPair> {
        self.check_index(idx)?;
        let m = idx.m as i64;
        let cur = self.convergent(m)?;
        if idx.n == 0 {
            return Ok(cur);
        }
        let prev = self.convergent(m - 1)?;
        Ok(ConvergentPair {
            p: cur.p * idx.n + prev.p,
            q: cur.q * idx.n + prev.q,
        })
    }

    /// `Δ_{m,0} = q_m λ − p_m` for `m >= -1` (so `Δ_{-1,0} = −1`).
    pub fn convergent_error(&self, m: i64) -> Result<ZLambda> {
        let pair = self.convergent(m)?;
        Ok(ZLambda::from_integers(self, -pair.p, pair.q))
    }

    /// `Δ_{m,n} = Q_{m,n} λ − P_{m,n}`.
    pub fn delta(&self, idx: SemiIndex) -> Result<ZLambda> {
        let pair = self.semiconvergent(idx)?;
        Ok(ZLambda::from_integers(self, -pair.p, pair.q))
    }

    /// `n Δ_{m,0} + Δ_{m-1,0}`: the offset of the far edge of an atom.
    ///
    /// Equals `Δ_{m,n}` for `n > 0` and `Δ_{m-1,0}` for `n = 0`.
    pub fn edge_offset(&self, idx: SemiIndex) -> Result<ZLambda> {
        self.check_index(idx)?;
        let m = idx.m as i64;
        let cur = self.convergent(m)?;
        let prev = self.convergent(m - 1)?;
        let p = cur.p * idx.n + prev.p;
        let q = cur.q * idx.n + prev.q;
        Ok(ZLambda::from_integers(self, -p, q))
    }

    /// `g^m(λ) = [0; λ_{m+1}, λ_{m+2}, ...]`.
    pub fn gauss_shift(&self, m: usize) -> Result<ContinuedFraction> {
        if m == 0 {
            return Ok(self.clone());
        }
        let prefix = &self.inner.prefix;
        let tail = &self.inner.tail;
        if tail.is_empty() {
            if m >= prefix.len() {
                return Err(Error::DepthExhausted {
                    requested: m + 1,
                    available: prefix.len(),
                });
            }
            return Self::truncated(prefix[m..].to_vec());
        }
        if m <= prefix.len() {
            return Self::new(prefix[m..].to_vec(), tail.clone());
        }
        let mut rotated = tail.clone();
        rotated.rotate_left((m - prefix.len()) % tail.len());
        Self::new(Vec::new(), rotated)
    }

    /// `w_λ(m, n) = λ_1 + ... + λ_m + n`.
    pub fn w_index(&self, idx: SemiIndex) -> Result<u64> {
        self.check_index(idx)?;
        let mut w = idx.n;
        for k in 1..=idx.m {
            w += self.quotient(k)?;
        }
        Ok(w)
    }

    /// The element of the half-open index set with `w_λ = w`.
    pub fn index_at(&self, w: u64) -> Result<SemiIndex> {
        let mut rest = w;
        let mut m = 0;
        loop {
            let a = self.quotient(m + 1)?;
            if rest < a {
                return Ok(SemiIndex::new(m, rest));
            }
            rest -= a;
            m += 1;
        }
    }

    /// Next element of the half-open index set in `w_λ` order.
    pub fn successor(&self, idx: SemiIndex) -> Result<SemiIndex> {
        if idx.n + 1 < self.quotient(idx.m + 1)? {
            Ok(SemiIndex::new(idx.m, idx.n + 1))
        } else {
            Ok(SemiIndex::new(idx.m + 1, 0))
        }
    }

    /// Elements of the half-open index set in increasing `w_λ` order,
    /// starting at `start`. Stops after the first depth error.
    pub fn indices_from(&self, start: SemiIndex) -> IndexIter<'_> {
        IndexIter {
            cf: self,
            next: Some(Ok(start)),
        }
    }

    /// `λ` rounded to `prec` bits (cached per precision).
    pub fn lambda_float(&self, prec: u32) -> Result<Float> {
        if let Some(x) = self.inner.lambda_floats.read().expect("cache poisoned").get(&prec) {
            return Ok(x.clone());
        }
        // |λ − p_k/q_k| < 1/q_k²; pick q_k² beyond 2^(prec + 4)
        let target = Integer::from(1) << (prec / 2 + 3);
        let mut m = 1;
        let pair = loop {
            let pair = self.convergent(m)?;
            if pair.q >= target {
                break pair;
            }
            m += 1;
        };
        let value = Float::with_val(prec, Rational::from((pair.p, pair.q)));
        self.inner
            .lambda_floats
            .write()
            .expect("cache poisoned")
            .insert(prec, value.clone());
        Ok(value)
    }
}

/// Iterator over the half-open index set in `w_λ` order.
pub struct IndexIter<'a> {
    cf: &'a ContinuedFraction,
    next: Option<Result<SemiIndex>>,
}

impl Iterator for IndexIter<'_> {
    type Item = Result<SemiIndex>;

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.next.take()?;
        if let Ok(idx) = &current {
            self.next = Some(self.cf.successor(*idx));
        }
        Some(current)
    }
}

/// Sign of `Δ_{m,n}`: positive iff `m` even and `n = 0`, or `m` odd and `n > 0`.
pub fn delta_sign(idx: SemiIndex) -> Ordering {
    let even = idx.m.is_multiple_of(2);
    if (even && idx.n == 0) || (!even && idx.n > 0) {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// `⌊sλ⌋`, exactly.
pub fn floor_multiple(cf: &ContinuedFraction, s: &Integer) -> Result<Integer> {
    let bits = s.significant_bits() + 64;
    let approx = Float::with_val(bits, cf.lambda_float(bits.max(64))? * s);
    let mut r = approx.to_integer().unwrap_or_default();
    let err = |r: &Integer| ZLambda::from_integers(cf, -r.clone(), s.clone()).sign();
    while err(&r)? == Ordering::Less {
        r -= 1;
    }
    while err(&(Integer::from(&r + 1)))? != Ordering::Less {
        r += 1;
    }
    Ok(r)
}

/// One-sided best approximation of `P_{m,n}/Q_{m,n}`: every `r/s` on the same
/// side of `λ` with `1 <= s < Q_{m,n+1}`, other than `P/Q` itself, has a
/// strictly larger error `|sλ − r|`. Returns the first counterexample `(r, s)`.
pub fn best_approximation_check(cf: &ContinuedFraction, idx: SemiIndex) -> Result<Option<(Integer, Integer)>> {
    let pair = cf.semiconvergent(idx)?;
    let bound = cf.semiconvergent(SemiIndex::new(idx.m, idx.n + 1))?.q;
    let delta = cf.delta(idx)?;
    let above = delta.sign()? == Ordering::Less;
    let own = if above { -delta } else { delta };
    let mut s = Integer::from(1);
    while s < bound {
        let floor = floor_multiple(cf, &s)?;
        // closest numerator on the chosen side
        let r = if above { floor + 1u32 } else { floor };
        let same = Integer::from(&r * &pair.q) == Integer::from(&s * &pair.p);
        if !same {
            let e = ZLambda::from_integers(cf, -r.clone(), s.clone());
            let e = if above { -e } else { e };
            if e.cmp_exact(&own)? != Ordering::Greater {
                return Ok(Some((r, s)));
            }
        }
        s += 1;
    }
    Ok(None)
}

/// Outcome of comparing `Δ_{j,n}(g^m λ)` with `−Δ_{m+j,n}(λ)/Δ_{m-1,0}(λ)`.
#[derive(Debug, Clone)]
pub struct DeltaScaling {
    pub shifted: Float,
    pub rescaled: Float,
    pub deviation: Float,
    pub holds: bool,
}

/// Checks `Δ_{j,n}(g^m(λ)) = −Δ_{m+j,n}(λ) / Δ_{m-1,0}(λ)` at `prec` bits,
/// evaluating the left side from the shifted expansion independently.
///
/// With `j = n = 0` this is `g^m(λ) = −Δ_{m,0}/Δ_{m-1,0}`; with `j = 0` it is
/// `Δ_{0,n}(g^m λ) = −Δ_{m,n}/Δ_{m-1,0}`.
pub fn scaled_delta_identity_check(
    cf: &ContinuedFraction,
    m: usize,
    j: usize,
    n: u64,
    prec: u32,
) -> Result<DeltaScaling> {
    assert!(m >= 1, "the identity needs m >= 1");
    let shifted_cf = cf.gauss_shift(m)?;
    let work = prec + 32;
    let shifted = shifted_cf.delta(SemiIndex::new(j, n))?.to_float(work)?;
    let num = cf.delta(SemiIndex::new(m + j, n))?.to_float(work)?;
    let den = cf.convergent_error(m as i64 - 1)?.to_float(work)?;
    let rescaled = -(num / den);
    let deviation = Float::with_val(prec, &shifted - &rescaled).abs();
    let scale = Float::with_val(prec, shifted.abs_ref()).max(&Float::with_val(prec, 1));
    let tol = Float::with_val(prec, Float::i_exp(1, 16 - prec as i32)) * scale;
    let holds = deviation <= tol;
    Ok(DeltaScaling {
        shifted: Float::with_val(prec, shifted),
        rescaled: Float::with_val(prec, rescaled),
        deviation,
        holds,
    })
}

/// JSON form `{"prefix": [...], "tail": [...]}` (tail optional), or one of the
/// shorthand strings `"phi"` / `"sqrt2m1"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CfSpec {
    Shorthand(String),
    Expansion {
        #[serde(default)]
        prefix: Vec<u64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        tail: Vec<u64>,
    },
}

impl CfSpec {
    pub fn build(&self) -> Result<ContinuedFraction> {
        match self {
            CfSpec::Shorthand(name) => ContinuedFraction::from_shorthand(name),
            CfSpec::Expansion { prefix, tail } => ContinuedFraction::new(prefix.clone(), tail.clone()),
        }
    }
}

impl From<&ContinuedFraction> for CfSpec {
    fn from(cf: &ContinuedFraction) -> Self {
        CfSpec::Expansion {
            prefix: cf.prefix().to_vec(),
            tail: cf.tail().to_vec(),
        }
    }
}

impl Serialize for ContinuedFraction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CfSpec::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ContinuedFraction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let spec = CfSpec::deserialize(deserializer)?;
        spec.build().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fib(n: usize) -> Integer {
        let (mut a, mut b) = (Integer::from(0), Integer::from(1));
        for _ in 0..n {
            let c = Integer::from(&a + &b);
            a = b;
            b = c;
        }
        a
    }

    /// Evaluates `[0; a_1, ..., a_k]` as a rational, bottom-up.
    fn eval_finite(quotients: &[u64]) -> Rational {
        let mut acc = Rational::new();
        for &a in quotients.iter().rev() {
            acc = Rational::from(1) / (Rational::from(a) + acc);
        }
        acc
    }

    #[test]
    fn golden_convergents_are_fibonacci() {
        let phi = ContinuedFraction::golden();
        assert_eq!(phi.convergent(3).unwrap(), ConvergentPair::new(2, 3));
        for m in 0..60 {
            let pair = phi.convergent(m as i64).unwrap();
            assert_eq!(pair.p, fib(m));
            assert_eq!(pair.q, fib(m + 1));
        }
    }

    #[test]
    fn convergent_seeds() {
        for cf in [ContinuedFraction::golden(), ContinuedFraction::sqrt2_minus_1()] {
            assert_eq!(cf.convergent(-1).unwrap(), ConvergentPair::new(1, 0));
            assert_eq!(cf.convergent(0).unwrap(), ConvergentPair::new(0, 1));
        }
    }

    #[test]
    fn convergents_match_direct_evaluation() {
        let cf = ContinuedFraction::periodic(vec![3, 1, 4], vec![1, 5, 9]).unwrap();
        let quotients: Vec<u64> = (1..=12).map(|k| cf.quotient(k).unwrap()).collect();
        for m in 1..=12 {
            let pair = cf.convergent(m as i64).unwrap();
            assert_eq!(
                Rational::from((pair.p.clone(), pair.q.clone())),
                eval_finite(&quotients[..m])
            );
            assert_eq!(pair.p.clone().gcd(&pair.q), 1);
        }
    }

    #[test]
    fn semiconvergent_examples() {
        let s = ContinuedFraction::sqrt2_minus_1();
        assert_eq!(
            s.semiconvergent(SemiIndex::new(0, 1)).unwrap(),
            ConvergentPair::new(1, 1)
        );
        // [0; 1] evaluated directly
        assert_eq!(eval_finite(&[1]), Rational::from(1));
        let phi = ContinuedFraction::golden();
        for m in 0..20 {
            let pair = phi.semiconvergent(SemiIndex::new(m, 0)).unwrap();
            assert_eq!(pair.p, fib(m));
            assert_eq!(pair.q, fib(m + 1));
        }
    }

    #[test]
    fn semiconvergent_wraps_to_next_convergent() {
        let cf = ContinuedFraction::periodic(vec![2, 3], vec![1, 4]).unwrap();
        for m in 0..10 {
            let top = cf.quotient(m + 1).unwrap();
            assert_eq!(
                cf.semiconvergent(SemiIndex::new(m, top)).unwrap(),
                cf.semiconvergent(SemiIndex::new(m + 1, 0)).unwrap()
            );
            assert_eq!(
                cf.w_index(SemiIndex::new(m, top)).unwrap(),
                cf.w_index(SemiIndex::new(m + 1, 0)).unwrap()
            );
        }
    }

    #[test]
    fn semiconvergent_rejects_out_of_range() {
        let s = ContinuedFraction::sqrt2_minus_1();
        assert!(matches!(
            s.semiconvergent(SemiIndex::new(1, 3)),
            Err(Error::IndexOutOfRange { m: 1, n: 3, limit: 2 })
        ));
    }

    #[test]
    fn depth_exhaustion_is_loud() {
        let cf = ContinuedFraction::truncated(vec![1, 2, 3]).unwrap();
        assert_eq!(cf.quotient(3).unwrap(), 3);
        assert!(matches!(
            cf.quotient(4),
            Err(Error::DepthExhausted {
                requested: 4,
                available: 3
            })
        ));
        assert!(cf.convergent(3).is_ok());
        assert!(matches!(cf.convergent(4), Err(Error::DepthExhausted { .. })));
        // a failed extension leaves the memo usable
        assert_eq!(cf.convergent(2).unwrap(), ConvergentPair::new(2, 3));
        assert!(cf.gauss_shift(3).is_err());
    }

    #[test]
    fn invalid_expansions_rejected() {
        assert!(ContinuedFraction::new(vec![], vec![]).is_err());
        assert!(ContinuedFraction::new(vec![1, 0], vec![2]).is_err());
        assert!(ContinuedFraction::periodic(vec![1], vec![]).is_err());
    }

    #[test]
    fn normalization_makes_equal_values_equal() {
        let a = ContinuedFraction::periodic(vec![1, 2, 1, 2], vec![1, 2, 1, 2]).unwrap();
        let b = ContinuedFraction::periodic(vec![], vec![1, 2]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.prefix(), &[] as &[u64]);
        assert_eq!(a.tail(), &[1, 2]);
        let c = ContinuedFraction::periodic(vec![3, 2], vec![1, 2]).unwrap();
        assert_eq!(c.prefix(), &[3]);
        assert_eq!(c.tail(), &[2, 1]);
        for k in 1..10 {
            assert_eq!(c.quotient(k).unwrap(), [3u64, 2, 1, 2, 1, 2, 1, 2, 1][k - 1]);
        }
    }

    #[test]
    fn gauss_shift_examples() {
        let phi = ContinuedFraction::golden();
        assert_eq!(phi.gauss_shift(2).unwrap(), phi);
        let cf = ContinuedFraction::periodic(vec![1, 2, 3, 4], vec![5, 6]).unwrap();
        assert_eq!(cf.gauss_shift(0).unwrap(), cf);
        let shifted = cf.gauss_shift(1).unwrap();
        assert_eq!(shifted.prefix(), &[2, 3, 4]);
        for m in 0..7 {
            let g = cf.gauss_shift(m).unwrap();
            for j in 1..12 {
                assert_eq!(g.quotient(j).unwrap(), cf.quotient(m + j).unwrap());
            }
        }
        let t = ContinuedFraction::periodic(vec![], vec![1, 2]).unwrap();
        assert_eq!(t.gauss_shift(2).unwrap(), t);
    }

    #[test]
    fn w_index_examples() {
        let phi = ContinuedFraction::golden();
        for m in 0..30 {
            assert_eq!(phi.w_index(SemiIndex::new(m, 0)).unwrap(), m as u64);
        }
        let cf = ContinuedFraction::periodic(vec![3], vec![2]).unwrap();
        assert_eq!(cf.w_index(SemiIndex::new(1, 2)).unwrap(), 5);
        for n in 0..3 {
            assert_eq!(cf.w_index(SemiIndex::new(0, n)).unwrap(), n);
        }
    }

    #[test]
    fn w_index_is_bijective_on_initial_segment() {
        let cf = ContinuedFraction::periodic(vec![3, 1], vec![2, 4, 1]).unwrap();
        let indices: Vec<SemiIndex> = cf
            .indices_from(SemiIndex::new(0, 0))
            .take(200)
            .collect::<Result<_>>()
            .unwrap();
        for (w, idx) in indices.iter().enumerate() {
            assert_eq!(cf.w_index(*idx).unwrap(), w as u64);
            assert_eq!(cf.index_at(w as u64).unwrap(), *idx);
            assert!(cf.contains_strict(*idx).unwrap());
        }
    }

    #[test]
    fn interchange_with_gauss_shift() {
        let cf = ContinuedFraction::periodic(vec![2, 1, 3], vec![1, 4]).unwrap();
        for m in 0..5 {
            let shifted = cf.gauss_shift(m).unwrap();
            let head: u64 = (1..=m).map(|k| cf.quotient(k).unwrap()).sum();
            for j in 0..5 {
                let top = shifted.quotient(j + 1).unwrap();
                for n in 0..=top {
                    assert!(cf.contains(SemiIndex::new(m + j, n)).unwrap());
                    assert_eq!(
                        cf.w_index(SemiIndex::new(m + j, n)).unwrap(),
                        head + shifted.w_index(SemiIndex::new(j, n)).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn delta_examples() {
        let phi = ContinuedFraction::golden();
        let minus_one = phi.convergent_error(-1).unwrap();
        assert_eq!(minus_one, ZLambda::from_integers(&phi, -1, 0));
        assert_eq!(phi.delta(SemiIndex::new(0, 0)).unwrap(), ZLambda::lambda(&phi));
        for m in 0..30 {
            let d = phi.delta(SemiIndex::new(m, 0)).unwrap();
            assert_eq!(d, ZLambda::from_integers(&phi, -fib(m), fib(m + 1)));
        }
    }

    #[test]
    fn delta_sign_examples() {
        assert_eq!(delta_sign(SemiIndex::new(0, 0)), Ordering::Greater);
        assert_eq!(delta_sign(SemiIndex::new(1, 0)), Ordering::Less);
        assert_eq!(delta_sign(SemiIndex::new(3, 2)), Ordering::Greater);
        assert_eq!(delta_sign(SemiIndex::new(2, 1)), Ordering::Less);
    }

    #[test]
    fn delta_recurrences_hold_coefficientwise() {
        let cf = ContinuedFraction::periodic(vec![1, 3], vec![2, 1, 5]).unwrap();
        for m in 2..25i64 {
            let a = cf.quotient(m as usize).unwrap();
            let lhs = cf.convergent_error(m).unwrap();
            let rhs = cf
                .convergent_error(m - 1)
                .unwrap()
                .scale_int(a)
                .checked_add(&cf.convergent_error(m - 2).unwrap())
                .unwrap();
            assert_eq!(lhs, rhs);
        }
        for m in 1..20usize {
            let top = cf.quotient(m + 1).unwrap();
            for n in 0..=top {
                let lhs = cf.delta(SemiIndex::new(m, n)).unwrap();
                let mut rhs = cf.convergent_error(m as i64 - 1).unwrap();
                for _ in 0..n {
                    rhs = rhs.checked_add(&cf.convergent_error(m as i64).unwrap()).unwrap();
                }
                assert_eq!(cf.edge_offset(SemiIndex::new(m, n)).unwrap(), rhs);
                if n > 0 {
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn delta_sign_agrees_with_exact_sign() {
        for cf in [
            ContinuedFraction::golden(),
            ContinuedFraction::sqrt2_minus_1(),
            ContinuedFraction::periodic(vec![], vec![1, 2]).unwrap(),
            ContinuedFraction::periodic(vec![4, 1, 7], vec![3, 1]).unwrap(),
        ] {
            for w in 0..=40 {
                let idx = cf.index_at(w).unwrap();
                assert_eq!(cf.delta(idx).unwrap().sign().unwrap(), delta_sign(idx), "{cf} {idx}");
            }
        }
    }

    #[test]
    fn scaled_delta_identity_examples() {
        let phi = ContinuedFraction::golden();
        let r = scaled_delta_identity_check(&phi, 2, 0, 0, 256).unwrap();
        assert!(r.holds);
        // both sides equal Φ; compare with an independent evaluation (√5 − 1)/2
        let five = Float::with_val(300, 5);
        let golden = (five.sqrt() - 1u32) / 2u32;
        let diff = Float::with_val(256, &r.shifted - &golden).abs();
        assert!(diff < Float::with_val(64, Float::i_exp(1, -250)));

        let cf = ContinuedFraction::periodic(vec![3, 1, 2], vec![1, 4]).unwrap();
        assert!(scaled_delta_identity_check(&cf, 1, 0, 0, 256).unwrap().holds);

        let s = ContinuedFraction::sqrt2_minus_1();
        let r = scaled_delta_identity_check(&s, 2, 1, 1, 256).unwrap();
        assert!(r.holds);
        assert!(r.deviation < Float::with_val(64, Float::i_exp(1, -200)));
    }

    #[test]
    fn serde_roundtrip_and_shorthand() {
        let cf: ContinuedFraction = serde_json::from_str(r#"{"prefix":[1],"tail":[2]}"#).unwrap();
        assert_eq!(cf.quotient(1).unwrap(), 1);
        assert_eq!(cf.quotient(5).unwrap(), 2);
        let phi: ContinuedFraction = serde_json::from_str(r#""phi""#).unwrap();
        assert_eq!(phi, ContinuedFraction::golden());
        let back: ContinuedFraction = serde_json::from_str(&serde_json::to_string(&cf).unwrap()).unwrap();
        assert_eq!(back, cf);
        let finite: ContinuedFraction = serde_json::from_str(r#"{"prefix":[1,3,1,1]}"#).unwrap();
        assert_eq!(finite.available_depth(), Some(4));
        assert!(serde_json::from_str::<ContinuedFraction>(r#""tau""#).is_err());
    }

    #[test]
    fn floor_multiples_are_exact() {
        let cf = ContinuedFraction::sqrt2_minus_1();
        for s in 1..200u32 {
            let expected = ((2f64.sqrt() - 1.0) * s as f64).floor() as i64;
            assert_eq!(floor_multiple(&cf, &Integer::from(s)).unwrap(), expected);
        }
    }

    #[test]
    fn best_approximations_small_cases() {
        for cf in [
            ContinuedFraction::golden(),
            ContinuedFraction::periodic(vec![3, 1, 4], vec![1, 5]).unwrap(),
        ] {
            for m in 0..6 {
                for n in 0..cf.quotient(m + 1).unwrap() {
                    assert_eq!(
                        best_approximation_check(&cf, SemiIndex::new(m, n)).unwrap(),
                        None,
                        "{cf} ({m},{n})"
                    );
                }
            }
        }
    }
}
