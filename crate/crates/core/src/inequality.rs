//! Bell and CHSH inequalities over cross-correlated ±1 data, in exact arithmetic.
//!
//! For index-aligned ±1 sequences both inequalities hold identically: item by
//! item `|aᵢbᵢ − aᵢcᵢ| = 1 − bᵢcᵢ` and `aᵢ(bᵢ − b′ᵢ) + a′ᵢ(bᵢ + b′ᵢ) = ±2`, and
//! averaging preserves the bound. Nothing here is approximate.

use std::fmt;

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Nonempty sequence of ±1 outcomes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignSequence(Vec<i8>);

impl SignSequence {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Usage("a sign sequence needs at least one entry".into()));
        }
        if let Some(bad) = values.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::Usage(format!(
                "sign sequence entries must be +1 or -1, found {bad}"
            )));
        }
        Ok(Self(values))
    }

    /// Parse tokens separated by whitespace and/or commas (`+1`, `1`, `-1`).
    pub fn parse(line: &str) -> Result<Self> {
        let values = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| match t {
                "1" | "+1" => Ok(1),
                "-1" => Ok(-1),
                other => Err(Error::Usage(format!("'{other}' is not a ±1 token"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        Self::new(values)
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Result<Self> {
        Self::new((0..len).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }
}

impl fmt::Display for SignSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.0 {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            f.write_str(if *v > 0 { "+1" } else { "-1" })?;
        }
        Ok(())
    }
}

/// One sequence per nonblank line.
pub fn parse_datasets(text: &str) -> Result<Vec<SignSequence>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(SignSequence::parse)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InequalityReport {
    pub lhs: Rational,
    pub bound: Rational,
    pub satisfied: bool,
    pub margin: Rational,
}

impl InequalityReport {
    fn new(lhs: Rational, bound: Rational) -> Self {
        Self {
            lhs,
            bound,
            satisfied: lhs <= bound,
            margin: bound - lhs,
        }
    }
}

fn same_length(seqs: &[&SignSequence]) -> Result<usize> {
    let n = seqs[0].len();
    if seqs.iter().any(|s| s.len() != n) {
        let lens: Vec<usize> = seqs.iter().map(|s| s.len()).collect();
        return Err(Error::Usage(format!("sequences must have equal lengths, got {lens:?}")));
    }
    Ok(n)
}

/// `(Σ xᵢyᵢ) / N`.
pub fn cross_correlation(x: &SignSequence, y: &SignSequence) -> Result<Rational> {
    let n = same_length(&[x, y])?;
    let sum: i64 = x.0.iter().zip(&y.0).map(|(&a, &b)| i64::from(a * b)).sum();
    Ok(Rational::new(sum, n as i64))
}

/// `|C(a,b) − C(a,c)| ≤ 1 − C(b,c)`.
pub fn bell_three_check(a: &SignSequence, b: &SignSequence, c: &SignSequence) -> Result<InequalityReport> {
    same_length(&[a, b, c])?;
    let lhs = (cross_correlation(a, b)? - cross_correlation(a, c)?).abs();
    let bound = Rational::from_integer(1) - cross_correlation(b, c)?;
    Ok(InequalityReport::new(lhs, bound))
}

/// `|C(a,b) − C(a,b′)| + |C(a′,b) + C(a′,b′)| ≤ 2`.
pub fn chsh_four_check(
    a: &SignSequence,
    a_prime: &SignSequence,
    b: &SignSequence,
    b_prime: &SignSequence,
) -> Result<InequalityReport> {
    same_length(&[a, a_prime, b, b_prime])?;
    let lhs = (cross_correlation(a, b)? - cross_correlation(a, b_prime)?).abs()
        + (cross_correlation(a_prime, b)? + cross_correlation(a_prime, b_prime)?).abs();
    Ok(InequalityReport::new(lhs, Rational::from_integer(2)))
}

/// Largest CHSH left-hand side over every quadruple of ±1 sequences of length `len`.
pub fn max_chsh_over_sequences(len: usize) -> Rational {
    assert!((1..=4).contains(&len), "exhaustive search is limited to lengths 1..=4");
    let count = 1u32 << len;
    let seq = |bits: u32| {
        SignSequence::new((0..len).map(|i| if bits >> i & 1 == 1 { 1 } else { -1 }).collect()).expect("nonempty")
    };
    let all: Vec<SignSequence> = (0..count).map(seq).collect();
    let mut best = Rational::zero();
    for a in &all {
        for ap in &all {
            for b in &all {
                for bp in &all {
                    let r = chsh_four_check(a, ap, b, bp).expect("equal lengths");
                    if r.lhs > best {
                        best = r.lhs;
                    }
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::rng::StreamFamily;

    fn s(v: &[i8]) -> SignSequence {
        SignSequence::new(v.to_vec()).unwrap()
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn correlation_examples() {
        assert_eq!(cross_correlation(&s(&[1, 1, -1]), &s(&[1, 1, -1])).unwrap(), r(1, 1));
        assert_eq!(cross_correlation(&s(&[1, -1]), &s(&[-1, 1])).unwrap(), r(-1, 1));
        assert_eq!(
            cross_correlation(&s(&[1, 1, 1, 1]), &s(&[1, 1, -1, -1])).unwrap(),
            r(0, 1)
        );
        assert!(matches!(cross_correlation(&s(&[1]), &s(&[1, 1])), Err(Error::Usage(_))));
    }

    #[test]
    fn construction_rejects_bad_entries() {
        assert!(SignSequence::new(vec![]).is_err());
        assert!(SignSequence::new(vec![1, 0]).is_err());
        assert!(SignSequence::parse("1, -1 0").is_err());
        assert!(SignSequence::parse("  ").is_err());
        assert_eq!(SignSequence::parse("+1,-1  1\t-1").unwrap(), s(&[1, -1, 1, -1]));
        let text = "1 1 -1\n\n-1,-1,1\n";
        assert_eq!(parse_datasets(text).unwrap().len(), 2);
        assert_eq!(s(&[1, -1]).to_string(), "+1 -1");
    }

    #[test]
    fn three_variable_examples() {
        let a = s(&[1, -1, 1]);
        let rep = bell_three_check(&a, &a, &a).unwrap();
        assert_eq!((rep.lhs, rep.bound, rep.satisfied), (r(0, 1), r(0, 1), true));

        let rep = bell_three_check(&s(&[1, 1]), &s(&[1, -1]), &s(&[-1, 1])).unwrap();
        assert_eq!(rep.lhs, r(0, 1));
        assert_eq!(rep.bound, r(2, 1));
        assert_eq!(rep.margin, r(2, 1));
        assert!(bell_three_check(&a, &s(&[1]), &a).is_err());
    }

    #[test]
    fn four_variable_examples() {
        let a = s(&[1, -1, -1, 1]);
        let rep = chsh_four_check(&a, &a, &a, &a).unwrap();
        assert_eq!((rep.lhs, rep.margin, rep.satisfied), (r(2, 1), r(0, 1), true));

        let rep = chsh_four_check(&s(&[1]), &s(&[1]), &s(&[1]), &s(&[-1])).unwrap();
        assert_eq!(rep.lhs, r(2, 1));
        assert!(rep.satisfied);
    }

    #[test]
    fn per_item_identities_over_all_sign_patterns() {
        let signs = [1i64, -1];
        for a in signs {
            for b in signs {
                for c in signs {
                    assert_eq!((a * b - a * c).abs(), 1 - b * c);
                }
            }
        }
        for a in signs {
            for ap in signs {
                for b in signs {
                    for bp in signs {
                        assert_eq!((a * (b - bp) + ap * (b + bp)).abs(), 2);
                    }
                }
            }
        }
    }

    #[test]
    fn exhaustive_short_sequences_never_exceed_two() {
        for len in 1..=4 {
            assert_eq!(max_chsh_over_sequences(len), r(2, 1), "len {len}");
        }
        let quantum = crate::oracle::chsh_value(
            0.0,
            std::f64::consts::FRAC_PI_4,
            std::f64::consts::FRAC_PI_8,
            3.0 * std::f64::consts::FRAC_PI_8,
            crate::oracle::normalized_correlation,
        );
        assert!(quantum > 2.8);
    }

    #[test]
    fn random_datasets_satisfy_both_inequalities() {
        let mut rng = StreamFamily::new(8).stream(0);
        for _ in 0..200 {
            let v: Vec<SignSequence> = (0..4).map(|_| SignSequence::random(1000, &mut rng).unwrap()).collect();
            assert!(bell_three_check(&v[0], &v[1], &v[2]).unwrap().satisfied);
            assert!(chsh_four_check(&v[0], &v[1], &v[2], &v[3]).unwrap().satisfied);
        }
    }

    fn seqs(k: usize) -> impl Strategy<Value = Vec<SignSequence>> {
        (1usize..40).prop_flat_map(move |len| {
            proptest::collection::vec(
                proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], len)
                    .prop_map(|v| SignSequence::new(v).unwrap()),
                k,
            )
        })
    }

    proptest! {
        #[test]
        fn correlation_symmetric_and_bounded(v in seqs(2)) {
            let c = cross_correlation(&v[0], &v[1]).unwrap();
            prop_assert_eq!(c, cross_correlation(&v[1], &v[0]).unwrap());
            prop_assert!(c >= r(-1, 1) && c <= r(1, 1));
        }

        #[test]
        fn inequalities_hold_identically(v in seqs(4)) {
            let three = bell_three_check(&v[0], &v[1], &v[2]).unwrap();
            prop_assert!(three.satisfied);
            prop_assert_eq!(three.margin, three.bound - three.lhs);
            let four = chsh_four_check(&v[0], &v[1], &v[2], &v[3]).unwrap();
            prop_assert!(four.satisfied && four.margin >= r(0, 1));
        }
    }
}
