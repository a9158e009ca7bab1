//! Truncated q-expansions.
//!
//! [`QExpansion`] holds exact rational coefficients `a_m` that are correct for
//! every `m ≤ precision` (inclusive). Arithmetic never claims more precision
//! than the weaker operand. [`FloatSeries`] is the float-coefficient sibling
//! used for spherical theta functions, whose values depend on an embedding.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QSeriesError {
    #[error("evaluation point {0} is outside the open interval (0, 1)")]
    OutOfDomain(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Value of a truncated series at a real point, with a heuristic bound on
/// the neglected tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub tail_bound: f64,
}

/// Inflation applied to the largest stored coefficient when bounding the tail.
const TAIL_INFLATION: f64 = 4.0;

/// `x^(M+1)·C/(1−x)` with `C = 4·max|a_m|`; geometric growth assumption on the
/// unseen coefficients, so this is an estimate rather than a proof.
fn tail_estimate(x: f64, precision: u64, max_abs: f64) -> f64 {
    let exp = (precision as f64 + 1.0) * x.ln();
    exp.exp() * TAIL_INFLATION * max_abs / (1.0 - x)
}

fn check_domain(x: f64) -> Result<(), QSeriesError> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(QSeriesError::OutOfDomain(x))
    }
}

/// Truncated power series in `q` with exact rational coefficients.
///
/// Zero coefficients are never stored, so two series are equal exactly when
/// their precision and nonzero coefficients agree. Weight and level are
/// metadata and do not take part in equality.
#[derive(Debug, Clone)]
pub struct QExpansion {
    coeffs: BTreeMap<u64, BigRational>,
    precision: u64,
    weight: Option<BigRational>,
    level: Option<u64>,
}

impl PartialEq for QExpansion {
    fn eq(&self, other: &Self) -> bool {
        self.precision == other.precision && self.coeffs == other.coeffs
    }
}

impl Eq for QExpansion {}

impl QExpansion {
    /// The zero series, correct through `q^precision`.
    pub fn zero(precision: u64) -> Self {
        Self {
            coeffs: BTreeMap::new(),
            precision,
            weight: None,
            level: None,
        }
    }

    pub fn one(precision: u64) -> Self {
        Self::from_coefficients(precision, [(0, BigRational::from_integer(1.into()))])
    }

    /// Builds a series from `(exponent, coefficient)` pairs; repeated
    /// exponents accumulate and anything above `precision` is dropped.
    pub fn from_coefficients<I>(precision: u64, terms: I) -> Self
    where
        I: IntoIterator<Item = (u64, BigRational)>,
    {
        let mut series = Self::zero(precision);
        for (m, c) in terms {
            series.add_term(m, c);
        }
        series
    }

    /// Convenience constructor from integer coefficients `a_0, a_1, …`.
    pub fn from_integers(precision: u64, coeffs: &[i64]) -> Self {
        Self::from_coefficients(
            precision,
            coeffs
                .iter()
                .enumerate()
                .map(|(m, &c)| (m as u64, BigRational::from_integer(c.into()))),
        )
    }

    /// Adds `c·q^m` in place; ignored when `m` exceeds the precision.
    pub fn add_term(&mut self, m: u64, c: BigRational) {
        if m > self.precision || c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(m).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&m);
        }
    }

    pub fn with_weight(mut self, weight: BigRational) -> Self {
        self.weight = Some(weight);
        self
    }

    pub fn with_level(mut self, level: u64) -> Self {
        self.level = Some(level);
        self
    }

    pub fn precision(&self) -> u64 {
        self.precision
    }

    pub fn weight(&self) -> Option<&BigRational> {
        self.weight.as_ref()
    }

    pub fn level(&self) -> Option<u64> {
        self.level
    }

    /// Coefficient of `q^m`; zero for unstored exponents.
    pub fn coefficient(&self, m: u64) -> BigRational {
        self.coeffs
            .get(&m)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Nonzero coefficients in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (u64, &BigRational)> {
        self.coeffs.iter().map(|(&m, c)| (m, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Smallest exponent with nonzero coefficient.
    pub fn valuation(&self) -> Option<u64> {
        self.coeffs.keys().next().copied()
    }

    /// Drops coefficients above `precision` (never raises precision).
    pub fn truncate(&self, precision: u64) -> Self {
        let precision = precision.min(self.precision);
        let mut out = self.clone();
        out.precision = precision;
        out.coeffs.retain(|&m, _| m <= precision);
        out
    }

    /// First exponent `m ≤ min precision` where the two series differ.
    pub fn first_difference(&self, other: &Self) -> Option<u64> {
        let prec = self.precision.min(other.precision);
        (0..=prec).find(|&m| self.coefficient(m) != other.coefficient(m))
    }

    /// Coefficient-wise sum. Weight and level survive only when both
    /// operands carry the same value.
    pub fn add(&self, other: &Self) -> Self {
        let precision = self.precision.min(other.precision);
        let mut out = self.truncate(precision);
        for (m, c) in other.terms() {
            out.add_term(m, c.clone());
        }
        out.weight = match (&self.weight, &other.weight) {
            (Some(a), Some(b)) if a == b => Some(a.clone()),
            _ => None,
        };
        out.level = match (self.level, other.level) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        };
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Cauchy product truncated at the smaller precision; weights add when
    /// both are present.
    pub fn mul(&self, other: &Self) -> Self {
        let precision = self.precision.min(other.precision);
        let mut out = Self::zero(precision);
        for (i, a) in self.terms() {
            if i > precision {
                break;
            }
            for (j, b) in other.terms() {
                if i + j > precision {
                    break;
                }
                out.add_term(i + j, a * b);
            }
        }
        out.weight = match (&self.weight, &other.weight) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        out.level = match (self.level, other.level) {
            (Some(a), Some(b)) if a == b => Some(a),
            _ => None,
        };
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero(self.precision);
        out.weight = self.weight.clone();
        out.level = self.level;
        if c.is_zero() {
            return out;
        }
        for (m, a) in self.terms() {
            out.coeffs.insert(m, a * c);
        }
        out
    }

    /// `Σ_{m≤M} a_m x^m` for `0 < x < 1`, together with a tail estimate.
    pub fn eval_real(&self, x: f64) -> Result<Evaluation, QSeriesError> {
        check_domain(x)?;
        let ln_x = x.ln();
        let mut value = 0.0;
        let mut max_abs: f64 = 0.0;
        for (m, c) in self.terms() {
            let c = c.to_f64().unwrap_or(f64::NAN);
            max_abs = max_abs.max(c.abs());
            value += c * (m as f64 * ln_x).exp();
        }
        Ok(Evaluation {
            value,
            tail_bound: tail_estimate(x, self.precision, max_abs),
        })
    }

    /// Float copy of the coefficients `a_0..=a_M`.
    pub fn to_float(&self) -> FloatSeries {
        let mut out = FloatSeries::zero(self.precision);
        for (m, c) in self.terms() {
            out.coeffs[m as usize] = c.to_f64().unwrap_or(f64::NAN);
        }
        out
    }

    /// Integer divisibility of every coefficient by `d`.
    pub fn all_divisible_by(&self, d: i64) -> bool {
        let d = BigInt::from(d);
        self.coeffs
            .values()
            .all(|c| c.is_integer() && (c.to_integer() % &d).is_zero())
    }

    /// Text form with `weight`/`level` header lines prepended when known.
    pub fn to_text_with_metadata(&self) -> String {
        let mut out = String::new();
        if let Some(w) = &self.weight {
            out.push_str(&format!("weight {w}\n"));
        }
        if let Some(n) = self.level {
            out.push_str(&format!("level {n}\n"));
        }
        out.push_str(&self.to_string());
        out
    }
}

/// `precision M` followed by one `m a_m` line per nonzero coefficient.
impl fmt::Display for QExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "precision {}", self.precision)?;
        for (m, c) in self.terms() {
            writeln!(f, "{m} {c}")?;
        }
        Ok(())
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> QSeriesError {
    QSeriesError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_rational(token: &str, line: usize) -> Result<BigRational, QSeriesError> {
    let value = BigRational::from_str(token)
        .map_err(|_| parse_err(line, format!("invalid rational `{token}`")))?;
    Ok(value)
}

impl FromStr for QExpansion {
    type Err = QSeriesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut precision = None;
        let mut weight = None;
        let mut level = None;
        let mut terms: Vec<(u64, BigRational)> = Vec::new();
        let mut last: Option<u64> = None;
        for (idx, raw) in s.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap_or_default();
            let rest: Vec<&str> = parts.collect();
            if rest.len() != 1 {
                return Err(parse_err(line_no, "expected exactly two fields"));
            }
            match head {
                "weight" if precision.is_none() => weight = Some(parse_rational(rest[0], line_no)?),
                "level" if precision.is_none() => {
                    level = Some(
                        rest[0]
                            .parse::<u64>()
                            .map_err(|_| parse_err(line_no, "invalid level"))?,
                    )
                }
                "precision" => {
                    if precision.is_some() {
                        return Err(parse_err(line_no, "duplicate precision line"));
                    }
                    precision = Some(
                        rest[0]
                            .parse::<u64>()
                            .map_err(|_| parse_err(line_no, "invalid precision"))?,
                    );
                }
                _ => {
                    let Some(prec) = precision else {
                        return Err(parse_err(line_no, "coefficient before precision line"));
                    };
                    let m = head
                        .parse::<u64>()
                        .map_err(|_| parse_err(line_no, format!("invalid exponent `{head}`")))?;
                    if m > prec {
                        return Err(parse_err(line_no, "exponent exceeds precision"));
                    }
                    if last.is_some_and(|l| m <= l) {
                        return Err(parse_err(line_no, "exponents must be strictly ascending"));
                    }
                    last = Some(m);
                    terms.push((m, parse_rational(rest[0], line_no)?));
                }
            }
        }
        let precision = precision.ok_or_else(|| parse_err(1, "missing precision line"))?;
        let mut series = Self::from_coefficients(precision, terms);
        series.weight = weight;
        series.level = level;
        Ok(series)
    }
}

/// Truncated series with float coefficients `a_0..=a_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatSeries {
    coeffs: Vec<f64>,
}

impl FloatSeries {
    pub fn zero(precision: u64) -> Self {
        Self {
            coeffs: vec![0.0; precision as usize + 1],
        }
    }

    pub fn from_coefficients(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a float series needs at least a_0");
        Self { coeffs }
    }

    pub fn precision(&self) -> u64 {
        self.coeffs.len() as u64 - 1
    }

    pub fn coefficient(&self, m: u64) -> f64 {
        self.coeffs.get(m as usize).copied().unwrap_or(0.0)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn add_term(&mut self, m: u64, c: f64) {
        if let Some(slot) = self.coeffs.get_mut(m as usize) {
            *slot += c;
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().min(other.coeffs.len());
        Self {
            coeffs: (0..len).map(|m| self.coeffs[m] + other.coeffs[m]).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let len = self.coeffs.len().min(other.coeffs.len());
        let mut coeffs = vec![0.0; len];
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                coeffs[i + j] += a * b;
            }
        }
        Self { coeffs }
    }

    pub fn eval_real(&self, x: f64) -> Result<Evaluation, QSeriesError> {
        check_domain(x)?;
        let ln_x = x.ln();
        let mut value = 0.0;
        let mut max_abs: f64 = 0.0;
        for (m, c) in self.coeffs.iter().enumerate() {
            max_abs = max_abs.max(c.abs());
            if *c != 0.0 {
                value += c * (m as f64 * ln_x).exp();
            }
        }
        Ok(Evaluation {
            value,
            tail_bound: tail_estimate(x, self.precision(), max_abs),
        })
    }

    /// Largest coefficient-wise absolute difference over the common range.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest difference against an exact series over the common range.
    pub fn max_abs_diff_exact(&self, exact: &QExpansion) -> f64 {
        let prec = self.precision().min(exact.precision());
        (0..=prec)
            .map(|m| {
                let e = exact.coefficient(m).to_f64().unwrap_or(f64::NAN);
                (self.coefficient(m) - e).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc.max(c.abs()))
    }
}

/// `float`, `precision M`, then `m a_m` with 17 significant digits for every
/// nonzero coefficient.
impl fmt::Display for FloatSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "float")?;
        writeln!(f, "precision {}", self.precision())?;
        for (m, c) in self.coeffs.iter().enumerate() {
            if *c != 0.0 {
                writeln!(f, "{m} {c:.16e}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for FloatSeries {
    type Err = QSeriesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        match lines.next() {
            Some((_, "float")) => {}
            Some((n, _)) => return Err(parse_err(n, "expected `float` header")),
            None => return Err(parse_err(1, "empty input")),
        }
        let precision = match lines.next() {
            Some((n, l)) => l
                .strip_prefix("precision")
                .and_then(|p| p.trim().parse::<u64>().ok())
                .ok_or_else(|| parse_err(n, "expected `precision M`"))?,
            None => return Err(parse_err(2, "missing precision line")),
        };
        let mut series = Self::zero(precision);
        for (n, l) in lines {
            let mut parts = l.split_whitespace();
            let (Some(m), Some(c), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(parse_err(n, "expected `m a_m`"));
            };
            let m: u64 = m.parse().map_err(|_| parse_err(n, "invalid exponent"))?;
            let c: f64 = c.parse().map_err(|_| parse_err(n, "invalid float"))?;
            if m > precision {
                return Err(parse_err(n, "exponent exceeds precision"));
            }
            series.coeffs[m as usize] = c;
        }
        Ok(series)
    }
}

/// `|a − b| / max(|a|, |b|, floor)`; the floor keeps identities whose two
/// sides both vanish from dividing by zero.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(floor);
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: u64, c: &[i64]) -> QExpansion {
        QExpansion::from_integers(p, c)
    }

    fn theta_square(prec: u64) -> QExpansion {
        // 1 + 4q + 4q² + 4q⁴ + 8q⁵ …
        q(prec, &[1, 4, 4, 0, 4, 8, 0, 0, 4])
    }

    fn theta_hex(prec: u64) -> QExpansion {
        q(prec, &[1, 6, 0, 6, 6, 0, 0, 12])
    }

    #[test]
    fn add_identity_and_cancellation() {
        let a = q(1, &[1, 4]);
        assert_eq!(a.add(&QExpansion::zero(1)), a);
        let sq = q(3, &[0, 0, 1]);
        assert!(sq.add(&sq.neg()).is_zero());
    }

    #[test]
    fn add_two_theta_series() {
        let sum = theta_square(4).add(&theta_hex(4));
        assert_eq!(sum, q(4, &[2, 10, 4, 6, 10]));
    }

    #[test]
    fn add_takes_min_precision_and_weight_rules() {
        let w = BigRational::from_integer(3.into());
        let a = q(5, &[1]).with_weight(w.clone());
        let b = q(3, &[1]).with_weight(w.clone());
        let c = q(3, &[1]).with_weight(BigRational::from_integer(2.into()));
        assert_eq!(a.add(&b).precision(), 3);
        assert_eq!(a.add(&b).weight(), Some(&w));
        assert_eq!(a.add(&c).weight(), None);
        assert_eq!(
            a.mul(&c).weight(),
            Some(&BigRational::from_integer(5.into()))
        );
    }

    #[test]
    fn mul_examples() {
        assert_eq!(q(2, &[1, 1]).mul(&q(2, &[1, -1])), q(2, &[1, 0, -1]));
        let h = q(4, &[0, 0, 12, 0, -8]);
        assert_eq!(h.mul(&h), q(4, &[0, 0, 0, 0, 144]));
        let t = q(2, &[1, 4, 4]);
        assert_eq!(t.mul(&t), q(2, &[1, 8, 24]));
    }

    #[test]
    fn square_of_z2_theta_against_pair_count() {
        // brute-force count of (u, v) ∈ Z² × Z² with |u|² + |v|² = m
        let prec = 6u64;
        let mut counts = vec![0i64; prec as usize + 1];
        let r = 3i64;
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    for d in -r..=r {
                        let m = (a * a + b * b + c * c + d * d) as usize;
                        if m <= prec as usize {
                            counts[m] += 1;
                        }
                    }
                }
            }
        }
        let theta = q(prec, &[1, 4, 4, 0, 4, 8, 0]);
        assert_eq!(theta.mul(&theta), q(prec, &counts));
    }

    #[test]
    fn scale_examples() {
        let s = q(3, &[0, 0, 1, -8]).scale(&BigRational::from_integer(16.into()));
        assert_eq!(s, q(3, &[0, 0, 16, -128]));
        assert!(theta_hex(5).scale(&BigRational::zero()).is_zero());
        let quarter = BigRational::new(1.into(), 4.into());
        assert_eq!(q(1, &[0, 4]).scale(&quarter), q(1, &[0, 1]));
    }

    #[test]
    fn eval_examples() {
        assert_eq!(q(3, &[1]).eval_real(0.3).unwrap().value, 1.0);
        assert_eq!(q(3, &[0, 1]).eval_real(0.5).unwrap().value, 0.5);
        assert!(matches!(
            q(1, &[1]).eval_real(1.0),
            Err(QSeriesError::OutOfDomain(_))
        ));
        assert!(q(1, &[1]).eval_real(0.0).is_err());
    }

    #[test]
    fn tail_bound_covers_doubling() {
        // The doubled-precision value must fall within the reported tail.
        let x = 0.3;
        let short = q(8, &[1, 4, 4, 0, 4, 8, 0, 0, 4]);
        let long = q(17, &[1, 4, 4, 0, 4, 8, 0, 0, 4, 4, 8, 0, 0, 8, 0, 0, 4, 8]);
        let a = short.eval_real(x).unwrap();
        let b = long.eval_real(x).unwrap();
        assert!((a.value - b.value).abs() <= a.tail_bound);
    }

    #[test]
    fn text_format_round_trip() {
        let s = QExpansion::from_coefficients(
            6,
            [
                (0, BigRational::from_integer(1.into())),
                (2, BigRational::new((-3).into(), 2.into())),
                (6, BigRational::from_integer(22.into())),
            ],
        );
        let text = s.to_string();
        assert_eq!(text, "precision 6\n0 1\n2 -3/2\n6 22\n");
        assert_eq!(text.parse::<QExpansion>().unwrap(), s);
        let with_meta = s
            .clone()
            .with_weight(BigRational::from_integer(8.into()))
            .with_level(1729);
        let back: QExpansion = with_meta.to_text_with_metadata().parse().unwrap();
        assert_eq!(back.level(), Some(1729));
        assert!("precision 2\n3 1\n".parse::<QExpansion>().is_err());
        assert!("precision 4\n2 1\n1 1\n".parse::<QExpansion>().is_err());
    }

    #[test]
    fn float_text_round_trip() {
        let s = FloatSeries::from_coefficients(vec![1.0, 0.0, -1.0 / 3.0, 12.5]);
        let text = s.to_string();
        assert!(text.starts_with("float\nprecision 3\n"));
        let back: FloatSeries = text.parse().unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn first_difference_reports_lowest_exponent() {
        assert_eq!(theta_square(5).first_difference(&theta_hex(5)), Some(1));
        assert_eq!(theta_hex(5).first_difference(&theta_hex(5)), None);
    }

    #[test]
    fn divisibility() {
        assert!(q(4, &[0, 0, 16, -128]).all_divisible_by(16));
        assert!(!q(4, &[0, 0, 16, -127]).all_divisible_by(16));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn series() -> impl Strategy<Value = QExpansion> {
        (0u64..8, proptest::collection::vec(-20i64..20, 0..10))
            .prop_map(|(p, c)| QExpansion::from_integers(p, &c))
    }

    proptest! {
        #[test]
        fn ring_laws(a in series(), b in series(), c in series()) {
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }

        #[test]
        fn evaluation_is_additive(a in series(), b in series(), x in 0.01f64..0.99) {
            let lhs = a.add(&b).eval_real(x).unwrap().value;
            let prec = a.precision().min(b.precision());
            let ra = a.truncate(prec).eval_real(x).unwrap().value;
            let rb = b.truncate(prec).eval_real(x).unwrap().value;
            prop_assert!((lhs - ra - rb).abs() <= 1e-9 * (1.0 + ra.abs() + rb.abs()));
        }
    }
}
