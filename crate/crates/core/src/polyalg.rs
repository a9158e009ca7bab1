//! Sparse multivariate polynomials and the differential-operator calculus
//! built on them.
//!
//! Sign convention: [`Polynomial::laplacian`] is `Δ = −Σ ∂²/∂x_i²`. The
//! harmonic decomposition constants and the Gaussian formula in
//! [`GaussianOperator`] are written for this sign.
//!
//! The squared radius `Σ x_i²` is called `rsq` throughout; no square roots of
//! polynomials are ever taken.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("variable count mismatch: {0} vs {1}")]
    VariableMismatch(usize, usize),
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("Gaussian parameter must be nonzero")]
    ZeroGaussianParameter,
    #[error("shift has length {got}, expected {expected}")]
    ShiftLength { expected: usize, got: usize },
    #[error("cannot parse polynomial: {0}")]
    Parse(String),
}

/// Scalars a [`Polynomial`] can carry.
pub trait Coeff:
    Clone
    + fmt::Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Coeff for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Coeff for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

/// Exponent vector `I ∈ ℕⁿ`.
pub type Exponents = Vec<u32>;

/// Polynomial in `nvars` variables `x0 … x{n−1}`; zero coefficients are never stored.
#[derive(Clone, PartialEq)]
pub struct Polynomial<C: Coeff = BigRational> {
    nvars: usize,
    terms: BTreeMap<Exponents, C>,
}

pub type RatPoly = Polynomial<BigRational>;
pub type FloatPoly = Polynomial<f64>;

/// `I! = Π i_k!` as an integer.
pub fn multi_factorial(exps: &[u32]) -> BigInt {
    exps.iter()
        .map(|&e| (1..=e).fold(BigInt::one(), |acc, k| acc * BigInt::from(k)))
        .product()
}

fn factorial_f64(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// All exponent vectors of length `nvars` with total degree `degree`, in
/// lexicographic order.
pub fn exponents_of_degree(nvars: usize, degree: u32) -> Vec<Exponents> {
    fn rec(pos: usize, left: u32, cur: &mut Exponents, out: &mut Vec<Exponents>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur[pos] = e;
            rec(pos + 1, left - e, cur, out);
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        return out;
    }
    rec(0, degree, &mut vec![0; nvars], &mut out);
    out
}

impl<C: Coeff> Polynomial<C> {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars >= 1, "a polynomial needs at least one variable");
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        Self::monomial(nvars, vec![0; nvars], c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, C::one())
    }

    pub fn monomial(nvars: usize, exps: Exponents, c: C) -> Self {
        assert_eq!(exps.len(), nvars, "exponent vector length");
        let mut p = Self::zero(nvars);
        p.add_term(exps, c);
        p
    }

    /// The coordinate function `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        Self::monomial(nvars, exps, C::one())
    }

    /// `rsq = Σ x_i²`.
    pub fn rsq(nvars: usize) -> Self {
        let mut p = Self::zero(nvars);
        for i in 0..nvars {
            let mut exps = vec![0; nvars];
            exps[i] = 2;
            p.add_term(exps, C::one());
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Exponents, C)>>(nvars: usize, terms: I) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(e, c);
        }
        p
    }

    pub fn add_term(&mut self, exps: Exponents, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(slot) => {
                let sum = slot.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&exps);
                } else {
                    *slot = sum;
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &C)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, exps: &[u32]) -> C {
        self.terms.get(exps).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial (degree −∞).
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// True for the zero polynomial and for polynomials whose terms all share
    /// one total degree.
    pub fn is_homogeneous(&self) -> bool {
        let mut degrees = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degrees.next() {
            None => true,
            Some(d) => degrees.all(|e| e == d),
        }
    }

    /// Homogeneous components keyed by degree.
    pub fn homogeneous_parts(&self) -> BTreeMap<u32, Self> {
        let mut parts: BTreeMap<u32, Self> = BTreeMap::new();
        for (e, c) in &self.terms {
            let d: u32 = e.iter().sum();
            parts
                .entry(d)
                .or_insert_with(|| Self::zero(self.nvars))
                .add_term(e.clone(), c.clone());
        }
        parts
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, a) in &self.terms {
            p.add_term(e.clone(), a.clone() * c.clone());
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(self.nvars), |acc, _| &acc * self)
    }

    /// `∂P/∂x_i`.
    pub fn partial(&self, i: usize) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            p.add_term(d, c.clone() * C::from_i64(e[i] as i64));
        }
        p
    }

    /// `ΔP = −Σ_i ∂²P/∂x_i²` (negative sign convention).
    pub fn laplacian(&self) -> Self {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            for i in 0..self.nvars {
                if e[i] < 2 {
                    continue;
                }
                let mut d = e.clone();
                d[i] -= 2;
                let factor = (e[i] as i64) * (e[i] as i64 - 1);
                p.add_term(d, -(c.clone() * C::from_i64(factor)));
            }
        }
        p
    }

    /// `Δ^k P`.
    pub fn laplacian_pow(&self, k: u32) -> Self {
        (0..k).fold(self.clone(), |acc, _| acc.laplacian())
    }

    pub fn is_harmonic(&self) -> bool {
        self.laplacian().is_zero()
    }

    pub fn eval(&self, point: &[C]) -> C {
        assert_eq!(point.len(), self.nvars, "evaluation point length");
        let mut acc = C::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    term = term * x.clone();
                }
            }
            acc = acc + term;
        }
        acc
    }

    /// Evaluation at a float point, whatever the coefficient type.
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.nvars, "evaluation point length");
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(point)
                    .fold(c.to_f64(), |acc, (&k, x)| acc * x.powi(k as i32))
            })
            .sum()
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        Polynomial::from_terms(
            self.nvars,
            self.terms.iter().map(|(e, c)| (e.clone(), f(c))),
        )
    }

    pub fn to_float(&self) -> FloatPoly {
        self.map_coeffs(Coeff::to_f64)
    }

    /// `P(∂/∂x_1, …, ∂/∂x_n) f` for a polynomial `f`.
    pub fn apply_as_operator(&self, f: &Self) -> Result<Self, PolyError> {
        self.check_vars(f)?;
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut g = f.clone();
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    g = g.partial(i);
                }
            }
            out = &out + &g.scale(c);
        }
        Ok(out)
    }

    /// `⟨P, Q⟩ = P(∂)Q |₀ = Σ_I p_I q_I I!`.
    pub fn pair(&self, other: &Self) -> Result<C, PolyError> {
        self.check_vars(other)?;
        let mut acc = C::zero();
        for (e, c) in &self.terms {
            if let Some(d) = other.terms.get(e) {
                let fact = multi_factorial(e)
                    .to_i64()
                    .expect("multi-factorial fits in i64 at supported degrees");
                acc = acc + c.clone() * d.clone() * C::from_i64(fact);
            }
        }
        Ok(acc)
    }

    fn check_vars(&self, other: &Self) -> Result<(), PolyError> {
        if self.nvars == other.nvars {
            Ok(())
        } else {
            Err(PolyError::VariableMismatch(self.nvars, other.nvars))
        }
    }

    /// Unique decomposition `P = Σ_l rsq^l · h_{d−2l}` of a homogeneous `P`
    /// into harmonic homogeneous parts. Only nonzero parts are returned, as
    /// `(l, h)` with ascending `l`.
    ///
    /// Works top-down: `Δ^l` kills every `rsq^j h` with `j < l` and maps
    /// `rsq^l h` to a known multiple of `h`, so the part with the largest `l`
    /// is read off directly, subtracted, and the next one follows.
    pub fn harmonic_decompose(&self) -> Result<Vec<(u32, Self)>, PolyError> {
        if !self.is_homogeneous() {
            return Err(PolyError::NotHomogeneous);
        }
        let Some(d) = self.degree() else {
            return Ok(Vec::new());
        };
        let rsq = Self::rsq(self.nvars);
        let mut remainder = self.clone();
        let mut parts = Vec::new();
        for l in (1..=d / 2).rev() {
            let h_deg = d - 2 * l;
            let factor = laplacian_rsq_power_factor(self.nvars, l, h_deg);
            let h = remainder
                .laplacian_pow(l)
                .scale(&(C::one() / C::from_i64(factor)));
            if !h.is_zero() {
                remainder = &remainder - &(&rsq.pow(l) * &h);
                parts.push((l, h));
            }
        }
        if !remainder.is_zero() {
            parts.push((0, remainder));
        }
        parts.reverse();
        Ok(parts)
    }
}

/// Constant `c` with `Δ^l(rsq^l h) = c·h` for harmonic `h` of degree `h_deg`
/// in `nvars` variables, from `Δ(rsq^m h) = −2m(nvars + 2m + 2·deg h − 2) rsq^{m−1} h`.
pub fn laplacian_rsq_power_factor(nvars: usize, l: u32, h_deg: u32) -> i64 {
    (1..=l as i64)
        .map(|m| -2 * m * (nvars as i64 + 2 * m + 2 * h_deg as i64 - 2))
        .product()
}

impl RatPoly {
    /// Parses the text form `c x0^a x1^b + …`; coefficients may be `p/q`,
    /// a bare `-` negates the following term.
    pub fn parse(text: &str, nvars: usize) -> Result<Self, PolyError> {
        let mut poly = Self::zero(nvars);
        let mut sign = BigRational::one();
        let mut coeff: Option<BigRational> = None;
        let mut exps = vec![0u32; nvars];
        let mut in_term = false;
        let flush = |poly: &mut Self,
                     sign: &BigRational,
                     coeff: &mut Option<BigRational>,
                     exps: &mut Vec<u32>| {
            let c = coeff.take().unwrap_or_else(BigRational::one);
            poly.add_term(std::mem::replace(exps, vec![0; nvars]), sign * c);
        };
        // `-x0` is `-` followed by `x0`
        let tokens = text
            .split_whitespace()
            .flat_map(|tok| match tok.strip_prefix('-') {
                Some(rest) if rest.starts_with('x') => vec!["-", rest],
                _ => vec![tok],
            });
        for tok in tokens {
            match tok {
                "+" | "-" => {
                    if in_term {
                        flush(&mut poly, &sign, &mut coeff, &mut exps);
                        in_term = false;
                        sign = BigRational::one();
                    }
                    if tok == "-" {
                        sign = -sign;
                    }
                }
                _ if tok.starts_with('x') => {
                    let (idx, pow) = match tok[1..].split_once('^') {
                        Some((i, p)) => (i, p),
                        None => (&tok[1..], "1"),
                    };
                    let idx: usize = idx
                        .parse()
                        .map_err(|_| PolyError::Parse(format!("bad variable `{tok}`")))?;
                    let pow: u32 = pow
                        .parse()
                        .map_err(|_| PolyError::Parse(format!("bad exponent `{tok}`")))?;
                    if idx >= nvars {
                        return Err(PolyError::Parse(format!(
                            "variable x{idx} out of range for {nvars} variables"
                        )));
                    }
                    exps[idx] += pow;
                    in_term = true;
                }
                _ => {
                    if coeff.is_some() || exps.iter().any(|&e| e > 0) {
                        return Err(PolyError::Parse(format!("unexpected coefficient `{tok}`")));
                    }
                    let c: BigRational = tok
                        .parse()
                        .map_err(|_| PolyError::Parse(format!("bad coefficient `{tok}`")))?;
                    coeff = Some(c);
                    in_term = true;
                }
            }
        }
        if in_term {
            flush(&mut poly, &sign, &mut coeff, &mut exps);
        } else if !poly.is_zero() || text.trim().ends_with(['+', '-']) {
            return Err(PolyError::Parse("dangling operator".into()));
        }
        Ok(poly)
    }

    /// Exact rational copy of a float polynomial (every finite `f64` is a
    /// dyadic rational).
    pub fn from_float_exact(p: &FloatPoly) -> Self {
        p.map_coeffs(|c| BigRational::from_float(*c).expect("finite polynomial coefficient"))
    }
}

impl<C: Coeff + fmt::Display> fmt::Display for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest degree first, then lexicographically descending.
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        for (idx, (e, c)) in terms.into_iter().enumerate() {
            let text = c.to_string();
            let (negative, magnitude) = match text.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, text.as_str()),
            };
            match (idx, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let constant = e.iter().all(|&k| k == 0);
            if constant || magnitude != "1" {
                write!(f, "{magnitude}")?;
            }
            let mut first = constant || magnitude != "1";
            for (i, &k) in e.iter().enumerate() {
                if k > 0 && !first {
                    first = true;
                    match k {
                        1 => write!(f, "x{i}")?,
                        _ => write!(f, "x{i}^{k}")?,
                    }
                    continue;
                }
                match k {
                    0 => {}
                    1 => write!(f, " x{i}")?,
                    _ => write!(f, " x{i}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

impl<C: Coeff + fmt::Display> fmt::Debug for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[{}]({})", self.nvars, self)
    }
}

impl<C: Coeff> Add for &Polynomial<C> {
    type Output = Polynomial<C>;

    fn add(self, rhs: Self) -> Polynomial<C> {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl<C: Coeff> Sub for &Polynomial<C> {
    type Output = Polynomial<C>;

    fn sub(self, rhs: Self) -> Polynomial<C> {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl<C: Coeff> Mul for &Polynomial<C> {
    type Output = Polynomial<C>;

    fn mul(self, rhs: Self) -> Polynomial<C> {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = Polynomial::zero(self.nvars);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                let e = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<C: Coeff> Neg for &Polynomial<C> {
    type Output = Polynomial<C>;

    fn neg(self) -> Polynomial<C> {
        self.map_coeffs(|c| -c.clone())
    }
}

/// The operator `x ↦ P(∂)[exp((a/2)‖x − s‖²)] |_{x=0}` prepared for repeated
/// evaluation at many shifts `s`.
///
/// For homogeneous `P` of degree `d` the value is
/// `a^d · Σ_k (−1/2a)^k / k! · (Δ^k P)(−s) · exp((a/2)‖s‖²)`;
/// inhomogeneous `P` is handled part by part.
#[derive(Debug, Clone)]
pub struct GaussianOperator {
    nvars: usize,
    a: f64,
    /// `Σ_d a^d Σ_k (−1/2a)^k/k! Δ^k P_d`, already collapsed into one
    /// float polynomial to be evaluated at `−s`.
    combined: FloatPoly,
}

impl GaussianOperator {
    pub fn new<C: Coeff>(p: &Polynomial<C>, a: f64) -> Result<Self, PolyError> {
        if a == 0.0 || !a.is_finite() {
            return Err(PolyError::ZeroGaussianParameter);
        }
        let nvars = p.nvars();
        let mut combined = FloatPoly::zero(nvars);
        for (d, part) in p.homogeneous_parts() {
            let mut lap = part.clone();
            let mut k = 0u32;
            let ad = a.powi(d as i32);
            while !lap.is_zero() {
                let weight = ad * (-1.0 / (2.0 * a)).powi(k as i32) / factorial_f64(k);
                combined = &combined + &lap.to_float().scale(&weight);
                lap = lap.laplacian();
                k += 1;
            }
        }
        Ok(Self { nvars, a, combined })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Value at `x = 0` of `P(∂)` applied to the Gaussian centred at `shift`.
    pub fn apply(&self, shift: &[f64]) -> f64 {
        let neg: Vec<f64> = shift.iter().map(|s| -s).collect();
        let norm2: f64 = shift.iter().map(|s| s * s).sum();
        self.combined.eval_f64(&neg) * (0.5 * self.a * norm2).exp()
    }

    /// Same as [`apply`](Self::apply) without the exponential factor, for
    /// callers that already hold `exp((a/2)‖s‖²)`.
    pub fn polynomial_factor(&self, shift: &[f64]) -> f64 {
        let neg: Vec<f64> = shift.iter().map(|s| -s).collect();
        self.combined.eval_f64(&neg)
    }
}

/// One-shot form of [`GaussianOperator`].
pub fn gaussian_apply<C: Coeff>(
    p: &Polynomial<C>,
    a: f64,
    shift: &[f64],
) -> Result<f64, PolyError> {
    if shift.len() != p.nvars() {
        return Err(PolyError::ShiftLength {
            expected: p.nvars(),
            got: shift.len(),
        });
    }
    Ok(GaussianOperator::new(p, a)?.apply(shift))
}
