//! Theta-series engines.
//!
//! The exact engines ([`theta_series`], [`theta11`], [`theta_nn`]) read only
//! the Gram matrix: norms and inner products of lattice vectors. They never
//! touch an embedding, so their output is embedding-independent by
//! construction and their integer coefficients can be checked for
//! divisibility.
//!
//! [`spherical_theta`] and [`theta_datum`] evaluate harmonic polynomials on
//! embedded vectors and therefore return [`FloatSeries`].

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::lattice::{Embedding, GramLattice, LatticeError};
use crate::polyalg::{PolyError, RatPoly};
use crate::qseries::{FloatSeries, QExpansion};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThetaError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("polynomial is not harmonic: {0}")]
    NotHarmonic(String),
    #[error("polynomial is not homogeneous: {0}")]
    NotHomogeneous(String),
    #[error("invalid harmonic datum: {0}")]
    InvalidDatum(String),
    #[error("order must be at least {min}, got {got}")]
    InvalidOrder { min: u32, got: u32 },
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Nonzero vectors of an integral lattice with `0 < ‖v‖² ≤ bound`, sorted by norm.
pub(crate) struct Shells {
    pub coords: Vec<Vec<i64>>,
    pub norms: Vec<i64>,
}

impl Shells {
    pub(crate) fn new(lattice: &GramLattice, bound: i64) -> Result<Self, ThetaError> {
        lattice.require_integral()?;
        let mut coords = Vec::new();
        let mut norms = Vec::new();
        if bound > 0 {
            for (v, norm) in lattice.short_vectors(&int(bound)) {
                coords.push(v.0);
                norms.push(norm.to_integer().to_i64().expect("norm fits in i64"));
            }
        }
        Ok(Self { coords, norms })
    }

    fn len(&self) -> usize {
        self.norms.len()
    }
}

fn minimum_i64(lattice: &GramLattice) -> i64 {
    lattice
        .minimum()
        .to_integer()
        .to_i64()
        .expect("minimum fits in i64")
}

fn level_of(lattice: &GramLattice) -> Option<u64> {
    lattice.level_and_discriminant().ok().map(|ld| ld.level)
}

/// `Σ_γ q^{‖γ‖²}` through `q^precision`.
pub fn theta_series(lattice: &GramLattice, precision: u64) -> Result<QExpansion, ThetaError> {
    let shells = Shells::new(lattice, precision as i64)?;
    let mut counts = vec![0i64; precision as usize + 1];
    counts[0] = 1;
    for &m in &shells.norms {
        counts[m as usize] += 1;
    }
    let mut series = QExpansion::from_integers(precision, &counts).with_weight(BigRational::new(
        BigInt::from(lattice.dim()),
        BigInt::from(2),
    ));
    if let Some(level) = level_of(lattice) {
        series = series.with_level(level);
    }
    Ok(series)
}

/// Visits every ordered pair of nonzero vectors `(γ, δ)` with
/// `‖γ‖² + ‖δ‖² ≤ precision`, passing `(‖γ‖², ‖δ‖², 2⟨γ,δ⟩)`. Pairs with a
/// zero vector contribute nothing to the invariant forms and are skipped.
fn for_each_pair(
    lattice: &GramLattice,
    precision: u64,
    mut visit: impl FnMut(i64, i64, i64),
) -> Result<(), ThetaError> {
    lattice.require_integral()?;
    let k = minimum_i64(lattice);
    let bound = precision as i64 - k;
    if bound < k {
        return Ok(());
    }
    let shells = Shells::new(lattice, bound)?;
    let g2 = lattice
        .doubled_gram()
        .expect("integral lattice has an integral 2G");
    let n = lattice.dim();
    // w_γ = 2G·γ so that 2⟨γ,δ⟩ = w_γ·δ
    let weighted: Vec<Vec<i64>> = shells
        .coords
        .iter()
        .map(|c| {
            (0..n)
                .map(|i| (0..n).map(|j| g2[i][j] * c[j]).sum())
                .collect()
        })
        .collect();
    let limit = precision as i64;
    for a in 0..shells.len() {
        let na = shells.norms[a];
        for b in 0..shells.len() {
            let nb = shells.norms[b];
            if na + nb > limit {
                break;
            }
            let b1: i64 = weighted[a]
                .iter()
                .zip(&shells.coords[b])
                .map(|(x, y)| x * y)
                .sum();
            visit(na, nb, b1);
        }
    }
    Ok(())
}

/// `Θ_{11,Λ}` with `a_m = Σ_{‖γ‖²+‖δ‖²=m} (n²⟨γ,δ⟩² − n‖γ‖²‖δ‖²)`, exactly.
///
/// Weight `n + 4`; the level is attached when it can be computed.
pub fn theta11(lattice: &GramLattice, precision: u64) -> Result<QExpansion, ThetaError> {
    let n = lattice.dim() as i128;
    // accumulate 4·a_m = Σ (n² b1² − 4n‖γ‖²‖δ‖²) with b1 = 2⟨γ,δ⟩
    let mut acc = vec![0i128; precision as usize + 1];
    for_each_pair(lattice, precision, |na, nb, b1| {
        let b1 = b1 as i128;
        acc[(na + nb) as usize] += n * n * b1 * b1 - 4 * n * (na as i128) * (nb as i128);
    })?;
    let mut series = QExpansion::from_coefficients(
        precision,
        acc.iter()
            .enumerate()
            .map(|(m, &v)| (m as u64, BigRational::new(BigInt::from(v), BigInt::from(4)))),
    )
    .with_weight(int(lattice.dim() as i64 + 4));
    if let Some(level) = level_of(lattice) {
        series = series.with_level(level);
    }
    Ok(series)
}

/// `t_k = x^k + x̄^k` for the roots of `x² − b₁x + b₂`, via
/// `t₀ = 2, t₁ = b₁, t_k = b₁t_{k−1} − b₂t_{k−2}`.
pub fn trace_power(b1: &BigRational, b2: &BigRational, k: u32) -> BigRational {
    let mut prev = int(2);
    if k == 0 {
        return prev;
    }
    let mut cur = b1.clone();
    for _ in 1..k {
        let next = b1 * &cur - b2 * &prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn trace_power_int(b1: &BigInt, b2: &BigInt, k: u32) -> BigInt {
    let mut prev = BigInt::from(2);
    if k == 0 {
        return prev;
    }
    let mut cur = b1.clone();
    for _ in 1..k {
        let next = b1 * &cur - b2 * &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `Θ_{nn,Λ}` for a plane lattice:
/// `a_m = Σ cos(2n∠(γ,δ))‖γ‖^{2n}‖δ‖^{2n} = ½ Σ t_{2n}(2⟨γ,δ⟩, ‖γ‖²‖δ‖²)`.
pub fn theta_nn(
    lattice: &GramLattice,
    order: u32,
    precision: u64,
) -> Result<QExpansion, ThetaError> {
    if lattice.dim() != 2 {
        return Err(ThetaError::DimensionMismatch {
            expected: 2,
            got: lattice.dim(),
        });
    }
    if order == 0 {
        return Err(ThetaError::InvalidOrder { min: 1, got: 0 });
    }
    let mut acc = vec![BigInt::zero(); precision as usize + 1];
    for_each_pair(lattice, precision, |na, nb, b1| {
        let t = trace_power_int(
            &BigInt::from(b1),
            &(BigInt::from(na) * BigInt::from(nb)),
            2 * order,
        );
        acc[(na + nb) as usize] += t;
    })?;
    let two = BigInt::from(2);
    let mut series = QExpansion::from_coefficients(
        precision,
        acc.into_iter()
            .enumerate()
            .map(|(m, v)| (m as u64, BigRational::new(v, two.clone()))),
    )
    .with_weight(int(2 + 4 * order as i64));
    if let Some(level) = level_of(lattice) {
        series = series.with_level(level);
    }
    Ok(series)
}

fn check_harmonic(h: &RatPoly) -> Result<(), ThetaError> {
    if !h.is_homogeneous() {
        return Err(ThetaError::NotHomogeneous(h.to_string()));
    }
    if !h.is_harmonic() {
        return Err(ThetaError::NotHarmonic(h.to_string()));
    }
    Ok(())
}

/// Embedded shells shared by several spherical theta evaluations.
struct EmbeddedShells {
    points: Vec<Vec<f64>>,
    norms: Vec<i64>,
    precision: u64,
    dim: usize,
}

impl EmbeddedShells {
    fn new(
        embedding: &Embedding,
        lattice: &GramLattice,
        precision: u64,
    ) -> Result<Self, ThetaError> {
        if embedding.dim() != lattice.dim() {
            return Err(ThetaError::DimensionMismatch {
                expected: lattice.dim(),
                got: embedding.dim(),
            });
        }
        let shells = Shells::new(lattice, precision as i64)?;
        let points = shells.coords.iter().map(|c| embedding.apply(c)).collect();
        Ok(Self {
            points,
            norms: shells.norms,
            precision,
            dim: lattice.dim(),
        })
    }

    fn theta(&self, h: &RatPoly) -> Result<FloatSeries, ThetaError> {
        if h.nvars() != self.dim {
            return Err(ThetaError::DimensionMismatch {
                expected: self.dim,
                got: h.nvars(),
            });
        }
        check_harmonic(h)?;
        let mut series = FloatSeries::zero(self.precision);
        series.add_term(0, h.eval_f64(&vec![0.0; self.dim]));
        for (p, &m) in self.points.iter().zip(&self.norms) {
            series.add_term(m as u64, h.eval_f64(p));
        }
        Ok(series)
    }
}

/// `Θ_{h,Λ} = Σ_γ h(Sγ) q^{‖γ‖²}` for harmonic homogeneous `h`.
pub fn spherical_theta(
    embedding: &Embedding,
    lattice: &GramLattice,
    h: &RatPoly,
    precision: u64,
) -> Result<FloatSeries, ThetaError> {
    EmbeddedShells::new(embedding, lattice, precision)?.theta(h)
}

/// `Θ_{p,Λ} = Σ_j c_j Π_i Θ_{h_ij,Λ}`.
pub fn theta_datum(
    embedding: &Embedding,
    lattice: &GramLattice,
    datum: &HarmonicDatum,
    precision: u64,
) -> Result<FloatSeries, ThetaError> {
    if datum.nvars() != lattice.dim() {
        return Err(ThetaError::DimensionMismatch {
            expected: lattice.dim(),
            got: datum.nvars(),
        });
    }
    let shells = EmbeddedShells::new(embedding, lattice, precision)?;
    let mut cache: Vec<(&RatPoly, FloatSeries)> = Vec::new();
    let mut total = FloatSeries::zero(precision);
    for term in datum.terms() {
        let mut product = FloatSeries::zero(precision);
        product.add_term(0, 1.0);
        for h in &term.factors {
            let theta = match cache.iter().find(|(p, _)| *p == h) {
                Some((_, t)) => t.clone(),
                None => {
                    let t = shells.theta(h)?;
                    cache.push((h, t.clone()));
                    t
                }
            };
            product = product.mul(&theta);
        }
        let c = term.coefficient.to_f64().unwrap_or(f64::NAN);
        total = total.add(&product.scale(c));
    }
    Ok(total)
}

/// One summand `c · Π_i h_i` of a harmonic datum.
#[derive(Debug, Clone, PartialEq)]
pub struct DatumTerm {
    pub coefficient: BigRational,
    pub factors: Vec<RatPoly>,
}

/// Weighted sum of products of harmonic homogeneous polynomials whose
/// pairing combination is unchanged by orthogonal re-embedding.
///
/// Validation checks harmonicity, homogeneity and a common degree profile
/// across terms; orthogonal invariance itself is a property of the chosen
/// polynomials and is verified numerically in the test suites.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicDatum {
    nvars: usize,
    terms: Vec<DatumTerm>,
    profile: Vec<u32>,
}

impl HarmonicDatum {
    pub fn new(nvars: usize, terms: Vec<DatumTerm>) -> Result<Self, ThetaError> {
        let first = terms
            .first()
            .ok_or_else(|| ThetaError::InvalidDatum("no terms".into()))?;
        let profile_of = |t: &DatumTerm| -> Result<Vec<u32>, ThetaError> {
            let mut degrees = Vec::with_capacity(t.factors.len());
            for h in &t.factors {
                if h.nvars() != nvars {
                    return Err(ThetaError::DimensionMismatch {
                        expected: nvars,
                        got: h.nvars(),
                    });
                }
                check_harmonic(h)?;
                let d = h
                    .degree()
                    .ok_or_else(|| ThetaError::InvalidDatum("zero factor".into()))?;
                degrees.push(d);
            }
            degrees.sort_unstable();
            Ok(degrees)
        };
        let profile = profile_of(first)?;
        if profile.is_empty() {
            return Err(ThetaError::InvalidDatum("term without factors".into()));
        }
        for t in &terms[1..] {
            if profile_of(t)? != profile {
                return Err(ThetaError::InvalidDatum(
                    "terms have different degree profiles".into(),
                ));
            }
        }
        Ok(Self {
            nvars,
            terms,
            profile,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[DatumTerm] {
        &self.terms
    }

    /// Total degree `d = Σ d_i`.
    pub fn degree(&self) -> u32 {
        self.profile.iter().sum()
    }

    /// Number of factors `m` per term.
    pub fn factor_count(&self) -> usize {
        self.profile.len()
    }

    pub fn is_even(&self) -> bool {
        self.factor_count().is_multiple_of(2)
    }

    /// Weight `n·m/2 + d` of the associated form.
    pub fn weight(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.nvars * self.factor_count()),
            BigInt::from(2),
        ) + int(self.degree() as i64)
    }

    /// Datum text: one term per line, `coefficient | poly | poly …`.
    pub fn parse(text: &str, nvars: usize) -> Result<Self, ThetaError> {
        let mut terms = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split('|').map(str::trim);
            let coefficient: BigRational =
                fields.next().unwrap_or_default().parse().map_err(|_| {
                    ThetaError::InvalidDatum(format!("line {}: bad coefficient", idx + 1))
                })?;
            let factors = fields
                .map(|f| RatPoly::parse(f, nvars))
                .collect::<Result<Vec<_>, _>>()?;
            terms.push(DatumTerm {
                coefficient,
                factors,
            });
        }
        Self::new(nvars, terms)
    }
}

impl fmt::Display for HarmonicDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.terms {
            write!(f, "{}", t.coefficient)?;
            for h in &t.factors {
                write!(f, " | {h}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn square_term(coefficient: BigRational, h: RatPoly) -> DatumTerm {
    DatumTerm {
        coefficient,
        factors: vec![h.clone(), h],
    }
}

/// `2n² Σ_{i<j} Θ²_{x_i x_j} + Σ_i Θ²_{n x_i² − rsq}` in `n` variables.
pub fn builtin_datum_p11(n: usize) -> Result<HarmonicDatum, ThetaError> {
    if n < 2 {
        return Err(ThetaError::InvalidOrder {
            min: 2,
            got: n as u32,
        });
    }
    let mut terms = Vec::new();
    let cross = int(2 * (n * n) as i64);
    for i in 0..n {
        for j in (i + 1)..n {
            let h = &RatPoly::var(n, i) * &RatPoly::var(n, j);
            terms.push(square_term(cross.clone(), h));
        }
    }
    let rsq = RatPoly::rsq(n);
    for i in 0..n {
        let xi = RatPoly::var(n, i);
        let h = &(&xi * &xi).scale(&int(n as i64)) - &rsq;
        terms.push(square_term(BigRational::one(), h));
    }
    HarmonicDatum::new(n, terms)
}

/// Real and imaginary parts of `(x0 + i·x1)^k`.
pub fn complex_power_parts(k: u32) -> (RatPoly, RatPoly) {
    let mut re = RatPoly::zero(2);
    let mut im = RatPoly::zero(2);
    let mut binom = BigInt::one();
    for j in 0..=k {
        // term C(k,j) x^{k−j} (i y)^j
        let c = BigRational::from_integer(binom.clone());
        let e = vec![k - j, j];
        match j % 4 {
            0 => re.add_term(e, c),
            1 => im.add_term(e, c),
            2 => re.add_term(e, -c),
            _ => im.add_term(e, -c),
        }
        binom = binom * BigInt::from(k - j) / BigInt::from(j + 1);
    }
    (re, im)
}

/// `Θ²_{h₁} + Θ²_{h₂}` with `h₁ + i·h₂ = (x0 + i·x1)^{2n}`.
pub fn builtin_datum_nn(order: u32) -> Result<HarmonicDatum, ThetaError> {
    if order == 0 {
        return Err(ThetaError::InvalidOrder { min: 1, got: 0 });
    }
    let (h1, h2) = complex_power_parts(2 * order);
    HarmonicDatum::new(
        2,
        vec![
            square_term(BigRational::one(), h1),
            square_term(BigRational::one(), h2),
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::embed;

    fn z2() -> GramLattice {
        GramLattice::identity(2)
    }

    fn hex() -> GramLattice {
        GramLattice::from_scaled_integers(&[vec![2, 1], vec![1, 2]], 2).unwrap()
    }

    fn p(text: &str, n: usize) -> RatPoly {
        RatPoly::parse(text, n).unwrap()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn theta_of_square_lattice() {
        let t = theta_series(&z2(), 17).unwrap();
        let mut expected = vec![0i64; 18];
        for (m, c) in [
            (0, 1),
            (1, 4),
            (2, 4),
            (4, 4),
            (5, 8),
            (8, 4),
            (9, 4),
            (10, 8),
            (13, 8),
            (16, 4),
            (17, 8),
        ] {
            expected[m] = c;
        }
        assert_eq!(t, QExpansion::from_integers(17, &expected));
        assert_eq!(t.weight(), Some(&r(1, 1)));
        assert_eq!(t.level(), Some(4));
    }

    #[test]
    fn theta_precision_zero_counts_origin() {
        assert_eq!(theta_series(&hex(), 0).unwrap(), QExpansion::one(0));
    }

    #[test]
    fn theta_rejects_non_integral() {
        let l = GramLattice::from_scaled_integers(&[vec![1, 0], vec![0, 2]], 2).unwrap();
        assert_eq!(
            theta_series(&l, 3),
            Err(ThetaError::Lattice(LatticeError::NotIntegral))
        );
    }

    #[test]
    fn trace_power_examples() {
        assert_eq!(trace_power(&r(0, 1), &r(1, 1), 2), r(-2, 1));
        for k in 0..8 {
            assert_eq!(trace_power(&r(2, 1), &r(1, 1), k), r(2, 1));
        }
    }

    #[test]
    fn trace_power_matches_complex_roots() {
        let cases: [(f64, f64); 5] = [
            (1.0, 3.0),
            (-3.0, 5.0),
            (0.5, 7.25),
            (2.0, 2.0),
            (-1.5, 0.75),
        ];
        for (b1, b2) in cases {
            let root_re = b1 / 2.0;
            let root_im = (b2 - b1 * b1 / 4.0).sqrt();
            let (mut zr, mut zi) = (1.0f64, 0.0f64);
            for k in 0..10u32 {
                let exact = trace_power(
                    &BigRational::from_float(b1).unwrap(),
                    &BigRational::from_float(b2).unwrap(),
                    k,
                )
                .to_f64()
                .unwrap();
                let oracle = 2.0 * zr;
                assert!(
                    (exact - oracle).abs() <= 1e-9 * oracle.abs().max(1.0),
                    "k={k}"
                );
                let nr = zr * root_re - zi * root_im;
                zi = zr * root_im + zi * root_re;
                zr = nr;
            }
        }
    }

    #[test]
    fn theta_nn_square_order_two() {
        let t = theta_nn(&z2(), 2, 9).unwrap();
        let expected = QExpansion::from_integers(9, &[0, 0, 1, -8, 16, 32, -156, 112, 256, -576])
            .scale(&r(16, 1));
        assert_eq!(t, expected);
        assert_eq!(t.weight(), Some(&r(10, 1)));
    }

    #[test]
    fn theta_nn_rejects_other_dimensions() {
        assert_eq!(
            theta_nn(&GramLattice::identity(3), 1, 4),
            Err(ThetaError::DimensionMismatch {
                expected: 2,
                got: 3
            })
        );
        assert!(theta_nn(&z2(), 0, 4).is_err());
    }

    #[test]
    fn theta11_vanishes_on_square_lattice() {
        let t = theta11(&z2(), 12).unwrap();
        assert!(t.is_zero());
        assert_eq!(t.weight(), Some(&r(6, 1)));
    }

    #[test]
    fn spherical_theta_of_constant_is_theta() {
        let e = embed(&hex()).unwrap();
        let s = spherical_theta(&e, &hex(), &RatPoly::one(2), 12).unwrap();
        assert_eq!(
            s.max_abs_diff_exact(&theta_series(&hex(), 12).unwrap()),
            0.0
        );
    }

    #[test]
    fn spherical_theta_rejects_non_harmonic() {
        let e = embed(&z2()).unwrap();
        assert!(matches!(
            spherical_theta(&e, &z2(), &p("x0^2", 2), 4),
            Err(ThetaError::NotHarmonic(_))
        ));
    }

    #[test]
    fn p11_datum_shape() {
        let d4 = builtin_datum_p11(4).unwrap();
        assert_eq!(d4.terms().len(), 10);
        assert_eq!(
            d4.terms()
                .iter()
                .filter(|t| t.coefficient == r(32, 1))
                .count(),
            6
        );
        assert_eq!(d4.degree(), 4);
        assert_eq!(d4.factor_count(), 2);
        assert_eq!(d4.weight(), r(8, 1));
        assert!(builtin_datum_p11(1).is_err());
    }

    #[test]
    fn p11_datum_is_twice_the_plane_datum() {
        let e = embed(&hex()).unwrap();
        let l = GramLattice::from_scaled_integers(&[vec![2, 1], vec![1, 6]], 2).unwrap();
        let e2 = embed(&l).unwrap();
        let plane =
            HarmonicDatum::parse("4 | x0 x1 | x0 x1\n1 | x0^2 - x1^2 | x0^2 - x1^2\n", 2).unwrap();
        let general = builtin_datum_p11(2).unwrap();
        for (emb, lat) in [(&e, &hex()), (&e2, &l)] {
            let a = theta_datum(emb, lat, &general, 10).unwrap();
            let b = theta_datum(emb, lat, &plane, 10).unwrap().scale(2.0);
            assert!(a.max_abs_diff(&b) < 1e-9);
        }
    }

    #[test]
    fn nn_datum_polynomials() {
        let (h1, h2) = complex_power_parts(2);
        assert_eq!(h1, p("x0^2 - x1^2", 2));
        assert_eq!(h2, p("2 x0 x1", 2));
        let (h1, h2) = complex_power_parts(4);
        assert_eq!(h1, p("x0^4 - 6 x0^2 x1^2 + x1^4", 2));
        assert_eq!(h2, p("4 x0^3 x1 - 4 x0 x1^3", 2));
        for n in 1..=6 {
            let d = builtin_datum_nn(n).unwrap();
            assert_eq!(d.terms().len(), 2);
            assert_eq!(d.degree(), 4 * n);
            assert!(d
                .terms()
                .iter()
                .flat_map(|t| &t.factors)
                .all(RatPoly::is_harmonic));
        }
    }

    #[test]
    fn datum_validation() {
        assert!(matches!(
            HarmonicDatum::parse("1 | x0^2 | x0^2\n", 2),
            Err(ThetaError::NotHarmonic(_))
        ));
        assert!(matches!(
            HarmonicDatum::parse("1 | x0 x1 | x0 x1\n1 | x0 | x1\n", 2),
            Err(ThetaError::InvalidDatum(_))
        ));
        assert!(HarmonicDatum::parse("", 2).is_err());
        let d = builtin_datum_nn(2).unwrap();
        assert_eq!(HarmonicDatum::parse(&d.to_string(), 2).unwrap(), d);
    }
}
