//! Numerical heat flux of a lattice.
//!
//! `f_t(x) = (4πt)^{−n/2} Σ_γ exp(−‖x − γ‖²/4t)` is summed over the lattice
//! vectors with `‖γ‖² ≤ B(t, ε)`. Pairings `⟨P, f_t⟩` apply `P(∂)` to every
//! Gaussian summand in closed form, and `t`-derivatives of `f_t(0)` are
//! analytic term by term.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::lattice::{Embedding, GramLattice, LatticeError};
use crate::polyalg::{
    exponents_of_degree, multi_factorial, Coeff, FloatPoly, GaussianOperator, PolyError,
    Polynomial, RatPoly,
};
use crate::qseries::relative_error;
use crate::sphere::{polynomial_sphere_integral, SphereError};
use crate::theta::{
    builtin_datum_nn, builtin_datum_p11, complex_power_parts, theta_datum, theta_series,
    HarmonicDatum, ThetaError,
};

/// Largest `k` accepted by [`HeatContext::dt_f0`].
pub const MAX_TIME_DERIVATIVE: u32 = 6;
/// Largest total degree accepted by [`HeatContext::taylor_part`] and [`HeatContext::c_invariant`].
pub const MAX_TAYLOR_DEGREE: u32 = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeatError {
    #[error("t must be positive and finite, got {0}")]
    InvalidTime(f64),
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("order {order} exceeds the supported maximum {max}")]
    UnsupportedOrder { order: u32, max: u32 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Sphere(#[from] SphereError),
    #[error(transparent)]
    Theta(#[from] ThetaError),
}

/// `B = 4t(ln(1/ε) + n·ln(1 + 1/t) + 20)`.
pub fn truncation_bound(dim: usize, t: f64, epsilon: f64) -> f64 {
    4.0 * t * ((1.0 / epsilon).ln() + dim as f64 * (1.0 + 1.0 / t).ln() + 20.0)
}

/// A lattice sum together with `Σ |summand|`, the scale against which its
/// cancellation error is measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summed {
    pub value: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone)]
struct HeatPoint {
    embedded: Vec<f64>,
    norm2: f64,
    /// `exp(−‖γ‖²/4t)`
    gauss: f64,
}

#[derive(Debug, Clone)]
pub struct HeatContext {
    lattice: GramLattice,
    embedding: Embedding,
    t: f64,
    epsilon: f64,
    truncation_bound: f64,
    /// `(4πt)^{−n/2}`
    prefactor: f64,
    /// Every `γ` with `‖γ‖² ≤ (√B + 1)²`, so `f_eval` near the origin is covered.
    points: Vec<HeatPoint>,
}

impl HeatContext {
    pub fn new(
        lattice: GramLattice,
        embedding: Embedding,
        t: f64,
        epsilon: f64,
    ) -> Result<Self, HeatError> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(HeatError::InvalidEpsilon(epsilon));
        }
        let bound = truncation_bound(lattice.dim(), t, epsilon);
        Self::with_truncation_bound(lattice, embedding, t, epsilon, bound)
    }

    /// Context with an explicit cutoff `B` in place of `B(t, ε)`.
    pub fn with_truncation_bound(
        lattice: GramLattice,
        embedding: Embedding,
        t: f64,
        epsilon: f64,
        bound: f64,
    ) -> Result<Self, HeatError> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(HeatError::InvalidTime(t));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(HeatError::InvalidEpsilon(epsilon));
        }
        if embedding.dim() != lattice.dim() {
            return Err(HeatError::DimensionMismatch {
                expected: lattice.dim(),
                got: embedding.dim(),
            });
        }
        let prefactor = (4.0 * std::f64::consts::PI * t).powf(-(lattice.dim() as f64) / 2.0);
        let radius = bound.max(0.0).sqrt() + 1.0;
        let points = enumerate_points(&lattice, &embedding, t, radius * radius);
        Ok(Self {
            lattice,
            embedding,
            t,
            epsilon,
            truncation_bound: bound,
            prefactor,
            points,
        })
    }

    pub fn lattice(&self) -> &GramLattice {
        &self.lattice
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn truncation_bound(&self) -> f64 {
        self.truncation_bound
    }

    /// `(4πt)^{−n/2}`.
    pub fn kernel_prefactor(&self) -> f64 {
        self.prefactor
    }

    /// Number of lattice vectors (origin included) taking part in pairings.
    pub fn point_count(&self) -> usize {
        self.pairing_points().count()
    }

    fn pairing_points(&self) -> impl Iterator<Item = &HeatPoint> {
        let b = self.truncation_bound;
        self.points.iter().filter(move |p| p.norm2 <= b)
    }

    fn check_vars(&self, nvars: usize) -> Result<(), HeatError> {
        if nvars == self.dim() {
            Ok(())
        } else {
            Err(HeatError::DimensionMismatch {
                expected: self.dim(),
                got: nvars,
            })
        }
    }

    fn sum(&self, mut summand: impl FnMut(&HeatPoint) -> f64) -> Summed {
        let mut value = 0.0;
        let mut magnitude = 0.0;
        for p in self.pairing_points() {
            let s = summand(p);
            value += s;
            magnitude += s.abs();
        }
        Summed {
            value: value * self.prefactor,
            magnitude: magnitude * self.prefactor,
        }
    }

    /// `f_t(x)`. Points with `|x| > 1` trigger a re-centred enumeration.
    pub fn f_eval(&self, x: &[f64]) -> Result<f64, HeatError> {
        self.check_vars(x.len())?;
        let four_t = 4.0 * self.t;
        let len = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let kernel = |p: &[f64]| -> f64 {
            let d2: f64 = p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            (-d2 / four_t).exp()
        };
        let total: f64 = if len <= 1.0 {
            self.points.iter().map(|p| kernel(&p.embedded)).sum()
        } else {
            let radius = self.truncation_bound.max(0.0).sqrt() + len;
            enumerate_points(&self.lattice, &self.embedding, self.t, radius * radius)
                .iter()
                .map(|p| kernel(&p.embedded))
                .sum()
        };
        Ok(total * self.prefactor)
    }

    /// `⟨P, f_t⟩` with its summand magnitude.
    pub fn heat_pair_detailed<C: Coeff>(&self, p: &Polynomial<C>) -> Result<Summed, HeatError> {
        self.check_vars(p.nvars())?;
        let op = GaussianOperator::new(p, -1.0 / (2.0 * self.t))?;
        Ok(self.sum(|pt| op.polynomial_factor(&pt.embedded) * pt.gauss))
    }

    /// `⟨P, f_t⟩ = Σ_γ P(∂)[(4πt)^{−n/2} exp(−‖x − γ‖²/4t)]|_{x=0}`.
    pub fn heat_pair<C: Coeff>(&self, p: &Polynomial<C>) -> Result<f64, HeatError> {
        Ok(self.heat_pair_detailed(p)?.value)
    }

    /// `(4πt)^{−n/2} Σ_γ h(γ) exp(−‖γ‖²/4t)`, with `h` evaluated directly.
    pub fn harmonic_lattice_sum<C: Coeff>(&self, h: &Polynomial<C>) -> Result<Summed, HeatError> {
        self.check_vars(h.nvars())?;
        let hf = h.to_float_poly();
        Ok(self.sum(|pt| hf.eval_f64(&pt.embedded) * pt.gauss))
    }

    /// `∂^k_t f_t(0)`. Each summand `t^{−n/2} e^{−s/4t}` differentiates to
    /// `Σ_j c_j t^{−n/2−j} e^{−s/4t}`, with the `c_j` built by recursion.
    pub fn dt_f0(&self, k: u32) -> Result<f64, HeatError> {
        if k > MAX_TIME_DERIVATIVE {
            return Err(HeatError::UnsupportedOrder {
                order: k,
                max: MAX_TIME_DERIVATIVE,
            });
        }
        let half_n = self.dim() as f64 / 2.0;
        let t = self.t;
        // prefactor = (4π)^{−n/2} t^{−n/2}; the t-power is handled below
        let four_pi = (4.0 * std::f64::consts::PI).powf(-half_n);
        let mut total = 0.0;
        for pt in self.pairing_points() {
            let mut c = vec![1.0];
            for _ in 0..k {
                let mut next = vec![0.0; c.len() + 2];
                for (j, &cj) in c.iter().enumerate() {
                    next[j + 1] -= cj * (half_n + j as f64);
                    next[j + 2] += cj * pt.norm2 / 4.0;
                }
                c = next;
            }
            let poly: f64 = c
                .iter()
                .enumerate()
                .map(|(j, cj)| cj * t.powf(-half_n - j as f64))
                .sum();
            total += poly * pt.gauss;
        }
        Ok(total * four_pi)
    }

    /// `f_k = Σ_{|I| = 2k} ⟨x^I, f_t⟩ x^I / I!`.
    pub fn taylor_part(&self, k: u32) -> Result<FloatPoly, HeatError> {
        if 2 * k > MAX_TAYLOR_DEGREE {
            return Err(HeatError::UnsupportedOrder {
                order: 2 * k,
                max: MAX_TAYLOR_DEGREE,
            });
        }
        let n = self.dim();
        let mut part = FloatPoly::zero(n);
        for e in exponents_of_degree(n, 2 * k) {
            let mono = FloatPoly::monomial(n, e.clone(), 1.0);
            let a = self.heat_pair(&mono)?;
            let fact = multi_factorial(&e).to_f64().unwrap_or(f64::INFINITY);
            part.add_term(e, a / fact);
        }
        Ok(part)
    }

    /// `c_{k₁…k_m} = ∫_{S^{n−1}} f_{k₁}⋯f_{k_m} dμ̄`, integrated exactly on the
    /// float coefficients read as exact binary fractions.
    pub fn c_invariant(&self, ks: &[u32]) -> Result<f64, HeatError> {
        let total: u32 = ks.iter().map(|k| 2 * k).sum();
        if total > MAX_TAYLOR_DEGREE {
            return Err(HeatError::UnsupportedOrder {
                order: total,
                max: MAX_TAYLOR_DEGREE,
            });
        }
        let mut product = FloatPoly::one(self.dim());
        for &k in ks {
            product = &product * &self.taylor_part(k)?;
        }
        let exact = RatPoly::from_float_exact(&product);
        let value = polynomial_sphere_integral(&exact, self.dim())?;
        Ok(Coeff::to_f64(&value))
    }

    /// `Σ_j c_j Π_i ⟨h_ij, f_t⟩` with its magnitude `Σ_j |c_j| Π_i mag(⟨h_ij, f_t⟩)`.
    pub fn datum_value_detailed(&self, datum: &HarmonicDatum) -> Result<Summed, HeatError> {
        self.check_vars(datum.nvars())?;
        let mut value = 0.0;
        let mut magnitude = 0.0;
        let mut cache: Vec<(&RatPoly, Summed)> = Vec::new();
        for term in datum.terms() {
            let c = Coeff::to_f64(&term.coefficient);
            let (mut v, mut m) = (c, c.abs());
            for h in &term.factors {
                let s = match cache.iter().find(|(p, _)| *p == h) {
                    Some((_, s)) => *s,
                    None => {
                        let s = self.heat_pair_detailed(h)?;
                        cache.push((h, s));
                        s
                    }
                };
                v *= s.value;
                m *= s.magnitude;
            }
            value += v;
            magnitude += m;
        }
        Ok(Summed { value, magnitude })
    }

    pub fn datum_value(&self, datum: &HarmonicDatum) -> Result<f64, HeatError> {
        Ok(self.datum_value_detailed(datum)?.value)
    }

    /// `p₁₁ = 2n² Σ_{i<j} ⟨x_ix_j, f_t⟩² + Σ_i ⟨n x_i² − r², f_t⟩²`.
    pub fn p11_value(&self) -> Result<f64, HeatError> {
        self.datum_value(&builtin_datum_p11(self.dim())?)
    }

    /// `p₂₂ = ⟨x₀⁴ − 6x₀²x₁² + x₁⁴, f_t⟩² + 16⟨x₀x₁(x₀² − x₁²), f_t⟩²` (plane lattices).
    pub fn p22_value(&self) -> Result<f64, HeatError> {
        self.check_vars(2)?;
        let a = self.heat_pair(&RatPoly::parse("x0^4 - 6 x0^2 x1^2 + x1^4", 2)?)?;
        let b = self.heat_pair(&RatPoly::parse("x0^3 x1 - x0 x1^3", 2)?)?;
        Ok(a * a + 16.0 * b * b)
    }
}

fn enumerate_points(
    lattice: &GramLattice,
    embedding: &Embedding,
    t: f64,
    bound: f64,
) -> Vec<HeatPoint> {
    let origin = vec![0i64; lattice.dim()];
    let mut points = vec![HeatPoint {
        embedded: embedding.apply(&origin),
        norm2: 0.0,
        gauss: 1.0,
    }];
    let exact = BigRational::from_float(bound).expect("finite bound");
    for (v, norm) in lattice.short_vectors(&exact) {
        let norm2 = Coeff::to_f64(&norm);
        points.push(HeatPoint {
            embedded: embedding.apply(&v.0),
            norm2,
            gauss: (-norm2 / (4.0 * t)).exp(),
        });
    }
    points
}

trait ToFloatPoly {
    fn to_float_poly(&self) -> FloatPoly;
}

impl<C: Coeff> ToFloatPoly for Polynomial<C> {
    fn to_float_poly(&self) -> FloatPoly {
        self.map_coeffs(|c| c.to_f64())
    }
}

/// `2^k k! Π_{m=1}^k (n + 2m − 2)`, so that `c_k = ∂^k_t c₀ / factor`.
/// For `n = 2` this is `4^k (k!)²`.
pub fn moment_factor(dim: usize, k: u32) -> f64 {
    (1..=k)
        .map(|m| 2.0 * m as f64 * (dim as f64 + 2.0 * m as f64 - 2.0))
        .product()
}

/// One row of the identity report: two independently computed sides.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Floor for the relative error: the summand magnitude of sides that may cancel.
    pub scale: f64,
    pub rel_error: f64,
    pub tolerance: f64,
}

impl IdentityCheck {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, scale: f64, tolerance: f64) -> Self {
        let rel_error = relative_error(lhs, rhs, scale);
        Self {
            name: name.into(),
            lhs,
            rhs,
            scale,
            rel_error,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.rel_error <= self.tolerance
    }
}

fn lift(p: &RatPoly, nvars: usize) -> RatPoly {
    RatPoly::from_terms(
        nvars,
        p.terms().map(|(e, c)| {
            let mut full = e.clone();
            full.resize(nvars, 0);
            (full, c.clone())
        }),
    )
}

/// Harmonic test polynomials in the first two coordinates: degrees 2, 2, 4, 4, 6.
pub fn harmonic_probes(nvars: usize) -> Vec<RatPoly> {
    if nvars < 2 {
        return vec![RatPoly::var(nvars.max(1), 0)];
    }
    let (re2, im2) = complex_power_parts(2);
    let (re4, im4) = complex_power_parts(4);
    let (re6, _) = complex_power_parts(6);
    [im2, re2, im4, re4, re6]
        .iter()
        .map(|p| lift(p, nvars))
        .collect()
}

/// `(2t)^d (4πt)^{mn/2} p(t)` against `Θ_p(e^{−1/4t})`.
fn scaling_check(
    ctx: &HeatContext,
    name: &str,
    datum: &HarmonicDatum,
) -> Result<IdentityCheck, HeatError> {
    let t = ctx.t();
    let n = ctx.dim() as f64;
    let m = datum.factor_count() as f64;
    let factor =
        (2.0 * t).powi(datum.degree() as i32) * (4.0 * std::f64::consts::PI * t).powf(m * n / 2.0);
    let heat = ctx.datum_value_detailed(datum)?;
    let q = (-1.0 / (4.0 * t)).exp();
    let precision = ctx.truncation_bound().ceil() as u64 + 1;
    let series = theta_datum(ctx.embedding(), ctx.lattice(), datum, precision)?;
    let rhs = series.eval_real(q).map(|e| e.value).unwrap_or(f64::NAN);
    Ok(IdentityCheck::new(
        name,
        factor * heat.value,
        rhs,
        factor * heat.magnitude,
        1e-7,
    ))
}

/// Every identity linking the heat pairings, the `c`-invariants and the
/// theta engines, evaluated on one context.
pub fn run_identity_checks(ctx: &HeatContext) -> Result<Vec<IdentityCheck>, HeatError> {
    let n = ctx.dim();
    let t = ctx.t();
    let mut checks = Vec::new();

    let rsq = RatPoly::rsq(n);
    for k in 1..=3 {
        let pair = ctx.heat_pair_detailed(&rsq.pow(k))?;
        checks.push(IdentityCheck::new(
            format!("pair r^{} = dt^{} f(0)", 2 * k, k),
            pair.value,
            ctx.dt_f0(k)?,
            pair.magnitude,
            1e-6,
        ));
    }

    for h in harmonic_probes(n) {
        let d = h.degree().unwrap_or(0);
        let lhs = ctx.heat_pair_detailed(&h)?;
        let rhs = ctx.harmonic_lattice_sum(&h)?;
        let scale = (2.0 * t).powi(d as i32);
        checks.push(IdentityCheck::new(
            format!("harmonic shift {h}"),
            scale * lhs.value,
            rhs.value,
            (scale * lhs.magnitude).max(rhs.magnitude),
            1e-7,
        ));
    }

    let c0 = ctx.c_invariant(&[0])?;
    checks.push(IdentityCheck::new(
        "c0 = f(0)",
        c0,
        ctx.f_eval(&vec![0.0; n])?,
        0.0,
        1e-12,
    ));
    for k in 1..=3u32 {
        let tol = if k == 1 { 1e-7 } else { 1e-6 };
        checks.push(IdentityCheck::new(
            format!("c{k} = dt^{k} c0 / {}", moment_factor(n, k)),
            ctx.c_invariant(&[k])?,
            ctx.dt_f0(k)? / moment_factor(n, k),
            0.0,
            tol,
        ));
    }

    let c1 = ctx.c_invariant(&[1])?;
    let c11 = ctx.c_invariant(&[1, 1])?;
    if n >= 2 {
        let nf = n as f64;
        let p11 = ctx.datum_value_detailed(&builtin_datum_p11(n)?)?;
        let denom = 2.0 * nf.powi(3) * (nf + 2.0);
        checks.push(IdentityCheck::new(
            "c11 = p11/(2n^3(n+2)) + c1^2",
            c11,
            p11.value / denom + c1 * c1,
            0.0,
            1e-7,
        ));
    }

    if n == 2 {
        let a11 = ctx.heat_pair_detailed(&RatPoly::parse("x0 x1", 2)?)?;
        let a_diff = ctx.heat_pair_detailed(&RatPoly::parse("x0^2 - x1^2", 2)?)?;
        checks.push(IdentityCheck::new(
            "32 c11 - 32 c1^2 = 4 <x0 x1>^2 + <x0^2 - x1^2>^2",
            32.0 * c11 - 32.0 * c1 * c1,
            4.0 * a11.value.powi(2) + a_diff.value.powi(2),
            32.0 * c11,
            1e-8,
        ));

        let c2 = ctx.c_invariant(&[2])?;
        let c22 = ctx.c_invariant(&[2, 2])?;
        let p22 = ctx.p22_value()?;
        let s1 = 73728.0 * c2 * c2;
        // ⟨P, ∂_t f_t⟩ = ⟨P·r², f_t⟩
        let d11 = ctx.heat_pair(&RatPoly::parse("x0^3 x1 + x0 x1^3", 2)?)?;
        let d_diff = ctx.heat_pair(&RatPoly::parse("x0^4 - x1^4", 2)?)?;
        let s2 = 16.0 * (4.0 * d11 * d11 + d_diff * d_diff);
        checks.push(IdentityCheck::new(
            "73728 c22 = p22 + s1 + s2",
            73728.0 * c22,
            p22 + s1 + s2,
            0.0,
            1e-7,
        ));
    }

    if ctx.lattice().is_integral() {
        let f0 = ctx.heat_pair_detailed(&RatPoly::one(n))?;
        let factor = (4.0 * std::f64::consts::PI * t).powf(n as f64 / 2.0);
        let precision = ctx.truncation_bound().ceil() as u64 + 1;
        let theta = theta_series(ctx.lattice(), precision)?;
        let q = (-1.0 / (4.0 * t)).exp();
        let rhs = theta.eval_real(q).map(|e| e.value).unwrap_or(f64::NAN);
        checks.push(IdentityCheck::new(
            "theta scaling (f(0), 1)",
            factor * f0.value,
            rhs,
            factor * f0.magnitude,
            1e-7,
        ));
        if n >= 2 {
            checks.push(scaling_check(
                ctx,
                "theta scaling p11",
                &builtin_datum_p11(n)?,
            )?);
        }
        if n == 2 {
            checks.push(scaling_check(
                ctx,
                "theta scaling p22",
                &builtin_datum_nn(2)?,
            )?);
        }
    }

    Ok(checks)
}
