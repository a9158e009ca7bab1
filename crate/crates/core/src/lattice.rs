//! Lattices given by exact Gram matrices.
//!
//! A [`GramLattice`] stores the Gram matrix `G_ij = ⟨γ_i, γ_j⟩` of a basis
//! together with its exact rational `LDLᵀ` factorization, which drives the
//! short-vector enumeration. No floating-point number ever enters a bound
//! computation, so [`GramLattice::short_vectors`] returns every vector below
//! the bound.
//!
//! [`Embedding`] is the float side: a basis matrix `S` with `SᵀS ≈ G` whose
//! columns are the embedded basis vectors.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("Gram matrix is not square")]
    NotSquare,
    #[error("Gram matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("Gram matrix is not positive definite (leading minor {0} is not positive)")]
    NotPositiveDefinite(usize),
    #[error("lattice is not integral")]
    NotIntegral,
    #[error("lattice dimension must be at least 1")]
    Empty,
    #[error("level {0} does not fit in 64 bits")]
    LevelOverflow(BigInt),
    #[error("embedding residual {residual:e} exceeds tolerance {tolerance:e}")]
    EmbeddingResidual { residual: f64, tolerance: f64 },
    #[error("numerical failure while factoring the Gram matrix")]
    NumericalFailure,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Gram file line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl LatticeError {
    /// Stable short code per failure kind.
    pub fn code(&self) -> &'static str {
        match self {
            Self::NotSquare => "not-square",
            Self::NotSymmetric(..) => "not-symmetric",
            Self::NotPositiveDefinite(_) => "not-positive-definite",
            Self::NotIntegral => "not-integral",
            Self::Empty => "empty",
            Self::LevelOverflow(_) => "level-overflow",
            Self::EmbeddingResidual { .. } => "embedding-residual",
            Self::NumericalFailure => "numerical-failure",
            Self::DimensionMismatch { .. } => "dimension-mismatch",
            Self::Parse { .. } => "parse",
        }
    }
}

/// Integer coordinates of a lattice vector in the chosen basis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeVector(pub Vec<i64>);

impl LatticeVector {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0; dim];
        v[i] = 1;
        Self(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for c in &self.0 {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
            first = false;
        }
        Ok(())
    }
}

/// Level `N` and discriminant `D` of an integral lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelDiscriminant {
    pub level: u64,
    pub discriminant: BigInt,
}

/// A validated lattice: symmetric positive-definite rational Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GramLattice {
    gram: Vec<Vec<BigRational>>,
    /// `G = Uᵀ·diag(d)·U` with `U` unit upper triangular.
    ldl_d: Vec<BigRational>,
    ldl_u: Vec<Vec<BigRational>>,
    integral: bool,
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl GramLattice {
    pub fn from_gram(gram: Vec<Vec<BigRational>>) -> Result<Self, LatticeError> {
        let n = gram.len();
        if n == 0 {
            return Err(LatticeError::Empty);
        }
        if gram.iter().any(|row| row.len() != n) {
            return Err(LatticeError::NotSquare);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if gram[i][j] != gram[j][i] {
                    return Err(LatticeError::NotSymmetric(i, j));
                }
            }
        }
        let (ldl_d, ldl_u) = ldl(&gram)?;
        let two = rat(2);
        let integral = (0..n).all(|i| {
            (0..n).all(|j| {
                if i == j {
                    gram[i][i].is_integer()
                } else {
                    (&gram[i][j] * &two).is_integer()
                }
            })
        });
        Ok(Self {
            gram,
            ldl_d,
            ldl_u,
            integral,
        })
    }

    /// Builds a lattice from integer entries divided by a common denominator.
    pub fn from_scaled_integers(rows: &[Vec<i64>], denominator: i64) -> Result<Self, LatticeError> {
        let d = BigInt::from(denominator);
        Self::from_gram(
            rows.iter()
                .map(|row| {
                    row.iter()
                        .map(|&v| BigRational::new(BigInt::from(v), d.clone()))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn identity(dim: usize) -> Self {
        let rows: Vec<Vec<i64>> = (0..dim)
            .map(|i| (0..dim).map(|j| i64::from(i == j)).collect())
            .collect();
        Self::from_scaled_integers(&rows, 1).expect("identity is positive definite")
    }

    pub fn dim(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<BigRational>] {
        &self.gram
    }

    pub fn is_integral(&self) -> bool {
        self.integral
    }

    pub fn require_integral(&self) -> Result<(), LatticeError> {
        if self.integral {
            Ok(())
        } else {
            Err(LatticeError::NotIntegral)
        }
    }

    pub fn determinant(&self) -> BigRational {
        self.ldl_d.iter().product()
    }

    /// `uᵀ G v`.
    pub fn inner(&self, u: &LatticeVector, v: &LatticeVector) -> BigRational {
        let n = self.dim();
        assert_eq!(u.0.len(), n, "vector length");
        assert_eq!(v.0.len(), n, "vector length");
        let mut acc = BigRational::zero();
        for i in 0..n {
            if u.0[i] == 0 {
                continue;
            }
            let mut row = BigRational::zero();
            for j in 0..n {
                if v.0[j] != 0 {
                    row += &self.gram[i][j] * rat(v.0[j]);
                }
            }
            acc += row * rat(u.0[i]);
        }
        acc
    }

    pub fn norm2(&self, v: &LatticeVector) -> BigRational {
        self.inner(v, v)
    }

    /// `2G` as an integer matrix, available for integral lattices.
    pub fn doubled_gram(&self) -> Option<Vec<Vec<i64>>> {
        if !self.integral {
            return None;
        }
        self.gram
            .iter()
            .map(|row| {
                row.iter()
                    .map(|g| (g * rat(2)).to_integer().to_i64())
                    .collect::<Option<Vec<i64>>>()
            })
            .collect()
    }

    /// All nonzero vectors with `‖v‖² ≤ bound`, each once, sorted by norm and
    /// then lexicographically by coordinates.
    pub fn short_vectors(&self, bound: &BigRational) -> Vec<(LatticeVector, BigRational)> {
        let n = self.dim();
        let mut out = Vec::new();
        if bound.is_negative() {
            return out;
        }
        let mut coords = vec![0i64; n];
        self.enumerate_level(n - 1, bound.clone(), &mut coords, &mut out);
        out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        out
    }

    /// Depth-first search from the last coordinate down. At level `i` the
    /// contribution is `d_i (x_i + c_i)²` with `c_i = Σ_{j>i} U_ij x_j`.
    fn enumerate_level(
        &self,
        level: usize,
        budget: BigRational,
        coords: &mut Vec<i64>,
        out: &mut Vec<(LatticeVector, BigRational)>,
    ) {
        let n = self.dim();
        let mut center = BigRational::zero();
        for j in (level + 1)..n {
            if coords[j] != 0 {
                center += &self.ldl_u[level][j] * rat(coords[j]);
            }
        }
        let d = &self.ldl_d[level];
        let cost = |x: i64| -> BigRational {
            let t = rat(x) + &center;
            d * &t * &t
        };
        let start = (-&center)
            .floor()
            .to_integer()
            .to_i64()
            .expect("coordinate range");
        let visit =
            |x: i64, coords: &mut Vec<i64>, out: &mut Vec<(LatticeVector, BigRational)>| -> bool {
                let c = cost(x);
                if c > budget {
                    return false;
                }
                coords[level] = x;
                let rest = &budget - &c;
                if level == 0 {
                    if coords.iter().any(|&v| v != 0) {
                        let v = LatticeVector(coords.clone());
                        let norm = self.norm2(&v);
                        out.push((v, norm));
                    }
                } else {
                    self.enumerate_level(level - 1, rest, coords, out);
                }
                coords[level] = 0;
                true
            };
        let mut x = start;
        while visit(x, coords, out) {
            x -= 1;
        }
        let mut x = start + 1;
        while visit(x, coords, out) {
            x += 1;
        }
    }

    /// Smallest nonzero `‖v‖²`.
    pub fn minimum(&self) -> BigRational {
        let bound = (0..self.dim())
            .map(|i| self.gram[i][i].clone())
            .min()
            .expect("nonempty lattice");
        self.short_vectors(&bound)
            .into_iter()
            .map(|(_, norm)| norm)
            .next()
            .expect("basis vectors lie below the minimal diagonal entry")
    }

    /// Level `N`: least `N > 0` with `N·(2G)⁻¹` integral with even diagonal.
    /// Discriminant `D = (−1)^⌊n/2⌋ det(2G)`.
    pub fn level_and_discriminant(&self) -> Result<LevelDiscriminant, LatticeError> {
        self.require_integral()?;
        let n = self.dim();
        let doubled: Vec<Vec<BigRational>> = self
            .gram
            .iter()
            .map(|row| row.iter().map(|g| g * rat(2)).collect())
            .collect();
        let inv = invert(&doubled).ok_or(LatticeError::NumericalFailure)?;
        let mut level = BigInt::one();
        for i in 0..n {
            for j in 0..n {
                let entry = if i == j {
                    &inv[i][i] / rat(2)
                } else {
                    inv[i][j].clone()
                };
                level = level.lcm(entry.denom());
            }
        }
        let det2 = self.determinant() * BigRational::from_integer(BigInt::from(2).pow(n as u32));
        debug_assert!(det2.is_integer());
        let mut discriminant = det2.to_integer();
        if (n / 2) % 2 == 1 {
            discriminant = -discriminant;
        }
        let level_u64 = level
            .to_u64()
            .ok_or(LatticeError::LevelOverflow(level.clone()))?;
        Ok(LevelDiscriminant {
            level: level_u64,
            discriminant,
        })
    }

    /// Gram matrix as floats.
    pub fn gram_f64(&self) -> Vec<Vec<f64>> {
        self.gram
            .iter()
            .map(|row| row.iter().map(|g| g.to_f64().unwrap_or(f64::NAN)).collect())
            .collect()
    }

    /// Text in the Gram file format.
    pub fn to_gram_text(&self) -> String {
        let mut out = format!("dim {}\n", self.dim());
        for row in &self.gram {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Exact `LDLᵀ`; fails at the first non-positive pivot.
fn ldl(
    gram: &[Vec<BigRational>],
) -> Result<(Vec<BigRational>, Vec<Vec<BigRational>>), LatticeError> {
    let n = gram.len();
    let mut d = vec![BigRational::zero(); n];
    let mut u = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        let mut di = gram[i][i].clone();
        for k in 0..i {
            di -= &d[k] * &u[k][i] * &u[k][i];
        }
        if !di.is_positive() {
            return Err(LatticeError::NotPositiveDefinite(i + 1));
        }
        u[i][i] = BigRational::one();
        for j in (i + 1)..n {
            let mut v = gram[i][j].clone();
            for k in 0..i {
                v -= &d[k] * &u[k][i] * &u[k][j];
            }
            u[i][j] = v / &di;
        }
        d[i] = di;
    }
    Ok((d, u))
}

/// Gauss–Jordan inverse over the rationals.
fn invert(m: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let t = &f * &a[col][j];
                a[r][j] -= t;
                let t = &f * &inv[col][j];
                inv[r][j] -= t;
            }
        }
    }
    Some(inv)
}

impl FromStr for GramLattice {
    type Err = LatticeError;

    /// Gram file: `dim n`, then `n` rows of `n` rationals; `#` starts a comment.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut dim: Option<usize> = None;
        let mut rows: Vec<Vec<BigRational>> = Vec::new();
        for (idx, raw) in s.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| LatticeError::Parse {
                line: line_no,
                message,
            };
            match dim {
                None => {
                    let n = line
                        .strip_prefix("dim")
                        .and_then(|rest| rest.trim().parse::<usize>().ok())
                        .ok_or_else(|| parse_err("expected `dim n`".into()))?;
                    if n == 0 {
                        return Err(LatticeError::Empty);
                    }
                    dim = Some(n);
                }
                Some(n) => {
                    if rows.len() == n {
                        return Err(LatticeError::NotSquare);
                    }
                    let row = line
                        .split_whitespace()
                        .map(|t| {
                            BigRational::from_str(t)
                                .map_err(|_| parse_err(format!("invalid rational `{t}`")))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    if row.len() != n {
                        return Err(LatticeError::NotSquare);
                    }
                    rows.push(row);
                }
            }
        }
        let n = dim.ok_or(LatticeError::Parse {
            line: 1,
            message: "missing `dim n` line".into(),
        })?;
        if rows.len() != n {
            return Err(LatticeError::NotSquare);
        }
        Self::from_gram(rows)
    }
}

/// Float basis matrix `S` (row-major) with `SᵀS ≈ G`; column `j` is the
/// embedded basis vector `γ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    s: Vec<Vec<f64>>,
    tolerance: f64,
}

const EMBED_RELATIVE_TOLERANCE: f64 = 1e-12;

fn embedding_tolerance(gram: &[Vec<f64>]) -> f64 {
    let max = gram.iter().flatten().fold(0.0f64, |a, g| a.max(g.abs()));
    EMBED_RELATIVE_TOLERANCE * max.max(1.0)
}

fn residual(s: &[Vec<f64>], gram: &[Vec<f64>]) -> f64 {
    let n = gram.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let v: f64 = (0..n).map(|k| s[k][i] * s[k][j]).sum();
            worst = worst.max((v - gram[i][j]).abs());
        }
    }
    worst
}

impl Embedding {
    /// Upper-triangular Cholesky factor with positive diagonal.
    pub fn cholesky(lattice: &GramLattice) -> Result<Self, LatticeError> {
        let g = lattice.gram_f64();
        let n = g.len();
        let mut s = vec![vec![0.0; n]; n];
        for j in 0..n {
            let diag = g[j][j] - (0..j).map(|k| s[k][j] * s[k][j]).sum::<f64>();
            if diag.is_nan() || diag <= 0.0 {
                return Err(LatticeError::NumericalFailure);
            }
            s[j][j] = diag.sqrt();
            for i in (j + 1)..n {
                let v = g[j][i] - (0..j).map(|k| s[k][j] * s[k][i]).sum::<f64>();
                s[j][i] = v / s[j][j];
            }
        }
        Self::from_matrix(s, lattice)
    }

    /// Accepts any square `S` whose Gram matrix matches the lattice.
    pub fn from_matrix(s: Vec<Vec<f64>>, lattice: &GramLattice) -> Result<Self, LatticeError> {
        let n = lattice.dim();
        if s.len() != n || s.iter().any(|row| row.len() != n) {
            return Err(LatticeError::DimensionMismatch {
                expected: n,
                got: s.len(),
            });
        }
        let g = lattice.gram_f64();
        let tolerance = embedding_tolerance(&g);
        let res = residual(&s, &g);
        if res.is_nan() || res > tolerance {
            return Err(LatticeError::EmbeddingResidual {
                residual: res,
                tolerance,
            });
        }
        Ok(Self { s, tolerance })
    }

    pub fn dim(&self) -> usize {
        self.s.len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.s
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn residual(&self, lattice: &GramLattice) -> f64 {
        residual(&self.s, &lattice.gram_f64())
    }

    /// Embedded vector `S·coords`.
    pub fn apply(&self, coords: &[i64]) -> Vec<f64> {
        self.s
            .iter()
            .map(|row| row.iter().zip(coords).map(|(a, &c)| a * c as f64).sum())
            .collect()
    }

    /// Re-embedding `Q·S` for an orthogonal `Q`.
    pub fn rotated(&self, q: &[Vec<f64>], lattice: &GramLattice) -> Result<Self, LatticeError> {
        let n = self.dim();
        if q.len() != n || q.iter().any(|row| row.len() != n) {
            return Err(LatticeError::DimensionMismatch {
                expected: n,
                got: q.len(),
            });
        }
        let s = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| q[i][k] * self.s[k][j]).sum())
                    .collect()
            })
            .collect();
        Self::from_matrix(s, lattice)
    }
}

/// Upper-triangular Cholesky factor of `G`.
pub fn embed(lattice: &GramLattice) -> Result<Embedding, LatticeError> {
    Embedding::cholesky(lattice)
}

/// Random orthogonal matrix: Gram–Schmidt on a Gaussian matrix, with a
/// random reflection so both components of `O(n)` are reached.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Vec<f64>> {
    loop {
        let mut cols: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let mut ok = true;
        for j in 0..n {
            for k in 0..j {
                let dot: f64 = (0..n).map(|i| cols[j][i] * cols[k][i]).sum();
                for i in 0..n {
                    cols[j][i] -= dot * cols[k][i];
                }
            }
            let norm: f64 = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            cols[j].iter_mut().for_each(|x| *x /= norm);
        }
        if !ok {
            continue;
        }
        if rng.random_bool(0.5) {
            cols[0].iter_mut().for_each(|x| *x = -*x);
        }
        // rows of the result are the transposed column list
        return (0..n)
            .map(|i| (0..n).map(|j| cols[j][i]).collect())
            .collect();
    }
}
