//! Exact integrals of polynomials over the unit sphere `S^{N−1} ⊂ ℝ^N`
//! against the normalized invariant measure (total mass one).
//!
//! Public functions take the ambient dimension `N` (number of variables).
//! The closed forms are usually written for `S^n ⊂ ℝ^{n+1}`; the internal
//! `n` below is `N − 1`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::polyalg::RatPoly;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SphereError {
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("polynomial has {got} variables, ambient dimension is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `∫ x^I dμ̄`: zero when any exponent is odd, otherwise
/// `Π_k i_k!/(i_k/2)! · Π_{m=1}^{d/2} 1/(2(n + 2m − 1))` with `n = N − 1`.
pub fn monomial_integral(exps: &[u32], ambient_dim: usize) -> BigRational {
    assert_eq!(exps.len(), ambient_dim, "exponent vector length");
    assert!(ambient_dim >= 1, "ambient dimension must be positive");
    if exps.iter().any(|e| e % 2 == 1) {
        return BigRational::zero();
    }
    let n = ambient_dim as i64 - 1;
    let half_degree: u32 = exps.iter().sum::<u32>() / 2;
    let mut value = BigRational::one();
    for &e in exps {
        // i!/(i/2)! = (i/2 + 1)(i/2 + 2)…i
        for k in (e / 2 + 1)..=e {
            value *= int(k as i64);
        }
    }
    for m in 1..=half_degree as i64 {
        value /= int(2 * (n + 2 * m - 1));
    }
    value
}

/// `α_{2k} = 1/((−2)^k k! Π_{m=1}^k (n + 2m − 1))`, the reciprocal of `Δ^k rsq^k`.
fn alpha(k: u32, ambient_dim: usize) -> BigRational {
    let n = ambient_dim as i64 - 1;
    let mut denom = BigInt::one();
    for m in 1..=k as i64 {
        denom *= BigInt::from(-2 * m * (n + 2 * m - 1));
    }
    BigRational::new(BigInt::one(), denom)
}

fn check_dim(p: &RatPoly, ambient_dim: usize) -> Result<(), SphereError> {
    if p.nvars() == ambient_dim {
        Ok(())
    } else {
        Err(SphereError::DimensionMismatch {
            expected: ambient_dim,
            got: p.nvars(),
        })
    }
}

/// Integral of a homogeneous polynomial: zero for odd degree, otherwise
/// `α_d · Δ^{d/2} P`, where `Δ^{d/2} P` is a constant.
pub fn homogeneous_integral(p: &RatPoly, ambient_dim: usize) -> Result<BigRational, SphereError> {
    check_dim(p, ambient_dim)?;
    if !p.is_homogeneous() {
        return Err(SphereError::NotHomogeneous);
    }
    let Some(d) = p.degree() else {
        return Ok(BigRational::zero());
    };
    if d % 2 == 1 {
        return Ok(BigRational::zero());
    }
    let k = d / 2;
    let constant = p.laplacian_pow(k).coefficient(&vec![0; ambient_dim]);
    Ok(alpha(k, ambient_dim) * constant)
}

/// Integral of an arbitrary polynomial, summed over homogeneous parts.
pub fn polynomial_sphere_integral(
    p: &RatPoly,
    ambient_dim: usize,
) -> Result<BigRational, SphereError> {
    check_dim(p, ambient_dim)?;
    p.homogeneous_parts()
        .values()
        .map(|part| homogeneous_integral(part, ambient_dim))
        .sum()
}

/// Term-by-term route through [`monomial_integral`]; agrees with
/// [`polynomial_sphere_integral`].
pub fn termwise_sphere_integral(p: &RatPoly) -> BigRational {
    p.terms()
        .map(|(e, c)| c * monomial_integral(e, p.nvars()))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::exponents_of_degree;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn circle_table() {
        let table: [([u32; 2], (i64, i64)); 8] = [
            ([2, 0], (1, 2)),
            ([2, 2], (1, 8)),
            ([4, 0], (3, 8)),
            ([4, 2], (1, 16)),
            ([6, 0], (5, 16)),
            ([4, 4], (3, 128)),
            ([6, 2], (5, 128)),
            ([8, 0], (35, 128)),
        ];
        for (exps, (n, d)) in table {
            assert_eq!(monomial_integral(&exps, 2), r(n, d), "{exps:?}");
        }
        assert_eq!(monomial_integral(&[1, 2], 2), r(0, 1));
    }

    #[test]
    fn quadratic_and_quartic_moments() {
        for n in 2..=6usize {
            let mut e = vec![0; n];
            e[0] = 2;
            assert_eq!(monomial_integral(&e, n), r(1, n as i64));
            e[1] = 2;
            assert_eq!(monomial_integral(&e, n), r(1, (n * (n + 2)) as i64));
            let mut e4 = vec![0; n];
            e4[n - 1] = 4;
            assert_eq!(monomial_integral(&e4, n), r(3, (n * (n + 2)) as i64));
        }
    }

    #[test]
    fn homogeneous_examples() {
        let rsq = RatPoly::rsq(2);
        assert_eq!(homogeneous_integral(&rsq, 2).unwrap(), r(1, 1));
        let x0sq = RatPoly::parse("x0^2", 2).unwrap();
        assert_eq!(x0sq.laplacian().coefficient(&[0, 0]), r(-2, 1));
        assert_eq!(alpha(1, 2), r(-1, 4));
        assert_eq!(homogeneous_integral(&x0sq, 2).unwrap(), r(1, 2));
        assert_eq!(
            homogeneous_integral(&RatPoly::parse("x0^2 + x1", 2).unwrap(), 2),
            Err(SphereError::NotHomogeneous)
        );
        assert!(homogeneous_integral(&x0sq, 3).is_err());
    }

    #[test]
    fn general_polynomials() {
        assert_eq!(
            polynomial_sphere_integral(&RatPoly::constant(3, r(7, 1)), 3).unwrap(),
            r(7, 1)
        );
        // a20 x²/2 + a11 xy + a02 y²/2 integrates to (a20 + a02)/4
        let (a20, a11, a02) = (r(3, 1), r(-5, 2), r(7, 3));
        let f = RatPoly::from_terms(
            2,
            [
                (vec![2, 0], &a20 / r(2, 1)),
                (vec![1, 1], a11.clone()),
                (vec![0, 2], &a02 / r(2, 1)),
            ],
        );
        assert_eq!(
            polynomial_sphere_integral(&f, 2).unwrap(),
            (&a20 + &a02) / r(4, 1)
        );
        let sq = &f * &f;
        let expected = (r(3, 1) * &a20 * &a20
            + r(3, 1) * &a02 * &a02
            + r(4, 1) * &a11 * &a11
            + r(2, 1) * &a20 * &a02)
            / r(32, 1);
        assert_eq!(polynomial_sphere_integral(&sq, 2).unwrap(), expected);
    }

    #[test]
    fn monomial_and_laplacian_routes_agree() {
        for n in 2..=5usize {
            for d in 0..=8u32 {
                for e in exponents_of_degree(n, d) {
                    let m = RatPoly::monomial(n, e.clone(), BigRational::one());
                    assert_eq!(
                        homogeneous_integral(&m, n).unwrap(),
                        monomial_integral(&e, n),
                        "{e:?}"
                    );
                }
            }
        }
    }
}
