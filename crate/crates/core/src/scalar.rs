//! Real scalar abstraction: f32 or f64.

use num_complex::Complex;

/// Real scalar the walk machinery is generic over.
///
/// `nalgebra::RealField` brings the linear algebra (and makes
/// `Complex<T>` a `ComplexField`), `num_traits::Float` the elementary
/// functions, `FromPrimitive` the conversion of pinned f64 tolerances.
pub trait RealScalar:
    num_traits::Float + num_traits::FromPrimitive + nalgebra::RealField + Default
{
    /// Shorthand for converting an exact f64 constant (tolerances, 1/2, ...).
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("constant representable in scalar type")
    }
}

impl RealScalar for f32 {}
impl RealScalar for f64 {}

/// Complex number over the generic real scalar.
pub type C<T> = Complex<T>;

/// Infinity norm of a complex slice (max modulus).
pub fn inf_norm<T: RealScalar>(v: &[C<T>]) -> T {
    v.iter()
        .map(|z| z.norm())
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

/// Infinity norm of the difference of two complex slices.
pub fn inf_norm_diff<T: RealScalar>(a: &[C<T>], b: &[C<T>]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(T::zero(), |m, d| if d > m { d } else { m })
}

/// Squared Euclidean norm of a complex slice.
pub fn norm_sq<T: RealScalar>(v: &[C<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inf_norm_picks_max_modulus() {
        let v = [C::new(3.0_f64, 4.0), C::new(0.0, 1.0)];
        assert_eq!(inf_norm(&v), 5.0);
        assert_eq!(inf_norm::<f64>(&[]), 0.0);
    }
}
