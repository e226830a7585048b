//! Floating-point abstraction shared by every module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumCast, ToPrimitive};

/// Real scalar the library is generic over. Implemented for `f32` and `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumCast + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Absolute tolerance used by the simplex and by containment tests.
    fn tolerance() -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Lossy conversion from a count.
    #[inline]
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("representable count")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-4
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }
}

/// Euclidean distance.
#[inline]
pub fn dist2<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .fold(T::zero(), |s, v| s + v)
        .sqrt()
}

/// Sup-norm distance.
#[inline]
pub fn dist_inf<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs())
        .fold(T::zero(), T::max)
}

/// Euclidean distance from `p` to the closed segment `[a, b]`.
pub fn dist_to_segment<T: Scalar>(p: &[T], a: &[T], b: &[T]) -> T {
    let mut ab2 = T::zero();
    let mut ap_ab = T::zero();
    for k in 0..p.len() {
        let ab = b[k] - a[k];
        ab2 = ab2 + ab * ab;
        ap_ab = ap_ab + (p[k] - a[k]) * ab;
    }
    if ab2 == T::zero() {
        return dist2(p, a);
    }
    let t = (ap_ab / ab2).max(T::zero()).min(T::one());
    let mut s = T::zero();
    for k in 0..p.len() {
        let q = a[k] + t * (b[k] - a[k]);
        s = s + (p[k] - q) * (p[k] - q);
    }
    s.sqrt()
}

/// Cubic smoothstep clamped to `[0, 1]`.
#[inline]
pub fn smoothstep<T: Scalar>(u: T) -> T {
    let u = u.max(T::zero()).min(T::one());
    u * u * (T::lit(3.0) - T::lit(2.0) * u)
}

/// Derivative of [`smoothstep`].
#[inline]
pub fn smoothstep_prime<T: Scalar>(u: T) -> T {
    if u <= T::zero() || u >= T::one() {
        T::zero()
    } else {
        T::lit(6.0) * u * (T::one() - u)
    }
}

/// Product of per-coordinate smoothsteps: 1 where `‖x − c‖∞ ≤ inner`, 0 where `‖x − c‖∞ ≥ outer`.
/// Returns the value and the gradient. Requires `outer > inner`.
pub fn box_bump<T: Scalar>(x: &[T], c: &[T], inner: T, outer: T) -> (T, Vec<T>) {
    let width = outer - inner;
    let d = x.len();
    let mut s = Vec::with_capacity(d);
    let mut ds = Vec::with_capacity(d);
    for k in 0..d {
        let u = (outer - (x[k] - c[k]).abs()) / width;
        s.push(smoothstep(u));
        ds.push(smoothstep_prime(u) / width);
    }
    let value = s.iter().copied().fold(T::one(), |a, b| a * b);
    let grad = (0..d)
        .map(|k| {
            if ds[k] == T::zero() {
                return T::zero();
            }
            let others = (0..d).filter(|&j| j != k).fold(T::one(), |a, j| a * s[j]);
            let sign = if x[k] < c[k] { T::one() } else { -T::one() };
            sign * ds[k] * others
        })
        .collect();
    (value, grad)
}

/// Euclidean norm.
pub fn norm2<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &x| a + x * x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_distance_endpoints_and_interior() {
        let a = [0.0_f64, 0.0];
        let b = [2.0, 0.0];
        assert_eq!(dist_to_segment(&[1.0, 1.0], &a, &b), 1.0);
        assert_eq!(dist_to_segment(&[3.0, 0.0], &a, &b), 1.0);
        assert_eq!(dist_to_segment(&[1.0, 0.0], &a, &b), 0.0);
    }

    #[test]
    fn smoothstep_is_clamped() {
        assert_eq!(smoothstep(-1.0_f64), 0.0);
        assert_eq!(smoothstep(2.0_f64), 1.0);
        assert_eq!(smoothstep(0.5_f64), 0.5);
        assert_eq!(smoothstep_prime(0.5_f64), 1.5);
    }

    #[test]
    fn f32_and_f64_agree_on_literals() {
        assert_eq!(<f32 as Scalar>::lit(0.25), 0.25_f32);
        assert_eq!(<f64 as Scalar>::of(7), 7.0);
    }

    #[test]
    fn bump_plateau_and_support() {
        let c = [0.0, 0.0];
        assert_eq!(box_bump(&[0.5, -0.5], &c, 0.5, 1.0), (1.0, vec![0.0, 0.0]));
        assert_eq!(box_bump(&[1.0, 0.0], &c, 0.5, 1.0).0, 0.0);
        let (v, g) = box_bump(&[0.75, 0.0], &c, 0.5, 1.0);
        assert!((v - 0.5).abs() < 1e-15);
        assert!((g[0] + 3.0).abs() < 1e-12 && g[1] == 0.0);
    }
}
