//! Scalar types the matrix layer is generic over.
//!
//! The isomorphism test itself only ever runs on [`BigUint`] entries, but the
//! matrix and spectral code is written once for any scalar that can do a
//! fused multiply-add. Fixed-width integers panic on overflow instead of
//! wrapping, and floats compare with a relative tolerance.

use std::fmt::Debug;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{FromPrimitive, One, Zero};

/// Relative tolerance used by [`Scalar::same`] for floating point scalars.
pub const FLOAT_REL_TOL: f64 = 1e-9;

pub trait Scalar: Clone + Debug + PartialEq + PartialOrd + Zero + One + FromPrimitive + Send + Sync {
    /// `self += a * b`.
    fn add_product(&mut self, a: &Self, b: &Self);

    /// `self += other`.
    fn add_assign_ref(&mut self, other: &Self);

    /// Number of significant bits of the magnitude. Zero has bit length 0.
    fn bit_len(&self) -> u64;

    /// Equality used when comparing diagonals. Exact for integers.
    fn same(&self, other: &Self) -> bool {
        self == other
    }

    fn is_non_negative(&self) -> bool {
        *self >= Self::zero()
    }

    /// Exact conversion to an unsigned big integer, when one exists.
    fn to_biguint(&self) -> Option<BigUint>;
}

impl Scalar for BigUint {
    fn add_product(&mut self, a: &Self, b: &Self) {
        // adjacency factors are almost always 0 or 1
        if a.is_zero() || b.is_zero() {
            return;
        }
        if b.is_one() {
            *self += a;
        } else if a.is_one() {
            *self += b;
        } else {
            *self += a * b;
        }
    }

    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }

    fn bit_len(&self) -> u64 {
        self.bits()
    }

    fn to_biguint(&self) -> Option<BigUint> {
        Some(self.clone())
    }
}

impl Scalar for BigInt {
    fn add_product(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *self += a * b;
    }

    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }

    fn bit_len(&self) -> u64 {
        self.bits()
    }

    fn to_biguint(&self) -> Option<BigUint> {
        match self.sign() {
            Sign::Minus => None,
            _ => Some(self.magnitude().clone()),
        }
    }
}

macro_rules! impl_scalar_int {
    ($($t:ty),*) => {$(
        impl Scalar for $t {
            fn add_product(&mut self, a: &Self, b: &Self) {
                let p = a.checked_mul(*b).expect(concat!(stringify!($t), " overflow in product"));
                *self = self.checked_add(p).expect(concat!(stringify!($t), " overflow in sum"));
            }

            fn add_assign_ref(&mut self, other: &Self) {
                *self = self.checked_add(*other).expect(concat!(stringify!($t), " overflow in sum"));
            }

            fn bit_len(&self) -> u64 {
                (u128::BITS - (*self as i128).unsigned_abs().leading_zeros()) as u64
            }

            fn to_biguint(&self) -> Option<BigUint> {
                BigUint::from_i128(*self as i128)
            }
        }
    )*};
}

impl_scalar_int!(u32, u64, i32, i64);

macro_rules! impl_scalar_float {
    ($($t:ty),*) => {$(
        impl Scalar for $t {
            fn add_product(&mut self, a: &Self, b: &Self) {
                *self = a.mul_add(*b, *self);
            }

            fn add_assign_ref(&mut self, other: &Self) {
                *self += *other;
            }

            fn bit_len(&self) -> u64 {
                let m = self.abs();
                if m < 1.0 || !m.is_finite() {
                    0
                } else {
                    m.log2().floor() as u64 + 1
                }
            }

            fn same(&self, other: &Self) -> bool {
                let scale = self.abs().max(other.abs()).max(1.0);
                ((*self - *other).abs() as f64) <= FLOAT_REL_TOL * scale as f64
            }

            fn to_biguint(&self) -> Option<BigUint> {
                if self.fract() == 0.0 && *self >= 0.0 {
                    BigUint::from_f64(*self as f64)
                } else {
                    None
                }
            }
        }
    )*};
}

impl_scalar_float!(f32, f64);
