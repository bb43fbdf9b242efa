//! Quaternion scalars `w + xi + yj + zk` with Hamilton multiplication.
//!
//! Values are plain `Copy` data. Finiteness is checked where data enters the
//! algebra ([`Quaternion::try_new`], matrix constructors, ingestion), never in
//! the arithmetic itself.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    /// Checked constructor; rejects NaN and infinities.
    pub fn try_new(w: f64, x: f64, y: f64, z: f64) -> Result<Self> {
        let q = Quaternion::new(w, x, y, z);
        if q.is_finite() {
            Ok(q)
        } else {
            Err(Error::Validation(format!("non-finite quaternion {q}")))
        }
    }

    #[inline]
    pub const fn real(w: f64) -> Self {
        Quaternion::new(w, 0.0, 0.0, 0.0)
    }

    /// Pure quaternion `xi + yj + zk`.
    #[inline]
    pub const fn pure(x: f64, y: f64, z: f64) -> Self {
        Quaternion::new(0.0, x, y, z)
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn is_pure(&self) -> bool {
        self.w == 0.0
    }

    #[inline]
    pub fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    #[inline]
    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Norm of the vector part `xi + yj + zk`.
    #[inline]
    pub fn vector_norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    #[inline]
    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    #[inline]
    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    #[inline]
    pub fn from_array(a: [f64; 4]) -> Self {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }
}

/// Hamilton product. Operand order matters: `multiply(a, b) != multiply(b, a)` in general.
#[inline]
pub fn multiply(a: Quaternion, b: Quaternion) -> Quaternion {
    Quaternion {
        w: a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        x: a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        y: a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        z: a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    }
}

#[inline]
pub fn conjugate(q: Quaternion) -> Quaternion {
    q.conj()
}

#[inline]
pub fn norm(q: Quaternion) -> f64 {
    q.norm()
}

impl Mul for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, rhs: Quaternion) -> Quaternion {
        multiply(self, rhs)
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, rhs: f64) -> Quaternion {
        self.scale(rhs)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn add(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(self.w + rhs.w, self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl AddAssign for Quaternion {
    #[inline]
    fn add_assign(&mut self, rhs: Quaternion) {
        *self = *self + rhs;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn sub(self, rhs: Quaternion) -> Quaternion {
        Quaternion::new(self.w - rhs.w, self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl SubAssign for Quaternion {
    #[inline]
    fn sub_assign(&mut self, rhs: Quaternion) {
        *self = *self - rhs;
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i{:+}j{:+}k", self.w, self.x, self.y, self.z)
    }
}

impl Serialize for Quaternion {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Quaternion {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let a = <[f64; 4]>::deserialize(deserializer)?;
        Ok(Quaternion::from_array(a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const I: Quaternion = Quaternion::I;
    const J: Quaternion = Quaternion::J;
    const K: Quaternion = Quaternion::K;
    const ONE: Quaternion = Quaternion::ONE;

    #[test]
    fn basis_products() {
        assert_eq!(I * J, K);
        assert_eq!(J * I, -K);
        assert_eq!(J * K, I);
        assert_eq!(K * J, -I);
        assert_eq!(K * I, J);
        assert_eq!(I * K, -J);
        assert_eq!(I * I, -ONE);
        assert_eq!(J * J, -ONE);
        assert_eq!(K * K, -ONE);
        assert_eq!(I * J * K, -ONE);
        assert_ne!(I * J, J * I);
    }

    #[test]
    fn one_plus_i_times_one_plus_j() {
        let a = Quaternion::new(1.0, 1.0, 0.0, 0.0);
        let b = Quaternion::new(1.0, 0.0, 1.0, 0.0);
        assert_eq!(a * b, Quaternion::new(1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn conjugate_and_norm() {
        let q = Quaternion::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(conjugate(q), Quaternion::new(1.0, -2.0, -3.0, -4.0));
        assert_eq!(conjugate(conjugate(q)), q);
        assert_eq!(conjugate(Quaternion::real(2.5)), Quaternion::real(2.5));
        assert!((norm(q) - 30f64.sqrt()).abs() < 1e-15);
        assert_eq!(norm(Quaternion::ZERO), 0.0);
    }

    #[test]
    fn pure_predicate_and_checked_construction() {
        assert!(Quaternion::pure(1.0, 2.0, 3.0).is_pure());
        assert!(!Quaternion::new(1e-300, 0.0, 0.0, 0.0).is_pure());
        assert!(Quaternion::try_new(f64::NAN, 0.0, 0.0, 0.0).is_err());
        assert!(Quaternion::try_new(0.0, f64::INFINITY, 0.0, 0.0).is_err());
    }

    #[test]
    fn json_is_four_element_array() {
        let q = Quaternion::new(1.0, -2.0, 0.5, 4.0);
        let s = serde_json::to_string(&q).unwrap();
        assert_eq!(s, "[1.0,-2.0,0.5,4.0]");
        let back: Quaternion = serde_json::from_str(&s).unwrap();
        assert_eq!(back, q);
    }

    fn quat() -> impl Strategy<Value = Quaternion> {
        prop::array::uniform4(-10.0f64..10.0).prop_map(Quaternion::from_array)
    }

    proptest! {
        #[test]
        fn identity_element(q in quat()) {
            prop_assert_eq!(q * ONE, q);
            prop_assert_eq!(ONE * q, q);
        }

        #[test]
        fn conjugation_reverses_products(a in quat(), b in quat()) {
            let lhs = (a * b).conj();
            let rhs = b.conj() * a.conj();
            // Equal up to the summation order inside each component.
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (a.norm() * b.norm()).max(1e-300));
        }

        #[test]
        fn norm_is_multiplicative(a in quat(), b in quat()) {
            let lhs = (a * b).norm();
            let rhs = a.norm() * b.norm();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        }

        #[test]
        fn associativity(a in quat(), b in quat(), c in quat()) {
            let lhs = (a * b) * c;
            let rhs = a * (b * c);
            let scale = a.norm() * b.norm() * c.norm();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * scale.max(1e-300));
        }
    }
}
