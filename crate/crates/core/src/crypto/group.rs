//! Thin wrappers around the ristretto255 prime-order group.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use curve25519_dalek::constants::RISTRETTO_BASEPOINT_POINT;
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::Identity;
use serde::{Deserialize, Serialize};

/// Identifier embedded in transcripts so a verifier knows which group the
/// encodings belong to.
pub const GROUP_ID: &str = "ristretto255";

/// An exponent modulo the group order.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct GroupScalar(pub(crate) Scalar);

impl fmt::Debug for GroupScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupScalar({})", hex::encode(self.0.to_bytes()))
    }
}

impl GroupScalar {
    pub fn zero() -> Self {
        GroupScalar(Scalar::ZERO)
    }

    pub fn one() -> Self {
        GroupScalar(Scalar::ONE)
    }

    pub fn from_u64(v: u64) -> Self {
        GroupScalar(Scalar::from(v))
    }

    pub fn random(rng: &mut (impl rand_core::RngCore + rand_core::CryptoRng)) -> Self {
        GroupScalar(Scalar::random(rng))
    }

    /// Reduce 64 uniform bytes into a scalar (Fiat–Shamir challenges).
    pub fn from_wide_bytes(bytes: &[u8; 64]) -> Self {
        GroupScalar(Scalar::from_bytes_mod_order_wide(bytes))
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        self.0.to_bytes()
    }

    pub fn from_bytes(bytes: &[u8; 32]) -> Option<Self> {
        Option::<Scalar>::from(Scalar::from_canonical_bytes(*bytes)).map(GroupScalar)
    }
}

impl Add for GroupScalar {
    type Output = GroupScalar;
    fn add(self, rhs: GroupScalar) -> GroupScalar {
        GroupScalar(self.0 + rhs.0)
    }
}

impl Mul for GroupScalar {
    type Output = GroupScalar;
    fn mul(self, rhs: GroupScalar) -> GroupScalar {
        GroupScalar(self.0 * rhs.0)
    }
}

impl Serialize for GroupScalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(self.to_bytes()))
    }
}

impl<'de> Deserialize<'de> for GroupScalar {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        let bytes = hex::decode(&text).map_err(serde::de::Error::custom)?;
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| serde::de::Error::custom("scalar must be 32 bytes"))?;
        GroupScalar::from_bytes(&arr)
            .ok_or_else(|| serde::de::Error::custom("non-canonical scalar"))
    }
}

/// An element of ristretto255. Deserialization decompresses and therefore
/// checks group membership.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct GroupElement(pub(crate) RistrettoPoint);

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupElement({})", hex::encode(self.encoded()))
    }
}

impl GroupElement {
    pub fn generator() -> Self {
        GroupElement(RISTRETTO_BASEPOINT_POINT)
    }

    pub fn identity() -> Self {
        GroupElement(RistrettoPoint::identity())
    }

    pub fn is_identity(&self) -> bool {
        self.0 == RistrettoPoint::identity()
    }

    /// `g^e` for the fixed generator.
    pub fn generator_pow(e: &GroupScalar) -> Self {
        GroupElement(RISTRETTO_BASEPOINT_POINT * e.0)
    }

    /// Fixed-width compressed encoding.
    pub fn encoded(&self) -> [u8; 32] {
        self.0.compress().to_bytes()
    }

    pub fn from_encoded(bytes: &[u8; 32]) -> Option<Self> {
        CompressedRistretto(*bytes).decompress().map(GroupElement)
    }
}

impl Add for GroupElement {
    type Output = GroupElement;
    fn add(self, rhs: GroupElement) -> GroupElement {
        GroupElement(self.0 + rhs.0)
    }
}

impl Sub for GroupElement {
    type Output = GroupElement;
    fn sub(self, rhs: GroupElement) -> GroupElement {
        GroupElement(self.0 - rhs.0)
    }
}

impl Neg for GroupElement {
    type Output = GroupElement;
    fn neg(self) -> GroupElement {
        GroupElement(-self.0)
    }
}

impl Mul<GroupScalar> for GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: GroupScalar) -> GroupElement {
        GroupElement(self.0 * rhs.0)
    }
}

impl Serialize for GroupElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(self.encoded()))
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        let bytes = hex::decode(&text).map_err(serde::de::Error::custom)?;
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| serde::de::Error::custom("group element must be 32 bytes"))?;
        GroupElement::from_encoded(&arr)
            .ok_or_else(|| serde::de::Error::custom("not a valid group element"))
    }
}
