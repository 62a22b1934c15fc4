//! Cryptographic primitives: hashing, signatures, additively shared ElGamal
//! over ristretto255, and proofs of correct decryption.
//!
//! All signed or hashed protocol messages go through one canonical
//! length-prefixed field encoding so no two distinct messages can serialize
//! to the same bytes.

mod chaum_pedersen;
mod elgamal;
mod group;
mod sign;

pub use chaum_pedersen::ChaumPedersenProof;
pub use elgamal::{
    counter_decode, counter_encode, eg_aggregate, eg_combine, eg_encrypt, eg_keygen,
    eg_partial_decrypt, DecryptionShare, EgCiphertext, EgKeyShare, EgPublicKey,
};
pub use group::{GroupElement, GroupScalar, GROUP_ID};
pub use sign::{SigKeyPair, SigPublicKey, Signature};

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CryptoError {
    #[error("no key shares supplied")]
    EmptyShares,
    #[error("missing decryption share from component {0}")]
    MissingComponent(u32),
    #[error("duplicate decryption share from component {0}")]
    DuplicateComponent(u32),
    #[error("decryption share from unknown component {0}")]
    UnknownComponent(u32),
    #[error("decryption share proof from component {0} does not verify")]
    BadShareProof(u32),
    #[error("no plaintext exponent in the tally range; a non-vote ciphertext entered the tally")]
    NoExponentInRange,
    #[error("decoded count for option {0} exceeds the voter bound")]
    CountOutOfRange(usize),
    #[error("invalid encoding: {0}")]
    BadEncoding(String),
}

/// Index of a control component, `1..=Ncc`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct CcIndex(pub u32);

impl fmt::Display for CcIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CC{}", self.0)
    }
}

impl CcIndex {
    pub fn all(ncc: u32) -> impl Iterator<Item = CcIndex> {
        (1..=ncc).map(CcIndex)
    }

    pub fn to_be_bytes(self) -> [u8; 4] {
        self.0.to_be_bytes()
    }
}

/// Domain-separation tags for [`canonical_message`].
pub mod domain {
    /// Signature over a cast announcement `(Id, E)`.
    pub const CAST_VOTE: u8 = 0x01;
    /// Hash of a confirm-authentication value (`hCA`).
    pub const CONFIRM_AUTH: u8 = 0x02;
    /// Fiat–Shamir challenge of a Chaum–Pedersen transcript.
    pub const CHAUM_PEDERSEN: u8 = 0x03;
    /// Digest of the public election parameters.
    pub const ELECTION_PARAMS: u8 = 0x04;
    /// Derivation of per-task randomness streams from a root seed.
    pub const RNG_STREAM: u8 = 0x05;
}

/// Canonical message serialization:
/// `domain (1 byte) ‖ field count (1 byte) ‖ per field: 4-byte BE length ‖ bytes`.
pub fn canonical_message(domain: u8, fields: &[&[u8]]) -> Vec<u8> {
    assert!(fields.len() <= u8::MAX as usize, "too many fields");
    let mut out =
        Vec::with_capacity(2 + fields.iter().map(|f| 4 + f.len()).sum::<usize>());
    out.push(domain);
    out.push(fields.len() as u8);
    for field in fields {
        out.extend_from_slice(&u32::try_from(field.len()).expect("field too long").to_be_bytes());
        out.extend_from_slice(field);
    }
    out
}

/// 32-byte SHA-256 output.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Digest(pub [u8; 32]);

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", hex::encode(self.0))
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl Serialize for Digest {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(self.0))
    }
}

impl<'de> Deserialize<'de> for Digest {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        let bytes = hex::decode(&text).map_err(serde::de::Error::custom)?;
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| serde::de::Error::custom("digest must be 32 bytes"))?;
        Ok(Digest(arr))
    }
}

/// SHA-256 of a byte string.
pub fn hash(message: &[u8]) -> Digest {
    let mut hasher = Sha256::new();
    hasher.update(message);
    Digest(hasher.finalize().into())
}
