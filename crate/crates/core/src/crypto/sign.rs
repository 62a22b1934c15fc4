//! Ed25519 signatures with a signer identity tag, over canonically
//! serialized protocol messages.

use ed25519_dalek::{Signer, SigningKey, Verifier, VerifyingKey};
use serde::{Deserialize, Serialize};

use super::CcIndex;

/// Signing and verification key pair of one component.
#[derive(Debug, Clone)]
pub struct SigKeyPair {
    signing: SigningKey,
}

impl SigKeyPair {
    pub fn generate(rng: &mut (impl rand_core::RngCore + rand_core::CryptoRng)) -> Self {
        SigKeyPair { signing: SigningKey::generate(rng) }
    }

    pub fn public(&self) -> SigPublicKey {
        SigPublicKey(self.signing.verifying_key())
    }

    pub fn sign(&self, signer: CcIndex, message: &[u8]) -> Signature {
        Signature {
            signer,
            bytes: self.signing.sign(message).to_bytes().to_vec(),
        }
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        self.signing.to_bytes()
    }

    pub fn from_bytes(bytes: &[u8; 32]) -> Self {
        SigKeyPair { signing: SigningKey::from_bytes(bytes) }
    }
}

impl Serialize for SigKeyPair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(self.to_bytes()))
    }
}

impl<'de> Deserialize<'de> for SigKeyPair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        let bytes = hex::decode(&text).map_err(serde::de::Error::custom)?;
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| serde::de::Error::custom("signing key must be 32 bytes"))?;
        Ok(SigKeyPair::from_bytes(&arr))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SigPublicKey(VerifyingKey);

impl SigPublicKey {
    /// Verification never aborts: a malformed signature encoding simply
    /// fails to verify.
    pub fn verify(&self, message: &[u8], sig: &Signature) -> bool {
        let Ok(bytes) = <&[u8; 64]>::try_from(sig.bytes.as_slice()) else {
            return false;
        };
        let sig = ed25519_dalek::Signature::from_bytes(bytes);
        self.0.verify(message, &sig).is_ok()
    }
}

impl Serialize for SigPublicKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(self.0.to_bytes()))
    }
}

impl<'de> Deserialize<'de> for SigPublicKey {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        let bytes = hex::decode(&text).map_err(serde::de::Error::custom)?;
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| serde::de::Error::custom("public key must be 32 bytes"))?;
        VerifyingKey::from_bytes(&arr)
            .map(SigPublicKey)
            .map_err(serde::de::Error::custom)
    }
}

/// Signature bytes tagged with the claimed signer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub signer: CcIndex,
    #[serde(with = "hex_bytes")]
    pub bytes: Vec<u8>,
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        hex::decode(&text).map_err(serde::de::Error::custom)
    }
}
