//! ElGamal over ristretto255 with additively shared keys.
//!
//! Every control component holds a key share `x_i` with public share
//! `h_i = g^{x_i}`; encryption runs against the aggregated key
//! `h = Π h_i`. Decryption needs one proven share per component.
//!
//! Tally plaintexts are counter-encoded: option `j` encrypts `g^(B^j)`, so
//! the product of all vote ciphertexts decrypts to `g^e` with
//! `e = Σ count_j · B^j`, and the per-option counts are the base-`B`
//! digits of `e`.

use serde::{Deserialize, Serialize};

use super::chaum_pedersen::ChaumPedersenProof;
use super::group::{GroupElement, GroupScalar};
use super::{CcIndex, CryptoError};

/// One component's ElGamal key share.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EgKeyShare {
    pub index: CcIndex,
    secret: GroupScalar,
    pub public: GroupElement,
}

impl EgKeyShare {
    #[cfg(test)]
    pub(crate) fn secret(&self) -> GroupScalar {
        self.secret
    }
}

/// The aggregated public key `h = Π g^{x_i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EgPublicKey {
    pub h: GroupElement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EgCiphertext {
    pub c1: GroupElement,
    pub c2: GroupElement,
}

impl EgCiphertext {
    /// The neutral ciphertext: an encryption of the group identity with
    /// zero randomness.
    pub fn one() -> Self {
        EgCiphertext { c1: GroupElement::identity(), c2: GroupElement::identity() }
    }

    /// Component-wise product; encrypts the product of the two messages.
    pub fn mul(&self, other: &EgCiphertext) -> EgCiphertext {
        EgCiphertext { c1: self.c1 + other.c1, c2: self.c2 + other.c2 }
    }

    /// Fixed-width encoding `c1 ‖ c2`, used in signed messages and for
    /// canonical ordering.
    pub fn encoded(&self) -> [u8; 64] {
        let mut out = [0u8; 64];
        out[..32].copy_from_slice(&self.c1.encoded());
        out[32..].copy_from_slice(&self.c2.encoded());
        out
    }
}

/// One component's decryption share `c1^{x_i}` with its proof of correctness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecryptionShare {
    pub index: CcIndex,
    pub share: GroupElement,
    pub proof: ChaumPedersenProof,
}

impl DecryptionShare {
    /// Check the share against the component's public key share and the
    /// ciphertext it claims to open.
    pub fn verify(&self, context: &[u8], public_share: &GroupElement, ct: &EgCiphertext) -> bool {
        self.proof.verify(context, public_share, &ct.c1, &self.share)
    }
}

pub fn eg_keygen(
    index: CcIndex,
    rng: &mut (impl rand_core::RngCore + rand_core::CryptoRng),
) -> EgKeyShare {
    let secret = GroupScalar::random(rng);
    EgKeyShare { index, public: GroupElement::generator_pow(&secret), secret }
}

/// Aggregate the public parts of all shares into the election key.
pub fn eg_aggregate(public_shares: &[GroupElement]) -> Result<EgPublicKey, CryptoError> {
    if public_shares.is_empty() {
        return Err(CryptoError::EmptyShares);
    }
    let h = public_shares
        .iter()
        .fold(GroupElement::identity(), |acc, share| acc + *share);
    Ok(EgPublicKey { h })
}

/// `Enc(pk, r, m) = (g^r, m · h^r)`.
pub fn eg_encrypt(pk: &EgPublicKey, m: &GroupElement, r: &GroupScalar) -> EgCiphertext {
    EgCiphertext { c1: GroupElement::generator_pow(r), c2: *m + pk.h * *r }
}

/// Produce this component's decryption share with a Chaum–Pedersen proof
/// that it matches the public key share.
pub fn eg_partial_decrypt(
    key: &EgKeyShare,
    context: &[u8],
    ct: &EgCiphertext,
    rng: &mut (impl rand_core::RngCore + rand_core::CryptoRng),
) -> DecryptionShare {
    DecryptionShare {
        index: key.index,
        share: ct.c1 * key.secret,
        proof: ChaumPedersenProof::prove(context, &key.secret, &ct.c1, rng),
    }
}

/// Combine all `Ncc` proven shares: `m = c2 / Π shares`.
///
/// Aborts naming the offending component on a missing index, a duplicate
/// index, or a failing proof.
pub fn eg_combine(
    ct: &EgCiphertext,
    context: &[u8],
    shares: &[DecryptionShare],
    public_shares: &[GroupElement],
) -> Result<GroupElement, CryptoError> {
    let ncc = public_shares.len() as u32;
    let mut seen: Vec<Option<&DecryptionShare>> = vec![None; ncc as usize];
    for share in shares {
        let i = share.index.0;
        if i == 0 || i > ncc {
            return Err(CryptoError::UnknownComponent(i));
        }
        if seen[(i - 1) as usize].replace(share).is_some() {
            return Err(CryptoError::DuplicateComponent(i));
        }
    }
    let mut sum = GroupElement::identity();
    for i in 1..=ncc {
        let share = seen[(i - 1) as usize].ok_or(CryptoError::MissingComponent(i))?;
        if !share.verify(context, &public_shares[(i - 1) as usize], ct) {
            return Err(CryptoError::BadShareProof(i));
        }
        sum = sum + share.share;
    }
    Ok(ct.c2 - sum)
}

/// Counter-encode option `j`: `g^(B^j)`.
pub fn counter_encode(option_index: usize, base: u64) -> GroupElement {
    let exponent = base
        .checked_pow(option_index as u32)
        .expect("counter base power overflows u64");
    GroupElement::generator_pow(&GroupScalar::from_u64(exponent))
}

/// Read per-option counts off an aggregated plaintext `m = g^e` by bounded
/// search for `e`, then base-`B` digit decomposition.
///
/// `max_count` bounds every per-option count (no option can receive more
/// votes than there are aggregated ballots).
pub fn counter_decode(
    m: &GroupElement,
    base: u64,
    num_options: usize,
    max_count: u64,
) -> Result<Vec<u64>, CryptoError> {
    assert!(base > max_count, "counter base must exceed the vote bound");
    let mut bound: u64 = 0;
    for j in 0..num_options {
        bound += max_count
            * base.checked_pow(j as u32).expect("counter base power overflows u64");
    }
    let generator = GroupElement::generator();
    let mut acc = GroupElement::identity();
    let mut exponent = None;
    for e in 0..=bound {
        if acc == *m {
            exponent = Some(e);
            break;
        }
        acc = acc + generator;
    }
    let mut e = exponent.ok_or(CryptoError::NoExponentInRange)?;
    let mut counts = Vec::with_capacity(num_options);
    for j in 0..num_options {
        let digit = e % base;
        if digit > max_count {
            return Err(CryptoError::CountOutOfRange(j));
        }
        counts.push(digit);
        e /= base;
    }
    if e != 0 {
        return Err(CryptoError::NoExponentInRange);
    }
    Ok(counts)
}
