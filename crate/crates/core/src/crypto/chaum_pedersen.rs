//! Chaum–Pedersen proof of discrete-log equality, made non-interactive with
//! a Fiat–Shamir challenge so decryption transcripts verify offline.
//!
//! The prover shows knowledge of `x` with `pub_g = g^x` and `pub_u = u^x`
//! without revealing `x`; for ElGamal this proves a decryption share
//! `c1^x` was formed with the key share behind `h_i = g^x`.

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha512};

use super::group::{GroupElement, GroupScalar};
use super::{canonical_message, domain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChaumPedersenProof {
    /// Commitment `g^w`.
    pub commit_g: GroupElement,
    /// Commitment `u^w`.
    pub commit_u: GroupElement,
    /// Response `w + e·x`.
    pub response: GroupScalar,
}

fn challenge(
    context: &[u8],
    pub_g: &GroupElement,
    u_base: &GroupElement,
    pub_u: &GroupElement,
    commit_g: &GroupElement,
    commit_u: &GroupElement,
) -> GroupScalar {
    let statement = canonical_message(
        domain::CHAUM_PEDERSEN,
        &[
            context,
            &GroupElement::generator().encoded(),
            &pub_g.encoded(),
            &u_base.encoded(),
            &pub_u.encoded(),
            &commit_g.encoded(),
            &commit_u.encoded(),
        ],
    );
    let wide: [u8; 64] = Sha512::digest(&statement).into();
    GroupScalar::from_wide_bytes(&wide)
}

impl ChaumPedersenProof {
    pub fn prove(
        context: &[u8],
        secret: &GroupScalar,
        u_base: &GroupElement,
        rng: &mut (impl rand_core::RngCore + rand_core::CryptoRng),
    ) -> Self {
        let pub_g = GroupElement::generator_pow(secret);
        let pub_u = *u_base * *secret;
        let w = GroupScalar::random(rng);
        let commit_g = GroupElement::generator_pow(&w);
        let commit_u = *u_base * w;
        let e = challenge(context, &pub_g, u_base, &pub_u, &commit_g, &commit_u);
        ChaumPedersenProof {
            commit_g,
            commit_u,
            response: w + e * *secret,
        }
    }

    pub fn verify(
        &self,
        context: &[u8],
        pub_g: &GroupElement,
        u_base: &GroupElement,
        pub_u: &GroupElement,
    ) -> bool {
        let e = challenge(context, pub_g, u_base, pub_u, &self.commit_g, &self.commit_u);
        GroupElement::generator_pow(&self.response) == self.commit_g + *pub_g * e
            && *u_base * self.response == self.commit_u + *pub_u * e
    }
}
