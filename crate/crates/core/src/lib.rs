//! Code-voting election protocol with short per-option voting codes.
//!
//! A voter receives a paper ballot sheet carrying short voting codes (one per
//! option, assigned differently per voter), per-code vote-verification codes,
//! and a confirm-authentication / confirm-verification pair. The secret
//! material on the sheet is assembled from additive and permutation shares so
//! that no single control component learns it, and the voter's device only
//! ever forwards codes — never the plain vote.
//!
//! The crate is organized along the protocol phases:
//!
//! * [`codespace`] — residue-ring code spaces, share arithmetic, permutation
//!   algebra and the plain-to-code mapping.
//! * [`crypto`] — hashing, signatures, additively shared ElGamal over
//!   ristretto255, verifiable distributed decryption and counter-encoded
//!   plaintexts.
//! * [`election`] — election definitions (questions, eligibility, spaces).
//! * [`setup`] — partial-ballot generation, merging, per-component records,
//!   and the setup audit.
//! * [`sheet`] — printable and machine-readable ballot-sheet documents.
//! * [`control`] — the per-component cast/confirm state machine and the
//!   agreement rule for the tally input.
//! * [`voter`] — voter-side code selection and verification checks.
//! * [`tally`] — homomorphic aggregation, distributed decryption and the
//!   stand-alone transcript verifier.
//! * [`sim`] — deterministic in-process message bus with adversary hooks,
//!   plus the untrusted gateway logic.
//! * [`wire`] — JSON messages of the gateway API.

pub mod codespace;
pub mod control;
pub mod crypto;
pub mod election;
pub mod setup;
pub mod sheet;
pub mod sim;
pub mod tally;
pub mod voter;
pub mod wire;
