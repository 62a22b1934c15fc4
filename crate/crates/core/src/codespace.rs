//! Finite code spaces, modular share arithmetic and permutation algebra.
//!
//! Every secret printed on a ballot sheet lives in a residue ring `Z_n`
//! with a fixed rendering into short printable tokens. Vote-verification
//! and confirm codes are additive shares in their ring; the plain-to-code
//! assignment is shared multiplicatively through permutations.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Errors raised by code-space and permutation operations. These are usage
/// errors: the protocol treats them as an abort of the current request.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CodespaceError {
    #[error("code spaces do not match: {0} vs {1}")]
    SpaceMismatch(CodeSpace, CodeSpace),
    #[error("empty share sequence")]
    EmptyShares,
    #[error("value {value} out of range for space of size {size}")]
    OutOfRange { value: u64, size: u64 },
    #[error("permutation sizes do not match: {0} vs {1}")]
    PermSizeMismatch(usize, usize),
    #[error("sequence of length {0} is not a permutation of 1..={1}")]
    NotAPermutation(usize, usize),
    #[error("invalid token {token:?}: {reason}")]
    BadToken { token: String, reason: String },
    #[error("no entry for {0:?} in mapping")]
    LookupMissing(String),
    #[error("multiple entries for {0:?} in mapping")]
    LookupAmbiguous(String),
    #[error("mapping is not a bijection onto the code space")]
    BadMapping,
}

/// Digits first, then uppercase letters: the canonical symbol alphabet for
/// voting-code tokens.
const CODE_ALPHABET: &[u8; 36] = b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
/// RFC 4648 base-32 alphabet, used for CA/CV tokens.
const BASE32_ALPHABET: &[u8; 32] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ234567";

/// How the elements of a space render into tokens.
///
/// Rendering is presentation only; the group structure is always `Z_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "style")]
pub enum TokenStyle {
    /// Voting codes: base-36 symbols (digits then letters), offset so codes
    /// differ across the questions of one sheet.
    Code { offset: u64 },
    /// Zero-padded decimal, used for vote-verification tokens.
    Decimal,
    /// Uppercase base-32 without padding, hyphen-grouped every 4 symbols,
    /// used for CA/CV tokens.
    Base32,
}

/// A finite code space `Z_n` together with its token rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CodeSpace {
    pub size: u64,
    #[serde(flatten)]
    pub style: TokenStyle,
}

impl fmt::Display for CodeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.style {
            TokenStyle::Code { offset } => write!(f, "Z_{}(code+{})", self.size, offset),
            TokenStyle::Decimal => write!(f, "Z_{}(dec)", self.size),
            TokenStyle::Base32 => write!(f, "Z_{}(b32)", self.size),
        }
    }
}

impl CodeSpace {
    /// Voting-code space for one question: `size` options, rendered from
    /// `offset` upwards so tokens differ across questions.
    pub fn codes(size: u64, offset: u64) -> Self {
        assert!(size >= 2, "code space needs at least two elements");
        CodeSpace { size, style: TokenStyle::Code { offset } }
    }

    /// Verification-code space (`Z_v`), zero-padded decimal tokens.
    pub fn decimal(size: u64) -> Self {
        assert!(size >= 2);
        CodeSpace { size, style: TokenStyle::Decimal }
    }

    /// Authentication / confirm-verification space, base-32 tokens.
    pub fn base32(size: u64) -> Self {
        assert!(size >= 2);
        CodeSpace { size, style: TokenStyle::Base32 }
    }

    /// Token width in symbols (hyphens not counted).
    pub fn token_width(&self) -> usize {
        match self.style {
            TokenStyle::Code { offset } => width_in_base(offset + self.size - 1, 36),
            TokenStyle::Decimal => width_in_base(self.size - 1, 10),
            TokenStyle::Base32 => width_in_base(self.size - 1, 32),
        }
    }

    pub fn element(&self, value: u64) -> Result<CodeElement, CodespaceError> {
        if value >= self.size {
            return Err(CodespaceError::OutOfRange { value, size: self.size });
        }
        Ok(CodeElement { space: *self, value })
    }

    /// Draw a uniform element using rejection sampling.
    pub fn random(&self, rng: &mut (impl rand_core::RngCore + ?Sized)) -> CodeElement {
        let zone = u64::MAX - u64::MAX % self.size;
        loop {
            let raw = rng.next_u64();
            if raw < zone {
                return CodeElement { space: *self, value: raw % self.size };
            }
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = CodeElement> + '_ {
        (0..self.size).map(|value| CodeElement { space: *self, value })
    }

    /// Render a raw value of this space into its canonical token.
    pub fn render(&self, value: u64) -> String {
        debug_assert!(value < self.size);
        let width = self.token_width();
        match self.style {
            TokenStyle::Code { offset } => render_in_base(value + offset, CODE_ALPHABET, width),
            TokenStyle::Decimal => render_in_base(value, &CODE_ALPHABET[..10], width),
            TokenStyle::Base32 => {
                let raw = render_in_base(value, BASE32_ALPHABET, width);
                group_hyphens(&raw)
            }
        }
    }

    /// Parse a token back into an element. Case-insensitive and
    /// hyphen-insensitive; anything else is rejected.
    pub fn parse(&self, token: &str) -> Result<CodeElement, CodespaceError> {
        let bad = |reason: &str| CodespaceError::BadToken {
            token: token.to_string(),
            reason: reason.to_string(),
        };
        let cleaned: String = token
            .chars()
            .filter(|c| *c != '-')
            .map(|c| c.to_ascii_uppercase())
            .collect();
        if cleaned.len() != self.token_width() {
            return Err(bad(&format!("expected {} symbols", self.token_width())));
        }
        let alphabet: &[u8] = match self.style {
            TokenStyle::Code { .. } => CODE_ALPHABET,
            TokenStyle::Decimal => &CODE_ALPHABET[..10],
            TokenStyle::Base32 => BASE32_ALPHABET,
        };
        let mut raw: u64 = 0;
        for ch in cleaned.bytes() {
            let digit = alphabet
                .iter()
                .position(|a| *a == ch)
                .ok_or_else(|| bad(&format!("symbol {:?} not in alphabet", ch as char)))?;
            raw = raw
                .checked_mul(alphabet.len() as u64)
                .and_then(|r| r.checked_add(digit as u64))
                .ok_or_else(|| bad("token overflows"))?;
        }
        let value = match self.style {
            TokenStyle::Code { offset } => raw
                .checked_sub(offset)
                .ok_or_else(|| bad("token below the question's code range"))?,
            _ => raw,
        };
        if value >= self.size {
            return Err(bad("token outside the space"));
        }
        Ok(CodeElement { space: *self, value })
    }
}

fn width_in_base(mut max: u64, base: u64) -> usize {
    let mut width = 1;
    while max >= base {
        max /= base;
        width += 1;
    }
    width
}

fn render_in_base(mut value: u64, alphabet: &[u8], width: usize) -> String {
    let base = alphabet.len() as u64;
    let mut out = vec![alphabet[0]; width];
    for slot in out.iter_mut().rev() {
        *slot = alphabet[(value % base) as usize];
        value /= base;
    }
    debug_assert_eq!(value, 0, "width too small for value");
    String::from_utf8(out).unwrap()
}

fn group_hyphens(raw: &str) -> String {
    if raw.len() <= 4 {
        return raw.to_string();
    }
    let chars: Vec<char> = raw.chars().collect();
    chars
        .chunks(4)
        .map(|c| c.iter().collect::<String>())
        .collect::<Vec<_>>()
        .join("-")
}

/// One element of a [`CodeSpace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CodeElement {
    pub space: CodeSpace,
    pub value: u64,
}

impl CodeElement {
    /// Modular addition `a ⊕ b` in the common space.
    pub fn add(self, other: CodeElement) -> Result<CodeElement, CodespaceError> {
        if self.space != other.space {
            return Err(CodespaceError::SpaceMismatch(self.space, other.space));
        }
        let value = (self.value + other.value) % self.space.size;
        Ok(CodeElement { space: self.space, value })
    }

    /// Modular subtraction, the inverse of [`CodeElement::add`].
    pub fn sub(self, other: CodeElement) -> Result<CodeElement, CodespaceError> {
        if self.space != other.space {
            return Err(CodespaceError::SpaceMismatch(self.space, other.space));
        }
        let value = (self.space.size + self.value - other.value) % self.space.size;
        Ok(CodeElement { space: self.space, value })
    }

    pub fn token(&self) -> String {
        self.space.render(self.value)
    }
}

/// Fold a nonempty share sequence with `⊕`. Order-independent.
pub fn combine_shares<I>(shares: I) -> Result<CodeElement, CodespaceError>
where
    I: IntoIterator<Item = CodeElement>,
{
    let mut iter = shares.into_iter();
    let first = iter.next().ok_or(CodespaceError::EmptyShares)?;
    iter.try_fold(first, |acc, share| acc.add(share))
}

/// A permutation of `{1..s}`, stored as the image list: position `i` of a
/// permuted sequence receives its value at position `mapping[i-1]⁻¹` — see
/// [`Permutation::compose`] for the operator this crate pins.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Vec<usize> {
        p.mapping
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = CodespaceError;
    fn try_from(mapping: Vec<usize>) -> Result<Self, Self::Error> {
        Permutation::new(mapping)
    }
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self, CodespaceError> {
        let s = mapping.len();
        let mut seen = vec![false; s];
        for &v in &mapping {
            if v == 0 || v > s || seen[v - 1] {
                return Err(CodespaceError::NotAPermutation(mapping.len(), s));
            }
            seen[v - 1] = true;
        }
        Ok(Permutation { mapping })
    }

    pub fn identity(s: usize) -> Self {
        Permutation { mapping: (1..=s).collect() }
    }

    /// Uniform random permutation (Fisher–Yates).
    pub fn random(s: usize, rng: &mut (impl rand_core::RngCore + ?Sized)) -> Self {
        assert!(s >= 1);
        let mut mapping: Vec<usize> = (1..=s).collect();
        for i in (1..s).rev() {
            // unbiased index in 0..=i
            let bound = (i + 1) as u64;
            let zone = u64::MAX - u64::MAX % bound;
            let j = loop {
                let raw = rng.next_u64();
                if raw < zone {
                    break (raw % bound) as usize;
                }
            };
            mapping.swap(i, j);
        }
        Permutation { mapping }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.mapping
    }

    /// The `*` operator on two permutations: the right operand moves the
    /// entry at position `i` of the left operand to position `q(i)`, so
    /// `[1,2,3] * [2,3,1] = [3,1,2]`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation, CodespaceError> {
        let moved = apply_to_slice(&self.mapping, other)?;
        Ok(Permutation { mapping: moved })
    }
}

/// Scatter `items` by `p`: the item at position `i` (1-based) moves to
/// position `p(i)`.
fn apply_to_slice<T: Clone>(items: &[T], p: &Permutation) -> Result<Vec<T>, CodespaceError> {
    if items.len() != p.len() {
        return Err(CodespaceError::PermSizeMismatch(items.len(), p.len()));
    }
    let mut out: Vec<Option<T>> = vec![None; items.len()];
    for (i, item) in items.iter().enumerate() {
        out[p.mapping[i] - 1] = Some(item.clone());
    }
    Ok(out.into_iter().map(|o| o.unwrap()).collect())
}

/// The per-voter ordered mapping from plain options to voting codes.
///
/// Invariants: plain options pairwise distinct, codes pairwise distinct, and
/// the code set is exactly the question's full code space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(String, CodeElement)>", into = "Vec<(String, CodeElement)>")]
pub struct PlainToCode {
    pairs: Vec<(String, CodeElement)>,
}

impl From<PlainToCode> for Vec<(String, CodeElement)> {
    fn from(d: PlainToCode) -> Self {
        d.pairs
    }
}

impl TryFrom<Vec<(String, CodeElement)>> for PlainToCode {
    type Error = CodespaceError;
    fn try_from(pairs: Vec<(String, CodeElement)>) -> Result<Self, Self::Error> {
        PlainToCode::new(pairs)
    }
}

impl PlainToCode {
    pub fn new(pairs: Vec<(String, CodeElement)>) -> Result<Self, CodespaceError> {
        if pairs.is_empty() {
            return Err(CodespaceError::BadMapping);
        }
        let space = pairs[0].1.space;
        if space.size != pairs.len() as u64 {
            return Err(CodespaceError::BadMapping);
        }
        let mut seen_code = vec![false; pairs.len()];
        for (plain, code) in &pairs {
            if code.space != space || code.value >= space.size || seen_code[code.value as usize] {
                return Err(CodespaceError::BadMapping);
            }
            seen_code[code.value as usize] = true;
            if pairs.iter().filter(|(p, _)| p == plain).count() != 1 {
                return Err(CodespaceError::BadMapping);
            }
        }
        Ok(PlainToCode { pairs })
    }

    /// The base mapping: option `i` paired with code value `i`, in order.
    pub fn base(space: CodeSpace, plains: &[String]) -> Result<Self, CodespaceError> {
        if plains.len() as u64 != space.size {
            return Err(CodespaceError::BadMapping);
        }
        let pairs = plains
            .iter()
            .enumerate()
            .map(|(i, p)| Ok((p.clone(), space.element(i as u64)?)))
            .collect::<Result<Vec<_>, CodespaceError>>()?;
        PlainToCode::new(pairs)
    }

    pub fn space(&self) -> CodeSpace {
        self.pairs[0].1.space
    }

    pub fn pairs(&self) -> &[(String, CodeElement)] {
        &self.pairs
    }

    /// Apply a permutation to the right column, left column unchanged:
    /// `[(1,a),(2,b),(3,c)] * [3,1,2] = [(1,b),(2,c),(3,a)]`.
    pub fn apply_perm(&self, p: &Permutation) -> Result<PlainToCode, CodespaceError> {
        let codes: Vec<CodeElement> = self.pairs.iter().map(|(_, c)| *c).collect();
        let moved = apply_to_slice(&codes, p)?;
        let pairs = self
            .pairs
            .iter()
            .zip(moved)
            .map(|((plain, _), code)| (plain.clone(), code))
            .collect();
        Ok(PlainToCode { pairs })
    }

    /// `c ←. (p, .) ∈ PtC`: the code paired with a plain option.
    pub fn code_for(&self, plain: &str) -> Result<CodeElement, CodespaceError> {
        let mut matches = self.pairs.iter().filter(|(p, _)| p == plain);
        let hit = matches
            .next()
            .ok_or_else(|| CodespaceError::LookupMissing(plain.to_string()))?;
        if matches.next().is_some() {
            return Err(CodespaceError::LookupAmbiguous(plain.to_string()));
        }
        Ok(hit.1)
    }

    /// Inverse lookup `c * PtC⁻¹`: the plain option paired with a code.
    pub fn plain_for(&self, code: CodeElement) -> Result<&str, CodespaceError> {
        let mut matches = self.pairs.iter().filter(|(_, c)| *c == code);
        let hit = matches
            .next()
            .ok_or_else(|| CodespaceError::LookupMissing(code.token()))?;
        if matches.next().is_some() {
            return Err(CodespaceError::LookupAmbiguous(code.token()));
        }
        Ok(&hit.0)
    }

    /// Position of a plain option in the (base) pair order.
    pub fn plain_index(&self, plain: &str) -> Result<usize, CodespaceError> {
        self.pairs
            .iter()
            .position(|(p, _)| p == plain)
            .ok_or_else(|| CodespaceError::LookupMissing(plain.to_string()))
    }
}
