//! Election definitions: questions with k-out-of-n choice rules, per-voter
//! eligibility, code-space parameters, and the digest binding all signed
//! messages to one election.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::codespace::{CodeSpace, PlainToCode};
use crate::crypto::{canonical_message, domain, hash, Digest};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Rendered voting codes start at "2" so they never collide with 0/1 and
/// stay distinct across the questions of one sheet.
const FIRST_CODE_OFFSET: u64 = 2;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("unsupported schema version {0}")]
    BadVersion(u32),
    #[error("duplicate question id {0}")]
    DuplicateQuestion(QuestionId),
    #[error("duplicate voter id {0}")]
    DuplicateVoter(VoterId),
    #[error("question {0}: needs at least two options")]
    TooFewOptions(QuestionId),
    #[error("question {q}: duplicate option {option:?}")]
    DuplicateOption { q: QuestionId, option: String },
    #[error("question {q}: choose must be between 1 and the option count, got {choose}")]
    BadChoose { q: QuestionId, choose: usize },
    #[error("question {q}: base code assignment is not a bijection")]
    BadBaseCodes { q: QuestionId },
    #[error("voter {0}: empty eligibility")]
    EmptyEligibility(VoterId),
    #[error("voter {v}: eligible for unknown question {q}")]
    UnknownQuestion { v: VoterId, q: QuestionId },
    #[error("component count must be at least 1")]
    BadNcc,
    #[error("{0} space must have at least two elements")]
    BadSpaceSize(&'static str),
    #[error("unknown question id {0}")]
    NoSuchQuestion(QuestionId),
}

/// Identifier of one voter, as printed inside the QR payload.
#[derive(
    Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct VoterId(pub String);

impl fmt::Display for VoterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl VoterId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Identifier of one question (ballot issue).
#[derive(
    Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct QuestionId(pub String);

impl fmt::Display for QuestionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: QuestionId,
    /// Question text as shown to the voter.
    pub text: String,
    /// Plain options, in tally order.
    pub options: Vec<String>,
    /// Number of options a voter must select (k of n).
    #[serde(default = "default_choose")]
    pub choose: usize,
    /// Base plain-to-code assignment before the component permutations are
    /// applied: option `i` gets code value `base_codes[i]`. Identity when
    /// absent. Public, so auditors can re-derive CtE.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_codes: Option<Vec<u64>>,
}

fn default_choose() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoterEntry {
    pub id: VoterId,
    /// Questions this voter may vote on.
    pub eligible: BTreeSet<QuestionId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectionConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    pub election_id: String,
    pub ncc: u32,
    pub questions: Vec<Question>,
    pub voters: Vec<VoterEntry>,
    /// Size of the verification-code space `Z_v` ("hard to guess").
    #[serde(default = "default_verification_space")]
    pub verification_space: u64,
    /// Size of the authentication-secret space `Z_a` ("hard to brute-force").
    #[serde(default = "default_auth_space")]
    pub auth_space: u64,
    /// Number of extra sheet entries reserved for the setup audit.
    #[serde(default)]
    pub audit_padding: usize,
}

fn default_version() -> u32 {
    CONFIG_SCHEMA_VERSION
}

fn default_verification_space() -> u64 {
    10_000
}

fn default_auth_space() -> u64 {
    1 << 40
}

/// Counter-encoding base for a given number of sheet entries: the smallest
/// power of 10 exceeding it, so decoded exponents read as decimal digits.
pub fn counter_base(sheet_entries: usize) -> u64 {
    let mut base = 10;
    while base <= sheet_entries as u64 {
        base *= 10;
    }
    base
}

impl ElectionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.version != CONFIG_SCHEMA_VERSION {
            return Err(ConfigError::BadVersion(self.version));
        }
        if self.ncc < 1 {
            return Err(ConfigError::BadNcc);
        }
        if self.verification_space < 2 {
            return Err(ConfigError::BadSpaceSize("verification"));
        }
        if self.auth_space < 2 {
            return Err(ConfigError::BadSpaceSize("authentication"));
        }
        let mut qids = BTreeSet::new();
        for q in &self.questions {
            if !qids.insert(q.id.clone()) {
                return Err(ConfigError::DuplicateQuestion(q.id.clone()));
            }
            if q.options.len() < 2 {
                return Err(ConfigError::TooFewOptions(q.id.clone()));
            }
            for option in &q.options {
                if q.options.iter().filter(|o| *o == option).count() != 1 {
                    return Err(ConfigError::DuplicateOption {
                        q: q.id.clone(),
                        option: option.clone(),
                    });
                }
            }
            if q.choose < 1 || q.choose > q.options.len() {
                return Err(ConfigError::BadChoose { q: q.id.clone(), choose: q.choose });
            }
            if let Some(codes) = &q.base_codes {
                let distinct: BTreeSet<&u64> = codes.iter().collect();
                if codes.len() != q.options.len()
                    || distinct.len() != codes.len()
                    || codes.iter().any(|c| *c >= q.options.len() as u64)
                {
                    return Err(ConfigError::BadBaseCodes { q: q.id.clone() });
                }
            }
        }
        let mut vids = BTreeSet::new();
        for v in &self.voters {
            if !vids.insert(v.id.clone()) {
                return Err(ConfigError::DuplicateVoter(v.id.clone()));
            }
            if v.eligible.is_empty() {
                return Err(ConfigError::EmptyEligibility(v.id.clone()));
            }
            for q in &v.eligible {
                if !qids.contains(q) {
                    return Err(ConfigError::UnknownQuestion {
                        v: v.id.clone(),
                        q: q.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn question(&self, id: &QuestionId) -> Result<&Question, ConfigError> {
        self.questions
            .iter()
            .find(|q| &q.id == id)
            .ok_or_else(|| ConfigError::NoSuchQuestion(id.clone()))
    }

    /// Voting-code space of a question: as many codes as options, rendered
    /// with a per-question offset so tokens differ across the sheet.
    pub fn code_space(&self, id: &QuestionId) -> Result<CodeSpace, ConfigError> {
        let mut offset = FIRST_CODE_OFFSET;
        for q in &self.questions {
            if &q.id == id {
                return Ok(CodeSpace::codes(q.options.len() as u64, offset));
            }
            offset += q.options.len() as u64;
        }
        Err(ConfigError::NoSuchQuestion(id.clone()))
    }

    /// `Z_v` as rendered on the per-code verification table.
    pub fn vv_space(&self) -> CodeSpace {
        CodeSpace::decimal(self.verification_space)
    }

    /// `Z_v` as rendered for the confirm-verification string.
    pub fn cv_space(&self) -> CodeSpace {
        CodeSpace::base32(self.verification_space)
    }

    /// `Z_a` for confirm-authentication secrets.
    pub fn ca_space(&self) -> CodeSpace {
        CodeSpace::base32(self.auth_space)
    }

    /// The public pre-permutation mapping of a question.
    pub fn base_ptc(&self, id: &QuestionId) -> Result<PlainToCode, ConfigError> {
        let q = self.question(id)?;
        let space = self.code_space(id)?;
        let pairs = match &q.base_codes {
            None => PlainToCode::base(space, &q.options)
                .map_err(|_| ConfigError::BadBaseCodes { q: id.clone() })?,
            Some(codes) => {
                let pairs = q
                    .options
                    .iter()
                    .zip(codes)
                    .map(|(o, c)| Ok((o.clone(), space.element(*c).map_err(|_| {
                        ConfigError::BadBaseCodes { q: id.clone() }
                    })?)))
                    .collect::<Result<Vec<_>, ConfigError>>()?;
                PlainToCode::new(pairs).map_err(|_| ConfigError::BadBaseCodes { q: id.clone() })?
            }
        };
        Ok(pairs)
    }

    /// Digest binding every signed message and transcript to this election.
    pub fn params_digest(&self) -> Digest {
        let mut fields: Vec<Vec<u8>> = vec![
            self.version.to_be_bytes().to_vec(),
            self.election_id.as_bytes().to_vec(),
            self.ncc.to_be_bytes().to_vec(),
            self.verification_space.to_be_bytes().to_vec(),
            self.auth_space.to_be_bytes().to_vec(),
            (self.audit_padding as u64).to_be_bytes().to_vec(),
        ];
        for q in &self.questions {
            fields.push(q.id.0.as_bytes().to_vec());
            fields.push(q.text.as_bytes().to_vec());
            fields.push((q.choose as u64).to_be_bytes().to_vec());
            let mut options = Vec::new();
            for (i, option) in q.options.iter().enumerate() {
                options.extend_from_slice(&(option.len() as u32).to_be_bytes());
                options.extend_from_slice(option.as_bytes());
                let code = q
                    .base_codes
                    .as_ref()
                    .map(|codes| codes[i])
                    .unwrap_or(i as u64);
                options.extend_from_slice(&code.to_be_bytes());
            }
            fields.push(options);
        }
        for v in &self.voters {
            fields.push(v.id.0.as_bytes().to_vec());
            let mut eligible = Vec::new();
            for q in &v.eligible {
                eligible.extend_from_slice(&(q.0.len() as u32).to_be_bytes());
                eligible.extend_from_slice(q.0.as_bytes());
            }
            fields.push(eligible);
        }
        let refs: Vec<&[u8]> = fields.iter().map(|f| f.as_slice()).collect();
        hash(&canonical_message(domain::ELECTION_PARAMS, &refs))
    }
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn demo_config_is_valid() {
        let config = demo_config(3, 5);
        config.validate().unwrap();
    }

    #[test]
    fn code_spaces_are_offset_per_question() {
        let config = demo_config(2, 2);
        let q1 = config.code_space(&qid("q1")).unwrap();
        let q2 = config.code_space(&qid("q2")).unwrap();
        let q3 = config.code_space(&qid("q3")).unwrap();
        assert_eq!(q1, CodeSpace::codes(3, 2));
        assert_eq!(q2, CodeSpace::codes(3, 5));
        assert_eq!(q3, CodeSpace::codes(2, 8));
        // question 1 tokens are 2..4
        let tokens: Vec<String> = q1.elements().map(|e| e.token()).collect();
        assert_eq!(tokens, ["2", "3", "4"]);
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut config = demo_config(2, 2);
        config.voters[1].id = config.voters[0].id.clone();
        assert!(matches!(config.validate(), Err(ConfigError::DuplicateVoter(_))));

        let mut config = demo_config(2, 2);
        config.questions[0].choose = 4;
        assert!(matches!(config.validate(), Err(ConfigError::BadChoose { .. })));

        let mut config = demo_config(2, 2);
        config.voters[0].eligible.clear();
        assert!(matches!(config.validate(), Err(ConfigError::EmptyEligibility(_))));

        let mut config = demo_config(2, 2);
        config.questions[0].base_codes = Some(vec![0, 0, 2]);
        assert!(matches!(config.validate(), Err(ConfigError::BadBaseCodes { .. })));
    }

    #[test]
    fn counter_base_exceeds_entry_count() {
        assert_eq!(counter_base(5), 10);
        assert_eq!(counter_base(9), 10);
        assert_eq!(counter_base(10), 100);
        assert_eq!(counter_base(42), 100);
        assert_eq!(counter_base(100), 1000);
    }

    #[test]
    fn params_digest_tracks_every_field() {
        let config = demo_config(2, 3);
        let base = config.params_digest();
        assert_eq!(base, demo_config(2, 3).params_digest());
        let mut changed = demo_config(2, 3);
        changed.questions[1].choose = 1;
        assert_ne!(base, changed.params_digest());
        let mut changed = demo_config(2, 3);
        changed.voters[0].eligible.remove(&qid("q2"));
        assert_ne!(base, changed.params_digest());
    }

    #[test]
    fn config_json_roundtrip_with_defaults() {
        let json = r#"{
            "election_id": "e9",
            "ncc": 2,
            "questions": [
                {"id": "q1", "text": "?", "options": ["A", "B"]}
            ],
            "voters": [
                {"id": "V1", "eligible": ["q1"]}
            ]
        }"#;
        let config: ElectionConfig = serde_json::from_str(json).unwrap();
        config.validate().unwrap();
        assert_eq!(config.questions[0].choose, 1);
        assert_eq!(config.verification_space, 10_000);
        assert_eq!(config.auth_space, 1 << 40);
        let back: ElectionConfig =
            serde_json::from_str(&serde_json::to_string(&config).unwrap()).unwrap();
        assert_eq!(config, back);
    }
}
