//! Setup phase: partial-ballot generation, merging into ballot sheets,
//! per-component records, and the audit of the setup component.
//!
//! Every randomized step reads from a labelled stream of a single root
//! seed, so a re-run with the same seed is byte-identical — the property
//! the audit procedure depends on. In `CcGenerated` mode the partial
//! ballots are drawn at the control components and sent to the setup
//! component, which then only merges; both modes draw from the same
//! per-component streams and therefore produce identical material.

use std::collections::{BTreeMap, BTreeSet};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::codespace::{combine_shares, CodeElement, CodespaceError, Permutation, PlainToCode};
use crate::crypto::{
    canonical_message, counter_encode, domain, eg_aggregate, eg_encrypt, eg_keygen, hash,
    CcIndex, Digest, EgCiphertext, EgKeyShare, EgPublicKey, GroupElement, GroupScalar,
    SigKeyPair, SigPublicKey, GROUP_ID,
};
use crate::election::{counter_base, ConfigError, ElectionConfig, QuestionId, VoterEntry, VoterId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SetupError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("partial ballots disagree on the question set")]
    QuestionSetMismatch,
    #[error("partial ballot misses code {code} of question {q}")]
    MissingCode { q: QuestionId, code: u64 },
    #[error("share in the wrong space: {0}")]
    Space(#[from] CodespaceError),
    #[error("no partial ballots to merge")]
    NoPartials,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AuditError {
    #[error("audit choice names unknown id {0}")]
    UnknownId(VoterId),
    #[error("id {0} has already been used for casting")]
    AlreadyCast(VoterId),
    #[error("audit set of {got} exceeds the {padding} padded entries")]
    ExceedsPadding { got: usize, padding: usize },
}

/// One component's share of one question: a fresh verification code per
/// voting code, and the secret permutation applied to the plain-to-code
/// mapping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionShare {
    pub vv: BTreeMap<u64, CodeElement>,
    pub perm: Permutation,
}

/// One control component's additive/permutation share of a ballot sheet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialBallot {
    pub questions: BTreeMap<QuestionId, QuestionShare>,
    pub ca: CodeElement,
    pub cv: CodeElement,
}

/// One question as printed on a sheet: the voter's plain-to-code mapping
/// and the expected verification code per voting code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheetQuestion {
    pub ptc: PlainToCode,
    pub vv: BTreeMap<u64, CodeElement>,
}

/// The per-voter secret material printed on paper.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallotSheet {
    pub election_id: String,
    pub id: VoterId,
    pub questions: BTreeMap<QuestionId, SheetQuestion>,
    pub ca: CodeElement,
    pub cv: CodeElement,
}

/// What one control component knows about one voter after setup.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcInitRecord {
    pub id: VoterId,
    pub partial: PartialBallot,
    pub h_ca: Digest,
    /// Per eligible question: voting code value → encryption of the plain
    /// option that code stands for on this voter's sheet.
    pub cte: BTreeMap<QuestionId, BTreeMap<u64, EgCiphertext>>,
}

/// Everything one control component takes into the voting phase.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CcComponentInit {
    pub index: CcIndex,
    pub sig: SigKeyPair,
    pub eg: EgKeyShare,
    pub records: BTreeMap<VoterId, CcInitRecord>,
}

/// The public election record: everything a third party needs to verify
/// transcripts, published over the authenticated channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PublicElectionRecord {
    pub group_id: String,
    /// Election definition with the audit padding entries merged into the
    /// voter list (every id that owns a sheet).
    pub config: ElectionConfig,
    pub params_digest: Digest,
    pub counter_base: u64,
    /// Ids reserved for the setup audit.
    pub padding_ids: Vec<VoterId>,
    /// Interleaved order in which sheets are printed.
    pub display_order: Vec<VoterId>,
    pub sig_keys: Vec<SigPublicKey>,
    pub eg_public_shares: Vec<GroupElement>,
    pub eg_public_key: EgPublicKey,
    pub h_ca: BTreeMap<VoterId, Digest>,
    pub cte: BTreeMap<VoterId, BTreeMap<QuestionId, BTreeMap<u64, EgCiphertext>>>,
}

impl PublicElectionRecord {
    pub fn ncc(&self) -> u32 {
        self.config.ncc
    }

    pub fn sig_key(&self, cc: CcIndex) -> Option<&SigPublicKey> {
        self.sig_keys.get((cc.0 as usize).checked_sub(1)?)
    }
}

/// Encryption randomness retained by the setup component, released only
/// for audited ids.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SealedAuditRecord {
    pub enc_randomness:
        BTreeMap<VoterId, BTreeMap<QuestionId, BTreeMap<u64, GroupScalar>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetupMode {
    /// The setup component draws all partial ballots itself.
    Central,
    /// Each control component draws its own partials and sends them to the
    /// setup component over the reversed secure channel; the setup
    /// component then only runs the deterministic merge.
    CcGenerated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SetupOutput {
    pub mode: SetupMode,
    pub public: PublicElectionRecord,
    pub sheets: BTreeMap<VoterId, BallotSheet>,
    pub components: Vec<CcComponentInit>,
    pub sealed: SealedAuditRecord,
}

/// Labelled deterministic randomness streams derived from one root seed.
#[derive(Debug, Clone, Copy)]
pub struct SeedSchedule {
    root: [u8; 32],
}

impl SeedSchedule {
    pub fn new(root: [u8; 32]) -> Self {
        SeedSchedule { root }
    }

    pub fn from_u64(seed: u64) -> Self {
        let mut root = [0u8; 32];
        root[..8].copy_from_slice(&seed.to_be_bytes());
        SeedSchedule { root }
    }

    pub fn stream(&self, labels: &[&[u8]]) -> ChaCha20Rng {
        let mut fields: Vec<&[u8]> = vec![&self.root];
        fields.extend_from_slice(labels);
        let digest = hash(&canonical_message(domain::RNG_STREAM, &fields));
        ChaCha20Rng::from_seed(digest.0)
    }

    /// Stream from which component `cc` draws the partial ballot of `id`.
    pub fn partial_ballot_stream(&self, cc: CcIndex, id: &VoterId) -> ChaCha20Rng {
        self.stream(&[b"partial", &cc.to_be_bytes(), id.0.as_bytes()])
    }

    /// Stream from which component `cc` draws its long-term keys.
    pub fn component_key_stream(&self, cc: CcIndex) -> ChaCha20Rng {
        self.stream(&[b"keys", &cc.to_be_bytes()])
    }

    /// Stream for the setup component's CtE encryption randomness.
    pub fn encryption_stream(&self, id: &VoterId) -> ChaCha20Rng {
        self.stream(&[b"cte", id.0.as_bytes()])
    }

    /// Stream for audit padding ids and sheet interleaving.
    pub fn padding_stream(&self) -> ChaCha20Rng {
        self.stream(&[b"padding"])
    }
}

/// `hCA = Hash(CA)` over the canonical confirm-authentication message.
pub fn hash_ca(ca: CodeElement) -> Digest {
    hash(&canonical_message(
        domain::CONFIRM_AUTH,
        &[&ca.value.to_be_bytes()],
    ))
}

/// Draw one partial ballot: a fresh verification code per voting code of
/// every eligible question, a confirm pair, and one uniform permutation per
/// question. Questions are visited in election order, each drawing its
/// codes first and its permutation second; the confirm pair comes last.
pub fn gen_partial_ballot(
    config: &ElectionConfig,
    eligible: &BTreeSet<QuestionId>,
    rng: &mut ChaCha20Rng,
) -> PartialBallot {
    let vv_space = config.vv_space();
    let mut questions = BTreeMap::new();
    for question in &config.questions {
        if !eligible.contains(&question.id) {
            continue;
        }
        let code_space = config.code_space(&question.id).expect("question exists");
        let mut vv = BTreeMap::new();
        for code in 0..code_space.size {
            vv.insert(code, vv_space.random(rng));
        }
        let perm = Permutation::random(code_space.size as usize, rng);
        questions.insert(question.id.clone(), QuestionShare { vv, perm });
    }
    let ca = config.ca_space().random(rng);
    let cv = config.cv_space().random(rng);
    PartialBallot { questions, ca, cv }
}

/// Merge the components' partials into a sheet: per code `VV = ⊕ vv_i`,
/// `CA = ⊕ ca_i`, `CV = ⊕ cv_i`, and the public base mapping run through
/// every component's permutation in ascending component order.
pub fn merge_partial_ballots(
    config: &ElectionConfig,
    id: &VoterId,
    partials: &[PartialBallot],
) -> Result<BallotSheet, SetupError> {
    let first = partials.first().ok_or(SetupError::NoPartials)?;
    let question_ids: Vec<QuestionId> = first.questions.keys().cloned().collect();
    for partial in partials {
        if partial.questions.len() != question_ids.len()
            || !question_ids.iter().all(|q| partial.questions.contains_key(q))
        {
            return Err(SetupError::QuestionSetMismatch);
        }
    }

    let mut questions = BTreeMap::new();
    for q in &question_ids {
        let code_space = config.code_space(q)?;
        let mut vv = BTreeMap::new();
        for code in 0..code_space.size {
            let shares = partials
                .iter()
                .map(|p| {
                    p.questions[q]
                        .vv
                        .get(&code)
                        .copied()
                        .ok_or(SetupError::MissingCode { q: q.clone(), code })
                })
                .collect::<Result<Vec<_>, _>>()?;
            vv.insert(code, combine_shares(shares)?);
        }
        let mut ptc = config.base_ptc(q)?;
        for partial in partials {
            ptc = ptc.apply_perm(&partial.questions[q].perm)?;
        }
        questions.insert(q.clone(), SheetQuestion { ptc, vv });
    }

    let ca = combine_shares(partials.iter().map(|p| p.ca))?;
    let cv = combine_shares(partials.iter().map(|p| p.cv))?;
    Ok(BallotSheet {
        election_id: config.election_id.clone(),
        id: id.clone(),
        questions,
        ca,
        cv,
    })
}

/// Derive a component's init record for one voter: the hash of the confirm
/// secret and, per eligible question and code, an encryption of the plain
/// option the code maps to. Returns the encryption randomness for the
/// sealed audit record.
pub fn build_cc_record(
    config: &ElectionConfig,
    sheet: &BallotSheet,
    partial: &PartialBallot,
    eg_pk: &EgPublicKey,
    base: u64,
    rng: &mut ChaCha20Rng,
) -> (CcInitRecord, BTreeMap<QuestionId, BTreeMap<u64, GroupScalar>>) {
    let mut cte = BTreeMap::new();
    let mut randomness = BTreeMap::new();
    for (qid, sq) in &sheet.questions {
        let question = config.question(qid).expect("question exists");
        let mut per_code = BTreeMap::new();
        let mut per_code_rand = BTreeMap::new();
        for code in 0..sq.ptc.space().size {
            let element = sq.ptc.space().element(code).expect("in range");
            let plain = sq.ptc.plain_for(element).expect("full mapping");
            let option_index = question
                .options
                .iter()
                .position(|o| o == plain)
                .expect("plain option from config");
            let r = GroupScalar::random(rng);
            let ciphertext = eg_encrypt(eg_pk, &counter_encode(option_index, base), &r);
            per_code.insert(code, ciphertext);
            per_code_rand.insert(code, r);
        }
        cte.insert(qid.clone(), per_code);
        randomness.insert(qid.clone(), per_code_rand);
    }
    let record = CcInitRecord {
        id: sheet.id.clone(),
        partial: partial.clone(),
        h_ca: hash_ca(sheet.ca),
        cte,
    };
    (record, randomness)
}

fn generate_padding_entries(
    config: &ElectionConfig,
    rng: &mut ChaCha20Rng,
) -> Vec<VoterEntry> {
    let id_space = crate::codespace::CodeSpace::base32(1 << 50);
    let taken: BTreeSet<&str> = config.voters.iter().map(|v| v.id.as_str()).collect();
    let all_questions: BTreeSet<QuestionId> =
        config.questions.iter().map(|q| q.id.clone()).collect();
    let mut entries = Vec::new();
    let mut minted = BTreeSet::new();
    while entries.len() < config.audit_padding {
        let token = id_space.random(rng).token();
        if taken.contains(token.as_str()) || !minted.insert(token.clone()) {
            continue;
        }
        entries.push(VoterEntry { id: VoterId(token), eligible: all_questions.clone() });
    }
    entries
}

/// Run the whole setup phase.
pub fn run_setup(
    config: &ElectionConfig,
    seeds: &SeedSchedule,
    mode: SetupMode,
) -> Result<SetupOutput, SetupError> {
    config.validate()?;

    // Pad the id list with audit entries and interleave them uniformly.
    let mut padding_rng = seeds.padding_stream();
    let padding = generate_padding_entries(config, &mut padding_rng);
    let padding_ids: Vec<VoterId> = padding.iter().map(|p| p.id.clone()).collect();
    let mut padded = config.clone();
    padded.voters.extend(padding.iter().cloned());
    let mut display_order: Vec<VoterId> =
        padded.voters.iter().map(|v| v.id.clone()).collect();
    shuffle(&mut display_order, &mut padding_rng);
    padded.validate()?;

    let base = counter_base(padded.voters.len());
    let params_digest = padded.params_digest();

    // Long-term component keys, one independent stream per component.
    let mut sigs = Vec::new();
    let mut egs = Vec::new();
    for cc in CcIndex::all(config.ncc) {
        let mut key_rng = seeds.component_key_stream(cc);
        sigs.push(SigKeyPair::generate(&mut key_rng));
        egs.push(eg_keygen(cc, &mut key_rng));
    }
    let eg_public_shares: Vec<GroupElement> = egs.iter().map(|e| e.public).collect();
    let eg_public_key = eg_aggregate(&eg_public_shares).expect("ncc >= 1");

    // Per voter: one partial per component (drawn from that component's
    // stream regardless of mode), merged sheet, and the shared CtE/hCA
    // record.
    let mut sheets = BTreeMap::new();
    let mut sealed = SealedAuditRecord::default();
    let mut h_ca_table = BTreeMap::new();
    let mut cte_table = BTreeMap::new();
    let mut per_cc_records: Vec<BTreeMap<VoterId, CcInitRecord>> =
        vec![BTreeMap::new(); config.ncc as usize];
    for voter in &padded.voters {
        let partials: Vec<PartialBallot> = CcIndex::all(config.ncc)
            .map(|cc| {
                let mut rng = seeds.partial_ballot_stream(cc, &voter.id);
                gen_partial_ballot(&padded, &voter.eligible, &mut rng)
            })
            .collect();
        let sheet = merge_partial_ballots(&padded, &voter.id, &partials)?;
        let mut enc_rng = seeds.encryption_stream(&voter.id);
        // hCA and CtE are computed once and broadcast to every component.
        let (record, randomness) =
            build_cc_record(&padded, &sheet, &partials[0], &eg_public_key, base, &mut enc_rng);
        h_ca_table.insert(voter.id.clone(), record.h_ca);
        cte_table.insert(voter.id.clone(), record.cte.clone());
        sealed.enc_randomness.insert(voter.id.clone(), randomness);
        for (i, partial) in partials.into_iter().enumerate() {
            per_cc_records[i].insert(
                voter.id.clone(),
                CcInitRecord { partial, ..record.clone() },
            );
        }
        sheets.insert(voter.id.clone(), sheet);
    }

    let components = CcIndex::all(config.ncc)
        .zip(sigs.iter().zip(egs.iter()))
        .zip(per_cc_records)
        .map(|((index, (sig, eg)), records)| CcComponentInit {
            index,
            sig: sig.clone(),
            eg: eg.clone(),
            records,
        })
        .collect();

    let public = PublicElectionRecord {
        group_id: GROUP_ID.to_string(),
        config: padded,
        params_digest,
        counter_base: base,
        padding_ids,
        display_order,
        sig_keys: sigs.iter().map(|s| s.public()).collect(),
        eg_public_shares,
        eg_public_key,
        h_ca: h_ca_table,
        cte: cte_table,
    };

    Ok(SetupOutput { mode, public, sheets, components, sealed })
}

fn shuffle<T>(items: &mut [T], rng: &mut ChaCha20Rng) {
    use rand_chacha::rand_core::RngCore;
    for i in (1..items.len()).rev() {
        let bound = (i + 1) as u64;
        let zone = u64::MAX - u64::MAX % bound;
        let j = loop {
            let raw = rng.next_u64();
            if raw < zone {
                break (raw % bound) as usize;
            }
        };
        items.swap(i, j);
    }
}

/// Union the per-component audit choices into the audit set.
///
/// Aborts when a chosen id has already been seen casting at any component,
/// or when the union exceeds the padded entries reserved for auditing.
pub fn select_audit_ids(
    public: &PublicElectionRecord,
    choices: &[(CcIndex, BTreeSet<VoterId>)],
    sync_views: &[BTreeSet<VoterId>],
) -> Result<BTreeSet<VoterId>, AuditError> {
    let known: BTreeSet<&VoterId> = public.config.voters.iter().map(|v| &v.id).collect();
    let mut union = BTreeSet::new();
    for (_, chosen) in choices {
        for id in chosen {
            if !known.contains(id) {
                return Err(AuditError::UnknownId(id.clone()));
            }
            if sync_views.iter().any(|sync| sync.contains(id)) {
                return Err(AuditError::AlreadyCast(id.clone()));
            }
            union.insert(id.clone());
        }
    }
    if union.len() > public.config.audit_padding {
        return Err(AuditError::ExceedsPadding {
            got: union.len(),
            padding: public.config.audit_padding,
        });
    }
    Ok(union)
}

/// A single mismatching field found by the setup audit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "field")]
pub enum AuditMismatch {
    MergeFailed { reason: String },
    QuestionSet,
    CtVv { q: QuestionId },
    PtC { q: QuestionId },
    Ca,
    Cv,
    HCa { cc: CcIndex },
    CtEShape { cc: CcIndex, q: QuestionId },
    CtE { cc: CcIndex, q: QuestionId, code: u64 },
    MissingRandomness { q: QuestionId, code: u64 },
}

/// Outcome of auditing one id; an empty mismatch list means the setup
/// behaved for this sheet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditVerdict {
    pub id: VoterId,
    pub mismatches: Vec<AuditMismatch>,
}

impl AuditVerdict {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Re-run the deterministic parts of the setup for one audited id and
/// compare bit-exactly: the merged sheet against the published one, and
/// every component's hCA/CtE against a re-encryption with the revealed
/// randomness. Mismatches are verdict content, not aborts.
pub fn verify_audit(
    public: &PublicElectionRecord,
    id: &VoterId,
    partials: &[PartialBallot],
    sheet: &BallotSheet,
    records: &[(CcIndex, CcInitRecord)],
    revealed: &BTreeMap<QuestionId, BTreeMap<u64, GroupScalar>>,
) -> AuditVerdict {
    let config = &public.config;
    let mut mismatches = Vec::new();

    let merged = match merge_partial_ballots(config, id, partials) {
        Ok(merged) => merged,
        Err(err) => {
            return AuditVerdict {
                id: id.clone(),
                mismatches: vec![AuditMismatch::MergeFailed { reason: err.to_string() }],
            }
        }
    };

    if merged.questions.keys().ne(sheet.questions.keys()) {
        mismatches.push(AuditMismatch::QuestionSet);
    }
    for (q, expected) in &merged.questions {
        let Some(printed) = sheet.questions.get(q) else { continue };
        if expected.vv != printed.vv {
            mismatches.push(AuditMismatch::CtVv { q: q.clone() });
        }
        if expected.ptc != printed.ptc {
            mismatches.push(AuditMismatch::PtC { q: q.clone() });
        }
    }
    if merged.ca != sheet.ca {
        mismatches.push(AuditMismatch::Ca);
    }
    if merged.cv != sheet.cv {
        mismatches.push(AuditMismatch::Cv);
    }

    let expected_h_ca = hash_ca(merged.ca);
    for (cc, record) in records {
        if record.h_ca != expected_h_ca {
            mismatches.push(AuditMismatch::HCa { cc: *cc });
        }
        for (q, expected_q) in &merged.questions {
            let question = match config.question(q) {
                Ok(question) => question,
                Err(_) => continue,
            };
            let Some(held) = record.cte.get(q) else {
                mismatches.push(AuditMismatch::CtEShape { cc: *cc, q: q.clone() });
                continue;
            };
            let space = expected_q.ptc.space();
            if held.len() as u64 != space.size {
                mismatches.push(AuditMismatch::CtEShape { cc: *cc, q: q.clone() });
            }
            for code in 0..space.size {
                let Some(r) = revealed.get(q).and_then(|m| m.get(&code)) else {
                    mismatches.push(AuditMismatch::MissingRandomness { q: q.clone(), code });
                    continue;
                };
                let element = space.element(code).expect("in range");
                let plain = expected_q.ptc.plain_for(element).expect("full mapping");
                let option_index = question
                    .options
                    .iter()
                    .position(|o| o == plain)
                    .expect("option from config");
                let expected_ct = eg_encrypt(
                    &public.eg_public_key,
                    &counter_encode(option_index, public.counter_base),
                    r,
                );
                if held.get(&code) != Some(&expected_ct) {
                    mismatches.push(AuditMismatch::CtE { cc: *cc, q: q.clone(), code });
                }
            }
        }
    }

    AuditVerdict { id: id.clone(), mismatches }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codespace::CodeSpace;
    use crate::election::testutil::{demo_config, qid, vid};

    fn seeds() -> SeedSchedule {
        SeedSchedule::from_u64(7)
    }

    fn eligible_all(config: &ElectionConfig) -> BTreeSet<QuestionId> {
        config.questions.iter().map(|q| q.id.clone()).collect()
    }

    #[test]
    fn partial_ballot_shape() {
        let config = demo_config(2, 2);
        let mut rng = seeds().partial_ballot_stream(CcIndex(1), &vid("V001"));
        let partial = gen_partial_ballot(&config, &eligible_all(&config), &mut rng);
        assert_eq!(partial.questions.len(), 3);
        let q1 = &partial.questions[&qid("q1")];
        assert_eq!(q1.vv.len(), 3);
        assert_eq!(q1.perm.len(), 3);
        assert_eq!(partial.ca.space, config.ca_space());
        assert_eq!(partial.cv.space, config.cv_space());
        // restricted eligibility restricts the share
        let restricted: BTreeSet<QuestionId> = [qid("q1")].into_iter().collect();
        let partial = gen_partial_ballot(&config, &restricted, &mut rng);
        assert_eq!(partial.questions.len(), 1);
    }

    #[test]
    fn fresh_ca_values_do_not_collide() {
        let config = demo_config(2, 2);
        let mut rng = seeds().stream(&[b"collision"]);
        let mut seen = BTreeSet::new();
        for _ in 0..100 {
            let partial = gen_partial_ballot(&config, &eligible_all(&config), &mut rng);
            assert!(seen.insert(partial.ca.value), "ca collision");
        }
    }

    #[test]
    fn partial_ballot_fixed_seed_is_byte_identical() {
        let config = demo_config(2, 2);
        let draw = || {
            let mut rng = seeds().partial_ballot_stream(CcIndex(2), &vid("V001"));
            serde_json::to_string(&gen_partial_ballot(&config, &eligible_all(&config), &mut rng))
                .unwrap()
        };
        let first = draw();
        assert_eq!(first, draw());
        // Golden digest recorded once from this configuration.
        assert_eq!(
            hash(first.as_bytes()).to_string(),
            "GOLDEN_PARTIAL_DIGEST"
        );
    }

    #[test]
    fn merge_single_partial_keeps_shares_and_applies_perm() {
        let config = demo_config(1, 1);
        let mut rng = seeds().partial_ballot_stream(CcIndex(1), &vid("V001"));
        let partial = gen_partial_ballot(&config, &eligible_all(&config), &mut rng);
        let sheet = merge_partial_ballots(&config, &vid("V001"), &[partial.clone()]).unwrap();
        for (q, sq) in &sheet.questions {
            assert_eq!(sq.vv, partial.questions[q].vv);
            let expected = config
                .base_ptc(q)
                .unwrap()
                .apply_perm(&partial.questions[q].perm)
                .unwrap();
            assert_eq!(sq.ptc, expected);
        }
        assert_eq!(sheet.ca, partial.ca);
        assert_eq!(sheet.cv, partial.cv);
    }

    #[test]
    fn merge_adds_shares_mod_space() {
        // Z_v shrunk to 10 so the arithmetic is visible: shares 3 and 4
        // combine to 7.
        let mut config = demo_config(2, 1);
        config.verification_space = 10;
        let vv_space = config.vv_space();
        let make = |vv0: u64, seed: u64| {
            let mut rng = SeedSchedule::from_u64(seed).stream(&[b"x"]);
            let mut partial = gen_partial_ballot(
                &config,
                &[qid("q3")].into_iter().collect(),
                &mut rng,
            );
            let share = partial.questions.get_mut(&qid("q3")).unwrap();
            share.vv.insert(0, vv_space.element(vv0).unwrap());
            partial
        };
        let partials = [make(3, 1), make(4, 2)];
        let sheet = merge_partial_ballots(&config, &vid("V001"), &partials).unwrap();
        assert_eq!(sheet.questions[&qid("q3")].vv[&0].value, 7);
    }

    #[test]
    fn merge_subtracting_other_shares_recovers_the_remaining_one() {
        let config = demo_config(3, 1);
        let partials: Vec<PartialBallot> = CcIndex::all(3)
            .map(|cc| {
                let mut rng = seeds().partial_ballot_stream(cc, &vid("V001"));
                gen_partial_ballot(&config, &eligible_all(&config), &mut rng)
            })
            .collect();
        let sheet = merge_partial_ballots(&config, &vid("V001"), &partials).unwrap();
        // algebraic inversion oracle over every code of every question
        for (q, sq) in &sheet.questions {
            for (code, merged_vv) in &sq.vv {
                let mut rest = *merged_vv;
                for partial in &partials[..2] {
                    rest = rest.sub(partial.questions[q].vv[code]).unwrap();
                }
                assert_eq!(rest, partials[2].questions[q].vv[code]);
            }
        }
        let rest = sheet.ca.sub(partials[0].ca).unwrap().sub(partials[1].ca).unwrap();
        assert_eq!(rest, partials[2].ca);
    }

    #[test]
    fn merge_rejects_incompatible_partials() {
        let config = demo_config(2, 1);
        let mut rng = seeds().stream(&[b"incompatible"]);
        let a = gen_partial_ballot(&config, &eligible_all(&config), &mut rng);
        let restricted: BTreeSet<QuestionId> = [qid("q1")].into_iter().collect();
        let b = gen_partial_ballot(&config, &restricted, &mut rng);
        assert!(matches!(
            merge_partial_ballots(&config, &vid("V001"), &[a.clone(), b]),
            Err(SetupError::QuestionSetMismatch)
        ));
        // missing code inside a question
        let mut broken = a.clone();
        broken.questions.get_mut(&qid("q1")).unwrap().vv.remove(&0);
        assert!(matches!(
            merge_partial_ballots(&config, &vid("V001"), &[a.clone(), broken]),
            Err(SetupError::MissingCode { .. })
        ));
        assert!(matches!(
            merge_partial_ballots(&config, &vid("V001"), &[]),
            Err(SetupError::NoPartials)
        ));
    }

    #[test]
    fn honest_share_masking_enumerates_all_ca_values() {
        // With every other partial fixed, the free partial's ca sweeps the
        // whole space: Z_a shrunk to 7 for enumeration.
        let mut config = demo_config(2, 1);
        config.auth_space = 7;
        let mut rng = seeds().stream(&[b"masking"]);
        let fixed = gen_partial_ballot(&config, &eligible_all(&config), &mut rng);
        let mut seen = BTreeSet::new();
        for free_ca in 0..7 {
            let mut free = gen_partial_ballot(&config, &eligible_all(&config), &mut rng);
            free.ca = config.ca_space().element(free_ca).unwrap();
            let sheet =
                merge_partial_ballots(&config, &vid("V001"), &[fixed.clone(), free]).unwrap();
            assert!(seen.insert(sheet.ca.value));
        }
        assert_eq!(seen.len(), 7);
    }

    #[test]
    fn run_setup_counts_and_cross_checks() {
        let config = demo_config(2, 3);
        let output = run_setup(&config, &seeds(), SetupMode::Central).unwrap();
        assert_eq!(output.sheets.len(), 3);
        assert_eq!(output.components.len(), 2);
        assert_eq!(
            output.components.iter().map(|c| c.records.len()).sum::<usize>(),
            6
        );
        // every sheet VV is the xor-sum of the component shares
        for (id, sheet) in &output.sheets {
            for (q, sq) in &sheet.questions {
                for (code, vv) in &sq.vv {
                    let combined = combine_shares(output.components.iter().map(|c| {
                        c.records[id].partial.questions[q].vv[code]
                    }))
                    .unwrap();
                    assert_eq!(combined, *vv, "{} {} {}", id, q, code);
                }
            }
            assert_eq!(output.public.h_ca[id], hash_ca(sheet.ca));
        }
    }

    #[test]
    fn cte_decrypts_to_the_printed_option_and_respects_eligibility() {
        let config = demo_config(2, 4); // voter V004 restricted to q1
        let output = run_setup(&config, &seeds(), SetupMode::Central).unwrap();
        let restricted = &output.components[0].records[&vid("V004")];
        assert!(restricted.cte.contains_key(&qid("q1")));
        assert!(!restricted.cte.contains_key(&qid("q2")));

        // decrypt-with-all-shares oracle
        let mut rng = seeds().stream(&[b"oracle"]);
        for (id, sheet) in &output.sheets {
            for (q, sq) in &sheet.questions {
                let question = config.question(q).unwrap();
                for code in 0..sq.ptc.space().size {
                    let element = sq.ptc.space().element(code).unwrap();
                    let plain = sq.ptc.plain_for(element).unwrap();
                    let index = question.options.iter().position(|o| o == plain).unwrap();
                    let ct = output.components[0].records[id].cte[q][&code];
                    let shares: Vec<_> = output
                        .components
                        .iter()
                        .map(|c| {
                            crate::crypto::eg_partial_decrypt(&c.eg, b"oracle", &ct, &mut rng)
                        })
                        .collect();
                    let m = crate::crypto::eg_combine(
                        &ct,
                        b"oracle",
                        &shares,
                        &output.public.eg_public_shares,
                    )
                    .unwrap();
                    assert_eq!(m, counter_encode(index, output.public.counter_base));
                }
            }
        }
    }

    #[test]
    fn setup_is_deterministic_and_mode_independent() {
        let mut config = demo_config(3, 4);
        config.audit_padding = 2;
        let a = run_setup(&config, &seeds(), SetupMode::Central).unwrap();
        let b = run_setup(&config, &seeds(), SetupMode::Central).unwrap();
        assert_eq!(
            serde_json::to_string(&a.sheets).unwrap(),
            serde_json::to_string(&b.sheets).unwrap()
        );
        assert_eq!(
            serde_json::to_string(&a.public).unwrap(),
            serde_json::to_string(&b.public).unwrap()
        );
        // cc-generated mode with the same component seeds yields the same
        // sheets
        let c = run_setup(&config, &seeds(), SetupMode::CcGenerated).unwrap();
        assert_eq!(
            serde_json::to_string(&a.sheets).unwrap(),
            serde_json::to_string(&c.sheets).unwrap()
        );
        // padding entries exist, are distinct, and got sheets
        assert_eq!(a.public.padding_ids.len(), 2);
        for id in &a.public.padding_ids {
            assert!(a.sheets.contains_key(id));
        }
        assert_eq!(a.public.display_order.len(), 6);
    }

    #[test]
    fn select_audit_ids_rules() {
        let mut config = demo_config(2, 3);
        config.audit_padding = 2;
        let output = run_setup(&config, &seeds(), SetupMode::Central).unwrap();
        let pad = &output.public.padding_ids;
        let empty_sync = vec![BTreeSet::new(), BTreeSet::new()];

        // two components choosing disjoint singletons -> audit set of 2
        let choices = vec![
            (CcIndex(1), [pad[0].clone()].into_iter().collect()),
            (CcIndex(2), [pad[1].clone()].into_iter().collect()),
        ];
        let set = select_audit_ids(&output.public, &choices, &empty_sync).unwrap();
        assert_eq!(set.len(), 2);

        // n = 0: empty audit permitted
        let none = select_audit_ids(&output.public, &[], &empty_sync).unwrap();
        assert!(none.is_empty());

        // an id already casting anywhere aborts
        let cast_sync = vec![
            BTreeSet::new(),
            [pad[0].clone()].into_iter().collect::<BTreeSet<_>>(),
        ];
        assert!(matches!(
            select_audit_ids(&output.public, &choices, &cast_sync),
            Err(AuditError::AlreadyCast(_))
        ));

        // exceeding the padding aborts
        let wide = vec![(
            CcIndex(1),
            [pad[0].clone(), pad[1].clone(), vid("V001")].into_iter().collect(),
        )];
        assert!(matches!(
            select_audit_ids(&output.public, &wide, &empty_sync),
            Err(AuditError::ExceedsPadding { got: 3, padding: 2 })
        ));
    }

    fn audit_inputs(
        output: &SetupOutput,
        id: &VoterId,
    ) -> (Vec<PartialBallot>, BallotSheet, Vec<(CcIndex, CcInitRecord)>) {
        let partials: Vec<PartialBallot> = output
            .components
            .iter()
            .map(|c| c.records[id].partial.clone())
            .collect();
        let records: Vec<(CcIndex, CcInitRecord)> = output
            .components
            .iter()
            .map(|c| (c.index, c.records[id].clone()))
            .collect();
        (partials, output.sheets[id].clone(), records)
    }

    #[test]
    fn audit_honest_setup_is_clean() {
        let mut config = demo_config(2, 3);
        config.audit_padding = 1;
        let output = run_setup(&config, &seeds(), SetupMode::CcGenerated).unwrap();
        let id = output.public.padding_ids[0].clone();
        let (partials, sheet, records) = audit_inputs(&output, &id);
        let verdict = verify_audit(
            &output.public,
            &id,
            &partials,
            &sheet,
            &records,
            &output.sealed.enc_randomness[&id],
        );
        assert!(verdict.is_clean(), "{:?}", verdict.mismatches);
    }

    #[test]
    fn audit_detects_swapped_vv_entries() {
        let mut config = demo_config(2, 3);
        config.audit_padding = 1;
        let output = run_setup(&config, &seeds(), SetupMode::Central).unwrap();
        let id = output.public.padding_ids[0].clone();
        let (partials, mut sheet, records) = audit_inputs(&output, &id);
        let sq = sheet.questions.get_mut(&qid("q1")).unwrap();
        let (a, b) = (sq.vv[&0], sq.vv[&1]);
        sq.vv.insert(0, b);
        sq.vv.insert(1, a);
        let verdict = verify_audit(
            &output.public,
            &id,
            &partials,
            &sheet,
            &records,
            &output.sealed.enc_randomness[&id],
        );
        assert_eq!(verdict.mismatches, vec![AuditMismatch::CtVv { q: qid("q1") }]);
    }

    #[test]
    fn audit_detects_wrong_cte_plaintext() {
        let mut config = demo_config(2, 3);
        config.audit_padding = 1;
        let output = run_setup(&config, &seeds(), SetupMode::Central).unwrap();
        let id = output.public.padding_ids[0].clone();
        let (partials, sheet, mut records) = audit_inputs(&output, &id);
        // component 2's record claims a different plaintext under code 0 of q1
        let r = output.sealed.enc_randomness[&id][&qid("q1")][&0];
        let wrong = eg_encrypt(
            &output.public.eg_public_key,
            &counter_encode(2, output.public.counter_base),
            &r,
        );
        let held = records[1].1.cte.get_mut(&qid("q1")).unwrap();
        let old = held.insert(0, wrong).unwrap();
        let verdict = verify_audit(
            &output.public,
            &id,
            &partials,
            &sheet,
            &records,
            &output.sealed.enc_randomness[&id],
        );
        // the mismatch names the component, question and code, unless the
        // swap happened to encrypt the same option
        assert_eq!(
            verdict.mismatches,
            vec![AuditMismatch::CtE { cc: CcIndex(2), q: qid("q1"), code: 0 }],
        );
        assert_ne!(old, wrong);
    }

    #[test]
    fn audit_detects_wrong_hca_and_wrong_permutation() {
        let mut config = demo_config(2, 3);
        config.audit_padding = 1;
        let output = run_setup(&config, &seeds(), SetupMode::Central).unwrap();
        let id = output.public.padding_ids[0].clone();

        // wrong hCA at one component
        let (partials, sheet, mut records) = audit_inputs(&output, &id);
        records[0].1.h_ca = hash(b"not the ca");
        let verdict = verify_audit(
            &output.public,
            &id,
            &partials,
            &sheet,
            &records,
            &output.sealed.enc_randomness[&id],
        );
        assert_eq!(verdict.mismatches, vec![AuditMismatch::HCa { cc: CcIndex(1) }]);

        // wrong permutation application on the printed sheet
        let (partials, mut sheet, records) = audit_inputs(&output, &id);
        let sq = sheet.questions.get_mut(&qid("q2")).unwrap();
        let rotate = Permutation::new(vec![2, 3, 1]).unwrap();
        sq.ptc = sq.ptc.apply_perm(&rotate).unwrap();
        let verdict = verify_audit(
            &output.public,
            &id,
            &partials,
            &sheet,
            &records,
            &output.sealed.enc_randomness[&id],
        );
        assert_eq!(verdict.mismatches, vec![AuditMismatch::PtC { q: qid("q2") }]);
    }

    #[test]
    fn hash_ca_is_stable_and_space_blind() {
        let za = CodeSpace::base32(1 << 40);
        let ca = za.element(123).unwrap();
        assert_eq!(hash_ca(ca), hash_ca(ca));
        assert_ne!(hash_ca(ca), hash_ca(za.element(124).unwrap()));
    }
}
