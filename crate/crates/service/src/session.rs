//! Session state: one e-collection, a current level and a hash-chained
//! audit log. Everything here is synchronous and HTTP-agnostic.

use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use eclosure_core::engine::{audit_post_hoc_with, AuditedStep};
use eclosure_core::procedures::{self, RunOptions, DEFAULT_LAMBDA};
use eclosure_core::shortcuts::{critical_alpha_auto, member_auto, true_discovery_bound_auto, worst_case_largest};
use eclosure_core::values::{ascending_order, descending_order};
use eclosure_core::{
    AuditStep, ECollection, Engine, LossFunction, MembershipCertificate, Method, PostHocAudit, Subset, ValueKind,
    ValueVector,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ApiError, ApiResult};

/// Payload of `POST /sessions`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreateSession {
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ValueKind>,
    #[serde(with = "eclosure_core::serde_ext::reals")]
    pub values: Vec<f64>,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

/// A recorded session event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Event {
    Created { method: Method, alpha: f64, fingerprint: String },
    Query { loss: LossFunction, alpha: f64, set: Subset, certificate: MembershipCertificate },
    SwitchLoss { loss: LossFunction, alpha: f64, set: Subset, certificate: MembershipCertificate },
    SetAlpha { alpha: f64, largest: Subset },
    Finalize { loss: LossFunction, alpha: f64, set: Subset, certificate: MembershipCertificate, accepted: bool },
}

/// One audit log line. `certificate_id` is the SHA-256 of the previous id
/// followed by the JSON of `(seq, timestamp_ms, event)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seq: u64,
    pub timestamp_ms: u64,
    pub event: Event,
    pub prev: String,
    pub certificate_id: String,
}

#[derive(Serialize)]
struct EntryBody<'a> {
    seq: u64,
    timestamp_ms: u64,
    event: &'a Event,
}

fn chain_hash(prev: &str, seq: u64, timestamp_ms: u64, event: &Event) -> String {
    let body = serde_json::to_string(&EntryBody { seq, timestamp_ms, event }).expect("event serializes");
    let mut h = Sha256::new();
    h.update(prev.as_bytes());
    h.update(body.as_bytes());
    hex::encode(h.finalize())
}

pub fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

/// Session overview returned by create, get and set-alpha.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub id: String,
    pub method: Method,
    pub kind: ValueKind,
    pub m: usize,
    pub alpha: f64,
    pub alpha_adjustable: bool,
    pub largest: Subset,
    pub fwer_set: Subset,
    pub fwer_nonempty: bool,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "eclosure_core::serde_ext::opt_real")]
    pub critical_alpha: Option<f64>,
    pub fingerprint: String,
    pub finalized: usize,
    pub created_ms: u64,
    pub updated_ms: u64,
    #[serde(with = "eclosure_core::serde_ext::reals")]
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipResponse {
    pub loss: LossFunction,
    pub alpha: f64,
    pub set: Subset,
    pub certificate: MembershipCertificate,
    pub certificate_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalizeResponse {
    pub accepted: bool,
    pub certificate_id: String,
    pub step: AuditedStep,
    pub audit: PostHocAudit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditView {
    pub session: String,
    pub fingerprint: String,
    pub entries: Vec<AuditEntry>,
    pub finalized: PostHocAudit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResponse {
    pub set: Subset,
    pub alpha: f64,
    pub true_discovery_bound: usize,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "eclosure_core::serde_ext::opt_real")]
    pub critical_alpha: Option<f64>,
}

/// A live session.
#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub config: CreateSession,
    pub created_ms: u64,
    updated_ms: u64,
    values: ValueVector,
    collection: Arc<ECollection>,
    alpha: f64,
    finalized: Vec<AuditStep>,
    entries: Vec<AuditEntry>,
    engine: Engine,
}

fn build(config: &CreateSession) -> ApiResult<(ValueVector, Arc<ECollection>)> {
    if !config.method.is_closed() {
        return Err(ApiError::bad_request(format!(
            "sessions need a closed method, got {}",
            config.method
        )));
    }
    let kind = config.method.input_kind();
    if let Some(k) = config.kind {
        if k != kind {
            return Err(ApiError::bad_request(format!("{} expects {kind} values, got {k}", config.method)));
        }
    }
    let values = ValueVector::new(kind, config.values.clone())?;
    let opts = RunOptions { lambda: config.lambda.unwrap_or(DEFAULT_LAMBDA), ..RunOptions::default() };
    let result = procedures::run(config.method, &values, config.alpha, &opts)?;
    let collection = result.collection.ok_or_else(|| ApiError::bad_request("method produced no e-collection"))?;
    Ok((values, collection))
}

impl Session {
    /// Builds the collection and records the creation event.
    pub fn create(id: String, config: CreateSession, engine: Engine) -> ApiResult<(Session, AuditEntry)> {
        let (values, collection) = build(&config)?;
        let now = now_ms();
        let mut s = Session {
            id,
            alpha: config.alpha,
            config,
            created_ms: now,
            updated_ms: now,
            values,
            collection,
            finalized: Vec::new(),
            entries: Vec::new(),
            engine,
        };
        let event = Event::Created {
            method: s.config.method,
            alpha: s.alpha,
            fingerprint: s.collection.fingerprint(),
        };
        let entry = s.record(event, now);
        Ok((s, entry))
    }

    /// Rebuilds a session from its creation payload and audit log, checking
    /// the hash chain and recomputing every recorded verdict.
    pub fn replay(id: String, config: CreateSession, created_ms: u64, entries: Vec<AuditEntry>, engine: Engine) -> ApiResult<Session> {
        let (values, collection) = build(&config)?;
        let mut s = Session {
            id,
            alpha: config.alpha,
            config,
            created_ms,
            updated_ms: created_ms,
            values,
            collection,
            finalized: Vec::new(),
            entries: Vec::new(),
            engine,
        };
        for entry in entries {
            let expected_prev = s.entries.last().map(|e| e.certificate_id.clone()).unwrap_or_default();
            let hash = chain_hash(&entry.prev, entry.seq, entry.timestamp_ms, &entry.event);
            if entry.prev != expected_prev || hash != entry.certificate_id || entry.seq != s.entries.len() as u64 {
                return Err(ApiError::bad_request(format!("audit chain broken at entry {}", entry.seq)));
            }
            let mismatch = || ApiError::bad_request(format!("replay of entry {} disagrees with the log", entry.seq));
            match &entry.event {
                Event::Created { fingerprint, .. } => {
                    if *fingerprint != s.collection.fingerprint() {
                        return Err(mismatch());
                    }
                }
                Event::Query { loss, alpha, set, certificate } | Event::SwitchLoss { loss, alpha, set, certificate } => {
                    let again = s.certify(loss, *alpha, *set)?;
                    if again.member != certificate.member || again.witness != certificate.witness {
                        return Err(mismatch());
                    }
                }
                Event::SetAlpha { alpha, largest } => {
                    s.alpha = *alpha;
                    if s.largest(&LossFunction::Fdp, *alpha)? != *largest {
                        return Err(mismatch());
                    }
                }
                Event::Finalize { loss, alpha, set, certificate, accepted } => {
                    let step = AuditStep { loss: loss.clone(), alpha: *alpha, set: *set };
                    let (ok, cert, _) = s.check_finalize(&step)?;
                    if ok != *accepted || cert.member != certificate.member {
                        return Err(mismatch());
                    }
                    if ok {
                        s.finalized.push(step);
                    }
                }
            }
            s.updated_ms = entry.timestamp_ms;
            s.entries.push(entry);
        }
        Ok(s)
    }

    fn record(&mut self, event: Event, timestamp_ms: u64) -> AuditEntry {
        let seq = self.entries.len() as u64;
        let prev = self.entries.last().map(|e| e.certificate_id.clone()).unwrap_or_default();
        let certificate_id = chain_hash(&prev, seq, timestamp_ms, &event);
        let entry = AuditEntry { seq, timestamp_ms, event, prev, certificate_id };
        self.entries.push(entry.clone());
        self.updated_ms = timestamp_ms;
        entry
    }

    pub fn collection(&self) -> &ECollection {
        &self.collection
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn entries(&self) -> &[AuditEntry] {
        &self.entries
    }

    fn alpha_adjustable(&self) -> bool {
        self.collection.flags().alpha_independent
    }

    fn check_set(&self, set: Subset) -> ApiResult<()> {
        set.check_fits(self.values.m()).map_err(ApiError::from)
    }

    fn check_level(&self, alpha: f64) -> ApiResult<()> {
        eclosure_core::error::check_alpha(alpha)?;
        if alpha != self.alpha && !self.alpha_adjustable() {
            return Err(ApiError::alpha_locked(format!(
                "the {} collection depends on alpha = {}; it cannot be used at another level",
                self.collection.builder_name(),
                self.alpha
            )));
        }
        Ok(())
    }

    fn certify(&self, loss: &LossFunction, alpha: f64, set: Subset) -> ApiResult<MembershipCertificate> {
        Ok(member_auto(&self.engine, &self.collection, loss, alpha, set)?)
    }

    /// The natural ordering of the hypotheses: most significant first.
    fn ordering(&self) -> Vec<usize> {
        match self.values.kind() {
            ValueKind::Pvalue => ascending_order(self.values.values()),
            _ => descending_order(self.values.values()),
        }
    }

    /// FWER: union of singleton members. Other losses: longest member
    /// prefix of the natural ordering.
    fn largest(&self, loss: &LossFunction, alpha: f64) -> ApiResult<Subset> {
        if *loss == LossFunction::fwer() {
            let mut out = Subset::EMPTY;
            for i in 0..self.values.m() {
                if self.certify(&LossFunction::Fdp, alpha, Subset::singleton(i))?.member {
                    out = out.with(i);
                }
            }
            return Ok(out);
        }
        let order = self.ordering();
        let c = &self.collection;
        let set = if c.worst_case_order().is_some() {
            worst_case_largest(c, loss, alpha, &order, self.engine.policy)?
        } else {
            self.engine.largest_member(c, loss, alpha, &order, false)?
        };
        Ok(set)
    }

    pub fn summary(&self) -> ApiResult<Summary> {
        let largest = self.largest(&LossFunction::Fdp, self.alpha)?;
        let fwer_set = self.largest(&LossFunction::fwer(), self.alpha)?;
        let critical_alpha = if self.alpha_adjustable() {
            Some(critical_alpha_auto(&self.engine, &self.collection, &LossFunction::Fdp, largest)?)
        } else {
            None
        };
        Ok(Summary {
            id: self.id.clone(),
            method: self.config.method,
            kind: self.values.kind(),
            m: self.values.m(),
            alpha: self.alpha,
            alpha_adjustable: self.alpha_adjustable(),
            largest,
            fwer_set,
            fwer_nonempty: !fwer_set.is_empty(),
            critical_alpha,
            fingerprint: self.collection.fingerprint(),
            finalized: self.finalized.len(),
            created_ms: self.created_ms,
            updated_ms: self.updated_ms,
            values: self.values.values().to_vec(),
        })
    }

    /// Non-binding membership query.
    pub fn membership(&mut self, loss: LossFunction, set: Subset) -> ApiResult<(MembershipResponse, AuditEntry)> {
        self.check_set(set)?;
        let alpha = self.alpha;
        let certificate = self.certify(&loss, alpha, set)?;
        let event = Event::Query { loss: loss.clone(), alpha, set, certificate: certificate.clone() };
        let entry = self.record(event, now_ms());
        let resp = MembershipResponse { loss, alpha, set, certificate, certificate_id: entry.certificate_id.clone() };
        Ok((resp, entry))
    }

    /// The loss-specific set from the same collection.
    pub fn switch_loss(&mut self, loss: LossFunction) -> ApiResult<(MembershipResponse, AuditEntry)> {
        loss.validate()?;
        let alpha = self.alpha;
        let set = self.largest(&loss, alpha)?;
        let certificate = self.certify(&loss, alpha, set)?;
        let event = Event::SwitchLoss { loss: loss.clone(), alpha, set, certificate: certificate.clone() };
        let entry = self.record(event, now_ms());
        let resp = MembershipResponse { loss, alpha, set, certificate, certificate_id: entry.certificate_id.clone() };
        Ok((resp, entry))
    }

    /// Moves an α-independent session to a new level.
    pub fn set_alpha(&mut self, alpha: f64) -> ApiResult<(Summary, AuditEntry)> {
        eclosure_core::error::check_alpha(alpha)?;
        if !self.alpha_adjustable() {
            return Err(ApiError::alpha_locked(format!(
                "the {} collection depends on alpha; build a new session to change it",
                self.collection.builder_name()
            )));
        }
        let largest = self.largest(&LossFunction::Fdp, alpha)?;
        self.alpha = alpha;
        let entry = self.record(Event::SetAlpha { alpha, largest }, now_ms());
        Ok((self.summary()?, entry))
    }

    fn check_finalize(&self, step: &AuditStep) -> ApiResult<(bool, MembershipCertificate, PostHocAudit)> {
        let mut steps = self.finalized.clone();
        steps.push(step.clone());
        let audit = audit_post_hoc_with(&self.collection, &steps, |loss, alpha, set| {
            member_auto(&self.engine, &self.collection, loss, alpha, set)
        })?;
        let cert = audit.steps.last().expect("at least one step").certificate.clone();
        Ok((audit.passed, cert, audit))
    }

    /// Locks in a selection if it passes jointly with all earlier ones.
    pub fn finalize(&mut self, loss: LossFunction, set: Subset, alpha: Option<f64>) -> ApiResult<(FinalizeResponse, AuditEntry)> {
        self.check_set(set)?;
        loss.validate()?;
        let alpha = alpha.unwrap_or(self.alpha);
        self.check_level(alpha)?;
        let step = AuditStep { loss: loss.clone(), alpha, set };
        let (accepted, certificate, audit) = self.check_finalize(&step)?;
        if accepted {
            self.finalized.push(step.clone());
        }
        let event = Event::Finalize { loss, alpha, set, certificate: certificate.clone(), accepted };
        let entry = self.record(event, now_ms());
        let resp = FinalizeResponse {
            accepted,
            certificate_id: entry.certificate_id.clone(),
            step: AuditedStep { step, certificate },
            audit,
        };
        Ok((resp, entry))
    }

    /// Every log entry plus a fresh re-verification of the binding steps.
    pub fn audit(&self) -> ApiResult<AuditView> {
        let finalized = audit_post_hoc_with(&self.collection, &self.finalized, |loss, alpha, set| {
            member_auto(&self.engine, &self.collection, loss, alpha, set)
        })?;
        Ok(AuditView {
            session: self.id.clone(),
            fingerprint: self.collection.fingerprint(),
            entries: self.entries.clone(),
            finalized,
        })
    }

    /// True-discovery bound and, when α may vary, the critical level.
    pub fn bound(&self, set: Subset) -> ApiResult<BoundResponse> {
        self.check_set(set)?;
        let bound = true_discovery_bound_auto(&self.engine, &self.collection, self.alpha, set)?;
        let critical_alpha = if self.alpha_adjustable() {
            Some(critical_alpha_auto(&self.engine, &self.collection, &LossFunction::Fdp, set)?)
        } else {
            None
        };
        Ok(BoundResponse { set, alpha: self.alpha, true_discovery_bound: bound, critical_alpha })
    }
}
