use std::collections::{BTreeMap, BTreeSet};

use chrono::FixedOffset;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fraction::{random_partition, refresh_persistent, Partition};
use super::log::{ActivityEntry, ActivityLog};
use super::parts::{content_parts, resolve_payload, ContentError, Part, PartKind, Payload};
use super::Catalog;
use crate::model::*;
use crate::osc::{OscArg, OscMessage, OscRouter};
use crate::timing::{self, Schedule, Scheduler, TimingError};

pub type ConnectionId = u64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Performer {
    pub nickname: String,
    pub role: String,
    pub connection: ConnectionId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_ip: Option<String>,
    /// Client `local - server` offset as last reported.
    pub clock_offset_ms: i64,
    pub present: bool,
    /// Starts as the role's flags; changed by `change_functionality`.
    pub capabilities: CapabilitySet,
    pub test_mode: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interface: Option<ObjectId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinRequest {
    pub nickname: String,
    pub role: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passcode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_ip: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VenueError {
    #[error("wrong or missing passcode")]
    Passcode,
    #[error("performance {0} has ended")]
    Gone(String),
    #[error("no live performance named {0}")]
    NotFound(String),
    #[error("role {0} is full")]
    Capacity(String),
    #[error("nickname {0} is taken")]
    NicknameTaken(String),
    #[error("a nickname is required")]
    NicknameRequired,
    #[error("role {0} does not exist in this venue")]
    UnknownRole(String),
    #[error("a local ip is required to join")]
    LocalIpRequired,
    #[error("a live performance named {0} already exists")]
    DuplicateName(String),
    #[error("{0} is not in the performance")]
    UnknownPerformer(String),
    #[error("{nickname} lacks {capability}")]
    CapabilityDenied { nickname: String, capability: Capability },
    #[error("no recipients designated")]
    NoDesignation,
    #[error("nothing to send")]
    NoPayload,
    #[error("no performer can receive this: {}", describe(.0))]
    NoTargets(Vec<Rejection>),
    #[error(transparent)]
    Content(#[from] ContentError),
    #[error("{0} belongs to a different venue")]
    WrongVenue(ObjectId),
    #[error("{id} is not {expected}")]
    WrongKind { id: ObjectId, expected: &'static str },
    #[error("the group to divide is empty")]
    EmptyGroup,
    #[error(transparent)]
    Timing(#[from] TimingError),
}

impl VenueError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Self::Passcode => "passcode",
            Self::Gone(_) => "gone",
            Self::NotFound(_) => "not_found",
            Self::Capacity(_) => "capacity",
            Self::NicknameTaken(_) => "nickname_taken",
            Self::NicknameRequired => "nickname_required",
            Self::UnknownRole(_) => "unknown_role",
            Self::LocalIpRequired => "local_ip_required",
            Self::DuplicateName(_) => "duplicate_name",
            Self::UnknownPerformer(_) => "unknown_performer",
            Self::CapabilityDenied { .. } => "capability_denied",
            Self::NoDesignation => "no_designation",
            Self::NoPayload => "no_payload",
            Self::NoTargets(_) => "no_targets",
            Self::Content(_) => "content",
            Self::WrongVenue(_) => "wrong_venue",
            Self::WrongKind { .. } => "wrong_kind",
            Self::EmptyGroup => "empty_group",
            Self::Timing(_) => "timing",
        }
    }
}

/// Why one designated performer gets nothing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub nickname: String,
    pub reason: String,
}

fn describe(rs: &[Rejection]) -> String {
    if rs.is_empty() {
        return "nobody designated".into();
    }
    rs.iter()
        .map(|r| format!("{} ({})", r.nickname, r.reason))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Recipients chosen by a sender. When several mechanisms are filled in,
/// only the highest in [`Mechanism`] order applies.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Designation {
    #[serde(default)]
    pub all: bool,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub roles: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub performers: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multi_role: Option<ObjectId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fractional: Option<ObjectId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<ObjectId>,
}

/// Routing mechanisms, highest precedence first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mechanism {
    Algorithm,
    Fractional,
    MultiRole,
    Performers,
    Roles,
    All,
}

impl Designation {
    pub fn all() -> Self {
        Self {
            all: true,
            ..Self::default()
        }
    }

    pub fn performers<I: IntoIterator<Item = S>, S: Into<String>>(names: I) -> Self {
        Self {
            performers: names.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    pub fn roles<I: IntoIterator<Item = S>, S: Into<String>>(names: I) -> Self {
        Self {
            roles: names.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    pub fn mechanism(&self) -> Option<Mechanism> {
        if self.algorithm.is_some() {
            Some(Mechanism::Algorithm)
        } else if self.fractional.is_some() {
            Some(Mechanism::Fractional)
        } else if self.multi_role.is_some() {
            Some(Mechanism::MultiRole)
        } else if !self.performers.is_empty() {
            Some(Mechanism::Performers)
        } else if !self.roles.is_empty() {
            Some(Mechanism::Roles)
        } else if self.all {
            Some(Mechanism::All)
        } else {
            None
        }
    }

    fn from_step(target: &StepTarget) -> Self {
        match target {
            StepTarget::All => Self::all(),
            StepTarget::Roles(r) => Self {
                roles: r.clone(),
                ..Self::default()
            },
            StepTarget::Performers(p) => Self {
                performers: p.clone(),
                ..Self::default()
            },
            StepTarget::MultiRole(id) => Self {
                multi_role: Some(id.clone()),
                ..Self::default()
            },
            StepTarget::Fractional(id) => Self {
                fractional: Some(id.clone()),
                ..Self::default()
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SendRequest {
    #[serde(default)]
    pub designation: Designation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload: Option<Payload>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Delivery {
    pub nickname: String,
    pub connection: ConnectionId,
    pub parts: Vec<Part>,
}

/// A routed instruction ready to send.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CueEnvelope {
    pub cue_id: u64,
    pub sender: String,
    pub issued_at: i64,
    pub schedule: Schedule,
    pub deliveries: Vec<Delivery>,
    #[serde(default)]
    pub test: bool,
}

/// Everything one operation produced.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dispatched {
    pub cues: Vec<CueEnvelope>,
    pub entries: Vec<ActivityEntry>,
    /// Timed organizations and OSC bindings switched on or off.
    pub armed: Vec<ObjectId>,
    pub disarmed: Vec<ObjectId>,
}

impl Dispatched {
    fn absorb(&mut self, other: Dispatched) {
        self.cues.extend(other.cues);
        self.entries.extend(other.entries);
        self.armed.extend(other.armed);
        self.disarmed.extend(other.disarmed);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LeaveOutcome {
    Left,
    /// The last performer left and the performance ended.
    Destroyed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerformanceState {
    Live,
    Destroyed,
}

#[derive(Clone, Copy, Debug)]
pub struct PerformanceOptions {
    pub seed: u64,
    pub delay_budget_ms: u64,
    pub timezone: FixedOffset,
}

impl Default for PerformanceOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            delay_budget_ms: timing::DEFAULT_DELAY_BUDGET_MS,
            timezone: FixedOffset::east_opt(0).expect("zero offset"),
        }
    }
}

#[derive(Clone, Debug)]
struct TimedFire {
    algorithm: ObjectId,
    entry: usize,
    anchor: i64,
    tick: u64,
}

#[derive(Clone, Debug)]
struct OscTrigger {
    target: ObjectId,
    owner: String,
}

/// A live instantiation of a venue.
#[derive(Debug)]
pub struct Performance {
    name: String,
    venue: Venue,
    state: PerformanceState,
    roster: Vec<Performer>,
    fraction_memory: BTreeMap<ObjectId, Partition>,
    log: ActivityLog,
    rng: ChaCha8Rng,
    seed: u64,
    next_cue: u64,
    delay_budget_ms: u64,
    timezone: FixedOffset,
    cursors: BTreeMap<ObjectId, usize>,
    timed: Scheduler<TimedFire>,
    /// Switched-on algorithms and who switched them on.
    armed: BTreeMap<ObjectId, String>,
    osc_in: OscRouter<OscTrigger>,
    osc_out: Vec<(ObjectId, String)>,
}

impl Performance {
    /// Instantiates `venue` with its first performer.
    pub fn start(
        venue: Venue,
        name: &str,
        first: &JoinRequest,
        connection: ConnectionId,
        opts: PerformanceOptions,
    ) -> Result<Self, VenueError> {
        let delay_budget_ms = venue.delay_budget_ms.unwrap_or(opts.delay_budget_ms);
        let timezone = venue
            .timezone
            .as_deref()
            .and_then(super::parse_timezone)
            .unwrap_or(opts.timezone);
        let mut p = Self {
            name: name.to_string(),
            venue,
            state: PerformanceState::Live,
            roster: Vec::new(),
            fraction_memory: BTreeMap::new(),
            log: ActivityLog::default(),
            rng: ChaCha8Rng::seed_from_u64(opts.seed),
            seed: opts.seed,
            next_cue: 1,
            delay_budget_ms,
            timezone,
            cursors: BTreeMap::new(),
            timed: Scheduler::new(),
            armed: BTreeMap::new(),
            osc_in: OscRouter::new(),
            osc_out: Vec::new(),
        };
        p.join(first, connection)?;
        Ok(p)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn venue(&self) -> &Venue {
        &self.venue
    }

    pub fn state(&self) -> PerformanceState {
        self.state
    }

    pub fn is_live(&self) -> bool {
        self.state == PerformanceState::Live
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn delay_budget_ms(&self) -> u64 {
        self.delay_budget_ms
    }

    pub fn timezone(&self) -> FixedOffset {
        self.timezone
    }

    pub fn roster(&self) -> &[Performer] {
        &self.roster
    }

    pub fn performer(&self, nickname: &str) -> Option<&Performer> {
        self.roster.iter().find(|p| p.nickname == nickname)
    }

    pub fn performer_by_connection(&self, connection: ConnectionId) -> Option<&Performer> {
        self.roster.iter().find(|p| p.connection == connection)
    }

    pub fn log(&self) -> &ActivityLog {
        &self.log
    }

    /// The remembered partition of a persistent assignment, if any.
    pub fn fraction_memory(&self, assignment: &ObjectId) -> Option<&Partition> {
        self.fraction_memory.get(assignment)
    }

    fn ensure_live(&self) -> Result<(), VenueError> {
        if self.is_live() {
            Ok(())
        } else {
            Err(VenueError::Gone(self.name.clone()))
        }
    }

    fn role_count(&self, role: &str) -> usize {
        self.roster.iter().filter(|p| p.role == role).count()
    }

    fn check_capacity(&self, role: &VenueRole) -> Result<(), VenueError> {
        match role.capacity {
            Some(cap) if self.role_count(&role.role.name) >= cap as usize => {
                Err(VenueError::Capacity(role.role.name.clone()))
            }
            _ => Ok(()),
        }
    }

    pub fn join(&mut self, req: &JoinRequest, connection: ConnectionId) -> Result<&Performer, VenueError> {
        self.ensure_live()?;
        let nickname = req.nickname.trim();
        if nickname.is_empty() {
            return Err(VenueError::NicknameRequired);
        }
        let supplied = req.passcode.as_deref().unwrap_or("");
        match &self.venue.passcode {
            Some(digest) if !digest.verify(supplied) => return Err(VenueError::Passcode),
            None if self.venue.join_requirements.contains(&JoinRequirement::Passcode) && supplied.is_empty() => {
                return Err(VenueError::Passcode)
            }
            _ => {}
        }
        let role = self
            .venue
            .role(&req.role)
            .ok_or_else(|| VenueError::UnknownRole(req.role.clone()))?
            .clone();
        if self.venue.join_requirements.contains(&JoinRequirement::LocalIp)
            && req.local_ip.as_deref().is_none_or(|ip| ip.trim().is_empty())
        {
            return Err(VenueError::LocalIpRequired);
        }
        if self.performer(nickname).is_some() {
            return Err(VenueError::NicknameTaken(nickname.to_string()));
        }
        self.check_capacity(&role)?;
        self.roster.push(Performer {
            nickname: nickname.to_string(),
            role: role.role.name.clone(),
            connection,
            local_ip: req.local_ip.clone(),
            clock_offset_ms: 0,
            present: true,
            capabilities: role.role.capabilities.clone(),
            test_mode: false,
            interface: None,
        });
        Ok(self.roster.last().expect("just pushed"))
    }

    /// Removes a performer; the last one out ends the performance.
    pub fn leave(&mut self, nickname: &str) -> Result<LeaveOutcome, VenueError> {
        self.ensure_live()?;
        let idx = self
            .roster
            .iter()
            .position(|p| p.nickname == nickname)
            .ok_or_else(|| VenueError::UnknownPerformer(nickname.to_string()))?;
        self.roster.remove(idx);
        if self.roster.is_empty() {
            self.state = PerformanceState::Destroyed;
            self.timed = Scheduler::new();
            self.armed.clear();
            self.osc_in = OscRouter::new();
            self.osc_out.clear();
            Ok(LeaveOutcome::Destroyed)
        } else {
            Ok(LeaveOutcome::Left)
        }
    }

    fn present_mut(&mut self, nickname: &str) -> Result<&mut Performer, VenueError> {
        self.roster
            .iter_mut()
            .find(|p| p.nickname == nickname)
            .ok_or_else(|| VenueError::UnknownPerformer(nickname.to_string()))
    }

    fn require(&self, nickname: &str, capability: Capability) -> Result<&Performer, VenueError> {
        let p = self
            .performer(nickname)
            .ok_or_else(|| VenueError::UnknownPerformer(nickname.to_string()))?;
        if p.capabilities.has(capability) {
            Ok(p)
        } else {
            Err(VenueError::CapabilityDenied {
                nickname: nickname.to_string(),
                capability,
            })
        }
    }

    /// Moves a performer to another role, resetting their flags to it.
    pub fn change_role(&mut self, nickname: &str, role: &str) -> Result<&Performer, VenueError> {
        self.ensure_live()?;
        let current = self.require(nickname, Capability::ChangeRole)?.role.clone();
        let target = self
            .venue
            .role(role)
            .ok_or_else(|| VenueError::UnknownRole(role.to_string()))?
            .clone();
        if current != target.role.name {
            self.check_capacity(&target)?;
        }
        let p = self.present_mut(nickname)?;
        p.role = target.role.name.clone();
        p.capabilities = target.role.capabilities.clone();
        Ok(p)
    }

    pub fn change_functionality(&mut self, nickname: &str, flags: CapabilitySet) -> Result<&Performer, VenueError> {
        self.ensure_live()?;
        self.require(nickname, Capability::ChangeFunctionality)?;
        let p = self.present_mut(nickname)?;
        p.capabilities = flags;
        Ok(p)
    }

    pub fn change_interface(
        &mut self,
        nickname: &str,
        interface: &ObjectId,
        catalog: &dyn Catalog,
    ) -> Result<&Performer, VenueError> {
        self.ensure_live()?;
        self.require(nickname, Capability::ChangeInterface)?;
        match catalog.document(interface) {
            Some(Document::Interface(_)) => {}
            Some(_) => {
                return Err(VenueError::WrongKind {
                    id: interface.clone(),
                    expected: "an interface",
                })
            }
            None => return Err(ContentError::NotFound(interface.clone()).into()),
        }
        let p = self.present_mut(nickname)?;
        p.interface = Some(interface.clone());
        Ok(p)
    }

    /// In test mode a performer's sends go to themselves only.
    pub fn set_test_mode(&mut self, nickname: &str, on: bool) -> Result<&Performer, VenueError> {
        self.ensure_live()?;
        self.require(nickname, Capability::TestFunctionality)?;
        let p = self.present_mut(nickname)?;
        p.test_mode = on;
        Ok(p)
    }

    pub fn set_clock_offset(&mut self, nickname: &str, offset_ms: i64) -> Result<(), VenueError> {
        self.ensure_live()?;
        self.present_mut(nickname)?.clock_offset_ms = offset_ms;
        Ok(())
    }

    /// Divides the assignment's target group among its fractions.
    ///
    /// Persistent assignments compute the partition once and keep it keyed
    /// by nickname; dynamic ones draw a fresh one on every call.
    pub fn resolve_fraction(&mut self, assignment: &FractionalAssignment) -> Result<Partition, VenueError> {
        self.ensure_live()?;
        let group: Vec<String> = self
            .roster
            .iter()
            .filter(|p| match &assignment.target {
                FractionTarget::All => true,
                FractionTarget::Roles(roles) => roles.contains(&p.role),
            })
            .map(|p| p.nickname.clone())
            .collect();
        if group.is_empty() {
            return Err(VenueError::EmptyGroup);
        }
        let k = assignment.fractions.len().max(1);
        Ok(match assignment.mode {
            FractionMode::Dynamic => random_partition(&group, k, &mut self.rng),
            FractionMode::Persistent => match self.fraction_memory.get_mut(&assignment.id) {
                Some(memory) => refresh_persistent(memory, &group),
                None => {
                    let p = random_partition(&group, k, &mut self.rng);
                    self.fraction_memory.insert(assignment.id.clone(), p.clone());
                    p
                }
            },
        })
    }

    /// Who would receive what, without sending or logging anything.
    /// Distribution organizations report their next step.
    pub fn resolve_targets(
        &mut self,
        sender: &str,
        request: &SendRequest,
        catalog: &dyn Catalog,
    ) -> Result<Vec<Delivery>, VenueError> {
        self.ensure_live()?;
        let plan = self.plan(sender, request, catalog, false)?;
        let (deliveries, rejections) = self.filter(plan.assignments);
        if deliveries.is_empty() {
            return Err(VenueError::NoTargets(rejections));
        }
        Ok(deliveries)
    }

    /// Routes a send: checks flags, resolves recipients, schedules the cue
    /// and logs one entry per delivered part.
    pub fn dispatch(
        &mut self,
        sender: &str,
        request: &SendRequest,
        catalog: &dyn Catalog,
        now: i64,
    ) -> Result<Dispatched, VenueError> {
        self.ensure_live()?;
        let plan = self.plan(sender, request, catalog, true)?;
        if let Some(toggle) = plan.toggle {
            return Ok(self.toggle(toggle, sender, now));
        }
        let test = plan.test;
        self.emit(sender, plan.assignments, now, test)
    }

    /// Fires due timed organizations.
    pub fn fire_due(&mut self, catalog: &dyn Catalog, now: i64) -> Dispatched {
        let mut out = Dispatched::default();
        if !self.is_live() {
            return out;
        }
        for (at, fire) in self.timed.pop_due(now) {
            let Some(sender) = self.armed.get(&fire.algorithm).cloned() else {
                continue;
            };
            let Some(Document::Algorithm(AlgorithmObject {
                kind: AlgorithmKind::TimedOrganization { entries },
                ..
            })) = catalog.document(&fire.algorithm)
            else {
                continue;
            };
            let Some(entry) = entries.get(fire.entry) else {
                continue;
            };
            if let Some(Document::Algorithm(AlgorithmObject {
                kind: AlgorithmKind::Metronome { interval_ms, .. },
                ..
            })) = catalog.document(&entry.trigger)
            {
                if let Ok(m) = timing::Metronome::new(fire.anchor, interval_ms, true) {
                    self.timed.push(
                        m.tick(fire.tick + 1),
                        TimedFire {
                            tick: fire.tick + 1,
                            ..fire.clone()
                        },
                    );
                }
            }
            match self.step_assignments(&entry.action, catalog) {
                Ok(assignments) => match self.emit(&sender, assignments, at.max(now), false) {
                    Ok(d) => out.absorb(d),
                    Err(e) => log::info!("timed step of {} reached nobody: {e}", fire.algorithm),
                },
                Err(e) => log::warn!("timed step of {} failed: {e}", fire.algorithm),
            }
        }
        out
    }

    /// Earliest pending timed fire.
    pub fn next_deadline(&self) -> Option<i64> {
        self.timed.next_deadline()
    }

    /// Dispatches the targets bound to an inbound OSC address, on behalf of
    /// whoever switched the binding on. Unbound addresses are dropped.
    pub fn osc_inbound(&mut self, msg: &OscMessage, catalog: &dyn Catalog, now: i64) -> Dispatched {
        let mut out = Dispatched::default();
        if !self.is_live() {
            return out;
        }
        let hits: Vec<(ObjectId, String)> = self
            .osc_in
            .dispatch(msg)
            .into_iter()
            .map(|t| (t.target.clone(), t.owner.clone()))
            .collect();
        for (target, sender) in hits {
            let result = match catalog.document(&target) {
                Some(Document::Algorithm(_)) => self.plan_algorithm(&target, catalog, true).and_then(|plan| match plan {
                    AlgorithmPlan::Send(a) => self.emit(&sender, a, now, false),
                    AlgorithmPlan::Toggle(t) => Ok(self.toggle(t, &sender, now)),
                }),
                Some(_) => content_parts(catalog, &target)
                    .map_err(VenueError::from)
                    .and_then(|parts| {
                        let a = self.roster.iter().map(|p| (p.nickname.clone(), parts.clone())).collect();
                        self.emit(&sender, a, now, false)
                    }),
                None => Err(ContentError::NotFound(target.clone()).into()),
            };
            match result {
                Ok(d) => out.absorb(d),
                Err(e) => log::warn!("osc {} -> {target}: {e}", msg.address),
            }
        }
        out
    }

    fn plan(
        &mut self,
        sender: &str,
        request: &SendRequest,
        catalog: &dyn Catalog,
        advance: bool,
    ) -> Result<Plan, VenueError> {
        let me = self
            .performer(sender)
            .ok_or_else(|| VenueError::UnknownPerformer(sender.to_string()))?
            .clone();
        if me.test_mode {
            let payload = request.payload.as_ref().ok_or(VenueError::NoPayload)?;
            let resolved = resolve_payload(catalog, payload)?;
            return Ok(Plan {
                assignments: vec![(me.nickname.clone(), resolved.parts)],
                test: true,
                toggle: None,
            });
        }
        let d = &request.designation;
        let mechanism = d.mechanism().ok_or(VenueError::NoDesignation)?;
        let assignments = match mechanism {
            Mechanism::Algorithm => {
                self.require(sender, Capability::SendAlgorithm)?;
                let id = d.algorithm.as_ref().expect("mechanism checked");
                match self.plan_algorithm(id, catalog, advance)? {
                    AlgorithmPlan::Send(a) => a,
                    AlgorithmPlan::Toggle(t) => {
                        return Ok(Plan {
                            assignments: Vec::new(),
                            test: false,
                            toggle: Some(t),
                        })
                    }
                }
            }
            Mechanism::Fractional => {
                self.require(sender, Capability::SendFraction)?;
                self.fractional_assignments(d.fractional.as_ref().expect("mechanism checked"), catalog)?
            }
            Mechanism::MultiRole => {
                self.require(sender, Capability::SendAssociation)?;
                self.multi_role_assignments(d.multi_role.as_ref().expect("mechanism checked"), catalog)?
            }
            Mechanism::Performers | Mechanism::Roles | Mechanism::All => {
                let payload = request.payload.as_ref().ok_or(VenueError::NoPayload)?;
                let resolved = resolve_payload(catalog, payload)?;
                self.require(sender, resolved.send_capability)?;
                let mut parts = resolved.parts;
                if let Payload::Content { id } = payload {
                    parts.extend(self.osc_out_parts(id, catalog));
                }
                self.checkbox_assignments(d, mechanism, parts)
            }
        };
        Ok(Plan {
            assignments,
            test: false,
            toggle: None,
        })
    }

    fn checkbox_assignments(&self, d: &Designation, mechanism: Mechanism, parts: Vec<Part>) -> Vec<(String, Vec<Part>)> {
        let mut out: Vec<(String, Vec<Part>)> = self
            .roster
            .iter()
            .filter(|p| match mechanism {
                Mechanism::Performers => d.performers.contains(&p.nickname),
                Mechanism::Roles => d.roles.contains(&p.role),
                _ => true,
            })
            .map(|p| (p.nickname.clone(), parts.clone()))
            .collect();
        if mechanism == Mechanism::Performers {
            for name in &d.performers {
                if self.performer(name).is_none() {
                    out.push((name.clone(), Vec::new()));
                }
            }
        }
        out
    }

    fn osc_out_parts(&self, id: &ObjectId, catalog: &dyn Catalog) -> Vec<Part> {
        let name = catalog.document(id).map(|d| d.name().to_string()).unwrap_or_default();
        self.osc_out
            .iter()
            .filter(|(target, _)| target == id)
            .map(|(_, address)| Part::osc(OscMessage::new(address.clone(), vec![OscArg::Str(name.clone())])))
            .collect()
    }

    fn fractional_assignments(&mut self, id: &ObjectId, catalog: &dyn Catalog) -> Result<Vec<(String, Vec<Part>)>, VenueError> {
        let Some(Document::FractionalAssignment(fa)) = catalog.document(id) else {
            return Err(self.wrong_kind(id, catalog, "a fractional assignment"));
        };
        let partition = self.resolve_fraction(&fa)?;
        let mut out = Vec::new();
        for (members, content) in partition.iter().zip(&fa.fractions) {
            if members.is_empty() {
                continue;
            }
            let parts = content_parts(catalog, content)?;
            out.extend(members.iter().map(|m| (m.clone(), parts.clone())));
        }
        Ok(out)
    }

    fn multi_role_assignments(&self, id: &ObjectId, catalog: &dyn Catalog) -> Result<Vec<(String, Vec<Part>)>, VenueError> {
        let Some(Document::MultiRoleAssignment(ma)) = catalog.document(id) else {
            return Err(self.wrong_kind(id, catalog, "a multi-role assignment"));
        };
        if ma.venue_id != self.venue.id {
            return Err(VenueError::WrongVenue(id.clone()));
        }
        let mut by_role = BTreeMap::new();
        for (role, content) in &ma.bindings {
            by_role.insert(role.clone(), content_parts(catalog, content)?);
        }
        Ok(self
            .roster
            .iter()
            .filter_map(|p| by_role.get(&p.role).map(|parts| (p.nickname.clone(), parts.clone())))
            .collect())
    }

    fn step_assignments(&mut self, step: &DistributionStep, catalog: &dyn Catalog) -> Result<Vec<(String, Vec<Part>)>, VenueError> {
        let d = Designation::from_step(&step.target);
        match d.mechanism().expect("steps always designate") {
            Mechanism::Fractional => self.fractional_assignments(d.fractional.as_ref().expect("set"), catalog),
            Mechanism::MultiRole => self.multi_role_assignments(d.multi_role.as_ref().expect("set"), catalog),
            m => {
                let mut parts = content_parts(catalog, &step.content)?;
                parts.extend(self.osc_out_parts(&step.content, catalog));
                Ok(self.checkbox_assignments(&d, m, parts))
            }
        }
    }

    fn plan_algorithm(&mut self, id: &ObjectId, catalog: &dyn Catalog, advance: bool) -> Result<AlgorithmPlan, VenueError> {
        let Some(Document::Algorithm(alg)) = catalog.document(id) else {
            return Err(self.wrong_kind(id, catalog, "an algorithm"));
        };
        match &alg.kind {
            AlgorithmKind::DistributionOrganization { steps } => {
                if steps.is_empty() {
                    return Err(ContentError::NotDispatchable(id.clone()).into());
                }
                let cursor = self.cursors.get(id).copied().unwrap_or(0) % steps.len();
                let assignments = self.step_assignments(&steps[cursor], catalog)?;
                if advance {
                    self.cursors.insert(id.clone(), cursor + 1);
                }
                Ok(AlgorithmPlan::Send(assignments))
            }
            AlgorithmKind::TimedOrganization { entries } => {
                let mut triggers = Vec::with_capacity(entries.len());
                for e in entries {
                    match catalog.document(&e.trigger) {
                        Some(Document::Algorithm(AlgorithmObject { kind, .. })) => match kind {
                            AlgorithmKind::Timer { duration_ms } => triggers.push(Trigger::Timer(duration_ms)),
                            AlgorithmKind::Metronome { interval_ms, .. } => {
                                timing::Metronome::new(0, interval_ms, true)?;
                                triggers.push(Trigger::Metronome)
                            }
                            _ => return Err(self.wrong_kind(&e.trigger, catalog, "a timer or metronome")),
                        },
                        _ => return Err(self.wrong_kind(&e.trigger, catalog, "a timer or metronome")),
                    }
                }
                Ok(AlgorithmPlan::Toggle(Toggle::Timed { id: id.clone(), triggers }))
            }
            AlgorithmKind::OscBinding {
                direction,
                address,
                target,
            } => Ok(AlgorithmPlan::Toggle(Toggle::Osc {
                id: id.clone(),
                direction: *direction,
                address: address.clone(),
                target: target.clone(),
            })),
            AlgorithmKind::Timer { .. } | AlgorithmKind::Metronome { .. } => {
                Err(ContentError::NotDispatchable(id.clone()).into())
            }
        }
    }

    fn wrong_kind(&self, id: &ObjectId, catalog: &dyn Catalog, expected: &'static str) -> VenueError {
        if catalog.document(id).is_none() {
            ContentError::NotFound(id.clone()).into()
        } else {
            VenueError::WrongKind { id: id.clone(), expected }
        }
    }

    fn toggle(&mut self, toggle: Toggle, sender: &str, now: i64) -> Dispatched {
        let mut out = Dispatched::default();
        let id = match &toggle {
            Toggle::Timed { id, .. } | Toggle::Osc { id, .. } => id.clone(),
        };
        if self.armed.remove(&id).is_some() {
            match toggle {
                Toggle::Timed { .. } => self.timed.cancel(|f| f.algorithm == id),
                Toggle::Osc { direction: OscDirection::Out, address, target, .. } => {
                    if let Some(i) = self.osc_out.iter().position(|(t, a)| *t == target && *a == address) {
                        self.osc_out.remove(i);
                    }
                }
                Toggle::Osc { address, target, .. } => {
                    let mut router = OscRouter::new();
                    let mut removed = false;
                    for (addr, t) in self.osc_in.bindings().to_vec() {
                        if !removed && addr == address && t.target == target {
                            removed = true;
                            continue;
                        }
                        router.bind(&addr, t).expect("previously bound");
                    }
                    self.osc_in = router;
                }
            }
            out.disarmed.push(id);
            return out;
        }
        match toggle {
            Toggle::Timed { triggers, .. } => {
                for (entry, trigger) in triggers.into_iter().enumerate() {
                    let at = match trigger {
                        Trigger::Timer(duration) => now + duration as i64,
                        Trigger::Metronome => now,
                    };
                    self.timed.push(
                        at,
                        TimedFire {
                            algorithm: id.clone(),
                            entry,
                            anchor: now,
                            tick: 0,
                        },
                    );
                }
            }
            Toggle::Osc {
                direction: OscDirection::In,
                address,
                target,
                ..
            } => {
                self.osc_in
                    .bind(&address, OscTrigger { target, owner: sender.to_string() })
                    .ok();
            }
            Toggle::Osc { address, target, .. } => self.osc_out.push((target, address)),
        }
        self.armed.insert(id.clone(), sender.to_string());
        out.armed.push(id);
        out
    }

    /// Keeps each performer's receivable parts.
    fn filter(&self, assignments: Vec<(String, Vec<Part>)>) -> (Vec<Delivery>, Vec<Rejection>) {
        let mut deliveries = Vec::new();
        let mut rejections = Vec::new();
        for (nickname, parts) in assignments {
            let Some(p) = self.performer(&nickname) else {
                rejections.push(Rejection {
                    nickname,
                    reason: "not in the performance".into(),
                });
                continue;
            };
            let mut missing = BTreeSet::new();
            let mut kept = Vec::new();
            for part in parts {
                let cap = part.kind.receive_capability();
                if !p.capabilities.has(cap) {
                    missing.insert(cap.token().to_string());
                } else if part.kind == PartKind::Osc && p.local_ip.is_none() {
                    missing.insert("local ip".to_string());
                } else {
                    kept.push(part);
                }
            }
            if kept.is_empty() {
                let reason = if missing.is_empty() {
                    "nothing to deliver".to_string()
                } else {
                    format!("lacks {}", missing.into_iter().collect::<Vec<_>>().join(", "))
                };
                rejections.push(Rejection { nickname, reason });
            } else {
                deliveries.push(Delivery {
                    nickname,
                    connection: p.connection,
                    parts: kept,
                });
            }
        }
        (deliveries, rejections)
    }

    fn emit(
        &mut self,
        sender: &str,
        assignments: Vec<(String, Vec<Part>)>,
        now: i64,
        test: bool,
    ) -> Result<Dispatched, VenueError> {
        let (deliveries, rejections) = self.filter(assignments);
        if deliveries.is_empty() {
            return Err(VenueError::NoTargets(rejections));
        }
        let schedule = timing::schedule_cue(now, self.delay_budget_ms)?;
        let cue = CueEnvelope {
            cue_id: self.next_cue,
            sender: sender.to_string(),
            issued_at: now,
            schedule,
            deliveries,
            test,
        };
        self.next_cue += 1;
        let mut grouped: Vec<((PartKind, String), BTreeSet<String>)> = Vec::new();
        for d in &cue.deliveries {
            for part in &d.parts {
                let key = (part.kind, part.name.clone());
                match grouped.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, receivers)) => {
                        receivers.insert(d.nickname.clone());
                    }
                    None => grouped.push((key, BTreeSet::from([d.nickname.clone()]))),
                }
            }
        }
        let entries = grouped
            .into_iter()
            .map(|((kind, name), receivers)| {
                self.log
                    .push(ActivityEntry {
                        timestamp: now,
                        sender: sender.to_string(),
                        verb: kind.verb().to_string(),
                        content_name: name,
                        receivers,
                        test,
                    })
                    .clone()
            })
            .collect();
        Ok(Dispatched {
            cues: vec![cue],
            entries,
            ..Dispatched::default()
        })
    }
}

struct Plan {
    assignments: Vec<(String, Vec<Part>)>,
    test: bool,
    toggle: Option<Toggle>,
}

enum AlgorithmPlan {
    Send(Vec<(String, Vec<Part>)>),
    Toggle(Toggle),
}

enum Trigger {
    Timer(u64),
    Metronome,
}

enum Toggle {
    Timed {
        id: ObjectId,
        triggers: Vec<Trigger>,
    },
    Osc {
        id: ObjectId,
        direction: OscDirection,
        address: String,
        target: ObjectId,
    },
}
