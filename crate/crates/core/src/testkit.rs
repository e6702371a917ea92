//! Seeded generators and brute-force oracles for property tests.
//!
//! The oracles here work from raw declarations and adjacency matrices; they
//! deliberately share no code with the graph, badge or BFS implementations
//! they are used to check.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, TimeZone, Utc};
use rand::seq::IndexedRandom;
use rand::Rng;
pub use rand_chacha::ChaCha8Rng;
pub use rand::SeedableRng;

use crate::badge::BadgeLevel;
use crate::graph::{EdgeStatus, MrppStatus};
use crate::preference::{Constraints, PreferenceProfile, Sharing, Stance, Violation, ViolationKind};
use crate::policy::{DataPractice, Flow, PartyRef, Policy, Retention, Timestamp};
use crate::vocab::{DataCategory, Direction, Frequency, Linkage, PartyKind, Purpose, Security, Storage};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn subset<T: Copy + Ord>(rng: &mut impl Rng, all: &[T], non_empty: bool) -> BTreeSet<T> {
    loop {
        let s: BTreeSet<T> = all.iter().copied().filter(|_| rng.random_bool(0.4)).collect();
        if !non_empty || !s.is_empty() {
            return s;
        }
    }
}

fn pick<T: Copy>(rng: &mut impl Rng, all: &[T]) -> T {
    *all.choose(rng).expect("non-empty vocabulary")
}

pub fn random_domain(rng: &mut impl Rng) -> String {
    const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789-";
    let labels = rng.random_range(1..=3);
    let mut parts = Vec::new();
    for _ in 0..labels {
        let len = rng.random_range(1..=10);
        parts.push((0..len).map(|_| *ALPHABET.choose(rng).unwrap() as char).collect::<String>());
    }
    parts.push(["com", "example", "org", "net"].choose(rng).unwrap().to_string());
    parts.join(".")
}

pub fn random_timestamp(rng: &mut impl Rng) -> Timestamp {
    let secs = rng.random_range(1_000_000_000i64..2_000_000_000);
    let nanos = match rng.random_range(0..4) {
        0 => 0,
        1 => rng.random_range(0..1000) * 1_000_000,
        2 => rng.random_range(0..1_000_000) * 1000,
        _ => rng.random_range(0..1_000_000_000),
    };
    let dt: DateTime<Utc> = Utc.timestamp_opt(secs, nanos).single().expect("in range");
    Timestamp::Utc(dt)
}

pub fn random_practice(rng: &mut impl Rng, category: DataCategory) -> DataPractice {
    DataPractice {
        category,
        purposes: subset(rng, Purpose::ALL, true),
        frequency: pick(rng, Frequency::ALL),
        storage: pick(rng, Storage::ALL),
        retention: if rng.random_bool(0.2) { Retention::Indefinite } else { Retention::Days(rng.random_range(0..4000)) },
        linkage: pick(rng, Linkage::ALL),
        security: subset(rng, Security::ALL, false),
    }
}

pub fn random_flow(rng: &mut impl Rng, declared: &[DataCategory]) -> Flow {
    let partner = PartyRef {
        kind: pick(rng, PartyKind::ALL),
        domain: random_domain(rng),
    };
    let categories = subset(rng, declared, true);
    if rng.random_bool(0.5) {
        Flow::outbound(partner, categories, subset(rng, Purpose::ALL, true))
    } else {
        Flow::inbound(partner, categories)
    }
}

/// A random policy that passes validation (warnings allowed).
pub fn random_policy(rng: &mut impl Rng) -> Policy {
    let mut p = Policy::new(random_domain(rng), rng.random_range(1..10_000), random_timestamp(rng));
    if rng.random_bool(0.3) {
        p.app_id = Some(format!("app.{}", rng.random_range(0..1_000_000)));
    }
    let categories: Vec<DataCategory> = subset(rng, DataCategory::ALL, false).into_iter().collect();
    let mut shuffled = categories.clone();
    rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), rng);
    p.practices = shuffled.into_iter().map(|c| random_practice(rng, c)).collect();
    if !categories.is_empty() {
        for _ in 0..rng.random_range(0..5) {
            p.flows.push(random_flow(rng, &categories));
        }
    }
    p
}

/// A valid successor of `p` with a higher version and random structural
/// edits.
pub fn mutate(rng: &mut impl Rng, p: &Policy) -> Policy {
    let mut q = p.clone();
    q.version = p.version + rng.random_range(1..5);
    if rng.random_bool(0.5) {
        q.issued_at = random_timestamp(rng);
    }
    for _ in 0..rng.random_range(0..6) {
        match rng.random_range(0..7) {
            0 => {
                let unused: Vec<_> = DataCategory::ALL.iter().copied().filter(|c| q.practice(*c).is_none()).collect();
                if let Some(c) = unused.choose(rng) {
                    let practice = random_practice(rng, *c);
                    q.practices.push(practice);
                }
            }
            1 if !q.practices.is_empty() => {
                let removed = q.practices.remove(rng.random_range(0..q.practices.len())).category;
                for f in &mut q.flows {
                    f.categories.remove(&removed);
                }
                q.flows.retain(|f| !f.categories.is_empty());
            }
            2 if !q.practices.is_empty() => {
                let i = rng.random_range(0..q.practices.len());
                let fresh = random_practice(rng, q.practices[i].category);
                let practice = &mut q.practices[i];
                match rng.random_range(0..6) {
                    0 => practice.purposes = fresh.purposes,
                    1 => practice.frequency = fresh.frequency,
                    2 => practice.storage = fresh.storage,
                    3 => practice.retention = fresh.retention,
                    4 => practice.linkage = fresh.linkage,
                    _ => practice.security = fresh.security,
                }
            }
            3 if !q.practices.is_empty() => {
                let declared: Vec<_> = q.practices.iter().map(|p| p.category).collect();
                let flow = random_flow(rng, &declared);
                q.flows.push(flow);
            }
            4 if !q.flows.is_empty() => {
                q.flows.remove(rng.random_range(0..q.flows.len()));
            }
            5 => q.app_id = if rng.random_bool(0.5) { Some(format!("app.{}", rng.random_range(0..100))) } else { None },
            _ => {}
        }
    }
    q
}

/// A profile with a random rule for roughly half the categories.
pub fn random_profile(rng: &mut impl Rng) -> PreferenceProfile {
    let mut profile = PreferenceProfile::new(format!("profile-{}", rng.random_range(0..1000)));
    for &category in DataCategory::ALL {
        if !rng.random_bool(0.5) {
            continue;
        }
        let stance = if rng.random_bool(0.25) {
            Stance::Deny
        } else {
            Stance::Constrain(Constraints {
                allowed_purposes: subset(rng, Purpose::ALL, false),
                max_retention_days: if rng.random_bool(0.3) { None } else { Some(rng.random_range(0..4000)) },
                allowed_linkage: subset(rng, Linkage::ALL, false),
                required_security: subset(rng, Security::ALL, false),
                sharing: if rng.random_bool(0.5) { Sharing::Allow } else { Sharing::Forbid },
            })
        };
        profile = profile.with_rule(category, stance);
    }
    profile
}

pub fn random_violation(rng: &mut impl Rng) -> Violation {
    const KINDS: [ViolationKind; 7] = [
        ViolationKind::DeniedCategory,
        ViolationKind::BlacklistedParty,
        ViolationKind::Purpose,
        ViolationKind::Retention,
        ViolationKind::SharingForbidden,
        ViolationKind::Linkage,
        ViolationKind::Security,
    ];
    let kind = pick(rng, &KINDS);
    Violation { kind, category: Some(pick(rng, DataCategory::ALL)), detail: kind.to_string(), weight: 0.0 }
}

/// A multi-party scenario: which parties publish valid or invalid policies,
/// and which transfers each side declares.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub domains: Vec<String>,
    pub status: Vec<MrppStatus>,
    /// `(from, to) → (sender declares, receiver declares)`; at least one is
    /// true.
    pub transfers: BTreeMap<(usize, usize), (bool, bool)>,
}

impl Scenario {
    /// Up to `max_nodes` parties, each ordered pair carrying a transfer with
    /// probability `density`.
    pub fn random(rng: &mut impl Rng, max_nodes: usize, density: f64) -> Self {
        let n = rng.random_range(1..=max_nodes);
        let domains: Vec<String> = (0..n).map(|i| format!("n{i:02}.example")).collect();
        let status: Vec<MrppStatus> = (0..n)
            .map(|_| match rng.random_range(0..10) {
                0..=5 => MrppStatus::Valid,
                6 => MrppStatus::Invalid,
                _ => MrppStatus::Absent,
            })
            .collect();
        let mut transfers = BTreeMap::new();
        for from in 0..n {
            for to in 0..n {
                if from == to || !rng.random_bool(density) {
                    continue;
                }
                let sender = status[from] == MrppStatus::Valid && rng.random_bool(0.7);
                let receiver = status[to] == MrppStatus::Valid && rng.random_bool(0.6);
                if sender || receiver {
                    transfers.insert((from, to), (sender, receiver));
                }
            }
        }
        Scenario { domains, status, transfers }
    }

    fn kind(&self, i: usize) -> PartyKind {
        if self.status[i] == MrppStatus::Absent {
            PartyKind::BareDomain
        } else {
            PartyKind::Mrpp
        }
    }

    /// Valid policies for every `Valid` party. Senders and receivers name
    /// different categories, so confirmed edges merge several.
    pub fn policies(&self) -> Vec<Policy> {
        const SENT: [DataCategory; 2] = [DataCategory::Usage, DataCategory::DeviceIdentifier];
        const RECEIVED: [DataCategory; 2] = [DataCategory::Location, DataCategory::Usage];
        (0..self.domains.len())
            .filter(|&i| self.status[i] == MrppStatus::Valid)
            .map(|i| {
                let mut p = Policy::new(self.domains[i].clone(), 1, "2026-01-01T00:00:00Z");
                for category in [DataCategory::Usage, DataCategory::DeviceIdentifier, DataCategory::Location] {
                    p.practices.push(DataPractice {
                        category,
                        purposes: [Purpose::Analytics].into(),
                        frequency: Frequency::PerSession,
                        storage: Storage::FirstPartyServer,
                        retention: Retention::Days(30),
                        linkage: Linkage::DeviceIdentifier,
                        security: BTreeSet::new(),
                    });
                }
                for (&(from, to), &(sender, receiver)) in &self.transfers {
                    if from == i && sender {
                        let partner = PartyRef { kind: self.kind(to), domain: self.domains[to].clone() };
                        p.flows.push(Flow::outbound(partner, SENT, [Purpose::Analytics]));
                    }
                    if to == i && receiver {
                        let partner = PartyRef { kind: self.kind(from), domain: self.domains[from].clone() };
                        p.flows.push(Flow::inbound(partner, RECEIVED));
                    }
                }
                p
            })
            .collect()
    }

    pub fn known_invalid(&self) -> BTreeSet<String> {
        (0..self.domains.len())
            .filter(|&i| self.status[i] == MrppStatus::Invalid)
            .map(|i| self.domains[i].clone())
            .collect()
    }

    /// Indices present in the graph: every publishing or rejected party,
    /// plus absent parties that someone references.
    pub fn present(&self) -> Vec<usize> {
        (0..self.domains.len())
            .filter(|&i| {
                self.status[i] != MrppStatus::Absent || self.transfers.keys().any(|&(f, t)| f == i || t == i)
            })
            .collect()
    }

    /// Boolean adjacency over all scenario indices.
    pub fn adjacency(&self) -> Vec<Vec<bool>> {
        let n = self.domains.len();
        let mut adj = vec![vec![false; n]; n];
        for &(from, to) in self.transfers.keys() {
            adj[from][to] = true;
        }
        adj
    }
}

/// All-pairs hop distances by Floyd–Warshall; `None` means unreachable.
pub fn floyd_warshall(adj: &[Vec<bool>]) -> Vec<Vec<Option<usize>>> {
    let n = adj.len();
    let mut d = vec![vec![None; n]; n];
    for i in 0..n {
        d[i][i] = Some(0);
        for j in 0..n {
            if adj[i][j] && i != j {
                d[i][j] = Some(1);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(a), Some(b)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|cur| a + b < cur) {
                        d[i][j] = Some(a + b);
                    }
                }
            }
        }
    }
    d
}

/// Badge from first principles: enumerate the reachable set from the
/// distance matrix and test each level's condition directly.
pub fn oracle_badge(s: &Scenario, dist: &[Vec<Option<usize>>], party: usize) -> BadgeLevel {
    let valid = |i: usize| s.status[i] == MrppStatus::Valid;
    let n = s.domains.len();
    let bronze = valid(party);
    let gold = bronze && (0..n).filter(|&j| s.transfers.contains_key(&(party, j))).all(valid);
    let platinum = gold && (0..n).filter(|&j| dist[party][j].is_some()).all(valid);
    match (bronze, gold, platinum) {
        (true, true, true) => BadgeLevel::Platinum,
        (true, true, false) => BadgeLevel::Gold,
        (true, false, _) => BadgeLevel::Bronze,
        _ => BadgeLevel::None,
    }
}

/// Expected edge status for one declared transfer.
pub fn oracle_edge_status(s: &Scenario, from: usize, to: usize) -> Option<EdgeStatus> {
    let &(sender, receiver) = s.transfers.get(&(from, to))?;
    Some(match (sender, receiver) {
        (true, true) => EdgeStatus::Confirmed,
        (true, false) if s.status[to] == MrppStatus::Absent => EdgeStatus::Unverifiable,
        (true, false) => EdgeStatus::SenderOnly,
        (false, true) if s.status[from] == MrppStatus::Absent => EdgeStatus::Unverifiable,
        (false, true) => EdgeStatus::ReceiverOnly,
        (false, false) => return None,
    })
}

/// Lexicographically smallest shortest path, walked greedily over the
/// distance matrix: always step to the smallest-named successor that stays
/// on a shortest path.
pub fn oracle_path(s: &Scenario, dist: &[Vec<Option<usize>>], from: usize, to: usize) -> Option<Vec<String>> {
    let total = dist[from][to]?;
    let adj = s.adjacency();
    let mut path = vec![from];
    let mut cur = from;
    for step in 1..=total {
        let remaining = total - step;
        let next = (0..s.domains.len())
            .filter(|&v| adj[cur][v] && dist[v][to] == Some(remaining))
            .min_by(|&a, &b| s.domains[a].cmp(&s.domains[b]))?;
        path.push(next);
        cur = next;
    }
    Some(path.into_iter().map(|i| s.domains[i].clone()).collect())
}

/// Does any policy in the set declare `from → to` from the given side?
pub fn declares(policies: &[Policy], from: &str, to: &str, direction: Direction) -> bool {
    let (owner, partner) = match direction {
        Direction::Outbound => (from, to),
        Direction::Inbound => (to, from),
    };
    policies
        .iter()
        .filter(|p| p.party == owner)
        .flat_map(|p| p.flows.iter())
        .any(|f| f.direction == direction && f.partner.domain == partner)
}
