//! The multi-party data-sharing graph.
//!
//! Nodes are party domains. An edge `from → to` exists when either side
//! declared the transfer: the sender as an outbound flow, the receiver as an
//! inbound one. An edge is confirmed only when both did, which is what makes
//! hiding a transfer require two omissions.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::canonical::to_canonical;
use crate::policy::Policy;
use crate::vocab::{DataCategory, Direction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MrppStatus {
    /// Published a policy that passed validation.
    Valid,
    /// Submitted a policy that failed validation.
    Invalid,
    /// Known only through other parties' references.
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeStatus {
    Confirmed,
    SenderOnly,
    ReceiverOnly,
    Unverifiable,
}

impl EdgeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeStatus::Confirmed => "confirmed",
            EdgeStatus::SenderOnly => "sender-only",
            EdgeStatus::ReceiverOnly => "receiver-only",
            EdgeStatus::Unverifiable => "unverifiable",
        }
    }

    pub fn is_one_way(self) -> bool {
        matches!(self, EdgeStatus::SenderOnly | EdgeStatus::ReceiverOnly)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub domain: String,
    pub mrpp_status: MrppStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub from: String,
    pub to: String,
    /// Union of the categories named by either declaration.
    pub categories: BTreeSet<DataCategory>,
    pub status: EdgeStatus,
    pub declared_by_sender: bool,
    pub declared_by_receiver: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("more than one policy or status given for {0}")]
    DuplicateParty(String),
    #[error("{0} is not in the sharing graph")]
    UnknownParty(String),
    #[error("graph export is inconsistent: {0}")]
    InvalidExport(String),
}

/// Immutable once built; safe to share across threads.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SharingGraph {
    nodes: BTreeMap<String, MrppStatus>,
    edges: BTreeMap<(String, String), GraphEdge>,
}

#[derive(Serialize, Deserialize)]
struct GraphExport {
    nodes: Vec<GraphNode>,
    edges: Vec<GraphEdge>,
}

impl SharingGraph {
    pub fn status(&self, domain: &str) -> Option<MrppStatus> {
        self.nodes.get(domain).copied()
    }

    pub fn contains(&self, domain: &str) -> bool {
        self.nodes.contains_key(domain)
    }

    pub fn nodes(&self) -> impl Iterator<Item = GraphNode> + '_ {
        self.nodes.iter().map(|(d, s)| GraphNode { domain: d.clone(), mrpp_status: *s })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Edges ordered by `(from, to)`.
    pub fn edges(&self) -> impl Iterator<Item = &GraphEdge> {
        self.edges.values()
    }

    pub fn edge(&self, from: &str, to: &str) -> Option<&GraphEdge> {
        self.edges.get(&(from.to_string(), to.to_string()))
    }

    /// Direct recipients of `domain`'s data, in lexicographic order.
    pub fn successors<'a>(&'a self, domain: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .range((domain.to_string(), String::new())..)
            .take_while(move |((from, _), _)| from == domain)
            .map(|((_, to), _)| to.as_str())
    }

    pub fn require(&self, domain: &str) -> Result<MrppStatus, GraphError> {
        self.status(domain).ok_or_else(|| GraphError::UnknownParty(domain.to_string()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(GraphExport {
            nodes: self.nodes().collect(),
            edges: self.edges.values().cloned().collect(),
        })
        .expect("graph export serializes")
    }

    pub fn to_canonical(&self) -> String {
        to_canonical(&self.to_json())
    }

    /// Rebuild a graph from its JSON export, checking its invariants.
    pub fn from_json(value: serde_json::Value) -> Result<Self, GraphError> {
        let export: GraphExport =
            serde_json::from_value(value).map_err(|e| GraphError::InvalidExport(e.to_string()))?;
        let mut graph = SharingGraph::default();
        for node in export.nodes {
            if graph.nodes.insert(node.domain.clone(), node.mrpp_status).is_some() {
                return Err(GraphError::DuplicateParty(node.domain));
            }
        }
        for edge in export.edges {
            if !graph.contains(&edge.from) || !graph.contains(&edge.to) {
                return Err(GraphError::InvalidExport(format!("edge {} -> {} has a missing endpoint", edge.from, edge.to)));
            }
            let key = (edge.from.clone(), edge.to.clone());
            if graph.edges.insert(key, edge).is_some() {
                return Err(GraphError::InvalidExport("duplicate edge".into()));
            }
        }
        Ok(graph)
    }
}

/// Build the graph from accepted policies plus the domains whose submitted
/// policies failed validation.
pub fn build_graph<'a>(
    policies: impl IntoIterator<Item = &'a Policy>,
    known_invalid: &BTreeSet<String>,
) -> Result<SharingGraph, GraphError> {
    let mut graph = SharingGraph::default();
    let policies: Vec<&Policy> = policies.into_iter().collect();

    for p in &policies {
        if graph.nodes.insert(p.party.clone(), MrppStatus::Valid).is_some() {
            return Err(GraphError::DuplicateParty(p.party.clone()));
        }
    }
    for domain in known_invalid {
        if graph.nodes.insert(domain.clone(), MrppStatus::Invalid).is_some() {
            return Err(GraphError::DuplicateParty(domain.clone()));
        }
    }

    for p in &policies {
        for flow in &p.flows {
            let partner = flow.partner.domain.clone();
            graph.nodes.entry(partner.clone()).or_insert(MrppStatus::Absent);
            let (key, by_sender) = match flow.direction {
                Direction::Outbound => ((p.party.clone(), partner), true),
                Direction::Inbound => ((partner, p.party.clone()), false),
            };
            let edge = graph.edges.entry(key.clone()).or_insert_with(|| GraphEdge {
                from: key.0,
                to: key.1,
                categories: BTreeSet::new(),
                status: EdgeStatus::Unverifiable,
                declared_by_sender: false,
                declared_by_receiver: false,
            });
            edge.categories.extend(flow.categories.iter().copied());
            if by_sender {
                edge.declared_by_sender = true;
            } else {
                edge.declared_by_receiver = true;
            }
        }
    }

    let nodes = &graph.nodes;
    for edge in graph.edges.values_mut() {
        edge.status = match (edge.declared_by_sender, edge.declared_by_receiver) {
            (true, true) => EdgeStatus::Confirmed,
            (true, false) if nodes[&edge.to] == MrppStatus::Absent => EdgeStatus::Unverifiable,
            (true, false) => EdgeStatus::SenderOnly,
            (false, true) if nodes[&edge.from] == MrppStatus::Absent => EdgeStatus::Unverifiable,
            (false, true) => EdgeStatus::ReceiverOnly,
            (false, false) => unreachable!("edges exist only when declared"),
        };
    }
    Ok(graph)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditFinding {
    pub from: String,
    pub to: String,
    pub status: EdgeStatus,
    pub categories: BTreeSet<DataCategory>,
    pub explanation: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub findings: Vec<AuditFinding>,
    /// Edges touching a party with no policy; they cannot be confirmed and
    /// are not findings.
    pub unverifiable: usize,
}

/// One-way references: transfers that only one of two policy-publishing
/// parties acknowledges.
pub fn audit_references(graph: &SharingGraph) -> AuditReport {
    let mut report = AuditReport::default();
    for edge in graph.edges() {
        let explanation = match edge.status {
            EdgeStatus::SenderOnly => format!(
                "{} declares sending data to {}, which does not declare receiving it",
                edge.from, edge.to
            ),
            EdgeStatus::ReceiverOnly => format!(
                "{} declares receiving data from {}, which does not declare sending it",
                edge.to, edge.from
            ),
            EdgeStatus::Unverifiable => {
                report.unverifiable += 1;
                continue;
            }
            EdgeStatus::Confirmed => continue,
        };
        report.findings.push(AuditFinding {
            from: edge.from.clone(),
            to: edge.to.clone(),
            status: edge.status,
            categories: edge.categories.clone(),
            explanation,
        });
    }
    report
}

/// Breadth-first search over outbound edges from `origin`. Each reached
/// node maps to its hop distance and the predecessor on the
/// lexicographically smallest shortest path.
pub fn bfs_tree(graph: &SharingGraph, origin: &str) -> Result<BTreeMap<String, (usize, Option<String>)>, GraphError> {
    graph.require(origin)?;
    let mut tree = BTreeMap::new();
    tree.insert(origin.to_string(), (0, None));
    let mut queue = VecDeque::from([origin.to_string()]);
    while let Some(node) = queue.pop_front() {
        let dist = tree[&node].0;
        for next in graph.successors(&node) {
            if !tree.contains_key(next) {
                tree.insert(next.to_string(), (dist + 1, Some(node.clone())));
                queue.push_back(next.to_string());
            }
        }
    }
    Ok(tree)
}

/// Every party reachable from `origin` along outbound edges of any status,
/// with hop distance. `origin` itself is at distance 0.
pub fn sharing_web(graph: &SharingGraph, origin: &str) -> Result<BTreeMap<String, usize>, GraphError> {
    Ok(bfs_tree(graph, origin)?.into_iter().map(|(d, (dist, _))| (d, dist)).collect())
}

/// Shortest path `origin → … → target`, ties broken by the smallest next
/// hop; `None` when unreachable.
pub fn shortest_path(graph: &SharingGraph, origin: &str, target: &str) -> Result<Option<Vec<String>>, GraphError> {
    let tree = bfs_tree(graph, origin)?;
    Ok(path_in_tree(&tree, target))
}

pub(crate) fn path_in_tree(tree: &BTreeMap<String, (usize, Option<String>)>, target: &str) -> Option<Vec<String>> {
    let mut path = vec![target.to_string()];
    let mut cursor = tree.get(target)?;
    while let Some(prev) = &cursor.1 {
        path.push(prev.clone());
        cursor = &tree[prev];
    }
    path.reverse();
    Some(path)
}
