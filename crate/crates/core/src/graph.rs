//! Directed evolving graph with birth-ordered agents.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::society::TypeId;

/// Agents are identified by their birth date, starting at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl AgentId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    #[inline]
    pub fn from_index(idx: usize) -> Self {
        AgentId(idx as u32 + 1)
    }

    pub fn birth(self) -> u32 {
        self.0
    }
}

impl std::fmt::Display for AgentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-edge on agent {0}")]
    SelfEdge(AgentId),
    #[error("duplicate edge {0} -> {1}")]
    Duplicate(AgentId, AgentId),
    #[error("agent {0} does not exist")]
    UnknownAgent(AgentId),
}

/// A directed tie and the date it formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: AgentId,
    pub to: AgentId,
    pub formed: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Tie {
    other: AgentId,
    formed: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    type_id: TypeId,
    followees: Vec<Tie>,
    n_same: u32,
    n_diff: u32,
    rounds: u32,
    satisfied_at: Option<u32>,
    eft: Option<u32>,
}

impl AgentState {
    pub fn type_id(&self) -> TypeId {
        self.type_id
    }

    pub fn n_same(&self) -> u32 {
        self.n_same
    }

    pub fn n_diff(&self) -> u32 {
        self.n_diff
    }

    pub fn out_degree(&self) -> u32 {
        self.followees.len() as u32
    }

    pub fn followees(&self) -> impl Iterator<Item = AgentId> + '_ {
        self.followees.iter().map(|t| t.other)
    }

    pub fn follows(&self, other: AgentId) -> bool {
        self.followees.iter().any(|t| t.other == other)
    }

    pub fn is_satisfied(&self) -> bool {
        self.eft.is_some()
    }

    /// Meeting rounds taken until satisfaction.
    pub fn eft(&self) -> Option<u32> {
        self.eft
    }

    /// Date at which the agent became satisfied.
    pub fn satisfied_at(&self) -> Option<u32> {
        self.satisfied_at
    }

    /// Meeting rounds taken so far.
    pub fn rounds(&self) -> u32 {
        self.rounds
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvolvingGraph {
    agents: Vec<AgentState>,
    followers: Vec<Vec<Tie>>,
    edges: Vec<Edge>,
}

impl EvolvingGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Current date, equal to the number of agents born so far.
    pub fn t(&self) -> u32 {
        self.agents.len() as u32
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in formation order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn agent_ids(&self) -> impl Iterator<Item = AgentId> {
        (1..=self.t()).map(AgentId)
    }

    pub fn agent(&self, id: AgentId) -> &AgentState {
        &self.agents[id.index()]
    }

    pub fn agents(&self) -> &[AgentState] {
        &self.agents
    }

    pub fn type_of(&self, id: AgentId) -> TypeId {
        self.agents[id.index()].type_id
    }

    pub fn in_degree(&self, id: AgentId) -> u32 {
        self.followers[id.index()].len() as u32
    }

    pub fn followers(&self, id: AgentId) -> impl Iterator<Item = AgentId> + '_ {
        self.followers[id.index()].iter().map(|t| t.other)
    }

    /// Dates at which each follower of `id` arrived, in order.
    pub fn follower_dates(&self, id: AgentId) -> impl Iterator<Item = u32> + '_ {
        self.followers[id.index()].iter().map(|t| t.formed)
    }

    /// Births a new agent. An agent that wants no links is satisfied on arrival with EFT 0.
    pub fn add_agent(&mut self, type_id: TypeId, satisfied_at_birth: bool) -> AgentId {
        let t = self.t() + 1;
        self.agents.push(AgentState {
            type_id,
            followees: Vec::new(),
            n_same: 0,
            n_diff: 0,
            rounds: 0,
            satisfied_at: satisfied_at_birth.then_some(t),
            eft: satisfied_at_birth.then_some(0),
        });
        self.followers.push(Vec::new());
        AgentId(t)
    }

    fn check(&self, id: AgentId) -> Result<(), GraphError> {
        if id.0 == 0 || id.0 > self.t() {
            Err(GraphError::UnknownAgent(id))
        } else {
            Ok(())
        }
    }

    /// Adds `from -> to` stamped with the current date.
    pub fn add_edge(&mut self, from: AgentId, to: AgentId) -> Result<(), GraphError> {
        self.check(from)?;
        self.check(to)?;
        if from == to {
            return Err(GraphError::SelfEdge(from));
        }
        if self.agents[from.index()].follows(to) {
            return Err(GraphError::Duplicate(from, to));
        }
        let formed = self.t();
        let same = self.type_of(from) == self.type_of(to);
        let a = &mut self.agents[from.index()];
        a.followees.push(Tie { other: to, formed });
        if same {
            a.n_same += 1;
        } else {
            a.n_diff += 1;
        }
        self.followers[to.index()].push(Tie { other: from, formed });
        self.edges.push(Edge { from, to, formed });
        Ok(())
    }

    pub(crate) fn count_round(&mut self, id: AgentId) {
        self.agents[id.index()].rounds += 1;
    }

    pub(crate) fn mark_satisfied(&mut self, id: AgentId) {
        let t = self.t();
        let a = &mut self.agents[id.index()];
        if a.eft.is_none() {
            a.eft = Some(a.rounds);
            a.satisfied_at = Some(t);
        }
    }

    /// Followees of followees of `i`, excluding `i` and its followees, seen through
    /// the snapshot taken at the start of the current step. Sorted ascending.
    pub fn followees_of_followees(&self, i: AgentId) -> Vec<AgentId> {
        self.choice_set_before(i, self.t())
    }

    /// Same as [`Self::followees_of_followees`] using only ties formed before `date`.
    pub fn choice_set_before(&self, i: AgentId, date: u32) -> Vec<AgentId> {
        let me = &self.agents[i.index()];
        let mut out = Vec::new();
        for tie in me.followees.iter().filter(|t| t.formed < date) {
            for second in self.agents[tie.other.index()].followees.iter() {
                if second.formed >= date {
                    break;
                }
                if second.other != i && !me.follows(second.other) {
                    out.push(second.other);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Component structure of the undirected version of the graph.
    pub fn components_undirected(&self) -> Components {
        let mut uf = UnionFind::new(self.len());
        for e in &self.edges {
            uf.union(e.from.index(), e.to.index());
        }
        Components::from_union_find(&mut uf)
    }

    /// Induced subgraph on `i` and everything reachable from it along at most `depth`
    /// directed ties.
    pub fn ego_network(&self, i: AgentId, depth: u32) -> EgoNetwork {
        let mut dist = vec![u32::MAX; self.len()];
        dist[i.index()] = 0;
        let mut queue = VecDeque::from([i]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u.index()];
            if d == depth {
                continue;
            }
            for v in self.agent(u).followees() {
                if dist[v.index()] == u32::MAX {
                    dist[v.index()] = d + 1;
                    queue.push_back(v);
                }
            }
        }
        let inside = |a: AgentId| dist[a.index()] != u32::MAX;
        let nodes: Vec<AgentId> = self.agent_ids().filter(|&a| inside(a)).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| inside(e.from) && inside(e.to))
            .map(|e| (e.from, e.to))
            .collect();
        EgoNetwork { center: i, nodes, edges }
    }

    /// The graph as it stood at the end of step `t`.
    pub fn at(&self, t: u32) -> EvolvingGraph {
        let t = t.min(self.t());
        let mut g = EvolvingGraph::new();
        for a in &self.agents[..t as usize] {
            let sat = a.satisfied_at.is_some_and(|s| s <= t);
            let id = g.add_agent(a.type_id, false);
            if sat {
                let st = &mut g.agents[id.index()];
                st.eft = a.eft;
                st.satisfied_at = a.satisfied_at;
            }
        }
        for e in self.edges.iter().take_while(|e| e.formed <= t) {
            g.push_edge_unchecked(*e);
        }
        g
    }

    fn push_edge_unchecked(&mut self, e: Edge) {
        let same = self.type_of(e.from) == self.type_of(e.to);
        let a = &mut self.agents[e.from.index()];
        a.followees.push(Tie { other: e.to, formed: e.formed });
        if same {
            a.n_same += 1;
        } else {
            a.n_diff += 1;
        }
        self.followers[e.to.index()].push(Tie { other: e.from, formed: e.formed });
        self.edges.push(e);
    }

    /// Undirected simple adjacency lists (directions dropped, reciprocal ties merged).
    pub fn undirected_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.len()];
        for e in &self.edges {
            adj[e.from.index()].push(e.to.index());
            adj[e.to.index()].push(e.from.index());
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Per-agent summary row for export.
    pub fn agent_summaries(&self) -> Vec<AgentSummary> {
        self.agent_ids()
            .map(|id| {
                let a = self.agent(id);
                AgentSummary {
                    agent: id,
                    type_id: a.type_id,
                    out_degree: a.out_degree(),
                    in_degree: self.in_degree(id),
                    eft: a.eft,
                    satisfied: a.is_satisfied(),
                }
            })
            .collect()
    }

    /// Edge list as CSV with header `from,to,t_formed`.
    pub fn edges_csv(&self) -> String {
        let mut s = String::from("from,to,t_formed\n");
        for e in &self.edges {
            s.push_str(&format!("{},{},{}\n", e.from, e.to, e.formed));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentSummary {
    pub agent: AgentId,
    #[serde(rename = "type")]
    pub type_id: TypeId,
    pub out_degree: u32,
    pub in_degree: u32,
    pub eft: Option<u32>,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EgoNetwork {
    pub center: AgentId,
    pub nodes: Vec<AgentId>,
    pub edges: Vec<(AgentId, AgentId)>,
}

/// Undirected components. `omega` counts only components with at least two agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub omega: usize,
    /// Component label per agent index, numbered in order of first appearance.
    pub labels: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl Components {
    fn from_union_find(uf: &mut UnionFind) -> Self {
        let n = uf.parent.len();
        let mut label_of_root = vec![usize::MAX; n];
        let mut labels = Vec::with_capacity(n);
        let mut sizes = Vec::new();
        for x in 0..n {
            let r = uf.find(x);
            if label_of_root[r] == usize::MAX {
                label_of_root[r] = sizes.len();
                sizes.push(0);
            }
            let l = label_of_root[r];
            sizes[l] += 1;
            labels.push(l);
        }
        let omega = sizes.iter().filter(|&&s| s > 1).count();
        Components { omega, labels, sizes }
    }

    pub fn singletons(&self) -> usize {
        self.sizes.iter().filter(|&&s| s == 1).count()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub(crate) fn push(&mut self) {
        self.parent.push(self.parent.len());
        self.size.push(1);
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns the sizes of the two merged sets, or `None` if already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> Option<(usize, usize)> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return None;
        }
        let (sa, sb) = (self.size[ra], self.size[rb]);
        let (big, small) = if sa >= sb { (ra, rb) } else { (rb, ra) };
        self.parent[small] = big;
        self.size[big] = sa + sb;
        Some((sa, sb))
    }
}

/// Maintains the non-singleton component count as ties are added.
#[derive(Debug, Clone)]
pub struct OmegaTracker {
    uf: UnionFind,
    omega: usize,
}

impl OmegaTracker {
    pub fn new() -> Self {
        Self { uf: UnionFind::new(0), omega: 0 }
    }

    pub fn add_agent(&mut self) {
        self.uf.push();
    }

    pub fn add_edge(&mut self, from: AgentId, to: AgentId) {
        if let Some((sa, sb)) = self.uf.union(from.index(), to.index()) {
            self.omega = self.omega + 1 - usize::from(sa > 1) - usize::from(sb > 1);
        }
    }

    pub fn omega(&self) -> usize {
        self.omega
    }
}

impl Default for OmegaTracker {
    fn default() -> Self {
        Self::new()
    }
}
