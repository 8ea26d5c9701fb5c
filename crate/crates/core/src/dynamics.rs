//! Birth, meeting and linking processes advanced in discrete time.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{AgentId, EvolvingGraph};
use crate::society::{ConfigError, MeetingPolicy, SocietyConfig, TypeId};
use crate::utility::{Candidate, TypeProfile};

/// Identifies the random stream of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Process {
    Birth = 0,
    Meeting = 1,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    fn rng(&self, process: Process) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id.wrapping_shl(1) | process as u64);
        rng
    }

    pub fn birth_rng(&self) -> ChaCha8Rng {
        self.rng(Process::Birth)
    }

    pub fn meeting_rng(&self) -> ChaCha8Rng {
        self.rng(Process::Meeting)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeetVia {
    FolloweeOfFollowee,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepEvent {
    pub t: u32,
    pub actor: AgentId,
    pub met: AgentId,
    pub via: MeetVia,
    pub linked: bool,
}

/// Draws a newborn's type from the population shares.
pub struct BirthProcess {
    dist: WeightedIndex<f64>,
}

impl BirthProcess {
    pub fn new(config: &SocietyConfig) -> Self {
        let shares: Vec<f64> = config.profiles.iter().map(|p| p.pop_share).collect();
        Self { dist: WeightedIndex::new(shares).expect("validated shares") }
    }

    pub fn draw<R: Rng>(&self, rng: &mut R) -> TypeId {
        TypeId(self.dist.sample(rng))
    }
}

/// Adds one agent of a freshly drawn type.
pub fn birth_step<R: Rng>(
    g: &mut EvolvingGraph,
    config: &SocietyConfig,
    births: &BirthProcess,
    rng: &mut R,
) -> AgentId {
    let ty = births.draw(rng);
    g.add_agent(ty, config.profile(ty).is_saturated(0, 0))
}

/// `rank`-th agent (0-based) among `1..=t` once the sorted `excluded` ids are skipped.
fn nth_not_excluded(rank: u32, excluded: &[AgentId]) -> AgentId {
    let mut id = rank + 1;
    for e in excluded {
        if e.0 <= id {
            id += 1;
        } else {
            break;
        }
    }
    AgentId(id)
}

/// One meeting for agent `i`. Returns `None` when nobody is available to meet.
pub fn meeting_draw<R: Rng>(
    g: &EvolvingGraph,
    i: AgentId,
    opportunism: f64,
    policy: MeetingPolicy,
    rng: &mut R,
) -> Option<(AgentId, MeetVia)> {
    let choice = g.followees_of_followees(i);
    if !choice.is_empty() && rng.gen::<f64>() < opportunism {
        let k = rng.gen_range(0..choice.len());
        return Some((choice[k], MeetVia::FolloweeOfFollowee));
    }
    let mut excluded: Vec<AgentId> = match policy {
        MeetingPolicy::ExcludeFollowees => g.agent(i).followees().collect(),
        MeetingPolicy::ConsumeRedundant => Vec::new(),
    };
    excluded.push(i);
    excluded.sort_unstable();
    let pool = g.t() - excluded.len() as u32;
    if pool == 0 {
        return None;
    }
    let rank = rng.gen_range(0..pool);
    Some((nth_not_excluded(rank, &excluded), MeetVia::Uniform))
}

/// Applies the link rule to a meeting and updates satisfaction. Returns whether a tie formed.
pub fn linking_step(g: &mut EvolvingGraph, i: AgentId, met: AgentId, profile: &TypeProfile) -> bool {
    let me = g.agent(i);
    if me.follows(met) {
        return false;
    }
    let candidate = Candidate::of(g.type_of(met) == me.type_id());
    if !profile.link_decision(me.n_same(), me.n_diff(), candidate) {
        return false;
    }
    g.add_edge(i, met).expect("meeting yields a fresh, non-self tie");
    let me = g.agent(i);
    if profile.is_saturated(me.n_same(), me.n_diff()) {
        g.mark_satisfied(i);
    }
    true
}

/// Types that may leave agents unsatisfied forever: full opportunism with `0 < h < 1`.
pub fn detect_potentially_unsatisfied(config: &SocietyConfig) -> Vec<TypeId> {
    config
        .profiles
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            let h = p.homophily_index();
            p.opportunism == 1.0 && h > 0.0 && h < 1.0
        })
        .map(|(k, _)| TypeId(k))
        .collect()
}

/// Called once at the end of every step.
pub trait StepObserver {
    fn on_step(&mut self, t: u32, graph: &EvolvingGraph, events: &[StepEvent]);
}

impl StepObserver for () {
    fn on_step(&mut self, _: u32, _: &EvolvingGraph, _: &[StepEvent]) {}
}

impl<F: FnMut(u32, &EvolvingGraph, &[StepEvent])> StepObserver for F {
    fn on_step(&mut self, t: u32, graph: &EvolvingGraph, events: &[StepEvent]) {
        self(t, graph, events)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimOptions {
    pub record_events: bool,
    /// Take a [`Snapshot`] every this many steps; 0 disables.
    pub snapshot_every: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: u32,
    pub edges: usize,
    pub omega: usize,
    pub satisfied: usize,
}

/// Outcome of one replication.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SocietyConfig,
    pub stream: RngStream,
    pub graph: EvolvingGraph,
    pub events: Vec<StepEvent>,
    pub snapshots: Vec<Snapshot>,
}

/// Step-by-step engine for one replication.
pub struct Simulation {
    config: SocietyConfig,
    stream: RngStream,
    graph: EvolvingGraph,
    births: BirthProcess,
    birth_rng: ChaCha8Rng,
    meeting_rng: ChaCha8Rng,
    active: Vec<AgentId>,
    step_events: Vec<StepEvent>,
}

impl Simulation {
    pub fn new(config: &SocietyConfig, stream_id: u64) -> Result<Self, ConfigError> {
        config.validate()?;
        let stream = RngStream::new(config.seed, stream_id);
        Ok(Self {
            config: config.clone(),
            stream,
            graph: EvolvingGraph::new(),
            births: BirthProcess::new(config),
            birth_rng: stream.birth_rng(),
            meeting_rng: stream.meeting_rng(),
            active: Vec::new(),
            step_events: Vec::new(),
        })
    }

    pub fn graph(&self) -> &EvolvingGraph {
        &self.graph
    }

    /// Unsatisfied agents in birth order.
    pub fn active(&self) -> &[AgentId] {
        &self.active
    }

    /// Advances one date: birth, then one meeting per unsatisfied agent in birth order.
    pub fn step(&mut self) -> &[StepEvent] {
        self.step_events.clear();
        let born = birth_step(&mut self.graph, &self.config, &self.births, &mut self.birth_rng);
        if !self.graph.agent(born).is_satisfied() {
            self.active.push(born);
        }
        let t = self.graph.t();
        for idx in 0..self.active.len() {
            let i = self.active[idx];
            let profile = &self.config.profiles[self.graph.type_of(i).0];
            let drawn = meeting_draw(
                &self.graph,
                i,
                profile.opportunism,
                self.config.meeting_policy,
                &mut self.meeting_rng,
            );
            let Some((met, via)) = drawn else { continue };
            self.graph.count_round(i);
            let linked = linking_step(&mut self.graph, i, met, profile);
            self.step_events.push(StepEvent { t, actor: i, met, via, linked });
        }
        let g = &self.graph;
        self.active.retain(|&i| !g.agent(i).is_satisfied());
        &self.step_events
    }

    /// Runs to the horizon.
    pub fn run<O: StepObserver>(mut self, options: SimOptions, observer: &mut O) -> Trajectory {
        let mut events = Vec::new();
        let mut snapshots = Vec::new();
        for _ in 0..self.config.horizon {
            self.step();
            let t = self.graph.t();
            observer.on_step(t, &self.graph, &self.step_events);
            if options.record_events {
                events.extend_from_slice(&self.step_events);
            }
            if options.snapshot_every > 0 && t % options.snapshot_every == 0 {
                snapshots.push(Snapshot {
                    t,
                    edges: self.graph.edge_count(),
                    omega: self.graph.components_undirected().omega,
                    satisfied: self.graph.agents().iter().filter(|a| a.is_satisfied()).count(),
                });
            }
        }
        Trajectory { config: self.config, stream: self.stream, graph: self.graph, events, snapshots }
    }
}

/// Runs one replication with the event log recorded.
pub fn simulate(config: &SocietyConfig, stream_id: u64) -> Result<Trajectory, ConfigError> {
    let sim = Simulation::new(config, stream_id)?;
    Ok(sim.run(SimOptions { record_events: true, snapshot_every: 0 }, &mut ()))
}

/// Rebuilds the graph from birth types and the event log.
pub fn replay(config: &SocietyConfig, types: &[TypeId], events: &[StepEvent]) -> EvolvingGraph {
    let mut g = EvolvingGraph::new();
    let mut cursor = 0;
    for &ty in types {
        g.add_agent(ty, config.profile(ty).is_saturated(0, 0));
        let t = g.t();
        while cursor < events.len() && events[cursor].t == t {
            let e = events[cursor];
            g.count_round(e.actor);
            if e.linked {
                g.add_edge(e.actor, e.met).expect("logged tie is valid");
                let a = g.agent(e.actor);
                if config.profile(a.type_id()).is_saturated(a.n_same(), a.n_diff()) {
                    g.mark_satisfied(e.actor);
                }
            }
            cursor += 1;
        }
    }
    g
}

/// Event log as CSV with header `t,actor,met,via,linked`.
pub fn events_csv(events: &[StepEvent]) -> String {
    let mut s = String::from("t,actor,met,via,linked\n");
    for e in events {
        let via = match e.via {
            MeetVia::FolloweeOfFollowee => "followee_of_followee",
            MeetVia::Uniform => "uniform",
        };
        s.push_str(&format!("{},{},{},{},{}\n", e.t, e.actor, e.met, via, e.linked));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::utility::AggregationCurve;

    fn profile(alpha_diff: f64, cost: f64, gamma: f64, share: f64) -> TypeProfile {
        TypeProfile {
            alpha_same: 1.0,
            alpha_diff,
            link_cost: cost,
            curve: AggregationCurve::sqrt(1.0),
            opportunism: gamma,
            pop_share: share,
        }
    }

    #[test]
    fn skip_excluded_ranks() {
        let ex = [AgentId(2), AgentId(3), AgentId(6)];
        let got: Vec<u32> = (0..4).map(|r| nth_not_excluded(r, &ex).0).collect();
        assert_eq!(got, [1, 4, 5, 7]);
    }

    #[test]
    fn horizon_one_is_a_singleton() {
        let cfg = SocietyConfig::new(vec![profile(0.0, 0.3, 0.5, 1.0)], 2, 3, 1);
        let mut sim = Simulation::new(&cfg, 0).unwrap();
        assert!(sim.step().is_empty());
        assert_eq!(sim.graph().t(), 1);
        assert_eq!(sim.graph().edge_count(), 0);
    }

    #[test]
    fn saturated_newborn() {
        let cfg = SocietyConfig::new(vec![profile(0.0, 1.5, 0.5, 1.0)], 50, 3, 1);
        let traj = simulate(&cfg, 0).unwrap();
        assert!(traj.events.is_empty());
        assert!(traj.graph.agents().iter().all(|a| a.eft() == Some(0)));
    }

    #[test]
    fn single_type_births() {
        let cfg = SocietyConfig::new(vec![profile(0.0, 0.3, 0.5, 1.0)], 100, 3, 1);
        let traj = simulate(&cfg, 0).unwrap();
        assert!(traj.graph.agents().iter().all(|a| a.type_id() == TypeId(0)));
    }

    #[test]
    fn hand_trace_reaches_gregariousness() {
        // L*(0) = 3 at cost 0.3, one type, tolerant: every meeting links
        let cfg = SocietyConfig::new(vec![profile(1.0, 0.3, 0.0, 1.0)], 8, 11, 1);
        let mut sim = Simulation::new(&cfg, 0).unwrap();
        sim.step();
        let ev = sim.step().to_vec();
        assert_eq!(ev.len(), 2);
        assert_eq!((ev[0].actor, ev[0].met, ev[0].linked), (AgentId(1), AgentId(2), true));
        assert_eq!((ev[1].actor, ev[1].met, ev[1].linked), (AgentId(2), AgentId(1), true));
        for _ in 0..2 {
            sim.step();
        }
        let g = sim.graph();
        let a2 = g.agent(AgentId(2));
        assert_eq!(a2.out_degree(), 3);
        assert_eq!(a2.eft(), Some(3));
        assert_eq!(a2.satisfied_at(), Some(4));
        let a1 = g.agent(AgentId(1));
        assert_eq!(a1.eft(), Some(3));
        assert!(!sim.active().contains(&AgentId(2)));
    }

    #[test]
    fn linking_rules() {
        let h1 = profile(0.0, 0.3, 0.0, 0.5);
        let mut g = EvolvingGraph::new();
        g.add_agent(TypeId(0), false);
        g.add_agent(TypeId(1), false);
        assert!(!linking_step(&mut g, AgentId(1), AgentId(2), &h1));
        let h0 = profile(1.0, 0.3, 0.0, 0.5);
        assert!(linking_step(&mut g, AgentId(1), AgentId(2), &h0));
        assert!(!linking_step(&mut g, AgentId(1), AgentId(2), &h0));
    }

    #[test]
    fn unsatisfiable_types_are_flagged() {
        let mixed = profile(0.7, 0.3, 1.0, 0.5);
        assert!((mixed.homophily_index() - 1.0 / 3.0).abs() < 1e-12);
        let cfg = |p: TypeProfile| {
            let mut other = profile(0.0, 0.3, 1.0, 0.5);
            other.pop_share = 1.0 - p.pop_share;
            SocietyConfig::new(vec![p, other], 10, 0, 1)
        };
        assert_eq!(detect_potentially_unsatisfied(&cfg(mixed.clone())), vec![TypeId(0)]);
        let mut relaxed = mixed;
        relaxed.opportunism = 0.99;
        assert!(detect_potentially_unsatisfied(&cfg(relaxed)).is_empty());
        assert!(detect_potentially_unsatisfied(&cfg(profile(0.0, 0.3, 1.0, 0.5))).is_empty());
    }

    #[test]
    fn event_csv_header() {
        let ev = [StepEvent { t: 2, actor: AgentId(2), met: AgentId(1), via: MeetVia::Uniform, linked: true }];
        assert_eq!(events_csv(&ev), "t,actor,met,via,linked\n2,2,1,uniform,true\n");
    }
}
