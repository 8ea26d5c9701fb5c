//! Monte Carlo model of directed social networks that grow through birth, meeting
//! and myopic linking, with the closed-form results used to check it.
//!
//! * [`utility`] and [`society`]: type profiles, the link rule, gregariousness, homophily.
//! * [`graph`]: the evolving follow graph.
//! * [`dynamics`]: the stochastic birth, meeting and linking processes.
//! * [`metrics`]: bonding, popularity and bridging measurements.
//! * [`oracles`]: analytic predictions with their validity regimes.

pub mod dynamics;
pub mod graph;
pub mod metrics;
pub mod oracles;
pub mod society;
pub mod stats;
pub mod utility;

pub use dynamics::{simulate, SimOptions, Simulation, StepEvent, Trajectory};
pub use graph::{AgentId, EvolvingGraph};
pub use society::{MeetingPolicy, SocietyConfig, TypeId};
pub use utility::{AggregationCurve, CurveFamily, TypeProfile};
