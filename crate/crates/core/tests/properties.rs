use std::collections::VecDeque;

use proptest::prelude::*;
use socnet::dynamics::{replay, SimOptions, Simulation};
use socnet::graph::OmegaTracker;
use socnet::metrics::{bonding_capital, fosd_test, popularity_distribution, popularity_series, total_variation, Dominance, EmpiricalPmf};
use socnet::oracles::{eeft_closed_form, eft_pmf_closed_form, optimal_bonding_with_shares};
use socnet::utility::Candidate;
use socnet::{AgentId, AggregationCurve, EvolvingGraph, MeetingPolicy, SocietyConfig, TypeId, TypeProfile};

fn curve() -> impl Strategy<Value = AggregationCurve> {
    (any::<bool>(), 0.5f64..3.0).prop_map(|(sqrt, scale)| {
        if sqrt {
            AggregationCurve::sqrt(scale)
        } else {
            AggregationCurve::log(scale)
        }
    })
}

fn profile() -> impl Strategy<Value = TypeProfile> {
    (curve(), prop_oneof![Just(0.0), Just(1.0), 0.0f64..1.0], 0.12f64..0.8, 0.0f64..=1.0).prop_map(
        |(curve, alpha_diff, link_cost, opportunism)| TypeProfile {
            alpha_same: 1.0,
            alpha_diff,
            link_cost,
            curve,
            opportunism,
            pop_share: 0.0,
        },
    )
}

fn society() -> impl Strategy<Value = SocietyConfig> {
    (
        prop::collection::vec((profile(), 0.1f64..1.0), 1..4),
        30u32..220,
        any::<u64>(),
        any::<bool>(),
    )
        .prop_map(|(parts, horizon, seed, consume)| {
            let total: f64 = parts.iter().map(|(_, w)| w).sum();
            let n = parts.len();
            let mut profiles: Vec<TypeProfile> = parts
                .into_iter()
                .map(|(mut p, w)| {
                    p.pop_share = w / total;
                    p
                })
                .collect();
            let head: f64 = profiles[..n - 1].iter().map(|p| p.pop_share).sum();
            profiles[n - 1].pop_share = 1.0 - head;
            let mut cfg = SocietyConfig::new(profiles, horizon, seed, 1);
            if consume {
                cfg.meeting_policy = MeetingPolicy::ConsumeRedundant;
            }
            cfg
        })
}

fn components_by_bfs(g: &EvolvingGraph) -> (usize, Vec<usize>) {
    let adj = g.undirected_adjacency();
    let mut label = vec![usize::MAX; adj.len()];
    let mut next = 0;
    let mut omega = 0;
    for s in 0..adj.len() {
        if label[s] != usize::MAX {
            continue;
        }
        let mut size = 0;
        let mut queue = VecDeque::from([s]);
        label[s] = next;
        while let Some(v) = queue.pop_front() {
            size += 1;
            for &w in &adj[v] {
                if label[w] == usize::MAX {
                    label[w] = next;
                    queue.push_back(w);
                }
            }
        }
        if size > 1 {
            omega += 1;
        }
        next += 1;
    }
    (omega, label)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gregariousness_is_nonincreasing_in_offset(p in profile(), a in 0.0f64..20.0, b in 0.0f64..20.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(p.gregariousness(lo) >= p.gregariousness(hi));
        prop_assert!(p.max_cross_links(lo) >= p.max_cross_links(hi));
    }

    #[test]
    fn homophily_is_a_fraction(p in profile()) {
        let h = p.homophily_index();
        prop_assert!((0.0..=1.0).contains(&h));
    }

    #[test]
    fn link_rule_is_strictly_positive_marginal(p in profile(), s in 0u32..30, d in 0u32..30, same in any::<bool>()) {
        let c = Candidate::of(same);
        prop_assert_eq!(p.link_decision(s, d, c), p.marginal_link_utility(s, d, c) > 0.0);
    }

    #[test]
    fn gregariousness_is_the_first_argmax(p in profile()) {
        let l = p.base_gregariousness();
        let best = (0..=400u32).fold((0u32, f64::NEG_INFINITY), |acc, x| {
            let u = p.utility(x, 0);
            if u > acc.1 { (x, u) } else { acc }
        });
        prop_assert_eq!(l, best.0);
    }

    #[test]
    fn simulated_graphs_are_consistent(cfg in society()) {
        let mut tracker = OmegaTracker::new();
        let mut tracked = Vec::new();
        let mut hook = |_t: u32, g: &EvolvingGraph, ev: &[socnet::StepEvent]| {
            tracker.add_agent();
            for e in ev.iter().filter(|e| e.linked) {
                tracker.add_edge(e.actor, e.met);
            }
            tracked.push((tracker.omega(), g.components_undirected().omega));
        };
        let traj = Simulation::new(&cfg, 0).unwrap().run(SimOptions { record_events: true, snapshot_every: 0 }, &mut hook);
        let g = &traj.graph;
        for (a, b) in tracked {
            prop_assert_eq!(a, b);
        }

        let out: u32 = g.agents().iter().map(|a| a.out_degree()).sum();
        let inn: u32 = g.agent_ids().map(|id| g.in_degree(id)).sum();
        prop_assert_eq!(out as usize, g.edge_count());
        prop_assert_eq!(inn as usize, g.edge_count());

        let types: Vec<TypeId> = g.agents().iter().map(|a| a.type_id()).collect();
        let rebuilt = replay(&cfg, &types, &traj.events);
        prop_assert_eq!(rebuilt.edges(), g.edges());
        for id in g.agent_ids() {
            prop_assert_eq!(rebuilt.agent(id).eft(), g.agent(id).eft());
        }

        for id in g.agent_ids() {
            let a = g.agent(id);
            let p = cfg.profile(a.type_id());
            if p.homophily_index() == 1.0 && p.alpha_diff == 0.0 {
                prop_assert_eq!(a.n_diff(), 0);
            }
            prop_assert_eq!(a.is_satisfied(), p.is_saturated(a.n_same(), a.n_diff()));
            let k = g.followees_of_followees(id);
            prop_assert!(!k.contains(&id));
            prop_assert!(k.iter().all(|&j| !a.follows(j)));
            let series = popularity_series(g, id, g.t());
            prop_assert!(series.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(*series.last().unwrap(), g.in_degree(id));
        }

        let (omega, labels) = components_by_bfs(g);
        let comps = g.components_undirected();
        prop_assert_eq!(comps.omega, omega);
        for x in 0..labels.len() {
            for y in 0..labels.len() {
                prop_assert_eq!(labels[x] == labels[y], comps.labels[x] == comps.labels[y]);
            }
        }

        let counts: Vec<f64> = (0..cfg.type_count())
            .map(|k| types.iter().filter(|t| t.0 == k).count() as f64 / g.len() as f64)
            .collect();
        let bound = optimal_bonding_with_shares(&cfg, &counts);
        prop_assert!(bonding_capital(g, &cfg).total <= bound + 1e-12);

        for k in 0..cfg.type_count() {
            if let Ok(pmf) = popularity_distribution(g, TypeId(k)) {
                prop_assert!((pmf.mass().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tolerant_agents_form_networks_in_exactly_gregariousness_rounds(cfg in society()) {
        let mut cfg = cfg;
        cfg.meeting_policy = MeetingPolicy::ExcludeFollowees;
        for p in &mut cfg.profiles {
            p.alpha_diff = p.alpha_same;
        }
        let g = socnet::simulate(&cfg, 2).unwrap().graph;
        for a in g.agents() {
            let l = cfg.profile(a.type_id()).base_gregariousness();
            if let Some(e) = a.eft() {
                prop_assert_eq!(e, l);
            }
        }
    }

    #[test]
    fn same_stream_same_graph(cfg in society()) {
        let a = socnet::simulate(&cfg, 3).unwrap();
        let b = socnet::simulate(&cfg, 3).unwrap();
        prop_assert_eq!(a.graph.edges(), b.graph.edges());
        prop_assert_eq!(a.events, b.events);
    }

    #[test]
    fn time_slices_agree_with_the_past(cfg in society(), frac in 0.1f64..1.0) {
        let traj = socnet::simulate(&cfg, 1).unwrap();
        let g = &traj.graph;
        let t = ((g.t() as f64 * frac) as u32).max(1);
        let past = g.at(t);
        prop_assert_eq!(past.t(), t);
        prop_assert_eq!(past.edge_count(), g.edges().iter().filter(|e| e.formed <= t).count());
        for id in past.agent_ids() {
            prop_assert_eq!(past.in_degree(id), g.follower_dates(id).filter(|&d| d <= t).count() as u32);
        }
    }

    #[test]
    fn fosd_of_a_pmf_with_itself_is_neither(xs in prop::collection::vec(0u64..40, 1..200), tol in 0.0f64..0.2) {
        let a = EmpiricalPmf::from_samples(xs).unwrap();
        prop_assert_eq!(fosd_test(&a, &a, tol), Dominance::Neither);
        prop_assert_eq!(total_variation(&a, &a), 0.0);
    }

    #[test]
    fn shifted_samples_dominate(xs in prop::collection::vec(0u64..40, 1..200), shift in 1u64..5) {
        let a = EmpiricalPmf::from_samples(xs.iter().map(|x| x + shift)).unwrap();
        let b = EmpiricalPmf::from_samples(xs).unwrap();
        prop_assert_eq!(fosd_test(&a, &b, 0.0), Dominance::ADominates);
        prop_assert_eq!(fosd_test(&b, &a, 0.0), Dominance::BDominates);
    }

    #[test]
    fn closed_form_pmf_mean_is_the_eeft(cost in 0.15f64..0.6, share in 0.2f64..1.0, gamma in 0.0f64..=1.0) {
        let p = TypeProfile {
            alpha_same: 1.0,
            alpha_diff: 0.0,
            link_cost: cost,
            curve: AggregationCurve::sqrt(1.0),
            opportunism: gamma,
            pop_share: share,
        };
        let pmf = eft_pmf_closed_form(&p, 3000);
        prop_assert!(pmf.tail < 1e-12);
        prop_assert!(pmf.mass.iter().all(|&m| m >= 0.0));
        let eeft = eeft_closed_form(&p);
        prop_assert!((pmf.mean_truncated() - eeft).abs() < 1e-8 * eeft.max(1.0));
    }
}

#[test]
fn ties_formed_this_step_are_not_yet_visible() {
    let mut g = EvolvingGraph::new();
    for _ in 0..4 {
        g.add_agent(TypeId(0), false);
    }
    g.add_edge(AgentId(1), AgentId(2)).unwrap();
    g.add_edge(AgentId(2), AgentId(3)).unwrap();
    assert!(g.followees_of_followees(AgentId(1)).is_empty());
    g.add_agent(TypeId(0), false);
    assert_eq!(g.followees_of_followees(AgentId(1)), vec![AgentId(3)]);
}
