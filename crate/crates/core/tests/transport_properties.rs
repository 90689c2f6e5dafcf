use fleetgrid::transport::{all_pairs_costs, random_network, shortest_path, solve_route, TransportNetwork};
use proptest::prelude::*;

fn network_strategy() -> impl Strategy<Value = TransportNetwork> {
    (2usize..=12, 0usize..=24, any::<bool>(), any::<u64>())
        .prop_map(|(n, extra, symmetric, seed)| random_network(n, extra, symmetric, 1..=12, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn milp_route_is_simple_and_matches_dijkstra(net in network_strategy(), s in 1usize..=12, e in 1usize..=12) {
        let n = net.node_count();
        let (s, e) = ((s - 1) % n + 1, (e - 1) % n + 1);
        let milp = solve_route(&net, s, e).unwrap().expect("strongly connected");
        let dijkstra = shortest_path(&net, s, e).unwrap().expect("strongly connected");
        prop_assert_eq!(milp.total_cost, dijkstra.total_cost);
        prop_assert!(milp.is_simple_chain());
        let sum: f64 = milp.edges.iter().map(|e| e.weight).sum();
        prop_assert_eq!(sum, milp.total_cost);
    }

    #[test]
    fn closed_edges_are_never_used(net in network_strategy(), closures in prop::collection::vec(any::<prop::sample::Index>(), 0..6), s in 1usize..=12, e in 1usize..=12) {
        let mut net = net;
        let count = net.edges().len();
        for idx in &closures {
            net.restrict_edge(idx.index(count));
        }
        let n = net.node_count();
        let (s, e) = ((s - 1) % n + 1, (e - 1) % n + 1);
        let milp = solve_route(&net, s, e).unwrap();
        let dijkstra = shortest_path(&net, s, e).unwrap();
        prop_assert_eq!(milp.is_some(), dijkstra.is_some());
        if let (Some(m), Some(d)) = (milp, dijkstra) {
            prop_assert_eq!(m.total_cost, d.total_cost);
            for edge in m.edges.iter().chain(&d.edges) {
                let id = net.edge_id(edge.from, edge.to).unwrap();
                prop_assert!(!net.is_restricted(id));
            }
        }
    }

    #[test]
    fn cost_table_obeys_triangle_inequality(net in network_strategy()) {
        let n = net.node_count();
        let origins: Vec<usize> = (1..=n).collect();
        let table = all_pairs_costs(&net, &origins).unwrap();
        for row in 0..n {
            prop_assert_eq!(table.cost(row, origins[row]), Some(0.0));
            for i in 1..=n {
                for k in 1..=n {
                    let via = table.cost(row, k).unwrap() + table.cost(k - 1, i).unwrap();
                    prop_assert!(table.cost(row, i).unwrap() <= via);
                }
            }
        }
    }
}

#[test]
fn generator_is_reproducible() {
    let a = random_network(14, 10, true, 1..=12, 7);
    let b = random_network(14, 10, true, 1..=12, 7);
    assert_eq!(a, b);
    assert!(a.edges().iter().all(|e| (1.0..=12.0).contains(&e.weight)));
}
