use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uav_llt::llt::Lifetime;
use uav_llt::oracle::enumerate_best_route;
use uav_llt::routing::{max_min_route, LinkGraph, RoutingError};
use uav_llt::validate::{random_link_graph, routing_trial};

fn triangle() -> LinkGraph<&'static str> {
    let mut g = LinkGraph::new(0.0);
    g.add_edge("s", "a", Lifetime::Finite(10.0));
    g.add_edge("a", "t", Lifetime::Finite(8.0));
    g.add_edge("s", "t", Lifetime::Finite(5.0));
    g
}

#[test]
fn triangle_prefers_the_longer_lasting_detour() {
    let r = max_min_route(&triangle(), &"s", &"t").unwrap().unwrap();
    assert_eq!(r.nodes, ["s", "a", "t"]);
    assert_eq!(r.bottleneck_llt, Lifetime::Finite(8.0));
}

#[test]
fn unknown_and_equal_endpoints() {
    let g = triangle();
    assert!(matches!(
        max_min_route(&g, &"s", &"x"),
        Err(RoutingError::NodeUnknown(_))
    ));
    assert_eq!(
        max_min_route(&g, &"s", &"s"),
        Err(RoutingError::SameEndpoints)
    );
}

#[test]
fn matches_enumeration_on_random_graphs() {
    for i in 0..1000 {
        let (g, src, dst, same) = routing_trial(17, i);
        assert!(
            same,
            "graph #{i} {src}->{dst}: {:?}",
            g.edges().collect::<Vec<_>>()
        );
    }
}

fn scaled(g: &LinkGraph<u32>, factor: f64) -> LinkGraph<u32> {
    let mut out = LinkGraph::new(g.snapshot_time);
    for &n in g.nodes() {
        out.add_node(n);
    }
    for (&a, &b, w) in g.edges() {
        out.add_edge(a, b, w.map(|x| x * factor));
    }
    out
}

proptest! {
    #[test]
    fn raising_a_link_never_lowers_the_bottleneck(seed in any::<u64>(), pick in any::<prop::sample::Index>(), bump in 0.5..5.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = random_link_graph(&mut rng, 8, 0.5);
        let n = g.node_count() as u32;
        let before = max_min_route(&g, &0, &(n - 1)).unwrap().map(|r| r.bottleneck_llt);
        let edges: Vec<(u32, u32, Lifetime)> = g.edges().map(|(&a, &b, w)| (a, b, w)).collect();
        if edges.is_empty() {
            return Ok(());
        }
        let (a, b, w) = edges[pick.index(edges.len())];
        g.set_edge_weight(&a, &b, w.map(|x| x + bump));
        let after = max_min_route(&g, &0, &(n - 1)).unwrap().map(|r| r.bottleneck_llt);
        prop_assert!(after >= before);
    }

    #[test]
    fn scaling_every_link_scales_the_bottleneck(seed in any::<u64>(), factor in 0.01..100.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_link_graph(&mut rng, 8, 0.5);
        let n = g.node_count() as u32;
        let base = max_min_route(&g, &0, &(n - 1)).unwrap();
        let big = max_min_route(&scaled(&g, factor), &0, &(n - 1)).unwrap();
        match (base, big) {
            (None, None) => {}
            (Some(x), Some(y)) => {
                prop_assert_eq!(&x.nodes, &y.nodes);
                match (x.bottleneck_llt, y.bottleneck_llt) {
                    (Lifetime::Finite(p), Lifetime::Finite(q)) => prop_assert!((p * factor - q).abs() <= 1e-12 * q),
                    (p, q) => prop_assert_eq!(p, q),
                }
            }
            (x, y) => prop_assert!(false, "reachability changed: {:?} vs {:?}", x, y),
        }
    }

    #[test]
    fn route_is_a_simple_path_with_the_reported_bottleneck(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_link_graph(&mut rng, 10, 0.4);
        let n = g.node_count() as u32;
        let fast = max_min_route(&g, &0, &(n - 1)).unwrap();
        prop_assert_eq!(&fast, &enumerate_best_route(&g, &0, &(n - 1)).unwrap());
        if let Some(r) = fast {
            let mut seen = std::collections::BTreeSet::new();
            prop_assert!(r.nodes.iter().all(|v| seen.insert(*v)));
            let min = r.nodes.windows(2).map(|w| g.edge(&w[0], &w[1]).expect("hop is a link")).min().unwrap();
            prop_assert_eq!(min, r.bottleneck_llt);
            prop_assert_eq!(r.hops(), r.nodes.len() - 1);
        }
    }
}
