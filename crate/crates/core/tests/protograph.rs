use num_rational::Ratio;
use proptest::prelude::*;
use scldpc::protograph::*;

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

#[test]
fn short_chain_check_degrees() {
    let g = build_chain(3, 6, 8).unwrap();
    assert_eq!((g.n_v, g.n_c), (16, 10));
    assert_eq!(sorted(g.check_degrees()), vec![2, 2, 4, 4, 6, 6, 6, 6, 6, 6]);
}

#[test]
fn smallest_chain() {
    let g = build_chain(3, 6, 3).unwrap();
    assert_eq!((g.n_v, g.n_c), (6, 5));
    assert!(g.variable_degrees().iter().all(|&d| d == 3));
    assert_eq!(g.edges.len(), 18);
}

#[test]
fn chain_rates() {
    assert_eq!(build_chain(3, 6, 18).unwrap().design_rate().unwrap(), Ratio::new(16, 36));
    assert_eq!(design_rate(&build_chain(3, 6, 6).unwrap()).unwrap(), Ratio::new(1, 3));
}

#[test]
fn connected_counts_and_rates() {
    let g = build_connected(24).unwrap();
    assert_eq!((g.n_v, g.n_c), (144, 80));
    assert_eq!(g.design_rate().unwrap(), Ratio::new(4, 9));
    assert_eq!(build_connected(8).unwrap().design_rate().unwrap(), Ratio::new(1, 3));
    assert_eq!(build_connected(12).unwrap().design_rate().unwrap(), Ratio::new(7, 18));
    assert_eq!(build_connected(20).unwrap().design_rate().unwrap(), Ratio::new(13, 30));
    for l in (8..=40).step_by(2) {
        let g = build_connected(l).unwrap();
        assert_eq!((g.n_v, g.n_c), (6 * l, 3 * l + 8));
        assert_eq!(g.design_rate().unwrap(), Ratio::new(3 * l as u64 - 8, 6 * l as u64));
    }
}

#[test]
fn connected_degree_census() {
    for l in [8, 12, 24] {
        let g = build_connected(l).unwrap();
        // only the free chain ends keep their reduced-degree checks
        let short = sorted(g.check_degrees().into_iter().filter(|&d| d != 6).collect());
        assert_eq!(short, vec![2, 2, 2, 2, 4, 4, 4, 4], "L={l}");
        let vd = g.variable_degrees();
        assert!(vd.iter().all(|&d| d == 3 || d == 4));
        // six connection edges at each of the four bridge ends
        assert_eq!(vd.iter().filter(|&&d| d == 4).count(), 24);
        assert!(g.is_connected());
    }
}

#[test]
fn connected_rejects_bad_lengths() {
    for l in [0, 2, 7, 9] {
        assert!(build_connected(l).is_err(), "L={l}");
    }
}

#[test]
fn custom_matches_builders() {
    let spec = ConnectionSpec::two_chain(24, &ConnectionLayout::default()).unwrap();
    assert_eq!(build_custom(&spec).unwrap(), build_connected(24).unwrap());

    let single = ConnectionSpec {
        chain_lengths: vec![10],
        bridges: vec![],
        pattern: AttachmentPattern::default(),
        degree_cap: 4,
    };
    assert_eq!(build_custom(&single).unwrap().base_matrix(), build_chain(3, 6, 10).unwrap().base_matrix());
}

#[test]
fn custom_single_bridge_node_count() {
    // 2 x 24 chain variables plus 2 per bridge segment
    let at = AttachPoint { start: 4, descending: false };
    let spec = ConnectionSpec {
        chain_lengths: vec![12, 12],
        bridges: vec![BridgeSpec { chain_a: 0, attach_a: at, chain_b: 1, attach_b: at, length: 3 }],
        pattern: AttachmentPattern::contiguous(),
        degree_cap: 4,
    };
    let g = build_custom(&spec).unwrap();
    assert_eq!(g.n_v, 2 * 24 + 2 * 3);
    assert!(g.check_degrees().iter().filter(|&&d| d < 6).all(|&d| d == 2 || d == 4));
}

#[test]
fn base_matrix_and_json_round_trip() {
    let g = build_connected(10).unwrap();
    let mut buf = Vec::new();
    g.write_base_matrix(&mut buf).unwrap();
    let back = Protograph::read_base_matrix(&buf[..]).unwrap();
    assert_eq!(back.base_matrix(), g.base_matrix());
    assert_eq!(Protograph::from_json(&g.to_json().unwrap()).unwrap(), g);
}

#[test]
fn slices_cover_the_components() {
    let g = build_connected(12).unwrap();
    let names = g.slice_names();
    assert_eq!(names, vec!["chain0", "chain1", "bridge0", "bridge1"]);
    let total: usize = names.iter().map(|n| g.slice(n).unwrap().len()).sum();
    assert_eq!(total, g.n_v);
    assert!(g.slice("chain7").is_err());
}

proptest! {
    #[test]
    fn connected_rate_identity(half in 4usize..60) {
        let l = 2 * half;
        let g = build_connected(l).unwrap();
        prop_assert_eq!(g.design_rate().unwrap(), Ratio::new(3 * l as u64 - 8, 6 * l as u64));
        prop_assert_eq!(g.edges.len(), 3 * g.n_v + 24);
    }

    #[test]
    fn chain_edge_count(l in 3usize..80) {
        let g = build_chain(3, 6, l).unwrap();
        prop_assert_eq!(g.edges.len(), 3 * g.n_v);
        prop_assert_eq!(g.design_rate().unwrap(), Ratio::new(l as u64 - 2, 2 * l as u64));
    }
}
