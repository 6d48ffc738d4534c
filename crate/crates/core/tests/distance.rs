use scldpc::distance::*;
use scldpc::protograph::{build_chain, build_connected, Protograph};

fn entropy(d: f64) -> f64 {
    -(d * d.ln() + (1.0 - d) * (1.0 - d).ln())
}

#[test]
fn zero_weight_is_zero() {
    let g = build_connected(8).unwrap();
    let p = spectral_shape::<f64>(&g, 0.0).unwrap();
    assert_eq!(p.r, 0.0);
}

#[test]
fn small_weights_are_negative() {
    let g = build_connected(8).unwrap();
    for d in [1e-4, 1e-3, 5e-3, 0.012] {
        assert!(spectral_shape::<f64>(&g, d).unwrap().r < 0.0, "delta={d}");
    }
}

#[test]
fn half_weight_gives_rate() {
    // at delta = 1/2 every balanced word is equally likely: r = R ln 2
    let g = build_chain(3, 6, 6).unwrap();
    let p = spectral_shape::<f64>(&g, 0.5).unwrap();
    assert!((p.r - std::f64::consts::LN_2 / 3.0).abs() < 1e-6, "{}", p.r);
}

#[test]
fn bounded_by_binary_entropy() {
    let g = build_connected(10).unwrap();
    for d in [0.02, 0.1, 0.3] {
        assert!(spectral_shape::<f64>(&g, d).unwrap().r < entropy(d));
    }
}

#[test]
fn relabelling_does_not_change_r() {
    let g = build_connected(8).unwrap();
    let (nv, nc) = (g.n_v, g.n_c);
    let vmap = |v: usize| (v * 7 + 3) % nv;
    let cmap = |c: usize| nc - 1 - c;
    let edges: Vec<(usize, usize)> = g.edges.iter().map(|&(c, v)| (cmap(c), vmap(v))).collect();
    let mut meta = g.node_meta.clone();
    for v in 0..nv {
        meta.variables[vmap(v)] = g.node_meta.variables[v];
    }
    for c in 0..nc {
        meta.checks[cmap(c)] = g.node_meta.checks[c];
    }
    let h = Protograph::new(nv, nc, edges, meta).unwrap();
    for d in [0.005, 0.02, 0.08] {
        let (a, b) = (spectral_shape::<f64>(&g, d).unwrap().r, spectral_shape::<f64>(&h, d).unwrap().r);
        assert!((a - b).abs() < 1e-9, "delta={d}: {a} vs {b}");
    }
}

#[test]
fn growth_rate_end_points() {
    let cfg = GrowthConfig::default();
    for (l, target) in [(8, 0.0137), (24, 0.0036)] {
        let s = growth_rate::<f64>(&build_connected(l).unwrap(), &cfg).unwrap();
        let dm = s.delta_min.unwrap();
        assert!((dm - target).abs() < 5e-4, "L={l}: {dm}");
        assert!(s.delta_grid.iter().zip(&s.r_values).filter(|(d, _)| **d < dm).all(|(_, r)| *r < 0.0));
    }
}

#[test]
fn spectrum_reuses_its_setup() {
    let g = build_chain(3, 6, 8).unwrap();
    let ws = WeightSpectrum::<f64>::new(&g).unwrap();
    let cfg = GrowthConfig::default();
    let a = ws.point(0.05, &cfg).unwrap();
    let b = spectral_shape::<f64>(&g, 0.05).unwrap();
    assert!((a.r - b.r).abs() < 1e-12);
    let total: f64 = a.fractions.iter().sum::<f64>() / g.n_v as f64;
    assert!((total - 0.05).abs() < 1e-9);
}

#[test]
fn invalid_weight_rejected() {
    let g = build_chain(3, 6, 8).unwrap();
    assert!(spectral_shape::<f64>(&g, -0.1).is_err());
    assert!(spectral_shape::<f64>(&g, 1.5).is_err());
}
