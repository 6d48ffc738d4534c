use scldpc::de_awgn::*;
use scldpc::protograph::{build_chain, build_connected};

fn random_density(q: &QuantConfig, seed: u64) -> QuantDensity<f64> {
    let mut d = QuantDensity::<f64>::point_mass(q, 0).unwrap();
    // small deterministic generator, enough for test data
    let mut s = seed;
    for p in d.pmf.iter_mut() {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        *p = (s >> 33) as f64 / (1u64 << 31) as f64;
    }
    let total: f64 = d.pmf.iter().sum();
    d.pmf.iter_mut().for_each(|p| *p /= total);
    d
}

/// Check-node combination by direct enumeration of bin pairs, using the
/// hyperbolic tangent form of the rule.
fn brute_boxplus(x: &QuantDensity<f64>, y: &QuantDensity<f64>) -> Vec<f64> {
    let h = x.half as isize;
    let mut out = vec![0.0; x.pmf.len()];
    for (i, &px) in x.pmf.iter().enumerate() {
        for (j, &py) in y.pmf.iter().enumerate() {
            let (a, b) = (x.llr(i), y.llr(j));
            let t = (a / 2.0).tanh() * (b / 2.0).tanh();
            let exact = 2.0 * t.atanh();
            let k = (exact / x.delta).round() as isize;
            out[(k + h) as usize] += px * py;
        }
    }
    out
}

#[test]
fn boxplus_matches_brute_force() {
    let q = QuantConfig { delta: 0.25, l_max: 6.0 };
    let table = BoxplusTable::new(&q).unwrap();
    for seed in 1..4 {
        let (x, y) = (random_density(&q, seed), random_density(&q, seed + 100));
        let fast = table.boxplus(&x, &y).unwrap();
        let slow = brute_boxplus(&x, &y);
        for (a, b) in fast.pmf.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn boxplus_is_commutative() {
    let q = QuantConfig { delta: 0.125, l_max: 8.0 };
    let table = BoxplusTable::new(&q).unwrap();
    let (x, y) = (random_density(&q, 7), random_density(&q, 8));
    let (a, b) = (table.boxplus(&x, &y).unwrap(), table.boxplus(&y, &x).unwrap());
    for (u, v) in a.pmf.iter().zip(&b.pmf) {
        assert!((u - v).abs() < 1e-14);
    }
}

#[test]
fn channel_density_closed_form() {
    let q = QuantConfig::default();
    let p = AwgnChannelParams::new(0.0, 0.5).unwrap();
    assert!((p.sigma2() - 1.0).abs() < 1e-15);
    let d = channel_density::<f64>(&p, &q).unwrap();
    assert!((d.mass() - 1.0).abs() < 1e-12);
    assert!((d.mean() - 2.0).abs() < q.delta);
    assert!((d.variance() - 4.0).abs() < 4.0 * q.delta);
}

#[test]
fn strong_channel_saturates() {
    let q = QuantConfig::default();
    let d = channel_density::<f64>(&AwgnChannelParams::new(30.0, 0.5).unwrap(), &q).unwrap();
    assert!(d.pmf[d.len() - 1] > 1.0 - 1e-12);
}

#[test]
fn connected_l12_brackets_its_threshold() {
    let g = build_connected(12).unwrap();
    let q = QuantConfig::default();
    let run = AwgnRunConfig::default();
    let rate = 7.0 / 18.0;
    let good = de_awgn_run::<f64>(&g, &AwgnChannelParams::new(0.80, rate).unwrap(), &q, &run).unwrap();
    let bad = de_awgn_run::<f64>(&g, &AwgnChannelParams::new(0.70, rate).unwrap(), &q, &run).unwrap();
    assert!(good.converged);
    assert!(!bad.converged);
    assert!(good.max_pe_trace.windows(2).all(|w| w[1] <= w[0] + 1e-15));
}

#[test]
fn short_chain_threshold() {
    let g = build_chain(3, 6, 6).unwrap();
    let t = threshold_awgn::<f64>(&g, &QuantConfig::default(), &AwgnSearch::default()).unwrap();
    assert!((t - 1.1894).abs() < 0.05, "{t}");
}

#[test]
fn bracket_must_straddle() {
    let g = build_chain(3, 6, 6).unwrap();
    let search = AwgnSearch { low_db: 2.0, high_db: 3.0, ..AwgnSearch::default() };
    assert!(threshold_awgn::<f64>(&g, &QuantConfig::default(), &search).is_err());
}
