use cliqueweight::analysis::fit_theoretical_slope;
use cliqueweight::theory::{
    clique_weight_dist, edge_rate_dist, edge_weight_dist, exact::RationalConstants,
    vertex_weight_dist, DerivedConstants,
};

#[test]
fn theoretical_slopes_match_exponents() {
    let c = DerivedConstants::new(0.5, 0.5, 0.5).unwrap();
    let window = (1000, 10_000);
    let x = fit_theoretical_slope(&vertex_weight_dist(&c, 10_000), window).unwrap();
    let u = fit_theoretical_slope(&edge_weight_dist(&c, 10_000), window).unwrap();
    let t = fit_theoretical_slope(&clique_weight_dist(&c, 10_000), window).unwrap();
    assert!((x.slope + 3.4).abs() < 0.05, "{}", x.slope);
    assert!((u.slope + 4.0).abs() < 0.05, "{}", u.slope);
    assert!((t.slope + 5.0).abs() < 0.05, "{}", t.slope);
}

#[test]
fn sequences_decrease_and_sums_stay_below_one() {
    for (p, q, r) in [(0.5, 0.5, 0.5), (0.2, 0.8, 0.9), (0.7, 0.3, 0.1)] {
        let c = DerivedConstants::new(p, q, r).unwrap();
        for d in [
            vertex_weight_dist(&c, 2000),
            edge_weight_dist(&c, 2000),
            clique_weight_dist(&c, 2000),
        ] {
            assert!(d.values.iter().all(|&v| v > 0.0));
            assert!(d.values[1..].windows(2).all(|w| w[1] < w[0]));
            let mut acc = 0.0;
            for v in &d.values {
                let next = acc + v;
                assert!(next >= acc);
                acc = next;
            }
            assert!(acc <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn float_and_rational_recurrences_agree() {
    let c = DerivedConstants::new(0.5, 0.5, 0.5).unwrap();
    let rc = RationalConstants::from_f64(0.5, 0.5, 0.5).unwrap();
    let to_f = |x: &num_rational::BigRational| {
        use num_traits::ToPrimitive;
        x.to_f64().unwrap()
    };
    for (fl, ex) in [
        (edge_weight_dist(&c, 100).values, rc.edge_weights(100)),
        (edge_rate_dist(&c, 100).values, rc.edge_rates(100)),
        (clique_weight_dist(&c, 100).values, rc.clique_weights(100)),
        (vertex_weight_dist(&c, 100).values, rc.vertex_weights(100)),
    ] {
        for (a, b) in fl.iter().zip(&ex) {
            let b = to_f(b);
            assert!((a - b).abs() <= 1e-12 * b, "{a} vs {b}");
        }
    }
}
