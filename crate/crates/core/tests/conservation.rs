use cliqueweight::evolution::StepKind;
use cliqueweight::theory::binomial;
use cliqueweight::{run, GraphState, ModelParams, RandomSource};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn params(n_model: usize, p: f64, q: f64, r: f64) -> ModelParams {
    ModelParams {
        n_model,
        p,
        q,
        r,
        ..ModelParams::default()
    }
}

#[test]
fn weight_totals_are_exact() {
    for n_model in [3usize, 4] {
        for (seed, (p, q, r)) in [
            (1u64, (0.5, 0.5, 0.5)),
            (7, (0.2, 0.9, 0.1)),
            (11, (0.9, 0.1, 0.8)),
        ] {
            let params = params(n_model, p, q, r);
            let mut state = GraphState::new(&params).unwrap();
            let mut rng = RandomSource::new(seed, 0);
            let nm = n_model as u64;
            for n in 1..=10_000u64 {
                state.step(&params, &mut rng).unwrap();
                if n % 1000 == 0 {
                    assert_eq!(state.level_total(1), Some(nm * (n + 1)));
                    assert_eq!(state.level_total(n_model - 1), Some(nm * (n + 1)));
                    assert_eq!(state.level_total(n_model), Some(n + 1));
                    assert_eq!(state.level_total(2), Some(nm * (nm - 1) / 2 * (n + 1)));
                }
            }
        }
    }
}

#[test]
fn all_levels_totals_are_exact() {
    let mut params = params(5, 0.5, 0.5, 0.5);
    params.track_all_levels = true;
    let mut state = GraphState::new(&params).unwrap();
    let mut rng = RandomSource::new(3, 0);
    for _ in 0..2000 {
        state.step(&params, &mut rng).unwrap();
    }
    for m in 1..=5u64 {
        assert_eq!(
            state.level_total(m as usize),
            Some(binomial(5, m) as u64 * 2001)
        );
    }
}

#[test]
fn edge_count_never_exceeds_pairs() {
    let params = params(3, 0.3, 0.2, 0.4);
    let mut state = GraphState::new(&params).unwrap();
    let mut rng = RandomSource::new(5, 0);
    for _ in 0..5000 {
        state.step(&params, &mut rng).unwrap();
        let v = state.vertex_count() as u64;
        assert!(state.edges().len() as u64 <= v * (v - 1) / 2);
        let degree_sum: u64 = state.vertices().degrees().iter().map(|&d| d as u64).sum();
        assert_eq!(degree_sum, 2 * state.edges().len() as u64);
    }
}

#[test]
fn step_kinds_follow_their_probabilities() {
    let (p, q, r) = (0.4, 0.7, 0.3);
    let params = params(3, p, q, r);
    let mut state = GraphState::new(&params).unwrap();
    let mut rng = RandomSource::new(9, 0);
    let mut counts = [0u64; 4];
    let n = 40_000;
    for _ in 0..n {
        let out = state.step(&params, &mut rng).unwrap();
        counts[StepKind::ALL.iter().position(|&k| k == out.kind).unwrap()] += 1;
    }
    let stat: f64 = StepKind::ALL
        .iter()
        .zip(counts)
        .map(|(k, c)| {
            let e = k.probability(p, q, r) * n as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    let pval = 1.0 - ChiSquared::new(3.0).unwrap().cdf(stat);
    assert!(pval > 1e-3, "chi-square p-value {pval}, counts {counts:?}");
}

#[test]
fn weights_count_interactions() {
    // Replays every step and recounts, for each clique at each level, the
    // interactions whose participant set contains it.
    for n_model in [3usize, 4] {
        let mut params = params(n_model, 0.5, 0.5, 0.5);
        params.track_all_levels = true;
        let mut state = GraphState::new(&params).unwrap();
        let mut rng = RandomSource::new(21, 0);
        let mut history: Vec<Vec<u32>> = vec![(0..n_model as u32).collect()];
        for _ in 0..100 {
            history.push(state.step(&params, &mut rng).unwrap().participants);
        }
        let contains = |set: &[u32], key: &[u32]| key.iter().all(|k| set.contains(k));
        for v in 0..state.vertex_count() as u32 {
            let hits = history.iter().filter(|s| s.contains(&v)).count() as u64;
            assert_eq!(state.vertices().weight(v), Some(hits));
        }
        for m in 2..=n_model {
            let reg = state.registry(m).unwrap();
            for (key, w) in reg.iter() {
                let hits = history.iter().filter(|s| contains(s, key)).count() as u64;
                assert_eq!(w, hits, "level {m} key {key:?}");
            }
            // Every sub-clique of every participant set is registered.
            let mut seen = std::collections::BTreeSet::new();
            for s in &history {
                cliqueweight::evolution::for_each_subset(s, m, |k| {
                    seen.insert(k.to_vec());
                    Ok::<_, ()>(())
                })
                .unwrap();
            }
            assert_eq!(seen.len(), reg.len());
        }
    }
}

#[test]
fn trajectories_are_deterministic() {
    let params = ModelParams {
        steps: 5000,
        ..params(3, 0.5, 0.5, 0.5)
    };
    let a = run(&params, 42, 3).unwrap();
    let b = run(&params, 42, 3).unwrap();
    let c = run(&params, 42, 4).unwrap();
    assert_eq!(a.snapshots, b.snapshots);
    assert_ne!(a.last(), c.last());
}

#[test]
fn vertex_growth_rate_is_p() {
    let params = ModelParams {
        steps: 100_000,
        checkpoints: vec![100_000],
        ..params(3, 0.5, 0.5, 0.5)
    };
    let ratios: Vec<f64> = (0..5)
        .map(|s| {
            let t = run(&params, 100, s).unwrap();
            t.last().vertices as f64 / t.last().n as f64
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!((mean - 0.5).abs() < 0.005, "{ratios:?}");
}
