use cdam_core::experiments::{correlations, ExperimentConfig, Setting};
use cdam_core::graph::{build_cycle, build_random_regular};
use cdam_core::{init_state, normalize, random_patterns, Dynamics, MemoryGraph, StopRule};
use proptest::prelude::*;

/// Two disjoint copies of K5.
fn twin_cliques() -> MemoryGraph {
    let mut g = MemoryGraph::new(10, false);
    for base in [0, 5] {
        for i in 0..5 {
            for j in i + 1..5 {
                g.add_edge(base + i, base + j).unwrap();
            }
        }
    }
    g
}

fn final_correlations(g: &MemoryGraph, setting: Setting, trigger: usize, seed: u64) -> Vec<f64> {
    let cfg = ExperimentConfig::default().with_seed(seed);
    let patterns = random_patterns(cfg.n, g.vertex_count(), seed).unwrap();
    let coupling = normalize(g);
    let dynamics = Dynamics::new(&patterns, &coupling, cfg.params(setting)).unwrap();
    let s0 = init_state(&patterns, trigger, cfg.noise_c, seed).unwrap();
    let (state, _) = dynamics.converge(&s0, StopRule::fixed(101)).unwrap();
    correlations(&state.sigma, &patterns)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// With h > a >= 0 activity stays inside the trigger's component: every
    /// pattern of that component beats every pattern of the other.
    #[test]
    fn activity_stays_in_component(
        a in 0.0f64..0.45,
        gap in 0.1f64..1.0,
        trigger in 0usize..10,
        seed in 0u64..1000,
    ) {
        let g = twin_cliques();
        let r = final_correlations(&g, Setting::new(a, a + gap), trigger, seed);
        let comp = g.components();
        let inside = (0..10).filter(|&v| comp[v] == comp[trigger]).map(|v| r[v]);
        let outside = (0..10).filter(|&v| comp[v] != comp[trigger]).map(|v| r[v]);
        let lo = inside.fold(f64::INFINITY, f64::min);
        let hi = outside.fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo > hi, "inside min {lo} <= outside max {hi}");
    }

    /// Undirected couplings are symmetric with spectral radius at most one.
    #[test]
    fn undirected_coupling_is_symmetric(p in 4usize..24, seed in 0u64..500) {
        let p = p + p % 2;
        let g = build_random_regular(p, 3, seed).unwrap();
        let m = normalize(&g);
        let mat = m.matrix();
        for i in 0..p {
            for j in 0..p {
                prop_assert!((mat[[i, j]] - mat[[j, i]]).abs() < 1e-12);
            }
            // row sums of D^-1/2 A D^-1/2 on a regular graph are exactly one
            prop_assert!((mat.row(i).sum() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn runs_are_reproducible_from_seed() {
    let g = build_cycle(12, false).unwrap();
    let x = final_correlations(&g, Setting::new(-0.5, 1.5), 3, 42);
    let y = final_correlations(&g, Setting::new(-0.5, 1.5), 3, 42);
    assert_eq!(x, y);
    let z = final_correlations(&g, Setting::new(-0.5, 1.5), 3, 43);
    assert_ne!(x, z);
}
