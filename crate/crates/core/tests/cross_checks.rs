//! Agreement between independent routes to the same quantity.

use spinlab::dynamics::{run_chain, ChainKind, ChainSpec, RecordPolicy, UpMode};
use spinlab::oracle::{enumerate, transition_matrix, tv};
use spinlab::{Family, SpinParams, SpinSystem};

#[test]
fn long_run_frequencies_match_the_gibbs_law() {
    let g = Family::Cycle { n: 4 }.build().unwrap();
    let s = SpinSystem::free(g, SpinParams::new(0.0, 1.0, 1.0).unwrap()).unwrap();
    let mu = enumerate(&s).unwrap();
    for kind in [ChainKind::Glauber, ChainKind::VertexField { theta: 0.5 }] {
        let spec = ChainSpec { kind, up_mode: UpMode::ExactEnumeration, seed: 11 };
        let traj = run_chain(&s, &spec, 60_000, RecordPolicy::All, None).unwrap();
        let mut freq = vec![0.0; mu.probs.len()];
        for st in &traj.states {
            let m = st.iter().enumerate().fold(0usize, |a, (v, &b)| a | (b as usize) << v);
            freq[m] += 1.0 / traj.states.len() as f64;
        }
        assert!(tv(&freq, &mu.probs) < 0.02, "{:?}", spec.kind);
    }
}

#[test]
fn nested_glauber_up_step_approaches_exact_rows() {
    let g = Family::Path { n: 3 }.build().unwrap();
    let s = SpinSystem::free(g, SpinParams::new(0.5, 1.2, 0.8).unwrap()).unwrap();
    let mu = enumerate(&s).unwrap();
    let spec = ChainSpec {
        kind: ChainKind::VertexField { theta: 0.4 },
        up_mode: UpMode::NestedGlauber { updates: Some(200) },
        seed: 5,
    };
    let traj = run_chain(&s, &spec, 40_000, RecordPolicy::All, None).unwrap();
    let mut freq = vec![0.0; mu.probs.len()];
    for st in &traj.states {
        let m = st.iter().enumerate().fold(0usize, |a, (v, &b)| a | (b as usize) << v);
        freq[m] += 1.0 / traj.states.len() as f64;
    }
    assert!(tv(&freq, &mu.probs) < 0.03);
}

#[test]
fn field_chain_near_full_removal_resamples_from_mu() {
    let g = Family::Path { n: 2 }.build().unwrap();
    let s = SpinSystem::free(g, SpinParams::new(0.0, 1.0, 1.0).unwrap()).unwrap();
    let mu = enumerate(&s).unwrap();
    let tm = transition_matrix(&s, &ChainKind::VertexField { theta: 0.999 }).unwrap();
    let pi = tm.restrict(&mu);
    for i in 0..tm.dim() {
        let row: Vec<f64> = tm.matrix.row(i).iter().copied().collect();
        assert!(tv(&row, &pi) < 1e-2);
    }
}
