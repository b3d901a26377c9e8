use spinlab::experiment::{run, ExperimentConfig, ExperimentError, GraphSource, SUITES};
use spinlab::stability::Verdict;
use spinlab::{Error, Family};

fn run_id(id: &str) -> spinlab::experiment::SuiteReport {
    run(&ExperimentConfig::for_suite(id)).unwrap_or_else(|e| panic!("{id}: {e}"))
}

#[test]
fn every_listed_suite_has_a_runner() {
    for s in SUITES {
        let cfg = ExperimentConfig { trials: Some(200), steps: Some(10), ..ExperimentConfig::for_suite(s.id) };
        match run(&cfg) {
            Ok(_) => {}
            Err(ExperimentError::UnknownSuite(id)) => panic!("{id} listed but not runnable"),
            Err(e) => panic!("{}: {e}", s.id),
        }
    }
}

#[test]
fn stationarity_suite_passes_with_small_residuals() {
    let r = run_id("verify-stationarity");
    assert!(r.passed());
    let col = r.columns.iter().position(|c| c == "stationarity").unwrap();
    assert!(r.rows.iter().all(|row| row[col].parse::<f64>().unwrap() <= 1e-10));
}

#[test]
fn at_mixing_reports_the_single_vertex_violation() {
    let r = run_id("at-mixing");
    assert_eq!(r.check("at-product").unwrap().verdict, Verdict::Holds);
    assert_eq!(r.check("at-mixing-inequality").unwrap().verdict, Verdict::Violated);
    assert!(r.notes.iter().any(|n| n.contains("n1:")));
}

#[test]
fn sw_gap_bound_on_a_single_instance() {
    let cfg = ExperimentConfig {
        graph: Some(GraphSource::Family(Family::Cycle { n: 5 })),
        params: Some(spinlab::SpinParams { beta: 1.5, gamma: 1.5, lambda: 0.3 }),
        ..ExperimentConfig::for_suite("sw-gap-bound")
    };
    let r = run(&cfg).unwrap();
    assert_eq!(r.checks.len(), 1);
    assert!(r.passed());
}

#[test]
fn lower_bound_rejects_non_bipartite_graphs() {
    let cfg = ExperimentConfig {
        graph: Some(GraphSource::Family(Family::Complete { n: 4 })),
        ..ExperimentConfig::for_suite("lower-bound-heawood")
    };
    assert!(matches!(run(&cfg), Err(ExperimentError::Model(Error::NotBipartiteRegular))));
}

#[test]
fn stability_outside_theta_range_is_not_applicable() {
    let cfg = ExperimentConfig { theta: Some(0.8), ..ExperimentConfig::for_suite("stability") };
    let r = run(&cfg).unwrap();
    assert_eq!(r.check("edge-pcor-vs-formula").unwrap().verdict, Verdict::NotApplicable);
    assert!(r.passed());
}
