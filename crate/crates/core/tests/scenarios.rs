use std::path::Path;

use isrs_link::config::SimulationConfig;
use isrs_link::fiber::PowerVector;
use isrs_link::plan::Band;
use isrs_link::run::{run_optimize, Scenario};

fn example(name: &str) -> SimulationConfig {
    SimulationConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)).unwrap()
}

fn toy() -> SimulationConfig {
    example("toy-10ch.cfg")
}

#[test]
fn shipped_configs_resolve() {
    let scl = example("scl-ideal.cfg");
    let plan = scl.channel_plan().unwrap();
    assert_eq!(plan.len(), 364);
    assert_eq!(plan.band_indices(Band::S).len(), 164);
    assert_eq!(scl.link.n_spans, 100);
    let cl = example("cl-ideal.cfg").channel_plan().unwrap();
    assert_eq!(cl.len(), 200);
    assert!(cl.band_indices(Band::S).is_empty());
    let partial = example("scl-partial.cfg");
    assert_eq!(partial.channel_plan().unwrap().len(), 364);
    assert_ne!(partial.equalization(), scl.equalization());
}

#[test]
fn resolved_config_round_trips() {
    let cfg = example("scl-ideal.cfg");
    let again = SimulationConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(again.to_toml(), cfg.to_toml());
}

#[test]
fn partial_equalization_costs_throughput() {
    let ideal = example("scl-ideal.cfg");
    let partial = example("scl-partial.cfg");
    let launch = PowerVector::uniform_dbm(364, -1.0);
    let a = Scenario::new(&ideal).unwrap().evaluate(&launch, 6).unwrap().bound;
    let b = Scenario::new(&partial).unwrap().evaluate(&launch, 6).unwrap().bound;
    assert!(b < a, "partial {b} vs ideal {a}");
}

#[test]
fn throughput_peaks_at_an_intermediate_launch_power() {
    let sc = Scenario::new(&toy()).unwrap();
    let t: Vec<f64> = (-8..=10)
        .map(|dbm| sc.evaluate(&PowerVector::uniform_dbm(10, dbm as f64), 6).unwrap().bound)
        .collect();
    let best = t.iter().cloned().fold(f64::MIN, f64::max);
    assert!(t[0] < best && t[t.len() - 1] < best);
}

#[test]
fn optimum_beats_flat_launch_and_is_seed_robust() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = toy();
    let flat = Scenario::new(&cfg).unwrap().evaluate(&PowerVector::uniform_dbm(10, -1.0), 6).unwrap();
    let mut totals = Vec::new();
    for seed in [1, 2] {
        let mut c = cfg.clone();
        c.override_seed(seed);
        let r = run_optimize(&c, &dir.path().join(seed.to_string()), false).unwrap();
        assert!(r.simulation.evaluation.bound >= flat.bound);
        totals.push(r.simulation.evaluation.bound);
    }
    let spread = (totals[0] - totals[1]).abs() / totals[0];
    assert!(spread < 5e-3, "{totals:?}");
}
