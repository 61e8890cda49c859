//! Fixtures shared by the criterion benchmarks under `benches/`.

use chirplock::harness::{EnsembleConfig, Horizon, Prepared, Scenario};

/// Example 1 prepared for short paths of length `t_end - 100`.
pub fn ex1_prepared(mu: f64, t_end: f64) -> Prepared {
    let mut s = Scenario::builtin("ex1").expect("builtin").with_mu(mu);
    s.t_end = Horizon::Fixed(t_end);
    s.ensemble = EnsembleConfig { path_count: 1, master_seed: 1 };
    Prepared::new(&s).expect("valid scenario")
}
