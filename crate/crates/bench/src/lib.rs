//! Fixtures shared by the benchmarks.

use coachsim_core::backends::OracleBackend;
use coachsim_core::runtime::SECOND;
use coachsim_core::scenarios::builtin;
use coachsim_core::sim::{run_scenario, RunOptions, RunReport};

/// One oracle-coached run of a bundled scenario over `horizon_s` seconds.
pub fn oracle_run(id: &str, horizon_s: u64) -> RunReport {
    let spec = builtin(id).expect("bundled scenario");
    let opts = RunOptions {
        horizon_ns: Some(horizon_s * SECOND),
        ..Default::default()
    };
    run_scenario(&spec, Box::new(OracleBackend::default()), &opts).expect("valid topology")
}
