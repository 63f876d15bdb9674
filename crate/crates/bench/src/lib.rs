//! Shared fixtures for the benchmarks.

use nullwave_core::scenario::Preset;
use nullwave_core::{GridSpec, GridState, InitialData, WaveSystem};

/// The null_global system on an `n³` grid with its preset data.
pub fn null_fixture(n: usize) -> (WaveSystem, GridState) {
    let (speeds, tensor) = Preset::NullGlobal.system();
    let system = WaveSystem::new(speeds.clone(), tensor).expect("preset tensors are symmetric");
    let grid = GridSpec::centered(n, 8.0 / n as f64).expect("valid grid");
    let state = InitialData::bump(1, 2.0, 1.0).build(&grid, &speeds, 0.01, 0).expect("bump data builds");
    (system, state)
}
