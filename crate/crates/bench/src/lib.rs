//! Criterion benchmarks for the stress update and the scenario driver; see
//! `benches/stress_update.rs`.
