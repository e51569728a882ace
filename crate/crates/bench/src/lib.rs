//! Benchmarks for voi-core live under `benches/`.
