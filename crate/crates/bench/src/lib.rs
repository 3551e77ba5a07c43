//! Benchmarks for cstate-core live in `benches/`.
