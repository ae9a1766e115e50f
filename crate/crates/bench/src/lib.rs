//! Criterion benchmarks for the timing models live in `benches/`.
