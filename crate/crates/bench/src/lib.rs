//! Criterion benchmarks for `qllab-core` live in `benches/`.
