//! Criterion benchmarks for the scanner; see `benches/`.
