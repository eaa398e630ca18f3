//! Criterion benchmarks for `distguess`; the workloads live in `benches/`.
