//! Criterion benchmarks for the enumeration kernels live in `benches/`.
