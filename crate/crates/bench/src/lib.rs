//! Criterion benchmarks for `gsf-core`; see `benches/core.rs`.
