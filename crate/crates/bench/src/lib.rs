//! Benchmarks for the core library live in `benches/core.rs`.
