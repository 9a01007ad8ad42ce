//! Benchmark-only crate; see `benches/rounds.rs`.
