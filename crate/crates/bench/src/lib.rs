//! Criterion benchmarks for the core kernels; see `benches/kernels.rs`.
//!
//! Run with `cargo bench -p arising-bench`.
