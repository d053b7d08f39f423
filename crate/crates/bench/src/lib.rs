//! Benchmarks live in `benches/`; run them with `cargo bench -p expfunc-bench`.
