//! Benchmarks of the entropy pipeline, the geometric factor and the exact
//! spin ground state; run with `cargo bench -p evenodd-bench`.
