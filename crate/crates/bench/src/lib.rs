//! Criterion benchmarks for kthstop live in `benches/`.

/// Instance sizes shared by the benchmarks.
pub const SIZES: [usize; 3] = [50, 200, 800];
