//! Benchmark inputs shared by the criterion targets.

use svgrefine_core::synth::synth_corpus;

pub const SEED: u64 = 1;

/// Synthetic raw documents, as produced by the `synth` subcommand.
pub fn corpus(n: usize) -> Vec<String> {
    synth_corpus(SEED, n)
}
