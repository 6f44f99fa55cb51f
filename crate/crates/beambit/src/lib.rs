//! Joint optimization of analog receive-beam subsets and per-chain ADC bit
//! resolutions over a quantized, frequency-selective multi-user MIMO uplink.
//!
//! The library models a wideband uplink where a base station applies a fixed
//! orthonormal analog beamforming codebook in front of a limited bank of RF
//! chains, each equipped with an ADC whose resolution is configurable. Low
//! resolution is modeled statistically (scale the input, add uncorrelated
//! quantization noise), which yields a per-subcarrier Gaussian multiple-access
//! channel whose queue-constrained weighted sum rate is a monotone submodular
//! set function of the chosen (beam, bits) tuples. On top of that sit:
//!
//! * [`instance`] — channel/codebook/user synthesis and per-subcarrier
//!   frequency responses;
//! * [`aqnm`] — quantization scalars, per-beam received variances, and the
//!   whitened effective channel;
//! * [`rate`] — the weighted-sum-rate objective, queue-constrained level
//!   values, pruning, and corner-point rate assignment;
//! * [`select`] — the joint optimizer (multiplicative-update greedy with lazy
//!   evaluations), fixed-resolution baselines, and an exact oracle;
//! * [`bench`] — the Monte-Carlo experiment harness and CSV emission;
//! * [`oracle`] — independent reference implementations used by `verify` and
//!   the test suite;
//! * [`verify`] — the self-check battery behind `beambit verify`.
//!
//! The `parallel` feature (on by default) runs independent Monte-Carlo drops
//! and verification instances on a rayon pool; without it everything falls
//! back to sequential loops with identical results.

pub mod aqnm;
pub mod bench;
pub mod error;
pub mod instance;
pub mod oracle;
pub mod rate;
pub mod select;
pub mod verify;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Maps `0..n` through `f`, in parallel when the `parallel` feature is
/// enabled. Output order matches index order either way, so callers see
/// identical results regardless of the feature.
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// SplitMix64 step, used to derive independent per-drop and per-stream seeds
/// from an experiment master seed.
pub(crate) fn split_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
