//! Problem-instance synthesis: multipath channels, analog beam codebooks,
//! per-subcarrier power loading, and user weight/queue state.
//!
//! A channel is a list of `L` complex tap matrices `H_0..H_{L-1}`, each
//! `N_r x K`. The per-subcarrier frequency response is
//! `G_n = sum_l H_l exp(-j 2 pi (n-1) l / N)` for `n = 1..N`. Everything here
//! is immutable after construction and generators are pure functions of their
//! seed, so instances can be shared freely across worker threads.

use nalgebra::{DMatrix, RowDVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::aqnm::AdcTable;
use crate::{Error, Result};

pub type C64 = Complex<f64>;

/// Mutual-orthogonality tolerance for codebook rows.
pub const ORTHOGONALITY_TOL: f64 = 1e-9;
/// Unit-norm tolerance for codebook rows.
pub const NORM_TOL: f64 = 1e-12;

/// Time-domain multipath channel: `L` tap matrices shared by `N` subcarriers.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    taps: Vec<DMatrix<C64>>,
    n_subcarriers: usize,
    n_rx: usize,
    n_users: usize,
}

impl ChannelRealization {
    pub fn new(taps: Vec<DMatrix<C64>>, n_subcarriers: usize) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::Dimension("channel needs at least one tap".into()));
        }
        if taps.len() > n_subcarriers {
            return Err(Error::Dimension(format!(
                "tap count {} exceeds subcarrier count {} (cyclic prefix assumption)",
                taps.len(),
                n_subcarriers
            )));
        }
        let (n_rx, n_users) = (taps[0].nrows(), taps[0].ncols());
        if n_rx == 0 || n_users == 0 {
            return Err(Error::Dimension("empty tap matrix".into()));
        }
        if taps.iter().any(|t| t.nrows() != n_rx || t.ncols() != n_users) {
            return Err(Error::Dimension("taps differ in shape".into()));
        }
        Ok(Self { taps, n_subcarriers, n_rx, n_users })
    }

    pub fn n_taps(&self) -> usize {
        self.taps.len()
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn tap(&self, l: usize) -> &DMatrix<C64> {
        &self.taps[l]
    }

    pub fn taps(&self) -> &[DMatrix<C64>] {
        &self.taps
    }

    /// Frequency response `G_n = sum_l H_l exp(-j 2 pi (n-1) l / N)` on
    /// subcarrier `n` (1-indexed).
    ///
    /// Panics if `n` is outside `1..=N`.
    pub fn freq_response(&self, n: usize) -> DMatrix<C64> {
        assert!(
            n >= 1 && n <= self.n_subcarriers,
            "subcarrier index {} out of range 1..={}",
            n,
            self.n_subcarriers
        );
        let mut g = DMatrix::<C64>::zeros(self.n_rx, self.n_users);
        for (l, tap) in self.taps.iter().enumerate() {
            let phase = -2.0 * PI * ((n - 1) as f64) * (l as f64) / (self.n_subcarriers as f64);
            let w = C64::from_polar(1.0, phase);
            g.zip_apply(tap, |gi, ti| *gi += w * ti);
        }
        g
    }
}

/// Per-subcarrier diagonal power loads `D_n` (linear units), `N` vectors of
/// `K` nonnegative entries.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProfile {
    loads: Vec<Vec<f64>>,
}

impl PowerProfile {
    pub fn new(loads: Vec<Vec<f64>>) -> Result<Self> {
        if loads.is_empty() {
            return Err(Error::Dimension("power profile needs N >= 1".into()));
        }
        let k = loads[0].len();
        if k == 0 {
            return Err(Error::Dimension("power profile needs K >= 1".into()));
        }
        for d in &loads {
            if d.len() != k {
                return Err(Error::Dimension("power vectors differ in length".into()));
            }
            if d.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
                return Err(Error::InvalidArgument("power entries must be finite and >= 0".into()));
            }
        }
        Ok(Self { loads })
    }

    /// Same load `p` for every user on every subcarrier.
    pub fn flat(n_subcarriers: usize, n_users: usize, p: f64) -> Result<Self> {
        Self::new(vec![vec![p; n_users]; n_subcarriers])
    }

    /// Per-user loads replicated across all subcarriers.
    pub fn per_user(n_subcarriers: usize, user_powers: &[f64]) -> Result<Self> {
        Self::new(vec![user_powers.to_vec(); n_subcarriers])
    }

    pub fn n_subcarriers(&self) -> usize {
        self.loads.len()
    }

    pub fn n_users(&self) -> usize {
        self.loads[0].len()
    }

    /// Diagonal of `D_n` (1-indexed subcarrier).
    pub fn load(&self, n: usize) -> &[f64] {
        &self.loads[n - 1]
    }
}

/// Orthonormal analog beamforming codebook; row `m` is beam `m`.
#[derive(Debug, Clone)]
pub struct BeamCodebook {
    beams: Vec<RowDVector<C64>>,
}

impl BeamCodebook {
    pub fn from_rows(beams: Vec<RowDVector<C64>>) -> Result<Self> {
        if beams.is_empty() {
            return Err(Error::Dimension("codebook needs at least one beam".into()));
        }
        let n_rx = beams[0].len();
        if beams.len() > n_rx {
            return Err(Error::Dimension(format!(
                "codebook size {} exceeds array size {}",
                beams.len(),
                n_rx
            )));
        }
        for (i, bi) in beams.iter().enumerate() {
            if bi.len() != n_rx {
                return Err(Error::Dimension("beam lengths differ".into()));
            }
            let norm = bi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidArgument(format!(
                    "beam {i} has norm {norm}, expected 1"
                )));
            }
            for (j, bj) in beams.iter().enumerate().skip(i + 1) {
                let inner: C64 = bi.iter().zip(bj.iter()).map(|(a, b)| a * b.conj()).sum();
                if inner.norm() > ORTHOGONALITY_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "beams {i} and {j} are not orthogonal (|<.,.>| = {})",
                        inner.norm()
                    )));
                }
            }
        }
        Ok(Self { beams })
    }

    /// Unitary DFT codebook: `n_rx` beams, beam `m` has entries
    /// `exp(-j 2 pi m k / n_rx) / sqrt(n_rx)`.
    pub fn dft(n_rx: usize) -> Self {
        assert!(n_rx >= 1);
        let scale = 1.0 / (n_rx as f64).sqrt();
        let beams = (0..n_rx)
            .map(|m| {
                RowDVector::from_iterator(
                    n_rx,
                    (0..n_rx).map(|k| {
                        C64::from_polar(scale, -2.0 * PI * (m as f64) * (k as f64) / (n_rx as f64))
                    }),
                )
            })
            .collect();
        Self { beams }
    }

    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }

    pub fn n_rx(&self) -> usize {
        self.beams[0].len()
    }

    pub fn beam(&self, id: usize) -> &RowDVector<C64> {
        &self.beams[id]
    }

    pub fn beams(&self) -> &[RowDVector<C64>] {
        &self.beams
    }
}

/// User weights (sorted nonincreasing) and queue limits in bits per OFDM
/// symbol. `f64::INFINITY` marks a full buffer.
///
/// The constructor sorts users by weight and keeps the permutation so rates
/// computed in sorted order can be mapped back to the caller's user ids.
#[derive(Debug, Clone, PartialEq)]
pub struct UserState {
    weights: Vec<f64>,
    queues: Vec<f64>,
    perm: Vec<usize>,
}

impl UserState {
    pub fn new(weights: &[f64], queues: &[f64]) -> Result<Self> {
        if weights.is_empty() || weights.len() != queues.len() {
            return Err(Error::Dimension("weights/queues length mismatch".into()));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument("weights must be finite and >= 0".into()));
        }
        if queues.iter().any(|&q| !(q > 0.0)) {
            return Err(Error::InvalidArgument("queues must be strictly positive".into()));
        }
        let mut perm: Vec<usize> = (0..weights.len()).collect();
        perm.sort_by(|&a, &b| weights[b].partial_cmp(&weights[a]).unwrap().then(a.cmp(&b)));
        let sorted_w = perm.iter().map(|&i| weights[i]).collect();
        let sorted_q = perm.iter().map(|&i| queues[i]).collect();
        Ok(Self { weights: sorted_w, queues: sorted_q, perm })
    }

    /// Equal unit weights and full buffers: the plain sum-rate setting.
    pub fn full_buffer(n_users: usize) -> Self {
        Self::new(&vec![1.0; n_users], &vec![f64::INFINITY; n_users]).unwrap()
    }

    pub fn n_users(&self) -> usize {
        self.weights.len()
    }

    /// Weights in nonincreasing order.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Queues reordered to match the sorted weights.
    pub fn queues(&self) -> &[f64] {
        &self.queues
    }

    /// `perm()[i]` is the original id of the user at sorted position `i`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Maps a vector indexed by sorted position back to original user ids.
    pub fn to_original_order(&self, sorted_vals: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; sorted_vals.len()];
        for (pos, &orig) in self.perm.iter().enumerate() {
            out[orig] = sorted_vals[pos];
        }
        out
    }
}

/// A complete problem instance, with the per-subcarrier scaled responses
/// `G_n D_n^{1/2}` precomputed once since every variance and rate evaluation
/// consumes them.
#[derive(Debug, Clone)]
pub struct Instance {
    pub channel: ChannelRealization,
    pub power: PowerProfile,
    pub codebook: BeamCodebook,
    pub users: UserState,
    pub adc: AdcTable,
    scaled: Vec<DMatrix<C64>>,
}

/// `G_n D_n^{1/2}` for subcarrier `n` (1-indexed).
pub fn scaled_response(channel: &ChannelRealization, power: &PowerProfile, n: usize) -> DMatrix<C64> {
    let mut g = channel.freq_response(n);
    let load = power.load(n);
    for c in 0..g.ncols() {
        let s = load[c].sqrt();
        for r in 0..g.nrows() {
            g[(r, c)] *= s;
        }
    }
    g
}

impl Instance {
    pub fn new(
        channel: ChannelRealization,
        power: PowerProfile,
        codebook: BeamCodebook,
        users: UserState,
        adc: AdcTable,
    ) -> Result<Self> {
        if power.n_subcarriers() != channel.n_subcarriers() || power.n_users() != channel.n_users()
        {
            return Err(Error::Dimension("power profile does not match channel".into()));
        }
        if codebook.n_rx() != channel.n_rx() {
            return Err(Error::Dimension("codebook does not match array size".into()));
        }
        if users.n_users() != channel.n_users() {
            return Err(Error::Dimension("user state does not match channel".into()));
        }
        let scaled = (1..=channel.n_subcarriers())
            .map(|n| scaled_response(&channel, &power, n))
            .collect();
        Ok(Self { channel, power, codebook, users, adc, scaled })
    }

    pub fn n_users(&self) -> usize {
        self.channel.n_users()
    }

    pub fn n_subcarriers(&self) -> usize {
        self.channel.n_subcarriers()
    }

    /// Precomputed `G_n D_n^{1/2}` (1-indexed subcarrier).
    pub fn scaled_response(&self, n: usize) -> &DMatrix<C64> {
        &self.scaled[n - 1]
    }
}

/// Rayleigh channel: i.i.d. circularly symmetric complex Gaussian entries,
/// tap `l` with per-entry variance `tap_power_profile[l]`.
pub fn generate_rayleigh(
    n_rx: usize,
    n_users: usize,
    n_taps: usize,
    n_subcarriers: usize,
    tap_power_profile: &[f64],
    rng_seed: u64,
) -> Result<ChannelRealization> {
    if n_rx == 0 || n_users == 0 || n_taps == 0 || n_subcarriers == 0 {
        return Err(Error::Dimension("dimensions must be positive".into()));
    }
    if tap_power_profile.len() != n_taps {
        return Err(Error::Dimension("tap power profile length != n_taps".into()));
    }
    if tap_power_profile.iter().any(|&p| !(p >= 0.0)) {
        return Err(Error::InvalidArgument("tap powers must be >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let taps = tap_power_profile
        .iter()
        .map(|&p| {
            // per-entry complex variance p: real/imag each N(0, p/2)
            let s = (p / 2.0).sqrt();
            DMatrix::from_fn(n_rx, n_users, |_, _| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C64::new(s * re, s * im)
            })
        })
        .collect();
    ChannelRealization::new(taps, n_subcarriers)
}

/// Uniform-linear-array response at spatial frequency `sin_theta`,
/// half-wavelength spacing, unit norm.
pub fn steering_vector(n_rx: usize, sin_theta: f64) -> RowDVector<C64> {
    let scale = 1.0 / (n_rx as f64).sqrt();
    RowDVector::from_iterator(
        n_rx,
        (0..n_rx).map(|k| C64::from_polar(scale, -PI * (k as f64) * sin_theta)),
    )
}

/// One user column as a sum of steering vectors with complex path gains,
/// normalized so a unit-gain path contributes average per-antenna power
/// `1/n_paths`: `sqrt(n_rx / P) * sum_p g_p a(theta_p)`.
pub fn geometric_column(n_rx: usize, paths: &[(C64, f64)]) -> Vec<C64> {
    let scale = (n_rx as f64 / paths.len() as f64).sqrt();
    (0..n_rx)
        .map(|k| {
            paths
                .iter()
                .map(|&(gain, sin_theta)| {
                    gain * C64::from_polar(1.0, -PI * (k as f64) * sin_theta)
                })
                .sum::<C64>()
                * (scale / (n_rx as f64).sqrt())
        })
        .collect()
}

/// Flat-fading geometric (mmWave-style) channel: each user's column is a sum
/// of `n_paths_per_user` ULA responses with CN(0,1) gains and angles uniform
/// in (-pi/2, pi/2). Single tap, so the response is frequency flat.
pub fn generate_geometric(
    n_rx: usize,
    n_users: usize,
    n_paths_per_user: usize,
    n_subcarriers: usize,
    angle_rng_seed: u64,
) -> Result<ChannelRealization> {
    if n_rx == 0 || n_users == 0 || n_paths_per_user == 0 || n_subcarriers == 0 {
        return Err(Error::Dimension("dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(angle_rng_seed);
    let mut h0 = DMatrix::<C64>::zeros(n_rx, n_users);
    for u in 0..n_users {
        let paths: Vec<(C64, f64)> = (0..n_paths_per_user)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let gain = C64::new(re / 2f64.sqrt(), im / 2f64.sqrt());
                let theta: f64 = rng.gen_range(-PI / 2.0..PI / 2.0);
                (gain, theta.sin())
            })
            .collect();
        for (k, v) in geometric_column(n_rx, &paths).into_iter().enumerate() {
            h0[(k, u)] = v;
        }
    }
    ChannelRealization::new(vec![h0], n_subcarriers)
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CodebookSpec {
    Named(String),
    Explicit(Vec<Vec<[f64; 2]>>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum QueueVal {
    Finite(f64),
    Sentinel(String),
}

/// Wire form of an [`Instance`]; round-trips losslessly for finite values.
#[derive(Serialize, Deserialize)]
pub struct InstanceJson {
    n_rx: usize,
    n_users: usize,
    n_taps: usize,
    n_subcarriers: usize,
    /// `taps[l][r][k] = [re, im]`
    taps: Vec<Vec<Vec<[f64; 2]>>>,
    /// `power[n][k]`
    power: Vec<Vec<f64>>,
    codebook: CodebookSpec,
    weights: Vec<f64>,
    queues: Vec<QueueVal>,
}

impl Instance {
    pub fn to_json(&self) -> serde_json::Value {
        let taps = self
            .channel
            .taps()
            .iter()
            .map(|t| {
                (0..t.nrows())
                    .map(|r| (0..t.ncols()).map(|c| [t[(r, c)].re, t[(r, c)].im]).collect())
                    .collect()
            })
            .collect();
        let dft = BeamCodebook::dft(self.channel.n_rx());
        let is_dft = self.codebook.len() == dft.len()
            && self
                .codebook
                .beams()
                .iter()
                .zip(dft.beams())
                .all(|(a, b)| a.iter().zip(b.iter()).all(|(x, y)| x == y));
        let codebook = if is_dft {
            CodebookSpec::Named("dft".into())
        } else {
            CodebookSpec::Explicit(
                self.codebook
                    .beams()
                    .iter()
                    .map(|b| b.iter().map(|c| [c.re, c.im]).collect())
                    .collect(),
            )
        };
        let doc = InstanceJson {
            n_rx: self.channel.n_rx(),
            n_users: self.channel.n_users(),
            n_taps: self.channel.n_taps(),
            n_subcarriers: self.channel.n_subcarriers(),
            taps,
            power: (1..=self.power.n_subcarriers())
                .map(|n| self.power.load(n).to_vec())
                .collect(),
            codebook,
            // export users in their original (construction) order so a round
            // trip reproduces the same permutation
            weights: self.users.to_original_order(self.users.weights()),
            queues: self
                .users
                .to_original_order(self.users.queues())
                .iter()
                .map(|&q| {
                    if q.is_infinite() {
                        QueueVal::Sentinel("inf".into())
                    } else {
                        QueueVal::Finite(q)
                    }
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("instance serialization")
    }

    /// Rebuilds an instance from [`Instance::to_json`] output, using the
    /// given ADC table.
    pub fn from_json(value: &serde_json::Value, adc: AdcTable) -> Result<Self> {
        let doc: InstanceJson = serde_json::from_value(value.clone())?;
        if doc.taps.len() != doc.n_taps {
            return Err(Error::Config("taps length != n_taps".into()));
        }
        let taps = doc
            .taps
            .iter()
            .map(|t| {
                if t.len() != doc.n_rx || t.iter().any(|row| row.len() != doc.n_users) {
                    return Err(Error::Config("tap matrix shape mismatch".into()));
                }
                Ok(DMatrix::from_fn(doc.n_rx, doc.n_users, |r, c| {
                    C64::new(t[r][c][0], t[r][c][1])
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        let channel = ChannelRealization::new(taps, doc.n_subcarriers)?;
        let power = PowerProfile::new(doc.power)?;
        let codebook = match doc.codebook {
            CodebookSpec::Named(name) if name == "dft" => BeamCodebook::dft(doc.n_rx),
            CodebookSpec::Named(name) => {
                return Err(Error::Config(format!("unknown codebook \"{name}\"")))
            }
            CodebookSpec::Explicit(rows) => BeamCodebook::from_rows(
                rows.iter()
                    .map(|r| {
                        RowDVector::from_iterator(r.len(), r.iter().map(|p| C64::new(p[0], p[1])))
                    })
                    .collect(),
            )?,
        };
        let queues = doc
            .queues
            .iter()
            .map(|q| match q {
                QueueVal::Finite(v) => Ok(*v),
                QueueVal::Sentinel(s) if s == "inf" => Ok(f64::INFINITY),
                QueueVal::Sentinel(s) => Err(Error::Config(format!("bad queue value \"{s}\""))),
            })
            .collect::<Result<Vec<_>>>()?;
        let users = UserState::new(&doc.weights, &queues)?;
        Instance::new(channel, power, codebook, users, adc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn small_channel(seed: u64) -> ChannelRealization {
        generate_rayleigh(4, 3, 3, 8, &[0.5, 0.3, 0.2], seed).unwrap()
    }

    #[test]
    fn single_tap_response_is_the_tap() {
        let ch = generate_rayleigh(3, 2, 1, 4, &[1.0], 7).unwrap();
        for n in 1..=4 {
            let g = ch.freq_response(n);
            assert_eq!(&g, ch.tap(0));
        }
    }

    #[test]
    fn second_tap_picks_up_phase_ramp() {
        // only tap l=1 nonzero (identity), N=4, n=2 -> G_2 = I * exp(-j pi/2)
        let z = DMatrix::<C64>::zeros(3, 3);
        let i = DMatrix::<C64>::identity(3, 3);
        let ch = ChannelRealization::new(vec![z, i], 4).unwrap();
        let g = ch.freq_response(2);
        let expect = C64::from_polar(1.0, -PI / 2.0);
        for r in 0..3 {
            for c in 0..3 {
                let want = if r == c { expect } else { C64::new(0.0, 0.0) };
                assert!((g[(r, c)] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn freq_response_matches_naive_dft() {
        let ch = small_channel(11);
        for n in 1..=8 {
            let g = ch.freq_response(n);
            let g_ref = oracle::naive_freq_response(&ch, n);
            for r in 0..g.nrows() {
                for c in 0..g.ncols() {
                    assert!((g[(r, c)] - g_ref[(r, c)]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn freq_response_is_linear_in_taps() {
        let (a, b) = (0.7, -1.3);
        let ch1 = small_channel(21);
        let ch2 = small_channel(22);
        let mixed: Vec<DMatrix<C64>> = ch1
            .taps()
            .iter()
            .zip(ch2.taps())
            .map(|(t1, t2)| t1 * C64::new(a, 0.0) + t2 * C64::new(b, 0.0))
            .collect();
        let chm = ChannelRealization::new(mixed, 8).unwrap();
        for n in 1..=8 {
            let lhs = chm.freq_response(n);
            let rhs = ch1.freq_response(n) * C64::new(a, 0.0)
                + ch2.freq_response(n) * C64::new(b, 0.0);
            for r in 0..lhs.nrows() {
                for c in 0..lhs.ncols() {
                    assert!((lhs[(r, c)] - rhs[(r, c)]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn freq_response_rejects_out_of_range() {
        small_channel(1).freq_response(9);
    }

    #[test]
    fn rayleigh_is_deterministic_under_seed() {
        let a = generate_rayleigh(4, 2, 3, 8, &[0.4, 0.4, 0.2], 99).unwrap();
        let b = generate_rayleigh(4, 2, 3, 8, &[0.4, 0.4, 0.2], 99).unwrap();
        for (ta, tb) in a.taps().iter().zip(b.taps()) {
            assert_eq!(ta, tb);
        }
    }

    #[test]
    fn rayleigh_tap_variance_matches_profile() {
        let profile = [0.6, 0.4];
        let draws = 10_000usize;
        let mut acc = [0.0f64; 2];
        for seed in 0..draws as u64 {
            let ch = generate_rayleigh(2, 1, 2, 4, &profile, 1000 + seed).unwrap();
            for (l, a) in acc.iter_mut().enumerate() {
                *a += ch.tap(l)[(0, 0)].norm_sqr();
            }
        }
        for (l, a) in acc.iter().enumerate() {
            let var = a / draws as f64;
            assert!(
                (var - profile[l]).abs() / profile[l] < 0.05,
                "tap {l}: empirical {var} vs {}",
                profile[l]
            );
        }
    }

    #[test]
    fn dft_codebook_is_orthonormal() {
        for n in [1usize, 2, 4, 8, 16, 64] {
            let cb = BeamCodebook::dft(n);
            assert_eq!(cb.len(), n);
            for i in 0..n {
                for j in 0..n {
                    let inner: C64 = cb
                        .beam(i)
                        .iter()
                        .zip(cb.beam(j).iter())
                        .map(|(a, b)| a * b.conj())
                        .sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((inner.norm() - want).abs() < 1e-12, "n={n} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn dft_beam_has_unit_response_on_matched_steering() {
        // unit-norm steering vector conjugate-matched to beam 3 of an 8-beam codebook
        let cb = BeamCodebook::dft(8);
        let s = RowDVector::<C64>::from_iterator(
            8,
            (0..8).map(|k| C64::from_polar(1.0 / 8f64.sqrt(), 2.0 * PI * 3.0 * k as f64 / 8.0)),
        );
        let resp: C64 = cb.beam(3).iter().zip(s.iter()).map(|(w, x)| w * x).sum();
        assert!((resp.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_broadside_path_is_all_ones() {
        let col = geometric_column(4, &[(C64::new(1.0, 0.0), 0.0)]);
        for v in col {
            assert!((v - C64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn geometric_is_deterministic_under_seed() {
        let a = generate_geometric(8, 3, 3, 4, 5).unwrap();
        let b = generate_geometric(8, 3, 3, 4, 5).unwrap();
        assert_eq!(a.tap(0), b.tap(0));
    }

    #[test]
    fn single_path_user_prefers_best_dft_beam() {
        // exhaustive scan over the codebook: the argmax beam correlates at
        // least as strongly as every other beam
        for seed in 0..20u64 {
            let ch = generate_geometric(16, 1, 1, 1, seed).unwrap();
            let cb = BeamCodebook::dft(16);
            let corr: Vec<f64> = (0..cb.len())
                .map(|m| {
                    let inner: C64 = cb
                        .beam(m)
                        .iter()
                        .zip(ch.tap(0).column(0).iter())
                        .map(|(w, h)| w * h)
                        .sum();
                    inner.norm_sqr()
                })
                .collect();
            let best = corr.iter().cloned().fold(f64::MIN, f64::max);
            let arg = corr.iter().position(|&c| c == best).unwrap();
            for (m, &c) in corr.iter().enumerate() {
                assert!(corr[arg] >= c, "beam {m} beats argmax");
            }
        }
    }

    #[test]
    fn user_state_sorts_and_maps_back() {
        let us = UserState::new(&[0.2, 1.0, 0.5], &[10.0, f64::INFINITY, 3.0]).unwrap();
        assert_eq!(us.weights(), &[1.0, 0.5, 0.2]);
        assert_eq!(us.queues(), &[f64::INFINITY, 3.0, 10.0]);
        assert_eq!(us.perm(), &[1, 2, 0]);
        let orig = us.to_original_order(&[100.0, 200.0, 300.0]);
        assert_eq!(orig, vec![300.0, 100.0, 200.0]);
    }

    #[test]
    fn user_state_rejects_nonpositive_queue() {
        assert!(UserState::new(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn instance_json_round_trip_is_lossless() {
        let ch = small_channel(31);
        let power = PowerProfile::per_user(8, &[1.0, 0.25, 2.5]).unwrap();
        let users = UserState::new(&[0.9, 0.3, 0.6], &[12.0, f64::INFINITY, 4.5]).unwrap();
        let inst =
            Instance::new(ch, power, BeamCodebook::dft(4), users, AdcTable::default()).unwrap();
        let doc = inst.to_json();
        assert_eq!(doc["codebook"], "dft");
        let back = Instance::from_json(&doc, AdcTable::default()).unwrap();
        for (a, b) in inst.channel.taps().iter().zip(back.channel.taps()) {
            assert_eq!(a, b);
        }
        assert_eq!(inst.power, back.power);
        assert_eq!(inst.users, back.users);
        // a second round trip is byte-stable
        assert_eq!(doc, back.to_json());
    }
}
