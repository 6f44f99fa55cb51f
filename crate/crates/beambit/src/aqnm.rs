//! Additive quantization-noise model for low-resolution ADCs.
//!
//! A `b`-bit scalar quantizer applied to a (near-)Gaussian input is modeled as
//! `Q(y) = alpha(b) * y + q` with `q` uncorrelated with `y`, where
//! `alpha(b) = 1 - D(b)` and `D(b)` is the MMSE distortion of the Lloyd-Max
//! quantizer for a unit-variance Gaussian. Small `b` use tabulated values;
//! past the table the classic high-rate formula `alpha = 1 - a * 2^(-2b)`
//! takes over. Infinite resolution is an explicit variant (`alpha = 1`)
//! rather than a magic number.
//!
//! Combined with a per-beam time-domain variance `psi`, each (beam, bits)
//! pair yields the effective SNR gain `t = alpha^2 / (alpha^2 + alpha (1 -
//! alpha) psi)`, which is how quantization enters every rate expression:
//! selected beam rows get scaled by `sqrt(t)` and the noise stays white.

use nalgebra::{DMatrix, RowDVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use crate::instance::{scaled_response, ChannelRealization, Instance, PowerProfile, C64};
use crate::rate::Selection;
use crate::{Error, Result};

/// ADC resolution: a positive bit count or infinite (unquantized) precision.
///
/// The derived order puts every finite resolution below `Inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bits {
    Finite(u32),
    Inf,
}

impl Bits {
    pub fn finite(self) -> Option<u32> {
        match self {
            Bits::Finite(b) => Some(b),
            Bits::Inf => None,
        }
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bits::Finite(b) => write!(f, "{b}"),
            Bits::Inf => write!(f, "inf"),
        }
    }
}

impl Serialize for Bits {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bits::Finite(b) => s.serialize_u32(*b),
            Bits::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Bits {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u32),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(b) => Ok(Bits::Finite(b)),
            Raw::Str(s) if s == "inf" => Ok(Bits::Inf),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad bits value \"{s}\""))),
        }
    }
}

/// Default high-rate distortion constant `a = pi sqrt(3) / 2`.
pub const DEFAULT_A_CONST: f64 = std::f64::consts::PI * 1.732_050_807_568_877_2 / 2.0;

/// Quantization gain table: exact Lloyd-Max values for `b = 1..=b_lut_max`,
/// the `1 - a 2^(-2b)` formula beyond.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AdcTableJson", into = "AdcTableJson")]
pub struct AdcTable {
    lut: Vec<f64>,
    a_const: f64,
}

impl AdcTable {
    /// Builds a table from explicit LUT entries (`lut[b-1]` is `alpha(b)`).
    ///
    /// The whole `alpha` curve, LUT and formula region together, must be
    /// strictly increasing and confined to `(0, 1)`.
    pub fn new(lut: Vec<f64>, a_const: f64) -> Result<Self> {
        if lut.is_empty() {
            return Err(Error::InvalidArgument("LUT must cover at least b = 1".into()));
        }
        if !(a_const > 0.0) || !a_const.is_finite() {
            return Err(Error::InvalidArgument("a_const must be positive".into()));
        }
        let table = Self { lut, a_const };
        let mut prev = 0.0;
        for b in 1..=(table.lut.len() as u32 + 2) {
            let a = table.alpha(Bits::Finite(b))?;
            if !(a > prev && a < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "alpha must be strictly increasing within (0, 1); violated at b = {b}"
                )));
            }
            prev = a;
        }
        Ok(table)
    }

    /// Default table: Lloyd-Max gains for `b = 1..=5`, `a = pi sqrt(3) / 2`.
    ///
    /// The LUT is computed once per process from the quantizer fixed point
    /// itself, not hard-coded, so it stays consistent with
    /// [`lloyd_max_alpha`] by construction.
    pub fn default_table() -> &'static AdcTable {
        static TABLE: OnceLock<AdcTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            let lut = (1..=5).map(|b| lloyd_max_alpha(b).unwrap()).collect();
            AdcTable::new(lut, DEFAULT_A_CONST).unwrap()
        })
    }

    pub fn b_lut_max(&self) -> u32 {
        self.lut.len() as u32
    }

    pub fn a_const(&self) -> f64 {
        self.a_const
    }

    /// Quantization gain `alpha(b)`, in `(0, 1)` for finite `b` and exactly
    /// `1` for infinite resolution. Zero bits is rejected.
    pub fn alpha(&self, bits: Bits) -> Result<f64> {
        match bits {
            Bits::Inf => Ok(1.0),
            Bits::Finite(0) => Err(Error::InvalidBits(0)),
            Bits::Finite(b) if b <= self.b_lut_max() => Ok(self.lut[(b - 1) as usize]),
            Bits::Finite(b) => Ok(1.0 - self.a_const * 0.25f64.powi(b as i32)),
        }
    }
}

impl Default for AdcTable {
    fn default() -> Self {
        Self::default_table().clone()
    }
}

#[derive(Serialize, Deserialize)]
struct AdcTableJson {
    lut: BTreeMap<String, f64>,
    a_const: f64,
    b_lut_max: u32,
}

impl From<AdcTable> for AdcTableJson {
    fn from(t: AdcTable) -> Self {
        let lut = t.lut.iter().enumerate().map(|(i, &a)| ((i + 1).to_string(), a)).collect();
        AdcTableJson { lut, a_const: t.a_const, b_lut_max: t.lut.len() as u32 }
    }
}

impl TryFrom<AdcTableJson> for AdcTable {
    type Error = Error;

    fn try_from(j: AdcTableJson) -> Result<Self> {
        if j.lut.len() as u32 != j.b_lut_max {
            return Err(Error::Config("b_lut_max does not match LUT size".into()));
        }
        let mut lut = vec![0.0; j.b_lut_max as usize];
        for (k, v) in &j.lut {
            let b: u32 = k
                .parse()
                .map_err(|_| Error::Config(format!("bad LUT key \"{k}\"")))?;
            if b < 1 || b > j.b_lut_max {
                return Err(Error::Config(format!("LUT key {b} outside 1..={}", j.b_lut_max)));
            }
            lut[(b - 1) as usize] = *v;
        }
        AdcTable::new(lut, j.a_const)
    }
}

/// Optimal (Lloyd-Max) scalar quantizer for a zero-mean unit-variance
/// Gaussian with `2^bits` output levels: `(thresholds, levels)` where
/// `thresholds` has length `2^bits + 1` with infinite endpoints.
///
/// Fixed-point iteration of the two optimality conditions: thresholds at
/// level midpoints, levels at conditional means, the latter in closed form
/// through the Gaussian pdf/cdf. Converges to `1e-10` in the levels.
pub fn lloyd_max_quantizer(bits: u32) -> Result<(Vec<f64>, Vec<f64>)> {
    if bits == 0 || bits > 16 {
        return Err(Error::InvalidBits(bits));
    }
    let m = 1usize << bits;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    // start from equiprobable-cell centroids so the first midpoints are sane
    let mut levels: Vec<f64> = (0..m)
        .map(|i| {
            let lo = normal.inverse_cdf(i as f64 / m as f64);
            let hi = normal.inverse_cdf((i + 1) as f64 / m as f64);
            centroid(&normal, lo, hi)
        })
        .collect();
    let mut thresholds = vec![0.0; m + 1];
    let tol = 1e-10;
    let mut converged = false;
    for _ in 0..10_000 {
        thresholds[0] = f64::NEG_INFINITY;
        thresholds[m] = f64::INFINITY;
        for i in 1..m {
            thresholds[i] = 0.5 * (levels[i - 1] + levels[i]);
        }
        let mut delta = 0.0f64;
        for i in 0..m {
            let y = centroid(&normal, thresholds[i], thresholds[i + 1]);
            delta = delta.max((y - levels[i]).abs());
            levels[i] = y;
        }
        if delta < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::InvalidArgument(format!(
            "Lloyd-Max iteration did not converge for b = {bits}"
        )));
    }
    Ok((thresholds, levels))
}

/// Conditional mean of a standard Gaussian on `[lo, hi]`:
/// `(pdf(lo) - pdf(hi)) / (cdf(hi) - cdf(lo))`.
fn centroid(normal: &Normal, lo: f64, hi: f64) -> f64 {
    let pdf_lo = if lo.is_finite() { normal.pdf(lo) } else { 0.0 };
    let pdf_hi = if hi.is_finite() { normal.pdf(hi) } else { 0.0 };
    (pdf_lo - pdf_hi) / (normal.cdf(hi) - normal.cdf(lo))
}

/// Quantization gain of the `b`-bit Lloyd-Max quantizer:
/// `alpha = 1 - D = sum_i y_i^2 P(cell_i)` at the fixed point.
pub fn lloyd_max_alpha(bits: u32) -> Result<f64> {
    let (thresholds, levels) = lloyd_max_quantizer(bits)?;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let alpha = levels
        .iter()
        .enumerate()
        .map(|(i, &y)| y * y * (normal.cdf(thresholds[i + 1]) - normal.cdf(thresholds[i])))
        .sum();
    Ok(alpha)
}

/// Time-domain receive variance behind one beam, normalized to the unit
/// noise floor; always at least 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamVariance(f64);

impl BeamVariance {
    pub fn new(psi: f64) -> Result<Self> {
        if !(psi >= 1.0) || !psi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "beam variance must be finite and >= 1, got {psi}"
            )));
        }
        Ok(Self(psi))
    }

    pub fn psi(self) -> f64 {
        self.0
    }
}

fn accumulate_psi<'a>(scaled: impl Iterator<Item = &'a DMatrix<C64>>, beam: &RowDVector<C64>) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for s in scaled {
        let row = beam * s;
        sum += row.iter().map(|c| c.norm_sqr()).sum::<f64>();
        n += 1;
    }
    1.0 + sum / n as f64
}

/// Per-beam variance `psi = 1 + (1/N) sum_n || w G_n D_n^{1/2} ||^2`.
///
/// This is the variance the ADC behind beam `w` actually sees in the time
/// domain (signal plus unit noise), computed from per-subcarrier responses;
/// it is what calibrates the quantizer loading and it does not depend on
/// which other beams are selected or on any bit allocation.
pub fn beam_variance(
    channel: &ChannelRealization,
    power: &PowerProfile,
    beam: &RowDVector<C64>,
) -> Result<BeamVariance> {
    if beam.len() != channel.n_rx() {
        return Err(Error::Dimension("beam length does not match array size".into()));
    }
    if power.n_subcarriers() != channel.n_subcarriers() || power.n_users() != channel.n_users() {
        return Err(Error::Dimension("power profile does not match channel".into()));
    }
    let mats: Vec<DMatrix<C64>> =
        (1..=channel.n_subcarriers()).map(|n| scaled_response(channel, power, n)).collect();
    BeamVariance::new(accumulate_psi(mats.iter(), beam))
}

/// Same as [`beam_variance`] but over an instance's cached `G_n D_n^{1/2}`
/// matrices; bit-identical to the standalone form.
pub fn beam_variance_cached(inst: &Instance, beam_id: usize) -> f64 {
    let mats = (1..=inst.n_subcarriers()).map(|n| inst.scaled_response(n));
    accumulate_psi(mats, inst.codebook.beam(beam_id))
}

/// Effective per-beam SNR gain `t = alpha^2 / (alpha^2 + alpha (1 - alpha)
/// psi)`, in `(0, 1]`; strictly increasing in `alpha`, equal to 1 exactly
/// when `alpha = 1`.
pub fn effective_gain(alpha: f64, psi: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must be in (0, 1], got {alpha}")));
    }
    if !(psi >= 1.0) || !psi.is_finite() {
        return Err(Error::InvalidArgument(format!("psi must be finite and >= 1, got {psi}")));
    }
    if alpha == 1.0 {
        return Ok(1.0);
    }
    Ok(alpha * alpha / (alpha * alpha + alpha * (1.0 - alpha) * psi))
}

/// Whitened effective channel of a selection: per subcarrier, one row
/// `sqrt(t_m) w_m G_n D_n^{1/2}` per distinct selected beam.
#[derive(Debug, Clone)]
pub struct EffectiveChannel {
    /// `per_subcarrier[n-1]` is the `|distinct beams| x K` matrix for
    /// subcarrier `n`.
    pub per_subcarrier: Vec<DMatrix<C64>>,
    /// Distinct beam ids in ascending order, matching the row order.
    pub beams: Vec<usize>,
}

/// Builds the whitened effective channel for a selection.
///
/// Duplicate beams collapse to their largest bit count first, so the result
/// only ever has one row per beam. An empty selection yields `0 x K`
/// matrices.
pub fn whitened_channel(sel: &Selection, inst: &Instance) -> Result<EffectiveChannel> {
    let pruned = sel.prune();
    let k = inst.n_users();
    let n_sub = inst.n_subcarriers();
    let mut beams = Vec::new();
    let mut scales = Vec::new();
    for t in pruned.tuples() {
        if t.beam >= inst.codebook.len() {
            return Err(Error::Dimension(format!("beam id {} outside codebook", t.beam)));
        }
        let alpha = inst.adc.alpha(t.bits)?;
        let psi = beam_variance_cached(inst, t.beam);
        let t_gain = effective_gain(alpha, psi)?;
        beams.push(t.beam);
        scales.push(C64::new(t_gain.sqrt(), 0.0));
    }
    let per_subcarrier = (1..=n_sub)
        .map(|n| {
            let s = inst.scaled_response(n);
            let mut m = DMatrix::<C64>::zeros(beams.len(), k);
            for (r, (&beam, &sc)) in beams.iter().zip(&scales).enumerate() {
                let row = inst.codebook.beam(beam) * s;
                for c in 0..k {
                    m[(r, c)] = sc * row[c];
                }
            }
            m
        })
        .collect();
    Ok(EffectiveChannel { per_subcarrier, beams })
}
