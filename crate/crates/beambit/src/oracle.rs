//! Slow, independent reference implementations.
//!
//! Everything here recomputes quantities from first principles along a
//! different code path than the production routines: entrywise DFT sums
//! instead of matrix accumulation, an explicit time-domain block model
//! instead of the per-subcarrier shortcut, quadrature instead of closed-form
//! Gaussian integrals, LU determinants over full subset enumeration instead
//! of memoized Cholesky factorizations, and vertex enumeration instead of the
//! greedy corner construction. Tests and the `verify` command compare the
//! fast paths against these.

use nalgebra::DMatrix;
use std::f64::consts::PI;

use crate::instance::{ChannelRealization, Instance, PowerProfile, C64};
use crate::rate::Selection;
use nalgebra::RowDVector;

/// Entrywise evaluation of `G_n = sum_l H_l exp(-j 2 pi (n-1) l / N)`
/// (1-indexed `n`), scalar arithmetic only.
pub fn naive_freq_response(ch: &ChannelRealization, n: usize) -> DMatrix<C64> {
    let big_n = ch.n_subcarriers() as f64;
    DMatrix::from_fn(ch.n_rx(), ch.n_users(), |r, c| {
        let mut re = 0.0;
        let mut im = 0.0;
        for (l, tap) in ch.taps().iter().enumerate() {
            let phase = -2.0 * PI * ((n - 1) as f64) * (l as f64) / big_n;
            let (s, co) = phase.sin_cos();
            let h = tap[(r, c)];
            re += h.re * co - h.im * s;
            im += h.re * s + h.im * co;
        }
        C64::new(re, im)
    })
}

/// Per-beam variance from the explicit time-domain block model.
///
/// One OFDM frame of time samples is `x_time = (F^H kron I_K) x_freq` with
/// unitary DFT `F` and per-subcarrier covariances `D_n`. The received sample
/// at time 0 is the first block row `B = [H_0, 0, .., 0, H_{L-1}, .., H_1]`
/// of the block-circulant channel applied to `x_time`, and by circularity
/// every time index shares its variance, so
/// `psi = 1 + w B (F^H kron I) D (F kron I) B^H w^H`.
pub fn beam_variance_time_domain(
    ch: &ChannelRealization,
    power: &PowerProfile,
    beam: &RowDVector<C64>,
) -> f64 {
    let n = ch.n_subcarriers();
    let k = ch.n_users();
    let nr = ch.n_rx();
    let l = ch.n_taps();
    // first block row of the block-circulant time-domain channel
    let mut b = DMatrix::<C64>::zeros(nr, n * k);
    for j in 0..n {
        let tap_idx = if j == 0 { Some(0) } else if n - j < l { Some(n - j) } else { None };
        if let Some(t) = tap_idx {
            if t < l {
                b.view_mut((0, j * k), (nr, k)).copy_from(ch.tap(t));
            }
        }
    }
    let scale = 1.0 / (n as f64).sqrt();
    let f = DMatrix::<C64>::from_fn(n, n, |r, c| {
        C64::from_polar(scale, -2.0 * PI * (r as f64) * (c as f64) / n as f64)
    });
    let eye_k = DMatrix::<C64>::identity(k, k);
    let idft = f.adjoint().kronecker(&eye_k);
    let v = (beam * &b) * idft;
    let mut acc = 0.0;
    for sub in 0..n {
        let load = power.load(sub + 1);
        for u in 0..k {
            acc += v[sub * k + u].norm_sqr() * load[u];
        }
    }
    1.0 + acc
}

// ---------------------------------------------------------------------------
// Lloyd-Max by quadrature
// ---------------------------------------------------------------------------

/// Composite Simpson rule with an even number of panels.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels.max(2) + panels % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

const GAUSS_CLIP: f64 = 12.0;

fn gauss_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

fn cell_integrals(lo: f64, hi: f64) -> (f64, f64) {
    let a = lo.max(-GAUSS_CLIP);
    let b = hi.min(GAUSS_CLIP);
    if b <= a {
        return (0.0, 0.0);
    }
    let panels = (((b - a) / 0.002).ceil() as usize).clamp(64, 20_000);
    let mass = simpson(gauss_pdf, a, b, panels);
    let mean = simpson(|x| x * gauss_pdf(x), a, b, panels);
    (mass, mean)
}

/// Lloyd-Max quantization gain for a unit Gaussian, with every integral done
/// by Simpson quadrature on the clipped density: no error functions, no
/// closed forms. Supports `1 <= bits <= 8`.
pub fn lloyd_max_alpha_quadrature(bits: u32) -> f64 {
    assert!((1..=8).contains(&bits), "quadrature oracle supports 1..=8 bits");
    let m = 1usize << bits;
    // spread the initial levels across the bulk of the density
    let mut levels: Vec<f64> = (0..m).map(|i| -3.0 + 6.0 * (i as f64 + 0.5) / m as f64).collect();
    let mut thresholds = vec![0.0; m + 1];
    for _ in 0..10_000 {
        thresholds[0] = f64::NEG_INFINITY;
        thresholds[m] = f64::INFINITY;
        for i in 1..m {
            thresholds[i] = 0.5 * (levels[i - 1] + levels[i]);
        }
        let mut delta = 0.0f64;
        for i in 0..m {
            let (mass, mean) = cell_integrals(thresholds[i], thresholds[i + 1]);
            let y = mean / mass;
            delta = delta.max((y - levels[i]).abs());
            levels[i] = y;
        }
        if delta < 1e-9 {
            break;
        }
    }
    let mut alpha = 0.0;
    for i in 0..m {
        let (mass, _) = cell_integrals(thresholds[i], thresholds[i + 1]);
        alpha += levels[i] * levels[i] * mass;
    }
    alpha
}

// ---------------------------------------------------------------------------
// Rate objective by enumeration
// ---------------------------------------------------------------------------

/// Whitened per-subcarrier rows of a pruned selection, rebuilt naively:
/// entrywise DFT responses, explicit variance loops, inline gain formula.
fn naive_whitened(inst: &Instance, pruned: &Selection) -> Vec<DMatrix<C64>> {
    let k = inst.n_users();
    let n_sub = inst.n_subcarriers();
    let tuples: Vec<_> = pruned.tuples().copied().collect();
    // per-subcarrier scaled responses, naively
    let scaled: Vec<DMatrix<C64>> = (1..=n_sub)
        .map(|n| {
            let mut g = naive_freq_response(&inst.channel, n);
            let load = inst.power.load(n);
            for c in 0..k {
                let s = load[c].sqrt();
                for r in 0..g.nrows() {
                    g[(r, c)] *= C64::new(s, 0.0);
                }
            }
            g
        })
        .collect();
    let mut scales = Vec::new();
    let mut rows: Vec<Vec<RowDVector<C64>>> = Vec::new();
    for t in &tuples {
        let w = inst.codebook.beam(t.beam);
        let per_n: Vec<RowDVector<C64>> = scaled.iter().map(|s| w * s).collect();
        let mut acc = 0.0;
        for r in &per_n {
            acc += r.iter().map(|c| c.norm_sqr()).sum::<f64>();
        }
        let psi = 1.0 + acc / n_sub as f64;
        let alpha = inst.adc.alpha(t.bits).expect("valid bits");
        let t_gain = if alpha == 1.0 {
            1.0
        } else {
            alpha * alpha / (alpha * alpha + alpha * (1.0 - alpha) * psi)
        };
        scales.push(t_gain.sqrt());
        rows.push(per_n);
    }
    (0..n_sub)
        .map(|n| {
            let mut m = DMatrix::<C64>::zeros(tuples.len(), k);
            for (r, per_n) in rows.iter().enumerate() {
                for c in 0..k {
                    m[(r, c)] = per_n[n][c] * C64::new(scales[r], 0.0);
                }
            }
            m
        })
        .collect()
}

/// `f(A)` for a user bitmask, via LU determinants of the full
/// `I + L_A L_A^H` matrix; no Gram-side switching, no factoring shortcuts.
pub fn naive_rate_mask(inst: &Instance, sel: &Selection, mask: u32) -> f64 {
    let pruned = sel.prune();
    if mask == 0 || pruned.is_empty() {
        return 0.0;
    }
    let stacked = naive_whitened(inst, &pruned);
    // bit i of the mask names the user at weight-sorted position i; map it to
    // that user's channel column
    let perm = inst.users.perm();
    let cols: Vec<usize> =
        (0..inst.n_users()).filter(|i| mask & (1 << i) != 0).map(|i| perm[i]).collect();
    stacked
        .iter()
        .map(|l| {
            let m = l.nrows();
            let mut gram = DMatrix::<C64>::identity(m, m);
            for r in 0..m {
                for rr in 0..m {
                    let mut acc = C64::new(0.0, 0.0);
                    for &c in &cols {
                        acc += l[(r, c)] * l[(rr, c)].conj();
                    }
                    gram[(r, rr)] += acc;
                }
            }
            gram.determinant().re.ln() / std::f64::consts::LN_2
        })
        .sum()
}

/// Level value `g(level)` by brute force: minimum over every subset `A` of
/// the first `level` sorted users of `(queues outside A) + f(A)`.
pub fn g_level_enumerated(inst: &Instance, sel: &Selection, level: usize) -> f64 {
    assert!(level >= 1 && level <= inst.n_users());
    let queues = inst.users.queues();
    let mut best = f64::INFINITY;
    for mask in 0..(1u32 << level) {
        let mut qsum = 0.0;
        for u in 0..level {
            if mask & (1 << u) == 0 {
                qsum += queues[u];
            }
        }
        let val = if qsum.is_infinite() {
            f64::INFINITY
        } else {
            qsum + naive_rate_mask(inst, sel, mask)
        };
        if val < best {
            best = val;
        }
    }
    best
}

/// Maximum of `sum_k w_k r_k` over the queue-truncated rate region
/// `{ r >= 0, r_k <= Q_k, sum_{k in T} r_k <= f(T) for all T }` by brute
/// vertex enumeration: every K-subset of active constraints is solved as a
/// linear system and feasible vertices are scored. Requires `K <= 3` and
/// finite queues.
pub fn max_weighted_rate_vertex(inst: &Instance, sel: &Selection) -> f64 {
    let k = inst.n_users();
    assert!(k <= 3, "vertex enumeration oracle capped at 3 users");
    let queues = inst.users.queues();
    let weights = inst.users.weights();
    assert!(queues.iter().all(|q| q.is_finite()), "oracle needs finite queues");

    // constraint rows: a . r <= b
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for mask in 1u32..(1 << k) {
        let a: Vec<f64> =
            (0..k).map(|u| if mask & (1 << u) != 0 { 1.0 } else { 0.0 }).collect();
        rows.push((a, naive_rate_mask(inst, sel, mask)));
    }
    for u in 0..k {
        let mut cap = vec![0.0; k];
        cap[u] = 1.0;
        rows.push((cap.clone(), queues[u]));
        let mut low = vec![0.0; k];
        low[u] = -1.0;
        rows.push((low, 0.0)); // -r_u <= 0
    }

    let tol = 1e-8;
    let mut best = 0.0f64; // origin is always feasible
    let n_rows = rows.len();
    let mut combo = vec![0usize; k];
    // iterate over all k-subsets of constraint rows
    fn subsets(n: usize, k: usize, start: usize, combo: &mut Vec<usize>, depth: usize, out: &mut Vec<Vec<usize>>) {
        if depth == k {
            out.push(combo[..k].to_vec());
            return;
        }
        for i in start..n {
            combo[depth] = i;
            subsets(n, k, i + 1, combo, depth + 1, out);
        }
    }
    let mut all = Vec::new();
    subsets(n_rows, k, 0, &mut combo, 0, &mut all);
    for idx in all {
        let a = DMatrix::<f64>::from_fn(k, k, |r, c| rows[idx[r]].0[c]);
        let b = nalgebra::DVector::<f64>::from_fn(k, |r, _| rows[idx[r]].1);
        let Some(sol) = a.lu().solve(&b) else { continue };
        let feasible = rows.iter().all(|(row, rhs)| {
            let lhs: f64 = row.iter().zip(sol.iter()).map(|(a, r)| a * r).sum();
            lhs <= rhs + tol
        });
        if feasible {
            let obj: f64 = weights.iter().zip(sol.iter()).map(|(w, r)| w * r).sum();
            if obj > best {
                best = obj;
            }
        }
    }
    best
}

/// Queue-aware weighted objective by enumeration: levels from
/// [`g_level_enumerated`], combined with the sorted weight differences.
pub fn hprime_enumerated(inst: &Instance, sel: &Selection) -> f64 {
    let w = inst.users.weights();
    let k = w.len();
    let mut h = 0.0;
    for l in 1..=k {
        let delta = if l < k { w[l - 1] - w[l] } else { w[l - 1] };
        h += delta * g_level_enumerated(inst, sel, l);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_the_density_to_one() {
        let total = simpson(gauss_pdf, -GAUSS_CLIP, GAUSS_CLIP, 20_000);
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_alpha_is_sane_for_one_bit() {
        let a = lloyd_max_alpha_quadrature(1);
        assert!((a - 2.0 / PI).abs() < 1e-7, "got {a}");
    }
}
