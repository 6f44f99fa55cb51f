//! Selections of (beam, bits) tuples and the queue-aware weighted rate
//! objective defined on them.
//!
//! For a selection `S` the evaluator forms the whitened per-subcarrier
//! effective channel and computes, for every user-prefix level `l` (users
//! sorted by nonincreasing weight),
//!
//! ```text
//! g(l) = min over A within {1..l} of  sum of Q_k over {1..l} minus A
//!                                     + f(A)
//! f(A) = sum over subcarriers of log2 det(I + L_n[A] L_n[A]^H)
//! ```
//!
//! and the objective `h(S) = sum_l (w_l - w_{l+1}) g(l)`, the weighted sum
//! rate at the best corner of the queue-truncated rate region. Corner rates
//! are the consecutive differences `R_l = g(l) - g(l-1)`.
//!
//! Adding tuples never hurts (`h` is monotone) and helps less the more is
//! already selected (`h` is submodular); the greedy machinery leans on both.
//! Evaluations are memoized on the pruned canonical form of the selection,
//! which also makes `h(S) = h(prune(S))` hold bit-for-bit.

use nalgebra::{DMatrix, RowDVector};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use crate::aqnm::{beam_variance_cached, effective_gain, Bits};
use crate::instance::{Instance, C64};
use crate::{Error, Result};

/// Largest supported user count: level minimization enumerates subsets of
/// the finite-queue users, so the cost grows as `2^K`.
pub const MAX_USERS: usize = 20;

/// One RF chain assignment: an analog beam and an ADC resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "TupleWire", into = "TupleWire")]
pub struct Tuple {
    pub beam: usize,
    pub bits: Bits,
}

impl Tuple {
    /// Panics on zero bits; a chain with no resolution is meaningless.
    pub fn new(beam: usize, bits: Bits) -> Self {
        assert!(bits != Bits::Finite(0), "tuple with zero bits");
        Self { beam, bits }
    }
}

#[derive(Serialize, Deserialize)]
struct TupleWire {
    beam: usize,
    bits: Bits,
}

impl From<Tuple> for TupleWire {
    fn from(t: Tuple) -> Self {
        TupleWire { beam: t.beam, bits: t.bits }
    }
}

impl TryFrom<TupleWire> for Tuple {
    type Error = Error;

    fn try_from(w: TupleWire) -> Result<Self> {
        if w.bits == Bits::Finite(0) {
            return Err(Error::InvalidBits(0));
        }
        Ok(Tuple { beam: w.beam, bits: w.bits })
    }
}

/// A set of tuples. The same beam may appear with several resolutions;
/// [`Selection::prune`] collapses each beam to its largest one, which leaves
/// the objective unchanged because a beam's contribution is driven by its
/// best resolution only.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Selection {
    tuples: BTreeSet<Tuple>,
}

impl Selection {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_tuples(tuples: impl IntoIterator<Item = Tuple>) -> Self {
        Self { tuples: tuples.into_iter().collect() }
    }

    /// Inserts a tuple; `false` if it was already present.
    pub fn insert(&mut self, t: Tuple) -> bool {
        self.tuples.insert(t)
    }

    pub fn contains(&self, t: &Tuple) -> bool {
        self.tuples.contains(t)
    }

    /// Removes a tuple; `false` if it was not present.
    pub fn remove(&mut self, t: &Tuple) -> bool {
        self.tuples.remove(t)
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Tuples in canonical (beam, bits) order.
    pub fn tuples(&self) -> impl Iterator<Item = &Tuple> {
        self.tuples.iter()
    }

    /// Copy of `self` with one more tuple.
    pub fn with(&self, t: Tuple) -> Self {
        let mut s = self.clone();
        s.insert(t);
        s
    }

    /// Canonical form: one tuple per distinct beam, keeping the largest
    /// resolution, ordered by beam id.
    pub fn prune(&self) -> Selection {
        let mut best: BTreeMap<usize, Bits> = BTreeMap::new();
        for t in &self.tuples {
            let e = best.entry(t.beam).or_insert(t.bits);
            if t.bits > *e {
                *e = t.bits;
            }
        }
        Selection {
            tuples: best.into_iter().map(|(beam, bits)| Tuple { beam, bits }).collect(),
        }
    }

    /// Distinct beam ids in ascending order.
    pub fn distinct_beams(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.tuples.iter().map(|t| t.beam).collect();
        set.into_iter().collect()
    }

    pub fn n_distinct_beams(&self) -> usize {
        self.tuples.iter().map(|t| t.beam).collect::<BTreeSet<_>>().len()
    }
}

impl FromIterator<Tuple> for Selection {
    fn from_iter<I: IntoIterator<Item = Tuple>>(iter: I) -> Self {
        Self::from_tuples(iter)
    }
}

/// Objective evaluator for one instance. Caches per-beam projections,
/// variances and gains, and memoizes the objective on pruned selections; the
/// memo-miss counter is the complexity currency every algorithm reports.
pub struct Evaluator<'a> {
    inst: &'a Instance,
    rows: Mutex<HashMap<usize, Arc<Vec<RowDVector<C64>>>>>,
    psis: Mutex<HashMap<usize, f64>>,
    gains: Mutex<HashMap<(usize, Bits), f64>>,
    memo: Mutex<HashMap<Vec<Tuple>, f64>>,
    fresh: AtomicU64,
}

impl<'a> Evaluator<'a> {
    pub fn new(inst: &'a Instance) -> Result<Self> {
        let k = inst.n_users();
        if k > MAX_USERS {
            return Err(Error::UserCap { cap: MAX_USERS, got: k });
        }
        Ok(Self {
            inst,
            rows: Mutex::new(HashMap::new()),
            psis: Mutex::new(HashMap::new()),
            gains: Mutex::new(HashMap::new()),
            memo: Mutex::new(HashMap::new()),
            fresh: AtomicU64::new(0),
        })
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    /// Fresh (non-memoized) objective evaluations so far.
    pub fn eval_count(&self) -> u64 {
        self.fresh.load(Ordering::Relaxed)
    }

    /// Cached time-domain variance of one beam.
    pub fn psi(&self, beam: usize) -> f64 {
        assert!(beam < self.inst.codebook.len(), "beam id {beam} outside codebook");
        let mut map = self.psis.lock().unwrap();
        *map.entry(beam).or_insert_with(|| beam_variance_cached(self.inst, beam))
    }

    /// Cached effective gain `t` of one tuple.
    pub fn gain(&self, beam: usize, bits: Bits) -> f64 {
        let psi = self.psi(beam);
        let mut map = self.gains.lock().unwrap();
        *map.entry((beam, bits)).or_insert_with(|| {
            let alpha = self.inst.adc.alpha(bits).expect("valid bits in tuple");
            effective_gain(alpha, psi).expect("alpha and psi in domain")
        })
    }

    /// Unscaled per-subcarrier projections `w_m G_n D_n^{1/2}` of one beam.
    fn beam_rows(&self, beam: usize) -> Arc<Vec<RowDVector<C64>>> {
        if let Some(r) = self.rows.lock().unwrap().get(&beam) {
            return Arc::clone(r);
        }
        let w = self.inst.codebook.beam(beam);
        let rows: Vec<RowDVector<C64>> =
            (1..=self.inst.n_subcarriers()).map(|n| w * self.inst.scaled_response(n)).collect();
        let arc = Arc::new(rows);
        self.rows.lock().unwrap().entry(beam).or_insert_with(|| Arc::clone(&arc));
        arc
    }

    /// Whitened effective channels `L_n` of a pruned selection, one
    /// `|beams| x K` matrix per subcarrier.
    fn stacked(&self, pruned: &Selection) -> Vec<DMatrix<C64>> {
        let k = self.inst.n_users();
        let n_sub = self.inst.n_subcarriers();
        let parts: Vec<(Arc<Vec<RowDVector<C64>>>, f64)> = pruned
            .tuples()
            .map(|t| (self.beam_rows(t.beam), self.gain(t.beam, t.bits).sqrt()))
            .collect();
        (0..n_sub)
            .map(|n| {
                let mut m = DMatrix::<C64>::zeros(parts.len(), k);
                for (r, (rows, scale)) in parts.iter().enumerate() {
                    for c in 0..k {
                        m[(r, c)] = rows[n][c] * C64::new(*scale, 0.0);
                    }
                }
                m
            })
            .collect()
    }

    /// `f(A) = sum_n log2 det(I + L_n[A] L_n[A]^H)` for the user subset given
    /// as a bitmask over weight-sorted users; bit `i` selects the channel
    /// column of the user at sorted position `i`.
    fn f_mask(&self, stacked: &[DMatrix<C64>], mask: u32) -> f64 {
        if mask == 0 || stacked.is_empty() || stacked[0].nrows() == 0 {
            return 0.0;
        }
        let perm = self.inst.users.perm();
        let cols: Vec<usize> =
            (0..self.inst.n_users()).filter(|i| mask & (1 << i) != 0).map(|i| perm[i]).collect();
        stacked.iter().map(|l| logdet2_eye_plus_gram(l, &cols)).sum()
    }

    /// Level values `g(1) .. g(K)` of a selection (callers pass the pruned
    /// form). Users whose queue is infinite can never profitably be dropped,
    /// so the minimization only enumerates subsets of finite-queue users; a
    /// full-buffer instance costs a single determinant pass per level.
    pub fn g_levels(&self, sel: &Selection) -> Vec<f64> {
        let pruned = sel.prune();
        let stacked = self.stacked(&pruned);
        let queues = self.inst.users.queues();
        let k = self.inst.n_users();
        let mut f_memo: HashMap<u32, f64> = HashMap::new();
        let mut f = |mask: u32, ev: &Self| -> f64 {
            *f_memo.entry(mask).or_insert_with(|| ev.f_mask(&stacked, mask))
        };
        let mut out = Vec::with_capacity(k);
        for level in 1..=k {
            let mut base = 0u32;
            let mut finite: Vec<usize> = Vec::new();
            for u in 0..level {
                if queues[u].is_infinite() {
                    base |= 1 << u;
                } else {
                    finite.push(u);
                }
            }
            let mut best = f64::INFINITY;
            for s in 0..(1u32 << finite.len()) {
                let mut mask = base;
                let mut qsum = 0.0;
                for (i, &u) in finite.iter().enumerate() {
                    if s & (1 << i) != 0 {
                        mask |= 1 << u;
                    } else {
                        qsum += queues[u];
                    }
                }
                let val = qsum + f(mask, self);
                if val < best {
                    best = val;
                }
            }
            out.push(best);
        }
        out
    }

    /// The objective `h(S)`: weighted sum rate at the best corner of the
    /// queue-truncated region. Memoized on `prune(S)`, so dominated tuples
    /// change nothing, bit-for-bit.
    pub fn hprime(&self, sel: &Selection) -> f64 {
        let pruned = sel.prune();
        let key: Vec<Tuple> = pruned.tuples().copied().collect();
        if let Some(&v) = self.memo.lock().unwrap().get(&key) {
            return v;
        }
        self.fresh.fetch_add(1, Ordering::Relaxed);
        let g = self.g_levels(&pruned);
        let w = self.inst.users.weights();
        let k = w.len();
        let mut h = 0.0;
        for l in 0..k {
            let delta = if l + 1 < k { w[l] - w[l + 1] } else { w[l] };
            h += delta * g[l];
        }
        self.memo.lock().unwrap().insert(key, h);
        h
    }

    /// Marginal value of adding `t` to `sel`.
    pub fn marginal(&self, sel: &Selection, t: Tuple) -> f64 {
        self.hprime(&sel.with(t)) - self.hprime(sel)
    }

    /// Unweighted, unconstrained sum rate `f(U)` of a selection.
    pub fn sum_rate(&self, sel: &Selection) -> f64 {
        let pruned = sel.prune();
        let stacked = self.stacked(&pruned);
        let full = if self.inst.n_users() == 32 {
            u32::MAX
        } else {
            (1u32 << self.inst.n_users()) - 1
        };
        self.f_mask(&stacked, full)
    }

    /// Per-user rates `R_l = g(l) - g(l-1)` at the corner the objective
    /// scores, in sorted-user order. Nonnegative, each capped by its queue,
    /// and satisfying `h(S) = sum_l w_l R_l`.
    pub fn corner_rates(&self, sel: &Selection) -> Vec<f64> {
        let g = self.g_levels(&sel.prune());
        let mut prev = 0.0;
        g.into_iter()
            .map(|gl| {
                let r = gl - prev;
                prev += r;
                r
            })
            .collect()
    }
}

/// `log2 det(I + L[cols] L[cols]^H)` through the smaller of the two Gram
/// forms; both sides share eigenvalues, so the cheaper one is exact.
fn logdet2_eye_plus_gram(l: &DMatrix<C64>, cols: &[usize]) -> f64 {
    let m = l.nrows();
    let a = cols.len();
    let gram = if m <= a {
        let mut g = DMatrix::<C64>::identity(m, m);
        for r in 0..m {
            for rr in 0..m {
                let mut acc = C64::new(0.0, 0.0);
                for &c in cols {
                    acc += l[(r, c)] * l[(rr, c)].conj();
                }
                g[(r, rr)] += acc;
            }
        }
        g
    } else {
        let mut g = DMatrix::<C64>::identity(a, a);
        for (i, &ci) in cols.iter().enumerate() {
            for (j, &cj) in cols.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..m {
                    acc += l[(r, ci)].conj() * l[(r, cj)];
                }
                g[(i, j)] += acc;
            }
        }
        g
    };
    let chol = gram.cholesky().expect("I + Gram is positive definite");
    let lt = chol.l();
    let dim = lt.nrows();
    2.0 * (0..dim).map(|i| lt[(i, i)].re.ln()).sum::<f64>() / std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aqnm::AdcTable;
    use crate::instance::{generate_rayleigh, BeamCodebook, PowerProfile, UserState};
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn make_instance(seed: u64, users: UserState) -> Instance {
        let k = users.n_users();
        let ch = generate_rayleigh(4, k, 2, 4, &[0.6, 0.4], seed).unwrap();
        let power = PowerProfile::flat(4, k, 1.5).unwrap();
        Instance::new(ch, power, BeamCodebook::dft(4), users, AdcTable::default()).unwrap()
    }

    fn random_selection(rng: &mut impl Rng, n_beams: usize, max_bits: u32, len: usize) -> Selection {
        (0..len)
            .map(|_| {
                Tuple::new(rng.gen_range(0..n_beams), Bits::Finite(rng.gen_range(1..=max_bits)))
            })
            .collect()
    }

    #[test]
    fn empty_selection_scores_zero() {
        let inst = make_instance(1, UserState::full_buffer(3));
        let ev = Evaluator::new(&inst).unwrap();
        assert_eq!(ev.hprime(&Selection::empty()), 0.0);
        assert_eq!(ev.sum_rate(&Selection::empty()), 0.0);
        assert!(ev.corner_rates(&Selection::empty()).iter().all(|&r| r == 0.0));
    }

    #[test]
    fn single_beam_single_user_matches_scalar_formula() {
        let inst = make_instance(2, UserState::full_buffer(1));
        let ev = Evaluator::new(&inst).unwrap();
        let t = Tuple::new(1, Bits::Finite(3));
        let got = ev.hprime(&Selection::from_tuples([t]));
        let gain = ev.gain(1, Bits::Finite(3));
        let want: f64 = (1..=4)
            .map(|n| {
                let row = inst.codebook.beam(1) * inst.scaled_response(n);
                (1.0 + gain * row[0].norm_sqr()).log2()
            })
            .sum();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn full_buffer_objective_is_sum_rate() {
        let inst = make_instance(3, UserState::full_buffer(3));
        let ev = Evaluator::new(&inst).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            let sel = random_selection(&mut rng, 4, 6, 3);
            assert!((ev.hprime(&sel) - ev.sum_rate(&sel)).abs() < 1e-12);
        }
    }

    #[test]
    fn level_values_match_enumeration_oracle() {
        let users = UserState::new(&[1.0, 0.7, 0.2], &[3.0, f64::INFINITY, 1.5]).unwrap();
        let inst = make_instance(4, users);
        let ev = Evaluator::new(&inst).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let sel = random_selection(&mut rng, 4, 5, 3).prune();
            let g = ev.g_levels(&sel);
            for level in 1..=3 {
                let want = oracle::g_level_enumerated(&inst, &sel, level);
                assert!(
                    (g[level - 1] - want).abs() < 1e-9,
                    "level {level}: {} vs {want}",
                    g[level - 1]
                );
            }
        }
    }

    #[test]
    fn tiny_queue_caps_the_level_value() {
        let users = UserState::new(&[1.0], &[0.05]).unwrap();
        let inst = make_instance(5, users);
        let ev = Evaluator::new(&inst).unwrap();
        let sel = Selection::from_tuples([Tuple::new(0, Bits::Finite(8))]);
        let g = ev.g_levels(&sel);
        assert!((g[0] - 0.05).abs() < 1e-12, "rate should saturate at the queue");
    }

    #[test]
    fn corner_rates_are_consistent() {
        let users =
            UserState::new(&[0.9, 0.6, 0.3], &[2.0, 1.0, f64::INFINITY]).unwrap();
        let inst = make_instance(6, users);
        let ev = Evaluator::new(&inst).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let sel = random_selection(&mut rng, 4, 6, 4);
            let rates = ev.corner_rates(&sel);
            let w = inst.users.weights();
            let q = inst.users.queues();
            let mut wsum = 0.0;
            for (l, &r) in rates.iter().enumerate() {
                assert!(r >= -1e-12, "negative corner rate");
                assert!(r <= q[l] + 1e-9, "rate exceeds queue");
                wsum += w[l] * r;
            }
            assert!((wsum - ev.hprime(&sel)).abs() < 1e-9);
        }
    }

    #[test]
    fn objective_is_monotone_in_bits_and_tuples() {
        let inst = make_instance(7, UserState::full_buffer(3));
        let ev = Evaluator::new(&inst).unwrap();
        let base = Selection::from_tuples([Tuple::new(0, Bits::Finite(2))]);
        let mut prev = ev.hprime(&base);
        for b in 3..=8 {
            let cur = ev.hprime(&Selection::from_tuples([Tuple::new(0, Bits::Finite(b))]));
            assert!(cur >= prev);
            prev = cur;
        }
        let more = base.with(Tuple::new(2, Bits::Finite(4)));
        assert!(ev.hprime(&more) >= ev.hprime(&base) - 1e-12);
    }

    #[test]
    fn dominated_tuples_change_nothing_bit_for_bit() {
        let users = UserState::new(&[1.0, 0.4, 0.1], &[4.0, 2.0, 8.0]).unwrap();
        let inst = make_instance(8, users);
        let ev = Evaluator::new(&inst).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let sel = random_selection(&mut rng, 4, 7, 4);
            let h = ev.hprime(&sel);
            assert_eq!(h, ev.hprime(&sel.prune()));
            // adding a weaker copy of an existing beam is a no-op
            let t = sel.tuples().next().copied();
            if let Some(t) = t {
                if let Bits::Finite(b) = t.bits {
                    if b > 1 {
                        let extra = sel.with(Tuple::new(t.beam, Bits::Finite(b - 1)));
                        assert_eq!(h, ev.hprime(&extra));
                    }
                }
            }
        }
    }

    #[test]
    fn submodularity_spot_check() {
        let users = UserState::new(&[1.0, 0.5, 0.25], &[5.0, 1.0, f64::INFINITY]).unwrap();
        let inst = make_instance(9, users);
        let ev = Evaluator::new(&inst).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let small = random_selection(&mut rng, 4, 5, 2);
            let mut big = small.clone();
            for t in random_selection(&mut rng, 4, 5, 2).tuples() {
                big.insert(*t);
            }
            let e = Tuple::new(rng.gen_range(0..4), Bits::Finite(rng.gen_range(1..=5)));
            let m_small = ev.marginal(&small, e);
            let m_big = ev.marginal(&big, e);
            assert!(m_big <= m_small + 1e-9, "{m_big} > {m_small}");
            assert!(m_small >= -1e-9 && m_big >= -1e-9);
        }
    }

    #[test]
    fn memo_counts_only_fresh_evaluations() {
        let inst = make_instance(10, UserState::full_buffer(2));
        let ev = Evaluator::new(&inst).unwrap();
        let sel = Selection::from_tuples([Tuple::new(0, Bits::Finite(3))]);
        assert_eq!(ev.eval_count(), 0);
        ev.hprime(&sel);
        assert_eq!(ev.eval_count(), 1);
        ev.hprime(&sel);
        ev.hprime(&sel.prune());
        // a dominated variant hits the same memo entry
        ev.hprime(&sel.with(Tuple::new(0, Bits::Finite(1))));
        assert_eq!(ev.eval_count(), 1);
        ev.hprime(&sel.with(Tuple::new(1, Bits::Finite(1))));
        assert_eq!(ev.eval_count(), 2);
    }

    #[test]
    fn evaluator_agrees_with_whitened_channel_construction() {
        let inst = make_instance(11, UserState::full_buffer(3));
        let ev = Evaluator::new(&inst).unwrap();
        let sel = Selection::from_tuples([
            Tuple::new(0, Bits::Finite(2)),
            Tuple::new(3, Bits::Finite(5)),
        ]);
        let eff = crate::aqnm::whitened_channel(&sel, &inst).unwrap();
        let want: f64 = eff
            .per_subcarrier
            .iter()
            .map(|l| {
                let gram = DMatrix::<C64>::identity(l.nrows(), l.nrows()) + l * l.adjoint();
                gram.cholesky().unwrap().determinant().ln() / std::f64::consts::LN_2
            })
            .sum();
        assert!((ev.sum_rate(&sel) - want).abs() < 1e-9);
    }

    #[test]
    fn user_cap_is_enforced() {
        let users = UserState::full_buffer(21);
        let ch = generate_rayleigh(4, 21, 1, 4, &[1.0], 0).unwrap();
        let power = PowerProfile::flat(4, 21, 1.0).unwrap();
        let inst =
            Instance::new(ch, power, BeamCodebook::dft(4), users, AdcTable::default()).unwrap();
        assert!(matches!(Evaluator::new(&inst), Err(Error::UserCap { cap: 20, got: 21 })));
    }

    #[test]
    fn selection_serde_round_trip() {
        let sel = Selection::from_tuples([
            Tuple::new(3, Bits::Finite(4)),
            Tuple::new(0, Bits::Inf),
        ]);
        let text = serde_json::to_string(&sel).unwrap();
        assert_eq!(text, r#"[{"beam":0,"bits":"inf"},{"beam":3,"bits":4}]"#);
        let back: Selection = serde_json::from_str(&text).unwrap();
        assert_eq!(sel, back);
        assert!(serde_json::from_str::<Selection>(r#"[{"beam":0,"bits":0}]"#).is_err());
    }

    #[test]
    fn prune_keeps_max_bits_per_beam() {
        let sel = Selection::from_tuples([
            Tuple::new(1, Bits::Finite(2)),
            Tuple::new(1, Bits::Finite(7)),
            Tuple::new(1, Bits::Inf),
            Tuple::new(0, Bits::Finite(3)),
        ]);
        let p = sel.prune();
        let got: Vec<Tuple> = p.tuples().copied().collect();
        assert_eq!(got, vec![Tuple::new(0, Bits::Finite(3)), Tuple::new(1, Bits::Inf)]);
        assert_eq!(sel.n_distinct_beams(), 2);
    }
}
