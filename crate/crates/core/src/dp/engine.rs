//! Lattice dynamic program over S frozen sequences ("sides").
//!
//! A side is a sequence of tagged items whose internal order is fixed: a
//! single group's descending sequence, or an already merged multi-group
//! ordering. A lattice cell `(c_0, .., c_{S-1})` stands for the partial path
//! that has placed the first `c_d` items of every side `d`. Each cell keeps
//! the best incoming path only, chosen by comparing the completion value of
//! every predecessor extended by one item. Ties go to the later side.
//!
//! Per-path state is two dense `k × k` count matrices over the groups:
//! `w[g][h]` = placed g-positives above placed h-negatives and
//! `u[g][h]` = placed g-items above placed h-items, both only across sides.
//! Pairs within one side are frozen and kept as constants.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::exact::{Frac, Lambda, Score};
use crate::metrics::DisparityMetric;

/// How partial paths are normalised when evaluating the disparity term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CompletionRule {
    /// Full denominators in signed mode. In absolute mode, resolved pairs
    /// for PRF and optimistic ranges for xAUC and URF.
    #[default]
    Auto,
    /// Every directed term is divided by its full pair count; pairs with an
    /// element missing from the completion win nothing.
    FullDenominators,
    /// Every directed term is the empirical fraction over the elements
    /// present in its completion; a term with no placed positives (or items)
    /// is undefined and its pair is skipped.
    PlacedDenominators,
    /// Every directed term is taken over the pairs whose order is already
    /// fixed, i.e. those with at least one member placed.
    ResolvedPairs,
    /// Every directed term is the range its pairs can still reach; the gap
    /// is the smallest distance between the two ranges.
    OptimisticRanges,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Norm {
    Full,
    Placed,
    Resolved,
    Optimistic,
}

/// A directed term `lo / den`, or the range `[lo, hi] / den` it can still reach.
#[derive(Debug, Clone, Copy)]
struct Term {
    lo: u64,
    hi: u64,
    den: u64,
}

impl Term {
    fn lo(self) -> Frac {
        Frac::new(self.lo as i128, self.den as i128)
    }

    fn hi(self) -> Frac {
        Frac::new(self.hi as i128, self.den as i128)
    }

    /// Smallest `|x − y|` over the two ranges.
    fn gap(self, other: Term) -> Frac {
        let a = self.lo().diff(other.hi());
        let b = other.lo().diff(self.hi());
        let m = if a.exact_cmp(&b).is_ge() { a } else { b };
        if m.num > 0 {
            m
        } else {
            Frac::ZERO
        }
    }

    fn gap_f64(self, other: Term) -> f64 {
        let (x, y) = (self.den as f64, other.den as f64);
        let a = self.lo as f64 / x - other.hi as f64 / y;
        let b = other.lo as f64 / y - self.hi as f64 / x;
        a.max(b).max(0.0)
    }

    fn lo_f64(self) -> f64 {
        self.lo as f64 / self.den as f64
    }
}

/// Per-group counts of the items placed at one lattice cell.
pub(crate) struct Placed {
    cnt: Vec<u64>,
    pos: Vec<u64>,
    neg: Vec<u64>,
    within: Vec<u64>,
    side_negs: Vec<u64>,
    negs: u64,
}

pub(crate) struct SideData {
    /// Global group ids, in local order.
    groups: Vec<usize>,
    /// `(local group, positive)` per item.
    items: Vec<(usize, bool)>,
    kl: usize,
    cnt: Vec<u64>,
    pos: Vec<u64>,
    neg: Vec<u64>,
    /// Local-group positives above any negative of this side, per prefix.
    within: Vec<u64>,
    neg_total: Vec<u64>,
    n0: u64,
}

impl SideData {
    fn new(items_global: &[(usize, bool)]) -> SideData {
        let mut groups: Vec<usize> = Vec::new();
        for &(g, _) in items_global {
            if !groups.contains(&g) {
                groups.push(g);
            }
        }
        let kl = groups.len();
        let len = items_global.len();
        let items: Vec<(usize, bool)> = items_global
            .iter()
            .map(|&(g, p)| (groups.iter().position(|&x| x == g).unwrap(), p))
            .collect();
        let mut cnt = vec![0u64; (len + 1) * kl];
        let mut pos = vec![0u64; (len + 1) * kl];
        let mut neg = vec![0u64; (len + 1) * kl];
        let mut within = vec![0u64; (len + 1) * kl];
        let mut neg_total = vec![0u64; len + 1];
        for (t, &(l, p)) in items.iter().enumerate() {
            let (prev, next) = (t * kl, (t + 1) * kl);
            for x in 0..kl {
                cnt[next + x] = cnt[prev + x];
                pos[next + x] = pos[prev + x];
                neg[next + x] = neg[prev + x];
                within[next + x] = within[prev + x];
            }
            cnt[next + l] += 1;
            neg_total[t + 1] = neg_total[t];
            if p {
                pos[next + l] += 1;
            } else {
                neg[next + l] += 1;
                neg_total[t + 1] += 1;
                for x in 0..kl {
                    within[next + x] += pos[prev + x];
                }
            }
        }
        SideData {
            groups,
            kl,
            n0: neg_total[len],
            items,
            cnt,
            pos,
            neg,
            within,
            neg_total,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.items.len()
    }

    #[inline]
    fn at(&self, arr: &[u64], t: usize, l: usize) -> u64 {
        arr[t * self.kl + l]
    }
}

pub(crate) struct EngineOutput {
    /// `(side, index within side)` in rank order.
    pub path: Vec<(usize, usize)>,
    pub score: Score,
    pub cells: u128,
    pub lattice_bytes: u128,
    pub runtime: std::time::Duration,
}

pub(crate) struct Engine {
    k: usize,
    n: Vec<u64>,
    n1: Vec<u64>,
    n0: Vec<u64>,
    n0_total: u64,
    k_total: i128,
    k_total_f64: f64,
    side_of: Vec<usize>,
    local_of: Vec<usize>,
    sides: Vec<SideData>,
    x_const: Vec<u64>,
    y_const: Vec<u64>,
    metric: DisparityMetric,
    signed: Option<(usize, usize)>,
    norm: Norm,
    lambda: Lambda,
}

impl Engine {
    /// `sides[d]` lists `(global group, positive)` per item; groups are
    /// `0..k` and each group lives on exactly one side.
    pub(crate) fn new(
        sides: &[Vec<(usize, bool)>],
        k: usize,
        metric: DisparityMetric,
        signed: Option<(usize, usize)>,
        rule: CompletionRule,
        lambda: Lambda,
    ) -> Engine {
        let norm = match (rule, signed) {
            (CompletionRule::FullDenominators, _) | (CompletionRule::Auto, Some(_)) => Norm::Full,
            (CompletionRule::PlacedDenominators, _) => Norm::Placed,
            (CompletionRule::ResolvedPairs, _) => Norm::Resolved,
            (CompletionRule::OptimisticRanges, _) => Norm::Optimistic,
            (CompletionRule::Auto, None) if metric == DisparityMetric::Prf => Norm::Resolved,
            (CompletionRule::Auto, None) => Norm::Optimistic,
        };
        let mut n = vec![0u64; k];
        let mut n1 = vec![0u64; k];
        let mut side_of = vec![usize::MAX; k];
        let mut local_of = vec![usize::MAX; k];
        let data: Vec<SideData> = sides.iter().map(|s| SideData::new(s)).collect();
        for (d, side) in data.iter().enumerate() {
            for (l, &g) in side.groups.iter().enumerate() {
                side_of[g] = d;
                local_of[g] = l;
            }
        }
        for s in sides {
            for &(g, p) in s {
                n[g] += 1;
                n1[g] += u64::from(p);
            }
        }
        let n0: Vec<u64> = n.iter().zip(&n1).map(|(a, b)| a - b).collect();
        let n1_total: u64 = n1.iter().sum();
        let n0_total: u64 = n0.iter().sum();

        // frozen same-side pair counts
        let mut x_const = vec![0u64; k * k];
        let mut y_const = vec![0u64; k * k];
        for s in sides {
            let mut pos_seen = vec![0u64; k];
            let mut cnt_seen = vec![0u64; k];
            for &(h, p) in s {
                for g in 0..k {
                    if g != h {
                        y_const[g * k + h] += cnt_seen[g];
                        if !p {
                            x_const[g * k + h] += pos_seen[g];
                        }
                    }
                }
                cnt_seen[h] += 1;
                pos_seen[h] += u64::from(p);
            }
        }

        Engine {
            k,
            n,
            n1,
            n0,
            n0_total,
            k_total: n1_total as i128 * n0_total as i128,
            k_total_f64: n1_total as f64 * n0_total as f64,
            side_of,
            local_of,
            sides: data,
            x_const,
            y_const,
            metric,
            signed,
            norm,
            lambda,
        }
    }

    pub(crate) fn state_len(&self) -> usize {
        2 * self.k * self.k
    }

    pub(crate) fn side_len(&self, d: usize) -> usize {
        self.sides[d].len()
    }

    /// Bytes needed for backpointers plus the rolling state window.
    pub(crate) fn lattice_bytes(&self) -> Option<u128> {
        let dims: Vec<u128> = self.sides.iter().map(|s| s.len() as u128 + 1).collect();
        let cells = dims.iter().try_fold(1u128, |acc, &d| acc.checked_mul(d))?;
        let window = dims[1..].iter().product::<u128>() + 1;
        let state = window.checked_mul(self.state_len() as u128 * 8)?;
        Some(cells.div_ceil(4) + state)
    }

    /// Extends `state` (a path ending at `coords`) by the next item of side `d`.
    #[inline]
    pub(crate) fn apply(&self, coords: &[usize], d: usize, state: &mut [u64]) {
        let k = self.k;
        let side = &self.sides[d];
        let (l, positive) = side.items[coords[d]];
        let g = side.groups[l];
        let (w, u) = state.split_at_mut(k * k);
        for (e, other) in self.sides.iter().enumerate() {
            if e == d {
                continue;
            }
            let c = coords[e];
            for (lh, &h) in other.groups.iter().enumerate() {
                if !positive {
                    w[h * k + g] += other.at(&other.pos, c, lh);
                }
                u[h * k + g] += other.at(&other.cnt, c, lh);
            }
        }
    }

    fn placed_at(&self, coords: &[usize], out: &mut Placed) {
        for g in 0..self.k {
            let d = self.side_of[g];
            let side = &self.sides[d];
            let (c, l) = (coords[d], self.local_of[g]);
            out.cnt[g] = side.at(&side.cnt, c, l);
            out.pos[g] = side.at(&side.pos, c, l);
            out.neg[g] = side.at(&side.neg, c, l);
            out.within[g] = side.at(&side.within, c, l);
        }
        for (d, side) in self.sides.iter().enumerate() {
            out.side_negs[d] = side.neg_total[coords[d]];
        }
        out.negs = out.side_negs.iter().sum();
    }

    pub(crate) fn placed_buffer(&self) -> Placed {
        Placed {
            cnt: vec![0; self.k],
            pos: vec![0; self.k],
            neg: vec![0; self.k],
            within: vec![0; self.k],
            side_negs: vec![0; self.sides.len()],
            negs: 0,
        }
    }

    #[inline]
    fn x(&self, p: &Placed, w: &[u64], g: usize, h: usize) -> u64 {
        let k = self.k;
        if self.side_of[g] == self.side_of[h] {
            return self.x_const[g * k + h];
        }
        let pos_g = p.pos[g];
        let neg_h = p.neg[h];
        w[g * k + h] + pos_g * (self.n0[h] - neg_h)
    }

    #[inline]
    fn y(&self, p: &Placed, u: &[u64], g: usize, h: usize) -> u64 {
        let k = self.k;
        if self.side_of[g] == self.side_of[h] {
            return self.y_const[g * k + h];
        }
        let cnt_g = p.cnt[g];
        let cnt_h = p.cnt[h];
        u[g * k + h] + cnt_g * (self.n[h] - cnt_h)
    }

    /// `wins / pairs` where `pairs` follows `norm`. `placed_x` of `total_x`
    /// members of each side of the pair are placed.
    fn normalised(
        num: u64,
        norm: Norm,
        (placed_x, total_x): (u64, u64),
        (placed_y, total_y): (u64, u64),
    ) -> Option<Term> {
        let (den, open) = match norm {
            Norm::Full => (total_x * total_y, 0),
            Norm::Placed => (placed_x * total_y, 0),
            Norm::Resolved => (total_x * total_y - (total_x - placed_x) * (total_y - placed_y), 0),
            Norm::Optimistic => (total_x * total_y, (total_x - placed_x) * (total_y - placed_y)),
        };
        (den > 0).then_some(Term {
            lo: num,
            hi: num + open,
            den,
        })
    }

    /// Directed pair term `(g, h)` for xAUC and URF.
    fn pair_term(&self, p: &Placed, state: &[u64], g: usize, h: usize, norm: Norm) -> Option<Term> {
        let k = self.k;
        let norm = if self.side_of[g] == self.side_of[h] {
            Norm::Full
        } else {
            norm
        };
        match self.metric {
            DisparityMetric::Xauc => Self::normalised(
                self.x(p, &state[..k * k], g, h),
                norm,
                (p.pos[g], self.n1[g]),
                (p.neg[h], self.n0[h]),
            ),
            DisparityMetric::Urf => Self::normalised(
                self.y(p, &state[k * k..], g, h),
                norm,
                (p.cnt[g], self.n[g]),
                (p.cnt[h], self.n[h]),
            ),
            DisparityMetric::Prf => unreachable!("PRF is a per-group term"),
        }
    }

    fn prf_term(&self, p: &Placed, state: &[u64], g: usize, norm: Norm) -> Option<Term> {
        let k = self.k;
        let d = self.side_of[g];
        let side = &self.sides[d];
        let pos_g = p.pos[g];
        // placed g-positives sit above every unplaced negative of their side
        let mut num = p.within[g] + pos_g * (side.n0 - p.side_negs[d]);
        for h in 0..k {
            if self.side_of[h] != d {
                num += self.x(p, &state[..k * k], g, h);
            }
        }
        Self::normalised(num, norm, (pos_g, self.n1[g]), (p.negs, self.n0_total))
    }

    fn directed(&self, p: &Placed, state: &[u64], g: usize, h: usize, norm: Norm) -> Option<(Term, Term)> {
        match self.metric {
            DisparityMetric::Prf => Some((self.prf_term(p, state, g, norm)?, self.prf_term(p, state, h, norm)?)),
            _ => Some((
                self.pair_term(p, state, g, h, norm)?,
                self.pair_term(p, state, h, g, norm)?,
            )),
        }
    }

    fn utility_num(&self, p: &Placed, state: &[u64]) -> u64 {
        let k = self.k;
        let mut num: u64 = 0;
        for g in 0..k {
            for h in 0..k {
                if g != h && self.side_of[g] != self.side_of[h] {
                    num += self.x(p, &state[..k * k], g, h);
                }
            }
        }
        num
    }

    /// Completion value of the path with counts `state` at `coords`.
    pub(crate) fn evaluate(&self, coords: &[usize], state: &[u64]) -> Score {
        let mut p = self.placed_buffer();
        self.placed_at(coords, &mut p);
        self.evaluate_at(&p, state)
    }

    fn evaluate_at(&self, p: &Placed, state: &[u64]) -> Score {
        let k = self.k;
        let utility = if self.k_total == 0 {
            Frac::ZERO
        } else {
            Frac::new(self.utility_num(p, state) as i128, self.k_total)
        };
        let disparity = match self.signed {
            Some((f, d)) => match self.directed(p, state, f, d, Norm::Full) {
                Some((x, y)) => x.lo().diff(y.lo()),
                None => Frac::ZERO,
            },
            None => {
                let mut best = Frac::ZERO;
                for g in 0..k {
                    for h in g + 1..k {
                        if let Some((x, y)) = self.directed(p, state, g, h, self.norm) {
                            let gap = x.gap(y);
                            if gap.exact_cmp(&best).is_gt() {
                                best = gap;
                            }
                        }
                    }
                }
                best
            }
        };
        Score::new(utility, disparity)
    }

    /// `evaluate` in floating point, as `u − λ·d`.
    fn approx(&self, p: &Placed, state: &[u64]) -> f64 {
        let k = self.k;
        let utility = if self.k_total == 0 {
            0.0
        } else {
            self.utility_num(p, state) as f64 / self.k_total_f64
        };
        if self.lambda.is_zero() {
            return utility;
        }
        let disparity = match self.signed {
            Some((f, d)) => self
                .directed(p, state, f, d, Norm::Full)
                .map_or(0.0, |(x, y)| x.lo_f64() - y.lo_f64()),
            None => {
                let mut best: f64 = 0.0;
                for g in 0..k {
                    for h in g + 1..k {
                        if let Some((x, y)) = self.directed(p, state, g, h, self.norm) {
                            best = best.max(x.gap_f64(y));
                        }
                    }
                }
                best
            }
        };
        utility - self.lambda.value() * disparity
    }

    /// Index of the best candidate; ties go to the later side. Floating
    /// point decides unless two candidates are within `tol`.
    fn pick(&self, p: &Placed, states: &[u64], values: &[(f64, usize)], sl: usize, tol: f64) -> usize {
        let mut top = 0;
        for (i, v) in values.iter().enumerate().skip(1) {
            if v.0 > values[top].0 {
                top = i;
            }
        }
        let separated = values
            .iter()
            .enumerate()
            .all(|(i, v)| i == top || values[top].0 - v.0 > tol);
        if separated && values[top].0.is_finite() {
            return top;
        }
        let mut best: Option<(Score, usize)> = None;
        for i in 0..values.len() {
            let score = self.evaluate_at(p, &states[i * sl..(i + 1) * sl]);
            if best
                .as_ref()
                .is_none_or(|(b, _)| !score.cmp_at(b, &self.lambda).is_lt())
            {
                best = Some((score, i));
            }
        }
        best.expect("at least one candidate").1
    }

    /// Fills the lattice and backtracks the best path to the far corner.
    pub(crate) fn run(&self, memory_budget: u64) -> Result<EngineOutput> {
        self.run_with(memory_budget, true)
    }

    fn run_with(&self, memory_budget: u64, allow_pair_kernel: bool) -> Result<EngineOutput> {
        let start = Instant::now();
        let s = self.sides.len();
        assert!((2..=3).contains(&s), "lattice supports two or three sides");
        let bytes = self
            .lattice_bytes()
            .ok_or_else(|| Error::Resource("lattice size overflows".into()))?;
        if bytes > memory_budget as u128 {
            return Err(Error::Resource(format!(
                "lattice needs {bytes} bytes, budget is {memory_budget}; subsample the groups before fitting"
            )));
        }
        let dims: Vec<usize> = self.sides.iter().map(|x| x.len() + 1).collect();
        let mut strides = vec![1usize; s];
        for d in (0..s - 1).rev() {
            strides[d] = strides[d + 1] * dims[d + 1];
        }
        let cells = strides[0] * dims[0];
        let mut back = vec![0u8; cells.div_ceil(4)];
        let tol = 1e-11 * (1.0 + self.lambda.value());
        let single_groups = self.sides.iter().all(|x| x.groups.len() == 1);
        let final_state = if allow_pair_kernel && s == 2 && self.k == 2 && single_groups {
            self.fill_pair(&mut back, tol)
        } else {
            self.fill(&dims, &strides, &mut back, tol)
        };

        let last = cells - 1;
        let final_coords: Vec<usize> = dims.iter().map(|d| d - 1).collect();
        let score = self.evaluate(&final_coords, &final_state);
        let score = Score::new(score.utility.reduced(), score.disparity.reduced());

        let mut path = Vec::with_capacity(dims.iter().map(|d| d - 1).sum());
        let mut c = final_coords;
        let mut idx = last;
        while idx > 0 {
            let code = (back[idx / 4] >> ((idx % 4) * 2)) & 0b11;
            let d = code as usize - 1;
            c[d] -= 1;
            path.push((d, c[d]));
            idx -= strides[d];
        }
        path.reverse();
        Ok(EngineOutput {
            path,
            score,
            cells: cells as u128,
            lattice_bytes: bytes,
            runtime: start.elapsed(),
        })
    }

    /// Generic fill; returns the state of the far corner.
    fn fill(&self, dims: &[usize], strides: &[usize], back: &mut [u8], tol: f64) -> Vec<u64> {
        let s = dims.len();
        let cells = strides[0] * dims[0];
        let window = strides[0] + 1;
        let sl = self.state_len();
        let mut ring = vec![0u64; window * sl];
        let mut coords = vec![0usize; s];
        let mut pred = vec![0usize; s];
        let mut cand = vec![0u64; s * sl];
        let mut values = vec![(0.0f64, 0usize); s];
        let mut placed = self.placed_buffer();

        let back_off: Vec<usize> = strides.iter().map(|&st| window - st).collect();
        let mut cur = 0usize;
        for idx in 0..cells {
            if idx > 0 {
                let mut n_cand = 0;
                self.placed_at(&coords, &mut placed);
                for d in 0..s {
                    if coords[d] == 0 {
                        continue;
                    }
                    let mut slot = cur + back_off[d];
                    if slot >= window {
                        slot -= window;
                    }
                    let slot = slot * sl;
                    let state = &mut cand[n_cand * sl..(n_cand + 1) * sl];
                    state.copy_from_slice(&ring[slot..slot + sl]);
                    pred.copy_from_slice(&coords);
                    pred[d] -= 1;
                    self.apply(&pred, d, state);
                    values[n_cand] = (self.approx(&placed, state), d);
                    n_cand += 1;
                }
                let pick = self.pick(&placed, &cand, &values[..n_cand], sl, tol);
                let slot = cur * sl;
                ring[slot..slot + sl].copy_from_slice(&cand[pick * sl..(pick + 1) * sl]);
                back[idx / 4] |= ((values[pick].1 + 1) as u8) << ((idx % 4) * 2);
            }
            cur += 1;
            if cur == window {
                cur = 0;
            }
            // odometer, last side fastest
            for d in (0..s).rev() {
                coords[d] += 1;
                if coords[d] < dims[d] {
                    break;
                }
                coords[d] = 0;
            }
        }
        let slot = ((cells - 1) % window) * sl;
        ring[slot..slot + sl].to_vec()
    }

    /// Fill for two sides holding one group each, with the state reduced to
    /// `[w_ab, w_ba, u_ab, u_ba]`. Close calls go through [`Engine::pick`].
    fn fill_pair(&self, back: &mut [u8], tol: f64) -> Vec<u64> {
        let (sa, sb) = (&self.sides[0], &self.sides[1]);
        let (ga, gb) = (sa.groups[0], sb.groups[0]);
        let (na, nb) = (sa.len(), sb.len());
        let k = self.k;
        let sl = self.state_len();
        let widen = |st: [u64; 4], out: &mut [u64]| {
            out[ga * k + gb] = st[0];
            out[gb * k + ga] = st[1];
            out[k * k + ga * k + gb] = st[2];
            out[k * k + gb * k + ga] = st[3];
        };
        let mut prev = vec![[0u64; 4]; nb + 1];
        let mut row = vec![[0u64; 4]; nb + 1];
        let mut cand = vec![0u64; 2 * sl];
        let mut placed = self.placed_buffer();
        for i in 0..=na {
            for j in 0..=nb {
                if i == 0 && j == 0 {
                    row[0] = [0; 4];
                    continue;
                }
                let from_a = (i > 0).then(|| {
                    let mut st = prev[j];
                    if !sa.items[i - 1].1 {
                        st[1] += sb.pos[j];
                    }
                    st[3] += j as u64;
                    st
                });
                let from_b = (j > 0).then(|| {
                    let mut st = row[j - 1];
                    if !sb.items[j - 1].1 {
                        st[0] += sa.pos[i];
                    }
                    st[2] += i as u64;
                    st
                });
                let d = match (from_a, from_b) {
                    (Some(_), None) => 0,
                    (None, Some(_)) => 1,
                    (Some(x), Some(y)) => {
                        let (vx, vy) = (self.approx_pair(i, j, &x), self.approx_pair(i, j, &y));
                        let values = [(vx, 0), (vy, 1)];
                        widen(x, &mut cand[..sl]);
                        widen(y, &mut cand[sl..]);
                        if (vx - vy).abs() > tol && vx.is_finite() && vy.is_finite() {
                            usize::from(vy > vx)
                        } else {
                            self.placed_at(&[i, j], &mut placed);
                            self.pick(&placed, &cand, &values, sl, tol)
                        }
                    }
                    (None, None) => unreachable!(),
                };
                row[j] = if d == 0 { from_a } else { from_b }.expect("chosen side exists");
                let idx = i * (nb + 1) + j;
                back[idx / 4] |= ((d + 1) as u8) << ((idx % 4) * 2);
            }
            std::mem::swap(&mut prev, &mut row);
        }
        let mut out = vec![0u64; sl];
        widen(prev[nb], &mut out);
        out
    }

    /// [`Engine::approx`] specialised to [`Engine::fill_pair`]'s layout.
    #[inline]
    fn approx_pair(&self, i: usize, j: usize, st: &[u64; 4]) -> f64 {
        let (sa, sb) = (&self.sides[0], &self.sides[1]);
        let (ga, gb) = (sa.groups[0], sb.groups[0]);
        let (pa, pb) = (sa.pos[i], sb.pos[j]);
        let (nga, ngb) = (sa.neg[i], sb.neg[j]);
        let x_ab = st[0] + pa * (self.n0[gb] - ngb);
        let x_ba = st[1] + pb * (self.n0[ga] - nga);
        let utility = if self.k_total == 0 {
            0.0
        } else {
            (x_ab + x_ba) as f64 / self.k_total_f64
        };
        if self.lambda.is_zero() {
            return utility;
        }
        let (i, j) = (i as u64, j as u64);
        let terms = |norm: Norm| -> Option<(Term, Term)> {
            match self.metric {
                DisparityMetric::Xauc => Some((
                    Self::normalised(x_ab, norm, (pa, self.n1[ga]), (ngb, self.n0[gb]))?,
                    Self::normalised(x_ba, norm, (pb, self.n1[gb]), (nga, self.n0[ga]))?,
                )),
                DisparityMetric::Urf => {
                    let (ta, tb) = (self.n[ga], self.n[gb]);
                    Some((
                        Self::normalised(st[2] + i * (tb - j), norm, (i, ta), (j, tb))?,
                        Self::normalised(st[3] + j * (ta - i), norm, (j, tb), (i, ta))?,
                    ))
                }
                DisparityMetric::Prf => {
                    let negs = (nga + ngb, self.n0_total);
                    let num_a = sa.within[i as usize] + pa * (sa.n0 - nga) + x_ab;
                    let num_b = sb.within[j as usize] + pb * (sb.n0 - ngb) + x_ba;
                    Some((
                        Self::normalised(num_a, norm, (pa, self.n1[ga]), negs)?,
                        Self::normalised(num_b, norm, (pb, self.n1[gb]), negs)?,
                    ))
                }
            }
        };
        let disparity = match self.signed {
            Some((f, _)) => terms(Norm::Full).map_or(0.0, |(x, y)| {
                let d = x.lo_f64() - y.lo_f64();
                if f == ga {
                    d
                } else {
                    -d
                }
            }),
            None => terms(self.norm).map_or(0.0, |(x, y)| x.gap_f64(y)),
        };
        utility - self.lambda.value() * disparity
    }
}
