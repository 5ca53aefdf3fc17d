//! Sparse exact state vectors over grid diagrams and labeled
//! configurations, plus the measurement primitives of verification.
//!
//! All amplitudes in this scheme are non-negative reals, so states carry
//! plain `f64` amplitudes. A [`DiagramState`] maps diagrams to amplitudes.
//! An [`ExpandedState`] lives on configurations `(G, i)` with
//! `0 <= i < q(d(G))` and stores amplitudes as piecewise-constant blocks of
//! label intervals, which keeps uniform-per-diagram states (the common
//! case) at one block per diagram. Norm accounting uses compensated
//! summation so the `1e-12` exactness contracts hold.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::alexander::{alexander, SerialPolynomial};
use crate::griddiag::GridDiagram;
use crate::mint::QTable;
use crate::util::{self, Kahan};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateError {
    /// A measurement component is empty.
    ZeroProbability,
    /// A diagram in the support has `q(d) = 0`, outside the label space.
    DimensionOutOfRange,
}

impl fmt::Display for StateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateError::ZeroProbability => write!(f, "measurement outcome has probability zero"),
            StateError::DimensionOutOfRange => {
                write!(f, "state supported outside the labeled dimension range")
            }
        }
    }
}

impl core::error::Error for StateError {}

/// Inclusive dimension window `[ceil(dbar/2), floor(3 dbar/2)]` used by the
/// dimension measurement; endpoints round inward.
pub fn dimension_window(dbar: u16) -> (usize, usize) {
    ((dbar as usize + 1) / 2, 3 * dbar as usize / 2)
}

/// A sparse real-amplitude state over grid diagrams.
///
/// Zero amplitudes are pruned on construction, so the support is exactly
/// the stored key set. Iteration order is the canonical diagram order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagramState {
    amps: BTreeMap<GridDiagram, f64>,
}

impl DiagramState {
    pub fn from_map(mut amps: BTreeMap<GridDiagram, f64>) -> Self {
        amps.retain(|_, a| *a != 0.0);
        Self { amps }
    }

    /// The basis state of a single diagram.
    pub fn basis(g: GridDiagram) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(g, 1.0);
        Self { amps }
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitude(&self, g: &GridDiagram) -> f64 {
        self.amps.get(g).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GridDiagram, f64)> {
        self.amps.iter().map(|(g, &a)| (g, a))
    }

    pub fn norm_sq(&self) -> f64 {
        util::kahan_sum(self.amps.values().map(|a| a * a))
    }

    pub fn norm(&self) -> f64 {
        util::sqrt(self.norm_sq())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            amps: self
                .amps
                .iter()
                .map(|(g, a)| (g.clone(), a * factor))
                .collect(),
        }
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            self.scaled(1.0 / n)
        }
    }

    pub fn inner(&self, other: &Self) -> f64 {
        let (small, big) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        util::kahan_sum(
            small
                .amps
                .iter()
                .map(|(g, a)| a * big.amplitude(g)),
        )
    }

    /// Squared overlap of two normalized states.
    pub fn fidelity(&self, other: &Self) -> f64 {
        let ip = self.inner(other);
        ip * ip
    }

    /// Largest absolute amplitude difference over the union support.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (g, a) in self.iter() {
            worst = worst.max(util::abs(a - other.amplitude(g)));
        }
        for (g, b) in other.iter() {
            worst = worst.max(util::abs(self.amplitude(g) - b));
        }
        worst
    }
}

/// One maximal run of labels `[start, end)` sharing an amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub start: u64,
    pub end: u64,
    pub amp: f64,
}

impl Block {
    pub fn len(&self) -> u64 {
        self.end - self.start
    }
}

/// A sparse state over labeled configurations `(G, i)`.
///
/// Per diagram, blocks are sorted, disjoint, and nonzero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpandedState {
    blocks: BTreeMap<GridDiagram, Vec<Block>>,
}

impl ExpandedState {
    /// Blocks must be sorted and disjoint per diagram; zero-amplitude and
    /// empty runs are pruned here.
    pub(crate) fn from_raw(mut blocks: BTreeMap<GridDiagram, Vec<Block>>) -> Self {
        for list in blocks.values_mut() {
            list.retain(|b| b.amp != 0.0 && b.start < b.end);
        }
        blocks.retain(|_, list| !list.is_empty());
        Self { blocks }
    }

    /// Uniform normalized state over all configurations of a move-closed
    /// diagram class.
    pub fn uniform_over_class<'a>(
        diagrams: impl IntoIterator<Item = &'a GridDiagram>,
        qt: &QTable,
    ) -> Result<Self, StateError> {
        let mut blocks = BTreeMap::new();
        let mut total: u128 = 0;
        for g in diagrams {
            let q = qt.q(g.d());
            if q == 0 {
                return Err(StateError::DimensionOutOfRange);
            }
            total += q as u128;
            blocks.insert(
                g.clone(),
                alloc::vec![Block {
                    start: 0,
                    end: q,
                    amp: 0.0,
                }],
            );
        }
        if total == 0 {
            return Err(StateError::ZeroProbability);
        }
        let amp = 1.0 / util::sqrt(total as f64);
        for list in blocks.values_mut() {
            list[0].amp = amp;
        }
        Ok(Self { blocks })
    }

    pub fn len_diagrams(&self) -> usize {
        self.blocks.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GridDiagram, &[Block])> {
        self.blocks.iter().map(|(g, b)| (g, b.as_slice()))
    }

    pub fn blocks_of(&self, g: &GridDiagram) -> &[Block] {
        self.blocks.get(g).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn norm_sq(&self) -> f64 {
        util::kahan_sum(
            self.blocks
                .values()
                .flatten()
                .map(|b| b.len() as f64 * b.amp * b.amp),
        )
    }

    pub fn norm(&self) -> f64 {
        util::sqrt(self.norm_sq())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|(g, list)| {
                (
                    g.clone(),
                    list.iter()
                        .map(|b| Block {
                            amp: b.amp * factor,
                            ..*b
                        })
                        .collect(),
                )
            })
            .collect();
        Self { blocks }
    }

    pub fn inner(&self, other: &Self) -> f64 {
        let mut acc = Kahan::new();
        for (g, mine) in self.iter() {
            let theirs = other.blocks_of(g);
            if theirs.is_empty() {
                continue;
            }
            // merge overlap of two sorted disjoint block lists
            let (mut i, mut j) = (0, 0);
            while i < mine.len() && j < theirs.len() {
                let a = &mine[i];
                let b = &theirs[j];
                let lo = a.start.max(b.start);
                let hi = a.end.min(b.end);
                if lo < hi {
                    acc.add((hi - lo) as f64 * a.amp * b.amp);
                }
                if a.end <= b.end {
                    i += 1;
                } else {
                    j += 1;
                }
            }
        }
        acc.value()
    }

    /// Largest absolute amplitude difference over individual labels.
    pub fn max_diff(&self, other: &Self) -> f64 {
        fn one_sided(a: &ExpandedState, b: &ExpandedState, worst: &mut f64) {
            for (g, mine) in a.iter() {
                let theirs = b.blocks_of(g);
                for blk in mine {
                    // compare against every overlapping block; uncovered
                    // stretches compare against zero
                    let mut covered = alloc::vec::Vec::new();
                    for t in theirs {
                        let lo = blk.start.max(t.start);
                        let hi = blk.end.min(t.end);
                        if lo < hi {
                            covered.push((lo, hi));
                            *worst = worst.max(util::abs(blk.amp - t.amp));
                        }
                    }
                    let covered_len: u64 = covered.iter().map(|(l, h)| h - l).sum();
                    if covered_len < blk.len() {
                        *worst = worst.max(util::abs(blk.amp));
                    }
                }
            }
        }
        let mut worst = 0.0;
        one_sided(self, other, &mut worst);
        one_sided(other, self, &mut worst);
        worst
    }
}

/// The label-spreading isometry: amplitude `a` on `G` becomes
/// `a / sqrt(q(d(G)))` on every `(G, i)` with `i < q(d(G))`.
pub fn expand(state: &DiagramState, qt: &QTable) -> Result<ExpandedState, StateError> {
    let mut blocks = BTreeMap::new();
    for (g, a) in state.iter() {
        let q = qt.q(g.d());
        if q == 0 {
            return Err(StateError::DimensionOutOfRange);
        }
        blocks.insert(
            g.clone(),
            alloc::vec![Block {
                start: 0,
                end: q,
                amp: a / util::sqrt(q as f64),
            }],
        );
    }
    Ok(ExpandedState::from_raw(blocks))
}

/// Inverse of [`expand`]: project onto the uniform-label subspace per
/// diagram, undo the spreading, and report the squared weight that fell
/// outside the image.
pub fn contract(state: &ExpandedState, qt: &QTable) -> Result<(DiagramState, f64), StateError> {
    let mut amps = BTreeMap::new();
    let mut leak = Kahan::new();
    for (g, blocks) in state.iter() {
        let q = qt.q(g.d());
        if q == 0 {
            return Err(StateError::DimensionOutOfRange);
        }
        let mut sum = Kahan::new();
        let mut sq = Kahan::new();
        for b in blocks {
            sum.add(b.len() as f64 * b.amp);
            sq.add(b.len() as f64 * b.amp * b.amp);
        }
        let coeff = sum.value() / util::sqrt(q as f64);
        leak.add(sq.value() - coeff * coeff);
        if coeff != 0.0 {
            amps.insert(g.clone(), coeff);
        }
    }
    Ok((DiagramState::from_map(amps), leak.value().max(0.0)))
}

/// Measure the serial number: probability of outcome `p` and the
/// renormalized post-measurement state.
pub fn measure_alexander(
    state: &DiagramState,
    p: &SerialPolynomial,
) -> Result<(f64, DiagramState), StateError> {
    let mut amps = BTreeMap::new();
    let mut prob = Kahan::new();
    for (g, a) in state.iter() {
        if alexander(g) == *p {
            prob.add(a * a);
            amps.insert(g.clone(), a);
        }
    }
    let prob = prob.value();
    if amps.is_empty() || prob == 0.0 {
        return Err(StateError::ZeroProbability);
    }
    let scale = 1.0 / util::sqrt(prob);
    let post = DiagramState::from_map(amps).scaled(scale);
    Ok((prob, post))
}

/// Measure the projector onto the dimension window
/// `[ceil(dbar/2), floor(3 dbar/2)]`.
pub fn project_dimension(
    state: &DiagramState,
    dbar: u16,
) -> Result<(f64, DiagramState), StateError> {
    let (lo, hi) = dimension_window(dbar);
    let mut amps = BTreeMap::new();
    let mut prob = Kahan::new();
    for (g, a) in state.iter() {
        if (lo..=hi).contains(&g.d()) {
            prob.add(a * a);
            amps.insert(g.clone(), a);
        }
    }
    let prob = prob.value();
    if amps.is_empty() || prob == 0.0 {
        return Err(StateError::ZeroProbability);
    }
    let scale = 1.0 / util::sqrt(prob);
    let post = DiagramState::from_map(amps).scaled(scale);
    Ok((prob, post))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::griddiag::all_diagrams;
    use alloc::vec;

    fn qt2() -> QTable {
        QTable::build(2).unwrap()
    }

    fn tiny_unknot() -> GridDiagram {
        GridDiagram::new(vec![0, 1], vec![1, 0]).unwrap()
    }

    #[test]
    fn window_rounds_inward() {
        assert_eq!(dimension_window(2), (1, 3));
        assert_eq!(dimension_window(3), (2, 4));
        assert_eq!(dimension_window(5), (3, 7));
    }

    #[test]
    fn expand_spreads_uniformly() {
        let st = DiagramState::basis(tiny_unknot());
        let ex = expand(&st, &qt2()).unwrap();
        let blocks = ex.blocks_of(&tiny_unknot());
        assert_eq!(blocks.len(), 1);
        assert_eq!((blocks[0].start, blocks[0].end), (0, 294));
        assert!((blocks[0].amp - 1.0 / util::sqrt(294.0)).abs() < 1e-15);
        assert!((ex.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contract_inverts_expand() {
        let mut amps = BTreeMap::new();
        for (i, g) in all_diagrams(3).into_iter().enumerate() {
            amps.insert(g, (i + 1) as f64);
        }
        let st = DiagramState::from_map(amps).normalized();
        let (back, leak) = contract(&expand(&st, &qt2()).unwrap(), &qt2()).unwrap();
        assert!(back.max_diff(&st) < 1e-14);
        assert!(leak.abs() < 1e-14);
    }

    #[test]
    fn contract_reports_leak() {
        // uniform on half the labels of one diagram
        let g = tiny_unknot();
        let mut blocks = BTreeMap::new();
        blocks.insert(
            g.clone(),
            vec![Block {
                start: 0,
                end: 147,
                amp: 1.0 / util::sqrt(147.0),
            }],
        );
        let ex = ExpandedState::from_raw(blocks);
        let (back, leak) = contract(&ex, &qt2()).unwrap();
        // half the weight projects onto the uniform subspace
        assert!((back.norm_sq() - 0.5).abs() < 1e-12);
        assert!((leak - 0.5).abs() < 1e-12);
        // Pythagoras
        assert!((back.norm_sq() + leak - ex.norm_sq()).abs() < 1e-12);
    }

    #[test]
    fn expand_rejects_oversized_dimension() {
        let st = DiagramState::basis(all_diagrams(5).pop().unwrap());
        assert_eq!(expand(&st, &qt2()).unwrap_err(), StateError::DimensionOutOfRange);
    }

    #[test]
    fn measurement_conditions_on_serial() {
        let a = DiagramState::basis(tiny_unknot());
        let serial: SerialPolynomial = "1".parse().unwrap();
        let (p, post) = measure_alexander(&a, &serial).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        assert_eq!(post, a);

        let wrong: SerialPolynomial = "1,-1".parse().unwrap();
        assert_eq!(
            measure_alexander(&a, &wrong).unwrap_err(),
            StateError::ZeroProbability
        );
    }

    #[test]
    fn measurement_respects_born_rule() {
        // two-serial superposition with weights w, 1-w
        let unknot = tiny_unknot();
        let hopf = GridDiagram::new(vec![0, 1, 2, 3], vec![2, 3, 0, 1]).unwrap();
        let w: f64 = 0.3;
        let mut amps = BTreeMap::new();
        amps.insert(unknot, util::sqrt(w));
        amps.insert(hopf, util::sqrt(1.0 - w));
        let st = DiagramState::from_map(amps);
        let (p, _) = measure_alexander(&st, &"1".parse().unwrap()).unwrap();
        assert!((p - w).abs() < 1e-12);
    }

    #[test]
    fn dimension_projector_is_idempotent() {
        let qt = qt2();
        let st = crate::mint::build_initial_state(&qt).unwrap();
        let (p1, once) = project_dimension(&st, 2).unwrap();
        let (p2, twice) = project_dimension(&once, 2).unwrap();
        assert!(p1 < 1.0);
        assert!((p2 - 1.0).abs() < 1e-12);
        assert!(once.max_diff(&twice) < 1e-12);
    }

    #[test]
    fn dimension_projector_rejects_top_dimension() {
        let g = GridDiagram::new(vec![0, 1, 2, 3], vec![2, 3, 0, 1]).unwrap();
        let st = DiagramState::basis(g);
        assert_eq!(
            project_dimension(&st, 2).unwrap_err(),
            StateError::ZeroProbability
        );
    }

    #[test]
    fn expanded_inner_products() {
        let qt = qt2();
        let a = expand(&DiagramState::basis(tiny_unknot()), &qt).unwrap();
        assert!((a.inner(&a) - 1.0).abs() < 1e-12);
        let other = GridDiagram::new(vec![1, 0], vec![0, 1]).unwrap();
        let b = expand(&DiagramState::basis(other), &qt).unwrap();
        assert_eq!(a.inner(&b), 0.0);
    }
}
