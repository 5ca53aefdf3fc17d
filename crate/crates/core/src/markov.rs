//! The verification Markov chain on labeled configurations `(G, i)`.
//!
//! A configuration is a diagram `G` with `2 <= d(G) <= 2 dbar` and a label
//! `0 <= i < q(d(G))`. One move is selected by a tuple
//! `s = (j, w, x, y, k)`:
//!
//! - `j = 1` shifts the label, `i <- (i + w) mod q(d(G))`;
//! - `j = 2..=5` cyclically permute columns right/left and rows up/down;
//! - `j = 6` (`7`) transposes columns `x, x+1` (rows `y, y+1`) when legal;
//! - `j = 8` stabilizes at a marker on `(x, y)` or destabilizes the L next
//!   to an empty `(x, y)`, in rotation frame `k`, accepting the new
//!   diagram only when `i < q(d(G'))`.
//!
//! Illegal proposals leave the configuration unchanged, so every `s` acts
//! as a permutation of the configuration space. Averaging all move
//! permutations gives the doubly stochastic operator `B` applied by
//! [`apply_b`]; a money state expanded over labels is a fixed point of
//! every single move, hence of `B`.
//!
//! `apply_b` averages group by group instead of enumerating the full tuple
//! space: the uniform measure on moves factorizes, so each `j` only needs
//! the parameters it actually reads. Label shifts average to an exact
//! circulant whose weights are residue-class counts of `w`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::griddiag::{all_diagrams, GridDiagram};
use crate::mint::{derangements, factorial, QTable};
use crate::moves::{self, Axis, Dir};
use crate::statespace::{Block, ExpandedState};
use crate::util::{self, Kahan};

/// Cap on exhaustive configuration-space enumeration.
const CONFIG_SPACE_CAP: u128 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkovError {
    /// The configuration space is too large to enumerate exhaustively.
    SpaceTooLarge,
}

impl fmt::Display for MarkovError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarkovError::SpaceTooLarge => {
                write!(f, "configuration space exceeds the enumeration cap")
            }
        }
    }
}

impl core::error::Error for MarkovError {}

/// One element of the move set: `(j, w, x, y, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoveId {
    /// Move family, `1..=8`.
    pub j: u8,
    /// Label shift, `0..=q_max^2`.
    pub w: u128,
    /// Column parameter, `0..2 dbar`.
    pub x: u16,
    /// Row parameter, `0..2 dbar`.
    pub y: u16,
    /// Rotation frame, `0..=3`.
    pub k: u8,
}

/// A labeled configuration `(G, i)` with `i < q(d(G))`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Config {
    pub g: GridDiagram,
    pub i: u64,
}

/// Draw one move tuple uniformly. The parameters are drawn in the fixed
/// order `j, w, x, y, k` so runs are reproducible per seed.
pub fn sample_move(qt: &QTable, rng: &mut impl Rng) -> MoveId {
    let span = 2 * qt.dbar() as u16;
    MoveId {
        j: rng.gen_range(1..=8),
        w: rng.gen_range(0..qt.w_count()),
        x: rng.gen_range(0..span),
        y: rng.gen_range(0..span),
        k: rng.gen_range(0..4),
    }
}

/// The stabilize-or-destabilize proposal of a `j = 8` move, if any.
fn propose_exchange(g: &GridDiagram, x: usize, y: usize, k: u8) -> Option<GridDiagram> {
    moves::stabilize(g, x, y, k)
        .ok()
        .or_else(|| moves::destabilize(g, x, y, k).ok())
}

/// Apply one move tuple to a configuration. Illegal proposals are the
/// identity.
pub fn apply_move(c: &Config, s: &MoveId, qt: &QTable) -> Config {
    let q = qt.q(c.g.d());
    debug_assert!(c.i < q, "label within the current dimension's range");
    match s.j {
        1 => Config {
            g: c.g.clone(),
            i: ((c.i as u128 + s.w) % q as u128) as u64,
        },
        2 => Config {
            g: moves::cyclic(&c.g, Axis::Columns, Dir::Plus),
            i: c.i,
        },
        3 => Config {
            g: moves::cyclic(&c.g, Axis::Columns, Dir::Minus),
            i: c.i,
        },
        4 => Config {
            g: moves::cyclic(&c.g, Axis::Rows, Dir::Plus),
            i: c.i,
        },
        5 => Config {
            g: moves::cyclic(&c.g, Axis::Rows, Dir::Minus),
            i: c.i,
        },
        6 => {
            let x = s.x as usize;
            match moves::transpose(&c.g, Axis::Columns, x) {
                Ok(g) => Config { g, i: c.i },
                Err(_) => c.clone(),
            }
        }
        7 => {
            let y = s.y as usize;
            match moves::transpose(&c.g, Axis::Rows, y) {
                Ok(g) => Config { g, i: c.i },
                Err(_) => c.clone(),
            }
        }
        8 => {
            match propose_exchange(&c.g, s.x as usize, s.y as usize, s.k) {
                Some(g2) if c.i < qt.q(g2.d()) => Config { g: g2, i: c.i },
                _ => c.clone(),
            }
        }
        _ => unreachable!("move family is 1..=8"),
    }
}

/// One uniformly random chain update.
pub fn chain_step(c: &Config, qt: &QTable, rng: &mut impl Rng) -> Config {
    apply_move(c, &sample_move(qt, rng), qt)
}

/// Aggregate statistics of a chain run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainStats {
    pub steps: u64,
    pub proposed: [u64; 8],
    /// Moves that actually changed the configuration.
    pub accepted: [u64; 8],
    /// Post-move dimension occupancy per step.
    pub dim_hist: BTreeMap<u16, u64>,
    pub distinct_diagrams: usize,
}

const MOVE_NAMES: [&str; 8] = [
    "label-shift",
    "columns-right",
    "columns-left",
    "rows-up",
    "rows-down",
    "transpose-columns",
    "transpose-rows",
    "stabilize-destabilize",
];

impl fmt::Display for ChainStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "steps: {}", self.steps)?;
        for j in 0..8 {
            writeln!(
                f,
                "j={} {}: proposed {} accepted {}",
                j + 1,
                MOVE_NAMES[j],
                self.proposed[j],
                self.accepted[j]
            )?;
        }
        writeln!(f, "dimension histogram:")?;
        for (d, n) in &self.dim_hist {
            writeln!(f, "  d={}: {}", d, n)?;
        }
        write!(f, "distinct diagrams: {}", self.distinct_diagrams)
    }
}

/// Run the chain for `steps` updates, collecting statistics.
pub fn run_chain(
    start: Config,
    steps: u64,
    qt: &QTable,
    rng: &mut impl Rng,
) -> (Config, ChainStats) {
    let mut cur = start;
    let mut stats = ChainStats {
        steps,
        proposed: [0; 8],
        accepted: [0; 8],
        dim_hist: BTreeMap::new(),
        distinct_diagrams: 0,
    };
    let mut seen = BTreeSet::new();
    seen.insert(cur.g.clone());
    for _ in 0..steps {
        let s = sample_move(qt, rng);
        let next = apply_move(&cur, &s, qt);
        stats.proposed[s.j as usize - 1] += 1;
        if next != cur {
            stats.accepted[s.j as usize - 1] += 1;
        }
        *stats.dim_hist.entry(next.g.d() as u16).or_insert(0) += 1;
        seen.insert(next.g.clone());
        cur = next;
    }
    stats.distinct_diagrams = seen.len();
    (cur, stats)
}

/// All configurations `(G, i)` for `2 <= d <= 2 dbar`, `i < q(d)`.
pub fn enumerate_configs(qt: &QTable) -> Result<Vec<Config>, MarkovError> {
    let mut total: u128 = 0;
    for d in 2..=2 * qt.dbar() as usize {
        let diagrams = (factorial(d) * derangements(d))
            .try_into()
            .unwrap_or(u128::MAX);
        total = total.saturating_add(diagrams * qt.q(d) as u128);
    }
    if total > CONFIG_SPACE_CAP {
        return Err(MarkovError::SpaceTooLarge);
    }
    let mut out = Vec::with_capacity(total as usize);
    for d in 2..=2 * qt.dbar() as usize {
        let q = qt.q(d);
        for g in all_diagrams(d) {
            for i in 0..q {
                out.push(Config { g: g.clone(), i });
            }
        }
    }
    Ok(out)
}

/// Exhaustively check that a fixed move tuple permutes the configuration
/// space.
pub fn is_permutation_check(s: &MoveId, qt: &QTable) -> Result<bool, MarkovError> {
    let configs = enumerate_configs(qt)?;
    let mut seen = BTreeSet::new();
    for c in &configs {
        let out = apply_move(c, s, qt);
        if out.i >= qt.q(out.g.d()) || !seen.insert(out) {
            return Ok(false);
        }
    }
    Ok(seen.len() == configs.len())
}

// Accumulates scaled block contributions per diagram, then merges them
// into disjoint runs.
struct Accumulator {
    parts: BTreeMap<GridDiagram, Vec<Block>>,
}

impl Accumulator {
    fn new() -> Self {
        Self {
            parts: BTreeMap::new(),
        }
    }

    fn add(&mut self, g: &GridDiagram, blocks: &[Block], scale: f64) {
        if scale == 0.0 || blocks.is_empty() {
            return;
        }
        let list = self.parts.entry(g.clone()).or_default();
        list.extend(blocks.iter().map(|b| Block {
            amp: b.amp * scale,
            ..*b
        }));
    }

    fn add_owned(&mut self, g: GridDiagram, blocks: Vec<Block>, scale: f64) {
        if scale == 0.0 || blocks.is_empty() {
            return;
        }
        let list = self.parts.entry(g).or_default();
        list.extend(blocks.into_iter().map(|b| Block {
            amp: b.amp * scale,
            ..b
        }));
    }

    fn finish(self) -> ExpandedState {
        let mut merged = BTreeMap::new();
        for (g, parts) in self.parts {
            merged.insert(g, sweep_merge(parts));
        }
        ExpandedState::from_raw(merged)
    }
}

// Sum overlapping constant runs into disjoint runs by an event sweep.
// Events at equal positions are applied in bit order so results are
// reproducible.
fn sweep_merge(parts: Vec<Block>) -> Vec<Block> {
    let mut events: Vec<(u64, f64)> = Vec::with_capacity(2 * parts.len());
    for b in parts {
        events.push((b.start, b.amp));
        events.push((b.end, -b.amp));
    }
    events.sort_by_key(|&(pos, amp)| (pos, amp.to_bits()));
    let mut out: Vec<Block> = Vec::new();
    let mut level = Kahan::new();
    let mut idx = 0;
    while idx < events.len() {
        let pos = events[idx].0;
        while idx < events.len() && events[idx].0 == pos {
            level.add(events[idx].1);
            idx += 1;
        }
        let value = level.value();
        let next = events.get(idx).map(|e| e.0);
        if let Some(next) = next {
            if next > pos && value != 0.0 {
                match out.last_mut() {
                    Some(last) if last.end == pos && last.amp == value => last.end = next,
                    _ => out.push(Block {
                        start: pos,
                        end: next,
                        amp: value,
                    }),
                }
            }
        }
    }
    out
}

// Split sorted disjoint blocks into the parts below and at-or-above a
// label threshold.
fn split_blocks(blocks: &[Block], threshold: u64) -> (Vec<Block>, Vec<Block>) {
    let mut low = Vec::new();
    let mut high = Vec::new();
    for b in blocks {
        if b.end <= threshold {
            low.push(*b);
        } else if b.start >= threshold {
            high.push(*b);
        } else {
            low.push(Block {
                start: b.start,
                end: threshold,
                amp: b.amp,
            });
            high.push(Block {
                start: threshold,
                end: b.end,
                amp: b.amp,
            });
        }
    }
    (low, high)
}

// Average of all label shifts on one diagram's label profile: an exact
// circulant whose weight on shift t is the count of w with w = t mod q.
// With |W| = m q + r the weights are (m + 1)/|W| for t < r and m/|W|
// otherwise, so the output is a constant plus a sliding window sum.
fn label_shift_average(blocks: &[Block], q: u64, w_count: u128) -> Vec<Block> {
    debug_assert!(q > 0);
    if let [single] = blocks {
        if single.start == 0 && single.end == q {
            return alloc::vec![*single]; // uniform profiles are fixed
        }
    }
    let qu = q as usize;
    let m = (w_count / q as u128) as f64;
    let r = (w_count % q as u128) as usize;
    let w_total = w_count as f64;

    let mut psi = alloc::vec![0.0f64; qu];
    for b in blocks {
        for i in b.start..b.end {
            psi[i as usize] = b.amp;
        }
    }
    let mut prefix = alloc::vec![0.0f64; qu + 1];
    let mut acc = Kahan::new();
    for (i, &v) in psi.iter().enumerate() {
        acc.add(v);
        prefix[i + 1] = acc.value();
    }
    let total = prefix[qu];

    let window = |i: usize| -> f64 {
        if r == 0 {
            return 0.0;
        }
        // labels (i - r, i] modulo q
        if i + 1 >= r {
            prefix[i + 1] - prefix[i + 1 - r]
        } else {
            prefix[i + 1] + total - prefix[i + 1 - r + qu]
        }
    };

    let mut out: Vec<Block> = Vec::new();
    for i in 0..qu {
        let value = (m * total + window(i)) / w_total;
        match out.last_mut() {
            Some(last) if last.end == i as u64 && last.amp == value => last.end += 1,
            _ => {
                if value != 0.0 {
                    out.push(Block {
                        start: i as u64,
                        end: i as u64 + 1,
                        amp: value,
                    });
                }
            }
        }
    }
    out
}

/// Apply the averaged move operator `B` exactly. The result is not
/// renormalized; its norm can only shrink.
pub fn apply_b(state: &ExpandedState, qt: &QTable) -> ExpandedState {
    let span = 2 * qt.dbar() as usize;
    let family_weight = 1.0 / 8.0;
    let mut acc = Accumulator::new();

    for (g, blocks) in state.iter() {
        let d = g.d();
        let q = qt.q(d);

        // j = 1: label shifts
        let shifted = label_shift_average(blocks, q, qt.w_count());
        acc.add_owned(g.clone(), shifted, family_weight);

        // j = 2..=5: cyclic moves, always legal
        for (axis, dir) in [
            (Axis::Columns, Dir::Plus),
            (Axis::Columns, Dir::Minus),
            (Axis::Rows, Dir::Plus),
            (Axis::Rows, Dir::Minus),
        ] {
            acc.add(&moves::cyclic(g, axis, dir), blocks, family_weight);
        }

        // j = 6, 7: transpositions averaged over the parameter range
        for axis in [Axis::Columns, Axis::Rows] {
            let per = family_weight / span as f64;
            let mut idle = 0usize;
            for t in 0..span {
                match moves::transpose(g, axis, t) {
                    Ok(moved) => acc.add(&moved, blocks, per),
                    Err(_) => idle += 1,
                }
            }
            if idle > 0 {
                acc.add(g, blocks, per * idle as f64);
            }
        }

        // j = 8: stabilize/destabilize averaged over (x, y, k), gated on
        // the label fitting the new dimension
        let per = family_weight / (span * span * 4) as f64;
        let mut idle = 0usize;
        for k in 0..4u8 {
            for x in 0..span {
                for y in 0..span {
                    match propose_exchange(g, x, y, k) {
                        Some(g2) => {
                            let q2 = qt.q(g2.d());
                            let (low, high) = split_blocks(blocks, q2);
                            acc.add_owned(g2, low, per);
                            acc.add_owned(g.clone(), high, per);
                        }
                        None => idle += 1,
                    }
                }
            }
        }
        if idle > 0 {
            acc.add(g, blocks, per * idle as f64);
        }
    }
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::griddiag::GridDiagram;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn qt2() -> QTable {
        QTable::build(2).unwrap()
    }

    fn tiny_unknot() -> GridDiagram {
        GridDiagram::new(vec![0, 1], vec![1, 0]).unwrap()
    }

    #[test]
    fn label_shift_wraps() {
        let qt = qt2();
        let c = Config {
            g: all_diagrams(3)[0].clone(),
            i: 5,
        };
        let s = MoveId {
            j: 1,
            w: 10,
            x: 0,
            y: 0,
            k: 0,
        };
        assert_eq!(apply_move(&c, &s, &qt).i, 15);
        let s = MoveId {
            j: 1,
            w: 38,
            x: 0,
            y: 0,
            k: 0,
        };
        assert_eq!(apply_move(&c, &s, &qt).i, 4); // (5 + 38) mod 39
    }

    #[test]
    fn growth_past_top_dimension_is_rejected() {
        let qt = qt2();
        let g = all_diagrams(4)[7].clone();
        let c = Config { g: g.clone(), i: 0 };
        for k in 0..4u8 {
            for x in 0..4 {
                for y in 0..4 {
                    let s = MoveId { j: 8, w: 0, x, y, k };
                    let out = apply_move(&c, &s, &qt);
                    assert!(out.g.d() <= 4);
                }
            }
        }
    }

    #[test]
    fn config_space_size_at_dbar_two() {
        let configs = enumerate_configs(&qt2()).unwrap();
        assert_eq!(configs.len(), 2 * 294 + 12 * 39 + 216 * 1);
    }

    #[test]
    fn exchange_moves_are_involutions_on_samples() {
        let qt = qt2();
        let configs = enumerate_configs(&qt).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..40 {
            let s = MoveId {
                j: 8,
                w: 0,
                x: rng.gen_range(0..4),
                y: rng.gen_range(0..4),
                k: rng.gen_range(0..4),
            };
            for c in configs.iter().step_by(17) {
                let once = apply_move(c, &s, &qt);
                let twice = apply_move(&once, &s, &qt);
                assert_eq!(&twice, c, "s={s:?}");
            }
        }
    }

    #[test]
    fn sampled_moves_are_bijections() {
        let qt = qt2();
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for _ in 0..25 {
            let s = sample_move(&qt, &mut rng);
            assert!(is_permutation_check(&s, &qt).unwrap(), "s={s:?}");
        }
    }

    #[test]
    fn opposite_cyclic_moves_cancel() {
        let qt = qt2();
        let c = Config {
            g: tiny_unknot(),
            i: 3,
        };
        let right = MoveId { j: 2, w: 0, x: 0, y: 0, k: 0 };
        let left = MoveId { j: 3, w: 0, x: 0, y: 0, k: 0 };
        assert_eq!(apply_move(&apply_move(&c, &right, &qt), &left, &qt), c);
    }

    #[test]
    fn chain_stays_within_bounds_and_class(
    ) {
        let qt = qt2();
        let start = Config {
            g: tiny_unknot(),
            i: 0,
        };
        let serial = crate::alexander::alexander(&start.g);
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let (end, stats) = run_chain(start, 3000, &qt, &mut rng);
        assert!(end.g.d() <= 4);
        assert!(end.i < qt.q(end.g.d()));
        assert_eq!(crate::alexander::alexander(&end.g), serial);
        assert_eq!(stats.proposed.iter().sum::<u64>(), 3000);
        assert!(stats.distinct_diagrams > 1);
    }

    #[test]
    fn uniform_class_state_is_fixed_by_b() {
        let qt = qt2();
        let class = crate::moves::enumerate_class(&tiny_unknot(), 4, 100_000).unwrap();
        let state = ExpandedState::uniform_over_class(class.iter(), &qt).unwrap();
        let out = apply_b(&state, &qt);
        assert!((out.norm() - 1.0).abs() < 1e-12);
        assert!(out.max_diff(&state) < 1e-12);
    }

    #[test]
    fn single_config_state_shrinks_under_b() {
        let qt = qt2();
        let mut blocks = BTreeMap::new();
        blocks.insert(
            tiny_unknot(),
            vec![Block {
                start: 0,
                end: 1,
                amp: 1.0,
            }],
        );
        let state = ExpandedState::from_raw(blocks);
        let out = apply_b(&state, &qt);
        assert!(out.norm() < 1.0);
    }

    #[test]
    fn label_average_handles_split_profiles() {
        // non-uniform profile: conservation of total amplitude mass
        let qt = qt2();
        let blocks = vec![
            Block { start: 0, end: 10, amp: 0.3 },
            Block { start: 20, end: 39, amp: -0.1 },
        ];
        let out = label_shift_average(&blocks, 39, qt.w_count());
        let mass_in: f64 = blocks.iter().map(|b| b.len() as f64 * b.amp).sum();
        let mass_out: f64 = out.iter().map(|b| b.len() as f64 * b.amp).sum();
        assert!((mass_in - mass_out).abs() < 1e-12);
        // doubly stochastic row sums: constant input stays constant
        let flat = vec![Block { start: 0, end: 39, amp: 0.5 }];
        let out = label_shift_average(&flat, 39, qt.w_count());
        assert_eq!(out, flat);
    }
}
