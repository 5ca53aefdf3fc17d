//! Grid moves: the only diagram transformations in the system.
//!
//! Three families, each preserving the encoded oriented link:
//!
//! - cyclic permutation of all rows or all columns, always legal;
//! - transposition of two adjacent rows or columns, legal exactly when the
//!   two marker-span intervals are disjoint or nested;
//! - stabilization, which trades one marker for an L of three markers on a
//!   one-larger grid, and destabilization, its inverse.
//!
//! Stabilization and destabilization take an orientation `k` in `0..=3`.
//! The rule for `k = 0` works at a marker `(x, y)` and opens the L to the
//! upper right; for `k > 0` the diagram is rotated `k` quarter turns,
//! the `k = 0` rule is applied at `(x, y)` in rotated coordinates, and the
//! result is rotated back.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::griddiag::{GridDiagram, Marker};

/// Why a move could not be applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveError {
    /// The adjacent marker spans interleave.
    IllegalTransposition,
    /// Stabilization needs a marker at the given cell.
    NoMarkerAtPosition,
    /// No collapsible L at the given cell (absent, mistyped, or a full box).
    IllegalDestabilization,
    /// Class enumeration exceeded its configured cap.
    ClassTooLarge,
}

impl fmt::Display for MoveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoveError::IllegalTransposition => write!(f, "transposition is not legal here"),
            MoveError::NoMarkerAtPosition => write!(f, "no marker at the given position"),
            MoveError::IllegalDestabilization => write!(f, "no destabilizable L at the given position"),
            MoveError::ClassTooLarge => write!(f, "move class exceeds the enumeration cap"),
        }
    }
}

impl core::error::Error for MoveError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Columns,
    Rows,
}

/// Shift direction for cyclic moves: `Plus` moves columns right / rows up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    Plus,
    Minus,
}

/// Any single grid move, in a form that can be stored and replayed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GridMove {
    Cyclic { axis: Axis, dir: Dir },
    Transpose { axis: Axis, index: u16 },
    Stabilize { x: u16, y: u16, k: u8 },
    Destabilize { x: u16, y: u16, k: u8 },
}

impl Axis {
    fn ord(self) -> u8 {
        match self {
            Axis::Columns => 0,
            Axis::Rows => 1,
        }
    }
}

impl Dir {
    fn ord(self) -> u8 {
        match self {
            Dir::Plus => 0,
            Dir::Minus => 1,
        }
    }
}

// Manual Ord keys so derived enum ordering stays stable if variants move.
impl PartialOrd for Axis {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Axis {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.ord().cmp(&other.ord())
    }
}
impl PartialOrd for Dir {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Dir {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.ord().cmp(&other.ord())
    }
}

/// Cyclic permutation of all rows or all columns. Always legal.
pub fn cyclic(g: &GridDiagram, axis: Axis, dir: Dir) -> GridDiagram {
    let d = g.d();
    let (mut pi_x, mut pi_o) = (g.pi_x().to_vec(), g.pi_o().to_vec());
    match axis {
        Axis::Columns => match dir {
            Dir::Plus => {
                pi_x.rotate_right(1);
                pi_o.rotate_right(1);
            }
            Dir::Minus => {
                pi_x.rotate_left(1);
                pi_o.rotate_left(1);
            }
        },
        Axis::Rows => {
            let shift = |r: u16| match dir {
                Dir::Plus => (r + 1) % d as u16,
                Dir::Minus => (r + d as u16 - 1) % d as u16,
            };
            for r in pi_x.iter_mut().chain(pi_o.iter_mut()) {
                *r = shift(*r);
            }
        }
    }
    GridDiagram::validate(d, pi_x, pi_o).expect("cyclic shift preserves validity")
}

fn span(g: &GridDiagram, axis: Axis, index: usize) -> (usize, usize) {
    match axis {
        Axis::Columns => {
            let (a, b) = (g.x_row(index), g.o_row(index));
            if a < b {
                (a, b)
            } else {
                (b, a)
            }
        }
        Axis::Rows => {
            let xc = (0..g.d()).find(|&c| g.x_row(c) == index).unwrap();
            let oc = (0..g.d()).find(|&c| g.o_row(c) == index).unwrap();
            if xc < oc {
                (xc, oc)
            } else {
                (oc, xc)
            }
        }
    }
}

/// Whether swapping lines `index` and `index + 1` preserves the link.
///
/// Depends only on the four markers involved: the two marker-span intervals
/// must be disjoint or one must contain the other.
pub fn transpose_legal(g: &GridDiagram, axis: Axis, index: usize) -> bool {
    if index + 1 >= g.d() {
        return false;
    }
    let (a1, a2) = span(g, axis, index);
    let (b1, b2) = span(g, axis, index + 1);
    let disjoint = a2 < b1 || b2 < a1;
    let nested = (a1 <= b1 && b2 <= a2) || (b1 <= a1 && a2 <= b2);
    disjoint || nested
}

/// Swap the marker contents of adjacent lines `index` and `index + 1`.
pub fn transpose(g: &GridDiagram, axis: Axis, index: usize) -> Result<GridDiagram, MoveError> {
    if !transpose_legal(g, axis, index) {
        return Err(MoveError::IllegalTransposition);
    }
    let d = g.d();
    let (mut pi_x, mut pi_o) = (g.pi_x().to_vec(), g.pi_o().to_vec());
    match axis {
        Axis::Columns => {
            pi_x.swap(index, index + 1);
            pi_o.swap(index, index + 1);
        }
        Axis::Rows => {
            let (a, b) = (index as u16, index as u16 + 1);
            for r in pi_x.iter_mut().chain(pi_o.iter_mut()) {
                if *r == a {
                    *r = b;
                } else if *r == b {
                    *r = a;
                }
            }
        }
    }
    Ok(GridDiagram::validate(d, pi_x, pi_o).expect("transposition preserves validity"))
}

/// One quarter turn: position `(x, y)` maps to `(y, d - 1 - x)`, marker
/// types untouched.
fn rotate_quarter(g: &GridDiagram) -> GridDiagram {
    let d = g.d();
    let mut pi_x = vec![0u16; d];
    let mut pi_o = vec![0u16; d];
    for c in 0..d {
        pi_x[g.x_row(c)] = (d - 1 - c) as u16;
        pi_o[g.o_row(c)] = (d - 1 - c) as u16;
    }
    GridDiagram::validate(d, pi_x, pi_o).expect("rotation preserves validity")
}

fn rotate_k(g: &GridDiagram, k: u8) -> GridDiagram {
    let mut out = g.clone();
    for _ in 0..k % 4 {
        out = rotate_quarter(&out);
    }
    out
}

fn rotate_back(g: &GridDiagram, k: u8) -> GridDiagram {
    rotate_k(g, (4 - k % 4) % 4)
}

fn stabilize_flat(g: &GridDiagram, x: usize, y: usize, t: Marker) -> GridDiagram {
    let d = g.d();
    let mut pi_x = vec![0u16; d + 1];
    let mut pi_o = vec![0u16; d + 1];
    for c in 0..d {
        for (marker, row) in [(Marker::X, g.x_row(c)), (Marker::O, g.o_row(c))] {
            if c == x && row == y {
                continue; // the marker being expanded
            }
            let nc = if c > x { c + 1 } else { c };
            let nr = if row > y { row + 1 } else { row } as u16;
            match marker {
                Marker::X => pi_x[nc] = nr,
                Marker::O => pi_o[nc] = nr,
            }
        }
    }
    // same type at the L's ends, opposite type at the inner corner
    match t {
        Marker::X => {
            pi_x[x + 1] = y as u16;
            pi_x[x] = (y + 1) as u16;
            pi_o[x + 1] = (y + 1) as u16;
        }
        Marker::O => {
            pi_o[x + 1] = y as u16;
            pi_o[x] = (y + 1) as u16;
            pi_x[x + 1] = (y + 1) as u16;
        }
    }
    GridDiagram::validate(d + 1, pi_x, pi_o).expect("stabilization preserves validity")
}

/// Expand the marker at `(x, y)` (rotated-frame coordinates for `k > 0`)
/// into an L of three markers, growing the grid by one.
pub fn stabilize(g: &GridDiagram, x: usize, y: usize, k: u8) -> Result<GridDiagram, MoveError> {
    let rotated = rotate_k(g, k);
    let t = rotated.marker_at(x, y).ok_or(MoveError::NoMarkerAtPosition)?;
    Ok(rotate_back(&stabilize_flat(&rotated, x, y, t), k))
}

fn destabilize_flat(g: &GridDiagram, x: usize, y: usize) -> Result<GridDiagram, MoveError> {
    let d = g.d();
    if x + 1 >= d || y + 1 >= d || g.marker_at(x, y).is_some() {
        return Err(MoveError::IllegalDestabilization);
    }
    let (end_a, end_b, corner) = (
        g.marker_at(x + 1, y),
        g.marker_at(x, y + 1),
        g.marker_at(x + 1, y + 1),
    );
    let t = match (end_a, end_b, corner) {
        (Some(a), Some(b), Some(c)) if a == b && c == a.opposite() => a,
        _ => return Err(MoveError::IllegalDestabilization),
    };
    let mut pi_x = vec![0u16; d - 1];
    let mut pi_o = vec![0u16; d - 1];
    for c in 0..d {
        if c == x + 1 {
            continue;
        }
        for (marker, row) in [(Marker::X, g.x_row(c)), (Marker::O, g.o_row(c))] {
            if row == y + 1 {
                continue;
            }
            let nc = if c > x + 1 { c - 1 } else { c };
            let nr = if row > y + 1 { row - 1 } else { row } as u16;
            match marker {
                Marker::X => pi_x[nc] = nr,
                Marker::O => pi_o[nc] = nr,
            }
        }
    }
    match t {
        Marker::X => pi_x[x] = y as u16,
        Marker::O => pi_o[x] = y as u16,
    }
    Ok(GridDiagram::validate(d - 1, pi_x, pi_o).expect("destabilization preserves validity"))
}

/// Collapse the L above and right of the empty cell `(x, y)` (rotated-frame
/// coordinates for `k > 0`) back into a single marker, shrinking the grid.
///
/// The two L ends must share a marker type and the inner corner must carry
/// the opposite type, exactly the pattern stabilization produces. A full
/// 2x2 box never matches because `(x, y)` must be empty.
pub fn destabilize(g: &GridDiagram, x: usize, y: usize, k: u8) -> Result<GridDiagram, MoveError> {
    let rotated = rotate_k(g, k);
    Ok(rotate_back(&destabilize_flat(&rotated, x, y)?, k))
}

/// Apply any stored move.
pub fn apply(g: &GridDiagram, mv: &GridMove) -> Result<GridDiagram, MoveError> {
    match *mv {
        GridMove::Cyclic { axis, dir } => Ok(cyclic(g, axis, dir)),
        GridMove::Transpose { axis, index } => transpose(g, axis, index as usize),
        GridMove::Stabilize { x, y, k } => stabilize(g, x as usize, y as usize, k),
        GridMove::Destabilize { x, y, k } => destabilize(g, x as usize, y as usize, k),
    }
}

/// Every move legal at `g` whose result stays within dimension `dmax`.
pub fn legal_moves(g: &GridDiagram, dmax: usize) -> Vec<GridMove> {
    let d = g.d();
    let mut out = Vec::new();
    for axis in [Axis::Columns, Axis::Rows] {
        for dir in [Dir::Plus, Dir::Minus] {
            out.push(GridMove::Cyclic { axis, dir });
        }
    }
    for axis in [Axis::Columns, Axis::Rows] {
        for index in 0..d - 1 {
            if transpose_legal(g, axis, index) {
                out.push(GridMove::Transpose {
                    axis,
                    index: index as u16,
                });
            }
        }
    }
    for k in 0..4u8 {
        let rotated = rotate_k(g, k);
        if d + 1 <= dmax {
            for x in 0..d {
                for y in 0..d {
                    if rotated.marker_at(x, y).is_some() {
                        out.push(GridMove::Stabilize {
                            x: x as u16,
                            y: y as u16,
                            k,
                        });
                    }
                }
            }
        }
        if d >= 3 {
            for x in 0..d - 1 {
                for y in 0..d - 1 {
                    if destabilize_flat(&rotated, x, y).is_ok() {
                        out.push(GridMove::Destabilize {
                            x: x as u16,
                            y: y as u16,
                            k,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Closure of `g` under all legal moves with results of dimension at most
/// `dmax`, by breadth-first search. Fails with [`MoveError::ClassTooLarge`]
/// once the set would exceed `cap`.
pub fn enumerate_class(
    g: &GridDiagram,
    dmax: usize,
    cap: usize,
) -> Result<BTreeSet<GridDiagram>, MoveError> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(g.clone());
    queue.push_back(g.clone());
    while let Some(cur) = queue.pop_front() {
        for mv in legal_moves(&cur, dmax) {
            let next = apply(&cur, &mv).expect("legal_moves only yields applicable moves");
            if next.d() <= dmax && !seen.contains(&next) {
                if seen.len() + 1 > cap {
                    return Err(MoveError::ClassTooLarge);
                }
                seen.insert(next.clone());
                queue.push_back(next);
            }
        }
    }
    Ok(seen)
}
