//! Planar grid diagrams and their geometry.
//!
//! A grid diagram of dimension `d` is a `d x d` board with one X and one O
//! marker in every row and every column, no cell holding both. Each column
//! carries a vertical segment from its X to its O, each row a horizontal
//! segment from its O to its X, and wherever segments meet the vertical one
//! crosses on top. The segments trace out an oriented link.
//!
//! A diagram is stored as the pair of permutations `pi_x`, `pi_o` sending a
//! column index to the row of its X (respectively O) marker. Indexing is
//! 0-based everywhere, with column 0 on the left and row 0 at the bottom.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

const ENCODING_VERSION: u8 = 1;

/// Why a candidate record failed to produce a grid diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagramError {
    /// A marker map is not a bijection on `{0..d-1}`.
    NotAPermutation,
    /// Some column holds its X and O in the same cell.
    NotDisjoint,
    /// Dimension below 2; disjointness is unsatisfiable on a 1x1 board.
    DimensionTooSmall,
    /// Byte string does not parse as a diagram record.
    MalformedEncoding,
}

impl fmt::Display for DiagramError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagramError::NotAPermutation => write!(f, "marker map is not a permutation"),
            DiagramError::NotDisjoint => write!(f, "an X and an O share a cell"),
            DiagramError::DimensionTooSmall => write!(f, "grid dimension must be at least 2"),
            DiagramError::MalformedEncoding => write!(f, "malformed diagram encoding"),
        }
    }
}

impl core::error::Error for DiagramError {}

/// Marker type at a grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marker {
    X,
    O,
}

impl Marker {
    pub fn opposite(self) -> Marker {
        match self {
            Marker::X => Marker::O,
            Marker::O => Marker::X,
        }
    }
}

/// Direction of a horizontal strand (always O to X).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HDir {
    East,
    West,
}

/// Direction of a vertical strand (always X to O).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VDir {
    North,
    South,
}

/// One interior intersection of a vertical and a horizontal segment.
///
/// The vertical strand is always the over strand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crossing {
    /// Column of the vertical (over) strand.
    pub col: u16,
    /// Row of the horizontal (under) strand.
    pub row: u16,
    /// Travel direction of the under strand.
    pub under: HDir,
    /// Travel direction of the over strand.
    pub over: VDir,
}

/// A valid planar grid diagram.
///
/// Instances can only be produced through [`GridDiagram::validate`] (or its
/// shortcuts), so every value satisfies the diagram invariants. Values are
/// immutable; the ordering is the lexicographic order on `(pi_x, pi_o)` and
/// makes diagrams usable as deterministic map keys.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GridDiagram {
    pi_x: Vec<u16>,
    pi_o: Vec<u16>,
}

impl fmt::Debug for GridDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G{}{:?}/{:?}", self.d(), self.pi_x, self.pi_o)
    }
}

fn is_permutation(v: &[u16]) -> bool {
    let d = v.len();
    let mut seen = vec![false; d];
    for &r in v {
        let r = r as usize;
        if r >= d || seen[r] {
            return false;
        }
        seen[r] = true;
    }
    true
}

impl GridDiagram {
    /// Checks an arbitrary candidate record and returns a diagram or the
    /// first violated invariant.
    pub fn validate(d: usize, pi_x: Vec<u16>, pi_o: Vec<u16>) -> Result<Self, DiagramError> {
        if pi_x.len() != d || pi_o.len() != d || !is_permutation(&pi_x) || !is_permutation(&pi_o) {
            return Err(DiagramError::NotAPermutation);
        }
        if d < 2 {
            return Err(DiagramError::DimensionTooSmall);
        }
        if pi_x.iter().zip(&pi_o).any(|(a, b)| a == b) {
            return Err(DiagramError::NotDisjoint);
        }
        Ok(Self { pi_x, pi_o })
    }

    /// Like [`GridDiagram::validate`] with the dimension taken from the input length.
    pub fn new(pi_x: Vec<u16>, pi_o: Vec<u16>) -> Result<Self, DiagramError> {
        let d = pi_x.len();
        Self::validate(d, pi_x, pi_o)
    }

    pub fn d(&self) -> usize {
        self.pi_x.len()
    }

    /// Row of the X marker in `col`.
    pub fn x_row(&self, col: usize) -> usize {
        self.pi_x[col] as usize
    }

    /// Row of the O marker in `col`.
    pub fn o_row(&self, col: usize) -> usize {
        self.pi_o[col] as usize
    }

    pub fn pi_x(&self) -> &[u16] {
        &self.pi_x
    }

    pub fn pi_o(&self) -> &[u16] {
        &self.pi_o
    }

    /// Marker at `(col, row)`, if any. Out-of-range coordinates hold nothing.
    pub fn marker_at(&self, col: usize, row: usize) -> Option<Marker> {
        if col >= self.d() {
            return None;
        }
        if self.x_row(col) == row {
            Some(Marker::X)
        } else if self.o_row(col) == row {
            Some(Marker::O)
        } else {
            None
        }
    }

    /// Column of the X (and O) marker per row.
    fn inverses(&self) -> (Vec<u16>, Vec<u16>) {
        let d = self.d();
        let mut inv_x = vec![0u16; d];
        let mut inv_o = vec![0u16; d];
        for c in 0..d {
            inv_x[self.pi_x[c] as usize] = c as u16;
            inv_o[self.pi_o[c] as usize] = c as u16;
        }
        (inv_x, inv_o)
    }

    /// All interior vertical/horizontal intersections, sorted by `(col, row)`.
    pub fn crossings(&self) -> Vec<Crossing> {
        let d = self.d();
        let (inv_x, inv_o) = self.inverses();
        let mut out = Vec::new();
        for col in 0..d {
            let (xr, or) = (self.x_row(col), self.o_row(col));
            let (lo, hi) = if xr < or { (xr, or) } else { (or, xr) };
            for row in lo + 1..hi {
                let (xc, oc) = (inv_x[row] as usize, inv_o[row] as usize);
                let (cl, ch) = if xc < oc { (xc, oc) } else { (oc, xc) };
                if cl < col && col < ch {
                    out.push(Crossing {
                        col: col as u16,
                        row: row as u16,
                        under: if oc < xc { HDir::East } else { HDir::West },
                        over: if xr < or { VDir::North } else { VDir::South },
                    });
                }
            }
        }
        out
    }

    /// Link components of the diagram.
    ///
    /// Strands are traced X to O along columns and O to X along rows; the
    /// closed cycles partition all `2d` markers, with the X and the O of a
    /// column always on the same component.
    pub fn components(&self) -> Components {
        let d = self.d();
        let (inv_x, _) = self.inverses();
        let mut label = vec![u32::MAX; d];
        let mut count = 0u32;
        for start in 0..d {
            if label[start] != u32::MAX {
                continue;
            }
            let mut c = start;
            while label[c] == u32::MAX {
                label[c] = count;
                c = inv_x[self.pi_o[c] as usize] as usize;
            }
            count += 1;
        }
        Components {
            count: count as usize,
            column_label: label,
        }
    }

    /// Whether the union of all segments is a single connected planar set.
    ///
    /// Link components count as connected whenever their strands cross.
    pub fn is_connected_projection(&self) -> bool {
        let d = self.d();
        let (inv_x, _) = self.inverses();
        // union-find over columns: first along strands, then across crossings
        let mut parent: Vec<usize> = (0..d).collect();
        fn find(parent: &mut [usize], mut a: usize) -> usize {
            while parent[a] != a {
                parent[a] = parent[parent[a]];
                a = parent[a];
            }
            a
        }
        let mut union = |parent: &mut [usize], a: usize, b: usize| {
            let (ra, rb) = (find(parent, a), find(parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        };
        for c in 0..d {
            let next = inv_x[self.pi_o[c] as usize] as usize;
            union(&mut parent, c, next);
        }
        for cr in self.crossings() {
            let horiz_col = inv_x[cr.row as usize] as usize;
            union(&mut parent, cr.col as usize, horiz_col);
        }
        let root = find(&mut parent, 0);
        (1..d).all(|c| find(&mut parent, c) == root)
    }

    /// Canonical byte encoding: version, `d` as little-endian u16, then
    /// `pi_x` and `pi_o` as length-`d` arrays of little-endian u16.
    pub fn encode(&self) -> Vec<u8> {
        let d = self.d() as u16;
        let mut out = Vec::with_capacity(3 + 4 * d as usize);
        out.push(ENCODING_VERSION);
        out.extend_from_slice(&d.to_le_bytes());
        for &r in self.pi_x.iter().chain(self.pi_o.iter()) {
            out.extend_from_slice(&r.to_le_bytes());
        }
        out
    }

    /// Inverse of [`GridDiagram::encode`]; malformed records are rejected
    /// and well-formed ones go through [`GridDiagram::validate`].
    pub fn decode(bytes: &[u8]) -> Result<Self, DiagramError> {
        if bytes.len() < 3 || bytes[0] != ENCODING_VERSION {
            return Err(DiagramError::MalformedEncoding);
        }
        let d = u16::from_le_bytes([bytes[1], bytes[2]]) as usize;
        if bytes.len() != 3 + 4 * d {
            return Err(DiagramError::MalformedEncoding);
        }
        let mut vals = bytes[3..]
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]));
        let pi_x: Vec<u16> = vals.by_ref().take(d).collect();
        let pi_o: Vec<u16> = vals.collect();
        Self::validate(d, pi_x, pi_o)
    }

    /// Display-only board rendering, top row first. Crossings print as `+`
    /// (the vertical strand is the over strand by convention).
    pub fn ascii(&self) -> String {
        let d = self.d();
        let (inv_x, inv_o) = self.inverses();
        let mut s = String::new();
        for row in (0..d).rev() {
            for col in 0..d {
                let glyph = match self.marker_at(col, row) {
                    Some(Marker::X) => 'X',
                    Some(Marker::O) => 'O',
                    None => {
                        let (xr, or) = (self.x_row(col), self.o_row(col));
                        let v = strictly_between(row, xr, or);
                        let (xc, oc) = (inv_x[row] as usize, inv_o[row] as usize);
                        let h = strictly_between(col, xc, oc);
                        match (v, h) {
                            (true, true) => '+',
                            (true, false) => '|',
                            (false, true) => '-',
                            (false, false) => '.',
                        }
                    }
                };
                s.push(glyph);
                if col + 1 < d {
                    s.push(' ');
                }
            }
            s.push('\n');
        }
        s
    }
}

fn strictly_between(v: usize, a: usize, b: usize) -> bool {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    lo < v && v < hi
}

/// Component labeling produced by [`GridDiagram::components`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub count: usize,
    column_label: Vec<u32>,
}

impl Components {
    /// Component of the column's two markers.
    pub fn column_label(&self, col: usize) -> u32 {
        self.column_label[col]
    }

    pub fn labels(&self) -> &[u32] {
        &self.column_label
    }
}

fn permutations(d: usize) -> Vec<Vec<u16>> {
    // iterative Heap's algorithm
    let mut out = Vec::new();
    let mut a: Vec<u16> = (0..d as u16).collect();
    out.push(a.clone());
    let mut c = vec![0usize; d];
    let mut i = 0;
    while i < d {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Every valid grid diagram of dimension `d`, in canonical order.
pub fn all_diagrams(d: usize) -> Vec<GridDiagram> {
    let perms = permutations(d);
    let mut set = BTreeSet::new();
    for px in &perms {
        for po in &perms {
            if px.iter().zip(po).all(|(a, b)| a != b) {
                set.insert(GridDiagram {
                    pi_x: px.clone(),
                    pi_o: po.clone(),
                });
            }
        }
    }
    set.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn fig3() -> GridDiagram {
        GridDiagram::new(vec![0, 1, 2, 3], vec![2, 3, 0, 1]).unwrap()
    }

    #[test]
    fn validates_simple_diagram() {
        let g = fig3();
        assert_eq!(g.d(), 4);
        assert_eq!(g.marker_at(0, 0), Some(Marker::X));
        assert_eq!(g.marker_at(0, 2), Some(Marker::O));
        assert_eq!(g.marker_at(0, 1), None);
    }

    #[test]
    fn rejects_identical_permutations() {
        let err = GridDiagram::new(vec![0, 1], vec![0, 1]).unwrap_err();
        assert_eq!(err, DiagramError::NotDisjoint);
    }

    #[test]
    fn rejects_non_permutation() {
        let err = GridDiagram::new(vec![0, 0, 2], vec![1, 2, 0]).unwrap_err();
        assert_eq!(err, DiagramError::NotAPermutation);
        let err = GridDiagram::validate(3, vec![0, 1], vec![1, 2, 0]).unwrap_err();
        assert_eq!(err, DiagramError::NotAPermutation);
    }

    #[test]
    fn rejects_tiny_dimension() {
        let err = GridDiagram::new(vec![0], vec![0]).unwrap_err();
        assert_eq!(err, DiagramError::DimensionTooSmall);
    }

    #[test]
    fn crossings_match_hand_count() {
        let crs = fig3().crossings();
        let coords: Vec<(u16, u16)> = crs.iter().map(|c| (c.col, c.row)).collect();
        assert_eq!(coords, vec![(1, 2), (2, 1)]);

        let tiny = GridDiagram::new(vec![0, 1], vec![1, 0]).unwrap();
        assert!(tiny.crossings().is_empty());
    }

    #[test]
    fn crossings_pass_interiority() {
        for g in all_diagrams(4) {
            let (inv_x, inv_o) = g.inverses();
            for cr in g.crossings() {
                assert!(strictly_between(cr.row as usize, g.x_row(cr.col as usize), g.o_row(cr.col as usize)));
                let xc = inv_x[cr.row as usize] as usize;
                let oc = inv_o[cr.row as usize] as usize;
                assert!(strictly_between(cr.col as usize, xc, oc));
            }
            assert!(g.crossings().len() <= (g.d() - 1) * (g.d() - 1));
        }
    }

    #[test]
    fn component_counts() {
        assert_eq!(fig3().components().count, 2);
        let tiny = GridDiagram::new(vec![0, 1], vec![1, 0]).unwrap();
        assert_eq!(tiny.components().count, 1);
    }

    #[test]
    fn component_labels_cover_all_markers() {
        for g in all_diagrams(4).into_iter().step_by(7) {
            let comps = g.components();
            let mut cycle_markers = 0usize;
            for label in 0..comps.count as u32 {
                let cols = (0..g.d()).filter(|&c| comps.column_label(c) == label).count();
                assert!(cols > 0);
                cycle_markers += 2 * cols;
            }
            assert_eq!(cycle_markers, 2 * g.d());
        }
    }

    #[test]
    fn connectivity() {
        assert!(fig3().is_connected_projection());
        // two 2x2 unknots in opposite corners
        let split = GridDiagram::new(vec![1, 0, 3, 2], vec![0, 1, 2, 3]).unwrap();
        assert!(!split.is_connected_projection());
        let tiny = GridDiagram::new(vec![0, 1], vec![1, 0]).unwrap();
        assert!(tiny.is_connected_projection());
    }

    #[test]
    fn encode_roundtrip() {
        let g = fig3();
        assert_eq!(GridDiagram::decode(&g.encode()).unwrap(), g);
    }

    #[test]
    fn decode_rejects_garbage() {
        let g = fig3();
        let mut bytes = g.encode();
        bytes.pop();
        assert_eq!(GridDiagram::decode(&bytes), Err(DiagramError::MalformedEncoding));
        assert_eq!(GridDiagram::decode(&[]), Err(DiagramError::MalformedEncoding));
        let mut versioned = g.encode();
        versioned[0] = 9;
        assert_eq!(GridDiagram::decode(&versioned), Err(DiagramError::MalformedEncoding));
        // well-formed frame, invalid content
        let mut bad = g.encode();
        bad[3] = bad[5]; // duplicate a pi_x entry
        assert_eq!(GridDiagram::decode(&bad), Err(DiagramError::NotAPermutation));
    }

    #[test]
    fn enumeration_counts_disjoint_pairs() {
        assert_eq!(all_diagrams(2).len(), 2);
        assert_eq!(all_diagrams(3).len(), 12);
        assert_eq!(all_diagrams(4).len(), 216);
    }

    #[test]
    fn ascii_smoke() {
        let art = fig3().ascii();
        assert_eq!(art.lines().count(), 4);
        assert_eq!(art.matches('X').count(), 4);
        assert_eq!(art.matches('O').count(), 4);
        assert_eq!(art.matches('+').count(), 2);
    }
}
