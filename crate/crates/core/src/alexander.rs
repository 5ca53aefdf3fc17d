//! Alexander polynomials of grid diagrams and canonical serial numbers.
//!
//! The computation follows the classical region recipe. The diagram curve
//! cuts the plane into `a + 2` regions, where `a` is the crossing count.
//! Each crossing contributes the equation `x*r_j - x*r_k + r_l - r_m = 0`
//! over its four incident regions, giving an `a x (a+2)` matrix with entries
//! in `{0, +-1, +-x, 1+x, 1-x, -1+x, -1-x}`. Deleting the columns of two
//! adjacent regions and taking the determinant yields the polynomial up to
//! a unit `+-x^q`, which [`normalize`] removes.
//!
//! All arithmetic is exact. The determinant is computed by evaluating the
//! matrix at `a + 1` integer points, running fraction-free Bareiss
//! elimination over arbitrary-precision integers, and interpolating the
//! results back into coefficients.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::griddiag::{Crossing, GridDiagram, HDir};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlexanderError {
    /// The region recipe needs a connected projection.
    DisconnectedProjection,
}

impl fmt::Display for AlexanderError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlexanderError::DisconnectedProjection => {
                write!(f, "diagram projection is disconnected")
            }
        }
    }
}

impl core::error::Error for AlexanderError {}

/// A canonicalized integer polynomial used as a money serial number.
///
/// Coefficients are stored lowest degree first. Nonzero serials have a
/// positive constant term and a nonzero leading coefficient; the zero
/// polynomial is the empty coefficient list. The text form is the
/// comma-separated coefficient list, e.g. `1,-1,1`, with `0` for zero.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SerialPolynomial {
    coeffs: Vec<BigInt>,
}

impl SerialPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }
}

impl fmt::Display for SerialPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", c)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SerialParseError {
    Empty,
    BadInteger,
    /// Violates the canonical form (positive constant term, nonzero leading
    /// coefficient).
    NonCanonical,
}

impl fmt::Display for SerialParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SerialParseError::Empty => write!(f, "empty serial"),
            SerialParseError::BadInteger => write!(f, "serial coefficient is not an integer"),
            SerialParseError::NonCanonical => write!(f, "serial is not in canonical form"),
        }
    }
}

impl core::error::Error for SerialParseError {}

impl FromStr for SerialPolynomial {
    type Err = SerialParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(SerialParseError::Empty);
        }
        if s == "0" {
            return Ok(Self::zero());
        }
        let coeffs: Vec<BigInt> = s
            .split(',')
            .map(|t| BigInt::from_str(t.trim()).map_err(|_| SerialParseError::BadInteger))
            .collect::<Result<_, _>>()?;
        let first_positive = coeffs.first().map_or(false, |c| c.sign() == Sign::Plus);
        let last_nonzero = coeffs.last().map_or(false, |c| !c.is_zero());
        if !first_positive || !last_nonzero {
            return Err(SerialParseError::NonCanonical);
        }
        Ok(Self { coeffs })
    }
}

/// A degree-at-most-one integer polynomial `c0 + c1*x`, the entry type of
/// the crossing matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Lin {
    pub c0: i32,
    pub c1: i32,
}

impl Lin {
    pub const ZERO: Lin = Lin { c0: 0, c1: 0 };
    pub const ONE: Lin = Lin { c0: 1, c1: 0 };
    pub const NEG_ONE: Lin = Lin { c0: -1, c1: 0 };
    pub const X: Lin = Lin { c0: 0, c1: 1 };
    pub const NEG_X: Lin = Lin { c0: 0, c1: -1 };

    pub fn eval(&self, x: i64) -> i64 {
        self.c0 as i64 + self.c1 as i64 * x
    }
}

impl core::ops::AddAssign for Lin {
    fn add_assign(&mut self, rhs: Lin) {
        self.c0 += rhs.c0;
        self.c1 += rhs.c1;
    }
}

const CURVE: u32 = u32::MAX;
const UNSET: u32 = u32::MAX - 1;

/// Labeling of the planar faces cut out by the diagram curve.
///
/// The curve is rasterized onto a `(2d+1) x (2d+1)` lattice of half-cell
/// pixels; segments occupy pixels with one odd coordinate, so faces are the
/// flood-fill components of the remaining pixels. Rectilinear geometry
/// makes this exact.
#[derive(Debug, Clone)]
pub struct RegionMap {
    side: usize,
    region_of: Vec<u32>,
    count: usize,
    outer: u32,
}

impl RegionMap {
    pub fn region_count(&self) -> usize {
        self.count
    }

    pub fn outer(&self) -> u32 {
        self.outer
    }

    fn at(&self, a: usize, b: usize) -> u32 {
        self.region_of[a * self.side + b]
    }

    /// Regions at the four quadrants of a crossing, as `[NE, NW, SW, SE]`.
    pub fn quadrants(&self, cr: &Crossing) -> [u32; 4] {
        let (a, b) = (2 * cr.col as usize + 1, 2 * cr.row as usize + 1);
        [
            self.at(a + 1, b + 1),
            self.at(a - 1, b + 1),
            self.at(a - 1, b - 1),
            self.at(a + 1, b - 1),
        ]
    }

    /// All unordered pairs of regions that share a positive-length stretch
    /// of the curve.
    pub fn adjacent_region_pairs(&self) -> Vec<(u32, u32)> {
        let mut pairs = BTreeSet::new();
        let mut consider = |p: u32, q: u32| {
            if p != CURVE && q != CURVE {
                pairs.insert(if p < q { (p, q) } else { (q, p) });
            }
        };
        for a in 1..self.side - 1 {
            for b in 1..self.side - 1 {
                if self.at(a, b) != CURVE {
                    continue;
                }
                consider(self.at(a - 1, b), self.at(a + 1, b));
                consider(self.at(a, b - 1), self.at(a, b + 1));
            }
        }
        pairs.into_iter().collect()
    }
}

/// Label the planar faces of a connected diagram.
pub fn regions(g: &GridDiagram) -> Result<RegionMap, AlexanderError> {
    if !g.is_connected_projection() {
        return Err(AlexanderError::DisconnectedProjection);
    }
    Ok(rasterize(g))
}

fn rasterize(g: &GridDiagram) -> RegionMap {
    let d = g.d();
    let side = 2 * d + 1;
    let mut cells = vec![UNSET; side * side];
    let idx = |a: usize, b: usize| a * side + b;

    for c in 0..d {
        let (xr, or) = (g.x_row(c), g.o_row(c));
        let (lo, hi) = if xr < or { (xr, or) } else { (or, xr) };
        for b in 2 * lo + 1..=2 * hi + 1 {
            cells[idx(2 * c + 1, b)] = CURVE;
        }
    }
    for r in 0..d {
        let xc = (0..d).find(|&c| g.x_row(c) == r).unwrap();
        let oc = (0..d).find(|&c| g.o_row(c) == r).unwrap();
        let (lo, hi) = if xc < oc { (xc, oc) } else { (oc, xc) };
        for a in 2 * lo + 1..=2 * hi + 1 {
            cells[idx(a, 2 * r + 1)] = CURVE;
        }
    }

    let mut count = 0u32;
    let mut stack = Vec::new();
    for start in 0..cells.len() {
        if cells[start] != UNSET {
            continue;
        }
        cells[start] = count;
        stack.push(start);
        while let Some(p) = stack.pop() {
            let (a, b) = (p / side, p % side);
            let mut visit = |q: usize, cells: &mut Vec<u32>, stack: &mut Vec<usize>| {
                if cells[q] == UNSET {
                    cells[q] = count;
                    stack.push(q);
                }
            };
            if a > 0 {
                visit(idx(a - 1, b), &mut cells, &mut stack);
            }
            if a + 1 < side {
                visit(idx(a + 1, b), &mut cells, &mut stack);
            }
            if b > 0 {
                visit(idx(a, b - 1), &mut cells, &mut stack);
            }
            if b + 1 < side {
                visit(idx(a, b + 1), &mut cells, &mut stack);
            }
        }
        count += 1;
    }

    let outer = cells[idx(0, 0)];
    RegionMap {
        side,
        region_of: cells,
        count: count as usize,
        outer,
    }
}

/// Contributions of one crossing, as `(region, entry)` terms in the order
/// `(j, k, l, m)` of the equation `x*r_j - x*r_k + r_l - r_m = 0`.
///
/// The quadrants are taken counterclockwise starting from the one on the
/// left of the under strand just after it passes under the crossing. In a
/// grid diagram the under strand is always horizontal.
pub fn crossing_equation(cr: &Crossing, rm: &RegionMap) -> [(u32, Lin); 4] {
    let [ne, nw, sw, se] = rm.quadrants(cr);
    let (j, k, l, m) = match cr.under {
        HDir::East => (ne, nw, sw, se),
        HDir::West => (sw, se, ne, nw),
    };
    [
        (j, Lin::X),
        (k, Lin::NEG_X),
        (l, Lin::ONE),
        (m, Lin::NEG_ONE),
    ]
}

/// The `a x (a+2)` crossing matrix of a connected diagram.
#[derive(Debug, Clone)]
pub struct AlexanderMatrix {
    rows: Vec<Vec<Lin>>,
    ncols: usize,
}

impl AlexanderMatrix {
    pub fn rows(&self) -> &[Vec<Lin>] {
        &self.rows
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }
}

pub fn alexander_matrix(g: &GridDiagram) -> Result<AlexanderMatrix, AlexanderError> {
    let rm = regions(g)?;
    Ok(assemble(g, &rm))
}

fn assemble(g: &GridDiagram, rm: &RegionMap) -> AlexanderMatrix {
    let ncols = rm.region_count();
    let rows = g
        .crossings()
        .iter()
        .map(|cr| {
            let mut row = vec![Lin::ZERO; ncols];
            for (region, term) in crossing_equation(cr, rm) {
                row[region as usize] += term;
            }
            row
        })
        .collect();
    AlexanderMatrix { rows, ncols }
}

/// Remove the columns of two chosen regions, leaving a square matrix.
pub fn delete_columns(m: &AlexanderMatrix, p: u32, q: u32) -> Vec<Vec<Lin>> {
    m.rows()
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|&(i, _)| i as u32 != p && i as u32 != q)
                .map(|(_, &e)| e)
                .collect()
        })
        .collect()
}

/// Remove the outer region's column and that of one region adjacent to it.
///
/// Any adjacent pair works; the normalized determinant does not depend on
/// the choice. The outer region plus its smallest neighbor keeps the
/// output deterministic.
pub fn delete_adjacent_columns(m: &AlexanderMatrix, rm: &RegionMap) -> Vec<Vec<Lin>> {
    let outer = rm.outer();
    let partner = rm
        .adjacent_region_pairs()
        .into_iter()
        .filter_map(|(p, q)| {
            if p == outer {
                Some(q)
            } else if q == outer {
                Some(p)
            } else {
                None
            }
        })
        .min()
        .expect("a connected diagram has a region adjacent to the outer one");
    delete_columns(m, outer, partner)
}

fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                let (quot, rem) = t.div_rem(&prev);
                debug_assert!(rem.is_zero(), "Bareiss division is exact");
                m[i][j] = quot;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

/// Recover integer polynomial coefficients from values at `0, 1, ..., n-1`
/// by Newton forward differences, staying in integer arithmetic throughout.
fn interpolate_at_naturals(values: &[BigInt]) -> Vec<BigInt> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let mut work = values.to_vec();
    let mut deltas = Vec::with_capacity(n);
    deltas.push(work[0].clone());
    for k in 1..n {
        for i in 0..n - k {
            work[i] = &work[i + 1] - &work[i];
        }
        deltas.push(work[0].clone());
    }

    let mut fact = vec![BigInt::one(); n];
    for k in 1..n {
        fact[k] = &fact[k - 1] * BigInt::from(k as u64);
    }
    // accumulate (n-1)! * f(x), which keeps every term integral
    let scale = fact[n - 1].clone();
    let mut num = vec![BigInt::zero(); n];
    let mut falling = vec![BigInt::one()];
    for k in 0..n {
        if k > 0 {
            let mut next = vec![BigInt::zero(); falling.len() + 1];
            let shift = BigInt::from((k - 1) as u64);
            for (i, c) in falling.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * &shift;
            }
            falling = next;
        }
        let coef = &deltas[k] * (&scale / &fact[k]);
        for (i, c) in falling.iter().enumerate() {
            num[i] += c * &coef;
        }
    }
    let mut out: Vec<BigInt> = num
        .into_iter()
        .map(|c| {
            let (quot, rem) = c.div_rem(&scale);
            debug_assert!(rem.is_zero(), "integer interpolation divides exactly");
            quot
        })
        .collect();
    while out.last().map_or(false, |c| c.is_zero()) {
        out.pop();
    }
    out
}

/// Exact determinant of a square matrix of degree-at-most-one polynomials,
/// by evaluation at `n + 1` points and interpolation. The empty matrix has
/// determinant 1.
pub fn poly_det(m: &[Vec<Lin>]) -> Vec<BigInt> {
    let n = m.len();
    if n == 0 {
        return vec![BigInt::one()];
    }
    let values: Vec<BigInt> = (0..=n as i64)
        .map(|t| {
            let numeric: Vec<Vec<BigInt>> = m
                .iter()
                .map(|row| row.iter().map(|e| BigInt::from(e.eval(t))).collect())
                .collect();
            bareiss_det(numeric)
        })
        .collect();
    interpolate_at_naturals(&values)
}

/// Divide out the unit `+-x^q` so the lowest-degree term is a positive
/// constant. Zero maps to the zero serial.
pub fn normalize(mut coeffs: Vec<BigInt>) -> SerialPolynomial {
    while coeffs.last().map_or(false, |c| c.is_zero()) {
        coeffs.pop();
    }
    let Some(low) = coeffs.iter().position(|c| !c.is_zero()) else {
        return SerialPolynomial::zero();
    };
    coeffs.drain(..low);
    if coeffs[0].sign() == Sign::Minus {
        for c in &mut coeffs {
            *c = -core::mem::take(c);
        }
    }
    SerialPolynomial { coeffs }
}

/// The serial number of a diagram: its Alexander polynomial in canonical
/// form.
///
/// A disconnected projection is a split link, whose polynomial is zero, so
/// it short-circuits to the zero serial.
pub fn alexander(g: &GridDiagram) -> SerialPolynomial {
    let rm = match regions(g) {
        Ok(rm) => rm,
        Err(AlexanderError::DisconnectedProjection) => return SerialPolynomial::zero(),
    };
    let m = assemble(g, &rm);
    let m0 = delete_adjacent_columns(&m, &rm);
    normalize(poly_det(&m0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn tiny_unknot() -> GridDiagram {
        GridDiagram::new(vec![0, 1], vec![1, 0]).unwrap()
    }

    fn fig3() -> GridDiagram {
        GridDiagram::new(vec![0, 1, 2, 3], vec![2, 3, 0, 1]).unwrap()
    }

    fn trefoil() -> GridDiagram {
        GridDiagram::new(vec![0, 1, 2, 3, 4], vec![2, 3, 4, 0, 1]).unwrap()
    }

    fn serial(text: &str) -> SerialPolynomial {
        text.parse().unwrap()
    }

    #[test]
    fn region_counts() {
        assert_eq!(regions(&tiny_unknot()).unwrap().region_count(), 2);
        assert_eq!(regions(&fig3()).unwrap().region_count(), 4);
    }

    #[test]
    fn region_count_is_crossings_plus_two() {
        for g in crate::griddiag::all_diagrams(4) {
            if g.is_connected_projection() {
                let rm = regions(&g).unwrap();
                assert_eq!(rm.region_count(), g.crossings().len() + 2);
            }
        }
    }

    #[test]
    fn regions_require_connectivity() {
        let split = GridDiagram::new(vec![1, 0, 3, 2], vec![0, 1, 2, 3]).unwrap();
        assert_eq!(
            regions(&split).unwrap_err(),
            AlexanderError::DisconnectedProjection
        );
    }

    #[test]
    fn matrix_shape_and_entry_set() {
        let m = alexander_matrix(&fig3()).unwrap();
        assert_eq!((m.nrows(), m.ncols()), (2, 4));
        for row in m.rows() {
            for e in row {
                assert!(e.c0.abs() <= 1 && e.c1.abs() <= 1);
            }
            let j_terms: i32 = row.iter().map(|e| e.c1).sum();
            let const_terms: i32 = row.iter().map(|e| e.c0).sum();
            assert_eq!(j_terms, 0);
            assert_eq!(const_terms, 0);
        }
    }

    #[test]
    fn delete_leaves_square() {
        let m = alexander_matrix(&fig3()).unwrap();
        let rm = regions(&fig3()).unwrap();
        let m0 = delete_adjacent_columns(&m, &rm);
        assert_eq!(m0.len(), 2);
        assert!(m0.iter().all(|r| r.len() == 2));
    }

    #[test]
    fn poly_det_empty_matrix_is_one() {
        assert_eq!(poly_det(&[]), vec![BigInt::one()]);
    }

    #[test]
    fn poly_det_two_by_two() {
        let m = vec![vec![Lin::X, Lin::ONE], vec![Lin::ONE, Lin::X]];
        assert_eq!(
            poly_det(&m),
            vec![BigInt::from(-1), BigInt::from(0), BigInt::from(1)]
        );
    }

    #[test]
    fn normalize_examples() {
        // -x + x^2 -> 1 - x ... divided by -x
        let p = normalize(vec![BigInt::from(0), BigInt::from(-1), BigInt::from(1)]);
        assert_eq!(p.to_string(), "1,-1");
        // x^2 + x^3 -> 1 + x
        let p = normalize(vec![
            BigInt::from(0),
            BigInt::from(0),
            BigInt::from(1),
            BigInt::from(1),
        ]);
        assert_eq!(p.to_string(), "1,1");
        assert!(normalize(vec![BigInt::from(0)]).is_zero());
    }

    #[test]
    fn unknot_serial_is_one() {
        assert_eq!(alexander(&tiny_unknot()), serial("1"));
    }

    #[test]
    fn trefoil_serial() {
        assert_eq!(alexander(&trefoil()).to_string(), "1,-1,1");
    }

    #[test]
    fn split_diagram_serial_is_zero() {
        let split = GridDiagram::new(vec![1, 0, 3, 2], vec![0, 1, 2, 3]).unwrap();
        assert!(alexander(&split).is_zero());
        assert_eq!(alexander(&split).to_string(), "0");
    }

    #[test]
    fn serial_text_roundtrip() {
        for text in ["0", "1", "1,-1,1", "1,-3,1", "2,0,-5,1"] {
            assert_eq!(serial(text).to_string(), text);
        }
        assert!("".parse::<SerialPolynomial>().is_err());
        assert!("-1,1".parse::<SerialPolynomial>().is_err());
        assert!("1,0".parse::<SerialPolynomial>().is_err());
        assert!("1,a".parse::<SerialPolynomial>().is_err());
    }

    #[test]
    fn column_choice_does_not_matter_on_small_diagrams() {
        for g in crate::griddiag::all_diagrams(4).into_iter().step_by(5) {
            if !g.is_connected_projection() {
                continue;
            }
            let rm = regions(&g).unwrap();
            let m = assemble(&g, &rm);
            let reference = normalize(poly_det(&delete_adjacent_columns(&m, &rm)));
            for (p, q) in rm.adjacent_region_pairs() {
                let alt = normalize(poly_det(&delete_columns(&m, p, q)));
                assert_eq!(alt, reference);
            }
        }
    }
}
