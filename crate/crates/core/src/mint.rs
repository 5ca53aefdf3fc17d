//! Minting: the grid-dimension distribution and bill creation.
//!
//! The mint fixes a security parameter `dbar` and weights dimension `d` by
//! the unnormalized density
//!
//! ```text
//! y(d) = exp(-(d - dbar)^2 / (2 dbar)) / (d! * derangements(d))    2 <= d <= 2 dbar
//! ```
//!
//! scaled to the integer table `q(d) = ceil(y(d) / y_min)`. The exact
//! initial state puts amplitude proportional to `sqrt(q(d(G)))` on every
//! grid diagram `G` with `2 <= d(G) <= 2 dbar`, so measuring `d` on it
//! gives a near-Gaussian profile while diagrams of equal dimension stay
//! equally likely. Measuring the serial number collapses the initial state
//! onto one serial class, which is the money state.
//!
//! The `q` values define the scheme, so they must not depend on platform
//! floating point: `exp` is evaluated in exact rational arithmetic rounded
//! to a fixed 64 decimal digits, and everything after that is exact
//! integer work.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::alexander::{alexander, SerialPolynomial};
use crate::griddiag::{all_diagrams, GridDiagram};
use crate::statespace::DiagramState;
use crate::util;

/// Decimal digits kept when rounding `exp`; this pins `q` across platforms.
const EXP_DECIMAL_DIGITS: u32 = 64;

/// Hard cap on the number of diagrams an exact state may enumerate.
const MAX_EXACT_SUPPORT: u128 = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MintError {
    /// The security parameter must be at least 2.
    DbarTooSmall,
    /// Some `q(d)` exceeds the 64-bit label space.
    QTableOverflow,
    /// The requested exact construction is beyond the configured caps.
    StateTooLarge,
}

impl fmt::Display for MintError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MintError::DbarTooSmall => write!(f, "security parameter must be at least 2"),
            MintError::QTableOverflow => write!(f, "q table exceeds the 64-bit label space"),
            MintError::StateTooLarge => write!(f, "exact construction exceeds the configured cap"),
        }
    }
}

impl core::error::Error for MintError {}

/// Number of fixed-point-free permutations of `d` elements, by the
/// inclusion-exclusion recurrence `D(n) = n D(n-1) + (-1)^n`.
pub fn derangements(d: usize) -> BigUint {
    let mut cur = BigInt::one();
    for n in 1..=d {
        cur = cur * BigInt::from(n as u64) + if n % 2 == 0 { BigInt::one() } else { -BigInt::one() };
    }
    cur.to_biguint().expect("derangement counts are non-negative")
}

pub fn factorial(d: usize) -> BigUint {
    let mut acc = BigUint::one();
    for n in 2..=d {
        acc *= BigUint::from(n as u64);
    }
    acc
}

fn pow10(digits: u32) -> BigInt {
    BigInt::from(10u32).pow(digits)
}

/// `exp(r)` as an exact rational rounded half-up to 64 decimal digits.
fn exp_fixed(r: &BigRational) -> BigRational {
    // Taylor series with a rigorous tail bound well below the rounding digit.
    let eps = BigRational::new(BigInt::one(), pow10(EXP_DECIMAL_DIGITS + 8));
    let two = BigRational::from_integer(BigInt::from(2));
    let mut term = BigRational::one();
    let mut sum = BigRational::one();
    let mut k = BigInt::one();
    loop {
        term = term * r / BigRational::from_integer(k.clone());
        sum += &term;
        k += 1;
        // once |r| <= (k+1)/2 the tail is bounded by twice the last term
        let small = term.abs() * &two < eps;
        let contracting = r.abs() * &two < BigRational::from_integer(&k + BigInt::one());
        if small && contracting {
            break;
        }
    }
    let scale = pow10(EXP_DECIMAL_DIGITS);
    let scaled = sum * BigRational::from_integer(scale.clone())
        + BigRational::new(BigInt::one(), BigInt::from(2));
    BigRational::new(scaled.floor().to_integer(), scale)
}

/// The unnormalized dimension density `y(d)`, zero outside `[2, 2 dbar]`.
pub fn y_weight(d: usize, dbar: u16) -> BigRational {
    if d < 2 || d > 2 * dbar as usize {
        return BigRational::zero();
    }
    let diff = d as i64 - dbar as i64;
    let arg = BigRational::new(BigInt::from(-diff * diff), BigInt::from(2 * dbar as i64));
    let gauss = exp_fixed(&arg);
    let denom = BigInt::from(factorial(d) * derangements(d));
    gauss / BigRational::from_integer(denom)
}

/// The integer dimension table `q(d) = ceil(y(d) / y_min)` for one `dbar`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QTable {
    dbar: u16,
    q: Vec<u64>,
}

impl QTable {
    pub fn build(dbar: u16) -> Result<Self, MintError> {
        if dbar < 2 {
            return Err(MintError::DbarTooSmall);
        }
        let dims = 2..=2 * dbar as usize;
        let ys: Vec<BigRational> = dims.clone().map(|d| y_weight(d, dbar)).collect();
        let y_min = ys.iter().min().expect("dimension range is non-empty").clone();
        let mut q = vec![0u64; 2 * dbar as usize + 1];
        for (d, y) in dims.zip(&ys) {
            let ceil = (y / &y_min).ceil().to_integer();
            q[d] = ceil.to_u64().ok_or(MintError::QTableOverflow)?;
        }
        Ok(Self { dbar, q })
    }

    pub fn dbar(&self) -> u16 {
        self.dbar
    }

    /// `q(d)`; zero outside `[2, 2 dbar]`.
    pub fn q(&self, d: usize) -> u64 {
        self.q.get(d).copied().unwrap_or(0)
    }

    pub fn q_max(&self) -> u64 {
        self.q.iter().copied().max().unwrap_or(0)
    }

    /// Size of the chain's shift-parameter range `{0, ..., q_max^2}`.
    pub fn w_count(&self) -> u128 {
        self.q_max() as u128 * self.q_max() as u128 + 1
    }

    /// Number of diagrams of dimension `d` times `q(d)`: the weight of
    /// that dimension in the initial state.
    pub fn dimension_weight(&self, d: usize) -> Option<u128> {
        let count = (factorial(d) * derangements(d)).to_u128()?;
        count.checked_mul(self.q(d) as u128)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MintMode {
    Exact,
    Classical,
}

impl fmt::Display for MintMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MintMode::Exact => write!(f, "exact"),
            MintMode::Classical => write!(f, "classical"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MintParams {
    pub dbar: u16,
    pub mode: MintMode,
    pub seed: u64,
    /// Largest `dbar` for which exact grouping is attempted.
    pub exact_dbar_cap: u16,
}

impl MintParams {
    pub fn new(dbar: u16, mode: MintMode, seed: u64) -> Self {
        Self {
            dbar,
            mode,
            seed,
            exact_dbar_cap: 3,
        }
    }
}

/// State payload carried by a bill.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    /// The exact serial-class superposition.
    Exact(DiagramState),
    /// One classically sampled diagram standing in for the superposition.
    /// It cannot reproduce the money state by itself.
    Certificate(GridDiagram),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoneyBill {
    pub serial: SerialPolynomial,
    pub params: MintParams,
    pub payload: Payload,
}

/// The exact initial state: amplitude proportional to `sqrt(q(d(G)))` on
/// every diagram with `2 <= d(G) <= 2 dbar`.
pub fn build_initial_state(qt: &QTable) -> Result<DiagramState, MintError> {
    let dims = 2..=2 * qt.dbar() as usize;
    let mut total: u128 = 0;
    for d in dims.clone() {
        let w = qt.dimension_weight(d).ok_or(MintError::StateTooLarge)?;
        total = total.checked_add(w).ok_or(MintError::StateTooLarge)?;
        let support = (factorial(d) * derangements(d))
            .to_u128()
            .ok_or(MintError::StateTooLarge)?;
        if support > MAX_EXACT_SUPPORT {
            return Err(MintError::StateTooLarge);
        }
    }
    let total_f = total as f64;
    let mut amps = BTreeMap::new();
    for d in dims {
        let amp = util::sqrt(qt.q(d) as f64 / total_f);
        for g in all_diagrams(d) {
            amps.insert(g, amp);
        }
    }
    Ok(DiagramState::from_map(amps))
}

/// One serial class of the initial state.
#[derive(Debug, Clone)]
pub struct SerialGroup {
    pub serial: SerialPolynomial,
    pub diagrams: Vec<GridDiagram>,
    /// Sum of `q(d(G))` over the class.
    pub weight: u128,
}

/// Precomputed serial grouping of the full initial state; minting then
/// just samples serial classes, so repeated mints are cheap.
pub struct ExactMint {
    params: MintParams,
    qtable: QTable,
    groups: Vec<SerialGroup>,
    total_weight: u128,
}

impl ExactMint {
    pub fn new(params: MintParams) -> Result<Self, MintError> {
        if params.dbar < 2 {
            return Err(MintError::DbarTooSmall);
        }
        if params.dbar > params.exact_dbar_cap {
            return Err(MintError::StateTooLarge);
        }
        let qtable = QTable::build(params.dbar)?;
        let mut grouped: BTreeMap<SerialPolynomial, (Vec<GridDiagram>, u128)> = BTreeMap::new();
        for d in 2..=2 * params.dbar as usize {
            let q = qtable.q(d) as u128;
            for g in all_diagrams(d) {
                let entry = grouped.entry(alexander(&g)).or_default();
                entry.0.push(g);
                entry.1 += q;
            }
        }
        let mut total_weight = 0u128;
        let groups = grouped
            .into_iter()
            .map(|(serial, (diagrams, weight))| {
                total_weight += weight;
                SerialGroup {
                    serial,
                    diagrams,
                    weight,
                }
            })
            .collect();
        Ok(Self {
            params,
            qtable,
            groups,
            total_weight,
        })
    }

    pub fn qtable(&self) -> &QTable {
        &self.qtable
    }

    pub fn groups(&self) -> &[SerialGroup] {
        &self.groups
    }

    pub fn total_weight(&self) -> u128 {
        self.total_weight
    }

    /// The normalized money state of one serial class.
    pub fn state_for(&self, group: &SerialGroup) -> DiagramState {
        let mut amps = BTreeMap::new();
        for g in &group.diagrams {
            let amp = util::sqrt(self.qtable.q(g.d()) as f64 / group.weight as f64);
            amps.insert(g.clone(), amp);
        }
        DiagramState::from_map(amps)
    }

    /// Measure the serial number on the initial state; zero serials are
    /// rejected and redrawn.
    pub fn mint_with(&self, rng: &mut impl Rng) -> MoneyBill {
        loop {
            let mut t = rng.gen_range(0..self.total_weight);
            let group = self
                .groups
                .iter()
                .find(|grp| {
                    if t < grp.weight {
                        true
                    } else {
                        t -= grp.weight;
                        false
                    }
                })
                .expect("weights add up to the total");
            if group.serial.is_zero() {
                continue;
            }
            return MoneyBill {
                serial: group.serial.clone(),
                params: self.params,
                payload: Payload::Exact(self.state_for(group)),
            };
        }
    }
}

/// Mint one exact bill from the seed in `params`.
pub fn mint_exact(params: MintParams) -> Result<MoneyBill, MintError> {
    let mint = ExactMint::new(params)?;
    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
    Ok(mint.mint_with(&mut rng))
}

/// Uniformly random disjoint permutation pair of dimension `d`, by
/// rejection; also reports how many attempts the rejection loop took.
pub fn sample_disjoint_pair(d: usize, rng: &mut impl Rng) -> (GridDiagram, u32) {
    let mut attempts = 0;
    loop {
        attempts += 1;
        let mut pi_x: Vec<u16> = (0..d as u16).collect();
        let mut pi_o: Vec<u16> = (0..d as u16).collect();
        pi_x.shuffle(rng);
        pi_o.shuffle(rng);
        if let Ok(g) = GridDiagram::new(pi_x, pi_o) {
            return (g, attempts);
        }
    }
}

/// Classical sampling mint for parameters beyond the exact-state cap.
pub struct ClassicalMint {
    params: MintParams,
    qtable: QTable,
    dim_weights: Vec<(usize, u128)>,
    total_weight: u128,
}

impl ClassicalMint {
    pub fn new(params: MintParams) -> Result<Self, MintError> {
        let qtable = QTable::build(params.dbar)?;
        let mut dim_weights = Vec::new();
        let mut total_weight = 0u128;
        for d in 2..=2 * params.dbar as usize {
            let w = qtable.dimension_weight(d).ok_or(MintError::StateTooLarge)?;
            total_weight = total_weight.checked_add(w).ok_or(MintError::StateTooLarge)?;
            dim_weights.push((d, w));
        }
        Ok(Self {
            params,
            qtable,
            dim_weights,
            total_weight,
        })
    }

    pub fn qtable(&self) -> &QTable {
        &self.qtable
    }

    /// Sample a dimension with probability proportional to
    /// `q(d) * d! * derangements(d)`.
    pub fn sample_dimension(&self, rng: &mut impl Rng) -> usize {
        let mut t = rng.gen_range(0..self.total_weight);
        for &(d, w) in &self.dim_weights {
            if t < w {
                return d;
            }
            t -= w;
        }
        unreachable!("weights add up to the total")
    }

    /// Sample one diagram and wrap it as a certificate bill. The whole
    /// draw restarts whenever the serial comes out zero.
    pub fn mint_with(&self, rng: &mut impl Rng) -> MoneyBill {
        loop {
            let d = self.sample_dimension(rng);
            let (g, _) = sample_disjoint_pair(d, rng);
            let serial = alexander(&g);
            if serial.is_zero() {
                continue;
            }
            return MoneyBill {
                serial,
                params: self.params,
                payload: Payload::Certificate(g),
            };
        }
    }
}

/// Mint one certificate bill from the seed in `params`.
pub fn mint_classical(params: MintParams) -> Result<MoneyBill, MintError> {
    let mint = ClassicalMint::new(params)?;
    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
    Ok(mint.mint_with(&mut rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn derangement_values() {
        fn brute(d: usize, used: &mut Vec<bool>, pos: usize) -> u64 {
            if pos == d {
                return 1;
            }
            let mut n = 0;
            for v in 0..d {
                if !used[v] && v != pos {
                    used[v] = true;
                    n += brute(d, used, pos + 1);
                    used[v] = false;
                }
            }
            n
        }
        for d in 0..=7 {
            let expect = brute(d, &mut vec![false; d], 0);
            assert_eq!(derangements(d), BigUint::from(expect), "d={d}");
        }
    }

    #[test]
    fn y_weight_support() {
        assert!(y_weight(1, 2).is_zero());
        assert!(y_weight(5, 2).is_zero());
        // peak value has exponent zero
        assert_eq!(
            y_weight(2, 2),
            BigRational::new(BigInt::one(), BigInt::from(2))
        );
    }

    #[test]
    fn y_weight_example() {
        // dbar=2, d=3: exp(-1/4) / 12
        let y = y_weight(3, 2);
        let exp_quarter = exp_fixed(&BigRational::new(BigInt::from(-1), BigInt::from(4)));
        assert_eq!(y * BigRational::from_integer(BigInt::from(12)), exp_quarter);
        let approx = exp_quarter.to_f64().unwrap();
        assert!((approx - 0.7788007830714049).abs() < 1e-15);
    }

    #[test]
    fn qtable_small_security_parameter() {
        let qt = QTable::build(2).unwrap();
        assert_eq!((qt.q(2), qt.q(3), qt.q(4)), (294, 39, 1));
        assert_eq!(qt.q(1), 0);
        assert_eq!(qt.q(5), 0);
        assert_eq!(qt.q_max(), 294);
        assert_eq!(qt.w_count(), 294 * 294 + 1);
    }

    #[test]
    fn qtable_rejects_tiny_dbar() {
        assert_eq!(QTable::build(1).unwrap_err(), MintError::DbarTooSmall);
        assert_eq!(QTable::build(0).unwrap_err(), MintError::DbarTooSmall);
    }

    #[test]
    fn initial_state_support_and_norm() {
        let qt = QTable::build(2).unwrap();
        let st = build_initial_state(&qt).unwrap();
        assert_eq!(st.len(), 230); // 2 + 12 + 216
        assert!((st.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn initial_state_dimension_distribution_is_exact() {
        let qt = QTable::build(2).unwrap();
        let st = build_initial_state(&qt).unwrap();
        let total: u128 = (2..=4).map(|d| qt.dimension_weight(d).unwrap()).sum();
        for d in 2..=4usize {
            let measured: f64 = st
                .iter()
                .filter(|(g, _)| g.d() == d)
                .map(|(_, a)| a * a)
                .sum();
            let expected = qt.dimension_weight(d).unwrap() as f64 / total as f64;
            assert!((measured - expected).abs() < 1e-12, "d={d}");
        }
    }

    #[test]
    fn exact_mint_groups_are_consistent() {
        let mint = ExactMint::new(MintParams::new(2, MintMode::Exact, 0)).unwrap();
        let total: u128 = mint.groups().iter().map(|g| g.weight).sum();
        assert_eq!(total, mint.total_weight());
        let full: u128 = (2..=4)
            .map(|d| mint.qtable().dimension_weight(d).unwrap())
            .sum();
        assert_eq!(total, full);
        for group in mint.groups() {
            for g in group.diagrams.iter().step_by(9) {
                assert_eq!(alexander(g), group.serial);
            }
            let st = mint.state_for(group);
            assert!((st.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn minted_bills_have_nonzero_serials() {
        let mint = ExactMint::new(MintParams::new(2, MintMode::Exact, 0)).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..50 {
            let bill = mint.mint_with(&mut rng);
            assert!(!bill.serial.is_zero());
            match bill.payload {
                Payload::Exact(ref st) => assert!((st.norm() - 1.0).abs() < 1e-12),
                Payload::Certificate(_) => panic!("exact mint yields exact payloads"),
            }
        }
    }

    #[test]
    fn exact_mint_respects_cap() {
        let params = MintParams::new(4, MintMode::Exact, 0);
        assert_eq!(ExactMint::new(params).unwrap_err(), MintError::StateTooLarge);
    }

    #[test]
    fn classical_bill_serial_matches_certificate() {
        let bill = mint_classical(MintParams::new(3, MintMode::Classical, 5)).unwrap();
        assert!(!bill.serial.is_zero());
        match bill.payload {
            Payload::Certificate(ref g) => assert_eq!(alexander(g), bill.serial),
            Payload::Exact(_) => panic!("classical mint yields certificates"),
        }
    }

    #[test]
    fn group_serial_texts() {
        let mint = ExactMint::new(MintParams::new(2, MintMode::Exact, 0)).unwrap();
        let texts: Vec<_> = mint.groups().iter().map(|g| g.serial.to_string()).collect();
        assert!(texts.contains(&"1".to_string()));
        assert!(texts.contains(&"1,-1".to_string()));
        assert!(texts.contains(&"0".to_string()));
    }
}
