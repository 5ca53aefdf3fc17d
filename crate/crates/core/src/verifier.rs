//! End-to-end bill verification and the counterfeiting experiments.
//!
//! Verification of a claimed `(serial, state)` pair runs:
//!
//! - step 0, well-formedness: internally constructed states only contain
//!   valid diagrams, and decoding enforces validity at the boundary;
//! - step 1, serial measurement: condition on the claimed serial;
//! - step 2, dimension measurement: the window `[dbar/2, 3*dbar/2]`;
//! - step 3, the Markov test: expand over labels and apply the averaged
//!   move operator `B` for `r` rounds, each round succeeding with the
//!   squared norm ratio.
//!
//! Genuine money states are exact fixed points of every move, so step 3
//! accepts them with probability 1 and leaves them untouched. At desk
//! scales, though, every serial class also has members at the top
//! dimension `2 dbar`, so the step-2 projection genuinely nicks a real
//! bill. The exact analyzer therefore keeps the two concerns separate: it
//! reports the dimension-window mass without collapsing onto it, runs the
//! fixed-point rounds on the serial-conditioned state, and reports the
//! faithful sequential cascade (collapse after every measurement) as a
//! separate probability. Sampled mode draws the cascade's measurements
//! one by one, exactly as a single verification run would experience
//! them.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::alexander::{alexander, SerialPolynomial};
use crate::griddiag::GridDiagram;
use crate::mint::{ClassicalMint, ExactMint, MintError, MintMode, MintParams, MoneyBill, Payload, QTable};
use crate::moves;
use crate::statespace::{
    contract, expand, measure_alexander, project_dimension, DiagramState, ExpandedState,
    StateError,
};
use crate::util;

pub const DEFAULT_ROUNDS: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    Exact,
    Sampled,
}

impl fmt::Display for VerifyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyMode::Exact => write!(f, "exact"),
            VerifyMode::Sampled => write!(f, "sampled"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifierParams {
    pub dbar: u16,
    pub rounds: u32,
    pub mode: VerifyMode,
    pub seed: u64,
}

impl VerifierParams {
    pub fn new(dbar: u16, rounds: u32, mode: VerifyMode, seed: u64) -> Self {
        Self {
            dbar,
            rounds,
            mode,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyError {
    /// The diagram handed to an experiment does not carry the claimed
    /// serial.
    SerialMismatch,
    /// Parameter or size failures from the mint layer.
    Mint(MintError),
    /// The state cannot enter the labeled space (dimension out of range or
    /// empty).
    State(StateError),
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::SerialMismatch => write!(f, "diagram serial differs from the claim"),
            VerifyError::Mint(e) => write!(f, "{e}"),
            VerifyError::State(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for VerifyError {}

impl From<MintError> for VerifyError {
    fn from(e: MintError) -> Self {
        VerifyError::Mint(e)
    }
}

impl From<StateError> for VerifyError {
    fn from(e: StateError) -> Self {
        VerifyError::State(e)
    }
}

/// Result of running `r` rounds of the Markov test on a state.
#[derive(Debug, Clone)]
pub struct MarkovRounds {
    /// Success probability of each round given the previous ones passed.
    pub round_probabilities: Vec<f64>,
    /// Product of the round probabilities.
    pub acceptance: f64,
    /// The surviving state, contracted back over diagrams and normalized.
    pub post_state: DiagramState,
    /// Squared weight left outside the label-uniform subspace after the
    /// final round.
    pub residual: f64,
}

/// Expand a diagram state over labels and apply `B` for `rounds` rounds.
pub fn markov_rounds(
    state: &DiagramState,
    qt: &QTable,
    rounds: u32,
) -> Result<MarkovRounds, VerifyError> {
    let mut cur: ExpandedState = expand(state, qt)?;
    let start_sq = cur.norm_sq();
    if start_sq == 0.0 {
        return Err(StateError::ZeroProbability.into());
    }
    let mut prev_sq = start_sq;
    let mut round_probabilities = Vec::with_capacity(rounds as usize);
    for _ in 0..rounds {
        cur = crate::markov::apply_b(&cur, qt);
        let sq = cur.norm_sq();
        round_probabilities.push(sq / prev_sq);
        prev_sq = sq;
    }
    let acceptance = prev_sq / start_sq;
    let scaled = if prev_sq > 0.0 {
        cur.scaled(1.0 / util::sqrt(prev_sq))
    } else {
        cur
    };
    let (post, residual) = contract(&scaled, qt)?;
    Ok(MarkovRounds {
        round_probabilities,
        acceptance,
        post_state: post.normalized(),
        residual,
    })
}

/// Exact verification report. All probabilities are computed
/// deterministically; nothing is sampled.
#[derive(Debug, Clone)]
pub struct ExactReport {
    pub step0_ok: bool,
    /// Probability that the serial measurement returns the claim.
    pub step1_probability: f64,
    /// Dimension-window mass of the serial-conditioned state. Reported
    /// without collapsing; an exact zero is a structural rejection.
    pub step2_probability: f64,
    /// Markov round probabilities on the serial-conditioned state.
    pub round_probabilities: Vec<f64>,
    /// `step1 * product(round_probabilities)`: the fixed-point acceptance.
    pub acceptance_probability: f64,
    /// Markov round probabilities a faithful sequential run experiences
    /// after also collapsing onto the dimension window.
    pub cascade_round_probabilities: Vec<f64>,
    /// `step1 * step2 * product(cascade rounds)`: probability that one
    /// sequential run accepts.
    pub cascade_probability: f64,
    pub residual: f64,
    /// `1 - fidelity(post_state, input)`.
    pub damage: f64,
    pub post_state: DiagramState,
}

impl ExactReport {
    /// The accept decision at a probability threshold: the fixed-point
    /// acceptance must clear the threshold and the dimension window must
    /// carry some mass (states confined to out-of-window dimensions are
    /// structurally rejected).
    pub fn accepted(&self, threshold: f64) -> bool {
        self.step0_ok && self.step2_probability > 0.0 && self.acceptance_probability >= threshold
    }
}

impl fmt::Display for ExactReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode: exact")?;
        writeln!(f, "step0-encoding: {}", if self.step0_ok { "ok" } else { "bad" })?;
        writeln!(f, "step1-serial-probability: {}", self.step1_probability)?;
        writeln!(f, "step2-dimension-probability: {}", self.step2_probability)?;
        write!(f, "round-probabilities:")?;
        for p in &self.round_probabilities {
            write!(f, " {}", p)?;
        }
        writeln!(f)?;
        writeln!(f, "acceptance-probability: {}", self.acceptance_probability)?;
        writeln!(f, "cascade-probability: {}", self.cascade_probability)?;
        writeln!(f, "residual: {}", self.residual)?;
        write!(f, "damage: {}", self.damage)
    }
}

/// Outcome of one sampled verification run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledReport {
    pub accepted: bool,
    pub rounds_passed: u32,
    pub failed_at: Option<FailStep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailStep {
    Serial,
    Dimension,
    Round(u32),
}

impl fmt::Display for SampledReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mode: sampled")?;
        writeln!(f, "accepted: {}", self.accepted)?;
        writeln!(f, "rounds-passed: {}", self.rounds_passed)?;
        match self.failed_at {
            None => write!(f, "failed-at: -"),
            Some(FailStep::Serial) => write!(f, "failed-at: serial"),
            Some(FailStep::Dimension) => write!(f, "failed-at: dimension"),
            Some(FailStep::Round(r)) => write!(f, "failed-at: round {}", r),
        }
    }
}

#[derive(Debug, Clone)]
pub enum VerificationReport {
    Exact(ExactReport),
    Sampled(SampledReport),
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerificationReport::Exact(r) => r.fmt(f),
            VerificationReport::Sampled(r) => r.fmt(f),
        }
    }
}

/// Deterministic exact analysis of a claimed `(state, serial)` pair.
pub fn exact_analysis(
    state: &DiagramState,
    serial: &SerialPolynomial,
    qt: &QTable,
    rounds: u32,
) -> Result<ExactReport, VerifyError> {
    let input = state.normalized();
    let (p1, conditioned) = match measure_alexander(&input, serial) {
        Ok(x) => x,
        Err(StateError::ZeroProbability) => {
            // the claimed serial never occurs; rejection is certain
            return Ok(ExactReport {
                step0_ok: true,
                step1_probability: 0.0,
                step2_probability: 0.0,
                round_probabilities: Vec::new(),
                acceptance_probability: 0.0,
                cascade_round_probabilities: Vec::new(),
                cascade_probability: 0.0,
                residual: 0.0,
                damage: 0.0,
                post_state: input,
            });
        }
        Err(e) => return Err(e.into()),
    };

    let dimension = project_dimension(&conditioned, qt.dbar()).ok();
    let p2 = dimension.as_ref().map_or(0.0, |(p, _)| *p);

    let fixed_point = markov_rounds(&conditioned, qt, rounds)?;
    let cascade = match &dimension {
        Some((_, collapsed)) => Some(markov_rounds(collapsed, qt, rounds)?),
        None => None,
    };

    let damage = 1.0 - fixed_point.post_state.fidelity(&input);
    Ok(ExactReport {
        step0_ok: true,
        step1_probability: p1,
        step2_probability: p2,
        acceptance_probability: p1 * fixed_point.acceptance,
        cascade_probability: cascade
            .as_ref()
            .map_or(0.0, |c| p1 * p2 * c.acceptance),
        cascade_round_probabilities: cascade.map_or(Vec::new(), |c| c.round_probabilities),
        round_probabilities: fixed_point.round_probabilities,
        residual: fixed_point.residual,
        damage,
        post_state: fixed_point.post_state,
    })
}

/// Draw the measurement cascade of one run from an exact analysis.
pub fn sample_cascade(report: &ExactReport, rng: &mut impl Rng) -> SampledReport {
    let mut draw = |p: f64| rng.gen::<f64>() < p;
    if !draw(report.step1_probability) {
        return SampledReport {
            accepted: false,
            rounds_passed: 0,
            failed_at: Some(FailStep::Serial),
        };
    }
    if !draw(report.step2_probability) {
        return SampledReport {
            accepted: false,
            rounds_passed: 0,
            failed_at: Some(FailStep::Dimension),
        };
    }
    for (idx, &p) in report.cascade_round_probabilities.iter().enumerate() {
        if !draw(p) {
            return SampledReport {
                accepted: false,
                rounds_passed: idx as u32,
                failed_at: Some(FailStep::Round(idx as u32 + 1)),
            };
        }
    }
    SampledReport {
        accepted: true,
        rounds_passed: report.cascade_round_probabilities.len() as u32,
        failed_at: None,
    }
}

/// Verify a state against a claimed serial.
pub fn verify_state(
    state: &DiagramState,
    serial: &SerialPolynomial,
    params: &VerifierParams,
) -> Result<VerificationReport, VerifyError> {
    let qt = QTable::build(params.dbar)?;
    let report = exact_analysis(state, serial, &qt, params.rounds)?;
    match params.mode {
        VerifyMode::Exact => Ok(VerificationReport::Exact(report)),
        VerifyMode::Sampled => {
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(params.seed);
            use rand::SeedableRng;
            Ok(VerificationReport::Sampled(sample_cascade(&report, &mut rng)))
        }
    }
}

/// Verify a bill, optionally against a serial other than the recorded one.
/// Certificate payloads verify as the basis state of their diagram.
pub fn verify_bill(
    bill: &MoneyBill,
    serial: Option<&SerialPolynomial>,
    params: &VerifierParams,
) -> Result<VerificationReport, VerifyError> {
    let state = match &bill.payload {
        Payload::Exact(state) => state.clone(),
        Payload::Certificate(g) => DiagramState::basis(g.clone()),
    };
    verify_state(&state, serial.unwrap_or(&bill.serial), params)
}

/// Acceptance curve of the single-diagram counterfeit: measure a money
/// state, keep one diagram, and replay verification on that basis state.
#[derive(Debug, Clone)]
pub struct SingleDiagramAttack {
    /// Cumulative acceptance after each round.
    pub curve: Vec<f64>,
    pub step2_probability: f64,
}

pub fn attack_single_diagram(
    g: &GridDiagram,
    serial: &SerialPolynomial,
    params: &VerifierParams,
) -> Result<SingleDiagramAttack, VerifyError> {
    if alexander(g) != *serial {
        return Err(VerifyError::SerialMismatch);
    }
    let qt = QTable::build(params.dbar)?;
    let basis = DiagramState::basis(g.clone());
    let step2_probability = project_dimension(&basis, params.dbar)
        .map(|(p, _)| p)
        .unwrap_or(0.0);
    let rounds = markov_rounds(&basis, &qt, params.rounds)?;
    let mut curve = Vec::with_capacity(rounds.round_probabilities.len());
    let mut acc = 1.0;
    for p in &rounds.round_probabilities {
        acc *= p;
        curve.push(acc);
    }
    Ok(SingleDiagramAttack {
        curve,
        step2_probability,
    })
}

/// A top-dimension diagram whose bounded move class never leaves `2 dbar`.
#[derive(Debug, Clone)]
pub struct BoundaryInstance {
    pub diagram: GridDiagram,
    pub serial: SerialPolynomial,
    pub class_size: usize,
    /// Window mass of the uniform class state; exactly zero here.
    pub step2_probability: f64,
    /// Cumulative Markov acceptance of the uniform class state per round.
    pub curve: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct BoundaryAttack {
    pub found: Option<BoundaryInstance>,
    pub scanned: usize,
}

/// Search the top dimension for a nonzero-serial diagram whose move class
/// is stuck at `2 dbar`, and measure how verification treats the uniform
/// superposition over that class.
pub fn attack_boundary_dimension(
    params: &VerifierParams,
    search_cap: usize,
    class_cap: usize,
) -> Result<BoundaryAttack, VerifyError> {
    let qt = QTable::build(params.dbar)?;
    let top = 2 * params.dbar as usize;
    let mut scanned = 0;
    for g in crate::griddiag::all_diagrams(top) {
        if scanned >= search_cap {
            break;
        }
        scanned += 1;
        let Ok(class) = moves::enumerate_class(&g, top, class_cap) else {
            continue;
        };
        if !class.iter().all(|m| m.d() == top) {
            continue;
        }
        let serial = alexander(&g);
        if serial.is_zero() {
            continue;
        }
        // uniform over the class: q is constant across it
        let amp = 1.0 / util::sqrt(class.len() as f64);
        let mut amps = alloc::collections::BTreeMap::new();
        for m in &class {
            amps.insert(m.clone(), amp);
        }
        let state = DiagramState::from_map(amps);
        let step2_probability = project_dimension(&state, params.dbar)
            .map(|(p, _)| p)
            .unwrap_or(0.0);
        let rounds = markov_rounds(&state, &qt, params.rounds)?;
        let mut curve = Vec::new();
        let mut acc = 1.0;
        for p in &rounds.round_probabilities {
            acc *= p;
            curve.push(acc);
        }
        return Ok(BoundaryAttack {
            found: Some(BoundaryInstance {
                diagram: g,
                serial,
                class_size: class.len(),
                step2_probability,
                curve,
            }),
            scanned,
        });
    }
    Ok(BoundaryAttack {
        found: None,
        scanned,
    })
}

/// Serial collision statistics across repeated mints.
#[derive(Debug, Clone)]
pub struct CollisionStats {
    pub trials: u64,
    pub distinct_serials: usize,
    /// Fraction of unordered bill pairs sharing a serial.
    pub pair_collision_frequency: f64,
    pub counts: alloc::collections::BTreeMap<SerialPolynomial, u64>,
}

impl fmt::Display for CollisionStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "trials: {}", self.trials)?;
        writeln!(f, "distinct-serials: {}", self.distinct_serials)?;
        writeln!(
            f,
            "pair-collision-frequency: {}",
            self.pair_collision_frequency
        )?;
        write!(f, "serial-counts:")?;
        for (s, n) in &self.counts {
            write!(f, " {}:{}", s, n)?;
        }
        Ok(())
    }
}

/// Mint `trials` bills and count serial collisions.
pub fn remint_collision_stats(
    params: &MintParams,
    trials: u64,
) -> Result<CollisionStats, MintError> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(params.seed);
    let mut counts: alloc::collections::BTreeMap<SerialPolynomial, u64> =
        alloc::collections::BTreeMap::new();
    match params.mode {
        MintMode::Exact => {
            let mint = ExactMint::new(*params)?;
            for _ in 0..trials {
                *counts.entry(mint.mint_with(&mut rng).serial).or_insert(0) += 1;
            }
        }
        MintMode::Classical => {
            let mint = ClassicalMint::new(*params)?;
            for _ in 0..trials {
                *counts.entry(mint.mint_with(&mut rng).serial).or_insert(0) += 1;
            }
        }
    }
    let pairs = |n: u64| n * n.saturating_sub(1) / 2;
    let colliding: u64 = counts.values().map(|&n| pairs(n)).sum();
    let total_pairs = pairs(trials);
    Ok(CollisionStats {
        trials,
        distinct_serials: counts.len(),
        pair_collision_frequency: if total_pairs == 0 {
            0.0
        } else {
            colliding as f64 / total_pairs as f64
        },
        counts,
    })
}
