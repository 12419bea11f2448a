//! Gate-activation strategies: plain training, plain training with sparse
//! random initialization, random activation through structure factors, and
//! the two layerwise ablations.
//!
//! Activation is monotone and continuous: a slot switches on with its
//! parameter at exactly zero, so the energy is unchanged at the event. For
//! random activation each slot carries a structure factor `g` drawn from
//! U(0,1) and decremented by `1/m` once at initialization and once per
//! round; the slot is active while `g <= 0`. On average a `1/m` fraction of
//! the remaining gates activates per round, and after `m` rounds everything
//! is active.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{ActivationMask, CircuitLayout, ParameterVector};

const TAU: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    /// All gates trainable from the start, all parameters random.
    Plain,
    /// All gates trainable, but only a random `floor(p/m)`-subset starts at
    /// random angles; the rest start at zero.
    PlainStar,
    /// Random activation controlled by structure factors.
    Ra,
    /// Layerwise activation appending new identity layers after the block.
    Laa,
    /// Layerwise activation prepending new identity layers before the block.
    Lpa,
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            StrategyKind::Plain => "plain",
            StrategyKind::PlainStar => "plain-star",
            StrategyKind::Ra => "ra",
            StrategyKind::Laa => "laa",
            StrategyKind::Lpa => "lpa",
        };
        write!(f, "{name}")
    }
}

/// When the next batch of gates activates within the iteration budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "trigger", rename_all = "kebab-case")]
pub enum Trigger {
    /// Split maxiter into equal stages, one per activation round.
    EqualPartition,
    /// Activate when the relative energy improvement over the trailing
    /// `window` iterations drops below `tolerance`, capped at the equal
    /// partition points so every slot is active with a full stage to spare.
    Plateau { tolerance: f64, window: usize },
}

/// A training strategy: the activation scheme, the number of rounds `m`
/// (activation fraction `1/m` per round), and the activation trigger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Strategy {
    pub kind: StrategyKind,
    pub m: usize,
    pub trigger: Trigger,
}

impl Default for Strategy {
    fn default() -> Self {
        Self { kind: StrategyKind::Plain, m: 10, trigger: Trigger::EqualPartition }
    }
}

impl Strategy {
    pub fn new(kind: StrategyKind, m: usize) -> Self {
        Self { kind, m, trigger: Trigger::EqualPartition }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::InvalidConfig("activation rounds m must be at least 1".into()));
        }
        if let Trigger::Plateau { tolerance, window } = self.trigger {
            if !(tolerance > 0.0) || window == 0 {
                return Err(Error::InvalidConfig(
                    "plateau trigger needs a positive tolerance and a nonzero window".into(),
                ));
            }
        }
        Ok(())
    }

    /// Number of activation rounds this strategy performs on a depth-`l`
    /// circuit, counting the initial one.
    pub fn total_rounds(&self, depth: usize) -> usize {
        match self.kind {
            StrategyKind::Plain | StrategyKind::PlainStar => 1,
            StrategyKind::Ra => self.m,
            StrategyKind::Laa | StrategyKind::Lpa => depth,
        }
    }
}

/// Per-trial scheduler state: the structure factors (random activation
/// only), the activation round counter, and the current mask.
#[derive(Debug, Clone, PartialEq)]
pub struct SchedulerState {
    structure_factors: Vec<f64>,
    round: usize,
    total_rounds: usize,
    mask: ActivationMask,
    n_qubits: usize,
    depth: usize,
}

impl SchedulerState {
    pub fn mask(&self) -> &ActivationMask {
        &self.mask
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn total_rounds(&self) -> usize {
        self.total_rounds
    }

    pub fn structure_factors(&self) -> &[f64] {
        &self.structure_factors
    }

    pub fn fully_active(&self) -> bool {
        self.mask.fully_active()
    }

    /// Perform one activation round. Newly activated slots keep their
    /// parameters at zero, so the energy is continuous across the event.
    /// Returns the newly activated slot indices.
    pub fn advance(&mut self, strategy: &Strategy, params: &ParameterVector) -> Result<Vec<usize>> {
        if self.mask.fully_active() || self.round >= self.total_rounds {
            return Err(Error::AlreadyFullyActive);
        }
        let mut newly = Vec::new();
        match strategy.kind {
            StrategyKind::Plain | StrategyKind::PlainStar => {
                return Err(Error::AlreadyFullyActive);
            }
            StrategyKind::Ra => {
                let decrement = 1.0 / strategy.m as f64;
                self.round += 1;
                let last_round = self.round == self.total_rounds;
                for (idx, g) in self.structure_factors.iter_mut().enumerate() {
                    *g -= decrement;
                    let becomes_active = *g <= 0.0 || last_round;
                    if becomes_active && !self.mask.is_active(idx) {
                        self.mask.activate(idx);
                        newly.push(idx);
                    }
                }
            }
            StrategyKind::Laa | StrategyKind::Lpa => {
                let layer = match strategy.kind {
                    StrategyKind::Laa => self.round,
                    _ => self.depth - 1 - self.round,
                };
                let range = 3 * self.n_qubits * layer..3 * self.n_qubits * (layer + 1);
                for idx in range {
                    if !self.mask.is_active(idx) {
                        self.mask.activate(idx);
                        newly.push(idx);
                    }
                }
                self.round += 1;
            }
        }
        for &idx in &newly {
            if params[idx] != 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "slot {idx} activated with nonzero parameter {}; the scheduler contract requires zero",
                    params[idx]
                )));
            }
        }
        Ok(newly)
    }

    #[cfg(test)]
    pub(crate) fn set_structure_factor_for_test(&mut self, idx: usize, g: f64) {
        self.structure_factors[idx] = g;
    }
}

/// Draw the initial parameters, mask, and scheduler state for a strategy.
///
/// Random draws happen in a fixed order: structure factors (random
/// activation) or subset choice (plain-star) first, then angles for the
/// initially active slots in ascending slot order. Initially active slots
/// get `theta ~ U[0, 2pi)`; everything else is exactly zero.
pub fn init_schedule(
    strategy: &Strategy,
    layout: &CircuitLayout,
    rng: &mut impl Rng,
) -> Result<(ParameterVector, ActivationMask, SchedulerState)> {
    strategy.validate()?;
    let p = layout.slot_count();
    let mut params = ParameterVector::zeros(p);
    let mut state = SchedulerState {
        structure_factors: Vec::new(),
        round: 1,
        total_rounds: strategy.total_rounds(layout.depth()),
        mask: ActivationMask::all_inactive(p),
        n_qubits: layout.n_qubits(),
        depth: layout.depth(),
    };
    match strategy.kind {
        StrategyKind::Plain => {
            state.mask = ActivationMask::all_active(p);
            for idx in 0..p {
                params[idx] = rng.gen::<f64>() * TAU;
            }
        }
        StrategyKind::PlainStar => {
            state.mask = ActivationMask::all_active(p);
            let k = p / strategy.m;
            if k == p {
                for idx in 0..p {
                    params[idx] = rng.gen::<f64>() * TAU;
                }
            } else {
                let mut chosen = rand::seq::index::sample(rng, p, k).into_vec();
                chosen.sort_unstable();
                for idx in chosen {
                    params[idx] = rng.gen::<f64>() * TAU;
                }
            }
        }
        StrategyKind::Ra => {
            let decrement = 1.0 / strategy.m as f64;
            state.structure_factors = (0..p).map(|_| rng.gen::<f64>() - decrement).collect();
            for idx in 0..p {
                if state.structure_factors[idx] <= 0.0 {
                    state.mask.activate(idx);
                }
            }
            if strategy.m == 1 {
                // a single round is the plain schedule with the same mask law
                for idx in 0..p {
                    state.mask.activate(idx);
                }
            }
            for idx in 0..p {
                if state.mask.is_active(idx) {
                    params[idx] = rng.gen::<f64>() * TAU;
                }
            }
        }
        StrategyKind::Laa | StrategyKind::Lpa => {
            let layer = if strategy.kind == StrategyKind::Laa { 0 } else { layout.depth() - 1 };
            for idx in layout.slots_of_layer(layer)? {
                state.mask.activate(idx);
                params[idx] = rng.gen::<f64>() * TAU;
            }
        }
    }
    let mask = state.mask.clone();
    Ok((params, mask, state))
}

/// Iterations at which equal-partition activation events fire:
/// `k * floor(maxiter / rounds)` for `k = 1 .. rounds-1`. The final, fully
/// active stage gets the remaining budget.
pub fn equal_partition_events(maxiter: usize, rounds: usize) -> Result<Vec<usize>> {
    if rounds == 0 {
        return Err(Error::InvalidConfig("rounds must be at least 1".into()));
    }
    if maxiter < rounds {
        return Err(Error::MaxiterTooSmall { maxiter, stages: rounds });
    }
    let stage = maxiter / rounds;
    Ok((1..rounds).map(|k| k * stage).collect())
}

/// Online activation trigger, consulted once per iteration with the energy
/// trajectory so far.
#[derive(Debug, Clone)]
pub struct ActivationPlanner {
    trigger: Trigger,
    stage: usize,
    rounds: usize,
    fired: usize,
    anchor_len: usize,
}

impl ActivationPlanner {
    pub fn new(trigger: Trigger, maxiter: usize, rounds: usize) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::InvalidConfig("rounds must be at least 1".into()));
        }
        if maxiter < rounds {
            return Err(Error::MaxiterTooSmall { maxiter, stages: rounds });
        }
        Ok(Self { trigger, stage: maxiter / rounds, rounds, fired: 0, anchor_len: 0 })
    }

    pub fn events_fired(&self) -> usize {
        self.fired
    }

    /// Whether an activation event fires at the start of iteration `iter`,
    /// given the energies of iterations `0 .. iter-1`.
    pub fn should_fire(&mut self, iter: usize, energies: &[f64]) -> bool {
        if self.fired + 1 >= self.rounds {
            return false;
        }
        let fire = match self.trigger {
            Trigger::EqualPartition => iter == (self.fired + 1) * self.stage,
            Trigger::Plateau { tolerance, window } => {
                if iter >= (self.fired + 1) * self.stage {
                    true // cap: never later than the equal-partition point
                } else {
                    let len = energies.len();
                    if len < self.anchor_len + window {
                        false
                    } else {
                        let newest = energies[len - 1];
                        let oldest = energies[len - window];
                        let improvement = (oldest - newest) / newest.abs().max(1e-12);
                        improvement < tolerance
                    }
                }
            }
        };
        if fire {
            self.fired += 1;
            self.anchor_len = energies.len();
        }
        fire
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::Backend;
    use crate::observable::Observable;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn layout_12_7() -> CircuitLayout {
        CircuitLayout::build(12, 7).unwrap()
    }

    #[test]
    fn plain_init_activates_everything_with_random_angles() {
        let layout = CircuitLayout::build(4, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let strategy = Strategy::new(StrategyKind::Plain, 10);
        let (params, mask, state) = init_schedule(&strategy, &layout, &mut rng).unwrap();
        assert!(mask.fully_active());
        assert!(params.values().iter().all(|&t| t != 0.0 && (0.0..TAU).contains(&t)));
        assert_eq!(state.total_rounds(), 1);
    }

    #[test]
    fn plain_star_randomizes_a_subset_and_keeps_all_trainable() {
        let layout = layout_12_7();
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let strategy = Strategy::new(StrategyKind::PlainStar, 10);
        let (params, mask, _) = init_schedule(&strategy, &layout, &mut rng).unwrap();
        assert!(mask.fully_active(), "plain-star keeps every slot trainable");
        let nonzero = params.values().iter().filter(|&&t| t != 0.0).count();
        assert_eq!(nonzero, 252 / 10);
    }

    #[test]
    fn plain_star_with_m_one_reduces_to_plain() {
        let layout = CircuitLayout::build(4, 2).unwrap();
        let star = Strategy::new(StrategyKind::PlainStar, 1);
        let plain = Strategy::new(StrategyKind::Plain, 1);
        let (ps, ms, _) = init_schedule(&star, &layout, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let (pp, mp, _) = init_schedule(&plain, &layout, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(ps, pp);
        assert_eq!(ms, mp);
    }

    #[test]
    fn ra_active_count_is_binomial_around_p_over_m() {
        let layout = layout_12_7();
        let strategy = Strategy::new(StrategyKind::Ra, 10);
        let trials = 10_000usize;
        let mut total = 0usize;
        for seed in 0..trials as u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (_, mask, _) = init_schedule(&strategy, &layout, &mut rng).unwrap();
            total += mask.active_count();
        }
        let mean = total as f64 / trials as f64;
        // Binomial(252, 0.1): sigma of the mean over 10^4 seeds
        let sigma = (252.0 * 0.1 * 0.9 / trials as f64).sqrt();
        assert!((mean - 25.2).abs() < 3.0 * sigma, "mean {mean}, tolerance {}", 3.0 * sigma);
    }

    #[test]
    fn ra_inactive_slots_have_zero_parameters() {
        let layout = CircuitLayout::build(6, 2).unwrap();
        let strategy = Strategy::new(StrategyKind::Ra, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let (params, mask, state) = init_schedule(&strategy, &layout, &mut rng).unwrap();
        for idx in 0..layout.slot_count() {
            assert_eq!(mask.is_active(idx), state.structure_factors()[idx] <= 0.0);
            if !mask.is_active(idx) {
                assert_eq!(params[idx], 0.0);
            }
        }
        assert_eq!(state.round(), 1);
    }

    #[test]
    fn laa_and_lpa_initial_blocks() {
        let layout = CircuitLayout::build(4, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(54);
        let (params, mask, _) =
            init_schedule(&Strategy::new(StrategyKind::Laa, 10), &layout, &mut rng).unwrap();
        assert_eq!(mask.active_count(), 12, "exactly 3n slots active");
        assert!(layout.slots_of_layer(0).unwrap().all(|idx| mask.is_active(idx)));
        assert!(params.values()[..12].iter().all(|&t| t != 0.0));
        assert!(params.values()[12..].iter().all(|&t| t == 0.0));

        let (_, mask, _) =
            init_schedule(&Strategy::new(StrategyKind::Lpa, 10), &layout, &mut rng).unwrap();
        assert!(layout.slots_of_layer(2).unwrap().all(|idx| mask.is_active(idx)));
        assert_eq!(mask.active_count(), 12);
    }

    #[test]
    fn ra_structure_factor_arithmetic() {
        let layout = CircuitLayout::build(4, 1).unwrap();
        let strategy = Strategy::new(StrategyKind::Ra, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let (params, _, mut state) = init_schedule(&strategy, &layout, &mut rng).unwrap();
        // force a slot into a known inactive configuration
        let idx = 3;
        state.set_structure_factor_for_test(idx, 0.55);
        let mut zeroed = params.clone();
        zeroed[idx] = 0.0;
        for advance_count in 1..=6 {
            let newly = state.advance(&strategy, &zeroed).unwrap();
            let active = state.mask().is_active(idx);
            if advance_count <= 5 {
                assert!(!active, "g = {} should still be positive", state.structure_factors()[idx]);
            } else {
                assert!(active, "g = {} crossed zero", state.structure_factors()[idx]);
                assert!(newly.contains(&idx));
            }
        }
    }

    #[test]
    fn ra_covers_everything_after_m_rounds_for_every_seed() {
        let layout = CircuitLayout::build(4, 2).unwrap();
        let strategy = Strategy::new(StrategyKind::Ra, 7);
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (params, _, mut state) = init_schedule(&strategy, &layout, &mut rng).unwrap();
            for _ in 0..6 {
                if state.fully_active() {
                    break;
                }
                state.advance(&strategy, &params).unwrap();
            }
            assert!(state.fully_active(), "seed {seed} left slots inactive after m rounds");
        }
    }

    #[test]
    fn masks_grow_monotonically() {
        let layout = CircuitLayout::build(6, 3).unwrap();
        for kind in [StrategyKind::Ra, StrategyKind::Laa, StrategyKind::Lpa] {
            let strategy = Strategy::new(kind, 4);
            let mut rng = ChaCha8Rng::seed_from_u64(56);
            let (params, mut mask, mut state) = init_schedule(&strategy, &layout, &mut rng).unwrap();
            while !state.fully_active() {
                state.advance(&strategy, &params).unwrap();
                for idx in 0..layout.slot_count() {
                    assert!(
                        !mask.is_active(idx) || state.mask().is_active(idx),
                        "an active slot was deactivated"
                    );
                }
                mask = state.mask().clone();
            }
        }
    }

    #[test]
    fn layerwise_blocks_stay_contiguous() {
        let layout = CircuitLayout::build(4, 4).unwrap();
        for (kind, expect_prefix) in [(StrategyKind::Laa, true), (StrategyKind::Lpa, false)] {
            let strategy = Strategy::new(kind, 10);
            let mut rng = ChaCha8Rng::seed_from_u64(57);
            let (params, _, mut state) = init_schedule(&strategy, &layout, &mut rng).unwrap();
            loop {
                let active_layers: Vec<usize> = (0..4)
                    .filter(|&k| layout.slots_of_layer(k).unwrap().all(|idx| state.mask().is_active(idx)))
                    .collect();
                let r = state.round();
                if expect_prefix {
                    assert_eq!(active_layers, (0..r).collect::<Vec<_>>());
                } else {
                    assert_eq!(active_layers, (4 - r..4).collect::<Vec<_>>());
                }
                if state.fully_active() {
                    break;
                }
                state.advance(&strategy, &params).unwrap();
            }
        }
    }

    #[test]
    fn advance_after_full_activation_is_flagged() {
        let layout = CircuitLayout::build(4, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(58);
        let strategy = Strategy::new(StrategyKind::Plain, 10);
        let (params, _, mut state) = init_schedule(&strategy, &layout, &mut rng).unwrap();
        assert!(matches!(state.advance(&strategy, &params), Err(Error::AlreadyFullyActive)));

        let strategy = Strategy::new(StrategyKind::Ra, 2);
        let (params, _, mut state) = init_schedule(&strategy, &layout, &mut rng).unwrap();
        state.advance(&strategy, &params).unwrap();
        assert!(state.fully_active());
        assert!(matches!(state.advance(&strategy, &params), Err(Error::AlreadyFullyActive)));
    }

    #[test]
    fn energy_is_continuous_across_activation_events() {
        let layout = CircuitLayout::build(6, 3).unwrap();
        let obs = Observable::xxz_chain(6, 1.0).unwrap();
        for kind in [StrategyKind::Ra, StrategyKind::Laa, StrategyKind::Lpa] {
            let strategy = Strategy::new(kind, 5);
            let mut rng = ChaCha8Rng::seed_from_u64(59);
            let (params, _, mut state) = init_schedule(&strategy, &layout, &mut rng).unwrap();
            while !state.fully_active() {
                let before = Backend::Exact.energy(&layout, &params, state.mask(), &obs).unwrap();
                state.advance(&strategy, &params).unwrap();
                let after = Backend::Exact.energy(&layout, &params, state.mask(), &obs).unwrap();
                assert!(
                    (before - after).abs() < 1e-12,
                    "{kind:?}: activation changed the energy by {}",
                    (before - after).abs()
                );
            }
        }
    }

    #[test]
    fn equal_partition_reference_points() {
        assert_eq!(
            equal_partition_events(5000, 10).unwrap(),
            vec![500, 1000, 1500, 2000, 2500, 3000, 3500, 4000, 4500]
        );
        assert_eq!(equal_partition_events(100, 1).unwrap(), Vec::<usize>::new());
        assert!(matches!(equal_partition_events(5, 10), Err(Error::MaxiterTooSmall { .. })));
    }

    #[test]
    fn equal_partition_planner_fires_at_the_partition_points() {
        let mut planner = ActivationPlanner::new(Trigger::EqualPartition, 100, 4).unwrap();
        let mut events = Vec::new();
        let mut energies = Vec::new();
        for iter in 0..100 {
            if planner.should_fire(iter, &energies) {
                events.push(iter);
            }
            energies.push(-1.0);
        }
        assert_eq!(events, vec![25, 50, 75]);
    }

    #[test]
    fn plateau_planner_fires_on_a_flat_trajectory() {
        let trigger = Trigger::Plateau { tolerance: 1e-6, window: 50 };
        let mut planner = ActivationPlanner::new(trigger, 10_000, 10).unwrap();
        let mut energies = Vec::new();
        let mut first = None;
        for iter in 0..200 {
            if planner.should_fire(iter, &energies) {
                first = Some(iter);
                break;
            }
            energies.push(-3.0);
        }
        assert_eq!(first, Some(50));
    }

    #[test]
    fn plateau_planner_respects_the_cap() {
        // steadily improving energies never plateau; the cap still fires
        let trigger = Trigger::Plateau { tolerance: 1e-6, window: 10 };
        let mut planner = ActivationPlanner::new(trigger, 100, 4).unwrap();
        let mut energies = Vec::new();
        let mut events = Vec::new();
        for iter in 0..100 {
            if planner.should_fire(iter, &energies) {
                events.push(iter);
            }
            energies.push(-(iter as f64));
        }
        assert_eq!(events, vec![25, 50, 75]);
    }

    #[test]
    fn strategy_validation() {
        assert!(Strategy::new(StrategyKind::Ra, 0).validate().is_err());
        assert!(Strategy::new(StrategyKind::Ra, 10).validate().is_ok());
        let bad = Strategy {
            kind: StrategyKind::Ra,
            m: 10,
            trigger: Trigger::Plateau { tolerance: 0.0, window: 5 },
        };
        assert!(bad.validate().is_err());
    }
}
