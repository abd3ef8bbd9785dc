//! Backward-induction solver for the adversary's value function `J(s, v, t)`
//! and the compute/idle policy.
//!
//! The lattice has three axes:
//! * time `t_k = t0 + k·dt` for `k = 0..=N`, with `t_N` the honest deadline;
//! * remaining work `s_j = max(T − j·δ·dt, 0)`, so one step of computing moves
//!   `j → j + 1` exactly and the last index is the completed state `s = 0`;
//! * reward `v_i`, uniform on `[0, reward_max]`.
//!
//! Each step compares `J^idle = E[J(s, V', t+dt)]` with
//! `J^comp = −c·dt + E[J(s − δ·dt, V', t+dt)]`; the expectation over the
//! reward transition uses Gauss–Hermite quadrature of the exact OU law,
//! reflected at zero and interpolated linearly on the reward axis. Completing
//! exactly at the deadline counts as failure.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::fmt::full;
use crate::model::{ou_transition, RewardModel, Scenario};
use crate::quadrature::GaussHermite;

/// Relative slack when checking that `dt` divides the horizon.
/// Relative gap below which compute and idle count as tied; ties compute.
pub const TIE_TOLERANCE: f64 = 1e-9;
const DIVISIBILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Seconds per decision epoch.
    pub time_step: f64,
    pub reward_points: usize,
    /// Upper end of the reward axis in USD; `None` picks
    /// `10·mean + 5·std` of the model's long-run level.
    pub reward_max: Option<f64>,
    pub quadrature_nodes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            time_step: 1.0,
            reward_points: 101,
            reward_max: None,
            quadrature_nodes: 7,
        }
    }
}

impl GridSpec {
    pub fn resolved_reward_max(&self, reward: &RewardModel) -> Result<f64> {
        if let Some(vmax) = self.reward_max {
            return Ok(vmax);
        }
        let (mean, std) = reward.stationary_moments();
        let vmax = 10.0 * mean + 5.0 * std;
        if !vmax.is_finite() {
            return Err(Error::Grid(
                "reward process has no stationary level; set reward_max explicitly".into(),
            ));
        }
        Ok(vmax)
    }
}

/// Coordinates of every lattice point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub work: Vec<f64>,
    pub rewards: Vec<f64>,
    pub seed_time: f64,
    pub time_step: f64,
    /// Number of time slices, `N + 1`.
    pub time_slices: usize,
}

impl Lattice {
    fn build(scenario: &Scenario, grid: &GridSpec) -> Result<Self> {
        let env = &scenario.env;
        let dt = grid.time_step;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Grid("time_step must be > 0".into()));
        }
        if grid.reward_points < 2 {
            return Err(Error::Grid("reward_points must be >= 2".into()));
        }
        if grid.quadrature_nodes < 1 {
            return Err(Error::Grid("quadrature_nodes must be >= 1".into()));
        }
        let horizon = env.honest_delay;
        let stride = env.speedup * dt;
        if stride > horizon {
            return Err(Error::Grid(format!(
                "one compute step covers {stride} s of work, more than the delay {horizon} s"
            )));
        }
        let steps = horizon / dt;
        let n = steps.round();
        if (steps - n).abs() > DIVISIBILITY_TOLERANCE * steps.max(1.0) {
            return Err(Error::Grid(format!(
                "time_step {dt} does not divide the delay {horizon}"
            )));
        }
        let work_steps = horizon / stride;
        let last = if (work_steps - work_steps.round()).abs()
            <= DIVISIBILITY_TOLERANCE * work_steps.max(1.0)
        {
            work_steps.round()
        } else {
            work_steps.ceil()
        } as usize;
        let work = (0..=last)
            .map(|j| {
                if j == last {
                    0.0
                } else {
                    (horizon - j as f64 * stride).max(0.0)
                }
            })
            .collect();

        let vmax = grid.resolved_reward_max(&scenario.reward)?;
        if !(vmax >= 0.0) || !vmax.is_finite() {
            return Err(Error::Grid("reward_max must be finite and >= 0".into()));
        }
        let p = grid.reward_points;
        let rewards = (0..p).map(|i| vmax * i as f64 / (p - 1) as f64).collect();
        Ok(Self {
            work,
            rewards,
            seed_time: env.seed_time,
            time_step: dt,
            time_slices: n as usize + 1,
        })
    }

    pub fn work_points(&self) -> usize {
        self.work.len()
    }

    pub fn reward_points(&self) -> usize {
        self.rewards.len()
    }

    /// Index of the completed state `s = 0`.
    pub fn done_index(&self) -> usize {
        self.work.len() - 1
    }

    /// Index of the deadline slice.
    pub fn deadline_index(&self) -> usize {
        self.time_slices - 1
    }

    pub fn time(&self, k: usize) -> f64 {
        self.seed_time + k as f64 * self.time_step
    }

    pub fn reward_max(&self) -> f64 {
        *self.rewards.last().expect("at least two reward points")
    }

    fn reward_spacing(&self) -> f64 {
        self.reward_max() / (self.rewards.len() - 1) as f64
    }

    #[inline]
    pub(crate) fn index(&self, j: usize, i: usize, k: usize) -> usize {
        (k * self.work.len() + j) * self.rewards.len() + i
    }

    fn slice_len(&self) -> usize {
        self.work.len() * self.rewards.len()
    }

    /// Lower interpolation node and weight of the upper node for reward `v`,
    /// clamped to the axis.
    pub(crate) fn locate(&self, v: f64) -> (usize, f64) {
        let h = self.reward_spacing();
        let last = self.rewards.len() - 1;
        if !(h > 0.0) || v <= 0.0 {
            return (0, 0.0);
        }
        let x = v / h;
        if x >= last as f64 {
            return (last - 1, 1.0);
        }
        let lo = x.floor() as usize;
        (lo, x - lo as f64)
    }

    fn interpolate(&self, row: &[f64], v: f64) -> f64 {
        let (lo, w) = self.locate(v);
        if w == 0.0 {
            row[lo]
        } else {
            row[lo] * (1.0 - w) + row[lo + 1] * w
        }
    }
}

/// Sparse reward-transition operator on the reward axis.
enum Transition {
    Identity,
    Weights(Vec<Vec<(usize, f64)>>),
}

impl Transition {
    fn build(reward: &RewardModel, lattice: &Lattice, nodes: usize) -> Result<Self> {
        match reward {
            RewardModel::Constant { .. } => Ok(Transition::Identity),
            RewardModel::MarkovOu {
                long_run_mean,
                reversion_rate,
                volatility,
                ..
            } => {
                let rule = GaussHermite::new(nodes);
                let rows = lattice
                    .rewards
                    .iter()
                    .map(|&v| {
                        let (mean, sd) = ou_transition(
                            v,
                            *long_run_mean,
                            *reversion_rate,
                            *volatility,
                            lattice.time_step,
                        );
                        let mut row: Vec<(usize, f64)> = Vec::new();
                        let mut add = |idx: usize, w: f64| {
                            if w == 0.0 {
                                return;
                            }
                            match row.iter_mut().find(|(j, _)| *j == idx) {
                                Some(e) => e.1 += w,
                                None => row.push((idx, w)),
                            }
                        };
                        for (z, w) in rule.nodes.iter().zip(&rule.weights) {
                            let next = (mean + sd * z).abs();
                            let (lo, frac) = lattice.locate(next);
                            add(lo, w * (1.0 - frac));
                            add(lo + 1, w * frac);
                        }
                        row.sort_by_key(|e| e.0);
                        row
                    })
                    .collect();
                Ok(Transition::Weights(rows))
            }
            other => Err(unsupported(other)),
        }
    }

    #[inline]
    fn expect(&self, row: &[f64], i: usize) -> f64 {
        match self {
            Transition::Identity => row[i],
            Transition::Weights(w) => w[i].iter().map(|(j, p)| p * row[*j]).sum(),
        }
    }
}

fn unsupported(model: &RewardModel) -> Error {
    Error::UnsupportedReward {
        kind: model.kind(),
        supported: "constant, markov_ou",
    }
}

/// Solved `J` over the lattice, in USD.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueGrid {
    pub lattice: Lattice,
    pub grid: GridSpec,
    pub scenario: Scenario,
    values: Vec<f64>,
}

impl ValueGrid {
    pub fn get(&self, j: usize, i: usize, k: usize) -> f64 {
        self.values[self.lattice.index(j, i, k)]
    }

    /// `J(T, v, t0)`, interpolated on the reward axis.
    pub fn initial_value(&self, v: f64) -> f64 {
        let n = self.lattice.reward_points();
        self.lattice.interpolate(&self.values[..n], v)
    }

    /// `J(T, v0, t0)` at the scenario's initial reward level.
    pub fn value_at_start(&self) -> f64 {
        self.initial_value(self.scenario.reward.initial_level())
    }

    /// Tolerance for the secure verdict: one time step of cost, `c·dt`.
    pub fn security_tolerance(&self) -> f64 {
        self.scenario.env.cost_rate * self.lattice.time_step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Compute/idle decision per lattice cell; `true` marks the acceptance region.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyGrid {
    pub lattice: Lattice,
    pub grid: GridSpec,
    pub scenario: Scenario,
    compute: Vec<bool>,
}

impl PolicyGrid {
    pub fn compute(&self, j: usize, i: usize, k: usize) -> bool {
        self.compute[self.lattice.index(j, i, k)]
    }

    /// Overwrites one cell. Intended for tests of the structure checker.
    pub fn set_compute(&mut self, j: usize, i: usize, k: usize, value: bool) {
        let idx = self.lattice.index(j, i, k);
        self.compute[idx] = value;
    }
}

/// Solves the stopping problem with the default execution strategy.
pub fn solve(scenario: &Scenario, grid: &GridSpec) -> Result<(ValueGrid, PolicyGrid)> {
    solve_with(scenario, grid, Execution::default())
}

pub fn solve_with(
    scenario: &Scenario,
    grid: &GridSpec,
    exec: Execution,
) -> Result<(ValueGrid, PolicyGrid)> {
    scenario.validate()?;
    if !scenario.reward.is_markov() {
        return Err(unsupported(&scenario.reward));
    }
    let lattice = Lattice::build(scenario, grid)?;
    let transition = Transition::build(&scenario.reward, &lattice, grid.quadrature_nodes)?;
    let step_cost = scenario.env.cost_rate * lattice.time_step;

    let nv = lattice.reward_points();
    let ns = lattice.work_points();
    let done = lattice.done_index();
    let slice = lattice.slice_len();
    let mut values = vec![0.0; slice * lattice.time_slices];
    let mut compute = vec![false; slice * lattice.time_slices];

    // the deadline slice stays zero/idle; walk back from N − 1
    for k in (0..lattice.deadline_index()).rev() {
        let (head, tail) = values.split_at_mut((k + 1) * slice);
        let next = &tail[..slice];
        let rows = map_indexed(exec, ns, |j| {
            let mut row = Vec::with_capacity(nv);
            if j == done {
                row.extend(lattice.rewards.iter().map(|&v| (v, true)));
                return row;
            }
            let stay = &next[j * nv..(j + 1) * nv];
            let advance = &next[(j + 1) * nv..(j + 2) * nv];
            for i in 0..nv {
                let idle = transition.expect(stay, i);
                let comp = -step_cost + transition.expect(advance, i);
                let act = comp >= idle - TIE_TOLERANCE * (1.0 + idle.abs());
                row.push((comp.max(idle), act));
            }
            row
        });
        let current = &mut head[k * slice..];
        let flags = &mut compute[k * slice..(k + 1) * slice];
        for (j, row) in rows.into_iter().enumerate() {
            for (i, (value, act)) in row.into_iter().enumerate() {
                current[j * nv + i] = value;
                flags[j * nv + i] = act;
            }
        }
    }

    Ok((
        ValueGrid {
            lattice: lattice.clone(),
            grid: *grid,
            scenario: scenario.clone(),
            values,
        },
        PolicyGrid {
            lattice,
            grid: *grid,
            scenario: scenario.clone(),
            compute,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardVerdict {
    pub reward: f64,
    pub value: f64,
    pub secure: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityVerdicts {
    /// `J ≤ tolerance` counts as secure.
    pub tolerance: f64,
    pub levels: Vec<RewardVerdict>,
    /// Smallest grid reward at which the round becomes insecure.
    pub first_insecure_reward: Option<f64>,
}

/// Secure/insecure verdict at the initial state for every grid reward level.
pub fn initial_security_verdict(vg: &ValueGrid) -> SecurityVerdicts {
    let tolerance = vg.security_tolerance();
    let levels: Vec<RewardVerdict> = vg
        .lattice
        .rewards
        .iter()
        .enumerate()
        .map(|(i, &reward)| {
            let value = vg.get(0, i, 0);
            RewardVerdict {
                reward,
                value,
                secure: value <= tolerance,
            }
        })
        .collect();
    let first_insecure_reward = levels.iter().find(|l| !l.secure).map(|l| l.reward);
    SecurityVerdicts {
        tolerance,
        levels,
        first_insecure_reward,
    }
}

/// Adjacent reward levels where computing is optimal below but not above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotonicityViolation {
    pub work_index: usize,
    pub time_index: usize,
    /// Index of the computing cell; the idle cell is the next one up.
    pub reward_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    pub slices_checked: usize,
    pub violations: Vec<MonotonicityViolation>,
}

impl StructureReport {
    pub fn is_monotone(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Scans every `(s, t)` slice for a compute cell followed by an idle cell at
/// the next higher reward level.
pub fn check_threshold_structure(pg: &PolicyGrid) -> StructureReport {
    let l = &pg.lattice;
    let mut violations = Vec::new();
    for k in 0..l.time_slices {
        for j in 0..l.work_points() {
            for i in 0..l.reward_points() - 1 {
                if pg.compute(j, i, k) && !pg.compute(j, i + 1, k) {
                    violations.push(MonotonicityViolation {
                        work_index: j,
                        time_index: k,
                        reward_index: i,
                    });
                }
            }
        }
    }
    StructureReport {
        slices_checked: l.time_slices * l.work_points(),
        violations,
    }
}

/// Minimal reward at which computing becomes optimal, per `(s, t)`.
/// `f64::INFINITY` where no grid reward triggers computing.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionBoundary {
    pub lattice: Lattice,
    thresholds: Vec<f64>,
}

impl DecisionBoundary {
    pub fn threshold(&self, j: usize, k: usize) -> f64 {
        self.thresholds[k * self.lattice.work_points() + j]
    }
}

pub fn extract_decision_boundary(pg: &PolicyGrid) -> Result<DecisionBoundary> {
    let report = check_threshold_structure(pg);
    if !report.is_monotone() {
        return Err(Error::NonMonotonePolicy(report.violations.len()));
    }
    let l = &pg.lattice;
    let mut thresholds = Vec::with_capacity(l.time_slices * l.work_points());
    for k in 0..l.time_slices {
        for j in 0..l.work_points() {
            let first = (0..l.reward_points()).find(|&i| pg.compute(j, i, k));
            thresholds.push(first.map_or(f64::INFINITY, |i| l.rewards[i]));
        }
    }
    Ok(DecisionBoundary {
        lattice: pg.lattice.clone(),
        thresholds,
    })
}

/// Writes `s, v, t, J, compute` rows, keeping every `stride`-th time slice and
/// work level (the completed state and both time ends are always kept).
pub fn write_value_csv<W: Write>(
    out: &mut W,
    vg: &ValueGrid,
    pg: &PolicyGrid,
    stride: usize,
) -> io::Result<()> {
    let l = &vg.lattice;
    let stride = stride.max(1);
    writeln!(out, "s(s),v(USD),t(s),J(USD),compute(flag)")?;
    for k in (0..l.time_slices).filter(|k| k % stride == 0 || *k == l.deadline_index()) {
        for j in (0..l.work_points()).filter(|j| j % stride == 0 || *j == l.done_index()) {
            for (i, v) in l.rewards.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    full(l.work[j]),
                    full(*v),
                    full(l.time(k)),
                    full(vg.get(j, i, k)),
                    u8::from(pg.compute(j, i, k))
                )?;
            }
        }
    }
    Ok(())
}

/// Writes `s, t, v*` rows for every lattice point; `inf` marks no threshold.
pub fn write_boundary_csv<W: Write>(out: &mut W, boundary: &DecisionBoundary) -> io::Result<()> {
    let l = &boundary.lattice;
    writeln!(out, "s(s),t(s),v_star(USD)")?;
    for k in 0..l.time_slices {
        for j in 0..l.work_points() {
            writeln!(
                out,
                "{},{},{}",
                full(l.work[j]),
                full(l.time(k)),
                full(boundary.threshold(j, k))
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EconomicEnvironment;

    fn constant(delay: f64, v: f64) -> Scenario {
        Scenario::baseline(delay, v)
    }

    fn ou(delay: f64) -> Scenario {
        Scenario::new(
            EconomicEnvironment::new(3.0, 0.05, delay),
            RewardModel::MarkovOu {
                initial: 10.0,
                long_run_mean: 10.0,
                reversion_rate: 0.1,
                volatility: 2.0,
            },
        )
    }

    /// Deterministic control with strict completion before the deadline.
    fn analytic(s: f64, v: f64, t: f64, env: &EconomicEnvironment) -> f64 {
        if s / env.speedup < env.honest_deadline() - t {
            (v - env.cost_rate * s / env.speedup).max(0.0)
        } else {
            0.0
        }
    }

    #[test]
    fn lattice_axes() {
        let l = Lattice::build(&constant(600.0, 10.0), &GridSpec::default()).unwrap();
        assert_eq!(l.work_points(), 201);
        assert_eq!(l.work[0], 600.0);
        assert_eq!(l.work[199], 3.0);
        assert_eq!(l.time_slices, 601);
        assert_eq!(l.reward_max(), 100.0);
        assert_eq!(l.rewards[10], 10.0);
    }

    #[test]
    fn ragged_work_axis_ends_at_zero() {
        let grid = GridSpec {
            time_step: 1.0,
            ..GridSpec::default()
        };
        let l = Lattice::build(&constant(10.0, 10.0), &grid).unwrap();
        assert_eq!(l.work, [10.0, 7.0, 4.0, 1.0, 0.0]);
    }

    #[test]
    fn rejects_coarse_or_misaligned_grids() {
        let grid = GridSpec {
            time_step: 300.0,
            ..GridSpec::default()
        };
        assert!(matches!(
            solve(&constant(600.0, 10.0), &grid),
            Err(Error::Grid(_))
        ));
        let grid = GridSpec {
            time_step: 7.0,
            ..GridSpec::default()
        };
        assert!(matches!(
            solve(&constant(600.0, 10.0), &grid),
            Err(Error::Grid(_))
        ));
    }

    #[test]
    fn rejects_non_markov_rewards() {
        let mut s = constant(600.0, 10.0);
        s.reward = RewardModel::Empirical {
            samples: vec![1.0, 2.0],
        };
        let err = solve(&s, &GridSpec::default()).unwrap_err();
        assert!(err.to_string().contains("constant, markov_ou"));
    }

    #[test]
    fn break_even_delay() {
        let (vg, _) = solve(&constant(600.0, 10.0), &GridSpec::default()).unwrap();
        assert!(vg.value_at_start().abs() <= vg.security_tolerance());
    }

    #[test]
    fn long_delay_floors_at_zero() {
        let (vg, pg) = solve(&constant(1200.0, 10.0), &GridSpec::default()).unwrap();
        assert_eq!(vg.value_at_start(), 0.0);
        assert!(!pg.compute(0, 10, 0));
        assert!(vg.values().iter().all(|j| *j >= 0.0));
    }

    #[test]
    fn constant_reward_matches_closed_form() {
        let s = constant(60.0, 10.0);
        let (vg, _) = solve(&s, &GridSpec::default()).unwrap();
        let l = &vg.lattice;
        let bound = s.env.cost_rate * l.time_step + l.reward_spacing();
        for k in 0..l.time_slices {
            for j in 0..l.work_points() {
                for (i, v) in l.rewards.iter().enumerate() {
                    let want = analytic(l.work[j], *v, l.time(k), &s.env);
                    let got = vg.get(j, i, k);
                    assert!(
                        (got - want).abs() <= bound,
                        "j={j} i={i} k={k}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn boundary_conditions_hold() {
        let (vg, pg) = solve(&ou(60.0), &GridSpec::default()).unwrap();
        let l = &vg.lattice;
        for k in 0..l.deadline_index() {
            for (i, v) in l.rewards.iter().enumerate() {
                assert_eq!(vg.get(l.done_index(), i, k), *v);
            }
        }
        let n = l.deadline_index();
        for j in 0..l.work_points() {
            for i in 0..l.reward_points() {
                assert_eq!(vg.get(j, i, n), 0.0);
                assert!(!pg.compute(j, i, n));
            }
        }
    }

    #[test]
    fn value_is_monotone_and_bounded() {
        let (vg, _) = solve(&ou(60.0), &GridSpec::default()).unwrap();
        let l = &vg.lattice;
        let vmax = l.reward_max();
        for k in 0..l.time_slices {
            for j in 0..l.work_points() {
                for i in 0..l.reward_points() {
                    let x = vg.get(j, i, k);
                    assert!((0.0..=vmax).contains(&x));
                    if i + 1 < l.reward_points() {
                        assert!(vg.get(j, i + 1, k) >= x - 1e-12);
                    }
                    // the done row pays the current level and forgoes waiting
                    if j + 1 < l.done_index() {
                        assert!(vg.get(j + 1, i, k) >= x - 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn never_computes_when_infeasible() {
        for s in [constant(60.0, 10.0), ou(60.0)] {
            let (_, pg) = solve(&s, &GridSpec::default()).unwrap();
            let l = &pg.lattice;
            let deadline = s.env.honest_deadline();
            for k in 0..l.time_slices {
                for j in 0..l.work_points() {
                    if l.work[j] / s.env.speedup > deadline - l.time(k) {
                        assert!((0..l.reward_points()).all(|i| !pg.compute(j, i, k)));
                    }
                }
            }
        }
    }

    #[test]
    fn verdict_flips_at_break_even_reward() {
        let (vg, _) = solve(&constant(600.0, 10.0), &GridSpec::default()).unwrap();
        let verdicts = initial_security_verdict(&vg);
        let flip = verdicts.first_insecure_reward.unwrap();
        assert!((flip - 10.0).abs() <= 1.0 + 1e-12);
        assert!(verdicts
            .levels
            .iter()
            .take_while(|l| l.reward <= 10.0)
            .all(|l| l.secure));
    }

    #[test]
    fn short_delay_is_insecure_for_positive_rewards() {
        // smallest solvable delay: one compute step
        let (vg, _) = solve(&constant(3.0, 10.0), &GridSpec::default()).unwrap();
        let verdicts = initial_security_verdict(&vg);
        for l in &verdicts.levels {
            assert_eq!(l.secure, l.reward <= 0.1 + 1e-12, "{l:?}");
        }
    }

    #[test]
    fn zero_reward_axis_is_secure() {
        let (vg, _) = solve(&constant(600.0, 0.0), &GridSpec::default()).unwrap();
        let verdicts = initial_security_verdict(&vg);
        assert!(verdicts.levels.iter().all(|l| l.secure));
        assert_eq!(verdicts.first_insecure_reward, None);
    }

    #[test]
    fn structure_checks() {
        let (_, pg) = solve(&constant(60.0, 10.0), &GridSpec::default()).unwrap();
        assert!(check_threshold_structure(&pg).is_monotone());
        let (_, mut pg) = solve(&ou(60.0), &GridSpec::default()).unwrap();
        assert!(check_threshold_structure(&pg).is_monotone());
        // first time slice, start state: compute region is a half-line
        let top = pg.lattice.reward_points() - 1;
        assert!(pg.compute(0, top, 0));
        pg.set_compute(0, top - 1, 0, false);
        let report = check_threshold_structure(&pg);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(
            report.violations[0],
            MonotonicityViolation {
                work_index: 0,
                time_index: 0,
                reward_index: top - 2
            }
        );
        assert!(matches!(
            extract_decision_boundary(&pg),
            Err(Error::NonMonotonePolicy(1))
        ));
    }

    #[test]
    fn constant_boundary_is_cost_of_remaining_work() {
        let s = constant(60.0, 10.0);
        let (_, pg) = solve(&s, &GridSpec::default()).unwrap();
        let b = extract_decision_boundary(&pg).unwrap();
        let l = &b.lattice;
        let h = l.reward_spacing();
        for k in 0..l.time_slices {
            for j in 0..l.work_points() {
                let vs = b.threshold(j, k);
                let feasible = l.work[j] / s.env.speedup < s.env.honest_deadline() - l.time(k);
                if k == l.deadline_index() || !feasible {
                    assert_eq!(vs, f64::INFINITY);
                } else if j == l.done_index() {
                    assert_eq!(vs, 0.0);
                } else {
                    let want = s.env.cost_rate * l.work[j] / s.env.speedup;
                    assert!(
                        vs >= want - 1e-9 && vs <= want + h + 1e-9,
                        "j={j} k={k}: {vs}"
                    );
                }
            }
        }
    }

    #[test]
    fn strategies_agree_bitwise() {
        let s = ou(30.0);
        let (a, pa) = solve_with(&s, &GridSpec::default(), Execution::Sequential).unwrap();
        let (b, pb) = solve_with(&s, &GridSpec::default(), Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(pa, pb);
    }

    #[test]
    fn refinement_converges() {
        let mut prev: Option<f64> = None;
        let mut prev_change: Option<f64> = None;
        for level in 0..3 {
            let grid = GridSpec {
                time_step: 2.0 / f64::from(1 << level),
                reward_points: 51 * (1 << level) - ((1 << level) - 1),
                reward_max: Some(40.0),
                quadrature_nodes: 7,
            };
            let (vg, _) = solve(&ou(30.0), &grid).unwrap();
            let j = vg.value_at_start();
            if let Some(p) = prev {
                let change = (j - p).abs();
                if let Some(pc) = prev_change {
                    assert!(change < 2.0 * pc, "{change} vs {pc}");
                }
                prev_change = Some(change);
            }
            prev = Some(j);
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let (vg, pg) = solve(&constant(6.0, 10.0), &GridSpec::default()).unwrap();
        let mut buf = Vec::new();
        write_value_csv(&mut buf, &vg, &pg, 1).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("s(s),v(USD),t(s),J(USD),compute(flag)"));
        assert_eq!(lines.count(), 3 * 7 * 101);
        let b = extract_decision_boundary(&pg).unwrap();
        let mut buf = Vec::new();
        write_boundary_csv(&mut buf, &b).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains(",inf\n"));
    }
}
