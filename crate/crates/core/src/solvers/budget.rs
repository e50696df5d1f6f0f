use std::time::{Duration, Instant};

use crate::error::Result;
use crate::model::{self, EvaluationCounter, Instance, PackingPlan, Solution, Tour};

/// Evaluation budget of one epoch, with best-so-far tracking.
///
/// Every objective evaluation made through the budget counts as one unit. Infeasible
/// candidates that a solver discards without evaluating can still be charged with
/// [`Budget::charge_discarded`]. The optional wall-clock cap only truncates.
#[derive(Debug, Clone)]
pub struct Budget {
    max_evaluations: u64,
    ceiling: u64,
    consumed: u64,
    deadline: Option<Instant>,
    baseline: Option<f64>,
    best: Option<f64>,
    improvements: Vec<(u64, f64)>,
    step_log: Option<Vec<f64>>,
}

impl Budget {
    pub fn new(max_evaluations: u64) -> Self {
        Self {
            max_evaluations,
            ceiling: max_evaluations,
            consumed: 0,
            deadline: None,
            baseline: None,
            best: None,
            improvements: Vec::new(),
            step_log: None,
        }
    }

    pub fn unlimited() -> Self {
        Self::new(u64::MAX)
    }

    pub fn with_wall_clock(mut self, cap: Duration) -> Self {
        self.deadline = Some(Instant::now() + cap);
        self
    }

    /// Starts best-so-far tracking at `objective`; only strictly better evaluations are
    /// recorded as improvements.
    pub fn with_baseline(mut self, objective: f64) -> Self {
        self.baseline = Some(objective);
        self.best = Some(objective);
        self
    }

    /// Keeps the best-so-far value after every evaluation.
    pub fn with_step_log(mut self) -> Self {
        self.step_log = Some(Vec::new());
        self
    }

    pub fn max_evaluations(&self) -> u64 {
        self.max_evaluations
    }

    pub fn consumed(&self) -> u64 {
        self.consumed
    }

    pub fn remaining(&self) -> u64 {
        self.ceiling.saturating_sub(self.consumed)
    }

    pub fn is_exhausted(&self) -> bool {
        self.consumed >= self.ceiling || self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    pub fn baseline(&self) -> Option<f64> {
        self.baseline
    }

    pub fn best(&self) -> Option<f64> {
        self.best
    }

    /// `(evaluation count, objective)` at every strict best-so-far improvement.
    pub fn improvements(&self) -> &[(u64, f64)] {
        &self.improvements
    }

    pub fn step_log(&self) -> Option<&[f64]> {
        self.step_log.as_deref()
    }

    /// Evaluates `F(tour, packing)`, or returns `None` once the budget is spent.
    pub fn evaluate(
        &mut self,
        instance: &Instance,
        tour: &Tour,
        packing: &PackingPlan,
    ) -> Result<Option<f64>> {
        if self.is_exhausted() {
            return Ok(None);
        }
        let value = model::evaluate(instance, tour, packing)?;
        self.record_evaluation(value);
        Ok(Some(value))
    }

    /// Like [`Budget::evaluate`], caching the value on the solution.
    pub fn evaluate_solution(
        &mut self,
        instance: &Instance,
        solution: &mut Solution,
    ) -> Result<Option<f64>> {
        if self.is_exhausted() {
            return Ok(None);
        }
        model::objective(instance, solution, self).map(Some)
    }

    /// Counts an evaluation whose candidate was rejected as infeasible.
    /// Returns `false` if the budget was already spent.
    pub fn charge_discarded(&mut self) -> bool {
        if self.is_exhausted() {
            return false;
        }
        self.consumed += 1;
        if let (Some(log), Some(best)) = (self.step_log.as_mut(), self.best) {
            log.push(best);
        }
        true
    }

    /// Runs `f` with at most `limit` further evaluations available.
    pub fn capped<R>(&mut self, limit: u64, f: impl FnOnce(&mut Budget) -> R) -> R {
        let saved = self.ceiling;
        self.ceiling = saved.min(self.consumed.saturating_add(limit));
        let out = f(self);
        self.ceiling = saved;
        out
    }
}

impl EvaluationCounter for Budget {
    fn record_evaluation(&mut self, objective: f64) {
        self.consumed += 1;
        if self.best.is_none_or(|b| objective > b) {
            self.best = Some(objective);
            self.improvements.push((self.consumed, objective));
        }
        if let Some(log) = self.step_log.as_mut() {
            log.push(self.best.unwrap_or(objective));
        }
    }
}

/// Objective of the starting solution: the cached value when present (free), otherwise
/// one charged evaluation. `None` when the budget is already spent.
pub(crate) fn start_objective(
    instance: &Instance,
    solution: &Solution,
    budget: &mut Budget,
) -> Result<Option<f64>> {
    if let Some(f) = solution.checked_objective(instance) {
        return Ok(Some(f));
    }
    budget.evaluate(instance, solution.tour(), solution.packing())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EdgeWeightKind, InstanceParts, Item, Point};

    fn tiny() -> Instance {
        Instance::new(InstanceParts {
            name: "b".into(),
            knapsack_data_type: String::new(),
            edge_weight_kind: EdgeWeightKind::Euc2d,
            coords: vec![Point { x: 0.0, y: 0.0 }, Point { x: 1.0, y: 0.0 }],
            items: vec![Item {
                profit: 10.0,
                weight: 1.0,
                city: 1,
            }],
            capacity: 2.0,
            renting_rate: 1.0,
            min_speed: 0.1,
            max_speed: 1.0,
        })
        .unwrap()
    }

    #[test]
    fn counts_and_tracks_improvements() {
        let inst = tiny();
        let tour = Tour::identity(2);
        let mut budget = Budget::new(3);
        let empty = budget
            .evaluate(&inst, &tour, &PackingPlan::empty(1))
            .unwrap()
            .unwrap();
        let full = budget
            .evaluate(&inst, &tour, &PackingPlan::from_bits(vec![true]))
            .unwrap()
            .unwrap();
        assert!(full > empty);
        assert!(budget.charge_discarded());
        assert_eq!(
            budget
                .evaluate(&inst, &tour, &PackingPlan::empty(1))
                .unwrap(),
            None
        );
        assert!(!budget.charge_discarded());
        assert_eq!(budget.consumed(), 3);
        assert_eq!(budget.improvements(), &[(1, empty), (2, full)]);
    }

    #[test]
    fn baseline_filters_worse_values() {
        let inst = tiny();
        let mut budget = Budget::new(10).with_baseline(100.0);
        budget
            .evaluate(&inst, &Tour::identity(2), &PackingPlan::empty(1))
            .unwrap();
        assert!(budget.improvements().is_empty());
        assert_eq!(budget.best(), Some(100.0));
    }

    #[test]
    fn capped_restores_ceiling() {
        let inst = tiny();
        let tour = Tour::identity(2);
        let plan = PackingPlan::empty(1);
        let mut budget = Budget::new(5);
        let used = budget.capped(2, |b| {
            let mut n = 0;
            while b.evaluate(&inst, &tour, &plan).unwrap().is_some() {
                n += 1;
            }
            n
        });
        assert_eq!(used, 2);
        assert_eq!(budget.remaining(), 3);
    }

    #[test]
    fn zero_budget_and_wall_clock() {
        let inst = tiny();
        let mut zero = Budget::new(0);
        assert!(zero.is_exhausted());
        assert_eq!(
            zero.evaluate(&inst, &Tour::identity(2), &PackingPlan::empty(1))
                .unwrap(),
            None
        );
        let expired = Budget::new(10).with_wall_clock(Duration::ZERO);
        assert!(expired.is_exhausted());
    }
}
