//! Greedy packing with a tunable score exponent.
//!
//! Item score: `s(a) = p^a / (w^a * carry)`, where `carry` is the tour distance from the
//! item's city to the end of the tour (the return to the start city). For a fixed `a`,
//! available items are taken by descending score (ties to the lower index) while they fit.
//! The exponent is tuned by a 10-step interval search on `[0.1, 5]`: both interior
//! third-points of the current interval are probed and the search continues in the half of
//! the interval that holds the better probe (the left half on ties).

use crate::dynamics::AvailabilityState;
use crate::error::Result;
use crate::model::{Instance, PackingPlan, Tour};

use super::budget::Budget;

pub const ALPHA_MIN: f64 = 0.1;
pub const ALPHA_MAX: f64 = 5.0;
pub const SEARCH_STEPS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct PackIterativeOutcome {
    /// Best probed packing, or the empty plan when nothing was probed.
    pub packing: PackingPlan,
    /// Objective of `packing`, if any probe was evaluated.
    pub objective: Option<f64>,
    /// Every evaluated `(alpha, F)` in probe order.
    pub probes: Vec<(f64, f64)>,
}

/// Carry distance per city: distance from the city, along the tour, back to the start.
fn carry_distances(instance: &Instance, tour: &Tour) -> Vec<f64> {
    let order = tour.order();
    let mut carry = vec![0.0; instance.n()];
    let mut acc = 0.0;
    for i in (0..order.len()).rev() {
        let next = order[(i + 1) % order.len()];
        acc += instance.distance(order[i], next);
        carry[order[i]] = acc;
    }
    carry
}

/// Candidate items (available, city on the tour) with their carry distances.
fn candidates(instance: &Instance, tour: &Tour, avail: &AvailabilityState) -> Vec<(usize, f64)> {
    let carry = carry_distances(instance, tour);
    let mut on_tour = vec![false; instance.n()];
    for &c in tour.order() {
        on_tour[c] = true;
    }
    (0..instance.m())
        .filter(|&k| avail.is_item_available(instance, k) && on_tour[instance.item(k).city])
        .map(|k| (k, carry[instance.item(k).city].max(f64::MIN_POSITIVE)))
        .collect()
}

fn greedy_from(instance: &Instance, candidates: &[(usize, f64)], alpha: f64) -> PackingPlan {
    let mut scored: Vec<(usize, f64)> = candidates
        .iter()
        .map(|&(k, carry)| {
            let item = instance.item(k);
            (k, (item.profit / item.weight).powf(alpha) / carry)
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut plan = PackingPlan::empty(instance.m());
    let mut weight = 0.0;
    for (k, _) in scored {
        let w = instance.item(k).weight;
        if weight + w <= instance.capacity() {
            weight += w;
            plan.set(k, true);
        }
    }
    plan
}

/// Greedy packing for one fixed exponent.
pub fn greedy_packing(
    instance: &Instance,
    tour: &Tour,
    avail: &AvailabilityState,
    alpha: f64,
) -> PackingPlan {
    greedy_from(instance, &candidates(instance, tour, avail), alpha)
}

/// Full search, reporting every probe.
pub fn pack_iterative_search(
    instance: &Instance,
    tour: &Tour,
    avail: &AvailabilityState,
    budget: &mut Budget,
) -> Result<PackIterativeOutcome> {
    let pool = candidates(instance, tour, avail);
    let mut outcome = PackIterativeOutcome {
        packing: PackingPlan::empty(instance.m()),
        objective: None,
        probes: Vec::with_capacity(2 * SEARCH_STEPS),
    };
    let (mut lo, mut hi) = (ALPHA_MIN, ALPHA_MAX);
    'search: for _ in 0..SEARCH_STEPS {
        let third = (hi - lo) / 3.0;
        let mut values = [0.0; 2];
        for (slot, alpha) in [lo + third, hi - third].into_iter().enumerate() {
            let plan = greedy_from(instance, &pool, alpha);
            let Some(f) = budget.evaluate(instance, tour, &plan)? else {
                break 'search;
            };
            outcome.probes.push((alpha, f));
            if outcome.objective.is_none_or(|best| f > best) {
                outcome.objective = Some(f);
                outcome.packing = plan;
            }
            values[slot] = f;
        }
        let mid = 0.5 * (lo + hi);
        if values[1] > values[0] {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(outcome)
}

pub fn pack_iterative(
    instance: &Instance,
    tour: &Tour,
    avail: &AvailabilityState,
    budget: &mut Budget,
) -> Result<PackingPlan> {
    Ok(pack_iterative_search(instance, tour, avail, budget)?.packing)
}
