//! Diversity-preserving (gamma+1) EA for re-optimizing a packing after a disruption.
//!
//! The reference `x_old` is the packing right after the disruption. Slot `i` keeps the best
//! individual found at Hamming distance exactly `i` from `x_old`, with `gamma = m` so every
//! offspring has a slot. Per iteration:
//! - parent: the best occupant with probability 1/2, otherwise a uniformly chosen
//!   occupied slot;
//! - offspring: standard bit mutation with rate `1/m`, then bits of unavailable items are
//!   cleared;
//! - an overweight offspring is discarded, but its evaluation is still charged;
//! - otherwise it takes slot `H(y, x_old)` if the slot is empty or `F(y)` is at least the
//!   occupant's value.

use crate::dynamics::rng::StreamRng;
use crate::dynamics::AvailabilityState;
use crate::error::Result;
use crate::model::{packed_weight, Instance, PackingPlan, Solution};

use super::budget::{start_objective, Budget};

#[derive(Debug, Clone)]
pub struct ReaPopulation {
    x_old: PackingPlan,
    slots: Vec<Option<(PackingPlan, f64)>>,
    occupied: Vec<usize>,
    best: usize,
}

impl ReaPopulation {
    pub fn new(x_old: PackingPlan, objective: f64) -> Self {
        let gamma = x_old.len();
        let mut slots = vec![None; gamma + 1];
        slots[0] = Some((x_old.clone(), objective));
        Self {
            x_old,
            slots,
            occupied: vec![0],
            best: 0,
        }
    }

    pub fn gamma(&self) -> usize {
        self.slots.len() - 1
    }

    pub fn x_old(&self) -> &PackingPlan {
        &self.x_old
    }

    pub fn slot(&self, distance: usize) -> Option<&(PackingPlan, f64)> {
        self.slots.get(distance).and_then(|s| s.as_ref())
    }

    /// Occupied slot indices, ascending.
    pub fn occupied(&self) -> &[usize] {
        &self.occupied
    }

    pub fn best(&self) -> &(PackingPlan, f64) {
        self.slots[self.best]
            .as_ref()
            .expect("best slot is occupied")
    }

    /// Installs `y` if it qualifies; returns whether it did.
    pub fn offer(&mut self, y: PackingPlan, objective: f64) -> bool {
        let distance = y.hamming(&self.x_old);
        if distance > self.gamma() {
            return false;
        }
        match &self.slots[distance] {
            Some((_, occupant)) if objective < *occupant => return false,
            Some(_) => {}
            None => {
                let at = self.occupied.partition_point(|&s| s < distance);
                self.occupied.insert(at, distance);
            }
        }
        self.slots[distance] = Some((y, objective));
        if distance == self.best || objective > self.best().1 {
            self.best = distance;
        }
        true
    }

    fn pick_parent(&self, rng: &mut StreamRng) -> &PackingPlan {
        let slot = if rng.chance(0.5) {
            self.best
        } else {
            self.occupied[rng.below(self.occupied.len())]
        };
        &self.slots[slot].as_ref().expect("occupied slot").0
    }
}

pub fn rea(
    instance: &Instance,
    solution: &Solution,
    avail: &AvailabilityState,
    budget: &mut Budget,
    rng: &mut StreamRng,
) -> Result<Solution> {
    let m = instance.m();
    if m == 0 {
        return Ok(solution.clone());
    }
    let Some(start) = start_objective(instance, solution, budget)? else {
        return Ok(solution.clone());
    };
    let tour = solution.tour();
    let mut population = ReaPopulation::new(solution.packing().clone(), start);
    let rate = 1.0 / m as f64;

    while !budget.is_exhausted() {
        let mut y = population.pick_parent(rng).clone();
        for k in 0..m {
            if rng.chance(rate) {
                y.flip(k);
            }
        }
        for k in 0..m {
            if !avail.is_item_available(instance, k) {
                y.set(k, false);
            }
        }
        if packed_weight(instance, &y) > instance.capacity() {
            if !budget.charge_discarded() {
                break;
            }
            continue;
        }
        let Some(f) = budget.evaluate(instance, tour, &y)? else {
            break;
        };
        population.offer(y, f);
    }

    let (packing, f) = population.best().clone();
    Ok(Solution::evaluated(tour.clone(), packing, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EdgeWeightKind, InstanceParts, Item, Point, Tour};

    #[test]
    fn ties_replace_occupant() {
        let x_old = PackingPlan::from_bits(vec![false, false, false]);
        let mut pop = ReaPopulation::new(x_old, 0.0);
        let a = PackingPlan::from_bits(vec![true, false, false]);
        let b = PackingPlan::from_bits(vec![false, true, false]);
        assert!(pop.offer(a, 5.0));
        assert!(pop.offer(b.clone(), 5.0));
        assert_eq!(pop.slot(1), Some(&(b, 5.0)));
        assert!(!pop.offer(PackingPlan::from_bits(vec![false, false, true]), 4.0));
        assert_eq!(pop.occupied(), &[0, 1]);
        assert_eq!(pop.best().1, 5.0);
    }

    #[test]
    fn slots_hold_exact_distances() {
        let x_old = PackingPlan::from_bits(vec![true, false, true, false]);
        let mut pop = ReaPopulation::new(x_old.clone(), 1.0);
        pop.offer(PackingPlan::from_bits(vec![false, true, false, true]), 3.0);
        pop.offer(PackingPlan::from_bits(vec![true, true, true, false]), 2.0);
        for &s in pop.occupied() {
            assert_eq!(pop.slot(s).unwrap().0.hamming(&x_old), s);
        }
        assert_eq!(pop.occupied(), &[0, 1, 4]);
        assert_eq!(pop.best().1, 3.0);
        assert_eq!(pop.slot(0).unwrap().0, x_old);
    }

    fn toy() -> Instance {
        Instance::new(InstanceParts {
            name: "rea".into(),
            knapsack_data_type: String::new(),
            edge_weight_kind: EdgeWeightKind::Euc2d,
            coords: vec![Point { x: 0.0, y: 0.0 }, Point { x: 5.0, y: 0.0 }],
            items: vec![
                Item {
                    profit: 30.0,
                    weight: 4.0,
                    city: 1,
                },
                Item {
                    profit: 20.0,
                    weight: 3.0,
                    city: 1,
                },
                Item {
                    profit: 25.0,
                    weight: 3.0,
                    city: 1,
                },
            ],
            capacity: 6.0,
            renting_rate: 1.0,
            min_speed: 0.1,
            max_speed: 1.0,
        })
        .unwrap()
    }

    #[test]
    fn zero_budget_returns_x_old() {
        let inst = toy();
        let avail = AvailabilityState::full(&inst);
        let start = Solution::new(
            Tour::identity(2),
            PackingPlan::from_bits(vec![true, false, false]),
        );
        let out = rea(
            &inst,
            &start,
            &avail,
            &mut Budget::new(0),
            &mut StreamRng::from_seed(1),
        )
        .unwrap();
        assert_eq!(out, start);
    }

    #[test]
    fn never_returns_worse_and_respects_availability() {
        let inst = toy();
        let mut avail = AvailabilityState::full(&inst);
        avail.set_item_available(2, false);
        let start = Solution::new(Tour::identity(2), PackingPlan::empty(3));
        let mut budget = Budget::new(500);
        let out = rea(
            &inst,
            &start,
            &avail,
            &mut budget,
            &mut StreamRng::from_seed(3),
        )
        .unwrap();
        assert_eq!(budget.consumed(), 500);
        assert!(!out.packing().is_packed(2));
        assert!(packed_weight(&inst, out.packing()) <= inst.capacity());
        // best reachable: item 0 alone (item 1 alone is worth less)
        assert_eq!(out.packing().bits(), &[true, false, false]);
    }
}
