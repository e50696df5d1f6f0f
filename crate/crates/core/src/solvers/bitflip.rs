use crate::dynamics::AvailabilityState;
use crate::error::Result;
use crate::model::{packed_weight, Instance, Solution};

use super::budget::{start_objective, Budget};

/// First-improvement packing hill-climber.
///
/// Each pass tries flipping every available item once, in ascending index order, and keeps
/// a flip iff it stays within capacity and strictly improves `F`. Flips that would overload
/// the knapsack are skipped without an evaluation. Stops after a pass without improvement
/// or when the budget runs out.
pub fn bitflip(
    instance: &Instance,
    solution: &Solution,
    avail: &AvailabilityState,
    budget: &mut Budget,
) -> Result<Solution> {
    let Some(mut current) = start_objective(instance, solution, budget)? else {
        return Ok(solution.clone());
    };
    let tour = solution.tour();
    let mut packing = solution.packing().clone();
    let mut weight = packed_weight(instance, &packing);
    let capacity = instance.capacity();

    'passes: loop {
        let mut improved = false;
        for k in 0..instance.m() {
            if !avail.is_item_available(instance, k) {
                continue;
            }
            let w = instance.item(k).weight;
            let adding = !packing.is_packed(k);
            if adding && weight + w > capacity {
                continue;
            }
            packing.flip(k);
            match budget.evaluate(instance, tour, &packing)? {
                None => {
                    packing.flip(k);
                    break 'passes;
                }
                Some(f) if f > current => {
                    current = f;
                    weight = if adding { weight + w } else { weight - w };
                    improved = true;
                }
                Some(_) => packing.flip(k),
            }
        }
        if !improved {
            break;
        }
    }
    Ok(Solution::evaluated(tour.clone(), packing, current))
}
