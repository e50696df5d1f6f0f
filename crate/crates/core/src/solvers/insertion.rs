use crate::dynamics::AvailabilityState;
use crate::error::Result;
use crate::model::{Instance, Solution, Tour};

use super::budget::{start_objective, Budget};

/// Tour hill-climber that delays pickups.
///
/// Each pass visits the cities holding at least one packed item in the tour order at the
/// start of the pass. A city is removed and tried at every later position; the best
/// strictly improving position is kept. Passes repeat until one changes nothing or the
/// budget runs out. The packing is never touched.
pub fn insertion(
    instance: &Instance,
    solution: &Solution,
    avail: &AvailabilityState,
    budget: &mut Budget,
) -> Result<Solution> {
    let Some(mut current) = start_objective(instance, solution, budget)? else {
        return Ok(solution.clone());
    };
    let packing = solution.packing();
    let mut order = solution.tour().order().to_vec();
    let holds_packed = |city: usize| {
        instance
            .items_at(city)
            .iter()
            .any(|&k| packing.is_packed(k))
    };
    debug_assert!(order.iter().all(|&c| avail.is_city_available(c)));

    'passes: loop {
        let mut changed = false;
        let snapshot = order.clone();
        for &city in snapshot.iter().skip(1) {
            if !holds_packed(city) {
                continue;
            }
            let from = order
                .iter()
                .position(|&c| c == city)
                .expect("city stays on tour");
            let mut reduced = order.clone();
            reduced.remove(from);
            let mut best: Option<(usize, f64)> = None;
            let mut exhausted = false;
            for to in from + 1..order.len() {
                let mut candidate = reduced.clone();
                candidate.insert(to, city);
                let tour = Tour::from_order_unchecked(candidate);
                match budget.evaluate(instance, &tour, packing)? {
                    None => {
                        exhausted = true;
                        break;
                    }
                    Some(f) => {
                        if f > best.map_or(current, |b| b.1) {
                            best = Some((to, f));
                        }
                    }
                }
            }
            if let Some((to, f)) = best {
                reduced.insert(to, city);
                order = reduced;
                current = f;
                changed = true;
            }
            if exhausted {
                break 'passes;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(Solution::evaluated(
        Tour::from_order_unchecked(order),
        packing.clone(),
        current,
    ))
}
