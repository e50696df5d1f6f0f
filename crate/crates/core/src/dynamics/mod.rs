//! Availability flipping, the deterministic disruption stream and repair of solutions.
//!
//! Item repair: a packed item that goes off is unpacked; an item that comes back on is
//! merely pickable again. City repair: a city that goes off leaves the tour (the order of
//! the other cities is kept) and its items are unpacked; when it comes back it is inserted
//! right after the nearest city of its recorded predecessor chain that is still in the
//! tour, and exactly the items it had packed at removal time are packed again.

pub mod rng;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{Instance, Solution, START_CITY};
use rng::{StreamRng, DOMAIN_DISRUPTION};

/// Which kind of entity a scenario disrupts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    Items,
    Cities,
}

impl Feature {
    pub fn as_str(self) -> &'static str {
        match self {
            Feature::Items => "items",
            Feature::Cities => "cities",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "items" => Ok(Feature::Items),
            "cities" => Ok(Feature::Cities),
            other => Err(format!(
                "unknown feature `{other}` (expected items or cities)"
            )),
        }
    }
}

/// What is needed to put a deactivated city back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestoreRecord {
    /// Cities that preceded the removed city in the tour, nearest first.
    pub predecessors: Vec<usize>,
    /// Items of the city that were packed when it was removed.
    pub picked: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AvailabilityState {
    item_mask: Vec<bool>,
    city_mask: Vec<bool>,
    city_restore: BTreeMap<usize, RestoreRecord>,
}

impl AvailabilityState {
    /// Everything available.
    pub fn full(instance: &Instance) -> Self {
        Self {
            item_mask: vec![true; instance.m()],
            city_mask: vec![true; instance.n()],
            city_restore: BTreeMap::new(),
        }
    }

    pub fn is_city_available(&self, city: usize) -> bool {
        self.city_mask.get(city).copied().unwrap_or(false)
    }

    /// The item's own flag, ignoring its city.
    pub fn item_flag(&self, k: usize) -> bool {
        self.item_mask[k]
    }

    /// Pickable: the item is on and so is its city.
    pub fn is_item_available(&self, instance: &Instance, k: usize) -> bool {
        self.item_mask[k] && self.city_mask[instance.item(k).city]
    }

    pub fn item_mask(&self) -> &[bool] {
        &self.item_mask
    }

    pub fn city_mask(&self) -> &[bool] {
        &self.city_mask
    }

    pub fn available_cities(&self) -> impl Iterator<Item = usize> + '_ {
        self.city_mask
            .iter()
            .enumerate()
            .filter(|(_, on)| **on)
            .map(|(c, _)| c)
    }

    pub fn available_city_count(&self) -> usize {
        self.city_mask.iter().filter(|on| **on).count()
    }

    pub fn restore_record(&self, city: usize) -> Option<&RestoreRecord> {
        self.city_restore.get(&city)
    }

    pub fn restore_records(&self) -> &BTreeMap<usize, RestoreRecord> {
        &self.city_restore
    }

    /// Sets a city flag directly, without repairing any solution. The start city stays on.
    pub fn set_city_available(&mut self, city: usize, available: bool) {
        if city != START_CITY {
            self.city_mask[city] = available;
        }
    }

    /// Sets an item flag directly, without repairing any solution.
    pub fn set_item_available(&mut self, k: usize, available: bool) {
        self.item_mask[k] = available;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DisruptionEvent {
    pub epoch: usize,
    pub feature: Feature,
    /// 0-based item or city indices, ascending and distinct. Never the start city.
    pub flipped: Vec<usize>,
}

/// Number of entities flipped per event: `d% of N` rounded half up, at least 1, at most N.
pub fn flip_count(percent: f64, population: usize) -> usize {
    if population == 0 {
        return 0;
    }
    let exact = percent * population as f64 / 100.0;
    ((exact + 0.5).floor() as usize).clamp(1, population)
}

/// Disruption events of one run. Event `e` is a pure function of `(master_seed, run, e)`
/// and the instance size, never of the algorithm that observes it.
#[derive(Debug, Clone)]
pub struct DisruptionStream {
    master_seed: u64,
    run: u64,
    feature: Feature,
    flips: usize,
    population: usize,
    next_epoch: usize,
}

impl DisruptionStream {
    pub fn new(
        master_seed: u64,
        run: u64,
        feature: Feature,
        percent: f64,
        instance: &Instance,
    ) -> Self {
        let population = match feature {
            Feature::Items => instance.m(),
            Feature::Cities => instance.n().saturating_sub(1),
        };
        Self {
            master_seed,
            run,
            feature,
            flips: flip_count(percent, population),
            population,
            next_epoch: 0,
        }
    }

    pub fn flips_per_event(&self) -> usize {
        self.flips
    }

    pub fn event(&self, epoch: usize) -> DisruptionEvent {
        let mut rng = StreamRng::new(self.master_seed, DOMAIN_DISRUPTION, self.run, epoch as u64);
        let mut flipped = rng.sample_distinct(self.population, self.flips);
        if self.feature == Feature::Cities {
            // the start city is exempt, so city candidates are shifted past it
            for c in &mut flipped {
                *c += 1;
            }
        }
        DisruptionEvent {
            epoch,
            feature: self.feature,
            flipped,
        }
    }
}

impl Iterator for DisruptionStream {
    type Item = DisruptionEvent;

    fn next(&mut self) -> Option<Self::Item> {
        let event = self.event(self.next_epoch);
        self.next_epoch += 1;
        Some(event)
    }
}

/// Applies either repair depending on the event's feature.
pub fn apply_event(
    instance: &Instance,
    solution: &mut Solution,
    avail: &mut AvailabilityState,
    event: &DisruptionEvent,
) -> Result<()> {
    match event.feature {
        Feature::Items => apply_item_toggles(instance, solution, avail, event),
        Feature::Cities => apply_city_toggles(instance, solution, avail, event),
    }
}

pub fn apply_item_toggles(
    instance: &Instance,
    solution: &mut Solution,
    avail: &mut AvailabilityState,
    event: &DisruptionEvent,
) -> Result<()> {
    if event.feature != Feature::Items {
        return Err(Error::Internal(
            "item repair called with a city event".into(),
        ));
    }
    let packing = solution.packing_mut();
    for &k in &event.flipped {
        if k >= instance.m() {
            return Err(Error::Internal(format!("item index {k} out of range")));
        }
        if avail.item_mask[k] {
            avail.item_mask[k] = false;
            packing.set(k, false);
        } else {
            avail.item_mask[k] = true;
        }
    }
    Ok(())
}

pub fn apply_city_toggles(
    instance: &Instance,
    solution: &mut Solution,
    avail: &mut AvailabilityState,
    event: &DisruptionEvent,
) -> Result<()> {
    if event.feature != Feature::Cities {
        return Err(Error::Internal(
            "city repair called with an item event".into(),
        ));
    }
    for &city in &event.flipped {
        if city == START_CITY || city >= instance.n() {
            return Err(Error::Internal(format!(
                "city index {city} cannot be toggled"
            )));
        }
        if avail.city_mask[city] {
            deactivate_city(instance, solution, avail, city);
        } else {
            reactivate_city(instance, solution, avail, city)?;
        }
    }
    Ok(())
}

fn deactivate_city(
    instance: &Instance,
    solution: &mut Solution,
    avail: &mut AvailabilityState,
    city: usize,
) {
    let order = solution.tour_mut().order_mut();
    let predecessors = match order.iter().position(|&c| c == city) {
        Some(pos) => {
            let chain = order[..pos].iter().rev().copied().collect();
            order.remove(pos);
            chain
        }
        None => Vec::new(),
    };
    let packing = solution.packing_mut();
    let mut picked = Vec::new();
    for &k in instance.items_at(city) {
        if packing.is_packed(k) {
            picked.push(k);
            packing.set(k, false);
        }
    }
    avail.city_mask[city] = false;
    avail.city_restore.insert(
        city,
        RestoreRecord {
            predecessors,
            picked,
        },
    );
}

fn reactivate_city(
    instance: &Instance,
    solution: &mut Solution,
    avail: &mut AvailabilityState,
    city: usize,
) -> Result<()> {
    let record = avail.city_restore.remove(&city).ok_or_else(|| {
        Error::Internal(format!("city {city} reactivated without a restore record"))
    })?;
    let order = solution.tour_mut().order_mut();
    let insert_at = record
        .predecessors
        .iter()
        .find_map(|p| order.iter().position(|c| c == p))
        .map_or(1, |pos| pos + 1);
    order.insert(insert_at, city);
    let packing = solution.packing_mut();
    for &k in &record.picked {
        debug_assert_eq!(instance.item(k).city, city);
        if avail.item_mask[k] {
            packing.set(k, true);
        }
    }
    avail.city_mask[city] = true;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EdgeWeightKind, InstanceParts, Item, PackingPlan, Point, Tour};

    fn line_instance(n: usize, items: &[(f64, f64, usize)]) -> Instance {
        Instance::new(InstanceParts {
            name: "line".into(),
            knapsack_data_type: String::new(),
            edge_weight_kind: EdgeWeightKind::Euc2d,
            coords: (0..n)
                .map(|i| Point {
                    x: i as f64,
                    y: 0.0,
                })
                .collect(),
            items: items
                .iter()
                .map(|&(profit, weight, city)| Item {
                    profit,
                    weight,
                    city,
                })
                .collect(),
            capacity: 100.0,
            renting_rate: 1.0,
            min_speed: 0.1,
            max_speed: 1.0,
        })
        .unwrap()
    }

    fn items_event(flipped: Vec<usize>) -> DisruptionEvent {
        DisruptionEvent {
            epoch: 0,
            feature: Feature::Items,
            flipped,
        }
    }

    fn cities_event(flipped: Vec<usize>) -> DisruptionEvent {
        DisruptionEvent {
            epoch: 0,
            feature: Feature::Cities,
            flipped,
        }
    }

    #[test]
    fn flip_counts() {
        assert_eq!(flip_count(3.0, 200), 6);
        assert_eq!(flip_count(1.0, 279), 3);
        assert_eq!(flip_count(1.0, 20), 1);
        assert_eq!(flip_count(30.0, 5), 2);
        assert_eq!(flip_count(50.0, 3), 2);
        assert_eq!(flip_count(100.0, 7), 7);
        assert_eq!(flip_count(10.0, 0), 0);
    }

    #[test]
    fn stream_is_deterministic_and_exempts_start_city() {
        let inst = line_instance(50, &[]);
        let a: Vec<_> = DisruptionStream::new(9, 3, Feature::Cities, 10.0, &inst)
            .take(5)
            .collect();
        let b: Vec<_> = DisruptionStream::new(9, 3, Feature::Cities, 10.0, &inst)
            .take(5)
            .collect();
        assert_eq!(a, b);
        for (e, ev) in a.iter().enumerate() {
            assert_eq!(ev.epoch, e);
            assert_eq!(ev.flipped.len(), 5);
            assert!(!ev.flipped.contains(&START_CITY));
            assert!(ev.flipped.windows(2).all(|w| w[0] < w[1]));
            assert!(ev.flipped.iter().all(|&c| c < 50));
        }
        let other: Vec<_> = DisruptionStream::new(9, 4, Feature::Cities, 10.0, &inst)
            .take(5)
            .collect();
        assert_ne!(a, other);
        let stream = DisruptionStream::new(9, 3, Feature::Cities, 10.0, &inst);
        assert_eq!(stream.event(3), a[3]);
    }

    #[test]
    fn item_toggle_rules() {
        let inst = line_instance(3, &[(10.0, 4.0, 1), (5.0, 2.0, 2)]);
        let mut avail = AvailabilityState::full(&inst);
        let mut sol = Solution::new(Tour::identity(3), PackingPlan::from_bits(vec![true, false]));
        apply_item_toggles(&inst, &mut sol, &mut avail, &items_event(vec![0])).unwrap();
        assert_eq!(sol.packing().bits(), &[false, false]);
        assert!(!avail.item_flag(0));
        apply_item_toggles(&inst, &mut sol, &mut avail, &items_event(vec![0, 1])).unwrap();
        assert!(avail.item_flag(0));
        assert!(!avail.item_flag(1));
        assert_eq!(sol.packing().bits(), &[false, false]);
        assert_eq!(sol.tour().order(), &[0, 1, 2]);
        apply_item_toggles(&inst, &mut sol, &mut avail, &items_event(vec![1])).unwrap();
        assert_eq!(sol.packing().bits(), &[false, false]);
    }

    #[test]
    fn city_toggle_round_trip() {
        let inst = line_instance(6, &[(10.0, 1.0, 5), (3.0, 1.0, 5), (7.0, 1.0, 2)]);
        let mut avail = AvailabilityState::full(&inst);
        let mut sol = Solution::new(
            Tour::new(vec![0, 3, 5, 2, 4, 1]).unwrap(),
            PackingPlan::from_bits(vec![true, false, true]),
        );
        apply_city_toggles(&inst, &mut sol, &mut avail, &cities_event(vec![5])).unwrap();
        assert_eq!(sol.tour().order(), &[0, 3, 2, 4, 1]);
        assert_eq!(sol.packing().bits(), &[false, false, true]);
        assert_eq!(
            avail.restore_record(5),
            Some(&RestoreRecord {
                predecessors: vec![3, 0],
                picked: vec![0]
            })
        );
        apply_city_toggles(&inst, &mut sol, &mut avail, &cities_event(vec![5])).unwrap();
        assert_eq!(sol.tour().order(), &[0, 3, 5, 2, 4, 1]);
        assert_eq!(sol.packing().bits(), &[true, false, true]);
        assert!(avail.restore_records().is_empty());
    }

    #[test]
    fn reinsertion_falls_back_along_the_chain() {
        let inst = line_instance(5, &[]);
        let mut avail = AvailabilityState::full(&inst);
        let mut sol = Solution::new(
            Tour::new(vec![0, 1, 2, 3, 4]).unwrap(),
            PackingPlan::empty(0),
        );
        apply_city_toggles(&inst, &mut sol, &mut avail, &cities_event(vec![3])).unwrap();
        apply_city_toggles(&inst, &mut sol, &mut avail, &cities_event(vec![1, 2])).unwrap();
        assert_eq!(sol.tour().order(), &[0, 4]);
        apply_city_toggles(&inst, &mut sol, &mut avail, &cities_event(vec![3])).unwrap();
        assert_eq!(sol.tour().order(), &[0, 3, 4]);
        apply_city_toggles(&inst, &mut sol, &mut avail, &cities_event(vec![2])).unwrap();
        assert_eq!(sol.tour().order(), &[0, 2, 3, 4]);
    }

    #[test]
    fn reactivation_without_record_is_internal_error() {
        let inst = line_instance(3, &[]);
        let mut avail = AvailabilityState::full(&inst);
        avail.set_city_available(2, false);
        let mut sol = Solution::new(Tour::new(vec![0, 1]).unwrap(), PackingPlan::empty(0));
        let err = apply_city_toggles(&inst, &mut sol, &mut avail, &cities_event(vec![2]));
        assert!(matches!(err, Err(Error::Internal(_))));
        let err = apply_city_toggles(&inst, &mut sol, &mut avail, &cities_event(vec![0]));
        assert!(matches!(err, Err(Error::Internal(_))));
    }

    #[test]
    fn repairs_drop_cached_objective() {
        let inst = line_instance(3, &[(1.0, 1.0, 1)]);
        let mut avail = AvailabilityState::full(&inst);
        let mut sol = Solution::new(Tour::identity(3), PackingPlan::from_bits(vec![true]));
        crate::model::objective(&inst, &mut sol, &mut 0u64).unwrap();
        apply_item_toggles(&inst, &mut sol, &mut avail, &items_event(vec![0])).unwrap();
        assert!(sol.cached_objective().is_none());
    }
}
