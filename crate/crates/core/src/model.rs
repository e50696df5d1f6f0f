//! TTP data model and exact objective evaluation.
//!
//! Cities and items are 0-indexed in memory. City `0` is the start city (city 1 in
//! instance files) and never holds items. Instance files and exported traces use
//! 1-based numbering; conversion happens in [`crate::io`] and the CSV writers.
//!
//! The thief collects the packed items of a city when it arrives there, and the
//! resulting knapsack weight sets the speed of the leg that departs from that city:
//! `v = v_max - C * w` with `C = (v_max - v_min) / W`. The objective is
//! `F = g - R * f` where `g` is total packed profit and `f` total travel time,
//! including the closing leg back to the start city.

use std::collections::HashSet;
use std::fmt;

use crate::dynamics::AvailabilityState;
use crate::error::{Error, Result};

/// Index of the start city.
pub const START_CITY: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeWeightKind {
    /// Euclidean distance rounded up to the next integer.
    Ceil2d,
    /// Plain Euclidean distance.
    Euc2d,
}

impl EdgeWeightKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeWeightKind::Ceil2d => "CEIL_2D",
            EdgeWeightKind::Euc2d => "EUC_2D",
        }
    }
}

impl std::str::FromStr for EdgeWeightKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "CEIL_2D" => Ok(EdgeWeightKind::Ceil2d),
            "EUC_2D" => Ok(EdgeWeightKind::Euc2d),
            other => Err(format!("unsupported EDGE_WEIGHT_TYPE `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Item {
    pub profit: f64,
    pub weight: f64,
    /// City holding the item (0-based, never [`START_CITY`]).
    pub city: usize,
}

/// Raw field values for [`Instance::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceParts {
    pub name: String,
    /// Free-text knapsack type as written in the file header.
    pub knapsack_data_type: String,
    pub edge_weight_kind: EdgeWeightKind,
    pub coords: Vec<Point>,
    pub items: Vec<Item>,
    pub capacity: f64,
    pub renting_rate: f64,
    pub min_speed: f64,
    pub max_speed: f64,
}

/// Static problem data. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Instance {
    parts: InstanceParts,
    items_by_city: Vec<Vec<usize>>,
}

impl Instance {
    pub fn new(parts: InstanceParts) -> Result<Self> {
        let n = parts.coords.len();
        if n == 0 {
            return Err(Error::Structural("instance has no cities".into()));
        }
        if !(parts.min_speed > 0.0 && parts.min_speed < parts.max_speed) {
            return Err(Error::Structural(format!(
                "speeds must satisfy 0 < v_min < v_max (got v_min={}, v_max={})",
                parts.min_speed, parts.max_speed
            )));
        }
        if !(parts.capacity > 0.0) {
            return Err(Error::Structural(format!(
                "knapsack capacity must be positive (got {})",
                parts.capacity
            )));
        }
        if !(parts.renting_rate >= 0.0) {
            return Err(Error::Structural(format!(
                "renting rate must be non-negative (got {})",
                parts.renting_rate
            )));
        }
        let mut items_by_city = vec![Vec::new(); n];
        for (k, item) in parts.items.iter().enumerate() {
            if item.city >= n {
                return Err(Error::Structural(format!(
                    "item {k} assigned to unknown city index {}",
                    item.city
                )));
            }
            if item.city == START_CITY {
                return Err(Error::Structural(format!(
                    "item {k} assigned to the start city"
                )));
            }
            if !(item.weight > 0.0) {
                return Err(Error::Structural(format!(
                    "item {k} has non-positive weight {}",
                    item.weight
                )));
            }
            if !(item.profit >= 0.0) {
                return Err(Error::Structural(format!(
                    "item {k} has negative profit {}",
                    item.profit
                )));
            }
            items_by_city[item.city].push(k);
        }
        Ok(Self {
            parts,
            items_by_city,
        })
    }

    pub fn name(&self) -> &str {
        &self.parts.name
    }

    pub fn knapsack_data_type(&self) -> &str {
        &self.parts.knapsack_data_type
    }

    pub fn edge_weight_kind(&self) -> EdgeWeightKind {
        self.parts.edge_weight_kind
    }

    /// Number of cities.
    pub fn n(&self) -> usize {
        self.parts.coords.len()
    }

    /// Number of items.
    pub fn m(&self) -> usize {
        self.parts.items.len()
    }

    pub fn coords(&self) -> &[Point] {
        &self.parts.coords
    }

    pub fn items(&self) -> &[Item] {
        &self.parts.items
    }

    pub fn item(&self, k: usize) -> &Item {
        &self.parts.items[k]
    }

    /// Item indices held by `city`, ascending.
    pub fn items_at(&self, city: usize) -> &[usize] {
        &self.items_by_city[city]
    }

    pub fn capacity(&self) -> f64 {
        self.parts.capacity
    }

    pub fn renting_rate(&self) -> f64 {
        self.parts.renting_rate
    }

    pub fn min_speed(&self) -> f64 {
        self.parts.min_speed
    }

    pub fn max_speed(&self) -> f64 {
        self.parts.max_speed
    }

    pub fn parts(&self) -> &InstanceParts {
        &self.parts
    }

    /// Speed loss per unit of knapsack weight.
    pub fn speed_coefficient(&self) -> f64 {
        (self.parts.max_speed - self.parts.min_speed) / self.parts.capacity
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        distance(self, a, b)
    }
}

pub fn distance(instance: &Instance, a: usize, b: usize) -> f64 {
    let (p, q) = (instance.parts.coords[a], instance.parts.coords[b]);
    let euclid = (p.x - q.x).hypot(p.y - q.y);
    match instance.parts.edge_weight_kind {
        EdgeWeightKind::Euc2d => euclid,
        EdgeWeightKind::Ceil2d => euclid.ceil(),
    }
}

/// Ordered visit sequence starting at the start city.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tour(Vec<usize>);

impl Tour {
    /// Checks that the order is non-empty, starts at [`START_CITY`] and has no duplicates.
    pub fn new(order: Vec<usize>) -> Result<Self> {
        if order.first() != Some(&START_CITY) {
            return Err(Error::Structural(
                "tour must be non-empty and start at the start city".into(),
            ));
        }
        let mut seen = HashSet::with_capacity(order.len());
        if let Some(dup) = order.iter().find(|c| !seen.insert(**c)) {
            return Err(Error::Structural(format!(
                "city {dup} appears twice in tour"
            )));
        }
        Ok(Tour(order))
    }

    /// Identity order `0, 1, ..., n-1`.
    pub fn identity(n: usize) -> Self {
        Tour((0..n.max(1)).collect())
    }

    pub(crate) fn from_order_unchecked(order: Vec<usize>) -> Self {
        debug_assert_eq!(order.first(), Some(&START_CITY));
        Tour(order)
    }

    pub fn order(&self) -> &[usize] {
        &self.0
    }

    pub(crate) fn order_mut(&mut self) -> &mut Vec<usize> {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn position_of(&self, city: usize) -> Option<usize> {
        self.0.iter().position(|&c| c == city)
    }

    pub fn contains(&self, city: usize) -> bool {
        self.0.contains(&city)
    }

    /// Closed tour length, including the return leg.
    pub fn length(&self, instance: &Instance) -> f64 {
        tour_length(instance, &self.0)
    }

    pub fn into_order(self) -> Vec<usize> {
        self.0
    }
}

pub(crate) fn tour_length(instance: &Instance, order: &[usize]) -> f64 {
    if order.len() < 2 {
        return 0.0;
    }
    let open: f64 = order
        .windows(2)
        .map(|leg| instance.distance(leg[0], leg[1]))
        .sum();
    open + instance.distance(order[order.len() - 1], order[0])
}

/// One bit per item, `true` = packed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PackingPlan(Vec<bool>);

impl PackingPlan {
    pub fn empty(m: usize) -> Self {
        PackingPlan(vec![false; m])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        PackingPlan(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_packed(&self, k: usize) -> bool {
        self.0[k]
    }

    pub fn set(&mut self, k: usize, packed: bool) {
        self.0[k] = packed;
    }

    pub fn flip(&mut self, k: usize) {
        self.0[k] = !self.0[k];
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn packed_items(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(k, _)| k)
    }

    pub fn count_packed(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    pub fn hamming(&self, other: &PackingPlan) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

/// A tour plus a packing plan, with a cached objective value.
///
/// Any mutable access to the tour or packing drops the cached value.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    tour: Tour,
    packing: PackingPlan,
    objective: Option<f64>,
}

impl Solution {
    pub fn new(tour: Tour, packing: PackingPlan) -> Self {
        Self {
            tour,
            packing,
            objective: None,
        }
    }

    /// Builds a solution whose objective was computed by the caller.
    pub(crate) fn evaluated(tour: Tour, packing: PackingPlan, objective: f64) -> Self {
        Self {
            tour,
            packing,
            objective: Some(objective),
        }
    }

    pub fn tour(&self) -> &Tour {
        &self.tour
    }

    pub fn packing(&self) -> &PackingPlan {
        &self.packing
    }

    pub fn tour_mut(&mut self) -> &mut Tour {
        self.objective = None;
        &mut self.tour
    }

    pub fn packing_mut(&mut self) -> &mut PackingPlan {
        self.objective = None;
        &mut self.packing
    }

    pub fn cached_objective(&self) -> Option<f64> {
        self.objective
    }

    /// Cached objective, re-checked against a fresh evaluation in debug builds.
    pub fn checked_objective(&self, instance: &Instance) -> Option<f64> {
        if cfg!(debug_assertions) {
            if let Some(cached) = self.objective {
                let fresh = evaluate(instance, &self.tour, &self.packing)
                    .expect("cached objective on an unevaluable solution");
                debug_assert!(
                    (cached - fresh).abs() <= 1e-9 * fresh.abs().max(1.0),
                    "stale cached objective: cached {cached}, fresh {fresh}"
                );
            }
        }
        self.objective
    }

    pub fn into_parts(self) -> (Tour, PackingPlan) {
        (self.tour, self.packing)
    }
}

/// Receives one notification per objective evaluation.
pub trait EvaluationCounter {
    fn record_evaluation(&mut self, objective: f64);
}

impl EvaluationCounter for u64 {
    fn record_evaluation(&mut self, _objective: f64) {
        *self += 1;
    }
}

pub fn total_profit(instance: &Instance, packing: &PackingPlan) -> Result<f64> {
    check_packing_len(instance, packing)?;
    Ok(packing
        .packed_items()
        .map(|k| instance.item(k).profit)
        .sum())
}

pub fn packed_weight(instance: &Instance, packing: &PackingPlan) -> f64 {
    packing
        .packed_items()
        .map(|k| instance.item(k).weight)
        .sum()
}

fn check_packing_len(instance: &Instance, packing: &PackingPlan) -> Result<()> {
    if packing.len() != instance.m() {
        return Err(Error::Structural(format!(
            "packing has {} bits, instance has {} items",
            packing.len(),
            instance.m()
        )));
    }
    Ok(())
}

/// Total travel time of the closed tour under the given packing.
///
/// Packed items of cities absent from the tour are never collected.
pub fn travel_time(instance: &Instance, tour: &Tour, packing: &PackingPlan) -> Result<f64> {
    if tour.is_empty() {
        return Err(Error::Structural("empty tour".into()));
    }
    check_packing_len(instance, packing)?;
    let total = packed_weight(instance, packing);
    if total > instance.capacity() {
        return Err(Error::Infeasible(format!(
            "packed weight {total} exceeds capacity {}",
            instance.capacity()
        )));
    }

    let order = tour.order();
    let coefficient = instance.speed_coefficient();
    let v_max = instance.max_speed();
    let mut weight = 0.0;
    let mut time = 0.0;
    for (i, &city) in order.iter().enumerate() {
        weight += instance
            .items_at(city)
            .iter()
            .filter(|&&k| packing.is_packed(k))
            .map(|&k| instance.item(k).weight)
            .sum::<f64>();
        let next = order[(i + 1) % order.len()];
        time += instance.distance(city, next) / (v_max - coefficient * weight);
    }
    Ok(time)
}

/// `F = g - R * f` without touching any counter.
pub fn evaluate(instance: &Instance, tour: &Tour, packing: &PackingPlan) -> Result<f64> {
    let time = travel_time(instance, tour, packing)?;
    Ok(total_profit(instance, packing)? - instance.renting_rate() * time)
}

/// Evaluates the solution, caches the value on it and reports the evaluation to `counter`.
pub fn objective<C: EvaluationCounter + ?Sized>(
    instance: &Instance,
    solution: &mut Solution,
    counter: &mut C,
) -> Result<f64> {
    let value = evaluate(instance, &solution.tour, &solution.packing)?;
    solution.objective = Some(value);
    counter.record_evaluation(value);
    Ok(value)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    PackingLength {
        expected: usize,
        actual: usize,
    },
    TourStart,
    DuplicateCity(usize),
    /// Available city absent from the tour.
    MissingCity(usize),
    /// Unavailable (or unknown) city present in the tour.
    UnavailableCity(usize),
    /// Packed item whose own flag or city is switched off.
    UnavailableItem(usize),
    CapacityExceeded {
        excess: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PackingLength { expected, actual } => {
                write!(f, "packing has {actual} bits, expected {expected}")
            }
            Violation::TourStart => write!(f, "tour does not start at the start city"),
            Violation::DuplicateCity(c) => write!(f, "city {c} visited more than once"),
            Violation::MissingCity(c) => write!(f, "available city {c} missing from tour"),
            Violation::UnavailableCity(c) => write!(f, "unavailable city {c} in tour"),
            Violation::UnavailableItem(k) => write!(f, "unavailable item {k} is packed"),
            Violation::CapacityExceeded { excess } => {
                write!(f, "capacity exceeded by {excess}")
            }
        }
    }
}

/// All violations found by [`check_feasible`]. Empty iff the solution is feasible.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "feasible");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

pub fn check_feasible(
    instance: &Instance,
    solution: &Solution,
    avail: &AvailabilityState,
) -> FeasibilityReport {
    let mut violations = Vec::new();
    let order = solution.tour.order();
    if order.first() != Some(&START_CITY) {
        violations.push(Violation::TourStart);
    }
    let n = instance.n();
    let mut seen = vec![false; n];
    for &city in order {
        if city >= n || !avail.is_city_available(city) {
            violations.push(Violation::UnavailableCity(city));
            continue;
        }
        if seen[city] {
            violations.push(Violation::DuplicateCity(city));
        }
        seen[city] = true;
    }
    for city in 0..n {
        if avail.is_city_available(city) && !seen[city] {
            violations.push(Violation::MissingCity(city));
        }
    }

    let packing = &solution.packing;
    if packing.len() != instance.m() {
        violations.push(Violation::PackingLength {
            expected: instance.m(),
            actual: packing.len(),
        });
    } else {
        for k in packing.packed_items() {
            if !avail.is_item_available(instance, k) {
                violations.push(Violation::UnavailableItem(k));
            }
        }
        let weight = packed_weight(instance, packing);
        if weight > instance.capacity() {
            violations.push(Violation::CapacityExceeded {
                excess: weight - instance.capacity(),
            });
        }
    }
    FeasibilityReport { violations }
}
