//! Synthetic instances in the style of the standard TTP benchmark suite.
//!
//! Constants: coordinates are integer points of a 1000 x 1000 grid; every city except the
//! start city holds `items_per_city` items, item `j * (n - 1) + (c - 1)` being the `j`-th
//! item of city `c`.
//! - uncorrelated: weight and profit uniform in `[1, 1000]`;
//! - uncorrelated, similar weights: weight in `[1000, 1010]`, profit in `[1, 1000]`;
//! - bounded strongly correlated: weight in `[1, 1000]`, profit = weight + 100.
//!
//! Capacity is `ceil(c / 11 * total weight)`, speeds are `0.1` and `1.0`, and the renting
//! rate is `total profit / (2 * T)` with `T` the full-speed time of the nearest-neighbour
//! tour from the start city (ties to the lower index). All of these end up in the header of
//! the written file.

use std::fmt;
use std::str::FromStr;

use crate::dynamics::rng::{StreamRng, DOMAIN_GENERATOR};
use crate::error::{Error, Result};
use crate::model::{tour_length, EdgeWeightKind, Instance, InstanceParts, Item, Point, START_CITY};

const GRID: usize = 1000;
const MIN_SPEED: f64 = 0.1;
const MAX_SPEED: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KnapsackKind {
    Uncorrelated,
    UncorrelatedSimilarWeights,
    BoundedStronglyCorrelated,
}

impl KnapsackKind {
    /// Identifier used on the command line and in scenario files.
    pub fn as_str(self) -> &'static str {
        match self {
            KnapsackKind::Uncorrelated => "uncorr",
            KnapsackKind::UncorrelatedSimilarWeights => "uncorr-similar-weights",
            KnapsackKind::BoundedStronglyCorrelated => "bounded-strongly-corr",
        }
    }

    /// Value of the `KNAPSACK DATA TYPE` header.
    pub fn data_type(self) -> &'static str {
        match self {
            KnapsackKind::Uncorrelated => "uncorrelated",
            KnapsackKind::UncorrelatedSimilarWeights => "uncorrelated, similar weights",
            KnapsackKind::BoundedStronglyCorrelated => "bounded strongly corr",
        }
    }
}

impl fmt::Display for KnapsackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KnapsackKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "uncorr" | "uncorrelated" => Ok(KnapsackKind::Uncorrelated),
            "uncorr-similar-weights" => Ok(KnapsackKind::UncorrelatedSimilarWeights),
            "bounded-strongly-corr" => Ok(KnapsackKind::BoundedStronglyCorrelated),
            other => Err(format!(
                "unknown knapsack kind `{other}` (expected uncorr, uncorr-similar-weights or bounded-strongly-corr)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GeneratorParams {
    pub cities: usize,
    pub items_per_city: usize,
    pub kind: KnapsackKind,
    /// 1..=10
    pub capacity_category: u32,
    pub seed: u64,
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<()> {
        if self.cities < 2 {
            return Err(Error::Config(format!(
                "need at least 2 cities, got {}",
                self.cities
            )));
        }
        if self.items_per_city < 1 {
            return Err(Error::Config("need at least 1 item per city".into()));
        }
        if !(1..=10).contains(&self.capacity_category) {
            return Err(Error::Config(format!(
                "capacity category must be in 1..=10, got {}",
                self.capacity_category
            )));
        }
        Ok(())
    }

    pub fn instance_name(&self) -> String {
        format!(
            "synthetic{}_n{}_{}_{:02}_s{}",
            self.cities,
            (self.cities - 1) * self.items_per_city,
            self.kind,
            self.capacity_category,
            self.seed
        )
    }
}

fn uniform(rng: &mut StreamRng, lo: usize, hi: usize) -> f64 {
    (lo + rng.below(hi - lo + 1)) as f64
}

pub fn generate_instance(params: &GeneratorParams) -> Result<Instance> {
    params.validate()?;
    let mut rng = StreamRng::new(params.seed, DOMAIN_GENERATOR, 0, 0);
    let n = params.cities;
    let coords: Vec<Point> = (0..n)
        .map(|_| Point {
            x: rng.below(GRID) as f64,
            y: rng.below(GRID) as f64,
        })
        .collect();

    let mut items = Vec::with_capacity((n - 1) * params.items_per_city);
    for _ in 0..params.items_per_city {
        for city in 1..n {
            let (profit, weight) = match params.kind {
                KnapsackKind::Uncorrelated => {
                    let w = uniform(&mut rng, 1, 1000);
                    (uniform(&mut rng, 1, 1000), w)
                }
                KnapsackKind::UncorrelatedSimilarWeights => {
                    let w = uniform(&mut rng, 1000, 1010);
                    (uniform(&mut rng, 1, 1000), w)
                }
                KnapsackKind::BoundedStronglyCorrelated => {
                    let w = uniform(&mut rng, 1, 1000);
                    (w + 100.0, w)
                }
            };
            items.push(Item {
                profit,
                weight,
                city,
            });
        }
    }

    let total_weight: f64 = items.iter().map(|it| it.weight).sum();
    let total_profit: f64 = items.iter().map(|it| it.profit).sum();
    let capacity = (f64::from(params.capacity_category) / 11.0 * total_weight).ceil();

    let mut parts = InstanceParts {
        name: params.instance_name(),
        knapsack_data_type: params.kind.data_type().to_string(),
        edge_weight_kind: EdgeWeightKind::Ceil2d,
        coords,
        items,
        capacity,
        renting_rate: 0.0,
        min_speed: MIN_SPEED,
        max_speed: MAX_SPEED,
    };
    let probe = Instance::new(parts.clone())?;
    let nn_time = tour_length(&probe, &nearest_neighbour_order(&probe)) / MAX_SPEED;
    parts.renting_rate = if nn_time > 0.0 {
        total_profit / (2.0 * nn_time)
    } else {
        0.0
    };
    Instance::new(parts)
}

/// Deterministic nearest-neighbour order over all cities, ties to the lower index.
pub(crate) fn nearest_neighbour_order(instance: &Instance) -> Vec<usize> {
    let n = instance.n();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut current = START_CITY;
    visited[current] = true;
    order.push(current);
    for _ in 1..n {
        let mut best: Option<(f64, usize)> = None;
        for c in 0..n {
            if visited[c] {
                continue;
            }
            let d = instance.distance(current, c);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, c));
            }
        }
        let (_, next) = best.expect("unvisited city remains");
        visited[next] = true;
        order.push(next);
        current = next;
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kind: KnapsackKind) -> GeneratorParams {
        GeneratorParams {
            cities: 12,
            items_per_city: 3,
            kind,
            capacity_category: 4,
            seed: 5,
        }
    }

    #[test]
    fn two_cities_one_item() {
        let inst = generate_instance(&GeneratorParams {
            cities: 2,
            items_per_city: 1,
            kind: KnapsackKind::Uncorrelated,
            capacity_category: 1,
            seed: 0,
        })
        .unwrap();
        assert_eq!(inst.m(), 1);
        assert_eq!(inst.item(0).city, 1);
    }

    #[test]
    fn strongly_correlated_offset() {
        let inst = generate_instance(&params(KnapsackKind::BoundedStronglyCorrelated)).unwrap();
        assert!(inst.items().iter().all(|it| it.profit - it.weight == 100.0));
        assert_eq!(inst.m(), 33);
    }

    #[test]
    fn value_ranges_and_capacity_rule() {
        for kind in [
            KnapsackKind::Uncorrelated,
            KnapsackKind::UncorrelatedSimilarWeights,
            KnapsackKind::BoundedStronglyCorrelated,
        ] {
            let inst = generate_instance(&params(kind)).unwrap();
            let (wlo, whi) = match kind {
                KnapsackKind::UncorrelatedSimilarWeights => (1000.0, 1010.0),
                _ => (1.0, 1000.0),
            };
            assert!(inst
                .items()
                .iter()
                .all(|it| it.weight >= wlo && it.weight <= whi));
            assert!(inst.items().iter().all(|it| it.weight.fract() == 0.0));
            let total: f64 = inst.items().iter().map(|it| it.weight).sum();
            assert_eq!(inst.capacity(), (4.0 / 11.0 * total).ceil());
            assert!(inst.renting_rate() > 0.0);
            assert!(inst
                .coords()
                .iter()
                .all(|p| p.x >= 0.0 && p.x < 1000.0 && p.y >= 0.0 && p.y < 1000.0));
            for c in 1..inst.n() {
                assert_eq!(inst.items_at(c).len(), 3);
            }
            assert!(inst.items_at(0).is_empty());
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let p = params(KnapsackKind::Uncorrelated);
        let a = generate_instance(&p).unwrap();
        let b = generate_instance(&p).unwrap();
        assert_eq!(a.parts().coords, b.parts().coords);
        assert_eq!(a.parts().items, b.parts().items);
        assert_eq!(a.renting_rate(), b.renting_rate());
        let c = generate_instance(&GeneratorParams { seed: 6, ..p }).unwrap();
        assert_ne!(a.parts().coords, c.parts().coords);
    }

    #[test]
    fn rejects_bad_params() {
        let p = params(KnapsackKind::Uncorrelated);
        assert!(generate_instance(&GeneratorParams {
            capacity_category: 11,
            ..p
        })
        .is_err());
        assert!(generate_instance(&GeneratorParams {
            capacity_category: 0,
            ..p
        })
        .is_err());
        assert!(generate_instance(&GeneratorParams { cities: 1, ..p }).is_err());
        assert!(generate_instance(&GeneratorParams {
            items_per_city: 0,
            ..p
        })
        .is_err());
    }
}
