//! Independent oracles and random fixtures shared by the integration tests.
#![allow(dead_code)]

use dynttp::dynamics::rng::StreamRng;
use dynttp::model::{EdgeWeightKind, Instance, InstanceParts, Item, Point};

/// Small random instance with integer coordinates on a 100x100 grid.
pub fn random_instance(rng: &mut StreamRng, n: usize, m: usize) -> Instance {
    let coords = (0..n)
        .map(|_| Point {
            x: rng.below(100) as f64,
            y: rng.below(100) as f64,
        })
        .collect();
    let items: Vec<Item> = (0..m)
        .map(|_| Item {
            profit: (1 + rng.below(100)) as f64,
            weight: (1 + rng.below(50)) as f64,
            city: 1 + rng.below(n - 1),
        })
        .collect();
    let total: f64 = items.iter().map(|i| i.weight).sum();
    Instance::new(InstanceParts {
        name: "random".into(),
        knapsack_data_type: "uncorrelated".into(),
        edge_weight_kind: if rng.chance(0.5) {
            EdgeWeightKind::Ceil2d
        } else {
            EdgeWeightKind::Euc2d
        },
        coords,
        items,
        capacity: (total * (0.2 + 0.6 * rng.unit())).max(1.0).floor(),
        renting_rate: 0.05 + 2.0 * rng.unit(),
        min_speed: 0.1,
        max_speed: 1.0,
    })
    .unwrap()
}

fn leg(parts: &InstanceParts, a: usize, b: usize) -> f64 {
    let (p, q) = (parts.coords[a], parts.coords[b]);
    let d = ((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y)).sqrt();
    match parts.edge_weight_kind {
        EdgeWeightKind::Ceil2d => d.ceil(),
        EdgeWeightKind::Euc2d => d,
    }
}

/// Straightforward TTP objective; `None` when the packing is overweight.
pub fn naive_objective(instance: &Instance, order: &[usize], bits: &[bool]) -> Option<f64> {
    let parts = instance.parts();
    let mut capacity_used = 0.0;
    let mut profit = 0.0;
    for (k, item) in parts.items.iter().enumerate() {
        if bits[k] {
            capacity_used += item.weight;
            profit += item.profit;
        }
    }
    if capacity_used > parts.capacity {
        return None;
    }
    let nu = (parts.max_speed - parts.min_speed) / parts.capacity;
    let mut carried = 0.0;
    let mut time = 0.0;
    for step in 0..order.len() {
        let here = order[step];
        for (k, item) in parts.items.iter().enumerate() {
            if bits[k] && item.city == here {
                carried += item.weight;
            }
        }
        let there = if step + 1 == order.len() {
            order[0]
        } else {
            order[step + 1]
        };
        time += leg(parts, here, there) / (parts.max_speed - nu * carried);
    }
    Some(profit - parts.renting_rate * time)
}

pub fn bits_of(mask: u32, m: usize) -> Vec<bool> {
    (0..m).map(|k| mask >> k & 1 == 1).collect()
}

/// Best objective over all packings for a fixed tour, `allowed[k]` false forbids item k.
pub fn best_packing_value(instance: &Instance, order: &[usize], allowed: &[bool]) -> f64 {
    let m = instance.m();
    (0u32..1 << m)
        .map(|mask| bits_of(mask, m))
        .filter(|bits| bits.iter().zip(allowed).all(|(&b, &a)| a || !b))
        .filter_map(|bits| naive_objective(instance, order, &bits))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// All tours starting at city 0 (each permutation of the remaining cities).
pub fn all_tours(n: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let c = rest.remove(i);
            prefix.push(c);
            extend(prefix, rest, out);
            prefix.pop();
            rest.insert(i, c);
        }
    }
    let mut out = Vec::new();
    extend(&mut vec![0], &mut (1..n).collect(), &mut out);
    out
}

/// Objective of every feasible (tour, packing) pair.
pub fn all_objectives(instance: &Instance) -> Vec<f64> {
    let m = instance.m();
    let mut out = Vec::new();
    for tour in all_tours(instance.n()) {
        for mask in 0u32..1 << m {
            if let Some(f) = naive_objective(instance, &tour, &bits_of(mask, m)) {
                out.push(f);
            }
        }
    }
    out
}

pub fn random_permutation_tour(rng: &mut StreamRng, n: usize) -> Vec<usize> {
    let mut rest: Vec<usize> = (1..n).collect();
    for i in (1..rest.len()).rev() {
        let j = rng.below(i + 1);
        rest.swap(i, j);
    }
    let mut order = vec![0];
    order.extend(rest);
    order
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
