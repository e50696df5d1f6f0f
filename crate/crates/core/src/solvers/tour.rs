//! TSP tour construction: nearest neighbour, then 2-opt with don't-look bits.
//!
//! Only tour length matters here; items are ignored and no objective evaluation is made.
//! After the don't-look-bit queue drains, a full scan of all 2-opt moves is run and any
//! improving move found there restarts the queue, so the result is always 2-opt optimal.

use std::collections::VecDeque;

use crate::dynamics::rng::StreamRng;
use crate::dynamics::AvailabilityState;
use crate::model::{Instance, Tour, START_CITY};

/// Minimum length decrease for a 2-opt move to count as improving.
const IMPROVEMENT_EPS: f64 = 1e-9;

pub fn tour_construct(instance: &Instance, avail: &AvailabilityState, seed: u64) -> Tour {
    tour_construct_with(instance, avail, &mut StreamRng::from_seed(seed))
}

pub fn tour_construct_with(
    instance: &Instance,
    avail: &AvailabilityState,
    rng: &mut StreamRng,
) -> Tour {
    let mut order = nearest_neighbour(instance, avail, rng);
    two_opt(instance, &mut order);
    Tour::from_order_unchecked(order)
}

/// Nearest-neighbour walk from the start city over available cities. Exact distance ties
/// are broken uniformly at random.
pub fn nearest_neighbour(
    instance: &Instance,
    avail: &AvailabilityState,
    rng: &mut StreamRng,
) -> Vec<usize> {
    let mut remaining: Vec<usize> = avail
        .available_cities()
        .filter(|&c| c != START_CITY)
        .collect();
    let mut order = Vec::with_capacity(remaining.len() + 1);
    order.push(START_CITY);
    let mut current = START_CITY;
    let mut ties = Vec::new();
    while !remaining.is_empty() {
        let mut best = f64::INFINITY;
        ties.clear();
        for (idx, &c) in remaining.iter().enumerate() {
            let d = instance.distance(current, c);
            if d < best {
                best = d;
                ties.clear();
                ties.push(idx);
            } else if d == best {
                ties.push(idx);
            }
        }
        let pick = if ties.len() == 1 {
            ties[0]
        } else {
            ties[rng.below(ties.len())]
        };
        current = remaining.swap_remove(pick);
        order.push(current);
    }
    order
}

/// Length change of the 2-opt move that removes the edges leaving positions `i < j`
/// and reverses `order[i + 1..=j]`.
fn move_delta(instance: &Instance, order: &[usize], i: usize, j: usize) -> f64 {
    let len = order.len();
    let (a, b) = (order[i], order[i + 1]);
    let (c, d) = (order[j], order[(j + 1) % len]);
    instance.distance(a, c) + instance.distance(b, d)
        - instance.distance(a, b)
        - instance.distance(c, d)
}

fn is_valid_move(len: usize, i: usize, j: usize) -> bool {
    i < j && j >= i + 2 && !(i == 0 && j == len - 1)
}

/// Exhaustive scan; returns the first improving move in `(i, j)` order.
pub fn find_improving_two_opt(instance: &Instance, order: &[usize]) -> Option<(usize, usize)> {
    let len = order.len();
    if len < 4 {
        return None;
    }
    for i in 0..len - 2 {
        for j in i + 2..len {
            if is_valid_move(len, i, j) && move_delta(instance, order, i, j) < -IMPROVEMENT_EPS {
                return Some((i, j));
            }
        }
    }
    None
}

fn apply_move(order: &mut [usize], pos: &mut [usize], i: usize, j: usize) {
    order[i + 1..=j].reverse();
    for p in i + 1..=j {
        pos[order[p]] = p;
    }
}

pub fn two_opt(instance: &Instance, order: &mut [usize]) {
    let len = order.len();
    if len < 4 {
        return;
    }
    let mut pos = vec![usize::MAX; instance.n()];
    for (p, &c) in order.iter().enumerate() {
        pos[c] = p;
    }
    let mut queued = vec![false; instance.n()];
    let mut queue: VecDeque<usize> = VecDeque::with_capacity(len);
    for &c in order.iter() {
        queued[c] = true;
        queue.push_back(c);
    }

    let wake =
        |queue: &mut VecDeque<usize>, queued: &mut [bool], order: &[usize], i: usize, j: usize| {
            for p in [i, i + 1, j, (j + 1) % len] {
                let c = order[p];
                if !queued[c] {
                    queued[c] = true;
                    queue.push_back(c);
                }
            }
        };

    loop {
        while let Some(city) = queue.pop_front() {
            queued[city] = false;
            let p = pos[city];
            // the two edges touching `city` start at positions p - 1 and p
            let mut applied = None;
            'edges: for e in [(p + len - 1) % len, p] {
                for q in 0..len {
                    let (i, j) = if e < q { (e, q) } else { (q, e) };
                    if is_valid_move(len, i, j)
                        && move_delta(instance, order, i, j) < -IMPROVEMENT_EPS
                    {
                        applied = Some((i, j));
                        break 'edges;
                    }
                }
            }
            if let Some((i, j)) = applied {
                apply_move(order, &mut pos, i, j);
                wake(&mut queue, &mut queued, order, i, j);
            }
        }
        match find_improving_two_opt(instance, order) {
            Some((i, j)) => {
                apply_move(order, &mut pos, i, j);
                wake(&mut queue, &mut queued, order, i, j);
            }
            None => break,
        }
    }
}
