use std::fmt;
use std::str::FromStr;

use crate::dynamics::rng::StreamRng;
use crate::dynamics::{AvailabilityState, Feature};
use crate::error::{Error, Result};
use crate::model::{Instance, Solution};

use super::bitflip::bitflip;
use super::budget::Budget;
use super::insertion::insertion;
use super::pack_iterative::pack_iterative_search;
use super::rea::rea;
use super::tour::tour_construct_with;

/// The seven re-optimization pipelines, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pipeline {
    ItemsBitflip,
    ItemsRea,
    ItemsPackIterative,
    ItemsPackIterativeBitflip,
    CitiesInsertion,
    CitiesConstruct,
    CitiesConstructInsertion,
}

impl Pipeline {
    pub const ALL: [Pipeline; 7] = [
        Pipeline::ItemsBitflip,
        Pipeline::ItemsRea,
        Pipeline::ItemsPackIterative,
        Pipeline::ItemsPackIterativeBitflip,
        Pipeline::CitiesInsertion,
        Pipeline::CitiesConstruct,
        Pipeline::CitiesConstructInsertion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Pipeline::ItemsBitflip => "items-bitflip",
            Pipeline::ItemsRea => "items-rea",
            Pipeline::ItemsPackIterative => "items-packiterative",
            Pipeline::ItemsPackIterativeBitflip => "items-packiterative-bitflip",
            Pipeline::CitiesInsertion => "cities-insertion",
            Pipeline::CitiesConstruct => "cities-construct",
            Pipeline::CitiesConstructInsertion => "cities-construct-insertion",
        }
    }

    /// Position in [`Pipeline::ALL`].
    pub fn index(self) -> usize {
        Pipeline::ALL.iter().position(|p| *p == self).unwrap()
    }

    pub fn feature(self) -> Feature {
        match self {
            Pipeline::ItemsBitflip
            | Pipeline::ItemsRea
            | Pipeline::ItemsPackIterative
            | Pipeline::ItemsPackIterativeBitflip => Feature::Items,
            _ => Feature::Cities,
        }
    }

    /// Whether the pipeline discards the incumbent component and rebuilds it.
    pub fn is_scratch(self) -> bool {
        matches!(
            self,
            Pipeline::ItemsPackIterative
                | Pipeline::ItemsPackIterativeBitflip
                | Pipeline::CitiesConstruct
                | Pipeline::CitiesConstructInsertion
        )
    }

    pub fn for_feature(feature: Feature) -> impl Iterator<Item = Pipeline> {
        Pipeline::ALL
            .into_iter()
            .filter(move |p| p.feature() == feature)
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Pipeline::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown pipeline `{s}`")))
    }
}

/// Runs one pipeline on a repaired post-disruption solution.
///
/// Recover pipelines start from `solution`; scratch pipelines rebuild their component and
/// return their own result even when it is worse than `solution`. A pipeline that cannot
/// make a single evaluation returns `solution` unchanged. In the composed pipelines the
/// constructor may use at most half of the remaining budget and the climber gets the rest.
pub fn run_pipeline(
    kind: Pipeline,
    instance: &Instance,
    solution: &Solution,
    avail: &AvailabilityState,
    budget: &mut Budget,
    rng: &mut StreamRng,
) -> Result<Solution> {
    if budget.is_exhausted() {
        return Ok(solution.clone());
    }
    match kind {
        Pipeline::ItemsBitflip => bitflip(instance, solution, avail, budget),
        Pipeline::ItemsRea => rea(instance, solution, avail, budget, rng),
        Pipeline::ItemsPackIterative => {
            let outcome = pack_iterative_search(instance, solution.tour(), avail, budget)?;
            Ok(match outcome.objective {
                Some(f) => Solution::evaluated(solution.tour().clone(), outcome.packing, f),
                None => solution.clone(),
            })
        }
        Pipeline::ItemsPackIterativeBitflip => {
            let half = (budget.remaining() / 2).max(1);
            let outcome = budget.capped(half, |b| {
                pack_iterative_search(instance, solution.tour(), avail, b)
            })?;
            let Some(f) = outcome.objective else {
                return Ok(solution.clone());
            };
            let packed = Solution::evaluated(solution.tour().clone(), outcome.packing, f);
            bitflip(instance, &packed, avail, budget)
        }
        Pipeline::CitiesInsertion => insertion(instance, solution, avail, budget),
        Pipeline::CitiesConstruct => {
            let tour = tour_construct_with(instance, avail, rng);
            let mut fresh = Solution::new(tour, solution.packing().clone());
            Ok(match budget.evaluate_solution(instance, &mut fresh)? {
                Some(_) => fresh,
                None => solution.clone(),
            })
        }
        Pipeline::CitiesConstructInsertion => {
            let tour = tour_construct_with(instance, avail, rng);
            let fresh = Solution::new(tour, solution.packing().clone());
            let out = insertion(instance, &fresh, avail, budget)?;
            Ok(if out.cached_objective().is_some() {
                out
            } else {
                solution.clone()
            })
        }
    }
}
