//! Bubble sort as performed by a line of people and a pointer, Deictor,
//! who raises an arm at the start of each pass and lowers it on a swap.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_MAX_ITERATIONS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum SwapPolicy {
    /// Swap exactly when the left value is greater.
    Obedient,
    /// Defy the comparison with probability `p`.
    Willful { p: f64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comparison {
    pub left: usize,
    pub right: usize,
    pub swapped: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Iteration {
    pub comparisons: Vec<Comparison>,
    /// Deictor's arm at the end of the pass; up iff nobody swapped.
    pub flag_raised_at_end: bool,
    /// Value order after the pass, as a melodic contour.
    pub contour: Vec<i64>,
}

impl Iteration {
    pub fn swaps(&self) -> usize {
        self.comparisons.iter().filter(|c| c.swapped).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// Stopped with the line in ascending order.
    Sorted,
    /// Stopped on a swap-free pass, but the line is not sorted.
    SelfDetermined,
    /// Still swapping when the pass cap was reached.
    Nonterminating { cap: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerformatizationTrace {
    pub initial: Vec<i64>,
    pub iterations: Vec<Iteration>,
    pub final_order: Vec<i64>,
    pub verdict: Verdict,
}

impl PerformatizationTrace {
    /// One JSON object per iteration, newline terminated.
    pub fn to_json_lines(&self) -> String {
        self.iterations
            .iter()
            .enumerate()
            .map(|(i, it)| {
                let mut v = serde_json::to_value(it).expect("iteration serializes");
                v["iteration"] = serde_json::Value::from(i + 1);
                v.to_string() + "\n"
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BubbleError {
    #[error("at least one value is required")]
    Empty,
    #[error("probability {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error("iteration cap must be positive")]
    ZeroCap,
}

/// Runs full passes until one has no swaps or `max_iterations` is hit.
pub fn performatize_bubble_sort(
    initial: &[i64],
    policy: SwapPolicy,
    max_iterations: usize,
) -> Result<PerformatizationTrace, BubbleError> {
    if initial.is_empty() {
        return Err(BubbleError::Empty);
    }
    if max_iterations == 0 {
        return Err(BubbleError::ZeroCap);
    }
    let mut rng = match policy {
        SwapPolicy::Obedient => None,
        SwapPolicy::Willful { p, seed } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(BubbleError::BadProbability(p));
            }
            Some((p, ChaCha8Rng::seed_from_u64(seed)))
        }
    };
    let mut line = initial.to_vec();
    let mut iterations = Vec::new();
    loop {
        let mut arm_up = true;
        let mut comparisons = Vec::with_capacity(line.len().saturating_sub(1));
        for left in 0..line.len().saturating_sub(1) {
            let right = left + 1;
            let out_of_order = line[left] > line[right];
            let swapped = match &mut rng {
                None => out_of_order,
                Some((p, rng)) => out_of_order != rng.gen_bool(*p),
            };
            if swapped {
                line.swap(left, right);
                arm_up = false;
            }
            comparisons.push(Comparison { left, right, swapped });
        }
        iterations.push(Iteration {
            comparisons,
            flag_raised_at_end: arm_up,
            contour: line.clone(),
        });
        if arm_up {
            let verdict = if line.windows(2).all(|w| w[0] <= w[1]) {
                Verdict::Sorted
            } else {
                Verdict::SelfDetermined
            };
            return Ok(PerformatizationTrace {
                initial: initial.to_vec(),
                iterations,
                final_order: line,
                verdict,
            });
        }
        if iterations.len() == max_iterations {
            return Ok(PerformatizationTrace {
                initial: initial.to_vec(),
                iterations,
                final_order: line,
                verdict: Verdict::Nonterminating { cap: max_iterations },
            });
        }
    }
}
