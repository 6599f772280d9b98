//! Dividing a group of performers into fractions.

use rand::seq::SliceRandom;
use rand::Rng;

pub type Partition = Vec<Vec<String>>;

/// Sizes for `n` members over `k` fractions: they differ by at most one and
/// the larger fractions come first.
pub fn fraction_sizes(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|i| n / k + usize::from(i < n % k)).collect()
}

/// A uniformly random partition of `group` into `k` balanced fractions.
pub fn random_partition<R: Rng + ?Sized>(group: &[String], k: usize, rng: &mut R) -> Partition {
    let mut shuffled = group.to_vec();
    shuffled.shuffle(rng);
    let mut rest = shuffled.as_slice();
    fraction_sizes(group.len(), k)
        .into_iter()
        .map(|size| {
            let (head, tail) = rest.split_at(size);
            rest = tail;
            head.to_vec()
        })
        .collect()
}

/// Restricts a remembered partition to the present `group` and places
/// newcomers one by one into the currently smallest fraction (lowest index
/// on ties). Absent members stay remembered.
pub fn refresh_persistent(memory: &mut Partition, group: &[String]) -> Partition {
    let mut current: Partition = memory
        .iter()
        .map(|f| f.iter().filter(|m| group.contains(m)).cloned().collect())
        .collect();
    for member in group {
        if memory.iter().any(|f| f.contains(member)) {
            continue;
        }
        let smallest = (0..current.len())
            .min_by_key(|i| (current[*i].len(), *i))
            .expect("a partition has at least one fraction");
        current[smallest].push(member.clone());
        memory[smallest].push(member.clone());
    }
    current
}
