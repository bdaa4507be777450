//! Fixed-capacity archive of mutually non-dominated solutions.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::cost::{dominates, total_path_cost, CostVector, Solution, Weights};

/// Default archive size.
pub const PARETO_CAPACITY: usize = 5;

/// Anything with a cost vector.
pub trait Scored {
    fn costs(&self) -> &CostVector;
}

impl Scored for CostVector {
    fn costs(&self) -> &CostVector {
        self
    }
}

impl Scored for Solution {
    fn costs(&self) -> &CostVector {
        &self.costs
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoSet<T = Solution> {
    members: Vec<T>,
    capacity: usize,
    /// Path weights used to pick the member evicted on overflow.
    weights: Weights,
}

impl<T: Scored> ParetoSet<T> {
    pub fn new(weights: Weights) -> Self {
        Self::with_capacity(PARETO_CAPACITY, weights)
    }

    pub fn with_capacity(capacity: usize, weights: Weights) -> Self {
        Self { members: Vec::new(), capacity: capacity.max(1), weights }
    }

    pub fn members(&self) -> &[T] {
        &self.members
    }

    pub fn into_members(self) -> Vec<T> {
        self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Offers `s` to the archive. Rejected if a member dominates it;
    /// otherwise members it dominates are dropped and it joins. On overflow
    /// the member with the largest total path cost (earliest on ties) leaves.
    /// Returns whether `s` is a member afterwards.
    pub fn insert(&mut self, s: T) -> bool {
        if self.members.iter().any(|m| dominates(m.costs(), s.costs())) {
            return false;
        }
        self.members.retain(|m| !dominates(s.costs(), m.costs()));
        self.members.push(s);
        if self.members.len() > self.capacity {
            let w = &self.weights;
            let mut worst = 0;
            for (i, m) in self.members.iter().enumerate() {
                if total_path_cost(m.costs(), w) > total_path_cost(self.members[worst].costs(), w) {
                    worst = i;
                }
            }
            self.members.remove(worst);
            return worst != self.members.len();
        }
        true
    }

    /// Member with the smallest value of `key`.
    pub fn min_by(&self, key: impl Fn(&T) -> f64) -> Option<&T> {
        self.members.iter().min_by(|a, b| key(a).total_cmp(&key(b)))
    }
}

impl ParetoSet<Solution> {
    pub fn best_total(&self) -> Option<&Solution> {
        self.min_by(|s| s.total_cost)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(t: [f64; 5]) -> CostVector {
        CostVector {
            layout_distance: t[0],
            layout_rotation: t[1],
            path_length: t[2],
            path_time: t[3],
            path_narrowness: t[4],
            ..CostVector::default()
        }
    }

    fn w() -> Weights {
        Weights::default()
    }

    #[test]
    fn dominated_newcomer_is_rejected() {
        let mut s = ParetoSet::new(w());
        assert!(s.insert(v([0.0, 0.0, 0.1, 0.1, 0.0])));
        let before = s.clone();
        assert!(!s.insert(v([0.0, 0.0, 0.2, 0.1, 0.0])));
        assert_eq!(s, before);
    }

    #[test]
    fn newcomer_evicts_what_it_dominates() {
        let mut s = ParetoSet::new(w());
        s.insert(v([1.0, 0.0, 0.2, 0.3, 0.0]));
        s.insert(v([0.0, 1.0, 0.3, 0.2, 0.0]));
        s.insert(v([2.0, 2.0, 0.0, 0.0, 0.0]));
        assert_eq!(s.len(), 3);
        assert!(s.insert(v([0.0, 0.0, 0.2, 0.2, 0.0])));
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn overflow_evicts_largest_path_cost() {
        let mut s = ParetoSet::new(w());
        for i in 0..5 {
            let x = f64::from(i) * 0.1;
            assert!(s.insert(v([x, 0.0, 0.5 - x, 0.0, 0.0])));
        }
        // Incomparable with everyone and the worst path cost: bounced.
        assert!(!s.insert(v([-1.0, 0.0, 0.9, 0.0, 0.0])));
        assert_eq!(s.len(), 5);
        // Incomparable with a better path cost: the 0.5 member leaves.
        assert!(s.insert(v([10.0, 0.0, 0.05, 0.0, 0.0])));
        assert_eq!(s.len(), 5);
        assert!(s.members().iter().all(|m| m.path_length < 0.5));
    }

    /// Sequential brute force: filter `set + s` down to its non-dominated
    /// elements, then apply the eviction rule.
    fn oracle(stream: &[CostVector]) -> Vec<CostVector> {
        let mut set: Vec<CostVector> = Vec::new();
        for s in stream {
            let mut cand = set.clone();
            cand.push(*s);
            let nd: Vec<CostVector> = cand
                .iter()
                .enumerate()
                .filter(|(i, a)| !cand.iter().enumerate().any(|(j, b)| j != *i && dominates(b, a)))
                .map(|(_, a)| *a)
                .collect();
            // `s` survives only if it is non-dominated; previous members
            // that were dominated by `s` drop out either way.
            set = nd;
            if set.len() > PARETO_CAPACITY {
                let worst = (0..set.len())
                    .fold(0, |k, i| {
                        if total_path_cost(&set[i], &w()) > total_path_cost(&set[k], &w()) {
                            i
                        } else {
                            k
                        }
                    });
                set.remove(worst);
            }
        }
        set
    }

    fn arb_stream() -> impl Strategy<Value = Vec<CostVector>> {
        proptest::collection::vec(proptest::array::uniform5(0u8..6), 0..50)
            .prop_map(|vs| vs.into_iter().map(|t| v(t.map(|x| f64::from(x) / 5.0))).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]
        #[test]
        fn insert_matches_brute_force(stream in arb_stream()) {
            let mut s = ParetoSet::new(w());
            for c in &stream {
                s.insert(*c);
                let m = s.members();
                prop_assert!(m.len() <= PARETO_CAPACITY);
                for a in m {
                    prop_assert!(!m.iter().any(|b| dominates(b, a)));
                }
            }
            prop_assert_eq!(s.members().to_vec(), oracle(&stream));
        }
    }

    #[test]
    fn duplicates_are_kept() {
        // Equal vectors do not dominate each other.
        let mut s = ParetoSet::new(w());
        assert!(s.insert(v([0.0; 5])));
        assert!(s.insert(v([0.0; 5])));
        assert_eq!(s.members(), &[v([0.0; 5]), v([0.0; 5])]);
    }
}
