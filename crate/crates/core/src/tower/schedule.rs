//! The order-preserving bijection `sigma` from `{(0,0)} ∪ {(r,s) : 1 <= s <= r}`
//! (dictionary order) onto the nonnegative integers, and the stage wiring it
//! induces: stage `N` draws its function from the dictionary entry named by
//! `sigma^{-1}(N-1)`.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ScheduleIndex {
    pub r: u64,
    pub s: u64,
}

impl ScheduleIndex {
    pub fn new(r: u64, s: u64) -> Self {
        assert!((r == 0 && s == 0) || (1 <= s && s <= r), "({r},{s}) is not schedulable");
        Self { r, s }
    }

    /// `sigma(r, s)`.
    pub fn rank(&self) -> u64 {
        sigma(self.r, self.s)
    }
}

pub fn sigma(r: u64, s: u64) -> u64 {
    if r == 0 {
        0
    } else {
        r * (r - 1) / 2 + s
    }
}

/// `sigma^{-1}(i)`.
pub fn sigma_inverse(i: u64) -> ScheduleIndex {
    if i == 0 {
        return ScheduleIndex { r: 0, s: 0 };
    }
    let j = i - 1;
    // largest r with r(r-1)/2 <= j
    let mut r = ((1.0 + (1.0 + 8.0 * j as f64).sqrt()) / 2.0).floor() as u64;
    while r * (r - 1) / 2 > j {
        r -= 1;
    }
    while (r + 1) * r / 2 <= j {
        r += 1;
    }
    ScheduleIndex { r, s: j - r * (r - 1) / 2 + 1 }
}

/// The schedule index used at stage `n >= 1`.
pub fn schedule(n: u64) -> ScheduleIndex {
    assert!(n >= 1, "stages are numbered from 1");
    sigma_inverse(n - 1)
}

/// Dictionary entry `(level, j)` supplying stage `n`: `g_{0,r+1}` when `r = s`,
/// otherwise `g_{sigma(s,s), r-s}`.
pub fn dictionary_source(n: u64) -> (usize, usize) {
    let ScheduleIndex { r, s } = schedule(n);
    if r == s {
        (0, (r + 1) as usize)
    } else {
        (sigma(s, s) as usize, (r - s) as usize)
    }
}

/// Dictionary levels consulted by stages `1..=n`, ascending.
pub fn levels_needed(n: u64) -> Vec<usize> {
    let mut v: Vec<usize> = (1..=n).map(|m| dictionary_source(m).0).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Largest entry index `j` drawn from `level` by stages `1..=n`.
pub fn max_entry_needed(level: usize, n: u64) -> usize {
    (1..=n)
        .map(dictionary_source)
        .filter(|&(l, _)| l == level)
        .map(|(_, j)| j)
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn enumerate(count: usize) -> Vec<ScheduleIndex> {
        let mut v = vec![ScheduleIndex { r: 0, s: 0 }];
        let mut r = 1;
        while v.len() < count {
            for s in 1..=r {
                v.push(ScheduleIndex { r, s });
            }
            r += 1;
        }
        v.sort();
        v.truncate(count);
        v
    }

    #[test]
    fn first_stages() {
        let expect = [(0, 0), (1, 1), (2, 1), (2, 2), (3, 1)];
        for (n, &(r, s)) in expect.iter().enumerate() {
            assert_eq!(schedule(n as u64 + 1), ScheduleIndex { r, s });
        }
    }

    #[test]
    fn wiring_of_first_stages() {
        assert_eq!(dictionary_source(1), (0, 1));
        assert_eq!(dictionary_source(2), (0, 2));
        assert_eq!(dictionary_source(3), (1, 1));
        assert_eq!(dictionary_source(4), (0, 3));
        assert_eq!(dictionary_source(5), (1, 2));
        assert_eq!(dictionary_source(6), (3, 1));
        assert_eq!(levels_needed(3), vec![0, 1]);
        assert_eq!(max_entry_needed(0, 3), 2);
    }

    #[test]
    fn matches_sorted_enumeration() {
        let brute = enumerate(2000);
        for (i, idx) in brute.iter().enumerate() {
            assert_eq!(sigma_inverse(i as u64), *idx);
            assert_eq!(idx.rank(), i as u64);
        }
    }

    #[test]
    fn each_entry_scheduled_once() {
        let mut seen = std::collections::HashSet::new();
        for n in 1..=20 {
            assert!(seen.insert(dictionary_source(n)));
        }
    }

    proptest! {
        #[test]
        fn sigma_round_trips(i in 0u64..10_000_000) {
            let idx = sigma_inverse(i);
            prop_assert!((idx.r == 0 && idx.s == 0) || (1 <= idx.s && idx.s <= idx.r));
            prop_assert_eq!(idx.rank(), i);
        }

        #[test]
        fn order_preserving(i in 0u64..1_000_000) {
            prop_assert!(sigma_inverse(i) < sigma_inverse(i + 1));
        }
    }
}
