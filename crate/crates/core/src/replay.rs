//! Fixed-capacity experience replay with uniform sampling.

use std::sync::Arc;

use rand::Rng;

use crate::{Error, Label, Result};

/// One interaction `(s, a, r, s', terminal)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: Arc<[f64]>,
    pub action: Label,
    pub reward: f64,
    pub next_state: Arc<[f64]>,
    pub terminal: bool,
}

/// Preallocated ring buffer; once full, each push overwrites the oldest entry.
#[derive(Clone, Debug)]
pub struct ReplayMemory<T = Transition> {
    buffer: Vec<T>,
    capacity: usize,
    insert_cursor: usize,
}

impl<T> ReplayMemory<T> {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::invalid("replay capacity must be positive"));
        }
        Ok(ReplayMemory {
            buffer: Vec::with_capacity(capacity),
            capacity,
            insert_cursor: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn push(&mut self, item: T) {
        if self.buffer.len() < self.capacity {
            self.buffer.push(item);
        } else {
            self.buffer[self.insert_cursor] = item;
        }
        self.insert_cursor = (self.insert_cursor + 1) % self.capacity;
    }

    /// Contents from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &T> + '_ {
        let split = if self.buffer.len() < self.capacity {
            0
        } else {
            self.insert_cursor
        };
        self.buffer[split..].iter().chain(&self.buffer[..split])
    }

    /// `k` uniform draws with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Vec<&T>> {
        if self.buffer.is_empty() {
            return Err(Error::invalid("cannot sample from an empty replay memory"));
        }
        let n = self.buffer.len();
        Ok((0..k)
            .map(|_| &self.buffer[rng.random_range(0..n)])
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;
    use proptest::prelude::*;

    #[test]
    fn capacity_one_keeps_latest() {
        let mut m = ReplayMemory::new(1).unwrap();
        m.push('a');
        m.push('b');
        assert_eq!(m.iter().copied().collect::<Vec<_>>(), vec!['b']);
    }

    #[test]
    fn size_grows_then_flattens() {
        let mut m = ReplayMemory::new(5).unwrap();
        for i in 0..12 {
            m.push(i);
            assert_eq!(m.len(), (i + 1).min(5));
        }
    }

    #[test]
    fn singleton_sample_repeats() {
        let mut m = ReplayMemory::new(4).unwrap();
        m.push(7);
        let s = m.sample(3, &mut rng_from(0)).unwrap();
        assert_eq!(s, vec![&7, &7, &7]);
    }

    #[test]
    fn empty_sample_is_an_error() {
        let m: ReplayMemory<u8> = ReplayMemory::new(4).unwrap();
        assert!(m.sample(1, &mut rng_from(0)).is_err());
        assert!(ReplayMemory::<u8>::new(0).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let mut m = ReplayMemory::new(50).unwrap();
        (0..50).for_each(|i| m.push(i));
        let a = m.sample(20, &mut rng_from(5)).unwrap();
        let b = m.sample(20, &mut rng_from(5)).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn holds_last_pushed_items_in_order(cap in 1usize..20, n in 0usize..80) {
            let mut m = ReplayMemory::new(cap).unwrap();
            (0..n).for_each(|i| m.push(i));
            let expected: Vec<usize> = (n.saturating_sub(cap)..n).collect();
            prop_assert_eq!(m.iter().copied().collect::<Vec<_>>(), expected);
        }

        #[test]
        fn samples_are_stored_items(cap in 1usize..20, n in 1usize..60, seed: u64) {
            let mut m = ReplayMemory::new(cap).unwrap();
            (0..n).for_each(|i| m.push(i));
            let stored: Vec<usize> = m.iter().copied().collect();
            for s in m.sample(30, &mut rng_from(seed)).unwrap() {
                prop_assert!(stored.contains(s));
            }
        }
    }
}
