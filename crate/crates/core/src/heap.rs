//! Addressable binary max-heap over dense integer keys.
//!
//! Entries are ordered by priority, highest first; equal priorities pop the
//! smaller `tie_rank` first, then the smaller key. Keys index a position table,
//! so `delete` and `contains` are O(1) lookups plus an O(log n) repair.

use std::cmp::Ordering;

use crate::error::{GaspError, Result};

const ABSENT: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeapEntry {
    pub key: u32,
    pub priority: f64,
    pub tie_rank: u32,
}

impl HeapEntry {
    /// `Greater` means `self` pops first.
    #[inline]
    fn order(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.tie_rank.cmp(&self.tie_rank))
            .then_with(|| other.key.cmp(&self.key))
    }
}

#[derive(Debug, Clone, Default)]
pub struct AddressableHeap {
    entries: Vec<HeapEntry>,
    position: Vec<u32>,
}

impl AddressableHeap {
    /// Heap accepting keys in `[0, key_capacity)` without reallocation of the position table.
    pub fn with_capacity(key_capacity: usize) -> Self {
        AddressableHeap {
            entries: Vec::with_capacity(key_capacity),
            position: vec![ABSENT; key_capacity],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, key: u32) -> bool {
        self.position
            .get(key as usize)
            .is_some_and(|&p| p != ABSENT)
    }

    pub fn peek(&self) -> Option<&HeapEntry> {
        self.entries.first()
    }

    pub fn push(&mut self, key: u32, priority: f64, tie_rank: u32) -> Result<()> {
        debug_assert!(priority >= 0.0, "priority must be non-negative");
        if self.contains(key) {
            return Err(GaspError::DuplicateKey(key as usize));
        }
        if key as usize >= self.position.len() {
            self.position.resize(key as usize + 1, ABSENT);
        }
        let at = self.entries.len();
        self.entries.push(HeapEntry {
            key,
            priority,
            tie_rank,
        });
        self.position[key as usize] = at as u32;
        self.sift_up(at);
        Ok(())
    }

    pub fn pop_highest(&mut self) -> Result<HeapEntry> {
        if self.entries.is_empty() {
            return Err(GaspError::EmptyHeap);
        }
        Ok(self.remove_at(0))
    }

    /// Removes `key` and returns its priority, or `None` when it is not present.
    pub fn delete(&mut self, key: u32) -> Option<f64> {
        let at = *self.position.get(key as usize)?;
        if at == ABSENT {
            return None;
        }
        Some(self.remove_at(at as usize).priority)
    }

    fn remove_at(&mut self, at: usize) -> HeapEntry {
        let last = self.entries.len() - 1;
        self.swap(at, last);
        let removed = self.entries.pop().expect("non-empty");
        self.position[removed.key as usize] = ABSENT;
        if at < self.entries.len() {
            if at > 0 && self.entries[at].order(&self.entries[(at - 1) / 2]) == Ordering::Greater {
                self.sift_up(at);
            } else {
                self.sift_down(at);
            }
        }
        removed
    }

    #[inline]
    fn swap(&mut self, a: usize, b: usize) {
        self.entries.swap(a, b);
        self.position[self.entries[a].key as usize] = a as u32;
        self.position[self.entries[b].key as usize] = b as u32;
    }

    fn sift_up(&mut self, mut at: usize) {
        while at > 0 {
            let parent = (at - 1) / 2;
            if self.entries[at].order(&self.entries[parent]) != Ordering::Greater {
                break;
            }
            self.swap(at, parent);
            at = parent;
        }
    }

    fn sift_down(&mut self, mut at: usize) {
        let n = self.entries.len();
        loop {
            let (l, r) = (2 * at + 1, 2 * at + 2);
            let mut best = at;
            if l < n && self.entries[l].order(&self.entries[best]) == Ordering::Greater {
                best = l;
            }
            if r < n && self.entries[r].order(&self.entries[best]) == Ordering::Greater {
                best = r;
            }
            if best == at {
                break;
            }
            self.swap(at, best);
            at = best;
        }
    }

    #[cfg(test)]
    fn heap_order_holds(&self) -> bool {
        (1..self.entries.len())
            .all(|i| self.entries[(i - 1) / 2].order(&self.entries[i]) != Ordering::Less)
    }
}
