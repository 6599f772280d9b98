use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Timed queue. Items due at the same instant come out in insertion order.
#[derive(Debug)]
pub struct Scheduler<T> {
    heap: BinaryHeap<Reverse<(i64, u64)>>,
    items: std::collections::HashMap<u64, T>,
    next_seq: u64,
}

impl<T> Default for Scheduler<T> {
    fn default() -> Self {
        Self {
            heap: BinaryHeap::new(),
            items: Default::default(),
            next_seq: 0,
        }
    }
}

impl<T> Scheduler<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, at: i64, item: T) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse((at, seq)));
        self.items.insert(seq, item);
    }

    pub fn next_deadline(&self) -> Option<i64> {
        self.heap.peek().map(|Reverse((at, _))| *at)
    }

    /// Removes and returns every item due at or before `now`.
    pub fn pop_due(&mut self, now: i64) -> Vec<(i64, T)> {
        let mut out = Vec::new();
        while let Some(Reverse((at, seq))) = self.heap.peek().copied() {
            if at > now {
                break;
            }
            self.heap.pop();
            if let Some(item) = self.items.remove(&seq) {
                out.push((at, item));
            }
        }
        out
    }

    /// Drops every pending item matching `pred`.
    pub fn cancel(&mut self, mut pred: impl FnMut(&T) -> bool) {
        self.items.retain(|_, item| !pred(item));
        let items = &self.items;
        self.heap.retain(|Reverse((_, seq))| items.contains_key(seq));
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}
