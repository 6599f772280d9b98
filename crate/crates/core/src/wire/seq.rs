/// What a received sequence number says about the stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeqStatus {
    InOrder,
    /// Frames `expected..got` never arrived.
    Gap { expected: u64, got: u64 },
    /// Not greater than the last accepted seq; a protocol violation.
    Regression { last: u64, got: u64 },
}

/// Per-connection, per-direction seq checker. Streams start at 1.
#[derive(Clone, Debug, Default)]
pub struct SeqTracker {
    last: u64,
}

impl SeqTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, seq: u64) -> SeqStatus {
        if seq <= self.last {
            return SeqStatus::Regression { last: self.last, got: seq };
        }
        let expected = self.last + 1;
        self.last = seq;
        if seq == expected {
            SeqStatus::InOrder
        } else {
            SeqStatus::Gap { expected, got: seq }
        }
    }

    pub fn last(&self) -> u64 {
        self.last
    }
}

/// Sender-side counter.
#[derive(Clone, Debug, Default)]
pub struct SeqCounter {
    next: u64,
}

impl SeqCounter {
    /// The next seq to stamp, starting at 1.
    #[allow(clippy::should_implement_trait)]
    pub fn next(&mut self) -> u64 {
        self.next += 1;
        self.next
    }
}
