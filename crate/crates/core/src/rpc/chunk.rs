use serde::{Deserialize, Serialize};

/// Inclusive block range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockRange {
    pub from: u64,
    pub to: u64,
}

impl BlockRange {
    pub fn len(&self) -> u64 {
        self.to - self.from + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Splits `[from, to]` into consecutive sub-ranges of at most `max_chunk`
/// blocks. Returns an empty list when `from > to`.
pub fn chunk_ranges(from: u64, to: u64, max_chunk: u64) -> Vec<BlockRange> {
    assert!(max_chunk >= 1, "max_chunk must be at least 1");
    let mut out = Vec::new();
    if from > to {
        return out;
    }
    let mut start = from;
    loop {
        let end = start.saturating_add(max_chunk - 1).min(to);
        out.push(BlockRange { from: start, to: end });
        if end == to {
            break;
        }
        start = end + 1;
    }
    out
}
