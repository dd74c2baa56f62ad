//! Byte spans and line/column indexing over source text.

use serde::{Deserialize, Serialize};

/// Half-open byte range `[start, end)` into a source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end, "span start must not exceed end");
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// True if `other` lies entirely within `self` (boundaries included).
    pub fn contains(&self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn contains_offset(&self, offset: usize) -> bool {
        self.start <= offset && offset < self.end
    }

    pub fn overlaps(&self, other: Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

impl std::fmt::Display for Span {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// A (1-based line, 0-based byte column) position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LineCol {
    pub line: usize,
    pub col: usize,
}

/// Maps byte offsets to line/column positions and back.
///
/// Lines are 1-based, columns are 0-based byte offsets within the line.
#[derive(Debug, Clone)]
pub struct LineIndex {
    /// Byte offset where each line starts; `line_starts[0] == 0`.
    line_starts: Vec<usize>,
    text_len: usize,
}

impl LineIndex {
    pub fn new(text: &str) -> Self {
        let mut line_starts = vec![0];
        for (i, b) in text.bytes().enumerate() {
            if b == b'\n' {
                line_starts.push(i + 1);
            }
        }
        LineIndex {
            line_starts,
            text_len: text.len(),
        }
    }

    /// Position of a byte offset. Offsets past the end clamp to the final position.
    pub fn position(&self, offset: usize) -> LineCol {
        let offset = offset.min(self.text_len);
        let line_idx = match self.line_starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        LineCol {
            line: line_idx + 1,
            col: offset - self.line_starts[line_idx],
        }
    }

    /// Byte offset where the given 1-based line starts.
    pub fn line_start(&self, line: usize) -> Option<usize> {
        self.line_starts.get(line.checked_sub(1)?).copied()
    }

    /// Byte offset one past the last character of the line, excluding the newline.
    pub fn line_end(&self, line: usize) -> Option<usize> {
        let start = self.line_start(line)?;
        let next = self
            .line_starts
            .get(line)
            .copied()
            .unwrap_or(self.text_len + 1);
        Some((next - 1).max(start).min(self.text_len))
    }

    pub fn line_count(&self) -> usize {
        self.line_starts.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_map_offsets_uniquely() {
        let text = "ab\ncd\n\nx";
        let idx = LineIndex::new(text);
        assert_eq!(idx.position(0), LineCol { line: 1, col: 0 });
        assert_eq!(idx.position(2), LineCol { line: 1, col: 2 });
        assert_eq!(idx.position(3), LineCol { line: 2, col: 0 });
        assert_eq!(idx.position(6), LineCol { line: 3, col: 0 });
        assert_eq!(idx.position(7), LineCol { line: 4, col: 0 });
        assert_eq!(idx.position(8), LineCol { line: 4, col: 1 });
    }

    #[test]
    fn line_bounds() {
        let text = "ab\ncd\n";
        let idx = LineIndex::new(text);
        assert_eq!(idx.line_start(1), Some(0));
        assert_eq!(idx.line_end(1), Some(2));
        assert_eq!(idx.line_start(2), Some(3));
        assert_eq!(idx.line_end(2), Some(5));
        assert_eq!(idx.line_start(9), None);
    }

    #[test]
    fn every_offset_has_exactly_one_position() {
        let text = "a\nbb\n\nccc";
        let idx = LineIndex::new(text);
        let mut seen = std::collections::HashSet::new();
        for off in 0..text.len() {
            assert!(seen.insert(idx.position(off)), "offset {off} mapped twice");
        }
    }

    #[test]
    fn span_containment() {
        let outer = Span::new(2, 10);
        assert!(outer.contains(Span::new(2, 10)));
        assert!(outer.contains(Span::new(4, 6)));
        assert!(!outer.contains(Span::new(1, 6)));
        assert!(!outer.contains(Span::new(4, 11)));
    }
}
