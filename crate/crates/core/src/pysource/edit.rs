//! Text patches anchored on node spans.
//!
//! Edits are expressed against the original text and applied right-to-left so
//! earlier offsets stay valid. Untouched regions come out byte-identical.

use crate::span::Span;

#[derive(Debug, Clone)]
pub struct Patch {
    pub span: Span,
    pub replacement: String,
}

impl Patch {
    pub fn delete(span: Span) -> Self {
        Patch {
            span,
            replacement: String::new(),
        }
    }

    pub fn replace(span: Span, replacement: impl Into<String>) -> Self {
        Patch {
            span,
            replacement: replacement.into(),
        }
    }

    pub fn insert(at: usize, text: impl Into<String>) -> Self {
        Patch {
            span: Span::new(at, at),
            replacement: text.into(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PatchSet {
    patches: Vec<Patch>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PatchError {
    #[error("patch spans overlap: {0} and {1}")]
    Overlap(Span, Span),
    #[error("patch span {0} exceeds text length {1}")]
    OutOfBounds(Span, usize),
}

impl PatchSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, patch: Patch) {
        self.patches.push(patch);
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    /// Applies all patches to `text`, right-to-left.
    pub fn apply(&self, text: &str) -> Result<String, PatchError> {
        let mut sorted: Vec<&Patch> = self.patches.iter().collect();
        sorted.sort_by_key(|p| (p.span.start, p.span.end));
        for pair in sorted.windows(2) {
            if pair[0].span.end > pair[1].span.start {
                return Err(PatchError::Overlap(pair[0].span, pair[1].span));
            }
        }
        if let Some(last) = sorted.last() {
            if last.span.end > text.len() {
                return Err(PatchError::OutOfBounds(last.span, text.len()));
            }
        }
        let mut out = text.to_string();
        for patch in sorted.iter().rev() {
            out.replace_range(patch.span.start..patch.span.end, &patch.replacement);
        }
        Ok(out)
    }
}

/// Tracks how applied replacements move the offsets of original-text spans.
#[derive(Debug, Clone, Default)]
pub struct SpanMap {
    /// (original span, replacement length), kept sorted by start.
    applied: Vec<(Span, usize)>,
}

impl SpanMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, original: Span, replacement_len: usize) {
        let idx = self
            .applied
            .partition_point(|(s, _)| s.start < original.start);
        self.applied.insert(idx, (original, replacement_len));
    }

    /// Remaps a span of the original text into current-text coordinates.
    ///
    /// Returns `None` when the span was itself rewritten or partially overlaps
    /// a rewritten region; containment of a rewritten region inside the query
    /// span is fine and adjusts the endpoint.
    pub fn remap(&self, span: Span) -> Option<Span> {
        let mut start = span.start as isize;
        let mut end = span.end as isize;
        for (patched, new_len) in &self.applied {
            let delta = *new_len as isize - patched.len() as isize;
            if patched.end <= span.start {
                start += delta;
                end += delta;
            } else if span.contains(*patched) {
                end += delta;
            } else if patched.contains(span) || patched.overlaps(span) {
                return None;
            }
        }
        Some(Span::new(start.max(0) as usize, end.max(0) as usize))
    }
}

/// Expands a span to whole lines: from the start of its first line through the
/// newline terminating its last line (or end of text).
pub fn whole_lines(text: &str, span: Span) -> Span {
    let start = text[..span.start.min(text.len())]
        .rfind('\n')
        .map(|i| i + 1)
        .unwrap_or(0);
    let end = text[span.end.min(text.len())..]
        .find('\n')
        .map(|i| span.end + i + 1)
        .unwrap_or(text.len());
    Span::new(start, end)
}

/// Leading whitespace of the line containing `offset`.
pub fn line_indent(text: &str, offset: usize) -> &str {
    let line_start = text[..offset.min(text.len())]
        .rfind('\n')
        .map(|i| i + 1)
        .unwrap_or(0);
    let line_end = text[line_start..]
        .find('\n')
        .map(|i| line_start + i)
        .unwrap_or(text.len());
    let line = &text[line_start..line_end];
    let indent_len = line.len() - line.trim_start().len();
    &line[..indent_len]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn patches_apply_right_to_left() {
        let text = "abc def ghi";
        let mut set = PatchSet::new();
        set.push(Patch::replace(Span::new(8, 11), "X"));
        set.push(Patch::replace(Span::new(0, 3), "YY"));
        assert_eq!(set.apply(text).unwrap(), "YY def X");
    }

    #[test]
    fn overlapping_patches_rejected() {
        let mut set = PatchSet::new();
        set.push(Patch::delete(Span::new(0, 5)));
        set.push(Patch::delete(Span::new(4, 8)));
        assert!(matches!(set.apply("0123456789"), Err(PatchError::Overlap(_, _))));
    }

    #[test]
    fn span_map_shifts_later_spans() {
        // replace [2,5) ("cde") with "Z" in "abcdefgh"
        let mut map = SpanMap::new();
        map.record(Span::new(2, 5), 1);
        assert_eq!(map.remap(Span::new(0, 2)), Some(Span::new(0, 2)));
        assert_eq!(map.remap(Span::new(6, 8)), Some(Span::new(4, 6)));
        assert_eq!(map.remap(Span::new(3, 4)), None);
        // a span containing the patch keeps its start, end moves
        assert_eq!(map.remap(Span::new(0, 8)), Some(Span::new(0, 6)));
    }

    #[test]
    fn whole_lines_expansion() {
        let text = "aa\n  bb cc\ndd\n";
        let span = Span::new(5, 7); // "bb"
        assert_eq!(whole_lines(text, span), Span::new(3, 11));
        assert_eq!(&text[3..11], "  bb cc\n");
    }

    #[test]
    fn indent_of_line() {
        let text = "def f():\n    pass\n";
        assert_eq!(line_indent(text, 13), "    ");
        assert_eq!(line_indent(text, 0), "");
    }
}
