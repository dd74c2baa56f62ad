//! Comment extraction and block grouping.

use rustpython_parser::{lexer, Mode, Tok};

use crate::span::{LineIndex, Span};

/// One `#` comment with its block assignment.
#[derive(Debug, Clone)]
pub struct Comment {
    pub span: Span,
    /// Text after the `#` marker, untrimmed.
    pub text: String,
    /// Consecutive own-line comments at the same indent share a block.
    pub block_id: usize,
    /// True when nothing but whitespace precedes the comment on its line.
    pub own_line: bool,
    /// Byte column of the `#`.
    pub indent_col: usize,
    pub line: usize,
}

/// Extracts comments from source text. The text must lex cleanly, which the
/// caller guarantees by parsing first.
pub fn extract_comments(text: &str, lines: &LineIndex) -> Vec<Comment> {
    let mut raw: Vec<(Span, String)> = Vec::new();
    for item in lexer::lex(text, Mode::Module) {
        let Ok((tok, range)) = item else { break };
        if let Tok::Comment(body) = tok {
            let span = Span::new(range.start().to_usize(), range.end().to_usize());
            let stripped = body.strip_prefix('#').unwrap_or(&body).to_string();
            raw.push((span, stripped));
        }
    }

    let mut comments = Vec::with_capacity(raw.len());
    let mut next_block = 0usize;
    let mut prev: Option<(usize, usize, usize)> = None; // (line, col, block_id) of last own-line comment
    for (span, text_body) in raw {
        let pos = lines.position(span.start);
        let line_start = lines.line_start(pos.line).unwrap_or(span.start);
        let own_line = text[line_start..span.start].chars().all(char::is_whitespace);
        let block_id = if own_line {
            match prev {
                Some((pline, pcol, pblock)) if pos.line == pline + 1 && pos.col == pcol => pblock,
                _ => {
                    next_block += 1;
                    next_block
                }
            }
        } else {
            next_block += 1;
            next_block
        };
        if own_line {
            prev = Some((pos.line, pos.col, block_id));
        }
        comments.push(Comment {
            span,
            text: text_body,
            block_id,
            own_line,
            indent_col: pos.col,
            line: pos.line,
        });
    }
    comments
}
