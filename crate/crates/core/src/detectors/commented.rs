//! Commented-out-code detection over comment blocks.
//!
//! A block fires when its stripped text parses as at least one statement and
//! carries enough code-indicative tokens (assignment operators, call
//! parentheses, statement keywords). Parsing alone over-fires on English —
//! `# return value` parses — so the token score gates precision.

use rustpython_parser::{ast as rp, lexer, Mode, Parse, Tok};

use crate::pysource::Comment;
use crate::span::Span;

pub struct CommentBlock {
    pub span: Span,
    pub candidate: String,
}

/// Groups own-line comments into blocks and builds each block's stripped
/// candidate text, preserving relative indentation.
pub fn blocks(comments: &[Comment]) -> Vec<CommentBlock> {
    let mut out: Vec<CommentBlock> = Vec::new();
    let mut current: Vec<&Comment> = Vec::new();

    let flush = |group: &mut Vec<&Comment>, out: &mut Vec<CommentBlock>| {
        if group.is_empty() {
            return;
        }
        let span = Span::new(group[0].span.start, group.last().unwrap().span.end);
        let lines: Vec<&str> = group.iter().map(|c| c.text.as_str()).collect();
        let strip = lines
            .iter()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.len() - l.trim_start_matches(' ').len())
            .min()
            .unwrap_or(0);
        let candidate = lines
            .iter()
            .map(|l| if l.len() >= strip { &l[strip..] } else { "" })
            .collect::<Vec<_>>()
            .join("\n");
        out.push(CommentBlock { span, candidate });
        group.clear();
    };

    for comment in comments {
        if !comment.own_line {
            continue;
        }
        match current.last() {
            Some(prev) if prev.block_id == comment.block_id => current.push(comment),
            _ => {
                flush(&mut current, &mut out);
                current.push(comment);
            }
        }
    }
    flush(&mut current, &mut out);
    out
}

/// True when the candidate parses as one or more statements.
pub fn parses_as_code(candidate: &str) -> bool {
    match rp::Suite::parse(candidate, "<comment>") {
        Ok(suite) => !suite.is_empty(),
        Err(_) => false,
    }
}

/// Counts code-indicative tokens: assignment operators, a name directly
/// followed by an opening parenthesis, and statement keywords.
pub fn code_token_score(candidate: &str) -> u32 {
    let mut score = 0u32;
    let mut prev_was_name = false;
    for item in lexer::lex(candidate, Mode::Module) {
        let Ok((tok, _)) = item else { break };
        let is_name = matches!(tok, Tok::Name { .. });
        match &tok {
            Tok::Equal
            | Tok::PlusEqual
            | Tok::MinusEqual
            | Tok::StarEqual
            | Tok::SlashEqual
            | Tok::PercentEqual
            | Tok::AmperEqual
            | Tok::VbarEqual
            | Tok::CircumflexEqual
            | Tok::LeftShiftEqual
            | Tok::RightShiftEqual
            | Tok::DoubleStarEqual
            | Tok::DoubleSlashEqual
            | Tok::ColonEqual => score += 1,
            Tok::Lpar if prev_was_name => score += 1,
            Tok::Def
            | Tok::Return
            | Tok::If
            | Tok::Elif
            | Tok::Else
            | Tok::For
            | Tok::While
            | Tok::Import
            | Tok::From
            | Tok::Class
            | Tok::Raise
            | Tok::Yield
            | Tok::With
            | Tok::Try
            | Tok::Except
            | Tok::Finally
            | Tok::Lambda
            | Tok::Del
            | Tok::Global
            | Tok::Nonlocal
            | Tok::Assert
            | Tok::Pass
            | Tok::Break
            | Tok::Continue
            | Tok::Await
            | Tok::Async => score += 1,
            _ => {}
        }
        prev_was_name = is_name;
    }
    score
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignment_plus_call_scores_two() {
        assert!(parses_as_code("x = compute(y)"));
        assert_eq!(code_token_score("x = compute(y)"), 2);
    }

    #[test]
    fn english_return_phrase_scores_one() {
        // Parses (the grammar is permissive about statement position) but the
        // single keyword keeps it under the default gate.
        assert_eq!(code_token_score("return value"), 1);
    }

    #[test]
    fn plain_prose_does_not_parse() {
        assert!(!parses_as_code("this explains the next line"));
    }

    #[test]
    fn loop_block_scores_high() {
        let candidate = "for i in range(3):\n    print(i)";
        assert!(parses_as_code(candidate));
        assert!(code_token_score(candidate) >= 3);
    }

    #[test]
    fn relative_indentation_is_preserved() {
        use crate::pysource::SourceUnit;
        let unit =
            SourceUnit::parse_str("# for i in range(3):\n#     print(i)\nx = 1\n").unwrap();
        let blocks = blocks(unit.comments());
        assert_eq!(blocks.len(), 1);
        assert_eq!(blocks[0].candidate, "for i in range(3):\n    print(i)");
        assert!(parses_as_code(&blocks[0].candidate));
    }
}
