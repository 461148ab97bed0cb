//! The `BD1` text format.
//!
//! ```text
//! BD1
//! levels N
//! level n k          (for n = 1..N, followed by one line of k labels)
//! matrix n           (for n = 1..N-1, followed by k_n rows of k_{n+1} entries)
//! mark n i           (zero or more; 0-based index i on level n)
//! end
//! ```
//!
//! Blank lines and lines whose first non-blank character is `#` are ignored.
//! [`write_bd1`] emits the canonical form: LF line endings, single spaces, no
//! trailing whitespace, marks sorted, no comments.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::diagram::{BratteliDiagram, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("expected magic `BD1`")]
    BadMagic,
    #[error("expected {expected}, found `{found}`")]
    Unexpected { expected: String, found: String },
    #[error("`{0}` is not a nonnegative integer")]
    NotAnInteger(String),
    #[error("label must be positive")]
    ZeroLabel,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("mark {level} {index} is out of range")]
    MarkOutOfRange { level: usize, index: usize },
    #[error("duplicate section `{0}`")]
    Duplicate(String),
    #[error("unexpected end of input, expected {0}")]
    UnexpectedEof(String),
    #[error("content after `end`")]
    TrailingContent,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<(usize, &'a str)>,
    /// Column just past the last token, for "missing token" errors.
    end_column: usize,
}

fn tokenize(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let trimmed = raw.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                return None;
            }
            let mut tokens = Vec::new();
            let mut start = None;
            for (pos, ch) in raw.char_indices().chain(std::iter::once((raw.len(), ' '))) {
                match (ch.is_whitespace(), start) {
                    (false, None) => start = Some(pos),
                    (true, Some(s)) => {
                        tokens.push((s + 1, &raw[s..pos]));
                        start = None;
                    }
                    _ => {}
                }
            }
            Some(Line {
                number: i + 1,
                end_column: raw.trim_end().len() + 1,
                tokens,
            })
        })
        .collect()
}

struct Parser<'a> {
    lines: Vec<Line<'a>>,
    pos: usize,
    eof_line: usize,
}

impl<'a> Parser<'a> {
    fn err(line: usize, column: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { line, column, kind }
    }

    fn next_line(&mut self, expected: &str) -> Result<&Line<'a>, ParseError> {
        let eof = self.eof_line;
        let line = self
            .lines
            .get(self.pos)
            .ok_or_else(|| Self::err(eof, 1, ParseErrorKind::UnexpectedEof(expected.into())))?;
        self.pos += 1;
        Ok(line)
    }

    fn peek_keyword(&self) -> Option<&'a str> {
        self.lines.get(self.pos).map(|l| l.tokens[0].1)
    }

    fn integer(line: &Line<'_>, k: usize) -> Result<u64, ParseError> {
        let (col, tok) = line.tokens[k];
        if !tok.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Self::err(line.number, col, ParseErrorKind::NotAnInteger(tok.into())));
        }
        tok.parse()
            .map_err(|_| Self::err(line.number, col, ParseErrorKind::NotAnInteger(tok.into())))
    }

    fn integers(line: &Line<'_>, from: usize) -> Result<Vec<u64>, ParseError> {
        (from..line.tokens.len()).map(|k| Self::integer(line, k)).collect()
    }

    /// A keyword line `keyword a b ...` with exactly `arity` integer arguments.
    fn header(&mut self, keyword: &str, arity: usize, expected: &str) -> Result<(usize, Vec<u64>), ParseError> {
        let line = self.next_line(expected)?;
        let (col, tok) = line.tokens[0];
        if tok != keyword {
            return Err(Self::err(
                line.number,
                col,
                ParseErrorKind::Unexpected {
                    expected: expected.into(),
                    found: tok.into(),
                },
            ));
        }
        if line.tokens.len() < arity + 1 {
            return Err(Self::err(
                line.number,
                line.end_column,
                ParseErrorKind::Unexpected {
                    expected: format!("{} argument(s) after `{keyword}`", arity),
                    found: "end of line".into(),
                },
            ));
        }
        if let Some(&(col, extra)) = line.tokens.get(arity + 1) {
            return Err(Self::err(
                line.number,
                col,
                ParseErrorKind::Unexpected {
                    expected: "end of line".into(),
                    found: extra.into(),
                },
            ));
        }
        Ok((line.number, Self::integers(line, 1)?))
    }

    fn section_header(
        &mut self,
        keyword: &str,
        arity: usize,
        expected_index: u64,
    ) -> Result<(usize, Vec<u64>), ParseError> {
        let expected = format!("`{keyword} {expected_index}`");
        let at = self.pos;
        let (number, args) = self.header(keyword, arity, &expected)?;
        if args[0] != expected_index {
            let col = self.lines[at].tokens[1].0;
            let kind = if args[0] < expected_index && args[0] >= 1 {
                ParseErrorKind::Duplicate(format!("{keyword} {}", args[0]))
            } else {
                ParseErrorKind::Unexpected {
                    expected,
                    found: format!("{keyword} {}", args[0]),
                }
            };
            return Err(Self::err(number, col, kind));
        }
        Ok((number, args))
    }

    fn row(&mut self, width: usize, what: &str) -> Result<Vec<u64>, ParseError> {
        let line = self.next_line(what)?;
        let (col, first) = line.tokens[0];
        if matches!(first, "levels" | "level" | "matrix" | "mark" | "end") {
            return Err(Self::err(
                line.number,
                col,
                ParseErrorKind::Shape(format!("expected {what}, found section `{first}`")),
            ));
        }
        let values = Self::integers(line, 0)?;
        if values.len() != width {
            let col = line.tokens.get(width).map_or(line.end_column, |&(c, _)| c);
            return Err(Self::err(
                line.number,
                col,
                ParseErrorKind::Shape(format!("expected {width} entries, found {}", values.len())),
            ));
        }
        Ok(values)
    }
}

fn to_usize(v: u64) -> usize {
    usize::try_from(v).unwrap_or(usize::MAX)
}

pub fn parse_bd1(text: &str) -> Result<BratteliDiagram, ParseError> {
    let lines = tokenize(text);
    let eof_line = text.lines().count() + 1;
    let mut p = Parser {
        lines,
        pos: 0,
        eof_line,
    };

    let magic = p.next_line("`BD1`")?;
    if magic.tokens.len() != 1 || magic.tokens[0].1 != "BD1" {
        return Err(Parser::err(magic.number, magic.tokens[0].0, ParseErrorKind::BadMagic));
    }

    let (number, args) = p.header("levels", 1, "`levels N`")?;
    let n = to_usize(args[0]);
    if n == 0 {
        return Err(Parser::err(
            number,
            p.lines[p.pos - 1].tokens[1].0,
            ParseErrorKind::Shape("a diagram needs at least one level".into()),
        ));
    }

    let mut labels = Vec::with_capacity(n);
    for level in 1..=n {
        if p.peek_keyword() == Some("levels") {
            let line = &p.lines[p.pos];
            return Err(Parser::err(
                line.number,
                line.tokens[0].0,
                ParseErrorKind::Duplicate("levels".into()),
            ));
        }
        let (number, args) = p.section_header("level", 2, level as u64)?;
        let k = to_usize(args[1]);
        if k == 0 {
            let col = p.lines[p.pos - 1].tokens[2].0;
            return Err(Parser::err(
                number,
                col,
                ParseErrorKind::Shape(format!("level {level} must contain at least one vertex")),
            ));
        }
        let at = p.pos;
        let row = p.row(k, &format!("{k} labels for level {level}"))?;
        if let Some(z) = row.iter().position(|&d| d == 0) {
            let line = &p.lines[at];
            return Err(Parser::err(line.number, line.tokens[z].0, ParseErrorKind::ZeroLabel));
        }
        labels.push(row);
    }

    let mut adjacency = Vec::with_capacity(n.saturating_sub(1));
    for level in 1..n {
        if p.peek_keyword() == Some("level") {
            let line = &p.lines[p.pos];
            let found = line.tokens.get(1).map_or("", |t| t.1);
            return Err(Parser::err(
                line.number,
                line.tokens[0].0,
                ParseErrorKind::Duplicate(format!("level {found}")),
            ));
        }
        p.section_header("matrix", 1, level as u64)?;
        let (rows, cols) = (labels[level - 1].len(), labels[level].len());
        let matrix = (0..rows)
            .map(|r| {
                p.row(
                    cols,
                    &format!("row {r} of matrix {level} ({rows} rows of {cols} entries)"),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        adjacency.push(matrix);
    }

    let mut marks = BTreeSet::new();
    loop {
        let line = p.next_line("`mark` or `end`")?;
        let (col, keyword) = line.tokens[0];
        match keyword {
            "end" if line.tokens.len() == 1 => break,
            "mark" if line.tokens.len() == 3 => {
                let level = to_usize(Parser::integer(line, 1)?);
                let index = to_usize(Parser::integer(line, 2)?);
                let in_range = level >= 1 && level <= n && index < labels[level - 1].len();
                if !in_range {
                    return Err(Parser::err(
                        line.number,
                        line.tokens[1].0,
                        ParseErrorKind::MarkOutOfRange { level, index },
                    ));
                }
                if !marks.insert(VertexId::new(level, index)) {
                    return Err(Parser::err(
                        line.number,
                        col,
                        ParseErrorKind::Duplicate(format!("mark {level} {index}")),
                    ));
                }
            }
            "matrix" | "level" | "levels" => {
                let found = line.tokens.get(1).map_or(String::new(), |t| format!(" {}", t.1));
                return Err(Parser::err(
                    line.number,
                    col,
                    ParseErrorKind::Duplicate(format!("{keyword}{found}")),
                ));
            }
            _ => {
                return Err(Parser::err(
                    line.number,
                    col,
                    ParseErrorKind::Unexpected {
                        expected: "`mark n i` or `end`".into(),
                        found: line.tokens.iter().map(|t| t.1).collect::<Vec<_>>().join(" "),
                    },
                ))
            }
        }
    }
    if let Some(line) = p.lines.get(p.pos) {
        return Err(Parser::err(
            line.number,
            line.tokens[0].0,
            ParseErrorKind::TrailingContent,
        ));
    }

    Ok(BratteliDiagram::from_parts(labels, adjacency, marks))
}

fn join(values: &[u64]) -> String {
    values.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

pub fn write_bd1(d: &BratteliDiagram) -> String {
    let mut out = String::from("BD1\n");
    let _ = writeln!(out, "levels {}", d.num_levels());
    for (l, row) in d.all_labels().iter().enumerate() {
        let _ = writeln!(out, "level {} {}", l + 1, row.len());
        let _ = writeln!(out, "{}", join(row));
    }
    for (l, m) in d.matrices().iter().enumerate() {
        let _ = writeln!(out, "matrix {}", l + 1);
        for row in m {
            let _ = writeln!(out, "{}", join(row));
        }
    }
    for v in d.marks() {
        let _ = writeln!(out, "mark {} {}", v.level, v.index);
    }
    out.push_str("end\n");
    out
}
