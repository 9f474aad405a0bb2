//! Text syntax for ground normal programs.
//!
//! ```text
//! program   ::= statement*
//! statement ::= atom "."  |  atom ":-" body "."  |  ":-" body "."
//! body      ::= literal ("," literal)*
//! literal   ::= atom  |  "not" atom
//! atom      ::= [a-z][A-Za-z0-9_]*
//! ```
//!
//! Whitespace is insignificant and `%` starts a comment that runs to the end
//! of the line. Identifiers starting with an uppercase letter or `_` are ASP
//! variables and are rejected: inputs must already be ground.

use std::fmt;

use crate::program::{AtomId, Program, Rule};
use crate::transform::RESERVED_PREFIX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lex,
    Syntax,
    ReservedPrefix,
    NonGround,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Lex => "lexical error",
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::ReservedPrefix => "reserved prefix",
            ParseErrorKind::NonGround => "non-ground input",
        })
    }
}

/// A parse failure, located by 1-based line and column.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {kind}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Accept atoms using the auxiliary-atom prefix. Needed to read back
    /// transformed programs; must stay off for inputs that will be transformed.
    pub allow_reserved: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok<'a> {
    Ident(&'a str),
    Not,
    If,
    Comma,
    Dot,
}

impl fmt::Display for Tok<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Not => f.write_str("`not`"),
            Tok::If => f.write_str("`:-`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Pos {
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    src: &'a str,
    offset: usize,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            offset: 0,
            line: 1,
            column: 1,
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.offset..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek_char()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.column,
        }
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek_char() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '%' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Result<Option<(Tok<'a>, Pos)>, ParseError> {
        self.skip_trivia();
        let start = self.pos();
        let Some(c) = self.peek_char() else {
            return Ok(None);
        };
        let tok = match c {
            '.' => {
                self.bump();
                Tok::Dot
            }
            ',' => {
                self.bump();
                Tok::Comma
            }
            ':' => {
                self.bump();
                if self.peek_char() == Some('-') {
                    self.bump();
                    Tok::If
                } else {
                    return Err(error_at(start, ParseErrorKind::Lex, "expected `:-`"));
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let begin = self.offset;
                while matches!(self.peek_char(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    self.bump();
                }
                let word = &self.src[begin..self.offset];
                if word == "not" {
                    Tok::Not
                } else {
                    Tok::Ident(word)
                }
            }
            other => {
                return Err(error_at(
                    start,
                    ParseErrorKind::Lex,
                    format!("unexpected character {other:?}"),
                ))
            }
        };
        Ok(Some((tok, start)))
    }
}

fn error_at(pos: Pos, kind: ParseErrorKind, message: impl Into<String>) -> ParseError {
    ParseError {
        line: pos.line,
        column: pos.column,
        kind,
        message: message.into(),
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    lookahead: Option<(Tok<'a>, Pos)>,
    options: ParseOptions,
    program: Program,
}

impl<'a> Parser<'a> {
    fn advance(&mut self) -> Result<Option<(Tok<'a>, Pos)>, ParseError> {
        let next = self.lexer.next_token()?;
        Ok(std::mem::replace(&mut self.lookahead, next))
    }

    fn end_pos(&self) -> Pos {
        self.lexer.pos()
    }

    fn expect_atom(&mut self, what: &str) -> Result<AtomId, ParseError> {
        match self.advance()? {
            Some((Tok::Ident(name), pos)) => self.atom(name, pos),
            Some((tok, pos)) => Err(error_at(
                pos,
                ParseErrorKind::Syntax,
                format!("expected {what}, found {tok}"),
            )),
            None => Err(error_at(
                self.end_pos(),
                ParseErrorKind::Syntax,
                format!("expected {what}, found end of input"),
            )),
        }
    }

    fn atom(&mut self, name: &str, pos: Pos) -> Result<AtomId, ParseError> {
        if name.starts_with(RESERVED_PREFIX) {
            if !self.options.allow_reserved {
                return Err(error_at(
                    pos,
                    ParseErrorKind::ReservedPrefix,
                    format!("atom `{name}` uses the reserved prefix `{RESERVED_PREFIX}`"),
                ));
            }
        } else {
            let first = name.trim_start_matches('_').chars().next();
            if name == "_" || first.is_some_and(|c| c.is_ascii_uppercase()) {
                return Err(error_at(
                    pos,
                    ParseErrorKind::NonGround,
                    format!("`{name}` is a variable; only ground programs are accepted"),
                ));
            }
            if name.starts_with('_') {
                return Err(error_at(
                    pos,
                    ParseErrorKind::Syntax,
                    format!("atom `{name}` must start with a lowercase letter"),
                ));
            }
        }
        Ok(self.program.atom(name))
    }

    fn body(&mut self) -> Result<(Vec<AtomId>, Vec<AtomId>), ParseError> {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        loop {
            if matches!(self.lookahead, Some((Tok::Not, _))) {
                self.advance()?;
                neg.push(self.expect_atom("an atom after `not`")?);
            } else {
                pos.push(self.expect_atom("a body literal")?);
            }
            match self.advance()? {
                Some((Tok::Comma, _)) => continue,
                Some((Tok::Dot, _)) => return Ok((pos, neg)),
                Some((tok, p)) => {
                    return Err(error_at(
                        p,
                        ParseErrorKind::Syntax,
                        format!("expected `,` or `.`, found {tok}"),
                    ))
                }
                None => {
                    return Err(error_at(
                        self.end_pos(),
                        ParseErrorKind::Syntax,
                        "expected `.` before end of input",
                    ))
                }
            }
        }
    }

    fn statement(&mut self) -> Result<bool, ParseError> {
        let Some((tok, pos)) = self.lookahead.clone() else {
            return Ok(false);
        };
        match tok {
            Tok::If => {
                self.advance()?;
                let (p, n) = self.body()?;
                self.program.push_rule(Rule::constraint(p, n));
            }
            Tok::Ident(_) => {
                let head = self.expect_atom("a head atom")?;
                match self.advance()? {
                    Some((Tok::Dot, _)) => self.program.push_rule(Rule::fact(head)),
                    Some((Tok::If, _)) => {
                        let (p, n) = self.body()?;
                        self.program.push_rule(Rule::new(Some(head), p, n));
                    }
                    Some((tok, p)) => {
                        return Err(error_at(
                            p,
                            ParseErrorKind::Syntax,
                            format!("expected `.` or `:-`, found {tok}"),
                        ))
                    }
                    None => {
                        return Err(error_at(
                            self.end_pos(),
                            ParseErrorKind::Syntax,
                            "expected `.` before end of input",
                        ))
                    }
                }
            }
            Tok::Not => {
                return Err(error_at(
                    pos,
                    ParseErrorKind::Syntax,
                    "negated literals cannot appear in rule heads",
                ))
            }
            other => {
                return Err(error_at(
                    pos,
                    ParseErrorKind::Syntax,
                    format!("expected a rule, found {other}"),
                ))
            }
        }
        Ok(true)
    }
}

/// Parses program text, rejecting the auxiliary-atom prefix.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    parse_program_with(text, ParseOptions::default())
}

pub fn parse_program_with(text: &str, options: ParseOptions) -> Result<Program, ParseError> {
    let mut parser = Parser {
        lexer: Lexer::new(text),
        lookahead: None,
        options,
        program: Program::new(),
    };
    parser.advance()?;
    while parser.statement()? {}
    Ok(parser.program)
}

/// Prints one statement per line with no trailing newline.
///
/// Body literals are listed in symbol order, so for a parsed program every
/// atom first appears in the output in the order it was interned and the
/// output parses back to an identical program.
pub fn print_program(program: &Program) -> String {
    let mut lines = Vec::with_capacity(program.rules().len());
    for rule in program.rules() {
        lines.push(print_rule(program, rule));
    }
    lines.join("\n")
}

pub fn print_rule(program: &Program, rule: &Rule) -> String {
    let names = program.symbols();
    let mut out = String::new();
    if let Some(h) = rule.head() {
        out.push_str(names.name(h));
    }
    if rule.body_len() > 0 || rule.is_constraint() {
        if rule.head().is_some() {
            out.push(' ');
        }
        out.push_str(":-");
        let mut literals: Vec<(AtomId, bool)> = rule
            .pos()
            .iter()
            .map(|&a| (a, true))
            .chain(rule.neg().iter().map(|&a| (a, false)))
            .collect();
        literals.sort();
        for (i, (a, positive)) in literals.into_iter().enumerate() {
            out.push_str(if i == 0 { " " } else { ", " });
            if !positive {
                out.push_str("not ");
            }
            out.push_str(names.name(a));
        }
    }
    out.push('.');
    out
}
