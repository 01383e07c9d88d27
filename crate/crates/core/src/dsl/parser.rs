use std::fmt;

use thiserror::Error;

use super::ast::{BinOp, Expr, MapSpec};
use crate::padic::{is_prime, MAX_PRIME};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the source.
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnknownIdentifier(String),
    LiteralTooLarge,
    Expected { expected: String, found: String },
    InvalidPrime(u64),
    ZeroArity,
    BitwiseRequiresBinary { op: &'static str, p: u32 },
    VariableOutOfRange { index: usize, k: usize },
    BindingOutOfRange { index: usize, k: usize },
    DuplicateBinding(usize),
    MissingBinding(usize),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnexpectedChar(c) => write!(f, "unexpected character `{c}`"),
            Self::UnknownIdentifier(s) => write!(f, "unknown identifier `{s}`"),
            Self::LiteralTooLarge => f.write_str("integer literal too large"),
            Self::Expected { expected, found } => write!(f, "expected {expected}, found {found}"),
            Self::InvalidPrime(p) => {
                write!(f, "p={p} is not a prime no larger than {MAX_PRIME}")
            }
            Self::ZeroArity => f.write_str("k must be at least 1"),
            Self::BitwiseRequiresBinary { op, p } => {
                write!(f, "bitwise operator `{op}` requires p=2, but p={p}")
            }
            Self::VariableOutOfRange { index, k } => {
                write!(f, "variable x{index} out of range for k={k}")
            }
            Self::BindingOutOfRange { index, k } => {
                write!(f, "binding f{index} out of range for k={k}")
            }
            Self::DuplicateBinding(i) => write!(f, "f{i} is bound twice"),
            Self::MissingBinding(i) => write!(f, "missing binding for f{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(u128),
    Var(usize),
    Binding(usize),
    P,
    K,
    Op(BinOp),
    Not,
    Eq,
    Semi,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(v) => write!(f, "`{v}`"),
            Tok::Var(i) => write!(f, "`x{i}`"),
            Tok::Binding(i) => write!(f, "`f{i}`"),
            Tok::P => f.write_str("`p`"),
            Tok::K => f.write_str("`k`"),
            Tok::Op(op) => write!(f, "`{}`", op.symbol()),
            Tok::Not => f.write_str("`not`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn error_at(src: &str, offset: usize, kind: ParseErrorKind) -> ParseError {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    ParseError {
        kind,
        offset,
        line,
        column,
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let v = src[start..i]
                    .parse::<u128>()
                    .map_err(|_| error_at(src, start, ParseErrorKind::LiteralTooLarge))?;
                toks.push((Tok::Int(v), start));
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &src[start..i];
                let tok = match word {
                    "p" => Tok::P,
                    "k" => Tok::K,
                    "xor" => Tok::Op(BinOp::Xor),
                    "and" => Tok::Op(BinOp::And),
                    "or" => Tok::Op(BinOp::Or),
                    "not" => Tok::Not,
                    _ => indexed_name(word).ok_or_else(|| {
                        error_at(
                            src,
                            start,
                            ParseErrorKind::UnknownIdentifier(word.to_owned()),
                        )
                    })?,
                };
                toks.push((tok, start));
                continue;
            }
            _ => {}
        }
        let tok = match c {
            b'+' => Tok::Op(BinOp::Add),
            b'-' => Tok::Op(BinOp::Sub),
            b'*' => Tok::Op(BinOp::Mul),
            b'=' => Tok::Eq,
            b';' => Tok::Semi,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(error_at(src, start, ParseErrorKind::UnexpectedChar(ch)));
            }
        };
        toks.push((tok, start));
        i += 1;
    }
    toks.push((Tok::Eof, src.len()));
    Ok(toks)
}

/// `x12` or `f3`.
fn indexed_name(word: &str) -> Option<Tok> {
    let (head, digits) = word.split_at(1);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let index = digits.parse().ok()?;
    match head {
        "x" => Some(Tok::Var(index)),
        "f" => Some(Tok::Binding(index)),
        _ => None,
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    p: u32,
    k: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, offset: usize, kind: ParseErrorKind) -> ParseError {
        error_at(self.src, offset, kind)
    }

    fn expected(&self, what: &str) -> ParseError {
        self.err(
            self.offset(),
            ParseErrorKind::Expected {
                expected: what.to_owned(),
                found: self.peek().to_string(),
            },
        )
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<usize, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(self.expected(what))
        }
    }

    fn int(&mut self, what: &str) -> Result<(u128, usize), ParseError> {
        match self.peek() {
            Tok::Int(v) => {
                let v = *v;
                Ok((v, self.bump().1))
            }
            _ => Err(self.expected(what)),
        }
    }

    fn header(&mut self) -> Result<(), ParseError> {
        self.expect(Tok::P, "`p=<prime>` header")?;
        self.expect(Tok::Eq, "`=`")?;
        let (p, at) = self.int("an integer for p")?;
        let p = u32::try_from(p)
            .ok()
            .filter(|&p| p <= MAX_PRIME && is_prime(p))
            .ok_or_else(|| {
                self.err(
                    at,
                    ParseErrorKind::InvalidPrime(p.min(u64::MAX as u128) as u64),
                )
            })?;
        self.expect(Tok::K, "`k=<arity>`")?;
        self.expect(Tok::Eq, "`=`")?;
        let (k, at) = self.int("an integer for k")?;
        if k == 0 {
            return Err(self.err(at, ParseErrorKind::ZeroArity));
        }
        let k = usize::try_from(k).map_err(|_| self.err(at, ParseErrorKind::LiteralTooLarge))?;
        self.expect(Tok::Semi, "`;` after the header")?;
        self.p = p;
        self.k = k;
        Ok(())
    }

    fn spec(&mut self) -> Result<MapSpec, ParseError> {
        self.header()?;
        let mut coords: Vec<Option<Expr>> = vec![None; self.k];
        loop {
            let at = self.offset();
            let index = match self.peek() {
                Tok::Binding(i) => *i,
                Tok::Eof => break,
                _ => return Err(self.expected("a binding `f<i> = <expr>`")),
            };
            self.bump();
            if index >= self.k {
                return Err(self.err(at, ParseErrorKind::BindingOutOfRange { index, k: self.k }));
            }
            if coords[index].is_some() {
                return Err(self.err(at, ParseErrorKind::DuplicateBinding(index)));
            }
            self.expect(Tok::Eq, "`=`")?;
            coords[index] = Some(self.expr()?);
            match self.peek() {
                Tok::Semi => {
                    self.bump();
                }
                Tok::Eof => {}
                _ => return Err(self.expected("`;` or an operator")),
            }
        }
        let end = self.src.len();
        let coords = coords
            .into_iter()
            .enumerate()
            .map(|(i, e)| e.ok_or_else(|| self.err(end, ParseErrorKind::MissingBinding(i))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MapSpec::new(self.p, coords).expect("validated while parsing"))
    }

    fn binary_level(
        &mut self,
        ops: &[BinOp],
        next: fn(&mut Self) -> Result<Expr, ParseError>,
    ) -> Result<Expr, ParseError> {
        let mut lhs = next(self)?;
        while let Tok::Op(op) = *self.peek() {
            if !ops.contains(&op) {
                break;
            }
            let at = self.bump().1;
            if op.is_bitwise() && self.p != 2 {
                return Err(self.err(
                    at,
                    ParseErrorKind::BitwiseRequiresBinary {
                        op: op.symbol(),
                        p: self.p,
                    },
                ));
            }
            let rhs = next(self)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&[BinOp::Xor, BinOp::And, BinOp::Or], Self::additive)
    }

    fn additive(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&[BinOp::Add, BinOp::Sub], Self::multiplicative)
    }

    fn multiplicative(&mut self) -> Result<Expr, ParseError> {
        self.binary_level(&[BinOp::Mul], Self::unary)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Not {
            let at = self.bump().1;
            if self.p != 2 {
                return Err(self.err(
                    at,
                    ParseErrorKind::BitwiseRequiresBinary {
                        op: "not",
                        p: self.p,
                    },
                ));
            }
            return Ok(Expr::complement(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Const(v))
            }
            Tok::Var(index) => {
                self.bump();
                if index >= self.k {
                    return Err(
                        self.err(at, ParseErrorKind::VariableOutOfRange { index, k: self.k })
                    );
                }
                Ok(Expr::Var(index))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(self.expected("an expression")),
        }
    }
}

/// Parses `p=<prime> k=<arity>; f0 = <expr>; ...`.
///
/// Precedence from tightest: `not`, `*`, `+ -`, `xor and or`; all binary
/// operators are left-associative. `#` starts a comment running to the end
/// of the line.
pub fn parse(src: &str) -> Result<MapSpec, ParseError> {
    let toks = lex(src)?;
    let mut parser = Parser {
        src,
        toks,
        pos: 0,
        p: 0,
        k: 0,
    };
    parser.spec()
}
