//! Recursive-descent parser for the `.cmc` constraint language.
//!
//! ```text
//! doc     := stmt* ;
//! stmt    := "range" ID ":" bound ("," bound)*
//!          | "rule" ID ":" expr | "invariant" ID ":" aggcmp | "derive" ID ":" expr ;
//! bound   := CMP NUMBER ;
//! expr    := orterm ("implies" orterm)? ;
//! orterm  := andterm ("or" andterm)* ;
//! andterm := unary ("and" unary)* ;
//! unary   := "not" unary | "(" expr ")" | "missing" "(" ID ")" | operand CMP operand ;
//! aggcmp  := AGG "(" ID ")" CMP NUMBER | "frac" "(" expr ")" CMP NUMBER ;
//! ```
//!
//! `#` starts a comment running to end of line. `missing`, `frac` and the
//! aggregate names are contextual; only the statement and logical keywords
//! are reserved.

use std::collections::HashSet;
use std::fmt;

use super::ast::*;

const RESERVED: [&str; 8] = [
    "range",
    "rule",
    "invariant",
    "derive",
    "and",
    "or",
    "not",
    "implies",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word)
}

/// Syntax or static-semantic error with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    /// 0-based index of the offending token in the document.
    pub token_index: usize,
    pub found: String,
    pub expected: Vec<String>,
    pub message: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: ", self.line, self.column)?;
        if let Some(m) = &self.message {
            write!(f, "{m}")
        } else {
            write!(f, "found {}, expected one of: {}", self.found, self.expected.join(", "))
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Cmp(CmpOp),
    Colon,
    Comma,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(v) => format!("number `{v}`"),
            Tok::Cmp(op) => format!("`{}`", op.symbol()),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, found: String, expected: &[&str], index| ParseError {
        line,
        column,
        token_index: index,
        found,
        expected: expected.iter().map(|s| s.to_string()).collect(),
        message: None,
    };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col, token_start) = (line, col, i);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
            continue;
        }
        let starts_number = c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
            || (c == '-'
                && chars
                    .get(i + 1)
                    .is_some_and(|d| d.is_ascii_digit() || *d == '.'));
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if starts_number {
            let start = i;
            if chars[i] == '-' {
                i += 1;
            }
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            match text.parse::<f64>() {
                Ok(v) if v.is_finite() => Tok::Number(v),
                _ => {
                    return Err(err(
                        start_line,
                        start_col,
                        format!("malformed number `{text}`"),
                        &["number"],
                        out.len(),
                    ))
                }
            }
        } else {
            let next = chars.get(i + 1).copied();
            let (tok, width) = match (c, next) {
                ('>', Some('=')) => (Tok::Cmp(CmpOp::Ge), 2),
                ('<', Some('=')) => (Tok::Cmp(CmpOp::Le), 2),
                ('=', Some('=')) => (Tok::Cmp(CmpOp::Eq), 2),
                ('!', Some('=')) => (Tok::Cmp(CmpOp::Ne), 2),
                ('>', _) => (Tok::Cmp(CmpOp::Gt), 1),
                ('<', _) => (Tok::Cmp(CmpOp::Lt), 1),
                (':', _) => (Tok::Colon, 1),
                (',', _) => (Tok::Comma, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                _ => {
                    return Err(err(
                        start_line,
                        start_col,
                        format!("unexpected character `{c}`"),
                        &["identifier", "number", "operator", "`:`", "`,`", "`(`", "`)`"],
                        out.len(),
                    ))
                }
            };
            i += width;
            tok
        };
        out.push(Token {
            tok,
            line: start_line,
            column: start_col,
        });
        col = start_col + (i - token_start);
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

/// Parses a constraint document.
pub fn parse(text: &str) -> Result<ConstraintDoc, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut statements = Vec::new();
    let mut names = HashSet::new();
    while p.peek() != &Tok::Eof {
        let name_pos = p.pos + 1;
        let stmt = p.statement()?;
        if !names.insert(stmt.name.clone()) {
            return Err(p.error_at(name_pos, format!("duplicate statement name `{}`", stmt.name)));
        }
        statements.push(stmt);
    }
    Ok(ConstraintDoc {
        statements,
        source_text: text.to_string(),
    })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn advance(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let t = &self.tokens[self.pos];
        ParseError {
            line: t.line,
            column: t.column,
            token_index: self.pos,
            found: t.tok.describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            message: None,
        }
    }

    fn error_at(&self, pos: usize, message: String) -> ParseError {
        let t = &self.tokens[pos.min(self.tokens.len() - 1)];
        ParseError {
            line: t.line,
            column: t.column,
            token_index: pos,
            found: t.tok.describe(),
            expected: Vec::new(),
            message: Some(message),
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect(&mut self, tok: Tok, label: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.unexpected(&[label]))
        }
    }

    fn identifier(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !is_reserved(s) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        match self.peek() {
            Tok::Number(v) => {
                let v = *v;
                self.advance();
                Ok(v)
            }
            _ => Err(self.unexpected(&["number"])),
        }
    }

    fn cmp_op(&mut self) -> Result<CmpOp, ParseError> {
        match self.peek() {
            Tok::Cmp(op) => {
                let op = *op;
                self.advance();
                Ok(op)
            }
            _ => Err(self.unexpected(&["`>`", "`>=`", "`<`", "`<=`", "`==`", "`!=`"])),
        }
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        let kind = match self.peek() {
            Tok::Ident(s) if s == "range" => StatementKind::Range,
            Tok::Ident(s) if s == "rule" => StatementKind::Rule,
            Tok::Ident(s) if s == "invariant" => StatementKind::Invariant,
            Tok::Ident(s) if s == "derive" => StatementKind::Derive,
            _ => {
                return Err(self.unexpected(&[
                    "`range`",
                    "`rule`",
                    "`invariant`",
                    "`derive`",
                    "end of input",
                ]))
            }
        };
        self.advance();
        let name = self.identifier()?;
        self.expect(Tok::Colon, "`:`")?;
        let body = match kind {
            StatementKind::Range => {
                let mut bounds = vec![self.bound()?];
                while *self.peek() == Tok::Comma {
                    self.advance();
                    bounds.push(self.bound()?);
                }
                StatementBody::Range(bounds)
            }
            StatementKind::Rule => StatementBody::Rule(self.expr()?),
            StatementKind::Derive => StatementBody::Derive(self.expr()?),
            StatementKind::Invariant => StatementBody::Invariant(self.aggregate_check()?),
        };
        Ok(Statement { name, body })
    }

    fn bound(&mut self) -> Result<Bound, ParseError> {
        let op = self.cmp_op()?;
        let value = self.number()?;
        Ok(Bound { op, value })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.or_term()?;
        if self.is_keyword("implies") {
            self.advance();
            let rhs = self.or_term()?;
            return Ok(Expr::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or_term(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.and_term()?];
        while self.is_keyword("or") {
            self.advance();
            terms.push(self.and_term()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Or(terms)
        })
    }

    fn and_term(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.unary()?];
        while self.is_keyword("and") {
            self.advance();
            terms.push(self.unary()?);
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::And(terms)
        })
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.is_keyword("not") {
            self.advance();
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        if *self.peek() == Tok::LParen {
            self.advance();
            let e = self.expr()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(e);
        }
        if self.is_keyword("missing") && *self.peek_at(1) == Tok::LParen {
            self.advance();
            self.advance();
            let name = self.identifier()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Expr::Missing(name));
        }
        let lhs = self.operand()?;
        let op = self.cmp_op()?;
        let rhs = self.operand()?;
        Ok(Expr::Cmp(lhs, op, rhs))
    }

    fn operand(&mut self) -> Result<Operand, ParseError> {
        match self.peek() {
            Tok::Ident(s) if !is_reserved(s) => {
                let s = s.clone();
                self.advance();
                Ok(Operand::Feature(s))
            }
            Tok::Number(v) => {
                let v = *v;
                self.advance();
                Ok(Operand::Number(v))
            }
            _ => Err(self.unexpected(&["`not`", "`(`", "`missing`", "identifier", "number"])),
        }
    }

    fn aggregate_check(&mut self) -> Result<AggregateCheck, ParseError> {
        let word = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => {
                return Err(self.unexpected(&[
                    "`mean`",
                    "`std`",
                    "`min`",
                    "`max`",
                    "`count`",
                    "`frac_missing`",
                    "`frac`",
                ]))
            }
        };
        let agg_pos = self.pos;
        let aggregate = if word == "frac" {
            self.advance();
            self.expect(Tok::LParen, "`(`")?;
            let e = self.expr()?;
            self.expect(Tok::RParen, "`)`")?;
            Aggregate::Frac(e)
        } else if let Some(agg) = ColumnAggregate::from_keyword(&word) {
            self.advance();
            self.expect(Tok::LParen, "`(`")?;
            let feature = self.identifier()?;
            self.expect(Tok::RParen, "`)`")?;
            Aggregate::Column(agg, feature)
        } else if *self.peek_at(1) == Tok::LParen {
            return Err(self.error_at(agg_pos, format!("unknown aggregate `{word}`")));
        } else {
            return Err(self.unexpected(&[
                "`mean`",
                "`std`",
                "`min`",
                "`max`",
                "`count`",
                "`frac_missing`",
                "`frac`",
            ]));
        };
        let op = self.cmp_op()?;
        let value = self.number()?;
        Ok(AggregateCheck {
            aggregate,
            op,
            value,
        })
    }
}
