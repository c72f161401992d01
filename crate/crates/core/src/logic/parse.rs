//! Recursive-descent parser for the formula language.
//!
//! ```text
//! formula  = until ;
//! until    = or , [ "U" , interval , or ] ;
//! or       = and , { "|" , and } ;
//! and      = unary , { "&" , unary } ;
//! unary    = "!" unary | "G" interval unary | "F" interval unary | "(" formula ")" | atom ;
//! interval = "[" integer "," integer "]" ;
//! atom     = ident "(" ident { "," ident } ";" number { "," number } ")" ;
//! ```

use std::fmt;

use thiserror::Error;

use super::ast::{AtomNode, Formula, Span, Window};
use crate::spatial::{Atom, Predicate, SpatialError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Bang,
    Amp,
    Pipe,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Number(s) => write!(f, "number `{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Amp => f.write_str("`&`"),
            Tok::Pipe => f.write_str("`|`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    BadChar(char),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: &'static str, found: String },
    #[error("malformed number `{0}`")]
    BadNumber(String),
    #[error("interval bound `{0}` is not a non-negative integer")]
    BadBound(String),
    #[error("interval [{lo},{hi}] has its lower bound above its upper bound")]
    Interval { lo: usize, hi: usize },
    #[error(transparent)]
    Predicate(#[from] SpatialError),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

fn lex(src: &str) -> Result<Vec<(Tok, Span)>, ParseError> {
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 1);
    let mut chars = src.char_indices().peekable();
    while let Some(&(offset, c)) = chars.peek() {
        let span = Span { offset, line, column };
        let mut take = |chars: &mut std::iter::Peekable<std::str::CharIndices<'_>>| {
            let (_, c) = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        if c.is_whitespace() {
            take(&mut chars);
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            '!' => Some(Tok::Bang),
            '&' => Some(Tok::Amp),
            '|' => Some(Tok::Pipe),
            _ => None,
        };
        if let Some(tok) = single {
            take(&mut chars);
            out.push((tok, span));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if !(c.is_ascii_alphanumeric() || c == '_') {
                    break;
                }
                s.push(take(&mut chars));
            }
            out.push((Tok::Ident(s), span));
        } else if c.is_ascii_digit() || c == '.' || c == '-' || c == '+' {
            let mut s = String::new();
            s.push(take(&mut chars));
            let mut prev = c;
            while let Some(&(_, c)) = chars.peek() {
                let exp_sign = (c == '-' || c == '+') && (prev == 'e' || prev == 'E');
                if !(c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign) {
                    break;
                }
                prev = take(&mut chars);
                s.push(prev);
            }
            out.push((Tok::Number(s), span));
        } else {
            return Err(ParseError { line, column, kind: ParseErrorKind::BadChar(c) });
        }
    }
    let end = Span { offset: src.len(), line, column };
    out.push((Tok::Eof, end));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, span: Span, kind: ParseErrorKind) -> ParseError {
        ParseError { line: span.line, column: span.column, kind }
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        self.error_at(self.span(), ParseErrorKind::Unexpected { expected, found: self.peek().to_string() })
    }

    fn expect(&mut self, tok: Tok, expected: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn is_temporal(&self, keyword: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == keyword) && *self.peek_at(1) == Tok::LBracket
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.is_temporal("U") {
            self.bump();
            let w = self.interval()?;
            let rhs = self.or()?;
            return Ok(Formula::until(w, lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.and()?];
        while *self.peek() == Tok::Pipe {
            self.bump();
            items.push(self.and()?);
        }
        Ok(Formula::or(items))
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.unary()?];
        while *self.peek() == Tok::Amp {
            self.bump();
            items.push(self.unary()?);
        }
        Ok(Formula::and(items))
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(_) if self.is_temporal("G") => {
                self.bump();
                let w = self.interval()?;
                Ok(Formula::always(w, self.unary()?))
            }
            Tok::Ident(_) if self.is_temporal("F") => {
                self.bump();
                let w = self.interval()?;
                Ok(Formula::eventually(w, self.unary()?))
            }
            Tok::Ident(_) => self.atom(),
            _ => Err(self.unexpected("a formula")),
        }
    }

    fn bound(&mut self) -> Result<usize, ParseError> {
        match self.bump() {
            (Tok::Number(s), span) => s.parse().map_err(|_| self.error_at(span, ParseErrorKind::BadBound(s))),
            (tok, span) => Err(self.error_at(
                span,
                ParseErrorKind::Unexpected { expected: "an integer time bound", found: tok.to_string() },
            )),
        }
    }

    fn interval(&mut self) -> Result<Window, ParseError> {
        let start = self.span();
        self.expect(Tok::LBracket, "`[`")?;
        let lo = self.bound()?;
        self.expect(Tok::Comma, "`,`")?;
        let hi = self.bound()?;
        self.expect(Tok::RBracket, "`]`")?;
        Window::new(lo, hi).ok_or_else(|| self.error_at(start, ParseErrorKind::Interval { lo, hi }))
    }

    fn ident(&mut self, expected: &'static str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(expected)),
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        match self.bump() {
            (Tok::Number(s), span) => match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(self.error_at(span, ParseErrorKind::BadNumber(s))),
            },
            (tok, span) => {
                Err(self.error_at(span, ParseErrorKind::Unexpected { expected: "a number", found: tok.to_string() }))
            }
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let span = self.span();
        let name = self.ident("a predicate name")?;
        self.expect(Tok::LParen, "`(`")?;
        let mut objects = vec![self.ident("an object name")?];
        while *self.peek() == Tok::Comma {
            self.bump();
            objects.push(self.ident("an object name")?);
        }
        self.expect(Tok::Semi, "`;`")?;
        let mut params = vec![self.number()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            params.push(self.number()?);
        }
        self.expect(Tok::RParen, "`)`")?;
        let atom = Predicate::from_name(&name, &params)
            .and_then(|p| Atom::new(p, objects))
            .map_err(|e| self.error_at(span, e.into()))?;
        Ok(Formula::Atom(AtomNode { atom, span: Some(span) }))
    }
}

pub fn parse(src: &str) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of input"));
    }
    Ok(f)
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::Direction;

    #[test]
    fn always_right_of() {
        let f = parse("G[0,59](rightOf(arm, o1; 0.5))").unwrap();
        let Formula::Always(w, body) = &f else { panic!("{f:?}") };
        assert_eq!(*w, Window { lo: 0, hi: 59 });
        let Formula::Atom(n) = body.as_ref() else { panic!() };
        assert_eq!(n.atom.predicate, Predicate::Directional { dir: Direction::RightOf, kappa: 0.5 });
        assert_eq!(n.atom.objects, vec!["arm", "o1"]);
        assert_eq!(n.span.unwrap().column, 9);
    }

    #[test]
    fn conjunction_of_temporals() {
        let f = parse("F[0,100](enclIn(ee, goal; 0.1)) & G[0,100](farFrom(ee, obs; 0.5))").unwrap();
        let Formula::And(cs) = &f else { panic!() };
        assert!(matches!(cs[0], Formula::Eventually(..)));
        assert!(matches!(cs[1], Formula::Always(..)));
    }

    #[test]
    fn precedence() {
        let f = parse("leftOf(a,b;1) & leftOf(b,c;1) | !above(a,b;1) U[0,3] behind(a,b;1)").unwrap();
        let Formula::Until(_, lhs, rhs) = &f else { panic!() };
        assert!(matches!(lhs.as_ref(), Formula::Or(cs) if matches!(cs[0], Formula::And(_)) && matches!(cs[1], Formula::Not(_))));
        assert!(matches!(rhs.as_ref(), Formula::Atom(_)));
    }

    #[test]
    fn numbers() {
        let f = parse("bearingTo(a, b; -1.5e0, 2.5E-1)").unwrap();
        let Formula::Atom(n) = f else { panic!() };
        assert_eq!(n.atom.predicate.params(), vec![-1.5, 0.25]);
    }

    #[test]
    fn errors() {
        let e = parse("G[5,2](leftOf(a,b;1))").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Interval { lo: 5, hi: 2 });
        assert_eq!((e.line, e.column), (1, 2));

        let e = parse("x(a,b;1)").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Predicate(SpatialError::UnknownPredicate(_))));
        let e = parse("leftOf(a;1)").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Predicate(SpatialError::Arity { .. })));
        let e = parse("leftOf(a,b;1,2)").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Predicate(SpatialError::ParamCount { .. })));
        let e = parse("leftOf(a,b;1) &\n  ").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        let e = parse("G[0,1.5](leftOf(a,b;1))").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::BadBound(_)));
        assert!(parse("leftOf(a,b;1) )").is_err());
        assert!(parse("leftOf(a,b;1) $").is_err());
    }

    #[test]
    fn canonical_round_trip() {
        for src in [
            "G[0,59](rightOf(arm, o1; 0.5))",
            "F[0,100](enclIn(ee, goal; 0.1)) & G[0,100](farFrom(ee, obs; 0.5))",
            "(leftOf(a,b;1) | behind(a,b;2)) & !(above(a,b;1) & below(a,b;1e-3))",
            "(leftOf(a,b;1) U[1,4] leftOf(b,c;1)) | F[0,0](G[2,3](!touch(a,b;0.05)))",
            "betweenPy(a, b, c; 0.25) U[0,2] partOvlp(a, b; 0.1, 0.2)",
        ] {
            let f = parse(src).unwrap();
            let printed = f.to_string();
            assert_eq!(parse(&printed).unwrap(), f, "{printed}");
            assert_eq!(parse(&printed).unwrap().to_string(), printed);
        }
    }
}
