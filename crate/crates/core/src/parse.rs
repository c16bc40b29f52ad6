//! Concrete syntax: `\x. t`, left-associative juxtaposition, `t[x <- u]`,
//! parentheses. `λ` is accepted in place of `\`.

use std::collections::HashMap;

use thiserror::Error;

use crate::term::{Term, Var};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("explicit substitutions are not allowed in an initial term")]
    NotPure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Lambda,
    Dot,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Arrow,
    Ident(String),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '\\' | 'λ' => {
                chars.next();
                out.push((pos, Tok::Lambda));
            }
            '.' => {
                chars.next();
                out.push((pos, Tok::Dot));
            }
            '(' => {
                chars.next();
                out.push((pos, Tok::LParen));
            }
            ')' => {
                chars.next();
                out.push((pos, Tok::RParen));
            }
            '[' => {
                chars.next();
                out.push((pos, Tok::LBracket));
            }
            ']' => {
                chars.next();
                out.push((pos, Tok::RBracket));
            }
            '<' => {
                chars.next();
                match chars.next() {
                    Some((_, '-')) => out.push((pos, Tok::Arrow)),
                    _ => return Err(syntax(pos, "expected `<-`")),
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                        name.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((pos, Tok::Ident(name)));
            }
            other => return Err(syntax(pos, &format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

fn syntax(pos: usize, message: &str) -> ParseError {
    ParseError::Syntax {
        pos,
        message: message.to_string(),
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    names: HashMap<String, Var>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.at += 1;
            Ok(())
        } else {
            Err(syntax(self.pos(), &format!("expected {what}")))
        }
    }

    fn ident(&mut self) -> Result<Var, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                self.at += 1;
                let next = self.names.len() as u64;
                Ok(self
                    .names
                    .entry(name.clone())
                    .or_insert_with(|| Var::new(next, &name))
                    .clone())
            }
            _ => Err(syntax(self.pos(), "expected identifier")),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        if self.peek() == Some(&Tok::Lambda) {
            return self.lambda();
        }
        let mut acc = self.postfix()?;
        loop {
            match self.peek() {
                Some(Tok::Lambda) => {
                    let arg = self.lambda()?;
                    return Ok(Term::app(acc, arg));
                }
                Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    let arg = self.postfix()?;
                    acc = Term::app(acc, arg);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn lambda(&mut self) -> Result<Term, ParseError> {
        self.expect(Tok::Lambda, "`\\`")?;
        let x = self.ident()?;
        self.expect(Tok::Dot, "`.`")?;
        let body = self.term()?;
        Ok(Term::lam(&x, body))
    }

    fn postfix(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.atom()?;
        while self.peek() == Some(&Tok::LBracket) {
            self.at += 1;
            let x = self.ident()?;
            self.expect(Tok::Arrow, "`<-`")?;
            let u = self.term()?;
            self.expect(Tok::RBracket, "`]`")?;
            acc = Term::sub(acc, &x, u);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => Ok(Term::var(&self.ident()?)),
            Some(Tok::LParen) => {
                self.at += 1;
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => Err(syntax(self.pos(), "expected a term")),
        }
    }
}

/// Parse any term, explicit substitutions included. Identical identifiers
/// map to the same variable; ids are assigned in order of first appearance.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        at: 0,
        end: src.len(),
        names: HashMap::new(),
    };
    let t = p.term()?;
    if p.at != p.toks.len() {
        return Err(syntax(p.pos(), "trailing input"));
    }
    Ok(t)
}

/// Parse an initial program: a pure term.
pub fn parse(src: &str) -> Result<Term, ParseError> {
    let t = parse_term(src)?;
    if !t.is_pure() {
        return Err(ParseError::NotPure);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::alpha_eq;

    #[test]
    fn parses_application_of_abstractions() {
        let t = parse("(\\x. x) (\\z. z)").unwrap();
        match &t {
            Term::App(f, a) => {
                assert!(
                    matches!(&**f, Term::Lam(x, b) if x.label() == "x" && matches!(&**b, Term::Var(y) if y == x))
                );
                assert!(matches!(&**a, Term::Lam(z, _) if z.label() == "z"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_dangling_abstraction() {
        assert!(matches!(
            parse("\\x."),
            Err(ParseError::Syntax { pos: 3, .. })
        ));
    }

    #[test]
    fn rejects_explicit_substitution_as_program() {
        assert_eq!(parse("x[x <- \\z.z]"), Err(ParseError::NotPure));
        assert!(parse_term("x[x <- \\z.z]").is_ok());
    }

    #[test]
    fn application_is_left_associative() {
        let t = parse("\\a. \\b. \\c. a b c").unwrap();
        let expected = parse("\\a. \\b. \\c. (a b) c").unwrap();
        assert_eq!(t, expected);
    }

    #[test]
    fn trailing_lambda_extends_right() {
        let t = parse("\\f. f \\x. x").unwrap();
        let expected = parse("\\f. f (\\x. x)").unwrap();
        assert!(alpha_eq(&t, &expected));
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "(\\x. x x) (\\y. y)",
            "\\f. \\x. f (f x)",
            "(x y)[x <- \\z. z][y <- \\w. w]",
            "(\\x. x) ((\\y. y) (\\z. z))",
        ] {
            let t = parse_term(src).unwrap();
            let again = parse_term(&t.to_string()).unwrap();
            assert!(alpha_eq(&t, &again), "{src} printed as {t}");
        }
    }

    #[test]
    fn reports_trailing_input() {
        assert!(matches!(parse("x )"), Err(ParseError::Syntax { .. })));
        assert!(matches!(
            parse("x # y"),
            Err(ParseError::Syntax { pos: 2, .. })
        ));
    }
}
