// Recursive-descent parser for observable expressions.
//
//   expr   := term (("+" | "-") term)*
//   term   := factor ("*" factor)*
//   factor := atom ("^" INT)?
//   atom   := IDENT | NUMBER | "(" expr ")" | IDENT "(" expr ")"

use super::{Function, ObservableExpr};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Int(u32),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        offset,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        let tok = match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(src[start..i].to_owned()),
                    offset: start,
                });
                continue;
            }
            b'0'..=b'9' | b'.' => {
                let mut integral = true;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    integral = false;
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        integral = false;
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text
                    .parse()
                    .map_err(|_| syntax(start, format!("malformed number `{text}`")))?;
                let tok = match text.parse::<u32>() {
                    Ok(k) if integral => Tok::Int(k),
                    _ => Tok::Number(value),
                };
                out.push(Token { tok, offset: start });
                continue;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(syntax(i, format!("unexpected character `{ch}`")));
            }
        };
        i += 1;
        out.push(Token { tok, offset: start });
    }
    out.push(Token {
        tok: Tok::Eof,
        offset: src.len(),
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        let t = self.bump();
        if t.tok == tok {
            Ok(())
        } else {
            Err(syntax(t.offset, format!("expected {what}, found {}", describe(&t.tok))))
        }
    }

    fn expr(&mut self) -> Result<ObservableExpr> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    let t = self.term()?;
                    terms.push(negate(t));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            ObservableExpr::Add(terms)
        })
    }

    fn term(&mut self) -> Result<ObservableExpr> {
        let mut factors = vec![self.factor()?];
        while self.peek().tok == Tok::Star {
            self.bump();
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            ObservableExpr::Mul(factors)
        })
    }

    fn factor(&mut self) -> Result<ObservableExpr> {
        let base = self.atom()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let t = self.bump();
        match t.tok {
            Tok::Int(k) => Ok(ObservableExpr::Pow(Box::new(base), k)),
            other => Err(syntax(
                t.offset,
                format!("exponent must be a non-negative integer, found {}", describe(&other)),
            )),
        }
    }

    fn atom(&mut self) -> Result<ObservableExpr> {
        let t = self.bump();
        match t.tok {
            Tok::Int(k) => Ok(ObservableExpr::Const(k as f64)),
            Tok::Number(x) => Ok(ObservableExpr::Const(x)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.peek().tok != Tok::LParen {
                    return Ok(ObservableExpr::Var(name));
                }
                let func = Function::from_name(&name).ok_or(Error::UnknownFunction {
                    name,
                    offset: t.offset,
                })?;
                self.bump();
                let arg = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(ObservableExpr::Func(func, Box::new(arg)))
            }
            other => Err(syntax(
                t.offset,
                format!("expected an operand, found {}", describe(&other)),
            )),
        }
    }
}

fn negate(t: ObservableExpr) -> ObservableExpr {
    match t {
        ObservableExpr::Const(c) => ObservableExpr::Const(-c),
        other => ObservableExpr::Mul(vec![ObservableExpr::Const(-1.0), other]),
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Number(x) => format!("`{x}`"),
        Tok::Int(k) => format!("`{k}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Eof => "end of input".into(),
    }
}

pub fn parse(text: &str) -> Result<ObservableExpr> {
    let mut p = Parser {
        tokens: lex(text)?,
        pos: 0,
    };
    let e = p.expr()?;
    let t = p.peek();
    if t.tok != Tok::Eof {
        return Err(syntax(t.offset, format!("unexpected {}", describe(&t.tok))));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ObservableExpr::*;

    fn v(s: &str) -> ObservableExpr {
        Var(s.into())
    }

    #[test]
    fn power_binds_tightest() {
        assert_eq!(parse("A^2").unwrap(), Pow(Box::new(v("A")), 2));
        assert_eq!(
            parse("2*A^3").unwrap(),
            Mul(vec![Const(2.), Pow(Box::new(v("A")), 3)])
        );
    }

    #[test]
    fn sum_with_scaled_term() {
        assert_eq!(
            parse("A + 2*B").unwrap(),
            Add(vec![v("A"), Mul(vec![Const(2.), v("B")])])
        );
        assert_eq!(parse(" A+2 * B ").unwrap(), parse("A + 2*B").unwrap());
    }

    #[test]
    fn function_of_product_keeps_structure() {
        assert_eq!(
            parse("cos(A*B)").unwrap(),
            Func(Function::Cos, Box::new(Mul(vec![v("A"), v("B")])))
        );
    }

    #[test]
    fn subtraction_negates_term() {
        assert_eq!(
            parse("A - B - 2").unwrap(),
            Add(vec![v("A"), Mul(vec![Const(-1.), v("B")]), Const(-2.)])
        );
    }

    #[test]
    fn parentheses_keep_grouping() {
        assert_eq!(
            parse("A*(A*B)").unwrap(),
            Mul(vec![v("A"), Mul(vec![v("A"), v("B")])])
        );
    }

    #[test]
    fn numbers() {
        assert_eq!(parse("1.5e-3").unwrap(), Const(1.5e-3));
        assert_eq!(parse(".25").unwrap(), Const(0.25));
        assert_eq!(parse("x1").unwrap(), v("x1"));
    }

    #[test]
    fn errors_carry_offsets() {
        match parse("A + * B") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        match parse("A^2.5") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("{other:?}"),
        }
        match parse("(A + B") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 6),
            other => panic!("{other:?}"),
        }
        match parse("A $ B") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("{other:?}"),
        }
        match parse("tan(A)") {
            Err(Error::UnknownFunction { name, offset }) => {
                assert_eq!((name.as_str(), offset), ("tan", 0))
            }
            other => panic!("{other:?}"),
        }
        assert!(parse("").is_err());
        assert!(parse("A B").is_err());
        assert!(parse("-A").is_err());
    }
}
