use num_complex::Complex64;
use num_rational::Rational64;

use crate::expr::{Expr, NetTable};
use crate::ParseError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Net(String),
    Sym(char),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let mut out = Vec::new();
    let err = |line, column, message: String| ParseError { line, column, message };
    while i < chars.len() {
        let ch = chars[i];
        if ch == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if ch.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = (line, col);
        let begin = i;
        let tok = if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit())) {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent only when digits follow, so `2e` never swallows an identifier
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
            let text: String = chars[begin..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| err(start.0, start.1, format!("malformed number '{text}'")))?;
            Tok::Num(v)
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[begin..i].iter().collect())
        } else if ch == '$' {
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            if i == begin + 1 {
                return Err(err(start.0, start.1, "expected a net name after '$'".into()));
            }
            Tok::Net(chars[begin + 1..i].iter().collect())
        } else if "+-*/^();".contains(ch) {
            i += 1;
            Tok::Sym(ch)
        } else {
            return Err(err(start.0, start.1, format!("unexpected character '{ch}'")));
        };
        col += i - begin;
        out.push(Token { tok, line: start.0, column: start.1 });
    }
    out.push(Token { tok: Tok::End, line, column: col });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    n: usize,
    nets: &'a NetTable,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let t = self.here();
        Err(ParseError { line: t.line, column: t.column, message: message.into() })
    }

    fn bump_tok(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.fail(format!("expected '{c}', found {}", describe(self.peek())))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let negate = self.eat('-');
        let first = self.term()?;
        let mut terms = vec![if negate { first.neg() } else { first }];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(self.term()?.neg());
            } else {
                break;
            }
        }
        Ok(Expr::add(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        loop {
            if self.eat('*') {
                factors.push(self.factor()?);
            } else if self.eat('/') {
                factors.push(self.factor()?.recip());
            } else {
                break;
            }
        }
        Ok(Expr::mul(factors))
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let b = self.base()?;
        if self.eat('^') {
            let k = self.signed_int()?;
            let k = i32::try_from(k).or_else(|_| self.fail("exponent out of range"))?;
            return Ok(b.pow(k));
        }
        Ok(b)
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        match self.peek().clone() {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() < 1e15 => {
                self.bump_tok();
                Ok(v as i64)
            }
            other => self.fail(format!("expected an integer, found {}", describe(&other))),
        }
    }

    /// `k`, `-k`, `(k)` or `(-k)`
    fn signed_int(&mut self) -> Result<i64, ParseError> {
        if self.eat('(') {
            let neg = self.eat('-');
            let k = self.integer()?;
            self.expect(')')?;
            return Ok(if neg { -k } else { k });
        }
        let neg = self.eat('-');
        let k = self.integer()?;
        Ok(if neg { -k } else { k })
    }

    /// exponent of `eps`: an integer, or a parenthesized fraction
    fn rational(&mut self) -> Result<Rational64, ParseError> {
        if self.eat('(') {
            let neg = self.eat('-');
            let p = self.integer()?;
            let q = if self.eat('/') { self.integer()? } else { 1 };
            if q == 0 {
                return self.fail("zero denominator in exponent");
            }
            self.expect(')')?;
            let r = Rational64::new(p, q);
            return Ok(if neg { -r } else { r });
        }
        Ok(Rational64::from_integer(self.signed_int()?))
    }

    fn signed_number(&mut self) -> Result<f64, ParseError> {
        let neg = self.eat('-');
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump_tok();
                Ok(if neg { -v } else { v })
            }
            other => self.fail(format!("expected a number, found {}", describe(&other))),
        }
    }

    fn variable(&mut self) -> Result<usize, ParseError> {
        let t = self.here().clone();
        if let Tok::Ident(name) = &t.tok {
            if let Some(k) = var_index(name) {
                if k == 0 || k > self.n {
                    return self.fail(format!("variable {name} outside x1..x{}", self.n));
                }
                self.bump_tok();
                return Ok(k - 1);
            }
        }
        self.fail(format!("expected a variable, found {}", describe(&t.tok)))
    }

    fn call_arg(&mut self) -> Result<Expr, ParseError> {
        self.expect('(')?;
        let e = self.expr()?;
        self.expect(')')?;
        Ok(e)
    }

    fn x_free(&mut self, what: &str) -> Result<Expr, ParseError> {
        let at = self.pos;
        let e = self.expr()?;
        if e.depends_on_x() {
            let t = &self.toks[at];
            return Err(ParseError {
                line: t.line,
                column: t.column,
                message: format!("{what} must not depend on x"),
            });
        }
        Ok(e)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let t = self.here().clone();
        match &t.tok {
            Tok::Num(v) => {
                self.bump_tok();
                Ok(Expr::real(*v))
            }
            Tok::Net(name) => {
                self.bump_tok();
                match self.nets.get(name) {
                    Some(n) => Ok(Expr::net(n.clone())),
                    None => Err(ParseError {
                        line: t.line,
                        column: t.column,
                        message: format!("unknown net '${name}'"),
                    }),
                }
            }
            Tok::Sym('(') => {
                self.bump_tok();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if var_index(name).is_some() {
                    return Ok(Expr::var(self.variable()?));
                }
                self.bump_tok();
                match name.as_str() {
                    "i" => Ok(Expr::constant(Complex64::new(0.0, 1.0))),
                    "eps" => {
                        if self.eat('^') {
                            Ok(Expr::eps_pow(self.rational()?))
                        } else {
                            Ok(Expr::eps_pow(Rational64::from_integer(1)))
                        }
                    }
                    "loginv" => Ok(Expr::loginv()),
                    "sin" => Ok(self.call_arg()?.sin()),
                    "cos" => Ok(self.call_arg()?.cos()),
                    "exp" => Ok(self.call_arg()?.exp()),
                    "bump" => {
                        self.expect('(')?;
                        let var = self.variable()?;
                        self.expect(';')?;
                        let center = self.signed_number()?;
                        self.expect(';')?;
                        let radius = self.signed_number()?;
                        if !(radius > 0.0) {
                            return self.fail("bump radius must be positive");
                        }
                        self.expect(')')?;
                        Ok(Expr::bump(var, center, radius))
                    }
                    "hstep" => {
                        self.expect('(')?;
                        let var = self.variable()?;
                        self.expect(';')?;
                        let width = self.x_free("hstep width")?;
                        self.expect(')')?;
                        Ok(Expr::hstep(var, width))
                    }
                    "psi" => {
                        self.expect('(')?;
                        let k = self.integer()?;
                        if !(0..=64).contains(&k) {
                            return self.fail("template order must be in 0..=64");
                        }
                        self.expect(';')?;
                        let arg = self.expr()?;
                        self.expect(')')?;
                        Ok(Expr::psi(k as u32, arg))
                    }
                    "subst" => {
                        self.expect('(')?;
                        let var = self.variable()?;
                        self.expect(';')?;
                        let scale = self.x_free("substitution scale")?;
                        self.expect(';')?;
                        let shift = self.x_free("substitution shift")?;
                        self.expect(';')?;
                        let body = self.expr()?;
                        self.expect(')')?;
                        Ok(Expr::subst(var, scale, shift, body))
                    }
                    _ => Err(ParseError {
                        line: t.line,
                        column: t.column,
                        message: format!("unknown name '{name}'"),
                    }),
                }
            }
            other => self.fail(format!("unexpected {}", describe(other))),
        }
    }
}

fn var_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Net(s) => format!("'${s}'"),
        Tok::Sym(c) => format!("'{c}'"),
        Tok::End => "end of input".into(),
    }
}

/// Parse DSL text in `n` spatial variables `x1..xn`.
pub fn parse(src: &str, n: usize) -> Result<Expr, ParseError> {
    parse_with_nets(src, n, &NetTable::new())
}

/// As [`parse`], resolving `$name` against `nets`.
pub fn parse_with_nets(src: &str, n: usize, nets: &NetTable) -> Result<Expr, ParseError> {
    if n == 0 {
        return Err(ParseError { line: 1, column: 1, message: "dimension must be at least 1".into() });
    }
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, n, nets };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail(format!("unexpected {} after expression", describe(p.peek())));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Node;

    #[test]
    fn grammar_examples() {
        let e = parse("2 + x1^2", 1).unwrap();
        match e.node() {
            Node::Sum(v) => {
                assert_eq!(v[0], Expr::real(2.0));
                assert_eq!(v[1], Expr::var(0).pow(2));
            }
            _ => panic!("{e:?}"),
        }
        let e = parse("eps^-1 * x1", 1).unwrap();
        assert_eq!(e, Expr::mul(vec![Expr::eps_pow(Rational64::from_integer(-1)), Expr::var(0)]));
        let e = parse("hstep(x1; loginv^-1)", 1).unwrap();
        assert_eq!(e, Expr::hstep(0, Expr::loginv().pow(-1)));
        assert_eq!(parse("eps^(1/2)", 1).unwrap(), Expr::eps_pow(Rational64::new(1, 2)));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("1 +\n  x3", 2).unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        let e = parse("sin(x1", 1).unwrap_err();
        assert_eq!((e.line, e.column), (1, 7));
        let e = parse("x0", 1).unwrap_err();
        assert_eq!(e.column, 1);
        assert!(parse("hstep(x1; x1)", 1).is_err());
        assert!(parse("2 ? 3", 1).is_err());
        assert!(parse("$c", 1).is_err());
    }

    #[test]
    fn whitespace_insensitive() {
        assert_eq!(parse("  x1*  x2 ", 2).unwrap(), parse("x1*x2", 2).unwrap());
    }
}
