//! Recursive-descent parser for the set language.
//!
//! ```text
//! expr    := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "!" unary | "(" expr ")" | atom
//! atom    := poly "=" "0"
//!          | "val" "(" poly ")" cmp int
//!          | "rv" "(" poly ")" "=" "(" int "," int ")"
//! cmp     := "=" | "<" | "<=" | ">" | ">=" | "≤" | "≥"
//! poly    := term (("+" | "-") term)*
//! term    := factor ("*" factor)*
//! factor  := "-" factor | base ("^" int)?
//! base    := int | x1 .. xN | "(" poly ")"
//! ```
//!
//! A parenthesis at the start of a formula is tried as a sub-formula first and
//! as a polynomial if that fails.

use std::fmt;

use super::poly::Poly;
use super::DefsetError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cmp {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            Cmp::Eq => a == b,
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Gt => a > b,
            Cmp::Ge => a >= b,
        }
    }
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cmp::Eq => "=",
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SetExpr {
    /// `poly = 0`, i.e. `v(poly) >= m`.
    Zero(Poly),
    Val {
        poly: Poly,
        cmp: Cmp,
        bound: i64,
    },
    Rv {
        poly: Poly,
        lambda: i64,
        unit: i64,
    },
    And(Box<SetExpr>, Box<SetExpr>),
    Or(Box<SetExpr>, Box<SetExpr>),
    Not(Box<SetExpr>),
}

impl SetExpr {
    fn precedence(&self) -> u8 {
        match self {
            SetExpr::Or(..) => 1,
            SetExpr::And(..) => 2,
            SetExpr::Not(_) => 3,
            _ => 4,
        }
    }

    /// Largest variable index used.
    pub fn num_vars(&self) -> usize {
        match self {
            SetExpr::Zero(p) | SetExpr::Val { poly: p, .. } | SetExpr::Rv { poly: p, .. } => {
                p.num_vars()
            }
            SetExpr::And(a, b) | SetExpr::Or(a, b) => a.num_vars().max(b.num_vars()),
            SetExpr::Not(a) => a.num_vars(),
        }
    }

    pub fn is_atom(&self) -> bool {
        self.precedence() == 4
    }
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &SetExpr, min: u8| {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            SetExpr::Zero(p) => write!(f, "{p} = 0"),
            SetExpr::Val { poly, cmp, bound } => write!(f, "val({poly}) {cmp} {bound}"),
            SetExpr::Rv { poly, lambda, unit } => write!(f, "rv({poly}) = ({lambda}, {unit})"),
            SetExpr::And(a, b) => {
                wrap(f, a, 2)?;
                write!(f, " & ")?;
                wrap(f, b, 3)
            }
            SetExpr::Or(a, b) => {
                wrap(f, a, 1)?;
                write!(f, " | ")?;
                wrap(f, b, 2)
            }
            SetExpr::Not(a) => {
                write!(f, "!")?;
                wrap(f, a, 3)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(i64),
    Var(usize),
    Ident(String),
    Sym(&'static str),
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, DefsetError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = vec![];
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let push = |out: &mut Vec<Token>, tok| {
            out.push(Token {
                tok,
                line: l0,
                col: c0,
            })
        };
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
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse::<i64>().map_err(|_| DefsetError::IntegerOverflow)?;
            col += i - start;
            push(&mut out, Tok::Int(v));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match s.as_str() {
                "val" | "rv" => Tok::Ident(s),
                _ => match s.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                    Some(k) if k >= 1 && !s[1..].starts_with('0') => Tok::Var(k),
                    _ => {
                        return Err(DefsetError::UnknownVariable {
                            name: s,
                            line: l0,
                            col: c0,
                        })
                    }
                },
            };
            push(&mut out, tok);
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let sym = match two.as_str() {
            "<=" => Some("<="),
            ">=" => Some(">="),
            _ => None,
        };
        let (sym, width) = match sym {
            Some(s) => (s, 2),
            None => (
                match c {
                    '+' => "+",
                    '-' => "-",
                    '*' => "*",
                    '^' => "^",
                    '(' => "(",
                    ')' => ")",
                    ',' => ",",
                    '&' => "&",
                    '|' => "|",
                    '!' => "!",
                    '=' => "=",
                    '<' => "<",
                    '>' => ">",
                    '≤' => "<=",
                    '≥' => ">=",
                    _ => {
                        return Err(DefsetError::Syntax {
                            line,
                            col,
                            expected: "a token".into(),
                        });
                    }
                },
                1,
            ),
        };
        i += width;
        col += width;
        push(&mut out, Tok::Sym(sym));
    }
    out.push(Token {
        tok: Tok::End,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, DefsetError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn error(&self, expected: &str) -> DefsetError {
        let t = &self.toks[self.pos];
        DefsetError::Syntax {
            line: t.line,
            col: t.col,
            expected: expected.to_string(),
        }
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(s) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> PResult<()> {
        if self.eat(sym) {
            Ok(())
        } else {
            Err(self.error(&format!("'{sym}'")))
        }
    }

    fn int(&mut self) -> PResult<i64> {
        let neg = self.eat("-");
        match *self.peek() {
            Tok::Int(v) => {
                self.pos += 1;
                Ok(if neg { -v } else { v })
            }
            _ => Err(self.error("an integer")),
        }
    }

    fn expr(&mut self) -> PResult<SetExpr> {
        let mut lhs = self.and()?;
        while self.eat("|") {
            let rhs = self.and()?;
            lhs = SetExpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<SetExpr> {
        let mut lhs = self.unary()?;
        while self.eat("&") {
            let rhs = self.unary()?;
            lhs = SetExpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<SetExpr> {
        if self.eat("!") {
            return Ok(SetExpr::Not(Box::new(self.unary()?)));
        }
        if *self.peek() == Tok::Sym("(") {
            let save = self.pos;
            self.pos += 1;
            let first = self.expr().and_then(|e| self.expect(")").map(|_| e));
            match first {
                Ok(e) => return Ok(e),
                Err(e1) => {
                    let far1 = self.pos;
                    self.pos = save;
                    return self
                        .atom()
                        .map_err(|e2| if self.pos >= far1 { e2 } else { e1 });
                }
            }
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<SetExpr> {
        if let Tok::Ident(name) = self.peek().clone() {
            self.pos += 1;
            self.expect("(")?;
            let poly = self.poly()?;
            self.expect(")")?;
            return if name == "val" {
                let cmp = self.cmp()?;
                let bound = self.int()?;
                Ok(SetExpr::Val { poly, cmp, bound })
            } else {
                self.expect("=")?;
                self.expect("(")?;
                let lambda = self.int()?;
                self.expect(",")?;
                let unit = self.int()?;
                self.expect(")")?;
                Ok(SetExpr::Rv { poly, lambda, unit })
            };
        }
        let poly = self.poly()?;
        self.expect("=")?;
        match *self.peek() {
            Tok::Int(0) => {
                self.pos += 1;
                Ok(SetExpr::Zero(poly))
            }
            _ => Err(self.error("'0'")),
        }
    }

    fn cmp(&mut self) -> PResult<Cmp> {
        for (s, c) in [
            ("<=", Cmp::Le),
            (">=", Cmp::Ge),
            ("<", Cmp::Lt),
            (">", Cmp::Gt),
            ("=", Cmp::Eq),
        ] {
            if self.eat(s) {
                return Ok(c);
            }
        }
        Err(self.error("a comparison"))
    }

    fn poly(&mut self) -> PResult<Poly> {
        let mut acc = self.term()?;
        loop {
            if self.eat("+") {
                acc = acc.add(&self.term()?)?;
            } else if self.eat("-") {
                acc = acc.sub(&self.term()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> PResult<Poly> {
        let mut acc = self.factor()?;
        while self.eat("*") {
            acc = acc.mul(&self.factor()?)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> PResult<Poly> {
        if self.eat("-") {
            return self.factor()?.neg();
        }
        let base = self.base()?;
        if self.eat("^") {
            match *self.peek() {
                Tok::Int(k) => {
                    self.pos += 1;
                    let k = u32::try_from(k)
                        .map_err(|_| DefsetError::DegreeOverflow { degree: u32::MAX })?;
                    base.pow(k)
                }
                _ => Err(self.error("an exponent")),
            }
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> PResult<Poly> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.pos += 1;
                Ok(Poly::constant(v))
            }
            Tok::Var(k) => {
                self.pos += 1;
                Ok(Poly::var(k))
            }
            Tok::Sym("(") => {
                self.pos += 1;
                let p = self.poly()?;
                self.expect(")")?;
                Ok(p)
            }
            _ => Err(self.error("a polynomial")),
        }
    }
}

/// Parse a set formula.
pub fn parse(text: &str) -> Result<SetExpr, DefsetError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error("end of input"));
    }
    Ok(e)
}

/// Parse a polynomial on its own, as in the `poly` production.
pub fn parse_poly(text: &str) -> Result<Poly, DefsetError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.poly()?;
    if *p.peek() != Tok::End {
        return Err(p.error("end of input"));
    }
    Ok(e)
}
