//! Concrete syntax for properties.
//!
//! ```text
//! file     := decl* formula
//! decl     := ("int" | "rat") ident ("," ident)* ";"
//! formula  := or ("->" formula)?
//! or       := and ("||" and)*
//! and      := until ("&&" until)*
//! until    := unary ("U" until)?
//! unary    := ("!" | "G" | "F" | "X" | "wX") unary | primary
//! primary  := "true" | "false" | "strict" "(" atom ")" | atom | "(" formula ")"
//! atom     := expr rel expr        rel := = != < <= > >= =_n !=_n
//! expr     := term (("+" | "-") term)*
//! term     := factor (("*" | "/") factor)*
//! factor   := number | ident "'"* | "(" expr ")" | "-" factor
//! ```
//!
//! Comments run from `#` or `//` to the end of the line.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{CompOp, ConstraintAtom, Declarations, Expression, Formula, Sort, VarRef};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(BigRational),
    Prime,
    LParen,
    RParen,
    Semi,
    Comma,
    Plus,
    Minus,
    Star,
    Slash,
    AndAnd,
    OrOr,
    Bang,
    Arrow,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    CongEq(u64),
    CongNe(u64),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: tl, col: tc });
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
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            push(&mut out, Tok::Ident(word));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut digits: String = chars[start..i].iter().collect();
            let mut scale = 0usize;
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                let fs = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                scale = i - fs;
                digits.extend(chars[fs..i].iter());
            }
            col += i - start;
            let num: BigInt = digits.parse().expect("digits");
            let den = num_traits::pow(BigInt::from(10), scale);
            push(&mut out, Tok::Num(BigRational::new(num, den)));
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let (tok, len) = match two.as_str() {
            "&&" => (Tok::AndAnd, 2),
            "||" => (Tok::OrOr, 2),
            "->" => (Tok::Arrow, 2),
            "<=" => (Tok::Le, 2),
            ">=" => (Tok::Ge, 2),
            "=_" | "!=" if two == "=_" || chars.get(i + 2) == Some(&'_') => {
                // congruence operators `=_n` and `!=_n`
                let neg = c == '!';
                let mut j = i + if neg { 3 } else { 2 };
                let ds = j;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let n: u64 = chars[ds..j]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| Error::parse(tl, tc, "malformed modulus after `=_`"))?;
                if n == 0 {
                    return Err(Error::parse(tl, tc, "congruence modulus must be at least 1"));
                }
                (if neg { Tok::CongNe(n) } else { Tok::CongEq(n) }, j - i)
            }
            "!=" => (Tok::Ne, 2),
            _ => match c {
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                ';' => (Tok::Semi, 1),
                ',' => (Tok::Comma, 1),
                '+' => (Tok::Plus, 1),
                '-' => (Tok::Minus, 1),
                '*' => (Tok::Star, 1),
                '/' => (Tok::Slash, 1),
                '!' => (Tok::Bang, 1),
                '=' => (Tok::Eq, 1),
                '<' => (Tok::Lt, 1),
                '>' => (Tok::Gt, 1),
                '\'' => (Tok::Prime, 1),
                _ => return Err(Error::parse(tl, tc, format!("unexpected character `{c}`"))),
            },
        };
        push(&mut out, tok);
        i += len;
        col += len;
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

const KEYWORDS: &[&str] = &["G", "F", "X", "wX", "U", "true", "false", "strict", "int", "rat"];

/// A property file: declarations followed by one formula.
#[derive(Clone, Debug)]
pub struct ParsedProperty {
    pub decls: Declarations,
    pub formula: Formula,
}

/// Parses a formula against the given declarations.
pub fn parse_property(src: &str, decls: &Declarations) -> Result<Formula> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, decls };
    let f = p.formula()?;
    p.expect_eof()?;
    Ok(f)
}

/// Parses a property file (declarations, then the formula).
pub fn parse_property_file(src: &str) -> Result<ParsedProperty> {
    let toks = lex(src)?;
    let mut decls = Declarations::new();
    let mut pos = 0;
    loop {
        let sort = match &toks[pos].tok {
            Tok::Ident(w) if w == "int" => Sort::Int,
            Tok::Ident(w) if w == "rat" => Sort::Rat,
            _ => break,
        };
        pos += 1;
        loop {
            let t = &toks[pos];
            match &t.tok {
                Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                    if !decls.declare(name, sort) {
                        return Err(Error::parse(t.line, t.col, format!("`{name}` declared twice")));
                    }
                }
                _ => return Err(Error::parse(t.line, t.col, "expected a variable name")),
            }
            pos += 1;
            match toks[pos].tok {
                Tok::Comma => pos += 1,
                Tok::Semi => {
                    pos += 1;
                    break;
                }
                _ => {
                    let t = &toks[pos];
                    return Err(Error::parse(t.line, t.col, "expected `,` or `;` in declaration"));
                }
            }
        }
    }
    if decls.is_empty() {
        let t = &toks[pos];
        return Err(Error::parse(t.line, t.col, "expected at least one `int` or `rat` declaration"));
    }
    let mut p = Parser { toks, pos, decls: &decls };
    let formula = p.formula()?;
    p.expect_eof()?;
    Ok(ParsedProperty { decls, formula })
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    decls: &'a Declarations,
}

/// Negation that lands directly on atoms when possible.
pub(crate) fn negate(f: Formula) -> Formula {
    match f {
        Formula::Atom(c) => Formula::NegAtom(c),
        Formula::NegAtom(c) => Formula::Atom(c),
        other => Formula::not(other),
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let t = &self.toks[self.pos];
        Err(Error::parse(t.line, t.col, msg))
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expect_eof(&self) -> Result<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.err("unexpected trailing input")
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == kw)
    }

    fn formula(&mut self) -> Result<Formula> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.formula()?;
            return Ok(Formula::or(negate(lhs), rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut f = self.and()?;
        while self.eat(&Tok::OrOr) {
            f = Formula::or(f, self.and()?);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut f = self.until()?;
        while self.eat(&Tok::AndAnd) {
            f = Formula::and(f, self.until()?);
        }
        Ok(f)
    }

    fn until(&mut self) -> Result<Formula> {
        let lhs = self.unary()?;
        if self.is_kw("U") {
            self.pos += 1;
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat(&Tok::Bang) {
            return Ok(negate(self.unary()?));
        }
        let op = match self.peek() {
            Tok::Ident(w) if matches!(w.as_str(), "G" | "F" | "X" | "wX") => w.clone(),
            _ => return self.primary(),
        };
        self.pos += 1;
        let inner = self.unary()?;
        Ok(match op.as_str() {
            "G" => Formula::globally(inner),
            "F" => Formula::eventually(inner),
            "X" => Formula::next(inner),
            _ => Formula::weak_next(inner),
        })
    }

    fn primary(&mut self) -> Result<Formula> {
        if self.is_kw("true") {
            self.pos += 1;
            return Ok(Formula::True);
        }
        if self.is_kw("false") {
            self.pos += 1;
            return Ok(Formula::False);
        }
        if self.is_kw("strict") {
            self.pos += 1;
            self.expect(Tok::LParen, "`(` after `strict`")?;
            let c = self.atom()?;
            self.expect(Tok::RParen, "`)` closing `strict(`")?;
            let mut tail = Formula::True;
            for _ in 0..c.lookahead() {
                tail = Formula::next(tail);
            }
            return Ok(if c.lookahead() == 0 { Formula::Atom(c) } else { Formula::and(Formula::Atom(c), tail) });
        }
        if *self.peek() == Tok::LParen {
            // `(` opens either an arithmetic term of an atom or a subformula
            let save = self.pos;
            match self.atom() {
                Ok(c) => return Ok(Formula::Atom(c)),
                Err(e_atom) => {
                    let atom_pos = self.pos;
                    self.pos = save + 1;
                    match self.formula().and_then(|f| {
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(f)
                    }) {
                        Ok(f) => return Ok(f),
                        Err(e_form) => {
                            return Err(if atom_pos > self.pos { e_atom } else { e_form });
                        }
                    }
                }
            }
        }
        Ok(Formula::Atom(self.atom()?))
    }

    fn atom(&mut self) -> Result<ConstraintAtom> {
        let start = self.toks[self.pos].clone();
        let lhs = self.expr()?;
        let op = self.bump();
        let rhs = self.expr()?;
        let atom = match op {
            Tok::Eq => ConstraintAtom::new(lhs, CompOp::Eq, rhs),
            Tok::Ne => ConstraintAtom::new(lhs, CompOp::Ne, rhs),
            Tok::Lt => ConstraintAtom::new(lhs, CompOp::Lt, rhs),
            Tok::Le => ConstraintAtom::new(lhs, CompOp::Le, rhs),
            Tok::Gt => ConstraintAtom::new(rhs, CompOp::Lt, lhs),
            Tok::Ge => ConstraintAtom::new(rhs, CompOp::Le, lhs),
            Tok::CongEq(n) => ConstraintAtom::new(lhs, CompOp::Cong(n), rhs),
            Tok::CongNe(n) => ConstraintAtom::new(lhs, CompOp::NCong(n), rhs),
            _ => {
                self.pos -= 1;
                return self.err("expected a comparison operator");
            }
        };
        self.check_sorts(&atom, &start)?;
        Ok(atom)
    }

    fn check_sorts(&self, atom: &ConstraintAtom, at: &Token) -> Result<()> {
        let mut sorts = Vec::new();
        atom.for_each_var(&mut |v| sorts.push(self.decls.sort_of(&v.base).expect("checked at use")));
        sorts.dedup();
        if sorts.iter().any(|s| *s != sorts[0]) {
            return Err(Error::parse(at.line, at.col, "atom mixes int and rat variables"));
        }
        if let CompOp::Cong(_) | CompOp::NCong(_) = atom.op {
            if sorts.first() == Some(&Sort::Rat) {
                return Err(Error::parse(at.line, at.col, "congruence on rat-sorted expressions"));
            }
            let mut integral = true;
            let mut check = |e: &Expression| {
                integral &= integral_coefficients(e, &BigRational::one());
            };
            check(&atom.lhs);
            check(&atom.rhs);
            if !integral {
                return Err(Error::parse(at.line, at.col, "congruence with non-integer coefficients"));
            }
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expression> {
        let mut e = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                e = Expression::add(e, self.term()?);
            } else if self.eat(&Tok::Minus) {
                let t = self.term()?;
                e = Expression::add(e, negate_expr(t));
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expression> {
        let mut e = self.factor()?;
        loop {
            if self.eat(&Tok::Star) {
                let rhs = self.factor()?;
                e = match (e, rhs) {
                    (Expression::Const(a), Expression::Const(b)) => Expression::Const(a * b),
                    (Expression::Const(k), other) | (other, Expression::Const(k)) => Expression::scale(k, other),
                    _ => {
                        self.pos -= 1;
                        return self.err("non-linear product: one factor must be a constant");
                    }
                };
            } else if self.eat(&Tok::Slash) {
                let rhs = self.factor()?;
                let k = match rhs {
                    Expression::Const(k) if !k.is_zero() => k,
                    _ => {
                        self.pos -= 1;
                        return self.err("division only by a non-zero constant");
                    }
                };
                e = match e {
                    Expression::Const(a) => Expression::Const(a / k),
                    other => Expression::scale(k.recip(), other),
                };
            } else {
                return Ok(e);
            }
        }
    }

    fn factor(&mut self) -> Result<Expression> {
        let t = self.toks[self.pos].clone();
        match t.tok {
            Tok::Num(n) => {
                self.pos += 1;
                Ok(Expression::Const(n))
            }
            Tok::Minus => {
                self.pos += 1;
                Ok(negate_expr(self.factor()?))
            }
            Tok::LParen => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                self.pos += 1;
                let base = match self.decls.name(&name) {
                    Some(b) => b,
                    None => return Err(Error::parse(t.line, t.col, format!("undeclared variable `{name}`"))),
                };
                let mut primes = 0;
                while self.eat(&Tok::Prime) {
                    primes += 1;
                }
                Ok(Expression::Var(VarRef::plain(base, primes)))
            }
            _ => self.err("expected a number, variable or `(`"),
        }
    }
}

fn negate_expr(e: Expression) -> Expression {
    match e {
        Expression::Const(c) => Expression::Const(-c),
        Expression::Scale(k, inner) => Expression::Scale(-k, inner),
        other => Expression::scale(-BigRational::one(), other),
    }
}

fn integral_coefficients(e: &Expression, factor: &BigRational) -> bool {
    match e {
        Expression::Const(c) => (c * factor).is_integer(),
        Expression::Var(_) => factor.is_integer(),
        Expression::Add(a, b) => integral_coefficients(a, factor) && integral_coefficients(b, factor),
        Expression::Scale(k, inner) => {
            let f = k * factor;
            f.abs().is_zero() || integral_coefficients(inner, &f)
        }
    }
}
