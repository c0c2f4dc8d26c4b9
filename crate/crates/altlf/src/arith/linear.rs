//! Linear expressions and canonical atoms `e REL 0`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::formula::{CompOp, ConstraintAtom, Declarations, Expression, Sort, VarRef};

use super::Valuation;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinExpr {
    /// Sorted by variable, no zero coefficients.
    pub terms: Vec<(VarRef, BigRational)>,
    pub constant: BigRational,
}

#[cfg(test)]
pub(crate) fn rint(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl LinExpr {
    pub fn constant(c: BigRational) -> Self {
        LinExpr { terms: Vec::new(), constant: c }
    }

    pub fn var(v: VarRef) -> Self {
        LinExpr { terms: vec![(v, BigRational::one())], constant: BigRational::zero() }
    }

    pub fn from_expression(e: &Expression) -> Self {
        match e {
            Expression::Const(c) => LinExpr::constant(c.clone()),
            Expression::Var(v) => LinExpr::var(v.clone()),
            Expression::Add(a, b) => LinExpr::from_expression(a).add(&LinExpr::from_expression(b)),
            Expression::Scale(k, e) => LinExpr::from_expression(e).scale(k),
        }
    }

    pub fn is_const(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let ord = match (self.terms.get(i), other.terms.get(j)) {
                (Some(a), Some(b)) => a.0.cmp(&b.0),
                (Some(_), None) => std::cmp::Ordering::Less,
                _ => std::cmp::Ordering::Greater,
            };
            match ord {
                std::cmp::Ordering::Less => {
                    terms.push(self.terms[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    terms.push(other.terms[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = &self.terms[i].1 + &other.terms[j].1;
                    if !c.is_zero() {
                        terms.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        LinExpr { terms, constant: &self.constant + &other.constant }
    }

    pub fn scale(&self, k: &BigRational) -> LinExpr {
        if k.is_zero() {
            return LinExpr::constant(BigRational::zero());
        }
        LinExpr { terms: self.terms.iter().map(|(v, c)| (v.clone(), c * k)).collect(), constant: &self.constant * k }
    }

    pub fn neg(&self) -> LinExpr {
        self.scale(&-BigRational::one())
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add(&other.neg())
    }

    pub fn add_const(&self, k: &BigRational) -> LinExpr {
        LinExpr { terms: self.terms.clone(), constant: &self.constant + k }
    }

    pub fn coeff(&self, v: &VarRef) -> Option<&BigRational> {
        self.terms.binary_search_by(|(w, _)| w.cmp(v)).ok().map(|i| &self.terms[i].1)
    }

    pub fn contains(&self, v: &VarRef) -> bool {
        self.coeff(v).is_some()
    }

    /// The expression with the term of `v` removed.
    pub fn without(&self, v: &VarRef) -> LinExpr {
        LinExpr { terms: self.terms.iter().filter(|(w, _)| w != v).cloned().collect(), constant: self.constant.clone() }
    }

    pub fn substitute(&self, v: &VarRef, e: &LinExpr) -> LinExpr {
        match self.coeff(v) {
            None => self.clone(),
            Some(c) => self.without(v).add(&e.scale(c)),
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&VarRef) -> VarRef) -> LinExpr {
        let mut out = LinExpr::constant(self.constant.clone());
        for (v, c) in &self.terms {
            out = out.add(&LinExpr::var(f(v)).scale(c));
        }
        out
    }

    pub fn eval(&self, val: &impl Valuation) -> Option<BigRational> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.terms {
            acc += c * val.value(v)?;
        }
        Some(acc)
    }

    /// Substitutes the variables that `val` knows.
    pub fn partial_eval(&self, val: &impl Valuation) -> LinExpr {
        let mut out = LinExpr::constant(self.constant.clone());
        for (v, c) in &self.terms {
            match val.value(v) {
                Some(x) => out.constant += c * x,
                None => out.terms.push((v.clone(), c.clone())),
            }
        }
        out
    }

    fn denominators_lcm(&self) -> BigInt {
        let mut l = self.constant.denom().clone();
        for (_, c) in &self.terms {
            l = l.lcm(c.denom());
        }
        l
    }

    fn coeff_gcd(&self) -> BigInt {
        let mut g = BigInt::zero();
        for (_, c) in &self.terms {
            g = g.gcd(c.numer());
        }
        g
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Eq,
    Ne,
    Le,
    Lt,
    /// `e ≡ 0 (mod n)`
    Cong(BigInt),
    NCong(BigInt),
}

/// A canonical atom `expr REL 0` over one sort.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub expr: LinExpr,
    pub rel: Rel,
    pub int: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Lit {
    True,
    False,
    Atom(Atom),
}

impl Lit {
    pub fn from_bool(b: bool) -> Lit {
        if b {
            Lit::True
        } else {
            Lit::False
        }
    }
}

fn ground(c: &BigRational, rel: &Rel) -> bool {
    match rel {
        Rel::Eq => c.is_zero(),
        Rel::Ne => !c.is_zero(),
        Rel::Le => !c.is_positive(),
        Rel::Lt => c.is_negative(),
        Rel::Cong(n) => c.is_integer() && c.numer().mod_floor(n).is_zero(),
        Rel::NCong(n) => !(c.is_integer() && c.numer().mod_floor(n).is_zero()),
    }
}

fn mod_inverse(a: &BigInt, n: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(n);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(n))
    } else {
        None
    }
}

impl Atom {
    /// Builds the canonical form of `expr REL 0`.
    pub fn new(expr: LinExpr, rel: Rel, int: bool) -> Lit {
        if expr.is_const() {
            return Lit::from_bool(ground(&expr.constant, &rel));
        }
        if matches!(rel, Rel::Cong(_) | Rel::NCong(_)) {
            return Self::new_congruence(expr, rel);
        }
        if int {
            let l = expr.denominators_lcm();
            let mut e = if l.is_one() { expr } else { expr.scale(&BigRational::from_integer(l)) };
            let g = e.coeff_gcd();
            let gq = BigRational::from_integer(g.clone());
            match rel {
                Rel::Eq | Rel::Ne => {
                    if !(e.constant.numer().is_multiple_of(&g)) {
                        return Lit::from_bool(rel == Rel::Ne);
                    }
                    let mut k = gq.recip();
                    if e.terms[0].1.is_negative() {
                        k = -k;
                    }
                    e = e.scale(&k);
                    Lit::Atom(Atom { expr: e, rel, int })
                }
                Rel::Lt | Rel::Le => {
                    if rel == Rel::Lt {
                        e.constant += BigRational::one();
                    }
                    let terms = e.terms.iter().map(|(v, c)| (v.clone(), c / &gq)).collect();
                    let constant = (&e.constant / &gq).ceil();
                    Lit::Atom(Atom { expr: LinExpr { terms, constant }, rel: Rel::Le, int })
                }
                _ => unreachable!(),
            }
        } else {
            let a1 = expr.terms[0].1.clone();
            let k = match rel {
                Rel::Eq | Rel::Ne => a1.recip(),
                _ => a1.abs().recip(),
            };
            Lit::Atom(Atom { expr: expr.scale(&k), rel, int })
        }
    }

    fn new_congruence(expr: LinExpr, rel: Rel) -> Lit {
        let (n, positive) = match &rel {
            Rel::Cong(n) => (n.clone(), true),
            Rel::NCong(n) => (n.clone(), false),
            _ => unreachable!(),
        };
        let l = expr.denominators_lcm();
        let n = &n * &l;
        let e = expr.scale(&BigRational::from_integer(l));
        let mut terms: Vec<(VarRef, BigInt)> =
            e.terms.iter().map(|(v, c)| (v.clone(), c.numer().mod_floor(&n))).filter(|(_, c)| !c.is_zero()).collect();
        let mut c = e.constant.numer().mod_floor(&n);
        let mut g = n.clone();
        for (_, a) in &terms {
            g = g.gcd(a);
        }
        if !c.is_multiple_of(&g) {
            return Lit::from_bool(!positive);
        }
        let n = &n / &g;
        c = &c / &g;
        for t in terms.iter_mut() {
            t.1 = &t.1 / &g;
        }
        if n.is_one() || terms.is_empty() {
            return Lit::from_bool(ground(&BigRational::from_integer(c), &Rel::Cong(n)) == positive);
        }
        if let Some(inv) = mod_inverse(&terms[0].1, &n) {
            for t in terms.iter_mut() {
                t.1 = (&t.1 * &inv).mod_floor(&n);
            }
            c = (&c * &inv).mod_floor(&n);
        }
        let expr = LinExpr {
            terms: terms.into_iter().map(|(v, a)| (v, BigRational::from_integer(a))).collect(),
            constant: BigRational::from_integer(c),
        };
        let rel = if positive { Rel::Cong(n) } else { Rel::NCong(n) };
        Lit::Atom(Atom { expr, rel, int: true })
    }

    /// Converts a surface atom; the sort comes from its variables.
    pub fn from_constraint(c: &ConstraintAtom, decls: &Declarations) -> Lit {
        let mut int = false;
        c.for_each_var(&mut |v| int |= decls.sort_of(&v.base) == Some(Sort::Int));
        let e = LinExpr::from_expression(&c.lhs).sub(&LinExpr::from_expression(&c.rhs));
        let rel = match c.op {
            CompOp::Eq => Rel::Eq,
            CompOp::Ne => Rel::Ne,
            CompOp::Lt => Rel::Lt,
            CompOp::Le => Rel::Le,
            CompOp::Cong(n) => Rel::Cong(BigInt::from(n)),
            CompOp::NCong(n) => Rel::NCong(BigInt::from(n)),
        };
        Atom::new(e, rel, int)
    }

    pub fn neg(&self) -> Atom {
        let lit = match &self.rel {
            Rel::Eq => Atom::new(self.expr.clone(), Rel::Ne, self.int),
            Rel::Ne => Atom::new(self.expr.clone(), Rel::Eq, self.int),
            Rel::Le => Atom::new(self.expr.neg(), Rel::Lt, self.int),
            Rel::Lt => Atom::new(self.expr.neg(), Rel::Le, self.int),
            Rel::Cong(n) => Atom::new(self.expr.clone(), Rel::NCong(n.clone()), self.int),
            Rel::NCong(n) => Atom::new(self.expr.clone(), Rel::Cong(n.clone()), self.int),
        };
        match lit {
            Lit::Atom(a) => a,
            _ => unreachable!("negation of a non-trivial atom is non-trivial"),
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &VarRef> + '_ {
        self.expr.terms.iter().map(|(v, _)| v)
    }

    pub fn contains(&self, v: &VarRef) -> bool {
        self.expr.contains(v)
    }

    pub fn eval(&self, val: &impl Valuation) -> Option<bool> {
        Some(ground(&self.expr.eval(val)?, &self.rel))
    }

    pub fn substitute(&self, v: &VarRef, e: &LinExpr) -> Lit {
        if !self.contains(v) {
            return Lit::Atom(self.clone());
        }
        Atom::new(self.expr.substitute(v, e), self.rel.clone(), self.int)
    }

    pub fn partial_eval(&self, val: &impl Valuation) -> Lit {
        Atom::new(self.expr.partial_eval(val), self.rel.clone(), self.int)
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&VarRef) -> VarRef) -> Lit {
        Atom::new(self.expr.map_vars(f), self.rel.clone(), self.int)
    }

    /// Constants in the sense of the monotonicity fragment: for `x ⊙ k`
    /// shaped atoms, `k`.
    pub fn mc_constant(&self) -> Option<BigRational> {
        if self.expr.terms.len() == 1 && self.expr.terms[0].1.abs().is_one() {
            Some(-&self.expr.constant / &self.expr.terms[0].1)
        } else {
            None
        }
    }

    /// Monotonicity-constraint shape: `x ⊙ k` or `x ⊙ y` with unit coefficients.
    pub fn is_mc(&self) -> bool {
        let t = &self.expr.terms;
        match (&self.rel, t.len()) {
            (Rel::Cong(_) | Rel::NCong(_), _) => false,
            (_, 1) => t[0].1.abs().is_one(),
            (_, 2) => {
                // over ℤ, `x < y` is stored as `x − y + 1 ≤ 0`
                let c = &self.expr.constant;
                let strict_int = self.int && self.rel == Rel::Le && c.is_one();
                (c.is_zero() || strict_int) && t[0].1.abs().is_one() && (&t[0].1 + &t[1].1).is_zero()
            }
            _ => false,
        }
    }

    /// The integer-difference shape `x − y ⊙ k` (or a bound `x ⊙ k`).
    pub fn is_difference(&self) -> bool {
        let t = &self.expr.terms;
        match (&self.rel, t.len()) {
            (Rel::Cong(_) | Rel::NCong(_), _) => false,
            (_, 1) => t[0].1.abs().is_one(),
            (_, 2) => t[0].1.abs().is_one() && (&t[0].1 + &t[1].1).is_zero(),
            _ => false,
        }
    }

    /// Splits a comparison into `(L, k)` with `L`'s first coefficient
    /// positive, such that the atom reads `L REL' k`. Returns the relation
    /// as seen from `L`: `Eq`, `Ne`, `Le` (upper bound), `Lt` (strict upper),
    /// and for lower bounds `Ge`/`Gt` encoded by the flag.
    pub(crate) fn as_bound(&self) -> Option<(Vec<(VarRef, BigRational)>, Bound)> {
        let positive = self.expr.terms[0].1.is_positive();
        let k = -&self.expr.constant;
        match &self.rel {
            Rel::Eq => Some((self.expr.terms.clone(), Bound::Eq(k))),
            Rel::Ne => Some((self.expr.terms.clone(), Bound::Ne(k))),
            Rel::Le | Rel::Lt => {
                let strict = self.rel == Rel::Lt;
                if positive {
                    Some((self.expr.terms.clone(), Bound::Upper(k, strict)))
                } else {
                    let terms = self.expr.terms.iter().map(|(v, c)| (v.clone(), -c)).collect();
                    Some((terms, Bound::Lower(-k, strict)))
                }
            }
            _ => None,
        }
    }

    pub(crate) fn from_bound(form: &[(VarRef, BigRational)], b: &Bound, int: bool) -> Lit {
        let l = LinExpr { terms: form.to_vec(), constant: BigRational::zero() };
        match b {
            Bound::Eq(k) => Atom::new(l.add_const(&-k), Rel::Eq, int),
            Bound::Ne(k) => Atom::new(l.add_const(&-k), Rel::Ne, int),
            Bound::Upper(k, s) => Atom::new(l.add_const(&-k), if *s { Rel::Lt } else { Rel::Le }, int),
            Bound::Lower(k, s) => Atom::new(l.neg().add_const(k), if *s { Rel::Lt } else { Rel::Le }, int),
        }
    }

    /// Surface form for printing and exporting.
    pub fn to_constraint(&self) -> ConstraintAtom {
        let (lhs, op, rhs) = self.sides();
        let expr = |terms: &[(VarRef, BigRational)], k: &BigRational| {
            let mut e: Option<Expression> = None;
            for (v, c) in terms {
                let t = if c.is_one() {
                    Expression::Var(v.clone())
                } else {
                    Expression::scale(c.clone(), Expression::Var(v.clone()))
                };
                e = Some(match e {
                    None => t,
                    Some(acc) => Expression::add(acc, t),
                });
            }
            match e {
                None => Expression::Const(k.clone()),
                Some(acc) if k.is_zero() => acc,
                Some(acc) => Expression::add(acc, Expression::Const(k.clone())),
            }
        };
        ConstraintAtom::new(expr(&lhs.0, &lhs.1), op, expr(&rhs.0, &rhs.1))
    }

    /// `(lhs, op, rhs)` with positive coefficients on both sides where possible.
    #[allow(clippy::type_complexity)]
    fn sides(&self) -> ((Vec<(VarRef, BigRational)>, BigRational), CompOp, (Vec<(VarRef, BigRational)>, BigRational)) {
        let pos: Vec<_> = self.expr.terms.iter().filter(|(_, c)| c.is_positive()).cloned().collect();
        let neg: Vec<_> =
            self.expr.terms.iter().filter(|(_, c)| c.is_negative()).map(|(v, c)| (v.clone(), -c)).collect();
        let k = -&self.expr.constant;
        let zero = BigRational::zero();
        let op = match &self.rel {
            Rel::Eq => CompOp::Eq,
            Rel::Ne => CompOp::Ne,
            Rel::Le => CompOp::Le,
            Rel::Lt => CompOp::Lt,
            Rel::Cong(n) => CompOp::Cong(n.try_into().unwrap_or(u64::MAX)),
            Rel::NCong(n) => CompOp::NCong(n.try_into().unwrap_or(u64::MAX)),
        };
        if pos.is_empty() {
            // -N + c REL 0  reads  c REL N, printed with N on the left
            let flipped = match op {
                CompOp::Le | CompOp::Lt => return ((vec![], -k), op, (neg, zero)),
                other => other,
            };
            return ((neg, zero), flipped, (vec![], -k));
        }
        ((pos, zero), op, (neg, k))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Bound {
    Eq(BigRational),
    Ne(BigRational),
    /// `L ≤ k` or `L < k`
    Upper(BigRational, bool),
    /// `L ≥ k` or `L > k`
    Lower(BigRational, bool),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lhs, op, rhs) = self.sides();
        let side = |terms: &[(VarRef, BigRational)], k: &BigRational| {
            let mut s = String::new();
            for (v, c) in terms {
                if !s.is_empty() {
                    s.push_str(" + ");
                }
                if c.is_one() {
                    s.push_str(&v.to_string());
                } else {
                    s.push_str(&format!("{}*{}", crate::formula::fmt_rational(c), v));
                }
            }
            if s.is_empty() {
                s = crate::formula::fmt_rational(k);
            } else if k.is_positive() {
                s.push_str(&format!(" + {}", crate::formula::fmt_rational(k)));
            } else if k.is_negative() {
                s.push_str(&format!(" - {}", crate::formula::fmt_rational(&-k)));
            }
            s
        };
        let l = side(&lhs.0, &lhs.1);
        let r = side(&rhs.0, &rhs.1);
        // lower bounds read better with the variable first
        match op {
            CompOp::Le if lhs.0.is_empty() => write!(f, "{r} >= {l}"),
            CompOp::Lt if lhs.0.is_empty() => write!(f, "{r} > {l}"),
            _ => write!(f, "{l} {op} {r}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> VarRef {
        VarRef::plain("x", 0)
    }
    fn y() -> VarRef {
        VarRef::plain("y", 0)
    }
    fn atom(l: Lit) -> Atom {
        match l {
            Lit::Atom(a) => a,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn integer_tightening() {
        // x - 2 < 0 over the integers is x ≤ 1
        let a = atom(Atom::new(LinExpr::var(x()).add_const(&rint(-2)), Rel::Lt, true));
        let b = atom(Atom::new(LinExpr::var(x()).add_const(&rint(-1)), Rel::Le, true));
        assert_eq!(a, b);
        // 2x ≤ 3 is x ≤ 1
        let c = atom(Atom::new(LinExpr::var(x()).scale(&rint(2)).add_const(&rint(-3)), Rel::Le, true));
        assert_eq!(c, b);
        // 2x = 3 has no integer solution
        assert_eq!(Atom::new(LinExpr::var(x()).scale(&rint(2)).add_const(&rint(-3)), Rel::Eq, true), Lit::False);
    }

    #[test]
    fn rational_scaling_is_canonical() {
        let a =
            atom(Atom::new(LinExpr::var(x()).scale(&rint(2)).sub(&LinExpr::var(y()).scale(&rint(4))), Rel::Le, false));
        let b = atom(Atom::new(LinExpr::var(x()).sub(&LinExpr::var(y()).scale(&rint(2))), Rel::Le, false));
        assert_eq!(a, b);
        let e1 = atom(Atom::new(LinExpr::var(x()).sub(&LinExpr::var(y())), Rel::Eq, false));
        let e2 = atom(Atom::new(LinExpr::var(y()).sub(&LinExpr::var(x())), Rel::Eq, false));
        assert_eq!(e1, e2);
    }

    #[test]
    fn congruences() {
        // 2x ≡ 0 (mod 4)  is  x ≡ 0 (mod 2)
        let a = atom(Atom::new(LinExpr::var(x()).scale(&rint(2)), Rel::Cong(4.into()), true));
        let b = atom(Atom::new(LinExpr::var(x()), Rel::Cong(2.into()), true));
        assert_eq!(a, b);
        // 2x + 1 ≡ 0 (mod 4) is unsatisfiable
        let c = Atom::new(LinExpr::var(x()).scale(&rint(2)).add_const(&rint(1)), Rel::Cong(4.into()), true);
        assert_eq!(c, Lit::False);
        // anything is ≡ modulo 1
        assert_eq!(Atom::new(LinExpr::var(x()), Rel::Cong(1.into()), true), Lit::True);
        // 3x ≡ 1 (mod 5) is x ≡ 2 (mod 5)
        let d = atom(Atom::new(LinExpr::var(x()).scale(&rint(3)).add_const(&rint(-1)), Rel::Cong(5.into()), true));
        let e = atom(Atom::new(LinExpr::var(x()).add_const(&rint(-2)), Rel::Cong(5.into()), true));
        assert_eq!(d, e);
    }

    #[test]
    fn negation_is_involutive() {
        for (rel, int) in [(Rel::Le, true), (Rel::Lt, false), (Rel::Eq, true), (Rel::Cong(3.into()), true)] {
            let a = atom(Atom::new(LinExpr::var(x()).sub(&LinExpr::var(y())).add_const(&rint(1)), rel, int));
            assert_eq!(a.neg().neg(), a);
            assert_ne!(a.neg(), a);
        }
    }

    #[test]
    fn printing() {
        let a = atom(Atom::new(LinExpr::var(x()).neg().add_const(&rint(2)), Rel::Le, false));
        assert_eq!(a.to_string(), "x >= 2");
        let b = atom(Atom::new(LinExpr::var(x()).sub(&LinExpr::var(y())), Rel::Lt, false));
        assert_eq!(b.to_string(), "x < y");
    }
}
