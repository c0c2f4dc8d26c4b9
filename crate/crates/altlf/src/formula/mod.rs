//! Property syntax: sorts, variable references, expressions, atoms and
//! temporal formulas, plus the normalizing transformations used by the
//! compilation pipeline.

mod parse;
mod print;
mod transform;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

pub use parse::{parse_property, parse_property_file, ParsedProperty};
pub use print::fmt_rational;
pub use transform::{
    extend_trace, lower_lookahead, lower_lookahead_online, max_lookahead, neg_atom, to_lookback, to_nnf, LookaheadMap,
    RegisterMap,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Int,
    Rat,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => write!(f, "int"),
            Sort::Rat => write!(f, "rat"),
        }
    }
}

/// Declared state variables in declaration order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Declarations {
    order: Vec<(Arc<str>, Sort)>,
    index: BTreeMap<Arc<str>, usize>,
}

impl Declarations {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, Sort)>) -> Self {
        let mut d = Self::new();
        for (name, sort) in pairs {
            d.declare(name, sort);
        }
        d
    }

    /// Returns false if the name was already declared.
    pub fn declare(&mut self, name: &str, sort: Sort) -> bool {
        if self.index.contains_key(name) {
            return false;
        }
        let name: Arc<str> = Arc::from(name);
        self.index.insert(name.clone(), self.order.len());
        self.order.push((name, sort));
        true
    }

    pub fn sort_of(&self, name: &str) -> Option<Sort> {
        self.index.get(name).map(|&i| self.order[i].1)
    }

    pub fn name(&self, name: &str) -> Option<Arc<str>> {
        self.index.get(name).map(|&i| self.order[i].0.clone())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Arc<str>, Sort)> + '_ {
        self.order.iter().map(|(n, s)| (n, *s))
    }

    pub fn names(&self) -> impl Iterator<Item = &Arc<str>> + '_ {
        self.order.iter().map(|(n, _)| n)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Which copy of a variable a reference denotes.
///
/// `Plain(k)` is the surface form with `k` primes. `Pre` and `Cur` appear
/// after the lookback transformation, `Initial` is the copy that pins the
/// first assignment of a history constraint, and `Bound` is only used
/// transiently while eliminating quantifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Initial,
    Pre,
    Cur,
    Plain(u32),
    Bound(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarRef {
    pub base: Arc<str>,
    pub tag: Tag,
}

impl VarRef {
    pub fn new(base: impl Into<Arc<str>>, tag: Tag) -> Self {
        VarRef { base: base.into(), tag }
    }

    pub fn plain(base: impl Into<Arc<str>>, lookahead: u32) -> Self {
        Self::new(base, Tag::Plain(lookahead))
    }

    pub fn cur(base: impl Into<Arc<str>>) -> Self {
        Self::new(base, Tag::Cur)
    }

    pub fn pre(base: impl Into<Arc<str>>) -> Self {
        Self::new(base, Tag::Pre)
    }

    pub fn initial(base: impl Into<Arc<str>>) -> Self {
        Self::new(base, Tag::Initial)
    }

    pub fn lookahead(&self) -> u32 {
        match self.tag {
            Tag::Plain(k) => k,
            _ => 0,
        }
    }

    pub fn with_tag(&self, tag: Tag) -> Self {
        VarRef { base: self.base.clone(), tag }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expression {
    Const(BigRational),
    Var(VarRef),
    Add(Box<Expression>, Box<Expression>),
    Scale(BigRational, Box<Expression>),
}

impl Expression {
    pub fn int(v: i64) -> Self {
        Expression::Const(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn var(v: VarRef) -> Self {
        Expression::Var(v)
    }

    pub fn add(a: Expression, b: Expression) -> Self {
        Expression::Add(Box::new(a), Box::new(b))
    }

    pub fn scale(k: BigRational, e: Expression) -> Self {
        Expression::Scale(k, Box::new(e))
    }

    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a VarRef)) {
        match self {
            Expression::Const(_) => {}
            Expression::Var(v) => f(v),
            Expression::Add(a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
            Expression::Scale(_, e) => e.for_each_var(f),
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&VarRef) -> Expression) -> Expression {
        match self {
            Expression::Const(c) => Expression::Const(c.clone()),
            Expression::Var(v) => f(v),
            Expression::Add(a, b) => Expression::add(a.map_vars(f), b.map_vars(f)),
            Expression::Scale(k, e) => Expression::scale(k.clone(), e.map_vars(f)),
        }
    }

    pub fn for_each_const<'a>(&'a self, f: &mut impl FnMut(&'a BigRational)) {
        match self {
            Expression::Const(c) => f(c),
            Expression::Var(_) => {}
            Expression::Add(a, b) => {
                a.for_each_const(f);
                b.for_each_const(f);
            }
            Expression::Scale(_, e) => e.for_each_const(f),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CompOp {
    Eq,
    Ne,
    Lt,
    Le,
    Cong(u64),
    NCong(u64),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintAtom {
    pub lhs: Expression,
    pub op: CompOp,
    pub rhs: Expression,
}

impl ConstraintAtom {
    pub fn new(lhs: Expression, op: CompOp, rhs: Expression) -> Self {
        ConstraintAtom { lhs, op, rhs }
    }

    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a VarRef)) {
        self.lhs.for_each_var(f);
        self.rhs.for_each_var(f);
    }

    pub fn vars(&self) -> Vec<VarRef> {
        let mut out = Vec::new();
        self.for_each_var(&mut |v| out.push(v.clone()));
        out.sort();
        out.dedup();
        out
    }

    pub fn lookahead(&self) -> u32 {
        let mut m = 0;
        self.for_each_var(&mut |v| m = m.max(v.lookahead()));
        m
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&VarRef) -> Expression) -> Self {
        ConstraintAtom { lhs: self.lhs.map_vars(f), op: self.op.clone(), rhs: self.rhs.map_vars(f) }
    }

    pub fn retag(&self, f: &mut impl FnMut(&VarRef) -> VarRef) -> Self {
        self.map_vars(&mut |v| Expression::Var(f(v)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(ConstraintAtom),
    NegAtom(ConstraintAtom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// Strong next.
    Next(Box<Formula>),
    WeakNext(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Globally(Box<Formula>),
    Eventually(Box<Formula>),
}

impl Formula {
    pub fn atom(c: ConstraintAtom) -> Self {
        Formula::Atom(c)
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::or(Formula::not(a), b)
    }

    pub fn next(f: Formula) -> Self {
        Formula::Next(Box::new(f))
    }

    pub fn weak_next(f: Formula) -> Self {
        Formula::WeakNext(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Self {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn globally(f: Formula) -> Self {
        Formula::Globally(Box::new(f))
    }

    pub fn eventually(f: Formula) -> Self {
        Formula::Eventually(Box::new(f))
    }

    /// Conjunction of a list; `True` when empty.
    pub fn all(items: impl IntoIterator<Item = Formula>) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::True,
            Some(first) => it.fold(first, Formula::and),
        }
    }

    pub fn for_each_atom<'a>(&'a self, f: &mut impl FnMut(&'a ConstraintAtom, bool)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(c) => f(c, true),
            Formula::NegAtom(c) => f(c, false),
            Formula::Not(a)
            | Formula::Next(a)
            | Formula::WeakNext(a)
            | Formula::Globally(a)
            | Formula::Eventually(a) => a.for_each_atom(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(a, b) => {
                a.for_each_atom(f);
                b.for_each_atom(f);
            }
        }
    }

    pub fn atoms(&self) -> Vec<ConstraintAtom> {
        let mut out = Vec::new();
        self.for_each_atom(&mut |c, _| out.push(c.clone()));
        out
    }

    pub fn map_atoms(&self, f: &mut impl FnMut(&ConstraintAtom, bool) -> Formula) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Atom(c) => f(c, true),
            Formula::NegAtom(c) => f(c, false),
            Formula::Not(a) => Formula::not(a.map_atoms(f)),
            Formula::And(a, b) => Formula::and(a.map_atoms(f), b.map_atoms(f)),
            Formula::Or(a, b) => Formula::or(a.map_atoms(f), b.map_atoms(f)),
            Formula::Next(a) => Formula::next(a.map_atoms(f)),
            Formula::WeakNext(a) => Formula::weak_next(a.map_atoms(f)),
            Formula::Until(a, b) => Formula::until(a.map_atoms(f), b.map_atoms(f)),
            Formula::Globally(a) => Formula::globally(a.map_atoms(f)),
            Formula::Eventually(a) => Formula::eventually(a.map_atoms(f)),
        }
    }

    /// Nesting depth of temporal operators.
    pub fn temporal_depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) | Formula::NegAtom(_) => 0,
            Formula::Not(a) => a.temporal_depth(),
            Formula::And(a, b) | Formula::Or(a, b) => a.temporal_depth().max(b.temporal_depth()),
            Formula::Next(a) | Formula::WeakNext(a) | Formula::Globally(a) | Formula::Eventually(a) => {
                1 + a.temporal_depth()
            }
            Formula::Until(a, b) => 1 + a.temporal_depth().max(b.temporal_depth()),
        }
    }

    pub fn is_nnf(&self) -> bool {
        match self {
            Formula::Not(_) => false,
            Formula::True | Formula::False | Formula::Atom(_) | Formula::NegAtom(_) => true,
            Formula::Next(a) | Formula::WeakNext(a) | Formula::Globally(a) | Formula::Eventually(a) => a.is_nnf(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(a, b) => a.is_nnf() && b.is_nnf(),
        }
    }
}
