//! Exact linear arithmetic over ℚ and ℤ.
//!
//! Atoms are kept in a canonical `e REL 0` form ([`Atom`]); quantifier-free
//! formulas are DNFs of normalized conjunctions ([`Dnf`]). Satisfiability and
//! elimination use Fourier–Motzkin over ℚ and Cooper's method over ℤ.

mod classify;
mod int;
mod linear;
mod qf;
mod rat;

use std::collections::BTreeMap;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

use crate::formula::{CompOp, ConstraintAtom, Expression, Tag, VarRef};
use crate::trace::Assignment;

pub use classify::{classify_atoms, AtomClass, AtomClassKind};
pub(crate) use linear::Bound;
pub use linear::{Atom, LinExpr, Lit, Rel};
pub use qf::{is_sat_atoms, Conj, Dnf};

/// Variable lookup for evaluation.
pub trait Valuation {
    fn value(&self, v: &VarRef) -> Option<BigRational>;
}

impl Valuation for BTreeMap<VarRef, BigRational> {
    fn value(&self, v: &VarRef) -> Option<BigRational> {
        self.get(v).cloned()
    }
}

impl<F: Fn(&VarRef) -> Option<BigRational>> Valuation for F {
    fn value(&self, v: &VarRef) -> Option<BigRational> {
        self(v)
    }
}

/// Reads plain references without primes from one assignment.
pub struct Plain<'a>(pub &'a Assignment);

impl Valuation for Plain<'_> {
    fn value(&self, v: &VarRef) -> Option<BigRational> {
        match v.tag {
            Tag::Plain(0) => self.0.get(&v.base).cloned(),
            _ => None,
        }
    }
}

/// The paired assignment `⟨α, α′⟩` over `V_pre ∪ V_cur`.
pub struct Paired<'a> {
    pub pre: Option<&'a Assignment>,
    pub cur: &'a Assignment,
}

impl Valuation for Paired<'_> {
    fn value(&self, v: &VarRef) -> Option<BigRational> {
        match v.tag {
            Tag::Pre => self.pre?.get(&v.base).cloned(),
            Tag::Cur => self.cur.get(&v.base).cloned(),
            _ => None,
        }
    }
}

/// Reads one tag from one assignment, e.g. `V₀` from the last assignment.
pub struct Tagged<'a>(pub Tag, pub &'a Assignment);

impl Valuation for Tagged<'_> {
    fn value(&self, v: &VarRef) -> Option<BigRational> {
        if v.tag == self.0 {
            self.1.get(&v.base).cloned()
        } else {
            None
        }
    }
}

pub fn eval_expression(e: &Expression, val: &impl Valuation) -> Option<BigRational> {
    match e {
        Expression::Const(c) => Some(c.clone()),
        Expression::Var(v) => val.value(v),
        Expression::Add(a, b) => Some(eval_expression(a, val)? + eval_expression(b, val)?),
        Expression::Scale(k, e) => Some(k * eval_expression(e, val)?),
    }
}

/// `None` when a variable is missing from the valuation.
pub fn eval_atom(c: &ConstraintAtom, val: &impl Valuation) -> Option<bool> {
    let l = eval_expression(&c.lhs, val)?;
    let r = eval_expression(&c.rhs, val)?;
    let congruent = |n: u64| {
        let d = &l - &r;
        d.is_integer() && d.numer().mod_floor(&n.into()).is_zero()
    };
    Some(match c.op {
        CompOp::Eq => l == r,
        CompOp::Ne => l != r,
        CompOp::Lt => l < r,
        CompOp::Le => l <= r,
        CompOp::Cong(n) => congruent(n),
        CompOp::NCong(n) => !congruent(n),
    })
}
