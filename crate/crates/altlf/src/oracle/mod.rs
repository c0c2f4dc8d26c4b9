//! Reference semantics, kept naive on purpose: direct evaluation of a
//! property on a finite trace, and a bounded search over continuations for
//! anticipatory verdicts. Only the expression evaluator is shared with the
//! production path.

mod bounded;

use crate::arith::{eval_atom, Valuation};
use crate::formula::{ConstraintAtom, Formula, Tag, VarRef};
use crate::trace::Trace;

use num_rational::BigRational;

pub use bounded::{rv_state_bounded, BoundedOracle, ValueGrid};

/// Values of the variables an atom reads at instant `i`; `None` marks a
/// reference past either end of the trace.
struct At<'a> {
    trace: &'a Trace,
    i: usize,
}

impl Valuation for At<'_> {
    fn value(&self, v: &VarRef) -> Option<BigRational> {
        let k = match v.tag {
            Tag::Plain(k) => self.i + k as usize,
            Tag::Cur => self.i,
            Tag::Pre => self.i.checked_sub(1)?,
            Tag::Initial => 0,
            Tag::Bound(_) => return None,
        };
        self.trace.get(k)?.get(&v.base).cloned()
    }
}

/// An atom that is not well-defined (it reads past the end) holds.
fn atom_holds(c: &ConstraintAtom, trace: &Trace, i: usize) -> bool {
    eval_atom(c, &At { trace, i }).unwrap_or(true)
}

/// Truth of `f` at every instant of `trace`.
pub fn holds_at(f: &Formula, trace: &Trace) -> Vec<bool> {
    let n = trace.len();
    match f {
        Formula::True => vec![true; n],
        Formula::False => vec![false; n],
        Formula::Atom(c) => (0..n).map(|i| atom_holds(c, trace, i)).collect(),
        Formula::NegAtom(c) => (0..n).map(|i| !atom_holds(c, trace, i)).collect(),
        Formula::Not(a) => holds_at(a, trace).into_iter().map(|b| !b).collect(),
        Formula::And(a, b) => holds_at(a, trace).into_iter().zip(holds_at(b, trace)).map(|(x, y)| x && y).collect(),
        Formula::Or(a, b) => holds_at(a, trace).into_iter().zip(holds_at(b, trace)).map(|(x, y)| x || y).collect(),
        Formula::Next(a) => {
            let s = holds_at(a, trace);
            (0..n).map(|i| i + 1 < n && s[i + 1]).collect()
        }
        Formula::WeakNext(a) => {
            let s = holds_at(a, trace);
            (0..n).map(|i| i + 1 == n || s[i + 1]).collect()
        }
        Formula::Until(a, b) => {
            let (sa, sb) = (holds_at(a, trace), holds_at(b, trace));
            let mut out = vec![false; n];
            for i in (0..n).rev() {
                out[i] = sb[i] || (sa[i] && i + 1 < n && out[i + 1]);
            }
            out
        }
        Formula::Globally(a) => {
            let s = holds_at(a, trace);
            let mut out = vec![true; n];
            for i in (0..n).rev() {
                out[i] = s[i] && (i + 1 == n || out[i + 1]);
            }
            out
        }
        Formula::Eventually(a) => {
            let s = holds_at(a, trace);
            let mut out = vec![false; n];
            for i in (0..n).rev() {
                out[i] = s[i] || (i + 1 < n && out[i + 1]);
            }
            out
        }
    }
}

/// `τ ⊨ f`. Works on surface formulas (primes) as well as on lookback
/// formulas over `pre`/`cur` copies.
pub fn satisfies(f: &Formula, trace: &Trace) -> bool {
    assert!(!trace.is_empty(), "traces are non-empty");
    holds_at(f, trace)[0]
}
