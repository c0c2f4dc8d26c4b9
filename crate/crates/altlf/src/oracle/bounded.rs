//! Bounded continuation search by formula progression.
//!
//! A residual is the obligation left for the rest of the trace. Progressing
//! it through one assignment yields a formula whose leaves are `X`/`wX`
//! obligations for the next instant; reading that formula with `X ↦ false`
//! and `wX ↦ true` decides the prefix, stripping the wrappers gives the next
//! residual. Atoms with primes are evaluated late: the known values are
//! substituted and the rest waits one instant under `wX` (or `X` for a
//! negated atom, which is false where the atom is not well-defined).

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use num_integer::Integer;
use num_rational::BigRational;

use crate::arith::eval_atom;
use crate::formula::{to_nnf, CompOp, ConstraintAtom, Declarations, Expression, Formula, Sort, Tag, VarRef};
use crate::trace::{Assignment, Trace};
use crate::verdict::Verdict;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn constants_of(f: &Formula) -> BTreeSet<BigRational> {
    let mut out = BTreeSet::new();
    f.for_each_atom(&mut |c, _| {
        c.lhs.for_each_const(&mut |k| {
            out.insert(k.clone());
        });
        c.rhs.for_each_const(&mut |k| {
            out.insert(k.clone());
        });
    });
    out
}

fn moduli_of(f: &Formula) -> u64 {
    let mut l = 1u64;
    f.for_each_atom(&mut |c, _| {
        if let CompOp::Cong(n) | CompOp::NCong(n) = c.op {
            l = l.lcm(&n);
        }
    });
    l
}

fn rat_points(s: &BTreeSet<BigRational>) -> Vec<BigRational> {
    let sorted: Vec<&BigRational> = s.iter().collect();
    let mut out: Vec<BigRational> = sorted.iter().map(|v| (*v).clone()).collect();
    for w in sorted.windows(2) {
        out.push((w[0] + w[1]) / rat(2));
    }
    match (sorted.first(), sorted.last()) {
        (Some(lo), Some(hi)) => {
            out.push(*lo - rat(1));
            out.push(*hi + rat(1));
        }
        _ => out.push(rat(0)),
    }
    out.sort();
    out.dedup();
    out
}

fn int_points(s: &BTreeSet<BigRational>, modulus: u64) -> Vec<BigRational> {
    let mut out = BTreeSet::new();
    let ints: Vec<BigRational> = s.iter().map(|v| v.floor()).chain(s.iter().map(|v| v.ceil())).collect();
    let base = if ints.is_empty() { vec![rat(0)] } else { ints };
    for v in &base {
        for d in -1..=modulus as i64 {
            out.insert(v + rat(d));
        }
    }
    out.into_iter().collect()
}

/// Candidate values per variable for continuation search.
#[derive(Clone, Debug)]
pub struct ValueGrid {
    pub values: BTreeMap<Arc<str>, Vec<BigRational>>,
    /// Recompute candidates at every step from the constants of the property
    /// and the values the residual still refers to, choosing variables one
    /// after another so they can also be ordered among themselves.
    pub adaptive: bool,
}

impl ValueGrid {
    /// Constants, midpoints between them and one point beyond each end for
    /// `rat`; constants, their neighbours and a full residue system for `int`.
    pub fn for_formula(f: &Formula, decls: &Declarations) -> ValueGrid {
        let k = constants_of(f);
        let modulus = moduli_of(f);
        let values = decls
            .iter()
            .map(|(name, sort)| {
                let vals = match sort {
                    Sort::Rat => rat_points(&k),
                    Sort::Int => int_points(&k, modulus),
                };
                (name.clone(), vals)
            })
            .collect();
        ValueGrid { values, adaptive: false }
    }

    pub fn adaptive(f: &Formula, decls: &Declarations) -> ValueGrid {
        ValueGrid { adaptive: true, ..ValueGrid::for_formula(f, decls) }
    }

    /// The same values for every declared variable.
    pub fn uniform(decls: &Declarations, values: &[BigRational]) -> ValueGrid {
        let values = decls.names().map(|n| (n.clone(), values.to_vec())).collect();
        ValueGrid { values, adaptive: false }
    }
}

fn junction(is_and: bool, items: Vec<Formula>) -> Formula {
    let (unit, zero) = if is_and { (Formula::True, Formula::False) } else { (Formula::False, Formula::True) };
    let mut flat = Vec::new();
    let mut stack = items;
    while let Some(f) = stack.pop() {
        match f {
            Formula::And(a, b) if is_and => {
                stack.push(*a);
                stack.push(*b);
            }
            Formula::Or(a, b) if !is_and => {
                stack.push(*a);
                stack.push(*b);
            }
            f if f == unit => {}
            f if f == zero => return zero,
            f => flat.push(f),
        }
    }
    flat.sort();
    flat.dedup();
    let mut it = flat.into_iter().rev();
    match it.next() {
        None => unit,
        Some(last) => it.fold(last, |acc, f| if is_and { Formula::and(f, acc) } else { Formula::or(f, acc) }),
    }
}

fn and2(a: Formula, b: Formula) -> Formula {
    junction(true, vec![a, b])
}

fn or2(a: Formula, b: Formula) -> Formula {
    junction(false, vec![a, b])
}

fn partial(c: &ConstraintAtom, a: &Assignment, pos: bool) -> Formula {
    let mut open = false;
    let low = c.map_vars(&mut |v| match v.tag {
        Tag::Plain(0) => Expression::Const(a[&v.base].clone()),
        Tag::Plain(k) => {
            open = true;
            Expression::Var(VarRef::plain(v.base.clone(), k - 1))
        }
        _ => panic!("progression expects surface formulas"),
    });
    if open {
        if pos {
            Formula::weak_next(Formula::Atom(low))
        } else {
            Formula::next(Formula::NegAtom(low))
        }
    } else {
        let none = |_: &VarRef| None;
        let b = eval_atom(&low, &none).expect("ground atom");
        if b == pos {
            Formula::True
        } else {
            Formula::False
        }
    }
}

/// One progression step of an NNF residual.
fn progress(f: &Formula, a: &Assignment) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(c) => partial(c, a, true),
        Formula::NegAtom(c) => partial(c, a, false),
        Formula::Not(_) => panic!("progression expects NNF"),
        Formula::And(x, y) => and2(progress(x, a), progress(y, a)),
        Formula::Or(x, y) => or2(progress(x, a), progress(y, a)),
        Formula::Next(_) | Formula::WeakNext(_) => f.clone(),
        Formula::Until(x, y) => or2(progress(y, a), and2(progress(x, a), Formula::next(f.clone()))),
        Formula::Globally(x) => and2(progress(x, a), Formula::weak_next(f.clone())),
        Formula::Eventually(x) => or2(progress(x, a), Formula::next(f.clone())),
    }
}

fn at_end(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::WeakNext(_) => true,
        Formula::False | Formula::Next(_) => false,
        Formula::And(a, b) => at_end(a) && at_end(b),
        Formula::Or(a, b) => at_end(a) || at_end(b),
        _ => unreachable!("progressed formulas are boolean over next obligations"),
    }
}

fn advance(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Next(a) | Formula::WeakNext(a) => (**a).clone(),
        Formula::And(a, b) => and2(advance(a), advance(b)),
        Formula::Or(a, b) => or2(advance(a), advance(b)),
        _ => unreachable!("progressed formulas are boolean over next obligations"),
    }
}

fn map_consts(e: &Expression, m: &impl Fn(&BigRational) -> BigRational) -> Expression {
    match e {
        Expression::Const(c) => Expression::Const(m(c)),
        Expression::Var(v) => Expression::Var(v.clone()),
        Expression::Add(a, b) => Expression::add(map_consts(a, m), map_consts(b, m)),
        Expression::Scale(k, a) => Expression::scale(k.clone(), map_consts(a, m)),
    }
}

/// A side of a comparison that is a variable or a constant.
fn is_simple(e: &Expression) -> bool {
    match e {
        Expression::Const(_) | Expression::Var(_) => true,
        Expression::Scale(_, a) => matches!(**a, Expression::Const(_)),
        Expression::Add(a, b) => matches!((&**a, &**b), (Expression::Const(_), Expression::Const(_))),
    }
}

/// Rational comparisons of variables and constants only: then truth is
/// invariant under order-preserving maps fixing the constants.
fn order_invariant(f: &Formula, decls: &Declarations) -> bool {
    let mut ok = decls.iter().all(|(_, s)| s == Sort::Rat);
    f.for_each_atom(&mut |c, _| {
        ok &=
            matches!(c.op, CompOp::Eq | CompOp::Ne | CompOp::Lt | CompOp::Le) && is_simple(&c.lhs) && is_simple(&c.rhs);
    });
    ok
}

/// Bounded search over continuations of length `1..=depth`.
///
/// With an adaptive grid on a property that only compares rational variables
/// and constants, the candidates realise every order type at each step and
/// the search is treated as complete up to its depth; otherwise it only
/// refutes permanence.
pub struct BoundedOracle {
    formula: Formula,
    vars: Vec<(Arc<str>, Sort)>,
    constants: BTreeSet<BigRational>,
    modulus: u64,
    grid: ValueGrid,
    complete: bool,
    depth: usize,
    memo: RefCell<HashMap<(Formula, usize), (bool, bool)>>,
}

impl BoundedOracle {
    pub fn new(f: &Formula, decls: &Declarations, grid: ValueGrid, depth: usize) -> BoundedOracle {
        assert!(depth >= 1);
        let formula = to_nnf(f);
        let complete = grid.adaptive && order_invariant(&formula, decls);
        BoundedOracle {
            constants: constants_of(&formula),
            modulus: moduli_of(&formula),
            formula,
            vars: decls.iter().map(|(n, s)| (n.clone(), s)).collect(),
            grid,
            complete,
            depth,
            memo: RefCell::new(HashMap::new()),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    /// The residual before the first instant.
    pub fn initial(&self) -> Formula {
        self.formula.clone()
    }

    pub fn progress(&self, residual: &Formula, a: &Assignment) -> Formula {
        progress(residual, a)
    }

    /// Whether the prefix ending in the progressed formula satisfies the property.
    pub fn satisfied(&self, progressed: &Formula) -> bool {
        at_end(progressed)
    }

    /// The obligation left for the rest of the trace.
    pub fn residual(&self, progressed: &Formula) -> Formula {
        advance(progressed)
    }

    fn search_residual(&self, progressed: &Formula) -> Formula {
        self.canonical(advance(progressed))
    }

    /// Verdict of the prefix ending in `progressed`; `None` when no
    /// continuation flips the outcome but the search is not complete.
    pub fn verdict(&self, progressed: &Formula) -> Option<Verdict> {
        let sat = at_end(progressed);
        let (can_sat, can_unsat) = self.outcomes(&self.search_residual(progressed), self.depth);
        let flip = if sat { can_unsat } else { can_sat };
        if flip || self.complete {
            Some(Verdict::from_parts(sat, flip))
        } else {
            None
        }
    }

    pub fn verdicts(&self, trace: &Trace) -> Vec<Option<Verdict>> {
        let mut rho = self.initial();
        let mut out = Vec::with_capacity(trace.len());
        for a in trace {
            let p = progress(&rho, a);
            out.push(self.verdict(&p));
            rho = self.residual(&p);
        }
        out
    }

    /// Renames the trace values a residual refers to onto canonical points
    /// with the same order type relative to the property's constants.
    fn canonical(&self, f: Formula) -> Formula {
        if !self.complete {
            return f;
        }
        let extra: BTreeSet<BigRational> = constants_of(&f).difference(&self.constants).cloned().collect();
        if extra.is_empty() {
            return f;
        }
        let ks: Vec<&BigRational> = self.constants.iter().collect();
        let mut buckets: BTreeMap<usize, Vec<&BigRational>> = BTreeMap::new();
        for v in &extra {
            buckets.entry(ks.partition_point(|k| *k < v)).or_default().push(v);
        }
        let mut rename = HashMap::new();
        for (slot, vals) in buckets {
            let m = vals.len() as i64;
            for (j, v) in vals.into_iter().enumerate() {
                let j = j as i64 + 1;
                let target = match (slot.checked_sub(1).map(|s| ks[s]), ks.get(slot).copied()) {
                    (Some(lo), Some(hi)) => lo + (hi - lo) * BigRational::new(j.into(), (m + 1).into()),
                    (Some(lo), None) => lo + rat(j),
                    (None, Some(hi)) => hi - rat(m + 1 - j),
                    (None, None) => rat(j),
                };
                rename.insert(v.clone(), target);
            }
        }
        let m = |c: &BigRational| rename.get(c).cloned().unwrap_or_else(|| c.clone());
        f.map_atoms(&mut |c, pos| {
            let c = ConstraintAtom::new(map_consts(&c.lhs, &m), c.op.clone(), map_consts(&c.rhs, &m));
            if pos {
                Formula::Atom(c)
            } else {
                Formula::NegAtom(c)
            }
        })
    }

    fn candidates(&self, residual: &Formula) -> Vec<Assignment> {
        let mut out = vec![Assignment::new()];
        if !self.grid.adaptive {
            for (name, _) in &self.vars {
                let vals = &self.grid.values[name];
                out = out
                    .into_iter()
                    .flat_map(|a| {
                        vals.iter().map(move |v| {
                            let mut b = a.clone();
                            b.insert(name.clone(), v.clone());
                            b
                        })
                    })
                    .collect();
            }
            return out;
        }
        let base: BTreeSet<BigRational> = self.constants.union(&constants_of(residual)).cloned().collect();
        for (name, sort) in &self.vars {
            let mut next = Vec::new();
            for a in out {
                let mut s = base.clone();
                s.extend(a.values().cloned());
                let vals = match sort {
                    Sort::Rat => rat_points(&s),
                    Sort::Int => int_points(&s, self.modulus),
                };
                for v in vals {
                    let mut b = a.clone();
                    b.insert(name.clone(), v);
                    next.push(b);
                }
            }
            out = next;
        }
        out
    }

    /// Whether some continuation of length `1..=depth` from `residual`
    /// satisfies, respectively violates, the property.
    fn outcomes(&self, residual: &Formula, depth: usize) -> (bool, bool) {
        match residual {
            Formula::True => return (true, false),
            Formula::False => return (false, true),
            _ => {}
        }
        let key = (residual.clone(), depth);
        if let Some(r) = self.memo.borrow().get(&key) {
            return *r;
        }
        let (mut can_sat, mut can_unsat) = (false, false);
        for a in self.candidates(residual) {
            let p = progress(residual, &a);
            if at_end(&p) {
                can_sat = true;
            } else {
                can_unsat = true;
            }
            if can_sat && can_unsat {
                break;
            }
            if depth > 1 {
                let (s, u) = self.outcomes(&self.search_residual(&p), depth - 1);
                can_sat |= s;
                can_unsat |= u;
                if can_sat && can_unsat {
                    break;
                }
            }
        }
        self.memo.borrow_mut().insert(key, (can_sat, can_unsat));
        (can_sat, can_unsat)
    }
}

/// Verdict of the whole trace by bounded search; `None` when undetermined.
pub fn rv_state_bounded(
    f: &Formula,
    decls: &Declarations,
    trace: &Trace,
    grid: ValueGrid,
    depth: usize,
) -> Option<Verdict> {
    BoundedOracle::new(f, decls, grid, depth).verdicts(trace).pop().flatten()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_property;
    use crate::oracle::satisfies;
    use num_traits::Zero;

    fn tr(xs: &[i64]) -> Trace {
        xs.iter()
            .map(|&v| {
                let mut a = Assignment::new();
                a.insert(Arc::from("x"), rat(v));
                a
            })
            .collect()
    }

    fn check(src: &str, sort: Sort, trace: &[i64]) -> Option<Verdict> {
        let d = Declarations::from_pairs([("x", sort)]);
        let f = parse_property(src, &d).unwrap();
        rv_state_bounded(&f, &d, &tr(trace), ValueGrid::adaptive(&f, &d), 4)
    }

    #[test]
    fn trivial_properties() {
        assert_eq!(check("x = x", Sort::Rat, &[3]), Some(Verdict::PS));
        assert_eq!(check("x != x", Sort::Rat, &[3, 1]), Some(Verdict::PV));
    }

    #[test]
    fn lookahead_example() {
        let f = "G(x' >= x) && F(x = 2)";
        assert_eq!(check(f, Sort::Rat, &[0]), Some(Verdict::CV));
        assert_eq!(check(f, Sort::Rat, &[0, 1]), Some(Verdict::CV));
        assert_eq!(check(f, Sort::Rat, &[0, 1, 3]), Some(Verdict::PV));
        assert_eq!(check(f, Sort::Rat, &[0, 1, 2]), Some(Verdict::CS));
    }

    #[test]
    fn integer_search_only_refutes() {
        // over ℤ, G(x' > x) can always be violated but never made permanent
        assert_eq!(check("G(x' > x)", Sort::Int, &[3]), Some(Verdict::CS));
        assert_eq!(check("F(x = 2) && G(x' > x)", Sort::Int, &[3]), None);
    }

    #[test]
    fn progression_agrees_with_direct_evaluation() {
        let d = Declarations::from_pairs([("x", Sort::Int)]);
        let srcs = ["G(x'' > x)", "(x < 3) U (x = 3)", "X(x' = 1) || wX(!(x = 0))", "F(!(x' = x))"];
        let values = [0, 1, 3];
        for src in srcs {
            let f = parse_property(src, &d).unwrap();
            let o = BoundedOracle::new(&f, &d, ValueGrid::for_formula(&f, &d), 1);
            for n in 1..=4u32 {
                for code in 0..3usize.pow(n) {
                    let xs: Vec<i64> = (0..n).map(|i| values[code / 3usize.pow(i) % 3]).collect();
                    let t = tr(&xs);
                    let mut rho = o.initial();
                    for (i, a) in t.iter().enumerate() {
                        let p = o.progress(&rho, a);
                        assert_eq!(o.satisfied(&p), satisfies(&f, &t[..=i].to_vec()), "{src} on {xs:?}");
                        rho = o.residual(&p);
                    }
                }
            }
        }
    }

    #[test]
    fn trace_residuals_keep_trace_values() {
        // the search renames values canonically; the trace must not see that
        let d = Declarations::from_pairs([("x", Sort::Rat)]);
        let f = parse_property("(x' < x) || G(x = 0)", &d).unwrap();
        let o = BoundedOracle::new(&f, &d, ValueGrid::adaptive(&f, &d), 2);
        assert!(o.is_complete());
        let t = tr(&[3, 2]);
        assert_eq!(o.verdicts(&t), vec![Some(Verdict::CS), Some(Verdict::PS)]);
        assert!(satisfies(&f, &t));
        let t = tr(&[3, 3, 3]);
        assert_eq!(o.verdicts(&t), vec![Some(Verdict::CS), Some(Verdict::PV), Some(Verdict::PV)]);
    }

    #[test]
    fn grids_contain_constants() {
        let d = Declarations::from_pairs([("x", Sort::Rat), ("n", Sort::Int)]);
        let f = parse_property("F(x = 2) && G(n =_3 1)", &d).unwrap();
        let g = ValueGrid::for_formula(&f, &d);
        let xs = &g.values["x"];
        assert!(xs.contains(&rat(2)) && xs.contains(&BigRational::new(3.into(), 2.into())));
        let ns = &g.values["n"];
        assert!(ns.contains(&rat(1)) && ns.iter().all(|v| v.is_integer()));
        assert!(ns.iter().any(|v| v.numer().mod_floor(&3.into()).is_zero()));
    }
}
