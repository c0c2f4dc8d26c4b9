use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;

use super::parse::negate;
use super::{CompOp, ConstraintAtom, Declarations, Expression, Formula, Tag, VarRef};
use crate::trace::{Assignment, Trace};

/// Pushes negations down to atoms.
///
/// `¬(a U b)` has no dual operator in the syntax and is rewritten as
/// `(¬b U (¬a ∧ ¬b)) ∨ G ¬b`.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, true)
}

fn nnf(f: &Formula, pos: bool) -> Formula {
    match (f, pos) {
        (Formula::True, true) | (Formula::False, false) => Formula::True,
        (Formula::True, false) | (Formula::False, true) => Formula::False,
        (Formula::Atom(c), true) | (Formula::NegAtom(c), false) => Formula::Atom(c.clone()),
        (Formula::Atom(c), false) | (Formula::NegAtom(c), true) => Formula::NegAtom(c.clone()),
        (Formula::Not(a), _) => nnf(a, !pos),
        (Formula::And(a, b), true) => Formula::and(nnf(a, true), nnf(b, true)),
        (Formula::And(a, b), false) => Formula::or(nnf(a, false), nnf(b, false)),
        (Formula::Or(a, b), true) => Formula::or(nnf(a, true), nnf(b, true)),
        (Formula::Or(a, b), false) => Formula::and(nnf(a, false), nnf(b, false)),
        (Formula::Next(a), true) => Formula::next(nnf(a, true)),
        (Formula::Next(a), false) => Formula::weak_next(nnf(a, false)),
        (Formula::WeakNext(a), true) => Formula::weak_next(nnf(a, true)),
        (Formula::WeakNext(a), false) => Formula::next(nnf(a, false)),
        (Formula::Globally(a), true) => Formula::globally(nnf(a, true)),
        (Formula::Globally(a), false) => Formula::eventually(nnf(a, false)),
        (Formula::Eventually(a), true) => Formula::eventually(nnf(a, true)),
        (Formula::Eventually(a), false) => Formula::globally(nnf(a, false)),
        (Formula::Until(a, b), true) => Formula::until(nnf(a, true), nnf(b, true)),
        (Formula::Until(a, b), false) => {
            let nb = nnf(b, false);
            Formula::or(Formula::until(nb.clone(), Formula::and(nnf(a, false), nb.clone())), Formula::globally(nb))
        }
    }
}

/// Flips the comparison: `neg(t₁<t₂) = t₂≤t₁`, `=` against `≠`, `≡ₙ` against `≢ₙ`.
pub fn neg_atom(c: &ConstraintAtom) -> ConstraintAtom {
    let (l, r) = (c.lhs.clone(), c.rhs.clone());
    match c.op {
        CompOp::Eq => ConstraintAtom::new(l, CompOp::Ne, r),
        CompOp::Ne => ConstraintAtom::new(l, CompOp::Eq, r),
        CompOp::Lt => ConstraintAtom::new(r, CompOp::Le, l),
        CompOp::Le => ConstraintAtom::new(r, CompOp::Lt, l),
        CompOp::Cong(n) => ConstraintAtom::new(l, CompOp::NCong(n), r),
        CompOp::NCong(n) => ConstraintAtom::new(l, CompOp::Cong(n), r),
    }
}

pub fn max_lookahead(f: &Formula) -> u32 {
    let mut m = 0;
    f.for_each_atom(&mut |c, _| m = m.max(c.lookahead()));
    m
}

fn weak_next_n(f: Formula, n: u32) -> Formula {
    (0..n).fold(f, |acc, _| Formula::weak_next(acc))
}

fn next_n(f: Formula, n: u32) -> Formula {
    (0..n).fold(f, |acc, _| Formula::next(acc))
}

fn var(base: &Arc<str>, k: u32) -> Expression {
    Expression::Var(VarRef::plain(base.clone(), k))
}

/// Book-keeping variables introduced by [`lower_lookahead`]: `(fresh, base, j)`
/// where the fresh variable holds the value of `base` at offset `j`.
#[derive(Clone, Debug, Default)]
pub struct LookaheadMap {
    pub entries: Vec<(Arc<str>, Arc<str>, u32)>,
    /// Original declarations extended with the fresh variables.
    pub decls: Declarations,
}

impl LookaheadMap {
    /// The canonical extension: `x_{v,j}` at instant `i` is `v` at `i + j`,
    /// and 0 beyond the end of the trace.
    pub fn extend(&self, trace: &Trace) -> Trace {
        let n = trace.len();
        (0..n)
            .map(|i| {
                let mut a = trace[i].clone();
                for (fresh, base, j) in &self.entries {
                    let k = i + *j as usize;
                    let v = if k < n { trace[k][base].clone() } else { BigRational::zero() };
                    a.insert(fresh.clone(), v);
                }
                a
            })
            .collect()
    }
}

pub fn extend_trace(trace: &Trace, map: &LookaheadMap) -> Trace {
    map.extend(trace)
}

/// Lowers lookahead to at most 1 with future book-keeping variables.
///
/// An atom `c` of lookahead `j+1` becomes
/// `(c[v^{j+1} ↦ x_{v,j}′] ∧ ⋀ X_w(x_{v,j} = v^j)) ∨ X_w^{j+1} ⊥`; the last
/// disjunct keeps the weak reading of `c` near the end of the trace, where the
/// book-keeping values are padding.
pub fn lower_lookahead(f: &Formula, decls: &Declarations) -> (Formula, LookaheadMap) {
    let mut map = LookaheadMap { entries: Vec::new(), decls: decls.clone() };
    let m = max_lookahead(f);
    let mut cur = f.clone();
    for j in (1..m).rev() {
        cur = cur.map_atoms(&mut |c, pos| {
            if c.lookahead() != j + 1 {
                return if pos { Formula::Atom(c.clone()) } else { Formula::NegAtom(c.clone()) };
            }
            let mut shifted = Vec::new();
            let low = c.map_vars(&mut |v| {
                if v.lookahead() == j + 1 {
                    let fresh = fresh_future(&mut map, &v.base, j);
                    if !shifted.contains(&v.base) {
                        shifted.push(v.base.clone());
                    }
                    var(&fresh, 1)
                } else {
                    Expression::Var(v.clone())
                }
            });
            let mut parts = vec![Formula::Atom(low)];
            for base in &shifted {
                let fresh = fresh_future(&mut map, base, j);
                let eq = ConstraintAtom::new(var(&fresh, 0), CompOp::Eq, var(base, j));
                parts.push(Formula::weak_next(Formula::Atom(eq)));
            }
            let l = Formula::or(Formula::all(parts), weak_next_n(Formula::False, j + 1));
            if pos {
                l
            } else {
                negate(l)
            }
        });
    }
    (cur, map)
}

fn fresh_future(map: &mut LookaheadMap, base: &Arc<str>, j: u32) -> Arc<str> {
    let name = format!("__la_{base}_{j}");
    if let Some((n, _, _)) = map.entries.iter().find(|(n, _, _)| **n == *name) {
        return n.clone();
    }
    let sort = map.decls.sort_of(base).expect("declared base variable");
    map.decls.declare(&name, sort);
    let n = map.decls.name(&name).unwrap();
    map.entries.push((n.clone(), base.clone(), j));
    n
}

/// Registers introduced by [`lower_lookahead_online`]: `(register, base, lag)`
/// where the register holds the value of `base` `lag` instants ago.
#[derive(Clone, Debug, Default)]
pub struct RegisterMap {
    pub entries: Vec<(Arc<str>, Arc<str>, u32)>,
    pub decls: Declarations,
}

impl RegisterMap {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Register values at one instant given the previous extended assignment
    /// (or `None` at the first instant, where registers start at 0).
    pub fn extend_step(&self, prev: Option<&Assignment>, cur: &Assignment) -> Assignment {
        let mut a = cur.clone();
        for (reg, base, lag) in &self.entries {
            let v = match prev {
                None => BigRational::zero(),
                Some(p) if *lag == 1 => p[base].clone(),
                Some(p) => p[&self.register(base, lag - 1)].clone(),
            };
            a.insert(reg.clone(), v);
        }
        a
    }

    pub fn extend(&self, trace: &Trace) -> Trace {
        let mut out: Trace = Vec::with_capacity(trace.len());
        for a in trace {
            let next = self.extend_step(out.last(), a);
            out.push(next);
        }
        out
    }

    fn register(&self, base: &Arc<str>, lag: u32) -> Arc<str> {
        self.entries
            .iter()
            .find(|(_, b, l)| b == base && *l == lag)
            .map(|(r, _, _)| r.clone())
            .expect("register chain is complete")
    }

    /// Shift constraints `r_{v,1}_cur = v_pre` and `r_{v,l}_cur = r_{v,l-1}_pre`.
    pub fn frame_atoms(&self) -> Vec<ConstraintAtom> {
        self.entries
            .iter()
            .map(|(reg, base, lag)| {
                let src = if *lag == 1 { base.clone() } else { self.register(base, lag - 1) };
                ConstraintAtom::new(
                    Expression::Var(VarRef::cur(reg.clone())),
                    CompOp::Eq,
                    Expression::Var(VarRef::pre(src)),
                )
            })
            .collect()
    }
}

/// Lowers lookahead to at most 1 with registers holding past values, so the
/// extended trace of a prefix is a prefix of the extended trace. Expects NNF.
///
/// An atom of lookahead `m ≥ 2` is evaluated `m-1` instants late:
/// `c ↦ X_w^{m-1} c_low` and `¬c ↦ X_s^{m-1} ¬c_low`, where `c_low` reads
/// `v^m` as `v′`, `v^{m-1}` as `v` and `v^k` as the register of lag `m-1-k`.
pub fn lower_lookahead_online(f: &Formula, decls: &Declarations) -> (Formula, RegisterMap) {
    let mut regs = RegisterMap { entries: Vec::new(), decls: decls.clone() };
    let out = f.map_atoms(&mut |c, pos| {
        let m = c.lookahead();
        if m <= 1 {
            return if pos { Formula::Atom(c.clone()) } else { Formula::NegAtom(c.clone()) };
        }
        let low = c.map_vars(&mut |v| {
            let k = v.lookahead();
            if k == m {
                var(&v.base, 1)
            } else if k + 1 == m {
                var(&v.base, 0)
            } else {
                let lag = m - 1 - k;
                for l in 1..=lag {
                    fresh_register(&mut regs, &v.base, l);
                }
                var(&fresh_register(&mut regs, &v.base, lag), 0)
            }
        });
        if pos {
            weak_next_n(Formula::Atom(low), m - 1)
        } else {
            next_n(Formula::NegAtom(low), m - 1)
        }
    });
    (out, regs)
}

fn fresh_register(regs: &mut RegisterMap, base: &Arc<str>, lag: u32) -> Arc<str> {
    let name = format!("__lb_{base}_{lag}");
    if let Some((n, _, _)) = regs.entries.iter().find(|(n, _, _)| **n == *name) {
        return n.clone();
    }
    let sort = regs.decls.sort_of(base).expect("declared base variable");
    regs.decls.declare(&name, sort);
    let n = regs.decls.name(&name).unwrap();
    regs.entries.push((n.clone(), base.clone(), lag));
    n
}

/// The lookback transformation `back`: atoms without lookahead read the
/// current instant; an atom with lookahead becomes `X_w c̄` with `v ↦ v_pre`,
/// `v′ ↦ v_cur`. Negated atoms are folded with [`neg_atom`] first, and a
/// negated lookahead atom becomes `X_s`, since `¬c` is false where `c` is not
/// well-defined. Expects NNF with lookahead at most 1.
pub fn to_lookback(f: &Formula) -> Formula {
    debug_assert!(max_lookahead(f) <= 1);
    f.map_atoms(&mut |c, pos| {
        let c = if pos { c.clone() } else { neg_atom(c) };
        if c.lookahead() == 0 {
            Formula::Atom(c.retag(&mut |v| v.with_tag(Tag::Cur)))
        } else {
            let bar = c.retag(&mut |v| match v.tag {
                Tag::Plain(0) => v.with_tag(Tag::Pre),
                _ => v.with_tag(Tag::Cur),
            });
            if pos {
                Formula::weak_next(Formula::Atom(bar))
            } else {
                Formula::next(Formula::Atom(bar))
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_property, Sort};

    fn rat(names: &[&str]) -> Declarations {
        Declarations::from_pairs(names.iter().map(|n| (*n, Sort::Rat)))
    }

    #[test]
    fn nnf_dualities() {
        let d = rat(&["x", "y"]);
        let p = |s: &str| parse_property(s, &d).unwrap();
        assert_eq!(to_nnf(&p("!(G x < 1)")), p("F !(x < 1)"));
        assert_eq!(to_nnf(&p("!(x < 1 && y < 1)")), p("!(x < 1) || !(y < 1)"));
        assert_eq!(to_nnf(&p("!(X x < 1)")), p("wX !(x < 1)"));
        assert!(to_nnf(&p("!(x < 1 U !(y = 0 || wX x = 1))")).is_nnf());
    }

    #[test]
    fn neg_atom_cases() {
        let d = Declarations::from_pairs([("x", Sort::Int), ("y", Sort::Int), ("u", Sort::Int), ("v", Sort::Int)]);
        let a = |s: &str| match parse_property(s, &d).unwrap() {
            Formula::Atom(c) => c,
            other => panic!("{other:?}"),
        };
        assert_eq!(neg_atom(&a("x < y")), a("y <= x"));
        assert_eq!(neg_atom(&a("x = 2")), a("x != 2"));
        assert_eq!(neg_atom(&a("u =_3 v")), a("u !=_3 v"));
        assert_eq!(neg_atom(&neg_atom(&a("x <= y + 1"))), a("x <= y + 1"));
    }

    #[test]
    fn lookahead_depths() {
        let d = rat(&["x"]);
        assert_eq!(max_lookahead(&parse_property("G(x' >= x) && F(x = 2)", &d).unwrap()), 1);
        assert_eq!(max_lookahead(&parse_property("F(x = 2)", &d).unwrap()), 0);
        assert_eq!(max_lookahead(&parse_property("G(x'' > x)", &d).unwrap()), 2);
    }

    #[test]
    fn lowering_shape() {
        let d = rat(&["x"]);
        let f = parse_property("G(x'' > x)", &d).unwrap();
        let (low, map) = lower_lookahead(&f, &d);
        assert_eq!(max_lookahead(&low), 1);
        assert_eq!(map.entries.len(), 1);
        assert_eq!(&*map.entries[0].0, "__la_x_1");
        let expect = parse_property("G((__la_x_1' > x && wX(__la_x_1 = x')) || wX wX false)", &map.decls).unwrap();
        assert_eq!(low, expect);
        let g = parse_property("F(x = 2)", &d).unwrap();
        let (same, m) = lower_lookahead(&g, &d);
        assert_eq!(same, g);
        assert!(m.entries.is_empty());
    }

    #[test]
    fn canonical_extension() {
        let d = rat(&["x"]);
        let (_, map) = lower_lookahead(&parse_property("G(x'' > x)", &d).unwrap(), &d);
        let q = |v: i64| BigRational::from_integer(v.into());
        let x: Arc<str> = d.name("x").unwrap();
        let trace: Trace = [2, 0, 3].iter().map(|&v| [(x.clone(), q(v))].into_iter().collect()).collect();
        let ext = map.extend(&trace);
        let u: Vec<_> = ext.iter().map(|a| a[&map.entries[0].0].clone()).collect();
        assert_eq!(u, vec![q(0), q(3), q(0)]);
    }

    #[test]
    fn lookback_examples() {
        let d = rat(&["x"]);
        let f = to_nnf(&parse_property("G(x' > x) && F(x = 2)", &d).unwrap());
        let back = to_lookback(&f);
        let gt = ConstraintAtom::new(Expression::Var(VarRef::pre("x")), CompOp::Lt, Expression::Var(VarRef::cur("x")));
        let eq = ConstraintAtom::new(Expression::Var(VarRef::cur("x")), CompOp::Eq, Expression::int(2));
        assert_eq!(
            back,
            Formula::and(
                Formula::globally(Formula::weak_next(Formula::Atom(gt))),
                Formula::eventually(Formula::Atom(eq))
            )
        );
        let neg = to_lookback(&to_nnf(&parse_property("!(x' = x)", &d).unwrap()));
        let ne = ConstraintAtom::new(Expression::Var(VarRef::cur("x")), CompOp::Ne, Expression::Var(VarRef::pre("x")));
        assert_eq!(neg, Formula::next(Formula::Atom(ne)));
    }

    #[test]
    fn registers() {
        let d = rat(&["x"]);
        let f = parse_property("G(x'' > x)", &d).unwrap();
        let (low, regs) = lower_lookahead_online(&f, &d);
        let expect = parse_property("G(wX(x' > __lb_x_1))", &regs.decls).unwrap();
        assert_eq!(low, expect);
        assert_eq!(regs.frame_atoms().len(), 1);
    }
}
