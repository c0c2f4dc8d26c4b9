//! Fourier–Motzkin over ℚ, with `≠` handled by case split.

use num_traits::Signed;

use crate::formula::VarRef;

use super::linear::{Atom, LinExpr, Lit, Rel};
use super::qf::{normalize, substitute_all};

/// Solves an equality for `x`: `a·x + r = 0` gives `x = −r/a`.
fn solve(eq: &Atom, x: &VarRef) -> LinExpr {
    let a = eq.expr.coeff(x).expect("variable occurs in equality").clone();
    eq.expr.without(x).scale(&-a.recip())
}

fn strict_sides(e: &LinExpr, int: bool) -> (Lit, Lit) {
    (Atom::new(e.clone(), Rel::Lt, int), Atom::new(e.neg(), Rel::Lt, int))
}

fn combine(lo: &Atom, hi: &Atom, x: &VarRef) -> Lit {
    // lo: negative coefficient on x, hi: positive
    let cl = lo.expr.coeff(x).unwrap().abs();
    let ch = hi.expr.coeff(x).unwrap().clone();
    let e = lo.expr.scale(&ch).add(&hi.expr.scale(&cl));
    let strict = lo.rel == Rel::Lt || hi.rel == Rel::Lt;
    Atom::new(e, if strict { Rel::Lt } else { Rel::Le }, false)
}

/// `∃x. ⋀atoms` as a disjunction of conjunctions (several only when a
/// disequality on `x` has to be split).
pub(crate) fn eliminate(atoms: &[Atom], x: &VarRef) -> Vec<Vec<Atom>> {
    let (with, without): (Vec<&Atom>, Vec<&Atom>) = atoms.iter().partition(|a| a.contains(x));
    let without: Vec<Atom> = without.into_iter().cloned().collect();
    if with.is_empty() {
        return vec![atoms.to_vec()];
    }
    if let Some(eq) = with.iter().find(|a| a.rel == Rel::Eq) {
        let t = solve(eq, x);
        return match substitute_all(atoms, x, &t) {
            Some(v) => vec![v],
            None => vec![],
        };
    }
    let mut lowers = Vec::new();
    let mut uppers = Vec::new();
    let mut nes = Vec::new();
    for a in &with {
        match a.rel {
            Rel::Ne => nes.push(*a),
            Rel::Le | Rel::Lt => {
                if a.expr.coeff(x).unwrap().is_positive() {
                    uppers.push(*a)
                } else {
                    lowers.push(*a)
                }
            }
            _ => unreachable!("congruences are integer atoms"),
        }
    }
    // an interval unbounded on one side avoids finitely many points
    if lowers.is_empty() || uppers.is_empty() {
        return vec![without];
    }
    if let Some(ne) = nes.first() {
        let (lt, gt) = strict_sides(&ne.expr, false);
        let mut out = Vec::new();
        for side in [lt, gt] {
            let Lit::Atom(side) = side else { unreachable!("non-trivial disequality") };
            let mut next: Vec<Atom> = atoms.iter().filter(|a| a != ne).cloned().collect();
            next.push(side);
            if let Some(n) = normalize(next) {
                out.extend(eliminate(&n, x));
            }
        }
        return out;
    }
    let mut out = without;
    for lo in &lowers {
        for hi in &uppers {
            match combine(lo, hi, x) {
                Lit::True => {}
                Lit::False => return vec![],
                Lit::Atom(a) => out.push(a),
            }
        }
    }
    vec![out]
}

fn fm_sat(atoms: Vec<Atom>) -> bool {
    let Some(mut atoms) = normalize(atoms) else { return false };
    loop {
        let mut vars: Vec<&VarRef> = atoms.iter().flat_map(|a| a.vars()).collect();
        vars.sort();
        vars.dedup();
        let Some(x) = vars
            .into_iter()
            .min_by_key(|x| {
                let (mut l, mut u) = (0usize, 0usize);
                for a in &atoms {
                    match a.expr.coeff(x) {
                        Some(c) if c.is_positive() => u += 1,
                        Some(_) => l += 1,
                        None => {}
                    }
                }
                l * u
            })
            .cloned()
        else {
            return true;
        };
        let next = eliminate(&atoms, &x).pop();
        match next.and_then(normalize) {
            Some(n) => atoms = n,
            None => return false,
        }
    }
}

/// Satisfiability of rational atoms (`=`, `≠`, `<`, `≤`).
pub(crate) fn is_sat(atoms: Vec<Atom>) -> bool {
    let Some(atoms) = normalize(atoms) else { return false };
    if let Some(eq) = atoms.iter().find(|a| a.rel == Rel::Eq) {
        let x = eq.expr.terms[0].0.clone();
        let t = solve(eq, &x);
        return match substitute_all(&atoms, &x, &t) {
            Some(v) => is_sat(v),
            None => false,
        };
    }
    let (nes, ineqs): (Vec<Atom>, Vec<Atom>) = atoms.into_iter().partition(|a| a.rel == Rel::Ne);
    if !fm_sat(ineqs.clone()) {
        return false;
    }
    // a convex set avoids finitely many hyperplanes unless it lies in one
    nes.iter().all(|ne| {
        let (lt, gt) = strict_sides(&ne.expr, false);
        [lt, gt].into_iter().any(|side| match side {
            Lit::Atom(a) => {
                let mut v = ineqs.clone();
                v.push(a);
                fm_sat(v)
            }
            Lit::True => true,
            Lit::False => false,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Dnf;

    fn v(n: &str) -> LinExpr {
        LinExpr::var(VarRef::plain(n, 0))
    }
    fn k(n: i64) -> LinExpr {
        LinExpr::constant(crate::arith::linear::rint(n))
    }
    fn at(e: LinExpr, r: Rel) -> Atom {
        match Atom::new(e, r, false) {
            Lit::Atom(a) => a,
            l => panic!("{l:?}"),
        }
    }

    #[test]
    fn contradictions() {
        // x ≥ y, x < y
        assert!(!is_sat(vec![at(v("y").sub(&v("x")), Rel::Le), at(v("x").sub(&v("y")), Rel::Lt)]));
        // y ≥ 0, x ≤ y, x > y
        assert!(!is_sat(vec![
            at(v("y").neg(), Rel::Le),
            at(v("x").sub(&v("y")), Rel::Le),
            at(v("y").sub(&v("x")), Rel::Lt)
        ]));
        // 0 ≤ x ≤ 0, x ≠ 0
        assert!(!is_sat(vec![at(v("x").neg(), Rel::Le), at(v("x"), Rel::Le), at(v("x"), Rel::Ne)]));
        // x ≤ y ≤ x, x ≠ y is unsat but x ≤ y, x ≠ y is fine
        assert!(!is_sat(vec![
            at(v("x").sub(&v("y")), Rel::Le),
            at(v("y").sub(&v("x")), Rel::Le),
            at(v("x").sub(&v("y")), Rel::Ne)
        ]));
        assert!(is_sat(vec![at(v("x").sub(&v("y")), Rel::Le), at(v("x").sub(&v("y")), Rel::Ne)]));
    }

    #[test]
    fn density() {
        // 0 < x < 1 has rational solutions
        assert!(is_sat(vec![at(v("x").neg(), Rel::Lt), at(v("x").sub(&k(1)), Rel::Lt)]));
    }

    #[test]
    fn projection() {
        // ∃u. x0 ≤ u ∧ u ≤ x  is  x0 ≤ x
        let d = Dnf::conj(vec![at(v("x0").sub(&v("u")), Rel::Le), at(v("u").sub(&v("x")), Rel::Le)]);
        let r = d.exists(&[VarRef::plain("u", 0)]);
        assert_eq!(r, Dnf::conj(vec![at(v("x0").sub(&v("x")), Rel::Le)]));
        // ∃u. u = x  is  true
        let d = Dnf::conj(vec![at(v("u").sub(&v("x")), Rel::Eq)]);
        assert!(d.exists(&[VarRef::plain("u", 0)]).is_tt());
    }
}
