//! Cooper's method over ℤ for linear atoms with congruences.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::formula::VarRef;

use super::linear::{Atom, LinExpr, Lit, Rel};
use super::qf::{is_sat_atoms, normalize};
use super::rat;

/// An atom rescaled so that `x` has coefficient ±1: `sign·x′ + rest REL 0`
/// where `x′ = L·x`.
struct Raw {
    sign: i8,
    rest: LinExpr,
    rel: Rel,
}

impl Raw {
    fn at(&self, t: &LinExpr) -> Lit {
        let t = if self.sign > 0 { t.clone() } else { t.neg() };
        Atom::new(self.rest.add(&t), self.rel.clone(), true)
    }

    fn modulus(&self) -> Option<&BigInt> {
        match &self.rel {
            Rel::Cong(n) | Rel::NCong(n) => Some(n),
            _ => None,
        }
    }
}

fn rq(n: BigInt) -> BigRational {
    BigRational::from_integer(n)
}

fn prepare(with: &[&Atom], x: &VarRef) -> Vec<Raw> {
    let mut l = BigInt::one();
    for a in with {
        l = l.lcm(a.expr.coeff(x).unwrap().numer());
    }
    let mut raws: Vec<Raw> = with
        .iter()
        .map(|a| {
            let c = a.expr.coeff(x).unwrap().numer().clone();
            let m = &l / c.abs();
            let rest = a.expr.without(x).scale(&rq(m.clone()));
            let rel = match &a.rel {
                Rel::Cong(n) => Rel::Cong(n * &m),
                Rel::NCong(n) => Rel::NCong(n * &m),
                r => r.clone(),
            };
            Raw { sign: if c.is_positive() { 1 } else { -1 }, rest, rel }
        })
        .collect();
    if !l.is_one() {
        raws.push(Raw { sign: 1, rest: LinExpr::constant(BigRational::zero()), rel: Rel::Cong(l) });
    }
    raws
}

fn instantiate(without: &[Atom], raws: &[Raw], t: &LinExpr) -> Option<Vec<Atom>> {
    let mut out = without.to_vec();
    for r in raws {
        match r.at(t) {
            Lit::True => {}
            Lit::False => return None,
            Lit::Atom(a) => out.push(a),
        }
    }
    Some(out)
}

/// `∃x. ⋀atoms` over ℤ as a disjunction of conjunctions.
pub(crate) fn eliminate(atoms: &[Atom], x: &VarRef) -> Vec<Vec<Atom>> {
    let (with, without): (Vec<&Atom>, Vec<&Atom>) = atoms.iter().partition(|a| a.contains(x));
    let without: Vec<Atom> = without.into_iter().cloned().collect();
    if with.is_empty() {
        return vec![atoms.to_vec()];
    }
    let raws = prepare(&with, x);
    if let Some(eq) = raws.iter().find(|r| r.rel == Rel::Eq) {
        // sign·x′ + rest = 0
        let t = if eq.sign > 0 { eq.rest.neg() } else { eq.rest.clone() };
        return instantiate(&without, &raws, &t).into_iter().collect();
    }
    let mut lowers = Vec::new();
    let mut uppers = Vec::new();
    let mut nes = Vec::new();
    let mut delta = BigInt::one();
    for r in &raws {
        match r.rel {
            Rel::Le if r.sign < 0 => lowers.push(r.rest.clone()),
            Rel::Le => uppers.push(r.rest.neg()),
            Rel::Ne => nes.push(if r.sign > 0 { r.rest.neg() } else { r.rest.clone() }),
            Rel::Cong(_) | Rel::NCong(_) => delta = delta.lcm(r.modulus().unwrap()),
            Rel::Lt | Rel::Eq => unreachable!("integer atoms are canonical"),
        }
    }
    let cost = |bounds: &Vec<LinExpr>| if bounds.is_empty() { 0 } else { bounds.len() + nes.len() };
    let use_lower = cost(&lowers) <= cost(&uppers);
    let (bounds, dir) = if use_lower { (&lowers, 1i64) } else { (&uppers, -1i64) };
    let step = |e: &LinExpr, k: &BigInt| e.add_const(&rq(k * dir));
    let mut points: Vec<LinExpr> = Vec::new();
    let mut out = Vec::new();
    if bounds.is_empty() {
        // unbounded in this direction: only the congruences matter
        let congs: Vec<Raw> = raws.into_iter().filter(|r| r.modulus().is_some()).collect();
        if congs.len() <= 1 {
            // a lone (non-)congruence on a unit-coefficient variable is solvable
            return vec![without];
        }
        let mut j = BigInt::zero();
        while j < delta {
            if let Some(v) = instantiate(&without, &congs, &LinExpr::constant(rq(j.clone()))) {
                out.push(v);
            }
            j += 1;
        }
        return out;
    }
    for b in bounds {
        let mut k = BigInt::zero();
        while k < delta {
            points.push(step(b, &k));
            k += 1;
        }
    }
    // the least (greatest) solution may sit just past an excluded point
    for t in &nes {
        points.push(step(t, &delta));
    }
    points.sort();
    points.dedup();
    for p in &points {
        if let Some(v) = instantiate(&without, &raws, p) {
            out.push(v);
        }
    }
    out
}

fn relaxation(atoms: &[Atom]) -> Vec<Atom> {
    atoms
        .iter()
        .filter(|a| matches!(a.rel, Rel::Eq | Rel::Le | Rel::Ne))
        .filter_map(|a| match Atom::new(a.expr.clone(), a.rel.clone(), false) {
            Lit::Atom(b) => Some(b),
            _ => None,
        })
        .collect()
}

/// Connected components of atoms sharing variables.
fn components(atoms: Vec<Atom>) -> Vec<Vec<Atom>> {
    let mut comps: Vec<(BTreeSet<VarRef>, Vec<Atom>)> = Vec::new();
    for a in atoms {
        let vs: BTreeSet<VarRef> = a.vars().cloned().collect();
        let mut merged = (vs, vec![a]);
        let mut i = 0;
        while i < comps.len() {
            if comps[i].0.intersection(&merged.0).next().is_some() {
                let (v, mut xs) = comps.swap_remove(i);
                merged.0.extend(v);
                merged.1.append(&mut xs);
            } else {
                i += 1;
            }
        }
        comps.push(merged);
    }
    comps.into_iter().map(|(_, a)| a).collect()
}

fn pick_var(atoms: &[Atom]) -> VarRef {
    for a in atoms {
        if a.rel == Rel::Eq {
            if let Some((v, _)) = a.expr.terms.iter().find(|(_, c)| c.abs().is_one()) {
                return v.clone();
            }
        }
    }
    let mut score: BTreeMap<&VarRef, (usize, usize, usize)> = BTreeMap::new();
    for a in atoms {
        for (v, c) in &a.expr.terms {
            let s = score.entry(v).or_default();
            match a.rel {
                Rel::Le if c.is_positive() => s.1 += 1,
                Rel::Le => s.0 += 1,
                _ => s.2 += 1,
            }
        }
    }
    score
        .into_iter()
        .min_by_key(|(_, (l, u, o))| (*l.min(u), *o))
        .map(|(v, _)| v.clone())
        .expect("non-empty conjunction has a variable")
}

/// Satisfiability of integer atoms.
pub(crate) fn is_sat(atoms: Vec<Atom>) -> bool {
    let Some(atoms) = normalize(atoms) else { return false };
    if atoms.is_empty() {
        return true;
    }
    let comps = components(atoms);
    if comps.len() > 1 {
        return comps.into_iter().all(|c| is_sat_atoms(&c));
    }
    let atoms = comps.into_iter().next().unwrap();
    if !rat::is_sat(relaxation(&atoms)) {
        return false;
    }
    let x = pick_var(&atoms);
    eliminate(&atoms, &x).into_iter().any(|d| is_sat_atoms(&d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::linear::rint;
    use crate::arith::Dnf;

    fn v(n: &str) -> LinExpr {
        LinExpr::var(VarRef::plain(n, 0))
    }
    fn at(e: LinExpr, r: Rel) -> Atom {
        match Atom::new(e, r, true) {
            Lit::Atom(a) => a,
            l => panic!("{l:?}"),
        }
    }

    #[test]
    fn parity() {
        let even = at(v("x"), Rel::Cong(2.into()));
        let odd = at(v("x").add_const(&rint(1)), Rel::Cong(2.into()));
        assert!(!is_sat(vec![even.clone(), odd]));
        // 2y = x ∧ x odd
        let e = at(v("x").sub(&v("y").scale(&rint(2))), Rel::Eq);
        assert!(!is_sat(vec![e.clone(), at(v("x").add_const(&rint(1)), Rel::Cong(2.into()))]));
        assert!(is_sat(vec![e, even]));
    }

    #[test]
    fn gaps_between_integers() {
        // 0 < 2x < 2 has no integer solution
        assert!(!is_sat(vec![
            at(v("x").scale(&rint(2)).neg(), Rel::Lt),
            at(v("x").scale(&rint(2)).add_const(&rint(-2)), Rel::Lt)
        ]));
        // 1 ≤ 3x ≤ 2 neither; 1 ≤ 3x ≤ 3 does
        let lo = at(v("x").scale(&rint(-3)).add_const(&rint(1)), Rel::Le);
        assert!(!is_sat(vec![lo.clone(), at(v("x").scale(&rint(3)).add_const(&rint(-2)), Rel::Le)]));
        assert!(is_sat(vec![lo, at(v("x").scale(&rint(3)).add_const(&rint(-3)), Rel::Le)]));
    }

    #[test]
    fn disequalities_against_bounds() {
        // 0 ≤ x ≤ 1, x ≠ 0, x ≠ 1
        let atoms = vec![
            at(v("x").neg(), Rel::Le),
            at(v("x").add_const(&rint(-1)), Rel::Le),
            at(v("x"), Rel::Ne),
            at(v("x").add_const(&rint(-1)), Rel::Ne),
        ];
        assert!(!is_sat(atoms));
        // 0 ≤ x, x ≠ y, x even, y = 0
        let atoms = vec![
            at(v("x").neg(), Rel::Le),
            at(v("x").sub(&v("y")), Rel::Ne),
            at(v("x"), Rel::Cong(2.into())),
            at(v("y"), Rel::Eq),
        ];
        assert!(is_sat(atoms));
    }

    #[test]
    fn residue_splits_collapse() {
        let r = |k: i64, cong: bool| {
            let rel = if cong { Rel::Cong(3.into()) } else { Rel::NCong(3.into()) };
            Dnf::conj(vec![at(v("x").add_const(&rint(-k)), rel)])
        };
        let all = Dnf::or_all((0..3).map(|k| r(k, true)));
        assert!(all.simplify().is_tt());
        assert!(r(0, false).or(&r(1, false)).simplify().is_tt());
        assert_eq!(r(1, true).or(&r(2, false)).simplify(), r(2, false));
        // two residues of three stay a disjunction
        assert_eq!(r(0, true).or(&r(1, true)).simplify().0.len(), 2);
        // ∃y. x + y ≢ 1 (mod 3) holds for every x
        let d = Dnf::conj(vec![at(v("x").add(&v("y")).add_const(&rint(-1)), Rel::NCong(3.into()))]);
        assert!(d.exists(&[VarRef::plain("y", 0)]).is_tt());
    }

    #[test]
    fn projection_keeps_periodicity() {
        // ∃y. x = 2y  is  x ≡ 0 (mod 2)
        let d = Dnf::conj(vec![at(v("x").sub(&v("y").scale(&rint(2))), Rel::Eq)]);
        let r = d.exists(&[VarRef::plain("y", 0)]);
        assert_eq!(r, Dnf::conj(vec![at(v("x"), Rel::Cong(2.into()))]));
        // ∃y. x < y < z  is  x + 2 ≤ z
        let d = Dnf::conj(vec![at(v("x").sub(&v("y")), Rel::Lt), at(v("y").sub(&v("z")), Rel::Lt)]);
        let r = d.exists(&[VarRef::plain("y", 0)]);
        assert_eq!(r, Dnf::conj(vec![at(v("x").sub(&v("z")).add_const(&rint(2)), Rel::Le)]));
    }
}
