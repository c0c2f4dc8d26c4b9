//! Quantifier-free formulas as DNFs of normalized conjunctions.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::formula::{to_nnf, Declarations, Formula, VarRef};

use super::linear::{Atom, Bound, Lit, Rel};
use super::{int, rat, Valuation};

/// A satisfiability-agnostic conjunction in normal form: per linear form at
/// most one lower and one upper bound (or one equality) plus the
/// disequalities that are not implied; sorted and deduplicated.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Conj(pub Vec<Atom>);

#[derive(Default)]
struct Group {
    lo: Option<(BigRational, bool)>,
    hi: Option<(BigRational, bool)>,
    eq: Option<BigRational>,
    nes: Vec<BigRational>,
    conflict: bool,
}

impl Group {
    fn add(&mut self, b: Bound) {
        match b {
            Bound::Eq(k) => match &self.eq {
                Some(e) if *e != k => self.conflict = true,
                _ => self.eq = Some(k),
            },
            Bound::Ne(k) => self.nes.push(k),
            Bound::Lower(k, s) => {
                let tighter = match &self.lo {
                    None => true,
                    Some((l, ls)) => k > *l || (k == *l && s && !ls),
                };
                if tighter {
                    self.lo = Some((k, s));
                }
            }
            Bound::Upper(k, s) => {
                let tighter = match &self.hi {
                    None => true,
                    Some((h, hs)) => k < *h || (k == *h && s && !hs),
                };
                if tighter {
                    self.hi = Some((k, s));
                }
            }
        }
    }

    /// Emits the group's canonical bounds, or `None` if they conflict.
    fn emit(mut self, form: &[(VarRef, BigRational)], int: bool, out: &mut Vec<Atom>) -> Option<()> {
        if self.conflict {
            return None;
        }
        if int {
            if let Some((k, s)) = self.lo.take() {
                self.lo = Some((if s { k.floor() + BigRational::one() } else { k.ceil() }, false));
            }
            if let Some((k, s)) = self.hi.take() {
                self.hi = Some((if s { k.ceil() - BigRational::one() } else { k.floor() }, false));
            }
        }
        loop {
            if let (Some((l, ls)), Some((h, hs))) = (&self.lo, &self.hi) {
                if l > h || (l == h && (*ls || *hs)) {
                    return None;
                }
                if l == h {
                    match &self.eq {
                        Some(e) if e != l => return None,
                        _ => self.eq = Some(l.clone()),
                    }
                }
            }
            if let Some(e) = &self.eq {
                if let Some((l, s)) = &self.lo {
                    if e < l || (e == l && *s) {
                        return None;
                    }
                }
                if let Some((h, s)) = &self.hi {
                    if e > h || (e == h && *s) {
                        return None;
                    }
                }
                if self.nes.contains(e) {
                    return None;
                }
                push(out, Atom::from_bound(form, &Bound::Eq(e.clone()), int))?;
                return Some(());
            }
            let mut changed = false;
            let lo = self.lo.clone();
            let hi = self.hi.clone();
            self.nes.retain(|n| {
                if let Some((l, s)) = &lo {
                    if n < l || (n == l && *s) {
                        return false;
                    }
                }
                if let Some((h, s)) = &hi {
                    if n > h || (n == h && *s) {
                        return false;
                    }
                }
                true
            });
            for n in self.nes.clone() {
                if let Some((l, false)) = &self.lo {
                    if *l == n {
                        self.lo = Some(if int { (l + BigRational::one(), false) } else { (n.clone(), true) });
                        changed = true;
                    }
                }
                if let Some((h, false)) = &self.hi {
                    if *h == n {
                        self.hi = Some(if int { (h - BigRational::one(), false) } else { (n.clone(), true) });
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if let Some((k, s)) = self.lo {
            push(out, Atom::from_bound(form, &Bound::Lower(k, s), int))?;
        }
        if let Some((k, s)) = self.hi {
            push(out, Atom::from_bound(form, &Bound::Upper(k, s), int))?;
        }
        self.nes.sort();
        self.nes.dedup();
        for n in self.nes {
            push(out, Atom::from_bound(form, &Bound::Ne(n), int))?;
        }
        Some(())
    }
}

fn push(out: &mut Vec<Atom>, l: Lit) -> Option<()> {
    match l {
        Lit::True => Some(()),
        Lit::False => None,
        Lit::Atom(a) => {
            out.push(a);
            Some(())
        }
    }
}

type GroupKey = (bool, Vec<(VarRef, BigRational)>);

/// Normalizes a conjunction; `None` if it is trivially unsatisfiable.
pub(crate) fn normalize(atoms: Vec<Atom>) -> Option<Vec<Atom>> {
    let mut groups: BTreeMap<GroupKey, Group> = BTreeMap::new();
    let mut others = Vec::new();
    for a in atoms {
        match a.as_bound() {
            Some((form, b)) => groups.entry((a.int, form)).or_default().add(b),
            None => others.push(a),
        }
    }
    let mut out = Vec::new();
    for ((int, form), g) in groups {
        g.emit(&form, int, &mut out)?;
    }
    others.sort();
    others.dedup();
    for a in &others {
        if others.binary_search(&a.neg()).is_ok() {
            return None;
        }
    }
    out.extend(others);
    out.sort();
    out.dedup();
    Some(out)
}

/// Substitutes `x := t` in every atom; `None` if some atom becomes false.
pub(crate) fn substitute_all(atoms: &[Atom], x: &VarRef, t: &super::LinExpr) -> Option<Vec<Atom>> {
    let mut out = Vec::with_capacity(atoms.len());
    for a in atoms {
        push(&mut out, a.substitute(x, t))?;
    }
    Some(out)
}

thread_local! {
    static SAT_CACHE: RefCell<HashMap<Vec<Atom>, bool>> = RefCell::new(HashMap::new());
}

const SAT_CACHE_LIMIT: usize = 1 << 18;

/// Decides satisfiability of a conjunction of atoms.
pub fn is_sat_atoms(atoms: &[Atom]) -> bool {
    let Some(atoms) = normalize(atoms.to_vec()) else { return false };
    if atoms.is_empty() {
        return true;
    }
    if let Some(hit) = SAT_CACHE.with(|c| c.borrow().get(&atoms).copied()) {
        return hit;
    }
    let (ints, rats): (Vec<Atom>, Vec<Atom>) = atoms.iter().cloned().partition(|a| a.int);
    let result = rat::is_sat(rats) && int::is_sat(ints);
    SAT_CACHE.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() > SAT_CACHE_LIMIT {
            c.clear();
        }
        c.insert(atoms, result);
    });
    result
}

impl Conj {
    pub fn top() -> Conj {
        Conj(Vec::new())
    }

    pub fn new(atoms: Vec<Atom>) -> Option<Conj> {
        normalize(atoms).map(Conj)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.0
    }

    pub fn is_sat(&self) -> bool {
        is_sat_atoms(&self.0)
    }

    pub fn is_top(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eval(&self, val: &impl Valuation) -> Option<bool> {
        let mut all = true;
        for a in &self.0 {
            all &= a.eval(val)?;
        }
        Some(all)
    }

    fn is_subset_of(&self, other: &Conj) -> bool {
        self.0.iter().all(|a| other.0.binary_search(a).is_ok())
    }
}

/// A quantifier-free formula in disjunctive normal form. The empty
/// disjunction is false; a disjunct without atoms is true.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dnf(pub Vec<Conj>);

impl Dnf {
    pub fn ff() -> Dnf {
        Dnf(Vec::new())
    }

    pub fn tt() -> Dnf {
        Dnf(vec![Conj::top()])
    }

    pub fn from_bool(b: bool) -> Dnf {
        if b {
            Dnf::tt()
        } else {
            Dnf::ff()
        }
    }

    pub fn lit(l: Lit) -> Dnf {
        match l {
            Lit::True => Dnf::tt(),
            Lit::False => Dnf::ff(),
            Lit::Atom(a) => Dnf(vec![Conj(vec![a])]),
        }
    }

    pub fn conj(atoms: Vec<Atom>) -> Dnf {
        match Conj::new(atoms) {
            Some(c) => Dnf(vec![c]),
            None => Dnf::ff(),
        }
    }

    /// Converts a formula without temporal operators.
    pub fn from_formula(f: &Formula, decls: &Declarations) -> Option<Dnf> {
        Some(match f {
            Formula::True => Dnf::tt(),
            Formula::False => Dnf::ff(),
            Formula::Atom(c) => Dnf::lit(Atom::from_constraint(c, decls)),
            Formula::NegAtom(c) => Dnf::lit(Atom::from_constraint(c, decls)).not(),
            Formula::Not(_) => return Dnf::from_formula(&to_nnf(f), decls),
            Formula::And(a, b) => Dnf::from_formula(a, decls)?.and(&Dnf::from_formula(b, decls)?),
            Formula::Or(a, b) => Dnf::from_formula(a, decls)?.or(&Dnf::from_formula(b, decls)?),
            _ => return None,
        })
    }

    pub fn disjuncts(&self) -> &[Conj] {
        &self.0
    }

    /// Syntactically false.
    pub fn is_ff(&self) -> bool {
        self.0.is_empty()
    }

    /// Syntactically true.
    pub fn is_tt(&self) -> bool {
        self.0.iter().any(Conj::is_top)
    }

    pub fn and(&self, other: &Dnf) -> Dnf {
        let mut out = Vec::new();
        for a in &self.0 {
            for b in &other.0 {
                let mut atoms = a.0.clone();
                atoms.extend(b.0.iter().cloned());
                if let Some(c) = Conj::new(atoms) {
                    out.push(c);
                }
            }
        }
        Dnf(out).tidy()
    }

    pub fn or(&self, other: &Dnf) -> Dnf {
        let mut out = self.0.clone();
        out.extend(other.0.iter().cloned());
        Dnf(out).tidy()
    }

    pub fn not(&self) -> Dnf {
        let mut acc = Dnf::tt();
        for c in &self.0 {
            let clause = Dnf(c.0.iter().map(|a| Conj(vec![a.neg()])).collect());
            acc = acc.and(&clause).drop_unsat();
            if acc.is_ff() {
                break;
            }
        }
        acc
    }

    pub fn and_all(items: impl IntoIterator<Item = Dnf>) -> Dnf {
        items.into_iter().fold(Dnf::tt(), |acc, d| acc.and(&d))
    }

    pub fn or_all(items: impl IntoIterator<Item = Dnf>) -> Dnf {
        items.into_iter().fold(Dnf::ff(), |acc, d| acc.or(&d))
    }

    /// Cheap cleanup: sort, dedupe, absorb syntactic supersets.
    fn tidy(mut self) -> Dnf {
        self.0.sort();
        self.0.dedup();
        if self.is_tt() {
            return Dnf::tt();
        }
        let cs = std::mem::take(&mut self.0);
        let mut keep: Vec<Conj> = Vec::with_capacity(cs.len());
        // shorter conjunctions first so supersets meet their subsets
        let mut order: Vec<Conj> = cs;
        order.sort_by_key(|c| c.0.len());
        for c in order {
            if !keep.iter().any(|k| k.is_subset_of(&c)) {
                keep.push(c);
            }
        }
        keep.sort();
        Dnf(keep)
    }

    fn drop_unsat(self) -> Dnf {
        Dnf(self.0.into_iter().filter(Conj::is_sat).collect())
    }

    pub fn is_sat(&self) -> bool {
        self.0.iter().any(Conj::is_sat)
    }

    pub fn is_valid(&self) -> bool {
        !self.not().is_sat()
    }

    pub fn eval(&self, val: &impl Valuation) -> Option<bool> {
        let mut any = false;
        for c in &self.0 {
            any |= c.eval(val)?;
        }
        Some(any)
    }

    /// Substitutes the variables `val` knows and simplifies.
    pub fn partial_eval(&self, val: &impl Valuation) -> Dnf {
        let mut out = Vec::new();
        'outer: for c in &self.0 {
            let mut atoms = Vec::new();
            for a in &c.0 {
                match a.partial_eval(val) {
                    Lit::True => {}
                    Lit::False => continue 'outer,
                    Lit::Atom(b) => atoms.push(b),
                }
            }
            if let Some(c) = Conj::new(atoms) {
                out.push(c);
            }
        }
        Dnf(out).tidy()
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&VarRef) -> VarRef) -> Dnf {
        let mut out = Vec::new();
        'outer: for c in &self.0 {
            let mut atoms = Vec::new();
            for a in &c.0 {
                match a.map_vars(f) {
                    Lit::True => {}
                    Lit::False => continue 'outer,
                    Lit::Atom(b) => atoms.push(b),
                }
            }
            if let Some(c) = Conj::new(atoms) {
                out.push(c);
            }
        }
        Dnf(out).tidy()
    }

    pub fn vars(&self) -> BTreeSet<VarRef> {
        self.0.iter().flat_map(|c| c.0.iter().flat_map(|a| a.vars().cloned())).collect()
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.0.iter().flat_map(|c| c.0.iter().cloned()).collect()
    }

    /// Quantifier-free equivalent of `∃ vars. self`.
    pub fn exists(&self, vars: &[VarRef]) -> Dnf {
        let mut out = Vec::new();
        for c in &self.0 {
            let mut cur = vec![c.0.clone()];
            for x in vars {
                let mut next = Vec::new();
                for atoms in cur {
                    if !atoms.iter().any(|a| a.contains(x)) {
                        next.push(atoms);
                        continue;
                    }
                    let int = atoms.iter().any(|a| a.int && a.contains(x));
                    let parts = if int { int::eliminate(&atoms, x) } else { rat::eliminate(&atoms, x) };
                    for p in parts {
                        if let Some(n) = normalize(p) {
                            if is_sat_atoms(&n) {
                                next.push(n);
                            }
                        }
                    }
                }
                next.sort();
                next.dedup();
                cur = next;
            }
            out.extend(cur.into_iter().map(Conj));
        }
        Dnf(out).simplify()
    }

    /// `self ⊨ other`.
    pub fn entails(&self, other: &Dnf) -> bool {
        self.0.iter().all(|c| !counterexample(&c.0, &other.0))
    }

    pub fn is_equivalent(&self, other: &Dnf) -> bool {
        self == other || (self.entails(other) && other.entails(self))
    }

    /// Removes unsatisfiable and subsumed disjuncts and merges disjuncts that
    /// differ in a single complementary or adjacent literal.
    pub fn simplify(self) -> Dnf {
        let mut d = self.drop_unsat().tidy();
        loop {
            let merged = merge_pass(&d).or_else(|| merge_residues(&d));
            match merged {
                Some(m) => d = m.tidy(),
                None => break,
            }
        }
        if d.0.len() > 1 && d.0.len() <= 24 {
            // drop disjuncts that entail another remaining one
            let mut rest = d.0.clone();
            let mut i = 0;
            while i < rest.len() {
                let c = &rest[i];
                let redundant =
                    rest.iter().enumerate().any(|(j, o)| j != i && !counterexample(&c.0, std::slice::from_ref(o)));
                if redundant {
                    rest.remove(i);
                } else {
                    i += 1;
                }
            }
            d = Dnf(rest).tidy();
        }
        d
    }
}

/// Whether `c ∧ ¬(d₁ ∨ … ∨ dₙ)` is satisfiable.
fn counterexample(c: &[Atom], ds: &[Conj]) -> bool {
    fn go(c: &[Atom], ds: &[Conj]) -> bool {
        let Some(d) = ds.first() else { return is_sat_atoms(c) };
        if d.0.iter().all(|a| c.binary_search(a).is_ok()) {
            return false;
        }
        for l in &d.0 {
            let mut next = c.to_vec();
            next.push(l.neg());
            let Some(next) = normalize(next) else { continue };
            if !is_sat_atoms(&next) {
                continue;
            }
            if go(&next, &ds[1..]) {
                return true;
            }
        }
        false
    }
    let Some(c) = normalize(c.to_vec()) else { return false };
    go(&c, ds)
}

/// One round of pairwise merging; `None` when nothing merged.
fn merge_pass(d: &Dnf) -> Option<Dnf> {
    let cs = &d.0;
    for i in 0..cs.len() {
        for j in i + 1..cs.len() {
            let (a, b) = (&cs[i], &cs[j]);
            if a.0.len() != b.0.len() {
                continue;
            }
            let only_a: Vec<&Atom> = a.0.iter().filter(|x| b.0.binary_search(x).is_err()).collect();
            if only_a.len() != 1 {
                continue;
            }
            let only_b: Vec<&Atom> = b.0.iter().filter(|x| a.0.binary_search(x).is_err()).collect();
            if let Some(l) = merge_lits(only_a[0], only_b[0]) {
                let mut atoms: Vec<Atom> = a.0.iter().filter(|x| *x != only_a[0]).cloned().collect();
                if let Lit::Atom(m) = l {
                    atoms.push(m);
                }
                let mut out: Vec<Conj> =
                    cs.iter().enumerate().filter(|(k, _)| *k != i && *k != j).map(|(_, c)| c.clone()).collect();
                if let Some(c) = Conj::new(atoms) {
                    out.push(c);
                }
                return Some(Dnf(out));
            }
        }
    }
    None
}

type ResidueForm<'a> = (&'a [(VarRef, BigRational)], &'a BigInt);

/// Splits a congruence atom into its form, residue constant and polarity.
fn residue(a: &Atom) -> Option<(ResidueForm<'_>, &BigRational, bool)> {
    match &a.rel {
        Rel::Cong(n) => Some(((&a.expr.terms, n), &a.expr.constant, true)),
        Rel::NCong(n) => Some(((&a.expr.terms, n), &a.expr.constant, false)),
        _ => None,
    }
}

/// Merges disjuncts that share everything but a congruence literal whose
/// residues together cover the whole modulus.
fn merge_residues(d: &Dnf) -> Option<Dnf> {
    // (shared literals, congruence terms, modulus) -> residues seen
    type Key = (Vec<Atom>, Vec<(VarRef, BigRational)>, BigInt);
    let mut groups: HashMap<Key, BTreeSet<BigRational>> = HashMap::new();
    for c in &d.0 {
        for (k, a) in c.0.iter().enumerate() {
            let Some(((terms, n), r, true)) = residue(a) else { continue };
            let mut rest = c.0.clone();
            rest.remove(k);
            let covered = groups.entry((rest.clone(), terms.to_vec(), n.clone())).or_default();
            covered.insert(r.clone());
            if BigInt::from(covered.len()) == *n {
                // the disjuncts refining `rest` are absorbed by tidy
                let mut out = d.0.clone();
                out.push(Conj(rest));
                return Some(Dnf(out));
            }
        }
    }
    None
}

/// A single literal equivalent to `a ∨ b`, if there is one.
fn merge_lits(a: &Atom, b: &Atom) -> Option<Lit> {
    if *b == a.neg() {
        return Some(Lit::True);
    }
    if a.int != b.int {
        return None;
    }
    if let (Some((fa, ca, pa)), Some((fb, cb, pb))) = (residue(a), residue(b)) {
        if fa != fb {
            return None;
        }
        let n = fa.1;
        return match (pa, pb) {
            // distinct residues: one of the two exclusions always holds
            (false, false) => Some(Lit::True),
            (true, false) => Some(Lit::Atom(b.clone())),
            (false, true) => Some(Lit::Atom(a.clone())),
            (true, true) if n == &BigInt::from(2) && ca != cb => Some(Lit::True),
            (true, true) => None,
        };
    }
    let (fa, ba) = a.as_bound()?;
    let (fb, bb) = b.as_bound()?;
    if fa != fb {
        return None;
    }
    let int = a.int;
    let one = BigRational::one();
    let contains = |b: &Bound, k: &BigRational| match b {
        Bound::Eq(e) => e == k,
        Bound::Ne(e) => e != k,
        Bound::Upper(h, s) => k < h || (k == h && !s),
        Bound::Lower(l, s) => k > l || (k == l && !s),
    };
    let mk = |b: Bound| Atom::from_bound(&fa, &b, int);
    use Bound::*;
    let r = match (&ba, &bb) {
        (Upper(x, sx), Upper(y, sy)) => {
            if x > y || (x == y && !sx) {
                mk(Upper(x.clone(), *sx))
            } else {
                mk(Upper(y.clone(), *sy))
            }
        }
        (Lower(x, sx), Lower(y, sy)) => {
            if x < y || (x == y && !sx) {
                mk(Lower(x.clone(), *sx))
            } else {
                mk(Lower(y.clone(), *sy))
            }
        }
        (Upper(h, sh), Lower(l, sl)) | (Lower(l, sl), Upper(h, sh)) => {
            let covers = if int { *l <= h + &one } else { l < h || (l == h && !(*sh && *sl)) };
            if covers {
                Lit::True
            } else {
                return None;
            }
        }
        (Eq(e), other) | (other, Eq(e)) => {
            if contains(other, e) {
                mk(other.clone())
            } else {
                match other {
                    Upper(h, true) if h == e => mk(Upper(h.clone(), false)),
                    Lower(l, true) if l == e => mk(Lower(l.clone(), false)),
                    Upper(h, false) if int && *e == h + &one => mk(Upper(e.clone(), false)),
                    Lower(l, false) if int && *e == l - &one => mk(Lower(e.clone(), false)),
                    Ne(n) if n == e => Lit::True,
                    _ => return None,
                }
            }
        }
        (Ne(n), other) | (other, Ne(n)) => {
            if contains(other, n) {
                Lit::True
            } else {
                mk(Ne(n.clone()))
            }
        }
    };
    Some(r)
}

impl fmt::Display for Conj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "true");
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " && ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Dnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.len() {
            0 => write!(f, "false"),
            1 => write!(f, "{}", self.0[0]),
            _ => {
                for (i, c) in self.0.iter().enumerate() {
                    if i > 0 {
                        write!(f, " || ")?;
                    }
                    if c.0.len() > 1 {
                        write!(f, "({c})")?;
                    } else {
                        write!(f, "{c}")?;
                    }
                }
                Ok(())
            }
        }
    }
}
