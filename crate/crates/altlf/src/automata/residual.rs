//! Hash-consed residual formulas and the transition function δ.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;

use crate::arith::{is_sat_atoms, Atom, Lit};
use crate::formula::{Declarations, Formula};

pub type Id = usize;

/// A residual formula over `V_pre ∪ V_cur`. Atoms are referred to by index
/// into the alphabet's atom list, with a polarity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    True,
    False,
    Lit(usize, bool),
    And(Vec<Id>),
    Or(Vec<Id>),
    Next(Id),
    WeakNext(Id),
    Until(Id, Id),
    Globally(Id),
    Eventually(Id),
}

/// A symbol of `Σ_λ`: literals plus an optional end marker (`Some(true)` is λ).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Symbol {
    pub lits: Vec<(usize, bool)>,
    pub last: Option<bool>,
}

impl Symbol {
    fn lit(i: usize, p: bool) -> Symbol {
        Symbol { lits: vec![(i, p)], last: None }
    }

    fn end(last: bool) -> Symbol {
        Symbol { lits: Vec::new(), last: Some(last) }
    }

    /// Union, or `None` if it contains complementary literals or both λ, ¬λ.
    fn union(&self, other: &Symbol) -> Option<Symbol> {
        let last = match (self.last, other.last) {
            (Some(a), Some(b)) if a != b => return None,
            (a, b) => a.or(b),
        };
        let mut lits = self.lits.clone();
        lits.extend(other.lits.iter().copied());
        lits.sort();
        lits.dedup();
        if lits.windows(2).any(|w| w[0].0 == w[1].0) {
            return None;
        }
        Some(Symbol { lits, last })
    }
}

pub struct Arena {
    nodes: Vec<Node>,
    index: HashMap<Node, Id>,
    /// Canonical atoms, one per atom/negation pair.
    pub atoms: Vec<Atom>,
    delta_cache: HashMap<Id, Rc<Vec<(Id, Symbol)>>>,
    sat_cache: HashMap<Vec<(usize, bool)>, bool>,
}

pub const TRUE: Id = 0;
pub const FALSE: Id = 1;

impl Default for Arena {
    fn default() -> Self {
        Self::new()
    }
}

impl Arena {
    pub fn new() -> Self {
        let mut a = Arena {
            nodes: Vec::new(),
            index: HashMap::new(),
            atoms: Vec::new(),
            delta_cache: HashMap::new(),
            sat_cache: HashMap::new(),
        };
        a.intern(Node::True);
        a.intern(Node::False);
        a
    }

    pub fn node(&self, id: Id) -> &Node {
        &self.nodes[id]
    }

    fn intern(&mut self, n: Node) -> Id {
        if let Some(&id) = self.index.get(&n) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(n.clone());
        self.index.insert(n, id);
        id
    }

    pub fn atom_literal(&mut self, a: Atom) -> (usize, bool) {
        if let Some(i) = self.atoms.iter().position(|b| *b == a) {
            return (i, true);
        }
        let n = a.neg();
        if let Some(i) = self.atoms.iter().position(|b| *b == n) {
            return (i, false);
        }
        self.atoms.push(a);
        (self.atoms.len() - 1, true)
    }

    pub fn literal_atom(&self, (i, p): (usize, bool)) -> Atom {
        if p {
            self.atoms[i].clone()
        } else {
            self.atoms[i].neg()
        }
    }

    pub fn and(&mut self, items: Vec<Id>) -> Id {
        self.junction(items, true)
    }

    pub fn or(&mut self, items: Vec<Id>) -> Id {
        self.junction(items, false)
    }

    fn junction(&mut self, items: Vec<Id>, conj: bool) -> Id {
        let (unit, zero) = if conj { (TRUE, FALSE) } else { (FALSE, TRUE) };
        let mut flat = Vec::new();
        for id in items {
            match &self.nodes[id] {
                Node::And(xs) if conj => flat.extend(xs.iter().copied()),
                Node::Or(xs) if !conj => flat.extend(xs.iter().copied()),
                _ if id == zero => return zero,
                _ if id == unit => {}
                _ => flat.push(id),
            }
        }
        flat.sort();
        flat.dedup();
        // complementary literals
        for w in flat.windows(2) {
            if let (Node::Lit(i, p), Node::Lit(j, q)) = (&self.nodes[w[0]], &self.nodes[w[1]]) {
                if i == j && p != q {
                    return zero;
                }
            }
        }
        match flat.len() {
            0 => unit,
            1 => flat[0],
            _ => self.intern(if conj { Node::And(flat) } else { Node::Or(flat) }),
        }
    }

    pub fn lit(&mut self, i: usize, p: bool) -> Id {
        self.intern(Node::Lit(i, p))
    }

    pub fn next(&mut self, a: Id) -> Id {
        self.intern(Node::Next(a))
    }

    pub fn weak_next(&mut self, a: Id) -> Id {
        self.intern(Node::WeakNext(a))
    }

    pub fn until(&mut self, a: Id, b: Id) -> Id {
        match b {
            TRUE => TRUE,
            FALSE => FALSE,
            _ if a == TRUE => self.intern(Node::Eventually(b)),
            _ if a == FALSE => b,
            _ => self.intern(Node::Until(a, b)),
        }
    }

    pub fn globally(&mut self, a: Id) -> Id {
        match a {
            TRUE | FALSE => a,
            _ => self.intern(Node::Globally(a)),
        }
    }

    pub fn eventually(&mut self, a: Id) -> Id {
        match a {
            TRUE | FALSE => a,
            _ => self.intern(Node::Eventually(a)),
        }
    }

    /// Interns a back-transformed formula in NNF.
    pub fn from_formula(&mut self, f: &Formula, decls: &Declarations) -> Id {
        match f {
            Formula::True => TRUE,
            Formula::False => FALSE,
            Formula::Atom(c) | Formula::NegAtom(c) => {
                let pos = matches!(f, Formula::Atom(_));
                match Atom::from_constraint(c, decls) {
                    Lit::True => {
                        if pos {
                            TRUE
                        } else {
                            FALSE
                        }
                    }
                    Lit::False => {
                        if pos {
                            FALSE
                        } else {
                            TRUE
                        }
                    }
                    Lit::Atom(a) => {
                        let (i, p) = self.atom_literal(a);
                        self.lit(i, p == pos)
                    }
                }
            }
            Formula::Not(_) => {
                let n = crate::formula::to_nnf(f);
                self.from_formula(&n, decls)
            }
            Formula::And(a, b) => {
                let (x, y) = (self.from_formula(a, decls), self.from_formula(b, decls));
                self.and(vec![x, y])
            }
            Formula::Or(a, b) => {
                let (x, y) = (self.from_formula(a, decls), self.from_formula(b, decls));
                self.or(vec![x, y])
            }
            Formula::Next(a) => {
                let x = self.from_formula(a, decls);
                self.next(x)
            }
            Formula::WeakNext(a) => {
                let x = self.from_formula(a, decls);
                self.weak_next(x)
            }
            Formula::Until(a, b) => {
                let (x, y) = (self.from_formula(a, decls), self.from_formula(b, decls));
                self.until(x, y)
            }
            Formula::Globally(a) => {
                let x = self.from_formula(a, decls);
                self.globally(x)
            }
            Formula::Eventually(a) => {
                let x = self.from_formula(a, decls);
                self.eventually(x)
            }
        }
    }

    fn symbol_sat(&mut self, s: &Symbol) -> bool {
        if let Some(&r) = self.sat_cache.get(&s.lits) {
            return r;
        }
        let atoms: Vec<Atom> = s.lits.iter().map(|&l| self.literal_atom(l)).collect();
        let r = is_sat_atoms(&atoms);
        self.sat_cache.insert(s.lits.clone(), r);
        r
    }

    fn product(&mut self, r1: &[(Id, Symbol)], r2: &[(Id, Symbol)], conj: bool) -> Vec<(Id, Symbol)> {
        let mut out = Vec::new();
        for (f1, s1) in r1 {
            for (f2, s2) in r2 {
                let Some(s) = s1.union(s2) else { continue };
                if !self.symbol_sat(&s) {
                    continue;
                }
                let f = if conj { self.and(vec![*f1, *f2]) } else { self.or(vec![*f1, *f2]) };
                out.push((f, s));
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// The transition function δ, memoized per residual.
    pub fn delta(&mut self, id: Id) -> Rc<Vec<(Id, Symbol)>> {
        if let Some(r) = self.delta_cache.get(&id) {
            return r.clone();
        }
        let out = match self.nodes[id].clone() {
            Node::True => vec![(TRUE, Symbol::default())],
            Node::False => vec![(FALSE, Symbol::default())],
            Node::Lit(i, p) => vec![(TRUE, Symbol::lit(i, p)), (FALSE, Symbol::lit(i, !p))],
            Node::And(xs) | Node::Or(xs) => {
                let conj = matches!(self.nodes[id], Node::And(_));
                let mut acc = self.delta(xs[0]).as_ref().clone();
                for &x in &xs[1..] {
                    let d = self.delta(x);
                    acc = self.product(&acc, &d, conj);
                }
                acc
            }
            Node::Next(a) => vec![(a, Symbol::end(false)), (FALSE, Symbol::end(true))],
            Node::WeakNext(a) => vec![(a, Symbol::end(false)), (TRUE, Symbol::end(true))],
            Node::Globally(a) => {
                let da = self.delta(a);
                let wx = self.weak_next(id);
                let dx = self.delta(wx);
                self.product(&da, &dx, true)
            }
            Node::Until(a, b) => {
                let db = self.delta(b);
                let da = self.delta(a);
                let x = self.next(id);
                let dx = self.delta(x);
                let step = self.product(&da, &dx, true);
                self.product(&db, &step, false)
            }
            Node::Eventually(a) => {
                let da = self.delta(a);
                let x = self.next(id);
                let dx = self.delta(x);
                self.product(&da, &dx, false)
            }
        };
        let out = Rc::new(out);
        self.delta_cache.insert(id, out.clone());
        out
    }

    /// Splits a residual into its top-level disjuncts (distributing ∧ over ∨).
    pub fn split(&mut self, id: Id) -> Vec<Id> {
        match self.nodes[id].clone() {
            Node::False => vec![],
            Node::Or(xs) => {
                let mut out: Vec<Id> = xs.into_iter().flat_map(|x| self.split(x)).collect();
                out.sort();
                out.dedup();
                out
            }
            Node::And(xs) => {
                let mut acc = vec![TRUE];
                for x in xs {
                    let parts = self.split(x);
                    let mut next = Vec::new();
                    for a in &acc {
                        for p in &parts {
                            let c = self.and(vec![*a, *p]);
                            if c != FALSE {
                                next.push(c);
                            }
                        }
                    }
                    next.sort();
                    next.dedup();
                    acc = next;
                }
                acc
            }
            _ => vec![id],
        }
    }

    pub fn display(&self, id: Id) -> Display<'_> {
        Display { arena: self, id }
    }
}

pub struct Display<'a> {
    arena: &'a Arena,
    id: Id,
}

impl fmt::Display for Display<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.arena;
        let sub = |id| Display { arena: a, id };
        match a.node(self.id) {
            Node::True => write!(f, "true"),
            Node::False => write!(f, "false"),
            Node::Lit(i, p) => write!(f, "{}", a.literal_atom((*i, *p))),
            Node::And(xs) | Node::Or(xs) => {
                let op = if matches!(a.node(self.id), Node::And(_)) { " && " } else { " || " };
                write!(f, "(")?;
                for (k, x) in xs.iter().enumerate() {
                    if k > 0 {
                        write!(f, "{op}")?;
                    }
                    write!(f, "{}", sub(*x))?;
                }
                write!(f, ")")
            }
            Node::Next(x) => write!(f, "X {}", sub(*x)),
            Node::WeakNext(x) => write!(f, "wX {}", sub(*x)),
            Node::Until(x, y) => write!(f, "({} U {})", sub(*x), sub(*y)),
            Node::Globally(x) => write!(f, "G {}", sub(*x)),
            Node::Eventually(x) => write!(f, "F {}", sub(*x)),
        }
    }
}
