//! Constraint graphs: nodes pair a DFA state with a formula over the initial
//! copies `V₀` (tag `Initial`, printed `x₀`) and the current values `V`
//! (plain `x`). Successors come from the DFA edges through [`update`] and are
//! merged into an existing node of the same state when the formulas are
//! equivalent, logically or up to a cutoff.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::arith::{Atom, Bound, Dnf, Lit, Rel};
use crate::automata::Automaton;
use crate::error::{Error, Result};
use crate::formula::{Declarations, Tag, VarRef};

fn v(name: &std::sync::Arc<str>) -> VarRef {
    VarRef::plain(name.clone(), 0)
}

fn atom_lit(l: Lit) -> Option<Atom> {
    match l {
        Lit::Atom(a) => Some(a),
        _ => None,
    }
}

/// `φ_init = ⋀ v = v₀`.
pub fn phi_init(decls: &Declarations) -> Dnf {
    let atoms = decls
        .iter()
        .filter_map(|(name, sort)| {
            let e = crate::arith::LinExpr::var(v(name)).sub(&crate::arith::LinExpr::var(VarRef::initial(name.clone())));
            atom_lit(Atom::new(e, Rel::Eq, sort == crate::formula::Sort::Int))
        })
        .collect();
    Dnf::conj(atoms)
}

/// `⋀ v = α(v)`, the seed of the per-assignment graphs over ℤ.
pub fn seed_of(decls: &Declarations, a: &crate::trace::Assignment) -> Dnf {
    let atoms = decls
        .iter()
        .filter_map(|(name, sort)| {
            let e = crate::arith::LinExpr::var(v(name)).add_const(&-a[name].clone());
            atom_lit(Atom::new(e, Rel::Eq, sort == crate::formula::Sort::Int))
        })
        .collect();
    Dnf::conj(atoms)
}

/// `∃U. φ(U) ∧ label(U, V)`: the previous values are renamed apart, the
/// label's `pre` copies read them and its `cur` copies become `V`.
pub fn update(phi: &Dnf, label: &Dnf) -> Dnf {
    let old = |x: &VarRef| x.with_tag(Tag::Bound(0));
    let before = phi.map_vars(&mut |x| if x.tag == Tag::Plain(0) { old(x) } else { x.clone() });
    let step = label.map_vars(&mut |x| match x.tag {
        Tag::Pre => old(x),
        Tag::Cur => x.with_tag(Tag::Plain(0)),
        _ => x.clone(),
    });
    let joined = before.and(&step);
    let bound: Vec<VarRef> = joined.vars().into_iter().filter(|x| matches!(x.tag, Tag::Bound(_))).collect();
    joined.exists(&bound)
}

/// Cutoff: difference constants beyond `k` are capped at `k`, and bounds on a
/// single variable beyond `[lo, hi]` are capped at the interval's ends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cutoff {
    pub k: BigRational,
    pub lo: Option<BigRational>,
    pub hi: Option<BigRational>,
}

impl Cutoff {
    /// `K = max{k − k′}` over the constants (with 0) and bounds `[min − K, max + K]`.
    pub fn from_constants(constants: &BTreeSet<BigRational>) -> Cutoff {
        let mut all = constants.clone();
        all.insert(BigRational::zero());
        let (min, max) = (all.first().unwrap().clone(), all.last().unwrap().clone());
        let k = &max - &min;
        Cutoff { lo: Some(&min - &k), hi: Some(&max + &k), k }
    }

    /// Only the difference constants are capped.
    pub fn gaps(k: BigRational) -> Cutoff {
        Cutoff { k, lo: None, hi: None }
    }

    fn cap_atom(&self, a: &Atom) -> Lit {
        let Some((form, b)) = a.as_bound() else { return Lit::Atom(a.clone()) };
        let unit = |c: &BigRational| c.abs() == BigRational::from_integer(1.into());
        let capped = match (form.len(), &b) {
            (2, Bound::Lower(c, s)) if unit(&form[0].1) && form[0].1 == -&form[1].1 && c > &self.k => {
                Bound::Lower(self.k.clone(), *s)
            }
            (2, Bound::Upper(c, s)) if unit(&form[0].1) && form[0].1 == -&form[1].1 && *c < -&self.k => {
                Bound::Upper(-&self.k, *s)
            }
            (1, Bound::Lower(c, s)) if unit(&form[0].1) => match &self.hi {
                Some(hi) if c > hi => Bound::Lower(hi.clone(), *s),
                _ => return Lit::Atom(a.clone()),
            },
            (1, Bound::Upper(c, s)) if unit(&form[0].1) => match &self.lo {
                Some(lo) if c < lo => Bound::Upper(lo.clone(), *s),
                _ => return Lit::Atom(a.clone()),
            },
            _ => return Lit::Atom(a.clone()),
        };
        Atom::from_bound(&form, &capped, a.int)
    }

    pub fn apply(&self, d: &Dnf) -> Dnf {
        Dnf::or_all(d.disjuncts().iter().map(|c| Dnf::and_all(c.atoms().iter().map(|a| Dnf::lit(self.cap_atom(a))))))
            .simplify()
    }
}

/// Equivalence after capping gap constants beyond `k`.
pub fn cutoff_equivalent(a: &Dnf, b: &Dnf, k: BigRational) -> bool {
    let c = Cutoff::gaps(k);
    c.apply(a).is_equivalent(&c.apply(b))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Logical,
    Cutoff(Cutoff),
}

impl Equivalence {
    fn normalize(&self, d: Dnf) -> Dnf {
        match self {
            Equivalence::Logical => d,
            Equivalence::Cutoff(c) => c.apply(&d),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CgNode {
    pub state: usize,
    pub formula: Dnf,
    pub is_final: bool,
}

#[derive(Clone, Debug)]
pub struct CgEdge {
    pub from: usize,
    pub to: usize,
    pub label: Dnf,
}

#[derive(Clone, Debug)]
pub struct ConstraintGraph {
    pub nodes: Vec<CgNode>,
    pub edges: Vec<CgEdge>,
    pub initial: usize,
}

/// Edge labels of every DFA state, as formulas over `pre`/`cur` copies, with
/// the register shift constraints conjoined.
#[derive(Clone, Debug)]
pub struct EdgeLabels {
    labels: Vec<Vec<(usize, Dnf)>>,
}

impl EdgeLabels {
    pub fn new(a: &Automaton, frame: &[Atom]) -> EdgeLabels {
        let frame = Dnf::conj(frame.to_vec());
        let labels = (0..a.dfa.len())
            .map(|s| a.edge_labels(s).into_iter().map(|(t, cubes)| (t, a.cube_dnf(&cubes).and(&frame))).collect())
            .collect();
        EdgeLabels { labels }
    }

    pub fn of(&self, s: usize) -> &[(usize, Dnf)] {
        &self.labels[s]
    }
}

/// Builds `CG(p0)` from `seed`. At most `node_limit` nodes besides the
/// initial one are created.
pub fn build_constraint_graph(
    a: &Automaton,
    labels: &EdgeLabels,
    p0: usize,
    seed: Dnf,
    eq: &Equivalence,
    node_limit: usize,
) -> Result<ConstraintGraph> {
    let seed = eq.normalize(seed);
    let mut nodes = vec![CgNode { state: p0, is_final: a.dfa.finals[p0], formula: seed.clone() }];
    let mut exact: HashMap<(usize, Dnf), usize> = HashMap::from([((p0, seed), 0)]);
    let mut by_state: HashMap<usize, Vec<usize>> = HashMap::from([(p0, vec![0])]);
    let mut edges = Vec::new();
    let mut todo = VecDeque::from([0usize]);
    while let Some(n) = todo.pop_front() {
        let (state, phi) = (nodes[n].state, nodes[n].formula.clone());
        for (t, label) in labels.of(state) {
            let next = update(&phi, label);
            if !next.is_sat() {
                continue;
            }
            let next = eq.normalize(next);
            let found = exact.get(&(*t, next.clone())).copied().or_else(|| {
                by_state.get(t).and_then(|ids| ids.iter().copied().find(|&m| nodes[m].formula.is_equivalent(&next)))
            });
            let target = match found {
                Some(m) => m,
                None => {
                    if nodes.len() > node_limit {
                        return Err(Error::NodeLimit(node_limit));
                    }
                    nodes.push(CgNode { state: *t, is_final: a.dfa.finals[*t], formula: next.clone() });
                    let id = nodes.len() - 1;
                    exact.insert((*t, next), id);
                    by_state.entry(*t).or_default().push(id);
                    todo.push_back(id);
                    id
                }
            };
            edges.push(CgEdge { from: n, to: target, label: label.clone() });
        }
    }
    Ok(ConstraintGraph { nodes, edges, initial: 0 })
}

impl ConstraintGraph {
    /// `(FSat, FUns)`: the final, respectively non-final, node formulas
    /// projected onto `V₀`.
    pub fn fsat_funs(&self, decls: &Declarations) -> (Dnf, Dnf) {
        let current: Vec<VarRef> = decls.names().map(v).collect();
        let project = |fin: bool| {
            Dnf::or_all(self.nodes.iter().filter(|n| n.is_final == fin).map(|n| n.formula.exists(&current))).simplify()
        };
        (project(true), project(false))
    }

    /// Whether some non-empty path from the initial node reaches a final,
    /// respectively non-final, node.
    pub fn reachable_finality(&self) -> (bool, bool) {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<usize> = self.edges.iter().filter(|e| e.from == self.initial).map(|e| e.to).collect();
        let (mut fin, mut nonfin) = (false, false);
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut seen[n], true) {
                continue;
            }
            if self.nodes[n].is_final {
                fin = true;
            } else {
                nonfin = true;
            }
            stack.extend(self.edges.iter().filter(|e| e.from == n).map(|e| e.to));
        }
        (fin, nonfin)
    }
}

/// The history constraint of a word read from `p0`: `update` folded along
/// the letters, starting from `φ_init`. Used to check graphs, not at runtime.
pub fn history(a: &Automaton, frame: &[Atom], p0: usize, word: &[usize]) -> (usize, Dnf) {
    let frame = Dnf::conj(frame.to_vec());
    let mut s = p0;
    let mut phi = phi_init(&a.decls);
    for &l in word {
        let letter = &a.alphabet.letters(a.dfa.uses_initial_regime(s))[l];
        phi = update(&phi, &Dnf::conj(a.cube_atoms(letter)).and(&frame));
        s = a.dfa.step(s, l);
    }
    (s, phi)
}
