//! Automata for back-transformed properties: δ, the NFA, the alphabets `Θ`
//! and `Θ_cur`, and the DFA obtained by subset construction.

mod alphabet;
mod residual;

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::arith::{Atom, Dnf, Paired, Valuation};
use crate::error::{Error, Result};
use crate::formula::{Declarations, Formula};
use crate::trace::{Assignment, Trace};
use crate::verdict::Verdict;

pub use alphabet::{covers, merge_cubes, Alphabet, Letter};
pub use residual::{Arena, Id, Node, Symbol, FALSE, TRUE};

#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_atoms: usize,
    pub max_states: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_atoms: 18, max_states: 200_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NfaState {
    Residual(Id),
    /// `q₊`: the word ended and the obligation was met.
    Plus,
    /// Met as soon as one more letter is read: reached over a letter that
    /// promised a successor, so the word may not end here.
    Owed,
}

/// The NFA. `q₋` is identified with the residual `⊥`: both are non-final and
/// accept nothing.
#[derive(Clone, Debug)]
pub struct Nfa {
    pub states: Vec<NfaState>,
    pub initial: usize,
    pub edges: Vec<(usize, Vec<(usize, bool)>, usize)>,
    outgoing: Vec<Vec<usize>>,
}

impl Nfa {
    pub fn is_final(&self, s: usize) -> bool {
        matches!(self.states[s], NfaState::Plus | NfaState::Residual(TRUE))
    }

    pub fn is_bottom(&self, s: usize) -> bool {
        self.states[s] == NfaState::Residual(FALSE)
    }

    pub fn outgoing(&self, s: usize) -> impl Iterator<Item = &(usize, Vec<(usize, bool)>, usize)> + '_ {
        self.outgoing[s].iter().map(move |&e| &self.edges[e])
    }
}

pub fn build_nfa(arena: &mut Arena, q0: Id, limits: &Limits) -> Result<Nfa> {
    let mut states = Vec::new();
    let mut index: HashMap<NfaState, usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut intern = |s: NfaState, states: &mut Vec<NfaState>, todo: &mut VecDeque<usize>| -> usize {
        *index.entry(s).or_insert_with(|| {
            states.push(s);
            todo.push_back(states.len() - 1);
            states.len() - 1
        })
    };
    let mut todo = VecDeque::new();
    let initial = intern(NfaState::Residual(q0), &mut states, &mut todo);
    while let Some(s) = todo.pop_front() {
        if states.len() > limits.max_states {
            return Err(Error::StateLimit(limits.max_states));
        }
        let q = match states[s] {
            NfaState::Residual(q) => q,
            NfaState::Owed => {
                let tgt = intern(NfaState::Residual(TRUE), &mut states, &mut todo);
                edges.push((s, Vec::new(), tgt));
                continue;
            }
            NfaState::Plus => continue,
        };
        for (t, sym) in arena.delta(q).iter() {
            if sym.last == Some(true) {
                let target = if *t == TRUE { NfaState::Plus } else { NfaState::Residual(FALSE) };
                let tgt = intern(target, &mut states, &mut todo);
                edges.push((s, sym.lits.clone(), tgt));
                continue;
            }
            if *t == TRUE && sym.last == Some(false) {
                let tgt = intern(NfaState::Owed, &mut states, &mut todo);
                edges.push((s, sym.lits.clone(), tgt));
                continue;
            }
            let parts = arena.split(*t);
            if parts.is_empty() {
                let tgt = intern(NfaState::Residual(FALSE), &mut states, &mut todo);
                edges.push((s, sym.lits.clone(), tgt));
            }
            for p in parts {
                let tgt = intern(NfaState::Residual(p), &mut states, &mut todo);
                edges.push((s, sym.lits.clone(), tgt));
            }
        }
    }
    edges.sort();
    edges.dedup();
    let mut outgoing = vec![Vec::new(); states.len()];
    for (k, e) in edges.iter().enumerate() {
        outgoing[e.0].push(k);
    }
    Ok(Nfa { states, initial, edges, outgoing })
}

/// The DFA over `Θ_cur · Θ*`. When the property has lookback the initial
/// state is kept apart from the subset `{q₀}` because it reads `Θ_cur`.
#[derive(Clone, Debug)]
pub struct Dfa {
    /// NFA states of each DFA state, without `⊥`.
    pub states: Vec<BTreeSet<usize>>,
    pub finals: Vec<bool>,
    pub initial: usize,
    pub separate_initial: bool,
    /// `trans[s][k]`: successor on the `k`-th letter of the state's regime.
    pub trans: Vec<Vec<usize>>,
}

impl Dfa {
    pub fn uses_initial_regime(&self, s: usize) -> bool {
        self.separate_initial && s == self.initial
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn step(&self, s: usize, letter: usize) -> usize {
        self.trans[s][letter]
    }

    pub fn run(&self, word: &[usize]) -> usize {
        let mut s = self.initial;
        for &l in word {
            s = self.step(s, l);
        }
        s
    }

    /// Successors reachable in one or more steps.
    pub fn reachable_from(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut todo: Vec<usize> = self.trans[s].clone();
        while let Some(t) = todo.pop() {
            if !seen[t] {
                seen[t] = true;
                todo.extend(self.trans[t].iter().copied());
            }
        }
        seen
    }

    /// Verdict labels by reachability of final and non-final states; sound
    /// only without lookback.
    pub fn reachability_labels(&self) -> Vec<Verdict> {
        (0..self.len())
            .map(|s| {
                let r = self.reachable_from(s);
                let any_final = (0..self.len()).any(|t| r[t] && self.finals[t]);
                let any_nonfinal = (0..self.len()).any(|t| r[t] && !self.finals[t]);
                match (self.finals[s], any_nonfinal, any_final) {
                    (true, false, _) => Verdict::PS,
                    (true, true, _) => Verdict::CS,
                    (false, _, true) => Verdict::CV,
                    (false, _, false) => Verdict::PV,
                }
            })
            .collect()
    }
}

pub fn build_dfa(nfa: &Nfa, alphabet: &Alphabet, limits: &Limits) -> Result<Dfa> {
    let separate_initial = alphabet.has_lookback();
    let mut states: Vec<BTreeSet<usize>> = Vec::new();
    let mut index: HashMap<BTreeSet<usize>, usize> = HashMap::new();
    let mut trans: Vec<Vec<usize>> = Vec::new();
    let start: BTreeSet<usize> = [nfa.initial].into_iter().collect();
    states.push(start.clone());
    trans.push(Vec::new());
    if !separate_initial {
        index.insert(start, 0);
    }
    let mut todo = VecDeque::from([0usize]);
    while let Some(s) = todo.pop_front() {
        let initial_regime = separate_initial && s == 0;
        let mut row = Vec::new();
        for letter in alphabet.letters(initial_regime) {
            let mut next = BTreeSet::new();
            for &q in &states[s] {
                for (_, sym, t) in nfa.outgoing(q) {
                    if !nfa.is_bottom(*t) && covers(letter, sym) {
                        next.insert(*t);
                    }
                }
            }
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    if states.len() >= limits.max_states {
                        return Err(Error::StateLimit(limits.max_states));
                    }
                    states.push(next.clone());
                    trans.push(Vec::new());
                    index.insert(next, states.len() - 1);
                    todo.push_back(states.len() - 1);
                    states.len() - 1
                }
            };
            row.push(id);
        }
        trans[s] = row;
    }
    let finals = states.iter().map(|p| p.iter().any(|&q| nfa.is_final(q))).collect();
    Ok(Dfa { states, finals, initial: 0, separate_initial, trans })
}

/// A compiled property: residual arena, NFA, alphabet and DFA.
#[derive(Clone)]
pub struct Automaton {
    pub decls: Declarations,
    pub nfa: Nfa,
    pub alphabet: Alphabet,
    pub dfa: Dfa,
    /// Printed NFA states.
    pub state_names: Vec<String>,
}

impl std::fmt::Debug for Automaton {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Automaton")
            .field("nfa_states", &self.state_names)
            .field("dfa_states", &self.dfa.states)
            .finish()
    }
}

/// Compiles a back-transformed NNF property.
pub fn compile(back: &Formula, decls: &Declarations, limits: &Limits) -> Result<Automaton> {
    let mut arena = Arena::new();
    let q0 = arena.from_formula(back, decls);
    let nfa = build_nfa(&mut arena, q0, limits)?;
    let alphabet = Alphabet::new(arena.atoms.clone(), limits.max_atoms)?;
    let dfa = build_dfa(&nfa, &alphabet, limits)?;
    let state_names = nfa
        .states
        .iter()
        .map(|s| match s {
            NfaState::Plus => "q+".to_string(),
            NfaState::Owed => "X true".to_string(),
            NfaState::Residual(FALSE) => "false".to_string(),
            NfaState::Residual(id) => arena.display(*id).to_string(),
        })
        .collect();
    Ok(Automaton { decls: decls.clone(), nfa, alphabet, dfa, state_names })
}

impl Automaton {
    fn letter_bits(&self, val: &impl Valuation, initial: bool) -> Letter {
        self.alphabet
            .atoms
            .iter()
            .zip(&self.alphabet.cur_only)
            .map(|(a, &cur)| {
                if initial && !cur {
                    None
                } else {
                    Some(a.eval(val).expect("assignment covers the declared variables"))
                }
            })
            .collect()
    }

    /// Index of the letter satisfied by `⟨pre, cur⟩`, in the regime of the
    /// position (`Θ_cur` when `pre` is `None`).
    pub fn letter_of(&self, pre: Option<&Assignment>, cur: &Assignment) -> usize {
        let initial = pre.is_none();
        let bits = self.letter_bits(&Paired { pre, cur }, initial);
        self.alphabet.index_of(&bits, initial).expect("every assignment satisfies exactly one letter")
    }

    /// The unique consistent word of a non-empty trace.
    pub fn trace_to_word(&self, trace: &Trace) -> Vec<usize> {
        (0..trace.len()).map(|i| self.letter_of(if i == 0 { None } else { Some(&trace[i - 1]) }, &trace[i])).collect()
    }

    pub fn run(&self, trace: &Trace) -> usize {
        self.dfa.run(&self.trace_to_word(trace))
    }

    pub fn accepts(&self, trace: &Trace) -> bool {
        self.dfa.finals[self.run(trace)]
    }

    /// Outgoing edges of a DFA state grouped by target, each labelled by a
    /// union of cubes over the atoms.
    pub fn edge_labels(&self, s: usize) -> Vec<(usize, Vec<Letter>)> {
        let initial = self.dfa.uses_initial_regime(s);
        let letters = self.alphabet.letters(initial);
        let mut by_target: Vec<(usize, Vec<usize>)> = Vec::new();
        for (k, &t) in self.dfa.trans[s].iter().enumerate() {
            match by_target.iter_mut().find(|(x, _)| *x == t) {
                Some((_, v)) => v.push(k),
                None => by_target.push((t, vec![k])),
            }
        }
        by_target.sort();
        by_target.into_iter().map(|(t, members)| (t, merge_cubes(letters, &members))).collect()
    }

    pub fn cube_atoms(&self, cube: &[Option<bool>]) -> Vec<Atom> {
        self.alphabet.atoms_of(cube)
    }

    pub fn cube_dnf(&self, cubes: &[Letter]) -> Dnf {
        Dnf::or_all(cubes.iter().map(|c| Dnf::conj(self.cube_atoms(c))))
    }

    /// Letter printed as a set of atoms.
    pub fn letter_string(&self, l: &[Option<bool>]) -> String {
        let atoms: Vec<String> = self.cube_atoms(l).iter().map(|a| a.to_string()).collect();
        format!("{{{}}}", atoms.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_property, to_lookback, to_nnf, Sort};
    use num_rational::BigRational;

    fn compile_src(src: &str) -> Automaton {
        let d = Declarations::from_pairs([("x", Sort::Rat), ("y", Sort::Rat)]);
        let f = to_lookback(&to_nnf(&parse_property(src, &d).unwrap()));
        compile(&f, &d, &Limits::default()).unwrap()
    }

    #[test]
    fn lookahead_example_nfa_and_dfa() {
        let a = compile_src("G(x' >= x) && F(x = 2)");
        // q0, q1, q2, q+, ⊥
        assert_eq!(a.nfa.states.len(), 5, "{:?}", a.state_names);
        assert_eq!(a.dfa.len(), 4, "{:?}", a.dfa.states);
        assert_eq!(a.alphabet.theta_cur.len(), 2);
        assert_eq!(a.alphabet.theta.len(), 4);
        assert_eq!(a.dfa.finals.iter().filter(|f| **f).count(), 1);
    }

    #[test]
    fn no_lookahead_example() {
        let a = compile_src("(y >= 0) U (x > y && G(x > y))");
        assert!(!a.dfa.separate_initial);
        assert_eq!(a.dfa.len(), 4);
        let labels = a.dfa.reachability_labels();
        let mut sorted = labels.clone();
        sorted.sort();
        assert_eq!(sorted, vec![Verdict::CS, Verdict::CS, Verdict::CV, Verdict::PV]);
        assert_eq!(labels[a.dfa.initial], Verdict::CV);
    }

    #[test]
    fn strong_next_needs_a_successor() {
        // the atom folds to ⊥, leaving X_s ⊤: only the end of the word can fail
        let a = compile_src("!(x' < x') || x = 0");
        let tr = |xs: &[i64]| -> Trace {
            xs.iter()
                .map(|&v| {
                    let mut m = Assignment::new();
                    m.insert("x".into(), BigRational::from_integer(v.into()));
                    m.insert("y".into(), BigRational::from_integer(0.into()));
                    m
                })
                .collect()
        };
        assert!(!a.accepts(&tr(&[1])));
        assert!(a.accepts(&tr(&[0])));
        assert!(a.accepts(&tr(&[1, 1])));
        assert!(a.accepts(&tr(&[1, 5, 2])));
    }

    #[test]
    fn trivial_properties() {
        let t = compile_src("true");
        assert_eq!(t.dfa.len(), 1);
        assert!(t.dfa.finals[0]);
        assert_eq!(t.dfa.reachability_labels(), vec![Verdict::PS]);
        let f = compile_src("false");
        assert_eq!(f.dfa.reachability_labels()[f.dfa.initial], Verdict::PV);
    }
}
