//! Compiles a property once and monitors traces against it.
//!
//! Without lookahead the verdict of a DFA state is fixed by which states it
//! can reach. With lookahead the verdict also depends on the data: the
//! constraint graph of the current state, projected to `FSat`/`FUns`, is
//! evaluated on the last assignment. Over ℤ with monotonicity constraints the
//! graph is instead rebuilt from the last assignment under a cutoff relation.

mod class;

use std::borrow::Borrow;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use num_rational::BigRational;

use crate::arith::{classify_atoms, Atom, Dnf, Lit, Tagged};
use crate::automata::{compile, Automaton, Limits};
use crate::error::{Error, Result};
use crate::formula::{
    lower_lookahead_online, max_lookahead, to_lookback, to_nnf, Declarations, Formula, RegisterMap, Sort, Tag,
};
use crate::summary::{build_constraint_graph, phi_init, seed_of, ConstraintGraph, Cutoff, EdgeLabels, Equivalence};
use crate::trace::{Assignment, Trace};
use crate::verdict::Verdict;

pub use class::{detect_class, lag_graph_acyclic, PropertyClass};

/// How verdicts are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Reachability labels of the DFA states; sound only without lookahead.
    NoLookahead,
    /// Constraint graphs under logical equivalence, seeded with `φ_init`.
    Summary,
    /// Per-assignment constraint graphs under the cutoff relation.
    Mcz,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::NoLookahead => "nolookahead",
            Mode::Summary => "summary",
            Mode::Mcz => "mcz",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "nolookahead" => Ok(Mode::NoLookahead),
            "summary" => Ok(Mode::Summary),
            "mcz" => Ok(Mode::Mcz),
            _ => Err(format!("unknown mode `{s}`")),
        }
    }
}

impl PropertyClass {
    /// The mode that is sound and expected to terminate for the class.
    pub fn default_mode(self) -> Option<Mode> {
        match self {
            PropertyClass::NoLookahead => Some(Mode::NoLookahead),
            PropertyClass::McQ | PropertyClass::Ipc | PropertyClass::BoundedLookback | PropertyClass::Unknown => {
                Some(Mode::Summary)
            }
            PropertyClass::McZ => Some(Mode::Mcz),
            PropertyClass::UnsupportedGc => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    /// `None` picks the mode from the detected class.
    pub mode: Option<Mode>,
    pub node_limit: usize,
    pub limits: Limits,
}

impl Default for Options {
    fn default() -> Self {
        Options { mode: None, node_limit: 10_000, limits: Limits::default() }
    }
}

/// `CG(P)` with its anticipation conditions.
#[derive(Debug)]
pub struct Summary {
    pub graph: ConstraintGraph,
    pub fsat: Dnf,
    pub funs: Dnf,
}

type Cached<T> = std::result::Result<Arc<T>, usize>;

/// A compiled property. Shareable across threads; graphs are built lazily
/// and cached per DFA state (or per state and assignment over ℤ).
pub struct Monitor {
    pub decls: Declarations,
    pub class: PropertyClass,
    pub mode: Mode,
    /// Warning when an explicit mode differs from the class's mode.
    pub warning: Option<String>,
    pub registers: RegisterMap,
    pub back: Formula,
    pub automaton: Automaton,
    constants: BTreeSet<BigRational>,
    frame: Vec<Atom>,
    labels: Mutex<Option<Arc<EdgeLabels>>>,
    reach: Vec<Verdict>,
    node_limit: usize,
    summaries: Mutex<HashMap<usize, Cached<Summary>>>,
    per_assignment: Mutex<HashMap<(usize, Vec<BigRational>), Cached<ConstraintGraph>>>,
}

impl fmt::Debug for Monitor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Monitor").field("class", &self.class).field("mode", &self.mode).finish()
    }
}

impl Monitor {
    pub fn new(f: &Formula, decls: &Declarations, opts: &Options) -> Result<Monitor> {
        let nnf = to_nnf(f);
        let (lowered, registers) = lower_lookahead_online(&nnf, decls);
        let back = to_lookback(&lowered);
        let ext = registers.decls.clone();
        let class = detect_class(max_lookahead(&nnf), &lowered, &back, &ext);
        if class == PropertyClass::UnsupportedGc {
            return Err(Error::UnsupportedGc);
        }
        let default = class.default_mode().expect("supported class");
        let mode = opts.mode.unwrap_or(default);
        let warning = (mode != default).then(|| {
            format!("mode `{mode}` overrides `{default}` for a property of class {class}; verdicts may be unsound or undetermined")
        });
        let automaton = compile(&back, &ext, &opts.limits)?;
        let frame = registers
            .frame_atoms()
            .iter()
            .filter_map(|c| match Atom::from_constraint(c, &ext) {
                Lit::Atom(a) => Some(a),
                _ => None,
            })
            .collect();
        let reach = automaton.dfa.reachability_labels();
        Ok(Monitor {
            decls: decls.clone(),
            class,
            mode,
            warning,
            constants: classify_atoms(&lowered, &ext).constants,
            registers,
            back,
            automaton,
            frame,
            labels: Mutex::new(None),
            reach,
            node_limit: opts.node_limit,
            summaries: Mutex::new(HashMap::new()),
            per_assignment: Mutex::new(HashMap::new()),
        })
    }

    /// Declarations including register variables.
    pub fn extended_decls(&self) -> &Declarations {
        &self.registers.decls
    }

    pub fn session(&self) -> Session<&Monitor> {
        Session::new(self)
    }

    fn labels(&self) -> Arc<EdgeLabels> {
        let mut l = self.labels.lock().unwrap();
        l.get_or_insert_with(|| Arc::new(EdgeLabels::new(&self.automaton, &self.frame))).clone()
    }

    /// `CG(P)` under logical equivalence, from `φ_init`.
    pub fn summary(&self, state: usize) -> Result<Arc<Summary>> {
        if let Some(r) = self.summaries.lock().unwrap().get(&state) {
            return r.clone().map_err(Error::NodeLimit);
        }
        let labels = self.labels();
        let seed = phi_init(self.extended_decls());
        let r = build_constraint_graph(&self.automaton, &labels, state, seed, &Equivalence::Logical, self.node_limit)
            .map(|graph| {
                let (fsat, funs) = graph.fsat_funs(self.extended_decls());
                Arc::new(Summary { graph, fsat, funs })
            });
        let cached = match &r {
            Ok(s) => Ok(s.clone()),
            Err(Error::NodeLimit(n)) => Err(*n),
            Err(_) => return r,
        };
        self.summaries.lock().unwrap().insert(state, cached);
        r
    }

    /// The graph from `⋀ v = α(v)` under the cutoff for `α`.
    pub fn assignment_graph(&self, state: usize, a: &Assignment) -> Result<Arc<ConstraintGraph>> {
        let key = (state, a.values().cloned().collect::<Vec<_>>());
        if let Some(r) = self.per_assignment.lock().unwrap().get(&key) {
            return r.clone().map_err(Error::NodeLimit);
        }
        let mut ks = self.constants.clone();
        ks.extend(a.values().cloned());
        let eq = Equivalence::Cutoff(Cutoff::from_constants(&ks));
        let seed = seed_of(self.extended_decls(), a);
        let r =
            build_constraint_graph(&self.automaton, &self.labels(), state, seed, &eq, self.node_limit).map(Arc::new);
        let cached = match &r {
            Ok(g) => Ok(g.clone()),
            Err(Error::NodeLimit(n)) => Err(*n),
            Err(_) => return r,
        };
        self.per_assignment.lock().unwrap().insert(key, cached);
        r
    }

    fn verdict(&self, state: usize, ext: &Assignment) -> Result<Verdict> {
        let is_final = self.automaton.dfa.finals[state];
        match self.mode {
            Mode::NoLookahead => Ok(self.reach[state]),
            Mode::Summary => {
                let s = self.summary(state)?;
                let cond = if is_final { &s.funs } else { &s.fsat };
                let flip = cond.eval(&Tagged(Tag::Initial, ext)).expect("conditions range over V₀");
                Ok(Verdict::from_parts(is_final, flip))
            }
            Mode::Mcz => {
                let g = self.assignment_graph(state, ext)?;
                let (fin, nonfin) = g.reachable_finality();
                Ok(Verdict::from_parts(is_final, if is_final { nonfin } else { fin }))
            }
        }
    }

    /// One verdict per prefix; a node-limit failure stops the run.
    pub fn run(&self, trace: &Trace) -> Result<Vec<Verdict>> {
        let mut s = self.session();
        trace.iter().map(|a| s.step(a)).collect()
    }
}

/// Monitoring state of one trace.
#[derive(Clone)]
pub struct Session<M: Borrow<Monitor>> {
    monitor: M,
    state: usize,
    last: Option<Assignment>,
    len: usize,
}

impl<M: Borrow<Monitor>> Session<M> {
    /// A session over a borrowed or shared monitor (`&Monitor`, `Arc<Monitor>`).
    pub fn new(monitor: M) -> Self {
        let state = monitor.borrow().automaton.dfa.initial;
        Session { monitor, state, last: None, len: 0 }
    }

    fn check(&self, a: &Assignment) -> Result<()> {
        for (name, sort) in self.monitor.borrow().decls.iter() {
            match a.get(name) {
                None => return Err(Error::Trace(format!("instant {}: no value for `{name}`", self.len))),
                Some(v) if sort == Sort::Int && !v.is_integer() => {
                    return Err(Error::Trace(format!("instant {}: `{name}` is int but got {v}", self.len)))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Appends an assignment and returns the verdict of the new prefix. A
    /// node-limit error leaves the session usable for later instants.
    pub fn step(&mut self, a: &Assignment) -> Result<Verdict> {
        self.check(a)?;
        let m = self.monitor.borrow();
        let ext = m.registers.extend_step(self.last.as_ref(), a);
        let letter = m.automaton.letter_of(self.last.as_ref(), &ext);
        self.state = m.automaton.dfa.step(self.state, letter);
        self.last = Some(ext);
        self.len += 1;
        m.verdict(self.state, self.last.as_ref().unwrap())
    }

    pub fn monitor(&self) -> &M {
        &self.monitor
    }

    /// Current DFA state.
    pub fn state(&self) -> usize {
        self.state
    }

    /// The last assignment read, extended with register values.
    pub fn last_extended(&self) -> Option<&Assignment> {
        self.last.as_ref()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Verdicts of every prefix of `trace` in the mode picked for the class.
pub fn monitor_trace(f: &Formula, decls: &Declarations, trace: &Trace) -> Result<Vec<Verdict>> {
    Monitor::new(f, decls, &Options::default())?.run(trace)
}
