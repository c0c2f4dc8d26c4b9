use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::arith::{classify_atoms, AtomClassKind};
use crate::formula::{CompOp, Declarations, Formula, Tag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PropertyClass {
    NoLookahead,
    McQ,
    Ipc,
    BoundedLookback,
    McZ,
    Unknown,
    UnsupportedGc,
}

impl fmt::Display for PropertyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PropertyClass::NoLookahead => "NO_LOOKAHEAD",
            PropertyClass::McQ => "MC_Q",
            PropertyClass::Ipc => "IPC",
            PropertyClass::BoundedLookback => "BOUNDED_LOOKBACK",
            PropertyClass::McZ => "MC_Z",
            PropertyClass::Unknown => "UNKNOWN",
            PropertyClass::UnsupportedGc => "UNSUPPORTED_GC",
        })
    }
}

fn find(parent: &mut BTreeMap<Arc<str>, Arc<str>>, x: &Arc<str>) -> Arc<str> {
    let p = parent.get(x).cloned().unwrap_or_else(|| x.clone());
    if &p == x {
        return p;
    }
    let root = find(parent, &p);
    parent.insert(x.clone(), root.clone());
    root
}

/// Sufficient check for bounded lookback on a lookback formula.
///
/// Variables joined by an equality atom are collapsed. Every other atom that
/// reads a `pre` copy and a `cur` copy adds an edge from the earlier variable
/// to the later one. A cycle means values can be chained through unboundedly
/// many instants, as in `G(x′ > x)`; an acyclic graph bounds the chains by the
/// number of variables.
pub fn lag_graph_acyclic(back: &Formula) -> bool {
    let atoms = back.atoms();
    let mut parent: BTreeMap<Arc<str>, Arc<str>> = BTreeMap::new();
    for c in &atoms {
        if c.op == CompOp::Eq {
            let vars = c.vars();
            for w in vars.windows(2) {
                let (a, b) = (find(&mut parent, &w[0].base), find(&mut parent, &w[1].base));
                if a != b {
                    parent.insert(a, b);
                }
            }
        }
    }
    let mut edges: BTreeMap<Arc<str>, BTreeSet<Arc<str>>> = BTreeMap::new();
    for c in &atoms {
        if c.op == CompOp::Eq {
            continue;
        }
        let vars = c.vars();
        for p in vars.iter().filter(|v| v.tag == Tag::Pre) {
            for q in vars.iter().filter(|v| v.tag == Tag::Cur) {
                let (a, b) = (find(&mut parent, &p.base), find(&mut parent, &q.base));
                edges.entry(a).or_default().insert(b);
            }
        }
    }
    // depth-first search for a cycle
    fn visit(n: &Arc<str>, edges: &BTreeMap<Arc<str>, BTreeSet<Arc<str>>>, state: &mut BTreeMap<Arc<str>, u8>) -> bool {
        match state.get(n) {
            Some(1) => return false,
            Some(2) => return true,
            _ => {}
        }
        state.insert(n.clone(), 1);
        for m in edges.get(n).into_iter().flatten() {
            if !visit(m, edges, state) {
                return false;
            }
        }
        state.insert(n.clone(), 2);
        true
    }
    let mut state = BTreeMap::new();
    edges.keys().all(|n| visit(n, &edges, &mut state))
}

/// Class of a property from its lowered form (lookahead at most 1, NNF) and
/// its lookback form. `lookahead` is the lookahead of the original property.
pub fn detect_class(lookahead: u32, lowered: &Formula, back: &Formula, decls: &Declarations) -> PropertyClass {
    if lookahead == 0 {
        return PropertyClass::NoLookahead;
    }
    match classify_atoms(lowered, decls).kind {
        AtomClassKind::McQ => PropertyClass::McQ,
        AtomClassKind::Ipc => PropertyClass::Ipc,
        AtomClassKind::McZ => PropertyClass::McZ,
        AtomClassKind::GapOrder => PropertyClass::UnsupportedGc,
        AtomClassKind::GeneralRat | AtomClassKind::GeneralInt | AtomClassKind::Unsupported => {
            if lag_graph_acyclic(back) {
                PropertyClass::BoundedLookback
            } else {
                PropertyClass::Unknown
            }
        }
    }
}
