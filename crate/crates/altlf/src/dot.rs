//! Graphviz output for the NFA, the DFA and constraint graphs. Output is
//! deterministic: nodes in index order, edges sorted.

use std::fmt::Write;

use crate::automata::Automaton;
use crate::summary::ConstraintGraph;
use crate::verdict::Verdict;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn header(out: &mut String, name: &str) {
    writeln!(out, "digraph {name} {{").unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    writeln!(out, "  node [shape=circle];").unwrap();
    writeln!(out, "  __start [shape=point];").unwrap();
}

fn node(out: &mut String, id: usize, label: &str, is_final: bool) {
    let shape = if is_final { "doublecircle" } else { "circle" };
    writeln!(out, "  n{id} [label={}, shape={shape}];", quote(label)).unwrap();
}

/// The NFA; edge labels are conjunctions of literals.
pub fn nfa_dot(a: &Automaton) -> String {
    let nfa = &a.nfa;
    let mut out = String::new();
    header(&mut out, "nfa");
    for (i, name) in a.state_names.iter().enumerate() {
        node(&mut out, i, &format!("{i}: {name}"), nfa.is_final(i));
    }
    writeln!(out, "  __start -> n{};", nfa.initial).unwrap();
    let mut edges: Vec<(usize, usize, String)> = nfa
        .edges
        .iter()
        .map(|(from, lits, to)| {
            let label = if lits.is_empty() {
                "true".to_string()
            } else {
                lits.iter()
                    .map(|&(i, p)| {
                        let atom = &a.alphabet.atoms[i];
                        if p {
                            atom.to_string()
                        } else {
                            atom.neg().to_string()
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" ∧ ")
            };
            (*from, *to, label)
        })
        .collect();
    edges.sort();
    for (from, to, label) in edges {
        writeln!(out, "  n{from} -> n{to} [label={}];", quote(&label)).unwrap();
    }
    out.push_str("}\n");
    out
}

/// Name of a DFA state: its NFA subset, or `init` for a separate initial node.
pub fn dfa_state_name(a: &Automaton, s: usize) -> String {
    if a.dfa.separate_initial && s == a.dfa.initial {
        return "init".to_string();
    }
    let members: Vec<String> = a.dfa.states[s].iter().map(|q| q.to_string()).collect();
    format!("{{{}}}", members.join(","))
}

/// The DFA with letters merged into cubes; `verdicts` adds a label per state.
pub fn dfa_dot(a: &Automaton, verdicts: Option<&[Verdict]>) -> String {
    let mut out = String::new();
    header(&mut out, "dfa");
    for s in 0..a.dfa.len() {
        let mut label = dfa_state_name(a, s);
        if let Some(v) = verdicts {
            label = format!("{label}\n{}", v[s]);
        }
        node(&mut out, s, &label, a.dfa.finals[s]);
    }
    writeln!(out, "  __start -> n{};", a.dfa.initial).unwrap();
    for s in 0..a.dfa.len() {
        for (t, cubes) in a.edge_labels(s) {
            let label: Vec<String> = cubes.iter().map(|c| a.letter_string(c)).collect();
            writeln!(out, "  n{s} -> n{t} [label={}];", quote(&label.join("\n"))).unwrap();
        }
    }
    out.push_str("}\n");
    out
}

/// A constraint graph; nodes show the DFA state and the formula.
pub fn cg_dot(a: &Automaton, g: &ConstraintGraph) -> String {
    let mut out = String::new();
    header(&mut out, "cg");
    for (i, n) in g.nodes.iter().enumerate() {
        node(&mut out, i, &format!("{}\n{}", dfa_state_name(a, n.state), n.formula), n.is_final);
    }
    writeln!(out, "  __start -> n{};", g.initial).unwrap();
    let mut edges: Vec<(usize, usize, String)> = g.edges.iter().map(|e| (e.from, e.to, e.label.to_string())).collect();
    edges.sort();
    for (from, to, label) in edges {
        writeln!(out, "  n{from} -> n{to} [label={}];", quote(&label)).unwrap();
    }
    out.push_str("}\n");
    out
}
