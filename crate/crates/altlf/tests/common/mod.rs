#![allow(dead_code)]

use altlf::arith::Paired;
use altlf::automata::Automaton;
use altlf::formula::{parse_property, Declarations, Formula, Sort};
use altlf::trace::{Assignment, Trace};
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn rat_decls(n: usize) -> Declarations {
    Declarations::from_pairs(["x", "y"].into_iter().take(n).map(|v| (v, Sort::Rat)))
}

pub fn int_decls(n: usize) -> Declarations {
    Declarations::from_pairs(["x", "y"].into_iter().take(n).map(|v| (v, Sort::Int)))
}

const OPS: [&str; 6] = ["<", "<=", "=", "!=", ">", ">="];

/// Random property text over `vars` with temporal depth at most `depth`.
pub struct Generator {
    rng: ChaCha8Rng,
    vars: Vec<&'static str>,
    /// Highest number of primes on an atom's variables.
    lookahead: usize,
    ipc: bool,
}

impl Generator {
    pub fn mc(seed: u64, vars: usize, lookahead: usize) -> Self {
        Generator { rng: ChaCha8Rng::seed_from_u64(seed), vars: ["x", "y"][..vars].to_vec(), lookahead, ipc: false }
    }

    pub fn ipc(seed: u64, vars: usize) -> Self {
        Generator { rng: ChaCha8Rng::seed_from_u64(seed), vars: ["x", "y"][..vars].to_vec(), lookahead: 1, ipc: true }
    }

    /// Atoms without primes, for quantifier-free constraints.
    pub fn without_lookahead(mut self) -> Self {
        self.lookahead = 0;
        self
    }

    fn var(&mut self) -> String {
        let v = *self.vars.choose(&mut self.rng).unwrap();
        let primes = self.rng.gen_range(0..=self.lookahead);
        format!("{v}{}", "'".repeat(primes))
    }

    fn konst(&mut self) -> i64 {
        self.rng.gen_range(0..=2)
    }

    pub fn atom(&mut self) -> String {
        if self.ipc {
            return match self.rng.gen_range(0..4) {
                0 => format!("{} {} {}", self.var(), OPS.choose(&mut self.rng).unwrap(), self.konst()),
                1 => format!("{} {} {}", self.var(), ["=", "!="].choose(&mut self.rng).unwrap(), self.var()),
                2 => {
                    let m = self.rng.gen_range(2..=3);
                    format!("{} =_{m} {} + {}", self.var(), self.var(), self.konst())
                }
                _ => {
                    let m = self.rng.gen_range(2..=3);
                    format!("{} =_{m} {}", self.var(), self.konst())
                }
            };
        }
        let lhs = self.var();
        let op = *OPS.choose(&mut self.rng).unwrap();
        if self.rng.gen_bool(0.5) {
            format!("{lhs} {op} {}", self.konst())
        } else {
            format!("{lhs} {op} {}", self.var())
        }
    }

    pub fn formula(&mut self, depth: usize, size: usize) -> String {
        if size <= 1 {
            return self.atom();
        }
        let choice = self.rng.gen_range(0..if depth == 0 { 3 } else { 9 });
        match choice {
            0 => format!("!({})", self.formula(depth, size - 1)),
            1 | 2 => {
                let l = self.rng.gen_range(1..size);
                let op = if choice == 1 { "&&" } else { "||" };
                format!("({}) {op} ({})", self.formula(depth, l), self.formula(depth, size - l))
            }
            3 => format!("X({})", self.formula(depth - 1, size - 1)),
            4 => format!("wX({})", self.formula(depth - 1, size - 1)),
            5 => format!("G({})", self.formula(depth - 1, size - 1)),
            6 => format!("F({})", self.formula(depth - 1, size - 1)),
            _ => {
                let l = self.rng.gen_range(1..size);
                format!("({}) U ({})", self.formula(depth - 1, l), self.formula(depth - 1, size - l))
            }
        }
    }

    pub fn property(&mut self, decls: &Declarations) -> (String, Formula) {
        let size = self.rng.gen_range(2..=5);
        let src = self.formula(3, size);
        let f = parse_property(&src, decls).unwrap_or_else(|e| panic!("{src}: {e}"));
        (src, f)
    }
}

/// Grid values per variable count for exhaustive traces.
pub fn trace_values(vars: usize) -> Vec<BigRational> {
    if vars == 1 {
        vec![q(0, 1), q(1, 2), q(1, 1), q(2, 1), q(3, 1)]
    } else {
        vec![q(0, 1), q(1, 1), q(2, 1)]
    }
}

/// All assignments of `values` to the declared variables.
pub fn letters(decls: &Declarations, values: &[BigRational]) -> Vec<Assignment> {
    let names: Vec<_> = decls.names().cloned().collect();
    let mut out = vec![Assignment::new()];
    for n in &names {
        out = out
            .into_iter()
            .flat_map(|a| {
                values.iter().map(move |v| {
                    let mut b = a.clone();
                    b.insert(n.clone(), v.clone());
                    b
                })
            })
            .collect();
    }
    out
}

/// All traces of length `1..=max_len` over the given assignments.
pub fn all_traces(letters: &[Assignment], max_len: usize) -> Vec<Trace> {
    let mut out = Vec::new();
    let mut layer: Vec<Trace> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|t| {
                letters.iter().map(move |a| {
                    let mut t = t.clone();
                    t.push(a.clone());
                    t
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Number of letters of the position's regime the assignment pair satisfies.
pub fn consistent_letters(a: &Automaton, pre: Option<&Assignment>, cur: &Assignment) -> usize {
    let val = Paired { pre, cur };
    a.alphabet
        .letters(pre.is_none())
        .iter()
        .filter(|l| {
            l.iter().enumerate().all(|(i, b)| match b {
                None => true,
                Some(b) => a.alphabet.atoms[i].eval(&val) == Some(*b),
            })
        })
        .count()
}
