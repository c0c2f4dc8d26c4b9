use std::collections::HashMap;

use crate::arith::{is_sat_atoms, Atom};
use crate::error::{Error, Result};
use crate::formula::Tag;

/// A letter assigns a polarity to every atom it constrains. Letters of `Θ`
/// constrain all atoms; letters of `Θ_cur` leave atoms mentioning `V_pre`
/// unconstrained.
pub type Letter = Vec<Option<bool>>;

#[derive(Clone, Debug)]
pub struct Alphabet {
    pub atoms: Vec<Atom>,
    pub cur_only: Vec<bool>,
    pub theta: Vec<Letter>,
    pub theta_cur: Vec<Letter>,
    theta_index: HashMap<Letter, usize>,
    theta_cur_index: HashMap<Letter, usize>,
}

fn enumerate(atoms: &[Atom], include: &[bool]) -> Vec<Letter> {
    fn go(atoms: &[Atom], include: &[bool], i: usize, cur: &mut Letter, chosen: &mut Vec<Atom>, out: &mut Vec<Letter>) {
        if i == atoms.len() {
            out.push(cur.clone());
            return;
        }
        if !include[i] {
            go(atoms, include, i + 1, cur, chosen, out);
            return;
        }
        for p in [true, false] {
            chosen.push(if p { atoms[i].clone() } else { atoms[i].neg() });
            if is_sat_atoms(chosen) {
                cur[i] = Some(p);
                go(atoms, include, i + 1, cur, chosen, out);
                cur[i] = None;
            }
            chosen.pop();
        }
    }
    let mut out = Vec::new();
    go(atoms, include, 0, &mut vec![None; atoms.len()], &mut Vec::new(), &mut out);
    out
}

impl Alphabet {
    /// Enumerates `Θ` and `Θ_cur` (maximal satisfiable sign choices).
    pub fn new(atoms: Vec<Atom>, max_atoms: usize) -> Result<Alphabet> {
        if atoms.len() > max_atoms {
            return Err(Error::AtomLimit(atoms.len(), max_atoms));
        }
        let cur_only: Vec<bool> = atoms.iter().map(|a| a.vars().all(|v| v.tag != Tag::Pre)).collect();
        let theta = enumerate(&atoms, &vec![true; atoms.len()]);
        let theta_cur = if cur_only.iter().all(|&c| c) { theta.clone() } else { enumerate(&atoms, &cur_only) };
        let theta_index = theta.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
        let theta_cur_index = theta_cur.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
        Ok(Alphabet { atoms, cur_only, theta, theta_cur, theta_index, theta_cur_index })
    }

    pub fn has_lookback(&self) -> bool {
        self.cur_only.iter().any(|c| !c)
    }

    pub fn letters(&self, initial_regime: bool) -> &[Letter] {
        if initial_regime {
            &self.theta_cur
        } else {
            &self.theta
        }
    }

    pub fn index_of(&self, l: &Letter, initial_regime: bool) -> Option<usize> {
        if initial_regime {
            self.theta_cur_index.get(l).copied()
        } else {
            self.theta_index.get(l).copied()
        }
    }

    /// The constraints of a letter or cube as atoms.
    pub fn atoms_of(&self, l: &[Option<bool>]) -> Vec<Atom> {
        l.iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| if p { self.atoms[i].clone() } else { self.atoms[i].neg() }))
            .collect()
    }
}

/// Whether every literal of `sym` is in `letter`.
pub fn covers(letter: &[Option<bool>], sym: &[(usize, bool)]) -> bool {
    sym.iter().all(|&(i, p)| letter[i] == Some(p))
}

/// Merges a set of letters into cubes: a literal is dropped while every
/// letter refining the cube is still in the set.
pub fn merge_cubes(all: &[Letter], members: &[usize]) -> Vec<Letter> {
    let in_set: Vec<bool> = {
        let mut v = vec![false; all.len()];
        for &m in members {
            v[m] = true;
        }
        v
    };
    let refines = |cube: &[Option<bool>], l: &[Option<bool>]| cube.iter().zip(l).all(|(c, x)| c.is_none() || c == x);
    let mut cubes: Vec<Letter> = Vec::new();
    for &m in members {
        if cubes.iter().any(|c| refines(c, &all[m])) {
            continue;
        }
        let mut cube = all[m].clone();
        for i in 0..cube.len() {
            if cube[i].is_none() {
                continue;
            }
            let saved = cube[i].take();
            let ok = all.iter().enumerate().all(|(k, l)| !refines(&cube, l) || in_set[k]);
            if !ok {
                cube[i] = saved;
            }
        }
        cubes.push(cube);
    }
    cubes
}
