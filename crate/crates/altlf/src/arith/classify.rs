use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::formula::{Declarations, Formula};

use super::linear::{Atom, Lit, Rel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AtomClassKind {
    McQ,
    McZ,
    Ipc,
    GeneralRat,
    GeneralInt,
    GapOrder,
    Unsupported,
}

impl fmt::Display for AtomClassKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AtomClassKind::McQ => "MC_Q",
            AtomClassKind::McZ => "MC_Z",
            AtomClassKind::Ipc => "IPC",
            AtomClassKind::GeneralRat => "GENERAL_RAT",
            AtomClassKind::GeneralInt => "GENERAL_INT",
            AtomClassKind::GapOrder => "GAP_ORDER",
            AtomClassKind::Unsupported => "UNSUPPORTED",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomClass {
    pub kind: AtomClassKind,
    /// Constants `k` of atoms `x ⊙ k` (and gap constants of `x − y ⊙ k`).
    pub constants: BTreeSet<BigRational>,
}

/// `x = y`, `x ⊙ d`, `x ≡ₖ y + d`, `x ≡ₖ d` and their negations.
fn is_ipc(a: &Atom) -> bool {
    let t = &a.expr.terms;
    match (&a.rel, t.len()) {
        (_, 1) => t[0].1.abs().is_one(),
        (Rel::Eq | Rel::Ne, 2) => a.is_mc(),
        (Rel::Cong(n) | Rel::NCong(n), 2) => {
            t[0].1.is_one() && (&t[1].1 + BigRational::one()).numer().mod_floor(n).is_zero()
        }
        _ => false,
    }
}

/// The most specific fragment covering all atoms of `f`.
pub fn classify_atoms(f: &Formula, decls: &Declarations) -> AtomClass {
    let mut atoms = Vec::new();
    f.for_each_atom(&mut |c, _| {
        if let Lit::Atom(a) = Atom::from_constraint(c, decls) {
            atoms.push(a);
        }
    });
    let mut constants = BTreeSet::new();
    for a in &atoms {
        if let Some(k) = a.mc_constant() {
            constants.insert(k);
        } else if a.is_difference() && !a.is_mc() && a.expr.terms.len() == 2 {
            let s = &a.expr.terms[0].1;
            constants.insert(-&a.expr.constant / s);
        }
    }
    let any_int = atoms.iter().any(|a| a.int);
    let any_rat = atoms.iter().any(|a| !a.int);
    let all_mc = atoms.iter().all(Atom::is_mc);
    let kind = if any_int && any_rat {
        if all_mc {
            AtomClassKind::Unsupported
        } else {
            AtomClassKind::GeneralInt
        }
    } else if !any_int {
        if all_mc {
            AtomClassKind::McQ
        } else {
            AtomClassKind::GeneralRat
        }
    } else if atoms.iter().all(is_ipc) {
        AtomClassKind::Ipc
    } else if all_mc {
        AtomClassKind::McZ
    } else if atoms.iter().all(|a| a.is_difference() || is_ipc(a)) {
        AtomClassKind::GapOrder
    } else {
        AtomClassKind::GeneralInt
    };
    AtomClass { kind, constants }
}
