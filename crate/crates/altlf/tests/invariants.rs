mod common;

use altlf::arith::{eval_atom, Dnf, Plain};
use altlf::automata::{compile, Limits};
use altlf::dot::{dfa_dot, nfa_dot};
use altlf::formula::{neg_atom, parse_property, to_lookback, to_nnf, Declarations, Formula, Sort};
use altlf::monitor::{Monitor, Options};
use altlf::oracle::satisfies;
use altlf::trace::{read_csv, read_json, Assignment, Trace};
use common::{consistent_letters, q, rat_decls, trace_values, Generator};
use num_rational::BigRational;
use proptest::prelude::*;

fn trace_from(decls: &Declarations, values: &[BigRational], codes: &[usize]) -> Trace {
    let names: Vec<_> = decls.names().cloned().collect();
    codes
        .chunks(names.len())
        .map(|chunk| names.iter().zip(chunk).map(|(n, &c)| (n.clone(), values[c % values.len()].clone())).collect())
        .collect()
}

fn mc_case() -> impl Strategy<Value = (u64, usize, usize, Vec<usize>)> {
    (any::<u64>(), 1..=2usize, 0..=1usize, 1..=4usize).prop_flat_map(|(seed, vars, la, len)| {
        (Just(seed), Just(vars), Just(la), prop::collection::vec(0..5usize, len * vars))
    })
}

fn compiled(seed: u64, vars: usize, la: usize) -> (String, Formula, Declarations, Monitor) {
    let d = rat_decls(vars);
    let (src, f) = Generator::mc(seed, vars, la).property(&d);
    let m = Monitor::new(&f, &d, &Options::default()).unwrap_or_else(|e| panic!("{src}: {e}"));
    (src, f, d, m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dfa_acceptance_matches_direct_evaluation((seed, vars, la, codes) in mc_case()) {
        let (src, f, d, m) = compiled(seed, vars, la);
        let t = trace_from(&d, &trace_values(vars), &codes);
        prop_assert_eq!(m.automaton.accepts(&m.registers.extend(&t)), satisfies(&f, &t), "{}", src);
    }

    #[test]
    fn verdicts_agree_with_satisfaction_and_stay_permanent((seed, vars, la, codes) in mc_case()) {
        let (src, f, d, m) = compiled(seed, vars, la);
        let t = trace_from(&d, &trace_values(vars), &codes);
        let vs = m.run(&t).unwrap();
        for (i, v) in vs.iter().enumerate() {
            prop_assert_eq!(v.is_satisfied(), satisfies(&f, &t[..=i].to_vec()), "{} at {}", src, i);
            if i > 0 && vs[i - 1].is_permanent() {
                prop_assert_eq!(*v, vs[i - 1], "{}", src);
            }
        }
    }

    #[test]
    fn every_trace_has_exactly_one_consistent_word((seed, vars, la, codes) in mc_case()) {
        let (_, _, d, m) = compiled(seed, vars, la);
        let t = m.registers.extend(&trace_from(&d, &trace_values(vars), &codes));
        for i in 0..t.len() {
            let pre = if i == 0 { None } else { Some(&t[i - 1]) };
            prop_assert_eq!(consistent_letters(&m.automaton, pre, &t[i]), 1);
        }
    }

    #[test]
    fn dot_output_is_deterministic(seed in any::<u64>(), vars in 1..=2usize) {
        let d = rat_decls(vars);
        let (_, f) = Generator::mc(seed, vars, 1).property(&d);
        let back = to_lookback(&to_nnf(&f));
        let a = compile(&back, &d, &Limits::default()).unwrap();
        let b = compile(&back, &d, &Limits::default()).unwrap();
        prop_assert_eq!(nfa_dot(&a), nfa_dot(&b));
        prop_assert_eq!(dfa_dot(&a, None), dfa_dot(&b, None));
    }

    #[test]
    fn negated_atoms_are_complements(seed in any::<u64>(), x in 0..5usize, y in 0..5usize, x1 in 0..5usize, y1 in 0..5usize) {
        let d = rat_decls(2);
        let mut g = Generator::mc(seed, 2, 1);
        let src = g.atom();
        let Formula::Atom(c) = parse_property(&src, &d).unwrap() else { panic!("{src}") };
        let vals = trace_values(2);
        let at = |a: usize, b: usize| -> Assignment {
            [("x".into(), vals[a % 3].clone()), ("y".into(), vals[b % 3].clone())].into_iter().collect()
        };
        let t = vec![at(x, y), at(x1, y1)];
        let holds = satisfies(&Formula::Atom(c.clone()), &t);
        prop_assert_eq!(satisfies(&Formula::Atom(neg_atom(&c)), &t), !holds, "{}", src);
    }

    #[test]
    fn csv_and_json_traces_agree(rows in prop::collection::vec((-20i64..20, 1i64..5, -9i64..9), 1..6)) {
        let d = Declarations::from_pairs([("x", Sort::Rat), ("n", Sort::Int)]);
        let mut csv = String::from("x,n\n");
        let mut json = Vec::new();
        for (num, den, n) in &rows {
            csv.push_str(&format!("{num}/{den},{n}\n"));
            json.push(format!("{{\"x\": \"{num}/{den}\", \"n\": {n}}}"));
        }
        let json = format!("[{}]", json.join(", "));
        let a = read_csv(&csv, &d).unwrap();
        let b = read_json(&json, &d).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a[0][&*d.name("x").unwrap()].clone(), q(rows[0].0, rows[0].1));
    }

    #[test]
    fn projection_agrees_with_a_witness_grid(seed in any::<u64>(), xv in 0..5usize) {
        // ∃y over a conjunction of rational atoms in x, y
        let d = rat_decls(2);
        let mut g = Generator::mc(seed, 2, 0);
        let atoms: Vec<_> = (0..3)
            .map(|_| match parse_property(&g.atom(), &d).unwrap() {
                Formula::Atom(c) => c,
                other => panic!("{other:?}"),
            })
            .collect();
        let phi = Dnf::from_formula(&Formula::all(atoms.iter().cloned().map(Formula::Atom)), &d).unwrap();
        let y = altlf::formula::VarRef::plain("y", 0);
        let proj = phi.exists(std::slice::from_ref(&y));
        let vals = trace_values(1);
        let x = vals[xv].clone();
        let mut witnesses: Vec<BigRational> = Vec::new();
        // quarters from -1 to 4 cover every order type against {0, 1/2, 1, 2, 3}
        for k in -4..=16 {
            witnesses.push(q(k, 4));
        }
        let exists = witnesses.iter().any(|w| {
            let a: Assignment = [("x".into(), x.clone()), ("y".into(), w.clone())].into_iter().collect();
            atoms.iter().all(|c| eval_atom(c, &Plain(&a)) == Some(true))
        });
        let a: Assignment = [("x".into(), x.clone())].into_iter().collect();
        prop_assert_eq!(proj.eval(&Plain(&a)), Some(exists));
    }
}
