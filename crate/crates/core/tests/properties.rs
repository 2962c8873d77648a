mod common;

use addiff::dd::{Bdd, Manager};
use addiff::diff::conformance::check_diff_trace;
use addiff::diff::{addiff, Algorithm, DiffOptions};
use addiff::expr::{BinOp, Expr};
use addiff::model::{Domain, VarDecl, VarKind};
use addiff::report::DiffReport;
use addiff::semantics::Machine;
use addiff::text::{parse, parse_expr, serialize};
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn pair(seed: u64) -> (addiff::ActivityDiagram, addiff::ActivityDiagram) {
    random_pair(&mut rng(seed), seed as usize)
}

fn decls() -> Vec<VarDecl> {
    vec![
        VarDecl::new("x", Domain::Int { lo: 0, hi: 3 }, VarKind::Input),
        VarDecl::new("y", Domain::Int { lo: 0, hi: 3 }, VarKind::Local),
        VarDecl::new("p", Domain::Bool, VarKind::Input),
    ]
}

fn int_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![(0i64..4).prop_map(Expr::int), Just(Expr::var("x")), Just(Expr::var("y"))];
    leaf.prop_recursive(3, 12, 2, |inner| {
        (inner.clone(), prop_oneof![Just(BinOp::Add), Just(BinOp::Sub)], inner)
            .prop_map(|(l, op, r)| Expr::bin(op, l, r))
    })
}

fn bool_expr() -> impl Strategy<Value = Expr> {
    let cmp = (
        int_expr(),
        prop_oneof![
            Just(BinOp::Eq),
            Just(BinOp::Ne),
            Just(BinOp::Lt),
            Just(BinOp::Le),
            Just(BinOp::Gt),
            Just(BinOp::Ge)
        ],
        int_expr(),
    )
        .prop_map(|(l, op, r)| Expr::bin(op, l, r));
    let leaf = prop_oneof![cmp, Just(Expr::var("p")), Just(Expr::tt())];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::not),
            (inner.clone(), prop_oneof![Just(BinOp::And), Just(BinOp::Or)], inner)
                .prop_map(|(l, op, r)| Expr::bin(op, l, r)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn diagrams_survive_serialization(seed in any::<u64>()) {
        let (ad, _) = pair(seed);
        let text = serialize(&ad);
        prop_assert_eq!(parse(&text).unwrap(), ad);
    }

    #[test]
    fn expressions_survive_printing(e in bool_expr()) {
        let printed = e.to_string();
        prop_assert_eq!(parse_expr(&printed, &decls()).unwrap(), e);
    }

    #[test]
    fn witnesses_conform_and_algorithms_agree(seed in any::<u64>()) {
        let (a, b) = pair(seed);
        let c = addiff(&a, &b, &DiffOptions::with_algorithm(Algorithm::Concrete)).unwrap().traces;
        let s = addiff(&a, &b, &DiffOptions::with_algorithm(Algorithm::Symbolic)).unwrap().traces;
        prop_assert_eq!(c.len(), s.len());
        for t in c.iter().chain(&s) {
            prop_assert!(check_diff_trace(&a, &b, t).is_ok());
        }
        let lens = |ts: &[addiff::DiffTrace]| ts.iter().map(|t| (t.inputs.clone(), t.len())).collect::<Vec<_>>();
        prop_assert_eq!(lens(&c), lens(&s));
    }

    #[test]
    fn shortest_lengths_match_brute_force(seed in any::<u64>()) {
        let (a, b) = pair(seed);
        let m1 = Machine::new(&a).unwrap();
        let m2 = Machine::new(&b).unwrap();
        let bf = brute_force(&m1, &m2, 5000).unwrap();
        let mut expected: Vec<usize> = bf.shortest.values().flatten().copied().collect();
        let mut got: Vec<usize> = addiff(&a, &b, &DiffOptions::default()).unwrap().traces.iter().map(|t| t.len()).collect();
        expected.sort_unstable();
        got.sort_unstable();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn diagrams_do_not_differ_from_themselves(seed in any::<u64>()) {
        let (a, _) = pair(seed);
        prop_assert!(addiff(&a, &a, &DiffOptions::default()).unwrap().traces.is_empty());
    }

    #[test]
    fn report_json_round_trips(seed in any::<u64>()) {
        let (a, b) = pair(seed);
        let out = addiff(&a, &b, &DiffOptions::default()).unwrap();
        let report = DiffReport::new(&a.name, &b.name, &out, false);
        let back = DiffReport::from_json(&report.to_json()).unwrap();
        prop_assert_eq!(back.witness_count, report.witnesses.len());
        prop_assert_eq!(back, report);
    }

    #[test]
    fn collection_preserves_live_functions(seed in any::<u64>(), n in 3u32..8) {
        let mut r = rng(seed);
        let mut m = Manager::new(n);
        let mut fs = Vec::new();
        for _ in 0..12 {
            let v = m.var(r.gen_range(0..n)).unwrap();
            let w = m.var(r.gen_range(0..n)).unwrap();
            let prev = fs.last().copied().unwrap_or(Bdd::TRUE);
            let f = match r.gen_range(0..3) {
                0 => m.and(v, prev).unwrap(),
                1 => m.or(v, w).unwrap(),
                _ => m.xor(prev, w).unwrap(),
            };
            fs.push(f);
        }
        let keep: Vec<Bdd> = fs.iter().copied().step_by(3).collect();
        let table = |m: &Manager, f: Bdd| -> Vec<bool> {
            (0..1u32 << n).map(|k| m.eval(f, &(0..n).map(|b| k >> b & 1 == 1).collect::<Vec<_>>())).collect()
        };
        let before: Vec<Vec<bool>> = keep.iter().map(|&f| table(&m, f)).collect();
        m.collect(&keep);
        let after: Vec<Vec<bool>> = keep.iter().map(|&f| table(&m, f)).collect();
        prop_assert_eq!(&before, &after);
        // rebuilding a kept function finds the same node
        for (&f, t) in keep.iter().zip(&before) {
            let mut g = Bdd::FALSE;
            for (k, &bit) in t.iter().enumerate() {
                if bit {
                    let lits: Vec<(u32, bool)> = (0..n).map(|b| (b, k >> b & 1 == 1)).collect();
                    let c = m.literal_cube(&lits).unwrap();
                    g = m.or(g, c).unwrap();
                }
            }
            prop_assert_eq!(f, g);
        }
    }
}
