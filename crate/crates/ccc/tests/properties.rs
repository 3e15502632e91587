//! Property tests for the crate-level invariants: printing round-trips,
//! typing stability under rewriting, soundness of evaluation, and the
//! pointer arithmetic of access paths.

use proptest::prelude::*;

use ccc::dom::DomExpr;
use ccc::gen::{MorGen, Rng, TermGen};
use ccc::lambda::{agree, bindings_of, compile, oracle_eval, Context};
use ccc::laws::{equal, normalize, Verdict};
use ccc::machine::{apply_mor, enumerate, inhabits, value_eq, FiniteSemantics, Value};
use ccc::mor::{access_path, desugar_functor_product, infer_type, MorExpr};
use ccc::syntax::{parse_dom, parse_mor};

fn sem() -> FiniteSemantics {
    ccc::suite::default_semantics()
}

fn arb_dom() -> impl Strategy<Value = DomExpr> {
    let leaf = prop_oneof![
        Just(DomExpr::Terminal),
        prop_oneof![Just("E"), Just("Dx"), Just("Dy"), Just("b2")].prop_map(DomExpr::base),
        Just(DomExpr::singleton("a")),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| DomExpr::prod(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| DomExpr::exp(a, b)),
        ]
    })
}

fn arb_mor() -> impl Strategy<Value = MorExpr> {
    let leaf = prop_oneof![
        arb_dom().prop_map(MorExpr::Id),
        (arb_dom(), arb_dom()).prop_map(|(a, b)| MorExpr::Fst(a, b)),
        (arb_dom(), arb_dom()).prop_map(|(a, b)| MorExpr::Snd(a, b)),
        (arb_dom(), arb_dom()).prop_map(|(a, b)| MorExpr::EvalMap(a, b)),
        arb_dom().prop_map(MorExpr::Bang),
        arb_dom().prop_map(|d| MorExpr::point("p", d)),
        (arb_dom(), arb_dom()).prop_map(|(a, b)| MorExpr::prim("f", a, b)),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(f, g)| MorExpr::compose(f, g)),
            (inner.clone(), inner.clone()).prop_map(|(f, g)| MorExpr::pair(f, g)),
            inner.prop_map(MorExpr::curry),
        ]
    })
}

proptest! {
    // Printing is a section of parsing, for arbitrary (even ill-typed)
    // syntax trees.
    #[test]
    fn dom_print_parse_round_trip(d in arb_dom()) {
        let printed = d.to_string();
        prop_assert_eq!(parse_dom(&printed).unwrap(), d);
    }

    #[test]
    fn mor_print_parse_round_trip(m in arb_mor()) {
        let printed = m.to_string();
        prop_assert_eq!(parse_mor(&printed).unwrap(), m);
    }

    // Well-typed generated morphisms: rewriting preserves the typing,
    // reaches a fixpoint, and never changes the map.
    #[test]
    fn normalize_preserves_type_and_meaning(seed in any::<u64>()) {
        let s = sem();
        let g = MorGen::new(&s, 64);
        let mut rng = Rng::new(seed);
        let dom = g.random_dom(&mut rng);
        let cod = g.random_dom(&mut rng);
        let m = g.gen(&mut rng, &dom, &cod, 4);
        let ty = infer_type(&m).unwrap();
        let (n, trace) = normalize(&m).unwrap();
        prop_assert_eq!(infer_type(&n).unwrap(), ty);
        let (n2, trace2) = normalize(&n).unwrap();
        prop_assert_eq!(&n2, &n);
        prop_assert!(trace2.is_empty());
        for w in trace.steps.windows(2) {
            prop_assert_eq!(&w[0].after, &w[1].before);
        }
        for v in enumerate(&dom, &s).unwrap() {
            let before = apply_mor(&m, &v, &s).unwrap();
            let after = apply_mor(&n, &v, &s).unwrap();
            prop_assert!(value_eq(&before, &after, Some(&s)).unwrap());
        }
    }

    // Evaluation lands in the codomain and distributes over composition.
    #[test]
    fn apply_mor_is_sound_and_compositional(seed in any::<u64>()) {
        let s = sem();
        let g = MorGen::new(&s, 64);
        let mut rng = Rng::new(seed);
        let a = g.random_dom(&mut rng);
        let b = g.random_dom(&mut rng);
        let c = g.random_dom(&mut rng);
        let f = g.gen(&mut rng, &a, &b, 3);
        let h = g.gen(&mut rng, &b, &c, 3);
        let composed = MorExpr::compose(h.clone(), f.clone());
        for v in enumerate(&a, &s).unwrap() {
            let direct = apply_mor(&composed, &v, &s).unwrap();
            let mid = apply_mor(&f, &v, &s).unwrap();
            prop_assert!(inhabits(&mid, &b, &s).unwrap());
            let staged = apply_mor(&h, &mid, &s).unwrap();
            prop_assert_eq!(&direct, &staged);
            prop_assert!(inhabits(&direct, &c, &s).unwrap());
        }
    }

    // Projections recover the legs of a pairing, both in the typing and on
    // every element.
    #[test]
    fn pairing_laws_hold_for_generated_legs(seed in any::<u64>()) {
        let s = sem();
        let g = MorGen::new(&s, 64);
        let mut rng = Rng::new(seed);
        let dom = g.random_dom(&mut rng);
        let b = g.random_dom(&mut rng);
        let c = g.random_dom(&mut rng);
        let f = g.gen(&mut rng, &dom, &b, 3);
        let h = g.gen(&mut rng, &dom, &c, 3);
        let pair = MorExpr::pair(f.clone(), h.clone());
        let first = MorExpr::compose(MorExpr::Fst(b.clone(), c.clone()), pair.clone());
        prop_assert_eq!(infer_type(&first).unwrap().cod, infer_type(&f).unwrap().cod);
        for v in enumerate(&dom, &s).unwrap() {
            let l = apply_mor(&first, &v, &s).unwrap();
            let fl = apply_mor(&f, &v, &s).unwrap();
            prop_assert_eq!(l, fl);
        }
    }

    // The functor product types componentwise.
    #[test]
    fn functor_product_typing(seed in any::<u64>()) {
        let s = sem();
        let g = MorGen::new(&s, 64);
        let mut rng = Rng::new(seed);
        let (a, b, c, d) = (
            g.random_dom(&mut rng),
            g.random_dom(&mut rng),
            g.random_dom(&mut rng),
            g.random_dom(&mut rng),
        );
        let f = g.gen(&mut rng, &a, &b, 2);
        let h = g.gen(&mut rng, &c, &d, 2);
        let fp = desugar_functor_product(&f, &h).unwrap();
        let ty = infer_type(&fp).unwrap();
        prop_assert_eq!(ty.dom, DomExpr::prod(a, c));
        prop_assert_eq!(ty.cod, DomExpr::prod(b, d));
    }

    // Every access path is well-typed over its shape and selects the
    // component it names.
    #[test]
    fn access_paths_select_components(parts
        in proptest::collection::vec(prop_oneof![Just("Dx"), Just("Dy"), Just("E")], 1..5),
        seed in any::<u64>())
    {
        let s = sem();
        let doms: Vec<DomExpr> = parts.iter().map(|p| DomExpr::base(*p)).collect();
        let shape = DomExpr::left_nested(DomExpr::base("E"), doms.clone());
        let k = (seed as usize) % doms.len();
        let m = access_path(&shape, k).unwrap();
        let ty = infer_type(&m).unwrap();
        prop_assert_eq!(&ty.dom, &shape);
        prop_assert_eq!(&ty.cod, &doms[doms.len() - 1 - k]);
        for v in enumerate(&shape, &s).unwrap() {
            // Peel k right slots by hand, then take the slot.
            let mut cur = &v;
            for _ in 0..k {
                match cur {
                    Value::Pair(rest, _) => cur = rest,
                    _ => prop_assert!(false, "instances are nested pairs"),
                }
            }
            let want = match cur {
                Value::Pair(_, slot) => (**slot).clone(),
                _ => unreachable!(),
            };
            prop_assert_eq!(apply_mor(&m, &v, &s).unwrap(), want);
        }
    }

    // Deciding equality is a congruence on the fragment it decides Equal.
    #[test]
    fn equal_is_a_congruence(seed in any::<u64>()) {
        let s = sem();
        let g = MorGen::new(&s, 64);
        let mut rng = Rng::new(seed);
        let dom = g.random_dom(&mut rng);
        let b = g.random_dom(&mut rng);
        let c = g.random_dom(&mut rng);
        let f = g.gen(&mut rng, &dom, &b, 2);
        let h = g.gen(&mut rng, &dom, &c, 2);
        // a is equal to f by construction.
        let a = MorExpr::compose(
            MorExpr::Fst(b.clone(), c.clone()),
            MorExpr::pair(f.clone(), h.clone()),
        );
        prop_assert_eq!(equal(&a, &f, Some(&s)).unwrap().verdict, Verdict::Equal);
        let post = g.gen(&mut rng, &b, &c, 2);
        let pa = MorExpr::compose(post.clone(), a.clone());
        let pf = MorExpr::compose(post, f.clone());
        prop_assert_eq!(equal(&pa, &pf, Some(&s)).unwrap().verdict, Verdict::Equal);
        let x = g.gen(&mut rng, &dom, &c, 2);
        let paired_a = MorExpr::pair(a, x.clone());
        let paired_f = MorExpr::pair(f, x);
        prop_assert_eq!(
            equal(&paired_a, &paired_f, Some(&s)).unwrap().verdict,
            Verdict::Equal
        );
    }

    // Compiled terms and the oracle agree; the compiled domain is the
    // context shape.
    #[test]
    fn compiler_agrees_with_oracle(seed in any::<u64>()) {
        let s = sem();
        let tg = TermGen::new(&s);
        let mut rng = Rng::new(seed);
        let mut ctx = tg.gen_ctx(&mut rng, DomExpr::base("E"), 2);
        let target = tg.random_target(&mut rng);
        let mut fresh = 0;
        let mut binders = Vec::new();
        let t = tg.gen_term(&mut rng, &ctx, &target, 3, &mut fresh, &mut binders);
        for (name, d) in binders {
            ctx.annotate(name, d);
        }
        let m = compile(&t, &ctx, &s).unwrap();
        prop_assert_eq!(infer_type(&m).unwrap().dom, ctx.shape());
        for i in enumerate(&ctx.shape(), &s).unwrap() {
            let mv = apply_mor(&m, &i, &s).unwrap();
            let ov = oracle_eval(&t, &bindings_of(&ctx, &i).unwrap(), &s).unwrap();
            prop_assert!(agree(&mv, &ov, &target, &s).unwrap());
        }
    }
}

#[test]
fn context_shape_follows_entries() {
    let mut ctx = Context::new(DomExpr::base("E"));
    ctx.push("y", DomExpr::base("Dy"));
    ctx.push("x", DomExpr::base("Dx"));
    assert_eq!(
        ctx.shape(),
        DomExpr::prod(
            DomExpr::prod(DomExpr::base("E"), DomExpr::base("Dy")),
            DomExpr::base("Dx")
        )
    );
    assert_eq!(ctx.index_of("x"), Some(0));
    assert_eq!(ctx.index_of("y"), Some(1));
}
