//! Property tests for the exact operator algebra and the expression language.

use std::sync::Arc;

use proptest::prelude::*;
use rindler_core::opalg::{format_canonical, series_sqrt, Coeff, Gauss, PhysicsTable, ScalarMono, SymbolTable};
use rindler_core::opexpr::{parse, parse_expr};
use rindler_core::{Rational, Series, Table};

fn table() -> Arc<Table> {
    thread_local! {
        static T: Arc<Table> = SymbolTable::physics(&PhysicsTable::default());
    }
    T.with(|t| t.clone())
}

// =============================================================================
// Strategies
// =============================================================================

/// Symbols used by the random series: two conjugate pairs plus one internal.
const OPS: [&str; 4] = ["X", "Px", "Py", "Hrel0"];
const SCALARS: [&str; 3] = ["M", "g", "hbar"];

#[derive(Clone, Debug)]
struct TermSpec {
    re: i64,
    im: i64,
    den: i64,
    eps: i32,
    scalars: Vec<(usize, i32)>,
    word: Vec<(usize, u32)>,
}

fn term_spec() -> impl Strategy<Value = TermSpec> {
    (
        -4i64..=4,
        -2i64..=2,
        1i64..=3,
        -1i32..=1,
        prop::collection::vec((0usize..SCALARS.len(), -1i32..=2), 0..=2),
        prop::collection::vec((0usize..OPS.len(), 1u32..=3), 0..=2),
    )
        .prop_map(|(re, im, den, eps, scalars, word)| TermSpec { re, im, den, eps, scalars, word })
}

fn build(t: &Arc<Table>, terms: &[TermSpec]) -> Series {
    let mut out = Series::zero(t);
    for s in terms {
        let g = Gauss::new(
            Rational::new(s.re.into(), s.den.into()),
            Rational::new(s.im.into(), s.den.into()),
        );
        let mono = ScalarMono::from_pairs(s.scalars.iter().map(|&(i, e)| (t.scalar(SCALARS[i]).unwrap(), e)));
        let word: Vec<_> = s.word.iter().map(|&(i, p)| (t.symbol(OPS[i]).unwrap(), p)).collect();
        let term = Series::product_of(t, s.eps, &word, Coeff::term(g, mono)).unwrap();
        out = out.add(&term).unwrap();
    }
    out
}

fn series() -> impl Strategy<Value = Vec<TermSpec>> {
    prop::collection::vec(term_spec(), 1..=3)
}

// =============================================================================
// Ring structure
// =============================================================================

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn prop_associativity(a in series(), b in series(), c in series()) {
        let t = table();
        let (a, b, c) = (build(&t, &a), build(&t, &b), build(&t, &c));
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(left.equals(&right), "{} != {}", format_canonical(&left), format_canonical(&right));
    }

    #[test]
    fn prop_distributivity(a in series(), b in series(), c in series()) {
        let t = table();
        let (a, b, c) = (build(&t, &a), build(&t, &b), build(&t, &c));
        let bc = b.add(&c).unwrap();
        prop_assert!(a.mul(&bc).unwrap().equals(&a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()));
        prop_assert!(bc.mul(&a).unwrap().equals(&b.mul(&a).unwrap().add(&c.mul(&a).unwrap()).unwrap()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn prop_commutator_antisymmetric(a in series(), b in series()) {
        let t = table();
        let (a, b) = (build(&t, &a), build(&t, &b));
        let ab = a.commutator(&b).unwrap();
        let ba = b.commutator(&a).unwrap();
        prop_assert!(ab.add(&ba).unwrap().is_zero());
    }

    #[test]
    fn prop_jacobi(a in series(), b in series(), c in series()) {
        let t = table();
        let (a, b, c) = (build(&t, &a), build(&t, &b), build(&t, &c));
        let j = a.commutator(&b).unwrap().commutator(&c).unwrap()
            .add(&b.commutator(&c).unwrap().commutator(&a).unwrap()).unwrap()
            .add(&c.commutator(&a).unwrap().commutator(&b).unwrap()).unwrap();
        prop_assert!(j.is_zero(), "{}", format_canonical(&j));
    }

    #[test]
    fn prop_adjoint_involution_and_antihomomorphism(a in series(), b in series()) {
        let t = table();
        let (a, b) = (build(&t, &a), build(&t, &b));
        prop_assert!(a.adjoint().unwrap().adjoint().unwrap().equals(&a));
        let lhs = a.mul(&b).unwrap().adjoint().unwrap();
        let rhs = b.adjoint().unwrap().mul(&a.adjoint().unwrap()).unwrap();
        prop_assert!(lhs.equals(&rhs));
    }

    #[test]
    fn prop_normal_order_idempotent(a in series(), b in series()) {
        let t = table();
        let p = build(&t, &a).mul(&build(&t, &b)).unwrap();
        let once = p.normal_order().unwrap();
        prop_assert!(once.equals(&p));
        prop_assert!(once.normal_order().unwrap().equals(&once));
    }
}

// =============================================================================
// Square root
// =============================================================================

/// Words in mutually commuting symbols only.
fn commuting_term() -> impl Strategy<Value = TermSpec> {
    (-3i64..=3, 1i64..=4, 0i32..=1, 0u32..=2, 0u32..=2, 0u32..=1).prop_map(|(re, den, eps, px, py, h)| {
        let word = [(1usize, px), (2, py), (3, h)].into_iter().filter(|w| w.1 > 0).collect();
        TermSpec { re, im: 0, den, eps: eps - 1, scalars: vec![(0, -1)], word }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn prop_sqrt_squares_back(
        root in 1i64..=5,
        mass_pow in 0i32..=2,
        rest in prop::collection::vec(commuting_term(), 0..=3),
        k in 0i32..=2,
    ) {
        let t = table();
        let m = t.scalar("M").unwrap();
        let lead = Series::monomial(
            &t,
            -2,
            vec![],
            Coeff::term(Gauss::int(root * root), ScalarMono::var(m, 2 * mass_pow)),
        );
        let a = lead.add(&build(&t, &rest)).unwrap();
        let r = series_sqrt(&a, k).unwrap();
        let sq = r.mul(&r).unwrap();
        let p = sq.precision().unwrap();
        prop_assert!(p >= k - 1);
        prop_assert!(sq.exact().equals(&a.truncate(p).exact()));
    }
}

// =============================================================================
// Expression language
// =============================================================================

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn prop_format_parse_round_trip(a in series(), order in prop::option::of(1i32..=3)) {
        let t = table();
        let mut s = build(&t, &a);
        if let Some(k) = order {
            s = s.truncate(k);
        }
        let text = format_canonical(&s);
        let back = parse_expr(&text, &t).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert!(back.equals(&s), "{text}");
    }

    #[test]
    fn prop_parser_is_total(src in "[-+*/^()\\[\\]{},. a-zA-Z0-9_]{0,40}") {
        let t = table();
        let _ = parse(&src);
        match parse_expr(&src, &t) {
            Ok(_) => {}
            Err(e) => prop_assert!(e.line >= 1 && e.col >= 1 && !e.msg.is_empty()),
        }
    }

    #[test]
    fn prop_parser_is_total_on_tokens(
        toks in prop::collection::vec(
            prop::sample::select(vec![
                "X", "Px", "P^2", "Hrel0", "M", "g", "hbar", "eps", "c^2", "i", "1/2", "3", "+", "-", "*", "/",
                "^", "(", ")", "[", "]", "{", "}", ",", "O(eps^2)", "sqrt_series(", "^-1", " ",
            ]),
            0..30,
        )
    ) {
        let t = table();
        let src: String = toks.concat();
        let _ = parse_expr(&src, &t);
    }
}

/// Every file in the fuzz corpus either parses or yields a positioned error.
#[test]
fn fuzz_corpus_never_panics() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fuzz_corpus");
    let t = table();
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let bytes = std::fs::read(&path).unwrap();
        let src = String::from_utf8_lossy(&bytes);
        if let Err(e) = parse_expr(&src, &t) {
            assert!(e.line >= 1 && e.col >= 1 && !e.msg.is_empty(), "{}", path.display());
        }
        seen += 1;
    }
    assert!(seen >= 10, "corpus has {seen} files");
}
