//! Randomized checks of the structural invariants.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use hill_riesz::cli::parse_range;
use hill_riesz::closedform::{forward_sum_product_form, r_single, Parity};
use hill_riesz::exact::{format_complex, parse_complex};
use hill_riesz::potential::reparametrize;
use hill_riesz::spectral::{gram_prediction, spectral_pair_auto, Bc, TruncatedOperator};
use hill_riesz::verdict::{theorem_verdict, verdict_facts, verdict_from_facts};
use hill_riesz::walkgen::{class_of, enumerate_walks, forward_only_sum, walk_sum, Direction, ZArg};
use hill_riesz::{parse_potential, Potential};

type Q = BigRational;
type CQ = Complex<BigRational>;

fn q(p: i64, d: i64) -> Q {
    Q::new(BigInt::from(p), BigInt::from(d))
}

fn rational() -> impl Strategy<Value = Q> {
    (-9i64..=9, 1i64..=6).prop_map(|(p, d)| q(p, d))
}

fn nonzero_complex() -> impl Strategy<Value = CQ> {
    (rational(), rational()).prop_filter_map("zero", |(re, im)| {
        let c = CQ::new(re, im);
        (!c.is_zero()).then_some(c)
    })
}

/// Unit complex rationals from Pythagorean triples.
fn unit() -> impl Strategy<Value = CQ> {
    prop::sample::select(vec![(3, 4, 5), (5, 12, 13), (8, 15, 17), (0, 1, 1), (-1, 0, 1), (4, -3, 5), (-20, 21, 29)])
        .prop_map(|(x, y, r)| CQ::new(q(x, r), q(y, r)))
}

fn potential() -> impl Strategy<Value = Potential> {
    prop::collection::btree_map(
        prop::sample::select(vec![-8i64, -6, -4, -2, 2, 4, 6, 8]),
        nonzero_complex(),
        1..5,
    )
    .prop_map(|m| Potential::new(m).unwrap())
}

/// Potentials whose support is symmetric under `m ↦ -m`, so that
/// reflection keeps the family and with it the class rule.
fn symmetric_support() -> impl Strategy<Value = Potential> {
    prop::collection::btree_map(prop::sample::select(vec![2i64, 4, 6]), (nonzero_complex(), nonzero_complex()), 1..3)
        .prop_map(|m| Potential::new(m.into_iter().flat_map(|(k, (u, v))| [(k, u), (-k, v)])).unwrap())
}

fn two_term() -> impl Strategy<Value = Potential> {
    (nonzero_complex(), nonzero_complex()).prop_map(|(a, b)| Potential::two_term(a, b).unwrap())
}

fn cpow(c: &CQ, k: u32) -> CQ {
    (0..k).fold(CQ::one(), |acc, _| acc * c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn complex_text_roundtrip(c in (rational(), rational())) {
        let c = CQ::new(c.0, c.1);
        prop_assert_eq!(parse_complex(&format_complex(&c)).unwrap(), c);
    }

    #[test]
    fn potential_text_roundtrip(p in potential()) {
        let back = parse_potential(&p.to_spec_string()).unwrap();
        prop_assert_eq!(back.coeffs(), p.coeffs());
    }

    #[test]
    fn classification_sees_support_only(p in potential(), r in potential()) {
        let support_p = p.support();
        let rebuilt = Potential::new(support_p.iter().map(|&m| (m, r.coeffs().values().next().unwrap().clone()))).unwrap();
        prop_assert_eq!(p.classify().kind(), rebuilt.classify().kind());
    }

    #[test]
    fn reparam_roundtrip_is_exact(alpha in nonzero_complex(), beta in nonzero_complex(), tau in nonzero_complex(), sigma in nonzero_complex()) {
        let two = CQ::new(q(2, 1), Q::zero());
        let big_a = -(&alpha * &alpha);
        let a = -(&two * &tau * &alpha);
        let big_b = -(&beta * &beta);
        let b = -(&two * &sigma * &beta);
        let p = Potential::four_term(a.clone(), b.clone(), big_a.clone(), big_b.clone()).unwrap();
        let rep = reparametrize(&p).unwrap();
        let (ra, ra_small, rb, rb_small) = rep.reconstruct_exact().expect("rational roots");
        prop_assert_eq!(ra, big_a.clone());
        prop_assert_eq!(ra_small, a.clone());
        prop_assert_eq!(rb, big_b.clone());
        prop_assert_eq!(rb_small, b.clone());
        let four = CQ::new(q(4, 1), Q::zero());
        prop_assert_eq!(rep.sigma_sq_exact.unwrap(), -(&b * &b) / (&four * &big_b));
        prop_assert_eq!(rep.tau_sq_exact.unwrap(), -(&a * &a) / (&four * &big_a));
    }

    #[test]
    fn two_term_verdict_reads_moduli_only(a in nonzero_complex(), b in nonzero_complex(), u in unit(), w in unit()) {
        let p = Potential::two_term(a.clone(), b.clone()).unwrap();
        let r = Potential::two_term(&a * &u, &b * &w).unwrap();
        for bc in [Bc::PerPlus, Bc::PerMinus] {
            prop_assert_eq!(theorem_verdict(&p, bc).prediction, theorem_verdict(&r, bc).prediction);
        }
        prop_assert_eq!(verdict_facts(&p), verdict_facts(&r));
    }

    #[test]
    fn four_term_verdict_reads_moduli_only(
        a in nonzero_complex(), b in nonzero_complex(), big_a in nonzero_complex(), big_b in nonzero_complex(),
        u in unit(), w in unit(),
    ) {
        // b ↦ b·u with B ↦ B·u² (and the same for a, A) keeps σ², τ² fixed
        let p = Potential::four_term(a.clone(), b.clone(), big_a.clone(), big_b.clone()).unwrap();
        let r = Potential::four_term(&a * &w, &b * &u, &big_a * &w * &w, &big_b * &u * &u).unwrap();
        let (fp, fr) = (verdict_facts(&p), verdict_facts(&r));
        prop_assert_eq!(&fp.moduli_sq, &fr.moduli_sq);
        prop_assert_eq!(fp.sigma_integer, fr.sigma_integer);
        prop_assert_eq!(fp.tau_integer, fr.tau_integer);
        for bc in [Bc::PerPlus, Bc::PerMinus] {
            prop_assert_eq!(verdict_from_facts(&fp, bc).0, verdict_from_facts(&fr, bc).0);
        }
    }

    #[test]
    fn enumerated_walks_are_admissible_and_fill_the_classes(p in two_term(), n in 1u32..7, extra in 0u32..3) {
        for dir in [Direction::Forward, Direction::Backward] {
            let walks = enumerate_walks(&p, n, dir, (n + 2 * extra) as usize).unwrap();
            let target = dir.sign() * n as i64;
            let mut counts = vec![0u128; extra as usize + 1];
            for w in &walks {
                prop_assert_eq!(w.steps.iter().sum::<i64>(), 2 * target);
                let v = w.vertices();
                prop_assert!(v.iter().all(|j| j.abs() != n as i64), "{:?}", w.steps);
                prop_assert!(w.is_admissible(&p));
                counts[class_of(&p, w) as usize] += 1;
            }
            let r = walk_sum(&p, n, dir, &ZArg::zero(), extra).unwrap();
            for c in &r.classes {
                prop_assert_eq!(c.count, counts[c.index as usize], "class {}", c.index);
            }
        }
    }

    #[test]
    fn partial_sum_is_exact_sum_of_classes(p in two_term(), n in 2u32..9, z in (rational(), rational())) {
        let z = CQ::new(z.0 / q(2, 1), z.1 / q(2, 1));
        let r = match walk_sum(&p, n, Direction::Forward, &ZArg::Exact(z), 3) {
            Ok(r) => r,
            Err(_) => return Ok(()), // z hits a pole of some weight
        };
        let forward: CQ = r.classes.iter().map(|c| c.sum_exact.clone().unwrap()).fold(CQ::zero(), |a, b| a + b);
        let reversed: CQ = r.classes.iter().rev().map(|c| c.sum_exact.clone().unwrap()).fold(CQ::zero(), |a, b| a + b);
        prop_assert_eq!(&forward, r.partial_sum_exact.as_ref().unwrap());
        prop_assert_eq!(forward, reversed);
    }

    #[test]
    fn backward_sum_is_forward_sum_of_reflection(p in symmetric_support(), n in 1u32..7) {
        let bwd = walk_sum(&p, n, Direction::Backward, &ZArg::zero(), 2);
        let fwd = walk_sum(&p.reflected(), n, Direction::Forward, &ZArg::zero(), 2);
        match (bwd, fwd) {
            (Ok(b), Ok(f)) => prop_assert_eq!(b.partial_sum_exact, f.partial_sum_exact),
            (b, f) => prop_assert_eq!(b.is_err(), f.is_err()),
        }
    }

    #[test]
    fn two_term_class_zero_closed_form(p in two_term(), n in 1u32..12) {
        let b = p.coeff(2).unwrap().clone();
        let r = walk_sum(&p, n, Direction::Forward, &ZArg::zero(), 0).unwrap();
        let n = n as i64;
        let den: Q = (1..n).map(|t| {
            let j = -n + 2 * t;
            q(n * n - j * j, 1)
        }).fold(Q::one(), |a, b| a * b);
        let expected = cpow(&b, n as u32) / CQ::new(den, Q::zero());
        prop_assert_eq!(r.class(0).unwrap().sum_exact.clone().unwrap(), expected);
    }

    #[test]
    fn product_form_equals_forward_sum(
        a in nonzero_complex(), b in nonzero_complex(), big_a in nonzero_complex(), big_b in nonzero_complex(), n in 1u32..10,
    ) {
        let p = Potential::four_term(a, b, big_a, big_b).unwrap();
        for dir in [Direction::Forward, Direction::Backward] {
            let direct = forward_only_sum(&p, n, dir, &ZArg::zero()).unwrap();
            prop_assert_eq!(direct.partial_sum_exact.unwrap(), forward_sum_product_form(&p, dir, n).unwrap());
        }
    }

    #[test]
    fn r_factor_formula(re in -6.0f64..6.0, im in -3.0f64..3.0) {
        use std::f64::consts::PI;
        let s = Complex64::new(re, im);
        prop_assume!(s.norm() > 1e-3);
        let w = PI * s / 2.0;
        let even = w.cos().norm() / (PI * s.norm() / 2.0).cosh();
        let odd = w.sin().norm() / (PI * s.norm() / 2.0).sinh();
        prop_assert!((r_single(s, Parity::Even) - even).abs() <= 1e-12 * even.max(1e-300) + 1e-15);
        prop_assert!((r_single(s, Parity::Odd) - odd).abs() <= 1e-12 * odd.max(1e-300) + 1e-15);
        prop_assert!(r_single(s, Parity::Even) <= 1.0 + 1e-12);
    }

    #[test]
    fn matrix_band_and_hermitian_flag(p in potential(), k in 6usize..14) {
        for bc in [Bc::PerPlus, Bc::PerMinus] {
            let op = TruncatedOperator::build_matrix(&p, bc, k).unwrap();
            prop_assert_eq!(op.band() as i64, p.max_abs_index() / 2);
            prop_assert_eq!(op.is_hermitian(), p.is_real_valued());
            let m = op.dense();
            let bw = op.band();
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    if r.abs_diff(c) > bw {
                        prop_assert_eq!(m[(r, c)], Complex64::new(0.0, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn conjugate_symmetric_potentials_are_real(v in potential()) {
        let sym = Potential::new(v.coeffs().iter().flat_map(|(m, c)| {
            [(m.abs(), c.clone()), (-m.abs(), c.conj())]
        }).collect::<std::collections::BTreeMap<_, _>>()).unwrap();
        prop_assert!(sym.is_real_valued());
        let op = TruncatedOperator::build_matrix(&sym, Bc::PerPlus, 8).unwrap();
        prop_assert!(op.is_hermitian());
    }

    #[test]
    fn disc_ranges(lo in 1u32..40, len in 0u32..40) {
        let hi = lo + len;
        let expected: Vec<u32> = (lo..=hi).collect();
        prop_assert_eq!(parse_range(&format!("{lo}..{hi}")).unwrap(), expected.clone());
        prop_assert_eq!(parse_range(&format!("{lo}..={hi}")).unwrap(), expected);
        prop_assert_eq!(parse_range(&lo.to_string()).unwrap(), vec![lo]);
    }

    #[test]
    fn exact_outputs_are_deterministic(p in potential(), n in 1u32..6) {
        let once = walk_sum(&p, n, Direction::Forward, &ZArg::zero(), 2).map(|r| serde_json::to_string(&r).unwrap());
        let twice = walk_sum(&p, n, Direction::Forward, &ZArg::zero(), 2).map(|r| serde_json::to_string(&r).unwrap());
        prop_assert_eq!(once.ok(), twice.ok());
    }
}

fn small_two_term() -> impl Strategy<Value = Potential> {
    let c = (-3i64..=3, -3i64..=3, 2i64..=4).prop_filter_map("zero", |(x, y, d)| {
        let c = CQ::new(q(x, d), q(y, d));
        (!c.is_zero()).then_some(c)
    });
    (c.clone(), c).prop_map(|(a, b)| Potential::two_term(a, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn predicted_gram_in_unit_interval(p in small_two_term(), n in 2u32..14) {
        let bc = if n % 2 == 0 { Bc::PerPlus } else { Bc::PerMinus };
        let g = gram_prediction(&p, bc, n).unwrap();
        prop_assert!((0.0..=1.0).contains(&g.predicted_gram), "{}", g.predicted_gram);
        prop_assert!(g.predicted_gap >= 0.0);
    }

    #[test]
    fn spectral_pair_identities(p in small_two_term(), half in 3u32..6) {
        let n = 2 * half;
        let pair = spectral_pair_auto(&p, Bc::PerPlus, n).unwrap();
        let n2 = (n * n) as f64;
        let (l1, l2) = (pair.lambda1.to_c64(), pair.lambda2.to_c64());
        prop_assert!((l1 - n2).norm() < 1.0 && (l2 - n2).norm() < 1.0);
        prop_assert!((pair.gap_abs - (l1 - l2).norm()).abs() <= 1e-12 * n2);
        let mean = (pair.z1.to_c64() + pair.z2.to_c64()) / 2.0;
        prop_assert!((pair.a_proxy.to_c64() - mean).norm() <= 1e-12);
        prop_assert!(pair.residual <= 1e-10);
        if let (Some(g), Some(pn)) = (pair.gram_abs, pair.proj_norm) {
            prop_assert!(pn >= 1.0);
            prop_assert!((pn - (1.0 - g * g).powf(-0.5)).abs() <= 1e-9 * pn);
        }
        for v in [&pair.v1, &pair.v2] {
            let norm: f64 = v.iter().map(|c| c[0] * c[0] + c[1] * c[1]).sum();
            prop_assert!((norm - 1.0).abs() <= 1e-12);
            // equal moduli give ties between the ±n coefficients; one of the largest must be real positive
            let top = v.iter().map(|c| c[0].hypot(c[1])).fold(0.0, f64::max);
            let pivot = v.iter().find(|c| c[0].hypot(c[1]) >= top * (1.0 - 1e-12) && c[0] > 0.0 && c[1] == 0.0);
            prop_assert!(pivot.is_some(), "no real positive entry of modulus {top}");
        }
    }
}
