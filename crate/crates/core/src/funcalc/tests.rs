use proptest::prelude::*;

use super::*;
use crate::linalg::{join, matrix_exp_hermitian, meet};
use crate::observable::spectral_leq;

fn obs(m: ComplexMatrix) -> Observable {
    Observable::from_matrix(&m).unwrap()
}

fn sx() -> Observable {
    obs(ComplexMatrix::pauli_x())
}

fn sy() -> Observable {
    obs(ComplexMatrix::pauli_y())
}

fn sz() -> Observable {
    obs(ComplexMatrix::pauli_z())
}

fn diag(v: &[f64]) -> Observable {
    obs(ComplexMatrix::from_real_diagonal(v))
}

fn qubit(alpha: f64, v: [f64; 3]) -> Observable {
    obs(ComplexMatrix::pauli_form(alpha, v))
}

fn magnitude(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn assert_close(x: &[f64], y: &[f64]) {
    assert_eq!(x.len(), y.len(), "{x:?} vs {y:?}");
    for (p, q) in x.iter().zip(y) {
        assert!((p - q).abs() < 1e-12, "{x:?} vs {y:?}");
    }
}

#[test]
fn value_tables() {
    let add = ValueTable::build(sx().eigenvalues(), sy().eigenvalues(), |x, y| x + y).unwrap();
    assert_close(add.values(), &[-2.0, 0.0, 2.0]);
    assert_eq!(add.index_map(), &[vec![0, 1], vec![1, 2]]);
    let mul = ValueTable::build(sx().eigenvalues(), sy().eigenvalues(), |x, y| x * y).unwrap();
    assert_close(mul.values(), &[-1.0, 1.0]);
    let g = GeneralizedObservable::new(&sx(), &sy(), |_, _| 4.5).unwrap();
    assert_eq!(g.values(), &[4.5]);
    assert!(g.eval_values(&[4.5]).unwrap().matrix().approx_eq(&ComplexMatrix::identity(2), 1e-15));
}

#[test]
fn collisions_merge() {
    let t = ValueTable::build(&[0.1, 0.2], &[0.2, 0.1], |x, y| x + y).unwrap();
    assert_eq!(t.values().len(), 3);
    assert_eq!(t.value_index(0, 0), t.value_index(1, 1));
}

#[test]
fn undefined_function_is_reported() {
    let e = ValueTable::build(&[-1.0, 1.0], &[1.0], |x, _| x.ln()).unwrap_err();
    assert!(matches!(e, Error::FunctionUndefined { .. }));
    let f = crate::expr::parse("x / (y - 1)", &["x", "y"]).unwrap();
    let e = GeneralizedObservable::try_new(&sx(), &sz(), |x, y| f.eval_xy(x, y)).unwrap_err();
    assert!(matches!(e, Error::FunctionUndefined { .. }));
}

#[test]
fn pauli_sum_gpvm_values() {
    let g = GeneralizedObservable::new(&sx(), &sy(), |x, y| x + y).unwrap();
    for v in [-2.0, 0.0, 2.0] {
        assert!(g.eval_values(&[v]).unwrap().is_zero(), "value {v}");
    }
    assert!(g.eval_values(&[-2.0, 0.0]).unwrap().matrix().approx_eq(&ComplexMatrix::identity(2), 1e-9));
    assert!(g.eval(&ValueSet::full(3)).unwrap().matrix().approx_eq(&ComplexMatrix::identity(2), 1e-15));
    assert!(!g.is_pvm().unwrap());
    assert_eq!(g.eval_values(&[1.0]).unwrap_err(), Error::UnknownValue(1.0));
}

#[test]
fn commuting_sum_point() {
    let g = GeneralizedObservable::new(&sz(), &sz(), |x, y| x + y).unwrap();
    let p = g.eval_values(&[2.0]).unwrap();
    assert!(p.matrix().approx_eq(&ComplexMatrix::from_real_diagonal(&[1.0, 0.0]), 1e-12));
    assert!(g.is_pvm().unwrap());
}

#[test]
fn pauli_dot_plus_is_zero() {
    let s = dot_plus(&sx(), &sy()).unwrap();
    assert_eq!(s.eigenvalues(), &[0.0]);
    assert!(s.projectors()[0].matrix().approx_eq(&ComplexMatrix::identity(2), 1e-9));
}

#[test]
fn scalar_dot_plus() {
    let s = dot_plus(&Observable::scalar(3, 1.5), &Observable::scalar(3, -0.25)).unwrap();
    assert_eq!(s.eigenvalues(), &[1.25]);
}

#[test]
fn qubit_closed_form() {
    let mut rng = random::rng(11);
    for _ in 0..40 {
        let alpha: f64 = rng.random_range(-2.0..2.0);
        let beta: f64 = rng.random_range(-2.0..2.0);
        let mut a = random::axis(&mut rng).map(|x| x * rng.random_range(0.2..3.0));
        let mut b = random::axis(&mut rng).map(|x| x * rng.random_range(0.2..3.0));
        if magnitude(a) < magnitude(b) {
            std::mem::swap(&mut a, &mut b);
        }
        let (ma, mb) = (magnitude(a), magnitude(b));
        let s = dot_plus(&qubit(alpha, a), &qubit(beta, b)).unwrap();
        let expected = ComplexMatrix::pauli_form(alpha + beta, a.map(|x| x * (ma - mb) / ma));
        assert!(s.matrix().approx_eq(&expected, 1e-8));
        let (ap, am, bp, bm) = (alpha + ma, alpha - ma, beta + mb, beta - mb);
        let mut spectrum = [ap + bm, am + bp];
        spectrum.sort_by(f64::total_cmp);
        assert_eq!(s.num_values(), 2);
        for (x, y) in s.eigenvalues().iter().zip(spectrum) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}

fn dot_plus_family_oracle(a: &Observable, b: &Observable, lambda: f64) -> Projector {
    let dim = a.dim();
    let mut acc = Projector::zero(dim);
    for &x in a.eigenvalues() {
        let term = meet(&a.spectral_family(x), &b.spectral_family(lambda - x)).unwrap();
        acc = join(&acc, &term).unwrap();
    }
    acc
}

#[test]
fn dot_plus_spectral_family_matches_oracle() {
    let mut rng = random::rng(12);
    for dim in 2..=4 {
        for _ in 0..5 {
            let k = rng.random_range(1..=dim);
            let l = rng.random_range(1..=dim);
            let a = random::observable(&mut rng, dim, k);
            let b = random::observable(&mut rng, dim, l);
            let s = dot_plus(&a, &b).unwrap();
            let g = GeneralizedObservable::new(&a, &b, |x, y| x + y).unwrap();
            for &lambda in g.values() {
                let oracle = dot_plus_family_oracle(&a, &b, lambda);
                assert!(s.spectral_family(lambda).approx_eq(&oracle, 1e-8), "dim {dim}, λ = {lambda}");
            }
        }
    }
}

#[test]
fn dot_times_examples() {
    let mut rng = random::rng(13);
    let a = random::observable(&mut rng, 3, 3);
    let p = dot_times(&a, &Observable::scalar(3, 1.0)).unwrap();
    assert!(p.approx_eq(&a, 1e-9));
    let zz = dot_times(&sz(), &sz()).unwrap();
    assert_eq!(zz.eigenvalues(), &[1.0]);
}

#[test]
fn commuting_pairs_reduce_to_ordinary_function() {
    let a = diag(&[1.0, 2.0, 3.0, 1.0]);
    let b = diag(&[-1.0, 0.5, 0.5, 2.0]);
    let f = |x: f64, y: f64| x * y + x * x;
    let expected = diag(&[0.0, 5.0, 10.5, 3.0]);
    let g = GeneralizedObservable::new(&a, &b, f).unwrap();
    let n = g.values().len();
    for order in [ChainOrder::ascending(n), ChainOrder::from_permutation((0..n).rev().collect()).unwrap()] {
        let out = extract_pvm(&g, &order).unwrap();
        assert!(out.approx_eq(&expected, 1e-12), "{order:?}");
    }
}

#[test]
fn bch_identity() {
    let mut rng = random::rng(14);
    for dim in 2..=4 {
        for _ in 0..6 {
            let ha = random::hermitian(&mut rng, dim);
            let hb = random::hermitian(&mut rng, dim);
            let ea = obs(matrix_exp_hermitian(&ha).unwrap());
            let eb = obs(matrix_exp_hermitian(&hb).unwrap());
            let lhs = dot_times(&ea, &eb).unwrap();
            let rhs = dot_plus(&obs(ha), &obs(hb)).unwrap().apply_scalar_function(f64::exp).unwrap();
            assert!(lhs.distance(&rhs) < 1e-8, "dim {dim}: {}", lhs.distance(&rhs));
        }
    }
}

#[test]
fn composition_examples() {
    assert!(check_composition(|x| x, |x, y| x + y, &sx(), &sy(), None).unwrap());
    assert!(check_composition(f64::exp, |x, y| x + y, &sx(), &sy(), None).unwrap());
    let mut rng = random::rng(15);
    for dim in 2..=4 {
        let a = random::observable(&mut rng, dim, dim);
        let b = random::observable(&mut rng, dim, dim);
        assert!(check_composition(|x| 2.0 * x + 1.0, |x, y| x * y, &a, &b, None).unwrap());
    }
    assert_eq!(
        check_composition(|x| -x, |x, y| x + y, &sx(), &sz(), None).unwrap_err(),
        Error::NotMonotone
    );
}

#[test]
fn composition_along_a_permuted_chain() {
    let mut rng = random::rng(16);
    let a = random::observable(&mut rng, 3, 3);
    let b = random::observable(&mut rng, 3, 2);
    let g = GeneralizedObservable::new(&a, &b, |x, y| x + y).unwrap();
    let n = g.values().len();
    let reversed = ChainOrder::from_permutation((0..n).rev().collect()).unwrap();
    assert!(check_composition(|x| -x, |x, y| x + y, &a, &b, Some(&reversed)).unwrap());
    assert_eq!(
        check_composition(|x| x, |x, y| x + y, &a, &b, Some(&reversed)).unwrap_err(),
        Error::NotMonotone
    );
}

#[test]
fn right_composition_examples() {
    assert!(check_right_composition(|x, y| x + y, |x| x, |y| y, &sx(), &sy(), None).unwrap());
    assert!(check_right_composition(|x, y| x * y, f64::exp, f64::exp, &sx(), &sy(), None).unwrap());
    let h = f_e(&sx(), &sy(), |x, y| x.exp() * y.exp(), None).unwrap();
    let bch = dot_plus(&sx(), &sy()).unwrap().apply_scalar_function(f64::exp).unwrap();
    assert!(h.distance(&bch) < 1e-8);
    let mut rng = random::rng(17);
    for dim in 2..=4 {
        let a = random::observable(&mut rng, dim, dim);
        let b = random::observable(&mut rng, dim, dim.min(3));
        assert!(check_right_composition(|x, y| x + 2.0 * y, |x| x.powi(3), |y| 0.5 * y, &a, &b, None).unwrap());
    }
}

#[test]
fn right_composition_with_a_collapsing_inner_function() {
    let mut rng = random::rng(18);
    let a = random::observable(&mut rng, 3, 3);
    let b = random::observable(&mut rng, 3, 3);
    assert!(check_right_composition(|x, y| x + y, |x| x.abs().round(), |y| y, &a, &b, None).unwrap());
}

#[test]
fn spectral_monotonicity_examples() {
    let a = diag(&[0.0, 1.0, 2.0]);
    assert!(check_spectral_monotonicity(&a, &a, &sx_like(3)).unwrap());
    let b = diag(&[0.5, 1.0, 3.0]);
    let c = diag(&[2.0, -1.0, 0.0]);
    // a∔c = diag(2,0,2), b∔c = diag(2.5,0,3): pointwise above
    assert!(spectral_leq(&dot_plus(&a, &c).unwrap(), &dot_plus(&b, &c).unwrap()).unwrap());
    assert!(check_spectral_monotonicity(&a, &b, &c).unwrap());
    assert!(matches!(
        check_spectral_monotonicity(&b, &a, &c),
        Err(Error::PreconditionFailed(_))
    ));
}

fn sx_like(dim: usize) -> Observable {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim - 1 {
        m[(i, i + 1)] = 1.0.into();
        m[(i + 1, i)] = 1.0.into();
    }
    obs(m)
}

#[test]
fn spectral_monotonicity_random_diagonal() {
    let mut rng = random::rng(19);
    for _ in 0..30 {
        let dim = rng.random_range(2..=4);
        let base: Vec<f64> = (0..dim).map(|_| rng.random_range(-2i32..=2) as f64).collect();
        let bump: Vec<f64> = base.iter().map(|x| x + rng.random_range(0i32..=2) as f64).collect();
        let c: Vec<f64> = (0..dim).map(|_| rng.random_range(-2i32..=2) as f64).collect();
        assert!(check_spectral_monotonicity(&diag(&base), &diag(&bump), &diag(&c)).unwrap());
    }
}

#[test]
fn property_suite_examples() {
    let mut rng = random::rng(20);
    let r = property_suite_fe(&diag(&[1.0, 2.0]), &diag(&[3.0, -1.0]), |x, y| x * y, None, &mut rng).unwrap();
    assert_eq!(r.spectrum_deviation, 0.0);
    assert!(r.holds(1e-9));
    assert_eq!(r.eigenstates, 2);
    let r = property_suite_fe(&sx(), &sy(), |x, y| x + y, None, &mut rng).unwrap();
    assert_eq!(r.spectrum_deviation, 0.0);
    assert_eq!(r.eigenstates, 0);
    assert!(r.holds(1e-9));
}

#[test]
fn property_suite_random_tables() {
    let mut rng = random::rng(21);
    for dim in 2..=5 {
        let (k, l) = (rng.random_range(1..=dim), rng.random_range(1..=dim));
        let a = random::observable(&mut rng, dim, k);
        let b = random::observable(&mut rng, dim, l);
        let table: Vec<f64> = (0..a.num_values() * b.num_values()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = b.num_values();
        let f = |x: f64, y: f64| {
            let i = a.index_of(x).unwrap();
            let k = b.index_of(y).unwrap();
            table[i * m + k]
        };
        let r = property_suite_fe(&a, &b, f, None, &mut rng).unwrap();
        assert!(r.holds(1e-8), "dim {dim}: {r:?}");
    }
}

#[test]
fn nonassociativity_examples() {
    let d = nonassociativity_demo(3.0, 1.0, 1.0).unwrap();
    assert_eq!(d.predicted_left, vec![-1.0, 1.0]);
    assert_eq!(d.predicted_right, vec![-3.0, 3.0]);
    assert!(d.deviation() < 1e-8, "{d:?}");
    let d = nonassociativity_demo(2.0, 2.0, 2.0).unwrap();
    assert_eq!(d.predicted_left, d.predicted_right);
    assert!(d.deviation() < 1e-8, "{d:?}");
    let d = nonassociativity_demo(2.0, 1.0, 0.5).unwrap();
    assert_eq!(d.predicted_left, vec![-0.5, 0.5]);
    assert_eq!(d.predicted_right, vec![-1.5, 1.5]);
    assert!(d.deviation() < 1e-8, "{d:?}");
}

#[test]
fn operator_ordering_is_irrelevant_for_numeric_functions() {
    let p = |x: f64, y: f64| x * y * y * x;
    let q = |x: f64, y: f64| y * x * x * y;
    let a = diag(&[-1.0, 2.0, 3.0]);
    let b = obs(ComplexMatrix::from_real_diagonal(&[1.0, -2.0, 0.0]).conjugate_by(&random::unitary(&mut random::rng(22), 3)));
    let tp = ValueTable::build(a.eigenvalues(), b.eigenvalues(), p).unwrap();
    let tq = ValueTable::build(a.eigenvalues(), b.eigenvalues(), q).unwrap();
    assert!(tp.equivalent(&tq, 1e-12));
    let ia = diag(&[-1.0, 2.0, 3.0]);
    let ib = diag(&[1.0, -2.0, 0.0]);
    let tp = ValueTable::build(ia.eigenvalues(), ib.eigenvalues(), p).unwrap();
    let tq = ValueTable::build(ia.eigenvalues(), ib.eigenvalues(), q).unwrap();
    assert_eq!(tp, tq);
}

#[test]
fn generalized_covariance() {
    let mut rng = random::rng(23);
    let a = random::observable(&mut rng, 3, 3);
    let b = random::observable(&mut rng, 3, 3);
    let g = GeneralizedObservable::new(&a, &b, |x, y| x - y * y).unwrap();
    let u = random::unitary(&mut rng, 3);
    let moved = g.conjugate(&u).unwrap();
    for bits in 0..(1u64 << g.values().len()) {
        let s = ValueSet::from_bits(bits);
        let lhs = moved.eval(&s).unwrap();
        let rhs = g.eval(&s).unwrap().conjugate_by(&u);
        assert!(lhs.approx_eq(&rhs, 1e-9));
    }
}

#[test]
fn generalized_gpvm_axioms() {
    let mut rng = random::rng(24);
    for dim in 2..=4 {
        let a = random::observable(&mut rng, dim, dim);
        let b = random::observable(&mut rng, dim, dim);
        let g = GeneralizedObservable::new(&a, &b, |x, y| (x * y).sin()).unwrap();
        let r = g.verify_gpvm(40, 5, 1e-9).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
    }
}

#[test]
fn invalid_chains() {
    assert!(matches!(ChainOrder::from_permutation(vec![0, 0, 1]), Err(Error::InvalidChain(_))));
    assert!(matches!(ChainOrder::from_permutation(vec![0, 3, 1]), Err(Error::InvalidChain(_))));
    let g = GeneralizedObservable::new(&sx(), &sy(), |x, y| x + y).unwrap();
    assert!(matches!(extract_pvm(&g, &ChainOrder::ascending(2)), Err(Error::InvalidChain(_))));
    assert!(matches!(ChainOrder::from_values(g.table(), &[0.0, 2.0]), Err(Error::InvalidChain(_))));
    let o = ChainOrder::from_values(g.table(), &[2.0, -2.0, 0.0]).unwrap();
    assert_eq!(o.as_slice(), &[2, 0, 1]);
}

#[test]
fn dimension_mismatch() {
    assert!(matches!(
        dot_plus(&sx(), &Observable::scalar(3, 1.0)),
        Err(Error::DimensionMismatch { .. })
    ));
}

fn random_pair(seed: u64) -> (Observable, Observable) {
    let mut rng = random::rng(seed);
    let dim = rng.random_range(2..=4);
    let (k, l) = (rng.random_range(1..=dim), rng.random_range(1..=dim));
    let a = random::observable(&mut rng, dim, k);
    let b = random::observable(&mut rng, dim, l);
    (a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn extraction_agrees_with_every_prefix(seed in any::<u64>(), shuffle in any::<u64>()) {
        use rand::seq::SliceRandom;
        let (a, b) = random_pair(seed);
        let g = GeneralizedObservable::new(&a, &b, |x, y| x * x - y).unwrap();
        let mut perm: Vec<usize> = (0..g.values().len()).collect();
        perm.shuffle(&mut random::rng(shuffle));
        let order = ChainOrder::from_permutation(perm).unwrap();
        let out = extract_pvm(&g, &order).unwrap();
        let total = out.projectors().iter().fold(ComplexMatrix::zeros(a.dim(), a.dim()), |acc, p| &acc + p.matrix());
        prop_assert!(total.approx_eq(&ComplexMatrix::identity(a.dim()), 1e-9));
        prop_assert!(prefix_deviation(&g, &order, &out).unwrap() <= 1e-9);
    }

    #[test]
    fn dot_operations_commute(seed in any::<u64>()) {
        let (a, b) = random_pair(seed);
        prop_assert!(dot_plus(&a, &b).unwrap().distance(&dot_plus(&b, &a).unwrap()) <= 1e-9);
        prop_assert!(dot_times(&a, &b).unwrap().distance(&dot_times(&b, &a).unwrap()) <= 1e-9);
    }

    #[test]
    fn generalized_observable_is_a_gpvm(seed in any::<u64>()) {
        let (a, b) = random_pair(seed);
        let g = GeneralizedObservable::new(&a, &b, |x, y| (x - y).abs()).unwrap();
        let r = g.verify_gpvm(8, seed, 1e-9).unwrap();
        prop_assert!(r.passed(), "{:?}", r.violations);
    }
}

#[test]
fn wide_ranges_keep_small_values_apart() {
    let t = ValueTable::build(&[0.5, 2.0, 22.4], &[0.0], |x, _| x.exp()).unwrap();
    assert_eq!(t.values().len(), 3);
    let z = Observable::from_matrix(&ComplexMatrix::from_real_diagonal(&[0.5, 2.0, 22.4])).unwrap();
    assert_eq!(z.apply_scalar_function(f64::exp).unwrap().num_values(), 3);
    let merged = ValueTable::build(&[1e9, 1e9 + 1.0], &[0.0], |x, _| x).unwrap();
    assert_eq!(merged.values().len(), 1);
}
