//! Library results against values worked out by hand.

use lobsys_core::approx::tau_norm;
use lobsys_core::exact::{self, Rational};
use lobsys_core::generators;
use lobsys_core::hermite::hilbert_gram;
use lobsys_core::orthosystem::{Coefficient, PiecewiseFunction, System};
use lobsys_core::partition::Filtration;
use lobsys_core::polyspace::{Space, SpaceSpec};
use lobsys_core::quadrature::GaussLegendre;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn gauss_legendre_small_rules() {
    let g = GaussLegendre::new(2);
    let h = 0.5 / 3f64.sqrt();
    assert!(close(g.nodes[0], 0.5 - h, 1e-15) && close(g.nodes[1], 0.5 + h, 1e-15));
    assert!(g.weights.iter().all(|w| close(*w, 0.5, 1e-15)));
    let g = GaussLegendre::new(3);
    let h = 0.5 * 0.6f64.sqrt();
    assert!(close(g.nodes[0], 0.5 - h, 1e-15) && close(g.nodes[1], 0.5, 1e-15) && close(g.nodes[2], 0.5 + h, 1e-15));
    for (w, e) in g.weights.iter().zip([5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0]) {
        assert!(close(*w, e, 1e-15));
    }
    // n nodes integrate degree 2n - 1 exactly
    let g = GaussLegendre::new(4);
    for k in 0..8 {
        let v = g.integrate(0.5, 2.0, |x| x.powi(k));
        let e = (2f64.powi(k + 1) - 0.5f64.powi(k + 1)) / (k + 1) as f64;
        assert!(close(v, e, 1e-13 * e), "x^{k}");
    }
}

#[test]
fn haar_on_a_third() {
    let mut f = Filtration::new_geometric(1);
    f.split_relative(0, 0, &exact::ratio(1, 3)).unwrap();
    let sys = System::build(&f, &Space::new(SpaceSpec::Constant, 1).unwrap()).unwrap();
    let g = &sys.frame(1).funcs[0];
    // small piece 1/3, large piece 2/3: values sqrt(2) and -1/sqrt(2) up to sign
    let s = g.on_small[0].signum();
    assert!(close(s * g.on_small[0], 2f64.sqrt(), 1e-15));
    assert!(close(s * g.on_large[0], -(0.5f64.sqrt()), 1e-15));
}

#[test]
fn linear_level_zero_is_legendre() {
    let f = Filtration::new_geometric(1);
    let sys = System::build(&f, &Space::new(SpaceSpec::Tensor(vec![1]), 1).unwrap()).unwrap();
    let template = sys.analyze(&PiecewiseFunction::new());
    assert_eq!(template.len(), 2);
    let eval = |i: usize, x: f64| sys.eval(&sys.synthesize(&[Coefficient { value: 1.0, ..template[i].clone() }]), &[x]);
    for x in [0.1, 0.35, 0.8] {
        assert!(close(eval(0, x).abs(), 1.0, 1e-14));
        assert!(close(eval(1, x).abs(), 3f64.sqrt() * (2.0 * x - 1.0).abs(), 1e-14));
    }
}

#[test]
fn lambda_sums_in_closed_form() {
    // levels l = 1..n occur 2^(l-1) times with weight 4^(-l), plus two endpoints of weight 1
    for n in 1..=14usize {
        let lam = generators::lambda_sequence_exact(2, n).unwrap();
        assert_eq!(lam.len(), (1 << n) + 1);
        let sum: Rational = lam.iter().fold(exact::from_int(0), |a, b| a + b);
        assert_eq!(sum, exact::ratio(5, 2) - exact::ratio(1, 1i64 << (n + 1)));
        let roots: f64 = lam.iter().map(|l| exact::to_f64(l).sqrt()).sum();
        assert_eq!(roots, 2.0 + n as f64 / 2.0);
    }
}

#[test]
fn space_dimensions() {
    let dim = |s: SpaceSpec, d: usize| Space::new(s, d).unwrap().dim();
    assert_eq!(dim(SpaceSpec::Constant, 3), 1);
    assert_eq!(dim(SpaceSpec::Tensor(vec![2, 1]), 2), 6);
    assert_eq!(dim(SpaceSpec::TotalDegree(2), 2), 6);
    // boxes below (2,0) and (0,2): 1, x, x^2, y, y^2
    assert_eq!(dim(SpaceSpec::SpanSet(vec![vec![2, 0], vec![0, 2]]), 2), 5);
}

#[test]
fn tau_norms() {
    assert!(close(tau_norm(&[3.0, -4.0], 2.0), 5.0, 1e-15));
    assert!(close(tau_norm(&[1.0, 1.0], 0.5), 4.0, 1e-15));
    assert!(close(tau_norm(&[2.0, 0.0, 0.0], 1.0), 2.0, 1e-15));
}

#[test]
fn hilbert_limit_degree_one() {
    let g = hilbert_gram(1, 1e-8);
    for (x, e) in g.iter().zip([1.0, 0.5, 0.5, 1.0 / 3.0]) {
        assert!(close(*x, e, 1e-6));
    }
}
