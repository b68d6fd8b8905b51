mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{expr, jet_fd_error, kappa_s_at, random_expr};
use frontlab_core::model::{FrontalSurface, IntrinsicCtb};
use frontlab_core::sectors::sector_angles_with_metric;
use frontlab_core::{eval_jet, gallery, Config, CtbView, SingularGraph, Surface};

fn frontal(name: &str) -> FrontalSurface {
    match gallery::surface(name).unwrap() {
        Surface::Frontal(f) => f,
        Surface::Intrinsic(_) => unreachable!(),
    }
}

fn window_point() -> impl Strategy<Value = (f64, f64)> {
    (-0.9f64..0.9, -0.9f64..0.9)
}

fn torus_point() -> impl Strategy<Value = (f64, f64)> {
    (0.0f64..std::f64::consts::TAU, 0.0f64..std::f64::consts::TAU)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jets_agree_with_central_differences(seed in any::<u64>(), p in window_point()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = expr(&random_expr(&mut rng, 3));
        let (e1, e2) = jet_fd_error(&e, p);
        prop_assert!(e1 < 1e-6, "{e}: order 1 error {e1:e}");
        prop_assert!(e2 < 1e-5, "{e}: order 2 error {e2:e}");
    }

    #[test]
    fn cubic_polynomials_are_reproduced(
        c in proptest::collection::vec(-3i32..=3, 10),
        p in window_point(),
    ) {
        let monomials = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)];
        let text = monomials
            .iter()
            .zip(&c)
            .map(|(&(i, j), k)| format!("({k})*(u - ({}))^{i}*(v - ({}))^{j}", p.0, p.1))
            .collect::<Vec<_>>()
            .join(" + ");
        let j = eval_jet(&expr(&text), p, 3).unwrap();
        for (&(a, b), &k) in monomials.iter().zip(&c) {
            prop_assert!((j.coeff(a, b) - k as f64).abs() <= 1e-12 * (1.0 + k.abs() as f64));
        }
    }

    #[test]
    fn lower_order_jets_are_truncations(seed in any::<u64>(), p in window_point()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = expr(&random_expr(&mut rng, 3));
        let full = eval_jet(&e, p, 3).unwrap();
        for order in 0..3 {
            let j = eval_jet(&e, p, order).unwrap();
            for a in 0..=order {
                for b in 0..=order - a {
                    let (x, y) = (j.coeff(a, b), full.coeff(a, b));
                    prop_assert!((x - y).abs() <= 1e-14 * x.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn lambda_routes_agree(p in window_point(), which in 0usize..4) {
        let name = ["cuspidal-edge", "swallowtail", "double-swallowtail", "scherbak"][which];
        let f = frontal(name);
        let (fj, nj) = f.jets(p, 1).unwrap();
        let fu = [fj[0].du(), fj[1].du(), fj[2].du()];
        let fv = [fj[0].dv(), fj[1].dv(), fj[2].dv()];
        let nu = [nj[0].value(), nj[1].value(), nj[2].value()];
        let det = fu[0] * (fv[1] * nu[2] - fv[2] * nu[1]) - fu[1] * (fv[0] * nu[2] - fv[2] * nu[0])
            + fu[2] * (fv[0] * nu[1] - fv[1] * nu[0]);
        let local = f.local(p, 0, None).unwrap();
        let m = local.p_value();
        let det_p = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        prop_assert!((det - f.lambda(p, 0).unwrap().value()).abs() < 1e-9);
        prop_assert!((det - det_p).abs() < 1e-9);
    }

    #[test]
    fn pull_back_metric_is_positive_semidefinite(p in torus_point()) {
        let f = frontal("wavy-parallel-torus");
        let m = f.local(p, 0, None).unwrap().p_value();
        let g = [
            [m[0][0] * m[0][0] + m[1][0] * m[1][0], m[0][0] * m[0][1] + m[1][0] * m[1][1]],
            [m[0][1] * m[0][0] + m[1][1] * m[1][0], m[0][1] * m[0][1] + m[1][1] * m[1][1]],
        ];
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        let lambda = f.lambda(p, 0).unwrap().value();
        prop_assert!(g[0][0] >= 0.0 && g[1][1] >= 0.0);
        prop_assert!(det >= -1e-12);
        prop_assert!((det - lambda * lambda).abs() <= 1e-9 * (1.0 + g[0][0] * g[1][1]));
    }

    #[test]
    fn frame_form_is_compatible(p in window_point(), which in 0usize..2) {
        let f = frontal(["cuspidal-edge", "swallowtail"][which]);
        let ctb: IntrinsicCtb = f.to_intrinsic().unwrap();
        let c = ctb.local(p, 1, None).unwrap().compatibility();
        prop_assert!(c[0].hypot(c[1]) < 1e-9);
        prop_assert!((ctb.lambda(p, 0).unwrap().value() - f.lambda(p, 0).unwrap().value()).abs() < 1e-9);
    }

    #[test]
    fn kappa_s_ignores_speed_and_direction(
        u in prop_oneof![-0.35f64..-0.02, 0.02f64..0.35],
        scale in 0.01f64..100.0,
        reverse in any::<bool>(),
    ) {
        // the swallowtail's singular set is v = -6 u^2
        let f = frontal("swallowtail");
        let p = (u, -6.0 * u * u);
        let base = kappa_s_at(&f, p, [1.0, -12.0 * u], 1e-8);
        let s = if reverse { -scale } else { scale };
        let other = kappa_s_at(&f, p, [s, -12.0 * u * s], 1e-8);
        let flipped = kappa_s_at(&f.flipped(), p, [1.0, -12.0 * u], 1e-8);
        let swapped = kappa_s_at(&f.swapped(), (p.1, p.0), [-12.0 * u, 1.0], 1e-8);
        for k in [other, flipped, swapped] {
            prop_assert!((k - base).abs() <= 1e-9 * base.abs().max(1.0), "{k} vs {base}");
        }
    }

    #[test]
    fn lambda_sign_is_constant_off_the_singular_set(p in window_point()) {
        let f = frontal("swallowtail");
        let s = 6.0 * p.0 * p.0 + p.1;
        prop_assume!(s.abs() > 1e-3);
        let lambda = f.lambda(p, 0).unwrap().value();
        prop_assert!(lambda * s > 0.0, "lambda {lambda} at {p:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn branch_classes_do_not_depend_on_the_metric(
        a in -1.0f64..1.0,
        b in -1.0f64..1.0,
        c in -1.0f64..1.0,
        which in 0usize..3,
    ) {
        let name = ["double-swallowtail", "scherbak", "swallowtail"][which];
        let s = gallery::surface(name).unwrap();
        let g = SingularGraph::build(&s, &Config::default()).unwrap();
        let (k, _) = g.peaks().next().unwrap();
        // g' = g + 0.3 L L^T with L lower triangular
        let l = [[a, 0.0], [b, c]];
        let pert = [
            [l[0][0] * l[0][0], l[0][0] * l[1][0]],
            [l[1][0] * l[0][0], l[1][0] * l[1][0] + l[1][1] * l[1][1]],
        ];
        let metric = [
            [1.0 + 0.3 * pert[0][0], 0.3 * pert[0][1]],
            [0.3 * pert[1][0], 1.0 + 0.3 * pert[1][1]],
        ];
        let base = sector_angles_with_metric(&s, &g, k, [[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let other = sector_angles_with_metric(&s, &g, k, metric).unwrap();
        let classes = |r: &frontlab_core::sectors::PeakSectorReport| {
            let mut v: Vec<_> = r.branches.iter().map(|b| (b.curve, b.at_end, format!("{:?}", b.class))).collect();
            v.sort();
            v
        };
        prop_assert_eq!(classes(&base), classes(&other));
        prop_assert_eq!(base.alpha_plus_half_turns, other.alpha_plus_half_turns);
        prop_assert_eq!(base.alpha_minus_half_turns, other.alpha_minus_half_turns);
    }
}
