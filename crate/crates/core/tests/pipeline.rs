use frontlab_core::curvature::gaussian_density;
use frontlab_core::gb::local::regression_set;
use frontlab_core::gb::{endpoint_limits, verify_global_gb, verify_local_gb};
use frontlab_core::sectors::all_sectors;
use frontlab_core::singular::{classify_point, Verdict};
use frontlab_core::{analyze, gallery, Config, CtbView, FrontalSurface, SingularGraph, Surface};

fn frontal(name: &str) -> FrontalSurface {
    match gallery::surface(name).unwrap() {
        Surface::Frontal(f) => f,
        Surface::Intrinsic(_) => unreachable!(),
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[test]
fn traced_points_lie_on_sigma_and_interior_samples_are_a2() {
    let cfg = Config::default();
    for name in [
        "cuspidal-edge",
        "swallowtail",
        "double-swallowtail",
        "scherbak",
        "parallel-torus",
    ] {
        let s = gallery::surface(name).unwrap();
        let g = SingularGraph::build(&s, &cfg).unwrap();
        assert!(!g.curves.is_empty(), "{name}");
        for c in &g.curves {
            for (k, &p) in c.points.iter().enumerate() {
                let lambda = s.lambda(p, 0).unwrap().value();
                assert!(lambda.abs() <= g.tol_on_curve, "{name}: |lambda| = {lambda:e}");
                let interior = k > 0 && k + 1 < c.points.len();
                if interior && k % 7 == 0 {
                    let v = classify_point(&s, &g, p).unwrap().verdict;
                    assert_eq!(v, Verdict::A2, "{name} at {p:?}");
                }
            }
        }
    }
}

#[test]
fn traced_sets_match_closed_forms() {
    let cfg = Config::default();
    type Case = (&'static str, fn(f64, f64) -> f64, fn(f64) -> Vec<(f64, f64)>);
    let cases: [Case; 3] = [
        ("swallowtail", |u, v| 6.0 * u * u + v, |t| vec![(t, -6.0 * t * t)]),
        (
            "double-swallowtail",
            |u, v| (v - 6f64.sqrt() * u).abs().min((v + 6f64.sqrt() * u).abs()) / 7f64.sqrt(),
            |t| vec![(t, 6f64.sqrt() * t), (t, -6f64.sqrt() * t)],
        ),
        (
            "scherbak",
            |u, v| u.abs().min((3.0 * u + 2.0 * v).abs() / 13f64.sqrt()),
            |t| vec![(0.0, t), (t, -1.5 * t)],
        ),
    ];
    for (name, dist, param) in cases {
        let s = gallery::surface(name).unwrap();
        let g = SingularGraph::build(&s, &cfg).unwrap();
        let pts: Vec<_> = g.curves.iter().flat_map(|c| c.points.iter().copied()).collect();
        let one_way = pts.iter().map(|p| dist(p.0, p.1)).fold(0.0, f64::max);
        assert!(
            one_way < 1e-6,
            "{name}: traced point off the closed form by {one_way:e}"
        );
        // every closed-form point inside the window is covered by the trace
        let mut other_way = 0.0f64;
        for i in 0..=200 {
            let t = -0.4 + 0.8 * i as f64 / 200.0;
            for q in param(t) {
                if q.0.abs() > 0.99 || q.1.abs() > 0.99 {
                    continue;
                }
                let d = pts
                    .iter()
                    .map(|p| (p.0 - q.0).hypot(p.1 - q.1))
                    .fold(f64::INFINITY, f64::min);
                other_way = other_way.max(d);
            }
        }
        assert!(
            other_way < g.cell,
            "{name}: closed-form point {other_way:e} from the trace"
        );
    }
}

#[test]
fn tangent_developable_peak_is_not_a3() {
    let a = analyze(
        &gallery::surface("tangent-developable-345").unwrap(),
        &Config::default(),
    )
    .unwrap();
    let v = a.vertices.iter().find(|v| v.point.0.hypot(v.point.1) < 1e-8).unwrap();
    assert_eq!(v.verdict, Verdict::NonDegeneratePeak);
}

#[test]
fn curl_of_connection_form_is_the_normal_jacobian() {
    for (name, pts) in [
        ("swallowtail", vec![(0.3, 0.2), (-0.5, -0.7), (0.1, -0.06)]),
        (
            "wavy-parallel-torus",
            vec![(0.4, 1.1), (2.0, 5.0), (3.3, 0.2), (1.2, 2.2)],
        ),
    ] {
        let f = frontal(name);
        for p in pts {
            let (_, nu) = f.jets(p, 1).unwrap();
            let n = [nu[0].value(), nu[1].value(), nu[2].value()];
            let nu_u = [nu[0].du(), nu[1].du(), nu[2].du()];
            let nu_v = [nu[0].dv(), nu[1].dv(), nu[2].dv()];
            let det = dot(cross(nu_u, nu_v), n);
            let curl = f.local(p, 1, None).unwrap().curl_omega();
            assert!((curl - det).abs() < 1e-7, "{name} {p:?}: {curl} vs {det}");
            assert!((f.k_lambda(p).unwrap() - det).abs() < 1e-7);
        }
    }
}

/// Brioschi formula with first fundamental form from jets and its
/// derivatives from central differences.
fn brioschi(f: &FrontalSurface, p: (f64, f64)) -> f64 {
    let efg = |q: (f64, f64)| {
        let (j, _) = f.jets(q, 1).unwrap();
        let fu = [j[0].du(), j[1].du(), j[2].du()];
        let fv = [j[0].dv(), j[1].dv(), j[2].dv()];
        [dot(fu, fu), dot(fu, fv), dot(fv, fv)]
    };
    let h = 1e-4;
    let at = |du: f64, dv: f64| efg((p.0 + du, p.1 + dv));
    let c = at(0.0, 0.0);
    let d_u = |k: usize| (at(h, 0.0)[k] - at(-h, 0.0)[k]) / (2.0 * h);
    let d_v = |k: usize| (at(0.0, h)[k] - at(0.0, -h)[k]) / (2.0 * h);
    let d_uu = |k: usize| (at(h, 0.0)[k] - 2.0 * c[k] + at(-h, 0.0)[k]) / (h * h);
    let d_vv = |k: usize| (at(0.0, h)[k] - 2.0 * c[k] + at(0.0, -h)[k]) / (h * h);
    let d_uv = |k: usize| (at(h, h)[k] - at(h, -h)[k] - at(-h, h)[k] + at(-h, -h)[k]) / (4.0 * h * h);
    let [e, ff, g] = c;
    let (eu, ev, fu, fv, gu, gv) = (d_u(0), d_v(0), d_u(1), d_v(1), d_u(2), d_v(2));
    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let a = det3([
        [-0.5 * d_vv(0) + d_uv(1) - 0.5 * d_uu(2), 0.5 * eu, fu - 0.5 * ev],
        [fv - 0.5 * gu, e, ff],
        [0.5 * gv, ff, g],
    ]);
    let b = det3([[0.0, 0.5 * ev, 0.5 * gu], [0.5 * ev, e, ff], [0.5 * gu, ff, g]]);
    (a - b) / (e * g - ff * ff).powi(2)
}

#[test]
fn gaussian_curvature_matches_brioschi_away_from_sigma() {
    let f = frontal("wavy-parallel-torus");
    let mut checked = 0;
    for i in 0..12 {
        for j in 0..12 {
            let p = (0.26 + 0.5 * i as f64, 0.13 + 0.5 * j as f64);
            let gd = gaussian_density(&f, p, 1e-12).unwrap();
            if gd.lambda.abs() < 0.05 {
                continue;
            }
            let k = gd.k.unwrap();
            let b = brioschi(&f, p);
            assert!((k - b).abs() <= 1e-4 * k.abs().max(1e-2), "{p:?}: {k} vs {b}");
            checked += 1;
        }
    }
    assert!(checked > 50);
}

#[test]
fn initial_vectors_are_parallel_and_sector_angles_sum_to_two_pi() {
    let cfg = Config::default();
    for name in [
        "swallowtail",
        "double-swallowtail",
        "scherbak",
        "tangent-developable-345",
        "wavy-parallel-torus",
    ] {
        let s = gallery::surface(name).unwrap();
        let g = SingularGraph::build(&s, &cfg).unwrap();
        for r in all_sectors(&s, &g).unwrap() {
            let psi0 = r.branches[0].initial.psi;
            for b in &r.branches {
                let x = b.initial.psi;
                let sin = (psi0[0] * x[1] - psi0[1] * x[0]).abs();
                assert!(sin < cfg.tol.angle, "{name}: initial vectors {psi0:?} and {x:?}");
            }
            let total: f64 = r.sectors.iter().map(|s| s.angle).sum();
            assert!((total - 2.0 * std::f64::consts::PI).abs() < 1e-12, "{name}: {total}");
            for sec in &r.sectors {
                assert!((sec.raw_angle - sec.angle).abs() < cfg.tol.angle, "{name}: {sec:?}");
            }
        }
    }
}

#[test]
fn double_swallowtail_sectors() {
    let s = gallery::surface("double-swallowtail").unwrap();
    let g = SingularGraph::build(&s, &Config::default()).unwrap();
    let r = &all_sectors(&s, &g).unwrap()[0];
    let mut turns: Vec<u8> = r.sectors.iter().map(|s| s.half_turns).collect();
    turns.sort();
    assert_eq!(turns, [0, 0, 1, 1]);
    assert_eq!(r.alpha_plus_half_turns + r.alpha_minus_half_turns, 2);
}

#[test]
fn euler_routes_and_gauss_map_degree_agree() {
    let cfg = Config::with_grid(64);
    for name in ["parallel-torus", "wavy-parallel-torus"] {
        let s = gallery::surface(name).unwrap();
        let g = SingularGraph::build(&s, &cfg).unwrap();
        let r = verify_global_gb(&s, &g, &cfg).unwrap();
        assert!(r.pass, "{name}");
        let est = r.integral_k_dhat_a.error + r.integral_curl_omega.error;
        assert!((r.chi_e - r.chi_e_curl).abs() <= (10.0 * est).max(1e-6), "{name}");
        let d = r.gauss_map_degree.as_ref().unwrap();
        assert_eq!(d.degree, d.check_degree);
        assert!((r.chi_e - 2.0 * d.degree as f64).abs() < 0.05, "{name}");
        if let Some(sum) = r.euler.sum_identity_holds {
            assert!(sum, "{name}");
        }
    }
}

#[test]
fn error_estimates_bound_the_refinement_change() {
    let run = |grid: usize| {
        let cfg = Config::with_grid(grid);
        let s = gallery::surface("parallel-torus").unwrap();
        let g = SingularGraph::build(&s, &cfg).unwrap();
        verify_global_gb(&s, &g, &cfg).unwrap()
    };
    let (a, b) = (run(64), run(128));
    for (x, y) in [
        (a.integral_k_da, b.integral_k_da),
        (a.integral_k_dhat_a, b.integral_k_dhat_a),
        (a.integral_kappa_s, b.integral_kappa_s),
    ] {
        // the estimates model quadrature error only, not rounding
        let rounding = 1e-12 * x.value.abs().max(1.0);
        assert!((x.value - y.value).abs() <= x.error + rounding, "{x:?} -> {y:?}");
    }
}

#[test]
fn endpoint_densities_settle_on_the_wavy_torus() {
    let cfg = Config::default();
    let s = gallery::surface("wavy-parallel-torus").unwrap();
    let g = SingularGraph::build(&s, &cfg).unwrap();
    let limits = endpoint_limits(&s, &g).unwrap();
    assert_eq!(limits.len(), 24);
    assert!(limits.iter().all(|l| l.limit.is_finite() && l.residual < 1e-5));
}

#[test]
fn local_residuals_shrink_under_refinement() {
    for (name, tri) in regression_set() {
        let s = gallery::surface(name).unwrap();
        let res: Vec<f64> = [64, 256]
            .into_iter()
            .map(|grid| {
                let cfg = Config::with_grid(grid);
                let g = SingularGraph::build(&s, &cfg).unwrap();
                verify_local_gb(&s, &g, &tri, &cfg).unwrap().residual.abs()
            })
            .collect();
        assert!(res[1] <= res[0] || res[1] < 1e-10, "{:?}: {res:?}", tri.name);
    }
}

#[test]
fn gallery_specs_round_trip() {
    for name in gallery::names() {
        let s = gallery::surface(name).unwrap();
        let text = frontlab_core::specfile::to_spec_string(&s);
        let back = frontlab_core::specfile::load_spec(text.as_bytes()).unwrap();
        assert_eq!(back.domain(), s.domain(), "{name}");
        for p in [(0.31, -0.27), (0.05, 0.6), (-0.44, 0.12)] {
            let (a, b) = (s.lambda(p, 1).unwrap(), back.lambda(p, 1).unwrap());
            assert!((a.value() - b.value()).abs() < 1e-12, "{name}");
            assert!(
                (a.du() - b.du()).abs() < 1e-12 && (a.dv() - b.dv()).abs() < 1e-12,
                "{name}"
            );
        }
    }
}
