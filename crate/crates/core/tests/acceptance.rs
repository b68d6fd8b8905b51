//! Acceptance criteria; one PASS/FAIL line each, non-zero exit on failure.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{expr, jet_fd_error, kappa_s_at, line, random_expr};
use frontlab_core::curvature::density_towards_end;
use frontlab_core::gb::local::regression_set;
use frontlab_core::gb::{verify_global_gb, verify_local_gb, GbReport};
use frontlab_core::model::check_compatibility;
use frontlab_core::{gallery, Analysis, Config, CtbView, SingularGraph, Surface};

const CLASSIFICATION_ENTRIES: [&str; 7] = [
    "cuspidal-edge",
    "swallowtail",
    "cuspidal-crosscap",
    "double-swallowtail",
    "cuspidal-lips",
    "scherbak",
    "tangent-developable-345",
];

fn frontal(name: &str) -> frontlab_core::FrontalSurface {
    match gallery::surface(name).unwrap() {
        Surface::Frontal(f) => f,
        Surface::Intrinsic(_) => unreachable!("gallery entries are frontals"),
    }
}

fn global(name: &str, grid: usize) -> (GbReport, f64) {
    let t = Instant::now();
    let cfg = Config::with_grid(grid);
    let s = gallery::surface(name).unwrap();
    let g = SingularGraph::build(&s, &cfg).unwrap();
    let r = verify_global_gb(&s, &g, &cfg).unwrap();
    (r, t.elapsed().as_secs_f64())
}

fn gallery_suite(analyses: &mut Vec<(String, Analysis)>) -> bool {
    let cfg = Config::default();
    let t = Instant::now();
    let mut failed = Vec::new();
    for name in gallery::names() {
        match gallery::run_entry(name, &cfg) {
            Ok((outcome, a)) => {
                if CLASSIFICATION_ENTRIES.contains(name) && !outcome.pass {
                    failed.push(format!("{name}: {:?}", outcome.require().unwrap_err()));
                }
                analyses.push((name.to_string(), a));
            }
            Err(e) => failed.push(format!("{name}: {e}")),
        }
    }
    let secs = t.elapsed().as_secs_f64();
    line(
        "1",
        failed.is_empty() && secs < 30.0,
        format!(
            "{} classification entries checked, failures {failed:?}, all 10 entries in {secs:.2} s",
            CLASSIFICATION_ENTRIES.len()
        ),
    )
}

fn theorem_a(analyses: &[(String, Analysis)]) -> bool {
    let mut peaks = 0;
    let mut bad = Vec::new();
    for (name, a) in analyses {
        for p in &a.peaks {
            peaks += 1;
            let sum_ok = p.alpha_plus + p.alpha_minus == 2.0 * PI;
            let d = p.alpha_plus - p.alpha_minus;
            let diff_ok = d == -2.0 * PI || d == 0.0 || d == 2.0 * PI;
            let snapped = (p.alpha_plus - PI * p.alpha_plus_half_turns as f64).abs() == 0.0
                && (p.alpha_minus - PI * p.alpha_minus_half_turns as f64).abs() == 0.0;
            if !(sum_ok && diff_ok && snapped) {
                bad.push(format!("{name} {:?}: {} {}", p.point, p.alpha_plus, p.alpha_minus));
            }
        }
    }
    let wavy = analyses
        .iter()
        .find(|(n, _)| n == "wavy-parallel-torus")
        .map_or(0, |(_, a)| a.peaks.len());
    line(
        "2",
        bad.is_empty() && wavy > 0,
        format!("{peaks} peaks ({wavy} on the wavy torus), violations {bad:?}"),
    )
}

fn immersed_torus() -> bool {
    let (r, secs) = global("torus-immersed", 128);
    let k = r.integral_k_da.value;
    line(
        "3",
        k.abs() < 1e-7 && r.chi_e.abs() < 1e-7 && secs < 10.0,
        format!("int K dA = {k:.2e}, chi_E = {:.2e}, {secs:.2} s at 128^2", r.chi_e),
    )
}

fn parallel_torus() -> bool {
    let (coarse, _) = global("parallel-torus", 128);
    let (fine, secs) = global("parallel-torus", 256);
    let budget = (10.0 * (fine.integral_k_da.error + 2.0 * fine.integral_kappa_s.error)).max(1e-3);
    let ratio = coarse.residual_eq_a.abs() / fine.residual_eq_a.abs();
    line(
        "4",
        fine.residual_eq_a.abs() < budget && ratio >= 4.0 && secs < 120.0,
        format!(
            "residual {:.2e} -> {:.2e} (x{ratio:.1}), budget {budget:.1e}, int K dA = {:.6}, {secs:.2} s at 256^2",
            coarse.residual_eq_a, fine.residual_eq_a, fine.integral_k_da.value
        ),
    )
}

fn wavy_torus() -> bool {
    let (r, secs) = global("wavy-parallel-torus", 128);
    let e = &r.euler;
    let rhs = e.chi_plus - e.chi_minus + r.peaks_positive as i64 - r.peaks_negative as i64;
    let near = (r.chi_e - r.chi_e.round()).abs();
    let deg = r.gauss_map_degree.as_ref().map(|d| d.degree);
    let deg_ok = deg.is_some_and(|d| (r.chi_e - 2.0 * d as f64).abs() <= 0.05);
    line(
        "5",
        near <= 0.05 && r.chi_e.round() as i64 == rhs && deg_ok,
        format!(
            "chi_E = {:.6}, chi(M+) - chi(M-) + #P+ - #P- = {} - {} + {} - {} = {rhs}, deg(nu) = {deg:?}, {secs:.2} s",
            r.chi_e, e.chi_plus, e.chi_minus, r.peaks_positive, r.peaks_negative
        ),
    )
}

fn local_gb() -> bool {
    let set = regression_set();
    let grids = [64, 128, 256];
    let mut worst_ratio = 0.0f64;
    let mut bad = Vec::new();
    for (name, tri) in &set {
        let s = gallery::surface(name).unwrap();
        let mut res = Vec::new();
        for grid in grids {
            let cfg = Config::with_grid(grid);
            let g = SingularGraph::build(&s, &cfg).unwrap();
            match verify_local_gb(&s, &g, tri, &cfg) {
                Ok(r) => {
                    if !r.pass {
                        bad.push(format!(
                            "{:?} grid {grid}: {:.2e} > {:.1e}",
                            tri.name, r.residual, r.budget
                        ));
                    }
                    worst_ratio = worst_ratio.max(r.residual.abs() / r.budget);
                    res.push(r.residual.abs());
                }
                Err(e) => bad.push(format!("{:?}: {e}", tri.name)),
            }
        }
        let decreasing = res.windows(2).all(|w| w[1] <= w[0] || w[1] < 1e-10);
        if !decreasing {
            bad.push(format!("{:?} not decreasing: {res:?}", tri.name));
        }
    }
    line(
        "6",
        bad.is_empty() && set.len() >= 6,
        format!(
            "{} triangles at grids {grids:?}, largest residual/budget {worst_ratio:.2e}, failures {bad:?}",
            set.len()
        ),
    )
}

fn invariance() -> bool {
    let cfg = Config::default();
    let f = frontal("swallowtail");
    let swapped = f.swapped();
    let flipped = f.flipped();
    let g = SingularGraph::build(&f, &cfg).unwrap();
    let rt = g.rank_tol;
    let mut worst = 0.0f64;
    let mut n = 0;
    for c in &g.curves {
        for k in 1..c.points.len() - 1 {
            let p = c.points[k];
            let fwd = [c.points[k + 1].0 - p.0, c.points[k + 1].1 - p.1];
            let base = kappa_s_at(&f, p, fwd, rt);
            let others = [
                kappa_s_at(&swapped, (p.1, p.0), [fwd[1], fwd[0]], rt),
                kappa_s_at(&flipped, p, fwd, rt),
                kappa_s_at(&f, p, [-fwd[0], -fwd[1]], rt),
            ];
            for o in others {
                worst = worst.max((o - base).abs());
            }
            n += 1;
        }
    }
    line(
        "7",
        n > 0 && worst < 1e-9,
        format!("{n} samples, largest deviation {worst:.2e} over swap / flip / reversal"),
    )
}

fn boundedness() -> bool {
    let cfg = Config::default();
    let s = gallery::surface("swallowtail").unwrap();
    let g = SingularGraph::build(&s, &cfg).unwrap();
    let Some((k, _)) = g.peaks().next() else {
        return line("8", false, "no peak found");
    };
    let mut ok = true;
    let mut details = Vec::new();
    for (curve, at_end) in g.incident(k) {
        let seq = density_towards_end(&s, &g, &g.curves[curve], at_end, 1e-2, 14).unwrap();
        let d: Vec<f64> = seq.iter().map(|(_, x)| x.density).collect();
        let ks: Vec<f64> = seq.iter().map(|(_, x)| x.kappa_s.abs()).collect();
        let n = d.len();
        let cauchy = (d[n - 1] - d[n - 2]).abs().max((d[n - 2] - d[n - 3]).abs());
        let growth = ks.windows(2).filter(|w| w[1] > w[0]).count();
        let monotone = ks.windows(2).all(|w| w[1] > w[0]);
        ok &= cauchy < 1e-5 && monotone && growth >= 4;
        details.push(format!(
            "limit {:.6} residual {cauchy:.1e}, |kappa_s| {:.2e} -> {:.2e} over {growth} refinements",
            d[n - 1],
            ks[0],
            ks[n - 1]
        ));
    }
    line("8", ok && details.len() == 2, details.join("; "))
}

fn parity() -> bool {
    let cfg = Config::default();
    let mut ok = true;
    let mut details = Vec::new();
    for name in ["cuspidal-edge", "swallowtail"] {
        let f = frontal(name);
        let ctb = f.to_intrinsic().unwrap();
        let compat = check_compatibility(&ctb, 33).unwrap().0;
        let ge = SingularGraph::build(&f, &cfg).unwrap();
        let gi = SingularGraph::build(&ctb, &cfg).unwrap();
        let mut dl = 0.0f64;
        for i in 0..=20 {
            for j in 0..=20 {
                let p = (-0.95 + 0.095 * i as f64, -0.95 + 0.095 * j as f64);
                let a = f.lambda(p, 0).unwrap().value();
                let b = ctb.lambda(p, 0).unwrap().value();
                dl = dl.max((a - b).abs());
            }
        }
        let mut dk = 0.0f64;
        for c in &ge.curves {
            for k in 1..c.points.len() - 1 {
                let p = c.points[k];
                let fwd = [c.points[k + 1].0 - p.0, c.points[k + 1].1 - p.1];
                dk = dk.max((kappa_s_at(&f, p, fwd, ge.rank_tol) - kappa_s_at(&ctb, p, fwd, gi.rank_tol)).abs());
            }
        }
        let ve: Vec<_> = ge.vertices.iter().map(|v| (v.verdict, v.point)).collect();
        let vi: Vec<_> = gi.vertices.iter().map(|v| (v.verdict, v.point)).collect();
        let same_class = ve.len() == vi.len()
            && ve
                .iter()
                .zip(&vi)
                .all(|(a, b)| a.0 == b.0 && (a.1 .0 - b.1 .0).hypot(a.1 .1 - b.1 .1) < 1e-7)
            && ge.curves.len() == gi.curves.len();
        ok &= dl < 1e-7 && dk < 1e-7 && same_class && compat < 1e-7;
        details.push(format!(
            "{name}: |d lambda| {dl:.1e}, |d kappa_s| {dk:.1e}, classes equal {same_class}, compatibility {compat:.1e}"
        ));
    }
    line("9", ok, details.join("; "))
}

fn jets() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    let mut worst = (0.0f64, 0.0f64);
    let mut count = 0;
    for _ in 0..100 {
        let e = expr(&random_expr(&mut rng, 4));
        let p = (
            rand::Rng::gen_range(&mut rng, -1.0..1.0),
            rand::Rng::gen_range(&mut rng, -1.0..1.0),
        );
        let (e1, e2) = jet_fd_error(&e, p);
        worst = (worst.0.max(e1), worst.1.max(e2));
        count += 1;
    }
    line(
        "10",
        count == 100 && worst.0 < 1e-6 && worst.1 < 1e-6,
        format!(
            "{count} expressions, order 1 error {:.1e}, order 2 error {:.1e}",
            worst.0, worst.1
        ),
    )
}

fn main() {
    // cargo passes harness flags such as `--list` or `--format`; a listing
    // request must not run the suite
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut analyses = Vec::new();
    let results = [
        gallery_suite(&mut analyses),
        theorem_a(&analyses),
        immersed_torus(),
        parallel_torus(),
        wavy_torus(),
        local_gb(),
        invariance(),
        boundedness(),
        parity(),
        jets(),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
