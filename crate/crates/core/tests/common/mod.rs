#![allow(dead_code)]

use rand::Rng;

use frontlab_core::curvature::{level_curve_jet, singular_kappa};
use frontlab_core::singular::level;
use frontlab_core::{eval_jet, parse, CtbView, Expr, Point};

/// Random smooth expression in `u, v` of bounded size and growth.
pub fn random_expr<R: Rng>(rng: &mut R, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..3) {
            0 => "u".into(),
            1 => "v".into(),
            _ => format!("{:.3}", rng.gen_range(-1.5..1.5)),
        };
    }
    let a = random_expr(rng, depth - 1);
    match rng.gen_range(0..11) {
        0 => format!("({a} + {})", random_expr(rng, depth - 1)),
        1 => format!("({a} - {})", random_expr(rng, depth - 1)),
        2 => format!("{a} * {}", random_expr(rng, depth - 1)),
        3 => format!("{a} / (1.5 + sin({}))", random_expr(rng, depth - 1)),
        4 => format!("sin({a})"),
        5 => format!("cos({a})"),
        6 => format!("exp(sin({a}))"),
        7 => format!("sqrt(1 + ({a})^2)"),
        8 => format!("log(2 + cos({a}))"),
        9 => format!("atan({a})"),
        _ => format!("({a})^{}", rng.gen_range(2..4)),
    }
}

pub fn expr(s: &str) -> Expr {
    parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

pub fn value(e: &Expr, p: Point) -> f64 {
    eval_jet(e, p, 0).unwrap().value()
}

/// Largest deviation of the order 1 and order 2 Taylor coefficients from
/// central differences of values.
pub fn jet_fd_error(e: &Expr, p: Point) -> (f64, f64) {
    let j = eval_jet(e, p, 2).unwrap();
    let f = |du: f64, dv: f64| value(e, (p.0 + du, p.1 + dv));
    let h = 1e-5;
    let d1 = [
        (f(h, 0.0) - f(-h, 0.0)) / (2.0 * h),
        (f(0.0, h) - f(0.0, -h)) / (2.0 * h),
    ];
    let e1 = (j.coeff(1, 0) - d1[0]).abs().max((j.coeff(0, 1) - d1[1]).abs());
    let h = 1e-4;
    let f0 = f(0.0, 0.0);
    let uu = (f(h, 0.0) - 2.0 * f0 + f(-h, 0.0)) / (h * h);
    let vv = (f(0.0, h) - 2.0 * f0 + f(0.0, -h)) / (h * h);
    let uv = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
    let e2 = (j.coeff(2, 0) - uu / 2.0)
        .abs()
        .max((j.coeff(1, 1) - uv).abs())
        .max((j.coeff(0, 2) - vv / 2.0).abs());
    (e1, e2)
}

/// Singular curvature at a point of the singular set, direction `forward`.
pub fn kappa_s_at(view: &dyn CtbView, p: Point, forward: [f64; 2], rank_tol: f64) -> f64 {
    let lv = level(view, p).unwrap();
    let (d1, d2) = level_curve_jet(&lv, forward);
    singular_kappa(view, p, d1, d2, rank_tol).unwrap().kappa_s
}

pub fn line(id: &str, pass: bool, detail: impl std::fmt::Display) -> bool {
    println!("criterion {id:>2}: {} | {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}
