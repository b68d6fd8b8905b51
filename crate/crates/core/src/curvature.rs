//! Gaussian, geodesic and singular curvature.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{mat_vec, CtbView, FrameHint};
use crate::singular::classify::transversality;
use crate::singular::{det, dot, level, norm, null_direction, quad_form, rot90, unit, Level};
use crate::singular::{SingularCurve, SingularGraph, SingularSample};
use crate::Point;

/// `K lambda` and, away from the singular set, `K`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GaussianDensity {
    pub k_lambda: f64,
    pub lambda: f64,
    /// `None` when `|lambda| <= tol_sing`.
    pub k: Option<f64>,
}

pub fn gaussian_density(view: &dyn CtbView, p: Point, tol_sing: f64) -> Result<GaussianDensity> {
    let k_lambda = view.k_lambda(p)?;
    let lambda = view.lambda(p, 0)?.value();
    Ok(GaussianDensity {
        k_lambda,
        lambda,
        k: (lambda.abs() > tol_sing).then(|| k_lambda / lambda),
    })
}

/// Connection form `(omega_u, omega_v)` in the frame selected by `hint`.
pub fn connection_form(view: &dyn CtbView, p: Point, hint: Option<FrameHint>) -> Result<[f64; 2]> {
    Ok(view.local(p, 0, hint)?.omega_value())
}

/// `mu(psi(c'), D psi(c'))` and `|psi(c')|` for a curve with velocity `d1`
/// and acceleration `d2` at `p`.
#[derive(Debug, Clone, Copy)]
pub struct Bend {
    pub mu: f64,
    pub speed: f64,
    pub sigma: [f64; 2],
}

pub fn bend(view: &dyn CtbView, p: Point, d1: [f64; 2], d2: [f64; 2], hint: Option<FrameHint>) -> Result<Bend> {
    let l = view.local(p, 1, hint)?;
    let pv = l.p_value();
    let pu = [[l.p[0][0].du(), l.p[0][1].du()], [l.p[1][0].du(), l.p[1][1].du()]];
    let pvv = [[l.p[0][0].dv(), l.p[0][1].dv()], [l.p[1][0].dv(), l.p[1][1].dv()]];
    let sigma = mat_vec(pv, d1);
    let a = mat_vec(pu, d1);
    let b = mat_vec(pvv, d1);
    let c = mat_vec(pv, d2);
    let ds = [d1[0] * a[0] + d1[1] * b[0] + c[0], d1[0] * a[1] + d1[1] * b[1] + c[1]];
    let w = dot(l.omega_value(), d1);
    let speed = norm(sigma);
    Ok(Bend {
        mu: det(sigma, ds) - w * speed * speed,
        speed,
        sigma,
    })
}

/// Unit-speed velocity and acceleration of the level curve through `p`.
pub fn level_curve_jet(lv: &Level, forward: [f64; 2]) -> ([f64; 2], [f64; 2]) {
    let mut t = unit(rot90(lv.grad));
    if dot(t, forward) < 0.0 {
        t = [-t[0], -t[1]];
    }
    let g2 = dot(lv.grad, lv.grad);
    let k = -quad_form(lv.hess, t) / g2;
    (t, [k * lv.grad[0], k * lv.grad[1]])
}

/// Curvature of a non-singular arc.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GeodesicCurvature {
    pub kappa_hat: f64,
    /// Region-signed curvature: `sgn(lambda) * kappa_hat`.
    pub kappa_tilde: f64,
    pub dtau_dt: f64,
}

pub fn geodesic_curvature(
    view: &dyn CtbView,
    p: Point,
    d1: [f64; 2],
    d2: [f64; 2],
    tol_sing: f64,
) -> Result<GeodesicCurvature> {
    let lambda = view.lambda(p, 0)?.value();
    if lambda.abs() <= tol_sing {
        return Err(Error::OnSingularSet(p));
    }
    let b = bend(view, p, d1, d2, None)?;
    let kappa_hat = b.mu / b.speed.powi(3);
    Ok(GeodesicCurvature {
        kappa_hat,
        kappa_tilde: lambda.signum() * kappa_hat,
        dtau_dt: b.speed,
    })
}

/// Singular curvature data at a point of an A2 curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SingularKappa {
    pub kappa_s: f64,
    /// `kappa_s * dtau/dt` for the parameter of `d1`.
    pub density: f64,
    pub dtau_dt: f64,
    /// Null direction with `det(d1, eta) > 0`.
    pub eta: [f64; 2],
    pub d_lambda_eta: f64,
}

pub fn singular_kappa(
    view: &dyn CtbView,
    p: Point,
    d1: [f64; 2],
    d2: [f64; 2],
    rank_tol: f64,
) -> Result<SingularKappa> {
    let mut eta = null_direction(view, p, rank_tol)?;
    if det(d1, eta) < 0.0 {
        eta = [-eta[0], -eta[1]];
    }
    let d_lambda_eta = dot(view.lambda(p, 1)?.gradient(), eta);
    let s = d_lambda_eta.signum();
    let b = bend(view, p, d1, d2, None)?;
    Ok(SingularKappa {
        kappa_s: s * b.mu / b.speed.powi(3),
        density: s * b.mu / (b.speed * b.speed),
        dtau_dt: b.speed,
        eta,
        d_lambda_eta,
    })
}

/// Singular curvature of a frontal from the image curve:
/// `sgn(d lambda(eta)) det(c', c'', nu) / |c'|^3` with `c = f(gamma)`.
pub fn frontal_kappa_s(view: &dyn CtbView, p: Point, d1: [f64; 2], d2: [f64; 2], rank_tol: f64) -> Result<Option<f64>> {
    let Some(fr) = view.as_frontal() else {
        return Ok(None);
    };
    let (f, nu) = fr.jets(p, 2)?;
    let mut c1 = [0.0; 3];
    let mut c2 = [0.0; 3];
    for i in 0..3 {
        let h = f[i].hessian();
        c1[i] = f[i].du() * d1[0] + f[i].dv() * d1[1];
        c2[i] = quad_form(h, d1) + f[i].du() * d2[0] + f[i].dv() * d2[1];
    }
    let n = [nu[0].value(), nu[1].value(), nu[2].value()];
    let cross = [
        c1[1] * c2[2] - c1[2] * c2[1],
        c1[2] * c2[0] - c1[0] * c2[2],
        c1[0] * c2[1] - c1[1] * c2[0],
    ];
    let d = cross[0] * n[0] + cross[1] * n[1] + cross[2] * n[2];
    let speed = (c1[0] * c1[0] + c1[1] * c1[1] + c1[2] * c1[2]).sqrt();
    let mut eta = null_direction(view, p, rank_tol)?;
    if det(d1, eta) < 0.0 {
        eta = [-eta[0], -eta[1]];
    }
    let s = dot(view.lambda(p, 1)?.gradient(), eta).signum();
    Ok(Some(s * d / speed.powi(3)))
}

/// Per-sample rows of a singular curve; samples at peak vertices are skipped
/// (the curvature is unbounded there). Fails with `NotA2` on a non-A2 sample.
pub fn curve_samples(view: &dyn CtbView, graph: &SingularGraph, curve: &SingularCurve) -> Result<Vec<SingularSample>> {
    let pts = &curve.points;
    let n = pts.len();
    let mut out = Vec::with_capacity(n);
    let mut t = 0.0;
    for k in 0..n {
        if k > 0 {
            t += (pts[k].0 - pts[k - 1].0).hypot(pts[k].1 - pts[k - 1].1);
        }
        let at_peak = (k == 0 && matches!(curve.start, crate::singular::EndTag::TerminatesAtPeak { .. }))
            || (k == n - 1 && matches!(curve.end, crate::singular::EndTag::TerminatesAtPeak { .. }));
        if at_peak {
            continue;
        }
        let p = pts[k];
        let lv = level(view, p)?;
        let forward = if k + 1 < n {
            [pts[k + 1].0 - p.0, pts[k + 1].1 - p.1]
        } else {
            [p.0 - pts[k - 1].0, p.1 - pts[k - 1].1]
        };
        let (d1, d2) = level_curve_jet(&lv, forward);
        if let Some(tr) = transversality(view, p, None)? {
            if tr.g.abs() <= graph.tol.transv {
                return Err(Error::NotA2 { index: k });
            }
        }
        let sk = singular_kappa(view, p, d1, d2, graph.rank_tol)?;
        let w = view.domain().wrap(p).unwrap_or(p);
        out.push(SingularSample {
            t,
            u: w.0,
            v: w.1,
            lambda: lv.value,
            eta: sk.eta,
            d_lambda_eta: sk.d_lambda_eta,
            kappa_s: sk.kappa_s,
            dtau_dt: sk.dtau_dt,
        });
    }
    Ok(out)
}

/// `kappa_s dtau/dt` (chart arclength) at distances `r0 2^-k` from an end of
/// `curve`, approaching the end vertex.
pub fn density_towards_end(
    view: &dyn CtbView,
    graph: &SingularGraph,
    curve: &SingularCurve,
    at_end: bool,
    r0: f64,
    levels: usize,
) -> Result<Vec<(f64, SingularKappa)>> {
    let c = if at_end { curve.clone() } else { curve.reversed() };
    let end = *c.points.last().unwrap();
    let mut out = Vec::with_capacity(levels);
    for k in 0..levels {
        let r = r0 * 0.5f64.powi(k as i32);
        // walk back along the polyline to chart distance ~r, then project
        let mut q = None;
        for w in c.points.windows(2).rev() {
            let (a, b) = (w[0], w[1]);
            let da = (a.0 - end.0).hypot(a.1 - end.1);
            if da >= r {
                let db = (b.0 - end.0).hypot(b.1 - end.1);
                let s = ((da - r) / (da - db).max(f64::MIN_POSITIVE)).clamp(0.0, 1.0);
                q = Some(((a.0 + s * (b.0 - a.0)), (a.1 + s * (b.1 - a.1)), [b.0 - a.0, b.1 - a.1]));
                break;
            }
        }
        let Some((x, y, dir)) = q else {
            continue;
        };
        let Some(p) = crate::singular::project(view, (x, y), graph.tol_on_curve)? else {
            return Err(Error::NewtonDivergence((x, y)));
        };
        let lv = level(view, p)?;
        let (d1, d2) = level_curve_jet(&lv, dir);
        out.push((r, singular_kappa(view, p, d1, d2, graph.rank_tol)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ParamDomain;
    use crate::expr::parse;
    use crate::model::FrontalSurface;

    fn sphere() -> FrontalSurface {
        let f = ["cos(u)*cos(v)", "cos(u)*sin(v)", "sin(u)"].map(|s| parse(s).unwrap());
        FrontalSurface::checked(
            "sphere",
            ParamDomain::rectangle((-1.2, 1.2), (-3.0, 3.0)).unwrap(),
            f.clone(),
            f,
        )
        .unwrap()
    }

    #[test]
    fn sphere_has_unit_curvature() {
        let s = sphere();
        for p in [(0.1, 0.2), (-0.7, 2.0), (1.0, -1.0)] {
            let g = gaussian_density(&s, p, 1e-12).unwrap();
            assert!((g.k.unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn latitude_circles() {
        let s = sphere();
        for u0 in [0.0, 0.3, -0.8] {
            let k = geodesic_curvature(&s, (u0, 0.4), [0.0, 1.0], [0.0, 0.0], 1e-12).unwrap();
            assert!((k.kappa_hat.abs() - f64::tan(u0).abs()).abs() < 1e-12, "{u0}: {k:?}");
            let g = geodesic_curvature(&s, (u0, 0.4), [1.0, 0.0], [0.0, 0.0], 1e-12).unwrap();
            assert!(g.kappa_hat.abs() < 1e-12);
        }
    }
}
