//! The two input models and the uniform local view used downstream.
//!
//! Everything downstream sees a surface through [`CtbView`]: at a point it
//! yields the matrix `P` of `psi` in a positive orthonormal frame
//! `{e1, e2}` (columns are `psi(d/du)`, `psi(d/dv)`), the connection form
//! `omega = -<D e1, e2>` and the signed area density `lambda = det P`.

use serde::Serialize;

use crate::domain::ParamDomain;
use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::jet::{cross3, det3, dot3, Jet2};
use crate::tape::Tape;
use crate::Point;

pub const TOL_UNIT: f64 = 1e-9;
pub const TOL_PERP: f64 = 1e-9;
pub const TOL_COMPAT: f64 = 1e-7;
pub const CHECK_GRID: usize = 33;

/// Reference axis used to build the frame of a frontal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FrameHint(pub usize);

/// Local data at a point. `p[i][j]` is the `e_i` component of `psi(d_j)`.
#[derive(Debug, Clone, Copy)]
pub struct Local {
    pub p: [[Jet2; 2]; 2],
    pub omega: [Jet2; 2],
    pub lambda: Jet2,
    pub hint: FrameHint,
}

impl Local {
    pub fn order(&self) -> usize {
        self.lambda.order()
    }

    pub fn p_value(&self) -> [[f64; 2]; 2] {
        [
            [self.p[0][0].value(), self.p[0][1].value()],
            [self.p[1][0].value(), self.p[1][1].value()],
        ]
    }

    pub fn omega_value(&self) -> [f64; 2] {
        [self.omega[0].value(), self.omega[1].value()]
    }

    /// `psi(X)` in frame components.
    pub fn psi(&self, x: [f64; 2]) -> [f64; 2] {
        mat_vec(self.p_value(), x)
    }

    /// First fundamental form `P^T P` as jets.
    pub fn metric(&self) -> [[Jet2; 2]; 2] {
        let p = &self.p;
        let e = p[0][0] * p[0][0] + p[1][0] * p[1][0];
        let f = p[0][0] * p[0][1] + p[1][0] * p[1][1];
        let g = p[0][1] * p[0][1] + p[1][1] * p[1][1];
        [[e, f], [f, g]]
    }

    /// Components of `D_u psi(d_v) - D_v psi(d_u)`; needs order >= 1.
    pub fn compatibility(&self) -> [f64; 2] {
        let p = &self.p;
        let (wu, wv) = (self.omega[0].value(), self.omega[1].value());
        let c1 = p[0][1].du() + wu * p[1][1].value() - p[0][0].dv() - wv * p[1][0].value();
        let c2 = p[1][1].du() - wu * p[0][1].value() - p[1][0].dv() + wv * p[0][0].value();
        [c1, c2]
    }

    /// `d omega_v/du - d omega_u/dv`; needs order >= 1.
    pub fn curl_omega(&self) -> f64 {
        self.omega[1].du() - self.omega[0].dv()
    }

    /// Singular values of `P`, largest first.
    pub fn singular_values(&self) -> (f64, f64) {
        singular_values(self.p_value())
    }
}

pub fn mat_vec(m: [[f64; 2]; 2], x: [f64; 2]) -> [f64; 2] {
    [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]]
}

pub fn singular_values(m: [[f64; 2]; 2]) -> (f64, f64) {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let s = (a * a + b * b + c * c + d * d) / 2.0;
    let det = (a * d - b * c).abs();
    let disc = (s * s - det * det).max(0.0).sqrt();
    let hi = (s + disc).sqrt();
    let lo = if hi > 0.0 { det / hi } else { 0.0 };
    (hi, lo)
}

/// Uniform accessor over both input models.
pub trait CtbView: Send + Sync {
    fn name(&self) -> &str;
    fn domain(&self) -> &ParamDomain;
    /// Frame choice at `p`; pass it back to [`CtbView::local`] to compare
    /// frame components at nearby points.
    fn frame_hint(&self, p: Point) -> Result<FrameHint>;
    /// Local data with `P`, `omega`, `lambda` as jets of the given order (<= 2).
    fn local(&self, p: Point, order: usize, hint: Option<FrameHint>) -> Result<Local>;
    /// Signed area density as a jet of the given order (<= 2).
    fn lambda(&self, p: Point, order: usize) -> Result<Jet2>;
    /// The smooth product `K * lambda`.
    fn k_lambda(&self, p: Point) -> Result<f64>;
    fn as_frontal(&self) -> Option<&FrontalSurface> {
        None
    }
}

fn eval_point(domain: &ParamDomain, p: Point) -> Point {
    match domain {
        ParamDomain::FlatTorus { .. } => domain.wrap(p).unwrap_or(p),
        ParamDomain::Rectangle { .. } => p,
    }
}

fn check_order(order: usize) {
    assert!(order <= 2, "local data is available up to order 2");
}

/// A frontal `f` with unit normal `nu`, both given in closed form.
#[derive(Debug, Clone)]
pub struct FrontalSurface {
    pub name: String,
    pub domain: ParamDomain,
    pub f: [Expr; 3],
    pub nu: [Expr; 3],
    tape: Tape,
}

impl FrontalSurface {
    /// Builds the surface without checking the frontal conditions.
    pub fn new(name: impl Into<String>, domain: ParamDomain, f: [Expr; 3], nu: [Expr; 3]) -> Self {
        let all: Vec<Expr> = f.iter().chain(nu.iter()).cloned().collect();
        FrontalSurface {
            name: name.into(),
            domain,
            tape: Tape::compile(&all),
            f,
            nu,
        }
    }

    /// Builds and spot-checks on the standard sample grid.
    pub fn checked(name: impl Into<String>, domain: ParamDomain, f: [Expr; 3], nu: [Expr; 3]) -> Result<Self> {
        let s = FrontalSurface::new(name, domain, f, nu);
        s.validate(CHECK_GRID)?;
        Ok(s)
    }

    /// Jets of `f` and `nu` at `p`.
    pub fn jets(&self, p: Point, order: usize) -> Result<([Jet2; 3], [Jet2; 3])> {
        let j = self.tape.eval_jets(eval_point(&self.domain, p), order)?;
        Ok(([j[0], j[1], j[2]], [j[3], j[4], j[5]]))
    }

    pub fn position(&self, p: Point) -> Result<[f64; 3]> {
        let v = self.tape.eval_values(eval_point(&self.domain, p))?;
        Ok([v[0], v[1], v[2]])
    }

    pub fn normal(&self, p: Point) -> Result<[f64; 3]> {
        let v = self.tape.eval_values(eval_point(&self.domain, p))?;
        Ok([v[3], v[4], v[5]])
    }

    /// Checks `|nu| = 1` and `<df, nu> = 0` on an `n x n` grid.
    pub fn validate(&self, n: usize) -> Result<()> {
        for p in sample_grid(&self.domain, n) {
            let (f, nu) = self.jets(p, 1)?;
            let nv = [nu[0].value(), nu[1].value(), nu[2].value()];
            let norm = (nv[0] * nv[0] + nv[1] * nv[1] + nv[2] * nv[2]).sqrt();
            if (norm - 1.0).abs() > TOL_UNIT {
                return Err(Error::FrontalViolation {
                    point: p,
                    which: "unit normal",
                    magnitude: (norm - 1.0).abs(),
                });
            }
            for (which, d) in [("<f_u, nu> = 0", 0), ("<f_v, nu> = 0", 1)] {
                let df: Vec<f64> = f.iter().map(|c| if d == 0 { c.du() } else { c.dv() }).collect();
                let dot: f64 = df.iter().zip(&nv).map(|(a, b)| a * b).sum();
                let size = df.iter().map(|a| a * a).sum::<f64>().sqrt().max(1.0);
                if dot.abs() > TOL_PERP * size {
                    return Err(Error::FrontalViolation {
                        point: p,
                        which,
                        magnitude: dot.abs(),
                    });
                }
            }
        }
        if let ParamDomain::FlatTorus { u_period, v_period } = self.domain {
            for k in 0..n {
                let t = k as f64 / n as f64;
                for (a, b) in [
                    ((0.0, t * v_period), (u_period, t * v_period)),
                    ((t * u_period, 0.0), (t * u_period, v_period)),
                ] {
                    let fa = self.tape.eval_values(a)?;
                    let fb = self.tape.eval_values(b)?;
                    let gap = fa.iter().zip(&fb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                    let size = fa.iter().map(|x| x.abs()).fold(1.0, f64::max);
                    if gap > 1e-9 * size {
                        return Err(Error::FrontalViolation {
                            point: a,
                            which: "periodicity",
                            magnitude: gap,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Coordinate axis least aligned with `nu`.
    pub fn reference_axis(nu: [f64; 3]) -> usize {
        (0..3).min_by(|&a, &b| nu[a].abs().total_cmp(&nu[b].abs())).unwrap_or(0)
    }

    /// Orthonormal frame `(e1, e2)` of `nu^perp` built from axis `axis`.
    pub fn frame(nu: &[Jet2; 3], axis: usize) -> ([Jet2; 3], [Jet2; 3]) {
        let order = nu[0].order();
        let nr = nu[axis];
        let one = Jet2::constant(1.0, order);
        let inv = (one - (nr * nr))
            .sqrt()
            .and_then(|s| s.recip())
            .expect("reference axis parallel to the normal");
        let mut e1 = [nu[0].scale(-1.0), nu[1].scale(-1.0), nu[2].scale(-1.0)];
        for (k, c) in e1.iter_mut().enumerate() {
            *c = *c * nr;
            if k == axis {
                *c = *c + one;
            }
            *c = *c * inv;
        }
        let e2 = cross3(nu, &e1);
        (e1, e2)
    }

    /// A candidate normal `f_u x f_v / |f_u x f_v|`. It is undefined on the
    /// singular set and never substituted for a user supplied normal.
    pub fn candidate_normal(f: &[Expr; 3]) -> [Expr; 3] {
        let fu: Vec<Expr> = f.iter().map(|c| c.derivative(Var::U)).collect();
        let fv: Vec<Expr> = f.iter().map(|c| c.derivative(Var::V)).collect();
        let n = [
            fu[1].clone() * fv[2].clone() - fu[2].clone() * fv[1].clone(),
            fu[2].clone() * fv[0].clone() - fu[0].clone() * fv[2].clone(),
            fu[0].clone() * fv[1].clone() - fu[1].clone() * fv[0].clone(),
        ];
        let len = (n[0].clone().powi(2) + n[1].clone().powi(2) + n[2].clone().powi(2)).sqrt();
        n.map(|c| c / len.clone())
    }

    /// Same surface with `u` and `v` exchanged (reverses the domain orientation).
    pub fn swapped(&self) -> FrontalSurface {
        let sw = |e: &Expr| e.substitute(&Expr::v(), &Expr::u());
        let domain = match self.domain {
            ParamDomain::Rectangle {
                u_range,
                v_range,
                closed,
            } => ParamDomain::Rectangle {
                u_range: v_range,
                v_range: u_range,
                closed,
            },
            ParamDomain::FlatTorus { u_period, v_period } => ParamDomain::FlatTorus {
                u_period: v_period,
                v_period: u_period,
            },
        };
        FrontalSurface::new(
            format!("{}-swapped", self.name),
            domain,
            self.f.clone().map(|e| sw(&e)),
            self.nu.clone().map(|e| sw(&e)),
        )
    }

    /// Same map with `nu` replaced by `-nu` (reverses the co-orientation).
    pub fn flipped(&self) -> FrontalSurface {
        FrontalSurface::new(
            format!("{}-flipped", self.name),
            self.domain,
            self.f.clone(),
            self.nu.clone().map(|e| -e),
        )
    }

    /// Rewrites the limiting tangent bundle in frame form with one global
    /// reference axis, chosen as the least aligned with `nu` over the domain.
    pub fn to_intrinsic(&self) -> Result<IntrinsicCtb> {
        let mut worst = [0.0f64; 3];
        for p in sample_grid(&self.domain, CHECK_GRID) {
            let nu = self.normal(p)?;
            for k in 0..3 {
                worst[k] = worst[k].max(nu[k].abs());
            }
        }
        let axis = (0..3).min_by(|&a, &b| worst[a].total_cmp(&worst[b])).unwrap();
        if worst[axis] > 0.995 {
            return Err(Error::FrameInvalid((f64::NAN, f64::NAN)));
        }
        let nu = &self.nu;
        let nr = nu[axis].clone();
        let inv = Expr::num(1.0) / (Expr::num(1.0) - nr.clone().powi(2)).sqrt();
        let e1: Vec<Expr> = (0..3)
            .map(|k| {
                let base = -(nr.clone() * nu[k].clone());
                let c = if k == axis { Expr::num(1.0) + base } else { base };
                c * inv.clone()
            })
            .collect();
        let e2: Vec<Expr> = (0..3)
            .map(|k| {
                let (a, b) = ((k + 1) % 3, (k + 2) % 3);
                nu[a].clone() * e1[b].clone() - nu[b].clone() * e1[a].clone()
            })
            .collect();
        let dot = |a: &[Expr], b: &[Expr]| -> Expr {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.clone() * y.clone())
                .reduce(|s, t| s + t)
                .unwrap()
        };
        let fu: Vec<Expr> = self.f.iter().map(|c| c.derivative(Var::U)).collect();
        let fv: Vec<Expr> = self.f.iter().map(|c| c.derivative(Var::V)).collect();
        let p = [[dot(&fu, &e1), dot(&fv, &e1)], [dot(&fu, &e2), dot(&fv, &e2)]];
        let e1u: Vec<Expr> = e1.iter().map(|c| c.derivative(Var::U)).collect();
        let e1v: Vec<Expr> = e1.iter().map(|c| c.derivative(Var::V)).collect();
        let omega = [-dot(&e1u, &e2), -dot(&e1v, &e2)];
        Ok(IntrinsicCtb::new(
            format!("{}-intrinsic", self.name),
            self.domain,
            p,
            omega,
        ))
    }
}

impl CtbView for FrontalSurface {
    fn name(&self) -> &str {
        &self.name
    }

    fn domain(&self) -> &ParamDomain {
        &self.domain
    }

    fn frame_hint(&self, p: Point) -> Result<FrameHint> {
        Ok(FrameHint(FrontalSurface::reference_axis(self.normal(p)?)))
    }

    fn local(&self, p: Point, order: usize, hint: Option<FrameHint>) -> Result<Local> {
        check_order(order);
        let (f, nu) = self.jets(p, order + 1)?;
        let hint = match hint {
            Some(h) => h,
            None => FrameHint(FrontalSurface::reference_axis([
                nu[0].value(),
                nu[1].value(),
                nu[2].value(),
            ])),
        };
        if nu[hint.0].value().abs() > 0.999 {
            return Err(Error::FrameInvalid(p));
        }
        let (e1, e2) = FrontalSurface::frame(&nu, hint.0);
        let fu = [f[0].d_u(), f[1].d_u(), f[2].d_u()];
        let fv = [f[0].d_v(), f[1].d_v(), f[2].d_v()];
        let e1k = e1.map(|c| c.truncate(order));
        let e2k = e2.map(|c| c.truncate(order));
        let pm = [[dot3(&fu, &e1k), dot3(&fv, &e1k)], [dot3(&fu, &e2k), dot3(&fv, &e2k)]];
        let e1u = e1.map(|c| c.d_u());
        let e1v = e1.map(|c| c.d_v());
        let omega = [-dot3(&e1u, &e2k), -dot3(&e1v, &e2k)];
        let nuk = nu.map(|c| c.truncate(order));
        let lambda = det3(&fu, &fv, &nuk);
        Ok(Local {
            p: pm,
            omega,
            lambda,
            hint,
        })
    }

    fn lambda(&self, p: Point, order: usize) -> Result<Jet2> {
        check_order(order);
        let (f, nu) = self.jets(p, order + 1)?;
        let fu = [f[0].d_u(), f[1].d_u(), f[2].d_u()];
        let fv = [f[0].d_v(), f[1].d_v(), f[2].d_v()];
        Ok(det3(&fu, &fv, &nu.map(|c| c.truncate(order))))
    }

    fn k_lambda(&self, p: Point) -> Result<f64> {
        let (_, nu) = self.jets(p, 1)?;
        let nuu = nu.map(|c| c.d_u());
        let nuv = nu.map(|c| c.d_v());
        Ok(det3(&nuu, &nuv, &nu.map(|c| c.truncate(0))).value())
    }

    fn as_frontal(&self) -> Option<&FrontalSurface> {
        Some(self)
    }
}

/// A coherent tangent bundle given by `P` and `omega` in a fixed positive
/// orthonormal frame.
#[derive(Debug, Clone)]
pub struct IntrinsicCtb {
    pub name: String,
    pub domain: ParamDomain,
    pub p: [[Expr; 2]; 2],
    pub omega: [Expr; 2],
    tape: Tape,
}

impl IntrinsicCtb {
    /// Builds the bundle without checking compatibility.
    pub fn new(name: impl Into<String>, domain: ParamDomain, p: [[Expr; 2]; 2], omega: [Expr; 2]) -> Self {
        let all = [
            p[0][0].clone(),
            p[0][1].clone(),
            p[1][0].clone(),
            p[1][1].clone(),
            omega[0].clone(),
            omega[1].clone(),
        ];
        IntrinsicCtb {
            name: name.into(),
            domain,
            tape: Tape::compile(&all),
            p,
            omega,
        }
    }

    /// Builds and rejects bundles whose compatibility residual exceeds
    /// [`TOL_COMPAT`] on the standard grid.
    pub fn checked(name: impl Into<String>, domain: ParamDomain, p: [[Expr; 2]; 2], omega: [Expr; 2]) -> Result<Self> {
        let c = IntrinsicCtb::new(name, domain, p, omega);
        let (residual, at) = c.compatibility_residual(CHECK_GRID)?;
        if residual > TOL_COMPAT {
            return Err(Error::FrontalViolation {
                point: at,
                which: "compatibility",
                magnitude: residual,
            });
        }
        Ok(c)
    }

    fn jets(&self, p: Point, order: usize) -> Result<Vec<Jet2>> {
        self.tape.eval_jets(eval_point(&self.domain, p), order)
    }

    /// Largest compatibility residual over an `n x n` grid and where it occurs.
    pub fn compatibility_residual(&self, n: usize) -> Result<(f64, Point)> {
        check_compatibility(self, n)
    }
}

impl CtbView for IntrinsicCtb {
    fn name(&self) -> &str {
        &self.name
    }

    fn domain(&self) -> &ParamDomain {
        &self.domain
    }

    fn frame_hint(&self, _p: Point) -> Result<FrameHint> {
        Ok(FrameHint(0))
    }

    fn local(&self, p: Point, order: usize, _hint: Option<FrameHint>) -> Result<Local> {
        check_order(order);
        let j = self.jets(p, order)?;
        let pm = [[j[0], j[1]], [j[2], j[3]]];
        let lambda = pm[0][0] * pm[1][1] - pm[0][1] * pm[1][0];
        Ok(Local {
            p: pm,
            omega: [j[4], j[5]],
            lambda,
            hint: FrameHint(0),
        })
    }

    fn lambda(&self, p: Point, order: usize) -> Result<Jet2> {
        Ok(self.local(p, order, None)?.lambda)
    }

    fn k_lambda(&self, p: Point) -> Result<f64> {
        Ok(self.local(p, 1, None)?.curl_omega())
    }
}

/// Either input model.
#[derive(Debug, Clone)]
pub enum Surface {
    Frontal(FrontalSurface),
    Intrinsic(IntrinsicCtb),
}

impl Surface {
    pub fn view(&self) -> &dyn CtbView {
        match self {
            Surface::Frontal(s) => s,
            Surface::Intrinsic(c) => c,
        }
    }
}

impl CtbView for Surface {
    fn name(&self) -> &str {
        self.view().name()
    }
    fn domain(&self) -> &ParamDomain {
        self.view().domain()
    }
    fn frame_hint(&self, p: Point) -> Result<FrameHint> {
        self.view().frame_hint(p)
    }
    fn local(&self, p: Point, order: usize, hint: Option<FrameHint>) -> Result<Local> {
        self.view().local(p, order, hint)
    }
    fn lambda(&self, p: Point, order: usize) -> Result<Jet2> {
        self.view().lambda(p, order)
    }
    fn k_lambda(&self, p: Point) -> Result<f64> {
        self.view().k_lambda(p)
    }
    fn as_frontal(&self) -> Option<&FrontalSurface> {
        self.view().as_frontal()
    }
}

/// Row-major `n x n` sample grid over the fundamental domain, corners included.
pub fn sample_grid(domain: &ParamDomain, n: usize) -> Vec<Point> {
    let ((u0, u1), (v0, v1)) = domain.bounds();
    let n = n.max(2);
    let mut pts = Vec::with_capacity(n * n);
    for j in 0..n {
        let v = v0 + (v1 - v0) * j as f64 / (n - 1) as f64;
        for i in 0..n {
            pts.push((u0 + (u1 - u0) * i as f64 / (n - 1) as f64, v));
        }
    }
    pts
}

/// Largest `|D_u psi(d_v) - D_v psi(d_u)|` over an `n x n` grid.
pub fn check_compatibility(view: &dyn CtbView, n: usize) -> Result<(f64, Point)> {
    let mut worst = (0.0, (0.0, 0.0));
    for p in sample_grid(view.domain(), n) {
        let c = view.local(p, 1, None)?.compatibility();
        let r = c[0].hypot(c[1]);
        if r > worst.0 {
            worst = (r, p);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn e(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn cuspidal_edge() -> FrontalSurface {
        FrontalSurface::checked(
            "c",
            ParamDomain::rectangle((-1.0, 1.0), (-1.0, 1.0)).unwrap(),
            [e("u^2"), e("u^3"), e("v")],
            [e("3*u/sqrt(9*u^2+4)"), e("-2/sqrt(9*u^2+4)"), e("0")],
        )
        .unwrap()
    }

    #[test]
    fn frontal_lambda_routes_agree() {
        let s = cuspidal_edge();
        for p in [(0.3, 0.1), (-0.7, 0.5), (0.0, 0.2)] {
            let l = s.local(p, 2, None).unwrap();
            let direct = s.lambda(p, 2).unwrap();
            let det = l.p_value()[0][0] * l.p_value()[1][1] - l.p_value()[0][1] * l.p_value()[1][0];
            assert!((det - direct.value()).abs() < 1e-12);
            let closed = p.0 * (9.0 * p.0 * p.0 + 4.0f64).sqrt();
            assert!((direct.value() - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn non_unit_normal_is_rejected() {
        let r = FrontalSurface::checked(
            "bad",
            ParamDomain::rectangle((-1.0, 1.0), (-1.0, 1.0)).unwrap(),
            [e("u^2"), e("u^3"), e("v")],
            [e("1"), e("1"), e("0")],
        );
        assert!(matches!(
            r,
            Err(Error::FrontalViolation {
                which: "unit normal",
                ..
            })
        ));
    }

    #[test]
    fn frame_is_positive_orthonormal() {
        let s = cuspidal_edge();
        let (_, nu) = s.jets((0.4, 0.2), 1).unwrap();
        for axis in 0..3 {
            if nu[axis].value().abs() > 0.9 {
                continue;
            }
            let (e1, e2) = FrontalSurface::frame(&nu, axis);
            let v = |a: &[Jet2; 3]| [a[0].value(), a[1].value(), a[2].value()];
            let (a, b, n) = (v(&e1), v(&e2), v(&nu));
            let d = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
            assert!((d(a, a) - 1.0).abs() < 1e-14 && d(a, b).abs() < 1e-14 && d(a, n).abs() < 1e-14);
            assert!((det3(&e1, &e2, &nu).value() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn identity_bundle_is_compatible_and_flat() {
        let d = ParamDomain::rectangle((-1.0, 1.0), (-1.0, 1.0)).unwrap();
        let c = IntrinsicCtb::checked("id", d, [[e("1"), e("0")], [e("0"), e("1")]], [e("0"), e("0")]).unwrap();
        assert_eq!(c.compatibility_residual(9).unwrap().0, 0.0);
        assert_eq!(c.lambda((0.2, 0.3), 0).unwrap().value(), 1.0);
        assert_eq!(c.k_lambda((0.2, 0.3)).unwrap(), 0.0);
    }

    #[test]
    fn rotating_connection_fails_compatibility() {
        let d = ParamDomain::rectangle((-1.0, 1.0), (-1.0, 1.0)).unwrap();
        let p = [[e("1"), e("0")], [e("0"), e("1")]];
        let c = IntrinsicCtb::new("rot", d, p.clone(), [e("v"), e("0")]);
        // residual is |(v, 0)|, maximal on the edge v = +-1
        let (r, _) = c.compatibility_residual(CHECK_GRID).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert!(IntrinsicCtb::checked("rot", d, p, [e("v"), e("0")]).is_err());
    }

    #[test]
    fn frame_form_of_frontal_is_compatible() {
        let s = cuspidal_edge();
        let c = s.to_intrinsic().unwrap();
        let (r, _) = c.compatibility_residual(CHECK_GRID).unwrap();
        assert!(r < 1e-10, "{r}");
        let (r, _) = check_compatibility(&s, 17).unwrap();
        assert!(r < 1e-10, "{r}");
        for p in [(0.3, 0.1), (-0.5, -0.9)] {
            assert!((c.lambda(p, 0).unwrap().value() - s.lambda(p, 0).unwrap().value()).abs() < 1e-12);
            assert!((c.k_lambda(p).unwrap() - s.k_lambda(p).unwrap()).abs() < 1e-10);
        }
    }
}
