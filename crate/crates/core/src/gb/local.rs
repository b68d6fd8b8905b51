//! The local formula on admissible triangles.
//!
//! A triangle is three vertices in counterclockwise chart order; edge `i`
//! runs from vertex `i` to vertex `i + 1` and is either a straight chart
//! segment or an arc of the singular set. At most one edge may be singular.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::quadrature::{chord_integral, solve_bracket, Estimate};
use super::SAFETY;
use crate::config::Config;
use crate::curvature::bend;
use crate::error::{Error, Result};
use crate::gauss;
use crate::model::CtbView;
use crate::sectors::{branch_initial_vector, branch_tangent, snapped_angle};
use crate::singular::{add, det, dot, level, norm, project, rot90, unit, Chord, SingularGraph};
use crate::Point;

/// Residual floor of the local check.
pub const LOCAL_FLOOR: f64 = 1e-4;
const RAY_SAMPLES: usize = 24;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    #[default]
    Segment,
    Singular,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Triangle {
    #[serde(default)]
    pub name: Option<String>,
    pub vertices: [Point; 3],
    #[serde(default)]
    pub edges: [EdgeKind; 3],
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalGbReport {
    pub name: Option<String>,
    pub vertices: [Point; 3],
    pub singular_vertex: [bool; 3],
    pub peak_vertex: Option<usize>,
    pub angles: [f64; 3],
    pub angle_excess: f64,
    pub boundary_kappa: Estimate,
    pub area_k: Estimate,
    pub interior_kappa_s: Estimate,
    /// `sum angles - pi - boundary - area - 2 interior`.
    pub residual: f64,
    pub budget: f64,
    pub pass: bool,
}

enum Edge {
    Segment(Point, Point),
    Singular(Vec<Point>),
}

fn dist(a: Point, b: Point) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn sub(a: Point, b: Point) -> [f64; 2] {
    [a.0 - b.0, a.1 - b.1]
}

/// Follows the singular set from `a` to `b` with chart step `h`.
fn follow_sigma(view: &dyn CtbView, graph: &SingularGraph, a: Point, b: Point, h: f64) -> Result<Vec<Point>> {
    let mut pts = vec![a];
    let mut x = a;
    let mut dir = unit(sub(b, a));
    let limit = (20.0 * dist(a, b) / h) as usize + 100;
    while dist(x, b) > 1.5 * h {
        if pts.len() > limit {
            return Err(Error::NotAdmissible(
                "singular edge does not reach its end vertex".into(),
            ));
        }
        let g = level(view, x)?.grad;
        let mut t = if norm(g) > 1e-8 * graph.grad_scale {
            unit(rot90(g))
        } else {
            dir
        };
        if dot(t, dir) < 0.0 {
            t = [-t[0], -t[1]];
        }
        let y = project(view, add(x, t, h), graph.tol_on_curve)?.ok_or(Error::NewtonDivergence(x))?;
        dir = unit(sub(y, x));
        x = y;
        pts.push(y);
    }
    pts.push(b);
    Ok(pts)
}

fn inside_polygon(poly: &[Point], x: Point) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.1 > x.1) != (b.1 > x.1) {
            let t = (x.1 - a.1) / (b.1 - a.1);
            if x.0 < a.0 + t * (b.0 - a.0) {
                inside = !inside;
            }
        }
    }
    inside
}

fn dist_to_polyline(poly: &[Point], x: Point) -> f64 {
    let mut best = f64::INFINITY;
    for w in poly.windows(2) {
        let c = sub(w[1], w[0]);
        let l2 = dot(c, c);
        let t = if l2 > 0.0 {
            (dot(sub(x, w[0]), c) / l2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        best = best.min(dist(x, add(w[0], c, t)));
    }
    best
}

/// Roots of `f` on `[0, 1]` from a uniform scan; samples with `|f| <= zero`
/// carry no sign.
fn scan_roots<F: FnMut(f64) -> Result<f64>>(mut f: F, m: usize, zero: f64) -> Result<Vec<f64>> {
    let mut prev: Option<(f64, f64)> = None;
    let mut out = Vec::new();
    for k in 0..=m {
        let x = k as f64 / m as f64;
        let y = f(x)?;
        if y.abs() <= zero {
            continue;
        }
        if let Some((px, py)) = prev {
            if (py > 0.0) != (y > 0.0) {
                out.push(solve_bracket(&mut f, px, x, py, y)?);
            }
        }
        prev = Some((x, y));
    }
    Ok(out)
}

struct Rules {
    lo: Vec<(f64, f64)>,
    hi: Vec<(f64, f64)>,
}

struct Ctx<'a> {
    view: &'a dyn CtbView,
    graph: &'a SingularGraph,
    rules: Rules,
    zero: f64,
    h: f64,
}

impl Ctx<'_> {
    fn sign(&self, p: Point) -> Result<f64> {
        Ok(if self.view.lambda(p, 0)?.value() >= 0.0 {
            1.0
        } else {
            -1.0
        })
    }

    /// `int sgn(lambda) kappa_hat dtau` along a straight segment.
    fn segment_kappa(&self, a: Point, b: Point, h: f64) -> Result<Estimate> {
        let d = sub(b, a);
        let mut knots = vec![0.0];
        knots.extend(scan_roots(
            |s| Ok(self.view.lambda(add(a, d, s), 0)?.value()),
            64,
            self.zero,
        )?);
        for &r in &knots[1..] {
            let p = add(a, d, r);
            let l = self.view.local(p, 0, None)?;
            if norm(l.psi(unit(d))) <= 1e-6 * l.singular_values().0 {
                return Err(Error::NotAdmissible(format!(
                    "edge crosses the singular set along the null direction at ({:.6}, {:.6})",
                    p.0, p.1
                )));
            }
        }
        knots.push(1.0);
        let panels = ((norm(d) / h).ceil() as usize).max(1);
        let mut q = [0.0; 2];
        for w in knots.windows(2) {
            let (s0, s1) = (w[0], w[1]);
            if s1 <= s0 {
                continue;
            }
            let sg = self.sign(add(a, d, 0.5 * (s0 + s1)))?;
            let len = (s1 - s0) / panels as f64;
            for k in 0..panels {
                let base = s0 + k as f64 * len;
                for (r, rule) in [&self.rules.lo, &self.rules.hi].into_iter().enumerate() {
                    for &(x, wt) in rule {
                        let p = add(a, d, base + x * len);
                        let bd = bend(self.view, p, d, [0.0, 0.0], None)?;
                        q[r] += wt * len * sg * bd.mu / (bd.speed * bd.speed);
                    }
                }
            }
        }
        Ok(Estimate {
            value: q[1],
            error: (q[0] - q[1]).abs(),
        })
    }

    /// Inner integral `int_0^1 r sgn(lambda) K lambda dr` on the ray from `o`
    /// to `e`, times `det(e - o, de)`; also the number of roots.
    fn ray(&self, o: Point, e: Point, de: [f64; 2]) -> Result<(f64, f64, usize)> {
        let v = sub(e, o);
        let roots = scan_roots(
            |r| Ok(self.view.lambda(add(o, v, r), 0)?.value()),
            RAY_SAMPLES,
            self.zero,
        )?;
        let jac = det(v, de);
        let mut knots = vec![0.0];
        knots.extend(roots.iter().copied());
        knots.push(1.0);
        let mut q = [0.0; 2];
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let sg = self.sign(add(o, v, 0.5 * (a + b)))?;
            let m = (((b - a) * norm(v) / self.h).ceil() as usize).max(1);
            let len = (b - a) / m as f64;
            for i in 0..m {
                let base = a + i as f64 * len;
                for (k, rule) in [&self.rules.lo, &self.rules.hi].into_iter().enumerate() {
                    for &(x, wt) in rule {
                        let r = base + x * len;
                        q[k] += wt * len * r * sg * self.view.k_lambda(add(o, v, r))?;
                    }
                }
            }
        }
        Ok((q[0] * jac, q[1] * jac, roots.len()))
    }

    fn ray_count(&self, o: Point, e: Point) -> Result<usize> {
        let v = sub(e, o);
        Ok(scan_roots(
            |r| Ok(self.view.lambda(add(o, v, r), 0)?.value()),
            RAY_SAMPLES,
            self.zero,
        )?
        .len())
    }
}

/// Point and derivative of the far edge at parameter `s` of one panel.
enum Panel {
    Line(Point, Point),
    Arc(Chord),
}

impl Panel {
    fn at(&self, ctx: &Ctx, s: f64) -> Result<(Point, [f64; 2])> {
        match self {
            Panel::Line(a, b) => Ok((add(*a, sub(*b, *a), s), sub(*b, *a))),
            Panel::Arc(ch) => {
                let cp = ch.at(ctx.view, s, ctx.graph.tol_on_curve)?;
                Ok((cp.p, cp.d1))
            }
        }
    }
}

/// Area integral of `K dA` over one star panel, with a square-root
/// substitution at a change of the number of crossings (a fold of the rays).
fn star_panel(ctx: &Ctx, o: Point, panel: &Panel) -> Result<Estimate> {
    let count = |s: f64| -> Result<usize> {
        let (e, _) = panel.at(ctx, s)?;
        ctx.ray_count(o, e)
    };
    let (c0, c1) = (count(0.0)?, count(1.0)?);
    let mut q = [0.0; 2];
    let mut piece = |a: f64, b: f64, towards: Option<f64>| -> Result<()> {
        for (k, rule) in [&ctx.rules.lo, &ctx.rules.hi].into_iter().enumerate() {
            for &(x, wt) in rule {
                let (s, jac) = match towards {
                    None => (a + x * (b - a), b - a),
                    Some(t) if t == b => (b - (b - a) * x * x, 2.0 * (b - a) * x),
                    Some(_) => (a + (b - a) * x * x, 2.0 * (b - a) * x),
                };
                let (e, de) = panel.at(ctx, s)?;
                let (lo, hi, _) = ctx.ray(o, e, de)?;
                q[k] += wt * jac * if k == 0 { lo } else { hi };
            }
        }
        Ok(())
    };
    if c0 == c1 {
        piece(0.0, 1.0, None)?;
    } else {
        let (mut a, mut b) = (0.0, 1.0);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if count(m)? == c0 {
                a = m;
            } else {
                b = m;
            }
        }
        let s = 0.5 * (a + b);
        piece(0.0, s, Some(s))?;
        piece(s, 1.0, Some(s))?;
    }
    Ok(Estimate {
        value: q[1],
        error: (q[0] - q[1]).abs(),
    })
}

/// Checks the local formula on `tri`.
pub fn verify_local_gb(
    view: &dyn CtbView,
    graph: &SingularGraph,
    tri: &Triangle,
    cfg: &Config,
) -> Result<LocalGbReport> {
    let domain = view.domain();
    let mut v = tri.vertices;
    for p in v {
        if !domain.contains(p) {
            return Err(Error::NotAdmissible(format!(
                "vertex ({}, {}) is outside the domain",
                p.0, p.1
            )));
        }
    }
    let area2 = det(sub(v[1], v[0]), sub(v[2], v[0]));
    if area2 <= 0.0 {
        return Err(Error::NotAdmissible(
            "vertices are not in counterclockwise order".into(),
        ));
    }
    let singular_edges: Vec<usize> = (0..3).filter(|&i| tri.edges[i] == EdgeKind::Singular).collect();
    if singular_edges.len() > 1 {
        return Err(Error::NotAdmissible(
            "at most one edge may lie on the singular set".into(),
        ));
    }
    let scale = domain.scale();
    let zero = 1e-12 * graph.lambda_scale;
    let on_sigma_tol = 1e3 * graph.tol_on_curve;
    let mut singular_vertex = [false; 3];
    for i in 0..3 {
        let on_edge = singular_edges.iter().any(|&e| e == i || (e + 1) % 3 == i);
        if on_edge {
            let q = project(view, v[i], graph.tol_on_curve)?.ok_or(Error::NewtonDivergence(v[i]))?;
            if dist(q, v[i]) > 1e-6 * scale {
                return Err(Error::NotAdmissible(format!(
                    "vertex {i} of a singular edge is not on the singular set"
                )));
            }
            v[i] = q;
            singular_vertex[i] = true;
        } else {
            singular_vertex[i] = view.lambda(v[i], 0)?.value().abs() <= on_sigma_tol;
        }
    }
    // peaks among the vertices and inside
    let mut peak_vertex = None;
    let mut peak_of = [None; 3];
    for (k, pk) in graph.peaks() {
        let hit = (0..3).find(|&i| dist(v[i], pk.point) <= 1e-6 * scale);
        match hit {
            Some(i) => {
                if peak_vertex.is_some() {
                    return Err(Error::NotAdmissible("more than one peak among the vertices".into()));
                }
                peak_vertex = Some(i);
                peak_of[i] = Some(k);
                v[i] = pk.point;
                singular_vertex[i] = true;
            }
            None => {
                if inside_polygon(&v, pk.point) {
                    return Err(Error::NotAdmissible("a peak lies inside the triangle".into()));
                }
            }
        }
    }

    let h = scale / cfg.quad_cells() as f64;
    let edges: Vec<Edge> = (0..3)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % 3]);
            Ok(match tri.edges[i] {
                EdgeKind::Segment => Edge::Segment(a, b),
                EdgeKind::Singular => Edge::Singular(follow_sigma(view, graph, a, b, 0.5 * h)?),
            })
        })
        .collect::<Result<_>>()?;
    let mut polygon = Vec::new();
    for e in &edges {
        match e {
            Edge::Segment(a, _) => polygon.push(*a),
            Edge::Singular(pts) => polygon.extend_from_slice(&pts[..pts.len() - 1]),
        }
    }

    let ctx = Ctx {
        view,
        graph,
        rules: Rules {
            lo: gauss::rule(cfg.quad_nodes),
            hi: gauss::rule(cfg.quad_nodes + 1),
        },
        zero,
        h,
    };

    // vertex angles
    let mut angles = [0.0; 3];
    for i in 0..3 {
        let p = v[i];
        let hint = view.frame_hint(p)?;
        let local = view.local(p, 0, Some(hint))?;
        let (sv_hi, _) = local.singular_values();
        let mut psis = Vec::with_capacity(2);
        for (edge, outgoing) in [(i, true), ((i + 2) % 3, false)] {
            let psi = match &edges[edge] {
                Edge::Segment(a, b) => {
                    let d = unit(if outgoing { sub(*b, *a) } else { sub(*a, *b) });
                    let s = local.psi(d);
                    if norm(s) <= 1e-8 * sv_hi {
                        return Err(Error::NotAdmissible(format!(
                            "edge {edge} leaves vertex {i} along the null direction"
                        )));
                    }
                    unit(s)
                }
                Edge::Singular(pts) => {
                    let next = if outgoing { pts[1] } else { pts[pts.len() - 2] };
                    let toward = sub(next, p);
                    match peak_of[i] {
                        Some(k) => {
                            let t = branch_tangent(view, p, graph.vertices[k].verdict, toward)?;
                            let iv = branch_initial_vector(view, p, t, graph.tol_on_curve, &graph.tol)?;
                            iv.psi
                        }
                        None => {
                            let g = level(view, p)?.grad;
                            let mut t = unit(rot90(g));
                            if dot(t, toward) < 0.0 {
                                t = [-t[0], -t[1]];
                            }
                            unit(local.psi(t))
                        }
                    }
                }
            };
            psis.push(psi);
        }
        angles[i] = if singular_vertex[i] {
            snapped_angle(psis[0], psis[1], graph.tol.angle)?
        } else {
            det(psis[0], psis[1]).abs().atan2(dot(psis[0], psis[1]))
        };
    }
    let angle_excess = angles.iter().sum::<f64>() - PI;

    // boundary
    let mut boundary = Estimate::default();
    let mut sing_poly: Vec<Point> = Vec::new();
    for e in &edges {
        match e {
            Edge::Segment(a, b) => boundary = boundary + ctx.segment_kappa(*a, *b, h)?,
            Edge::Singular(pts) => {
                for w in pts.windows(2) {
                    let ch = Chord::new(w[0], w[1]);
                    boundary = boundary + chord_integral(view, graph, &ch, &ctx.rules.lo, &ctx.rules.hi)?;
                }
                sing_poly = pts.clone();
            }
        }
    }

    // area: star from the vertex opposite the singular edge
    let far = singular_edges.first().copied().unwrap_or(1);
    let o = v[(far + 2) % 3];
    let panels: Vec<Panel> = match &edges[far] {
        Edge::Segment(a, b) => {
            let n = ((dist(*a, *b) / h).ceil() as usize).max(1);
            let d = sub(*b, *a);
            (0..n)
                .map(|k| Panel::Line(add(*a, d, k as f64 / n as f64), add(*a, d, (k + 1) as f64 / n as f64)))
                .collect()
        }
        Edge::Singular(pts) => pts.windows(2).map(|w| Panel::Arc(Chord::new(w[0], w[1]))).collect(),
    };
    let mut area = Estimate::default();
    for p in &panels {
        area = area + star_panel(&ctx, o, p)?;
    }

    // singular curvature of Sigma inside the triangle
    let mut sag: f64 = 0.0;
    for w in sing_poly.windows(2) {
        let ch = Chord::new(w[0], w[1]);
        if let Ok(cp) = ch.at(view, 0.5, graph.tol_on_curve) {
            sag = sag.max(dist(cp.p, ((w[0].0 + w[1].0) / 2.0, (w[0].1 + w[1].1) / 2.0)));
        }
    }
    let near = 2.0 * sag + 1e-9 * scale;
    let inside =
        |x: Point| inside_polygon(&polygon, x) && (sing_poly.is_empty() || dist_to_polyline(&sing_poly, x) > near);
    let mut interior = Estimate::default();
    for c in &graph.curves {
        for ch in c.chords() {
            let b = add(ch.a, ch.c, 1.0);
            let (ia, ib) = (inside(ch.a), inside(b));
            if !ia && !ib {
                continue;
            }
            let (s0, s1) = if ia && ib {
                (0.0, 1.0)
            } else {
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..60 {
                    let m = 0.5 * (lo + hi);
                    let pm = ch.at(view, m, graph.tol_on_curve)?.p;
                    if inside(pm) == ia {
                        lo = m;
                    } else {
                        hi = m;
                    }
                }
                let s = 0.5 * (lo + hi);
                if ia {
                    (0.0, s)
                } else {
                    (s, 1.0)
                }
            };
            let mut q = [0.0; 2];
            for (k, rule) in [&ctx.rules.lo, &ctx.rules.hi].into_iter().enumerate() {
                for &(x, wt) in rule {
                    let s = s0 + x * (s1 - s0);
                    let cp = ch.at(view, s, graph.tol_on_curve)?;
                    let sk = crate::curvature::singular_kappa(view, cp.p, cp.d1, cp.d2, graph.rank_tol)?;
                    q[k] += wt * (s1 - s0) * sk.density;
                }
            }
            interior = interior
                + Estimate {
                    value: q[1],
                    error: (q[0] - q[1]).abs(),
                };
        }
    }

    let residual = angle_excess - boundary.value - area.value - 2.0 * interior.value;
    let est = boundary.error + area.error + 2.0 * interior.error;
    let budget = (SAFETY * est).max(LOCAL_FLOOR);
    Ok(LocalGbReport {
        name: tri.name.clone(),
        vertices: v,
        singular_vertex,
        peak_vertex,
        angles,
        angle_excess,
        boundary_kappa: boundary,
        area_k: area,
        interior_kappa_s: interior,
        residual,
        budget,
        pass: residual.abs() < budget,
    })
}

/// Admissible triangles on the cuspidal edge and the swallowtail windows.
pub fn regression_set() -> Vec<(&'static str, Triangle)> {
    use EdgeKind::{Segment as S, Singular as G};
    let t = |name: &str, vertices: [Point; 3], edges: [EdgeKind; 3]| Triangle {
        name: Some(name.to_string()),
        vertices,
        edges,
    };
    vec![
        (
            "cuspidal-edge",
            t("c-plus", [(0.2, -0.3), (0.8, -0.3), (0.5, 0.4)], [S, S, S]),
        ),
        (
            "cuspidal-edge",
            t("c-minus", [(-0.8, -0.3), (-0.2, -0.3), (-0.5, 0.4)], [S, S, S]),
        ),
        (
            "cuspidal-edge",
            t("c-edge-on-sigma", [(0.0, -0.5), (0.6, 0.0), (0.0, 0.5)], [S, S, G]),
        ),
        (
            "cuspidal-edge",
            t("c-vertex-on-sigma", [(0.0, 0.0), (0.6, -0.3), (0.6, 0.4)], [S, S, S]),
        ),
        (
            "cuspidal-edge",
            t("c-straddle", [(-0.5, -0.3), (0.5, -0.5), (0.0, 0.5)], [S, S, S]),
        ),
        (
            "swallowtail",
            t("sw-peak-plus", [(0.0, 0.0), (0.3, -0.54), (0.3, 0.2)], [G, S, S]),
        ),
        (
            "swallowtail",
            t("sw-peak-minus", [(0.0, 0.0), (0.0, -0.6), (0.3, -0.54)], [S, S, G]),
        ),
        (
            "swallowtail",
            t("sw-straddle", [(0.05, -0.5), (0.45, -0.6), (0.25, 0.0)], [S, S, S]),
        ),
        (
            "swallowtail",
            t("sw-edge-on-sigma", [(0.2, -0.24), (0.4, -0.96), (0.5, -0.2)], [G, S, S]),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ParamDomain;
    use crate::expr::parse;
    use crate::model::FrontalSurface;

    #[test]
    fn sphere_triangle_area_term() {
        let f = ["cos(u)*cos(v)", "cos(u)*sin(v)", "sin(u)"].map(|s| parse(s).unwrap());
        let s = FrontalSurface::checked(
            "sphere",
            ParamDomain::rectangle((-1.2, 1.2), (-3.0, 3.0)).unwrap(),
            f.clone(),
            f,
        )
        .unwrap();
        let cfg = Config::with_grid(64);
        let g = SingularGraph::build(&s, &cfg).unwrap();
        let tri = Triangle {
            name: None,
            vertices: [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)],
            edges: [EdgeKind::Segment; 3],
        };
        let r = verify_local_gb(&s, &g, &tri, &cfg).unwrap();
        // int_0^1 (1 - u) cos u du
        assert!((r.area_k.value - (1.0 - 1f64.cos())).abs() < 1e-10, "{r:?}");
        assert!(r.residual.abs() < 1e-10, "{r:?}");
        // two edges are geodesics; the right angle at the origin is exact
        assert!((r.angles[0] - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn clockwise_and_null_crossings_are_rejected() {
        let s = crate::gallery::surface("swallowtail").unwrap();
        let cfg = Config::with_grid(32);
        let g = SingularGraph::build(&s, &cfg).unwrap();
        let cw = Triangle {
            name: None,
            vertices: [(0.2, -0.3), (0.5, 0.4), (0.8, -0.3)],
            edges: [EdgeKind::Segment; 3],
        };
        assert!(matches!(
            verify_local_gb(&s, &g, &cw, &cfg),
            Err(Error::NotAdmissible(_))
        ));
        let flat = Triangle {
            name: None,
            vertices: [(0.05, -0.5), (0.45, -0.5), (0.25, 0.0)],
            edges: [EdgeKind::Segment; 3],
        };
        assert!(matches!(
            verify_local_gb(&s, &g, &flat, &cfg),
            Err(Error::NotAdmissible(_))
        ));
        let around_peak = Triangle {
            name: None,
            vertices: [(-0.3, -0.3), (0.3, -0.3), (0.0, 0.4)],
            edges: [EdgeKind::Segment; 3],
        };
        assert!(matches!(
            verify_local_gb(&s, &g, &around_peak, &cfg),
            Err(Error::NotAdmissible(_))
        ));
    }
}
