//! Quadrature of `K dA`, `K dA-hat` and `kappa_s dtau` on a Sigma-aware grid.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::curvature::singular_kappa;
use crate::error::Result;
use crate::gauss;
use crate::model::CtbView;
use crate::singular::{Chord, SingularGraph};
use crate::Point;

/// A value with an error estimate from nested Gauss rules.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    fn from_pair(a: f64, b: f64) -> Estimate {
        Estimate {
            value: b,
            error: (a - b).abs(),
        }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate {
            value: self.value + o.value,
            error: self.error + o.error,
        }
    }
}

/// Solves `f = 0` on `[a, b]` given values of opposite sign at the ends.
pub fn solve_bracket<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, fa: f64, fb: f64) -> Result<f64> {
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let mut side = 0;
    let scale = a.abs().max(b.abs()).max(1.0);
    for _ in 0..200 {
        let mut c = if fb != fa {
            (a * fb - b * fa) / (fb - fa)
        } else {
            0.5 * (a + b)
        };
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c)?;
        if fc == 0.0 || (b - a).abs() < 4.0 * f64::EPSILON * scale {
            return Ok(c);
        }
        if (fc > 0.0) == (fa > 0.0) {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}

/// Roots of `f` on `(lo, hi)` near the approximate locations `approx`.
/// Brackets are formed at midpoints between approximations, so close pairs
/// of roots are separated; only actual sign changes are solved.
pub fn roots_in<F: FnMut(f64) -> Result<f64>>(mut f: F, lo: f64, hi: f64, approx: &[f64]) -> Result<Vec<f64>> {
    let mut ap: Vec<f64> = approx.iter().copied().filter(|x| *x > lo && *x < hi).collect();
    ap.sort_by(f64::total_cmp);
    let mut pts = vec![lo, hi];
    for w in ap.windows(2) {
        pts.push(0.5 * (w[0] + w[1]));
    }
    if ap.is_empty() {
        for k in 1..4 {
            pts.push(lo + (hi - lo) * k as f64 / 4.0);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let vals: Vec<f64> = pts.iter().map(|&x| f(x)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for k in 0..pts.len() - 1 {
        let (fa, fb) = (vals[k], vals[k + 1]);
        if (fa >= 0.0) != (fb >= 0.0) {
            out.push(solve_bracket(&mut f, pts[k], pts[k + 1], fa, fb)?);
        }
    }
    Ok(out)
}

/// Quadrature cell crossed by the singular set.
#[derive(Debug, Clone, Default)]
struct CutCell {
    /// Polyline chords, translated next to this cell.
    chords: Vec<(Point, Point)>,
    peaks_v: Vec<f64>,
}

/// Grid of quadrature cells with the cells crossed by Sigma marked.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub n: usize,
    pub lo: [f64; 2],
    pub h: [f64; 2],
    pub periodic: bool,
    cut: BTreeMap<(usize, usize), CutCell>,
}

impl Decomposition {
    pub fn build(view: &dyn CtbView, graph: &SingularGraph, cfg: &Config) -> Result<Decomposition> {
        let domain = view.domain();
        let ((u0, u1), (v0, v1)) = domain.bounds();
        let n = cfg.quad_cells();
        let h = [(u1 - u0) / n as f64, (v1 - v0) / n as f64];
        let mut d = Decomposition {
            n,
            lo: [u0, v0],
            h,
            periodic: domain.is_compact(),
            cut: BTreeMap::new(),
        };
        for c in &graph.curves {
            for w in c.points.windows(2) {
                let (a, b) = (w[0], w[1]);
                let ch = Chord::new(a, b);
                let mid = ch
                    .at(view, 0.5, graph.tol_on_curve)
                    .map(|cp| cp.p)
                    .unwrap_or(((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0));
                let sag = (mid.0 - 0.5 * (a.0 + b.0)).hypot(mid.1 - 0.5 * (a.1 + b.1));
                let margin = 2.0 * sag + 1e-9 * h[0].max(h[1]);
                let len = ch.length();
                let steps = ((len / (0.125 * h[0].min(h[1]))).ceil() as usize).max(1);
                for k in 0..=steps {
                    let t = k as f64 / steps as f64;
                    let x = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
                    for (ci, cj, shift) in d.cells_near(x, margin) {
                        let e = d.cut.entry((ci, cj)).or_default();
                        let seg = ((a.0 + shift.0, a.1 + shift.1), (b.0 + shift.0, b.1 + shift.1));
                        if !e.chords.contains(&seg) {
                            e.chords.push(seg);
                        }
                    }
                }
            }
        }
        for (k, v) in graph.vertices.iter().enumerate() {
            if graph.incident(k).is_empty() {
                continue;
            }
            for (ci, cj, shift) in d.cells_near(v.point, 1e-9 * h[0].max(h[1])) {
                d.cut.entry((ci, cj)).or_default().peaks_v.push(v.point.1 + shift.1);
            }
        }
        Ok(d)
    }

    pub fn cut_cells(&self) -> usize {
        self.cut.len()
    }

    fn origin(&self, i: usize, j: usize) -> Point {
        (self.lo[0] + i as f64 * self.h[0], self.lo[1] + j as f64 * self.h[1])
    }

    /// Cells within `margin` of `x`, with the period shift that maps `x`
    /// next to each cell.
    fn cells_near(&self, x: Point, margin: f64) -> Vec<(usize, usize, (f64, f64))> {
        let n = self.n as i64;
        let fi = (x.0 - self.lo[0]) / self.h[0];
        let fj = (x.1 - self.lo[1]) / self.h[1];
        let mi = margin / self.h[0];
        let mj = margin / self.h[1];
        let mut out = Vec::new();
        let (i_lo, i_hi) = ((fi - mi).floor() as i64, (fi + mi).floor() as i64);
        let (j_lo, j_hi) = ((fj - mj).floor() as i64, (fj + mj).floor() as i64);
        for i in i_lo..=i_hi {
            for j in j_lo..=j_hi {
                let (ii, jj) = if self.periodic {
                    (i.rem_euclid(n), j.rem_euclid(n))
                } else {
                    if i < 0 || j < 0 || i >= n || j >= n {
                        continue;
                    }
                    (i, j)
                };
                let shift = ((ii - i) as f64 * self.h[0], (jj - j) as f64 * self.h[1]);
                let e = (ii as usize, jj as usize, shift);
                if !out
                    .iter()
                    .any(|o: &(usize, usize, (f64, f64))| o.0 == e.0 && o.1 == e.1)
                {
                    out.push(e);
                }
            }
        }
        out
    }
}

/// Integrals over the whole domain.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct AreaIntegrals {
    /// `int K dA = int sgn(lambda) K lambda du dv`.
    pub k_da: Estimate,
    /// `int K dA-hat = int K lambda du dv`.
    pub k_dhat_a: Estimate,
    /// `int (d omega_v/du - d omega_u/dv) du dv`.
    pub curl_omega: Estimate,
}

impl std::ops::Add for AreaIntegrals {
    type Output = AreaIntegrals;
    fn add(self, o: AreaIntegrals) -> AreaIntegrals {
        AreaIntegrals {
            k_da: self.k_da + o.k_da,
            k_dhat_a: self.k_dhat_a + o.k_dhat_a,
            curl_omega: self.curl_omega + o.curl_omega,
        }
    }
}

struct Rules {
    lo: Vec<(f64, f64)>,
    hi: Vec<(f64, f64)>,
}

fn signed_k(view: &dyn CtbView, p: Point) -> Result<(f64, f64)> {
    let kl = view.k_lambda(p)?;
    let l = view.lambda(p, 0)?.value();
    Ok((if l >= 0.0 { kl } else { -kl }, kl))
}

fn curl_at(view: &dyn CtbView, p: Point) -> Result<f64> {
    let hint = view.frame_hint(p)?;
    Ok(view.local(p, 1, Some(hint))?.curl_omega())
}

/// Tensor rules on a whole cell.
fn tensor_cell(
    view: &dyn CtbView,
    o: Point,
    h: [f64; 2],
    rules: &Rules,
    with_curl: bool,
) -> Result<(AreaIntegrals, bool)> {
    let mut res = [[0.0f64; 3]; 2];
    let mut signs = (false, false);
    for (r, rule) in [&rules.lo, &rules.hi].into_iter().enumerate() {
        for &(x, wx) in rule {
            for &(y, wy) in rule {
                let p = (o.0 + x * h[0], o.1 + y * h[1]);
                let (s, kl) = signed_k(view, p)?;
                let w = wx * wy * h[0] * h[1];
                res[r][0] += w * s;
                res[r][1] += w * kl;
                if with_curl {
                    res[r][2] += w * curl_at(view, p)?;
                }
                let l = view.lambda(p, 0)?.value();
                if l >= 0.0 {
                    signs.0 = true;
                } else {
                    signs.1 = true;
                }
            }
        }
    }
    Ok((
        AreaIntegrals {
            k_da: Estimate::from_pair(res[0][0], res[1][0]),
            k_dhat_a: Estimate::from_pair(res[0][1], res[1][1]),
            curl_omega: Estimate::from_pair(res[0][2], res[1][2]),
        },
        signs.0 && signs.1,
    ))
}

/// Inner integral of `sgn(lambda) K lambda` over `u in [u0, u1]` at fixed `v`
/// with both rules.
fn inner(view: &dyn CtbView, v: f64, u0: f64, u1: f64, chords: &[(Point, Point)], rules: &Rules) -> Result<(f64, f64)> {
    let mut approx = Vec::new();
    for &(a, b) in chords {
        if (a.1 - v) * (b.1 - v) <= 0.0 && a.1 != b.1 {
            let t = (v - a.1) / (b.1 - a.1);
            approx.push(a.0 + t * (b.0 - a.0));
        }
    }
    let roots = roots_in(|u| Ok(view.lambda((u, v), 0)?.value()), u0, u1, &approx)?;
    let mut knots = vec![u0];
    knots.extend(roots);
    knots.push(u1);
    let mut out = (0.0, 0.0);
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let s = if view.lambda((0.5 * (a + b), v), 0)?.value() >= 0.0 {
            1.0
        } else {
            -1.0
        };
        let mut q = [0.0; 2];
        for (r, rule) in [&rules.lo, &rules.hi].into_iter().enumerate() {
            for &(x, wx) in rule {
                q[r] += wx * view.k_lambda((a + x * (b - a), v))?;
            }
            q[r] *= s * (b - a);
        }
        out.0 += q[0];
        out.1 += q[1];
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Knot {
    Plain,
    Fold,
}

/// `sgn(lambda) K lambda` over a cut cell by iterated integration.
fn cut_cell(view: &dyn CtbView, o: Point, h: [f64; 2], cell: &CutCell, rules: &Rules, tol_on: f64) -> Result<Estimate> {
    let (u0, u1) = (o.0, o.0 + h[0]);
    let (v0, v1) = (o.1, o.1 + h[1]);
    let mut knots: Vec<(f64, Knot)> = vec![(v0, Knot::Plain), (v1, Knot::Plain)];
    // folds: points of Sigma with d lambda/du = 0
    for &(a, b) in &cell.chords {
        let ch = Chord::new(a, b);
        let lu = |s: f64| -> Result<Option<(f64, Point)>> {
            match ch.at(view, s, tol_on) {
                Ok(cp) => Ok(Some((cp.level.grad[0], cp.p))),
                Err(crate::error::Error::NewtonDivergence(_)) => Ok(None),
                Err(e) => Err(e),
            }
        };
        let (Some((fa, _)), Some((fb, _))) = (lu(0.0)?, lu(1.0)?) else {
            continue;
        };
        if (fa >= 0.0) == (fb >= 0.0) {
            continue;
        }
        let s = solve_bracket(|s| Ok(lu(s)?.map(|x| x.0).unwrap_or(0.0)), 0.0, 1.0, fa, fb)?;
        if let Some((_, p)) = lu(s)? {
            if p.0 >= u0 && p.0 <= u1 && p.1 > v0 && p.1 < v1 {
                knots.push((p.1, Knot::Fold));
            }
        }
    }
    // crossings of the vertical sides
    for side in [u0, u1] {
        let mut approx = Vec::new();
        for &(a, b) in &cell.chords {
            if (a.0 - side) * (b.0 - side) <= 0.0 && a.0 != b.0 {
                let t = (side - a.0) / (b.0 - a.0);
                approx.push(a.1 + t * (b.1 - a.1));
            }
        }
        for r in roots_in(|v| Ok(view.lambda((side, v), 0)?.value()), v0, v1, &approx)? {
            knots.push((r, Knot::Plain));
        }
    }
    for &pv in &cell.peaks_v {
        if pv > v0 && pv < v1 {
            knots.push((pv, Knot::Plain));
        }
    }
    knots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let eps = 1e-13 * h[1];
    let mut merged: Vec<(f64, Knot)> = Vec::new();
    for k in knots {
        match merged.last_mut() {
            Some(last) if (k.0 - last.0).abs() <= eps => {
                if k.1 == Knot::Fold {
                    last.1 = Knot::Fold;
                }
            }
            _ => merged.push(k),
        }
    }

    // `towards`: square-root behaviour at that end, removed by v = end -+ len t^2
    let piece = |a: f64, b: f64, towards: Option<f64>| -> Result<(f64, f64)> {
        let len = b - a;
        let mut q = [0.0; 2];
        for (r, rule) in [&rules.lo, &rules.hi].into_iter().enumerate() {
            for &(x, w) in rule {
                let (v, jac) = match towards {
                    None => (a + len * x, len),
                    Some(t) if t == b => (b - len * x * x, 2.0 * len * x),
                    Some(_) => (a + len * x * x, 2.0 * len * x),
                };
                let (f_lo, f_hi) = inner(view, v, u0, u1, &cell.chords, rules)?;
                q[r] += w * jac * if r == 0 { f_lo } else { f_hi };
            }
        }
        Ok((q[0], q[1]))
    };
    let mut total = (0.0, 0.0);
    for w in merged.windows(2) {
        let ((a, ka), (b, kb)) = (w[0], w[1]);
        let parts = match (ka == Knot::Fold, kb == Knot::Fold) {
            (false, false) => vec![piece(a, b, None)?],
            (false, true) => vec![piece(a, b, Some(b))?],
            (true, false) => vec![piece(a, b, Some(a))?],
            (true, true) => {
                let m = 0.5 * (a + b);
                vec![piece(a, m, Some(a))?, piece(m, b, Some(b))?]
            }
        };
        for (lo, hi) in parts {
            total.0 += lo;
            total.1 += hi;
        }
    }
    Ok(Estimate::from_pair(total.0, total.1))
}

/// `int K dA`, `int K dA-hat` and `int curl omega` over the domain.
pub fn integrate_area(
    view: &dyn CtbView,
    graph: &SingularGraph,
    decomposition: &Decomposition,
    cfg: &Config,
    with_curl: bool,
) -> Result<AreaIntegrals> {
    let n = decomposition.n;
    let rules = Rules {
        lo: gauss::rule(cfg.quad_nodes),
        hi: gauss::rule(cfg.quad_nodes + 1),
    };
    let h = decomposition.h;
    let rows: Vec<Result<AreaIntegrals>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut acc = AreaIntegrals::default();
            for i in 0..n {
                let o = decomposition.origin(i, j);
                let (mut cell, mixed) = tensor_cell(view, o, h, &rules, with_curl)?;
                if let Some(cc) = decomposition.cut.get(&(i, j)) {
                    cell.k_da = cut_cell(view, o, h, cc, &rules, graph.tol_on_curve)?;
                } else if mixed {
                    // sign change the trace did not see: split by roots anyway
                    cell.k_da = cut_cell(view, o, h, &CutCell::default(), &rules, graph.tol_on_curve)?;
                }
                acc = acc + cell;
            }
            Ok(acc)
        })
        .collect();
    let mut total = AreaIntegrals::default();
    for r in rows {
        total = total + r?;
    }
    Ok(total)
}

/// `int_Sigma kappa_s dtau` over all curves of the graph.
pub fn integrate_singular_curvature(view: &dyn CtbView, graph: &SingularGraph, cfg: &Config) -> Result<Estimate> {
    let lo = gauss::rule(cfg.quad_nodes);
    let hi = gauss::rule(cfg.quad_nodes + 1);
    let per_curve: Vec<Result<Estimate>> = graph
        .curves
        .par_iter()
        .map(|c| {
            let mut acc = Estimate::default();
            for ch in c.chords() {
                acc = acc + chord_integral(view, graph, &ch, &lo, &hi)?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = Estimate::default();
    for e in per_curve {
        total = total + e?;
    }
    Ok(total)
}

/// `kappa_s dtau` over one chord of a singular curve with both rules.
pub fn chord_integral(
    view: &dyn CtbView,
    graph: &SingularGraph,
    ch: &Chord,
    lo: &[(f64, f64)],
    hi: &[(f64, f64)],
) -> Result<Estimate> {
    let mut q = [0.0; 2];
    for (r, rule) in [lo, hi].into_iter().enumerate() {
        for &(s, w) in rule {
            let cp = ch.at(view, s, graph.tol_on_curve)?;
            q[r] += w * singular_kappa(view, cp.p, cp.d1, cp.d2, graph.rank_tol)?.density;
        }
    }
    Ok(Estimate::from_pair(q[0], q[1]))
}
