//! Seeding and continuation of the zero set of `lambda`.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use super::{add, dot, level, norm, project, quad_form, rot90, unit, Level};
use crate::config::Config;
use crate::domain::ParamDomain;
use crate::error::{Error, Result};
use crate::model::CtbView;
use crate::Point;

/// Interior grid lines are shifted by this fraction of a cell so that
/// symmetric singular lines (u = 0, ...) do not run through nodes.
const SHIFT: f64 = 0.137;
const MAX_TURN: f64 = 10.0 * std::f64::consts::PI / 180.0;
const COS_HARD_TURN: f64 = 0.939_692_620_785_908_4; // cos 20 deg

/// Seed grid over the fundamental domain.
#[derive(Debug, Clone)]
pub struct Grid {
    pub domain: ParamDomain,
    pub n: usize,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub h: [f64; 2],
    pub periodic: bool,
}

impl Grid {
    pub fn new(domain: &ParamDomain, n: usize) -> Grid {
        let ((u0, u1), (v0, v1)) = domain.bounds();
        Grid {
            domain: *domain,
            n,
            lo: [u0, v0],
            hi: [u1, v1],
            h: [(u1 - u0) / n as f64, (v1 - v0) / n as f64],
            periodic: domain.is_compact(),
        }
    }

    pub fn nodes_per_axis(&self) -> usize {
        if self.periodic {
            self.n
        } else {
            self.n + 1
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.h[0].max(self.h[1])
    }

    pub fn node_coord(&self, axis: usize, i: i64) -> f64 {
        if self.periodic {
            self.lo[axis] + (i as f64 + SHIFT) * self.h[axis]
        } else if i <= 0 {
            self.lo[axis]
        } else if i >= self.n as i64 {
            self.hi[axis]
        } else {
            self.lo[axis] + (i as f64 + SHIFT) * self.h[axis]
        }
    }

    /// Index of the cell containing coordinate `x` (unbounded on a torus).
    pub fn cell_of(&self, axis: usize, x: f64) -> i64 {
        let k = ((x - self.lo[axis]) / self.h[axis] - SHIFT).floor() as i64;
        if self.periodic {
            k
        } else {
            k.clamp(0, self.n as i64 - 1)
        }
    }

    pub fn wrap_index(&self, i: i64) -> i64 {
        if self.periodic {
            i.rem_euclid(self.n as i64)
        } else {
            i
        }
    }

    pub fn node(&self, i: i64, j: i64) -> Point {
        (self.node_coord(0, i), self.node_coord(1, j))
    }

    fn inside(&self, p: Point) -> bool {
        self.periodic || (p.0 >= self.lo[0] && p.0 <= self.hi[0] && p.1 >= self.lo[1] && p.1 <= self.hi[1])
    }
}

/// Edge between node (i, j) and its neighbour along `axis`.
type EdgeKey = (u8, i64, i64);

#[derive(Debug, Clone)]
struct Crossing {
    p: Point,
    consumed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEnd {
    Boundary,
    Loop,
    Degenerate,
}

/// A maximal traced piece of the zero set before vertex splitting.
#[derive(Debug, Clone)]
pub struct TracedCurve {
    pub points: Vec<Point>,
    pub start: TraceEnd,
    pub end: TraceEnd,
}

#[derive(Debug, Clone)]
pub struct TraceResult {
    pub grid: Grid,
    pub curves: Vec<TracedCurve>,
    /// Refined locations where traces stopped on a vanishing gradient.
    pub degenerate: Vec<Point>,
    /// Isolated zeros of `lambda` with constant sign around them.
    pub isolated: Vec<Point>,
    pub lambda_scale: f64,
    pub grad_scale: f64,
    pub tol_nondeg: f64,
    pub tol_on_curve: f64,
}

struct NodeData {
    value: Vec<f64>,
    grad: Vec<f64>,
}

struct Tracer<'a> {
    view: &'a dyn CtbView,
    grid: &'a Grid,
    tol_on: f64,
    tol_nd: f64,
    h_max: f64,
    crossings: Vec<Crossing>,
    by_edge: HashMap<EdgeKey, usize>,
    signs: HashMap<(i64, i64), bool>,
    unverified: Vec<Point>,
}

fn sign(x: f64) -> bool {
    x >= 0.0
}

fn tangent(lv: &Level, dir: f64) -> [f64; 2] {
    let t = unit(rot90(lv.grad));
    [dir * t[0], dir * t[1]]
}

struct Branch {
    points: Vec<Point>,
    end: TraceEnd,
}

impl<'a> Tracer<'a> {
    fn node_sign(&self, i: i64, j: i64) -> bool {
        let key = (self.grid.wrap_index(i), self.grid.wrap_index(j));
        self.signs.get(&key).copied().unwrap_or(true)
    }

    fn correct(&self, q: Point) -> Result<Option<Point>> {
        project(self.view, q, self.tol_on)
    }

    /// Grid lines crossed by the segment `p -> q`: marks matching crossings,
    /// remembers crossings of sign-constant edges.
    fn record_edges(&mut self, p: Point, q: Point) {
        let g = self.grid;
        for axis in 0..2 {
            let other = 1 - axis;
            let (a, b) = if axis == 0 { (p.0, q.0) } else { (p.1, q.1) };
            let (ao, bo) = if axis == 0 { (p.1, q.1) } else { (p.0, q.0) };
            if a == b {
                continue;
            }
            let (lo, hi) = (a.min(b), a.max(b));
            let k0 = g.cell_of(axis, lo) + 1;
            let k1 = g.cell_of(axis, hi);
            for k in k0..=k1 {
                let x = g.node_coord(axis, k);
                if x <= lo || x > hi {
                    continue;
                }
                if !g.periodic && (k <= 0 || k >= g.n as i64) {
                    continue;
                }
                let t = (x - a) / (b - a);
                let y = ao + t * (bo - ao);
                let j = g.cell_of(other, y);
                let (y0, y1) = (g.node_coord(other, j), g.node_coord(other, j + 1));
                let near_corner = (y - y0).min(y1 - y).abs() < 0.05 * g.h[other];
                let mut candidates = vec![j];
                if near_corner {
                    candidates.push(j - 1);
                    candidates.push(j + 1);
                }
                let mut found = false;
                for jj in candidates {
                    // the edge lies on line `axis = k`, running along `other`
                    let (i_u, i_v) = if axis == 0 { (k, jj) } else { (jj, k) };
                    let key = (other as u8, g.wrap_index(i_u), g.wrap_index(i_v));
                    if let Some(&c) = self.by_edge.get(&key) {
                        self.crossings[c].consumed = true;
                        found = true;
                    }
                }
                if !found && !near_corner {
                    let (i_u, i_v) = if axis == 0 { (k, j) } else { (j, k) };
                    let (i2u, i2v) = if other == 0 { (i_u + 1, i_v) } else { (i_u, i_v + 1) };
                    if self.node_sign(i_u, i_v) == self.node_sign(i2u, i2v) {
                        let pt = if axis == 0 { (x, y) } else { (y, x) };
                        self.unverified.push(pt);
                    }
                }
            }
        }
    }

    /// Where the segment `p -> q` leaves the rectangle, moved onto the zero set
    /// along the boundary line.
    fn boundary_point(&self, p: Point, q: Point) -> Result<Point> {
        let g = self.grid;
        let mut exit: Option<(f64, usize, f64)> = None;
        for ax in 0..2 {
            let (a, b) = if ax == 0 { (p.0, q.0) } else { (p.1, q.1) };
            let lim = if b < g.lo[ax] {
                g.lo[ax]
            } else if b > g.hi[ax] {
                g.hi[ax]
            } else {
                continue;
            };
            let t = ((lim - a) / (b - a)).clamp(0.0, 1.0);
            if exit.is_none_or(|e| t < e.0) {
                exit = Some((t, ax, lim));
            }
        }
        let Some((t_exit, axis, bound)) = exit else {
            return Ok(q);
        };
        let mut x = (p.0 + t_exit * (q.0 - p.0), p.1 + t_exit * (q.1 - p.1));
        if axis == 0 {
            x.0 = bound;
        } else {
            x.1 = bound;
        }
        let free = 1 - axis;
        let seg = ((q.0 - p.0).hypot(q.1 - p.1)).max(1e-3 * g.cell_size());
        let mut y = x;
        for _ in 0..40 {
            let j = self.view.lambda(y, 1)?;
            let d = j.gradient()[free];
            if d == 0.0 {
                break;
            }
            let step = -j.value() / d;
            if free == 0 {
                y.0 += step;
            } else {
                y.1 += step;
            }
            if j.value().abs() <= self.tol_on {
                break;
            }
        }
        let moved = (y.0 - x.0).hypot(y.1 - x.1);
        let ok = self.view.lambda(y, 0)?.value().abs() <= self.tol_on * 1e3;
        if ok && moved <= 2.0 * seg {
            let lo = g.lo[free];
            let hi = g.hi[free];
            if free == 0 {
                y.0 = y.0.clamp(lo, hi);
            } else {
                y.1 = y.1.clamp(lo, hi);
            }
            Ok(y)
        } else {
            Ok(x)
        }
    }

    fn trace_dir(&mut self, start: Point, dir: f64) -> Result<Branch> {
        let domain = self.grid.domain;
        let mut points = vec![start];
        let mut p = start;
        let mut lv = level(self.view, p)?;
        if norm(lv.grad) < self.tol_nd {
            return Ok(Branch {
                points,
                end: TraceEnd::Degenerate,
            });
        }
        let t0 = tangent(&lv, dir);
        let mut t = t0;
        let mut s_prev = self.h_max;
        let mut traveled = 0.0;
        let cell = self.grid.cell_size();
        let max_steps = 200_000;
        for _ in 0..max_steps {
            let gn = norm(lv.grad);
            if gn < self.tol_nd {
                return Ok(Branch {
                    points,
                    end: TraceEnd::Degenerate,
                });
            }
            let curv = quad_form(lv.hess, t) / gn;
            let hn = (lv.hess[0][0].powi(2) + 2.0 * lv.hess[0][1].powi(2) + lv.hess[1][1].powi(2)).sqrt();
            let mut s = self.h_max.min(2.0 * s_prev);
            if curv != 0.0 {
                s = s.min(MAX_TURN / curv.abs());
            }
            if hn > 0.0 {
                s = s.min(0.5 * gn / hn);
            }
            let acc = -curv / gn;
            let (q, lq) = loop {
                let pred = (
                    p.0 + s * t[0] + 0.5 * s * s * acc * lv.grad[0],
                    p.1 + s * t[1] + 0.5 * s * s * acc * lv.grad[1],
                );
                let accepted = match self.correct(pred)? {
                    Some(q) => {
                        let moved = (q.0 - pred.0).hypot(q.1 - pred.1);
                        let lq = level(self.view, q)?;
                        let ahead = dot([q.0 - p.0, q.1 - p.1], t) > 0.0;
                        if moved < 0.25 * s && ahead && norm(lq.grad) > 0.0 {
                            let tq = tangent(&lq, dir);
                            (dot(tq, t) > COS_HARD_TURN || norm(lq.grad) < self.tol_nd).then_some((q, lq))
                        } else {
                            None
                        }
                    }
                    None => None,
                };
                if let Some(r) = accepted {
                    break r;
                }
                s *= 0.5;
                if s < 1e-14 * cell {
                    return Err(Error::NewtonDivergence(p));
                }
            };
            s_prev = s;

            if !self.grid.inside(q) {
                let b = self.boundary_point(p, q)?;
                self.record_edges(p, b);
                if (b.0 - p.0).hypot(b.1 - p.1) > 1e-12 * cell {
                    points.push(b);
                }
                return Ok(Branch {
                    points,
                    end: TraceEnd::Boundary,
                });
            }

            let step = [q.0 - p.0, q.1 - p.1];
            if traveled > 2.0 * cell && points.len() >= 4 {
                let d0 = domain.delta(p, start);
                let d0 = [d0.0, d0.1];
                let ss = dot(step, step);
                let tau = (dot(d0, step) / ss).clamp(0.0, 1.0);
                let miss = norm([d0[0] - tau * step[0], d0[1] - tau * step[1]]);
                if miss <= 0.1 * ss.sqrt() + 1e-9 * cell && dot(t0, step) > 0.0 {
                    let close = (p.0 + d0[0], p.1 + d0[1]);
                    self.record_edges(p, close);
                    points.push(close);
                    return Ok(Branch {
                        points,
                        end: TraceEnd::Loop,
                    });
                }
            }

            self.record_edges(p, q);
            traveled += norm(step);
            points.push(q);
            p = q;
            lv = lq;
            let tn = tangent(&lv, dir);
            t = tn;
        }
        Err(Error::GraphInconsistency(format!(
            "trace from ({:.6}, {:.6}) did not terminate",
            start.0, start.1
        )))
    }
}

fn bisect_edge(view: &dyn CtbView, a: Point, b: Point, fa: f64, fb: f64, tol: f64) -> Result<Point> {
    // Illinois regula falsi on the segment
    let (mut ta, mut tb, mut fa, mut fb) = (0.0f64, 1.0f64, fa, fb);
    let at = |t: f64| (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
    let mut side = 0;
    for _ in 0..200 {
        let tc = if fb != fa {
            (ta * fb - tb * fa) / (fb - fa)
        } else {
            0.5 * (ta + tb)
        };
        let tc = if tc > ta && tc < tb { tc } else { 0.5 * (ta + tb) };
        let fc = view.lambda(at(tc), 0)?.value();
        if fc.abs() <= 1e-6 * tol || (tb - ta) < 1e-15 {
            return Ok(at(tc));
        }
        if sign(fc) == sign(fa) {
            ta = tc;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            tb = tc;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Ok(at(0.5 * (ta + tb)))
}

/// Newton iteration for a critical point of `lambda`.
pub fn refine_critical(view: &dyn CtbView, p: Point, radius: f64) -> Result<Option<Point>> {
    let mut q = p;
    for _ in 0..60 {
        let lv = level(view, q)?;
        let h = lv.hess;
        let d = h[0][0] * h[1][1] - h[0][1] * h[0][1];
        if d == 0.0 {
            return Ok(None);
        }
        let dx = -(h[1][1] * lv.grad[0] - h[0][1] * lv.grad[1]) / d;
        let dy = -(-h[0][1] * lv.grad[0] + h[0][0] * lv.grad[1]) / d;
        q = (q.0 + dx, q.1 + dy);
        if (q.0 - p.0).hypot(q.1 - p.1) > radius {
            return Ok(None);
        }
        if dx.hypot(dy) <= 1e-15 * (1.0 + q.0.abs() + q.1.abs()) {
            break;
        }
    }
    Ok(Some(q))
}

fn node_eval(view: &dyn CtbView, grid: &Grid) -> Result<NodeData> {
    let m = grid.nodes_per_axis();
    type Row = Vec<(f64, [f64; 2])>;
    let rows: Vec<Result<Row>> = (0..m)
        .into_par_iter()
        .map(|j| {
            (0..m)
                .map(|i| {
                    let jet = view.lambda(grid.node(i as i64, j as i64), 1)?;
                    Ok((jet.value(), jet.gradient()))
                })
                .collect()
        })
        .collect();
    let mut value = Vec::with_capacity(m * m);
    let mut grad = Vec::with_capacity(m * m);
    for row in rows {
        for (v, g) in row? {
            value.push(v);
            grad.push(norm(g));
        }
    }
    Ok(NodeData { value, grad })
}

/// Removes points closer than `eps` to their predecessor; the last point is kept.
fn drop_near_duplicates(points: &mut Vec<Point>, eps: f64) {
    if points.len() < 3 {
        return;
    }
    let last = *points.last().unwrap();
    let mut out: Vec<Point> = Vec::with_capacity(points.len());
    for &p in points.iter() {
        match out.last() {
            Some(q) if (p.0 - q.0).hypot(p.1 - q.1) <= eps => {}
            _ => out.push(p),
        }
    }
    let n = out.len();
    if out[n - 1] != last {
        if n >= 2 {
            out[n - 1] = last;
        } else {
            out.push(last);
        }
    }
    *points = out;
}

/// Finds all branches of `{lambda = 0}` on the seed grid of `cfg`.
pub fn trace_singular_set(view: &dyn CtbView, cfg: &Config) -> Result<TraceResult> {
    let grid = Grid::new(view.domain(), cfg.grid);
    let m = grid.nodes_per_axis() as i64;
    let nodes = node_eval(view, &grid)?;
    let idx = |i: i64, j: i64| (grid.wrap_index(j) * m + grid.wrap_index(i)) as usize;
    let lambda_scale = nodes
        .value
        .iter()
        .fold(0.0f64, |a, b| a.max(b.abs()))
        .max(f64::MIN_POSITIVE);
    let grad_scale = nodes.grad.iter().fold(0.0f64, |a, b| a.max(*b)).max(f64::MIN_POSITIVE);
    let tol_on = cfg.tol.on_curve * lambda_scale;
    let tol_nd = cfg.tol.nondeg * grad_scale;

    let mut signs = HashMap::new();
    for j in 0..m {
        for i in 0..m {
            signs.insert((i, j), sign(nodes.value[idx(i, j)]));
        }
    }

    // sign-change edges
    let edge_count = if grid.periodic { m } else { m - 1 };
    let mut edges = Vec::new();
    for j in 0..m {
        for i in 0..edge_count {
            edges.push((0u8, i, j));
        }
    }
    for j in 0..edge_count {
        for i in 0..m {
            edges.push((1u8, i, j));
        }
    }
    let found: Vec<Result<Option<(EdgeKey, Point)>>> = edges
        .par_iter()
        .map(|&(axis, i, j)| {
            let (i2, j2) = if axis == 0 { (i + 1, j) } else { (i, j + 1) };
            let (fa, fb) = (nodes.value[idx(i, j)], nodes.value[idx(i2, j2)]);
            if sign(fa) == sign(fb) {
                return Ok(None);
            }
            let p = bisect_edge(view, grid.node(i, j), grid.node(i2, j2), fa, fb, tol_on)?;
            Ok(Some(((axis, i, j), p)))
        })
        .collect();
    let mut crossings = Vec::new();
    let mut by_edge = HashMap::new();
    for f in found {
        if let Some((key, p)) = f? {
            by_edge.insert(key, crossings.len());
            crossings.push(Crossing { p, consumed: false });
        }
    }

    let mut tracer = Tracer {
        view,
        grid: &grid,
        tol_on,
        tol_nd,
        h_max: 0.5 * grid.h[0].min(grid.h[1]),
        crossings,
        by_edge,
        signs,
        unverified: Vec::new(),
    };

    let cell = grid.cell_size();
    let mut curves: Vec<TracedCurve> = Vec::new();
    let mut segment_buckets: HashMap<(i64, i64), Vec<(Point, Point)>> = HashMap::new();
    let bucket = |p: Point| -> (i64, i64) {
        let w = grid.domain.wrap(p).unwrap_or(p);
        (
            ((w.0 - grid.lo[0]) / grid.h[0]).floor() as i64,
            ((w.1 - grid.lo[1]) / grid.h[1]).floor() as i64,
        )
    };
    for c in 0..tracer.crossings.len() {
        if tracer.crossings[c].consumed {
            continue;
        }
        let start = tracer.crossings[c].p;
        // skip seeds lying on an already traced segment
        let (bi, bj) = bucket(start);
        let mut dup = false;
        'outer: for di in -1..=1 {
            for dj in -1..=1 {
                let key = (bi + di, bj + dj);
                let key = if grid.periodic {
                    (key.0.rem_euclid(grid.n as i64), key.1.rem_euclid(grid.n as i64))
                } else {
                    key
                };
                if let Some(segs) = segment_buckets.get(&key) {
                    for &(a, b) in segs {
                        let d = grid.domain.delta(a, start);
                        let e = [b.0 - a.0, b.1 - a.1];
                        let ee = dot(e, e).max(f64::MIN_POSITIVE);
                        let tau = ((d.0 * e[0] + d.1 * e[1]) / ee).clamp(0.0, 1.0);
                        if (d.0 - tau * e[0]).hypot(d.1 - tau * e[1]) < 0.05 * cell {
                            dup = true;
                            break 'outer;
                        }
                    }
                }
            }
        }
        tracer.crossings[c].consumed = true;
        if dup {
            continue;
        }
        let fwd = tracer.trace_dir(start, 1.0)?;
        let mut curve = if fwd.end == TraceEnd::Loop {
            TracedCurve {
                points: fwd.points,
                start: TraceEnd::Loop,
                end: TraceEnd::Loop,
            }
        } else {
            let bwd = tracer.trace_dir(start, -1.0)?;
            let mut points: Vec<Point> = bwd.points.into_iter().rev().collect();
            points.extend_from_slice(&fwd.points[1..]);
            TracedCurve {
                points,
                start: bwd.end,
                end: fwd.end,
            }
        };
        drop_near_duplicates(&mut curve.points, 1e-6 * grid.cell_size());
        for w in curve.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mut keys = HashSet::new();
            keys.insert(bucket(a));
            keys.insert(bucket(b));
            keys.insert(bucket(((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0)));
            for k in keys {
                segment_buckets.entry(k).or_default().push((a, b));
            }
        }
        if curve.points.len() >= 2 {
            curves.push(curve);
        }
    }

    // cluster degenerate ends and refine to critical points
    let mut ends: Vec<Point> = Vec::new();
    for c in &curves {
        if c.start == TraceEnd::Degenerate {
            ends.push(c.points[0]);
        }
        if c.end == TraceEnd::Degenerate {
            ends.push(*c.points.last().unwrap());
        }
    }
    let mut degenerate: Vec<Point> = Vec::new();
    let mut clusters: Vec<Vec<Point>> = Vec::new();
    for e in ends {
        match clusters
            .iter_mut()
            .find(|cl| grid.domain.distance(cl[0], e) < 2.0 * cell)
        {
            Some(cl) => cl.push(e),
            None => clusters.push(vec![e]),
        }
    }
    for cl in clusters {
        let base = cl[0];
        let mut mean = (0.0, 0.0);
        for e in &cl {
            let d = grid.domain.delta(base, *e);
            mean.0 += d.0 / cl.len() as f64;
            mean.1 += d.1 / cl.len() as f64;
        }
        let guess = (base.0 + mean.0, base.1 + mean.1);
        let refined = refine_critical(view, guess, cell)?.unwrap_or(guess);
        degenerate.push(grid.domain.wrap(refined).unwrap_or(refined));
    }
    // attach curve ends to their peak
    for c in curves.iter_mut() {
        for at_end in [false, true] {
            let tag = if at_end { c.end } else { c.start };
            if tag != TraceEnd::Degenerate {
                continue;
            }
            let e = if at_end { *c.points.last().unwrap() } else { c.points[0] };
            if let Some(pk) = degenerate
                .iter()
                .copied()
                .min_by(|a, b| grid.domain.distance(*a, e).total_cmp(&grid.domain.distance(*b, e)))
            {
                let d = grid.domain.delta(e, pk);
                let exact = (e.0 + d.0, e.1 + d.1);
                if (d.0.hypot(d.1)) > 1e-14 * cell {
                    if at_end {
                        c.points.push(exact);
                    } else {
                        c.points.insert(0, exact);
                    }
                }
            }
        }
    }

    // isolated zeros: local minima of |lambda| with no sign change around
    let mut isolated: Vec<Point> = Vec::new();
    let lo = if grid.periodic { 0 } else { 1 };
    let hi = if grid.periodic { m } else { m - 1 };
    let mut candidates = Vec::new();
    for j in lo..hi {
        for i in lo..hi {
            let v = nodes.value[idx(i, j)];
            let mut is_min = true;
            let mut mixed = false;
            for dj in -1..=1 {
                for di in -1..=1 {
                    let w = nodes.value[idx(i + di, j + dj)];
                    if (di, dj) != (0, 0) && w.abs() < v.abs() {
                        is_min = false;
                    }
                    if sign(w) != sign(v) {
                        mixed = true;
                    }
                }
            }
            if is_min && !mixed {
                candidates.push(grid.node(i, j));
            }
        }
    }
    for c in candidates {
        let Some(q) = refine_critical(view, c, 2.0 * cell)? else {
            continue;
        };
        let lv = level(view, q)?;
        if lv.value.abs() > 1e-9 * lambda_scale || norm(lv.grad) > tol_nondeg_or(tol_nd) {
            continue;
        }
        let q = grid.domain.wrap(q).unwrap_or(q);
        if !grid.domain.contains(q) {
            continue;
        }
        if isolated
            .iter()
            .chain(degenerate.iter())
            .any(|x| grid.domain.distance(*x, q) < cell)
        {
            continue;
        }
        let r = 0.5 * cell;
        let mut signs_seen = HashSet::new();
        for k in 0..32 {
            let th = 2.0 * std::f64::consts::PI * k as f64 / 32.0;
            let x = add(q, [th.cos(), th.sin()], r);
            signs_seen.insert(sign(view.lambda(x, 0)?.value()));
        }
        if signs_seen.len() == 1 {
            isolated.push(q);
        }
    }

    let peaks: Vec<Point> = degenerate.iter().chain(isolated.iter()).copied().collect();
    for u in &tracer.unverified {
        if !peaks.iter().any(|pk| grid.domain.distance(*pk, *u) < 3.0 * cell) {
            return Err(Error::Resolution(*u));
        }
    }

    Ok(TraceResult {
        grid,
        curves,
        degenerate,
        isolated,
        lambda_scale,
        grad_scale,
        tol_nondeg: tol_nd,
        tol_on_curve: tol_on,
    })
}

fn tol_nondeg_or(t: f64) -> f64 {
    t
}
