//! A2 / A3 / peak classification and the singular graph.

use serde::Serialize;

use super::trace::{trace_singular_set, TraceEnd, TraceResult};
use super::{add, dot, kernel_field, level, norm, project, Chord, EndTag, SingularCurve, SingularPointReport, Verdict};
use crate::config::{Config, Tolerances};
use crate::error::{Error, Result};
use crate::model::{sample_grid, CtbView};
use crate::Point;

const FD_STEP: f64 = 1e-4;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Singular set as a graph: peaks are vertices, arcs between them are curves.
#[derive(Debug, Clone, Serialize)]
pub struct SingularGraph {
    pub vertices: Vec<SingularPointReport>,
    pub curves: Vec<SingularCurve>,
    pub rank_tol: f64,
    pub tol_nondeg: f64,
    pub tol_on_curve: f64,
    pub lambda_scale: f64,
    pub grad_scale: f64,
    pub cell: f64,
    pub tol: Tolerances,
}

impl SingularGraph {
    pub fn build(view: &dyn CtbView, cfg: &Config) -> Result<SingularGraph> {
        cfg.validate()?;
        let trace = trace_singular_set(view, cfg)?;
        build_graph(view, cfg, trace)
    }

    /// Vertices that are peaks (all of them by construction).
    pub fn peaks(&self) -> impl Iterator<Item = (usize, &SingularPointReport)> {
        self.vertices.iter().enumerate().filter(|(_, v)| v.verdict.is_peak())
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.vertices.iter().filter(|v| v.verdict == verdict).count()
    }

    /// Incident curve ends of vertex `k` as `(curve, at_end)`.
    pub fn incident(&self, k: usize) -> Vec<(usize, bool)> {
        let mut out = Vec::new();
        for (i, c) in self.curves.iter().enumerate() {
            if c.start == (EndTag::TerminatesAtPeak { vertex: k }) {
                out.push((i, false));
            }
            if c.end == (EndTag::TerminatesAtPeak { vertex: k }) {
                out.push((i, true));
            }
        }
        out
    }
}

/// Transversality `det(T, eta)` at a singular point with its rate along the
/// curve. `eta` is oriented to agree with `eta_ref` when given.
#[derive(Debug, Clone, Copy)]
pub struct Transversality {
    pub g: f64,
    pub rate: f64,
    pub eta: [f64; 2],
    pub tangent: [f64; 2],
}

pub fn transversality(view: &dyn CtbView, p: Point, eta_ref: Option<[f64; 2]>) -> Result<Option<Transversality>> {
    let local = view.local(p, 1, None)?;
    let k = kernel_field(&local.metric());
    let Some(nk) = (k[0] * k[0] + k[1] * k[1]).sqrt() else {
        return Ok(None);
    };
    if nk.value() == 0.0 {
        return Ok(None);
    }
    let lam = view.lambda(p, 2)?;
    let (gu, gv) = (lam.d_u(), lam.d_v());
    let Some(ng) = (gu * gu + gv * gv).sqrt() else {
        return Ok(None);
    };
    if ng.value() == 0.0 {
        return Ok(None);
    }
    let t = [-gv / ng, gu / ng];
    let e = [k[0] / nk, k[1] / nk];
    let mut g = t[0] * e[1] - t[1] * e[0];
    let mut eta = [e[0].value(), e[1].value()];
    if let Some(r) = eta_ref {
        if dot(eta, r) < 0.0 {
            g = -g;
            eta = [-eta[0], -eta[1]];
        }
    }
    let tangent = [t[0].value(), t[1].value()];
    Ok(Some(Transversality {
        g: g.value(),
        rate: dot(g.gradient(), tangent),
        eta,
        tangent,
    }))
}

/// Rank of `psi` at `p` with its singular values.
fn rank_at(view: &dyn CtbView, p: Point, rank_tol: f64) -> Result<(usize, f64, f64)> {
    let (hi, lo) = view.local(p, 0, None)?.singular_values();
    let rank = usize::from(hi > rank_tol) + usize::from(lo > rank_tol);
    Ok((rank, lo, hi))
}

fn rank_tolerance(view: &dyn CtbView, cfg: &Config) -> Result<f64> {
    let mut top = 0.0f64;
    for p in sample_grid(view.domain(), 9) {
        top = top.max(view.local(p, 0, None)?.singular_values().0);
    }
    Ok(cfg.tol.rank * top.max(f64::MIN_POSITIVE))
}

/// Rate of `g` along the curve by central differences of projected points.
fn fd_rate(view: &dyn CtbView, p: Point, tr: &Transversality, tol_on: f64) -> Result<Option<f64>> {
    let a = project(view, add(p, tr.tangent, -FD_STEP), tol_on)?;
    let b = project(view, add(p, tr.tangent, FD_STEP), tol_on)?;
    let (Some(a), Some(b)) = (a, b) else {
        return Ok(None);
    };
    let ga = transversality(view, a, Some(tr.eta))?;
    let gb = transversality(view, b, Some(tr.eta))?;
    match (ga, gb) {
        (Some(ga), Some(gb)) => {
            let d = [b.0 - a.0, b.1 - a.1];
            let len = norm(d) * dot(d, tr.tangent).signum();
            Ok(Some((gb.g - ga.g) / len))
        }
        _ => Ok(None),
    }
}

struct Eval {
    g: Option<Transversality>,
}

/// An on-curve peak candidate located on chord `chord` at parameter `s`.
#[derive(Debug, Clone, Copy)]
struct Split {
    chord: usize,
    s: f64,
    p: Point,
    vertex: usize,
}

struct Ctx<'a> {
    view: &'a dyn CtbView,
    cfg: &'a Config,
    tol_on: f64,
    tol_nd: f64,
    rank_tol: f64,
}

impl Ctx<'_> {
    fn g_on_chord(&self, ch: &Chord, s: f64, eta_ref: [f64; 2]) -> Result<Option<(Point, Transversality)>> {
        let cp = match ch.at(self.view, s, self.tol_on) {
            Ok(cp) => cp,
            Err(Error::NewtonDivergence(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        Ok(transversality(self.view, cp.p, Some(eta_ref))?.map(|t| (cp.p, t)))
    }

    /// `g` on a polyline parameter in `[0, n-1]`.
    fn g_on_path(
        &self,
        pts: &[Point],
        x: f64,
        eta_ref: [f64; 2],
    ) -> Result<Option<(usize, f64, Point, Transversality)>> {
        let last = pts.len() - 2;
        let i = (x.floor().max(0.0) as usize).min(last);
        let s = x - i as f64;
        let ch = Chord::new(pts[i], pts[i + 1]);
        Ok(self.g_on_chord(&ch, s, eta_ref)?.map(|(p, t)| (i, s, p, t)))
    }

    fn report(
        &self,
        p: Point,
        tr: Option<Transversality>,
        verdict: Verdict,
        branches: usize,
    ) -> Result<SingularPointReport> {
        let lv = level(self.view, p)?;
        let (rank, lo, hi) = rank_at(self.view, p, self.rank_tol)?;
        let fd = match &tr {
            Some(t) => fd_rate(self.view, p, t, self.tol_on)?,
            None => None,
        };
        Ok(SingularPointReport {
            point: p,
            verdict,
            lambda: lv.value,
            grad_norm: norm(lv.grad),
            rank,
            sigma_min: lo,
            sigma_max: hi,
            transversality: tr.map(|t| t.g),
            transversality_rate: tr.map(|t| t.rate),
            transversality_rate_fd: fd,
            branch_count: branches,
            note: None,
        })
    }

    fn on_curve_verdict(&self, tr: &Transversality) -> Verdict {
        if tr.rate.abs() > self.cfg.tol.a3 {
            Verdict::A3
        } else {
            Verdict::NonDegeneratePeak
        }
    }

    /// On-curve peaks of one traced curve.
    fn find_peaks(&self, pts: &[Point], closed: bool) -> Result<Vec<(usize, f64, Point, Transversality)>> {
        let n = pts.len();
        let mut evals: Vec<Eval> = Vec::with_capacity(n);
        let mut eta_ref: Option<[f64; 2]> = None;
        for &p in pts {
            let lv = level(self.view, p)?;
            let g = if norm(lv.grad) < 1e3 * self.tol_nd {
                None
            } else {
                transversality(self.view, p, eta_ref)?
            };
            if let Some(t) = &g {
                eta_ref = Some(t.eta);
            }
            evals.push(Eval { g });
        }
        let mut out: Vec<(usize, f64, Point, Transversality)> = Vec::new();
        let tol = self.cfg.tol.transv;
        // sign changes
        for i in 0..n - 1 {
            let (Some(a), Some(b)) = (&evals[i].g, &evals[i + 1].g) else {
                continue;
            };
            if a.g == 0.0 {
                out.push((i, 0.0, pts[i], *a));
                continue;
            }
            if (a.g > 0.0) == (b.g > 0.0) || b.g == 0.0 {
                continue;
            }
            let ch = Chord::new(pts[i], pts[i + 1]);
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            let mut best = None;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let Some((p, t)) = self.g_on_chord(&ch, mid, a.eta)? else {
                    break;
                };
                best = Some((mid, p, t));
                if t.g == 0.0 {
                    break;
                }
                if (t.g > 0.0) == (a.g > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
            if let Some((s, p, t)) = best {
                if t.g.abs() <= tol {
                    out.push((i, s, p, t));
                }
            }
        }
        // tangencies without sign change
        let interior: Vec<usize> = if closed {
            (0..n - 1).collect()
        } else {
            (1..n - 1).collect()
        };
        for i in interior {
            let prev = if i == 0 { n - 2 } else { i - 1 };
            let (Some(a), Some(b), Some(c)) = (&evals[prev].g, &evals[i].g, &evals[i + 1].g) else {
                continue;
            };
            if !(b.g.abs() < a.g.abs() && b.g.abs() <= c.g.abs()) {
                continue;
            }
            if (a.g > 0.0) != (b.g > 0.0) || (c.g > 0.0) != (b.g > 0.0) {
                continue;
            }
            // golden section for min |g| on the two adjacent chords
            let (path, base): (Vec<Point>, usize) = if i == 0 {
                let d = self.view.domain().delta(pts[0], pts[n - 2]);
                (vec![(pts[0].0 + d.0, pts[0].1 + d.1), pts[0], pts[1]], 0)
            } else {
                (vec![pts[i - 1], pts[i], pts[i + 1]], i - 1)
            };
            let eta = b.eta;
            let f = |x: f64| -> Result<f64> {
                Ok(self
                    .g_on_path(&path, x, eta)?
                    .map(|r| r.3.g.abs())
                    .unwrap_or(f64::INFINITY))
            };
            let (mut lo, mut hi) = (0.0f64, 2.0f64);
            let mut x1 = hi - GOLDEN * (hi - lo);
            let mut x2 = lo + GOLDEN * (hi - lo);
            let (mut f1, mut f2) = (f(x1)?, f(x2)?);
            for _ in 0..90 {
                if f1 <= f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - GOLDEN * (hi - lo);
                    f1 = f(x1)?;
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + GOLDEN * (hi - lo);
                    f2 = f(x2)?;
                }
                if hi - lo < 1e-13 {
                    break;
                }
            }
            let x = 0.5 * (lo + hi);
            if let Some((j, s, p, t)) = self.g_on_path(&path, x, eta)? {
                if t.g.abs() <= tol {
                    let (chord, s) = if i == 0 && j == 0 { (n - 2, s) } else { (base + j, s) };
                    out.push((chord, s, p, t));
                }
            }
        }
        out.sort_by(|a, b| (a.0 as f64 + a.1).total_cmp(&(b.0 as f64 + b.1)));
        let cell_dedup = 1e-6 * self.view.domain().scale();
        let mut dedup: Vec<(usize, f64, Point, Transversality)> = Vec::new();
        for c in out {
            if dedup.iter().any(|d| self.view.domain().distance(d.2, c.2) < cell_dedup) {
                continue;
            }
            dedup.push(c);
        }
        Ok(dedup)
    }
}

fn end_tag(t: TraceEnd, vertex: Option<usize>) -> EndTag {
    match (t, vertex) {
        (TraceEnd::Boundary, _) => EndTag::HitsBoundary,
        (TraceEnd::Loop, _) => EndTag::ClosesLoop,
        (TraceEnd::Degenerate, Some(v)) => EndTag::TerminatesAtPeak { vertex: v },
        (TraceEnd::Degenerate, None) => EndTag::HitsBoundary,
    }
}

fn build_graph(view: &dyn CtbView, cfg: &Config, trace: TraceResult) -> Result<SingularGraph> {
    let domain = *view.domain();
    let cell = trace.grid.cell_size();
    let ctx = Ctx {
        view,
        cfg,
        tol_on: trace.tol_on_curve,
        tol_nd: trace.tol_nondeg,
        rank_tol: rank_tolerance(view, cfg)?,
    };

    let mut vertices: Vec<SingularPointReport> = Vec::new();
    let n_deg = trace.degenerate.len();
    for &p in &trace.degenerate {
        vertices.push(ctx.report(p, None, Verdict::DegeneratePeak, 0)?);
    }
    for &p in &trace.isolated {
        vertices.push(ctx.report(p, None, Verdict::IsolatedPeak, 0)?);
    }

    let nearest_degenerate = |p: Point| -> Option<usize> {
        (0..n_deg).min_by(|&a, &b| {
            domain
                .distance(trace.degenerate[a], p)
                .total_cmp(&domain.distance(trace.degenerate[b], p))
        })
    };

    let mut curves: Vec<SingularCurve> = Vec::new();
    for tc in &trace.curves {
        let closed = tc.start == TraceEnd::Loop;
        let pts = &tc.points;
        if pts.len() < 2 {
            continue;
        }
        let found = ctx.find_peaks(pts, closed)?;
        let mut splits: Vec<Split> = Vec::new();
        for (chord, s, p, t) in found {
            let verdict = ctx.on_curve_verdict(&t);
            let p_wrapped = domain.wrap(p).unwrap_or(p);
            if let Some(k) = vertices
                .iter()
                .position(|v| domain.distance(v.point, p_wrapped) < 1e-6 * cell)
            {
                splits.push(Split { chord, s, p, vertex: k });
                continue;
            }
            let mut rep = ctx.report(p_wrapped, Some(t), verdict, 2)?;
            if rep.grad_norm <= ctx.tol_nd {
                rep.verdict = Verdict::Unclassified;
                rep.note = Some("vanishing gradient on a traced curve".into());
            }
            vertices.push(rep);
            splits.push(Split {
                chord,
                s,
                p,
                vertex: vertices.len() - 1,
            });
        }
        let start_v = (tc.start == TraceEnd::Degenerate)
            .then(|| nearest_degenerate(pts[0]))
            .flatten();
        let end_v = (tc.end == TraceEnd::Degenerate)
            .then(|| nearest_degenerate(*pts.last().unwrap()))
            .flatten();

        // cut points: (position along polyline, point, vertex)
        let mut pieces: Vec<(Vec<Point>, EndTag, EndTag)> = Vec::new();
        if splits.is_empty() {
            pieces.push((pts.clone(), end_tag(tc.start, start_v), end_tag(tc.end, end_v)));
        } else if closed {
            // rotate so the loop starts at the first split
            let m = pts.len() - 1;
            let first = splits[0];
            let mut path: Vec<Point> = vec![first.p];
            let mut cut_marks: Vec<(usize, Split)> = Vec::new();
            let order: Vec<usize> = (first.chord..m).chain(0..first.chord + 1).collect();
            let mut shift = (0.0, 0.0);
            for (k, &c) in order.iter().enumerate() {
                if k > 0 && c == 0 {
                    // crossing the closure: continue unwrapped
                    let d = (pts[m].0 - pts[0].0, pts[m].1 - pts[0].1);
                    shift = (shift.0 + d.0, shift.1 + d.1);
                }
                let last_round = k == order.len() - 1;
                let here: Vec<Split> = splits
                    .iter()
                    .copied()
                    .filter(|sp| sp.chord == c)
                    .filter(|sp| {
                        if k == 0 {
                            sp.s > first.s
                        } else if last_round {
                            sp.s < first.s
                        } else {
                            true
                        }
                    })
                    .collect();
                for sp in here {
                    let q = (sp.p.0 + shift.0, sp.p.1 + shift.1);
                    path.push(q);
                    cut_marks.push((path.len() - 1, sp));
                }
                if !last_round {
                    let q = (pts[c + 1].0 + shift.0, pts[c + 1].1 + shift.1);
                    path.push(q);
                }
            }
            let end = (first.p.0 + shift.0, first.p.1 + shift.1);
            path.push(end);
            cut_marks.push((path.len() - 1, first));
            let mut prev = (0usize, first.vertex);
            for (idx, sp) in cut_marks {
                let seg = path[prev.0..=idx].to_vec();
                pieces.push((
                    seg,
                    EndTag::TerminatesAtPeak { vertex: prev.1 },
                    EndTag::TerminatesAtPeak { vertex: sp.vertex },
                ));
                prev = (idx, sp.vertex);
            }
        } else {
            let mut cur_pts: Vec<Point> = vec![pts[0]];
            let mut cur_start = end_tag(tc.start, start_v);
            for c in 0..pts.len() - 1 {
                for sp in splits.iter().filter(|sp| sp.chord == c) {
                    cur_pts.push(sp.p);
                    let tag = EndTag::TerminatesAtPeak { vertex: sp.vertex };
                    pieces.push((std::mem::take(&mut cur_pts), cur_start, tag));
                    cur_pts.push(sp.p);
                    cur_start = tag;
                }
                cur_pts.push(pts[c + 1]);
            }
            pieces.push((cur_pts, cur_start, end_tag(tc.end, end_v)));
        }
        for (mut points, start, end) in pieces {
            points.dedup_by(|a, b| (a.0 - b.0).hypot(a.1 - b.1) < 1e-13 * cell);
            if points.len() < 2 {
                continue;
            }
            curves.push(SingularCurve {
                points,
                start,
                end,
                samples: Vec::new(),
            });
        }
    }

    let mut graph = SingularGraph {
        vertices,
        curves,
        rank_tol: ctx.rank_tol,
        tol_nondeg: trace.tol_nondeg,
        tol_on_curve: trace.tol_on_curve,
        lambda_scale: trace.lambda_scale,
        grad_scale: trace.grad_scale,
        cell,
        tol: cfg.tol,
    };

    // structural checks on degenerate and isolated peaks
    for k in 0..graph.vertices.len() {
        let incident = graph.incident(k);
        let v = &graph.vertices[k];
        if !matches!(v.verdict, Verdict::DegeneratePeak | Verdict::IsolatedPeak) {
            continue;
        }
        let branches = incident.len();
        let mut verdict = v.verdict;
        let mut note = None;
        if v.rank == 0 {
            verdict = Verdict::Unclassified;
            note = Some("psi vanishes (rank zero)".to_string());
        } else if v.rank == 2 {
            verdict = Verdict::Unclassified;
            note = Some("psi has rank two".to_string());
        } else if branches % 2 == 1 {
            verdict = Verdict::Unclassified;
            note = Some(format!("odd branch count {branches}"));
        } else if k < n_deg && branches == 0 {
            verdict = Verdict::IsolatedPeak;
        } else {
            // the branches must be A2 near the peak
            for &(ci, at_end) in &incident {
                let c = &graph.curves[ci];
                let other = if at_end { c.start } else { c.end };
                if let EndTag::TerminatesAtPeak { vertex } = other {
                    let ov = &graph.vertices[vertex];
                    if vertex != k
                        && matches!(
                            ov.verdict,
                            Verdict::A3 | Verdict::NonDegeneratePeak | Verdict::Unclassified
                        )
                        && domain.distance(ov.point, v.point) < 2.0 * cell
                    {
                        verdict = Verdict::Unclassified;
                        note = Some("non-A2 point on a branch next to the peak".to_string());
                    }
                }
            }
        }
        let v = &mut graph.vertices[k];
        v.verdict = verdict;
        v.branch_count = branches;
        if note.is_some() {
            v.note = note;
        }
    }
    Ok(graph)
}

/// Classifies the point of the singular set nearest to `p`.
pub fn classify_point(view: &dyn CtbView, graph: &SingularGraph, p: Point) -> Result<SingularPointReport> {
    let domain = view.domain();
    if !domain.contains(p) {
        return Err(Error::OutsideDomain(p));
    }
    let p = domain.wrap(p)?;
    for v in &graph.vertices {
        if domain.distance(v.point, p) < 1e-6 * graph.cell {
            return Ok(v.clone());
        }
    }
    let q = project(view, p, graph.tol_on_curve)?.ok_or(Error::NewtonDivergence(p))?;
    if domain.distance(p, q) > graph.cell {
        return Err(Error::NotAdmissible(format!(
            "({:.6}, {:.6}) is not on the singular set",
            p.0, p.1
        )));
    }
    let q = domain.wrap(q)?;
    for v in &graph.vertices {
        if domain.distance(v.point, q) < 1e-6 * graph.cell {
            return Ok(v.clone());
        }
    }
    let lv = level(view, q)?;
    let (rank, lo, hi) = rank_at(view, q, graph.rank_tol)?;
    let tr = transversality(view, q, None)?;
    let grad_norm = norm(lv.grad);
    let tol = graph.tol;
    let verdict = match (&tr, grad_norm > graph.tol_nondeg) {
        (Some(t), true) if t.g.abs() > tol.transv => Verdict::A2,
        (Some(t), true) if t.rate.abs() > tol.a3 => Verdict::A3,
        (Some(_), true) => Verdict::NonDegeneratePeak,
        _ => Verdict::Unclassified,
    };
    let fd = match &tr {
        Some(t) => fd_rate(view, q, t, graph.tol_on_curve)?,
        None => None,
    };
    Ok(SingularPointReport {
        point: q,
        verdict,
        lambda: lv.value,
        grad_norm,
        rank,
        sigma_min: lo,
        sigma_max: hi,
        transversality: tr.map(|t| t.g),
        transversality_rate: tr.map(|t| t.rate),
        transversality_rate_fd: fd,
        branch_count: if verdict == Verdict::A2 { 2 } else { 0 },
        note: None,
    })
}
