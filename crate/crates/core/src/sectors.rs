//! Initial vectors, singular sectors and interior angles at peaks.

use std::f64::consts::PI;

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::model::{mat_vec, CtbView};
use crate::singular::{add, det, dot, level, norm, null_direction, project, rot90, unit};
use crate::singular::{SingularGraph, Verdict};
use crate::Point;

const NUDGE: f64 = 1e-6;
const SAME_ANGLE: f64 = 1e-8;
const SAMPLES: usize = 13;
const R0: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchClass {
    Upper,
    Lower,
}

impl BranchClass {
    fn sign(self) -> f64 {
        match self {
            BranchClass::Upper => 1.0,
            BranchClass::Lower => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakSign {
    Positive,
    Null,
    Negative,
}

/// Limit of `psi(c')/|psi(c')|` at the peak along one curve.
#[derive(Debug, Clone, Serialize)]
pub struct InitialVector {
    pub psi: [f64; 2],
    /// Normalized `psi(c')` at distances `1e-2 * 2^-k`.
    pub samples: Vec<[f64; 2]>,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchReport {
    pub curve: usize,
    pub at_end: bool,
    /// Unit initial tangent in the chart.
    pub tangent: [f64; 2],
    /// Polar angle of the (nudged) tangent in the `(a, b)` frame.
    pub angle: f64,
    pub class: BranchClass,
    pub initial: InitialVector,
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorReport {
    /// Bounding branches, counterclockwise; `None` for an isolated peak.
    pub from: Option<usize>,
    pub to: Option<usize>,
    pub sign: i8,
    /// Interior angle in units of `pi`.
    pub half_turns: u8,
    pub angle: f64,
    /// Same angle from summed angles between consecutive initial vectors.
    pub raw_angle: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeakSectorReport {
    pub vertex: usize,
    pub point: Point,
    pub verdict: Verdict,
    /// Kernel direction of `I_p` and its `g`-orthogonal complement.
    pub axis_a: [f64; 2],
    pub axis_b: [f64; 2],
    pub branches: Vec<BranchReport>,
    pub sectors: Vec<SectorReport>,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub alpha_plus_half_turns: u8,
    pub alpha_minus_half_turns: u8,
    pub sign: PeakSign,
    pub m: usize,
}

/// Result of the Theorem A check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TheoremA {
    pub sum_residual: f64,
    pub difference: f64,
}

/// Axes at a rank one point for the auxiliary metric `g` (chart metric by
/// default): `a` spans the kernel, `b` is `g`-orthogonal with `det(a, b) > 0`.
pub fn g_axes(view: &dyn CtbView, p: Point, g: [[f64; 2]; 2], rank_tol: f64) -> Result<([f64; 2], [f64; 2])> {
    let a = null_direction(view, p, rank_tol)?;
    // g(a, b) = 0
    let ga = mat_vec(g, a);
    let mut b = unit(rot90(ga));
    if det(a, b) < 0.0 {
        b = [-b[0], -b[1]];
    }
    Ok((a, b))
}

/// Coordinates of `x` in the basis `(a, b)`.
fn coords(a: [f64; 2], b: [f64; 2], x: [f64; 2]) -> [f64; 2] {
    let d = det(a, b);
    [det(x, b) / d, det(a, x) / d]
}

/// Angle between two unit vectors snapped to `{0, pi}`.
pub fn snapped_angle(x: [f64; 2], y: [f64; 2], tol: f64) -> Result<f64> {
    let raw = det(x, y).atan2(dot(x, y)).abs();
    if raw <= tol {
        Ok(0.0)
    } else if (PI - raw).abs() <= tol {
        Ok(PI)
    } else {
        Err(Error::SnapFailure { angle: raw })
    }
}

/// Initial vector along the singular branch leaving `peak` with tangent `d`.
pub fn branch_initial_vector(
    view: &dyn CtbView,
    peak: Point,
    d: [f64; 2],
    tol_on: f64,
    tol: &Tolerances,
) -> Result<InitialVector> {
    let hint = view.frame_hint(peak)?;
    let mut samples = Vec::with_capacity(SAMPLES);
    for k in 0..SAMPLES {
        let r = R0 * 0.5f64.powi(k as i32);
        let x = project(view, add(peak, d, r), tol_on)?.ok_or(Error::NewtonDivergence(add(peak, d, r)))?;
        let lv = level(view, x)?;
        let mut t = unit(rot90(lv.grad));
        let out = [x.0 - peak.0, x.1 - peak.1];
        if dot(t, out) < 0.0 {
            t = [-t[0], -t[1]];
        }
        let s = view.local(x, 0, Some(hint))?.psi(t);
        samples.push(unit(s));
    }
    let n = samples.len();
    let rich = |k: usize| -> [f64; 2] {
        [
            2.0 * samples[k + 1][0] - samples[k][0],
            2.0 * samples[k + 1][1] - samples[k][1],
        ]
    };
    let (r1, r2) = (rich(n - 3), rich(n - 2));
    let residual = norm([r2[0] - r1[0], r2[1] - r1[1]]);
    if residual.is_nan() || residual >= tol.angle {
        return Err(Error::NoLimit { residual, samples });
    }
    Ok(InitialVector {
        psi: unit(r2),
        samples,
        residual,
    })
}

/// Initial tangent of a branch at a peak.
pub fn branch_tangent(view: &dyn CtbView, peak: Point, verdict: Verdict, toward: [f64; 2]) -> Result<[f64; 2]> {
    let lv = level(view, peak)?;
    let toward = unit(toward);
    if matches!(verdict, Verdict::A3 | Verdict::NonDegeneratePeak) {
        let mut t = unit(rot90(lv.grad));
        if dot(t, toward) < 0.0 {
            t = [-t[0], -t[1]];
        }
        return Ok(t);
    }
    // null cone of the Hessian
    let h = lv.hess;
    let (a, b, c) = (h[0][0], h[0][1], h[1][1]);
    let disc = b * b - a * c;
    let mut cands: Vec<[f64; 2]> = Vec::new();
    if disc > 0.0 {
        let s = disc.sqrt();
        if a.abs() >= c.abs() && a != 0.0 {
            // a x^2 + 2 b x y + c y^2 = 0 with y = 1
            cands.push(unit([(-b + s) / a, 1.0]));
            cands.push(unit([(-b - s) / a, 1.0]));
        } else if c != 0.0 {
            cands.push(unit([1.0, (-b + s) / c]));
            cands.push(unit([1.0, (-b - s) / c]));
        } else {
            cands.push([1.0, 0.0]);
            cands.push([0.0, 1.0]);
        }
    }
    let mut best = toward;
    let mut best_dot = 0.99;
    for c in cands {
        for c in [c, [-c[0], -c[1]]] {
            let d = dot(c, toward);
            if d > best_dot {
                best_dot = d;
                best = c;
            }
        }
    }
    Ok(best)
}

fn in_open_ccw(lo: f64, hi: f64, x: f64) -> bool {
    // is x in (lo, hi) modulo 2 pi, hi > lo
    let mut y = x;
    while y <= lo {
        y += 2.0 * PI;
    }
    y < hi
}

/// Sector report at vertex `k` of the singular graph with the chart metric.
pub fn sector_angles(view: &dyn CtbView, graph: &SingularGraph, k: usize) -> Result<PeakSectorReport> {
    sector_angles_with_metric(view, graph, k, [[1.0, 0.0], [0.0, 1.0]])
}

pub fn sector_angles_with_metric(
    view: &dyn CtbView,
    graph: &SingularGraph,
    k: usize,
    metric: [[f64; 2]; 2],
) -> Result<PeakSectorReport> {
    let v = &graph.vertices[k];
    if !v.verdict.is_peak() {
        return Err(Error::NotAdmissible(format!(
            "vertex {k} is {:?}, not a peak",
            v.verdict
        )));
    }
    let tol = &graph.tol;
    let peak = v.point;
    let domain = view.domain();
    let (a, b) = g_axes(view, peak, metric, graph.rank_tol)?;
    let psi_b = unit(view.local(peak, 0, Some(view.frame_hint(peak)?))?.psi(b));

    let mut branches: Vec<BranchReport> = Vec::new();
    for (ci, at_end) in graph.incident(k) {
        let c = &graph.curves[ci];
        let pts = &c.points;
        let (end, other) = if at_end {
            (pts[pts.len() - 1], pts[pts.len().saturating_sub(4)])
        } else {
            (pts[0], pts[3.min(pts.len() - 1)])
        };
        let dlt = domain.delta(end, other);
        let d = branch_tangent(view, peak, v.verdict, [dlt.0, dlt.1])?;
        let initial = branch_initial_vector(view, peak, d, graph.tol_on_curve, tol)?;
        let class = if dot(initial.psi, psi_b) >= 0.0 {
            BranchClass::Upper
        } else {
            BranchClass::Lower
        };
        let mut x = coords(a, b, d);
        if x[1].abs() < NUDGE * norm(x) {
            x[1] += NUDGE * class.sign() * norm(x);
        }
        branches.push(BranchReport {
            curve: ci,
            at_end,
            tangent: d,
            angle: x[1].atan2(x[0]),
            class,
            initial,
        });
    }
    branches.sort_by(|x, y| x.angle.total_cmp(&y.angle));
    for w in branches.windows(2) {
        if (w[1].angle - w[0].angle).abs() < SAME_ANGLE {
            return Err(Error::TangentAmbiguity(peak));
        }
    }
    if branches.len() >= 2 && (branches[0].angle + 2.0 * PI - branches[branches.len() - 1].angle) < SAME_ANGLE {
        return Err(Error::TangentAmbiguity(peak));
    }

    let from_ab = |x: [f64; 2]| [x[0] * a[0] + x[1] * b[0], x[0] * a[1] + x[1] * b[1]];
    let lambda_at = |phi: f64| -> Result<f64> {
        let dir = from_ab([phi.cos(), phi.sin()]);
        let q = add(peak, unit(dir), tol.probe_radius);
        Ok(view.lambda(q, 0)?.value())
    };
    let ray_psi = |phi: f64| -> Result<[f64; 2]> {
        let dir = from_ab([phi.cos(), phi.sin()]);
        Ok(unit(view.local(peak, 0, Some(view.frame_hint(peak)?))?.psi(dir)))
    };

    let mut sectors = Vec::new();
    let nb = branches.len();
    if nb == 0 {
        let s = lambda_at(0.5)?;
        sectors.push(SectorReport {
            from: None,
            to: None,
            sign: if s >= 0.0 { 1 } else { -1 },
            half_turns: 2,
            angle: 2.0 * PI,
            raw_angle: 2.0 * PI,
        });
    } else {
        // actual branch point directions at the probe radius
        let mut probe_angles = Vec::with_capacity(nb);
        for br in &branches {
            let x = project(view, add(peak, br.tangent, tol.probe_radius), graph.tol_on_curve)?
                .ok_or(Error::NewtonDivergence(peak))?;
            let c = coords(a, b, [x.0 - peak.0, x.1 - peak.1]);
            let mut ang = c[1].atan2(c[0]);
            // stay on the same sheet as the tangent angle
            while ang - br.angle > PI {
                ang -= 2.0 * PI;
            }
            while br.angle - ang > PI {
                ang += 2.0 * PI;
            }
            probe_angles.push(ang);
        }
        for i in 0..nb {
            let j = (i + 1) % nb;
            let lo = branches[i].angle;
            let hi = if j == 0 {
                branches[j].angle + 2.0 * PI
            } else {
                branches[j].angle
            };
            let plo = probe_angles[i];
            let phi_hi = if j == 0 {
                probe_angles[j] + 2.0 * PI
            } else {
                probe_angles[j]
            };
            let mid = 0.5 * (plo + phi_hi);
            let s = lambda_at(mid)?;
            let rays: Vec<f64> = [0.0, PI].into_iter().filter(|&r| in_open_ccw(lo, hi, r)).collect();
            let half_turns = rays.len() as u8;
            // raw cross-check through interior rays split at +-a
            let mut seq = vec![branches[i].initial.psi];
            let mut ordered: Vec<f64> = rays
                .iter()
                .map(|&r| {
                    let mut y = r;
                    while y <= lo {
                        y += 2.0 * PI;
                    }
                    y
                })
                .collect();
            ordered.sort_by(f64::total_cmp);
            for r in ordered {
                seq.push(ray_psi(r - 1e-3)?);
                seq.push(ray_psi(r + 1e-3)?);
            }
            seq.push(branches[j].initial.psi);
            let mut raw = 0.0;
            for w in seq.windows(2) {
                raw += snapped_angle(w[0], w[1], tol.angle)?;
            }
            sectors.push(SectorReport {
                from: Some(i),
                to: Some(j),
                sign: if s >= 0.0 { 1 } else { -1 },
                half_turns,
                angle: half_turns as f64 * PI,
                raw_angle: raw,
            });
        }
    }

    let plus: u8 = sectors.iter().filter(|s| s.sign > 0).map(|s| s.half_turns).sum();
    let minus: u8 = sectors.iter().filter(|s| s.sign < 0).map(|s| s.half_turns).sum();
    for s in &sectors {
        if (s.raw_angle - s.angle).abs() > tol.angle {
            return Err(Error::Internal(format!(
                "sector angle {} disagrees with initial vector sum {} at ({:.3e}, {:.3e})",
                s.angle, s.raw_angle, peak.0, peak.1
            )));
        }
    }
    let sign = match plus.cmp(&minus) {
        std::cmp::Ordering::Greater => PeakSign::Positive,
        std::cmp::Ordering::Equal => PeakSign::Null,
        std::cmp::Ordering::Less => PeakSign::Negative,
    };
    Ok(PeakSectorReport {
        vertex: k,
        point: peak,
        verdict: v.verdict,
        axis_a: a,
        axis_b: b,
        m: nb / 2,
        branches,
        sectors,
        alpha_plus: plus as f64 * PI,
        alpha_minus: minus as f64 * PI,
        alpha_plus_half_turns: plus,
        alpha_minus_half_turns: minus,
        sign,
    })
}

/// `alpha_+ + alpha_- = 2 pi` and `alpha_+ - alpha_- in {-2 pi, 0, 2 pi}`,
/// checked on the integer half-turn counts.
pub fn verify_theorem_a(r: &PeakSectorReport) -> Result<TheoremA> {
    let (p, m) = (r.alpha_plus_half_turns as i32, r.alpha_minus_half_turns as i32);
    if p + m != 2 || ![-2, 0, 2].contains(&(p - m)) {
        return Err(Error::TheoremAViolation {
            point: r.point,
            plus: r.alpha_plus,
            minus: r.alpha_minus,
        });
    }
    Ok(TheoremA {
        sum_residual: (r.alpha_plus + r.alpha_minus - 2.0 * PI).abs(),
        difference: r.alpha_plus - r.alpha_minus,
    })
}

/// Sector reports for every peak of the graph.
pub fn all_sectors(view: &dyn CtbView, graph: &SingularGraph) -> Result<Vec<PeakSectorReport>> {
    graph
        .peaks()
        .map(|(k, _)| k)
        .collect::<Vec<_>>()
        .into_iter()
        .map(|k| sector_angles(view, graph, k))
        .collect()
}
