//! Signed area density, the singular set and its classification.

pub mod classify;
pub mod trace;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::Jet2;
use crate::model::CtbView;
use crate::Point;

pub use classify::{classify_point, SingularGraph};
pub use trace::{trace_singular_set, TraceResult, TracedCurve};

#[inline]
pub fn rot90(x: [f64; 2]) -> [f64; 2] {
    [-x[1], x[0]]
}

#[inline]
pub fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn det(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn unit(a: [f64; 2]) -> [f64; 2] {
    let n = norm(a);
    [a[0] / n, a[1] / n]
}

#[inline]
pub fn quad_form(h: [[f64; 2]; 2], x: [f64; 2]) -> f64 {
    h[0][0] * x[0] * x[0] + 2.0 * h[0][1] * x[0] * x[1] + h[1][1] * x[1] * x[1]
}

#[inline]
pub fn add(p: Point, x: [f64; 2], s: f64) -> Point {
    (p.0 + s * x[0], p.1 + s * x[1])
}

/// `lambda` with its gradient and Hessian.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Level {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [[f64; 2]; 2],
}

pub fn level(view: &dyn CtbView, p: Point) -> Result<Level> {
    let j = view.lambda(p, 2)?;
    Ok(Level {
        value: j.value(),
        grad: j.gradient(),
        hess: j.hessian(),
    })
}

/// `lambda(p)` and `d lambda(p)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AreaDensity {
    pub lambda: f64,
    pub d_lambda: [f64; 2],
}

pub fn area_density(view: &dyn CtbView, p: Point) -> Result<AreaDensity> {
    let j = view.lambda(p, 1)?;
    Ok(AreaDensity {
        lambda: j.value(),
        d_lambda: j.gradient(),
    })
}

/// Kernel direction field of the first fundamental form `[[E, F], [F, G]]`.
/// Exact on the singular set; the branch with the larger value is used.
pub fn kernel_field(metric: &[[Jet2; 2]; 2]) -> [Jet2; 2] {
    let (e, f, g) = (metric[0][0], metric[0][1], metric[1][1]);
    let a = [-f, e];
    let b = [g, -f];
    let na = a[0].value().hypot(a[1].value());
    let nb = b[0].value().hypot(b[1].value());
    if na >= nb {
        a
    } else {
        b
    }
}

/// Unit null direction at a rank one point, first nonzero component positive.
pub fn null_direction(view: &dyn CtbView, p: Point, rank_tol: f64) -> Result<[f64; 2]> {
    let local = view.local(p, 0, None)?;
    let (hi, _) = local.singular_values();
    if hi <= rank_tol {
        return Err(Error::RankZero(p));
    }
    let k = kernel_field(&local.metric());
    let mut eta = unit([k[0].value(), k[1].value()]);
    if eta[0] < 0.0 || (eta[0] == 0.0 && eta[1] < 0.0) {
        eta = [-eta[0], -eta[1]];
    }
    Ok(eta)
}

/// Moves `p` onto `lambda = 0` along the gradient.
pub fn project(view: &dyn CtbView, p: Point, tol: f64) -> Result<Option<Point>> {
    let mut q = p;
    for _ in 0..40 {
        let j = view.lambda(q, 1)?;
        let (v, g) = (j.value(), j.gradient());
        let gg = dot(g, g);
        if v.abs() <= tol {
            // one more step for full precision
            if gg > 0.0 && gg.is_finite() {
                return Ok(Some(add(q, g, -v / gg)));
            }
            return Ok(Some(q));
        }
        if gg == 0.0 || !gg.is_finite() {
            return Ok(None);
        }
        q = add(q, g, -v / gg);
    }
    Ok(None)
}

/// A point of the singular curve with derivatives with respect to the
/// chord parameter.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub p: Point,
    pub d1: [f64; 2],
    pub d2: [f64; 2],
    pub level: Level,
}

/// Parametrizes the singular curve between two nearby samples as
/// `a + s c + h(s) n` with `n` normal to the chord `c`.
#[derive(Debug, Clone, Copy)]
pub struct Chord {
    pub a: Point,
    pub c: [f64; 2],
    pub n: [f64; 2],
}

impl Chord {
    pub fn new(a: Point, b: Point) -> Chord {
        let c = [b.0 - a.0, b.1 - a.1];
        Chord {
            a,
            c,
            n: unit(rot90(c)),
        }
    }

    pub fn length(&self) -> f64 {
        norm(self.c)
    }

    pub fn at(&self, view: &dyn CtbView, s: f64, tol: f64) -> Result<CurvePoint> {
        let base = add(self.a, self.c, s);
        let mut h = 0.0;
        let len = self.length();
        for _ in 0..40 {
            let x = add(base, self.n, h);
            let j = view.lambda(x, 1)?;
            let gn = dot(j.gradient(), self.n);
            if gn == 0.0 {
                return Err(Error::NewtonDivergence(x));
            }
            let dh = -j.value() / gn;
            h += dh;
            if j.value().abs() <= tol || dh.abs() <= 1e-15 * len {
                break;
            }
        }
        if h.abs() > len {
            return Err(Error::NewtonDivergence(base));
        }
        let p = add(base, self.n, h);
        let lv = level(view, p)?;
        let gn = dot(lv.grad, self.n);
        let h1 = -dot(lv.grad, self.c) / gn;
        let d1 = [self.c[0] + h1 * self.n[0], self.c[1] + h1 * self.n[1]];
        let h2 = -quad_form(lv.hess, d1) / gn;
        Ok(CurvePoint {
            p,
            d1,
            d2: [h2 * self.n[0], h2 * self.n[1]],
            level: lv,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    A2,
    A3,
    NonDegeneratePeak,
    DegeneratePeak,
    IsolatedPeak,
    Unclassified,
}

impl Verdict {
    pub fn is_peak(self) -> bool {
        matches!(
            self,
            Verdict::A3 | Verdict::NonDegeneratePeak | Verdict::DegeneratePeak | Verdict::IsolatedPeak
        )
    }
}

/// Classification of one singular point with the evidence behind it.
#[derive(Debug, Clone, Serialize)]
pub struct SingularPointReport {
    pub point: Point,
    pub verdict: Verdict,
    pub lambda: f64,
    pub grad_norm: f64,
    pub rank: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// `det(T, eta)` with unit tangent and null direction.
    pub transversality: Option<f64>,
    /// Its derivative along the curve (chart arclength).
    pub transversality_rate: Option<f64>,
    /// Finite-difference value of the same derivative, step 1e-4.
    pub transversality_rate_fd: Option<f64>,
    pub branch_count: usize,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EndTag {
    HitsBoundary,
    ClosesLoop,
    TerminatesAtPeak { vertex: usize },
}

/// One per-sample row of a singular curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SingularSample {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub lambda: f64,
    pub eta: [f64; 2],
    pub d_lambda_eta: f64,
    pub kappa_s: f64,
    pub dtau_dt: f64,
}

/// A traced arc of the singular set between vertices.
#[derive(Debug, Clone, Serialize)]
pub struct SingularCurve {
    /// Consecutive samples, unwrapped on a torus.
    pub points: Vec<Point>,
    pub start: EndTag,
    pub end: EndTag,
    pub samples: Vec<SingularSample>,
}

impl SingularCurve {
    pub fn is_closed(&self) -> bool {
        self.start == EndTag::ClosesLoop
    }

    pub fn chords(&self) -> impl Iterator<Item = Chord> + '_ {
        self.points.windows(2).map(|w| Chord::new(w[0], w[1]))
    }

    pub fn reversed(&self) -> SingularCurve {
        let mut points = self.points.clone();
        points.reverse();
        SingularCurve {
            points,
            start: self.end,
            end: self.start,
            samples: Vec::new(),
        }
    }
}
