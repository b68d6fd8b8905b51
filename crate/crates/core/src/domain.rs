use serde::Serialize;

use crate::error::{Error, Result};
use crate::Point;

/// Parameter domain of a chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamDomain {
    Rectangle {
        u_range: (f64, f64),
        v_range: (f64, f64),
        closed: bool,
    },
    /// `[0, u_period) x [0, v_period)` with opposite sides identified.
    FlatTorus { u_period: f64, v_period: f64 },
}

impl ParamDomain {
    pub fn rectangle(u_range: (f64, f64), v_range: (f64, f64)) -> Result<ParamDomain> {
        let ok = |r: (f64, f64)| r.0.is_finite() && r.1.is_finite() && r.1 > r.0;
        if !ok(u_range) || !ok(v_range) {
            return Err(Error::Spec {
                line: None,
                message: format!("invalid rectangle {u_range:?} x {v_range:?}"),
            });
        }
        Ok(ParamDomain::Rectangle {
            u_range,
            v_range,
            closed: true,
        })
    }

    pub fn flat_torus(u_period: f64, v_period: f64) -> Result<ParamDomain> {
        if !(u_period.is_finite() && v_period.is_finite() && u_period > 0.0 && v_period > 0.0) {
            return Err(Error::Spec {
                line: None,
                message: format!("invalid torus periods ({u_period}, {v_period})"),
            });
        }
        Ok(ParamDomain::FlatTorus { u_period, v_period })
    }

    pub fn is_compact(&self) -> bool {
        matches!(self, ParamDomain::FlatTorus { .. })
    }

    /// Bounding box of the fundamental domain.
    pub fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        match *self {
            ParamDomain::Rectangle { u_range, v_range, .. } => (u_range, v_range),
            ParamDomain::FlatTorus { u_period, v_period } => ((0.0, u_period), (0.0, v_period)),
        }
    }

    /// Length of the diagonal of the fundamental domain.
    pub fn scale(&self) -> f64 {
        let ((u0, u1), (v0, v1)) = self.bounds();
        (u1 - u0).hypot(v1 - v0)
    }

    pub fn contains(&self, p: Point) -> bool {
        match *self {
            ParamDomain::Rectangle {
                u_range,
                v_range,
                closed,
            } => {
                if closed {
                    p.0 >= u_range.0 && p.0 <= u_range.1 && p.1 >= v_range.0 && p.1 <= v_range.1
                } else {
                    p.0 > u_range.0 && p.0 < u_range.1 && p.1 > v_range.0 && p.1 < v_range.1
                }
            }
            ParamDomain::FlatTorus { .. } => p.0.is_finite() && p.1.is_finite(),
        }
    }

    /// Canonical representative of `p`; rejects points outside a rectangle.
    pub fn wrap(&self, p: Point) -> Result<Point> {
        match *self {
            ParamDomain::Rectangle { .. } => {
                if self.contains(p) {
                    Ok(p)
                } else {
                    Err(Error::OutsideDomain(p))
                }
            }
            ParamDomain::FlatTorus { u_period, v_period } => Ok((p.0.rem_euclid(u_period), p.1.rem_euclid(v_period))),
        }
    }

    /// Shortest displacement from `a` to `b` (minimal image on the torus).
    pub fn delta(&self, a: Point, b: Point) -> (f64, f64) {
        let (mut du, mut dv) = (b.0 - a.0, b.1 - a.1);
        if let ParamDomain::FlatTorus { u_period, v_period } = *self {
            du -= u_period * (du / u_period).round();
            dv -= v_period * (dv / v_period).round();
        }
        (du, dv)
    }

    pub fn distance(&self, a: Point, b: Point) -> f64 {
        let (du, dv) = self.delta(a, b);
        du.hypot(dv)
    }

    /// Euler characteristic of the domain (a closed rectangle is a disk).
    pub fn euler_characteristic(&self) -> i64 {
        match self {
            ParamDomain::Rectangle { .. } => 1,
            ParamDomain::FlatTorus { .. } => 0,
        }
    }
}
