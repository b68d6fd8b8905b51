//! Degree of the Gauss map of a frontal on a torus, by counting preimages.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{sample_grid, FrontalSurface};
use crate::Point;

#[derive(Debug, Clone, Serialize)]
pub struct DegreeReport {
    pub degree: i64,
    pub regular_value: [f64; 3],
    pub preimages: Vec<(Point, i8)>,
    /// The same count for a second regular value.
    pub check_degree: i64,
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalized(a: [f64; 3]) -> [f64; 3] {
    let n = dot3(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Signed preimages of `y` under `nu`.
fn preimages(s: &FrontalSurface, y: [f64; 3], grid: usize) -> Result<Vec<(Point, i8)>> {
    let helper = if y[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let e1 = normalized(cross(y, helper));
    let e2 = cross(y, e1);
    let domain = &s.domain;
    let cell = domain.scale() / grid as f64;
    let mut found: Vec<(Point, i8)> = Vec::new();
    for start in sample_grid(domain, grid) {
        let nu0 = s.normal(start)?;
        if dot3(nu0, y) < 0.5 {
            continue;
        }
        let mut p = start;
        let mut ok = false;
        for _ in 0..50 {
            let (_, nu) = s.jets(p, 1)?;
            let n = [nu[0].value(), nu[1].value(), nu[2].value()];
            let nu_u = [nu[0].du(), nu[1].du(), nu[2].du()];
            let nu_v = [nu[0].dv(), nu[1].dv(), nu[2].dv()];
            let f = [dot3(n, e1), dot3(n, e2)];
            let j = [[dot3(nu_u, e1), dot3(nu_v, e1)], [dot3(nu_u, e2), dot3(nu_v, e2)]];
            let d = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            if d == 0.0 || !d.is_finite() {
                break;
            }
            let du = (f[0] * j[1][1] - f[1] * j[0][1]) / d;
            let dv = (j[0][0] * f[1] - j[1][0] * f[0]) / d;
            p = (p.0 - du, p.1 - dv);
            if domain.distance(p, start) > 4.0 * cell {
                break;
            }
            if du.hypot(dv) < 1e-14 * domain.scale() {
                ok = dot3(n, y) > 0.0;
                break;
            }
        }
        if !ok {
            continue;
        }
        let p = domain.wrap(p).unwrap_or(p);
        if !domain.contains(p) || found.iter().any(|(q, _)| domain.distance(*q, p) < 1e-8) {
            continue;
        }
        let (_, nu) = s.jets(p, 1)?;
        let n = [nu[0].value(), nu[1].value(), nu[2].value()];
        let jac = dot3(
            cross(
                [nu[0].du(), nu[1].du(), nu[2].du()],
                [nu[0].dv(), nu[1].dv(), nu[2].dv()],
            ),
            n,
        );
        if jac.abs() < 1e-10 {
            return Err(Error::Internal(format!("value {y:?} is not regular for the Gauss map")));
        }
        found.push((p, if jac > 0.0 { 1 } else { -1 }));
    }
    found.sort_by(|a, b| a.0 .0.total_cmp(&b.0 .0).then(a.0 .1.total_cmp(&b.0 .1)));
    Ok(found)
}

/// `deg(nu)` as the signed count of preimages of a fixed generic unit vector,
/// cross-checked with a second one.
pub fn gauss_map_degree(s: &FrontalSurface, grid: usize) -> Result<DegreeReport> {
    if !s.domain.is_compact() {
        return Err(Error::NonCompactDomain);
    }
    let y = normalized([0.3137, 0.5821, 0.7503]);
    let y2 = normalized([-0.6173, 0.2231, -0.4519]);
    let pre = preimages(s, y, grid)?;
    let check = preimages(s, y2, grid)?;
    Ok(DegreeReport {
        degree: pre.iter().map(|x| x.1 as i64).sum(),
        regular_value: y,
        preimages: pre,
        check_degree: check.iter().map(|x| x.1 as i64).sum(),
    })
}
