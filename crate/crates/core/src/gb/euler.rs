//! Euler characteristics of `M+`, `M-` and `Sigma`.

use serde::Serialize;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::model::CtbView;
use crate::singular::{EndTag, SingularGraph};

/// Counts of a cell complex.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub v: i64,
    pub e: i64,
    pub f: i64,
}

impl Counts {
    pub fn chi(&self) -> i64 {
        self.v - self.e + self.f
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EulerData {
    pub chi_plus: i64,
    pub chi_minus: i64,
    /// Twice `chi(Sigma)`; arcs that end on the window boundary count half.
    pub chi_sigma_doubled: i64,
    pub chi_sigma: f64,
    pub chi_m: i64,
    /// `m(p)` per peak vertex, in vertex order.
    pub m: Vec<usize>,
    pub plus: Counts,
    pub minus: Counts,
    pub sigma: Counts,
    /// `chi(Sigma) = sum (1 - m(p))`.
    pub sigma_identity_holds: bool,
    /// `chi(M) = chi(M+) + chi(M-) + chi(Sigma)`; only checked on a torus.
    pub sum_identity_holds: Option<bool>,
}

/// Digital complex of the nodes where `lambda` has the given sign: nodes,
/// grid edges between them and cells with all four corners.
fn digital(signs: &[bool], n_u: usize, n_v: usize, periodic: bool, want: bool) -> Counts {
    let at = |i: usize, j: usize| signs[j * n_u + i] == want;
    let mut c = Counts::default();
    let (cells_u, cells_v) = if periodic { (n_u, n_v) } else { (n_u - 1, n_v - 1) };
    for j in 0..n_v {
        for i in 0..n_u {
            if at(i, j) {
                c.v += 1;
            }
        }
    }
    for j in 0..n_v {
        for i in 0..cells_u {
            if at(i, j) && at((i + 1) % n_u, j) {
                c.e += 1;
            }
        }
    }
    for j in 0..cells_v {
        for i in 0..n_u {
            if at(i, j) && at(i, (j + 1) % n_v) {
                c.e += 1;
            }
        }
    }
    for j in 0..cells_v {
        for i in 0..cells_u {
            let (i1, j1) = ((i + 1) % n_u, (j + 1) % n_v);
            if at(i, j) && at(i1, j) && at(i, j1) && at(i1, j1) {
                c.f += 1;
            }
        }
    }
    c
}

/// Euler data from node signs on the quadrature grid and the singular graph.
pub fn euler_characteristics(view: &dyn CtbView, graph: &SingularGraph, cfg: &Config) -> Result<EulerData> {
    let domain = view.domain();
    let periodic = domain.is_compact();
    let ((u0, u1), (v0, v1)) = domain.bounds();
    let n = cfg.quad_cells();
    let nodes = if periodic { n } else { n + 1 };
    let mut signs = Vec::with_capacity(nodes * nodes);
    for j in 0..nodes {
        for i in 0..nodes {
            let p = (
                u0 + (u1 - u0) * i as f64 / n as f64,
                v0 + (v1 - v0) * j as f64 / n as f64,
            );
            signs.push(view.lambda(p, 0)?.value() >= 0.0);
        }
    }
    let plus = digital(&signs, nodes, nodes, periodic, true);
    let minus = digital(&signs, nodes, nodes, periodic, false);

    let mut m = Vec::new();
    let mut sum_one_minus_m = 0i64;
    let mut v_count = 0i64;
    for k in 0..graph.vertices.len() {
        let branches = graph.incident(k).len();
        if !branches.is_multiple_of(2) {
            return Err(Error::GraphInconsistency(format!(
                "vertex {k} has an odd number ({branches}) of incident arcs"
            )));
        }
        m.push(branches / 2);
        sum_one_minus_m += 2 * (1 - (branches / 2) as i64);
        v_count += 1;
    }
    // twice chi: arcs between peaks count 2, peak-to-boundary arcs count 1,
    // loops and boundary-to-boundary arcs count 0
    let mut e_doubled = 0i64;
    let mut e_count = 0i64;
    for c in &graph.curves {
        let ends = [c.start, c.end]
            .iter()
            .filter(|t| matches!(t, EndTag::TerminatesAtPeak { .. }))
            .count() as i64;
        if periodic && ends == 1 {
            return Err(Error::GraphInconsistency(
                "an arc ends on neither a peak nor itself".into(),
            ));
        }
        if ends > 0 {
            e_doubled += ends;
            e_count += 1;
        }
    }
    let chi_sigma_doubled = 2 * v_count - e_doubled;
    let chi_m = domain.euler_characteristic();
    let chi_sigma = chi_sigma_doubled as f64 / 2.0;
    let sum_identity_holds = periodic.then(|| 2 * chi_m == 2 * (plus.chi() + minus.chi()) + chi_sigma_doubled);
    Ok(EulerData {
        chi_plus: plus.chi(),
        chi_minus: minus.chi(),
        chi_sigma_doubled,
        chi_sigma,
        chi_m,
        m,
        plus,
        minus,
        sigma: Counts {
            v: v_count,
            e: e_count,
            f: 0,
        },
        sigma_identity_holds: chi_sigma_doubled == sum_one_minus_m,
        sum_identity_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digital_disk_and_annulus() {
        // 8 x 8 torus, a 3 x 3 block of false nodes
        let n = 8;
        let mut s = vec![true; n * n];
        for j in 2..5 {
            for i in 2..5 {
                s[j * n + i] = false;
            }
        }
        assert_eq!(digital(&s, n, n, true, false).chi(), 1);
        assert_eq!(digital(&s, n, n, true, true).chi(), -1);
        // a band: two annuli
        let mut s = vec![true; n * n];
        for j in 0..n {
            for i in 3..6 {
                s[j * n + i] = false;
            }
        }
        assert_eq!(digital(&s, n, n, true, false).chi(), 0);
        assert_eq!(digital(&s, n, n, true, true).chi(), 0);
        // a full rectangle is a disk
        assert_eq!(digital(&[true; 25], 5, 5, false, true).chi(), 1);
    }
}
