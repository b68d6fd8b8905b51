//! OBJ meshes and CSV singular-curve tables.

use std::fmt::Write as _;

use crate::curvature::curve_samples;
use crate::error::Result;
use crate::model::CtbView;
use crate::singular::SingularGraph;

pub const CURVE_COLUMNS: [&str; 10] = [
    "curve",
    "t",
    "u",
    "v",
    "lambda",
    "eta_u",
    "eta_v",
    "d_lambda_eta",
    "kappa_s",
    "dtau_dt",
];

/// `n x n` vertex mesh of the image (chart coordinates for an intrinsic
/// bundle) with `lambda` and `K` per vertex as `#@` comment lines.
pub fn mesh_obj(view: &dyn CtbView, n: usize) -> Result<String> {
    let domain = view.domain();
    let n = n.max(2);
    let periodic = domain.is_compact();
    let ((u0, u1), (v0, v1)) = domain.bounds();
    let div = if periodic { n } else { n - 1 } as f64;
    let mut out = String::new();
    let _ = writeln!(out, "# frontlab mesh of {}", view.name());
    let _ = writeln!(
        out,
        "# {n} x {n} vertices; '#@ lambda K' follows each vertex, K = nan on the singular set"
    );
    for j in 0..n {
        for i in 0..n {
            let p = (u0 + (u1 - u0) * i as f64 / div, v0 + (v1 - v0) * j as f64 / div);
            let x = match view.as_frontal() {
                Some(f) => f.position(p)?,
                None => [p.0, p.1, 0.0],
            };
            let lambda = view.lambda(p, 0)?.value();
            let kl = view.k_lambda(p)?;
            let k = if lambda.abs() > 1e-12 { kl / lambda } else { f64::NAN };
            let _ = writeln!(out, "v {} {} {}", x[0], x[1], x[2]);
            let _ = writeln!(out, "#@ {lambda} {k}");
        }
    }
    let idx = |i: usize, j: usize| (j % n) * n + (i % n) + 1;
    let cells = if periodic { n } else { n - 1 };
    for j in 0..cells {
        for i in 0..cells {
            let _ = writeln!(
                out,
                "f {} {} {} {}",
                idx(i, j),
                idx(i + 1, j),
                idx(i + 1, j + 1),
                idx(i, j + 1)
            );
        }
    }
    Ok(out)
}

/// One row per sample of every singular curve.
pub fn curves_csv(view: &dyn CtbView, graph: &SingularGraph) -> Result<String> {
    let mut out = CURVE_COLUMNS.join(",");
    out.push('\n');
    for (k, c) in graph.curves.iter().enumerate() {
        for s in curve_samples(view, graph, c)? {
            let _ = writeln!(
                out,
                "{k},{},{},{},{},{},{},{},{},{}",
                s.t, s.u, s.v, s.lambda, s.eta[0], s.eta[1], s.d_lambda_eta, s.kappa_s, s.dtau_dt
            );
        }
    }
    Ok(out)
}
