//! Full analysis pipeline and the versioned report envelope.

use serde::Serialize;

use crate::config::Config;
use crate::curvature::curve_samples;
use crate::domain::ParamDomain;
use crate::error::Result;
use crate::gauss;
use crate::gb::quadrature::{chord_integral, Estimate};
use crate::model::{check_compatibility, CtbView, Surface};
use crate::sectors::{all_sectors, verify_theorem_a, PeakSectorReport, TheoremA};
use crate::singular::{EndTag, SingularGraph, SingularPointReport, SingularSample, Verdict};

pub const SCHEMA: &str = "frontlab-report";
pub const SCHEMA_VERSION: u32 = 1;

/// Every report is wrapped in this envelope.
#[derive(Debug, Clone, Serialize)]
pub struct Report<T: Serialize> {
    pub schema: &'static str,
    pub version: u32,
    pub kind: &'static str,
    pub input: String,
    pub config: Config,
    pub body: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(kind: &'static str, input: impl Into<String>, config: Config, body: T) -> Self {
        Report {
            schema: SCHEMA,
            version: SCHEMA_VERSION,
            kind,
            input: input.into(),
            config,
            body,
        }
    }

    /// Pretty JSON; identical inputs give identical bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports are always serializable");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct VerdictCounts {
    pub a3: usize,
    pub non_degenerate_peak: usize,
    pub degenerate_peak: usize,
    pub isolated_peak: usize,
    pub unclassified: usize,
    pub curves: usize,
    pub closed_curves: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveSummary {
    pub index: usize,
    pub start: EndTag,
    pub end: EndTag,
    pub points: usize,
    /// Chart length of the polyline.
    pub length: f64,
    pub kappa_s_integral: Estimate,
    pub samples: Vec<SingularSample>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub name: String,
    pub model: &'static str,
    pub domain: ParamDomain,
    pub counts: VerdictCounts,
    pub vertices: Vec<SingularPointReport>,
    pub curves: Vec<CurveSummary>,
    pub peaks: Vec<PeakSectorReport>,
    pub theorem_a: Vec<TheoremA>,
    /// Largest `|D_u psi(d_v) - D_v psi(d_u)|` on a 33 x 33 grid.
    pub compatibility_residual: f64,
}

/// Singular set, classification, singular curvature profiles and sectors.
pub fn analyze_graph(view: &dyn CtbView, graph: &SingularGraph, cfg: &Config) -> Result<Analysis> {
    let lo = gauss::rule(cfg.quad_nodes);
    let hi = gauss::rule(cfg.quad_nodes + 1);
    let mut curves = Vec::with_capacity(graph.curves.len());
    for (index, c) in graph.curves.iter().enumerate() {
        let mut integral = Estimate::default();
        for ch in c.chords() {
            integral = integral + chord_integral(view, graph, &ch, &lo, &hi)?;
        }
        let length = c
            .points
            .windows(2)
            .map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1))
            .sum();
        curves.push(CurveSummary {
            index,
            start: c.start,
            end: c.end,
            points: c.points.len(),
            length,
            kappa_s_integral: integral,
            samples: curve_samples(view, graph, c)?,
        });
    }
    let peaks = all_sectors(view, graph)?;
    let theorem_a = peaks.iter().map(verify_theorem_a).collect::<Result<Vec<_>>>()?;
    let counts = VerdictCounts {
        a3: graph.count(Verdict::A3),
        non_degenerate_peak: graph.count(Verdict::NonDegeneratePeak),
        degenerate_peak: graph.count(Verdict::DegeneratePeak),
        isolated_peak: graph.count(Verdict::IsolatedPeak),
        unclassified: graph.count(Verdict::Unclassified),
        curves: graph.curves.len(),
        closed_curves: graph.curves.iter().filter(|c| c.is_closed()).count(),
    };
    Ok(Analysis {
        name: view.name().to_string(),
        model: if view.as_frontal().is_some() {
            "frontal"
        } else {
            "intrinsic"
        },
        domain: *view.domain(),
        counts,
        vertices: graph.vertices.clone(),
        curves,
        peaks,
        theorem_a,
        compatibility_residual: check_compatibility(view, 33)?.0,
    })
}

pub fn analyze(surface: &Surface, cfg: &Config) -> Result<Analysis> {
    let graph = SingularGraph::build(surface, cfg)?;
    analyze_graph(surface, &graph, cfg)
}
