//! Singularities, singular curvature and Gauss-Bonnet verification for
//! frontals and coherent tangent bundles on surfaces.

pub mod analysis;
pub mod config;
pub mod curvature;
pub mod domain;
pub mod error;
pub mod export;
pub mod expr;
pub mod gallery;
pub mod gauss;
pub mod gb;
pub mod jet;
pub mod model;
pub mod sectors;
pub mod singular;
pub mod specfile;
pub mod tape;

pub use analysis::{analyze, Analysis, Report};
pub use config::{Config, Tolerances};
pub use domain::ParamDomain;
pub use error::{Error, Result};
pub use expr::{parse, Expr};
pub use jet::Jet2;
pub use model::{CtbView, FrontalSurface, IntrinsicCtb, Local, Surface};
pub use singular::SingularGraph;
pub use tape::{eval_jet, Tape};

/// A point of the parameter domain, `(u, v)`.
pub type Point = (f64, f64);
