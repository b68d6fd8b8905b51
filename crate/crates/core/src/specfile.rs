//! Surface-spec text format.
//!
//! ```text
//! # comments run to end of line
//! [surface]                 # or [ctb]
//! name     = cuspidal-edge
//! domain   = rectangle      # or flat_torus
//! u_range  = -1, 1          # rectangle only; bounds are expressions
//! v_range  = -1, 1
//! closed   = true           # optional, rectangle only
//! u_period = 2*pi           # flat_torus only
//! v_period = 2*pi
//! x = u^2                   # [surface]: x y z nu_x nu_y nu_z
//! ...
//! p11 = 1                   # [ctb]: p11 p12 p21 p22 omega_u omega_v
//! ```
//!
//! Exactly one section per file. Keys are unique; unknown keys are errors.

use std::collections::BTreeMap;

use crate::domain::ParamDomain;
use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::model::{FrontalSurface, IntrinsicCtb, Surface};

const SURFACE_KEYS: [&str; 6] = ["x", "y", "z", "nu_x", "nu_y", "nu_z"];
const CTB_KEYS: [&str; 6] = ["p11", "p12", "p21", "p22", "omega_u", "omega_v"];
const COMMON_KEYS: [&str; 7] = ["name", "domain", "u_range", "v_range", "closed", "u_period", "v_period"];

fn spec_err(line: Option<usize>, message: impl Into<String>) -> Error {
    Error::Spec {
        line,
        message: message.into(),
    }
}

/// Parses and validates a spec file.
pub fn load_spec(bytes: &[u8]) -> Result<Surface> {
    let text = std::str::from_utf8(bytes).map_err(|e| spec_err(None, format!("not UTF-8: {e}")))?;
    let mut section: Option<(String, usize)> = None;
    let mut entries: BTreeMap<String, (String, usize)> = BTreeMap::new();

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            if section.is_some() {
                return Err(spec_err(Some(line_no), "only one section per file"));
            }
            let name = name.trim();
            if name != "surface" && name != "ctb" {
                return Err(spec_err(Some(line_no), format!("unknown section [{name}]")));
            }
            section = Some((name.to_string(), line_no));
            continue;
        }
        let Some((kind, _)) = &section else {
            return Err(spec_err(Some(line_no), "key before section header"));
        };
        let Some((key, value)) = line.split_once('=') else {
            return Err(spec_err(Some(line_no), "expected `key = value`"));
        };
        let key = key.trim();
        let allowed = COMMON_KEYS.contains(&key)
            || (kind == "surface" && SURFACE_KEYS.contains(&key))
            || (kind == "ctb" && CTB_KEYS.contains(&key));
        if !allowed {
            return Err(spec_err(Some(line_no), format!("unknown key `{key}` in [{kind}]")));
        }
        if entries.contains_key(key) {
            return Err(spec_err(Some(line_no), format!("duplicate key `{key}`")));
        }
        entries.insert(key.to_string(), (value.trim().to_string(), line_no));
    }

    let Some((kind, _)) = section else {
        return Err(spec_err(None, "missing [surface] or [ctb] section"));
    };
    let take = |key: &str| -> Result<(&str, usize)> {
        entries
            .get(key)
            .map(|(v, l)| (v.as_str(), *l))
            .ok_or_else(|| spec_err(None, format!("missing key `{key}`")))
    };
    let expr = |key: &str| -> Result<Expr> {
        let (text, line) = take(key)?;
        parse(text).map_err(|e| spec_err(Some(line), format!("`{key}`: {e}")))
    };
    let constant = |text: &str, line: usize, key: &str| -> Result<f64> {
        parse(text)
            .map_err(|e| spec_err(Some(line), format!("`{key}`: {e}")))?
            .eval_constant()
            .ok_or_else(|| spec_err(Some(line), format!("`{key}` must be a constant")))
    };
    let range = |key: &str| -> Result<(f64, f64)> {
        let (text, line) = take(key)?;
        let (a, b) = text
            .split_once(',')
            .ok_or_else(|| spec_err(Some(line), format!("`{key}` expects `a, b`")))?;
        Ok((constant(a, line, key)?, constant(b, line, key)?))
    };

    let name = take("name")
        .map(|(n, _)| n.to_string())
        .unwrap_or_else(|_| "unnamed".into());
    let (domain_kind, domain_line) = take("domain")?;
    let domain = match domain_kind {
        "rectangle" => {
            for key in ["u_period", "v_period"] {
                if let Some((_, l)) = entries.get(key) {
                    return Err(spec_err(Some(*l), format!("`{key}` is not valid for a rectangle")));
                }
            }
            let mut d = ParamDomain::rectangle(range("u_range")?, range("v_range")?)
                .map_err(|e| spec_err(Some(domain_line), e.to_string()))?;
            if let Some((c, l)) = entries.get("closed") {
                let flag = match c.as_str() {
                    "true" => true,
                    "false" => false,
                    _ => return Err(spec_err(Some(*l), "`closed` must be true or false")),
                };
                if let ParamDomain::Rectangle { closed, .. } = &mut d {
                    *closed = flag;
                }
            }
            d
        }
        "flat_torus" => {
            for key in ["u_range", "v_range", "closed"] {
                if let Some((_, l)) = entries.get(key) {
                    return Err(spec_err(Some(*l), format!("`{key}` is not valid for a flat torus")));
                }
            }
            let (a, la) = take("u_period")?;
            let (b, lb) = take("v_period")?;
            ParamDomain::flat_torus(constant(a, la, "u_period")?, constant(b, lb, "v_period")?)
                .map_err(|e| spec_err(Some(domain_line), e.to_string()))?
        }
        other => {
            return Err(spec_err(
                Some(domain_line),
                format!("domain must be rectangle or flat_torus, not `{other}`"),
            ))
        }
    };

    if kind == "surface" {
        let f = [expr("x")?, expr("y")?, expr("z")?];
        let nu = [expr("nu_x")?, expr("nu_y")?, expr("nu_z")?];
        Ok(Surface::Frontal(FrontalSurface::checked(name, domain, f, nu)?))
    } else {
        let p = [[expr("p11")?, expr("p12")?], [expr("p21")?, expr("p22")?]];
        let omega = [expr("omega_u")?, expr("omega_v")?];
        Ok(Surface::Intrinsic(IntrinsicCtb::checked(name, domain, p, omega)?))
    }
}

/// Writes a surface back in spec format; `load_spec` accepts the output.
pub fn to_spec_string(surface: &Surface) -> String {
    let mut out = String::new();
    let (header, name, domain) = match surface {
        Surface::Frontal(s) => ("surface", &s.name, s.domain),
        Surface::Intrinsic(c) => ("ctb", &c.name, c.domain),
    };
    out.push_str(&format!("[{header}]\nname = {name}\n"));
    match domain {
        ParamDomain::Rectangle {
            u_range,
            v_range,
            closed,
        } => {
            out.push_str("domain = rectangle\n");
            out.push_str(&format!("u_range = {:?}, {:?}\n", u_range.0, u_range.1));
            out.push_str(&format!("v_range = {:?}, {:?}\n", v_range.0, v_range.1));
            if !closed {
                out.push_str("closed = false\n");
            }
        }
        ParamDomain::FlatTorus { u_period, v_period } => {
            out.push_str("domain = flat_torus\n");
            out.push_str(&format!("u_period = {u_period:?}\nv_period = {v_period:?}\n"));
        }
    }
    let pairs: Vec<(&str, &Expr)> = match surface {
        Surface::Frontal(s) => SURFACE_KEYS
            .iter()
            .copied()
            .zip(s.f.iter().chain(s.nu.iter()))
            .collect(),
        Surface::Intrinsic(c) => CTB_KEYS
            .iter()
            .copied()
            .zip([&c.p[0][0], &c.p[0][1], &c.p[1][0], &c.p[1][1], &c.omega[0], &c.omega[1]])
            .collect(),
    };
    for (k, e) in pairs {
        out.push_str(&format!("{k} = {e}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CtbView;

    const CUSPIDAL: &str = "\
# cuspidal edge
[surface]
name = ce
domain = rectangle
u_range = -1, 1
v_range = -1, 1
x = u^2
y = u^3
z = v
nu_x = 3*u/sqrt(9*u^2+4)
nu_y = -2/sqrt(9*u^2+4)
nu_z = 0
";

    #[test]
    fn loads_cuspidal_edge() {
        let s = load_spec(CUSPIDAL.as_bytes()).unwrap();
        assert!(matches!(s, Surface::Frontal(_)));
        assert_eq!(s.lambda((0.0, 0.3), 0).unwrap().value(), 0.0);
        let again = load_spec(to_spec_string(&s).as_bytes()).unwrap();
        assert_eq!(again.lambda((0.5, 0.1), 0).unwrap(), s.lambda((0.5, 0.1), 0).unwrap());
    }

    #[test]
    fn rejects_bad_files() {
        let dup = CUSPIDAL.replace("z = v", "z = v\nz = u");
        assert!(matches!(
            load_spec(dup.as_bytes()),
            Err(Error::Spec { line: Some(10), .. })
        ));
        let unknown = CUSPIDAL.replace("z = v", "z = v\nw = 1");
        assert!(matches!(load_spec(unknown.as_bytes()), Err(Error::Spec { .. })));
        let missing = CUSPIDAL.replace("z = v\n", "");
        assert!(matches!(
            load_spec(missing.as_bytes()),
            Err(Error::Spec { line: None, .. })
        ));
        let syntax = CUSPIDAL.replace("z = v", "z = v +");
        assert!(matches!(
            load_spec(syntax.as_bytes()),
            Err(Error::Spec { line: Some(9), .. })
        ));
        let not_unit = CUSPIDAL
            .replace("3*u/sqrt(9*u^2+4)", "1")
            .replace("-2/sqrt(9*u^2+4)", "1");
        assert!(matches!(
            load_spec(not_unit.as_bytes()),
            Err(Error::FrontalViolation { .. })
        ));
    }

    #[test]
    fn identity_ctb() {
        let text = "[ctb]\nname=id\ndomain=flat_torus\nu_period=2*pi\nv_period=1\np11=1\np12=0\np21=0\np22=1\nomega_u=0\nomega_v=0\n";
        let s = load_spec(text.as_bytes()).unwrap();
        assert!(matches!(s, Surface::Intrinsic(_)));
        assert_eq!(s.lambda((1.0, 0.5), 0).unwrap().value(), 1.0);
    }
}
