use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_path_to_error::Segment;

use crate::composite::CompositeProblem;
use crate::error::{Error, Result};
use crate::expr::SmoothMap;
use crate::linalg::Vector;
use crate::plq::{PlqFunction, PlqSpec, ValidationReport};

/// Probe count used when validating `h` at load time.
pub const LOAD_PROBES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Newton,
    Quasi,
    Smooth,
    Enum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

/// On-disk problem description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    pub m: usize,
    pub h: PlqSpec,
    pub c: Vec<String>,
    /// Known solution; `y` is required here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<PointSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<PointSpec>,
    #[serde(default)]
    pub options: OptionsSpec,
}

#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub name: String,
    pub problem: CompositeProblem,
    pub reference: Option<(Vector, Vector)>,
    pub start: Option<(Vector, Option<Vector>)>,
    pub options: OptionsSpec,
    pub validation: ValidationReport,
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => out.push_str("/?"),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

fn schema(pointer: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Schema { pointer: pointer.into(), msg: msg.into() }
}

/// Prefixes a pointer reported by a nested parser with the location of the nested block.
fn nest(e: Error, prefix: &str) -> Error {
    match e {
        Error::Schema { pointer, msg } => schema(format!("{prefix}{pointer}"), msg),
        other => other,
    }
}

fn point(spec: &PointSpec, n: usize, m: usize, at: &str, need_y: bool) -> Result<(Vector, Option<Vector>)> {
    if spec.x.len() != n {
        return Err(schema(format!("{at}/x"), format!("expected {n} entries, found {}", spec.x.len())));
    }
    let y = match &spec.y {
        Some(y) if y.len() != m => return Err(schema(format!("{at}/y"), format!("expected {m} entries, found {}", y.len()))),
        Some(y) => Some(Vector::from_vec(y.clone())),
        None if need_y => return Err(schema(format!("{at}/y"), "missing field")),
        None => None,
    };
    Ok((Vector::from_vec(spec.x.clone()), y))
}

/// Parses and dimension-checks a problem without rejecting an invalid `h`; the validation
/// report is attached for the caller to inspect.
pub fn parse_problem(text: &str, fallback_name: &str, seed: u64, strict: bool) -> Result<LoadedProblem> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ProblemFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = pointer_of(e.path());
        schema(pointer, e.into_inner().to_string())
    })?;
    if file.h.m != file.m {
        return Err(schema("/h/m", format!("h.m = {} but m = {}", file.h.m, file.m)));
    }
    if file.c.len() != file.m {
        return Err(schema("/c", format!("expected {} components, found {}", file.m, file.c.len())));
    }
    if file.n == 0 {
        return Err(schema("/n", "n must be positive"));
    }
    for (i, src) in file.c.iter().enumerate() {
        SmoothMap::parse(&[src], file.n).map_err(|e| schema(format!("/c/{i}"), e.to_string()))?;
    }
    let h = PlqFunction::from_spec(&file.h).map_err(|e| nest(e, "/h"))?;
    let c = SmoothMap::parse(&file.c, file.n)?;
    let problem = CompositeProblem::new(h, c)?;
    let (n, m) = (file.n, file.m);
    let reference = match &file.reference {
        Some(r) => {
            let (x, y) = point(r, n, m, "/reference", true)?;
            Some((x, y.expect("checked")))
        }
        None => None,
    };
    let start = file.start.as_ref().map(|s| point(s, n, m, "/start", false)).transpose()?;
    let validation = problem.h.validate(LOAD_PROBES, seed, strict);
    Ok(LoadedProblem {
        name: file.name.clone().unwrap_or_else(|| fallback_name.to_string()),
        problem,
        reference,
        start,
        options: file.options,
        validation,
    })
}

/// Reads, parses, dimension-checks and validates a problem file.
pub fn load_problem(path: &Path, seed: u64, strict: bool) -> Result<LoadedProblem> {
    let loaded = read_problem(path, seed, strict)?;
    if !loaded.validation.all_pass {
        return Err(Error::Validation(loaded.validation.failures.clone()));
    }
    Ok(loaded)
}

/// Like [`load_problem`] but keeps a failing validation report instead of erroring.
pub fn read_problem(path: &Path, seed: u64, strict: bool) -> Result<LoadedProblem> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("problem");
    parse_problem(&text, stem, seed, strict)
}

/// Reads a `{"x": [...], "y": [...]}` point file.
pub fn load_point(path: &Path, n: usize, m: usize) -> Result<(Vector, Option<Vector>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let spec: PointSpec =
        serde_path_to_error::deserialize(de).map_err(|e| schema(pointer_of(e.path()), e.into_inner().to_string()))?;
    point(&spec, n, m, "", false)
}
