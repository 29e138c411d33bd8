//! Scenario files: a strict JSON schema (extension `.cfuse.json`) holding a
//! frame, an optional candidate dual with its Q operator, and optional
//! local frame families.
//!
//! Numbers are emitted with 17 significant digits so every `f64`
//! round-trips exactly; in `"complex"` field mode each scalar is a
//! `[re, im]` pair, in `"real"` mode a plain number. Serialization is
//! byte-deterministic for a fixed object.

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::frame::CFusionFrame;
use crate::localglue::LocalFrameFamily;
use crate::numerics::Tolerances;
use crate::qdual::QOperator;
use crate::space::{MeasureSpace, Subspace, WeightMap};
use crate::{CMat, CVec};

/// Schema version written and accepted by this crate.
pub const SCENARIO_VERSION: u64 = 1;

/// Canonical file extension for scenario files.
pub const SCENARIO_EXTENSION: &str = "cfuse.json";

/// Scalar encoding of a scenario file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarField {
    Real,
    Complex,
}

/// Local frame families attached to a scenario: one for the primary frame,
/// optionally one for the dual frame.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFamilies {
    pub f: LocalFrameFamily,
    pub g: Option<LocalFrameFamily>,
}

/// A validated scenario: domain objects ready for computation.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub field: ScalarField,
    pub frame: CFusionFrame,
    pub dual: Option<CFusionFrame>,
    pub q: Option<QOperator>,
    pub locals: Option<LocalFamilies>,
}

impl Scenario {
    /// Wraps a single frame, choosing the tightest field encoding that
    /// represents it exactly.
    pub fn new(frame: CFusionFrame) -> Self {
        let mut scenario = Self {
            field: ScalarField::Real,
            frame,
            dual: None,
            q: None,
            locals: None,
        };
        scenario.field = scenario.detect_field();
        scenario
    }

    pub fn with_dual(mut self, dual: CFusionFrame) -> Self {
        self.dual = Some(dual);
        self.field = self.detect_field();
        self
    }

    pub fn with_q(mut self, q: QOperator) -> Self {
        self.q = Some(q);
        self.field = self.detect_field();
        self
    }

    pub fn with_locals(mut self, locals: LocalFamilies) -> Self {
        self.locals = Some(locals);
        self.field = self.detect_field();
        self
    }

    fn detect_field(&self) -> ScalarField {
        let mut all_real = frame_is_real(&self.frame);
        if let Some(dual) = &self.dual {
            all_real &= frame_is_real(dual);
        }
        if let Some(q) = &self.q {
            all_real &= q.matrix().iter().all(|z| z.im == 0.0);
        }
        if let Some(locals) = &self.locals {
            all_real &= family_is_real(&locals.f);
            if let Some(g) = &locals.g {
                all_real &= family_is_real(g);
            }
        }
        if all_real {
            ScalarField::Real
        } else {
            ScalarField::Complex
        }
    }
}

fn frame_is_real(frame: &CFusionFrame) -> bool {
    frame
        .fibers()
        .iter()
        .all(|f| f.basis().iter().all(|z| z.im == 0.0))
}

fn family_is_real(family: &LocalFrameFamily) -> bool {
    family
        .fibers()
        .iter()
        .all(|f| f.basis().iter().all(|z| z.im == 0.0))
        && family
            .vectors()
            .iter()
            .all(|per| per.iter().all(|v| v.iter().all(|z| z.im == 0.0)))
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    version: u64,
    field: String,
    ambient_dim: usize,
    measure_space: RawSpace,
    fibers: Vec<Vec<Vec<RawScalar>>>,
    weights: Vec<f64>,
    #[serde(default)]
    dual: Option<RawDual>,
    #[serde(default)]
    q: Option<RawQ>,
    #[serde(default)]
    local_families: Option<RawLocals>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    atoms: Vec<RawAtom>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtom {
    id: String,
    mass: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDual {
    fibers: Vec<Vec<Vec<RawScalar>>>,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
enum RawQ {
    Dense(Vec<Vec<RawScalar>>),
    Blocks(Vec<Vec<Vec<RawScalar>>>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLocals {
    inner: RawSpace,
    f: Vec<Vec<Vec<RawScalar>>>,
    #[serde(default)]
    g: Option<Vec<Vec<Vec<RawScalar>>>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawScalar {
    Real(f64),
    Pair([f64; 2]),
}

impl RawScalar {
    fn to_complex(&self, field: ScalarField) -> Result<Complex64> {
        match (self, field) {
            (RawScalar::Real(x), ScalarField::Real) => Ok(Complex64::new(*x, 0.0)),
            (RawScalar::Pair([re, im]), ScalarField::Complex) => Ok(Complex64::new(*re, *im)),
            (RawScalar::Real(_), ScalarField::Complex) => Err(Error::Schema(
                "complex scenarios encode every scalar as a [re, im] pair".into(),
            )),
            (RawScalar::Pair(_), ScalarField::Real) => Err(Error::Schema(
                "real scenarios encode every scalar as a plain number".into(),
            )),
        }
    }
}

/// Reclassifies construction failures: invariant violations stay as such,
/// structural problems become schema errors.
fn classify(err: Error, context: &str) -> Error {
    match err {
        Error::Invariant(msg) => Error::Invariant(format!("{context}: {msg}")),
        Error::ZeroVector { index } => {
            Error::Invariant(format!("{context}: vector {index} is zero"))
        }
        Error::AllVectorsNumericallyZero => {
            Error::Invariant(format!("{context}: spanning vectors are numerically zero"))
        }
        Error::FiberViolation { atom, residual } => Error::Invariant(format!(
            "{context}: vector at atom {atom} leaves its fiber (residual {residual:.3e})"
        )),
        Error::LocalFamilyNotFrame { atom, lower } => Error::Invariant(format!(
            "{context}: local family at atom {atom} is not a frame for its fiber \
             (lower bound {lower:.3e})"
        )),
        other => Error::Schema(format!("{context}: {other}")),
    }
}

fn parse_vector(raw: &[RawScalar], n: usize, field: ScalarField, context: &str) -> Result<CVec> {
    if raw.len() != n {
        return Err(Error::Schema(format!(
            "{context}: vector has {} entries, ambient dimension is {n}",
            raw.len()
        )));
    }
    let entries: Result<Vec<Complex64>> = raw.iter().map(|s| s.to_complex(field)).collect();
    let v = CVec::from_vec(entries?);
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Invariant(format!("{context}: non-finite entry")));
    }
    Ok(v)
}

fn parse_matrix(raw: &[Vec<RawScalar>], field: ScalarField, context: &str) -> Result<CMat> {
    let rows = raw.len();
    if rows == 0 {
        return Err(Error::Schema(format!("{context}: matrix has no rows")));
    }
    let cols = raw[0].len();
    if cols == 0 || raw.iter().any(|r| r.len() != cols) {
        return Err(Error::Schema(format!("{context}: ragged or empty matrix")));
    }
    let mut m = CMat::zeros(rows, cols);
    for (i, row) in raw.iter().enumerate() {
        for (j, s) in row.iter().enumerate() {
            m[(i, j)] = s.to_complex(field)?;
        }
    }
    Ok(m)
}

fn parse_fibers(
    raw: &[Vec<Vec<RawScalar>>],
    n: usize,
    field: ScalarField,
    tol: &Tolerances,
    context: &str,
) -> Result<Vec<Subspace>> {
    raw.iter()
        .enumerate()
        .map(|(i, spanning)| {
            let label = format!("{context}, atom index {i}");
            let vectors: Result<Vec<CVec>> = spanning
                .iter()
                .map(|v| parse_vector(v, n, field, &label))
                .collect();
            Subspace::from_spanning(&vectors?, tol).map_err(|e| classify(e, &label))
        })
        .collect()
}

fn parse_frame(
    space: MeasureSpace,
    fibers: &[Vec<Vec<RawScalar>>],
    weights: &[f64],
    n: usize,
    field: ScalarField,
    tol: &Tolerances,
    context: &str,
) -> Result<CFusionFrame> {
    let fibers = parse_fibers(fibers, n, field, tol, context)?;
    let weights = WeightMap::new(weights.to_vec()).map_err(|e| classify(e, context))?;
    CFusionFrame::new(space, fibers, weights).map_err(|e| classify(e, context))
}

#[allow(clippy::too_many_arguments)]
fn parse_local_family(
    base: &MeasureSpace,
    inner: &MeasureSpace,
    fibers: &[Subspace],
    raw: &[Vec<Vec<RawScalar>>],
    n: usize,
    field: ScalarField,
    tol: &Tolerances,
    context: &str,
) -> Result<LocalFrameFamily> {
    let vectors: Result<Vec<Vec<CVec>>> = raw
        .iter()
        .enumerate()
        .map(|(i, per_atom)| {
            per_atom
                .iter()
                .map(|v| parse_vector(v, n, field, &format!("{context}, atom index {i}")))
                .collect()
        })
        .collect();
    LocalFrameFamily::new(
        base.clone(),
        inner.clone(),
        fibers.to_vec(),
        vectors?,
        tol,
    )
    .map_err(|e| classify(e, context))
}

/// Parses scenario text against the strict schema and validates every
/// domain invariant.
pub fn parse_scenario(text: &str, tol: &Tolerances) -> Result<Scenario> {
    let raw: RawScenario = serde_json::from_str(text).map_err(|e| {
        let located = format!("{} at line {}, column {}", e, e.line(), e.column());
        match e.classify() {
            serde_json::error::Category::Data => Error::Schema(located),
            _ => Error::Parse(located),
        }
    })?;

    if raw.version != SCENARIO_VERSION {
        return Err(Error::Schema(format!(
            "unsupported schema version {}, expected {SCENARIO_VERSION}",
            raw.version
        )));
    }
    let field = match raw.field.as_str() {
        "real" => ScalarField::Real,
        "complex" => ScalarField::Complex,
        other => {
            return Err(Error::Schema(format!(
                "field must be \"real\" or \"complex\", got {other:?}"
            )))
        }
    };
    if raw.ambient_dim == 0 {
        return Err(Error::Schema("ambient_dim must be at least 1".into()));
    }

    let space = MeasureSpace::new(
        raw.measure_space
            .atoms
            .iter()
            .map(|a| (a.id.clone(), a.mass)),
    )
    .map_err(|e| classify(e, "measure_space"))?;

    let frame = parse_frame(
        space.clone(),
        &raw.fibers,
        &raw.weights,
        raw.ambient_dim,
        field,
        tol,
        "frame",
    )?;

    let dual = raw
        .dual
        .as_ref()
        .map(|d| {
            parse_frame(
                space.clone(),
                &d.fibers,
                &d.weights,
                raw.ambient_dim,
                field,
                tol,
                "dual",
            )
        })
        .transpose()?;

    let q = match &raw.q {
        None => None,
        Some(raw_q) => {
            if dual.is_none() {
                return Err(Error::Schema("q requires a dual frame section".into()));
            }
            Some(parse_q(raw_q, &frame, dual.as_ref().unwrap(), field)?)
        }
    };

    let locals = raw
        .local_families
        .as_ref()
        .map(|l| -> Result<LocalFamilies> {
            let inner = MeasureSpace::new(l.inner.atoms.iter().map(|a| (a.id.clone(), a.mass)))
                .map_err(|e| classify(e, "local_families.inner"))?;
            let f = parse_local_family(
                frame.space(),
                &inner,
                frame.fibers(),
                &l.f,
                raw.ambient_dim,
                field,
                tol,
                "local_families.f",
            )?;
            let g = match &l.g {
                None => None,
                Some(g_raw) => {
                    let dual = dual.as_ref().ok_or_else(|| {
                        Error::Schema("local_families.g requires a dual frame section".into())
                    })?;
                    Some(parse_local_family(
                        dual.space(),
                        &inner,
                        dual.fibers(),
                        g_raw,
                        raw.ambient_dim,
                        field,
                        tol,
                        "local_families.g",
                    )?)
                }
            };
            Ok(LocalFamilies { f, g })
        })
        .transpose()?;

    Ok(Scenario {
        field,
        frame,
        dual,
        q,
        locals,
    })
}

fn parse_q(
    raw: &RawQ,
    frame: &CFusionFrame,
    dual: &CFusionFrame,
    field: ScalarField,
) -> Result<QOperator> {
    match raw {
        RawQ::Dense(rows) => {
            let matrix = parse_matrix(rows, field, "q.dense")?;
            // Adopt the frames' block layout when the totals line up;
            // otherwise keep a single block and let verification report
            // the shape mismatch.
            QOperator::dense(matrix.clone(), frame, dual).or_else(|_| {
                QOperator::from_parts(
                    matrix.clone(),
                    vec![matrix.ncols()],
                    vec![matrix.nrows()],
                )
            })
        }
        RawQ::Blocks(blocks) => {
            let parsed: Result<Vec<CMat>> = blocks
                .iter()
                .enumerate()
                .map(|(i, b)| parse_matrix(b, field, &format!("q.blocks[{i}]")))
                .collect();
            QOperator::from_blocks(&parsed?).map_err(|e| classify(e, "q.blocks"))
        }
    }
}

/// Reads and parses a scenario file.
pub fn read_scenario(path: impl AsRef<std::path::Path>, tol: &Tolerances) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text, tol)
}

// ---------------------------------------------------------------------------
// Serialization

/// Formats with 17 significant digits; every f64 parses back exactly.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_scalar(z: Complex64, field: ScalarField) -> Result<String> {
    match field {
        ScalarField::Real => {
            if z.im != 0.0 {
                return Err(Error::Invariant(
                    "cannot serialize complex data in a real-field scenario".into(),
                ));
            }
            Ok(fmt_f64(z.re))
        }
        ScalarField::Complex => Ok(format!("[{}, {}]", fmt_f64(z.re), fmt_f64(z.im))),
    }
}

fn escape_json(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn write_vector(v: &CVec, field: ScalarField) -> Result<String> {
    let entries: Result<Vec<String>> = v.iter().map(|&z| fmt_scalar(z, field)).collect();
    Ok(format!("[{}]", entries?.join(", ")))
}

fn write_fibers(fibers: &[Subspace], field: ScalarField, indent: &str) -> Result<String> {
    let mut out = String::from("[\n");
    for (i, fiber) in fibers.iter().enumerate() {
        let cols: Result<Vec<String>> = (0..fiber.dim())
            .map(|j| write_vector(&fiber.basis().column(j).into_owned(), field))
            .collect();
        out.push_str(&format!("{indent}  [{}]", cols?.join(", ")));
        out.push_str(if i + 1 < fibers.len() { ",\n" } else { "\n" });
    }
    out.push_str(&format!("{indent}]"));
    Ok(out)
}

fn write_matrix(m: &CMat, field: ScalarField, indent: &str) -> Result<String> {
    let mut out = String::from("[\n");
    for i in 0..m.nrows() {
        let row: Result<Vec<String>> =
            (0..m.ncols()).map(|j| fmt_scalar(m[(i, j)], field)).collect();
        out.push_str(&format!("{indent}  [{}]", row?.join(", ")));
        out.push_str(if i + 1 < m.nrows() { ",\n" } else { "\n" });
    }
    out.push_str(&format!("{indent}]"));
    Ok(out)
}

fn write_space(space: &MeasureSpace, indent: &str) -> String {
    let mut out = String::from("{\n");
    out.push_str(&format!("{indent}  \"atoms\": [\n"));
    for (i, atom) in space.atoms().iter().enumerate() {
        out.push_str(&format!(
            "{indent}    {{ \"id\": \"{}\", \"mass\": {} }}",
            escape_json(&atom.id),
            fmt_f64(atom.mass)
        ));
        out.push_str(if i + 1 < space.len() { ",\n" } else { "\n" });
    }
    out.push_str(&format!("{indent}  ]\n{indent}}}"));
    out
}

fn write_weights(weights: &WeightMap) -> String {
    let entries: Vec<String> = weights.values().iter().map(|&w| fmt_f64(w)).collect();
    format!("[{}]", entries.join(", "))
}

fn write_family_vectors(
    family: &LocalFrameFamily,
    field: ScalarField,
    indent: &str,
) -> Result<String> {
    let mut out = String::from("[\n");
    for (i, per_atom) in family.vectors().iter().enumerate() {
        let vectors: Result<Vec<String>> =
            per_atom.iter().map(|v| write_vector(v, field)).collect();
        out.push_str(&format!("{indent}  [{}]", vectors?.join(", ")));
        out.push_str(if i + 1 < family.vectors().len() { ",\n" } else { "\n" });
    }
    out.push_str(&format!("{indent}]"));
    Ok(out)
}

/// Serializes a scenario deterministically; the output ends with a
/// newline.
pub fn serialize_scenario(scenario: &Scenario) -> Result<String> {
    let field = scenario.field;
    let field_name = match field {
        ScalarField::Real => "real",
        ScalarField::Complex => "complex",
    };
    let frame = &scenario.frame;
    let mut out = String::from("{\n");
    out.push_str(&format!("  \"version\": {SCENARIO_VERSION},\n"));
    out.push_str(&format!("  \"field\": \"{field_name}\",\n"));
    out.push_str(&format!("  \"ambient_dim\": {},\n", frame.ambient_dim()));
    out.push_str(&format!(
        "  \"measure_space\": {},\n",
        write_space(frame.space(), "  ")
    ));
    out.push_str(&format!(
        "  \"fibers\": {},\n",
        write_fibers(frame.fibers(), field, "  ")?
    ));
    out.push_str(&format!("  \"weights\": {}", write_weights(frame.weights())));

    if let Some(dual) = &scenario.dual {
        out.push_str(",\n  \"dual\": {\n");
        out.push_str(&format!(
            "    \"fibers\": {},\n",
            write_fibers(dual.fibers(), field, "    ")?
        ));
        out.push_str(&format!(
            "    \"weights\": {}\n  }}",
            write_weights(dual.weights())
        ));
    }

    if let Some(q) = &scenario.q {
        if q.is_block_diagonal() && scenario.dual.is_some() {
            out.push_str(",\n  \"q\": {\n    \"blocks\": [\n");
            let (mut row, mut col) = (0, 0);
            let blocks = q.domain_dims().len();
            for (b, (&r, &c)) in q.codomain_dims().iter().zip(q.domain_dims()).enumerate() {
                let block = q.matrix().view((row, col), (r, c)).into_owned();
                out.push_str(&format!("      {}", write_matrix(&block, field, "      ")?));
                out.push_str(if b + 1 < blocks { ",\n" } else { "\n" });
                row += r;
                col += c;
            }
            out.push_str("    ]\n  }");
        } else {
            out.push_str(&format!(
                ",\n  \"q\": {{\n    \"dense\": {}\n  }}",
                write_matrix(q.matrix(), field, "    ")?
            ));
        }
    }

    if let Some(locals) = &scenario.locals {
        out.push_str(",\n  \"local_families\": {\n");
        out.push_str(&format!(
            "    \"inner\": {},\n",
            write_space(locals.f.inner(), "    ")
        ));
        out.push_str(&format!(
            "    \"f\": {}",
            write_family_vectors(&locals.f, field, "    ")?
        ));
        if let Some(g) = &locals.g {
            out.push_str(&format!(
                ",\n    \"g\": {}",
                write_family_vectors(g, field, "    ")?
            ));
        }
        out.push_str("\n  }");
    }

    out.push_str("\n}\n");
    Ok(out)
}

/// Writes a scenario file.
pub fn write_scenario(path: impl AsRef<std::path::Path>, scenario: &Scenario) -> Result<()> {
    std::fs::write(path, serialize_scenario(scenario)?)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Golden builders

/// Builds the two-atom Parseval pair on the plane: fibers `span{e1}`,
/// `span{e2}` with weights `1/sqrt(mass_i)`, the swapped-fiber dual, and
/// the coordinate-swap Q. Requires `mass2 >= mass1 > 1`.
pub fn build_disk_example(
    mass1: f64,
    mass2: f64,
) -> Result<(CFusionFrame, CFusionFrame, QOperator)> {
    if mass1 <= 1.0 || mass2 < mass1 || !mass1.is_finite() || !mass2.is_finite() {
        return Err(Error::ConstraintViolation(format!(
            "disk example needs mass2 >= mass1 > 1, got ({mass1}, {mass2})"
        )));
    }
    let tol = Tolerances::default();
    let space = MeasureSpace::new([("B1", mass1), ("B2", mass2)])?;
    let e1 = CVec::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    let e2 = CVec::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
    let span_e1 = Subspace::from_spanning(std::slice::from_ref(&e1), &tol)?;
    let span_e2 = Subspace::from_spanning(std::slice::from_ref(&e2), &tol)?;
    let weights = WeightMap::new(vec![1.0 / mass1.sqrt(), 1.0 / mass2.sqrt()])?;

    let frame = CFusionFrame::new(
        space.clone(),
        vec![span_e1.clone(), span_e2.clone()],
        weights.clone(),
    )?;
    let dual = CFusionFrame::new(space, vec![span_e2, span_e1], weights)?;

    // The swap exchanges the two one-dimensional coordinate blocks, pairing
    // each fiber of F with the equal fiber of G at the other atom. In the
    // scaled coordinates it is an isometry.
    let mut swap = CMat::zeros(2, 2);
    swap[(0, 1)] = Complex64::new(1.0, 0.0);
    swap[(1, 0)] = Complex64::new(1.0, 0.0);
    let q = QOperator::dense(swap, &frame, &dual)?;
    Ok((frame, dual, q))
}

/// The disk example packaged as a scenario, as written to the golden file.
pub fn disk_scenario(mass1: f64, mass2: f64) -> Result<Scenario> {
    let (frame, dual, q) = build_disk_example(mass1, mass2)?;
    Ok(Scenario::new(frame).with_dual(dual).with_q(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::spectral_norm;
    use crate::qdual::verify_duality;
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn disk_example_is_parseval_dual_pair() {
        let (f, g, q) = build_disk_example(1.5, std::f64::consts::PI - 1.5).unwrap();
        let bf = f.frame_bounds(&tol());
        let bg = g.frame_bounds(&tol());
        assert!((bf.lower - 1.0).abs() <= 1e-12 && (bf.upper - 1.0).abs() <= 1e-12);
        assert!(bg.is_parseval());
        let report = verify_duality(&f, &g, &q, &tol(), 7).unwrap();
        assert!(report.residual <= 1e-12);
        assert_abs_diff_eq!(report.q_norm, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn disk_synthesis_is_identity_up_to_column_order() {
        // sqrt(mass) * (1/sqrt(mass)) = 1, so the synthesis blocks are the
        // unit fiber vectors themselves.
        let (f, g, _) = build_disk_example(1.5, 2.5).unwrap();
        assert!(spectral_norm(&(f.synthesis_matrix() - CMat::identity(2, 2))) <= 1e-12);
        let mut swapped = CMat::zeros(2, 2);
        swapped[(0, 1)] = Complex64::new(1.0, 0.0);
        swapped[(1, 0)] = Complex64::new(1.0, 0.0);
        assert!(spectral_norm(&(g.synthesis_matrix() - swapped)) <= 1e-12);
    }

    #[test]
    fn disk_reconstruction_and_dimension_equality() {
        let (f, _, _) = build_disk_example(1.5, std::f64::consts::PI - 1.5).unwrap();
        let h = CVec::from_vec(vec![Complex64::new(0.3, 0.0), Complex64::new(-1.2, 0.0)]);
        let back = f.reconstruct(&h, &tol()).unwrap();
        assert!((&back - &h).norm() <= 1e-12);

        // Parseval: A n = integral of v^2 dim F = B n = 2, equal on both sides.
        let check = crate::qdual::dimension_check(&f, &tol());
        assert!((check.lower_scaled - 2.0).abs() <= 1e-10);
        assert!((check.weighted_dim_integral - 2.0).abs() <= 1e-12);
        assert!((check.upper_scaled - 2.0).abs() <= 1e-10);
        assert!(check.holds_first && check.holds_second);

        // K = 2 = n with invertible analysis: uniqueness hypothesis holds.
        assert!(crate::qdual::uniqueness_hypothesis(&f, &f, &tol()).unwrap());
    }

    #[test]
    fn disk_example_masses_are_free_parameters() {
        let (f, g, q) = build_disk_example(2.0, 2.0).unwrap();
        assert!(f.frame_bounds(&tol()).is_parseval());
        assert!(g.frame_bounds(&tol()).is_parseval());
        assert!(verify_duality(&f, &g, &q, &tol(), 7).unwrap().is_dual);
    }

    #[test]
    fn disk_example_rejects_bad_masses() {
        assert!(matches!(
            build_disk_example(0.5, 2.0),
            Err(Error::ConstraintViolation(_))
        ));
        assert!(matches!(
            build_disk_example(2.0, 1.5),
            Err(Error::ConstraintViolation(_))
        ));
    }

    #[test]
    fn disk_scenario_roundtrips_bitwise() {
        let scenario = disk_scenario(1.5, std::f64::consts::PI - 1.5).unwrap();
        let text = serialize_scenario(&scenario).unwrap();
        let parsed = parse_scenario(&text, &tol()).unwrap();
        assert_eq!(parsed, scenario);
        assert_eq!(serialize_scenario(&parsed).unwrap(), text);
    }

    #[test]
    fn minimal_scenario_parses() {
        let text = r#"{
            "version": 1,
            "field": "real",
            "ambient_dim": 2,
            "measure_space": { "atoms": [ { "id": "x", "mass": 1.0 } ] },
            "fibers": [ [[1.0, 0.0], [0.0, 1.0]] ],
            "weights": [1.0]
        }"#;
        let scenario = parse_scenario(text, &tol()).unwrap();
        assert_eq!(scenario.frame.ambient_dim(), 2);
        assert!(scenario.dual.is_none() && scenario.q.is_none());
        assert!(scenario.frame.frame_bounds(&tol()).is_parseval());
    }

    #[test]
    fn zero_weight_is_invariant_error() {
        let text = r#"{
            "version": 1,
            "field": "real",
            "ambient_dim": 2,
            "measure_space": { "atoms": [ { "id": "x", "mass": 1.0 } ] },
            "fibers": [ [[1.0, 0.0]] ],
            "weights": [0.0]
        }"#;
        assert!(matches!(
            parse_scenario(text, &tol()),
            Err(Error::Invariant(_))
        ));
    }

    #[test]
    fn unknown_field_is_schema_error() {
        let text = r#"{
            "version": 1,
            "field": "real",
            "ambient_dim": 1,
            "measure_space": { "atoms": [ { "id": "x", "mass": 1.0 } ] },
            "fibers": [ [[1.0]] ],
            "weights": [1.0],
            "surprise": true
        }"#;
        assert!(matches!(parse_scenario(text, &tol()), Err(Error::Schema(_))));
    }

    #[test]
    fn malformed_text_is_parse_error_with_position() {
        let err = parse_scenario("{ \"version\": 1,", &tol()).unwrap_err();
        match err {
            Error::Parse(msg) => assert!(msg.contains("line 1")),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_version_rejected() {
        let text = r#"{
            "version": 2,
            "field": "real",
            "ambient_dim": 1,
            "measure_space": { "atoms": [ { "id": "x", "mass": 1.0 } ] },
            "fibers": [ [[1.0]] ],
            "weights": [1.0]
        }"#;
        assert!(matches!(parse_scenario(text, &tol()), Err(Error::Schema(_))));
    }

    #[test]
    fn q_without_dual_rejected() {
        let text = r#"{
            "version": 1,
            "field": "real",
            "ambient_dim": 1,
            "measure_space": { "atoms": [ { "id": "x", "mass": 1.0 } ] },
            "fibers": [ [[1.0]] ],
            "weights": [1.0],
            "q": { "dense": [[1.0]] }
        }"#;
        assert!(matches!(parse_scenario(text, &tol()), Err(Error::Schema(_))));
    }

    #[test]
    fn complex_mode_requires_pairs() {
        let text = r#"{
            "version": 1,
            "field": "complex",
            "ambient_dim": 1,
            "measure_space": { "atoms": [ { "id": "x", "mass": 1.0 } ] },
            "fibers": [ [[1.0]] ],
            "weights": [1.0]
        }"#;
        assert!(matches!(parse_scenario(text, &tol()), Err(Error::Schema(_))));
    }

    #[test]
    fn complex_scenario_roundtrips() {
        let text = r#"{
            "version": 1,
            "field": "complex",
            "ambient_dim": 2,
            "measure_space": { "atoms": [ { "id": "x", "mass": 2.0 } ] },
            "fibers": [ [[[0.6, 0.0], [0.0, 0.8]]] ],
            "weights": [1.25]
        }"#;
        let scenario = parse_scenario(text, &tol()).unwrap();
        assert_eq!(scenario.field, ScalarField::Complex);
        let serialized = serialize_scenario(&scenario).unwrap();
        let reparsed = parse_scenario(&serialized, &tol()).unwrap();
        assert_eq!(reparsed, scenario);
        assert_eq!(serialize_scenario(&reparsed).unwrap(), serialized);
    }

    #[test]
    fn block_q_roundtrips_as_blocks() {
        let (f, g, _) = build_disk_example(1.5, 2.0).unwrap();
        let blocks = [CMat::identity(1, 1), CMat::identity(1, 1).scale(2.0)];
        let q = QOperator::from_blocks(&blocks).unwrap();
        let scenario = Scenario::new(f).with_dual(g).with_q(q.clone());
        let text = serialize_scenario(&scenario).unwrap();
        assert!(text.contains("\"blocks\""));
        let parsed = parse_scenario(&text, &tol()).unwrap();
        assert_eq!(parsed.q.as_ref().unwrap(), &q);
    }

    #[test]
    fn serialization_preserves_seventeen_digits() {
        let x = std::f64::consts::PI - 1.5;
        let formatted = fmt_f64(x);
        assert_eq!(formatted.parse::<f64>().unwrap(), x);
        let scenario = disk_scenario(1.5, x).unwrap();
        let text = serialize_scenario(&scenario).unwrap();
        assert!(text.contains(&formatted));
    }

    #[test]
    fn local_families_roundtrip() {
        let (f, g, q) = build_disk_example(1.5, 2.5).unwrap();
        let inner = MeasureSpace::new([("y", 1.0)]).unwrap();
        let e1 = CVec::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let e2 = CVec::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        let lf = LocalFrameFamily::new(
            f.space().clone(),
            inner.clone(),
            f.fibers().to_vec(),
            vec![vec![e1.clone()], vec![e2.clone()]],
            &tol(),
        )
        .unwrap();
        let lg = LocalFrameFamily::new(
            g.space().clone(),
            inner,
            g.fibers().to_vec(),
            vec![vec![e2], vec![e1]],
            &tol(),
        )
        .unwrap();
        let scenario = Scenario::new(f)
            .with_dual(g)
            .with_q(q)
            .with_locals(LocalFamilies { f: lf, g: Some(lg) });
        let text = serialize_scenario(&scenario).unwrap();
        let parsed = parse_scenario(&text, &tol()).unwrap();
        assert_eq!(parsed, scenario);
    }

    #[test]
    fn parse_q_with_wrong_size_defers_to_verification() {
        // 1x1 Q against two-dimensional fiber spaces: parses, then fails
        // shape checks at verification time.
        let text = r#"{
            "version": 1,
            "field": "real",
            "ambient_dim": 2,
            "measure_space": { "atoms": [ { "id": "a", "mass": 1.0 }, { "id": "b", "mass": 1.0 } ] },
            "fibers": [ [[1.0, 0.0]], [[0.0, 1.0]] ],
            "weights": [1.0, 1.0],
            "dual": { "fibers": [ [[1.0, 0.0]], [[0.0, 1.0]] ], "weights": [1.0, 1.0] },
            "q": { "dense": [[1.0]] }
        }"#;
        let scenario = parse_scenario(text, &tol()).unwrap();
        let q = scenario.q.unwrap();
        let err = verify_duality(&scenario.frame, scenario.dual.as_ref().unwrap(), &q, &tol(), 7)
            .unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch(_)));
    }

    #[test]
    fn golden_digits_are_value_exact() {
        let scenario = disk_scenario(1.5, std::f64::consts::PI - 1.5).unwrap();
        let text = serialize_scenario(&scenario).unwrap();
        let parsed = parse_scenario(&text, &tol()).unwrap();
        let s1 = scenario.frame.frame_operator();
        let s2 = parsed.frame.frame_operator();
        assert_eq!(spectral_norm(&(s1 - s2)), 0.0);
    }
}
