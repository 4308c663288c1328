//! File formats: tensor sequences as JSON, coefficient matrices as CSV.
//!
//! JSON layout:
//!
//! ```text
//! {"dimension": 2, "level": 2, "field": "rational",
//!  "levels": ["1", ["1", "1"], [["1/2", "1"], ["0", "1/2"]]]}
//! ```
//!
//! Level `l` is nested `l` arrays deep with the first word letter outermost.
//! Rationals are strings `"p/q"` in lowest terms (`"p"` for integers); floats
//! are JSON numbers printed with shortest round-trip precision.

use std::path::Path;
use std::str::FromStr;

use num_traits::Zero;
use serde_json::{Map, Number, Value};

use crate::algebra::{TensorAlgebraSpace, TensorSequence};
use crate::error::{Error, Result};
use crate::field::{Coefficient, FieldKind, Rational};
use crate::matrix::CoefMatrix;

/// Textual encodings for a coefficient type.
pub trait TextCoefficient: Coefficient + Sized {
    fn to_json(&self) -> Result<Value>;
    fn from_json(value: &Value) -> Result<Self>;
    /// Parse one CSV cell.
    fn parse_cell(cell: &str) -> Result<Self>;
    /// Rendering used by the flat output mode.
    fn to_text(&self) -> String;
}

fn parse_rational_str(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("`{s}` is not a rational number"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = num_bigint::BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = num_bigint::BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("`{s}` has a zero denominator")));
            }
            Ok(Rational::new(n, d))
        }
        None => num_bigint::BigInt::from_str(s)
            .map(Rational::from_integer)
            .map_err(|_| bad()),
    }
}

impl TextCoefficient for Rational {
    fn to_json(&self) -> Result<Value> {
        Ok(Value::String(self.to_string()))
    }

    fn from_json(value: &Value) -> Result<Self> {
        match value {
            Value::String(s) => parse_rational_str(s),
            Value::Number(n) if n.is_i64() => Ok(Rational::from_i64(n.as_i64().unwrap())),
            other => Err(Error::Parse(format!(
                "expected a rational string, found {other}"
            ))),
        }
    }

    fn parse_cell(cell: &str) -> Result<Self> {
        if let Ok(r) = parse_rational_str(cell) {
            return Ok(r);
        }
        // Decimal spellings of integers such as "3.0" are exact.
        match cell.trim().parse::<f64>() {
            Ok(v) if v.is_finite() && v.fract() == 0.0 && v.abs() < 9.0e15 => {
                Ok(Rational::from_i64(v as i64))
            }
            _ => Err(Error::Parse(format!(
                "`{}` is not an exact rational (use p/q or an integer)",
                cell.trim()
            ))),
        }
    }

    fn to_text(&self) -> String {
        self.to_string()
    }
}

impl TextCoefficient for f64 {
    fn to_json(&self) -> Result<Value> {
        Number::from_f64(*self)
            .map(Value::Number)
            .ok_or_else(|| Error::NonFinite(format!("{self} cannot be written as JSON")))
    }

    fn from_json(value: &Value) -> Result<Self> {
        value
            .as_f64()
            .ok_or_else(|| Error::Parse(format!("expected a number, found {value}")))
    }

    fn parse_cell(cell: &str) -> Result<Self> {
        let cell = cell.trim();
        if cell.contains('/') {
            return parse_rational_str(cell).map(|r| r.to_f64());
        }
        let v: f64 = cell
            .parse()
            .map_err(|_| Error::Parse(format!("`{cell}` is not a number")))?;
        if !v.is_finite() {
            return Err(Error::Parse(format!("`{cell}` is not finite")));
        }
        Ok(v)
    }

    fn to_text(&self) -> String {
        format!("{self:?}")
    }
}

fn nest(values: &[Value], d: usize, depth: usize) -> Value {
    if depth == 0 {
        return values[0].clone();
    }
    let chunk = values.len() / d;
    Value::Array(values.chunks(chunk).map(|c| nest(c, d, depth - 1)).collect())
}

fn unnest<S: TextCoefficient>(value: &Value, d: usize, depth: usize, out: &mut Vec<S>) -> Result<()> {
    if depth == 0 {
        out.push(S::from_json(value)?);
        return Ok(());
    }
    let items = value
        .as_array()
        .ok_or_else(|| Error::Parse(format!("expected an array at depth {depth}")))?;
    if items.len() != d {
        return Err(Error::Parse(format!(
            "expected {d} entries, found {}",
            items.len()
        )));
    }
    items.iter().try_for_each(|v| unnest(v, d, depth - 1, out))
}

pub fn tensor_to_json<S: TextCoefficient>(t: &TensorSequence<S>) -> Result<Value> {
    let d = t.dimension();
    let levels = t
        .levels()
        .iter()
        .enumerate()
        .map(|(l, level)| {
            let values = level.iter().map(S::to_json).collect::<Result<Vec<_>>>()?;
            Ok(nest(&values, d, l))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut obj = Map::new();
    obj.insert("dimension".into(), d.into());
    obj.insert("level".into(), t.truncation_level().into());
    obj.insert("field".into(), S::FIELD.as_str().into());
    obj.insert("levels".into(), Value::Array(levels));
    Ok(Value::Object(obj))
}

pub fn tensor_to_json_string<S: TextCoefficient>(t: &TensorSequence<S>) -> Result<String> {
    Ok(tensor_to_json(t)?.to_string())
}

fn read_header(value: &Value) -> Result<TensorAlgebraSpace> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Parse("tensor sequence must be a JSON object".into()))?;
    let int = |key: &str| -> Result<usize> {
        obj.get(key)
            .and_then(Value::as_u64)
            .map(|v| v as usize)
            .ok_or_else(|| Error::Parse(format!("missing or invalid `{key}`")))
    };
    let field = obj
        .get("field")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse("missing `field`".into()))?
        .parse::<FieldKind>()
        .map_err(Error::Parse)?;
    TensorAlgebraSpace::new(int("dimension")?, int("level")?, field)
        .map_err(|e| Error::Parse(e.to_string()))
}

pub fn tensor_from_json<S: TextCoefficient>(value: &Value) -> Result<TensorSequence<S>> {
    let space = read_header(value)?;
    if space.field != S::FIELD {
        return Err(Error::Parse(format!(
            "expected field {}, document has {}",
            S::FIELD,
            space.field
        )));
    }
    let levels_json = value["levels"]
        .as_array()
        .ok_or_else(|| Error::Parse("missing `levels` array".into()))?;
    if levels_json.len() != space.level + 1 {
        return Err(Error::Parse(format!(
            "expected {} levels, found {}",
            space.level + 1,
            levels_json.len()
        )));
    }
    let mut levels = Vec::with_capacity(levels_json.len());
    for (l, lv) in levels_json.iter().enumerate() {
        let mut out = Vec::with_capacity(space.level_len(l));
        unnest(lv, space.dimension, l, &mut out)?;
        levels.push(out);
    }
    TensorSequence::from_levels(space, levels)
}

/// A tensor sequence whose field is only known at runtime.
#[derive(Debug, Clone, PartialEq)]
pub enum AnySequence {
    Rational(TensorSequence<Rational>),
    Float(TensorSequence<f64>),
}

impl AnySequence {
    pub fn field(&self) -> FieldKind {
        match self {
            AnySequence::Rational(_) => FieldKind::Rational,
            AnySequence::Float(_) => FieldKind::Float64,
        }
    }

    pub fn to_f64(&self) -> TensorSequence<f64> {
        match self {
            AnySequence::Rational(t) => t.to_f64(),
            AnySequence::Float(t) => t.clone(),
        }
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        match read_header(value)?.field {
            FieldKind::Rational => tensor_from_json(value).map(AnySequence::Rational),
            FieldKind::Float64 => tensor_from_json(value).map(AnySequence::Float),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
        Self::from_json(&value)
    }

    pub fn to_json_string(&self) -> Result<String> {
        match self {
            AnySequence::Rational(t) => tensor_to_json_string(t),
            AnySequence::Float(t) => tensor_to_json_string(t),
        }
    }

    /// One entry per line in flatten order.
    pub fn to_flat_text(&self) -> String {
        fn render<S: TextCoefficient>(t: &TensorSequence<S>) -> String {
            t.flatten().iter().map(|c| c.to_text() + "\n").collect()
        }
        match self {
            AnySequence::Rational(t) => render(t),
            AnySequence::Float(t) => render(t),
        }
    }
}

/// Parse a coefficient matrix: one CSV row per path coordinate.
pub fn parse_coef_csv<S: TextCoefficient>(text: &str) -> Result<CoefMatrix<S>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse(format!("CSV: {e}")))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push(
            record
                .iter()
                .map(S::parse_cell)
                .collect::<Result<Vec<_>>>()?,
        );
    }
    if rows.is_empty() {
        return Err(Error::Parse("coefficient CSV is empty".into()));
    }
    CoefMatrix::from_rows(rows).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_coef_csv<S: TextCoefficient>(path: &Path) -> Result<CoefMatrix<S>> {
    parse_coef_csv(&std::fs::read_to_string(path)?)
}

pub fn coef_to_csv<S: TextCoefficient>(m: &CoefMatrix<S>) -> String {
    m.to_rows()
        .iter()
        .map(|row| row.iter().map(S::to_text).collect::<Vec<_>>().join(",") + "\n")
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signatures::core_axis;

    #[test]
    fn axis_fixture_json_layout() {
        let t = core_axis::<Rational>(TensorAlgebraSpace::of::<Rational>(2, 2).unwrap()).unwrap();
        let json = tensor_to_json_string(&t).unwrap();
        assert_eq!(
            json,
            r#"{"dimension":2,"field":"rational","level":2,"levels":["1",["1","1"],[["1/2","1"],["0","1/2"]]]}"#
        );
        let back = AnySequence::from_json_str(&json).unwrap();
        assert_eq!(back, AnySequence::Rational(t));
    }

    #[test]
    fn float_json_is_bit_exact() {
        let space = TensorAlgebraSpace::of::<f64>(2, 1).unwrap();
        let t = TensorSequence::from_levels(space, vec![vec![1.0], vec![0.1 + 0.2, -0.0]]).unwrap();
        let json = tensor_to_json_string(&t).unwrap();
        let back: TensorSequence<f64> =
            tensor_from_json(&serde_json::from_str(&json).unwrap()).unwrap();
        for (a, b) in t.flatten().iter().zip(back.flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn non_finite_floats_cannot_be_written() {
        let space = TensorAlgebraSpace::of::<f64>(1, 1).unwrap();
        let t = TensorSequence::from_levels(space, vec![vec![1.0], vec![f64::NAN]]).unwrap();
        assert!(tensor_to_json_string(&t).is_err());
    }

    #[test]
    fn malformed_documents_are_rejected() {
        for doc in [
            "not json",
            r#"{"dimension":2,"level":1,"field":"rational"}"#,
            r#"{"dimension":2,"level":1,"field":"rational","levels":["1",["1"]]}"#,
            r#"{"dimension":2,"level":1,"field":"rational","levels":["1",["1","x"]]}"#,
            r#"{"dimension":2,"level":1,"field":"rational","levels":["1",["1","1/0"]]}"#,
            r#"{"dimension":2,"level":1,"field":"complex","levels":["1",["1","1"]]}"#,
            r#"{"dimension":0,"level":1,"field":"float64","levels":[1,[]]}"#,
        ] {
            assert!(matches!(AnySequence::from_json_str(doc), Err(Error::Parse(_))), "{doc}");
        }
    }

    #[test]
    fn rationals_are_normalized_on_read() {
        let doc = r#"{"dimension":1,"level":1,"field":"rational","levels":["2/2",["4/-6"]]}"#;
        let AnySequence::Rational(t) = AnySequence::from_json_str(doc).unwrap() else {
            panic!("wrong field")
        };
        assert_eq!(t.level(1)[0].to_string(), "-2/3");
    }

    #[test]
    fn csv_parsing_by_field() {
        let text = "1, 2/3\n-4, 5.0\n";
        let r: CoefMatrix<Rational> = parse_coef_csv(text).unwrap();
        assert_eq!(r.get(0, 1), &Rational::from_ratio(2, 3));
        assert_eq!(r.get(1, 1), &Rational::from_i64(5));
        let f: CoefMatrix<f64> = parse_coef_csv(text).unwrap();
        assert!((f.get(0, 1) - 2.0 / 3.0).abs() < 1e-15);
        assert!(parse_coef_csv::<Rational>("0.5,1\n").is_err());
        assert!(parse_coef_csv::<f64>("0.5,abc\n").is_err());
        assert!(parse_coef_csv::<f64>("1,2\n3\n").is_err());
        assert!(parse_coef_csv::<f64>("").is_err());
    }

    #[test]
    fn csv_writer_round_trips() {
        let m = CoefMatrix::<Rational>::from_rows(vec![
            vec![Rational::from_ratio(1, 2), Rational::from_i64(-3)],
            vec![Rational::from_i64(0), Rational::from_ratio(7, 5)],
        ])
        .unwrap();
        assert_eq!(parse_coef_csv::<Rational>(&coef_to_csv(&m)).unwrap(), m);
    }
}
