//! JSON input formats.
//!
//! Observables and density matrices are given either as a matrix, with real
//! and imaginary parts in separate arrays, or in a short form:
//!
//! ```json
//! {"dim": 2, "matrix_re": [[0, 1], [1, 0]], "matrix_im": [[0, 0], [0, 0]]}
//! {"pauli": {"alpha": 0.5, "a": [1, 0, 0]}}
//! {"pure": {"re": [1, 0], "im": [0, 0]}}
//! {"maximally_mixed": 2}
//! ```
//!
//! Regions name grid indices, interval rectangles or a preimage. An
//! interval is `[lo, hi]` or `[lo, hi, [lo_closed, hi_closed]]`; a `null`
//! endpoint is infinite and two-element intervals are closed.
//!
//! ```json
//! {"points": [[0, 1], [1, 1]]}
//! {"rects": [{"x": [null, 0], "y": [-1, 1, [true, false]]}]}
//! {"preimage": {"f": "x + y", "interval": [null, 0]}}
//! {"full": true}
//! ```
//!
//! Partitions are one of the keywords `"singletons"`, `"rows"`, `"cols"`,
//! `"full"`, a list of regions, or `{"regions": [...], "labels": [...]}`.
//! Chains list the values of `f` in chain order (`{"values": [...]}`) or
//! their indices in the ascending value list (`{"indices": [...]}`).

use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::expr::{self, FuncExpr};
use crate::funcalc::{ChainOrder, ValueTable};
use crate::joint::{region_from_borel, GridPartition, Interval, RegionSpec, MAX_AXIS};
use crate::linalg::{Complex64, ComplexMatrix};
use crate::measure::DensityMatrix;
use crate::observable::Observable;

fn invalid(e: impl std::fmt::Display) -> Error {
    Error::InvalidFile(e.to_string())
}

fn from_str<T: for<'de> Deserialize<'de>>(src: &str) -> Result<T> {
    serde_json::from_str(src).map_err(invalid)
}

fn from_value<T: for<'de> Deserialize<'de>>(v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(invalid)
}

const MATRIX_FIELDS: &[&str] = &["matrix_re", "matrix_im"];

/// Which of the mutually exclusive keys `allowed` the object uses. Keys in
/// `companions` may appear alongside.
fn single_key(v: &Value, what: &str, allowed: &[&str], companions: &[&str]) -> Result<String> {
    let Value::Object(map) = v else {
        return Err(invalid(format!("{what} must be a JSON object")));
    };
    let present: Vec<&String> = map.keys().filter(|k| allowed.contains(&k.as_str())).collect();
    if let Some(extra) = map.keys().find(|k| !allowed.contains(&k.as_str()) && !companions.contains(&k.as_str())) {
        return Err(invalid(format!("unknown {what} field `{extra}`")));
    }
    match present.as_slice() {
        [k] => Ok(k.to_string()),
        [] => Err(invalid(format!("{what} needs one of {}", allowed.join(", ")))),
        _ => Err(invalid(format!("{what} mixes the fields {}", present.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(", ")))),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixJson {
    dim: usize,
    matrix_re: Vec<Vec<f64>>,
    #[serde(default)]
    matrix_im: Option<Vec<Vec<f64>>>,
}

impl MatrixJson {
    fn assemble(self) -> Result<ComplexMatrix> {
        let n = self.dim;
        if n == 0 || n > MAX_AXIS {
            return Err(invalid(format!("dim must be between 1 and {MAX_AXIS}, got {n}")));
        }
        let im = self.matrix_im.unwrap_or_else(|| vec![vec![0.0; n]; n]);
        for (name, part) in [("matrix_re", &self.matrix_re), ("matrix_im", &im)] {
            if part.len() != n || part.iter().any(|r| r.len() != n) {
                return Err(invalid(format!("{name} must be {n}×{n}")));
            }
        }
        ComplexMatrix::from_parts(&self.matrix_re, &im).map_err(invalid)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PauliJson {
    #[serde(default)]
    alpha: f64,
    a: [f64; 3],
}

/// Hermitian matrix from an observable file.
pub fn parse_observable_matrix(src: &str) -> Result<ComplexMatrix> {
    let v: Value = from_str(src)?;
    match single_key(&v, "observable", &["dim", "pauli"], MATRIX_FIELDS)?.as_str() {
        "pauli" => {
            let Value::Object(mut map) = v else { unreachable!() };
            let p: PauliJson = from_value(map.remove("pauli").expect("key present"))?;
            Ok(ComplexMatrix::pauli_form(p.alpha, p.a))
        }
        _ => from_value::<MatrixJson>(v)?.assemble(),
    }
}

/// Observable from an observable file. The matrix must be Hermitian.
pub fn parse_observable(src: &str) -> Result<Observable> {
    Observable::from_matrix(&parse_observable_matrix(src)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PureJson {
    re: Vec<f64>,
    #[serde(default)]
    im: Option<Vec<f64>>,
}

/// Density matrix from a density file. Subnormalized states are accepted.
pub fn parse_density(src: &str) -> Result<DensityMatrix> {
    let v: Value = from_str(src)?;
    let key = single_key(&v, "density", &["dim", "pure", "maximally_mixed"], MATRIX_FIELDS)?;
    let Value::Object(mut map) = v else { unreachable!() };
    match key.as_str() {
        "pure" => {
            let p: PureJson = from_value(map.remove("pure").expect("key present"))?;
            let n = p.re.len();
            if n == 0 || n > MAX_AXIS {
                return Err(invalid(format!("state length must be between 1 and {MAX_AXIS}, got {n}")));
            }
            let im = p.im.unwrap_or_else(|| vec![0.0; n]);
            if im.len() != n {
                return Err(invalid("re and im differ in length"));
            }
            if p.re.iter().chain(&im).any(|x| !x.is_finite()) {
                return Err(invalid("non-finite amplitude"));
            }
            let psi: Vec<Complex64> = p.re.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)).collect();
            DensityMatrix::pure(&psi)
        }
        "maximally_mixed" => {
            let n: usize = from_value(map.remove("maximally_mixed").expect("key present"))?;
            if n == 0 || n > MAX_AXIS {
                return Err(invalid(format!("dim must be between 1 and {MAX_AXIS}, got {n}")));
            }
            Ok(DensityMatrix::maximally_mixed(n))
        }
        _ => DensityMatrix::new(from_value::<MatrixJson>(Value::Object(map))?.assemble()?),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IntervalJson {
    Closed(Option<f64>, Option<f64>),
    Flagged(Option<f64>, Option<f64>, [bool; 2]),
}

impl IntervalJson {
    fn interval(self) -> Result<Interval> {
        let (lo, hi, [lo_closed, hi_closed]) = match self {
            IntervalJson::Closed(lo, hi) => (lo, hi, [true, true]),
            IntervalJson::Flagged(lo, hi, flags) => (lo, hi, flags),
        };
        let i = Interval {
            lo,
            hi,
            lo_closed: lo_closed && lo.is_some(),
            hi_closed: hi_closed && hi.is_some(),
        };
        i.validate()?;
        Ok(i)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RectJson {
    x: IntervalJson,
    y: IntervalJson,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PreimageJson {
    f: String,
    interval: IntervalJson,
}

fn region_spec(v: Value) -> Result<RegionSpec> {
    let key = single_key(&v, "region", &["points", "rects", "preimage", "full"], &[])?;
    let Value::Object(mut map) = v else { unreachable!() };
    let body = map.remove(&key).expect("key present");
    match key.as_str() {
        "points" => {
            let pts: Vec<[usize; 2]> = from_value(body)?;
            Ok(RegionSpec::Points(pts.into_iter().map(|[i, k]| (i, k)).collect()))
        }
        "rects" => {
            let rects: Vec<RectJson> = from_value(body)?;
            let rects = rects
                .into_iter()
                .map(|r| Ok((r.x.interval()?, r.y.interval()?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(RegionSpec::Rects(rects))
        }
        "preimage" => {
            let p: PreimageJson = from_value(body)?;
            let f: FuncExpr = expr::parse(&p.f, &["x", "y"])?;
            Ok(RegionSpec::Preimage {
                f,
                interval: p.interval.interval()?,
            })
        }
        _ => match body {
            Value::Bool(true) => Ok(RegionSpec::Full),
            _ => Err(invalid("`full` must be true")),
        },
    }
}

pub fn parse_region(src: &str) -> Result<RegionSpec> {
    region_spec(from_str(src)?)
}

/// The shapes a partition file can take.
#[derive(Debug, Clone, PartialEq)]
pub enum PartitionSpec {
    Singletons,
    /// One region per value of `A`.
    Rows,
    /// One region per value of `B`.
    Cols,
    Full,
    Regions { regions: Vec<RegionSpec>, labels: Option<Vec<String>> },
}

impl PartitionSpec {
    pub fn keyword(s: &str) -> Option<Self> {
        match s {
            "singletons" => Some(Self::Singletons),
            "rows" => Some(Self::Rows),
            "cols" => Some(Self::Cols),
            "full" => Some(Self::Full),
            _ => None,
        }
    }

    /// Compiles and validates the partition on the grid `σ(A) × σ(B)`.
    pub fn build(&self, a_values: &[f64], b_values: &[f64]) -> Result<GridPartition> {
        let (n, m) = (a_values.len(), b_values.len());
        let p = match self {
            Self::Singletons => GridPartition::singletons(n, m),
            Self::Rows => GridPartition::rows(n, m),
            Self::Cols => GridPartition::cols(n, m),
            Self::Full => GridPartition::full(n, m),
            Self::Regions { regions, labels } => {
                let regions = regions
                    .iter()
                    .map(|r| region_from_borel(a_values, b_values, r))
                    .collect::<Result<Vec<_>>>()?;
                match labels {
                    Some(labels) => GridPartition {
                        regions,
                        labels: labels.clone(),
                    },
                    None => GridPartition::new(regions),
                }
            }
        };
        p.validate(n, m)?;
        Ok(p)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LabeledRegions {
    regions: Vec<Value>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

pub fn parse_partition(src: &str) -> Result<PartitionSpec> {
    let v: Value = from_str(src)?;
    match v {
        Value::String(s) => PartitionSpec::keyword(&s).ok_or_else(|| invalid(format!("unknown partition keyword `{s}`"))),
        Value::Array(items) => Ok(PartitionSpec::Regions {
            regions: items.into_iter().map(region_spec).collect::<Result<_>>()?,
            labels: None,
        }),
        other => {
            let l: LabeledRegions = from_value(other)?;
            if let Some(labels) = &l.labels {
                if labels.len() != l.regions.len() {
                    return Err(invalid("label count differs from region count"));
                }
            }
            Ok(PartitionSpec::Regions {
                regions: l.regions.into_iter().map(region_spec).collect::<Result<_>>()?,
                labels: l.labels,
            })
        }
    }
}

/// A chain as written in a chain file, resolved against a value table.
#[derive(Debug, Clone, PartialEq)]
pub enum ChainSpec {
    Ascending,
    Values(Vec<f64>),
    Indices(Vec<usize>),
}

impl ChainSpec {
    pub fn resolve(&self, table: &ValueTable) -> Result<ChainOrder> {
        let n = table.values().len();
        match self {
            Self::Ascending => Ok(ChainOrder::ascending(n)),
            Self::Values(v) => ChainOrder::from_values(table, v),
            Self::Indices(ix) => {
                if ix.len() != n {
                    return Err(Error::InvalidChain(format!("{} indices listed, the value set has {n}", ix.len())));
                }
                ChainOrder::from_permutation(ix.clone())
            }
        }
    }
}

pub fn parse_chain(src: &str) -> Result<ChainSpec> {
    let v: Value = from_str(src)?;
    if v == Value::String("ascending".into()) {
        return Ok(ChainSpec::Ascending);
    }
    let key = single_key(&v, "chain", &["values", "indices"], &[])?;
    let Value::Object(mut map) = v else { unreachable!() };
    let body = map.remove(&key).expect("key present");
    match key.as_str() {
        "values" => Ok(ChainSpec::Values(from_value(body)?)),
        _ => Ok(ChainSpec::Indices(from_value(body)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observable_forms() {
        let x = parse_observable(r#"{"dim": 2, "matrix_re": [[0, 1], [1, 0]], "matrix_im": [[0, 0], [0, 0]]}"#).unwrap();
        let p = parse_observable(r#"{"pauli": {"alpha": 0, "a": [1, 0, 0]}}"#).unwrap();
        assert!(x.approx_eq(&p, 1e-12));
        let y = parse_observable(r#"{"dim": 2, "matrix_re": [[0, 0], [0, 0]], "matrix_im": [[0, -1], [1, 0]]}"#).unwrap();
        assert!(y.matrix().approx_eq(&ComplexMatrix::pauli_y(), 1e-12));
    }

    #[test]
    fn observable_errors() {
        for (src, ok) in [
            ("{", false),
            (r#"{"dim": 2, "matrix_re": [[0, 1]]}"#, false),
            (r#"{"dim": 2, "matrix_re": [[0, 1], [1, 0]], "pauli": {"a": [1, 0, 0]}}"#, false),
            (r#"{"pauli": {"a": [1, 0]}}"#, false),
            (r#"{"dim": 0, "matrix_re": []}"#, false),
            (r#"{"dim": 2, "matrix_re": [[0, 1], [1, 0]], "extra": 1}"#, false),
            (r#"{"dim": 1, "matrix_re": [[3]]}"#, true),
        ] {
            let r = parse_observable(src);
            assert_eq!(r.is_ok(), ok, "{src}: {r:?}");
            if let Err(e) = r {
                assert!(matches!(e, Error::InvalidFile(_)), "{src}: {e:?}");
            }
        }
        let e = parse_observable(r#"{"dim": 2, "matrix_re": [[0, 1], [0, 0]]}"#).unwrap_err();
        assert!(matches!(e, Error::NotHermitian { .. }));
    }

    #[test]
    fn regions() {
        assert_eq!(parse_region(r#"{"full": true}"#).unwrap(), RegionSpec::Full);
        assert_eq!(parse_region(r#"{"points": [[0, 1]]}"#).unwrap(), RegionSpec::Points(vec![(0, 1)]));
        let r = parse_region(r#"{"rects": [{"x": [null, 0], "y": [-1, 1, [true, false]]}]}"#).unwrap();
        let RegionSpec::Rects(rects) = r else { panic!() };
        assert_eq!(rects[0].0, Interval::at_most(0.0));
        assert!(!rects[0].1.hi_closed);
        let q = region_from_borel(&[-1.0, 1.0], &[-1.0, 1.0], &parse_region(r#"{"preimage": {"f": "x + y", "interval": [null, 0]}}"#).unwrap()).unwrap();
        assert_eq!(q.count(), 3);
        assert!(parse_region(r#"{"full": false}"#).is_err());
        assert!(parse_region(r#"{"rects": [{"x": [1, 0], "y": [0, 1]}]}"#).is_err());
        assert!(matches!(
            parse_region(r#"{"preimage": {"f": "x +", "interval": [0, 1]}}"#),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn partitions() {
        assert_eq!(parse_partition(r#""rows""#).unwrap(), PartitionSpec::Rows);
        assert!(parse_partition(r#""diagonal""#).is_err());
        let p = parse_partition(r#"[{"points": [[0, 0], [0, 1]]}, {"points": [[1, 0], [1, 1]]}]"#).unwrap();
        assert_eq!(p.build(&[-1.0, 1.0], &[-1.0, 1.0]).unwrap().regions, GridPartition::rows(2, 2).regions);
        let p = parse_partition(r#"{"regions": [{"full": true}], "labels": ["everything"]}"#).unwrap();
        assert_eq!(p.build(&[0.0], &[0.0, 1.0]).unwrap().labels, vec!["everything".to_string()]);
        let overlapping = parse_partition(r#"[{"full": true}, {"points": [[0, 0]]}]"#).unwrap();
        assert!(matches!(overlapping.build(&[0.0], &[0.0]), Err(Error::InvalidPartition(_))));
    }

    #[test]
    fn densities() {
        let r = parse_density(r#"{"maximally_mixed": 2}"#).unwrap();
        assert!((r.trace() - 1.0).abs() < 1e-15);
        let p = parse_density(r#"{"pure": {"re": [0.6, 0.8]}}"#).unwrap();
        assert!((p.matrix()[(0, 1)].re - 0.48).abs() < 1e-15);
        assert!(matches!(parse_density(r#"{"pure": {"re": [1, 1]}}"#), Err(Error::NotNormalized { .. })));
        assert!(parse_density(r#"{"dim": 2, "matrix_re": [[1, 0], [0, -1]]}"#).is_err());
    }

    #[test]
    fn chains() {
        let t = ValueTable::build(&[-1.0, 1.0], &[-1.0, 1.0], |x, y| x + y).unwrap();
        assert_eq!(parse_chain(r#""ascending""#).unwrap().resolve(&t).unwrap(), ChainOrder::ascending(3));
        let c = parse_chain(r#"{"values": [2, 0, -2]}"#).unwrap().resolve(&t).unwrap();
        assert_eq!(c.as_slice(), &[2, 1, 0]);
        assert!(parse_chain(r#"{"indices": [0, 1]}"#).unwrap().resolve(&t).is_err());
        assert!(matches!(
            parse_chain(r#"{"values": [5, 0, -2]}"#).unwrap().resolve(&t),
            Err(Error::UnknownValue(_))
        ));
    }
}
