//! The JSON instance file.
//!
//! ```json
//! {
//!   "omega": ["w1", "w2"],
//!   "times": [0, 1],
//!   "filtration": {"0": [["w1", "w2"]], "1": [["w1"], ["w2"]]},
//!   "terminal": [["w1"], ["w2"]],
//!   "tau": {"w1": 1, "w2": "inf"}
//! }
//! ```
//!
//! `terminal` defaults to the last level and `tau` is optional. Times are JSON
//! numbers read exactly as decimals; `filtration` keys name the same times.
//! Generated files also carry a `generator` object recording the algorithm and
//! configuration that produced them.

use std::str::FromStr;

use num_traits::CheckedMul;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};
use thiserror::Error;

use crate::error::Error as ModelError;
use crate::events::{Partition, SampleSpace};
use crate::filtration::{validate_filtration, Filtration, FiltrationReport, StoppingTime};
use crate::generate::{GenConfig, ALGORITHM};
use crate::time::{Time, TimeAxis};
use crate::{Rational, RationalFiltration, RationalStoppingTime};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("bad generator record: {0}")]
    BadGenerator(String),
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("unknown label {label:?} in {context}")]
    UnknownLabel { label: String, context: String },
    #[error("blocks at level {level} do not form a partition: {reason}")]
    NotAPartition { level: String, reason: String },
    #[error("level {later} does not refine level {earlier}")]
    NonRefining { earlier: String, later: String },
    #[error("bad time value {0:?}: only integers and finite decimals are accepted")]
    BadTime(String),
    #[error("filtration levels do not match times: {0}")]
    LevelMismatch(String),
    #[error("tau has no value for {0:?}")]
    TauNotTotal(String),
    #[error("tau value {value} for {label:?} is not on the time axis")]
    TauOffAxis { label: String, value: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorInfo {
    pub algorithm: String,
    #[serde(flatten)]
    pub config: GenConfig,
}

impl GeneratorInfo {
    pub fn new(config: GenConfig) -> Self {
        Self {
            algorithm: ALGORITHM.to_string(),
            config,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub filtration: RationalFiltration,
    pub tau: Option<RationalStoppingTime>,
    pub generator: Option<GeneratorInfo>,
}

/// An instance plus non-fatal findings from parsing.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub instance: Instance,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Reject unknown top-level keys instead of warning about them.
    pub strict: bool,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawTau {
    Number(Number),
    Text(String),
}

#[derive(Deserialize)]
struct RawInstance {
    omega: Vec<String>,
    times: Vec<Number>,
    filtration: Map<String, Value>,
    #[serde(default)]
    terminal: Option<Vec<Vec<String>>>,
    #[serde(default)]
    tau: Option<Map<String, Value>>,
    #[serde(default)]
    generator: Option<Map<String, Value>>,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

fn json_error(e: serde_json::Error) -> InstanceError {
    InstanceError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Reads a JSON number (or its text) as an exact rational.
///
/// Accepts `[-]digits[.digits][e[+-]digits]`; anything that does not fit in
/// 64-bit numerator and denominator is rejected.
pub fn parse_decimal(text: &str) -> Result<Rational, InstanceError> {
    let bad = || InstanceError::BadTime(text.to_string());
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (text, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    if digits.contains('.')
        && (frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()))
    {
        return Err(bad());
    }
    let mut numer: i64 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        numer = numer
            .checked_mul(10)
            .and_then(|v| v.checked_add(i64::from(b - b'0')))
            .ok_or_else(bad)?;
    }
    let scale = exponent - frac_part.len() as i32;
    let power = 10i64.checked_pow(scale.unsigned_abs()).ok_or_else(bad)?;
    let mut value = if scale >= 0 {
        Rational::from_integer(numer)
            .checked_mul(&Rational::from_integer(power))
            .ok_or_else(bad)?
    } else {
        Rational::new(numer, power)
    };
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Writes a rational as a decimal JSON number; fails for non-terminating
/// decimals such as 1/3.
pub fn format_decimal(value: &Rational) -> Result<String, InstanceError> {
    let bad = || InstanceError::BadTime(value.to_string());
    if value.is_integer() {
        return Ok(value.to_integer().to_string());
    }
    let mut denom = *value.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while denom % 2 == 0 {
        denom /= 2;
        twos += 1;
    }
    while denom % 5 == 0 {
        denom /= 5;
        fives += 1;
    }
    if denom != 1 {
        return Err(bad());
    }
    let places = twos.max(fives);
    let scale = 10i64.checked_pow(places).ok_or_else(bad)?;
    let scaled = (value * Rational::from_integer(scale)).to_integer();
    let sign = if scaled < 0 { "-" } else { "" };
    let magnitude = scaled.unsigned_abs();
    let int_part = magnitude / scale as u64;
    let frac_part = magnitude % scale as u64;
    Ok(format!(
        "{sign}{int_part}.{frac_part:0width$}",
        width = places as usize
    ))
}

fn blocks_to_partition(
    space: &SampleSpace,
    level: &str,
    blocks: &[Vec<String>],
) -> Result<Partition, InstanceError> {
    let mut events = Vec::with_capacity(blocks.len());
    let mut listed = 0;
    for block in blocks {
        listed += block.len();
        let event = space
            .event(block.iter().map(String::as_str))
            .map_err(|label| InstanceError::UnknownLabel {
                label,
                context: format!("level {level}"),
            })?;
        events.push(event);
    }
    if listed != space.len() {
        return Err(InstanceError::NotAPartition {
            level: level.to_string(),
            reason: format!("{listed} labels listed for {} outcomes", space.len()),
        });
    }
    Partition::new(space.len(), events).map_err(|e| InstanceError::NotAPartition {
        level: level.to_string(),
        reason: e.to_string(),
    })
}

fn value_to_blocks(level: &str, value: Value) -> Result<Vec<Vec<String>>, InstanceError> {
    serde_json::from_value(value).map_err(|e| InstanceError::NotAPartition {
        level: level.to_string(),
        reason: format!("expected a list of label lists ({e})"),
    })
}

/// Reads the `generator` object field by field; serde's flattening would
/// turn exact numbers into maps.
fn parse_generator(mut map: Map<String, Value>) -> Result<GeneratorInfo, InstanceError> {
    let algorithm = match map.remove("algorithm") {
        Some(Value::String(name)) => name,
        _ => return Err(InstanceError::BadGenerator("missing \"algorithm\"".into())),
    };
    let config: GenConfig = serde_json::from_value(Value::Object(map))
        .map_err(|e| InstanceError::BadGenerator(e.to_string()))?;
    Ok(GeneratorInfo { algorithm, config })
}

/// Parses and validates an instance file.
pub fn parse_instance(text: &str, options: ParseOptions) -> Result<Parsed, InstanceError> {
    let raw: RawInstance = serde_json::from_str(text).map_err(json_error)?;
    let mut warnings = Vec::new();
    for key in raw.extra.keys() {
        if options.strict {
            return Err(InstanceError::UnknownKey(key.clone()));
        }
        warnings.push(format!("ignoring unknown key {key:?}"));
    }

    let space = SampleSpace::new(raw.omega)?;
    let times = raw
        .times
        .iter()
        .map(|n| parse_decimal(&n.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    let axis = TimeAxis::new(times)?;

    let mut slots: Vec<Option<Partition>> = vec![None; axis.len()];
    for (key, value) in raw.filtration {
        let t = parse_decimal(&key)?;
        let i = axis.position(&t).ok_or_else(|| {
            InstanceError::LevelMismatch(format!("key {key:?} is not a listed time"))
        })?;
        if slots[i].is_some() {
            return Err(InstanceError::LevelMismatch(format!(
                "time {key:?} appears twice"
            )));
        }
        let blocks = value_to_blocks(&key, value)?;
        slots[i] = Some(blocks_to_partition(&space, &key, &blocks)?);
    }
    let levels = slots
        .into_iter()
        .zip(axis.times())
        .map(|(slot, t)| {
            slot.ok_or_else(|| InstanceError::LevelMismatch(format!("no level for time {t}")))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let terminal = match raw.terminal {
        Some(blocks) => blocks_to_partition(&space, "terminal", &blocks)?,
        None => levels.last().expect("axis is nonempty").clone(),
    };

    let tau = raw
        .tau
        .map(|map| parse_tau(&space, &axis, map))
        .transpose()?;

    let filtration = Filtration::new(space, axis, levels, terminal)?;
    if let FiltrationReport::NotRefining { earlier, later, .. } = validate_filtration(&filtration) {
        return Err(InstanceError::NonRefining {
            earlier: earlier.to_string(),
            later: later.to_string(),
        });
    }

    Ok(Parsed {
        instance: Instance {
            filtration,
            tau,
            generator: raw.generator.map(parse_generator).transpose()?,
        },
        warnings,
    })
}

fn parse_tau(
    space: &SampleSpace,
    axis: &TimeAxis<Rational>,
    map: Map<String, Value>,
) -> Result<RationalStoppingTime, InstanceError> {
    let mut values: Vec<Option<Time<Rational>>> = vec![None; space.len()];
    for (label, value) in map {
        let i = space
            .index_of(&label)
            .ok_or_else(|| InstanceError::UnknownLabel {
                label: label.clone(),
                context: "tau".into(),
            })?;
        let time = match serde_json::from_value::<RawTau>(value.clone()) {
            Ok(RawTau::Number(n)) => Time::Finite(parse_decimal(&n.to_string())?),
            Ok(RawTau::Text(s)) if s == "inf" => Time::Infinity,
            _ => return Err(InstanceError::BadTime(value.to_string())),
        };
        if !axis.contains(&time) {
            return Err(InstanceError::TauOffAxis {
                label,
                value: time.to_string(),
            });
        }
        values[i] = Some(time);
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| InstanceError::TauNotTotal(space.label(i).to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StoppingTime::new(values))
}

fn number(t: &Rational) -> Result<Value, InstanceError> {
    let text = format_decimal(t)?;
    Number::from_str(&text)
        .map(Value::Number)
        .map_err(|_| InstanceError::BadTime(text))
}

fn partition_value(space: &SampleSpace, p: &Partition) -> Value {
    Value::Array(
        p.blocks()
            .iter()
            .map(|b| Value::Array(b.iter().map(|i| Value::from(space.label(i))).collect()))
            .collect(),
    )
}

/// The instance as a JSON value with keys and blocks in canonical order.
pub fn instance_to_value(instance: &Instance) -> Result<Value, InstanceError> {
    let f = &instance.filtration;
    let space = f.space();
    let mut root = Map::new();
    root.insert(
        "omega".into(),
        Value::Array(space.labels().iter().cloned().map(Value::from).collect()),
    );
    root.insert(
        "times".into(),
        Value::Array(
            f.axis()
                .times()
                .iter()
                .map(number)
                .collect::<Result<_, _>>()?,
        ),
    );
    let mut levels = Map::new();
    for (t, p) in f.timed_levels() {
        levels.insert(format_decimal(t)?, partition_value(space, p));
    }
    root.insert("filtration".into(), Value::Object(levels));
    root.insert("terminal".into(), partition_value(space, f.terminal()));
    if let Some(tau) = &instance.tau {
        let mut map = Map::new();
        for (i, v) in tau.values().iter().enumerate() {
            let value = match v {
                Time::Finite(t) => number(t)?,
                Time::Infinity => Value::from("inf"),
            };
            map.insert(space.label(i).to_string(), value);
        }
        root.insert("tau".into(), Value::Object(map));
    }
    if let Some(generator) = &instance.generator {
        root.insert(
            "generator".into(),
            serde_json::to_value(generator).expect("generator info serializes"),
        );
    }
    Ok(Value::Object(root))
}

pub fn serialize_instance(instance: &Instance) -> Result<String, InstanceError> {
    let value = instance_to_value(instance)?;
    let mut text = serde_json::to_string_pretty(&value).expect("JSON values serialize");
    text.push('\n');
    Ok(text)
}

/// Converts an integer-timed instance to the rational form used on disk.
pub fn to_rational(
    f: &Filtration<i64>,
    tau: Option<&StoppingTime<i64>>,
) -> Result<(RationalFiltration, Option<RationalStoppingTime>), ModelError> {
    let axis = TimeAxis::new(
        f.axis()
            .times()
            .iter()
            .map(|&t| Rational::from_integer(t))
            .collect(),
    )?;
    let filtration = Filtration::new(
        f.space().clone(),
        axis,
        f.levels().to_vec(),
        f.terminal().clone(),
    )?;
    let tau = tau.map(|tau| {
        StoppingTime::new(
            tau.values()
                .iter()
                .map(|v| match v {
                    Time::Finite(t) => Time::Finite(Rational::from_integer(*t)),
                    Time::Infinity => Time::Infinity,
                })
                .collect(),
        )
    });
    Ok((filtration, tau))
}
