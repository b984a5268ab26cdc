//! Plain-text model definition files.
//!
//! ```text
//! # comments start with '#'
//! [parameters]
//! # name   nominal  unit  identifiable
//! l1       1.0      m     yes
//! dq1      0        rad   no
//!
//! [joints]
//! # index  min                  max
//! 0        -3.141592653589793   3.141592653589793
//!
//! [chain]
//! # kind   axis  driver  value-or-id  [offset-parameter]
//! rot      z     joint   0            dq1
//! trans    x     param   l1
//! trans    z     const   0.25
//! ```
//!
//! `kind` is `trans` or `rot`, `axis` is `x`, `y` or `z`. A `joint` driver
//! takes the joint index and optionally the name of an offset parameter; a
//! `param` driver takes a parameter name; a `const` driver takes a value in
//! meters or radians. Parameter units are `m` or `rad`. Joint rows must list
//! indices 0..n in order. Transforms are listed base first, tool last.

use std::fmt::Write as _;

use super::{
    Axis, Driver, ElementaryTransform, JointLimit, KinematicModel, Parameter, TransformKind, Unit,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Parameters,
    Joints,
    Chain,
}

fn parse_f64(src: &str, line: usize, field: &str, tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::parse(src, line, field, format!("`{tok}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(src, line, field, "value must be finite"));
    }
    Ok(v)
}

fn parse_flag(src: &str, line: usize, tok: &str) -> Result<bool> {
    match tok.to_ascii_lowercase().as_str() {
        "yes" | "true" | "1" => Ok(true),
        "no" | "false" | "0" => Ok(false),
        _ => Err(Error::parse(
            src,
            line,
            "identifiable",
            format!("`{tok}` is not yes/no"),
        )),
    }
}

/// Parses a model definition. `source_name` only labels diagnostics.
pub fn parse_model(text: &str, source_name: &str) -> Result<KinematicModel> {
    let src = source_name;
    let mut section = Section::None;
    let mut parameters: Vec<Parameter> = Vec::new();
    let mut limits: Vec<JointLimit> = Vec::new();
    // chain rows are resolved after all parameters are known
    let mut raw_chain: Vec<(usize, Vec<String>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            section = match content {
                "[parameters]" => Section::Parameters,
                "[joints]" => Section::Joints,
                "[chain]" => Section::Chain,
                other => {
                    return Err(Error::parse(
                        src,
                        line,
                        "section",
                        format!("unknown section {other}"),
                    ))
                }
            };
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match section {
            Section::None => {
                return Err(Error::parse(
                    src,
                    line,
                    "section",
                    "content before the first section header",
                ))
            }
            Section::Parameters => {
                if toks.len() != 4 {
                    return Err(Error::parse(
                        src,
                        line,
                        "parameter",
                        "expected 4 fields: name nominal unit identifiable",
                    ));
                }
                let unit = match toks[2] {
                    "m" => Unit::Meter,
                    "rad" => Unit::Radian,
                    other => {
                        return Err(Error::parse(
                            src,
                            line,
                            "unit",
                            format!("`{other}` is not m or rad"),
                        ))
                    }
                };
                parameters.push(Parameter {
                    name: toks[0].to_string(),
                    nominal: parse_f64(src, line, "nominal", toks[1])?,
                    unit,
                    identifiable: parse_flag(src, line, toks[3])?,
                });
            }
            Section::Joints => {
                if toks.len() != 3 {
                    return Err(Error::parse(
                        src,
                        line,
                        "joint",
                        "expected 3 fields: index min max",
                    ));
                }
                let index: usize = toks[0].parse().map_err(|_| {
                    Error::parse(src, line, "index", format!("`{}` is not an index", toks[0]))
                })?;
                if index != limits.len() {
                    return Err(Error::parse(
                        src,
                        line,
                        "index",
                        format!("expected joint {}, found {index}", limits.len()),
                    ));
                }
                let min = parse_f64(src, line, "min", toks[1])?;
                let max = parse_f64(src, line, "max", toks[2])?;
                if min >= max {
                    return Err(Error::parse(
                        src,
                        line,
                        "max",
                        "upper limit must exceed lower limit",
                    ));
                }
                limits.push(JointLimit::new(min, max));
            }
            Section::Chain => {
                if !(4..=5).contains(&toks.len()) {
                    return Err(Error::parse(
                        src,
                        line,
                        "transform",
                        "expected: kind axis driver value-or-id [offset-parameter]",
                    ));
                }
                raw_chain.push((line, toks.iter().map(|s| s.to_string()).collect()));
            }
        }
    }

    let lookup = |line: usize, field: &str, name: &str| -> Result<usize> {
        parameters
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| Error::parse(src, line, field, format!("unknown parameter `{name}`")))
    };

    let mut chain = Vec::with_capacity(raw_chain.len());
    for (line, toks) in &raw_chain {
        let line = *line;
        let kind = match toks[0].as_str() {
            "trans" => TransformKind::Translation,
            "rot" => TransformKind::Rotation,
            other => {
                return Err(Error::parse(
                    src,
                    line,
                    "kind",
                    format!("`{other}` is not trans or rot"),
                ))
            }
        };
        let axis = match toks[1].as_str() {
            "x" => Axis::X,
            "y" => Axis::Y,
            "z" => Axis::Z,
            other => {
                return Err(Error::parse(
                    src,
                    line,
                    "axis",
                    format!("`{other}` is not x, y or z"),
                ))
            }
        };
        let driver = match toks[2].as_str() {
            "const" => {
                if toks.len() != 4 {
                    return Err(Error::parse(
                        src,
                        line,
                        "driver",
                        "const takes exactly one value",
                    ));
                }
                Driver::Constant(parse_f64(src, line, "value", &toks[3])?)
            }
            "param" => {
                if toks.len() != 4 {
                    return Err(Error::parse(
                        src,
                        line,
                        "driver",
                        "param takes exactly one name",
                    ));
                }
                Driver::Parameter(lookup(line, "parameter", &toks[3])?)
            }
            "joint" => {
                let index: usize = toks[3].parse().map_err(|_| {
                    Error::parse(
                        src,
                        line,
                        "joint",
                        format!("`{}` is not a joint index", toks[3]),
                    )
                })?;
                if index >= limits.len() {
                    return Err(Error::parse(
                        src,
                        line,
                        "joint",
                        format!("joint {index} has no entry in [joints]"),
                    ));
                }
                let offset = toks.get(4).map(|n| lookup(line, "offset", n)).transpose()?;
                Driver::Joint { index, offset }
            }
            other => {
                return Err(Error::parse(
                    src,
                    line,
                    "driver",
                    format!("`{other}` is not const, param or joint"),
                ))
            }
        };
        chain.push(ElementaryTransform::new(kind, axis, driver));
    }

    KinematicModel::new(chain, parameters, limits).map_err(|e| match e {
        Error::Input(msg) => Error::parse(src, 0, "model", msg),
        other => other,
    })
}

/// Serializes a model in the format accepted by [`parse_model`]. Numbers use
/// the shortest representation that parses back to the same `f64`.
pub fn write_model(model: &KinematicModel) -> String {
    let mut out = String::new();
    out.push_str("[parameters]\n# name nominal unit identifiable\n");
    for p in model.parameters() {
        let unit = match p.unit {
            Unit::Meter => "m",
            Unit::Radian => "rad",
        };
        let flag = if p.identifiable { "yes" } else { "no" };
        let _ = writeln!(out, "{} {} {} {}", p.name, p.nominal, unit, flag);
    }
    out.push_str("\n[joints]\n# index min max\n");
    for (j, l) in model.joint_limits().iter().enumerate() {
        let _ = writeln!(out, "{} {} {}", j, l.min, l.max);
    }
    out.push_str("\n[chain]\n# kind axis driver value-or-id [offset]\n");
    for t in model.chain() {
        let kind = match t.kind {
            TransformKind::Translation => "trans",
            TransformKind::Rotation => "rot",
        };
        let axis = match t.axis {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        };
        let _ = match t.driver {
            Driver::Constant(v) => writeln!(out, "{kind} {axis} const {v}"),
            Driver::Parameter(p) => {
                writeln!(out, "{kind} {axis} param {}", model.parameters()[p].name)
            }
            Driver::Joint {
                index,
                offset: None,
            } => writeln!(out, "{kind} {axis} joint {index}"),
            Driver::Joint {
                index,
                offset: Some(p),
            } => {
                writeln!(
                    out,
                    "{kind} {axis} joint {index} {}",
                    model.parameters()[p].name
                )
            }
        };
    }
    out
}
