//! Parsing helpers for command-line values.

use calplan::kinematics::JointLimit;

#[derive(Debug, Clone, PartialEq)]
pub struct AngleList(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct LimitList(pub Vec<JointLimit>);

/// Parses an angle: `20deg`, `0.35rad` or a bare number in radians.
pub fn angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (num, degrees) = match (s.strip_suffix("deg"), s.strip_suffix("rad")) {
        (Some(v), _) => (v, true),
        (None, Some(v)) => (v, false),
        (None, None) => (s, false),
    };
    let v: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not an angle (use e.g. 20deg, 0.35rad or 0.35)"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(if degrees { v.to_radians() } else { v })
}

/// Comma-separated angles.
pub fn angles(s: &str) -> Result<AngleList, String> {
    s.split(',')
        .map(angle)
        .collect::<Result<_, _>>()
        .map(AngleList)
}

/// `min:max` pairs separated by commas, each bound an angle.
pub fn joint_limits(s: &str) -> Result<LimitList, String> {
    s.split(',')
        .map(|pair| {
            let (lo, hi) = pair
                .split_once(':')
                .ok_or_else(|| format!("`{pair}` is not a min:max pair"))?;
            let (lo, hi) = (angle(lo)?, angle(hi)?);
            if lo >= hi {
                return Err(format!("joint limit `{pair}` needs min < max"));
            }
            Ok(JointLimit::new(lo, hi))
        })
        .collect::<Result<_, _>>()
        .map(LimitList)
}

/// Six numbers `xmin,ymin,zmin,xmax,ymax,zmax` in meters.
pub fn workspace(s: &str) -> Result<[f64; 6], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{t}` is not a number"))
        })
        .collect::<Result<_, _>>()?;
    v.try_into()
        .map_err(|v: Vec<f64>| format!("workspace box needs 6 numbers, got {}", v.len()))
}

/// `name=path` for the compare command.
pub fn named_path(s: &str) -> Result<(String, String), String> {
    let (name, path) = s
        .split_once('=')
        .ok_or_else(|| format!("`{s}` is not name=path"))?;
    if name.is_empty() || path.is_empty() {
        return Err(format!("`{s}` is not name=path"));
    }
    Ok((name.to_string(), path.to_string()))
}
