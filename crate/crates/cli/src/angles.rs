//! Angle arguments: degrees by default, `rad` or `deg` suffix to be explicit.
//! Lists are comma-separated; ranges are `start:stop:count` with an optional
//! unit suffix applying to the whole range.

use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Unit {
    Degrees,
    Radians,
}

fn split_unit(s: &str) -> (&str, Unit) {
    let s = s.trim();
    if let Some(v) = s.strip_suffix("rad") {
        (v.trim(), Unit::Radians)
    } else if let Some(v) = s.strip_suffix("deg") {
        (v.trim(), Unit::Degrees)
    } else {
        (s, Unit::Degrees)
    }
}

fn to_radians(value: f64, unit: Unit) -> f64 {
    match unit {
        Unit::Degrees => value * (PI / 180.0),
        Unit::Radians => value,
    }
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !v.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(v)
}

/// One angle, in radians.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let (body, unit) = split_unit(s);
    if body.is_empty() {
        return Err(format!("empty angle in '{s}'"));
    }
    Ok(to_radians(number(body)?, unit))
}

/// Comma-separated angles; an empty string yields an empty list.
pub fn parse_angle_list(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_angle).collect()
}

/// `start:stop:count[unit]` (inclusive, evenly spaced) or a comma-separated list.
pub fn parse_angle_spec(s: &str) -> Result<Vec<f64>, String> {
    if !s.contains(':') {
        return parse_angle_list(s);
    }
    let (body, unit) = split_unit(s);
    let parts: Vec<&str> = body.split(':').collect();
    let [start, stop, count] = parts[..] else {
        return Err(format!("range '{s}' must look like start:stop:count"));
    };
    let (start, stop) = (number(start)?, number(stop)?);
    let count: usize = count
        .trim()
        .parse()
        .map_err(|_| format!("range count '{count}' is not a positive integer"))?;
    if count == 0 {
        return Err("range count must be at least 1".into());
    }
    if count == 1 {
        return Ok(vec![to_radians(start, unit)]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count)
        .map(|k| {
            let v = if k == count - 1 { stop } else { start + step * k as f64 };
            to_radians(v, unit)
        })
        .collect())
}
