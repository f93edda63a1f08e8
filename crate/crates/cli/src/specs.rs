//! Parsers for the compact point, grid, box and point-set specs used on the command line.

use std::f64::consts::SQRT_2;

use cfslab::sandbox::{sample_ball, sample_slice, TestFunction};
use cfslab::SpacetimePoint;

use crate::config::GridConfig;
use crate::error::CliError;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Invalid(msg.into())
}

fn parse_f64(s: &str) -> Result<f64, CliError> {
    let v: f64 = s.trim().parse().map_err(|_| invalid(format!("not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(invalid(format!("not a finite number: {s:?}")));
    }
    Ok(v)
}

/// `t,x,y,z`.
pub fn parse_point(s: &str) -> Result<[f64; 4], CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(invalid(format!("a point needs four comma-separated coordinates, got {s:?}")));
    }
    let mut out = [0.0; 4];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = parse_f64(p)?;
    }
    Ok(out)
}

/// `hi,lo,count`.
pub fn parse_grid(s: &str) -> Result<GridConfig, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(invalid(format!("a grid is hi,lo,count, got {s:?}")));
    }
    let count = parts[2].trim().parse().map_err(|_| invalid(format!("bad grid count {:?}", parts[2])))?;
    Ok(GridConfig { hi: parse_f64(parts[0])?, lo: parse_f64(parts[1])?, count })
}

/// Comma-separated positive integers.
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',').map(|p| p.trim().parse().map_err(|_| invalid(format!("not a positive integer: {p:?}")))).collect()
}

/// Named test functions of the `scan` and `algebra` commands.
pub const PRESETS: [&str; 5] = ["on-cone-default", "off-cone-default", "lemma-default", "theorem-default", "gaussian-default"];

/// Test function from a preset name, `bump:t,x,y,z:half` or `gaussian:t,x,y,z:sigma`.
pub fn parse_test_function(s: &str) -> Result<TestFunction, CliError> {
    let bump = |c: [f64; 4], h: f64| TestFunction::unit_bump(SpacetimePoint::from_array(c), h);
    match s {
        "on-cone-default" => return Ok(bump([1.0, 0.0, 0.0, 1.0], 0.3)),
        "off-cone-default" => return Ok(bump([2.0, 0.0, 0.0, 0.0], 0.3)),
        "lemma-default" => return Ok(bump([1.0, 1.0, 0.0, 0.0], 0.2)),
        "theorem-default" => return Ok(bump([SQRT_2, 1.0, 0.0, 1.0], 0.2)),
        "gaussian-default" => return Ok(TestFunction::gaussian(SpacetimePoint::new(0.1, 0.2, -0.1, 0.3), 0.4)),
        _ => {}
    }
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(invalid(format!("unknown test function {s:?}; use a preset ({}) or kind:t,x,y,z:width", PRESETS.join(", "))));
    }
    let center = parse_point(parts[1])?;
    let width = parse_f64(parts[2])?;
    if !(width > 0.0) {
        return Err(invalid(format!("test function width must be positive, got {width}")));
    }
    match parts[0] {
        "bump" => Ok(bump(center, width)),
        "gaussian" => Ok(TestFunction::gaussian(SpacetimePoint::from_array(center), width)),
        k => Err(invalid(format!("unknown test function kind {k:?}; use bump or gaussian"))),
    }
}

/// Point set from `ball:COUNT` (Euclidean 4-ball) or `slice:COUNT` (spatial ball at the centre's time).
pub fn parse_point_set(s: &str, center: [f64; 4], radius: f64, seed: u64) -> Result<Vec<SpacetimePoint>, CliError> {
    let (kind, count) = s.split_once(':').ok_or_else(|| invalid(format!("a point set is ball:COUNT or slice:COUNT, got {s:?}")))?;
    let count: usize = count.trim().parse().map_err(|_| invalid(format!("bad point count {count:?}")))?;
    if count == 0 {
        return Err(invalid("a point set needs at least one point"));
    }
    match kind {
        "ball" => Ok(sample_ball(SpacetimePoint::from_array(center), radius, count, seed)),
        "slice" => Ok(sample_slice(center[0], [center[1], center[2], center[3]], radius, count, seed)),
        k => Err(invalid(format!("unknown point set kind {k:?}; use ball or slice"))),
    }
}
