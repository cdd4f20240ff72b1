//! Quantities with unit suffixes and sampling ranges.
//!
//! Lengths accept `m`, `mm`, `um`, `µm` and `nm`; temperatures `K`;
//! energies `eV` (converted to angular frequency through `ħ`). A bare `0`
//! needs no unit. A range is
//! `lo:hi[unit][:spacingN]` with spacing `log` (default) or `lin` and a
//! default of 20 points; a unit on `hi` applies to `lo` as well.

use crate::error::{CliError, CliResult};

const ELECTRON_VOLT: f64 = 1.602_176_634e-19;
const HBAR: f64 = 1.054_571_817e-34;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Temperature,
    Energy,
    Number,
}

const DEFAULT_POINTS: usize = 20;

fn split_number(s: &str) -> (&str, &str) {
    let end = s
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit() || c == '.' || c == '+' || c == '-' || ((c == 'e' || c == 'E') && i > 0 && is_exponent(s, i)))
        })
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    (&s[..end], s[end..].trim())
}

// `e` followed by a digit or sign is an exponent, otherwise a unit (`eV`)
fn is_exponent(s: &str, i: usize) -> bool {
    matches!(s[i + 1..].chars().next(), Some(c) if c.is_ascii_digit() || c == '-' || c == '+')
}

fn scale(unit: &str, dim: Dimension) -> Option<f64> {
    match (dim, unit) {
        (Dimension::Length, "m") => Some(1.0),
        (Dimension::Length, "mm") => Some(1e-3),
        (Dimension::Length, "um" | "µm") => Some(1e-6),
        (Dimension::Length, "nm") => Some(1e-9),
        (Dimension::Temperature, "K") => Some(1.0),
        (Dimension::Energy, "eV") => Some(ELECTRON_VOLT / HBAR),
        (Dimension::Number, "") => Some(1.0),
        _ => None,
    }
}

fn unit_name(dim: Dimension) -> &'static str {
    match dim {
        Dimension::Length => "a length unit (m, mm, um, nm)",
        Dimension::Temperature => "K",
        Dimension::Energy => "eV",
        Dimension::Number => "no unit",
    }
}

fn parse_with(s: &str, dim: Dimension, fallback: Option<&str>, what: &str) -> CliResult<(f64, String)> {
    let (num, unit) = split_number(s.trim());
    let unit = if unit.is_empty() { fallback.unwrap_or("") } else { unit };
    let value: f64 = num
        .parse()
        .map_err(|_| CliError::Config(format!("{what}: cannot read a number from '{s}'")))?;
    if value == 0.0 && unit.is_empty() {
        return Ok((0.0, String::new()));
    }
    let factor = scale(unit, dim).ok_or_else(|| {
        CliError::Config(format!("{what}: '{s}' needs {}", unit_name(dim)))
    })?;
    if !value.is_finite() {
        return Err(CliError::Config(format!("{what}: '{s}' is not finite")));
    }
    Ok((value * factor, unit.to_string()))
}

/// Parse one value in SI units.
pub fn parse_quantity(s: &str, dim: Dimension, what: &str) -> CliResult<f64> {
    Ok(parse_with(s, dim, None, what)?.0)
}

/// Parse a single value or a range into sample points (SI units).
pub fn parse_range(s: &str, dim: Dimension, what: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => Ok(vec![parse_quantity(parts[0], dim, what)?]),
        2 | 3 => {
            let (hi, unit) = parse_with(parts[1], dim, None, what)?;
            let (lo, _) = parse_with(parts[0], dim, Some(&unit), what)?;
            let (log, n) = match parts.get(2) {
                None => (true, DEFAULT_POINTS),
                Some(spec) => parse_spacing(spec, what)?,
            };
            if lo >= hi {
                return Err(CliError::Config(format!("{what}: range '{s}' is empty")));
            }
            if log && lo <= 0.0 {
                return Err(CliError::Config(format!("{what}: logarithmic range '{s}' needs positive ends")));
            }
            if n < 2 {
                return Err(CliError::Config(format!("{what}: range '{s}' needs at least 2 points")));
            }
            Ok((0..n)
                .map(|i| {
                    let t = i as f64 / (n - 1) as f64;
                    if log {
                        lo * (hi / lo).powf(t)
                    } else {
                        lo + (hi - lo) * t
                    }
                })
                .collect())
        }
        _ => Err(CliError::Config(format!("{what}: cannot read range '{s}'"))),
    }
}

fn parse_spacing(spec: &str, what: &str) -> CliResult<(bool, usize)> {
    let (log, rest) = if let Some(r) = spec.strip_prefix("log") {
        (true, r)
    } else if let Some(r) = spec.strip_prefix("lin") {
        (false, r)
    } else {
        (true, spec)
    };
    let n = rest
        .parse()
        .map_err(|_| CliError::Config(format!("{what}: cannot read point count in '{spec}'")))?;
    Ok((log, n))
}

/// Parse `lo:hi` without units.
pub fn parse_window(s: &str) -> CliResult<(f64, f64)> {
    match parse_range(s, Dimension::Number, "window")?.as_slice() {
        [lo, .., hi] => Ok((*lo, *hi)),
        _ => Err(CliError::Config(format!("window: expected 'lo:hi', got '{s}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths() {
        assert_eq!(parse_quantity("0.2um", Dimension::Length, "R").unwrap(), 0.2e-6);
        assert_eq!(parse_quantity("136nm", Dimension::Length, "R").unwrap(), 136e-9);
        assert_eq!(parse_quantity("1.5e-6m", Dimension::Length, "R").unwrap(), 1.5e-6);
        assert!(parse_quantity("3", Dimension::Length, "R").is_err());
        assert!(parse_quantity("3 furlong", Dimension::Length, "R").is_err());
    }

    #[test]
    fn energies_and_temperatures() {
        let w = parse_quantity("9eV", Dimension::Energy, "omegaP").unwrap();
        assert!((w / 1.3673e16 - 1.0).abs() < 1e-3);
        assert_eq!(parse_quantity("300K", Dimension::Temperature, "T").unwrap(), 300.0);
        assert_eq!(parse_quantity("0", Dimension::Temperature, "T").unwrap(), 0.0);
        assert!(parse_quantity("300", Dimension::Temperature, "T").unwrap_err().to_string().contains("K"));
    }

    #[test]
    fn ranges() {
        let r = parse_range("0.1:30um", Dimension::Length, "L").unwrap();
        assert_eq!(r.len(), 20);
        assert!((r[0] - 0.1e-6).abs() < 1e-18 && (r[19] - 30e-6).abs() < 1e-15);
        let a = parse_range("0.05:0.4:log20", Dimension::Number, "aspect").unwrap();
        assert_eq!(a.len(), 20);
        assert!((a[19] / a[18] - a[1] / a[0]).abs() < 1e-12);
        let l = parse_range("1:2:lin3", Dimension::Number, "x").unwrap();
        assert_eq!(l, vec![1.0, 1.5, 2.0]);
        assert!(parse_range("2:1", Dimension::Number, "x").is_err());
        assert!(parse_range("0:1:log5", Dimension::Number, "x").is_err());
        assert_eq!(parse_window("0.1:0.33").unwrap(), (0.1, 0.33));
    }
}
