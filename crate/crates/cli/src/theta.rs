use std::f64::consts::PI;

use anyhow::{anyhow, bail, Result};

/// Parses one angle: a plain number of radians, or a multiple of pi such as
/// `pi`, `pi/3`, `2pi/3`, `2*pi/3`.
pub fn parse_angle(token: &str) -> Result<f64> {
    let t: String = token.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    if let Ok(x) = t.parse::<f64>() {
        return Ok(x);
    }
    let Some(pos) = t.find("pi") else {
        bail!("cannot parse angle {token:?}");
    };
    let (coef, rest) = t.split_at(pos);
    let coef = coef.trim_end_matches('*');
    let num = if coef.is_empty() {
        1.0
    } else {
        coef.parse::<f64>().map_err(|_| anyhow!("bad coefficient in angle {token:?}"))?
    };
    let den = match rest[2..].strip_prefix('/') {
        None if rest.len() == 2 => 1.0,
        Some(d) => d.parse::<f64>().map_err(|_| anyhow!("bad divisor in angle {token:?}"))?,
        None => bail!("cannot parse angle {token:?}"),
    };
    Ok(num * PI / den)
}

/// Comma-separated angle list.
pub fn parse_grid(list: &str) -> Result<Vec<f64>> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(parse_angle).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0").unwrap(), 0.0);
        assert_eq!(parse_angle("1.5").unwrap(), 1.5);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("pi/3").unwrap(), PI / 3.0);
        assert_eq!(parse_angle("2pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle("2*pi/3").unwrap(), 2.0 * PI / 3.0);
        assert!(parse_angle("tau").is_err());
        assert!(parse_angle("pi/x").is_err());
        assert!(parse_angle("pix").is_err());
    }

    #[test]
    fn grid() {
        assert_eq!(parse_grid("0, pi/2,pi").unwrap(), vec![0.0, PI / 2.0, PI]);
        assert!(parse_grid("0,bad").is_err());
    }
}
