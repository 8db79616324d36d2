//! Parsing of angle expressions, chart points, grids and matrices.

use std::f64::consts::PI;

/// Parses a decimal or a multiple of pi: `1.2`, `pi`, `-pi/2`, `3pi/4`, `2*pi`, `pi/2.5`.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let lower = s.to_ascii_lowercase();
    let Some(pos) = lower.find("pi") else {
        return parse_decimal(&s);
    };
    let (head, tail) = (&lower[..pos], &lower[pos + 2..]);
    let coef = match head.trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => parse_decimal(c)?,
    };
    let div = match tail {
        "" => 1.0,
        t => match t.strip_prefix('/') {
            Some(d) => parse_decimal(d)?,
            None => return Err(format!("cannot parse angle '{text}'")),
        },
    };
    if div == 0.0 {
        return Err(format!("division by zero in '{text}'"));
    }
    Ok(coef * PI / div)
}

fn parse_decimal(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("cannot parse number '{s}'"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("non-finite number '{s}'"))
    }
}

/// Comma-separated list of angle expressions.
pub fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',').map(parse_angle).collect()
}

/// `tau,theta,rho`.
pub fn parse_point(text: &str) -> Result<[f64; 3], String> {
    let v = parse_list(text)?;
    <[f64; 3]>::try_from(v.as_slice()).map_err(|_| format!("expected tau,theta,rho, got '{text}'"))
}

/// `n_tau,n_theta,n_rho`.
pub fn parse_grid(text: &str) -> Result<[usize; 3], String> {
    let v: Vec<usize> = text
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad grid size '{t}'")))
        .collect::<Result<_, _>>()?;
    let g = <[usize; 3]>::try_from(v.as_slice()).map_err(|_| format!("expected n_tau,n_theta,n_rho, got '{text}'"))?;
    if g.contains(&0) {
        return Err("grid sizes must be positive".into());
    }
    Ok(g)
}

/// Row-major real square matrix, or the keyword `identity`.
pub enum MatrixArg {
    Identity,
    Entries(Vec<f64>),
}

pub fn parse_matrix(text: &str) -> Result<MatrixArg, String> {
    match text.trim() {
        "identity" | "id" | "e" => Ok(MatrixArg::Identity),
        t => {
            let v = parse_list(t)?;
            let n = (v.len() as f64).sqrt().round() as usize;
            if n * n != v.len() || n < 2 {
                return Err(format!("expected n*n comma-separated entries, got {}", v.len()));
            }
            Ok(MatrixArg::Entries(v))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_angle("-pi/4").unwrap(), -PI / 4.0);
        assert_eq!(parse_angle("3pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_angle("2*pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_angle(" PI ").unwrap(), PI);
        assert_eq!(parse_angle("0.25").unwrap(), 0.25);
        assert_eq!(parse_angle("1.5707963267948966").unwrap(), PI / 2.0);
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("pie").is_err());
        assert!(parse_angle("nan").is_err());
    }

    #[test]
    fn points_and_grids() {
        assert_eq!(parse_point("pi/2,0,1").unwrap(), [PI / 2.0, 0.0, 1.0]);
        assert!(parse_point("1,2").is_err());
        assert_eq!(parse_grid("20,20,5").unwrap(), [20, 20, 5]);
        assert!(parse_grid("20,0,5").is_err());
        assert!(matches!(parse_matrix("identity").unwrap(), MatrixArg::Identity));
        assert!(matches!(parse_matrix("0,1,-1,0").unwrap(), MatrixArg::Entries(v) if v.len() == 4));
        assert!(parse_matrix("1,2,3").is_err());
    }
}
