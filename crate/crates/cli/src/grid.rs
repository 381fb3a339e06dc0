//! `start:stop:count` grids, inclusive at both ends.

use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("expected start:stop:count, got '{s}'"));
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("'{t}' is not a number"))
        };
        let (start, stop) = (num(a)?, num(b)?);
        if !start.is_finite() || !stop.is_finite() {
            return Err("grid ends must be finite".into());
        }
        let count: usize = n
            .trim()
            .parse()
            .map_err(|_| format!("'{n}' is not a count"))?;
        if count == 0 {
            return Err("grid count must be at least 1".into());
        }
        if count == 1 && start != stop {
            return Err("a single-point grid needs start == stop".into());
        }
        Ok(Self { start, stop, count })
    }
}

/// Line in the complex k plane: `im:` puts the grid on the positive
/// imaginary axis, `re:` on the real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KGrid {
    Imag(Grid),
    Real(Grid),
}

impl KGrid {
    pub fn points(&self) -> Vec<num_complex::Complex64> {
        match self {
            KGrid::Imag(g) => g
                .values()
                .into_iter()
                .map(|t| num_complex::Complex64::new(0.0, t))
                .collect(),
            KGrid::Real(g) => g
                .values()
                .into_iter()
                .map(|x| num_complex::Complex64::new(x, 0.0))
                .collect(),
        }
    }
}

impl FromStr for KGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            Some(("im", rest)) => Ok(KGrid::Imag(rest.parse()?)),
            Some(("re", rest)) => Ok(KGrid::Real(rest.parse()?)),
            _ => Err(format!(
                "expected im:start:stop:count or re:start:stop:count, got '{s}'"
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_expand() {
        let g: Grid = "-20:-0.5:40".parse().unwrap();
        let v = g.values();
        assert_eq!(v.len(), 40);
        assert_eq!((v[0], v[39]), (-20.0, -0.5));
        assert_eq!("2:2:1".parse::<Grid>().unwrap().values(), vec![2.0]);
        for bad in ["1:2", "1:2:0", "a:2:3", "1:2:x", "1:2:3:4", "1:2:1"] {
            assert!(bad.parse::<Grid>().is_err(), "{bad}");
        }
        let k: KGrid = "im:0.1:5:10".parse().unwrap();
        assert_eq!(k.points().len(), 10);
        assert!("0.1:5:10".parse::<KGrid>().is_err());
    }
}
