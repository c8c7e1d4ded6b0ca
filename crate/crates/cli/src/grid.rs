//! Grid mini-language for `table`.
//!
//! A grid is a `;`-separated list of axes `name=values`. Values are a comma
//! list whose items are numbers (`1e6`, `250`) or geometric ranges `a:b:m`
//! (`a, a*m, a*m^2, ...` up to `b`).
//!
//! ```text
//! x=1e4:1e8:100;y=30,100,1000;h=-1,0,1
//! ```

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct GridError(pub String);

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bad grid spec: {}", self.0)
    }
}

impl std::error::Error for GridError {}

fn number(s: &str) -> Result<f64, GridError> {
    let v: f64 = s.trim().parse().map_err(|_| GridError(format!("'{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(GridError(format!("'{s}' is not finite")));
    }
    Ok(v)
}

/// Expands one comma list.
pub fn parse_values(spec: &str) -> Result<Vec<f64>, GridError> {
    let mut out = Vec::new();
    for item in spec.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(GridError("empty list item".into()));
        }
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(number(v)?),
            [a, b, m] => {
                let (a, b, m) = (number(a)?, number(b)?, number(m)?);
                if !(a > 0.0 && b >= a && m > 1.0) {
                    return Err(GridError(format!("range '{item}' needs 0 < a <= b and m > 1")));
                }
                let mut v = a;
                // slack so that 1e4:1e8:10 reaches 1e8 despite rounding
                while v <= b * (1.0 + 1e-9) {
                    out.push(v);
                    v *= m;
                }
            }
            _ => return Err(GridError(format!("'{item}' is neither a number nor a:b:m"))),
        }
    }
    Ok(out)
}

/// Parsed axes in their order of appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub axes: Vec<(String, Vec<f64>)>,
}

impl Grid {
    pub fn parse(spec: &str) -> Result<Self, GridError> {
        let mut axes: Vec<(String, Vec<f64>)> = Vec::new();
        for part in spec.split(';').filter(|p| !p.trim().is_empty()) {
            let (name, values) = part
                .split_once('=')
                .ok_or_else(|| GridError(format!("axis '{part}' lacks '='")))?;
            let name = name.trim().to_string();
            if axes.iter().any(|(n, _)| *n == name) {
                return Err(GridError(format!("axis '{name}' given twice")));
            }
            axes.push((name, parse_values(values)?));
        }
        if axes.is_empty() {
            return Err(GridError("no axes".into()));
        }
        Ok(Self { axes })
    }

    pub fn axis(&self, name: &str) -> Option<&[f64]> {
        self.axes.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    /// Checks that only `allowed` axes occur and every `required` one does.
    pub fn check(&self, allowed: &[&str], required: &[&str]) -> Result<(), GridError> {
        for (n, _) in &self.axes {
            if !allowed.contains(&n.as_str()) {
                return Err(GridError(format!("unknown axis '{n}' (expected one of {})", allowed.join(", "))));
            }
        }
        for r in required {
            if self.axis(r).is_none() {
                return Err(GridError(format!("missing axis '{r}'")));
            }
        }
        Ok(())
    }
}
