//! The `--dist` mini-language: `homog`, `uniform:a,b`, `lognormal:m,s`,
//! `pareto:alpha`.

use std::fmt;
use std::str::FromStr;

use conductance_spectrum::{Environment, ResistanceLaw};
use serde::{Deserialize, Serialize};

/// Source of an environment: the unit-conductance chain or IID resistances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DistSpec {
    Homogeneous,
    Iid(ResistanceLaw),
}

impl DistSpec {
    /// `seed` is ignored for the homogeneous chain.
    pub fn environment(&self, n: usize, seed: u64) -> conductance_spectrum::Result<Environment> {
        match *self {
            DistSpec::Homogeneous => Environment::homogeneous(n),
            DistSpec::Iid(law) => Environment::iid(n, law, seed),
        }
    }

    pub fn depends_on_seed(&self) -> bool {
        matches!(self, DistSpec::Iid(_))
    }
}

impl fmt::Display for DistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistSpec::Homogeneous => f.write_str("homog"),
            DistSpec::Iid(ResistanceLaw::Uniform { low, high }) => write!(f, "uniform:{low:?},{high:?}"),
            DistSpec::Iid(ResistanceLaw::LogNormal { mu, sigma }) => write!(f, "lognormal:{mu:?},{sigma:?}"),
            DistSpec::Iid(ResistanceLaw::Pareto { alpha }) => write!(f, "pareto:{alpha:?}"),
        }
    }
}

fn parse_params(name: &str, body: &str, count: usize) -> Result<Vec<f64>, String> {
    let values = body
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("{name}: cannot parse `{p}` as a number"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != count {
        return Err(format!("{name} takes {count} parameter(s), got {}", values.len()));
    }
    Ok(values)
}

impl FromStr for DistSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (name, body) = s.split_once(':').unwrap_or((s, ""));
        let law = match name {
            "homog" | "homogeneous" if body.is_empty() => return Ok(DistSpec::Homogeneous),
            "uniform" => {
                let p = parse_params(name, body, 2)?;
                ResistanceLaw::Uniform { low: p[0], high: p[1] }
            }
            "lognormal" => {
                let p = parse_params(name, body, 2)?;
                ResistanceLaw::LogNormal { mu: p[0], sigma: p[1] }
            }
            "pareto" => ResistanceLaw::Pareto {
                alpha: parse_params(name, body, 1)?[0],
            },
            _ => {
                return Err(format!(
                    "unknown distribution `{s}` (expected homog, uniform:a,b, lognormal:m,s or pareto:alpha)"
                ))
            }
        };
        law.validate().map_err(|e| e.to_string())?;
        Ok(DistSpec::Iid(law))
    }
}

impl TryFrom<String> for DistSpec {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<DistSpec> for String {
    fn from(d: DistSpec) -> String {
        d.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_family() {
        assert_eq!("homog".parse::<DistSpec>().unwrap(), DistSpec::Homogeneous);
        assert_eq!(
            "uniform:0.5,1.5".parse::<DistSpec>().unwrap(),
            DistSpec::Iid(ResistanceLaw::Uniform { low: 0.5, high: 1.5 })
        );
        assert_eq!(
            "lognormal:0,0.7".parse::<DistSpec>().unwrap(),
            DistSpec::Iid(ResistanceLaw::LogNormal { mu: 0.0, sigma: 0.7 })
        );
        assert_eq!(
            "pareto:0.5".parse::<DistSpec>().unwrap(),
            DistSpec::Iid(ResistanceLaw::Pareto { alpha: 0.5 })
        );
    }

    #[test]
    fn rejects_malformed_specs() {
        for bad in ["", "uniform", "uniform:1", "uniform:2,1", "pareto:1.5", "gamma:1,2", "homog:1", "lognormal:0,x"] {
            assert!(bad.parse::<DistSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        for s in ["homog", "uniform:0.5,1.5", "lognormal:-0.25,0.8", "pareto:0.5"] {
            let d: DistSpec = s.parse().unwrap();
            assert_eq!(d.to_string().parse::<DistSpec>().unwrap(), d);
        }
    }
}
