//! `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Experiment {
    Count,
    Thin,
    BiasVerify,
    Walk,
    Mix,
    Close,
    Lattice,
    Veech,
    Recurrence,
    Assemble,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::Count,
        Experiment::Thin,
        Experiment::BiasVerify,
        Experiment::Walk,
        Experiment::Mix,
        Experiment::Close,
        Experiment::Lattice,
        Experiment::Veech,
        Experiment::Recurrence,
        Experiment::Assemble,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Count => "count",
            Experiment::Thin => "thin",
            Experiment::BiasVerify => "bias-verify",
            Experiment::Walk => "walk",
            Experiment::Mix => "mix",
            Experiment::Close => "close",
            Experiment::Lattice => "lattice",
            Experiment::Veech => "veech",
            Experiment::Recurrence => "recurrence",
            Experiment::Assemble => "assemble",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }

    pub fn params(self) -> &'static [ParamSpec] {
        use Kind::*;
        const BOX: [ParamSpec; 5] = [
            ParamSpec::new("box_x", Real, "0.1", "box center, real part"),
            ParamSpec::new("box_y", Positive, "1.5", "box center, imaginary part"),
            ParamSpec::new("box_theta", Real, "0", "center of the direction interval"),
            ParamSpec::new(
                "box_width",
                Positive,
                "1.57079633",
                "width of the direction interval",
            ),
            ParamSpec::new("box_mu", Unit, "0.02", "normalized measure of the box"),
        ];
        match self {
            Experiment::Count => {
                const P: [ParamSpec; 3] = [
                    ParamSpec::new("r_grid", Grid, "3,4,5,6", "lengths R"),
                    ParamSpec::new(
                        "primitive_only",
                        Flag,
                        "false",
                        "count primitive classes only",
                    ),
                    ParamSpec::new(
                        "cap",
                        Count { min: 1 },
                        "2000000",
                        "cap on enumerated classes",
                    ),
                ];
                &P
            }
            Experiment::Thin => {
                const P: [ParamSpec; 3] = [
                    ParamSpec::new(
                        "deltas",
                        Grid,
                        "0.05,0.1,0.2",
                        "thin thresholds on the systole",
                    ),
                    ParamSpec::new("r_grid", Grid, "3,4,5,6", "lengths R"),
                    ParamSpec::new("axis_step", Positive, "0.02", "sampling step along axes"),
                ];
                &P
            }
            Experiment::BiasVerify => {
                const P: [ParamSpec; 8] = [
                    ParamSpec::new("j_list", Grid, "1,2,3", "product dimensions"),
                    ParamSpec::new("s", Unit, "0.5", "bias exponent"),
                    ParamSpec::new("tau_grid", Grid, "3,3.5,4,4.5,5,5.5,6,6.5,7", "ball radii"),
                    ParamSpec::new(
                        "samples",
                        Count { min: 1000 },
                        "100000",
                        "samples per radius",
                    ),
                    ParamSpec::new(
                        "system_points",
                        Count { min: 0 },
                        "100",
                        "thin points for the system check",
                    ),
                    ParamSpec::new(
                        "thick_points",
                        Count { min: 0 },
                        "20",
                        "thick points for the system check",
                    ),
                    ParamSpec::new("system_tau", Positive, "3", "radius for the system check"),
                    ParamSpec::new(
                        "system_samples",
                        Count { min: 1000 },
                        "20000",
                        "samples per system point",
                    ),
                ];
                &P
            }
            Experiment::Walk => {
                const P: [ParamSpec; 10] = [
                    ParamSpec::new("c1", Positive, "1", "net separation"),
                    ParamSpec::new("c2", Positive, "2", "net covering radius"),
                    ParamSpec::new("tau", Positive, "2", "step bound"),
                    ParamSpec::new("n_steps", Count { min: 1 }, "4", "trajectory length"),
                    ParamSpec::new("delta", Unit, "0.05", "thin filter threshold"),
                    ParamSpec::new(
                        "base_height",
                        Positive,
                        "40",
                        "base point X = i * base_height",
                    ),
                    ParamSpec::new("net_radius", Positive, "8", "radius of the net around X"),
                    ParamSpec::new("growth_grid", Grid, "2,3,4,5,6", "radii for net growth"),
                    ParamSpec::new("s", Unit, "0.5", "bias exponent for the q audit"),
                    ParamSpec::new("cap", Count { min: 1 }, "10000000", "cap on expanded nodes"),
                ];
                &P
            }
            Experiment::Mix => {
                const P: [ParamSpec; 8] = [
                    BOX[0],
                    BOX[1],
                    BOX[2],
                    BOX[3],
                    BOX[4],
                    ParamSpec::new("r_grid", Grid, "0,6", "flow times"),
                    ParamSpec::new(
                        "samples",
                        Count { min: 10_000 },
                        "1000000",
                        "samples per time",
                    ),
                    ParamSpec::new("reverse", Flag, "true", "also estimate at -R"),
                ];
                &P
            }
            Experiment::Close => {
                const P: [ParamSpec; 9] = [
                    ParamSpec::new(
                        "box_shape",
                        Choice(&["flow", "ball"]),
                        "flow",
                        "flow box or ball times arc",
                    ),
                    ParamSpec::new("box_x", Real, "0", "box center, real part"),
                    ParamSpec::new("box_y", Positive, "1.4", "box center, imaginary part"),
                    ParamSpec::new(
                        "box_theta",
                        Real,
                        "3.14159265",
                        "direction at the box center",
                    ),
                    ParamSpec::new(
                        "box_width",
                        Positive,
                        "0.6",
                        "width of the direction interval (ball only)",
                    ),
                    ParamSpec::new("box_mu", Unit, "0.015", "normalized measure of the box"),
                    ParamSpec::new("r_grid", Grid, "3,4,5", "recurrence times"),
                    ParamSpec::new(
                        "samples",
                        Count { min: 10_000 },
                        "10000000",
                        "frames sampled per time",
                    ),
                    ParamSpec::new(
                        "delta_thick",
                        Unit,
                        "0.1",
                        "thick set is systole >= delta_thick",
                    ),
                ];
                &P
            }
            Experiment::Lattice => {
                const P: [ParamSpec; 5] = [
                    ParamSpec::new("systoles", Grid, "0.01,0.1,1", "systoles of Y = X"),
                    ParamSpec::new("tau_grid", Grid, "2,3,4,5,6", "ball radii"),
                    ParamSpec::new("c2", Positive, "0.5", "spread radius"),
                    ParamSpec::new(
                        "image_tau",
                        Grid,
                        "1,2,3,4,5,6",
                        "radii for the net-image audit",
                    ),
                    ParamSpec::new("image_spacing", Positive, "0.25", "quotient net spacing"),
                ];
                &P
            }
            Experiment::Veech => {
                const P: [ParamSpec; 2] = [
                    ParamSpec::new("r_max", Positive, "6", "longest class"),
                    ParamSpec::new("axis_step", Positive, "0.02", "sampling step along axes"),
                ];
                &P
            }
            Experiment::Recurrence => {
                const P: [ParamSpec; 6] = [
                    ParamSpec::new(
                        "delta_thick",
                        Unit,
                        "0.2",
                        "thick set is systole >= delta_thick",
                    ),
                    ParamSpec::new(
                        "theta",
                        Unit,
                        "0.5",
                        "fraction of time outside the thick set",
                    ),
                    ParamSpec::new("mc_r_grid", Grid, "2,4,6,8", "orbit lengths for sampling"),
                    ParamSpec::new(
                        "class_r_grid",
                        Grid,
                        "3,4,5,6",
                        "lengths for the class count",
                    ),
                    ParamSpec::new(
                        "samples",
                        Count { min: 1000 },
                        "200000",
                        "orbits per length",
                    ),
                    ParamSpec::new("axis_step", Positive, "0.02", "sampling step along axes"),
                ];
                &P
            }
            Experiment::Assemble => {
                const P: [ParamSpec; 2] = [
                    ParamSpec::new("r", Positive, "6", "total length"),
                    ParamSpec::new("epsilon", Unit, "0.1", "band width as a fraction of R"),
                ];
                &P
            }
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kind {
    Real,
    Positive,
    /// Open interval (0, 1).
    Unit,
    Count {
        min: u64,
    },
    /// Strictly increasing comma-separated list.
    Grid,
    Flag,
    /// One of a fixed set of words.
    Choice(&'static [&'static str]),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamSpec {
    pub key: &'static str,
    pub kind: Kind,
    pub default: &'static str,
    pub help: &'static str,
}

impl ParamSpec {
    pub const fn new(
        key: &'static str,
        kind: Kind,
        default: &'static str,
        help: &'static str,
    ) -> Self {
        ParamSpec {
            key,
            kind,
            default,
            help,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Real(f64),
    Count(u64),
    List(Vec<f64>),
    Flag(bool),
    Text(&'static str),
}

fn parse_value(key: &str, kind: Kind, raw: &str) -> Result<Value> {
    let raw = raw.trim();
    let real = |s: &str| -> Result<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::config(key, format!("`{s}` is not a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::config(key, "value must be finite"))
        }
    };
    match kind {
        Kind::Real => Ok(Value::Real(real(raw)?)),
        Kind::Positive => {
            let v = real(raw)?;
            if v > 0.0 {
                Ok(Value::Real(v))
            } else {
                Err(Error::config(key, format!("must be positive, got {v}")))
            }
        }
        Kind::Unit => {
            let v = real(raw)?;
            if v > 0.0 && v < 1.0 {
                Ok(Value::Real(v))
            } else {
                Err(Error::config(key, format!("must lie in (0, 1), got {v}")))
            }
        }
        Kind::Count { min } => {
            let v: u64 = raw
                .parse()
                .map_err(|_| Error::config(key, format!("`{raw}` is not a count")))?;
            if v >= min {
                Ok(Value::Count(v))
            } else {
                Err(Error::config(
                    key,
                    format!("must be at least {min}, got {v}"),
                ))
            }
        }
        Kind::Grid => {
            let vals: Vec<f64> = raw.split(',').map(real).collect::<Result<_>>()?;
            if vals.is_empty() {
                return Err(Error::config(key, "grid is empty"));
            }
            if vals.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::config(
                    key,
                    format!("grid `{raw}` is not strictly increasing"),
                ));
            }
            Ok(Value::List(vals))
        }
        Kind::Flag => match raw {
            "true" | "1" | "yes" => Ok(Value::Flag(true)),
            "false" | "0" | "no" => Ok(Value::Flag(false)),
            _ => Err(Error::config(key, format!("`{raw}` is not a boolean"))),
        },
        Kind::Choice(words) => words
            .iter()
            .find(|w| **w == raw)
            .map(|w| Value::Text(w))
            .ok_or_else(|| {
                Error::config(key, format!("`{raw}` is not one of {}", words.join(", ")))
            }),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub workers: Option<usize>,
    values: BTreeMap<&'static str, (String, Value)>,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let values = experiment
            .params()
            .iter()
            .map(|p| {
                let v = parse_value(p.key, p.kind, p.default).expect("valid default");
                (p.key, (p.default.to_string(), v))
            })
            .collect();
        ExperimentConfig {
            experiment,
            seed: 1,
            workers: None,
            values,
        }
    }

    /// Parse `key = value` lines. `#` starts a comment. An `experiment` key,
    /// if present, has to agree with `experiment` when that is given.
    pub fn parse(text: &str, experiment: Option<Experiment>) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut named = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::config(&format!("line {}", lineno + 1), "expected `key = value`")
            })?;
            let (k, v) = (k.trim(), v.trim());
            if k == "experiment" {
                named = Some(Experiment::from_name(v)?);
            } else {
                pairs.push((k.to_string(), v.to_string()));
            }
        }
        let experiment = match (experiment, named) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::config(
                    "experiment",
                    format!("file is for `{b}`, command is `{a}`"),
                ));
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(Error::config("experiment", "missing")),
        };
        let mut cfg = Self::defaults(experiment);
        for (k, v) in pairs {
            cfg.set(&k, &v)?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        match key {
            "seed" => {
                self.seed = raw
                    .trim()
                    .parse()
                    .map_err(|_| Error::config("seed", format!("`{raw}` is not a u64")))?;
            }
            "workers" => {
                let w: usize = raw
                    .trim()
                    .parse()
                    .map_err(|_| Error::config("workers", format!("`{raw}` is not a count")))?;
                if w == 0 {
                    return Err(Error::config("workers", "must be at least 1"));
                }
                self.workers = Some(w);
            }
            _ => {
                let spec = self
                    .experiment
                    .params()
                    .iter()
                    .find(|p| p.key == key)
                    .ok_or_else(|| {
                        Error::config(key, format!("unknown key for `{}`", self.experiment))
                    })?;
                let v = parse_value(spec.key, spec.kind, raw)?;
                self.values.insert(spec.key, (raw.trim().to_string(), v));
            }
        }
        Ok(())
    }

    fn value(&self, key: &str) -> &Value {
        &self
            .values
            .get(key)
            .unwrap_or_else(|| panic!("`{key}` is not a parameter of {}", self.experiment))
            .1
    }

    pub fn real(&self, key: &str) -> f64 {
        match self.value(key) {
            Value::Real(v) => *v,
            Value::Count(v) => *v as f64,
            other => panic!("`{key}` is not a number: {other:?}"),
        }
    }

    pub fn count(&self, key: &str) -> u64 {
        match self.value(key) {
            Value::Count(v) => *v,
            other => panic!("`{key}` is not a count: {other:?}"),
        }
    }

    pub fn list(&self, key: &str) -> &[f64] {
        match self.value(key) {
            Value::List(v) => v,
            other => panic!("`{key}` is not a grid: {other:?}"),
        }
    }

    pub fn flag(&self, key: &str) -> bool {
        match self.value(key) {
            Value::Flag(v) => *v,
            other => panic!("`{key}` is not a flag: {other:?}"),
        }
    }

    pub fn text(&self, key: &str) -> &'static str {
        match self.value(key) {
            Value::Text(v) => v,
            other => panic!("`{key}` is not a word: {other:?}"),
        }
    }

    /// Parameters in declaration order, as written.
    pub fn echo(&self) -> Vec<(String, String)> {
        self.experiment
            .params()
            .iter()
            .map(|p| (p.key.to_string(), self.values[p.key].0.clone()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let cfg = ExperimentConfig::parse(
            "# comment\nr_grid = 3, 4\nseed = 9\n",
            Some(Experiment::Count),
        )
        .unwrap();
        assert_eq!(cfg.list("r_grid"), &[3.0, 4.0]);
        assert_eq!(cfg.seed, 9);
        assert!(!cfg.flag("primitive_only"));
    }

    #[test]
    fn rejects_bad_input() {
        let e = ExperimentConfig::parse("r_grid = 5,4", Some(Experiment::Count)).unwrap_err();
        assert!(matches!(e, Error::Config { ref field, .. } if field == "r_grid"));
        assert!(ExperimentConfig::parse("bogus = 1", Some(Experiment::Count)).is_err());
        assert!(ExperimentConfig::parse("delta = 1.5", Some(Experiment::Walk)).is_err());
        assert!(ExperimentConfig::parse("samples = 10", Some(Experiment::Mix)).is_err());
        assert!(ExperimentConfig::parse("experiment = mix", Some(Experiment::Count)).is_err());
        assert!(matches!(
            Experiment::from_name("nope"),
            Err(Error::UnknownExperiment(_))
        ));
    }

    #[test]
    fn defaults_are_valid() {
        for e in Experiment::ALL {
            let cfg = ExperimentConfig::defaults(e);
            assert_eq!(cfg.echo().len(), e.params().len());
        }
    }
}
