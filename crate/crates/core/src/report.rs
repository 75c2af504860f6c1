//! Structured-text experiment reports.
//!
//! Layout:
//! ```text
//! # teichlab report
//! experiment = count
//! seed = 1
//! rng = ...
//! [params]
//! key = value
//! [rows]
//! <csv header>
//! <csv rows>
//! [derived]
//! key = value
//! [table <name>]
//! <csv header>
//! <csv rows>
//! [checks]
//! name;value;requirement;pass
//! [status]
//! pass = true
//! # wall_time_s = 0.123
//! ```
//! Everything above the wall-time trailer is reproducible given the seed.

use std::fmt::Write as _;

use crate::par::RNG_NAME;

/// Format with 9 significant digits.
pub fn fmt9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{v:.8e}");
    // exponent after rounding, so carries like 9.999999999 -> 1e1 are handled
    let e: i32 = sci
        .split('e')
        .nth(1)
        .and_then(|x| x.parse().ok())
        .unwrap_or(0);
    if (-4..9).contains(&e) {
        let decimals = (8 - e) as usize;
        format!("{v:.decimals$}")
    } else {
        sci
    }
}

/// Extra CSV block, e.g. a class list or a component census.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: String,
    pub rows: Vec<String>,
}

/// One acceptance check with its stated requirement.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: String,
    pub requirement: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CountReport {
    pub experiment: String,
    pub seed: u64,
    pub params: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub derived: Vec<(String, String)>,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub pass: Option<bool>,
    pub notes: Vec<String>,
    pub wall_time_s: f64,
}

impl CountReport {
    pub fn new(experiment: &str, seed: u64) -> Self {
        CountReport {
            experiment: experiment.into(),
            seed,
            ..Default::default()
        }
    }

    pub fn param(&mut self, k: &str, v: impl ToString) -> &mut Self {
        self.params.push((k.into(), v.to_string()));
        self
    }

    pub fn param_f(&mut self, k: &str, v: f64) -> &mut Self {
        self.param(k, fmt9(v))
    }

    pub fn columns(&mut self, cols: &[&str]) -> &mut Self {
        self.header = cols.iter().map(|c| c.to_string()).collect();
        self
    }

    pub fn row(&mut self, cells: Vec<String>) -> &mut Self {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
        self
    }

    pub fn derive(&mut self, k: &str, v: impl ToString) -> &mut Self {
        self.derived.push((k.into(), v.to_string()));
        self
    }

    pub fn derive_f(&mut self, k: &str, v: f64) -> &mut Self {
        self.derive(k, fmt9(v))
    }

    pub fn note(&mut self, msg: impl Into<String>) -> &mut Self {
        self.notes.push(msg.into());
        self
    }

    /// Combine a criterion into the overall status.
    pub fn check(&mut self, ok: bool) -> &mut Self {
        self.pass = Some(self.pass.unwrap_or(true) && ok);
        self
    }

    /// Named check, listed in the report and folded into the status.
    pub fn criterion(
        &mut self,
        name: &str,
        value: impl ToString,
        requirement: &str,
        pass: bool,
    ) -> &mut Self {
        self.checks.push(Check {
            name: name.into(),
            value: value.to_string(),
            requirement: requirement.into(),
            pass,
        });
        self.check(pass)
    }

    pub fn get_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table(&mut self, name: &str, header: &str, rows: Vec<String>) -> &mut Self {
        self.tables.push(Table {
            name: name.into(),
            header: header.into(),
            rows,
        });
        self
    }

    pub fn passed(&self) -> bool {
        self.pass.unwrap_or(true)
    }

    pub fn get_derived(&self, k: &str) -> Option<&str> {
        self.derived
            .iter()
            .find(|(key, _)| key == k)
            .map(|(_, v)| v.as_str())
    }

    /// Reproducible part of the document.
    pub fn body(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# teichlab report");
        let _ = writeln!(s, "experiment = {}", self.experiment);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "rng = {RNG_NAME}");
        let _ = writeln!(s, "[params]");
        for (k, v) in &self.params {
            let _ = writeln!(s, "{k} = {v}");
        }
        let _ = writeln!(s, "[rows]");
        if !self.header.is_empty() {
            let _ = writeln!(s, "{}", self.header.join(";"));
        }
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(";"));
        }
        let _ = writeln!(s, "[derived]");
        for (k, v) in &self.derived {
            let _ = writeln!(s, "{k} = {v}");
        }
        for t in &self.tables {
            let _ = writeln!(s, "[table {}]", t.name);
            let _ = writeln!(s, "{}", t.header);
            for r in &t.rows {
                let _ = writeln!(s, "{r}");
            }
        }
        if !self.checks.is_empty() {
            let _ = writeln!(s, "[checks]");
            let _ = writeln!(s, "name;value;requirement;pass");
            for c in &self.checks {
                let _ = writeln!(s, "{};{};{};{}", c.name, c.value, c.requirement, c.pass);
            }
        }
        if !self.notes.is_empty() {
            let _ = writeln!(s, "[notes]");
            for n in &self.notes {
                let _ = writeln!(s, "{n}");
            }
        }
        let _ = writeln!(s, "[status]");
        let _ = writeln!(s, "pass = {}", self.passed());
        s
    }

    pub fn render(&self) -> String {
        format!(
            "{}# wall_time_s = {}\n",
            self.body(),
            fmt9(self.wall_time_s)
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt9(1.0), "1.00000000");
        assert_eq!(fmt9(0.5), "0.500000000");
        assert_eq!(fmt9(1234.5678), "1234.56780");
        assert_eq!(fmt9(-2.0f64.ln()), "-0.693147181");
        assert_eq!(fmt9(1.5e-7), "1.50000000e-7");
        assert_eq!(fmt9(9.999999999), "10.0000000");
        assert_eq!(fmt9(0.0), "0");
        assert_eq!(fmt9(3.0e12), "3.00000000e12");
    }

    #[test]
    fn body_excludes_wall_time() {
        let mut r = CountReport::new("count", 3);
        r.param("r_grid", "3,4")
            .columns(&["R", "N"])
            .row(vec!["3".into(), "74".into()]);
        r.wall_time_s = 1.0;
        let a = r.body();
        r.wall_time_s = 2.0;
        assert_eq!(a, r.body());
        assert!(r.render().contains("wall_time_s"));
        assert!(a.contains("rng = ChaCha8Rng"));
    }
}
