//! Flat `key = value` run configs.
//!
//! ```text
//! family = coframe            # or `perturbation`; inferred when absent
//! m = 25
//! eps = 0.2, 0.1, 0.01
//! modes = -2..2
//! out = md                    # or csv
//! fit.eps = 0.01, 0.02, 0.04, 0.06, 0.08, 0.1
//! fit.order = 4
//! coframe.E1.22 = (1, 1/2, 0) (-1, 1/2, 0)
//! perturbation.h.12 = (1, 1/2, 0) (-1, 1/2, 0)
//! ```
//!
//! Matrix keys are 1-based `rc`. Entries of `h` and `k` are mirrored, so only
//! one triangle needs to be given. Trig polynomials are parsed exactly.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_rational::Rational64;
use torus_dirac::perturbation::default_fit_grid;
use torus_dirac::{CoframeFamilyQ, Matrix3FieldQ, TrigPolyQ};

use crate::CliError;

pub const DEFAULT_M: usize = 25;

/// Bundled configs, by name.
pub const EXAMPLES: [(&str, &str); 4] = [
    ("example-galerkin-1", include_str!("../examples-config/example-galerkin-1.conf")),
    ("example-galerkin-2", include_str!("../examples-config/example-galerkin-2.conf")),
    ("example-explicit-1", include_str!("../examples-config/example-explicit-1.conf")),
    ("example-explicit-2", include_str!("../examples-config/example-explicit-2.conf")),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    #[default]
    Md,
}

impl FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim() {
            "csv" => Ok(OutputFormat::Csv),
            "md" => Ok(OutputFormat::Md),
            other => Err(CliError::Config(format!("unknown output format `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FamilySpec {
    Coframe { e1: Matrix3FieldQ, e2: Matrix3FieldQ },
    Perturbation { h: Matrix3FieldQ, k: Matrix3FieldQ },
}

impl FamilySpec {
    pub fn family(&self) -> Result<CoframeFamilyQ, CliError> {
        let f = match self {
            FamilySpec::Coframe { e1, e2 } => CoframeFamilyQ::new(e1.clone(), e2.clone()),
            FamilySpec::Perturbation { h, k } => CoframeFamilyQ::from_perturbation(h, k),
        };
        f.map_err(|e| CliError::Config(e.to_string()))
    }

    /// `(h, k)`, exact.
    pub fn hk(&self) -> Result<(Matrix3FieldQ, Matrix3FieldQ), CliError> {
        match self {
            FamilySpec::Perturbation { h, k } => Ok((h.clone(), k.clone())),
            FamilySpec::Coframe { .. } => {
                let f = self.family()?;
                Ok((f.extract_h(), f.extract_k()))
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FamilySpec::Coframe { .. } => "coframe",
            FamilySpec::Perturbation { .. } => "perturbation",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub family: FamilySpec,
    pub m: usize,
    pub eps: Vec<f64>,
    pub modes: Vec<i64>,
    pub out: OutputFormat,
    pub fit_eps: Vec<f64>,
    pub fit_order: usize,
}

impl RunConfig {
    /// Reads a config file, or a bundled example when `source` names one and
    /// no such file exists.
    pub fn load(source: &str) -> Result<Self, CliError> {
        let path = Path::new(source);
        if !path.exists() {
            if let Some((_, text)) = EXAMPLES.iter().find(|(name, _)| *name == source) {
                return text.parse();
            }
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{source}: {e}")))?;
        text.parse()
    }

    pub fn example(name: &str) -> Result<Self, CliError> {
        let (_, text) = EXAMPLES
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| CliError::Config(format!("no bundled example `{name}`")))?;
        text.parse()
    }
}

impl FromStr for RunConfig {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim().to_string();
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }

        let mut m = DEFAULT_M;
        let mut eps = Vec::new();
        let mut modes: Vec<i64> = (-2..=2).collect();
        let mut out = OutputFormat::Md;
        let mut fit_eps = default_fit_grid::<f64>();
        let mut fit_order = 4;
        let mut declared = None;
        let mut mats: BTreeMap<(&'static str, &'static str), Matrix3FieldQ> = BTreeMap::new();
        let mut seen: BTreeMap<(&'static str, &'static str, usize, usize), String> = BTreeMap::new();

        for (key, value) in &entries {
            match key.as_str() {
                "family" => match value.as_str() {
                    "coframe" | "perturbation" => declared = Some(value.clone()),
                    other => return Err(CliError::Config(format!("unknown family `{other}`"))),
                },
                "m" => m = parse_usize(key, value)?,
                "eps" => eps = parse_reals(value)?,
                "modes" => modes = parse_modes(value)?,
                "out" => out = value.parse()?,
                "fit.eps" => fit_eps = parse_reals(value)?,
                "fit.order" => fit_order = parse_usize(key, value)?,
                _ => {
                    let (group, name, r, c) = matrix_key(key)?;
                    let poly: TrigPolyQ = value.parse().map_err(|e| CliError::Config(format!("{key}: {e}")))?;
                    let mirror = group == "perturbation";
                    if mirror && r != c {
                        if let Some(other) = seen.get(&(group, name, c, r)) {
                            let other: TrigPolyQ = other.parse().expect("parsed before");
                            if other != poly {
                                return Err(CliError::Config(format!(
                                    "{key} conflicts with its mirrored entry {group}.{name}.{}{}",
                                    c + 1,
                                    r + 1
                                )));
                            }
                        }
                    }
                    seen.insert((group, name, r, c), value.clone());
                    let mat = mats.entry((group, name)).or_insert_with(Matrix3FieldQ::zero);
                    mat.set(r, c, poly.clone());
                    if mirror {
                        mat.set(c, r, poly);
                    }
                }
            }
        }

        let groups: Vec<&str> = {
            let mut g: Vec<&str> = mats.keys().map(|(g, _)| *g).collect();
            g.dedup();
            g
        };
        if groups.len() > 1 {
            return Err(CliError::Config("config mixes coframe.* and perturbation.* entries".into()));
        }
        let kind = match (declared.as_deref(), groups.first()) {
            (Some(d), Some(g)) if d != *g => {
                return Err(CliError::Config(format!("family = {d} but entries are {g}.*")));
            }
            (Some(d), _) => d.to_string(),
            (None, Some(g)) => g.to_string(),
            (None, None) => return Err(CliError::Config("no family entries".into())),
        };
        let mut take = |g: &'static str, n: &'static str| mats.remove(&(g, n)).unwrap_or_else(Matrix3FieldQ::zero);
        let family = if kind == "coframe" {
            FamilySpec::Coframe { e1: take("coframe", "E1"), e2: take("coframe", "E2") }
        } else {
            FamilySpec::Perturbation { h: take("perturbation", "h"), k: take("perturbation", "k") }
        };
        family.family()?;

        if m == 0 {
            return Err(CliError::Config("m must be positive".into()));
        }
        if let Some(bad) = modes.iter().find(|n| n.unsigned_abs() as usize > m) {
            return Err(CliError::Config(format!("mode {bad} exceeds m = {m}")));
        }
        Ok(RunConfig { family, m, eps, modes, out, fit_eps, fit_order })
    }
}

impl fmt::Display for RunConfig {
    /// Canonical form; parses back to an equal config.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "family = {}", self.family.kind())?;
        writeln!(f, "m = {}", self.m)?;
        writeln!(f, "eps = {}", join(&self.eps))?;
        writeln!(f, "modes = {}", join(&self.modes))?;
        writeln!(f, "out = {}", if self.out == OutputFormat::Csv { "csv" } else { "md" })?;
        writeln!(f, "fit.eps = {}", join(&self.fit_eps))?;
        writeln!(f, "fit.order = {}", self.fit_order)?;
        let (group, pair) = match &self.family {
            FamilySpec::Coframe { e1, e2 } => ("coframe", [("E1", e1), ("E2", e2)]),
            FamilySpec::Perturbation { h, k } => ("perturbation", [("h", h), ("k", k)]),
        };
        for (name, mat) in pair {
            for r in 0..3 {
                for c in 0..3 {
                    let p = mat.get(r, c);
                    if !p.is_zero() {
                        writeln!(f, "{group}.{name}.{}{} = {p}", r + 1, c + 1)?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn matrix_key(key: &str) -> Result<(&'static str, &'static str, usize, usize), CliError> {
    let unknown = || CliError::Config(format!("unknown key `{key}`"));
    let mut parts = key.split('.');
    let (group, name, idx) = (parts.next(), parts.next(), parts.next());
    if parts.next().is_some() {
        return Err(unknown());
    }
    let (group, name) = match (group, name) {
        (Some("coframe"), Some("E1")) => ("coframe", "E1"),
        (Some("coframe"), Some("E2")) => ("coframe", "E2"),
        (Some("perturbation"), Some("h")) => ("perturbation", "h"),
        (Some("perturbation"), Some("k")) => ("perturbation", "k"),
        _ => return Err(unknown()),
    };
    let digits: Vec<usize> = idx
        .ok_or_else(unknown)?
        .chars()
        .map(|ch| ch.to_digit(10).map(|d| d as usize))
        .collect::<Option<_>>()
        .ok_or_else(unknown)?;
    match digits[..] {
        [r, c] if (1..=3).contains(&r) && (1..=3).contains(&c) => Ok((group, name, r - 1, c - 1)),
        _ => Err(unknown()),
    }
}

fn parse_usize(key: &str, value: &str) -> Result<usize, CliError> {
    value.parse().map_err(|_| CliError::Config(format!("{key}: expected a non-negative integer, got `{value}`")))
}

fn items(value: &str) -> impl Iterator<Item = &str> {
    value.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty())
}

/// Comma or whitespace separated reals; `p/q` is accepted.
pub fn parse_reals(value: &str) -> Result<Vec<f64>, CliError> {
    items(value)
        .map(|s| {
            let q = s.parse::<f64>().ok().or_else(|| {
                let r: Rational64 = s.parse().ok()?;
                Some(*r.numer() as f64 / *r.denom() as f64)
            });
            q.filter(|x| x.is_finite()).ok_or_else(|| CliError::Config(format!("bad number `{s}`")))
        })
        .collect()
}

/// A list of integers, or an inclusive range `a..b`.
pub fn parse_modes(value: &str) -> Result<Vec<i64>, CliError> {
    let bad = || CliError::Config(format!("bad mode list `{value}`"));
    if let Some((a, b)) = value.split_once("..") {
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    let modes: Vec<i64> = items(value).map(|s| s.parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    if modes.is_empty() {
        return Err(bad());
    }
    Ok(modes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use torus_dirac::families;

    #[test]
    fn bundled_examples_match_families() {
        let g1 = RunConfig::example("example-galerkin-1").unwrap();
        assert_eq!(g1.family.family().unwrap(), families::temp_coframe());
        assert_eq!(g1.eps, vec![0.2, 0.1, 0.01]);
        assert_eq!(g1.modes, vec![-2, -1, 0, 1, 2]);
        let g2 = RunConfig::example("example-galerkin-2").unwrap();
        assert_eq!(g2.family.family().unwrap(), families::skew_coframe());
        let e1 = RunConfig::example("example-explicit-1").unwrap();
        assert_eq!(e1.family.hk().unwrap(), families::explicit_1());
        let e2 = RunConfig::example("example-explicit-2").unwrap();
        assert_eq!(e2.family.hk().unwrap(), families::explicit_2());
    }

    #[test]
    fn display_round_trips() {
        for (name, _) in EXAMPLES {
            let cfg = RunConfig::example(name).unwrap();
            let again: RunConfig = cfg.to_string().parse().unwrap();
            assert_eq!(again, cfg, "{name}");
        }
    }

    #[test]
    fn mirrored_entries() {
        let cfg: RunConfig = "perturbation.h.12 = (0, 1, 0)\nperturbation.h.21 = (0, 1, 0)".parse().unwrap();
        let (h, _) = cfg.family.hk().unwrap();
        assert_eq!(h.get(1, 0), h.get(0, 1));
        let err = "perturbation.h.12 = (0, 1, 0)\nperturbation.h.21 = (0, 2, 0)".parse::<RunConfig>().unwrap_err();
        assert!(err.to_string().contains("conflicts"), "{err}");
    }

    #[test]
    fn rejections() {
        let cases = [
            ("coframe.E1.11 = (0, 1, 0)\ncoframe.E1.11 = (0, 1, 0)", "duplicate"),
            ("coframe.E1.41 = (0, 1, 0)", "unknown key"),
            ("colour = red\ncoframe.E1.11 = (0, 1, 0)", "unknown key"),
            ("coframe.E1.11 = (0, 1, 0)\nperturbation.h.11 = (0, 1, 0)", "mixes"),
            ("family = perturbation\ncoframe.E1.11 = (0, 1, 0)", "family"),
            ("coframe.E1.11 = (1, 1, 0)", "real"),
            ("coframe.E1.11 = (0, 1, 0)\nmodes = 3..1", "mode list"),
            ("coframe.E1.11 = (0, 1, 0)\nm = 2\nmodes = -3..3", "exceeds"),
            ("m = 25", "no family"),
        ];
        for (text, needle) in cases {
            let err = text.parse::<RunConfig>().unwrap_err();
            assert!(err.to_string().contains(needle), "{text:?}: {err}");
            assert_eq!(err.exit_code(), 2);
        }
    }

    #[test]
    fn list_parsers() {
        assert_eq!(parse_reals("0.1, 1/4 0.5").unwrap(), vec![0.1, 0.25, 0.5]);
        assert_eq!(parse_modes("-1..1").unwrap(), vec![-1, 0, 1]);
        assert_eq!(parse_modes("2, -2").unwrap(), vec![2, -2]);
        assert!(parse_reals("x").is_err());
    }
}
