//! CSV datasets, scenario config files and output tables.
//!
//! Input CSVs are comma-separated with a header row and `.` as decimal
//! separator. Every cell must be numeric; blanks are errors. Numbers are
//! written with 17 significant digits so that reloading is lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::regression::Dataset;
use crate::simulation::{PollutionMode, ScenarioSpec};

/// A dataset together with its column names.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedDataset {
    pub dataset: Dataset,
    pub response: String,
    pub predictors: Vec<String>,
}

impl NamedDataset {
    /// Coefficient labels, intercept first.
    pub fn terms(&self) -> Vec<String> {
        std::iter::once("intercept".to_string())
            .chain(self.predictors.iter().cloned())
            .collect()
    }
}

/// Lossless decimal rendering (17 significant digits).
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Human-readable rendering with four decimals.
pub fn format_short(x: f64) -> String {
    format!("{x:.4}")
}

/// Reads a CSV without a minimum row count (candidate pools may be empty).
pub fn read_csv_dataset(path: &Path, response_column: &str) -> Result<NamedDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Csv(format!("{}: {e}", path.display())))?
        .clone();
    if headers.is_empty() || headers.iter().all(|h| h.trim().is_empty()) {
        return Err(Error::Csv(format!("{}: missing header row", path.display())));
    }
    let names: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    let response_idx = names
        .iter()
        .position(|h| h == response_column)
        .ok_or_else(|| {
            Error::Csv(format!(
                "{}: response column '{response_column}' not found in header",
                path.display()
            ))
        })?;
    let predictors: Vec<String> = names
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != response_idx)
        .map(|(_, n)| n.clone())
        .collect();

    let mut y = Vec::new();
    let mut x = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let row = row + 1;
        let record = record.map_err(|e| Error::Csv(format!("{}: row {row}: {e}", path.display())))?;
        if record.len() != names.len() {
            return Err(Error::Csv(format!(
                "{}: row {row} has {} fields, header has {}",
                path.display(),
                record.len(),
                names.len()
            )));
        }
        for (col, cell) in record.iter().enumerate() {
            let trimmed = cell.trim();
            let value: f64 = trimmed.parse().map_err(|_| {
                let what = if trimmed.is_empty() { "blank" } else { "non-numeric" };
                Error::Csv(format!(
                    "{}: {what} cell at row {row}, column '{}': {cell:?}",
                    path.display(),
                    names[col]
                ))
            })?;
            if !value.is_finite() {
                return Err(Error::Csv(format!(
                    "{}: non-finite cell at row {row}, column '{}'",
                    path.display(),
                    names[col]
                )));
            }
            if col == response_idx {
                y.push(value);
            } else {
                x.push(value);
            }
        }
    }
    let n = y.len();
    let p = predictors.len();
    let dataset = Dataset::new(DVector::from_vec(y), DMatrix::from_row_slice(n, p, &x), true)?;
    Ok(NamedDataset {
        dataset,
        response: response_column.to_string(),
        predictors,
    })
}

/// Reads a CSV and requires at least `p + 2` rows.
pub fn load_csv_named(path: &Path, response_column: &str) -> Result<NamedDataset> {
    let named = read_csv_dataset(path, response_column)?;
    let needed = named.dataset.p() + 2;
    if named.dataset.n() < needed {
        return Err(Error::Csv(format!(
            "{}: {} rows, need at least {needed} for {} predictors",
            path.display(),
            named.dataset.n(),
            named.dataset.p()
        )));
    }
    Ok(named)
}

/// `response_column` becomes `y`; all other columns, in file order, become
/// predictors.
pub fn load_csv(path: &Path, response_column: &str) -> Result<Dataset> {
    Ok(load_csv_named(path, response_column)?.dataset)
}

pub fn write_csv(path: &Path, data: &NamedDataset) -> Result<()> {
    let mut out = String::new();
    out.push_str(&data.response);
    for name in &data.predictors {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    let ds = &data.dataset;
    for i in 0..ds.n() {
        out.push_str(&format_number(ds.responses()[i]));
        for j in 0..ds.p() {
            out.push(',');
            out.push_str(&format_number(ds.predictors()[(i, j)]));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("{key}: cannot parse '{}' as a number", s.trim())))
        })
        .collect()
}

fn parse_scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{}'", value.trim())))
}

/// Parses a flat `key = value` scenario file. Lists are comma-separated,
/// `#` starts a comment. An optional `preset` key names a built-in setting
/// that the remaining keys override.
pub fn parse_scenario(text: &str) -> Result<ScenarioSpec> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }

    let mut spec = match pairs.iter().find(|(k, _)| k == "preset") {
        Some((_, name)) => ScenarioSpec::preset(name)
            .ok_or_else(|| Error::Config(format!("unknown preset '{name}'")))?,
        None => ScenarioSpec {
            p: 0,
            n: 0,
            n1: 0,
            n2: 0,
            mu0: Vec::new(),
            pairwise_corr: 0.0,
            beta0: Vec::new(),
            noise_var_prob: 1.0,
            noise_var_target_np: 1.0,
            noise_var_polluted: 1.0,
            pollution_mode: PollutionMode::Random {
                sigma_loc: 0.0,
                sigma_par: 0.0,
            },
            seed: 0,
        },
    };

    let mut mode: Option<String> = None;
    let (mut mu_shift, mut beta_polluted, mut sigma_loc, mut sigma_par) = match &spec.pollution_mode {
        PollutionMode::Fixed {
            mu_shift,
            beta_polluted,
        } => (Some(mu_shift.clone()), Some(beta_polluted.clone()), None, None),
        PollutionMode::Random {
            sigma_loc,
            sigma_par,
        } => (None, None, Some(*sigma_loc), Some(*sigma_par)),
    };

    for (k, v) in &pairs {
        match k.as_str() {
            "preset" => {}
            "p" => spec.p = parse_scalar(k, v)?,
            "n" => spec.n = parse_scalar(k, v)?,
            "n1" => spec.n1 = parse_scalar(k, v)?,
            "n2" => spec.n2 = parse_scalar(k, v)?,
            "mu0" => spec.mu0 = parse_list(k, v)?,
            "pairwise_corr" => spec.pairwise_corr = parse_scalar(k, v)?,
            "beta0" => spec.beta0 = parse_list(k, v)?,
            "noise_var_prob" => spec.noise_var_prob = parse_scalar(k, v)?,
            "noise_var_target_np" => spec.noise_var_target_np = parse_scalar(k, v)?,
            "noise_var_polluted" => spec.noise_var_polluted = parse_scalar(k, v)?,
            "pollution_mode" => mode = Some(v.clone()),
            "mu_shift" => mu_shift = Some(parse_list(k, v)?),
            "beta_polluted" => beta_polluted = Some(parse_list(k, v)?),
            "sigma_loc" => sigma_loc = Some(parse_scalar(k, v)?),
            "sigma_par" => sigma_par = Some(parse_scalar(k, v)?),
            "seed" => spec.seed = parse_scalar(k, v)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
    }

    let mode = mode.unwrap_or_else(|| match spec.pollution_mode {
        PollutionMode::Fixed { .. } => "fixed".into(),
        PollutionMode::Random { .. } => "random".into(),
    });
    spec.pollution_mode = match mode.as_str() {
        "fixed" => PollutionMode::Fixed {
            mu_shift: mu_shift.ok_or_else(|| Error::Config("fixed pollution needs mu_shift".into()))?,
            beta_polluted: beta_polluted
                .ok_or_else(|| Error::Config("fixed pollution needs beta_polluted".into()))?,
        },
        "random" => PollutionMode::Random {
            sigma_loc: sigma_loc.ok_or_else(|| Error::Config("random pollution needs sigma_loc".into()))?,
            sigma_par: sigma_par.ok_or_else(|| Error::Config("random pollution needs sigma_par".into()))?,
        },
        other => return Err(Error::Config(format!("pollution_mode must be fixed or random, got '{other}'"))),
    };
    spec.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(spec)
}

pub fn load_scenario(path: &Path) -> Result<ScenarioSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}

/// Renders a scenario in the format read by [`parse_scenario`].
pub fn scenario_to_text(spec: &ScenarioSpec) -> String {
    let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
    let mut s = String::new();
    let _ = writeln!(s, "p = {}", spec.p);
    let _ = writeln!(s, "n = {}", spec.n);
    let _ = writeln!(s, "n1 = {}", spec.n1);
    let _ = writeln!(s, "n2 = {}", spec.n2);
    let _ = writeln!(s, "mu0 = {}", list(&spec.mu0));
    let _ = writeln!(s, "pairwise_corr = {}", spec.pairwise_corr);
    let _ = writeln!(s, "beta0 = {}", list(&spec.beta0));
    let _ = writeln!(s, "noise_var_prob = {}", spec.noise_var_prob);
    let _ = writeln!(s, "noise_var_target_np = {}", spec.noise_var_target_np);
    let _ = writeln!(s, "noise_var_polluted = {}", spec.noise_var_polluted);
    match &spec.pollution_mode {
        PollutionMode::Fixed {
            mu_shift,
            beta_polluted,
        } => {
            let _ = writeln!(s, "pollution_mode = fixed");
            let _ = writeln!(s, "mu_shift = {}", list(mu_shift));
            let _ = writeln!(s, "beta_polluted = {}", list(beta_polluted));
        }
        PollutionMode::Random {
            sigma_loc,
            sigma_par,
        } => {
            let _ = writeln!(s, "pollution_mode = random");
            let _ = writeln!(s, "sigma_loc = {sigma_loc}");
            let _ = writeln!(s, "sigma_par = {sigma_par}");
        }
    }
    let _ = writeln!(s, "seed = {}", spec.seed);
    s
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Num(v) => format_number(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(t) => {
                if t.contains([',', '"', '\n']) {
                    format!("\"{}\"", t.replace('"', "\"\""))
                } else {
                    t.clone()
                }
            }
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Bool(v) => json!(v),
            Cell::Text(t) => json!(t),
        }
    }
}

/// A named table with a fixed column set.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &'static [&'static str]) -> Self {
        Table {
            name,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width for {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (c, cell) in self.columns.iter().zip(row) {
                    obj.insert((*c).to_string(), cell.json());
                }
                Value::Object(obj)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&Value::Array(rows)).expect("serializable");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 123_456_789.123_456_79, 0.0] {
            let s = format_number(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn scenario_text_round_trips() {
        for name in ["a", "1", "b1", "b3"] {
            let spec = ScenarioSpec::preset(name).unwrap().with_seed(9);
            assert_eq!(parse_scenario(&scenario_to_text(&spec)).unwrap(), spec);
        }
    }

    #[test]
    fn preset_with_override() {
        let spec = parse_scenario("preset = b1\nn = 80 # larger\nseed = 3\n").unwrap();
        assert_eq!(spec.n, 80);
        assert_eq!(spec.seed, 3);
        assert_eq!(spec.beta0, ScenarioSpec::setting_b1().beta0);
    }

    #[test]
    fn scenario_errors() {
        assert!(matches!(parse_scenario("bogus = 1"), Err(Error::Config(_))));
        assert!(matches!(parse_scenario("preset = zz"), Err(Error::Config(_))));
        assert!(matches!(parse_scenario("preset = 1\nmu0 = 1, x"), Err(Error::Config(_))));
        assert!(matches!(
            parse_scenario("preset = a\npollution_mode = random"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn csv_quoting() {
        let mut t = Table::new("t", &["a", "b"]);
        t.push(vec![Cell::Text("x,y".into()), Cell::Empty]);
        assert_eq!(t.to_csv(), "a,b\n\"x,y\",\n");
    }
}
