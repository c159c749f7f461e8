//! The command-line workflows: `extend`, `cv`, `bootstrap`, `robustify` and
//! `simulate`.
//!
//! Every workflow writes its tables into the output directory, one file per
//! table, as CSV or JSON. Column sets are fixed per table (see the
//! `*_COLUMNS` constants) and all randomness comes from the `seed` field.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::extension::{extend_sample, screen_self, ExtensionConfig, ExtensionResult, NormScope};
use crate::inference::{bootstrap_se, bootstrap_se_robustified, se_comparison, BootstrapSpec, SeComparison};
use crate::io::{format_short, load_csv_named, load_scenario, read_csv_dataset, write_csv, NamedDataset, Table};
use crate::regression::{fit_ols, naive_standard_errors, OlsFit};
use crate::simulation::{run_study_with_plan, StudyReport, METRICS};
use crate::tuning::{select_alphas, CvPlan, Selection, DEFAULT_FOLDS, DEFAULT_GRID};

pub const DECISIONS_COLUMNS: &[&str] = &[
    "id",
    "studentized_residual",
    "relative_change",
    "residual_pass",
    "change_pass",
    "included",
    "diagnostic",
];
pub const COEFFICIENTS_COLUMNS: &[&str] = &["fit", "term", "estimate", "std_error", "se_method"];
pub const SCREENING_COLUMNS: &[&str] = &[
    "alpha_st",
    "alpha_ch",
    "norm_scope",
    "t_s",
    "t_c",
    "n_prob",
    "n_candidates",
    "n_included",
    "extended_size",
];
pub const CV_SCORES_COLUMNS: &[&str] = &["alpha_st", "alpha_ch", "score", "selected"];
pub const STUDY_COLUMNS: &[&str] = &["replication", "metric", "value"];
pub const AGGREGATE_COLUMNS: &[&str] = &["metric", "mean", "sd", "median", "count"];
pub const FAILURES_COLUMNS: &[&str] = &["replication", "code", "message"];
pub const STANDARD_ERRORS_COLUMNS: &[&str] = &["method", "term", "std_error"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Extend,
    Cv,
    Bootstrap,
    Simulate,
    Robustify,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaChoice {
    Fixed { alpha_st: f64, alpha_ch: f64 },
    CrossValidated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub prob: Option<PathBuf>,
    pub nonprob: Option<PathBuf>,
    pub scenario: Option<PathBuf>,
    pub response: Option<String>,
    pub alphas: AlphaChoice,
    pub norm_scope: NormScope,
    pub k: usize,
    pub grid: Vec<f64>,
    pub full_grid: bool,
    pub n_boot: Option<usize>,
    pub n_datasets: usize,
    /// For `simulate`, overrides the scenario file's seed when set.
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn new(command: Command, out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            command,
            prob: None,
            nonprob: None,
            scenario: None,
            response: None,
            alphas: AlphaChoice::Fixed {
                alpha_st: 0.05,
                alpha_ch: 0.05,
            },
            norm_scope: NormScope::FullCoefficients,
            k: DEFAULT_FOLDS,
            grid: DEFAULT_GRID.to_vec(),
            full_grid: false,
            n_boot: None,
            n_datasets: 100,
            seed: None,
            out_dir: out_dir.into(),
            format: OutputFormat::Csv,
        }
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn plan(&self) -> Result<CvPlan> {
        let plan = if self.full_grid {
            CvPlan::full(&self.grid, self.k, self.seed())?
        } else {
            CvPlan::reduced(&self.grid, self.k, self.seed())?
        };
        Ok(plan.with_norm_scope(self.norm_scope))
    }

    fn fixed_config(&self) -> Result<ExtensionConfig> {
        match self.alphas {
            AlphaChoice::Fixed { alpha_st, alpha_ch } => ExtensionConfig::new(alpha_st, alpha_ch, self.norm_scope),
            AlphaChoice::CrossValidated => Ok(ExtensionConfig {
                norm_scope: self.norm_scope,
                ..ExtensionConfig::default()
            }),
        }
    }

    fn require<'a, T>(&self, value: &'a Option<T>, flag: &str) -> Result<&'a T> {
        value
            .as_ref()
            .ok_or_else(|| Error::Config(format!("missing required option {flag}")))
    }
}

/// Files written by a workflow.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
}

struct Writer<'a> {
    dir: &'a Path,
    format: OutputFormat,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn table(&mut self, table: &Table) -> Result<()> {
        let path = self.dir.join(format!("{}.{}", table.name, self.format.extension()));
        let body = match self.format {
            OutputFormat::Csv => table.to_csv(),
            OutputFormat::Json => table.to_json(),
        };
        fs::write(&path, body)?;
        self.files.push(path);
        Ok(())
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body)?;
        self.files.push(path);
        Ok(())
    }
}

/// Runs one workflow and writes its artifacts.
pub fn run_command(config: &RunConfig) -> Result<RunOutput> {
    fs::create_dir_all(&config.out_dir)?;
    let mut writer = Writer {
        dir: &config.out_dir,
        format: config.format,
        files: Vec::new(),
    };
    match config.command {
        Command::Extend | Command::Cv | Command::Bootstrap => run_extend(config, &mut writer)?,
        Command::Robustify => run_robustify(config, &mut writer)?,
        Command::Simulate => run_simulate(config, &mut writer)?,
    }
    Ok(RunOutput { files: writer.files })
}

fn decisions_table(result: &ExtensionResult) -> Table {
    let mut t = Table::new("decisions", DECISIONS_COLUMNS);
    for d in &result.decisions {
        t.push(vec![
            d.id.into(),
            d.studentized_residual.into(),
            d.relative_change.into(),
            d.residual_pass.into(),
            d.change_pass.into(),
            d.included().into(),
            d.diagnostic.clone().into(),
        ]);
    }
    t
}

fn screening_table(result: &ExtensionResult, config: &ExtensionConfig) -> Table {
    let mut t = Table::new("screening", SCREENING_COLUMNS);
    let scope = match config.norm_scope {
        NormScope::FullCoefficients => "full",
        NormScope::SlopesOnly => "slopes",
    };
    t.push(vec![
        config.alpha_st.into(),
        config.alpha_ch.into(),
        scope.into(),
        result.t_s.into(),
        result.t_c.into(),
        result.base_fit.n().into(),
        result.decisions.len().into(),
        result.included_ids.len().into(),
        result.extended_size().into(),
    ]);
    t
}

fn cv_table(selection: &Selection) -> Table {
    let mut t = Table::new("cv_scores", CV_SCORES_COLUMNS);
    for g in &selection.scores {
        let selected = g.alpha_st == selection.alpha_st && g.alpha_ch == selection.alpha_ch;
        t.push(vec![g.alpha_st.into(), g.alpha_ch.into(), g.score.into(), selected.into()]);
    }
    t
}

fn push_fit(t: &mut Table, label: &str, terms: &[String], fit: &OlsFit) {
    let se = naive_standard_errors(fit);
    for (j, term) in terms.iter().enumerate() {
        t.push(vec![
            label.into(),
            term.as_str().into(),
            fit.coefficients[j].into(),
            se[j].into(),
            "naive".into(),
        ]);
    }
}

fn push_bootstrap(t: &mut Table, label: &str, terms: &[String], fit: &OlsFit, se: &[f64]) {
    for (j, term) in terms.iter().enumerate() {
        t.push(vec![
            label.into(),
            term.as_str().into(),
            fit.coefficients[j].into(),
            se[j].into(),
            "bootstrap".into(),
        ]);
    }
}

fn summary_text(title: &str, terms: &[String], rows: &[(&str, &OlsFit, Option<&[f64]>)], extra: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{title}");
    let _ = writeln!(s);
    let _ = writeln!(s, "{:<12} {:<16} {:>12} {:>12} {:>12}", "fit", "term", "estimate", "se_naive", "se_boot");
    for (label, fit, boot) in rows {
        let se = naive_standard_errors(fit);
        for (j, term) in terms.iter().enumerate() {
            let b = boot.map_or("-".to_string(), |b| format_short(b[j]));
            let _ = writeln!(
                s,
                "{:<12} {:<16} {:>12} {:>12} {:>12}",
                label,
                term,
                format_short(fit.coefficients[j]),
                format_short(se[j]),
                b
            );
        }
    }
    s.push_str(extra);
    s
}

fn run_extend(config: &RunConfig, w: &mut Writer) -> Result<()> {
    let response = config.require(&config.response, "--response")?;
    let prob = load_csv_named(config.require(&config.prob, "--prob")?, response)?;
    let nonprob = read_csv_dataset(config.require(&config.nonprob, "--nonprob")?, response)?;
    if nonprob.predictors != prob.predictors {
        return Err(Error::Csv(format!(
            "predictor columns differ: {:?} vs {:?}",
            prob.predictors, nonprob.predictors
        )));
    }

    let use_cv = config.command == Command::Cv || config.alphas == AlphaChoice::CrossValidated;
    let ext_config = if use_cv {
        let selection = select_alphas(&prob.dataset, &nonprob.dataset, &config.plan()?)?;
        w.table(&cv_table(&selection))?;
        selection.config(config.norm_scope)
    } else {
        config.fixed_config()?
    };

    let result = extend_sample(&prob.dataset, &nonprob.dataset, &ext_config)?;
    let terms = prob.terms();
    let n_boot = match config.command {
        Command::Bootstrap => Some(config.n_boot.unwrap_or(100)),
        _ => config.n_boot,
    };
    let boot = match n_boot {
        Some(b) => Some(bootstrap_se(
            &prob.dataset,
            &nonprob.dataset,
            &ext_config,
            &BootstrapSpec::new(b, config.seed())?,
        )?),
        None => None,
    };

    let mut coef = Table::new("coefficients", COEFFICIENTS_COLUMNS);
    push_fit(&mut coef, "base", &terms, &result.base_fit);
    push_fit(&mut coef, "extended", &terms, &result.extended_fit);
    if let Some(b) = &boot {
        push_bootstrap(&mut coef, "extended", &terms, &result.extended_fit, b);
    }

    w.table(&decisions_table(&result))?;
    w.table(&coef)?;
    w.table(&screening_table(&result, &ext_config))?;
    let extra = format!(
        "\nalpha_st {}  alpha_ch {}  t_s {}  t_c {}\nprobability sample {}  candidates {}  included {}  extended sample {}\n",
        format_short(ext_config.alpha_st),
        format_short(ext_config.alpha_ch),
        format_short(result.t_s),
        format_short(result.t_c),
        result.base_fit.n(),
        result.decisions.len(),
        result.included_ids.len(),
        result.extended_size()
    );
    w.text(
        "summary.txt",
        &summary_text(
            "sample extension",
            &terms,
            &[
                ("base", &result.base_fit, None),
                ("extended", &result.extended_fit, boot.as_deref()),
            ],
            &extra,
        ),
    )
}

fn run_robustify(config: &RunConfig, w: &mut Writer) -> Result<()> {
    let response = config.require(&config.response, "--response")?;
    let prob = load_csv_named(config.require(&config.prob, "--prob")?, response)?;
    let ext_config = if config.alphas == AlphaChoice::CrossValidated {
        let selection = select_alphas(&prob.dataset, &prob.dataset, &config.plan()?)?;
        w.table(&cv_table(&selection))?;
        selection.config(config.norm_scope)
    } else {
        config.fixed_config()?
    };
    let screened = screen_self(&prob.dataset, &ext_config)?;
    let reduced = NamedDataset {
        dataset: prob.dataset.select(&screened.included_ids),
        response: prob.response.clone(),
        predictors: prob.predictors.clone(),
    };
    let reduced_fit = fit_ols(&reduced.dataset)?;
    let boot = match config.n_boot {
        Some(b) => Some(bootstrap_se_robustified(
            &prob.dataset,
            &ext_config,
            &BootstrapSpec::new(b, config.seed())?,
        )?),
        None => None,
    };
    let terms = prob.terms();
    let mut coef = Table::new("coefficients", COEFFICIENTS_COLUMNS);
    push_fit(&mut coef, "base", &terms, &screened.base_fit);
    push_fit(&mut coef, "reduced", &terms, &reduced_fit);
    if let Some(b) = &boot {
        push_bootstrap(&mut coef, "reduced", &terms, &reduced_fit, b);
    }

    w.table(&decisions_table(&screened))?;
    w.table(&coef)?;
    w.table(&screening_table(&screened, &ext_config))?;
    let path = w.dir.join("reduced.csv");
    write_csv(&path, &reduced)?;
    w.files.push(path);
    let n = prob.dataset.n();
    let kept = reduced.dataset.n();
    let extra = format!(
        "\nkept {kept}  deleted {}  proportion kept {}\n",
        n - kept,
        format_short(kept as f64 / n as f64)
    );
    w.text(
        "summary.txt",
        &summary_text(
            "robustified fit",
            &terms,
            &[("base", &screened.base_fit, None), ("reduced", &reduced_fit, boot.as_deref())],
            &extra,
        ),
    )
}

fn study_tables(report: &StudyReport) -> (Table, Table, Table) {
    let mut study = Table::new("study", STUDY_COLUMNS);
    for r in &report.per_replication {
        for name in METRICS {
            study.push(vec![r.replication.into(), name.into(), r.metric(name).into()]);
        }
    }
    let mut agg = Table::new("aggregate", AGGREGATE_COLUMNS);
    for m in &report.aggregates {
        agg.push(vec![m.metric.into(), m.mean.into(), m.sd.into(), m.median.into(), m.count.into()]);
    }
    let mut failures = Table::new("failures", FAILURES_COLUMNS);
    for f in &report.failures {
        failures.push(vec![f.replication.into(), f.code.into(), f.message.clone().into()]);
    }
    (study, agg, failures)
}

fn se_table(se: &SeComparison, p: usize) -> Table {
    let terms: Vec<String> = (0..=p).map(|j| format!("beta{j}")).collect();
    let mut t = Table::new("standard_errors", STANDARD_ERRORS_COLUMNS);
    for (method, values) in se.rows() {
        for (term, v) in terms.iter().zip(values) {
            t.push(vec![method.into(), term.as_str().into(), (*v).into()]);
        }
    }
    t
}

fn run_simulate(config: &RunConfig, w: &mut Writer) -> Result<()> {
    let mut spec = load_scenario(config.require(&config.scenario, "--scenario")?)?;
    if let Some(seed) = config.seed {
        spec.seed = seed;
    }
    let ext_config = config.fixed_config()?;
    let plan = match config.alphas {
        AlphaChoice::CrossValidated => Some(config.plan()?),
        AlphaChoice::Fixed { .. } => None,
    };
    let report = run_study_with_plan(&spec, &ext_config, config.n_datasets, plan.as_ref())?;
    let (study, agg, failures) = study_tables(&report);
    w.table(&study)?;
    w.table(&agg)?;
    w.table(&failures)?;

    let mut s = String::new();
    let _ = writeln!(s, "simulation study: {} datasets, seed {}", config.n_datasets, spec.seed);
    let _ = writeln!(s);
    let _ = writeln!(s, "{:<16} {:>12} {:>12} {:>12}", "metric", "mean", "sd", "median");
    for m in &report.aggregates {
        let _ = writeln!(
            s,
            "{:<16} {:>12} {:>12} {:>12}",
            m.metric,
            format_short(m.mean),
            format_short(m.sd),
            format_short(m.median)
        );
    }

    if let Some(n_boot) = config.n_boot {
        let se = se_comparison(
            &spec,
            &ext_config,
            config.n_datasets,
            &BootstrapSpec::new(n_boot, spec.seed)?,
        )?;
        w.table(&se_table(&se, spec.p))?;
        let _ = writeln!(s);
        let _ = writeln!(s, "standard errors");
        for (method, values) in se.rows() {
            let cells: Vec<String> = values.iter().map(|v| format_short(*v)).collect();
            let _ = writeln!(s, "{:<12} {}", method, cells.join("  "));
        }
    }
    w.text("summary.txt", &s)
}
