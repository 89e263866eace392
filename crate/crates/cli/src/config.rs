//! Flag and config-file handling. Every value a run needs arrives as a
//! string (either a command-line flag or a `key = value` line in the
//! optional config file), is merged with flags taking precedence, and is
//! then validated in one pass so a broken invocation reports every problem
//! at once instead of one per run.

use std::collections::BTreeMap;

use num_complex::Complex64;

use beltrami::manifold::ManifoldModel;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Experiment {
    Spectrum,
    Pointset,
    Eigs,
    Convergence,
    Reconstruct,
    Poincare,
    Zeta,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Pointset => "pointset",
            Experiment::Eigs => "eigs",
            Experiment::Convergence => "convergence",
            Experiment::Reconstruct => "reconstruct",
            Experiment::Poincare => "poincare",
            Experiment::Zeta => "zeta",
        }
    }

    /// Keys this experiment accepts, beyond the common set.
    fn own_keys(self) -> &'static [&'static str] {
        match self {
            Experiment::Spectrum => &["lambda-max"],
            Experiment::Pointset => &["rho", "probes"],
            Experiment::Eigs | Experiment::Reconstruct => &["rho", "k", "omega"],
            Experiment::Convergence => &["omega", "rho-schedule", "k-schedule"],
            Experiment::Poincare => &["rho-schedule", "k", "m", "omega"],
            Experiment::Zeta => &["rho-schedule", "k", "s-grid", "tail-tol"],
        }
    }

    pub fn valid_keys(self) -> Vec<&'static str> {
        let mut keys = vec![
            "manifold",
            "seed",
            "output",
            "format",
            "digits",
            "precision",
        ];
        keys.extend_from_slice(self.own_keys());
        keys
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Precision {
    Auto,
    F64,
    Dd,
}

/// Everything validated and typed; fields irrelevant to the chosen
/// experiment keep their defaults and are ignored by it.
#[derive(Debug)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub manifold: ManifoldModel,
    pub seed: u64,
    pub output: String,
    pub format: OutputFormat,
    pub digits: usize,
    pub precision: Precision,
    pub lambda_max: f64,
    pub rho: f64,
    pub probes: usize,
    pub k: u32,
    pub omega: f64,
    pub m: u32,
    pub tail_tol: f64,
    pub rho_schedule: Vec<f64>,
    pub k_schedule: Vec<u32>,
    pub s_grid: Vec<Complex64>,
}

impl RunConfig {
    /// Scalar actually used: wide arithmetic where one spline cell needs it
    /// (the 1-dimensional models), f64 where it does not.
    pub fn resolved_precision(&self) -> Precision {
        match self.precision {
            Precision::Auto => {
                if self.manifold.dimension == 1 {
                    Precision::Dd
                } else {
                    Precision::F64
                }
            }
            p => p,
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are
/// skipped, later duplicates win.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>, Vec<String>> {
    let mut entries = Vec::new();
    let mut errors = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => {
                entries.push((k.trim().to_string(), v.trim().to_string()));
            }
            _ => errors.push(format!(
                "config line {}: expected 'key = value', got '{line}'",
                idx + 1
            )),
        }
    }
    if errors.is_empty() {
        Ok(entries)
    } else {
        Err(errors)
    }
}

fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut row = vec![i + 1];
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            row.push(sub.min(prev[j + 1] + 1).min(row[j] + 1));
        }
        prev = row;
    }
    prev[b.len()]
}

fn nearest_key<'a>(key: &str, valid: &[&'a str]) -> Option<&'a str> {
    valid
        .iter()
        .map(|v| (levenshtein(key, v), *v))
        .min()
        .filter(|(d, _)| *d <= 3)
        .map(|(_, v)| v)
}

/// Merges config-file entries under command-line flags (flags win) and
/// validates the result for the experiment, collecting every violation.
pub fn build_config(
    experiment: Experiment,
    flags: &[(&'static str, Option<String>)],
    file_entries: &[(String, String)],
) -> Result<RunConfig, Vec<String>> {
    let valid = experiment.valid_keys();
    let mut errors: Vec<String> = Vec::new();
    let mut merged: BTreeMap<&str, String> = BTreeMap::new();

    for (key, value) in file_entries {
        match valid.iter().copied().find(|v| *v == key.as_str()) {
            Some(v) => {
                merged.insert(v, value.clone());
            }
            None => {
                let hint = nearest_key(key, &valid)
                    .map(|n| format!(" (did you mean '{n}'?)"))
                    .unwrap_or_default();
                errors.push(format!(
                    "unknown config key '{key}' for {}{hint}",
                    experiment.name()
                ));
            }
        }
    }
    for (key, value) in flags {
        if let Some(v) = value {
            merged.insert(*key, v.clone());
        }
    }

    let take = |key: &str| merged.get(key).cloned();

    let manifold = match take("manifold") {
        Some(s) => match ManifoldModel::parse(&s) {
            Ok(m) => Some(m),
            Err(e) => {
                errors.push(e.to_string());
                None
            }
        },
        None => {
            errors.push("missing required key 'manifold'".into());
            None
        }
    };

    let mut parse_f64 = |key: &str, required: bool, default: f64| -> f64 {
        match take(key) {
            Some(s) => s.parse().unwrap_or_else(|_| {
                errors.push(format!("key '{key}': cannot parse '{s}' as a number"));
                default
            }),
            None => {
                if required {
                    errors.push(format!("missing required key '{key}'"));
                }
                default
            }
        }
    };

    let needs = |key: &str| experiment.valid_keys().contains(&key);
    let required = |key: &str| experiment.own_keys().contains(&key);
    let req_f64 = |key: &str| {
        required(key)
            && !matches!(
                (experiment, key),
                (Experiment::Pointset, "probes")
                    | (Experiment::Poincare, "k" | "m" | "omega")
                    | (Experiment::Zeta, "tail-tol")
            )
    };

    let lambda_max = parse_f64("lambda-max", needs("lambda-max"), 0.0);
    let rho = parse_f64("rho", needs("rho"), 0.0);
    let omega = parse_f64("omega", needs("omega") && req_f64("omega"), 9.0);
    let tail_tol = parse_f64("tail-tol", false, 1e-10);

    let mut parse_int = |key: &str, required: bool, default: u64| -> u64 {
        match merged.get(key) {
            Some(s) => s.parse().unwrap_or_else(|_| {
                errors.push(format!(
                    "key '{key}': cannot parse '{s}' as a nonnegative integer"
                ));
                default
            }),
            None => {
                if required {
                    errors.push(format!("missing required key '{key}'"));
                }
                default
            }
        }
    };

    let seed = parse_int("seed", false, 0);
    let probes = parse_int("probes", false, 10_000) as usize;
    let k = parse_int("k", needs("k") && req_f64("k"), 2) as u32;
    let m = parse_int("m", false, 1) as u32;
    let digits = parse_int("digits", false, 17) as usize;

    let mut parse_f64_list = |key: &str, required: bool| -> Vec<f64> {
        match merged.get(key) {
            Some(s) => s
                .split(',')
                .map(|t| {
                    t.trim().parse::<f64>().map_err(|_| {
                        errors.push(format!(
                            "key '{key}': cannot parse '{}' as a number",
                            t.trim()
                        ));
                    })
                })
                .filter_map(|r| r.ok())
                .collect(),
            None => {
                if required {
                    errors.push(format!("missing required key '{key}'"));
                }
                Vec::new()
            }
        }
    };

    let rho_schedule = parse_f64_list("rho-schedule", needs("rho-schedule"));

    let k_schedule: Vec<u32> = match merged.get("k-schedule") {
        Some(s) => s
            .split(',')
            .filter_map(|t| match t.trim().parse::<u32>() {
                Ok(v) => Some(v),
                Err(_) => {
                    errors.push(format!(
                        "key 'k-schedule': cannot parse '{}' as an integer",
                        t.trim()
                    ));
                    None
                }
            })
            .collect(),
        None => {
            if needs("k-schedule") {
                errors.push("missing required key 'k-schedule'".into());
            }
            Vec::new()
        }
    };

    let s_grid: Vec<Complex64> = match merged.get("s-grid") {
        Some(s) => s
            .split(',')
            .filter_map(|t| match parse_complex(t.trim()) {
                Ok(v) => Some(v),
                Err(e) => {
                    errors.push(format!("key 's-grid': {e}"));
                    None
                }
            })
            .collect(),
        None => {
            if needs("s-grid") {
                errors.push("missing required key 's-grid'".into());
            }
            Vec::new()
        }
    };

    let format = match merged.get("format").map(String::as_str) {
        None | Some("csv") => OutputFormat::Csv,
        Some("json") => OutputFormat::Json,
        Some(other) => {
            errors.push(format!("key 'format': expected csv or json, got '{other}'"));
            OutputFormat::Csv
        }
    };

    let precision = match merged.get("precision").map(String::as_str) {
        None | Some("auto") => Precision::Auto,
        Some("f64") => Precision::F64,
        Some("dd") => Precision::Dd,
        Some(other) => {
            errors.push(format!(
                "key 'precision': expected auto, f64, or dd, got '{other}'"
            ));
            Precision::Auto
        }
    };

    if !(1..=17).contains(&digits) {
        errors.push(format!("key 'digits': must lie in 1..=17, got {digits}"));
    }

    let output = merged
        .get("output")
        .cloned()
        .unwrap_or_else(|| format!("{}.{}", experiment.name(), format.extension()));

    // parameter-level checks the library would reject anyway are surfaced
    // here so they join the consolidated report
    if let Some(mf) = &manifold {
        let half_d = mf.dimension as f64 / 2.0;
        let uses_k = needs("k") && merged.contains_key("k") || required("k");
        if uses_k && (k as f64) <= half_d {
            errors.push(format!(
                "key 'k': spline order must satisfy k > d/2 = {half_d} on {}; got {k}",
                mf.kind
            ));
        }
        for kk in &k_schedule {
            if (*kk as f64) <= half_d {
                errors.push(format!(
                    "key 'k-schedule': every order must satisfy k > d/2 = {half_d} on {}; got {kk}",
                    mf.kind
                ));
            }
        }
    }

    if errors.is_empty() {
        Ok(RunConfig {
            experiment,
            manifold: manifold.expect("validated above"),
            seed,
            output,
            format,
            digits: digits.clamp(1, 17),
            precision,
            lambda_max,
            rho,
            probes,
            k,
            omega,
            m,
            tail_tol,
            rho_schedule,
            k_schedule,
            s_grid,
        })
    } else {
        Err(errors)
    }
}

/// Accepts plain reals ("2", "1.5e-1") and rectangular complex values
/// ("2+i", "1-0.5i", "2i").
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(body) = t.strip_suffix('i') {
        let chars: Vec<char> = body.chars().collect();
        let mut split = None;
        for idx in (1..chars.len()).rev() {
            let c = chars[idx];
            if (c == '+' || c == '-') && chars[idx - 1] != 'e' && chars[idx - 1] != 'E' {
                split = Some(idx);
                break;
            }
        }
        let (re_str, im_str) = match split {
            Some(idx) => (&body[..idx], &body[idx..]),
            None => ("", &body[..]),
        };
        let im = match im_str {
            "" | "+" => 1.0,
            "-" => -1.0,
            x => x
                .parse()
                .map_err(|_| format!("bad imaginary part in '{s}'"))?,
        };
        let re: f64 = if re_str.is_empty() {
            0.0
        } else {
            re_str
                .parse()
                .map_err(|_| format!("bad real part in '{s}'"))?
        };
        Ok(Complex64::new(re, im))
    } else {
        t.parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| {
                format!("cannot parse '{s}' as a complex number (forms: 2, 1.5, 2+i, 1-0.5i)")
            })
    }
}
