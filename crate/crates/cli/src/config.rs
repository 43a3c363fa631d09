//! Flat dotted-key run configuration.
//!
//! Format: UTF-8 text, one `key = value` pair per line, `#` starts a
//! comment, duplicate and unknown keys are rejected. Every value the run
//! actually uses (defaults resolved, command-line overrides applied) is
//! echoed back in the report under `effective_config`; feeding that block
//! back in as a config file reproduces the run bit-for-bit.

use std::collections::{BTreeMap, HashMap};

use rarepde::{
    CovarianceKernel, CovarianceModel, FieldExpr, FunctionalSpec, Grid, PdeCoefficients, Problem,
};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionalKind {
    LinearPde,
    ExpIntegral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    SquaredExponential,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Crude,
    Importance,
    Both,
}

impl MethodChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodChoice::Crude => "crude",
            MethodChoice::Importance => "importance",
            MethodChoice::Both => "both",
        }
    }
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub bounds: Vec<(f64, f64)>,
    pub n: Vec<usize>,
    pub kernel_kind: KernelKind,
    pub length_scale: f64,
    pub a0: FieldExpr,
    pub f: FieldExpr,
    pub functional_kind: FunctionalKind,
    pub weight: FieldExpr,
    pub mu: FieldExpr,
    pub sigma: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub tol_lambda: f64,
    pub tol_xi: f64,
    pub max_outer: usize,
    pub epsilon: f64,
    pub mc_n: usize,
    pub seed: u64,
    pub workers: usize,
    pub method: MethodChoice,
    pub out_dir: String,
    pub emit_fields: bool,
    pub emit_samples: bool,
    pub sweep_sigmas: Option<Vec<f64>>,
}

/// Command-line overrides applied before defaults are resolved.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<String>,
}

const KNOWN_KEYS: &[&str] = &[
    "grid.bounds",
    "grid.n",
    "kernel.kind",
    "kernel.length_scale",
    "pde.a0",
    "pde.f",
    "functional.kind",
    "functional.weight",
    "functional.mu",
    "asymptotics.sigma",
    "asymptotics.alpha",
    "asymptotics.kappa",
    "optimizer.tol_lambda",
    "optimizer.tol_xi",
    "optimizer.max_outer",
    "optimizer.epsilon",
    "mc.n",
    "mc.seed",
    "mc.workers",
    "mc.method",
    "output.dir",
    "output.emit_fields",
    "output.emit_samples",
    "sweep.sigmas",
];

/// Splits flat `key = value` text into a map, rejecting malformed lines and
/// duplicates.
pub fn parse_pairs(text: &str) -> Result<HashMap<String, String>> {
    let mut pairs = HashMap::new();
    for (index, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = index + 1;
        let eq = line
            .find('=')
            .ok_or_else(|| CliError::config(format!("line {lineno}"), "expected 'key = value'"))?;
        let key = line[..eq].trim().to_string();
        let value = line[eq + 1..].trim().to_string();
        if key.is_empty() {
            return Err(CliError::config(format!("line {lineno}"), "missing key"));
        }
        if value.is_empty() {
            return Err(CliError::config(key, "empty value"));
        }
        if pairs.insert(key.clone(), value).is_some() {
            return Err(CliError::config(key, "duplicate key"));
        }
    }
    Ok(pairs)
}

/// Resolves defaults, applies overrides, and validates every field.
pub fn resolve(mut pairs: HashMap<String, String>, overrides: &Overrides) -> Result<RunConfig> {
    for key in pairs.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::config(key.clone(), "unknown configuration key"));
        }
    }
    if let Some(seed) = overrides.seed {
        pairs.insert("mc.seed".into(), seed.to_string());
    }
    if let Some(dir) = &overrides.out_dir {
        pairs.insert("output.dir".into(), dir.clone());
    }

    let bounds = parse_bounds(pairs.get("grid.bounds").map_or("0:1", |s| s))?;
    let n = parse_axis_sizes(pairs.get("grid.n").map_or("65", |s| s))?;
    if bounds.len() != n.len() {
        return Err(CliError::config(
            "grid.n",
            format!(
                "dimension mismatch: grid.bounds has {} axes, grid.n has {}",
                bounds.len(),
                n.len()
            ),
        ));
    }
    for (&size, key) in n.iter().zip(std::iter::repeat("grid.n")) {
        if size < 3 {
            return Err(CliError::config(
                key,
                format!("need at least 3 nodes per axis, got {size}"),
            ));
        }
    }

    let kernel_kind = match pairs
        .get("kernel.kind")
        .map_or("squared_exponential", |s| s)
    {
        "squared_exponential" => KernelKind::SquaredExponential,
        "exponential" => KernelKind::Exponential,
        other => {
            return Err(CliError::config(
                "kernel.kind",
                format!("expected squared_exponential or exponential, got '{other}'"),
            ))
        }
    };
    let length_scale = get_f64(&pairs, "kernel.length_scale", 0.5)?;
    if !length_scale.is_finite() || length_scale <= 0.0 {
        return Err(CliError::config(
            "kernel.length_scale",
            format!("must be positive and finite, got {length_scale}"),
        ));
    }

    let functional_kind = match pairs.get("functional.kind").map_or("linear_pde", |s| s) {
        "linear_pde" => FunctionalKind::LinearPde,
        "exp_integral" => FunctionalKind::ExpIntegral,
        other => {
            return Err(CliError::config(
                "functional.kind",
                format!("expected linear_pde or exp_integral, got '{other}'"),
            ))
        }
    };
    match functional_kind {
        FunctionalKind::LinearPde => {
            if pairs.contains_key("functional.mu") {
                return Err(CliError::config(
                    "functional.mu",
                    "only meaningful for functional.kind = exp_integral",
                ));
            }
        }
        FunctionalKind::ExpIntegral => {
            for key in ["pde.a0", "pde.f", "functional.weight"] {
                if pairs.contains_key(key) {
                    return Err(CliError::config(
                        key,
                        "only meaningful for functional.kind = linear_pde",
                    ));
                }
            }
        }
    }
    let a0 = get_expr(&pairs, "pde.a0", "constant:1")?;
    let f = get_expr(&pairs, "pde.f", "constant:1")?;
    let weight = get_expr(&pairs, "functional.weight", "constant:1")?;
    let mu = get_expr(&pairs, "functional.mu", "constant:0")?;

    let sigma = require_f64(&pairs, "asymptotics.sigma")?;
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(CliError::config(
            "asymptotics.sigma",
            format!("must be positive and finite, got {sigma}"),
        ));
    }
    let alpha = require_f64(&pairs, "asymptotics.alpha")?;
    if !(alpha.is_finite() && alpha > 0.0 && alpha < 1.0) {
        return Err(CliError::config(
            "asymptotics.alpha",
            format!("must lie strictly between 0 and 1, got {alpha}"),
        ));
    }
    let kappa = require_f64(&pairs, "asymptotics.kappa")?;
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(CliError::config(
            "asymptotics.kappa",
            format!("must be finite and non-negative, got {kappa}"),
        ));
    }

    let tol_lambda = get_f64(&pairs, "optimizer.tol_lambda", 1e-12)?;
    let tol_xi = get_f64(&pairs, "optimizer.tol_xi", 1e-10)?;
    for (key, value) in [
        ("optimizer.tol_lambda", tol_lambda),
        ("optimizer.tol_xi", tol_xi),
    ] {
        if !(value.is_finite() && value > 0.0) {
            return Err(CliError::config(
                key,
                format!("must be positive, got {value}"),
            ));
        }
    }
    let max_outer = get_usize(&pairs, "optimizer.max_outer", 200)?;
    if max_outer == 0 {
        return Err(CliError::config(
            "optimizer.max_outer",
            "must be at least 1",
        ));
    }
    let epsilon = get_f64(&pairs, "optimizer.epsilon", 0.05)?;
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(CliError::config(
            "optimizer.epsilon",
            format!("must be positive, got {epsilon}"),
        ));
    }

    let mc_n = get_usize(&pairs, "mc.n", 10_000)?;
    if mc_n == 0 {
        return Err(CliError::config("mc.n", "must be at least 1"));
    }
    let seed = get_u64(&pairs, "mc.seed", 0)?;
    let workers = get_usize(&pairs, "mc.workers", 1)?;
    if workers == 0 {
        return Err(CliError::config("mc.workers", "must be at least 1"));
    }
    let method = match pairs.get("mc.method").map_or("importance", |s| s) {
        "crude" => MethodChoice::Crude,
        "importance" => MethodChoice::Importance,
        "both" => MethodChoice::Both,
        other => {
            return Err(CliError::config(
                "mc.method",
                format!("expected crude, importance, or both, got '{other}'"),
            ))
        }
    };

    let out_dir = pairs
        .get("output.dir")
        .cloned()
        .unwrap_or_else(|| ".".into());
    let emit_fields = get_bool(&pairs, "output.emit_fields", true)?;
    let emit_samples = get_bool(&pairs, "output.emit_samples", false)?;

    let sweep_sigmas = match pairs.get("sweep.sigmas") {
        None => None,
        Some(raw) => {
            let mut sigmas = Vec::new();
            for part in raw.split(',') {
                let value: f64 = part.trim().parse().map_err(|_| {
                    CliError::config("sweep.sigmas", format!("invalid number '{}'", part.trim()))
                })?;
                if !(value.is_finite() && value > 0.0) {
                    return Err(CliError::config(
                        "sweep.sigmas",
                        format!("entries must be positive, got {value}"),
                    ));
                }
                sigmas.push(value);
            }
            if sigmas.is_empty() {
                return Err(CliError::config("sweep.sigmas", "empty list"));
            }
            Some(sigmas)
        }
    };

    Ok(RunConfig {
        bounds,
        n,
        kernel_kind,
        length_scale,
        a0,
        f,
        functional_kind,
        weight,
        mu,
        sigma,
        alpha,
        kappa,
        tol_lambda,
        tol_xi,
        max_outer,
        epsilon,
        mc_n,
        seed,
        workers,
        method,
        out_dir,
        emit_fields,
        emit_samples,
        sweep_sigmas,
    })
}

impl RunConfig {
    /// The resolved configuration as sorted key-value pairs; embedded in
    /// every report and reparseable via [`parse_pairs`] + [`resolve`].
    /// Keys irrelevant to the configured functional are omitted so the
    /// block always revalidates.
    pub fn effective_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("grid.bounds".into(), bounds_string(&self.bounds));
        m.insert("grid.n".into(), axis_sizes_string(&self.n));
        m.insert(
            "kernel.kind".into(),
            match self.kernel_kind {
                KernelKind::SquaredExponential => "squared_exponential".into(),
                KernelKind::Exponential => "exponential".into(),
            },
        );
        m.insert("kernel.length_scale".into(), fmt_f64(self.length_scale));
        match self.functional_kind {
            FunctionalKind::LinearPde => {
                m.insert("functional.kind".into(), "linear_pde".into());
                m.insert("functional.weight".into(), self.weight.canonical());
                m.insert("pde.a0".into(), self.a0.canonical());
                m.insert("pde.f".into(), self.f.canonical());
            }
            FunctionalKind::ExpIntegral => {
                m.insert("functional.kind".into(), "exp_integral".into());
                m.insert("functional.mu".into(), self.mu.canonical());
            }
        }
        m.insert("asymptotics.sigma".into(), fmt_f64(self.sigma));
        m.insert("asymptotics.alpha".into(), fmt_f64(self.alpha));
        m.insert("asymptotics.kappa".into(), fmt_f64(self.kappa));
        m.insert("optimizer.tol_lambda".into(), fmt_f64(self.tol_lambda));
        m.insert("optimizer.tol_xi".into(), fmt_f64(self.tol_xi));
        m.insert("optimizer.max_outer".into(), self.max_outer.to_string());
        m.insert("optimizer.epsilon".into(), fmt_f64(self.epsilon));
        m.insert("mc.n".into(), self.mc_n.to_string());
        m.insert("mc.seed".into(), self.seed.to_string());
        m.insert("mc.workers".into(), self.workers.to_string());
        m.insert("mc.method".into(), self.method.as_str().into());
        m.insert("output.dir".into(), self.out_dir.clone());
        m.insert("output.emit_fields".into(), self.emit_fields.to_string());
        m.insert("output.emit_samples".into(), self.emit_samples.to_string());
        if let Some(sigmas) = &self.sweep_sigmas {
            let joined: Vec<String> = sigmas.iter().map(|s| fmt_f64(*s)).collect();
            m.insert("sweep.sigmas".into(), joined.join(","));
        }
        m
    }

    /// Flat text form of [`effective_map`](Self::effective_map).
    pub fn to_flat_text(&self) -> String {
        let mut out = String::new();
        for (key, value) in self.effective_map() {
            out.push_str(&key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        }
        out
    }

    /// Assembles the grid, covariance, and functional this config describes.
    pub fn build_problem(&self) -> Result<Problem> {
        let grid = Grid::new(&self.bounds, &self.n)?;
        let kernel = match self.kernel_kind {
            KernelKind::SquaredExponential => CovarianceKernel::SquaredExponential {
                length_scale: self.length_scale,
            },
            KernelKind::Exponential => CovarianceKernel::Exponential {
                length_scale: self.length_scale,
            },
        };
        let covariance = CovarianceModel::assemble(&grid, kernel)?;
        let problem = match self.functional_kind {
            FunctionalKind::LinearPde => {
                let weight = self.weight.materialize(&grid);
                let a0 = self.a0.materialize(&grid);
                let f = self.f.materialize(&grid);
                Problem::new(
                    grid,
                    covariance,
                    FunctionalSpec::LinearPde { weight },
                    Some(PdeCoefficients { a0, f }),
                )?
            }
            FunctionalKind::ExpIntegral => {
                let mu = self.mu.materialize(&grid);
                Problem::new(grid, covariance, FunctionalSpec::ExpIntegral { mu }, None)?
            }
        };
        Ok(problem)
    }

    /// The prefactor and the tail formula are undefined at `kappa = 0`;
    /// `solve` and `estimate` refuse such configs up front.
    pub fn require_positive_kappa(&self, command: &str) -> Result<()> {
        if self.kappa > 0.0 {
            Ok(())
        } else {
            Err(CliError::config(
                "asymptotics.kappa",
                format!("{command} requires a strictly positive threshold scale"),
            ))
        }
    }
}

/// Shortest decimal form that reparses to the identical bits.
pub fn fmt_f64(value: f64) -> String {
    format!("{value}")
}

fn bounds_string(bounds: &[(f64, f64)]) -> String {
    let parts: Vec<String> = bounds
        .iter()
        .map(|(lo, hi)| format!("{}:{}", fmt_f64(*lo), fmt_f64(*hi)))
        .collect();
    parts.join("x")
}

fn axis_sizes_string(n: &[usize]) -> String {
    let parts: Vec<String> = n.iter().map(|v| v.to_string()).collect();
    parts.join("x")
}

fn parse_bounds(raw: &str) -> Result<Vec<(f64, f64)>> {
    let mut bounds = Vec::new();
    for axis in raw.split('x') {
        let mut parts = axis.split(':');
        let (lo, hi) = match (parts.next(), parts.next(), parts.next()) {
            (Some(lo), Some(hi), None) => (lo.trim(), hi.trim()),
            _ => {
                return Err(CliError::config(
                    "grid.bounds",
                    format!("expected lo:hi per axis joined by 'x', got '{raw}'"),
                ))
            }
        };
        let lo: f64 = lo
            .parse()
            .map_err(|_| CliError::config("grid.bounds", format!("invalid number '{lo}'")))?;
        let hi: f64 = hi
            .parse()
            .map_err(|_| CliError::config("grid.bounds", format!("invalid number '{hi}'")))?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(CliError::config(
                "grid.bounds",
                format!("need finite lo < hi, got {lo}:{hi}"),
            ));
        }
        bounds.push((lo, hi));
    }
    if bounds.is_empty() || bounds.len() > 2 {
        return Err(CliError::config(
            "grid.bounds",
            format!("supported dimensions are 1 and 2, got {}", bounds.len()),
        ));
    }
    Ok(bounds)
}

fn parse_axis_sizes(raw: &str) -> Result<Vec<usize>> {
    let mut sizes = Vec::new();
    for part in raw.split('x') {
        let size: usize = part.trim().parse().map_err(|_| {
            CliError::config("grid.n", format!("invalid node count '{}'", part.trim()))
        })?;
        sizes.push(size);
    }
    Ok(sizes)
}

fn require_f64(pairs: &HashMap<String, String>, key: &str) -> Result<f64> {
    let raw = pairs
        .get(key)
        .ok_or_else(|| CliError::config(key, "required key is missing"))?;
    raw.parse()
        .map_err(|_| CliError::config(key, format!("invalid number '{raw}'")))
}

fn get_f64(pairs: &HashMap<String, String>, key: &str, default: f64) -> Result<f64> {
    match pairs.get(key) {
        None => Ok(default),
        Some(raw) => raw
            .parse()
            .map_err(|_| CliError::config(key, format!("invalid number '{raw}'"))),
    }
}

fn get_usize(pairs: &HashMap<String, String>, key: &str, default: usize) -> Result<usize> {
    match pairs.get(key) {
        None => Ok(default),
        Some(raw) => raw
            .parse()
            .map_err(|_| CliError::config(key, format!("invalid count '{raw}'"))),
    }
}

fn get_u64(pairs: &HashMap<String, String>, key: &str, default: u64) -> Result<u64> {
    match pairs.get(key) {
        None => Ok(default),
        Some(raw) => raw
            .parse()
            .map_err(|_| CliError::config(key, format!("invalid seed '{raw}'"))),
    }
}

fn get_bool(pairs: &HashMap<String, String>, key: &str, default: bool) -> Result<bool> {
    match pairs.get(key).map(|s| s.as_str()) {
        None => Ok(default),
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        Some(other) => Err(CliError::config(
            key,
            format!("expected true or false, got '{other}'"),
        )),
    }
}

fn get_expr(pairs: &HashMap<String, String>, key: &str, default: &str) -> Result<FieldExpr> {
    let raw = pairs.get(key).map_or(default, |s| s.as_str());
    FieldExpr::parse(raw).map_err(|e| CliError::config(key, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> HashMap<String, String> {
        parse_pairs("asymptotics.sigma = 0.1\nasymptotics.alpha = 0.5\nasymptotics.kappa = 1\n")
            .unwrap()
    }

    #[test]
    fn defaults_resolve_and_roundtrip() {
        let cfg = resolve(minimal(), &Overrides::default()).unwrap();
        assert_eq!(cfg.n, vec![65]);
        assert_eq!(cfg.bounds, vec![(0.0, 1.0)]);
        assert_eq!(cfg.method, MethodChoice::Importance);
        assert!(cfg.emit_fields && !cfg.emit_samples);
        // effective text reparses to an identical effective map
        let text = cfg.to_flat_text();
        let again = resolve(parse_pairs(&text).unwrap(), &Overrides::default()).unwrap();
        assert_eq!(cfg.effective_map(), again.effective_map());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let pairs = parse_pairs(
            "# leading comment\n\nasymptotics.sigma = 0.1  # trailing\nasymptotics.alpha = 0.5\nasymptotics.kappa = 0\n",
        )
        .unwrap();
        let cfg = resolve(pairs, &Overrides::default()).unwrap();
        assert_eq!(cfg.sigma, 0.1);
        assert_eq!(cfg.kappa, 0.0);
    }

    #[test]
    fn unknown_and_duplicate_keys_are_rejected() {
        let mut pairs = minimal();
        pairs.insert("grid.shape".into(), "round".into());
        let err = resolve(pairs, &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("grid.shape"));
        let err = parse_pairs("mc.n = 5\nmc.n = 6\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn alpha_validation_names_the_key() {
        let mut pairs = minimal();
        pairs.insert("asymptotics.alpha".into(), "1.5".into());
        let err = resolve(pairs, &Overrides::default()).unwrap_err();
        let message = err.to_string();
        assert!(message.contains("asymptotics.alpha"), "{message}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn functional_kind_gates_its_keys() {
        let mut pairs = minimal();
        pairs.insert("functional.kind".into(), "exp_integral".into());
        pairs.insert("pde.a0".into(), "constant:1".into());
        let err = resolve(pairs, &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("pde.a0"));

        let mut pairs = minimal();
        pairs.insert("functional.mu".into(), "constant:0".into());
        let err = resolve(pairs, &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("functional.mu"));
    }

    #[test]
    fn two_dimensional_grids_parse() {
        let mut pairs = minimal();
        pairs.insert("grid.bounds".into(), "0:1x0:2".into());
        pairs.insert("grid.n".into(), "9x17".into());
        let cfg = resolve(pairs, &Overrides::default()).unwrap();
        assert_eq!(cfg.bounds, vec![(0.0, 1.0), (0.0, 2.0)]);
        assert_eq!(cfg.n, vec![9, 17]);
        let text = cfg.to_flat_text();
        let again = resolve(parse_pairs(&text).unwrap(), &Overrides::default()).unwrap();
        assert_eq!(cfg.effective_map(), again.effective_map());
    }

    #[test]
    fn overrides_land_in_the_effective_map() {
        let overrides = Overrides {
            seed: Some(99),
            out_dir: Some("/tmp/out".into()),
        };
        let cfg = resolve(minimal(), &overrides).unwrap();
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.out_dir, "/tmp/out");
        let map = cfg.effective_map();
        assert_eq!(map["mc.seed"], "99");
        assert_eq!(map["output.dir"], "/tmp/out");
    }

    #[test]
    fn sweep_list_parses_and_validates() {
        let mut pairs = minimal();
        pairs.insert("sweep.sigmas".into(), "0.2, 0.1, 0.05".into());
        let cfg = resolve(pairs, &Overrides::default()).unwrap();
        assert_eq!(cfg.sweep_sigmas, Some(vec![0.2, 0.1, 0.05]));

        let mut pairs = minimal();
        pairs.insert("sweep.sigmas".into(), "0.2, -0.1".into());
        assert!(resolve(pairs, &Overrides::default()).is_err());
    }

    #[test]
    fn float_formatting_roundtrips_exactly() {
        for v in [0.1, 1e-12, 2.0 / 3.0, 123456.789, 5e-324] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v} -> {s}");
        }
    }

    #[test]
    fn problem_builds_for_both_functionals() {
        let cfg = resolve(minimal(), &Overrides::default()).unwrap();
        let p = cfg.build_problem().unwrap();
        assert!(p.k0() > 0.0);

        let mut pairs = minimal();
        pairs.insert("functional.kind".into(), "exp_integral".into());
        pairs.insert("grid.n".into(), "17".into());
        let cfg = resolve(pairs, &Overrides::default()).unwrap();
        let p = cfg.build_problem().unwrap();
        assert!(p.u0().is_none());
    }
}
