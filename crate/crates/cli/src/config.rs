//! Run configuration: a TOML document describing one command.
//!
//! Parsing never stops at the first problem. Every error is collected with
//! the line and column of the offending key or table, and reported together.

use std::fmt;
use std::ops::Range;
use std::path::PathBuf;
use std::sync::Arc;

use spectral_fields::grid::{DEFAULT_J_HI, DEFAULT_J_LO, DEFAULT_NODES};
use spectral_fields::verification::DEFAULT_CONFIDENCE;
use spectral_fields::{Error as CoreError, FrequencyGrid, Modulation, NormFunctional, SpatialGrid, SpectralDensity};
use toml_edit::{Document, Item, Key, TableLike, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    DensityCheck,
    Simulate,
    Covariance,
    VerifyAnderson,
    VerifyCoupling,
    VerifyComparison,
    EstimateHurst,
}

impl CommandKind {
    pub const ALL: [CommandKind; 7] = [
        CommandKind::DensityCheck,
        CommandKind::Simulate,
        CommandKind::Covariance,
        CommandKind::VerifyAnderson,
        CommandKind::VerifyCoupling,
        CommandKind::VerifyComparison,
        CommandKind::EstimateHurst,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CommandKind::DensityCheck => "density-check",
            CommandKind::Simulate => "simulate",
            CommandKind::Covariance => "covariance",
            CommandKind::VerifyAnderson => "verify-anderson",
            CommandKind::VerifyCoupling => "verify-coupling",
            CommandKind::VerifyComparison => "verify-comparison",
            CommandKind::EstimateHurst => "estimate-hurst",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    fn default_replicas(self) -> usize {
        match self {
            CommandKind::VerifyCoupling => 5_000,
            CommandKind::EstimateHurst => 100,
            _ => 10_000,
        }
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstantSpec {
    Value(f64),
    /// Smallest constant found on the frequency grid.
    Auto,
}

impl fmt::Display for ConstantSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstantSpec::Value(c) => write!(f, "{c}"),
            ConstantSpec::Auto => f.write_str("auto"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMethod {
    Spectral,
    Exact,
}

/// Deterministic shift `g` for the shift inequality.
#[derive(Debug, Clone, PartialEq)]
pub enum ShiftSpec {
    /// `g(x) = slope · x`.
    Linear(Vec<f64>),
    /// `g(x) = value`.
    Constant(f64),
}

impl ShiftSpec {
    pub fn values(&self, grid: &SpatialGrid) -> Vec<f64> {
        (0..grid.len())
            .map(|i| match self {
                ShiftSpec::Linear(slope) => slope.iter().zip(grid.point(i)).map(|(a, x)| a * x).sum(),
                ShiftSpec::Constant(v) => *v,
            })
            .collect()
    }
}

impl fmt::Display for ShiftSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShiftSpec::Linear(slope) => write!(f, "linear(slope={slope:?})"),
            ShiftSpec::Constant(v) => write!(f, "constant({v})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    DensityCheck { density: SpectralDensity, other: Option<SpectralDensity>, constant: Option<ConstantSpec> },
    Simulate { density: SpectralDensity, samples: usize, method: SampleMethod },
    Covariance { density: SpectralDensity },
    VerifyAndersonSum { first: SpectralDensity, second: SpectralDensity },
    VerifyAndersonShift { density: SpectralDensity, shift: ShiftSpec },
    VerifyCoupling { f_x: SpectralDensity, f_y: SpectralDensity, constant: ConstantSpec },
    VerifyComparison { f_x: SpectralDensity, f_y: SpectralDensity, constant: ConstantSpec },
    EstimateHurst { density: SpectralDensity },
}

/// Radii of a verification campaign.
#[derive(Debug, Clone, PartialEq)]
pub enum RadiiSpec {
    Fixed(Vec<f64>),
    /// Pilot quantiles of the left-hand norm.
    Quantiles(Vec<f64>),
}

pub const DEFAULT_RADII: [f64; 3] = [0.25, 0.5, 1.0];
pub const DEFAULT_QUANTILES: [f64; 5] = [0.05, 0.275, 0.5, 0.725, 0.95];

/// Fully validated configuration with every default resolved.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub kind: CommandKind,
    pub command: Command,
    pub seed: u64,
    pub frequency_grid: FrequencyGrid,
    pub spatial_grid: Arc<SpatialGrid>,
    pub replicas: usize,
    pub confidence: f64,
    pub radii: RadiiSpec,
    pub norm: NormFunctional,
    pub output: Option<PathBuf>,
    /// Verbatim configuration text.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

struct Ctx<'a> {
    text: &'a str,
    errors: Vec<ConfigError>,
}

impl Ctx<'_> {
    fn error(&mut self, span: Option<Range<usize>>, message: impl Into<String>) {
        let offset = span.map_or(0, |s| s.start).min(self.text.len());
        let before = &self.text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        self.errors.push(ConfigError { line, column, message: message.into() });
    }
}

/// A table (standard or inline) with the span used for errors about it.
#[derive(Clone, Copy)]
struct Node<'a> {
    table: &'a dyn TableLike,
    /// Byte offset where the table starts.
    span: Option<usize>,
    path: &'a str,
}

impl<'a> Node<'a> {
    fn here(&self) -> Option<Range<usize>> {
        self.span.map(|s| s..s)
    }

    fn entry(&self, key: &str) -> Option<(&'a Key, &'a Item)> {
        self.table.get_key_value(key)
    }

    fn key_span(&self, key: &str) -> Option<Range<usize>> {
        self.entry(key).and_then(|(k, item)| k.span().or_else(|| item.span())).or_else(|| self.here())
    }

    fn value_span(&self, key: &str) -> Option<Range<usize>> {
        self.entry(key).and_then(|(_, item)| item.span()).or_else(|| self.here())
    }

    fn qualified(&self, key: &str) -> String {
        if self.path.is_empty() { key.to_string() } else { format!("{}.{}", self.path, key) }
    }

    fn check_keys(&self, ctx: &mut Ctx, allowed: &[&str]) {
        for (key, _) in self.table.iter() {
            if !allowed.contains(&key) {
                ctx.error(self.key_span(key), format!("unknown key `{}`", self.qualified(key)));
            }
        }
    }

    fn f64(&self, ctx: &mut Ctx, key: &str) -> Option<f64> {
        let (_, item) = self.entry(key)?;
        match item.as_float().or_else(|| item.as_integer().map(|i| i as f64)) {
            Some(v) => Some(v),
            None => {
                ctx.error(self.value_span(key), format!("`{}` must be a number, got {}", self.qualified(key), item.type_name()));
                None
            }
        }
    }

    fn required_f64(&self, ctx: &mut Ctx, key: &str) -> Option<f64> {
        if self.entry(key).is_none() {
            ctx.error(self.here(), format!("missing `{}`", self.qualified(key)));
            return None;
        }
        self.f64(ctx, key)
    }

    fn integer(&self, ctx: &mut Ctx, key: &str) -> Option<i64> {
        let (_, item) = self.entry(key)?;
        match item.as_integer() {
            Some(v) => Some(v),
            None => {
                ctx.error(self.value_span(key), format!("`{}` must be an integer, got {}", self.qualified(key), item.type_name()));
                None
            }
        }
    }

    fn count(&self, ctx: &mut Ctx, key: &str, min: i64) -> Option<usize> {
        let v = self.integer(ctx, key)?;
        if v < min {
            ctx.error(self.value_span(key), format!("`{}` must be at least {min}, got {v}", self.qualified(key)));
            return None;
        }
        Some(v as usize)
    }

    fn str(&self, ctx: &mut Ctx, key: &str) -> Option<&'a str> {
        let (_, item) = self.entry(key)?;
        match item.as_str() {
            Some(v) => Some(v),
            None => {
                ctx.error(self.value_span(key), format!("`{}` must be a string, got {}", self.qualified(key), item.type_name()));
                None
            }
        }
    }

    fn f64_array(&self, ctx: &mut Ctx, key: &str) -> Option<Vec<f64>> {
        let (_, item) = self.entry(key)?;
        let Some(array) = item.as_array() else {
            ctx.error(self.value_span(key), format!("`{}` must be an array of numbers", self.qualified(key)));
            return None;
        };
        let mut out = Vec::with_capacity(array.len());
        for v in array.iter() {
            match v.as_float().or_else(|| v.as_integer().map(|i| i as f64)) {
                Some(x) => out.push(x),
                None => {
                    ctx.error(v.span(), format!("`{}` entries must be numbers, got {}", self.qualified(key), v.type_name()));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn child(&self, ctx: &mut Ctx, key: &'a str) -> Option<Node<'a>> {
        let (_, item) = self.entry(key)?;
        match item.as_table_like() {
            Some(table) => Some(Node { table, span: item.span().or_else(|| self.key_span(key)).map(|r| r.start), path: key }),
            None => {
                ctx.error(self.value_span(key), format!("`{}` must be a table", self.qualified(key)));
                None
            }
        }
    }
}

const FAMILIES: &str = "zero, brownian, fbm, power-law, perturbed, band-limited, sum, scalar-multiple";

/// Key reported for a parameter-validation failure from the core library.
fn key_for(name: &str) -> &str {
    match name {
        "H" => "hurst",
        "c" => "coefficient",
        "band" => "lo",
        other => other,
    }
}

fn report(ctx: &mut Ctx, node: &Node, err: CoreError) {
    let span = match &err {
        CoreError::InvalidParameter { name, .. } => node.value_span(key_for(name)),
        _ => node.here(),
    };
    let message = match err {
        CoreError::InvalidParameter { reason, .. } => format!("{}: {reason}", node.path),
        other => format!("{}: {other}", node.path),
    };
    ctx.error(span, message);
}

fn density(ctx: &mut Ctx, node: Node) -> Option<SpectralDensity> {
    let Some(family) = node.str(ctx, "family") else {
        if node.entry("family").is_none() {
            ctx.error(node.here(), format!("`{}` needs a `family` ({FAMILIES})", node.path));
        }
        return None;
    };
    let dim = match node.entry("dim") {
        Some(_) => node.count(ctx, "dim", 1)?,
        None => 1,
    };
    let built = match family {
        "zero" => {
            node.check_keys(ctx, &["family", "dim"]);
            SpectralDensity::zero(dim)
        }
        "brownian" => {
            node.check_keys(ctx, &["family", "dim"]);
            if dim != 1 {
                ctx.error(node.value_span("dim"), format!("{}: brownian is defined for dim = 1 only", node.path));
                return None;
            }
            Ok(SpectralDensity::brownian())
        }
        "fbm" => {
            node.check_keys(ctx, &["family", "dim", "hurst"]);
            SpectralDensity::fbm(dim, node.required_f64(ctx, "hurst")?)
        }
        "power-law" => {
            node.check_keys(ctx, &["family", "dim", "hurst", "decay", "coefficient"]);
            let coeff = match node.entry("coefficient") {
                Some(_) => node.f64(ctx, "coefficient")?,
                None => 1.0,
            };
            match (node.entry("hurst").is_some(), node.entry("decay").is_some()) {
                (true, false) => SpectralDensity::power_law(dim, node.f64(ctx, "hurst")?, coeff),
                (false, true) => SpectralDensity::power_law_with_decay(dim, node.f64(ctx, "decay")?, coeff),
                _ => {
                    ctx.error(node.here(), format!("{}: power-law needs exactly one of `hurst` or `decay`", node.path));
                    return None;
                }
            }
        }
        "perturbed" => {
            node.check_keys(ctx, &["family", "base", "offset", "amplitude", "frequency", "divisor"]);
            let mut get = |key: &str, default: f64| match node.entry(key) {
                Some(_) => node.f64(ctx, key),
                None => Some(default),
            };
            let modulation = (get("offset", 2.0), get("amplitude", 1.0), get("frequency", 1.0), get("divisor", 3.0));
            let base = sub_density(ctx, node, "base");
            let (Some(o), Some(a), Some(f), Some(d)) = modulation else {
                return None;
            };
            let modulation = match Modulation::new(o, a, f, d) {
                Ok(m) => m,
                Err(e) => {
                    report(ctx, &node, e);
                    return None;
                }
            };
            SpectralDensity::perturbed(base?, modulation)
        }
        "band-limited" => {
            node.check_keys(ctx, &["family", "dim", "lo", "hi", "level"]);
            let lo = node.required_f64(ctx, "lo");
            let hi = node.required_f64(ctx, "hi");
            let level = node.required_f64(ctx, "level");
            SpectralDensity::band_limited(dim, lo?, hi?, level?)
        }
        "sum" => {
            node.check_keys(ctx, &["family", "terms"]);
            let terms = sum_terms(ctx, node)?;
            SpectralDensity::sum(terms)
        }
        "scalar-multiple" => {
            node.check_keys(ctx, &["family", "factor", "base"]);
            let factor = node.required_f64(ctx, "factor");
            let base = sub_density(ctx, node, "base");
            SpectralDensity::scaled(factor?, base?)
        }
        other => {
            ctx.error(node.value_span("family"), format!("{}: unknown family `{other}` (expected one of {FAMILIES})", node.path));
            return None;
        }
    };
    match built {
        Ok(f) => Some(f),
        Err(e) => {
            report(ctx, &node, e);
            None
        }
    }
}

fn sub_density(ctx: &mut Ctx, node: Node, key: &'static str) -> Option<SpectralDensity> {
    if node.entry(key).is_none() {
        ctx.error(node.here(), format!("{}: missing `{key}` density", node.path));
        return None;
    }
    let child = node.child(ctx, key)?;
    density(ctx, child)
}

fn sum_terms(ctx: &mut Ctx, node: Node) -> Option<Vec<SpectralDensity>> {
    let Some((_, item)) = node.entry("terms") else {
        ctx.error(node.here(), format!("{}: missing `terms`", node.path));
        return None;
    };
    let mut tables: Vec<(&dyn TableLike, Option<Range<usize>>)> = Vec::new();
    if let Some(aot) = item.as_array_of_tables() {
        tables.extend(aot.iter().map(|t| (t as &dyn TableLike, t.span())));
    } else if let Some(array) = item.as_array() {
        for v in array.iter() {
            match v {
                Value::InlineTable(t) => tables.push((t as &dyn TableLike, t.span())),
                other => {
                    ctx.error(other.span(), format!("{}: `terms` entries must be tables", node.path));
                    return None;
                }
            }
        }
    } else {
        ctx.error(node.value_span("terms"), format!("{}: `terms` must be an array of tables", node.path));
        return None;
    }
    if tables.is_empty() {
        ctx.error(node.value_span("terms"), format!("{}: `terms` must not be empty", node.path));
        return None;
    }
    let mut out = Vec::new();
    let mut ok = true;
    for (table, span) in tables {
        match density(ctx, Node { table, span: span.map(|r| r.start), path: "terms" }) {
            Some(f) => out.push(f),
            None => ok = false,
        }
    }
    ok.then_some(out)
}

fn frequency_grid(ctx: &mut Ctx, root: Node, dim: usize) -> Option<FrequencyGrid> {
    let (mut j_lo, mut j_hi, mut nodes) = (DEFAULT_J_LO, DEFAULT_J_HI, DEFAULT_NODES);
    let mut span = None;
    if root.entry("frequency_grid").is_some() {
        let node = root.child(ctx, "frequency_grid")?;
        node.check_keys(ctx, &["j_lo", "j_hi", "nodes"]);
        span = node.here();
        if node.entry("j_lo").is_some() {
            j_lo = node.integer(ctx, "j_lo")? as i32;
        }
        if node.entry("j_hi").is_some() {
            j_hi = node.integer(ctx, "j_hi")? as i32;
        }
        if node.entry("nodes").is_some() {
            nodes = node.count(ctx, "nodes", 2)?;
        }
    }
    match FrequencyGrid::new(dim, j_lo, j_hi, nodes) {
        Ok(g) => Some(g),
        Err(e) => {
            ctx.error(span, format!("frequency_grid: {e}"));
            None
        }
    }
}

fn default_points_per_axis(kind: CommandKind, dim: usize) -> usize {
    match (kind, dim) {
        (CommandKind::EstimateHurst, _) => 4096,
        (CommandKind::Covariance | CommandKind::VerifyCoupling, 1) => 8,
        (CommandKind::Covariance | CommandKind::VerifyCoupling, _) => 3,
        (_, 1) => 65,
        (_, 2) => 17,
        _ => 9,
    }
}

fn spatial_grid(ctx: &mut Ctx, root: Node, kind: CommandKind, dim: usize) -> Option<SpatialGrid> {
    let mut n = default_points_per_axis(kind, dim);
    let mut span = None;
    if root.entry("spatial_grid").is_some() {
        let node = root.child(ctx, "spatial_grid")?;
        node.check_keys(ctx, &["n", "points"]);
        span = node.here();
        match (node.entry("n").is_some(), node.entry("points").is_some()) {
            (true, true) => {
                ctx.error(span, "spatial_grid: give either `n` or `points`, not both");
                return None;
            }
            (true, false) => n = node.count(ctx, "n", 2)?,
            (false, true) => {
                if !matches!(kind, CommandKind::Covariance | CommandKind::Simulate) {
                    ctx.error(node.key_span("points"), format!("spatial_grid: `points` is only supported by covariance and simulate, not {kind}"));
                    return None;
                }
                let (_, item) = node.entry("points")?;
                let mut points = Vec::new();
                for v in item.as_array().into_iter().flat_map(|a| a.iter()) {
                    let coords: Option<Vec<f64>> = v
                        .as_array()
                        .map(|a| a.iter().map(|c| c.as_float().or_else(|| c.as_integer().map(|i| i as f64))).collect())
                        .unwrap_or(None);
                    match coords {
                        Some(c) if c.len() == dim && c.iter().all(|x| x.is_finite()) => points.push(c),
                        _ => {
                            ctx.error(v.span(), format!("spatial_grid: each point must be an array of {dim} numbers"));
                            return None;
                        }
                    }
                }
                if points.is_empty() {
                    ctx.error(node.value_span("points"), "spatial_grid: `points` must be a non-empty array of points");
                    return None;
                }
                return match SpatialGrid::from_points(&points) {
                    Ok(g) => Some(g),
                    Err(e) => {
                        ctx.error(span, format!("spatial_grid: {e}"));
                        None
                    }
                };
            }
            (false, false) => {}
        }
    }
    match SpatialGrid::uniform(dim, n) {
        Ok(g) => Some(g),
        Err(e) => {
            ctx.error(span, format!("spatial_grid: {e}"));
            None
        }
    }
}

fn norm(ctx: &mut Ctx, root: Node) -> Option<NormFunctional> {
    if root.entry("norm").is_none() {
        return Some(NormFunctional::Sup);
    }
    let node = root.child(ctx, "norm")?;
    node.check_keys(ctx, &["kind", "alpha", "budget"]);
    match node.str(ctx, "kind").unwrap_or("sup") {
        "sup" => Some(NormFunctional::Sup),
        "holder" => {
            let alpha = node.required_f64(ctx, "alpha")?;
            if !(alpha > 0.0 && alpha <= 1.0) {
                ctx.error(node.value_span("alpha"), format!("norm.alpha: must lie in (0,1], got {alpha}"));
                return None;
            }
            let budget = match node.entry("budget") {
                Some(_) => node.count(ctx, "budget", 1)?,
                None => spectral_fields::banach_norms::DEFAULT_PAIR_BUDGET,
            };
            match NormFunctional::holder_with_budget(alpha, budget) {
                Ok(n) => Some(n),
                Err(e) => {
                    report(ctx, &node, e);
                    None
                }
            }
        }
        other => {
            ctx.error(node.value_span("kind"), format!("norm: unknown kind `{other}` (expected sup or holder)"));
            None
        }
    }
}

struct MonteCarlo {
    replicas: usize,
    confidence: f64,
    radii: RadiiSpec,
}

fn monte_carlo(ctx: &mut Ctx, root: Node, kind: CommandKind) -> Option<MonteCarlo> {
    let default_radii = match kind {
        CommandKind::VerifyComparison => RadiiSpec::Quantiles(DEFAULT_QUANTILES.to_vec()),
        _ => RadiiSpec::Fixed(DEFAULT_RADII.to_vec()),
    };
    let mut mc = MonteCarlo { replicas: kind.default_replicas(), confidence: DEFAULT_CONFIDENCE, radii: default_radii };
    if root.entry("monte_carlo").is_none() {
        return Some(mc);
    }
    let node = root.child(ctx, "monte_carlo")?;
    node.check_keys(ctx, &["replicas", "confidence", "radii", "quantiles"]);
    let mut ok = true;
    if node.entry("replicas").is_some() {
        match node.count(ctx, "replicas", spectral_fields::verification::MIN_REPLICAS as i64) {
            Some(n) => mc.replicas = n,
            None => ok = false,
        }
    }
    if node.entry("confidence").is_some() {
        match node.f64(ctx, "confidence") {
            Some(c) if c > 0.0 && c < 1.0 => mc.confidence = c,
            Some(c) => {
                ctx.error(node.value_span("confidence"), format!("monte_carlo.confidence must lie in (0,1), got {c}"));
                ok = false;
            }
            None => ok = false,
        }
    }
    match (node.entry("radii").is_some(), node.entry("quantiles").is_some()) {
        (true, true) => {
            ctx.error(node.here(), "monte_carlo: give either `radii` or `quantiles`, not both");
            ok = false;
        }
        (true, false) => match node.f64_array(ctx, "radii") {
            Some(r) if r.is_empty() || r.iter().any(|x| !(*x > 0.0 && x.is_finite())) => {
                ctx.error(node.value_span("radii"), "monte_carlo.radii must be a non-empty list of positive numbers");
                ok = false;
            }
            Some(r) if r.windows(2).any(|w| w[0] > w[1]) => {
                ctx.error(node.value_span("radii"), "monte_carlo.radii must be sorted increasingly");
                ok = false;
            }
            Some(r) => mc.radii = RadiiSpec::Fixed(r),
            None => ok = false,
        },
        (false, true) => {
            if kind != CommandKind::VerifyComparison {
                ctx.error(node.key_span("quantiles"), format!("monte_carlo.quantiles is only supported by verify-comparison, not {kind}"));
                ok = false;
            } else {
                match node.f64_array(ctx, "quantiles") {
                    Some(q) if !q.is_empty() && q.iter().all(|p| *p > 0.0 && *p <= 1.0) => mc.radii = RadiiSpec::Quantiles(q),
                    Some(_) => {
                        ctx.error(node.value_span("quantiles"), "monte_carlo.quantiles must be a non-empty list of levels in (0,1]");
                        ok = false;
                    }
                    None => ok = false,
                }
            }
        }
        (false, false) => {}
    }
    ok.then_some(mc)
}

fn constant(ctx: &mut Ctx, root: Node, required: bool, kind: CommandKind) -> Option<Option<ConstantSpec>> {
    let Some((_, item)) = root.entry("constant") else {
        if required {
            ctx.error(
                None,
                format!("{kind} needs the domination constant: set `constant = <C>` or `constant = \"auto\"` to estimate the smallest one"),
            );
            return None;
        }
        return Some(None);
    };
    if let Some(s) = item.as_str() {
        if s == "auto" {
            return Some(Some(ConstantSpec::Auto));
        }
        ctx.error(root.value_span("constant"), format!("`constant` must be a positive number or \"auto\", got \"{s}\""));
        return None;
    }
    match root.f64(ctx, "constant") {
        Some(c) if c > 0.0 && c.is_finite() => Some(Some(ConstantSpec::Value(c))),
        Some(c) => {
            ctx.error(root.value_span("constant"), format!("`constant` must be a positive number, got {c}"));
            None
        }
        None => None,
    }
}

fn shift(ctx: &mut Ctx, root: Node, dim: usize) -> Option<ShiftSpec> {
    let node = root.child(ctx, "shift")?;
    node.check_keys(ctx, &["kind", "slope", "value"]);
    match node.str(ctx, "kind") {
        Some("linear") => {
            let slope = if node.entry("slope").is_some() {
                node.f64_array(ctx, "slope")
            } else {
                ctx.error(node.here(), "shift: linear shift needs `slope`");
                None
            }?;
            if slope.len() != dim || slope.iter().any(|v| !v.is_finite()) {
                ctx.error(node.value_span("slope"), format!("shift.slope must list {dim} finite numbers"));
                return None;
            }
            Some(ShiftSpec::Linear(slope))
        }
        Some("constant") => {
            let v = node.required_f64(ctx, "value")?;
            Some(ShiftSpec::Constant(v))
        }
        Some(other) => {
            ctx.error(node.value_span("kind"), format!("shift: unknown kind `{other}` (expected linear or constant)"));
            None
        }
        None => {
            if node.entry("kind").is_none() {
                ctx.error(node.here(), "shift: missing `kind` (linear or constant)");
            }
            None
        }
    }
}

fn top_density(ctx: &mut Ctx, root: Node, key: &'static str) -> Option<SpectralDensity> {
    if root.entry(key).is_none() {
        ctx.error(None, format!("missing `[{key}]` table"));
        return None;
    }
    let node = root.child(ctx, key)?;
    density(ctx, node)
}

/// Tables and keys each command accepts besides the shared ones.
fn command_keys(kind: CommandKind) -> &'static [&'static str] {
    match kind {
        CommandKind::DensityCheck => &["density", "density_2", "constant"],
        CommandKind::Simulate => &["density", "samples", "method"],
        CommandKind::Covariance => &["density"],
        CommandKind::VerifyAnderson => &["density", "density_2", "shift", "monte_carlo", "norm"],
        CommandKind::VerifyCoupling => &["f_x", "f_y", "constant", "monte_carlo"],
        CommandKind::VerifyComparison => &["f_x", "f_y", "constant", "monte_carlo", "norm"],
        CommandKind::EstimateHurst => &["density", "monte_carlo"],
    }
}

const SHARED_KEYS: [&str; 5] = ["command", "seed", "output", "frequency_grid", "spatial_grid"];

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    let mut ctx = Ctx { text, errors: Vec::new() };
    let doc = match Document::parse(text) {
        Ok(doc) => doc,
        Err(e) => {
            ctx.error(e.span(), format!("invalid TOML: {}", e.message()));
            return Err(ConfigErrors(ctx.errors));
        }
    };
    let root = Node { table: doc.as_table(), span: None, path: "" };

    let kind = match root.str(&mut ctx, "command") {
        Some(name) => match CommandKind::parse(name) {
            Some(k) => Some(k),
            None => {
                let names: Vec<&str> = CommandKind::ALL.iter().map(|c| c.name()).collect();
                ctx.error(root.value_span("command"), format!("unknown command `{name}` (expected one of {})", names.join(", ")));
                None
            }
        },
        None => {
            if root.entry("command").is_none() {
                ctx.error(None, "missing `command`");
            }
            None
        }
    };

    let seed = match root.entry("seed") {
        None => {
            ctx.error(None, "missing `seed`: an explicit master seed is mandatory");
            None
        }
        Some(_) => match root.integer(&mut ctx, "seed") {
            Some(s) if s >= 0 => Some(s as u64),
            Some(s) => {
                ctx.error(root.value_span("seed"), format!("`seed` must be a nonnegative integer, got {s}"));
                None
            }
            None => None,
        },
    };

    let output = root.entry("output").is_some().then(|| root.str(&mut ctx, "output").map(PathBuf::from)).flatten();

    let Some(kind) = kind else {
        return Err(ConfigErrors(ctx.errors));
    };
    let mut allowed: Vec<&str> = SHARED_KEYS.to_vec();
    allowed.extend_from_slice(command_keys(kind));
    for (key, _) in root.table.iter() {
        if !allowed.contains(&key) {
            let message = if command_keys_any().contains(&key) {
                format!("`{key}` is not used by {kind}")
            } else {
                format!("unknown key `{key}`")
            };
            ctx.error(root.key_span(key), message);
        }
    }

    let command = match kind {
        CommandKind::DensityCheck => {
            let density = top_density(&mut ctx, root, "density");
            let other = if root.entry("density_2").is_some() { top_density(&mut ctx, root, "density_2").map(Some) } else { Some(None) };
            let constant = constant(&mut ctx, root, false, kind);
            if matches!(constant, Some(Some(_))) && matches!(other, Some(None)) {
                ctx.error(root.key_span("constant"), "`constant` needs a second density `[density_2]` to compare against");
            }
            match (density, other, constant) {
                (Some(density), Some(other), Some(constant)) => Some(Command::DensityCheck { density, other, constant }),
                _ => None,
            }
        }
        CommandKind::Simulate => {
            let density = top_density(&mut ctx, root, "density");
            let samples = if root.entry("samples").is_some() { root.count(&mut ctx, "samples", 1) } else { Some(1) };
            let method = match root.entry("method").map(|_| root.str(&mut ctx, "method")) {
                None => Some(SampleMethod::Spectral),
                Some(Some("spectral")) => Some(SampleMethod::Spectral),
                Some(Some("exact")) => Some(SampleMethod::Exact),
                Some(Some(other)) => {
                    ctx.error(root.value_span("method"), format!("unknown method `{other}` (expected spectral or exact)"));
                    None
                }
                Some(None) => None,
            };
            match (density, samples, method) {
                (Some(density), Some(samples), Some(method)) => Some(Command::Simulate { density, samples, method }),
                _ => None,
            }
        }
        CommandKind::Covariance => top_density(&mut ctx, root, "density").map(|density| Command::Covariance { density }),
        CommandKind::VerifyAnderson => {
            let density = top_density(&mut ctx, root, "density");
            match (root.entry("density_2").is_some(), root.entry("shift").is_some()) {
                (true, false) => {
                    let second = top_density(&mut ctx, root, "density_2");
                    match (density, second) {
                        (Some(first), Some(second)) => Some(Command::VerifyAndersonSum { first, second }),
                        _ => None,
                    }
                }
                (false, true) => {
                    let dim = density.as_ref().map_or(1, |d| d.dim());
                    let shift = shift(&mut ctx, root, dim);
                    match (density, shift) {
                        (Some(density), Some(shift)) => Some(Command::VerifyAndersonShift { density, shift }),
                        _ => None,
                    }
                }
                _ => {
                    ctx.error(None, "verify-anderson needs exactly one of `[density_2]` (sum inequality) or `[shift]` (shift inequality)");
                    None
                }
            }
        }
        CommandKind::VerifyCoupling | CommandKind::VerifyComparison => {
            let f_x = top_density(&mut ctx, root, "f_x");
            let f_y = top_density(&mut ctx, root, "f_y");
            let constant = constant(&mut ctx, root, true, kind).flatten();
            match (f_x, f_y, constant) {
                (Some(f_x), Some(f_y), Some(constant)) if kind == CommandKind::VerifyCoupling => {
                    Some(Command::VerifyCoupling { f_x, f_y, constant })
                }
                (Some(f_x), Some(f_y), Some(constant)) => Some(Command::VerifyComparison { f_x, f_y, constant }),
                _ => None,
            }
        }
        CommandKind::EstimateHurst => top_density(&mut ctx, root, "density").map(|density| Command::EstimateHurst { density }),
    };

    let dims: Vec<usize> = command.as_ref().map(|c| c.densities().iter().map(|d| d.dim()).collect()).unwrap_or_default();
    let dim = dims.first().copied().unwrap_or(1);
    if dims.iter().any(|d| *d != dim) {
        ctx.error(None, format!("all densities must share one dimension, got {dims:?}"));
    }
    if kind == CommandKind::EstimateHurst && dim != 1 {
        ctx.error(None, "estimate-hurst needs a one-dimensional density");
    }
    let frequency_grid = frequency_grid(&mut ctx, root, dim);
    let spatial_grid = spatial_grid(&mut ctx, root, kind, dim);
    if kind == CommandKind::EstimateHurst {
        if let Some(g) = &spatial_grid {
            if g.len() < spectral_fields::verification::HURST_MIN_POINTS {
                ctx.error(
                    root.key_span("spatial_grid"),
                    format!("estimate-hurst needs at least {} grid points, got {}", spectral_fields::verification::HURST_MIN_POINTS, g.len()),
                );
            }
        }
    }
    let norm = norm(&mut ctx, root);
    let mc = monte_carlo(&mut ctx, root, kind);

    if !ctx.errors.is_empty() {
        return Err(ConfigErrors(ctx.errors));
    }
    let (Some(command), Some(seed), Some(frequency_grid), Some(spatial_grid), Some(norm), Some(mc)) =
        (command, seed, frequency_grid, spatial_grid, norm, mc)
    else {
        unreachable!("every missing piece records an error");
    };
    Ok(RunConfig {
        kind,
        command,
        seed,
        frequency_grid,
        spatial_grid: Arc::new(spatial_grid),
        replicas: mc.replicas,
        confidence: mc.confidence,
        radii: mc.radii,
        norm,
        output,
        source: text.to_string(),
    })
}

fn command_keys_any() -> Vec<&'static str> {
    let mut keys: Vec<&str> = CommandKind::ALL.iter().flat_map(|k| command_keys(*k).iter().copied()).collect();
    keys.sort_unstable();
    keys.dedup();
    keys
}

impl Command {
    pub fn densities(&self) -> Vec<&SpectralDensity> {
        match self {
            Command::DensityCheck { density, other, .. } => std::iter::once(density).chain(other.as_ref()).collect(),
            Command::Simulate { density, .. }
            | Command::Covariance { density }
            | Command::VerifyAndersonShift { density, .. }
            | Command::EstimateHurst { density } => vec![density],
            Command::VerifyAndersonSum { first, second } => vec![first, second],
            Command::VerifyCoupling { f_x, f_y, .. } | Command::VerifyComparison { f_x, f_y, .. } => vec![f_x, f_y],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_simulate_config_uses_defaults() {
        let cfg = parse_config("command = \"simulate\"\nseed = 42\n[density]\nfamily = \"fbm\"\nhurst = 0.5\ndim = 1\n").unwrap();
        assert_eq!(cfg.kind, CommandKind::Simulate);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.frequency_grid, FrequencyGrid::with_defaults(1).unwrap());
        assert_eq!(cfg.spatial_grid.per_axis(), Some(65));
        assert!(matches!(cfg.command, Command::Simulate { samples: 1, method: SampleMethod::Spectral, .. }));
    }

    #[test]
    fn out_of_range_hurst_is_located() {
        let err = parse_config("command = \"simulate\"\nseed = 1\n[density]\nfamily = \"fbm\"\nhurst = 1.2\n").unwrap_err();
        assert_eq!(err.0.len(), 1);
        let e = &err.0[0];
        assert!(e.message.contains("H must lie in (0,1)"), "{e}");
        assert_eq!((e.line, e.column), (5, 9));
    }

    #[test]
    fn all_errors_are_collected() {
        let text = "command = \"verify-comparison\"\n[f_x]\nfamily = \"fbm\"\nhurst = 0.5\n[f_y]\nfamily = \"nope\"\n[norm]\nkind = \"holder\"\nalpha = 2.0\n";
        let err = parse_config(text).unwrap_err();
        let messages: Vec<String> = err.0.iter().map(|e| e.message.clone()).collect();
        assert!(messages.iter().any(|m| m.contains("seed")), "{messages:?}");
        assert!(messages.iter().any(|m| m.contains("unknown family `nope`")), "{messages:?}");
        assert!(messages.iter().any(|m| m.contains("constant") && m.contains("auto")), "{messages:?}");
        assert!(messages.iter().any(|m| m.contains("alpha")), "{messages:?}");
        let family = err.0.iter().find(|e| e.message.contains("nope")).unwrap();
        assert_eq!(family.line, 6);
    }

    #[test]
    fn nested_densities_and_auto_constant() {
        let text = r#"
command = "verify-comparison"
seed = 7
constant = "auto"
[f_x]
family = "perturbed"
base = { family = "fbm", hurst = 0.5 }
[f_y]
family = "sum"
terms = [{ family = "fbm", hurst = 0.5 }, { family = "scalar-multiple", factor = 0.5, base = { family = "brownian" } }]
[monte_carlo]
replicas = 200
"#;
        let cfg = parse_config(text).unwrap();
        let Command::VerifyComparison { f_x, f_y, constant } = &cfg.command else { panic!() };
        assert_eq!(*constant, ConstantSpec::Auto);
        assert_eq!(f_x.to_string(), "perturbed(fbm(H=0.5,d=1),(2+1*sin(1|xi|))/3)");
        assert!(f_y.to_string().starts_with("sum("));
        assert_eq!(cfg.radii, RadiiSpec::Quantiles(DEFAULT_QUANTILES.to_vec()));
        assert_eq!(cfg.replicas, 200);
    }

    #[test]
    fn array_of_tables_terms_and_shift() {
        let text = r#"
command = "verify-anderson"
seed = 3
[density]
family = "sum"
[[density.terms]]
family = "fbm"
hurst = 0.3
[[density.terms]]
family = "band-limited"
lo = 1.0
hi = 2.0
level = 0.5
[shift]
kind = "linear"
slope = [0.5]
"#;
        let cfg = parse_config(text).unwrap();
        let Command::VerifyAndersonShift { shift, .. } = &cfg.command else { panic!("{:?}", cfg.command) };
        assert_eq!(shift.values(&SpatialGrid::uniform(1, 3).unwrap()), vec![0.0, 0.25, 0.5]);
    }

    #[test]
    fn rejects_unused_and_unknown_keys() {
        let text = "command = \"covariance\"\nseed = 1\nsamples = 3\ncolour = 2\n[density]\nfamily = \"zero\"\nhurst = 0.5\n";
        let err = parse_config(text).unwrap_err();
        let messages: Vec<&str> = err.0.iter().map(|e| e.message.as_str()).collect();
        assert!(messages.contains(&"`samples` is not used by covariance"), "{messages:?}");
        assert!(messages.contains(&"unknown key `colour`"), "{messages:?}");
        assert!(messages.contains(&"unknown key `density.hurst`"), "{messages:?}");
    }

    #[test]
    fn invalid_toml_reports_position() {
        let err = parse_config("command = \"simulate\"\nseed = = 1\n").unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].line, 2);
    }
}
