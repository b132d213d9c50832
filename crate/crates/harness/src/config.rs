//! Experiment configuration: JSON ingestion, defaults and validation.

use std::fmt;
use std::path::{Path, PathBuf};

use meanfield_core::dynamics::InteractionSpec;
use meanfield_core::linalg;
use meanfield_core::wick::{KernelJson, WickSymbol};
use meanfield_core::wigner::{EpsilonFamily, EscapingSchedule, FamilyKind};
use meanfield_core::{CMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_TAIL_TOL: f64 = 1e-8;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_N_QUAD: usize = 128;
pub const DEFAULT_SECTOR_CAP: usize = meanfield_core::dynamics::DEFAULT_EIG_CAP;

/// Complex number as `[re, im]`.
pub type Pair = [f64; 2];

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ASpec {
    Diagonal(Vec<f64>),
    Matrix(Vec<Vec<Pair>>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum InteractionConfig {
    SeededRandom {
        orders: Vec<usize>,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    IdentityScaled {
        orders: Vec<usize>,
        #[serde(default = "one")]
        scale: f64,
    },
    Explicit {
        kernels: Vec<KernelJson>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub kind: FamilyKind,
    pub f: Vec<Pair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub escaping: Option<EscapingSchedule>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomProbes {
    pub count: usize,
    pub radius: f64,
    /// Modes the probes may occupy; all modes when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeConfig {
    Explicit(Vec<Vec<Pair>>),
    Random(RandomProbes),
}

/// The file format, with every default filled in after loading.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<ASpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction: Option<InteractionConfig>,
    pub family: FamilyConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<ProbeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orders: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_quad: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max_headroom: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A configuration problem, located in the source file when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: {}", self.source, l, self.message),
            None => write!(f, "{}: {}", self.source, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Validated experiment description.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub d: usize,
    pub eps: Vec<f64>,
    pub a: CMatrix,
    pub interaction: InteractionSpec,
    pub family: EpsilonFamily,
    pub times: Vec<f64>,
    pub probes: Vec<Vec<C64>>,
    pub orders: Vec<usize>,
    pub moments: Vec<u32>,
    pub tail_tol: f64,
    pub dt: f64,
    pub n_quad: usize,
    pub n_max_headroom: Option<usize>,
    pub sector_cap: usize,
    pub out: Option<PathBuf>,
    pub seed: u64,
    /// The input with defaults applied, echoed into the manifest.
    pub echo: RawConfig,
}

/// 1-based line of the first occurrence of the key path, each key searched
/// after the previous one. Falls back to the last key found.
fn locate(text: &str, path: &[&str]) -> Option<usize> {
    let mut pos = 0usize;
    let mut found = None;
    for key in path {
        let needle = format!("\"{key}\"");
        match text[pos..].find(&needle) {
            Some(off) => {
                pos += off;
                found = Some(pos);
                pos += needle.len();
            }
            None => break,
        }
    }
    found.map(|p| text[..p].matches('\n').count() + 1)
}

struct Ctx<'a> {
    source: &'a str,
    text: &'a str,
}

impl Ctx<'_> {
    fn err(&self, path: &[&str], message: impl Into<String>) -> ConfigError {
        ConfigError {
            source: self.source.to_string(),
            line: locate(self.text, path),
            message: message.into(),
        }
    }
}

fn complex(v: &[Pair]) -> Vec<C64> {
    v.iter().map(|p| C64::new(p[0], p[1])).collect()
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        source: path.display().to_string(),
        line: None,
        message: format!("cannot read: {e}"),
    })?;
    parse_config(&text, &path.display().to_string())
}

pub fn parse_config(text: &str, source: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| ConfigError {
        source: source.to_string(),
        line: Some(e.line()),
        message: e.to_string(),
    })?;
    validate(raw, &Ctx { source, text })
}

fn validate(mut raw: RawConfig, cx: &Ctx) -> Result<ExperimentConfig, ConfigError> {
    let d = raw.d;
    if d == 0 {
        return Err(cx.err(&["d"], "d must be at least 1"));
    }

    let eps = match (&raw.eps, &raw.n_list) {
        (Some(_), Some(_)) => return Err(cx.err(&["n_list"], "give either eps or n_list, not both")),
        (Some(e), None) => e.clone(),
        (None, Some(n)) => {
            if n.contains(&0) {
                return Err(cx.err(&["n_list"], "n_list entries must be positive"));
            }
            n.iter().map(|&k| 1.0 / k as f64).collect()
        }
        (None, None) => return Err(cx.err(&["d"], "missing eps schedule: set eps or n_list")),
    };
    if eps.is_empty() {
        return Err(cx.err(&["eps"], "empty eps schedule"));
    }
    if let Some(bad) = eps.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
        let key = if raw.eps.is_some() { "eps" } else { "n_list" };
        return Err(cx.err(&[key], format!("eps = {bad} lies outside (0, 1]")));
    }

    let a = match &raw.a {
        None => CMatrix::zeros(d, d),
        Some(ASpec::Diagonal(v)) => {
            if v.len() != d {
                return Err(cx.err(&["a", "diagonal"], format!("diagonal has {} entries, expected {d}", v.len())));
            }
            CMatrix::from_fn(d, d, |i, j| if i == j { C64::new(v[i], 0.0) } else { C64::new(0.0, 0.0) })
        }
        Some(ASpec::Matrix(rows)) => {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(cx.err(&["a", "matrix"], format!("A must be {d}×{d}")));
            }
            CMatrix::from_fn(d, d, |i, j| C64::new(rows[i][j][0], rows[i][j][1]))
        }
    };
    let dev = linalg::hermitian_deviation(&a);
    if dev > 1e-12 {
        return Err(cx.err(&["a"], format!("A is not Hermitian (deviation {dev:.3e})")));
    }

    let seed = *raw.seed.get_or_insert(0);
    let interaction = match &raw.interaction {
        None => InteractionSpec::empty(d),
        Some(InteractionConfig::SeededRandom { orders, scale, seed: s }) => {
            InteractionSpec::seeded_random(d, orders, s.unwrap_or(seed))
                .and_then(|spec| {
                    let terms = spec.terms().iter().map(|t| t.scale(C64::new(*scale, 0.0))).collect();
                    InteractionSpec::new(d, terms)
                })
                .map_err(|e| cx.err(&["interaction", "orders"], e.to_string()))?
        }
        Some(InteractionConfig::IdentityScaled { orders, scale }) => {
            let terms = orders
                .iter()
                .map(|&l| WickSymbol::norm_power(d, l).scale(C64::new(*scale, 0.0)))
                .collect();
            InteractionSpec::new(d, terms).map_err(|e| cx.err(&["interaction", "orders"], e.to_string()))?
        }
        Some(InteractionConfig::Explicit { kernels }) => {
            let mut terms = Vec::new();
            for (i, k) in kernels.iter().enumerate() {
                if k.d != d {
                    return Err(cx.err(&["interaction", "kernels"], format!("kernel {i} has d = {}, expected {d}", k.d)));
                }
                terms.push(
                    WickSymbol::from_json(k)
                        .map_err(|e| cx.err(&["interaction", "kernels"], format!("kernel {i}: {e}")))?,
                );
            }
            InteractionSpec::new(d, terms).map_err(|e| cx.err(&["interaction", "kernels"], e.to_string()))?
        }
    };

    let fam = &raw.family;
    if fam.f.len() != d {
        return Err(cx.err(&["family", "f"], format!("f has {} entries, expected {d}", fam.f.len())));
    }
    if let Some(u) = &fam.u {
        if u.len() != d {
            return Err(cx.err(&["family", "u"], format!("u has {} entries, expected {d}", u.len())));
        }
    }
    let family = EpsilonFamily::new(fam.kind, complex(&fam.f), fam.u.as_deref().map(complex), fam.escaping)
        .map_err(|e| {
            let key = if fam.escaping.is_some() { "escaping" } else { "f" };
            cx.err(&["family", key], e.to_string())
        })?;

    let times = raw.times.get_or_insert_with(|| vec![0.0]).clone();
    if times.is_empty() || times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(cx.err(&["times"], "times must be a non-empty list of non-negative numbers"));
    }

    let probe_cfg = raw.probes.get_or_insert(ProbeConfig::Random(RandomProbes {
        count: 8,
        radius: 0.5,
        span: None,
    }));
    let probes = match probe_cfg {
        ProbeConfig::Explicit(list) => {
            if list.is_empty() {
                return Err(cx.err(&["probes"], "no probes given"));
            }
            if let Some((i, _)) = list.iter().enumerate().find(|(_, p)| p.len() != d) {
                return Err(cx.err(&["probes", "explicit"], format!("probe {i} does not have {d} entries")));
            }
            list.iter().map(|p| complex(p)).collect()
        }
        ProbeConfig::Random(r) => {
            if r.count == 0 || !(r.radius > 0.0) {
                return Err(cx.err(&["probes", "random"], "random probes need count ≥ 1 and radius > 0"));
            }
            let span: Vec<usize> = r.span.clone().unwrap_or_else(|| (0..d).collect());
            if span.is_empty() || span.iter().any(|&m| m >= d) {
                return Err(cx.err(&["probes", "span"], format!("span must list modes below {d}")));
            }
            random_probes(d, r.count, r.radius, &span, seed)
        }
    };

    let orders = raw.orders.get_or_insert_with(|| vec![1]).clone();
    if orders.iter().any(|&p| p == 0) {
        return Err(cx.err(&["orders"], "reduced-density orders must be at least 1"));
    }
    let moments = raw.moments.get_or_insert_with(Vec::new).clone();
    let tail_tol = *raw.tail_tol.get_or_insert(DEFAULT_TAIL_TOL);
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(cx.err(&["tail_tol"], "tail_tol must lie in (0, 1)"));
    }
    let dt = *raw.dt.get_or_insert(DEFAULT_DT);
    if !(dt > 0.0) {
        return Err(cx.err(&["dt"], "dt must be positive"));
    }
    let n_quad = *raw.n_quad.get_or_insert(DEFAULT_N_QUAD);
    if n_quad == 0 || n_quad % 2 != 0 {
        return Err(cx.err(&["n_quad"], "n_quad must be a positive even number"));
    }
    let sector_cap = *raw.sector_cap.get_or_insert(DEFAULT_SECTOR_CAP);

    Ok(ExperimentConfig {
        d,
        eps,
        a,
        interaction,
        family,
        times,
        probes,
        orders,
        moments,
        tail_tol,
        dt,
        n_quad,
        n_max_headroom: raw.n_max_headroom,
        sector_cap,
        out: raw.out.clone(),
        seed,
        echo: raw,
    })
}

/// Probes `r·s·v/|v|` with `v` uniform in the unit square on the span and
/// `s` uniform in `[1/4, 1]`.
pub fn random_probes(d: usize, count: usize, radius: f64, span: &[usize], seed: u64) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5052_4f42_4553);
    (0..count)
        .map(|_| {
            let v = linalg::random_vector(span.len(), &mut rng);
            let s: f64 = rng.gen_range(0.25..1.0);
            let scale = radius * s / linalg::norm(&v).max(1e-300);
            let mut xi = vec![C64::new(0.0, 0.0); d];
            for (k, &m) in span.iter().enumerate() {
                xi[m] = v[k] * scale;
            }
            xi
        })
        .collect()
}
