use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adversaries::{zoo_entry, Role};
use crate::functionality::CommBudget;
use crate::protocols::{Bundle, CpufParams, DeskConfig, ExtParams, OriginalParams, ProtocolId, UcParams, EXTRACTABLE_BUDGET};

pub const CONFIG_VERSION: u32 = 1;

/// Which experiment a config runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Honest runs accept the committed value.
    Completeness,
    /// Honest runs, checked against the expected PUF and exchange-phase counts.
    Costs,
    /// The original protocol against the extraction attack.
    Attack,
    /// Zoo members against the single-string or collective commitment.
    Zoo,
    /// Random-decommit attackers.
    Binding,
    /// Baseline distinguishers on commit-phase transcripts.
    Hiding,
    Lemmas,
    /// Exhaustive decoding of every small repetition code.
    Ecc,
    /// Fuzzy extractor round trips under bounded noise.
    Fe,
    Consistency,
    Uniformity,
    Unpredictability,
    Cq,
    Indist,
    Crp,
    Tq,
    UcReceiver,
    UcSender,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 18] = [
        ExperimentKind::Completeness,
        ExperimentKind::Costs,
        ExperimentKind::Attack,
        ExperimentKind::Zoo,
        ExperimentKind::Binding,
        ExperimentKind::Hiding,
        ExperimentKind::Lemmas,
        ExperimentKind::Ecc,
        ExperimentKind::Fe,
        ExperimentKind::Consistency,
        ExperimentKind::Uniformity,
        ExperimentKind::Unpredictability,
        ExperimentKind::Cq,
        ExperimentKind::Indist,
        ExperimentKind::Crp,
        ExperimentKind::Tq,
        ExperimentKind::UcReceiver,
        ExperimentKind::UcSender,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ExperimentKind::Completeness => "completeness",
            ExperimentKind::Costs => "costs",
            ExperimentKind::Attack => "attack",
            ExperimentKind::Zoo => "zoo",
            ExperimentKind::Binding => "binding",
            ExperimentKind::Hiding => "hiding",
            ExperimentKind::Lemmas => "lemmas",
            ExperimentKind::Ecc => "ecc",
            ExperimentKind::Fe => "fe",
            ExperimentKind::Consistency => "consistency",
            ExperimentKind::Uniformity => "uniformity",
            ExperimentKind::Unpredictability => "unpredictability",
            ExperimentKind::Cq => "cq",
            ExperimentKind::Indist => "indist",
            ExperimentKind::Crp => "crp",
            ExperimentKind::Tq => "tq",
            ExperimentKind::UcReceiver => "uc-receiver",
            ExperimentKind::UcSender => "uc-sender",
        }
    }

    /// Protocols the kind accepts; empty when it takes none.
    pub fn protocols(self) -> &'static [ProtocolId] {
        use ProtocolId::*;
        match self {
            ExperimentKind::Completeness | ExperimentKind::Costs => &ProtocolId::ALL,
            ExperimentKind::Attack => &[OriginalExtpuf],
            ExperimentKind::Zoo => &[Extpuf, Collextpuf],
            ExperimentKind::Binding | ExperimentKind::Hiding => &[Cpuf, Extpuf, Collextpuf],
            ExperimentKind::UcReceiver | ExperimentKind::UcSender => &[Uccompiler],
            _ => &[],
        }
    }

    /// Adversary ids the kind accepts, besides the zoo roles listed in [`Self::roles`].
    fn extra_adversaries(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Zoo => &["all"],
            ExperimentKind::Tq => &["puf-substituter", "honest-committer"],
            _ => &[],
        }
    }

    fn roles(self) -> &'static [Role] {
        match self {
            ExperimentKind::Zoo => &[Role::Committer, Role::Receiver],
            ExperimentKind::UcSender => &[Role::UcSender],
            _ => &[],
        }
    }

    fn fixed_adversaries(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Attack => &["original-attacker", "honest-committer"],
            ExperimentKind::Binding => &["random-decommit"],
            _ => &[],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.id() == s).ok_or_else(|| format!("unknown experiment kind `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversary: Option<String>,
    pub trials: u64,
    pub seed: u64,
    /// Overrides the kind's default pass threshold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub n: usize,
    #[serde(default = "one")]
    pub k: usize,
    /// Strings per collective commitment.
    #[serde(default = "one")]
    pub n_coll: usize,
    #[serde(default = "default_d_noise")]
    pub d_noise: usize,
    #[serde(default = "default_margin")]
    pub margin: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_min_e: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ext_out_len: Option<usize>,
}

fn one() -> usize {
    1
}

fn default_d_noise() -> usize {
    DeskConfig::default().d_noise
}

fn default_margin() -> usize {
    DeskConfig::default().margin
}

impl ParamsSection {
    pub fn desk(&self) -> DeskConfig {
        DeskConfig {
            n: self.n,
            k: self.k,
            d_noise: self.d_noise,
            margin: self.margin,
            d_min_e: self.d_min_e,
            ext_out_len: self.ext_out_len,
        }
    }
}

/// Bit budgets of malicious PUFs; an absent entry is unbounded.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    #[serde(default)]
    pub k_state: Option<usize>,
    #[serde(default)]
    pub k_in: Option<usize>,
    #[serde(default)]
    pub k_out: Option<usize>,
}

impl Default for BudgetSection {
    fn default() -> Self {
        Self::from(EXTRACTABLE_BUDGET)
    }
}

impl From<CommBudget> for BudgetSection {
    fn from(b: CommBudget) -> Self {
        Self { k_state: b.k_state, k_in: b.k_in, k_out: b.k_out }
    }
}

impl BudgetSection {
    pub fn budget(&self) -> CommBudget {
        CommBudget { k_state: self.k_state, k_in: self.k_in, k_out: self.k_out }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// JSON report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    /// Plain-text summary table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    /// Event log of the first trial, one JSON object per line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub events: Option<PathBuf>,
}

/// A versioned experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub experiment: ExperimentSection,
    pub params: ParamsSection,
    #[serde(default)]
    pub budget: BudgetSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// One problem with a config, located by its field path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("invalid config:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<FieldError>),
}

/// The config after validation, with ids resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub kind: ExperimentKind,
    pub protocol: Option<ProtocolId>,
    pub adversary: Option<String>,
    pub desk: DeskConfig,
    pub n_coll: usize,
    pub budget: CommBudget,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// A config with defaults for everything but the kind, size and seed.
    pub fn new(kind: ExperimentKind, n: usize, trials: u64, seed: u64) -> Self {
        Self {
            version: CONFIG_VERSION,
            experiment: ExperimentSection {
                kind: kind.id().into(),
                protocol: None,
                adversary: None,
                trials,
                seed,
                threshold: None,
            },
            params: ParamsSection {
                n,
                k: 1,
                n_coll: 1,
                d_noise: default_d_noise(),
                margin: default_margin(),
                d_min_e: None,
                ext_out_len: None,
            },
            budget: BudgetSection::default(),
            output: OutputSection::default(),
        }
    }

    pub fn validate(&self) -> Result<Resolved, ConfigError> {
        let mut errs = Vec::new();
        let mut err = |path: &str, message: String| errs.push(FieldError { path: path.into(), message });
        if self.version != CONFIG_VERSION {
            err("version", format!("unsupported version {}, expected {CONFIG_VERSION}", self.version));
        }
        let e = &self.experiment;
        let kind = match e.kind.parse::<ExperimentKind>() {
            Ok(k) => Some(k),
            Err(m) => {
                err("experiment.kind", m);
                None
            }
        };
        if e.trials == 0 {
            err("experiment.trials", "must be at least 1".into());
        }
        if let Some(t) = e.threshold {
            if !t.is_finite() || t < 0.0 {
                err("experiment.threshold", format!("{t} must be a finite non-negative number"));
            }
        }

        let protocol = match (&e.protocol, kind) {
            (Some(p), Some(k)) => match p.parse::<ProtocolId>() {
                Ok(p) if k.protocols().contains(&p) => Some(p),
                Ok(p) if k.protocols().is_empty() => {
                    err("experiment.protocol", format!("`{k}` takes no protocol, got `{p}`"));
                    None
                }
                Ok(p) => {
                    let allowed: Vec<_> = k.protocols().iter().map(|p| p.id()).collect();
                    err("experiment.protocol", format!("`{k}` runs on {}, not `{p}`", allowed.join(", ")));
                    None
                }
                Err(m) => {
                    err("experiment.protocol", m);
                    None
                }
            },
            (None, Some(k)) if !k.protocols().is_empty() => {
                if let [only] = k.protocols() {
                    Some(*only)
                } else {
                    err("experiment.protocol", format!("`{k}` needs a protocol"));
                    None
                }
            }
            _ => None,
        };

        if let (Some(a), Some(k)) = (&e.adversary, kind) {
            let fixed = k.fixed_adversaries();
            let ok = fixed.contains(&a.as_str())
                || k.extra_adversaries().contains(&a.as_str())
                || zoo_entry(a).is_ok_and(|z| k.roles().contains(&z.role));
            if !ok {
                let known = zoo_entry(a).is_ok() || k.extra_adversaries().contains(&a.as_str()) || fixed.contains(&a.as_str());
                let why = if known { format!("`{a}` does not apply to `{k}`") } else { format!("unknown adversary `{a}`") };
                err("experiment.adversary", why);
            }
        }

        let p = &self.params;
        if p.n == 0 {
            err("params.n", "must be positive".into());
        }
        if p.k == 0 {
            err("params.k", "must be positive".into());
        }
        if p.k > 8 {
            err("params.k", format!("{} exceeds the desk-scale limit of 8", p.k));
        }
        if p.n_coll == 0 || p.n_coll > 16 {
            err("params.n_coll", format!("{} is outside 1..=16", p.n_coll));
        }
        if p.d_noise == 0 {
            err("params.d_noise", "must be positive".into());
        }
        if p.margin == 0 {
            err("params.margin", "must be positive".into());
        }
        if p.d_min_e.is_some_and(|d| d == 0 || d > p.n) {
            err("params.d_min_e", format!("must lie in 1..={}", p.n));
        }
        if p.ext_out_len == Some(0) {
            err("params.ext_out_len", "must be positive".into());
        }
        let desk = p.desk();
        if p.n > 0 && p.k > 0 && p.d_noise > 0 {
            if let Some(m) = kind.and_then(|k| derived_length_problem(k, protocol, &desk)) {
                err("params", m);
            }
        }
        match kind {
            Some(ExperimentKind::Ecc) if p.n > 24 => err("params.n", format!("exhaustive decoding supports code lengths up to 24, got {}", p.n)),
            Some(ExperimentKind::Lemmas) if p.n < 2 => err("params.n", "the largest support size must be at least 2".into()),
            _ => {}
        }

        let budget = self.budget.budget();
        if kind.is_some_and(|k| k != ExperimentKind::Zoo) && budget != EXTRACTABLE_BUDGET {
            err("budget", "only zoo experiments vary the malicious-PUF budget".into());
        }
        if self.output.events.is_some()
            && kind.is_some_and(|k| !matches!(k, ExperimentKind::Completeness | ExperimentKind::Costs))
        {
            err("output.events", "event logs are written by completeness and costs runs only".into());
        }

        if !errs.is_empty() {
            return Err(ConfigError::Invalid(errs));
        }
        Ok(Resolved {
            kind: kind.expect("validated"),
            protocol,
            adversary: e.adversary.clone(),
            desk,
            n_coll: p.n_coll,
            budget,
        })
    }
}

fn derived_length_problem(kind: ExperimentKind, protocol: Option<ProtocolId>, desk: &DeskConfig) -> Option<String> {
    use ExperimentKind::*;
    if protocol.is_none() {
        if !matches!(kind, Fe | Consistency | Indist | Crp | Tq) {
            return None;
        }
        let out = desk.ext_out_len.unwrap_or(desk.n);
        return Bundle::sized(desk.n, out, desk.d_noise, desk.d_min_e(), desk.margin).err().map(|e| e.to_string());
    }
    let r = match protocol {
        Some(ProtocolId::Cpuf) => CpufParams::desk(desk).map(|_| ()),
        Some(ProtocolId::OriginalExtpuf) => OriginalParams::desk(desk).map(|_| ()),
        Some(ProtocolId::Uccompiler | ProtocolId::BlobEqualities) => UcParams::desk(desk).map(|_| ()),
        Some(ProtocolId::UccompilerCompat) => {
            ExtParams::desk(&DeskConfig { k: desk.n, ..desk.clone() }).and(ExtParams::desk(&DeskConfig { k: 1, ..desk.clone() })).map(|_| ())
        }
        _ => ExtParams::desk(desk).map(|_| ()),
    };
    r.err().map(|e| e.to_string())
}
