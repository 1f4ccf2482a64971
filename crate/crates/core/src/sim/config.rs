//! Simulation configuration: schemes, TOML parsing and validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::waveform::{FilterKind, GfdmConfig};

/// Roll-off used when `baseline_rc` is named without one.
pub const DEFAULT_ROLL_OFF: f64 = 0.9;

/// Largest block length accepted without `--large`.
pub const DESK_SCALE_MAX_BLOCK: usize = 128;

/// Transceiver chain evaluated by a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// Dirichlet GFDM with per-subcarrier SQRD and sphere decoding.
    ProposedDirichlet,
    /// Dirichlet GFDM with full-matrix MMSE-SQRD and grouped SIC.
    BaselineDirichlet,
    /// Raised-cosine GFDM (roll-off `α`) with the full-matrix receiver.
    BaselineRc(f64),
    /// MIMO-OFDM over `D = K·M` bins with per-bin sphere decoding.
    Ofdm,
}

impl Scheme {
    /// Label written to the `filter` column of the report.
    pub fn filter_label(&self) -> String {
        match self {
            Scheme::ProposedDirichlet | Scheme::BaselineDirichlet => "dirichlet".into(),
            Scheme::BaselineRc(a) => format!("rc({a})"),
            Scheme::Ofdm => "rect".into(),
        }
    }

    /// Prototype filter of the GFDM schemes; `None` for OFDM.
    pub fn filter_kind(&self) -> Option<FilterKind> {
        match self {
            Scheme::ProposedDirichlet | Scheme::BaselineDirichlet => Some(FilterKind::Dirichlet),
            Scheme::BaselineRc(alpha) => Some(FilterKind::RaisedCosine { alpha: *alpha }),
            Scheme::Ofdm => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::ProposedDirichlet => f.write_str("proposed_dirichlet"),
            Scheme::BaselineDirichlet => f.write_str("baseline_dirichlet"),
            Scheme::BaselineRc(a) => write!(f, "baseline_rc({a})"),
            Scheme::Ofdm => f.write_str("ofdm"),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    /// Accepts `proposed_dirichlet`, `baseline_dirichlet`, `baseline_rc`,
    /// `baseline_rc(<alpha>)` and `ofdm`, ignoring case and surrounding space.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase();
        match norm.as_str() {
            "proposed_dirichlet" => return Ok(Scheme::ProposedDirichlet),
            "baseline_dirichlet" => return Ok(Scheme::BaselineDirichlet),
            "baseline_rc" => return Ok(Scheme::BaselineRc(DEFAULT_ROLL_OFF)),
            "ofdm" => return Ok(Scheme::Ofdm),
            _ => {}
        }
        let alpha = norm
            .strip_prefix("baseline_rc(")
            .and_then(|rest| rest.strip_suffix(')'))
            .and_then(|a| a.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::UnknownScheme(s.to_string()))?;
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::RollOff(alpha));
        }
        Ok(Scheme::BaselineRc(alpha))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scheme: OneOrMany,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "T")]
    t: usize,
    #[serde(rename = "R")]
    r: usize,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constellation: Option<String>,
    snr_db: Vec<f64>,
    n_channels: usize,
    n_blocks: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

/// A validated sweep description.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub schemes: Vec<Scheme>,
    pub subcarriers: usize,
    pub subsymbols: usize,
    pub tx: usize,
    pub rx: usize,
    /// CP length; also the number of channel taps.
    pub cp_len: usize,
    pub constellation: String,
    pub snr_db: Vec<f64>,
    pub n_channels: usize,
    pub n_blocks: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// Scale `N0` by `(D + L)/D` to charge the CP energy to the SNR.
    pub cp_loss: bool,
}

/// `max(1, D/8)`.
pub fn default_cp_len(block_len: usize) -> usize {
    (block_len / 8).max(1)
}

/// Line number (1-based) of the first `key = ...` assignment in `text`.
fn key_line(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|line| {
        line.trim_start()
            .strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

impl SimConfig {
    /// Parses TOML text; `origin` names the source in error messages.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("{origin}: {}", e.to_string().trim_end())))?;
        let at = |key: &str| match key_line(text, key) {
            Some(line) => format!("{origin}:{line}: `{key}`"),
            None => format!("{origin}: `{key}`"),
        };
        let names = match raw.scheme {
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v,
        };
        let schemes = names
            .iter()
            .map(|s| s.parse::<Scheme>())
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Config(format!("{}: {e}", at("scheme"))))?;
        let d = raw.k.saturating_mul(raw.m);
        let cfg = SimConfig {
            schemes,
            subcarriers: raw.k,
            subsymbols: raw.m,
            tx: raw.t,
            rx: raw.r,
            cp_len: raw.l.unwrap_or_else(|| default_cp_len(d)),
            constellation: raw.constellation.unwrap_or_else(|| "qpsk".into()),
            snr_db: raw.snr_db,
            n_channels: raw.n_channels,
            n_blocks: raw.n_blocks,
            seed: raw.seed.unwrap_or(0),
            out: raw.out.unwrap_or_else(|| PathBuf::from("results.csv")),
            cp_loss: false,
        };
        cfg.validate_with(|key| at(key))?;
        Ok(cfg)
    }

    /// Reads and parses a TOML file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    /// Checks every constraint; messages name the offending key.
    pub fn validate(&self) -> Result<()> {
        self.validate_with(|key| format!("`{key}`"))
    }

    fn validate_with(&self, at: impl Fn(&str) -> String) -> Result<()> {
        let positive = [
            ("K", self.subcarriers),
            ("M", self.subsymbols),
            ("T", self.tx),
            ("R", self.rx),
            ("L", self.cp_len),
            ("n_channels", self.n_channels),
            ("n_blocks", self.n_blocks),
        ];
        for (key, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{}: must be positive", at(key))));
            }
        }
        if self.schemes.is_empty() {
            return Err(Error::Config(format!("{}: at least one scheme is required", at("scheme"))));
        }
        for (i, s) in self.schemes.iter().enumerate() {
            if self.schemes[..i].contains(s) {
                return Err(Error::Config(format!("{}: `{s}` is listed twice", at("scheme"))));
            }
        }
        let d = self.block_len();
        if self.cp_len > d {
            return Err(Error::Config(format!(
                "{}: CP length {} exceeds the block length D = {d}",
                at("L"),
                self.cp_len
            )));
        }
        if self.snr_db.is_empty() {
            return Err(Error::Config(format!("{}: at least one SNR point is required", at("snr_db"))));
        }
        if let Some(bad) = self.snr_db.iter().find(|s| s.is_nan() || **s == f64::NEG_INFINITY) {
            return Err(Error::Config(format!("{}: invalid SNR value {bad}", at("snr_db"))));
        }
        Constellation::by_name(&self.constellation)
            .map_err(|e| Error::Config(format!("{}: {e}", at("constellation"))))?;
        Ok(())
    }

    /// Fails when a channel with `taps` taps is longer than the cyclic prefix.
    pub fn check_channel_memory(&self, taps: usize) -> Result<()> {
        if taps > self.cp_len {
            return Err(Error::Config(format!(
                "`L`: CP length {} is shorter than the channel memory of {taps} taps",
                self.cp_len
            )));
        }
        Ok(())
    }

    /// Rejects paper-scale blocks unless `allow_large` is set.
    pub fn check_scale(&self, allow_large: bool) -> Result<()> {
        let d = self.block_len();
        if d > DESK_SCALE_MAX_BLOCK && !allow_large {
            return Err(Error::Config(format!(
                "D = {d} exceeds the desk-scale limit of {DESK_SCALE_MAX_BLOCK}; pass --large to run it anyway"
            )));
        }
        Ok(())
    }

    pub fn block_len(&self) -> usize {
        self.subcarriers * self.subsymbols
    }

    pub fn constellation(&self) -> Result<Constellation> {
        Constellation::by_name(&self.constellation)
    }

    /// Waveform parameters for `scheme` (OFDM maps to `M = 1` over `D` bins).
    pub fn gfdm_config(&self, scheme: &Scheme) -> Result<GfdmConfig> {
        let (k, m) = match scheme {
            Scheme::Ofdm => (self.block_len(), 1),
            _ => (self.subcarriers, self.subsymbols),
        };
        let mut cfg = GfdmConfig::new(k, m)?
            .with_cp_len(self.cp_len)?
            .with_constellation(self.constellation()?);
        if let Some(kind) = scheme.filter_kind() {
            cfg = cfg.with_filter(kind)?;
        }
        Ok(cfg)
    }

    /// Serializes back to TOML; parsing the output yields an equal config
    /// (`cp_loss` is a command-line option and is not part of the file).
    pub fn to_toml_string(&self) -> String {
        let raw = RawConfig {
            scheme: OneOrMany::Many(self.schemes.iter().map(|s| s.to_string()).collect()),
            k: self.subcarriers,
            m: self.subsymbols,
            t: self.tx,
            r: self.rx,
            l: Some(self.cp_len),
            constellation: Some(self.constellation.clone()),
            snr_db: self.snr_db.clone(),
            n_channels: self.n_channels,
            n_blocks: self.n_blocks,
            seed: Some(self.seed),
            out: Some(self.out.clone()),
        };
        toml::to_string(&raw).expect("configuration is always representable as TOML")
    }
}

/// Command-line values that replace file values when present.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub schemes: Option<Vec<String>>,
    pub snr_db: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub n_channels: Option<usize>,
    pub n_blocks: Option<usize>,
    pub cp_loss: bool,
}

impl Overrides {
    /// Applies the overrides and revalidates; errors name the flag.
    pub fn apply(&self, mut cfg: SimConfig) -> Result<SimConfig> {
        if let Some(names) = &self.schemes {
            cfg.schemes = names
                .iter()
                .map(|s| s.parse())
                .collect::<Result<_>>()
                .map_err(|e| Error::Config(format!("--scheme: {e}")))?;
        }
        if let Some(snr) = &self.snr_db {
            cfg.snr_db = snr.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        if let Some(n) = self.n_channels {
            cfg.n_channels = n;
        }
        if let Some(n) = self.n_blocks {
            cfg.n_blocks = n;
        }
        cfg.cp_loss |= self.cp_loss;
        let flag = |key: &str| {
            match key {
                "scheme" => "--scheme",
                "snr_db" => "--snr",
                "n_channels" => "--channels",
                "n_blocks" => "--blocks",
                other => return format!("`{other}`"),
            }
            .to_string()
        };
        cfg.validate_with(flag)?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
scheme = "proposed_dirichlet"
K = 8
M = 2
T = 2
R = 2
snr_db = [0, 10]
n_channels = 5
n_blocks = 5
"#;

    #[test]
    fn scheme_names_round_trip() {
        for s in [
            Scheme::ProposedDirichlet,
            Scheme::BaselineDirichlet,
            Scheme::BaselineRc(0.9),
            Scheme::BaselineRc(0.25),
            Scheme::Ofdm,
        ] {
            assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
        }
        assert_eq!("baseline_rc".parse::<Scheme>().unwrap(), Scheme::BaselineRc(0.9));
        assert_eq!(" OFDM ".parse::<Scheme>().unwrap(), Scheme::Ofdm);
        assert!(matches!("mmse".parse::<Scheme>(), Err(Error::UnknownScheme(_))));
        assert!(matches!("baseline_rc(1.5)".parse::<Scheme>(), Err(Error::RollOff(_))));
        assert!("baseline_rc(x)".parse::<Scheme>().is_err());
    }

    #[test]
    fn minimal_config_defaults() {
        let cfg = SimConfig::from_toml_str(MINIMAL, "min.toml").unwrap();
        assert_eq!(cfg.block_len(), 16);
        assert_eq!(cfg.cp_len, 2);
        assert_eq!(cfg.constellation, "qpsk");
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.schemes, vec![Scheme::ProposedDirichlet]);
        assert_eq!(cfg.snr_db, vec![0.0, 10.0]);
    }

    #[test]
    fn small_blocks_get_one_tap() {
        assert_eq!(default_cp_len(4), 1);
        assert_eq!(default_cp_len(1024), 128);
    }

    #[test]
    fn scheme_list_and_infinite_snr() {
        let text = MINIMAL
            .replace("\"proposed_dirichlet\"", "[\"ofdm\", \"baseline_rc(0.5)\"]")
            .replace("[0, 10]", "[0, inf]");
        let cfg = SimConfig::from_toml_str(&text, "x").unwrap();
        assert_eq!(cfg.schemes, vec![Scheme::Ofdm, Scheme::BaselineRc(0.5)]);
        assert!(cfg.snr_db[1].is_infinite());
    }

    #[test]
    fn unknown_key_is_reported_with_line() {
        let text = format!("{MINIMAL}alpha = 0.9\n");
        let err = SimConfig::from_toml_str(&text, "cfg.toml").unwrap_err().to_string();
        assert!(err.contains("alpha"), "{err}");
        assert!(err.contains("line 10"), "{err}");
    }

    #[test]
    fn type_mismatch_is_reported_with_line() {
        let text = MINIMAL.replace("K = 8", "K = \"eight\"");
        let err = SimConfig::from_toml_str(&text, "cfg.toml").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn constraint_errors_name_line_and_key() {
        let text = MINIMAL.replace("M = 2", "M = 0");
        let err = SimConfig::from_toml_str(&text, "cfg.toml").unwrap_err().to_string();
        assert!(err.contains("cfg.toml:4: `M`"), "{err}");

        let text = MINIMAL.replace("\"proposed_dirichlet\"", "\"zf\"");
        let err = SimConfig::from_toml_str(&text, "cfg.toml").unwrap_err().to_string();
        assert!(err.contains("cfg.toml:2: `scheme`"), "{err}");

        let text = format!("{MINIMAL}constellation = \"8psk\"\n");
        let err = SimConfig::from_toml_str(&text, "cfg.toml").unwrap_err().to_string();
        assert!(err.contains("cfg.toml:10: `constellation`"), "{err}");

        let text = format!("{MINIMAL}L = 17\n");
        assert!(SimConfig::from_toml_str(&text, "c").is_err());
    }

    #[test]
    fn channel_memory_constraint() {
        let text = MINIMAL.replace("K = 8", "K = 3").replace("M = 2", "M = 2\nL = 1");
        let cfg = SimConfig::from_toml_str(&text, "c").unwrap();
        assert_eq!(cfg.block_len(), 6);
        assert!(cfg.check_channel_memory(1).is_ok());
        let err = cfg.check_channel_memory(2).unwrap_err().to_string();
        assert!(err.contains("`L`"), "{err}");
    }

    #[test]
    fn paper_config_round_trips() {
        let text = r#"
scheme = ["proposed_dirichlet", "baseline_rc(0.9)", "ofdm"]
K = 256
M = 4
T = 2
R = 2
snr_db = [0, 5, 10, 15, 20, 25, 30]
n_channels = 500
n_blocks = 100
seed = 2024
out = "k256.csv"
"#;
        let a = SimConfig::from_toml_str(text, "paper").unwrap();
        assert_eq!(a.cp_len, 128);
        let b = SimConfig::from_toml_str(&a.to_toml_string(), "round-trip").unwrap();
        assert_eq!(a, b);
        assert!(a.check_scale(false).is_err());
        assert!(a.check_scale(true).is_ok());
    }

    #[test]
    fn overrides_replace_values() {
        let cfg = SimConfig::from_toml_str(MINIMAL, "c").unwrap();
        let ov = Overrides {
            schemes: Some(vec!["ofdm".into(), "baseline_dirichlet".into()]),
            snr_db: Some(vec![3.0]),
            seed: Some(11),
            out: Some("o.csv".into()),
            cp_loss: true,
            ..Default::default()
        };
        let cfg = ov.apply(cfg).unwrap();
        assert_eq!(cfg.schemes, vec![Scheme::Ofdm, Scheme::BaselineDirichlet]);
        assert_eq!(cfg.snr_db, vec![3.0]);
        assert_eq!(cfg.seed, 11);
        assert!(cfg.cp_loss);

        let err = Overrides {
            snr_db: Some(vec![]),
            ..Default::default()
        }
        .apply(cfg.clone())
        .unwrap_err()
        .to_string();
        assert!(err.contains("--snr"), "{err}");
        let err = Overrides {
            schemes: Some(vec!["bogus".into()]),
            ..Default::default()
        }
        .apply(cfg)
        .unwrap_err()
        .to_string();
        assert!(err.contains("--scheme"), "{err}");
    }

    #[test]
    fn gfdm_config_per_scheme() {
        let cfg = SimConfig::from_toml_str(MINIMAL, "c").unwrap();
        let o = cfg.gfdm_config(&Scheme::Ofdm).unwrap();
        assert_eq!((o.subcarriers(), o.subsymbols()), (16, 1));
        let rc = cfg.gfdm_config(&Scheme::BaselineRc(0.9)).unwrap();
        assert_eq!(rc.filter_kind(), &FilterKind::RaisedCosine { alpha: 0.9 });
    }
}
