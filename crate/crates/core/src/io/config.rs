//! Line-oriented `key = value` pipeline configuration.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::manifold::IsomapParams;
use crate::observables::{ObservableParams, ObservableWeights, SpeedScale};
use crate::segment::{DEFAULT_MERGE_TOLERANCE, DEFAULT_MIN_LEN};
use crate::sim::scenario::{parse, Scenario};

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "SWARM_MANIFOLD_OUT";

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Scenario(Scenario),
    Input(PathBuf),
}

/// Which position track the analysis consumes for simulated data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Track {
    #[default]
    Unwrapped,
    Wrapped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub source: Option<Source>,
    pub seed: u64,
    pub observables: ObservableParams,
    pub isomap: IsomapParams,
    pub min_len: usize,
    pub merge_tolerance: f64,
    pub out_dir: PathBuf,
    pub track: Track,
    /// Reorder agents to consistent identities before Isomap.
    pub canonical_order: bool,
    // scenario overrides seen before the scenario itself was chosen
    pending: Vec<(String, String)>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            source: None,
            seed: 0,
            observables: ObservableParams::default(),
            isomap: IsomapParams::default(),
            min_len: DEFAULT_MIN_LEN,
            merge_tolerance: DEFAULT_MERGE_TOLERANCE,
            out_dir: default_out_dir(),
            track: Track::Unwrapped,
            canonical_order: true,
            pending: Vec::new(),
        }
    }
}

pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::config(key, format!("expected a boolean, got `{other}`"))),
    }
}

impl PipelineConfig {
    pub fn for_scenario(name: &str) -> Result<Self> {
        let mut config = PipelineConfig::default();
        config.set("scenario", name)?;
        Ok(config)
    }

    pub fn for_input(path: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            source: Some(Source::Input(path.into())),
            ..PipelineConfig::default()
        }
    }

    pub fn scenario(&self) -> Option<&Scenario> {
        match &self.source {
            Some(Source::Scenario(s)) => Some(s),
            _ => None,
        }
    }

    /// Applies one setting. Later calls override earlier ones.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "scenario" => {
                if let Some(Source::Input(_)) = self.source {
                    return Err(Error::config(key, "cannot combine a scenario with an input file"));
                }
                let mut scenario = Scenario::from_name(value)?;
                for (k, v) in std::mem::take(&mut self.pending) {
                    if !scenario.set(&k, &v)? {
                        return Err(Error::config(&k, format!("unknown key for scenario {value}")));
                    }
                }
                self.source = Some(Source::Scenario(scenario));
            }
            "input" => {
                if let Some(Source::Scenario(_)) = self.source {
                    return Err(Error::config(key, "cannot combine an input file with a scenario"));
                }
                self.source = Some(Source::Input(PathBuf::from(value)));
            }
            "seed" => self.seed = parse(key, value)?,
            "xi1" => self.observables.weights.speed = parse(key, value)?,
            "xi2" => self.observables.weights.polarization = parse(key, value)?,
            "epsilon_mode" => self.observables.epsilon_mode = value.parse()?,
            "speed_scale" => {
                self.observables.speed_scale = if value == "max" {
                    SpeedScale::SeriesMax
                } else {
                    SpeedScale::Fixed(parse(key, value)?)
                }
            }
            "k" => self.isomap.k = parse(key, value)?,
            "dmax" => self.isomap.max_dimension = parse(key, value)?,
            "threshold" => self.isomap.threshold = parse(key, value)?,
            "min_len" => self.min_len = parse(key, value)?,
            "merge_tol" => self.merge_tolerance = parse(key, value)?,
            "out" => self.out_dir = PathBuf::from(value),
            "track" => {
                self.track = match value {
                    "unwrapped" => Track::Unwrapped,
                    "wrapped" => Track::Wrapped,
                    other => {
                        return Err(Error::config(
                            key,
                            format!("expected `unwrapped` or `wrapped`, got `{other}`"),
                        ))
                    }
                }
            }
            "canonical_order" => self.canonical_order = parse_bool(key, value)?,
            _ => match &mut self.source {
                Some(Source::Scenario(s)) => {
                    if !s.set(key, value)? {
                        return Err(Error::config(key, format!("unknown key for scenario {}", s.name())));
                    }
                }
                Some(Source::Input(_)) => return Err(Error::config(key, "unknown key")),
                None => self.pending.push((key.to_string(), value.to_string())),
            },
        }
        Ok(())
    }

    /// Applies every entry of a config text. `origin` labels parse errors.
    pub fn apply_text(&mut self, text: &str, origin: &Path) -> Result<()> {
        let entries = parse_entries(text, origin)?;
        // the scenario must be known before its own keys can be checked
        let (first, rest): (Vec<_>, Vec<_>) = entries
            .into_iter()
            .partition(|(k, _)| k == "scenario" || k == "input");
        for (k, v) in first.into_iter().chain(rest) {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_text(&text, path)
    }

    /// Checks cross-field rules once all settings are in.
    pub fn validate(&self) -> Result<()> {
        if let Some((key, _)) = self.pending.first() {
            return Err(Error::config(key, "scenario setting given without a scenario"));
        }
        if self.source.is_none() {
            return Err(Error::config("scenario", "one of `scenario` or `input` is required"));
        }
        self.observables.weights.validate()?;
        if let SpeedScale::Fixed(c) = self.observables.speed_scale {
            if !(c > 0.0) {
                return Err(Error::config("speed_scale", format!("must be positive, got {c}")));
            }
        }
        self.isomap.validate()?;
        if self.min_len == 0 {
            return Err(Error::config("min_len", "must be a positive integer"));
        }
        if !(self.merge_tolerance >= 0.0) {
            return Err(Error::config("merge_tol", "must be non-negative"));
        }
        Ok(())
    }

    /// The configured scenario with the pipeline seed applied.
    pub fn seeded_scenario(&self) -> Option<Scenario> {
        self.scenario().map(|s| {
            let mut s = s.clone();
            s.set_seed(self.seed);
            s
        })
    }

    pub fn weights(&self) -> ObservableWeights {
        self.observables.weights
    }
}

/// Splits config text into `(key, value)` pairs, skipping blanks and `#`
/// comments.
pub fn parse_entries(text: &str, origin: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line: i + 1,
                reason: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line: i + 1,
                reason: "empty key".into(),
            });
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::EpsilonMode;

    #[test]
    fn parses_text_with_comments() {
        let text = "# speed test\nnoise_high = 0.5\nscenario = noise-switch\n\nseed = 9 # trailing\nepsilon_mode = nearest_neighbor\n";
        let mut c = PipelineConfig::default();
        c.apply_text(text, Path::new("cfg")).unwrap();
        c.validate().unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.observables.epsilon_mode, EpsilonMode::NearestNeighbor);
        match c.scenario().unwrap() {
            Scenario::NoiseSwitch(s) => assert_eq!(s.noise_high, 0.5),
            other => panic!("wrong scenario {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_key() {
        let mut c = PipelineConfig::for_scenario("speed-switch").unwrap();
        let err = c.set("k", "seven").unwrap_err().to_string();
        assert!(err.contains("`k`"), "{err}");
        let err = c.set("bogus", "1").unwrap_err().to_string();
        assert!(err.contains("`bogus`"), "{err}");
        c.set("xi1", "0.9").unwrap();
        c.set("xi2", "0.9").unwrap();
        let err = c.validate().unwrap_err().to_string();
        assert!(err.contains("xi"), "{err}");
    }

    #[test]
    fn source_is_exclusive() {
        let mut c = PipelineConfig::for_input("a.csv");
        assert!(c.set("scenario", "speed-switch").is_err());
        assert!(PipelineConfig::default().validate().is_err());
    }

    #[test]
    fn bad_line_reports_position() {
        let err = parse_entries("a = 1\nnonsense\n", Path::new("x.cfg")).unwrap_err();
        assert!(err.to_string().starts_with("x.cfg:2:"), "{err}");
    }
}
