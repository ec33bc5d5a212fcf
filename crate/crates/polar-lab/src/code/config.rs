//! Code-spec config files: structured text with the keys
//! `k_info, crc_size, crc_poly (hex), rate (p/q), construction (ga|5g),
//! design_snr_db, list_schedule, pm_mode`.

use super::{CodeError, CodeSpec, Construction, PmMode, Rate};
use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error in {path}: {source}")]
    Parse {
        path: String,
        source: toml::de::Error,
    },
    #[error("invalid spec in {path}: {source}")]
    Invalid {
        path: String,
        source: CodeError,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    k_info: usize,
    crc_size: usize,
    #[serde(default)]
    crc_poly: u32,
    rate: String,
    construction: Construction,
    design_snr_db: Option<f64>,
    list_schedule: Vec<usize>,
    pm_mode: PmMode,
}

fn parse_rate(s: &str, path: &str) -> Result<Rate, ConfigError> {
    let invalid = || ConfigError::Invalid {
        path: path.to_string(),
        source: CodeError::InvalidRate { num: 0, den: 0 },
    };
    let (num, den) = s.split_once('/').ok_or_else(invalid)?;
    let num: u32 = num.trim().parse().map_err(|_| invalid())?;
    let den: u32 = den.trim().parse().map_err(|_| invalid())?;
    Rate::new(num, den).map_err(|source| ConfigError::Invalid {
        path: path.to_string(),
        source,
    })
}

/// Load and validate a spec; validation warnings are returned alongside.
pub fn load_spec(path: impl AsRef<Path>) -> Result<(CodeSpec, Vec<String>), ConfigError> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: display.clone(),
        source,
    })?;
    let raw: RawConfig = toml::from_str(&text).map_err(|source| ConfigError::Parse {
        path: display.clone(),
        source,
    })?;
    let rate = parse_rate(&raw.rate, &display)?;
    let spec = CodeSpec::new(
        raw.k_info,
        raw.crc_size,
        raw.crc_poly,
        rate,
        raw.construction,
        raw.design_snr_db,
        raw.list_schedule,
        raw.pm_mode,
    )
    .map_err(|source| ConfigError::Invalid {
        path: display.clone(),
        source,
    })?;
    let warnings = spec.validate().map_err(|source| ConfigError::Invalid {
        path: display,
        source,
    })?;
    Ok((spec, warnings))
}

/// Write a spec in the config format, polynomial in hex as in Table 1.
pub fn save_spec(spec: &CodeSpec, path: impl AsRef<Path>) -> Result<(), ConfigError> {
    let path = path.as_ref();
    let schedule = spec
        .list_schedule
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    let mut text = format!(
        "k_info = {}\ncrc_size = {}\ncrc_poly = {:#X}\nrate = \"{}\"\nconstruction = \"{}\"\n",
        spec.k_info, spec.crc_size, spec.crc_poly, spec.rate, spec.construction
    );
    if let Some(snr) = spec.design_snr_db {
        text.push_str(&format!("design_snr_db = {snr}\n"));
    }
    text.push_str(&format!("list_schedule = [{schedule}]\n"));
    text.push_str(&format!(
        "pm_mode = \"{}\"\n",
        match spec.pm_mode {
            PmMode::Approximate => "approximate",
            PmMode::Exact => "exact",
        }
    ));
    std::fs::write(path, text).map_err(|source| ConfigError::Write {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_spec() -> CodeSpec {
        CodeSpec::new(
            128,
            12,
            0xF13,
            Rate::new(1, 2).unwrap(),
            Construction::FiveG,
            Some(2.55),
            vec![2, 4, 8, 16, 32, 64],
            PmMode::Approximate,
        )
        .unwrap()
    }

    #[test]
    fn save_then_load_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spec.cfg");
        let spec = sample_spec();
        save_spec(&spec, &path).unwrap();
        let (loaded, warnings) = load_spec(&path).unwrap();
        assert_eq!(loaded, spec);
        assert!(warnings.is_empty());
    }

    #[test]
    fn bad_schedule_is_a_validation_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.cfg");
        std::fs::write(
            &path,
            "k_info = 64\ncrc_size = 7\ncrc_poly = 0x65\nrate = \"1/2\"\n\
             construction = \"5g\"\nlist_schedule = [4, 2]\npm_mode = \"approximate\"\n",
        )
        .unwrap();
        let err = load_spec(&path).unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { .. }), "{err}");
    }

    #[test]
    fn parse_error_reports_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("broken.cfg");
        std::fs::write(&path, "k_info = \"not a number\"\n").unwrap();
        let err = load_spec(&path).unwrap_err();
        assert!(err.to_string().contains("broken.cfg"));
    }

    #[test]
    fn shipped_configs_load() {
        // repo-root configs/ relative to this crate
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut count = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "cfg") {
                let (spec, warnings) = load_spec(&path).unwrap();
                assert!(warnings.is_empty(), "{path:?}: {warnings:?}");
                assert!(spec.k_info >= 64);
                count += 1;
            }
        }
        assert_eq!(count, 12, "expected the twelve Table 1 configs");
    }
}
