//! Run configuration: pipeline parameters plus harness settings, loadable
//! from a flat `key = value` file. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use icdr_core::disarm::{PipelineConfig, StepSet};

/// Environment variable holding the default config path.
pub const CONFIG_ENV: &str = "ICDR_CONFIG";

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub pipeline: PipelineConfig,
    pub jobs: usize,
    pub seed: u64,
    pub report_path: Option<PathBuf>,
    pub timeout_ms: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            pipeline: PipelineConfig::default(),
            jobs: 1,
            seed: 0,
            report_path: None,
            timeout_ms: 10_000,
        }
    }
}

/// Parse a comma-separated step list. `rebuild` is accepted (it is always
/// implied) and the optional steps toggle on.
pub fn parse_steps(spec: &str) -> Result<StepSet, String> {
    let mut steps = StepSet::none();
    let mut any = false;
    for token in spec.split(',') {
        let token = token.trim();
        match token {
            "rebuild" => any = true,
            "resize" => {
                steps.resize = true;
                any = true;
            }
            "filter" | "filters" => {
                steps.filter = true;
                any = true;
            }
            "transcode" => {
                steps.transcode = true;
                any = true;
            }
            "" => {}
            other => return Err(format!("unknown step '{other}'")),
        }
    }
    if !any {
        return Err("step list is empty".to_string());
    }
    Ok(steps)
}

impl RunConfig {
    /// Apply `key = value` lines. Blank lines and `#` comments are ignored;
    /// any unknown key is an error.
    pub fn apply_text(&mut self, text: &str) -> Result<(), String> {
        for (number, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("line {}: expected key = value", number + 1));
            };
            let key = key.trim();
            let value = value.trim();
            let parse_err = |e: String| format!("line {}: {key}: {e}", number + 1);
            match key {
                "resize_scale" => {
                    self.pipeline.resize_scale =
                        value.parse().map_err(|e: std::num::ParseFloatError| parse_err(e.to_string()))?
                }
                "blur_sigma" => {
                    self.pipeline.blur_sigma =
                        value.parse().map_err(|e: std::num::ParseFloatError| parse_err(e.to_string()))?
                }
                "blur_radius" => {
                    self.pipeline.blur_radius =
                        value.parse().map_err(|e: std::num::ParseIntError| parse_err(e.to_string()))?
                }
                "jpeg_quality" => {
                    self.pipeline.jpeg_quality =
                        value.parse().map_err(|e: std::num::ParseIntError| parse_err(e.to_string()))?
                }
                "steps" => self.pipeline.steps = parse_steps(value).map_err(parse_err)?,
                "detox_gamma" => {
                    self.pipeline.detox_gamma =
                        value.parse().map_err(|e: std::num::ParseFloatError| parse_err(e.to_string()))?
                }
                "detox_w" => {
                    self.pipeline.detox_w =
                        value.parse().map_err(|e: std::num::ParseFloatError| parse_err(e.to_string()))?
                }
                "max_pixels" => {
                    self.pipeline.max_pixels =
                        value.parse().map_err(|e: std::num::ParseIntError| parse_err(e.to_string()))?
                }
                "jobs" => {
                    self.jobs =
                        value.parse().map_err(|e: std::num::ParseIntError| parse_err(e.to_string()))?;
                    if self.jobs == 0 {
                        return Err(parse_err("jobs must be >= 1".to_string()));
                    }
                }
                "seed" => {
                    self.seed =
                        value.parse().map_err(|e: std::num::ParseIntError| parse_err(e.to_string()))?
                }
                "report_path" => self.report_path = Some(PathBuf::from(value)),
                "timeout_ms" => {
                    self.timeout_ms =
                        value.parse().map_err(|e: std::num::ParseIntError| parse_err(e.to_string()))?
                }
                other => return Err(format!("line {}: unknown key '{other}'", number + 1)),
            }
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        self.apply_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_known_keys() {
        let mut cfg = RunConfig::default();
        cfg.apply_text(
            "# comment\nresize_scale = 0.95\njpeg_quality=85\nsteps = resize,transcode\njobs = 4\n",
        )
        .unwrap();
        assert_eq!(cfg.pipeline.resize_scale, 0.95);
        assert_eq!(cfg.pipeline.jpeg_quality, 85);
        assert!(cfg.pipeline.steps.resize);
        assert!(!cfg.pipeline.steps.filter);
        assert!(cfg.pipeline.steps.transcode);
        assert_eq!(cfg.jobs, 4);
    }

    #[test]
    fn rejects_unknown_keys() {
        let mut cfg = RunConfig::default();
        let err = cfg.apply_text("no_such_key = 1\n").unwrap_err();
        assert!(err.contains("unknown key"));
    }

    #[test]
    fn rejects_empty_steps() {
        assert!(parse_steps("").is_err());
        assert!(parse_steps("warp").is_err());
        assert!(parse_steps("rebuild").is_ok());
    }
}
