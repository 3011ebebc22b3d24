//! Flat `section.key=value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys are
//! errors so that typos never silently fall back to defaults.

use std::path::Path;
use std::str::FromStr;

use parfam::datagen::GenConfig;
use parfam::optimize::{Backend, FitConfig};
use parfam::search::SearchConfig;
use parfam::{BaseFunction, BaseKind, ModelSpec};

use crate::CliError;

/// Everything a command may read from a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub search: SearchConfig,
    pub fit: FitConfig,
    pub gen: GenConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            fit: FitConfig::default(),
            gen: GenConfig::new(ModelSpec::polynomial(1, 2, 2)),
        }
    }
}

fn value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T, CliError> {
    raw.parse()
        .map_err(|_| CliError::input(format!("config line {line}: `{key}` has invalid value `{raw}`")))
}

fn list<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<Vec<T>, CliError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| value(line, key, s))
        .collect()
}

fn kinds(line: usize, key: &str, raw: &str) -> Result<Vec<BaseKind>, CliError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            BaseKind::from_str(s).map_err(|e| CliError::input(format!("config line {line}: `{key}`: {e}")))
        })
        .collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let (key, val) = s
                .split_once('=')
                .ok_or_else(|| CliError::input(format!("config line {line}: expected `key=value`")))?;
            cfg.set(line, key.trim(), val.trim())?;
        }
        cfg.search.validate()?;
        cfg.fit.validate()?;
        cfg.gen.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn set(&mut self, line: usize, key: &str, v: &str) -> Result<(), CliError> {
        let s = &mut self.search;
        let f = &mut self.fit;
        let g = &mut self.gen;
        match key {
            "search.max_deg_input_num" => s.max_deg_input_num = value(line, key, v)?,
            "search.max_deg_input_den" => s.max_deg_input_den = value(line, key, v)?,
            "search.max_deg_output_num" => s.max_deg_output_num = value(line, key, v)?,
            "search.max_deg_output_den" => s.max_deg_output_den = value(line, key, v)?,
            "search.max_base_functions" => s.max_base_functions = value(line, key, v)?,
            "search.base_functions" => s.base_functions = kinds(line, key, v)?,
            "search.max_var_power" => s.max_var_power = value(line, key, v)?,
            "search.success_r2" => s.success_r2 = value(line, key, v)?,
            "search.time_budget" => s.time_budget = Some(value(line, key, v)?),
            "search.eval_budget" => s.eval_budget = Some(value(line, key, v)?),
            "optim.lambda" => f.lambda = value(line, key, v)?,
            "optim.bh_iterations" => f.bh_iterations = value(line, key, v)?,
            "optim.max_local_steps" => f.max_local_steps = Some(value(line, key, v)?),
            "optim.step_size" => f.step_size = value(line, key, v)?,
            "optim.temperature" => f.temperature = value(line, key, v)?,
            "optim.backend" => {
                f.backend = Backend::from_str(v).map_err(|e| CliError::input(format!("config line {line}: {e}")))?
            }
            "optim.n_starts" => f.n_starts = value(line, key, v)?,
            "optim.seed" => f.seed = value(line, key, v)?,
            "optim.thresholds" => f.thresholds = list(line, key, v)?,
            "gen.n_vars" => g.spec.n_vars = value(line, key, v)?,
            "gen.deg_input_num" => g.spec.deg_input_num = value(line, key, v)?,
            "gen.deg_input_den" => g.spec.deg_input_den = value(line, key, v)?,
            "gen.deg_output_num" => g.spec.deg_output_num = value(line, key, v)?,
            "gen.deg_output_den" => g.spec.deg_output_den = value(line, key, v)?,
            "gen.max_var_power" => g.spec.max_var_power = value(line, key, v)?,
            "gen.base_functions" => {
                g.spec.base_functions = kinds(line, key, v)?.into_iter().map(BaseFunction::new).collect()
            }
            "gen.n_points" => g.n_points = value(line, key, v)?,
            "gen.domain_low" => g.domain_low = value(line, key, v)?,
            "gen.domain_high" => g.domain_high = value(line, key, v)?,
            "gen.min_nonzero" => g.min_nonzero = value(line, key, v)?,
            "gen.max_nonzero" => g.max_nonzero = value(line, key, v)?,
            "gen.coeff_std" => g.coeff_std = value(line, key, v)?,
            "gen.y_cap" => g.y_cap = value(line, key, v)?,
            "gen.max_resamples" => g.max_resamples = value(line, key, v)?,
            _ => return Err(CliError::input(format!("config line {line}: unknown key `{key}`"))),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let cfg = RunConfig::parse(
            "# nguyen settings\n\
             search.base_functions = cos, exp\n\
             search.max_deg_output_den=0\n\
             optim.lambda=0.1\n\
             optim.thresholds=1e-5,1e-3\n\
             optim.backend=multistart_bfgs\n",
        )
        .unwrap();
        assert_eq!(cfg.search.base_functions, vec![BaseKind::Cos, BaseKind::Exp]);
        assert_eq!(cfg.search.max_deg_output_den, 0);
        assert_eq!(cfg.fit.lambda, 0.1);
        assert_eq!(cfg.fit.thresholds, vec![1e-5, 1e-3]);
        assert_eq!(cfg.fit.backend, Backend::MultistartBfgs);
    }

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::parse("optim.lamda=0.1").is_err());
        assert!(RunConfig::parse("optim.lambda=abc").is_err());
        assert!(RunConfig::parse("optim.lambda").is_err());
        assert!(RunConfig::parse("optim.lambda=-1").is_err());
        assert!(RunConfig::parse("search.base_functions=tan").is_err());
    }
}
