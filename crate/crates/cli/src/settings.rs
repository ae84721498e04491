//! `key=value` config files. Keys are the long flag names without dashes
//! (`lr`, `k`, `data-dir`, ...). Blank lines and `#` comments are ignored.
//! Precedence when resolving a value: flag, then file, then default.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use novelty_rec::model::ModelConfig;
use novelty_rec::Error;

#[derive(Debug, Default, Clone)]
pub struct Settings {
    values: HashMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse {
                    source_name: "config".into(),
                    line: n + 1,
                    message: format!("expected key=value, got `{line}`"),
                }
                .into());
            };
            values.insert(k.trim().replace('_', "-"), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// `flag`, else the file's `key`, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.values.get(key) {
            Some(text) => text.parse().map_err(|_| {
                Error::Validation(format!("config key `{key}`: cannot parse `{text}`")).into()
            }),
            None => Ok(default),
        }
    }
}

/// Model hyperparameters as flags; every field optional so the config file
/// and defaults can fill the gaps.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct ModelFlags {
    /// Novelty window length
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    /// Latent dimension shared by both towers
    #[arg(long)]
    pub latent: Option<usize>,
    #[arg(long)]
    pub token_dim: Option<usize>,
    #[arg(long)]
    pub tag_dim: Option<usize>,
    #[arg(long)]
    pub conv_window: Option<usize>,
    #[arg(long)]
    pub filters: Option<usize>,
    #[arg(long)]
    pub title_len: Option<usize>,
    /// Relative loss improvement below which an epoch counts as stalled
    #[arg(long)]
    pub tol: Option<f64>,
}

impl ModelFlags {
    pub fn resolve(&self, s: &Settings) -> Result<ModelConfig> {
        let d = ModelConfig::default();
        let c = ModelConfig {
            k: s.pick(self.k, "k", d.k)?,
            seed: s.pick(self.seed, "seed", d.seed)?,
            max_epochs: s.pick(self.epochs, "epochs", d.max_epochs)?,
            learning_rate: s.pick(self.lr, "lr", d.learning_rate)?,
            batch_size: s.pick(self.batch, "batch", d.batch_size)?,
            latent_dim: s.pick(self.latent, "latent", d.latent_dim)?,
            token_emb_dim: s.pick(self.token_dim, "token-dim", d.token_emb_dim)?,
            tag_emb_dim: s.pick(self.tag_dim, "tag-dim", d.tag_emb_dim)?,
            conv_window: s.pick(self.conv_window, "conv-window", d.conv_window)?,
            conv_filters: s.pick(self.filters, "filters", d.conv_filters)?,
            title_len: s.pick(self.title_len, "title-len", d.title_len)?,
            convergence_tolerance: s.pick(self.tol, "tol", d.convergence_tolerance)?,
        };
        c.validate()?;
        Ok(c)
    }
}

/// `--users 20` selects the first 20 users; `--users 1,5,9` lists ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UserSelection {
    First(usize),
    Ids(Vec<u32>),
}

impl FromStr for UserSelection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s.contains(',') {
            let ids = s
                .split(',')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(|p| {
                    p.parse::<u32>()
                        .map_err(|_| format!("invalid user id `{p}`"))
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            if ids.is_empty() {
                return Err("empty user list".into());
            }
            Ok(UserSelection::Ids(ids))
        } else {
            s.parse()
                .map(UserSelection::First)
                .map_err(|_| format!("invalid user count `{s}`"))
        }
    }
}

impl UserSelection {
    pub fn resolve(&self, dataset: &novelty_rec::dataset::Dataset) -> Result<Vec<u32>> {
        match self {
            UserSelection::First(0) => {
                bail!(Error::Validation("--users must be at least 1".into()))
            }
            UserSelection::First(n) => Ok(dataset.first_users(*n)),
            UserSelection::Ids(ids) => {
                for &id in ids {
                    dataset.sequence(id)?;
                }
                Ok(ids.clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let s = Settings::parse("# comment\nlr = 0.5\nk=7\n\nseed=3 # trailing").unwrap();
        let flags = ModelFlags {
            k: Some(9),
            ..Default::default()
        };
        let c = flags.resolve(&s).unwrap();
        assert_eq!(c.k, 9);
        assert_eq!(c.learning_rate, 0.5);
        assert_eq!(c.seed, 3);
        assert_eq!(c.latent_dim, ModelConfig::default().latent_dim);
    }

    #[test]
    fn bad_lines() {
        assert!(Settings::parse("novalue").is_err());
        let s = Settings::parse("k=abc").unwrap();
        assert!(ModelFlags::default().resolve(&s).is_err());
    }

    #[test]
    fn user_selection() {
        assert_eq!(
            "20".parse::<UserSelection>().unwrap(),
            UserSelection::First(20)
        );
        assert_eq!(
            "1,2, 3".parse::<UserSelection>().unwrap(),
            UserSelection::Ids(vec![1, 2, 3])
        );
        assert_eq!(
            "7,".parse::<UserSelection>().unwrap(),
            UserSelection::Ids(vec![7])
        );
        assert!("x".parse::<UserSelection>().is_err());
        assert!(",".parse::<UserSelection>().is_err());
    }
}
