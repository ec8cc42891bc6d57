//! Run configuration and its flat `key = value` file format.
//!
//! Every key has a default; unknown keys are rejected. `Config::to_text`
//! always writes every key in declaration order, so parsing and re-writing
//! a file produced by `to_text` is byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

trait ConfigValue: Sized {
    fn parse_value(raw: &str) -> std::result::Result<Self, String>;
    fn render(&self) -> String;
}

macro_rules! numeric_value {
    ($($t:ty),*) => {$(
        impl ConfigValue for $t {
            fn parse_value(raw: &str) -> std::result::Result<Self, String> {
                raw.parse::<$t>().map_err(|e| format!("`{raw}`: {e}"))
            }
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}
numeric_value!(u64, usize, f64);

impl ConfigValue for bool {
    fn parse_value(raw: &str) -> std::result::Result<Self, String> {
        match raw {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(format!("`{raw}` is not `true` or `false`")),
        }
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

macro_rules! config {
    ($( $(#[doc = $doc:literal])* $name:ident : $ty:ty = $default:expr ),* $(,)?) => {
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        pub struct Config {
            $( $(#[doc = $doc])* pub $name: $ty, )*
        }

        impl Default for Config {
            fn default() -> Self {
                Config { $( $name: $default, )* }
            }
        }

        impl Config {
            /// Key names in file order.
            pub const KEYS: &'static [&'static str] = &[$(stringify!($name)),*];

            /// One-line documentation per key, for `--help` style listings.
            pub fn key_docs() -> Vec<(&'static str, String, &'static str)> {
                let d = Config::default();
                vec![$( (stringify!($name), d.$name.render(), concat!($($doc),*).trim()), )*]
            }

            pub fn set(&mut self, key: &str, raw: &str) -> std::result::Result<(), String> {
                match key {
                    $( stringify!($name) => { self.$name = <$ty>::parse_value(raw)?; } )*
                    _ => return Err(format!("unknown key `{key}`")),
                }
                Ok(())
            }

            fn entries(&self) -> Vec<(&'static str, String)> {
                vec![$( (stringify!($name), self.$name.render()), )*]
            }
        }
    };
}

config! {
    /// Global seed; every stage derives its own stream from it.
    seed: u64 = 42,
    /// Fusion weight of the code half of a hybrid embedding.
    alpha: f64 = 0.5,
    /// Minimum probability for a Move decision.
    tau: f64 = 0.5,
    /// Ranked candidates reported per method.
    top_k: usize = 1,
    /// Require the best candidate to beat the method's own class.
    compare_source: bool = true,
    /// Only consider classes linked to the method by a call edge or shared token.
    linked_only: bool = false,
    /// Drop constructors and get/set/is accessors from extracted corpora.
    exclude_accessors: bool = false,
    /// Fail instead of warning when a graph embedding dimension exceeds |V|/2.
    strict_dims: bool = false,

    /// Maximum intermediate nodes on a path context.
    max_path_length: usize = 9,
    /// Maximum leaf-index distance between path endpoints.
    max_path_width: usize = 25,
    /// Contexts kept per method; extra contexts are subsampled uniformly.
    max_contexts: usize = 200,

    /// Code embedding size (token, path, context and method vectors).
    code_dim: usize = 128,
    /// Vocabulary frequency threshold.
    code_min_count: usize = 1,
    /// Subtokens kept per endpoint token.
    code_subtokens: usize = 5,
    /// Initial SGD learning rate of both code encoders.
    code_lr: f64 = 0.05,
    /// Fraction of methods held out to monitor the name-prediction loss.
    code_holdout: f64 = 0.1,
    code2vec_epochs: usize = 20,
    code2seq_epochs: usize = 3000,

    /// Graph embedding size for every technique.
    graph_dim: usize = 128,
    deepwalk_walks: usize = 10,
    deepwalk_walk_length: usize = 80,
    deepwalk_window: usize = 10,
    node2vec_p: f64 = 0.25,
    node2vec_q: f64 = 0.25,
    walklets_walks: usize = 5,
    walklets_walk_length: usize = 80,
    /// Number of skip scales K.
    walklets_scales: usize = 5,
    /// Skip-gram window on each skipped corpus.
    walklets_window: usize = 1,
    skipgram_negatives: usize = 5,
    skipgram_epochs: usize = 5,
    skipgram_lr: f64 = 0.025,
    grarep_kstep: usize = 4,
    /// 1 = first order, 2 = second order, 3 = both halves concatenated.
    line_order: usize = 3,
    line_negative_ratio: usize = 5,
    /// Passes over the edge set.
    line_epochs: usize = 200,
    line_lr: f64 = 0.025,
    prone_step: usize = 10,
    prone_theta: f64 = 0.5,
    prone_mu: f64 = 0.2,
    sdne_alpha: f64 = 1e-6,
    sdne_beta: f64 = 5.0,
    sdne_nu1: f64 = 1e-5,
    sdne_nu2: f64 = 1e-4,
    sdne_batch_size: usize = 200,
    sdne_epochs: usize = 100,
    /// Width of the single hidden encoder layer.
    sdne_hidden: usize = 256,
    sdne_lr: f64 = 0.5,

    /// Positive and negative samples per method when training on the
    /// current placement.
    relocation_pairs: usize = 1,
    cv_folds: usize = 10,
    cv_repeats: usize = 10,
    /// Folds used by grid search inside each training split.
    grid_folds: usize = 3,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set(key.trim(), value.trim()).map_err(|message| Error::Config {
                line: line_no,
                message,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, value) in self.entries() {
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }

    /// SHA-256 of the canonical text form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| Err(Error::Config { line: 0, message });
        if !(0.0..=1.0).contains(&self.alpha) {
            return fail(format!("alpha {} outside [0, 1]", self.alpha));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return fail(format!("tau {} outside (0, 1]", self.tau));
        }
        if !(self.code_holdout >= 0.0 && self.code_holdout < 1.0) {
            return fail(format!("code_holdout {} outside [0, 1)", self.code_holdout));
        }
        let counts = [
            ("top_k", self.top_k),
            ("max_path_length", self.max_path_length),
            ("max_path_width", self.max_path_width),
            ("max_contexts", self.max_contexts),
            ("code_dim", self.code_dim),
            ("code_min_count", self.code_min_count),
            ("code_subtokens", self.code_subtokens),
            ("code2vec_epochs", self.code2vec_epochs),
            ("code2seq_epochs", self.code2seq_epochs),
            ("graph_dim", self.graph_dim),
            ("deepwalk_walks", self.deepwalk_walks),
            ("deepwalk_walk_length", self.deepwalk_walk_length),
            ("deepwalk_window", self.deepwalk_window),
            ("walklets_walks", self.walklets_walks),
            ("walklets_walk_length", self.walklets_walk_length),
            ("walklets_scales", self.walklets_scales),
            ("walklets_window", self.walklets_window),
            ("skipgram_negatives", self.skipgram_negatives),
            ("skipgram_epochs", self.skipgram_epochs),
            ("grarep_kstep", self.grarep_kstep),
            ("line_negative_ratio", self.line_negative_ratio),
            ("line_epochs", self.line_epochs),
            ("sdne_batch_size", self.sdne_batch_size),
            ("sdne_epochs", self.sdne_epochs),
            ("sdne_hidden", self.sdne_hidden),
            ("relocation_pairs", self.relocation_pairs),
            ("cv_folds", self.cv_folds),
            ("cv_repeats", self.cv_repeats),
            ("grid_folds", self.grid_folds),
        ];
        if let Some((key, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return fail(format!("{key} must be positive"));
        }
        if !(1..=3).contains(&self.line_order) {
            return fail(format!("line_order {} not in 1..=3", self.line_order));
        }
        let rates = [
            ("node2vec_p", self.node2vec_p),
            ("node2vec_q", self.node2vec_q),
            ("code_lr", self.code_lr),
            ("skipgram_lr", self.skipgram_lr),
            ("line_lr", self.line_lr),
            ("sdne_lr", self.sdne_lr),
        ];
        if let Some((key, v)) = rates.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return fail(format!("{key} = {v} must be positive"));
        }
        Ok(())
    }
}
