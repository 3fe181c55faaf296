//! TOML configuration and the resolved settings the pipeline runs with.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::TieCredit;
use crate::graph::{GraphWeights, QTermIdf};
use crate::ilp::{BoundMode, SolverOptions};
use crate::kb::{SelectionParams, TfIdfNormalization};
use crate::text::ChunkMode;

/// Everything the pipeline needs, with defaults filled in.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub weights: GraphWeights,
    pub selection: SelectionParams,
    pub solver: SolverOptions,
    pub tie_credit: TieCredit,
    pub chunking: ChunkMode,
}

/// Selection sizes, all optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub pool: Option<usize>,
    pub kb_top_k: Option<usize>,
    pub extra_top_k: Option<usize>,
    pub max_sentence_chars: Option<usize>,
    pub max_tables: Option<usize>,
    pub max_rows: Option<usize>,
}

/// The config file as written. Unset keys keep their defaults.
///
/// ```toml
/// w = [2, 4, 4, 4, 2]
/// edge_threshold_qf = 0.1
/// science_lexicon = "science_terms.txt"
/// tie_credit = "fractional"
/// solver_bound = "lp"
///
/// [selection]
/// kb_top_k = 50
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub w: Option<[u32; 5]>,
    pub qterm_base: Option<f64>,
    pub edge_threshold_qf: Option<f64>,
    pub edge_threshold_fc: Option<f64>,
    pub edge_scale: Option<f64>,
    /// Relative paths resolve against the config file's directory.
    pub science_lexicon: Option<PathBuf>,
    pub science_boost: Option<f64>,
    pub qterm_idf: Option<QTermIdf>,
    pub tie_credit: Option<TieCredit>,
    pub tfidf_normalization: Option<TfIdfNormalization>,
    pub solver_bound: Option<BoundMode>,
    pub chunking: Option<ChunkMode>,
    pub selection: SelectionConfig,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config =
            Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((config, base))
    }

    /// Applies the file's values over the defaults. `base_dir` anchors a
    /// relative lexicon path.
    pub fn resolve(&self, base_dir: &Path) -> Result<Settings> {
        let mut s = Settings::default();
        let w = &mut s.weights;
        macro_rules! set {
            ($target:expr, $value:expr) => {
                if let Some(v) = $value {
                    $target = v;
                }
            };
        }
        set!(w.w, self.w);
        set!(w.qterm_base, self.qterm_base);
        set!(w.edge_threshold_qf, self.edge_threshold_qf);
        set!(w.edge_threshold_fc, self.edge_threshold_fc);
        set!(w.edge_scale, self.edge_scale);
        set!(w.qterm_idf, self.qterm_idf);
        if let Some(lexicon) = &self.science_lexicon {
            w.load_science_lexicon(&base_dir.join(lexicon))?;
        }
        set!(w.science_boost, self.science_boost);
        w.validate()?;

        set!(s.tie_credit, self.tie_credit);
        set!(s.selection.normalization, self.tfidf_normalization);
        set!(s.solver.bound, self.solver_bound);
        set!(s.chunking, self.chunking);
        let sel = &mut s.selection;
        set!(sel.pool, self.selection.pool);
        set!(sel.kb_top_k, self.selection.kb_top_k);
        set!(sel.extra_top_k, self.selection.extra_top_k);
        set!(sel.max_sentence_chars, self.selection.max_sentence_chars);
        set!(sel.max_tables, self.selection.max_tables);
        set!(sel.max_rows, self.selection.max_rows);
        Ok(s)
    }
}

impl Settings {
    /// Reads a config file, or the defaults when `path` is `None`.
    pub fn from_file(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => {
                let (config, base) = Config::load(p)?;
                config.resolve(&base)
            }
            None => Ok(Settings::default()),
        }
    }
}
