//! Experiment recipes: flat key/value tables, one section per recipe.
//!
//! ```toml
//! [recipe.baseline]
//! command = "analyze"
//! arch = "pf"
//! kp = 45.0
//! kv = 0.8
//! ka = 0.25
//! hw = 0.88
//! tau0 = 0.5
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Analyze,
    Bounds,
    Synthesize,
    Nnir,
    Simulate,
    Table3,
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.to_possible_value().expect("no skipped variants");
        f.write_str(s.get_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ArchKind {
    Pf,
    Rpf,
    OneAndRth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionKind {
    Hinf,
    Rho,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ResidueKind {
    Exact,
    Published,
}

/// Every parameter any command accepts. Unset fields fall back to command defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandKind>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub arch: Option<ArchKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kv: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ka: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<CriterionKind>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ka_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ka_step: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub hw_scaled: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kp_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kp_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kp_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kv_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kv_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kv_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residue_test: Option<ResidueKind>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_on: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_off: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),* $(,)?) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f; } )*
    };
}

impl Params {
    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: Params) -> Params {
        overlay_fields!(self, top;
            command, arch, r, kp, kv, ka, hw, d, tau, tau0, criterion,
            r_max, ka_max, ka_step, eta,
            hw_scaled, kp_min, kp_max, kp_points, kv_min, kv_max, kv_points, tau_points, residue_test,
            n, v_r, amplitude, frequency, t_on, t_off, phase, dt, t_end, record_every,
            out,
        );
        self
    }
}

/// A named, runnable experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecipe {
    pub name: String,
    pub command: CommandKind,
    pub params: Params,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecipeFile {
    #[serde(default)]
    recipe: BTreeMap<String, Params>,
}

pub fn parse_recipes(text: &str) -> Result<Vec<ExperimentRecipe>> {
    let file: RecipeFile = toml::from_str(text)?;
    file.recipe
        .into_iter()
        .map(|(name, params)| {
            let command = params
                .command
                .ok_or_else(|| anyhow!("recipe '{name}' has no command"))?;
            Ok(ExperimentRecipe { name, command, params })
        })
        .collect()
}

pub fn to_toml(recipes: &[ExperimentRecipe]) -> Result<String> {
    let file = RecipeFile {
        recipe: recipes
            .iter()
            .map(|r| {
                let mut p = r.params.clone();
                p.command = Some(r.command);
                (r.name.clone(), p)
            })
            .collect(),
    };
    Ok(toml::to_string(&file)?)
}

/// Loads the recipe to run from `path`. With no `name`, the file must hold exactly one.
pub fn load_recipe(path: &Path, name: Option<&str>) -> Result<ExperimentRecipe> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut recipes = parse_recipes(&text).with_context(|| format!("parsing config {}", path.display()))?;
    match name {
        Some(name) => {
            let names: Vec<String> = recipes.iter().map(|r| r.name.clone()).collect();
            let pos = recipes
                .iter()
                .position(|r| r.name == name)
                .ok_or_else(|| anyhow!("no recipe '{name}' in {} (available: {})", path.display(), names.join(", ")))?;
            Ok(recipes.swap_remove(pos))
        }
        None if recipes.len() == 1 => Ok(recipes.pop().expect("one recipe")),
        None if recipes.is_empty() => bail!("{} defines no recipes", path.display()),
        None => {
            let names: Vec<String> = recipes.iter().map(|r| r.name.clone()).collect();
            bail!("{} defines several recipes; pick one with --recipe ({})", path.display(), names.join(", "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let recipes = vec![
            ExperimentRecipe {
                name: "base".into(),
                command: CommandKind::Analyze,
                params: Params {
                    arch: Some(ArchKind::Pf),
                    kp: Some(45.0),
                    kv: Some(0.8),
                    ka: Some(0.25),
                    hw: Some(0.88),
                    tau0: Some(0.5),
                    criterion: Some(CriterionKind::Hinf),
                    ..Params::default()
                },
            },
            ExperimentRecipe {
                name: "scan".into(),
                command: CommandKind::Nnir,
                params: Params {
                    ka: Some(0.95),
                    hw_scaled: Some(2.0 / 1.95),
                    kp_points: Some(41),
                    residue_test: Some(ResidueKind::Published),
                    out: Some("region.csv".into()),
                    ..Params::default()
                },
            },
        ];
        let text = to_toml(&recipes).unwrap();
        let mut back = parse_recipes(&text).unwrap();
        for r in &mut back {
            r.params.command = None;
        }
        assert_eq!(back, recipes);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = parse_recipes("[recipe.a]\ncommand = \"bounds\"\ntau_zero = 1.0\n").unwrap_err();
        assert!(format!("{err:#}").contains("tau_zero"));
    }

    #[test]
    fn missing_command_rejected() {
        assert!(parse_recipes("[recipe.a]\ntau0 = 0.5\n").is_err());
    }

    #[test]
    fn overlay_prefers_top() {
        let base = Params { kp: Some(1.0), kv: Some(2.0), ..Params::default() };
        let top = Params { kv: Some(3.0), ..Params::default() };
        let m = base.overlay(top);
        assert_eq!((m.kp, m.kv), (Some(1.0), Some(3.0)));
    }
}
