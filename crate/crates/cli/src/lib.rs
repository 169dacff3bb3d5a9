//! Command-line front end for `platoonlab`.

pub mod args;
pub mod commands;
pub mod recipe;

use std::ffi::OsString;
use std::io::Write;

use anyhow::{bail, Result};
use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use commands::{EXIT_ERROR, EXIT_OK};

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_ERROR
                }
            };
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let kind = cli.command.kind();
    let mut params = cli.command.params();
    let cfg = cli.command.config();
    if let Some(path) = &cfg.config {
        let recipe = recipe::load_recipe(path, cfg.recipe.as_deref())?;
        if recipe.command != kind {
            bail!(
                "recipe '{}' in {} is for '{}', not '{kind}'",
                recipe.name,
                path.display(),
                recipe.command
            );
        }
        params = params.overlay(recipe.params);
    }
    commands::execute(kind, &params, out)
}
