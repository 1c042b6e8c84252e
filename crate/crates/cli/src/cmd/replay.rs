//! Re-runs the command recorded in a manifest with its recorded settings.

use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::cmd::{inpaint, msi, prox_curve, synth};
use crate::failure::{CmdResult, Failure};
use crate::manifest;

#[derive(Args, Clone, Debug)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

fn parse<T: DeserializeOwned>(config: Value, command: &str) -> anyhow::Result<T> {
    serde_json::from_value(config).with_context(|| format!("manifest config does not fit {command}"))
}

pub fn run(args: &ReplayArgs) -> CmdResult {
    let m = manifest::read(&args.manifest)?;
    match m.command.as_str() {
        "prox-curve" => prox_curve::run(&parse(m.config, &m.command)?),
        "synth" => synth::run(&parse(m.config, &m.command)?),
        "inpaint" => inpaint::run(&parse(m.config, &m.command)?),
        "msi" => msi::run(&parse(m.config, &m.command)?),
        other => Err(Failure::Runtime(anyhow::anyhow!(
            "manifest {} records unknown command {other:?}",
            args.manifest.display()
        ))),
    }
}
