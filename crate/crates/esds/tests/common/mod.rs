#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use liveref_esds::component::Params;
use liveref_esds::config::Config;
use liveref_esds::scheduler::{run_fair_scheduler, RunOutcome};
use liveref_esds::system::esds_alg;

pub fn small() -> Config {
    Config::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/esds_small.json")).unwrap()
}

pub fn run_small(seed: u64, steps: usize, lossy: Option<usize>) -> (Config, Arc<Params>, RunOutcome) {
    let mut cfg = small();
    cfg.run.seed = seed;
    cfg.run.steps = steps;
    cfg.run.lossy = lossy;
    let p = cfg.params().unwrap();
    let out = run_fair_scheduler(&esds_alg(&p, lossy), &cfg.run).unwrap();
    (cfg, p, out)
}
