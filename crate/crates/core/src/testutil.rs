use std::sync::OnceLock;

use crate::config::defaults;
use crate::design::{CalibratedSet, Design, DesignModel};

pub fn calibrated() -> &'static CalibratedSet {
    static SET: OnceLock<CalibratedSet> = OnceLock::new();
    SET.get_or_init(|| defaults::calibrated_designs().expect("default calibration"))
}

pub fn model(d: Design) -> DesignModel {
    calibrated().get(d).expect("design present").clone()
}
