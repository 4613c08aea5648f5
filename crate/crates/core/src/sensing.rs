//! Reconfigurable current sense amplifier: coupled differential mode for
//! memory read, decoupled single-ended mode against a reference for CiM.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Default minimum acceptable sense margin (A).
pub const SM_MIN: f64 = 3.7e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SenseMode {
    /// V_DIFF = V_DD: amplifiers coupled, SL compared with SLB.
    Differential,
    /// V_DIFF = 0: amplifiers decoupled, each line compared with I_REF.
    SingleEnded,
}

impl SenseMode {
    /// V_DIFF control level (V_DIFFB is its complement).
    pub fn v_diff(self, v_dd: f64) -> f64 {
        match self {
            SenseMode::Differential => v_dd,
            SenseMode::SingleEnded => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReferenceKind {
    Read,
    CimAnd,
    CimOr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SenseResult {
    pub out1: bool,
    pub out2: Option<bool>,
    /// Distance from the decision boundary (A).
    pub margin: f64,
    pub marginal: bool,
}

/// READ: (I_P+I_AP)/2 for one cell. CIM_AND / CIM_OR: (3I_AP+I_P)/2 and
/// (I_AP+3I_P)/2, compared against two-row line currents.
pub fn reference_current(kind: ReferenceKind, i_p: f64, i_ap: f64) -> Result<f64> {
    ensure_finite("I_P", i_p)?;
    ensure_finite("I_AP", i_ap)?;
    if !(i_p > i_ap && i_ap > 0.0) {
        return Err(Error::InvalidOrdering { i_p, i_ap });
    }
    Ok(match kind {
        ReferenceKind::Read => (i_p + i_ap) / 2.0,
        ReferenceKind::CimAnd => (3.0 * i_ap + i_p) / 2.0,
        ReferenceKind::CimOr => (i_ap + 3.0 * i_p) / 2.0,
    })
}

pub fn rcsa_resolve(
    i_sl: f64,
    i_slb: Option<f64>,
    mode: SenseMode,
    i_ref: Option<f64>,
) -> Result<SenseResult> {
    rcsa_resolve_with(i_sl, i_slb, mode, i_ref, SM_MIN)
}

/// Bit-1 convention: the line carrying less current holds an AP MTJ.
/// Ties resolve to 0 with zero margin.
pub fn rcsa_resolve_with(
    i_sl: f64,
    i_slb: Option<f64>,
    mode: SenseMode,
    i_ref: Option<f64>,
    sm_min: f64,
) -> Result<SenseResult> {
    ensure_finite("I_SL", i_sl)?;
    let (out1, out2, margin) = match mode {
        SenseMode::Differential => {
            let slb = i_slb.ok_or_else(|| Error::ModeInput("differential sensing needs I_SLB".into()))?;
            ensure_finite("I_SLB", slb)?;
            (i_sl < slb, None, (i_sl - slb).abs())
        }
        SenseMode::SingleEnded => {
            let r = i_ref.ok_or_else(|| Error::ModeInput("single-ended sensing needs I_REF".into()))?;
            ensure_finite("I_REF", r)?;
            let mut margin = (i_sl - r).abs();
            let out2 = match i_slb {
                Some(slb) => {
                    ensure_finite("I_SLB", slb)?;
                    margin = margin.min((slb - r).abs());
                    Some(slb < r)
                }
                None => None,
            };
            (i_sl < r, out2, margin)
        }
    };
    Ok(SenseResult { out1, out2, margin, marginal: margin < sm_min })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const UA: f64 = 1e-6;

    #[test]
    fn references() {
        assert_relative_eq!(reference_current(ReferenceKind::Read, 10.0 * UA, 6.0 * UA).unwrap(), 8.0 * UA);
        assert_relative_eq!(
            reference_current(ReferenceKind::CimAnd, 10.0 * UA, 6.0 * UA).unwrap(),
            14.0 * UA
        );
        assert_relative_eq!(reference_current(ReferenceKind::CimOr, 10.0 * UA, 6.0 * UA).unwrap(), 18.0 * UA);
        assert!(matches!(
            reference_current(ReferenceKind::Read, 6.0 * UA, 6.0 * UA),
            Err(Error::InvalidOrdering { .. })
        ));
    }

    #[test]
    fn differential_read() {
        let r = rcsa_resolve(10.0 * UA, Some(6.0 * UA), SenseMode::Differential, None).unwrap();
        assert!(!r.out1);
        assert_eq!(r.out2, None);
        assert_relative_eq!(r.margin, 4.0 * UA);
        assert!(!r.marginal);
        let r = rcsa_resolve(6.0 * UA, Some(10.0 * UA), SenseMode::Differential, Some(1.0)).unwrap();
        assert!(r.out1);
        assert!(matches!(rcsa_resolve(1.0, None, SenseMode::Differential, None), Err(Error::ModeInput(_))));
    }

    #[test]
    fn single_ended_cim_and() {
        let r_and = reference_current(ReferenceKind::CimAnd, 10.0 * UA, 6.0 * UA).unwrap();
        let r = rcsa_resolve(12.0 * UA, Some(20.0 * UA), SenseMode::SingleEnded, Some(r_and)).unwrap();
        assert!(r.out1);
        assert_eq!(r.out2, Some(false));
        assert_relative_eq!(r.margin, 2.0 * UA, max_relative = 1e-12);
        let r = rcsa_resolve(16.0 * UA, Some(16.0 * UA), SenseMode::SingleEnded, Some(r_and)).unwrap();
        assert_eq!((r.out1, r.out2), (false, Some(false)));
        assert!(matches!(rcsa_resolve(1.0, None, SenseMode::SingleEnded, None), Err(Error::ModeInput(_))));
    }

    #[test]
    fn tie_is_zero_and_marginal() {
        let r = rcsa_resolve(8.0 * UA, None, SenseMode::SingleEnded, Some(8.0 * UA)).unwrap();
        assert!(!r.out1);
        assert_eq!(r.margin, 0.0);
        assert!(r.marginal);
    }

    #[test]
    fn differential_margin_is_twice_single_ended() {
        for (ip, iap) in [(10.0, 6.0), (17.3, 11.1), (3.0, 2.9)] {
            let (ip, iap) = (ip * UA, iap * UA);
            let d = rcsa_resolve(ip, Some(iap), SenseMode::Differential, None).unwrap();
            let r = reference_current(ReferenceKind::Read, ip, iap).unwrap();
            let s = rcsa_resolve(ip, None, SenseMode::SingleEnded, Some(r)).unwrap();
            assert_relative_eq!(d.margin, 2.0 * s.margin, max_relative = 1e-12);
        }
    }

    #[test]
    fn v_diff_levels() {
        assert_eq!(SenseMode::Differential.v_diff(1.1), 1.1);
        assert_eq!(SenseMode::SingleEnded.v_diff(1.1), 0.0);
    }
}
