//! Clutter subspace calibration and removal, plus the cancellation baselines.

pub mod crap;
pub mod eca;
pub mod io;
pub mod mdl;
pub mod snapshots;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use crap::{calibrate, crap_remove, ClutterCalibration, OrderSelection};
pub use eca::{eca_c_remove, eca_s_remove, EcaC, EcaS};
pub use mdl::{estimate_order_mdl, OrderEstimate};
pub use snapshots::{ClutterSnapshots, Convention};

use crate::error::{Error, Result};
use crate::scene::CsiFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemoverKind {
    None,
    Crap,
    EcaC,
    EcaS,
}

impl RemoverKind {
    pub const ALL: [RemoverKind; 4] = [RemoverKind::None, RemoverKind::Crap, RemoverKind::EcaC, RemoverKind::EcaS];

    pub fn name(self) -> &'static str {
        match self {
            RemoverKind::None => "none",
            RemoverKind::Crap => "crap",
            RemoverKind::EcaC => "eca-c",
            RemoverKind::EcaS => "eca-s",
        }
    }
}

impl fmt::Display for RemoverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RemoverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RemoverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown remover {s:?} (expected none, crap, eca-c or eca-s)")))
    }
}

/// A remover prepared from one snapshot set, ready to process many frames.
#[derive(Debug, Clone)]
pub enum Remover {
    None,
    Crap(ClutterCalibration),
    EcaC(EcaC),
    EcaS(EcaS),
}

impl Remover {
    pub fn prepare(kind: RemoverKind, snapshots: &ClutterSnapshots, order: OrderSelection) -> Result<Self> {
        Ok(match kind {
            RemoverKind::None => Remover::None,
            RemoverKind::Crap => Remover::Crap(calibrate(snapshots, order)?),
            RemoverKind::EcaC => Remover::EcaC(EcaC::new(snapshots)?),
            RemoverKind::EcaS => Remover::EcaS(EcaS::new(snapshots)?),
        })
    }

    pub fn kind(&self) -> RemoverKind {
        match self {
            Remover::None => RemoverKind::None,
            Remover::Crap(_) => RemoverKind::Crap,
            Remover::EcaC(_) => RemoverKind::EcaC,
            Remover::EcaS(_) => RemoverKind::EcaS,
        }
    }

    pub fn remove(&self, frame: &CsiFrame) -> Result<CsiFrame> {
        match self {
            Remover::None => Ok(frame.clone()),
            Remover::Crap(cal) => crap_remove(cal, frame),
            Remover::EcaC(e) => e.remove(frame),
            Remover::EcaS(e) => e.remove(frame),
        }
    }
}
