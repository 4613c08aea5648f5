use serde::{Deserialize, Serialize};

use super::{cim_accesses_per_add, op_energy, EnergyContext, OpKind};
use crate::design::DesignModel;
use crate::error::Result;

/// Operation counts of one workload.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadTrace {
    pub label: String,
    pub reads: u64,
    pub writes: u64,
    pub cim_and: u64,
    pub cim_or: u64,
    pub cim_xor: u64,
    pub cim_adds: u64,
    /// Word transfers to the processor that are not part of an ADD.
    pub nmc_transfers: u64,
}

impl WorkloadTrace {
    pub fn scaled(&self, k: u64) -> Self {
        Self {
            label: self.label.clone(),
            reads: self.reads * k,
            writes: self.writes * k,
            cim_and: self.cim_and * k,
            cim_or: self.cim_or * k,
            cim_xor: self.cim_xor * k,
            cim_adds: self.cim_adds * k,
            nmc_transfers: self.nmc_transfers * k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecutionMode {
    /// Logic and ADDs inside the array.
    Cim,
    /// Every logic op or ADD reads both operands out to a near-memory unit.
    Nmc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEnergy {
    pub label: String,
    pub mode: ExecutionMode,
    pub total: f64,
    /// (category, energy in J), fixed order.
    pub breakdown: Vec<(String, f64)>,
}

pub fn evaluate_trace(
    trace: &WorkloadTrace,
    model: &DesignModel,
    mode: ExecutionMode,
    ctx: &EnergyContext,
) -> Result<TraceEnergy> {
    let e = |op| op_energy(model, op, ctx).map(|r| r.total);
    let bits = ctx.array.word_bits as f64;
    let transfer = bits * ctx.params.nmc_transfer_per_bit;
    let d = model.design();
    let logic_ops = (trace.cim_and + trace.cim_or + trace.cim_xor) as f64;
    let mut breakdown = vec![
        ("reads".to_string(), trace.reads as f64 * e(OpKind::Read)?),
        ("writes".to_string(), trace.writes as f64 * e(OpKind::Write)?),
    ];
    match mode {
        ExecutionMode::Cim => {
            let access = e(OpKind::CimLogic)?;
            // single-ended designs need a second access for XOR
            let xor_accesses = cim_accesses_per_add(d) as f64;
            let logic =
                (trace.cim_and + trace.cim_or) as f64 * access + trace.cim_xor as f64 * xor_accesses * access;
            breakdown.push(("logic".to_string(), logic));
            breakdown.push(("adds".to_string(), trace.cim_adds as f64 * e(OpKind::CimAdd)?));
        }
        ExecutionMode::Nmc => {
            let read = e(OpKind::Read)?;
            let gate = ctx.params.gate_energy * bits;
            breakdown.push(("logic".to_string(), logic_ops * (2.0 * read + 2.0 * transfer + gate)));
            breakdown.push(("adds".to_string(), trace.cim_adds as f64 * e(OpKind::NmcAdd)?));
        }
    }
    breakdown.push(("transfers".to_string(), trace.nmc_transfers as f64 * transfer));
    let total = breakdown.iter().map(|(_, v)| v).sum();
    Ok(TraceEnergy { label: trace.label.clone(), mode, total, breakdown })
}
