use crate::capacity::{classify, CapacityVerdict, ChannelParams, KeyRegime};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct RegionRow {
    pub nsr: f64,
    pub jam_ratio: f64,
    pub params: ChannelParams,
    pub verdict: CapacityVerdict,
}

/// Classifies every `(σ²/P, N/P)` pair of the lattice at transmit power
/// `power`. Rows run over `jam_ratios` fastest.
pub fn region_sweep(power: f64, nsrs: &[f64], jam_ratios: &[f64], regime: KeyRegime) -> Result<Vec<RegionRow>> {
    let mut rows = Vec::with_capacity(nsrs.len() * jam_ratios.len());
    for &s in nsrs {
        for &nu in jam_ratios {
            let params = ChannelParams::new(power, nu * power, s * power)?;
            rows.push(RegionRow { nsr: s, jam_ratio: nu, params, verdict: classify(&params, regime) });
        }
    }
    Ok(rows)
}
