//! Runtime support the emitted decoders link against: kernels, list scratch,
//! and the flat scratch + finishers used by straight-line single-path code.

pub use crate::code::PmMode;
pub use crate::crc::CrcParams;
pub use crate::decoder::list::{crc_select, FastMode, ListState, Mode, OracleMode};
pub use crate::decoder::{f_kernel, f_kernel_exact, g_kernel, hard_decision};

/// Flat scratch for emitted single-path decoders: per-level LLR stacks
/// concatenated into one array plus a flat partial-sum array.
pub struct EmitScratch {
    pub l: Vec<f32>,
    pub beta: Vec<u8>,
}

impl EmitScratch {
    pub fn new(llr_len: usize, n: usize) -> Self {
        Self {
            l: vec![0.0; llr_len],
            beta: vec![0; n],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub info: Vec<u8>,
    pub crc_ok: bool,
}

/// Extract info bits from a single-path partial-sum array and run the CRC.
pub fn finish_sc(beta: &[u8], info_pos: &[u32], k_info: usize, crc: Option<&CrcParams>) -> Decoded {
    let bits: Vec<u8> = info_pos.iter().map(|&p| beta[p as usize]).collect();
    let crc_ok = match crc {
        Some(c) => c.check(&bits),
        None => true,
    };
    let mut info = bits;
    info.truncate(k_info);
    Decoded { info, crc_ok }
}

/// List-path finisher mirroring the decoder's final selection.
pub fn finish_list(
    st: &ListState,
    info_pos: &[u32],
    k_info: usize,
    crc: Option<&CrcParams>,
) -> Decoded {
    let (info, crc_ok) = crc_select(st, info_pos, crc, k_info);
    Decoded { info, crc_ok }
}
