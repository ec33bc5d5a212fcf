//! Bit-packed systematic polar encoder, four stages: source assembly over
//! frozen/info run segments, bit packing, the word-packed polar transform,
//! and table-driven unpacking.

mod packed;
pub mod reference;

pub use packed::{unpack_lut, PackedBits, UNPACK_TABLE};

use crate::code::FrozenSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("expected {expected} info+crc bits, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("bit length {0} is not a power of two")]
    NotPowerOfTwo(usize),
}

/// Masks selecting the low half of each 2w-bit group, w = 1,2,4,8,16,32.
const HALF_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
];

/// Stage 3: x = u * F^{(x)n} over GF(2), F = [[1,0],[1,1]], natural order.
///
/// Stages narrower than a word run as in-word shift+XOR under a half mask;
/// wider stages XOR whole words across register lanes.
pub fn polar_transform_packed(u: &mut PackedBits) -> Result<(), EncodeError> {
    let n = u.bit_len();
    if !n.is_power_of_two() {
        return Err(EncodeError::NotPowerOfTwo(n));
    }
    let words = u.words_mut();
    let mut w = 1usize;
    while w < n && w < 64 {
        let mask = HALF_MASKS[w.trailing_zeros() as usize];
        for word in words.iter_mut() {
            *word ^= (*word >> w) & mask;
        }
        w *= 2;
    }
    while w < n {
        let wv = w / 64;
        let mut base = 0;
        while base < words.len() {
            let (lo, hi) = words[base..base + 2 * wv].split_at_mut(wv);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
            base += 2 * wv;
        }
        w *= 2;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Run {
    pub start: usize,
    pub len: usize,
    pub info: bool,
}

/// Frozen/info run segments of the source vector, derived once per code.
///
/// Rate-0 runs are skipped when assembling (the buffer starts zeroed); info
/// runs are filled from the input.
#[derive(Clone, Debug)]
pub struct EncoderPlan {
    runs: Vec<Run>,
    info_count: usize,
    n_mother: usize,
}

impl EncoderPlan {
    pub fn new(frozen: &FrozenSet) -> Self {
        let flags = frozen.flags();
        let mut runs = Vec::new();
        let mut start = 0;
        while start < flags.len() {
            let info = !flags[start];
            let mut end = start + 1;
            while end < flags.len() && flags[end] != flags[start] {
                end += 1;
            }
            runs.push(Run {
                start,
                len: end - start,
                info,
            });
            start = end;
        }
        Self {
            runs,
            info_count: frozen.info_count(),
            n_mother: flags.len(),
        }
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn info_count(&self) -> usize {
        self.info_count
    }

    pub fn n_mother(&self) -> usize {
        self.n_mother
    }
}

/// Stages 1+2: place info-then-CRC bits at info positions in ascending index
/// order, frozen positions zero, result bit-packed.
pub fn assemble_source(info_plus_crc: &[u8], plan: &EncoderPlan) -> Result<PackedBits, EncodeError> {
    if info_plus_crc.len() != plan.info_count {
        return Err(EncodeError::LengthMismatch {
            expected: plan.info_count,
            got: info_plus_crc.len(),
        });
    }
    let mut out = PackedBits::zeros(plan.n_mother);
    let words = out.words_mut();
    let mut cursor = 0;
    for run in &plan.runs {
        if !run.info {
            continue;
        }
        for (k, &b) in info_plus_crc[cursor..cursor + run.len].iter().enumerate() {
            if b & 1 == 1 {
                let i = run.start + k;
                words[i / 64] |= 1u64 << (i % 64);
            }
        }
        cursor += run.len;
    }
    Ok(out)
}

/// The four-stage systematic encoder for one code.
#[derive(Clone, Debug)]
pub struct SystematicEncoder {
    plan: EncoderPlan,
    info_mask: Vec<u64>,
    n_tx: usize,
}

impl SystematicEncoder {
    pub fn new(frozen: &FrozenSet, n_tx: usize) -> Self {
        let plan = EncoderPlan::new(frozen);
        let n = frozen.flags().len();
        let mut info_mask = vec![0u64; n.div_ceil(64)];
        for (i, &f) in frozen.flags().iter().enumerate() {
            if !f {
                info_mask[i / 64] |= 1u64 << (i % 64);
            }
        }
        Self {
            plan,
            info_mask,
            n_tx,
        }
    }

    pub fn plan(&self) -> &EncoderPlan {
        &self.plan
    }

    /// Double-transform systematic encoding; output truncated to n_tx bits.
    pub fn encode_packed(&self, info_plus_crc: &[u8]) -> Result<PackedBits, EncodeError> {
        let mut v = assemble_source(info_plus_crc, &self.plan)?;
        polar_transform_packed(&mut v)?;
        for (w, m) in v.words_mut().iter_mut().zip(&self.info_mask) {
            *w &= m;
        }
        polar_transform_packed(&mut v)?;
        v.truncate(self.n_tx);
        Ok(v)
    }

    /// Full chain ending in stage-4 unpacking: one byte per transmitted bit.
    pub fn encode_bits(&self, info_plus_crc: &[u8]) -> Result<Vec<u8>, EncodeError> {
        Ok(unpack_lut(&self.encode_packed(info_plus_crc)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::FrozenSet;
    use rand_core::{RngCore, SeedableRng};

    fn random_bits(rng: &mut rand_chacha::ChaCha8Rng, len: usize) -> Vec<u8> {
        (0..len).map(|_| (rng.next_u32() & 1) as u8).collect()
    }

    fn frozen_from_flags(flags: Vec<bool>) -> FrozenSet {
        FrozenSet::from_flags(flags).unwrap()
    }

    #[test]
    fn transform_zero_is_zero() {
        let mut p = PackedBits::zeros(256);
        polar_transform_packed(&mut p).unwrap();
        assert_eq!(unpack_lut(&p), vec![0u8; 256]);
    }

    #[test]
    fn transform_last_bit_gives_all_ones() {
        let mut p = PackedBits::zeros(8);
        p.set_bit(7, 1);
        polar_transform_packed(&mut p).unwrap();
        assert_eq!(unpack_lut(&p), vec![1u8; 8]);
    }

    #[test]
    fn transform_rejects_non_power_of_two() {
        let mut p = PackedBits::zeros(48);
        assert_eq!(
            polar_transform_packed(&mut p).unwrap_err(),
            EncodeError::NotPowerOfTwo(48)
        );
    }

    #[test]
    fn packed_transform_matches_naive() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for log_n in 1..=11 {
            let n = 1 << log_n;
            for _ in 0..20 {
                let bits = random_bits(&mut rng, n);
                let mut p = PackedBits::from_bits(&bits);
                polar_transform_packed(&mut p).unwrap();
                let mut naive = bits.clone();
                reference::naive_transform(&mut naive);
                assert_eq!(unpack_lut(&p), naive, "n={n}");
                assert!(p.padding_is_zero());
            }
        }
    }

    #[test]
    fn transform_is_involution() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(22);
        for log_n in 3..=10 {
            let n = 1 << log_n;
            let bits = random_bits(&mut rng, n);
            let mut p = PackedBits::from_bits(&bits);
            polar_transform_packed(&mut p).unwrap();
            polar_transform_packed(&mut p).unwrap();
            assert_eq!(unpack_lut(&p), bits);
        }
    }

    #[test]
    fn assemble_example_n8() {
        // frozen {0,1,2,4}, input 1011 -> U = (0,0,0,1,0,0,1,1)
        let frozen = frozen_from_flags(vec![true, true, true, false, true, false, false, false]);
        let plan = EncoderPlan::new(&frozen);
        let u = assemble_source(&[1, 0, 1, 1], &plan).unwrap();
        assert_eq!(unpack_lut(&u), vec![0, 0, 0, 1, 0, 0, 1, 1]);
    }

    #[test]
    fn assemble_zero_gives_zero() {
        let frozen = frozen_from_flags(vec![true, false, false, false]);
        let plan = EncoderPlan::new(&frozen);
        let u = assemble_source(&[0, 0, 0], &plan).unwrap();
        assert_eq!(unpack_lut(&u), vec![0; 4]);
    }

    #[test]
    fn assemble_rejects_length_mismatch() {
        let frozen = frozen_from_flags(vec![true, false, false, false]);
        let plan = EncoderPlan::new(&frozen);
        assert!(assemble_source(&[1, 0], &plan).is_err());
    }

    #[test]
    fn assemble_roundtrip_on_info_positions() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let flags: Vec<bool> = (0..128).map(|_| rng.next_u32() & 1 == 1).collect();
        let frozen = frozen_from_flags(flags.clone());
        let plan = EncoderPlan::new(&frozen);
        for _ in 0..100 {
            let x = random_bits(&mut rng, plan.info_count());
            let u = assemble_source(&x, &plan).unwrap();
            let bits = unpack_lut(&u);
            let extracted: Vec<u8> = flags
                .iter()
                .enumerate()
                .filter(|(_, &f)| !f)
                .map(|(i, _)| bits[i])
                .collect();
            assert_eq!(extracted, x);
        }
    }

    #[test]
    fn systematic_property_and_reference_agreement() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(24);
        // a shortened layout: n=128, n_tx=80, info at the most reliable tail-free spots
        let mut flags = vec![false; 128];
        for f in flags.iter_mut().take(20) {
            *f = true;
        }
        for f in flags.iter_mut().skip(80) {
            *f = true;
        }
        let frozen = frozen_from_flags(flags.clone());
        let enc = SystematicEncoder::new(&frozen, 80);
        let k = frozen.info_count();
        for _ in 0..200 {
            let data = random_bits(&mut rng, k);
            let cw = enc.encode_bits(&data).unwrap();
            assert_eq!(cw.len(), 80);
            let naive = reference::naive_systematic_encode(&data, &flags, 80);
            assert_eq!(cw, naive);
            // systematic: codeword restricted to info positions equals the input
            let extracted: Vec<u8> = flags
                .iter()
                .enumerate()
                .filter(|(i, &f)| !f && *i < 80)
                .map(|(i, _)| cw[i])
                .collect();
            assert_eq!(extracted, data);
        }
    }

    #[test]
    fn shortened_tail_bits_are_zero_before_truncation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(25);
        let mut flags = vec![false; 128];
        for f in flags.iter_mut().take(48) {
            *f = true;
        }
        for f in flags.iter_mut().skip(80) {
            *f = true;
        }
        let frozen = frozen_from_flags(flags.clone());
        let enc = SystematicEncoder::new(&frozen, 128);
        for _ in 0..100 {
            let data = random_bits(&mut rng, frozen.info_count());
            let cw = enc.encode_bits(&data).unwrap();
            assert!(cw[80..].iter().all(|&b| b == 0));
        }
    }

    #[test]
    fn zero_input_gives_zero_codeword() {
        let mut flags = vec![false; 64];
        flags[0] = true;
        let frozen = frozen_from_flags(flags);
        let enc = SystematicEncoder::new(&frozen, 64);
        let cw = enc.encode_bits(&vec![0; 63]).unwrap();
        assert_eq!(cw, vec![0; 64]);
    }
}
