//! Bit container packing N binary symbols into 64-bit machine words.
//!
//! Packing order is LSB-first within each word: bit `i` lives at position
//! `i % 64` of word `i / 64`. Padding bits beyond `bit_len` stay zero after
//! every operation.

/// Byte -> eight 0/1 bytes, LSB-first. The stage-4 unpacking table.
pub const UNPACK_TABLE: [[u8; 8]; 256] = {
    let mut t = [[0u8; 8]; 256];
    let mut b = 0;
    while b < 256 {
        let mut k = 0;
        while k < 8 {
            t[b][k] = ((b >> k) & 1) as u8;
            k += 1;
        }
        b += 1;
    }
    t
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackedBits {
    words: Vec<u64>,
    bit_len: usize,
}

impl PackedBits {
    pub fn zeros(bit_len: usize) -> Self {
        Self {
            words: vec![0; bit_len.div_ceil(64)],
            bit_len,
        }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut p = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                p.words[i / 64] |= 1u64 << (i % 64);
            }
        }
        p
    }

    pub fn bit_len(&self) -> usize {
        self.bit_len
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    #[inline]
    pub fn bit(&self, i: usize) -> u8 {
        debug_assert!(i < self.bit_len);
        ((self.words[i / 64] >> (i % 64)) & 1) as u8
    }

    #[inline]
    pub fn set_bit(&mut self, i: usize, b: u8) {
        debug_assert!(i < self.bit_len);
        let mask = 1u64 << (i % 64);
        if b & 1 == 1 {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    /// Drop bits at and beyond `new_len`, zeroing the freed padding.
    pub fn truncate(&mut self, new_len: usize) {
        assert!(new_len <= self.bit_len);
        self.bit_len = new_len;
        self.words.truncate(new_len.div_ceil(64));
        self.mask_padding();
    }

    pub(crate) fn mask_padding(&mut self) {
        let rem = self.bit_len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// True iff every bit beyond `bit_len` is zero.
    pub fn padding_is_zero(&self) -> bool {
        let rem = self.bit_len % 64;
        if rem == 0 {
            return true;
        }
        match self.words.last() {
            Some(last) => last & !((1u64 << rem) - 1) == 0,
            None => true,
        }
    }
}

/// Stage 4: one byte (0 or 1) per bit via the 256-entry lookup table.
pub fn unpack_lut(x: &PackedBits) -> Vec<u8> {
    let mut out = Vec::with_capacity(x.bit_len());
    let mut remaining = x.bit_len();
    'words: for &w in x.words() {
        for shift in (0..64).step_by(8) {
            let byte = ((w >> shift) & 0xFF) as usize;
            let exp = &UNPACK_TABLE[byte];
            if remaining >= 8 {
                out.extend_from_slice(exp);
                remaining -= 8;
            } else {
                out.extend_from_slice(&exp[..remaining]);
                break 'words;
            }
            if remaining == 0 {
                break 'words;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_core::{RngCore, SeedableRng};

    #[test]
    fn unpack_byte_a5_is_lsb_first() {
        let p = PackedBits::from_bits(&[1, 0, 1, 0, 0, 1, 0, 1]);
        assert_eq!(p.words()[0], 0xA5);
        assert_eq!(unpack_lut(&p), vec![1, 0, 1, 0, 0, 1, 0, 1]);
    }

    #[test]
    fn unpack_all_ones_byte() {
        let p = PackedBits::from_bits(&[1; 8]);
        assert_eq!(unpack_lut(&p), vec![1; 8]);
    }

    #[test]
    fn pack_unpack_identity_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let len = 1 + (rng.next_u32() as usize % 300);
            let bits: Vec<u8> = (0..len).map(|_| (rng.next_u32() & 1) as u8).collect();
            let p = PackedBits::from_bits(&bits);
            assert_eq!(unpack_lut(&p), bits);
            assert!(p.padding_is_zero());
        }
    }

    #[test]
    fn truncate_masks_padding() {
        let mut p = PackedBits::from_bits(&[1; 128]);
        p.truncate(80);
        assert_eq!(p.bit_len(), 80);
        assert!(p.padding_is_zero());
        assert_eq!(unpack_lut(&p), vec![1; 80]);
    }
}
