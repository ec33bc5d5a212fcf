//! Parametric CRC over GF(2) for CRC-aided list decoding.
//!
//! Conventions are fixed so results are reproducible end to end: zero-initial
//! register, no input or output reflection, no final XOR, MSB-first bit order.
//! The checksum of a message is the remainder of `message(x) * x^width`
//! divided by the generator polynomial.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CrcError {
    #[error("crc width {0} outside supported range 4..=16")]
    WidthOutOfRange(u32),
    #[error("crc polynomial {poly:#x} does not fit in width {width}")]
    PolyTooWide { poly: u32, width: u32 },
}

/// Generator parameters plus the derived bytewise table.
///
/// `poly` carries the low `width` coefficients; the leading term is implicit.
#[derive(Clone)]
pub struct CrcParams {
    width: u32,
    poly: u16,
    /// Polynomial left-aligned into a 16-bit register.
    aligned: u16,
    table: [u16; 256],
    /// An even polynomial (no constant term) misses some error patterns;
    /// loading such a spec warns instead of failing.
    odd: bool,
}

impl std::fmt::Debug for CrcParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CrcParams")
            .field("width", &self.width)
            .field("poly", &format_args!("{:#x}", self.poly))
            .finish()
    }
}

impl CrcParams {
    pub fn new(width: u32, poly: u32) -> Result<Self, CrcError> {
        if !(4..=16).contains(&width) {
            return Err(CrcError::WidthOutOfRange(width));
        }
        if poly >> width != 0 {
            return Err(CrcError::PolyTooWide { poly, width });
        }
        let aligned = (poly as u16) << (16 - width);
        let mut table = [0u16; 256];
        for (b, entry) in table.iter_mut().enumerate() {
            let mut reg = (b as u16) << 8;
            for _ in 0..8 {
                let top = reg & 0x8000 != 0;
                reg <<= 1;
                if top {
                    reg ^= aligned;
                }
            }
            *entry = reg;
        }
        Ok(Self {
            width,
            poly: poly as u16,
            aligned,
            table,
            odd: poly & 1 == 1,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn poly(&self) -> u16 {
        self.poly
    }

    /// False for degenerate polynomials with no constant term.
    pub fn poly_is_odd(&self) -> bool {
        self.odd
    }

    /// CRC of a bit message (one bit per byte), right-aligned in the return.
    ///
    /// Bytewise over the packed prefix, bitwise over the trailing partial
    /// byte. First message bit is the highest-degree coefficient.
    pub fn compute(&self, bits: &[u8]) -> u16 {
        let mut reg: u16 = 0;
        let mut chunks = bits.chunks_exact(8);
        for chunk in &mut chunks {
            let mut byte = 0u8;
            for (k, &b) in chunk.iter().enumerate() {
                byte |= (b & 1) << (7 - k);
            }
            reg = (reg << 8) ^ self.table[((reg >> 8) as u8 ^ byte) as usize];
        }
        for &b in chunks.remainder() {
            let top = ((reg >> 15) as u8 ^ (b & 1)) & 1;
            reg <<= 1;
            if top == 1 {
                reg ^= self.aligned;
            }
        }
        reg >> (16 - self.width)
    }

    /// CRC as `width` bits, most-significant first.
    pub fn compute_bits(&self, bits: &[u8]) -> Vec<u8> {
        let crc = self.compute(bits);
        (0..self.width)
            .rev()
            .map(|k| ((crc >> k) & 1) as u8)
            .collect()
    }

    /// True iff the trailing `width` bits equal the CRC of the prefix.
    pub fn check(&self, bits_with_crc: &[u8]) -> bool {
        let w = self.width as usize;
        if bits_with_crc.len() <= w {
            return false;
        }
        let (msg, tail) = bits_with_crc.split_at(bits_with_crc.len() - w);
        let crc = self.compute(msg);
        tail.iter()
            .enumerate()
            .all(|(k, &b)| b & 1 == ((crc >> (w - 1 - k)) & 1) as u8)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_core::{RngCore, SeedableRng};

    /// Textbook polynomial long division, the independent oracle the table
    /// implementation is checked against.
    fn long_division(bits: &[u8], width: u32, poly: u32) -> u16 {
        let mut v: Vec<u8> = bits.to_vec();
        v.extend(std::iter::repeat(0).take(width as usize));
        // generator = implicit leading 1 followed by the width coefficients
        let gen: Vec<u8> = std::iter::once(1)
            .chain((0..width).rev().map(|k| ((poly >> k) & 1) as u8))
            .collect();
        for i in 0..bits.len() {
            if v[i] == 1 {
                for (j, &g) in gen.iter().enumerate() {
                    v[i + j] ^= g;
                }
            }
        }
        let mut out = 0u16;
        for &b in &v[bits.len()..] {
            out = (out << 1) | b as u16;
        }
        out
    }

    const TABLE1_POLYS: &[(u32, u32)] = &[
        (11, 0x385),
        (12, 0xF13),
        (7, 0x65),
        (16, 0x8005),
        (8, 0x9B),
        (10, 0x3D9),
    ];

    fn random_bits(rng: &mut rand_chacha::ChaCha8Rng, len: usize) -> Vec<u8> {
        (0..len).map(|_| (rng.next_u32() & 1) as u8).collect()
    }

    #[test]
    fn zero_message_gives_zero_crc() {
        for &(w, p) in TABLE1_POLYS {
            let crc = CrcParams::new(w, p).unwrap();
            assert_eq!(crc.compute(&vec![0u8; 100]), 0);
        }
    }

    #[test]
    fn single_one_bit_matches_long_division() {
        // remainder of x^7 mod (x^7+x^6+x^5+x^2+1); oracle evaluates to 0x65
        let crc = CrcParams::new(7, 0x65).unwrap();
        let oracle = long_division(&[1], 7, 0x65);
        assert_eq!(crc.compute(&[1]), oracle);
        assert_eq!(oracle, 0x65);
    }

    #[test]
    fn table_matches_long_division_on_random_messages() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for &(w, p) in TABLE1_POLYS {
            let crc = CrcParams::new(w, p).unwrap();
            for _ in 0..500 {
                let len = 1 + (rng.next_u32() as usize % 200);
                let msg = random_bits(&mut rng, len);
                assert_eq!(crc.compute(&msg), long_division(&msg, w, p));
            }
        }
    }

    #[test]
    fn all_table1_polys_construct() {
        for &(w, p) in TABLE1_POLYS {
            let crc = CrcParams::new(w, p).unwrap();
            assert!(crc.poly_is_odd());
            crc.compute(&[1, 0, 1, 1]);
        }
    }

    #[test]
    fn append_then_check_roundtrip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let crc = CrcParams::new(12, 0xF13).unwrap();
        for _ in 0..10_000 {
            let mut msg = random_bits(&mut rng, 64);
            let tail = crc.compute_bits(&msg);
            msg.extend_from_slice(&tail);
            assert!(crc.check(&msg));
        }
    }

    #[test]
    fn every_single_bit_flip_is_detected() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let crc = CrcParams::new(7, 0x65).unwrap();
        let mut frame = random_bits(&mut rng, 64);
        let tail = crc.compute_bits(&frame);
        frame.extend_from_slice(&tail);
        for i in 0..frame.len() {
            frame[i] ^= 1;
            assert!(!crc.check(&frame), "flip at {i} not detected");
            frame[i] ^= 1;
        }
    }

    #[test]
    fn linearity_under_xor() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for &(w, p) in TABLE1_POLYS {
            let crc = CrcParams::new(w, p).unwrap();
            for _ in 0..200 {
                let a = random_bits(&mut rng, 90);
                let b = random_bits(&mut rng, 90);
                let ab: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
                assert_eq!(crc.compute(&ab), crc.compute(&a) ^ crc.compute(&b));
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(CrcParams::new(3, 0x5).unwrap_err(), CrcError::WidthOutOfRange(3));
        assert_eq!(CrcParams::new(17, 0x5).unwrap_err(), CrcError::WidthOutOfRange(17));
        assert_eq!(
            CrcParams::new(4, 0x1F).unwrap_err(),
            CrcError::PolyTooWide { poly: 0x1F, width: 4 }
        );
    }

    #[test]
    fn check_rejects_too_short_input() {
        let crc = CrcParams::new(12, 0xF13).unwrap();
        assert!(!crc.check(&[1, 0, 1]));
    }
}
