//! Byte-per-bit reference encoder.
//!
//! Deliberately plain: one byte per bit, textbook loops. It is both the
//! correctness reference the packed encoder is compared against and the
//! baseline for the packed-speedup property.

/// In-place polar transform x = u * F^{(x)n} over GF(2), no bit reversal.
pub fn naive_transform(bits: &mut [u8]) {
    let n = bits.len();
    assert!(n.is_power_of_two());
    let mut w = 1;
    while w < n {
        let mut base = 0;
        while base < n {
            for i in base..base + w {
                bits[i] ^= bits[i + w];
            }
            base += 2 * w;
        }
        w *= 2;
    }
}

/// Double-transform systematic encoding on plain bytes.
///
/// `frozen[i]` true means source index i is frozen to zero. Returns the first
/// `n_tx` codeword bits.
pub fn naive_systematic_encode(info_plus_crc: &[u8], frozen: &[bool], n_tx: usize) -> Vec<u8> {
    let n = frozen.len();
    let mut v = vec![0u8; n];
    let mut src = info_plus_crc.iter();
    for (i, &f) in frozen.iter().enumerate() {
        if !f {
            v[i] = *src.next().expect("info bit count mismatch") & 1;
        }
    }
    assert!(src.next().is_none(), "info bit count mismatch");
    naive_transform(&mut v);
    for (i, &f) in frozen.iter().enumerate() {
        if f {
            v[i] = 0;
        }
    }
    naive_transform(&mut v);
    v.truncate(n_tx);
    v
}
