//! Code specifications and frozen-set construction (GA and 5G), including
//! tail shortening for non-power-of-two transmitted lengths.

pub mod config;
pub mod ga;
mod sequence_5g;

pub use config::{load_spec, save_spec};
pub use sequence_5g::SEQUENCE_1024;

use crate::crc::{CrcError, CrcParams};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("rate {num}/{den} outside (0, 1]")]
    InvalidRate { num: u32, den: u32 },
    #[error("k_info must be at least 1")]
    ZeroInfoBits,
    #[error("k_info + crc_size = {needed} exceeds n_tx = {n_tx}")]
    PayloadTooLarge { needed: usize, n_tx: usize },
    #[error("5G reliability sequence undefined beyond 1024 (requested {0})")]
    SequenceTooLong(usize),
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("fewer than info_count non-shortened positions ({available} < {needed})")]
    NotEnoughPositions { available: usize, needed: usize },
    #[error("reliability order is not a permutation of 0..{0}")]
    NotAPermutation(usize),
    #[error("frozen-set flags empty")]
    EmptyFlags,
    #[error("list_schedule must be strictly increasing powers of two starting at >= 2, got {0:?}")]
    BadListSchedule(Vec<usize>),
    #[error("n_mother {n_mother} below minimum {min} for k_info + crc_size")]
    MotherTooSmall { n_mother: usize, min: usize },
    #[error(transparent)]
    Crc(#[from] CrcError),
    #[error("GA construction requires design_snr_db")]
    MissingDesignSnr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    Ga,
    #[serde(rename = "5g")]
    FiveG,
}

impl std::fmt::Display for Construction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Construction::Ga => write!(f, "ga"),
            Construction::FiveG => write!(f, "5g"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PmMode {
    Approximate,
    Exact,
}

/// Code rate as an exact rational.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rate {
    pub num: u32,
    pub den: u32,
}

impl Rate {
    pub fn new(num: u32, den: u32) -> Result<Self, CodeError> {
        if num == 0 || den == 0 || num > den {
            return Err(CodeError::InvalidRate { num, den });
        }
        Ok(Self { num, den })
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl std::fmt::Display for Rate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// n_tx = k_info/rate rounded to nearest; n_mother = next power of two.
pub fn mother_dimensions(
    k_info: usize,
    crc_size: usize,
    rate: Rate,
) -> Result<(usize, usize), CodeError> {
    if k_info == 0 {
        return Err(CodeError::ZeroInfoBits);
    }
    let num = rate.num as u64;
    let den = rate.den as u64;
    let n_tx = ((2 * k_info as u64 * den + num) / (2 * num)) as usize;
    if k_info + crc_size > n_tx {
        return Err(CodeError::PayloadTooLarge {
            needed: k_info + crc_size,
            n_tx,
        });
    }
    Ok((n_tx.next_power_of_two(), n_tx))
}

/// Tail source indices frozen (and codeword positions dropped) by shortening.
///
/// With the lower-triangular transform, zeroing sources {n_tx..n_mother-1}
/// forces the same codeword positions to zero, so they need not be sent.
pub fn shortened_positions(n_mother: usize, n_tx: usize) -> std::ops::Range<usize> {
    assert!(n_tx <= n_mother);
    n_tx..n_mother
}

/// Permutation of {0..n_mother-1} in ascending sub-channel reliability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReliabilityOrder {
    order: Vec<u32>,
}

impl ReliabilityOrder {
    pub fn new(order: Vec<u32>) -> Result<Self, CodeError> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &i in &order {
            if i as usize >= n || seen[i as usize] {
                return Err(CodeError::NotAPermutation(n));
            }
            seen[i as usize] = true;
        }
        Ok(Self { order })
    }

    /// Indices, least reliable first.
    pub fn ascending(&self) -> &[u32] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Order-preserving restriction of the 38.212 sequence to indices < n_mother.
pub fn build_reliability_5g(n_mother: usize) -> Result<ReliabilityOrder, CodeError> {
    if !n_mother.is_power_of_two() {
        return Err(CodeError::NotPowerOfTwo(n_mother));
    }
    if n_mother > 1024 {
        return Err(CodeError::SequenceTooLong(n_mother));
    }
    let order: Vec<u32> = SEQUENCE_1024
        .iter()
        .filter(|&&q| (q as usize) < n_mother)
        .map(|&q| q as u32)
        .collect();
    ReliabilityOrder::new(order)
}

/// GA construction: indices sorted ascending by mean-LLR reliability at the
/// design Eb/N0, ties broken by ascending index.
///
/// `rate_info` = k_info/n_tx maps the design Eb/N0 onto the channel noise
/// level (the mean channel LLR is 2/sigma^2).
pub fn build_reliability_ga(
    n_mother: usize,
    design_snr_db: f64,
    rate_info: f64,
) -> Result<ReliabilityOrder, CodeError> {
    if !n_mother.is_power_of_two() {
        return Err(CodeError::NotPowerOfTwo(n_mother));
    }
    let mu0 = 4.0 * rate_info * 10f64.powf(design_snr_db / 10.0);
    let means = ga::evolve_means(&vec![mu0; n_mother]);
    let mut order: Vec<u32> = (0..n_mother as u32).collect();
    order.sort_by(|&a, &b| {
        means[a as usize]
            .total_cmp(&means[b as usize])
            .then(a.cmp(&b))
    });
    ReliabilityOrder::new(order)
}

/// Per-index frozen/info classification of the mother code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrozenSet {
    /// true = frozen
    flags: Vec<bool>,
    info_count: usize,
}

impl FrozenSet {
    pub fn from_flags(flags: Vec<bool>) -> Result<Self, CodeError> {
        if flags.is_empty() {
            return Err(CodeError::EmptyFlags);
        }
        let info_count = flags.iter().filter(|&&f| !f).count();
        Ok(Self { flags, info_count })
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.flags[i]
    }

    pub fn info_count(&self) -> usize {
        self.info_count
    }

    pub fn n_mother(&self) -> usize {
        self.flags.len()
    }

    /// Info positions in ascending index order.
    pub fn info_positions(&self) -> Vec<usize> {
        self.flags
            .iter()
            .enumerate()
            .filter(|(_, &f)| !f)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Force shortened positions frozen, then mark the `info_count` most reliable
/// remaining indices as info.
pub fn derive_frozen_set(
    order: &ReliabilityOrder,
    info_count: usize,
    n_tx: usize,
) -> Result<FrozenSet, CodeError> {
    let n = order.len();
    assert!(n_tx <= n);
    let available = n_tx;
    if available < info_count {
        return Err(CodeError::NotEnoughPositions {
            available,
            needed: info_count,
        });
    }
    let mut flags = vec![true; n];
    let mut taken = 0;
    for &i in order.ascending().iter().rev() {
        if taken == info_count {
            break;
        }
        if (i as usize) < n_tx {
            flags[i as usize] = false;
            taken += 1;
        }
    }
    debug_assert_eq!(taken, info_count);
    FrozenSet::from_flags(flags)
}

/// Full description of one code: lengths, CRC, construction, list schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeSpec {
    pub k_info: usize,
    pub crc_size: usize,
    pub crc_poly: u32,
    pub rate: Rate,
    pub n_mother: usize,
    pub n_tx: usize,
    pub construction: Construction,
    pub design_snr_db: Option<f64>,
    pub list_schedule: Vec<usize>,
    pub pm_mode: PmMode,
}

impl CodeSpec {
    /// Build and validate a spec from its primary parameters.
    pub fn new(
        k_info: usize,
        crc_size: usize,
        crc_poly: u32,
        rate: Rate,
        construction: Construction,
        design_snr_db: Option<f64>,
        list_schedule: Vec<usize>,
        pm_mode: PmMode,
    ) -> Result<Self, CodeError> {
        let (n_mother, n_tx) = mother_dimensions(k_info, crc_size, rate)?;
        let spec = Self {
            k_info,
            crc_size,
            crc_poly,
            rate,
            n_mother,
            n_tx,
            construction,
            design_snr_db,
            list_schedule,
            pm_mode,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Check every invariant; returns human-readable warnings for conditions
    /// that are suspect but not fatal.
    pub fn validate(&self) -> Result<Vec<String>, CodeError> {
        let mut warnings = Vec::new();
        if self.k_info == 0 {
            return Err(CodeError::ZeroInfoBits);
        }
        let payload = self.k_info + self.crc_size;
        if payload > self.n_tx {
            return Err(CodeError::PayloadTooLarge {
                needed: payload,
                n_tx: self.n_tx,
            });
        }
        if !self.n_mother.is_power_of_two() {
            return Err(CodeError::NotPowerOfTwo(self.n_mother));
        }
        let min_mother = (payload + 1).next_power_of_two();
        if self.n_mother < min_mother || self.n_tx > self.n_mother {
            return Err(CodeError::MotherTooSmall {
                n_mother: self.n_mother,
                min: min_mother,
            });
        }
        if self.list_schedule.is_empty()
            || self.list_schedule[0] < 2
            || !self
                .list_schedule
                .iter()
                .all(|&l| l.is_power_of_two())
            || !self
                .list_schedule
                .windows(2)
                .all(|w| w[0] < w[1])
        {
            return Err(CodeError::BadListSchedule(self.list_schedule.clone()));
        }
        if self.crc_size > 0 {
            let crc = CrcParams::new(self.crc_size as u32, self.crc_poly)?;
            if !crc.poly_is_odd() {
                warnings.push(format!(
                    "crc polynomial {:#x} has no constant term; detection is degraded",
                    self.crc_poly
                ));
            }
        }
        if self.construction == Construction::Ga && self.design_snr_db.is_none() {
            return Err(CodeError::MissingDesignSnr);
        }
        Ok(warnings)
    }

    /// info + CRC bit count placed at info positions.
    pub fn info_count(&self) -> usize {
        self.k_info + self.crc_size
    }

    /// Eb normalisation counts only the k_info bits; CRC is overhead.
    pub fn rate_info(&self) -> f64 {
        self.k_info as f64 / self.n_tx as f64
    }

    pub fn l_max(&self) -> usize {
        *self.list_schedule.last().expect("validated schedule")
    }

    pub fn crc_params(&self) -> Result<Option<CrcParams>, CodeError> {
        if self.crc_size == 0 {
            Ok(None)
        } else {
            Ok(Some(CrcParams::new(self.crc_size as u32, self.crc_poly)?))
        }
    }

    pub fn reliability_order(&self) -> Result<ReliabilityOrder, CodeError> {
        match self.construction {
            Construction::FiveG => build_reliability_5g(self.n_mother),
            Construction::Ga => build_reliability_ga(
                self.n_mother,
                self.design_snr_db.ok_or(CodeError::MissingDesignSnr)?,
                self.rate_info(),
            ),
        }
    }

    pub fn frozen_set(&self) -> Result<FrozenSet, CodeError> {
        derive_frozen_set(&self.reliability_order()?, self.info_count(), self.n_tx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mother_dimensions_table1_rows() {
        assert_eq!(
            mother_dimensions(128, 12, Rate::new(1, 2).unwrap()).unwrap(),
            (256, 256)
        );
        assert_eq!(
            mother_dimensions(64, 8, Rate::new(4, 5).unwrap()).unwrap(),
            (128, 80)
        );
        assert_eq!(
            mother_dimensions(64, 11, Rate::new(1, 4).unwrap()).unwrap(),
            (256, 256)
        );
        assert_eq!(
            mother_dimensions(512, 12, Rate::new(1, 4).unwrap()).unwrap(),
            (2048, 2048)
        );
    }

    #[test]
    fn mother_dimensions_rejects_oversized_payload() {
        assert!(matches!(
            mother_dimensions(64, 20, Rate::new(9, 10).unwrap()),
            Err(CodeError::PayloadTooLarge { .. })
        ));
    }

    #[test]
    fn shortened_positions_examples() {
        assert_eq!(shortened_positions(128, 80), 80..128);
        assert!(shortened_positions(256, 256).is_empty());
    }

    #[test]
    fn sequence_table_is_pinned() {
        // permutation + frozen fingerprint of the embedded standard table
        let mut seen = [false; 1024];
        let mut h: u64 = 0;
        for &q in SEQUENCE_1024.iter() {
            assert!(!seen[q as usize]);
            seen[q as usize] = true;
            h = h.wrapping_mul(1099511628211).wrapping_add(q as u64);
        }
        assert_eq!(h, 0x93b58da412b6ac4e);
    }

    #[test]
    fn sequence_respects_binary_domination() {
        let mut pos = [0usize; 1024];
        for (r, &q) in SEQUENCE_1024.iter().enumerate() {
            pos[q as usize] = r;
        }
        for j in 1..1024usize {
            // strict submasks of j must rank below j
            let mut s = (j - 1) & j;
            loop {
                assert!(pos[s] < pos[j], "domination violated: {s} vs {j}");
                if s == 0 {
                    break;
                }
                s = (s - 1) & j;
            }
        }
    }

    #[test]
    fn five_g_restriction_n8() {
        let order = build_reliability_5g(8).unwrap();
        assert_eq!(order.ascending(), &[0, 1, 2, 4, 3, 5, 6, 7]);
    }

    #[test]
    fn five_g_full_table_verbatim() {
        let order = build_reliability_5g(1024).unwrap();
        for (a, b) in order.ascending().iter().zip(SEQUENCE_1024.iter()) {
            assert_eq!(*a, *b as u32);
        }
    }

    #[test]
    fn five_g_rejects_beyond_1024() {
        assert!(matches!(
            build_reliability_5g(2048),
            Err(CodeError::SequenceTooLong(2048))
        ));
    }

    #[test]
    fn five_g_orders_are_permutations() {
        for log_n in 1..=10 {
            let n = 1 << log_n;
            let order = build_reliability_5g(n).unwrap();
            assert_eq!(order.len(), n);
        }
    }

    #[test]
    fn nested_restrictions_agree() {
        // restriction of the 2n order to indices < n equals the n order
        for log_n in 3..=9 {
            let n = 1 << log_n;
            let small = build_reliability_5g(n).unwrap();
            let big = build_reliability_5g(2 * n).unwrap();
            let restricted: Vec<u32> = big
                .ascending()
                .iter()
                .copied()
                .filter(|&q| (q as usize) < n)
                .collect();
            assert_eq!(restricted, small.ascending());
        }
    }

    #[test]
    fn ga_n2_order() {
        let order = build_reliability_ga(2, 0.0, 0.5).unwrap();
        assert_eq!(order.ascending(), &[0, 1]);
    }

    #[test]
    fn ga_n4_worst_two_subchannels() {
        for snr in [-2.0, 0.0, 2.0, 5.0] {
            let order = build_reliability_ga(4, snr, 0.5).unwrap();
            let mut worst: Vec<u32> = order.ascending()[..2].to_vec();
            worst.sort_unstable();
            assert_eq!(worst, vec![0, 1], "snr={snr}");
        }
    }

    #[test]
    fn ga_orders_are_permutations() {
        for log_n in 1..=11 {
            let order = build_reliability_ga(1 << log_n, 2.0, 0.5).unwrap();
            assert_eq!(order.len(), 1 << log_n);
        }
    }

    #[test]
    fn derive_frozen_example_n8() {
        let order = build_reliability_5g(8).unwrap();
        let fs = derive_frozen_set(&order, 4, 8).unwrap();
        assert_eq!(fs.info_positions(), vec![3, 5, 6, 7]);
        assert!(fs.is_frozen(0) && fs.is_frozen(1) && fs.is_frozen(2) && fs.is_frozen(4));
    }

    #[test]
    fn derive_frozen_all_info() {
        let order = build_reliability_5g(8).unwrap();
        let fs = derive_frozen_set(&order, 8, 8).unwrap();
        assert_eq!(fs.info_count(), 8);
        assert!(fs.flags().iter().all(|&f| !f));
    }

    #[test]
    fn derive_frozen_shortening_forces_tail() {
        let order = build_reliability_5g(128).unwrap();
        let fs = derive_frozen_set(&order, 72, 80).unwrap();
        for i in 80..128 {
            assert!(fs.is_frozen(i), "shortened {i} must be frozen");
        }
        assert_eq!(fs.info_count(), 72);
    }

    #[test]
    fn derive_frozen_rejects_impossible() {
        let order = build_reliability_5g(8).unwrap();
        assert!(matches!(
            derive_frozen_set(&order, 5, 4),
            Err(CodeError::NotEnoughPositions { .. })
        ));
    }

    #[test]
    fn derive_frozen_is_deterministic() {
        let order = build_reliability_5g(64).unwrap();
        let a = derive_frozen_set(&order, 40, 64).unwrap();
        let b = derive_frozen_set(&order, 40, 64).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn spec_validation_catches_bad_schedule() {
        let err = CodeSpec::new(
            64,
            7,
            0x65,
            Rate::new(1, 2).unwrap(),
            Construction::FiveG,
            None,
            vec![4, 2],
            PmMode::Approximate,
        )
        .unwrap_err();
        assert!(matches!(err, CodeError::BadListSchedule(_)));
    }

    #[test]
    fn spec_ga_requires_design_snr() {
        let err = CodeSpec::new(
            64,
            8,
            0x9B,
            Rate::new(4, 5).unwrap(),
            Construction::Ga,
            None,
            vec![2, 4],
            PmMode::Approximate,
        )
        .unwrap_err();
        assert!(matches!(err, CodeError::MissingDesignSnr));
    }

    #[test]
    fn frozen_set_invariants_random_specs() {
        for (k, crc, poly, num, den) in [
            (64usize, 7usize, 0x65u32, 1u32, 2u32),
            (128, 12, 0xF13, 1, 4),
            (64, 8, 0x9B, 4, 5),
            (100, 10, 0x3D9, 2, 3),
        ] {
            let spec = CodeSpec::new(
                k,
                crc,
                poly,
                Rate::new(num, den).unwrap(),
                Construction::FiveG,
                None,
                vec![2, 4, 8],
                PmMode::Approximate,
            )
            .unwrap();
            let fs = spec.frozen_set().unwrap();
            assert_eq!(fs.info_count(), spec.info_count());
            for i in shortened_positions(spec.n_mother, spec.n_tx) {
                assert!(fs.is_frozen(i));
            }
        }
    }
}
