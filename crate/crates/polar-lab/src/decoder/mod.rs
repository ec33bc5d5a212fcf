//! Tree-based Fast-SSC SC decoder, CRC-aided SCL decoder and the adaptive
//! escalation wrapper.
//!
//! The decode tree is classified once per frozen set into Rate0 / Rate1 /
//! Rep / SPC / Generic nodes. SC specialises every node class at any size;
//! list decoding specialises Rate0 and Rep at any size (their node-level
//! metrics equal bit-by-bit accrual under the min-sum kernel) and treats
//! Rate1/SPC up to the plan caps as fused forms of the exact per-bit
//! traversal, so every route stays bit-exact with the unpruned tree.

pub mod list;

pub use list::ListState;

use crate::code::{CodeError, CodeSpec, FrozenSet, PmMode};
use crate::crc::CrcParams;
use std::sync::Arc;

/// Large finite LLR standing in for "known zero" at shortened positions.
pub const SATURATION_LLR: f32 = 1.0e6;

#[inline(always)]
pub fn hard_decision(llr: f32) -> u8 {
    (llr < 0.0) as u8
}

/// Min-sum check kernel: sign(a)sign(b)min(|a|,|b|).
#[inline(always)]
pub fn f_kernel(a: f32, b: f32) -> f32 {
    let sign = (a.to_bits() ^ b.to_bits()) & 0x8000_0000;
    f32::from_bits(a.abs().min(b.abs()).to_bits() | sign)
}

/// Variable kernel: b + (1-2s)a.
#[inline(always)]
pub fn g_kernel(a: f32, b: f32, s: u8) -> f32 {
    if s == 0 {
        b + a
    } else {
        b - a
    }
}

/// Exact boxplus check kernel, used in Exact path-metric mode so that the
/// accumulated metric is a true codeword log-likelihood.
#[inline]
pub fn f_kernel_exact(a: f32, b: f32) -> f32 {
    let (aa, ba) = (a.abs() as f64, b.abs() as f64);
    let m = aa.min(ba);
    let sign = if (a < 0.0) != (b < 0.0) { -m } else { m };
    let corr = (-(aa + ba)).exp().ln_1p() - (-(aa - ba).abs()).exp().ln_1p();
    (sign + corr) as f32
}

/// Penalty added to a path metric for deciding `bit` against `llr`.
#[inline(always)]
pub fn pm_penalty(llr: f32, bit: u8, mode: PmMode) -> f64 {
    match mode {
        PmMode::Approximate => {
            if (llr < 0.0) != (bit == 1) {
                llr.abs() as f64
            } else {
                0.0
            }
        }
        PmMode::Exact => {
            let x = if bit == 0 { llr as f64 } else { -(llr as f64) };
            if x > 0.0 {
                (-x).exp().ln_1p()
            } else {
                -x + x.exp().ln_1p()
            }
        }
    }
}

/// Spec-level path metric update.
pub fn path_metric_update(pm: f64, llr: f32, bit: u8, mode: PmMode) -> f64 {
    pm + pm_penalty(llr, bit, mode)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeClass {
    Rate0,
    Rate1,
    Rep,
    Spc,
    Generic,
}

/// Size caps for specialised nodes under list decoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ListCaps {
    pub rate1_max: u32,
    pub spc_max: u32,
}

impl Default for ListCaps {
    fn default() -> Self {
        Self {
            rate1_max: 2,
            spc_max: 4,
        }
    }
}

pub const NO_CHILD: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub struct PlanNode {
    pub start: u32,
    pub width: u32,
    pub depth: u8,
    pub class: NodeClass,
    pub left: u32,
    pub right: u32,
}

/// Recursive decomposition of the frozen set into classified nodes.
#[derive(Clone, Debug)]
pub struct TreePlan {
    nodes: Vec<PlanNode>,
    n: usize,
    levels: usize,
    caps: ListCaps,
    frozen: FrozenSet,
    info_pos: Vec<u32>,
}

fn classify_range(flags: &[bool]) -> NodeClass {
    let w = flags.len();
    let frozen_count = flags.iter().filter(|&&f| f).count();
    if frozen_count == w {
        NodeClass::Rate0
    } else if frozen_count == 0 {
        NodeClass::Rate1
    } else if frozen_count == w - 1 && !flags[w - 1] {
        NodeClass::Rep
    } else if frozen_count == 1 && flags[0] {
        NodeClass::Spc
    } else {
        NodeClass::Generic
    }
}

impl TreePlan {
    /// Maximal pruning: each node carries the largest specialised class it
    /// satisfies; children are materialised for every internal node so list
    /// decoding and Exact mode can descend past caps.
    pub fn classify_tree(frozen: &FrozenSet, caps: ListCaps) -> Self {
        Self::build(frozen, caps, false)
    }

    /// Generic-only plan: the unpruned bit-by-bit traversal oracle.
    pub fn unpruned(frozen: &FrozenSet) -> Self {
        Self::build(frozen, ListCaps::default(), true)
    }

    fn build(frozen: &FrozenSet, caps: ListCaps, generic_only: bool) -> Self {
        let n = frozen.n_mother();
        assert!(n.is_power_of_two() && n >= 2);
        let mut nodes = Vec::with_capacity(2 * n - 1);
        Self::build_node(frozen.flags(), 0, n, 0, generic_only, &mut nodes);
        let info_pos = frozen.info_positions().iter().map(|&i| i as u32).collect();
        Self {
            nodes,
            n,
            levels: n.trailing_zeros() as usize + 1,
            caps,
            frozen: frozen.clone(),
            info_pos,
        }
    }

    fn build_node(
        flags: &[bool],
        start: usize,
        width: usize,
        depth: u8,
        generic_only: bool,
        nodes: &mut Vec<PlanNode>,
    ) -> u32 {
        let idx = nodes.len() as u32;
        let class = if width == 1 {
            if flags[start] {
                NodeClass::Rate0
            } else {
                NodeClass::Rate1
            }
        } else if generic_only {
            NodeClass::Generic
        } else {
            classify_range(&flags[start..start + width])
        };
        nodes.push(PlanNode {
            start: start as u32,
            width: width as u32,
            depth,
            class,
            left: NO_CHILD,
            right: NO_CHILD,
        });
        if width > 1 {
            let left = Self::build_node(flags, start, width / 2, depth + 1, generic_only, nodes);
            let right = Self::build_node(
                flags,
                start + width / 2,
                width / 2,
                depth + 1,
                generic_only,
                nodes,
            );
            nodes[idx as usize].left = left;
            nodes[idx as usize].right = right;
        }
        idx
    }

    pub fn nodes(&self) -> &[PlanNode] {
        &self.nodes
    }

    pub fn root(&self) -> &PlanNode {
        &self.nodes[0]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Tree levels including the leaf level (log2 n + 1).
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn caps(&self) -> ListCaps {
        self.caps
    }

    pub fn frozen(&self) -> &FrozenSet {
        &self.frozen
    }

    /// Info positions of the mother code, ascending.
    pub fn info_positions(&self) -> &[u32] {
        &self.info_pos
    }
}

/// How a tree decoder processes a node for a given list size and metric
/// mode. SPC always takes the descent sequence here; the unrolled programs
/// carry fused Rate1/SPC instructions (within the plan caps) that execute
/// the identical sequence without walking the tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeAction {
    LeafFrozen,
    LeafInfo,
    Rate0,
    Rate1,
    Rep,
    Descend,
}

pub fn node_action(class: NodeClass, width: u32, list_size: usize, pm_mode: PmMode) -> NodeAction {
    if width == 1 {
        return match class {
            NodeClass::Rate0 => NodeAction::LeafFrozen,
            _ => NodeAction::LeafInfo,
        };
    }
    if list_size == 1 {
        return match class {
            NodeClass::Rate0 => NodeAction::Rate0,
            NodeClass::Rate1 => NodeAction::Rate1,
            NodeClass::Rep => NodeAction::Rep,
            NodeClass::Spc | NodeClass::Generic => NodeAction::Descend,
        };
    }
    if pm_mode == PmMode::Exact {
        return NodeAction::Descend;
    }
    match class {
        NodeClass::Rate0 => NodeAction::Rate0,
        NodeClass::Rep => NodeAction::Rep,
        _ => NodeAction::Descend,
    }
}

/// Scratch for the single-path SC decoder: per-level LLR stacks plus a flat
/// partial-sum array in codeword order.
#[derive(Clone, Debug)]
pub struct ScScratch {
    llr: Vec<Vec<f32>>,
    beta: Vec<u8>,
}

impl ScScratch {
    pub fn new(n: usize) -> Self {
        let levels = n.trailing_zeros() as usize + 1;
        Self {
            llr: (0..levels).map(|d| vec![0.0; n >> d]).collect(),
            beta: vec![0; n],
        }
    }

    pub fn beta(&self) -> &[u8] {
        &self.beta
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutcome {
    /// Decoded information bits (k_info).
    pub info: Vec<u8>,
    pub crc_ok: bool,
    /// Schedule entry that produced the result; 0 = SC.
    pub stage: u32,
    /// Node operations executed across all attempted stages.
    pub work: u64,
}

fn sc_walk(plan: &TreePlan, idx: u32, s: &mut ScScratch, exact: bool, work: &mut u64) {
    let node = &plan.nodes[idx as usize];
    let d = node.depth as usize;
    let w = node.width as usize;
    let start = node.start as usize;
    *work += 1;
    match node_action(node.class, node.width, 1, PmMode::Approximate) {
        NodeAction::LeafFrozen => s.beta[start] = 0,
        NodeAction::LeafInfo => s.beta[start] = hard_decision(s.llr[d][0]),
        NodeAction::Rate0 => s.beta[start..start + w].fill(0),
        NodeAction::Rate1 => {
            for i in 0..w {
                s.beta[start + i] = hard_decision(s.llr[d][i]);
            }
        }
        NodeAction::Rep => {
            // decision LLR of the last leaf: successive g stages with zero
            // priors, folded in place (identical values to the descent)
            let v = &mut s.llr[d];
            let mut lo = 0;
            let mut len = w;
            while len > 1 {
                let h = len / 2;
                for i in 0..h {
                    v[lo + h + i] += v[lo + i];
                }
                lo += h;
                len = h;
            }
            let b = hard_decision(v[lo]);
            s.beta[start..start + w].fill(b);
        }
        NodeAction::Descend => {
            let half = w / 2;
            let (parent, child) = {
                let (a, b) = s.llr.split_at_mut(d + 1);
                (&a[d], &mut b[0])
            };
            if exact {
                for i in 0..half {
                    child[i] = f_kernel_exact(parent[i], parent[i + half]);
                }
            } else {
                for i in 0..half {
                    child[i] = f_kernel(parent[i], parent[i + half]);
                }
            }
            sc_walk(plan, node.left, s, exact, work);
            let (parent, child) = {
                let (a, b) = s.llr.split_at_mut(d + 1);
                (&a[d], &mut b[0])
            };
            for i in 0..half {
                child[i] = g_kernel(parent[i], parent[i + half], s.beta[start + i]);
            }
            sc_walk(plan, node.right, s, exact, work);
            for i in 0..half {
                s.beta[start + i] ^= s.beta[start + half + i];
            }
        }
    }
}

/// One decoder instance: owns scratch, not shareable mid-decode. Create one
/// per worker; the plan itself is immutable and shared.
pub struct Decoder {
    plan: Arc<TreePlan>,
    crc: Option<CrcParams>,
    k_info: usize,
    schedule: Vec<usize>,
    pm_mode: PmMode,
    sc: ScScratch,
    list: Option<ListState>,
}

impl Decoder {
    pub fn new(spec: &CodeSpec) -> Result<Self, CodeError> {
        let frozen = spec.frozen_set()?;
        let plan = Arc::new(TreePlan::classify_tree(&frozen, ListCaps::default()));
        Ok(Self::from_parts(
            plan,
            spec.crc_params()?,
            spec.k_info,
            spec.list_schedule.clone(),
            spec.pm_mode,
        ))
    }

    pub fn from_parts(
        plan: Arc<TreePlan>,
        crc: Option<CrcParams>,
        k_info: usize,
        schedule: Vec<usize>,
        pm_mode: PmMode,
    ) -> Self {
        let n = plan.n();
        Self {
            plan,
            crc,
            k_info,
            schedule,
            pm_mode,
            sc: ScScratch::new(n),
            list: None,
        }
    }

    pub fn plan(&self) -> &Arc<TreePlan> {
        &self.plan
    }

    fn extract(&self, beta: impl Fn(usize) -> u8) -> (Vec<u8>, bool) {
        let bits: Vec<u8> = self
            .plan
            .info_positions()
            .iter()
            .map(|&p| beta(p as usize))
            .collect();
        let crc_ok = match &self.crc {
            Some(c) => c.check(&bits),
            None => true,
        };
        (bits, crc_ok)
    }

    /// Fast-SSC successive cancellation. Shortened positions of the input
    /// frame must carry the saturation LLR.
    pub fn sc_decode(&mut self, llr: &[f32]) -> DecodeOutcome {
        assert_eq!(llr.len(), self.plan.n());
        self.sc.llr[0].copy_from_slice(llr);
        let mut work = 0;
        sc_walk(
            &self.plan,
            0,
            &mut self.sc,
            self.pm_mode == PmMode::Exact,
            &mut work,
        );
        let beta = &self.sc.beta;
        let (mut bits, crc_ok) = self.extract(|p| beta[p]);
        bits.truncate(self.k_info);
        DecodeOutcome {
            info: bits,
            crc_ok,
            stage: 0,
            work,
        }
    }

    fn list_state(&mut self, l: usize) -> &mut ListState {
        let n = self.plan.n();
        let need_realloc = self
            .list
            .as_ref()
            .map(|st| st.lanes() < l)
            .unwrap_or(true);
        if need_realloc {
            self.list = Some(ListState::new(n, l));
        }
        self.list.as_mut().unwrap()
    }

    /// CRC-aided list decoding with path duplication at info decisions and
    /// pruning to the L best metrics, ties broken by lower path index.
    pub fn scl_decode(&mut self, llr: &[f32], l: usize) -> DecodeOutcome {
        assert!(l >= 1 && l.is_power_of_two());
        assert_eq!(llr.len(), self.plan.n());
        let plan = Arc::clone(&self.plan);
        let pm_mode = self.pm_mode;
        let st = self.list_state(l);
        st.reset(llr, l, pm_mode);
        list::scl_walk(&plan, 0, st);
        let work = st.work;
        let (info, crc_ok) = list::crc_select(
            self.list.as_ref().unwrap(),
            plan.info_positions(),
            self.crc.as_ref(),
            self.k_info,
        );
        DecodeOutcome {
            info,
            crc_ok,
            stage: 0,
            work,
        }
    }

    /// Adaptive SCL: SC first, then the schedule entries in order, stopping
    /// at the first CRC pass.
    pub fn ascl_decode(&mut self, llr: &[f32]) -> DecodeOutcome {
        let mut out = self.sc_decode(llr);
        if out.crc_ok {
            return out;
        }
        let mut work = out.work;
        let schedule = self.schedule.clone();
        for (i, &l) in schedule.iter().enumerate() {
            let mut attempt = self.scl_decode(llr, l);
            work += attempt.work;
            attempt.work = work;
            attempt.stage = i as u32 + 1;
            if attempt.crc_ok || i == schedule.len() - 1 {
                return attempt;
            }
            out = attempt;
        }
        out
    }

    pub fn schedule(&self) -> &[usize] {
        &self.schedule
    }

    pub fn k_info(&self) -> usize {
        self.k_info
    }

    pub fn crc(&self) -> Option<&CrcParams> {
        self.crc.as_ref()
    }

    pub fn pm_mode(&self) -> PmMode {
        self.pm_mode
    }
}
