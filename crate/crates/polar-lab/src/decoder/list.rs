//! List-decoder path state.
//!
//! Every tree level keeps L lanes of LLRs and partial sums. Pruning never
//! copies lane data: each prune records the surviving paths' parent lanes in
//! per-level index maps, and later reads translate through the map (data
//! written after the fork is always lane-identity). A level's map resets
//! whenever the level is rewritten on descent.
//!
//! Specialised node routines reproduce the unpruned traversal's arithmetic
//! exactly (same kernel ops in the same order), so pruned and unpruned
//! decodes stay bit-identical; they only skip the per-node control flow.

use super::{
    f_kernel, f_kernel_exact, hard_decision, node_action, pm_penalty, NodeAction, TreePlan,
};
use crate::code::PmMode;
use crate::crc::CrcParams;

/// Arithmetic flavour of a decode: kernel plus path-metric rule.
pub trait Mode {
    const PM: PmMode;
    fn f(a: f32, b: f32) -> f32;
    fn pen(llr: f32, bit: u8) -> f64;
}

/// Min-sum kernel with the approximate path-metric rule (the default).
pub struct FastMode;

impl Mode for FastMode {
    const PM: PmMode = PmMode::Approximate;
    #[inline(always)]
    fn f(a: f32, b: f32) -> f32 {
        f_kernel(a, b)
    }
    #[inline(always)]
    fn pen(llr: f32, bit: u8) -> f64 {
        pm_penalty(llr, bit, PmMode::Approximate)
    }
}

/// Exact boxplus kernel with the exact path-metric rule; the metric is then a
/// codeword log-likelihood, which the ML-equivalence oracle needs.
pub struct OracleMode;

impl Mode for OracleMode {
    const PM: PmMode = PmMode::Exact;
    #[inline(always)]
    fn f(a: f32, b: f32) -> f32 {
        f_kernel_exact(a, b)
    }
    #[inline(always)]
    fn pen(llr: f32, bit: u8) -> f64 {
        pm_penalty(llr, bit, PmMode::Exact)
    }
}

/// In-place butterfly producing the leaf LLRs of an all-frozen-prior subtree:
/// every g sees a zero partial sum. buf[j] ends as leaf j's LLR, bit-exactly
/// what the leaf-by-leaf traversal computes.
pub fn frozen_cascade<M: Mode>(buf: &mut [f32]) {
    let w = buf.len();
    let mut h = w / 2;
    while h >= 1 {
        let mut o = 0;
        while o < w {
            for i in 0..h {
                let x = buf[o + i];
                let y = buf[o + i + h];
                buf[o + i] = M::f(x, y);
                buf[o + i + h] = y + x;
            }
            o += 2 * h;
        }
        h /= 2;
    }
}

#[derive(Clone, Copy, Debug)]
struct Cand {
    pm: f64,
    parent: u16,
    branch: u8,
}

pub struct ListState {
    n: usize,
    /// Tree levels including leaves: log2(n) + 1.
    levels: usize,
    /// Allocated lanes (stride).
    l: usize,
    /// List size of the current decode, <= l.
    run_l: usize,
    pm_mode: PmMode,
    pub active: usize,
    input: Vec<f32>,
    /// llr[d] for d >= 1: (n >> d) positions x l lanes. Level 0 is `input`.
    llr: Vec<Vec<f32>>,
    /// beta[d]: n positions x l lanes, indexed by global codeword position.
    beta: Vec<Vec<u8>>,
    pm: Vec<f64>,
    map_llr: Vec<Vec<u16>>,
    map_beta: Vec<Vec<u16>>,
    ident_llr: Vec<bool>,
    ident_beta: Vec<bool>,
    cands: Vec<Cand>,
    branches: Vec<u8>,
    tmp_map: Vec<u16>,
    cascade_buf: Vec<f32>,
    pub work: u64,
}

impl ListState {
    pub fn new(n: usize, l: usize) -> Self {
        assert!(n.is_power_of_two() && n >= 2);
        assert!(l >= 1);
        let levels = n.trailing_zeros() as usize + 1;
        Self {
            n,
            levels,
            l,
            run_l: 1,
            pm_mode: PmMode::Approximate,
            active: 1,
            input: vec![0.0; n],
            llr: (0..levels)
                .map(|d| if d == 0 { Vec::new() } else { vec![0.0; (n >> d) * l] })
                .collect(),
            beta: (0..levels).map(|_| vec![0u8; n * l]).collect(),
            pm: vec![0.0; l],
            map_llr: (0..levels).map(|_| vec![0u16; l]).collect(),
            map_beta: (0..levels).map(|_| vec![0u16; l]).collect(),
            ident_llr: vec![true; levels],
            ident_beta: vec![true; levels],
            cands: Vec::with_capacity(2 * l),
            branches: vec![0; l],
            tmp_map: vec![0; l],
            cascade_buf: vec![0.0; n],
            work: 0,
        }
    }

    pub fn lanes(&self) -> usize {
        self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn run_list_size(&self) -> usize {
        self.run_l
    }

    pub fn pm_mode(&self) -> PmMode {
        self.pm_mode
    }

    pub fn metric(&self, lane: usize) -> f64 {
        self.pm[lane]
    }

    pub fn reset(&mut self, llr: &[f32], run_l: usize, pm_mode: PmMode) {
        assert_eq!(llr.len(), self.n);
        assert!(run_l >= 1 && run_l <= self.l);
        self.input.copy_from_slice(llr);
        self.run_l = run_l;
        self.pm_mode = pm_mode;
        self.active = 1;
        self.pm[0] = 0.0;
        for d in 0..self.levels {
            for lane in 0..self.l {
                self.map_llr[d][lane] = lane as u16;
                self.map_beta[d][lane] = lane as u16;
            }
            self.ident_llr[d] = true;
            self.ident_beta[d] = true;
        }
        self.cands.clear();
        self.work = 0;
    }

    #[inline]
    fn read_llr(&self, d: usize, i: usize, lane: usize) -> f32 {
        if d == 0 {
            self.input[i]
        } else {
            self.llr[d][i * self.l + self.map_llr[d][lane] as usize]
        }
    }

    /// Root partial sum (the codeword estimate) of one lane.
    pub fn root_beta(&self, pos: usize, lane: usize) -> u8 {
        self.beta[0][pos * self.l + lane]
    }

    /// Active lanes ordered by (metric, lane index).
    pub fn lanes_by_metric(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.active).collect();
        order.sort_by(|&a, &b| self.pm[a].total_cmp(&self.pm[b]).then(a.cmp(&b)));
        order
    }

    fn reset_map_llr(&mut self, d: usize) {
        for lane in 0..self.active {
            self.map_llr[d][lane] = lane as u16;
        }
        self.ident_llr[d] = true;
    }

    fn reset_map_beta(&mut self, d: usize) {
        for lane in 0..self.active {
            self.map_beta[d][lane] = lane as u16;
        }
        self.ident_beta[d] = true;
    }

    /// F stage of the node at depth d (node width = 2 * half): child LLRs
    /// into level d+1.
    pub fn f_op<M: Mode>(&mut self, d: usize, half: usize) {
        self.work += 1;
        let act = self.active;
        let l = self.l;
        if d == 0 {
            let dst = &mut self.llr[1];
            for i in 0..half {
                let v = M::f(self.input[i], self.input[i + half]);
                dst[i * l..i * l + act].fill(v);
            }
        } else {
            let (src_part, dst_part) = self.llr.split_at_mut(d + 1);
            let src = &src_part[d];
            let dst = &mut dst_part[0];
            if self.ident_llr[d] {
                for i in 0..half {
                    for lane in 0..act {
                        dst[i * l + lane] = M::f(src[i * l + lane], src[(i + half) * l + lane]);
                    }
                }
            } else {
                let map = &self.map_llr[d];
                for i in 0..half {
                    for lane in 0..act {
                        let p = map[lane] as usize;
                        dst[i * l + lane] = M::f(src[i * l + p], src[(i + half) * l + p]);
                    }
                }
            }
        }
        self.reset_map_llr(d + 1);
    }

    /// G stage: child LLRs from the node LLRs and the left child's partial
    /// sums at positions [a, a+half). Marks the left sums' map snapshot.
    pub fn g_op<M: Mode>(&mut self, d: usize, half: usize, a: usize) {
        self.work += 1;
        let act = self.active;
        let l = self.l;
        {
            let (beta_head, beta_tail) = self.beta.split_at(d + 1);
            let _ = beta_head;
            let beta_left = &beta_tail[0];
            let (src_part, dst_part) = self.llr.split_at_mut(d + 1);
            let dst = &mut dst_part[0];
            if d == 0 {
                for i in 0..half {
                    let (x, y) = (self.input[i], self.input[i + half]);
                    for lane in 0..act {
                        let s = beta_left[(a + i) * l + lane];
                        dst[i * l + lane] = if s == 0 { y + x } else { y - x };
                    }
                }
            } else {
                let src = &src_part[d];
                if self.ident_llr[d] {
                    for i in 0..half {
                        for lane in 0..act {
                            let s = beta_left[(a + i) * l + lane];
                            let (x, y) = (src[i * l + lane], src[(i + half) * l + lane]);
                            dst[i * l + lane] = if s == 0 { y + x } else { y - x };
                        }
                    }
                } else {
                    let map = &self.map_llr[d];
                    for i in 0..half {
                        for lane in 0..act {
                            let p = map[lane] as usize;
                            let s = beta_left[(a + i) * l + lane];
                            let (x, y) = (src[i * l + p], src[(i + half) * l + p]);
                            dst[i * l + lane] = if s == 0 { y + x } else { y - x };
                        }
                    }
                }
            }
        }
        self.reset_map_llr(d + 1);
        self.reset_map_beta(d + 1);
    }

    /// Combine children partial sums into the node's level-d sums: left then
    /// right halves of [a, a+2*half). Left reads translate through the level
    /// d+1 map (forks may have happened in the right subtree), right reads
    /// are lane-identity.
    pub fn combine_op(&mut self, d: usize, half: usize, a: usize) {
        self.work += 1;
        let act = self.active;
        let l = self.l;
        let (dst_part, src_part) = self.beta.split_at_mut(d + 1);
        let dst = &mut dst_part[d];
        let src = &src_part[0];
        if self.ident_beta[d + 1] {
            for i in 0..half {
                for lane in 0..act {
                    let left = src[(a + i) * l + lane];
                    let right = src[(a + half + i) * l + lane];
                    dst[(a + i) * l + lane] = left ^ right;
                    dst[(a + half + i) * l + lane] = right;
                }
            }
        } else {
            let map = &self.map_beta[d + 1];
            for i in 0..half {
                for lane in 0..act {
                    let left = src[(a + i) * l + map[lane] as usize];
                    let right = src[(a + half + i) * l + lane];
                    dst[(a + i) * l + lane] = left ^ right;
                    dst[(a + half + i) * l + lane] = right;
                }
            }
        }
    }

    /// Rate-0 node: all-zero sums; each lane's penalty comes from the same
    /// cascade leaf values the unpruned traversal would produce.
    pub fn rate0_op<M: Mode>(&mut self, d: usize, w: usize, a: usize) {
        self.work += 1;
        let l = self.l;
        for lane in 0..self.active {
            let acc = if w == 1 {
                M::pen(self.read_llr(d, 0, lane), 0)
            } else {
                for i in 0..w {
                    self.cascade_buf[i] = self.read_llr(d, i, lane);
                }
                frozen_cascade::<M>(&mut self.cascade_buf[..w]);
                let mut acc = 0.0f64;
                for i in 0..w {
                    acc += M::pen(self.cascade_buf[i], 0);
                }
                acc
            };
            self.pm[lane] += acc;
        }
        let beta = &mut self.beta[d];
        for i in 0..w {
            beta[(a + i) * l..(a + i) * l + self.active].fill(0);
        }
    }

    /// Repetition node: two candidates per path. Frozen-leaf penalties and
    /// the decision LLR come from the cascade, as in the unpruned traversal.
    pub fn rep_op<M: Mode>(&mut self, d: usize, w: usize, a: usize) {
        self.work += 1;
        self.cands.clear();
        for lane in 0..self.active {
            for i in 0..w {
                self.cascade_buf[i] = self.read_llr(d, i, lane);
            }
            frozen_cascade::<M>(&mut self.cascade_buf[..w]);
            let mut acc = 0.0f64;
            for i in 0..w - 1 {
                acc += M::pen(self.cascade_buf[i], 0);
            }
            let lam = self.cascade_buf[w - 1];
            let base = self.pm[lane] + acc;
            self.cands.push(Cand {
                pm: base + M::pen(lam, 0),
                parent: lane as u16,
                branch: 0,
            });
            self.cands.push(Cand {
                pm: base + M::pen(lam, 1),
                parent: lane as u16,
                branch: 1,
            });
        }
        self.prune();
        let l = self.l;
        let beta = &mut self.beta[d];
        for i in 0..w {
            for lane in 0..self.active {
                beta[(a + i) * l + lane] = self.branches[lane];
            }
        }
    }

    /// Width-1 information leaf: fork on the bit and prune.
    pub fn fork_op<M: Mode>(&mut self, d: usize, a: usize) {
        self.work += 1;
        self.cands.clear();
        for lane in 0..self.active {
            let x = self.read_llr(d, 0, lane);
            self.cands.push(Cand {
                pm: self.pm[lane] + M::pen(x, 0),
                parent: lane as u16,
                branch: 0,
            });
            self.cands.push(Cand {
                pm: self.pm[lane] + M::pen(x, 1),
                parent: lane as u16,
                branch: 1,
            });
        }
        self.prune();
        let l = self.l;
        let beta = &mut self.beta[d];
        for lane in 0..self.active {
            beta[a * l + lane] = self.branches[lane];
        }
    }

    /// Rate-1 node as plain hard decisions. Exact for a single path: inside a
    /// rate-1 subtree every g adds same-signed values, so the traversal's
    /// decisions equal the node hard decisions bit-for-bit.
    pub fn rate1_sc_op(&mut self, d: usize, w: usize, a: usize) {
        debug_assert_eq!(self.run_l, 1);
        self.work += 1;
        let l = self.l;
        for lane in 0..self.active {
            for i in 0..w {
                let b = hard_decision(self.read_llr(d, i, lane));
                self.beta[d][(a + i) * l + lane] = b;
            }
        }
    }

    /// Width-2 rate-1 node under list decoding: the exact per-bit sequence,
    /// fused (no tree descent).
    pub fn rate1_w2_op<M: Mode>(&mut self, d: usize, a: usize) {
        self.f_op::<M>(d, 1);
        self.fork_op::<M>(d + 1, a);
        self.g_op::<M>(d, 1, a);
        self.fork_op::<M>(d + 1, a + 1);
        self.combine_op(d, 1, a);
    }

    /// SPC node: the exact descent sequence, fused. Left subtrees shrink to
    /// the node's single frozen leaf (a repetition pattern at width 2), right
    /// subtrees are rate-1.
    pub fn spc_op<M: Mode>(&mut self, d: usize, w: usize, a: usize) {
        debug_assert!(w >= 4);
        let half = w / 2;
        self.f_op::<M>(d, half);
        if half == 2 {
            self.rep_op::<M>(d + 1, 2, a);
        } else {
            self.spc_op::<M>(d + 1, half, a);
        }
        self.g_op::<M>(d, half, a);
        self.rate1_list_op::<M>(d + 1, half, a + half);
        self.combine_op(d, half, a);
    }

    /// Rate-1 subtree under list decoding at any width: per-bit splits via
    /// the descent sequence (fused width-2 base case).
    pub fn rate1_list_op<M: Mode>(&mut self, d: usize, w: usize, a: usize) {
        if self.run_l == 1 {
            self.rate1_sc_op(d, w, a);
            return;
        }
        match w {
            1 => self.fork_op::<M>(d, a),
            2 => self.rate1_w2_op::<M>(d, a),
            _ => {
                let half = w / 2;
                self.f_op::<M>(d, half);
                self.rate1_list_op::<M>(d + 1, half, a);
                self.g_op::<M>(d, half, a);
                self.rate1_list_op::<M>(d + 1, half, a + half);
                self.combine_op(d, half, a);
            }
        }
    }

    /// Keep the run_l best candidates in (metric, parent, branch) order and
    /// compose every level map with the survivors' parent lanes.
    fn prune(&mut self) {
        self.cands.sort_unstable_by(|x, y| {
            x.pm
                .total_cmp(&y.pm)
                .then(x.parent.cmp(&y.parent))
                .then(x.branch.cmp(&y.branch))
        });
        let q = self.cands.len().min(self.run_l);
        let mut identity = true;
        for (j, c) in self.cands[..q].iter().enumerate() {
            if c.parent as usize != j {
                identity = false;
            }
            self.pm[j] = c.pm;
            self.branches[j] = c.branch;
        }
        if !identity {
            for d in 1..self.levels {
                compose(&mut self.map_llr[d], &self.cands[..q], &mut self.tmp_map);
                self.ident_llr[d] = is_identity(&self.map_llr[d][..q]);
                compose(&mut self.map_beta[d], &self.cands[..q], &mut self.tmp_map);
                self.ident_beta[d] = is_identity(&self.map_beta[d][..q]);
            }
        }
        self.active = q;
    }
}

/// Final candidate selection: lowest-metric CRC-passing lane, else the
/// lowest-metric lane. Bits come from the root partial sums at the info
/// positions; with no CRC the check is vacuous and the best lane passes.
pub fn crc_select(
    st: &ListState,
    info_pos: &[u32],
    crc: Option<&CrcParams>,
    k_info: usize,
) -> (Vec<u8>, bool) {
    let order = st.lanes_by_metric();
    let extract = |lane: usize| -> Vec<u8> {
        info_pos
            .iter()
            .map(|&p| st.root_beta(p as usize, lane))
            .collect()
    };
    if let Some(c) = crc {
        for &lane in &order {
            let bits = extract(lane);
            if c.check(&bits) {
                let mut info = bits;
                info.truncate(k_info);
                return (info, true);
            }
        }
        let mut bits = extract(order[0]);
        bits.truncate(k_info);
        (bits, false)
    } else {
        let mut bits = extract(order[0]);
        bits.truncate(k_info);
        (bits, true)
    }
}

fn compose(map: &mut [u16], survivors: &[Cand], tmp: &mut [u16]) {
    for (j, c) in survivors.iter().enumerate() {
        tmp[j] = map[c.parent as usize];
    }
    map[..survivors.len()].copy_from_slice(&tmp[..survivors.len()]);
}

fn is_identity(map: &[u16]) -> bool {
    map.iter().enumerate().all(|(j, &p)| p as usize == j)
}

/// Tree-walking reference list decoder over a plan.
pub fn scl_walk(plan: &TreePlan, idx: u32, st: &mut ListState) {
    match st.pm_mode {
        PmMode::Approximate => scl_walk_m::<FastMode>(plan, idx, st),
        PmMode::Exact => scl_walk_m::<OracleMode>(plan, idx, st),
    }
}

fn scl_walk_m<M: Mode>(plan: &TreePlan, idx: u32, st: &mut ListState) {
    let node = &plan.nodes()[idx as usize];
    let d = node.depth as usize;
    let w = node.width as usize;
    let start = node.start as usize;
    match node_action(node.class, node.width, st.run_l, st.pm_mode) {
        NodeAction::LeafFrozen => st.rate0_op::<M>(d, 1, start),
        NodeAction::LeafInfo => st.fork_op::<M>(d, start),
        NodeAction::Rate0 => st.rate0_op::<M>(d, w, start),
        NodeAction::Rep => st.rep_op::<M>(d, w, start),
        NodeAction::Rate1 => st.rate1_sc_op(d, w, start),
        NodeAction::Descend => {
            let half = w / 2;
            st.f_op::<M>(d, half);
            scl_walk_m::<M>(plan, node.left, st);
            st.g_op::<M>(d, half, start);
            scl_walk_m::<M>(plan, node.right, st);
            st.combine_op(d, half, start);
        }
    }
}
