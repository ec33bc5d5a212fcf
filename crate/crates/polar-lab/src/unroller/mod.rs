//! Decoder unrolling: flattens a TreePlan into a linear instruction program
//! with all offsets and widths baked in, interprets it for verification, and
//! emits it as specialized source text.

mod emit;
pub mod rt;

pub use emit::emit_source;

use crate::code::{CodeError, CodeSpec, PmMode};
use crate::decoder::list::{self, FastMode, ListState, Mode, OracleMode};
use crate::decoder::{DecodeOutcome, NodeClass, PlanNode, TreePlan};
use crate::sim;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum UnrollError {
    #[error("unknown emit backend {0:?}")]
    UnknownBackend(String),
    #[error("instruction {index} ({instr}) reads unwritten scratch")]
    ReadBeforeWrite { index: usize, instr: String },
    #[error("instruction {index} ({instr}) exceeds scratch bounds")]
    ScratchOverflow { index: usize, instr: String },
    #[error("malformed program: {0}")]
    BadProgram(String),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Sim(#[from] sim::SimError),
}

/// One flattened instruction. `level` indexes the per-level LLR stacks
/// (level d holds the active node's LLRs at offsets [0, n>>d)); `beta` is a
/// global codeword position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Instr {
    F { level: u8, half: u32 },
    G { level: u8, half: u32, beta: u32 },
    Combine { level: u8, half: u32, beta: u32 },
    Rate0 { level: u8, width: u32, beta: u32 },
    Rate1 { level: u8, width: u32, beta: u32 },
    Rep { level: u8, width: u32, beta: u32 },
    Spc { level: u8, width: u32, beta: u32 },
    PathFork { level: u8, beta: u32 },
    PathPrune,
    CrcSelect,
}

impl std::fmt::Display for Instr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Instr::F { level, half } => write!(f, "F         lvl={level} w={half}"),
            Instr::G { level, half, beta } => {
                write!(f, "G         lvl={level} w={half} beta={beta}")
            }
            Instr::Combine { level, half, beta } => {
                write!(f, "COMBINE   lvl={level} w={half} beta={beta}")
            }
            Instr::Rate0 { level, width, beta } => {
                write!(f, "RATE0     lvl={level} w={width} beta={beta}")
            }
            Instr::Rate1 { level, width, beta } => {
                write!(f, "RATE1     lvl={level} w={width} beta={beta}")
            }
            Instr::Rep { level, width, beta } => {
                write!(f, "REP       lvl={level} w={width} beta={beta}")
            }
            Instr::Spc { level, width, beta } => {
                write!(f, "SPC       lvl={level} w={width} beta={beta}")
            }
            Instr::PathFork { level, beta } => write!(f, "PATH_FORK lvl={level} beta={beta}"),
            Instr::PathPrune => write!(f, "PATH_PRUNE"),
            Instr::CrcSelect => write!(f, "CRC_SELECT"),
        }
    }
}

/// A decode traversal flattened to straight-line instructions for one frozen
/// set and list size.
#[derive(Clone, Debug)]
pub struct UnrolledProgram {
    pub name: String,
    pub n: usize,
    pub l: usize,
    pub pm_mode: PmMode,
    pub k_info: usize,
    pub info_pos: Vec<u32>,
    /// (width, poly) of the CRC, if any.
    pub crc: Option<(u32, u32)>,
    pub instrs: Vec<Instr>,
    /// Total f32 slots across per-level LLR stacks, lanes included.
    pub llr_scratch: usize,
    /// Total partial-sum bytes across levels, lanes included.
    pub beta_scratch: usize,
}

impl UnrolledProgram {
    pub fn instruction_count(&self) -> usize {
        self.instrs.len()
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = sanitize(name);
        self
    }

    /// Deterministic text listing, one instruction per line.
    pub fn listing(&self) -> String {
        let mut out = String::new();
        for (i, ins) in self.instrs.iter().enumerate() {
            out.push_str(&format!("{i:5}  {ins}\n"));
        }
        out
    }
}

fn sanitize(name: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    if s.chars().next().is_some_and(|c| c.is_ascii_digit()) {
        s.insert(0, '_');
    }
    s
}

struct Gen<'a> {
    plan: &'a TreePlan,
    l: usize,
    pm_mode: PmMode,
    out: Vec<Instr>,
}

impl<'a> Gen<'a> {
    fn node(&mut self, node: &PlanNode) {
        let level = node.depth;
        let w = node.width;
        let a = node.start;
        if w == 1 {
            match node.class {
                NodeClass::Rate0 => self.out.push(Instr::Rate0 { level, width: 1, beta: a }),
                _ if self.l == 1 => self.out.push(Instr::Rate1 { level, width: 1, beta: a }),
                _ => {
                    self.out.push(Instr::PathFork { level, beta: a });
                    self.out.push(Instr::PathPrune);
                }
            }
            return;
        }
        let caps = self.plan.caps();
        let action = if self.l == 1 {
            match node.class {
                NodeClass::Rate0 | NodeClass::Rate1 | NodeClass::Rep => Some(node.class),
                // SPC expands so single-path programs stay in the
                // loop-free F/G/COMBINE + node-op instruction set
                NodeClass::Spc | NodeClass::Generic => None,
            }
        } else if self.pm_mode == PmMode::Exact {
            None
        } else {
            match node.class {
                NodeClass::Rate0 | NodeClass::Rep => Some(node.class),
                NodeClass::Rate1 if w <= caps.rate1_max => Some(node.class),
                NodeClass::Spc if w <= caps.spc_max => Some(node.class),
                _ => None,
            }
        };
        match action {
            Some(NodeClass::Rate0) => self.out.push(Instr::Rate0 { level, width: w, beta: a }),
            Some(NodeClass::Rate1) => self.out.push(Instr::Rate1 { level, width: w, beta: a }),
            Some(NodeClass::Rep) => {
                self.out.push(Instr::Rep { level, width: w, beta: a });
                if self.l > 1 {
                    self.out.push(Instr::PathPrune);
                }
            }
            Some(NodeClass::Spc) => self.out.push(Instr::Spc { level, width: w, beta: a }),
            _ => {
                let half = w / 2;
                self.out.push(Instr::F { level, half });
                self.node(&self.plan.nodes()[node.left as usize]);
                self.out.push(Instr::G { level, half, beta: a });
                self.node(&self.plan.nodes()[node.right as usize]);
                self.out.push(Instr::Combine { level, half, beta: a });
            }
        }
    }
}

/// Depth-first linearization of the decode traversal. Programs for L=1
/// contain no PATH_* instructions; instruction count is a pure function of
/// (frozen set, caps, L, pm_mode).
pub fn generate_program(
    plan: &TreePlan,
    l: usize,
    pm_mode: PmMode,
    crc: Option<(u32, u32)>,
    k_info: usize,
) -> Result<UnrolledProgram, UnrollError> {
    assert!(l >= 1 && l.is_power_of_two());
    let mut gen = Gen {
        plan,
        l,
        pm_mode,
        out: Vec::new(),
    };
    gen.node(plan.root());
    gen.out.push(Instr::CrcSelect);
    let n = plan.n();
    let levels = plan.levels();
    let llr_scratch = n + (n - 1) * l.max(1);
    let beta_scratch = levels * n * l.max(1);
    let prog = UnrolledProgram {
        name: format!("decode_n{}_l{}", n, l),
        n,
        l,
        pm_mode,
        k_info,
        info_pos: plan.info_positions().to_vec(),
        crc,
        instrs: gen.out,
        llr_scratch,
        beta_scratch,
    };
    check_program(&prog)?;
    Ok(prog)
}

/// Convenience: program for a spec's code at one list size.
pub fn program_for_spec(
    spec: &CodeSpec,
    plan: &TreePlan,
    l: usize,
) -> Result<UnrolledProgram, UnrollError> {
    let crc = if spec.crc_size > 0 {
        Some((spec.crc_size as u32, spec.crc_poly))
    } else {
        None
    };
    generate_program(plan, l, spec.pm_mode, crc, spec.k_info)
}

/// Generation-time def-before-use and bounds pass over the scratch space.
/// Every instruction may read only scratch written earlier (or the input
/// frame at level 0) and must stay inside the declared bounds.
fn check_program(prog: &UnrolledProgram) -> Result<(), UnrollError> {
    let n = prog.n;
    let levels = n.trailing_zeros() as usize + 1;
    let mut llr_written: Vec<Vec<bool>> = (0..levels).map(|d| vec![d == 0; n >> d]).collect();
    let mut beta_written: Vec<Vec<bool>> = (0..levels).map(|_| vec![false; n]).collect();
    let mut pending_fork = false;

    let fail_read = |i: usize, ins: &Instr| UnrollError::ReadBeforeWrite {
        index: i,
        instr: ins.to_string(),
    };
    let fail_bounds = |i: usize, ins: &Instr| UnrollError::ScratchOverflow {
        index: i,
        instr: ins.to_string(),
    };

    for (i, ins) in prog.instrs.iter().enumerate() {
        match *ins {
            Instr::F { level, half } | Instr::G { level, half, .. } => {
                let d = level as usize;
                let w = half as usize;
                if d + 1 >= levels || 2 * w > (n >> d) {
                    return Err(fail_bounds(i, ins));
                }
                if !llr_written[d][..2 * w].iter().all(|&b| b) {
                    return Err(fail_read(i, ins));
                }
                if let Instr::G { beta, .. } = *ins {
                    let a = beta as usize;
                    if a + w > n {
                        return Err(fail_bounds(i, ins));
                    }
                    if !beta_written[d + 1][a..a + w].iter().all(|&b| b) {
                        return Err(fail_read(i, ins));
                    }
                }
                llr_written[d + 1][..w].fill(true);
            }
            Instr::Combine { level, half, beta } => {
                let d = level as usize;
                let w = half as usize;
                let a = beta as usize;
                if d + 1 >= levels || a + 2 * w > n {
                    return Err(fail_bounds(i, ins));
                }
                if !beta_written[d + 1][a..a + 2 * w].iter().all(|&b| b) {
                    return Err(fail_read(i, ins));
                }
                beta_written[d][a..a + 2 * w].fill(true);
            }
            Instr::Rate0 { level, width, beta }
            | Instr::Rate1 { level, width, beta }
            | Instr::Rep { level, width, beta }
            | Instr::Spc { level, width, beta } => {
                let d = level as usize;
                let w = width as usize;
                let a = beta as usize;
                if d >= levels || w > (n >> d) || a + w > n {
                    return Err(fail_bounds(i, ins));
                }
                if !llr_written[d][..w].iter().all(|&b| b) {
                    return Err(fail_read(i, ins));
                }
                beta_written[d][a..a + w].fill(true);
                // fused forms touch the levels below; model their writes
                if matches!(ins, Instr::Rate1 { .. } if prog.l > 1 && w > 1)
                    || matches!(ins, Instr::Spc { .. })
                {
                    let mut ww = w / 2;
                    let mut dd = d + 1;
                    while ww >= 1 && dd < levels {
                        llr_written[dd][..ww].fill(true);
                        beta_written[dd][a..a + 2 * ww].fill(true);
                        ww /= 2;
                        dd += 1;
                    }
                }
            }
            Instr::PathFork { level, beta } => {
                let d = level as usize;
                let a = beta as usize;
                if d >= levels || a >= n {
                    return Err(fail_bounds(i, ins));
                }
                if !llr_written[d][0] {
                    return Err(fail_read(i, ins));
                }
                if pending_fork {
                    return Err(UnrollError::BadProgram(format!(
                        "PATH_FORK at {i} while another fork is pending"
                    )));
                }
                pending_fork = true;
                beta_written[d][a] = true;
            }
            Instr::PathPrune => {
                // pairs with the preceding PATH_FORK or REP
                pending_fork = false;
            }
            Instr::CrcSelect => {
                if i != prog.instrs.len() - 1 {
                    return Err(UnrollError::BadProgram(
                        "CRC_SELECT must be the final instruction".into(),
                    ));
                }
                for &p in &prog.info_pos {
                    if !beta_written[0][p as usize] {
                        return Err(fail_read(i, ins));
                    }
                }
            }
        }
        if prog.l == 1 {
            if matches!(ins, Instr::PathFork { .. } | Instr::PathPrune) {
                return Err(UnrollError::BadProgram(
                    "PATH_* instruction in an L=1 program".into(),
                ));
            }
        }
    }
    if pending_fork {
        return Err(UnrollError::BadProgram("unterminated PATH_FORK".into()));
    }
    Ok(())
}

enum Pending {
    Fork { level: usize, beta: usize },
    Rep { level: usize, width: usize, beta: usize },
}

/// Execute a program over list scratch; opcode semantics are the shared
/// decoder kernels, so the interpreter is bit-exact with the tree decoders.
pub fn interpret_with_state(
    prog: &UnrolledProgram,
    llr: &[f32],
    st: &mut ListState,
) -> DecodeOutcome {
    match prog.pm_mode {
        PmMode::Approximate => interpret_m::<FastMode>(prog, llr, st),
        PmMode::Exact => interpret_m::<OracleMode>(prog, llr, st),
    }
}

/// One-shot interpretation with freshly allocated scratch.
pub fn interpret_program(prog: &UnrolledProgram, llr: &[f32]) -> DecodeOutcome {
    let mut st = ListState::new(prog.n, prog.l);
    interpret_with_state(prog, llr, &mut st)
}

fn interpret_m<M: Mode>(prog: &UnrolledProgram, llr: &[f32], st: &mut ListState) -> DecodeOutcome {
    st.reset(llr, prog.l, prog.pm_mode);
    let mut pending: Option<Pending> = None;
    for ins in &prog.instrs {
        match *ins {
            Instr::F { level, half } => st.f_op::<M>(level as usize, half as usize),
            Instr::G { level, half, beta } => {
                st.g_op::<M>(level as usize, half as usize, beta as usize)
            }
            Instr::Combine { level, half, beta } => {
                st.combine_op(level as usize, half as usize, beta as usize)
            }
            Instr::Rate0 { level, width, beta } => {
                st.rate0_op::<M>(level as usize, width as usize, beta as usize)
            }
            Instr::Rate1 { level, width, beta } => {
                if prog.l == 1 {
                    st.rate1_sc_op(level as usize, width as usize, beta as usize);
                } else {
                    debug_assert_eq!(width, 2);
                    st.rate1_w2_op::<M>(level as usize, beta as usize);
                }
            }
            Instr::Rep { level, width, beta } => {
                if prog.l == 1 {
                    st.rep_op::<M>(level as usize, width as usize, beta as usize);
                } else {
                    pending = Some(Pending::Rep {
                        level: level as usize,
                        width: width as usize,
                        beta: beta as usize,
                    });
                }
            }
            Instr::Spc { level, width, beta } => {
                st.spc_op::<M>(level as usize, width as usize, beta as usize)
            }
            Instr::PathFork { level, beta } => {
                pending = Some(Pending::Fork {
                    level: level as usize,
                    beta: beta as usize,
                });
            }
            Instr::PathPrune => match pending.take() {
                Some(Pending::Fork { level, beta }) => st.fork_op::<M>(level, beta),
                Some(Pending::Rep { level, width, beta }) => st.rep_op::<M>(level, width, beta),
                None => unreachable!("validated program"),
            },
            Instr::CrcSelect => {
                let crc = prog
                    .crc
                    .map(|(w, p)| crate::crc::CrcParams::new(w, p).expect("validated crc"));
                let (info, crc_ok) =
                    list::crc_select(st, &prog.info_pos, crc.as_ref(), prog.k_info);
                return DecodeOutcome {
                    info,
                    crc_ok,
                    stage: 0,
                    work: st.work,
                };
            }
        }
    }
    unreachable!("program must end with CRC_SELECT")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub frames: usize,
    pub mismatches: usize,
    pub first_mismatch: Option<usize>,
}

/// Paired decoding of seeded noisy frames: program interpreter vs the
/// reference tree decoder. The mismatch count must be zero.
pub fn verify_equivalence(
    spec: &CodeSpec,
    prog: &UnrolledProgram,
    n_frames: usize,
    seed: u64,
    ebn0_db: f64,
) -> Result<EquivalenceReport, UnrollError> {
    let ctx = sim::SimContext::new(spec)?;
    let sigma = sim::ebn0_to_sigma(ebn0_db, spec.rate_info())?;
    let mut reference = crate::decoder::Decoder::new(spec)?;
    let mut st = ListState::new(prog.n, prog.l);
    let mut mismatches = 0;
    let mut first = None;
    for idx in 0..n_frames {
        let (_, llr) = ctx.frame(seed, idx as u64, sigma);
        let got = interpret_with_state(prog, &llr, &mut st);
        let want = if prog.l == 1 {
            reference.sc_decode(&llr)
        } else {
            reference.scl_decode(&llr, prog.l)
        };
        if got.info != want.info || got.crc_ok != want.crc_ok {
            mismatches += 1;
            first.get_or_insert(idx);
        }
    }
    Ok(EquivalenceReport {
        frames: n_frames,
        mismatches,
        first_mismatch: first,
    })
}

/// Manifest describing a generated program, structured text.
pub fn manifest(prog: &UnrolledProgram) -> String {
    format!(
        "name = \"{}\"\nn_mother = {}\nlist_size = {}\npm_mode = \"{}\"\nk_info = {}\n\
         info_count = {}\ninstruction_count = {}\nllr_scratch_f32 = {}\nbeta_scratch_bytes = {}\n",
        prog.name,
        prog.n,
        prog.l,
        match prog.pm_mode {
            PmMode::Approximate => "approximate",
            PmMode::Exact => "exact",
        },
        prog.k_info,
        prog.info_pos.len(),
        prog.instruction_count(),
        prog.llr_scratch,
        prog.beta_scratch,
    )
}

#[cfg(test)]
mod tests;
