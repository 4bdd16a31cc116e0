//! Supervisor localization: merging supervisor states into cells of a
//! control congruence for one agent, and building the local supervisor
//! from the cells.

use std::collections::{HashMap, HashSet};

use crate::automaton::{Automaton, StateId};
use crate::context::{AgentView, ControlContext};
use crate::cover::Cover;
use crate::error::{Error, Result};

/// Pairs of states whose merge is entailed by the merge currently being
/// checked. Membership is symmetric.
#[derive(Debug, Clone, Default)]
pub struct WaitList {
    pairs: Vec<(StateId, StateId)>,
    set: HashSet<(StateId, StateId)>,
    linked: HashMap<StateId, Vec<StateId>>,
}

impl WaitList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, p: StateId, q: StateId) -> bool {
        self.set.contains(&(p.min(q), p.max(q)))
    }

    /// Adds `(p, q)`; returns false if the pair (in either order) was present.
    pub fn insert(&mut self, p: StateId, q: StateId) -> bool {
        if !self.set.insert((p.min(q), p.max(q))) {
            return false;
        }
        self.pairs.push((p, q));
        self.linked.entry(p).or_default().push(q);
        if p != q {
            self.linked.entry(q).or_default().push(p);
        }
        true
    }

    /// Pairs in insertion order, as inserted.
    pub fn pairs(&self) -> &[(StateId, StateId)] {
        &self.pairs
    }

    /// States paired with `x` in either position.
    pub fn linked(&self, x: StateId) -> &[StateId] {
        self.linked.get(&x).map_or(&[], Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Working partition for the localization loop: weighted quick-union over
/// cells with the minimum member cached per cell.
#[derive(Debug, Clone)]
struct Partition {
    cell_of: Vec<usize>,
    members: Vec<Vec<StateId>>,
    min: Vec<StateId>,
}

impl Partition {
    fn from_cover(cover: &Cover) -> Self {
        let norm = cover.normalized();
        let n = norm.num_cells();
        let mut members = vec![Vec::new(); n];
        for (x, &c) in norm.cell_ids().iter().enumerate() {
            members[c].push(x);
        }
        let min = members.iter().map(|m| m[0]).collect();
        Self {
            cell_of: norm.cell_ids().to_vec(),
            members,
            min,
        }
    }

    fn same(&self, x: StateId, y: StateId) -> bool {
        self.cell_of[x] == self.cell_of[y]
    }

    fn min_of(&self, x: StateId) -> StateId {
        self.min[self.cell_of[x]]
    }

    fn members_of(&self, x: StateId) -> &[StateId] {
        &self.members[self.cell_of[x]]
    }

    fn union(&mut self, x: StateId, y: StateId) {
        let (mut a, mut b) = (self.cell_of[x], self.cell_of[y]);
        if a == b {
            return;
        }
        if self.members[a].len() < self.members[b].len() {
            std::mem::swap(&mut a, &mut b);
        }
        let moved = std::mem::take(&mut self.members[b]);
        for &z in &moved {
            self.cell_of[z] = a;
        }
        self.members[a].extend(moved);
        self.min[a] = self.min[a].min(self.min[b]);
    }

    fn to_cover(&self) -> Cover {
        Cover::from_cell_ids(self.cell_of.clone()).normalized()
    }
}

/// `[x]` together with every cell holding a state `W`-linked to a member of `[x]`,
/// ascending.
fn linked_cells(x: StateId, w: &WaitList, part: &Partition) -> Vec<StateId> {
    let mut out: Vec<StateId> = part.members_of(x).to_vec();
    let mut cells: Vec<usize> = vec![part.cell_of[x]];
    for &m in part.members_of(x) {
        for &y in w.linked(m) {
            let c = part.cell_of[y];
            if !cells.contains(&c) {
                cells.push(c);
                out.extend_from_slice(&part.members[c]);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Successor pairs `(ξ(p,σ), ξ(q,σ))` for `σ ∈ E(p) ∩ E(q)`, in event order.
fn shared_successors(s: &Automaton, p: StateId, q: StateId) -> Vec<(StateId, StateId)> {
    let (a, b) = (s.transitions(p), s.transitions(q));
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push((a[i].1, b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out
}

struct Frame {
    xj: StateId,
    p_set: Vec<StateId>,
    p_pos: usize,
    q_set: Vec<StateId>,
    q_pos: usize,
    succ: Vec<(StateId, StateId)>,
    succ_pos: usize,
}

/// Mergeability check with an explicit stack; visits pairs in the same
/// depth-first order as the recursive formulation.
fn check_merge_in(
    xi: StateId,
    xj: StateId,
    w: &mut WaitList,
    i: StateId,
    s: &Automaton,
    view: &AgentView<'_>,
    part: &Partition,
) -> bool {
    let frame = |xi: StateId, xj: StateId, w: &WaitList| Frame {
        xj,
        p_set: linked_cells(xi, w, part),
        p_pos: 0,
        q_set: Vec::new(),
        q_pos: 0,
        succ: Vec::new(),
        succ_pos: 0,
    };
    let mut stack = vec![frame(xi, xj, w)];
    while let Some(f) = stack.last_mut() {
        if f.succ_pos < f.succ.len() {
            let (sp, sq) = f.succ[f.succ_pos];
            f.succ_pos += 1;
            if part.same(sp, sq) || w.contains(sp, sq) {
                continue;
            }
            if part.min_of(sp) < i || part.min_of(sq) < i {
                return false;
            }
            let child = frame(sp, sq, w);
            stack.push(child);
            continue;
        }
        if f.q_pos < f.q_set.len() {
            let xp = f.p_set[f.p_pos - 1];
            let xq = f.q_set[f.q_pos];
            f.q_pos += 1;
            if w.contains(xp, xq) {
                continue;
            }
            if !view.consistent(xp, xq) {
                return false;
            }
            w.insert(xp, xq);
            f.succ = shared_successors(s, xp, xq);
            f.succ_pos = 0;
            continue;
        }
        if f.p_pos < f.p_set.len() {
            f.p_pos += 1;
            f.q_set = linked_cells(f.xj, w, part);
            f.q_pos = 0;
            continue;
        }
        stack.pop();
    }
    true
}

fn check_sizes(s: &Automaton, ctx: &ControlContext, cover: &Cover) -> Result<()> {
    if ctx.num_states() != s.num_states() {
        return Err(Error::InvalidConfig(format!(
            "context has {} states, supervisor has {}",
            ctx.num_states(),
            s.num_states()
        )));
    }
    if cover.num_states() != s.num_states() {
        return Err(Error::InvalidCover(format!(
            "cover has {} states, supervisor has {}",
            cover.num_states(),
            s.num_states()
        )));
    }
    Ok(())
}

/// `(x, y) ∈ R_k`.
pub fn control_consistent(ctx: &ControlContext, k: usize, x: StateId, y: StateId) -> Result<bool> {
    Ok(ctx.agent(k)?.consistent(x, y))
}

/// Checks whether the cells of `xi` and `xj` (with everything their merge
/// entails) can be merged, given the loop index `i`. Returns the flag and
/// the extended wait list.
#[allow(clippy::too_many_arguments)]
pub fn check_merge(
    xi: StateId,
    xj: StateId,
    mut w: WaitList,
    i: StateId,
    s: &Automaton,
    ctx: &ControlContext,
    cover: &Cover,
    k: usize,
) -> Result<(bool, WaitList)> {
    check_sizes(s, ctx, cover)?;
    let view = ctx.agent(k)?;
    let part = Partition::from_cover(cover);
    let flag = check_merge_in(xi, xj, &mut w, i, s, &view, &part);
    Ok((flag, w))
}

/// Computes a control congruence for agent `k` by merging cells of `init`.
///
/// `init` must be a control congruence for `(s, ctx)`. The result is a
/// control congruence in which no two cells can be merged.
pub fn localize(s: &Automaton, ctx: &ControlContext, k: usize, init: &Cover) -> Result<Cover> {
    check_sizes(s, ctx, init)?;
    let view = ctx.agent(k)?;
    let mut part = Partition::from_cover(init);
    let n = s.num_states();
    for i in 0..n.saturating_sub(1) {
        if part.min_of(i) < i {
            continue;
        }
        for j in i + 1..n {
            if part.min_of(j) < j {
                continue;
            }
            let mut w = WaitList::new();
            if check_merge_in(i, j, &mut w, i, s, &view, &part) {
                for &(a, b) in w.pairs() {
                    part.union(a, b);
                }
            }
        }
    }
    Ok(part.to_cover())
}

/// Local supervisor of one agent: one state per cell.
#[derive(Debug, Clone)]
pub struct LocalSupervisor {
    pub automaton: Automaton,
    pub source_cover: Cover,
    pub agent: usize,
}

/// Builds the local supervisor whose states are the cells of `cover`:
/// a cell moves to another on `σ` iff some member does.
pub fn build_local_supervisor(s: &Automaton, cover: &Cover, k: usize) -> Result<LocalSupervisor> {
    if cover.num_states() != s.num_states() {
        return Err(Error::InvalidCover(format!(
            "cover has {} states, supervisor has {}",
            cover.num_states(),
            s.num_states()
        )));
    }
    let cover = cover.normalized();
    let mut b = Automaton::builder(s.events().clone());
    for c in 0..cover.num_cells() {
        b.add_state(format!("cell{c}"))?;
    }
    b.set_initial(cover.cell_of(s.initial()))?;
    for x in s.marked_states() {
        b.set_marked(cover.cell_of(x), true)?;
    }
    let mut target: HashMap<(usize, usize), usize> = HashMap::new();
    for x in 0..s.num_states() {
        let from = cover.cell_of(x);
        for &(e, t) in s.transitions(x) {
            let to = cover.cell_of(t);
            match target.insert((from, e), to) {
                None => b.add_transition(from, e, to)?,
                Some(prev) if prev == to => {}
                Some(_) => {
                    return Err(Error::InvalidCover(format!(
                        "cell {from} has successors in two cells on event `{}`",
                        s.events().name(e)
                    )))
                }
            }
        }
    }
    Ok(LocalSupervisor {
        automaton: b.build()?,
        source_cover: cover,
        agent: k,
    })
}

/// Why a cover is not a control congruence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Two cellmates are not control consistent.
    Inconsistent { x: StateId, y: StateId },
    /// Two cellmates move to different cells on the same event.
    Nondeterministic { x: StateId, y: StateId, event: usize },
}

/// First violation of the control-cover conditions, scanning cells by
/// minimum member and pairs in ascending order; `None` for a congruence.
pub fn congruence_violation(
    s: &Automaton,
    ctx: &ControlContext,
    k: usize,
    cover: &Cover,
) -> Result<Option<Violation>> {
    check_sizes(s, ctx, cover)?;
    let view = ctx.agent(k)?;
    Ok(cell_violations(s, &view, cover, &cover.cells()))
}

fn cell_violations(
    s: &Automaton,
    view: &AgentView<'_>,
    cover: &Cover,
    cells: &[Vec<StateId>],
) -> Option<Violation> {
    for cell in cells {
        for (a, &x) in cell.iter().enumerate() {
            for &y in &cell[a + 1..] {
                if !view.consistent(x, y) {
                    return Some(Violation::Inconsistent { x, y });
                }
            }
        }
        let mut succ: HashMap<usize, (StateId, usize)> = HashMap::new();
        for &x in cell {
            for &(e, t) in s.transitions(x) {
                let c = cover.cell_of(t);
                match succ.get(&e) {
                    None => {
                        succ.insert(e, (x, c));
                    }
                    Some(&(y, d)) if d != c => {
                        return Some(Violation::Nondeterministic { x: y, y: x, event: e })
                    }
                    Some(_) => {}
                }
            }
        }
    }
    None
}

pub fn is_control_congruence(
    s: &Automaton,
    ctx: &ControlContext,
    k: usize,
    cover: &Cover,
) -> Result<bool> {
    Ok(congruence_violation(s, ctx, k, cover)?.is_none())
}

/// A pair of distinct cells (indices into `cover.cells()`) whose union
/// still gives a control congruence, if any.
pub fn mergeable_cells(
    s: &Automaton,
    ctx: &ControlContext,
    k: usize,
    cover: &Cover,
) -> Result<Option<(usize, usize)>> {
    check_sizes(s, ctx, cover)?;
    let view = ctx.agent(k)?;
    let norm = cover.normalized();
    let cells = norm.cells();
    for a in 0..cells.len() {
        for b in a + 1..cells.len() {
            let merged = Cover::from_cell_ids(
                norm.cell_ids()
                    .iter()
                    .map(|&c| if c == b { a } else { c })
                    .collect(),
            );
            if cell_violations(s, &view, &merged, &merged.cells()).is_none() {
                return Ok(Some((a, b)));
            }
        }
    }
    Ok(None)
}

/// No union of two distinct cells yields a control congruence.
pub fn is_maximally_reduced(
    s: &Automaton,
    ctx: &ControlContext,
    k: usize,
    cover: &Cover,
) -> Result<bool> {
    Ok(mergeable_cells(s, ctx, k, cover)?.is_none())
}
