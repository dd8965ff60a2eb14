//! Embedded conflict-driven clause-learning solver.
//!
//! Two-watched-literal propagation, VSIDS branching with phase saving,
//! first-UIP clause learning, Luby restarts, and activity-based learned
//! clause reduction. Clauses may be added incrementally between solves and
//! every solve accepts assumption literals, which is what the attack loops
//! lean on. Fully deterministic for a fixed seed.

use std::time::{Duration, Instant};

use super::Lit;

const NO_REASON: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Sat,
    Unsat,
    Timeout,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    clause: u32,
    blocker: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    True,
    False,
    Undef,
}

/// Clause arena: all literals in one flat vector.
#[derive(Debug, Default)]
struct ClauseDb {
    lits: Vec<i32>,
    start: Vec<u32>,
    len: Vec<u32>,
    learned: Vec<bool>,
    activity: Vec<f32>,
    dead: Vec<bool>,
}

impl ClauseDb {
    fn add(&mut self, lits: &[i32], learned: bool) -> u32 {
        let id = self.start.len() as u32;
        self.start.push(self.lits.len() as u32);
        self.len.push(lits.len() as u32);
        self.lits.extend_from_slice(lits);
        self.learned.push(learned);
        self.activity.push(0.0);
        self.dead.push(false);
        id
    }

    fn get(&self, id: u32) -> &[i32] {
        let s = self.start[id as usize] as usize;
        let l = self.len[id as usize] as usize;
        &self.lits[s..s + l]
    }

    fn get_mut(&mut self, id: u32) -> &mut [i32] {
        let s = self.start[id as usize] as usize;
        let l = self.len[id as usize] as usize;
        &mut self.lits[s..s + l]
    }

    fn count(&self) -> usize {
        self.start.len()
    }
}

#[derive(Debug, Default, Clone)]
pub struct SolverStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learned_deleted: u64,
}

pub struct Solver {
    num_vars: usize,
    db: ClauseDb,
    watches: Vec<Vec<Watcher>>,
    assign: Vec<Value>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<i32>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    heap: Vec<u32>,
    heap_pos: Vec<u32>,
    phase: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    cla_inc: f32,
    learned_cap: usize,
    pub stats: SolverStats,
}

impl Solver {
    pub fn new() -> Self {
        Solver {
            num_vars: 0,
            db: ClauseDb::default(),
            watches: Vec::new(),
            assign: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            heap: Vec::new(),
            heap_pos: Vec::new(),
            phase: Vec::new(),
            seen: Vec::new(),
            ok: true,
            cla_inc: 1.0,
            learned_cap: 20_000,
            stats: SolverStats::default(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Grow the variable table to hold `1..=n`.
    pub fn reserve_vars(&mut self, n: usize) {
        while self.num_vars < n {
            self.num_vars += 1;
            self.assign.push(Value::Undef);
            self.level.push(0);
            self.reason.push(NO_REASON);
            self.activity.push(0.0);
            self.phase.push(false);
            self.seen.push(false);
            self.watches.push(Vec::new());
            self.watches.push(Vec::new());
            let v = self.num_vars as u32 - 1;
            self.heap_pos.push(u32::MAX);
            self.heap_push(v);
        }
    }

    fn lit_index(lit: i32) -> usize {
        let v = (lit.unsigned_abs() - 1) as usize;
        v * 2 + usize::from(lit < 0)
    }

    fn value_lit(&self, lit: i32) -> Value {
        let v = (lit.unsigned_abs() - 1) as usize;
        match self.assign[v] {
            Value::Undef => Value::Undef,
            Value::True => {
                if lit > 0 {
                    Value::True
                } else {
                    Value::False
                }
            }
            Value::False => {
                if lit > 0 {
                    Value::False
                } else {
                    Value::True
                }
            }
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    /// Add a clause (DIMACS-style literals). Returns false if the
    /// clause base became unsatisfiable at level 0.
    pub fn add_clause(&mut self, clause: &[Lit]) -> bool {
        if !self.ok {
            return false;
        }
        self.backtrack_to(0);
        let max_var = clause.iter().map(|l| l.var()).max().unwrap_or(0);
        self.reserve_vars(max_var as usize);

        // Normalize: dedup, drop tautologies and level-0-false literals.
        let mut lits: Vec<i32> = Vec::with_capacity(clause.len());
        for l in clause {
            let l = l.0;
            if lits.contains(&-l) {
                return true; // tautology
            }
            if lits.contains(&l) {
                continue;
            }
            match self.value_lit(l) {
                Value::True => return true, // already satisfied at level 0
                Value::False => continue,
                Value::Undef => lits.push(l),
            }
        }
        match lits.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(lits[0], NO_REASON);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                let id = self.db.add(&lits, false);
                self.attach(id);
                true
            }
        }
    }

    fn attach(&mut self, id: u32) {
        let c = self.db.get(id);
        let (l0, l1) = (c[0], c[1]);
        self.watches[Self::lit_index(-l0)].push(Watcher {
            clause: id,
            blocker: l1,
        });
        self.watches[Self::lit_index(-l1)].push(Watcher {
            clause: id,
            blocker: l0,
        });
    }

    fn enqueue(&mut self, lit: i32, reason: u32) {
        let v = (lit.unsigned_abs() - 1) as usize;
        debug_assert_eq!(self.assign[v], Value::Undef);
        self.assign[v] = if lit > 0 { Value::True } else { Value::False };
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let lit = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let widx = Self::lit_index(lit);
            let mut ws = std::mem::take(&mut self.watches[widx]);
            let mut i = 0;
            while i < ws.len() {
                let w = ws[i];
                if self.value_lit(w.blocker) == Value::True {
                    i += 1;
                    continue;
                }
                if self.db.dead[w.clause as usize] {
                    ws.swap_remove(i);
                    continue;
                }
                // Make sure the false literal is at position 1.
                let cid = w.clause;
                {
                    let c = self.db.get_mut(cid);
                    if c[0] == -lit {
                        c.swap(0, 1);
                    }
                }
                let first = self.db.get(cid)[0];
                if self.value_lit(first) == Value::True {
                    ws[i].blocker = first;
                    i += 1;
                    continue;
                }
                // Look for a new watch.
                let mut new_watch = None;
                {
                    let c = self.db.get(cid);
                    for (k, &l) in c.iter().enumerate().skip(2) {
                        if self.value_lit(l) != Value::False {
                            new_watch = Some(k);
                            break;
                        }
                    }
                }
                if let Some(k) = new_watch {
                    let c = self.db.get_mut(cid);
                    c.swap(1, k);
                    let nl = c[1];
                    self.watches[Self::lit_index(-nl)].push(Watcher {
                        clause: cid,
                        blocker: first,
                    });
                    ws.swap_remove(i);
                    continue;
                }
                // Clause is unit or conflicting.
                if self.value_lit(first) == Value::False {
                    // Conflict: restore remaining watchers.
                    self.watches[widx].extend_from_slice(&ws[i..]);
                    ws.truncate(i);
                    self.watches[widx].extend_from_slice(&ws);
                    self.qhead = self.trail.len();
                    return Some(cid);
                }
                self.enqueue(first, cid);
                i += 1;
            }
            let existing = std::mem::take(&mut self.watches[widx]);
            ws.extend_from_slice(&existing);
            self.watches[widx] = ws;
        }
        None
    }

    fn analyze(&mut self, confl: u32) -> (Vec<i32>, usize) {
        let mut learnt: Vec<i32> = vec![0];
        let mut counter = 0usize;
        let mut lit0: i32 = 0;
        let mut index = self.trail.len();
        let mut confl = confl;
        let cur_level = self.decision_level() as u32;

        loop {
            self.bump_clause(confl);
            let start = if lit0 == 0 { 0 } else { 1 };
            let clause: Vec<i32> = self.db.get(confl).to_vec();
            for &q in clause.iter().skip(start) {
                let v = (q.unsigned_abs() - 1) as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= cur_level {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            // Select next literal to expand.
            loop {
                index -= 1;
                let l = self.trail[index];
                let v = (l.unsigned_abs() - 1) as usize;
                if self.seen[v] {
                    lit0 = l;
                    break;
                }
            }
            let v = (lit0.unsigned_abs() - 1) as usize;
            self.seen[v] = false;
            counter -= 1;
            if counter == 0 {
                learnt[0] = -lit0;
                break;
            }
            confl = self.reason[v];
            debug_assert_ne!(confl, NO_REASON);
            // Re-point clause view: skip the asserted literal (position 0
            // holds it for reason clauses).
            let c = self.db.get_mut(confl);
            if c[0] != lit0 {
                if let Some(p) = c.iter().position(|&x| x == lit0) {
                    c.swap(0, p);
                }
            }
        }

        // Backjump level: second-highest level in the learnt clause.
        let mut bt = 0usize;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                let vi = (learnt[i].unsigned_abs() - 1) as usize;
                let vm = (learnt[max_i].unsigned_abs() - 1) as usize;
                if self.level[vi] > self.level[vm] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[(learnt[1].unsigned_abs() - 1) as usize] as usize;
        }
        for &l in &learnt {
            self.seen[(l.unsigned_abs() - 1) as usize] = false;
        }
        (learnt, bt)
    }

    fn backtrack_to(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = (l.unsigned_abs() - 1) as usize;
            self.phase[v] = self.assign[v] == Value::True;
            self.assign[v] = Value::Undef;
            self.reason[v] = NO_REASON;
            if self.heap_pos[v] == u32::MAX {
                self.heap_push(v as u32);
            }
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level);
        self.qhead = self.trail.len();
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        if self.heap_pos[v] != u32::MAX {
            self.heap_up(self.heap_pos[v] as usize);
        }
    }

    fn bump_clause(&mut self, c: u32) {
        if !self.db.learned[c as usize] {
            return;
        }
        self.db.activity[c as usize] += self.cla_inc;
        if self.db.activity[c as usize] > 1e20 {
            for a in self.db.activity.iter_mut() {
                *a *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    // Indexed max-heap on activity, deterministic tie-break on index.
    fn heap_less(&self, a: u32, b: u32) -> bool {
        let (aa, ab) = (self.activity[a as usize], self.activity[b as usize]);
        aa > ab || (aa == ab && a < b)
    }

    fn heap_push(&mut self, v: u32) {
        self.heap_pos[v as usize] = self.heap.len() as u32;
        self.heap.push(v);
        self.heap_up(self.heap.len() - 1);
    }

    fn heap_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if self.heap_less(self.heap[i], self.heap[parent]) {
                self.heap.swap(i, parent);
                self.heap_pos[self.heap[i] as usize] = i as u32;
                self.heap_pos[self.heap[parent] as usize] = parent as u32;
                i = parent;
            } else {
                break;
            }
        }
    }

    fn heap_down(&mut self, mut i: usize) {
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut best = i;
            if l < self.heap.len() && self.heap_less(self.heap[l], self.heap[best]) {
                best = l;
            }
            if r < self.heap.len() && self.heap_less(self.heap[r], self.heap[best]) {
                best = r;
            }
            if best == i {
                break;
            }
            self.heap.swap(i, best);
            self.heap_pos[self.heap[i] as usize] = i as u32;
            self.heap_pos[self.heap[best] as usize] = best as u32;
            i = best;
        }
    }

    fn heap_pop(&mut self) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap[0];
        self.heap_pos[top as usize] = u32::MAX;
        let last = self.heap.pop().unwrap();
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.heap_pos[last as usize] = 0;
            self.heap_down(0);
        }
        Some(top)
    }

    fn pick_branch(&mut self) -> Option<i32> {
        while let Some(v) = self.heap_pop() {
            if self.assign[v as usize] == Value::Undef {
                let lit = if self.phase[v as usize] {
                    v as i32 + 1
                } else {
                    -(v as i32 + 1)
                };
                return Some(lit);
            }
        }
        None
    }

    /// Drop the least active half of the learned clauses, compact the
    /// clause arena, and rebuild the watch lists. Called at level 0 only
    /// (so no clause is locked as a reason once level-0 reasons are
    /// cleared; `analyze` never dereferences level-0 reasons).
    fn reduce_learned(&mut self) {
        debug_assert_eq!(self.decision_level(), 0);
        let mut learned: Vec<u32> = (0..self.db.count() as u32)
            .filter(|&c| self.db.learned[c as usize] && !self.db.dead[c as usize])
            .collect();
        if learned.len() < self.learned_cap {
            return;
        }
        learned.sort_by(|&a, &b| {
            self.db.activity[a as usize]
                .partial_cmp(&self.db.activity[b as usize])
                .unwrap()
                .then(a.cmp(&b))
        });
        let drop_n = learned.len() / 2;
        let mut dropped = 0usize;
        for &c in learned.iter() {
            if dropped >= drop_n {
                break;
            }
            if self.db.len[c as usize] == 2 {
                continue;
            }
            self.db.dead[c as usize] = true;
            dropped += 1;
        }
        self.stats.learned_deleted += dropped as u64;
        self.learned_cap = self.learned_cap + self.learned_cap / 2;

        for r in self.reason.iter_mut() {
            *r = NO_REASON;
        }
        let mut new_db = ClauseDb::default();
        for c in 0..self.db.count() as u32 {
            if self.db.dead[c as usize] {
                continue;
            }
            let id = new_db.add(self.db.get(c), self.db.learned[c as usize]);
            new_db.activity[id as usize] = self.db.activity[c as usize];
        }
        self.db = new_db;
        for w in self.watches.iter_mut() {
            w.clear();
        }
        for c in 0..self.db.count() as u32 {
            self.attach(c);
        }
    }

    /// Solve under the given assumptions within an optional wall-clock
    /// budget. The clause base persists across calls.
    pub fn solve(&mut self, assumptions: &[Lit], deadline: Option<Instant>) -> SolveStatus {
        if !self.ok {
            return SolveStatus::Unsat;
        }
        for a in assumptions {
            self.reserve_vars(a.var() as usize);
        }
        self.backtrack_to(0);
        if self.propagate().is_some() {
            self.ok = false;
            return SolveStatus::Unsat;
        }

        let mut restart_count = 0u64;
        let mut conflicts_until_restart = luby(restart_count) * 128;
        let mut since_timeout_check = 0u32;

        loop {
            if let Some(cid) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_until_restart = conflicts_until_restart.saturating_sub(1);
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SolveStatus::Unsat;
                }
                if self.decision_level() <= assumptions.len() {
                    // Conflict inside the assumption prefix: the assumptions
                    // themselves are inconsistent with the clause base.
                    let (learnt, bt) = self.analyze(cid);
                    let bt = bt.min(assumptions.len().saturating_sub(1));
                    self.backtrack_to(bt);
                    self.learn(learnt);
                    // Re-deciding the failed assumption will now see it
                    // false and report Unsat below.
                } else {
                    let (learnt, bt) = self.analyze(cid);
                    self.backtrack_to(bt.max(0));
                    self.learn(learnt);
                }
                self.var_inc /= 0.95;
                self.cla_inc /= 0.999;
                since_timeout_check += 1;
                if since_timeout_check >= 256 {
                    since_timeout_check = 0;
                    if let Some(d) = deadline {
                        if Instant::now() >= d {
                            self.backtrack_to(0);
                            return SolveStatus::Timeout;
                        }
                    }
                }
            } else {
                if conflicts_until_restart == 0 {
                    restart_count += 1;
                    self.stats.restarts += 1;
                    conflicts_until_restart = luby(restart_count) * 128;
                    self.backtrack_to(0);
                    self.reduce_learned();
                    continue;
                }
                let dl = self.decision_level();
                if dl < assumptions.len() {
                    let a = assumptions[dl].0;
                    match self.value_lit(a) {
                        Value::True => {
                            self.trail_lim.push(self.trail.len());
                        }
                        Value::False => {
                            self.backtrack_to(0);
                            return SolveStatus::Unsat;
                        }
                        Value::Undef => {
                            self.trail_lim.push(self.trail.len());
                            self.stats.decisions += 1;
                            self.enqueue(a, NO_REASON);
                        }
                    }
                } else if let Some(lit) = self.pick_branch() {
                    self.trail_lim.push(self.trail.len());
                    self.stats.decisions += 1;
                    self.enqueue(lit, NO_REASON);
                } else {
                    return SolveStatus::Sat;
                }
            }
        }
    }

    fn learn(&mut self, learnt: Vec<i32>) {
        match learnt.len() {
            0 => {
                self.ok = false;
            }
            1 => {
                debug_assert_eq!(self.decision_level(), 0);
                if self.value_lit(learnt[0]) == Value::Undef {
                    self.enqueue(learnt[0], NO_REASON);
                } else if self.value_lit(learnt[0]) == Value::False {
                    self.ok = false;
                }
            }
            _ => {
                let id = self.db.add(&learnt, true);
                self.attach(id);
                self.enqueue(learnt[0], id);
            }
        }
    }

    /// Model value of a variable after a Sat result (false if untouched).
    pub fn model_value(&self, var: u32) -> bool {
        let v = (var - 1) as usize;
        if v >= self.assign.len() {
            return false;
        }
        self.assign[v] == Value::True
    }

    /// Snapshot of the full model, indexed by `var - 1`.
    pub fn model(&self) -> Vec<bool> {
        (1..=self.num_vars as u32).map(|v| self.model_value(v)).collect()
    }
}

impl Default for Solver {
    fn default() -> Self {
        Self::new()
    }
}

/// Luby restart sequence: 1,1,2,1,1,2,4,...
fn luby(i: u64) -> u64 {
    let mut k = 1u64;
    while (1u64 << k) - 1 < i + 1 {
        k += 1;
    }
    let mut i = i;
    let mut kk = k;
    loop {
        if (1u64 << kk) - 1 == i + 1 {
            return 1u64 << (kk - 1);
        }
        kk -= 1;
        if i + 1 > (1u64 << kk) {
            i -= 1u64 << kk;
        }
    }
}

/// Budget helper shared by the attack loops.
pub fn deadline_from(timeout: Option<Duration>) -> Option<Instant> {
    timeout.map(|t| Instant::now() + t)
}
