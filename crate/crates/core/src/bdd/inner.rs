use rustc_hash::{FxHashMap, FxHashSet};

use super::{BddConfig, CubeLiteral, Var};

pub(super) type NodeId = u32;

pub(super) const FALSE: NodeId = 0;
pub(super) const TRUE: NodeId = 1;

const TERMINAL_VAR: u32 = u32::MAX;
const FREE_VAR: u32 = u32::MAX - 1;

#[derive(Clone, Copy, Debug)]
pub(super) struct Node {
    pub var: u32,
    pub hi: NodeId,
    pub lo: NodeId,
}

#[derive(Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
enum Op {
    Empty = 0,
    Ite,
    Exists,
    Forall,
    AndExists,
    Restrict,
}

#[derive(Clone, Copy)]
struct CacheEntry {
    op: Op,
    a: NodeId,
    b: NodeId,
    c: NodeId,
    result: NodeId,
}

const EMPTY_ENTRY: CacheEntry = CacheEntry {
    op: Op::Empty,
    a: 0,
    b: 0,
    c: 0,
    result: 0,
};

pub(super) struct Inner {
    pub nodes: Vec<Node>,
    free: Vec<NodeId>,
    pub unique: Vec<FxHashMap<(NodeId, NodeId), NodeId>>,
    pub level_of: Vec<u32>,
    pub var_at: Vec<u32>,
    cache: Vec<CacheEntry>,
    cache_enabled: bool,
    pub gc_threshold: usize,
    pub auto_reorder: bool,
    pub last_reorder_size: usize,
}

impl Inner {
    pub fn new(config: &BddConfig) -> Self {
        let terminal = Node {
            var: TERMINAL_VAR,
            hi: FALSE,
            lo: FALSE,
        };
        Inner {
            nodes: vec![terminal, terminal],
            free: Vec::new(),
            unique: Vec::new(),
            level_of: Vec::new(),
            var_at: Vec::new(),
            cache: vec![EMPTY_ENTRY; 1 << config.cache_bits],
            cache_enabled: config.cache_enabled,
            gc_threshold: config.gc_threshold,
            auto_reorder: config.auto_reorder,
            last_reorder_size: 1024,
        }
    }

    pub fn var_count(&self) -> usize {
        self.level_of.len()
    }

    pub fn add_var(&mut self) -> u32 {
        let v = self.level_of.len() as u32;
        self.level_of.push(v);
        self.var_at.push(v);
        self.unique.push(FxHashMap::default());
        v
    }

    pub fn allocated(&self) -> usize {
        self.nodes.len() - 2 - self.free.len()
    }

    pub fn node(&self, id: NodeId) -> Node {
        self.nodes[id as usize]
    }

    pub fn var_of(&self, id: NodeId) -> u32 {
        self.nodes[id as usize].var
    }

    pub fn level(&self, id: NodeId) -> u32 {
        if id <= TRUE {
            u32::MAX
        } else {
            self.level_of[self.var_of(id) as usize]
        }
    }

    pub fn set_cache_enabled(&mut self, enabled: bool) {
        self.cache_enabled = enabled;
        self.clear_cache();
    }

    pub fn clear_cache(&mut self) {
        self.cache.fill(EMPTY_ENTRY);
    }

    fn slot(&self, op: Op, a: NodeId, b: NodeId, c: NodeId) -> usize {
        let mut h = u64::from(a).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        h ^= u64::from(b).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
        h ^= u64::from(c).wrapping_mul(0x1656_67B1_9E37_79F9);
        h ^= op as u64;
        h ^= h >> 31;
        (h as usize) & (self.cache.len() - 1)
    }

    fn lookup(&self, op: Op, a: NodeId, b: NodeId, c: NodeId) -> Option<NodeId> {
        if !self.cache_enabled {
            return None;
        }
        let e = &self.cache[self.slot(op, a, b, c)];
        (e.op == op && e.a == a && e.b == b && e.c == c).then_some(e.result)
    }

    fn store(&mut self, op: Op, a: NodeId, b: NodeId, c: NodeId, result: NodeId) {
        if self.cache_enabled {
            let s = self.slot(op, a, b, c);
            self.cache[s] = CacheEntry {
                op,
                a,
                b,
                c,
                result,
            };
        }
    }

    /// The unique node `(var ? hi : lo)`.
    pub fn mk(&mut self, var: u32, hi: NodeId, lo: NodeId) -> NodeId {
        if hi == lo {
            return hi;
        }
        if let Some(&id) = self.unique[var as usize].get(&(hi, lo)) {
            return id;
        }
        let node = Node { var, hi, lo };
        let id = match self.free.pop() {
            Some(id) => {
                self.nodes[id as usize] = node;
                id
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as NodeId
            }
        };
        self.unique[var as usize].insert((hi, lo), id);
        id
    }

    /// Cofactors of `f` with respect to the variable at `level`.
    fn split(&self, f: NodeId, level: u32) -> (NodeId, NodeId) {
        if self.level(f) == level {
            let n = self.node(f);
            (n.hi, n.lo)
        } else {
            (f, f)
        }
    }

    pub fn ite(&mut self, f: NodeId, g: NodeId, h: NodeId) -> NodeId {
        if f == TRUE {
            return g;
        }
        if f == FALSE {
            return h;
        }
        if g == h {
            return g;
        }
        if g == TRUE && h == FALSE {
            return f;
        }
        if let Some(r) = self.lookup(Op::Ite, f, g, h) {
            return r;
        }
        let top = self.level(f).min(self.level(g)).min(self.level(h));
        let v = self.var_at[top as usize];
        let (f1, f0) = self.split(f, top);
        let (g1, g0) = self.split(g, top);
        let (h1, h0) = self.split(h, top);
        let hi = self.ite(f1, g1, h1);
        let lo = self.ite(f0, g0, h0);
        let r = self.mk(v, hi, lo);
        self.store(Op::Ite, f, g, h, r);
        r
    }

    pub fn not(&mut self, f: NodeId) -> NodeId {
        self.ite(f, FALSE, TRUE)
    }

    pub fn and(&mut self, f: NodeId, g: NodeId) -> NodeId {
        let (f, g) = (f.min(g), f.max(g));
        self.ite(f, g, FALSE)
    }

    pub fn or(&mut self, f: NodeId, g: NodeId) -> NodeId {
        let (f, g) = (f.min(g), f.max(g));
        self.ite(f, TRUE, g)
    }

    /// Drops cube variables above `level`; they do not occur below.
    fn skip_cube(&self, mut cube: NodeId, level: u32) -> NodeId {
        while cube > TRUE && self.level(cube) < level {
            cube = self.node(cube).hi;
        }
        cube
    }

    fn quantify(&mut self, f: NodeId, cube: NodeId, universal: bool) -> NodeId {
        if f <= TRUE {
            return f;
        }
        let lf = self.level(f);
        let cube = self.skip_cube(cube, lf);
        if cube == TRUE {
            return f;
        }
        let op = if universal { Op::Forall } else { Op::Exists };
        if let Some(r) = self.lookup(op, f, cube, 0) {
            return r;
        }
        let n = self.node(f);
        let r = if self.level(cube) == lf {
            let rest = self.node(cube).hi;
            let hi = self.quantify(n.hi, rest, universal);
            if hi == if universal { FALSE } else { TRUE } {
                hi
            } else {
                let lo = self.quantify(n.lo, rest, universal);
                if universal {
                    self.and(hi, lo)
                } else {
                    self.or(hi, lo)
                }
            }
        } else {
            let hi = self.quantify(n.hi, cube, universal);
            let lo = self.quantify(n.lo, cube, universal);
            self.mk(n.var, hi, lo)
        };
        self.store(op, f, cube, 0, r);
        r
    }

    pub fn exists(&mut self, f: NodeId, cube: NodeId) -> NodeId {
        self.quantify(f, cube, false)
    }

    pub fn forall(&mut self, f: NodeId, cube: NodeId) -> NodeId {
        self.quantify(f, cube, true)
    }

    pub fn and_exists(&mut self, f: NodeId, g: NodeId, cube: NodeId) -> NodeId {
        if f == FALSE || g == FALSE {
            return FALSE;
        }
        if f == TRUE && g == TRUE {
            return TRUE;
        }
        if f == TRUE || f == g {
            return self.exists(g, cube);
        }
        if g == TRUE {
            return self.exists(f, cube);
        }
        let (f, g) = (f.min(g), f.max(g));
        let top = self.level(f).min(self.level(g));
        let cube = self.skip_cube(cube, top);
        if cube == TRUE {
            return self.and(f, g);
        }
        if let Some(r) = self.lookup(Op::AndExists, f, g, cube) {
            return r;
        }
        let v = self.var_at[top as usize];
        let (f1, f0) = self.split(f, top);
        let (g1, g0) = self.split(g, top);
        let r = if self.level(cube) == top {
            let rest = self.node(cube).hi;
            let hi = self.and_exists(f1, g1, rest);
            if hi == TRUE {
                TRUE
            } else {
                let lo = self.and_exists(f0, g0, rest);
                self.or(hi, lo)
            }
        } else {
            let hi = self.and_exists(f1, g1, cube);
            let lo = self.and_exists(f0, g0, cube);
            self.mk(v, hi, lo)
        };
        self.store(Op::AndExists, f, g, cube, r);
        r
    }

    pub fn vector_compose(&mut self, f: NodeId, subst: &[Option<NodeId>]) -> NodeId {
        let mut memo = FxHashMap::default();
        self.compose_rec(f, subst, &mut memo)
    }

    fn compose_rec(
        &mut self,
        f: NodeId,
        subst: &[Option<NodeId>],
        memo: &mut FxHashMap<NodeId, NodeId>,
    ) -> NodeId {
        if f <= TRUE {
            return f;
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let n = self.node(f);
        let hi = self.compose_rec(n.hi, subst, memo);
        let lo = self.compose_rec(n.lo, subst, memo);
        let g = match subst[n.var as usize] {
            Some(g) => g,
            None => self.mk(n.var, TRUE, FALSE),
        };
        let r = self.ite(g, hi, lo);
        memo.insert(f, r);
        r
    }

    pub fn cofactor(&mut self, f: NodeId, var: u32, value: bool) -> NodeId {
        let mut memo = FxHashMap::default();
        self.cofactor_rec(f, self.level_of[var as usize], value, &mut memo)
    }

    fn cofactor_rec(
        &mut self,
        f: NodeId,
        level: u32,
        value: bool,
        memo: &mut FxHashMap<NodeId, NodeId>,
    ) -> NodeId {
        let lf = self.level(f);
        if lf > level {
            return f;
        }
        let n = self.node(f);
        if lf == level {
            return if value { n.hi } else { n.lo };
        }
        if let Some(&r) = memo.get(&f) {
            return r;
        }
        let hi = self.cofactor_rec(n.hi, level, value, memo);
        let lo = self.cofactor_rec(n.lo, level, value, memo);
        let r = self.mk(n.var, hi, lo);
        memo.insert(f, r);
        r
    }

    pub fn restrict(&mut self, f: NodeId, c: NodeId) -> NodeId {
        if c == FALSE || c == TRUE || f <= TRUE {
            return f;
        }
        if f == c {
            return TRUE;
        }
        if let Some(r) = self.lookup(Op::Restrict, f, c, 0) {
            return r;
        }
        let (lf, lc) = (self.level(f), self.level(c));
        let r = if lc < lf {
            let n = self.node(c);
            let merged = self.or(n.hi, n.lo);
            self.restrict(f, merged)
        } else {
            let v = self.var_of(f);
            let (f1, f0) = self.split(f, lf);
            let (c1, c0) = self.split(c, lf);
            if c1 == FALSE {
                self.restrict(f0, c0)
            } else if c0 == FALSE {
                self.restrict(f1, c1)
            } else {
                let hi = self.restrict(f1, c1);
                let lo = self.restrict(f0, c0);
                self.mk(v, hi, lo)
            }
        };
        self.store(Op::Restrict, f, c, 0, r);
        r
    }

    pub fn eval(&self, mut f: NodeId, value: impl Fn(u32) -> bool) -> bool {
        while f > TRUE {
            let n = self.node(f);
            f = if value(n.var) { n.hi } else { n.lo };
        }
        f == TRUE
    }

    pub fn pick_cube(&self, mut f: NodeId) -> Option<Vec<CubeLiteral>> {
        if f == FALSE {
            return None;
        }
        let mut cube = Vec::new();
        while f > TRUE {
            let n = self.node(f);
            if n.lo != FALSE {
                cube.push((Var(n.var), false));
                f = n.lo;
            } else {
                cube.push((Var(n.var), true));
                f = n.hi;
            }
        }
        Some(cube)
    }

    fn visit(&self, roots: &[NodeId], mut each: impl FnMut(NodeId)) {
        let mut seen = FxHashSet::default();
        let mut stack: Vec<NodeId> = roots.iter().copied().filter(|&r| r > TRUE).collect();
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            each(id);
            let n = self.node(id);
            for child in [n.hi, n.lo] {
                if child > TRUE && !seen.contains(&child) {
                    stack.push(child);
                }
            }
        }
    }

    pub fn reachable_internal(&self, roots: &[NodeId]) -> usize {
        let mut count = 0;
        self.visit(roots, |_| count += 1);
        count
    }

    pub fn support(&self, roots: &[NodeId]) -> Vec<u32> {
        let mut vars = FxHashSet::default();
        self.visit(roots, |id| {
            vars.insert(self.var_of(id));
        });
        let mut out: Vec<u32> = vars.into_iter().collect();
        out.sort_unstable();
        out
    }

    pub fn sat_count(&self, f: NodeId, nvars: usize) -> f64 {
        fn rec(m: &Inner, f: NodeId, memo: &mut FxHashMap<NodeId, f64>) -> f64 {
            // fraction of assignments satisfying f
            if f <= TRUE {
                return f as f64;
            }
            if let Some(&r) = memo.get(&f) {
                return r;
            }
            let n = m.node(f);
            let r = 0.5 * rec(m, n.hi, memo) + 0.5 * rec(m, n.lo, memo);
            memo.insert(f, r);
            r
        }
        let mut memo = FxHashMap::default();
        rec(self, f, &mut memo) * 2f64.powi(nvars as i32)
    }

    pub fn to_dot(&self, f: NodeId, name: impl Fn(u32) -> String) -> String {
        let mut out = String::from(
            "digraph bdd {\n  n0 [shape=box,label=\"0\"];\n  n1 [shape=box,label=\"1\"];\n",
        );
        let mut ids = Vec::new();
        self.visit(&[f], |id| ids.push(id));
        ids.sort_unstable();
        for id in ids {
            let n = self.node(id);
            out.push_str(&format!("  n{id} [label=\"{}\"];\n", name(n.var)));
            out.push_str(&format!("  n{id} -> n{};\n", n.hi));
            out.push_str(&format!("  n{id} -> n{} [style=dashed];\n", n.lo));
        }
        out.push_str(&format!(
            "  root -> n{f};\n  root [shape=plaintext,label=\"\"];\n}}\n"
        ));
        out
    }

    /// Mark-and-sweep from the externally held roots.
    pub fn collect(&mut self, roots: &FxHashMap<NodeId, u32>) -> usize {
        let mut marked = vec![false; self.nodes.len()];
        marked[FALSE as usize] = true;
        marked[TRUE as usize] = true;
        let mut stack: Vec<NodeId> = roots.keys().copied().collect();
        while let Some(id) = stack.pop() {
            if marked[id as usize] {
                continue;
            }
            marked[id as usize] = true;
            let n = self.node(id);
            stack.push(n.hi);
            stack.push(n.lo);
        }
        let mut freed = 0;
        for (id, &keep) in marked.iter().enumerate() {
            let n = self.nodes[id];
            if keep || n.var == FREE_VAR {
                continue;
            }
            self.unique[n.var as usize].remove(&(n.hi, n.lo));
            self.nodes[id].var = FREE_VAR;
            self.free.push(id as NodeId);
            freed += 1;
        }
        if freed > 0 {
            self.clear_cache();
        }
        freed
    }

    /// Automatic collection and reordering, run before top-level operations.
    pub fn maintenance(&mut self, roots: &FxHashMap<NodeId, u32>) {
        if self.allocated() > self.gc_threshold {
            self.collect(roots);
            if self.allocated() * 4 > self.gc_threshold * 3 {
                self.gc_threshold *= 2;
            }
        }
        if self.auto_reorder && self.allocated() > 2 * self.last_reorder_size {
            self.sift(roots);
        }
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        for (id, n) in self.nodes.iter().enumerate().skip(2) {
            if n.var == FREE_VAR {
                continue;
            }
            if n.hi == n.lo {
                return Err(format!("node {id} is redundant"));
            }
            let l = self.level_of[n.var as usize];
            if self.level(n.hi) <= l || self.level(n.lo) <= l {
                return Err(format!("node {id} violates the variable order"));
            }
            if self.unique[n.var as usize].get(&(n.hi, n.lo)) != Some(&(id as NodeId)) {
                return Err(format!("node {id} missing from its unique table"));
            }
        }
        let total: usize = self.unique.iter().map(|t| t.len()).sum();
        if total != self.allocated() {
            return Err(format!(
                "unique tables hold {total} nodes, store holds {}",
                self.allocated()
            ));
        }
        Ok(())
    }
}
