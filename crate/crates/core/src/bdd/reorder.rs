use rustc_hash::FxHashMap;

use super::inner::{Inner, NodeId};
use super::Var;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReorderReport {
    /// Live nodes (internal plus one terminal) before and after.
    pub nodes_before: usize,
    pub nodes_after: usize,
    pub swaps: usize,
    pub order: Vec<Var>,
}

impl Inner {
    fn live_size(&self) -> usize {
        self.allocated() + 1
    }

    /// Exchanges the variables at `level` and `level + 1` in place. Node ids
    /// keep denoting the same functions; nodes that become unreachable are
    /// left for the next collection.
    fn swap_adjacent(&mut self, level: usize) {
        let x = self.var_at[level];
        let y = self.var_at[level + 1];
        self.var_at[level] = y;
        self.var_at[level + 1] = x;
        self.level_of[x as usize] = level as u32 + 1;
        self.level_of[y as usize] = level as u32;

        let old: Vec<((NodeId, NodeId), NodeId)> = self.unique[x as usize].drain().collect();
        let mut dependent = Vec::new();
        for (key, id) in old {
            let n = self.node(id);
            let tests_y = |c: NodeId| c > super::inner::TRUE && self.var_of(c) == y;
            if tests_y(n.hi) || tests_y(n.lo) {
                dependent.push(id);
            } else {
                self.unique[x as usize].insert(key, id);
            }
        }
        for id in dependent {
            let n = self.node(id);
            let (f11, f10) = self.split_on(n.hi, y);
            let (f01, f00) = self.split_on(n.lo, y);
            let hi = self.mk(x, f11, f01);
            let lo = self.mk(x, f10, f00);
            self.nodes[id as usize] = super::inner::Node { var: y, hi, lo };
            let clash = self.unique[y as usize].insert((hi, lo), id);
            debug_assert!(clash.is_none(), "swap produced a duplicate node");
        }
    }

    fn split_on(&self, f: NodeId, var: u32) -> (NodeId, NodeId) {
        if f > super::inner::TRUE && self.var_of(f) == var {
            let n = self.node(f);
            (n.hi, n.lo)
        } else {
            (f, f)
        }
    }

    fn swap_and_measure(&mut self, level: usize, roots: &FxHashMap<NodeId, u32>) -> usize {
        self.swap_adjacent(level);
        self.collect(roots);
        self.live_size()
    }

    /// Rudell sifting: each variable, largest level first, is moved through
    /// every position and left where the live size was smallest.
    pub fn sift(&mut self, roots: &FxHashMap<NodeId, u32>) -> ReorderReport {
        self.collect(roots);
        self.clear_cache();
        let nodes_before = self.live_size();
        let n = self.var_count();
        let mut swaps = 0;
        let mut vars: Vec<u32> = (0..n as u32).collect();
        vars.sort_by_key(|&v| std::cmp::Reverse(self.unique[v as usize].len()));
        for v in vars {
            let mut best_size = self.live_size();
            let mut best_level = self.level_of[v as usize] as usize;
            while (self.level_of[v as usize] as usize) + 1 < n {
                let l = self.level_of[v as usize] as usize;
                let size = self.swap_and_measure(l, roots);
                swaps += 1;
                if size < best_size {
                    best_size = size;
                    best_level = l + 1;
                }
            }
            while self.level_of[v as usize] > 0 {
                let l = self.level_of[v as usize] as usize;
                let size = self.swap_and_measure(l - 1, roots);
                swaps += 1;
                if size < best_size {
                    best_size = size;
                    best_level = l - 1;
                }
            }
            while (self.level_of[v as usize] as usize) < best_level {
                let l = self.level_of[v as usize] as usize;
                self.swap_and_measure(l, roots);
                swaps += 1;
            }
        }
        self.clear_cache();
        let nodes_after = self.live_size();
        self.last_reorder_size = self.allocated().max(1024);
        ReorderReport {
            nodes_before,
            nodes_after,
            swaps,
            order: self.var_at.iter().map(|&v| Var(v)).collect(),
        }
    }

    /// Bubbles variables into `order` (top to bottom). Variables left out
    /// keep their relative order below the listed ones.
    pub fn reorder_to(&mut self, order: &[u32], roots: &FxHashMap<NodeId, u32>) {
        self.collect(roots);
        self.clear_cache();
        for (target, &v) in order.iter().enumerate() {
            while self.level_of[v as usize] as usize > target {
                let l = self.level_of[v as usize] as usize;
                self.swap_adjacent(l - 1);
                self.collect(roots);
            }
        }
        self.clear_cache();
    }
}
