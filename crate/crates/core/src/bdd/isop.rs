use rustc_hash::FxHashMap;

use super::inner::{Inner, NodeId, FALSE, TRUE};
use super::{CubeLiteral, Var};

type Cover = (NodeId, Vec<Vec<CubeLiteral>>);

impl Inner {
    /// Minato–Morreale irredundant cover of some function between `lower`
    /// and `upper`. Returns the cover as a BDD and as a cube list.
    pub fn isop(&mut self, lower: NodeId, upper: NodeId) -> Cover {
        let mut memo = FxHashMap::default();
        self.isop_rec(lower, upper, &mut memo)
    }

    fn isop_rec(
        &mut self,
        lower: NodeId,
        upper: NodeId,
        memo: &mut FxHashMap<(NodeId, NodeId), Cover>,
    ) -> Cover {
        if lower == FALSE {
            return (FALSE, Vec::new());
        }
        if upper == TRUE {
            return (TRUE, vec![Vec::new()]);
        }
        if let Some(r) = memo.get(&(lower, upper)) {
            return r.clone();
        }
        let top = self.level(lower).min(self.level(upper));
        let v = self.var_at[top as usize];
        let (l1, l0) = self.cofactors_at(lower, top);
        let (u1, u0) = self.cofactors_at(upper, top);

        let not_u1 = self.not(u1);
        let l0_only = self.and(l0, not_u1);
        let (c0, cubes0) = self.isop_rec(l0_only, u0, memo);
        let not_u0 = self.not(u0);
        let l1_only = self.and(l1, not_u0);
        let (c1, cubes1) = self.isop_rec(l1_only, u1, memo);

        let not_c0 = self.not(c0);
        let rest0 = self.and(l0, not_c0);
        let not_c1 = self.not(c1);
        let rest1 = self.and(l1, not_c1);
        let rest = self.or(rest0, rest1);
        let both = self.and(u0, u1);
        let (cs, cubes_s) = self.isop_rec(rest, both, memo);

        let branch = self.mk(v, c1, c0);
        let cover = self.or(branch, cs);
        let mut cubes = Vec::with_capacity(cubes0.len() + cubes1.len() + cubes_s.len());
        for (cs, value) in [(cubes0, false), (cubes1, true)] {
            for mut cube in cs {
                cube.insert(0, (Var(v), value));
                cubes.push(cube);
            }
        }
        cubes.extend(cubes_s);
        let result = (cover, cubes);
        memo.insert((lower, upper), result.clone());
        result
    }

    fn cofactors_at(&self, f: NodeId, level: u32) -> (NodeId, NodeId) {
        if self.level(f) == level {
            let n = self.node(f);
            (n.hi, n.lo)
        } else {
            (f, f)
        }
    }
}
