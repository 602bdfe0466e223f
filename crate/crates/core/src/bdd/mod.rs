//! Reduced ordered binary decision diagrams.
//!
//! A [`BddManager`] owns the node store, the per-variable unique tables and a
//! lossy computed cache. Functions are handed out as [`Bdd`] handles; each
//! live handle keeps its node alive across garbage collection. Complement
//! edges are not used, so two handles denote the same function exactly when
//! they point at the same node.
//!
//! A manager is single-threaded. Handles from different managers must not be
//! mixed; doing so panics.

mod inner;
mod isop;
mod reorder;

use std::cell::RefCell;
use std::fmt;
use std::ops::{BitAnd, BitOr, BitXor, Not};
use std::rc::Rc;

use rustc_hash::FxHashMap;
use thiserror::Error;

use inner::{Inner, NodeId, FALSE, TRUE};
pub use reorder::ReorderReport;

/// A decision variable. Ids are assigned in creation order and never change;
/// the variable's position in the order (its level) may change on reorder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BddError {
    #[error("variable {0} is not registered with this manager")]
    UnknownVariable(u32),
}

#[derive(Clone, Debug)]
pub struct BddConfig {
    /// log2 of the number of computed-cache slots.
    pub cache_bits: u32,
    /// Live-node count that triggers an automatic collection.
    pub gc_threshold: usize,
    /// Sift automatically when the store doubles since the last reorder.
    pub auto_reorder: bool,
    pub cache_enabled: bool,
}

impl Default for BddConfig {
    fn default() -> Self {
        BddConfig {
            cache_bits: 18,
            gc_threshold: 1 << 20,
            auto_reorder: false,
            cache_enabled: true,
        }
    }
}

struct Shared {
    inner: RefCell<Inner>,
    /// External handle counts, kept apart from `inner` so handles can be
    /// dropped while an operation holds the store.
    roots: RefCell<FxHashMap<NodeId, u32>>,
}

/// Owner of all BDD nodes. Cloning yields another reference to the same
/// manager.
#[derive(Clone)]
pub struct BddManager(Rc<Shared>);

/// A Boolean function owned by a [`BddManager`].
pub struct Bdd {
    id: NodeId,
    mgr: Rc<Shared>,
}

/// A set of variables, stored as the positive cube over them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarSet(Bdd);

impl VarSet {
    pub fn as_bdd(&self) -> &Bdd {
        &self.0
    }
}

/// One step of a path to the true terminal: a variable and its value.
pub type CubeLiteral = (Var, bool);

/// A view of a node's top decision.
pub enum NodeView {
    Const(bool),
    Decision { var: Var, hi: Bdd, lo: Bdd },
}

impl Shared {
    fn retain(&self, id: NodeId) {
        if id > TRUE {
            *self.roots.borrow_mut().entry(id).or_insert(0) += 1;
        }
    }

    fn release(&self, id: NodeId) {
        if id > TRUE {
            let mut roots = self.roots.borrow_mut();
            if let Some(c) = roots.get_mut(&id) {
                *c -= 1;
                if *c == 0 {
                    roots.remove(&id);
                }
            }
        }
    }
}

impl Clone for Bdd {
    fn clone(&self) -> Self {
        self.mgr.retain(self.id);
        Bdd {
            id: self.id,
            mgr: Rc::clone(&self.mgr),
        }
    }
}

impl Drop for Bdd {
    fn drop(&mut self) {
        self.mgr.release(self.id);
    }
}

impl PartialEq for Bdd {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && Rc::ptr_eq(&self.mgr, &other.mgr)
    }
}

impl Eq for Bdd {}

impl std::hash::Hash for Bdd {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

impl fmt::Debug for Bdd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.id {
            FALSE => write!(f, "Bdd(false)"),
            TRUE => write!(f, "Bdd(true)"),
            id => write!(f, "Bdd(#{id})"),
        }
    }
}

impl Default for BddManager {
    fn default() -> Self {
        Self::new()
    }
}

impl BddManager {
    pub fn new() -> Self {
        Self::with_config(BddConfig::default())
    }

    pub fn with_config(config: BddConfig) -> Self {
        BddManager(Rc::new(Shared {
            inner: RefCell::new(Inner::new(&config)),
            roots: RefCell::new(FxHashMap::default()),
        }))
    }

    fn wrap(&self, id: NodeId) -> Bdd {
        self.0.retain(id);
        Bdd {
            id,
            mgr: Rc::clone(&self.0),
        }
    }

    fn own(&self, f: &Bdd) -> NodeId {
        assert!(
            Rc::ptr_eq(&self.0, &f.mgr),
            "BDD handle used with a manager that does not own it"
        );
        f.id
    }

    /// Borrows the store for one top-level operation, collecting garbage or
    /// reordering first when the configured triggers fire.
    fn with_inner<R>(&self, op: impl FnOnce(&mut Inner) -> R) -> R {
        let mut inner = self.0.inner.borrow_mut();
        inner.maintenance(&self.0.roots.borrow());
        op(&mut inner)
    }

    pub fn same_manager(&self, other: &BddManager) -> bool {
        Rc::ptr_eq(&self.0, &other.0)
    }

    pub fn owns(&self, f: &Bdd) -> bool {
        Rc::ptr_eq(&self.0, &f.mgr)
    }

    /// Registers a fresh variable at the bottom of the order.
    pub fn new_var(&self) -> Var {
        Var(self.0.inner.borrow_mut().add_var())
    }

    pub fn new_vars(&self, n: usize) -> Vec<Var> {
        (0..n).map(|_| self.new_var()).collect()
    }

    pub fn var_count(&self) -> usize {
        self.0.inner.borrow().var_count()
    }

    /// Variables from the top of the order to the bottom.
    pub fn order(&self) -> Vec<Var> {
        self.0
            .inner
            .borrow()
            .var_at
            .iter()
            .map(|&v| Var(v))
            .collect()
    }

    pub fn level(&self, v: Var) -> usize {
        self.0.inner.borrow().level_of[v.index()] as usize
    }

    pub fn constant(&self, value: bool) -> Bdd {
        self.wrap(if value { TRUE } else { FALSE })
    }

    pub fn tt(&self) -> Bdd {
        self.constant(true)
    }

    pub fn ff(&self) -> Bdd {
        self.constant(false)
    }

    /// The function `v`.
    pub fn mk_var(&self, v: Var) -> Result<Bdd, BddError> {
        self.literal(v, true)
    }

    /// `v` if `positive`, else `!v`.
    pub fn literal(&self, v: Var, positive: bool) -> Result<Bdd, BddError> {
        let id = self.with_inner(|m| {
            if v.index() >= m.var_count() {
                return Err(BddError::UnknownVariable(v.0));
            }
            Ok(if positive {
                m.mk(v.0, TRUE, FALSE)
            } else {
                m.mk(v.0, FALSE, TRUE)
            })
        })?;
        Ok(self.wrap(id))
    }

    /// Shorthand for [`mk_var`](Self::mk_var) on a variable known to exist.
    pub fn var(&self, v: Var) -> Bdd {
        self.mk_var(v).expect("variable belongs to this manager")
    }

    pub fn ite(&self, f: &Bdd, g: &Bdd, h: &Bdd) -> Bdd {
        let (f, g, h) = (self.own(f), self.own(g), self.own(h));
        let id = self.with_inner(|m| m.ite(f, g, h));
        self.wrap(id)
    }

    pub fn not(&self, f: &Bdd) -> Bdd {
        let f = self.own(f);
        let id = self.with_inner(|m| m.not(f));
        self.wrap(id)
    }

    pub fn and(&self, f: &Bdd, g: &Bdd) -> Bdd {
        let (f, g) = (self.own(f), self.own(g));
        let id = self.with_inner(|m| m.and(f, g));
        self.wrap(id)
    }

    pub fn or(&self, f: &Bdd, g: &Bdd) -> Bdd {
        let (f, g) = (self.own(f), self.own(g));
        let id = self.with_inner(|m| m.or(f, g));
        self.wrap(id)
    }

    pub fn xor(&self, f: &Bdd, g: &Bdd) -> Bdd {
        let (f, g) = (self.own(f), self.own(g));
        let id = self.with_inner(|m| {
            let ng = m.not(g);
            m.ite(f, ng, g)
        });
        self.wrap(id)
    }

    pub fn iff(&self, f: &Bdd, g: &Bdd) -> Bdd {
        let (f, g) = (self.own(f), self.own(g));
        let id = self.with_inner(|m| {
            let ng = m.not(g);
            m.ite(f, g, ng)
        });
        self.wrap(id)
    }

    pub fn implies(&self, f: &Bdd, g: &Bdd) -> Bdd {
        let (f, g) = (self.own(f), self.own(g));
        let id = self.with_inner(|m| m.ite(f, g, TRUE));
        self.wrap(id)
    }

    /// Whether `f ⇒ g` is valid.
    pub fn leq(&self, f: &Bdd, g: &Bdd) -> bool {
        self.implies(f, g).is_true()
    }

    pub fn and_all<'a>(&self, fs: impl IntoIterator<Item = &'a Bdd>) -> Bdd {
        fs.into_iter().fold(self.tt(), |acc, f| self.and(&acc, f))
    }

    pub fn or_all<'a>(&self, fs: impl IntoIterator<Item = &'a Bdd>) -> Bdd {
        fs.into_iter().fold(self.ff(), |acc, f| self.or(&acc, f))
    }

    pub fn var_set(&self, vars: &[Var]) -> VarSet {
        let lits: Vec<Bdd> = vars.iter().map(|&v| self.var(v)).collect();
        VarSet(self.and_all(&lits))
    }

    pub fn exists(&self, f: &Bdd, vars: &VarSet) -> Bdd {
        let (f, c) = (self.own(f), self.own(&vars.0));
        let id = self.with_inner(|m| m.exists(f, c));
        self.wrap(id)
    }

    /// Universal quantification, computed directly (not through negation).
    pub fn forall(&self, f: &Bdd, vars: &VarSet) -> Bdd {
        let (f, c) = (self.own(f), self.own(&vars.0));
        let id = self.with_inner(|m| m.forall(f, c));
        self.wrap(id)
    }

    /// `∃ vars. f ∧ g` without building the conjunction first.
    pub fn and_exists(&self, f: &Bdd, g: &Bdd, vars: &VarSet) -> Bdd {
        let (f, g, c) = (self.own(f), self.own(g), self.own(&vars.0));
        let id = self.with_inner(|m| m.and_exists(f, g, c));
        self.wrap(id)
    }

    /// Simultaneous substitution of every mapped variable by its function.
    pub fn vector_compose(&self, f: &Bdd, subst: &[(Var, Bdd)]) -> Bdd {
        let f = self.own(f);
        let pairs: Vec<(u32, NodeId)> = subst.iter().map(|(v, g)| (v.0, self.own(g))).collect();
        let id = self.with_inner(|m| {
            let mut table: Vec<Option<NodeId>> = vec![None; m.var_count()];
            for (v, g) in pairs {
                table[v as usize] = Some(g);
            }
            m.vector_compose(f, &table)
        });
        self.wrap(id)
    }

    /// Shannon cofactor with `v` fixed to `value`.
    pub fn cofactor(&self, f: &Bdd, v: Var, value: bool) -> Bdd {
        let f = self.own(f);
        let id = self.with_inner(|m| m.cofactor(f, v.0, value));
        self.wrap(id)
    }

    /// Coudert–Madre restrict: a function equal to `f` wherever `care` holds,
    /// usually smaller. Returns `f` when `care` is false.
    pub fn restrict(&self, f: &Bdd, care: &Bdd) -> Bdd {
        let (f, c) = (self.own(f), self.own(care));
        let id = self.with_inner(|m| m.restrict(f, c));
        self.wrap(id)
    }

    /// Evaluates `f` under an assignment indexed by variable id.
    pub fn eval(&self, f: &Bdd, assignment: &[bool]) -> bool {
        let f = self.own(f);
        self.0.inner.borrow().eval(f, |v| assignment[v as usize])
    }

    pub fn eval_with(&self, f: &Bdd, value_of: impl Fn(Var) -> bool) -> bool {
        let f = self.own(f);
        self.0.inner.borrow().eval(f, |v| value_of(Var(v)))
    }

    /// One satisfying path, as the variables it tests. `None` iff `f` is false.
    pub fn pick_cube(&self, f: &Bdd) -> Option<Vec<CubeLiteral>> {
        let f = self.own(f);
        self.0.inner.borrow().pick_cube(f)
    }

    /// Variables `f` depends on, by id.
    pub fn support(&self, f: &Bdd) -> Vec<Var> {
        let f = self.own(f);
        self.0
            .inner
            .borrow()
            .support(&[f])
            .into_iter()
            .map(Var)
            .collect()
    }

    /// Internal nodes reachable from `f`, plus one for the terminal.
    pub fn node_count(&self, f: &Bdd) -> usize {
        self.shared_node_count(std::slice::from_ref(f))
    }

    pub fn shared_node_count(&self, fs: &[Bdd]) -> usize {
        let ids: Vec<NodeId> = fs.iter().map(|f| self.own(f)).collect();
        self.0.inner.borrow().reachable_internal(&ids) + 1
    }

    /// Number of satisfying assignments over the first `nvars` variables,
    /// assuming `f` depends on no others.
    pub fn sat_count(&self, f: &Bdd, nvars: usize) -> f64 {
        let f = self.own(f);
        self.0.inner.borrow().sat_count(f, nvars)
    }

    pub fn view(&self, f: &Bdd) -> NodeView {
        let id = self.own(f);
        let (var, hi, lo) = {
            let inner = self.0.inner.borrow();
            match id {
                FALSE => return NodeView::Const(false),
                TRUE => return NodeView::Const(true),
                _ => {
                    let n = inner.node(id);
                    (n.var, n.hi, n.lo)
                }
            }
        };
        NodeView::Decision {
            var: Var(var),
            hi: self.wrap(hi),
            lo: self.wrap(lo),
        }
    }

    /// Stable numeric identity of the node behind `f`, for memo tables.
    pub fn node_id(&self, f: &Bdd) -> u32 {
        self.own(f)
    }

    /// An irredundant sum-of-products cover of `f`.
    pub fn isop(&self, f: &Bdd) -> Vec<Vec<CubeLiteral>> {
        let f = self.own(f);
        let (cover, cubes) = self.with_inner(|m| m.isop(f, f));
        debug_assert_eq!(cover, f);
        cubes
    }

    /// Graphviz rendering; `name` labels variables.
    pub fn to_dot(&self, f: &Bdd, name: impl Fn(Var) -> String) -> String {
        let f = self.own(f);
        self.0.inner.borrow().to_dot(f, |v| name(Var(v)))
    }

    /// Frees every node not reachable from a live handle. Returns the number
    /// of nodes freed.
    pub fn gc(&self) -> usize {
        let roots = self.0.roots.borrow();
        self.0.inner.borrow_mut().collect(&roots)
    }

    /// Nodes currently allocated, excluding terminals.
    pub fn allocated_nodes(&self) -> usize {
        self.0.inner.borrow().allocated()
    }

    /// Internal nodes reachable from live handles, plus one for the terminal.
    pub fn live_nodes(&self) -> usize {
        let roots = self.0.roots.borrow();
        let ids: Vec<NodeId> = roots.keys().copied().collect();
        self.0.inner.borrow().reachable_internal(&ids) + 1
    }

    /// Rudell sifting over all variables. Every live handle keeps denoting
    /// the same function.
    pub fn sift_reorder(&self) -> ReorderReport {
        let roots = self.0.roots.borrow();
        self.0.inner.borrow_mut().sift(&roots)
    }

    /// Moves variables into the given top-to-bottom order by adjacent swaps.
    pub fn set_order(&self, order: &[Var]) {
        let roots = self.0.roots.borrow();
        let order: Vec<u32> = order.iter().map(|v| v.0).collect();
        self.0.inner.borrow_mut().reorder_to(&order, &roots);
    }

    pub fn set_cache_enabled(&self, enabled: bool) {
        self.0.inner.borrow_mut().set_cache_enabled(enabled);
    }

    pub fn set_auto_reorder(&self, enabled: bool) {
        self.0.inner.borrow_mut().auto_reorder = enabled;
    }

    pub fn set_gc_threshold(&self, nodes: usize) {
        self.0.inner.borrow_mut().gc_threshold = nodes;
    }

    /// Checks canonicity and ordering of every allocated node. For tests.
    pub fn check_invariants(&self) -> Result<(), String> {
        self.0.inner.borrow().check_invariants()
    }
}

impl Bdd {
    pub fn manager(&self) -> BddManager {
        BddManager(Rc::clone(&self.mgr))
    }

    pub fn is_true(&self) -> bool {
        self.id == TRUE
    }

    pub fn is_false(&self) -> bool {
        self.id == FALSE
    }

    pub fn is_constant(&self) -> bool {
        self.id <= TRUE
    }

    pub fn and(&self, other: &Bdd) -> Bdd {
        self.manager().and(self, other)
    }

    pub fn or(&self, other: &Bdd) -> Bdd {
        self.manager().or(self, other)
    }

    pub fn implies(&self, other: &Bdd) -> Bdd {
        self.manager().implies(self, other)
    }
}

impl Not for &Bdd {
    type Output = Bdd;

    fn not(self) -> Bdd {
        self.manager().not(self)
    }
}

impl BitAnd for &Bdd {
    type Output = Bdd;

    fn bitand(self, rhs: &Bdd) -> Bdd {
        self.manager().and(self, rhs)
    }
}

impl BitOr for &Bdd {
    type Output = Bdd;

    fn bitor(self, rhs: &Bdd) -> Bdd {
        self.manager().or(self, rhs)
    }
}

impl BitXor for &Bdd {
    type Output = Bdd;

    fn bitxor(self, rhs: &Bdd) -> Bdd {
        self.manager().xor(self, rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(n: usize) -> (BddManager, Vec<Bdd>) {
        let m = BddManager::new();
        let vars = m.new_vars(n);
        let bdds = vars.iter().map(|&v| m.var(v)).collect();
        (m, bdds)
    }

    #[test]
    fn variable_basics() {
        let (m, x) = setup(1);
        assert!(m.eval(&x[0], &[true]));
        assert!(!m.eval(&x[0], &[false]));
        assert_eq!(m.var(Var(0)), x[0]);
        assert_eq!(m.mk_var(Var(3)).unwrap_err(), BddError::UnknownVariable(3));
    }

    #[test]
    fn ite_identities() {
        let (m, x) = setup(2);
        assert_eq!(m.ite(&x[0], &m.tt(), &m.ff()), x[0]);
        assert!(m.and(&x[0], &m.not(&x[0])).is_false());
        assert!((&x[0] | &!&x[0]).is_true());
        let xy = &x[0] & &x[1];
        assert!(m.eval(&xy, &[true, true]));
        assert!(!m.eval(&xy, &[true, false]));
    }

    #[test]
    fn quantifier_basics() {
        let (m, x) = setup(2);
        let sx = m.var_set(&[Var(0)]);
        assert!(m.exists(&x[0], &sx).is_true());
        assert!(m.forall(&(&x[0] & &x[1]), &sx).is_false());
        assert_eq!(m.exists(&(&x[0] & &x[1]), &sx), x[1]);
    }

    #[test]
    fn compose_is_simultaneous() {
        let (m, x) = setup(2);
        assert_eq!(m.vector_compose(&x[0], &[(Var(0), x[1].clone())]), x[1]);
        let f = &x[0] ^ &x[1];
        let swapped = m.vector_compose(&f, &[(Var(0), x[1].clone()), (Var(1), x[0].clone())]);
        assert_eq!(swapped, f);
        let g = &x[0] & &!&x[1];
        let sg = m.vector_compose(&g, &[(Var(0), x[1].clone()), (Var(1), x[0].clone())]);
        assert_eq!(sg, &x[1] & &!&x[0]);
    }

    #[test]
    fn counting_and_cubes() {
        let (m, x) = setup(2);
        assert_eq!(m.node_count(&m.ff()), 1);
        assert_eq!(m.node_count(&x[0]), 2);
        assert_eq!(m.node_count(&(&x[0] & &x[1])), 3);
        assert!(m.pick_cube(&m.ff()).is_none());
        assert_eq!(m.pick_cube(&m.tt()), Some(vec![]));
        let c = m.pick_cube(&(&x[0] & &!&x[1])).unwrap();
        assert_eq!(c, vec![(Var(0), true), (Var(1), false)]);
        assert_eq!(m.sat_count(&(&x[0] | &x[1]), 2), 3.0);
    }

    #[test]
    fn gc_keeps_live_handles() {
        let (m, x) = setup(4);
        let keep = &(&x[0] & &x[1]) | &(&x[2] & &x[3]);
        {
            let _tmp = &(&x[0] ^ &x[2]) ^ &x[3];
        }
        let before = m.allocated_nodes();
        let freed = m.gc();
        assert!(freed > 0);
        assert_eq!(m.allocated_nodes(), before - freed);
        assert!(m.eval(&keep, &[true, true, false, false]));
        assert!(!m.eval(&keep, &[true, false, false, true]));
        m.check_invariants().unwrap();
        // rebuilding gives back the same node
        let again = &(&x[0] & &x[1]) | &(&x[2] & &x[3]);
        assert_eq!(again, keep);
    }

    #[test]
    #[should_panic(expected = "does not own")]
    fn foreign_handles_rejected() {
        let (m1, x1) = setup(1);
        let (_m2, x2) = setup(1);
        let _ = m1.and(&x1[0], &x2[0]);
    }

    #[test]
    fn dot_output_mentions_variables() {
        let (m, x) = setup(2);
        let dot = m.to_dot(&(&x[0] | &x[1]), |v| format!("v{}", v.0));
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("v0") && dot.contains("v1"));
    }

    #[test]
    fn restrict_agrees_on_care_set() {
        let (m, x) = setup(3);
        let f = &(&x[0] & &x[1]) | &(&!&x[0] & &x[2]);
        let care = x[0].clone();
        let r = m.restrict(&f, &care);
        assert_eq!(r, x[1]);
        assert_eq!(m.restrict(&f, &m.ff()), f);
    }
}
