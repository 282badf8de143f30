//! Worlds, heaps and configurations. A heap is a finite map from locations
//! to typed cells; a configuration pairs a heap with a result value and a
//! step count. Canonicalization renames locations by a deterministic
//! traversal so that configurations equal up to a location bijection get
//! identical canonical forms.

use crate::interp::Value;
use crate::syntax::Type;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location(pub u64);

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("dangling location {0}")]
    Dangling(Location),
    #[error("stored value does not conform to the cell type at {0}")]
    TagMismatch(Location),
    #[error("heap too large for exhaustive bijection search ({0} locations, limit {1})")]
    SizeLimit(usize, usize),
}

/// Immutable heap; updates return a new heap. Locations are allocated from
/// a per-run counter and never reused.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Heap {
    next: u64,
    cells: BTreeMap<Location, (Type, Value)>,
}

impl Heap {
    pub fn empty() -> Heap {
        Heap::default()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
    pub fn domain(&self) -> impl Iterator<Item = Location> + '_ {
        self.cells.keys().copied()
    }
    pub fn tag(&self, l: Location) -> Option<&Type> {
        self.cells.get(&l).map(|(t, _)| t)
    }

    /// Extend the heap with a fresh cell. Allocation itself costs no steps.
    pub fn alloc(&self, tag: Type, v: Value) -> (Heap, Location) {
        debug_assert!(conforms(&tag, &v), "allocated value must match its tag");
        let l = Location(self.next);
        let mut cells = self.cells.clone();
        cells.insert(l, (tag, v));
        (
            Heap {
                next: self.next + 1,
                cells,
            },
            l,
        )
    }

    pub fn read(&self, l: Location) -> Result<Value, StoreError> {
        self.cells
            .get(&l)
            .map(|(_, v)| v.clone())
            .ok_or(StoreError::Dangling(l))
    }

    /// Pointwise update; the world (domain and tags) is unchanged.
    pub fn write(&self, l: Location, v: Value) -> Result<Heap, StoreError> {
        match self.cells.get(&l) {
            None => Err(StoreError::Dangling(l)),
            Some((tag, _)) => {
                if cfg!(debug_assertions) && !conforms(tag, &v) {
                    return Err(StoreError::TagMismatch(l));
                }
                let mut cells = self.cells.clone();
                let tag = tag.clone();
                cells.insert(l, (tag, v));
                Ok(Heap {
                    next: self.next,
                    cells,
                })
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Location, &Type, &Value)> {
        self.cells.iter().map(|(l, (t, v))| (*l, t, v))
    }
}

/// Shallow shape check of a value against a cell type.
pub fn conforms(tag: &Type, v: &Value) -> bool {
    match (tag, v) {
        (Type::Int, Value::Int(_)) => true,
        (Type::Unit, Value::Unit) => true,
        (Type::Prod(a, b), Value::Pair(x, y)) => conforms(a, x) && conforms(b, y),
        (Type::Record(fs), Value::Record(vs)) => {
            fs.len() == vs.len()
                && fs
                    .iter()
                    .zip(vs)
                    .all(|((l, t), (m, w))| l == m && conforms(t, w))
        }
        (Type::Ref(_), Value::Loc(_, _)) => true,
        (Type::Fn(..), Value::Closure { .. }) | (Type::Fn(..), Value::RecClosure { .. }) => true,
        (Type::T(_), Value::Comp { .. }) => true,
        _ => false,
    }
}

/// Result of running a computation: final heap, result value, steps used.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub heap: Heap,
    pub result: Value,
    pub steps: u64,
}

impl Config {
    /// Deterministic textual dump, stable across runs; used for golden
    /// tests and for ordering candidate canonical forms.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("steps = {}\n", self.steps));
        s.push_str(&format!("result = {}\n", self.result));
        s.push_str(&format!("heap ({} cells)\n", self.heap.len()));
        for (l, tag, v) in self.heap.iter() {
            s.push_str(&format!("  {l} : {tag} = {v}\n"));
        }
        s
    }
}

fn collect_reachable(v: &Value, heap: &Heap, seen: &mut BTreeSet<Location>, order: &mut Vec<Location>) {
    match v {
        Value::Loc(l, _) => {
            if seen.insert(*l) {
                order.push(*l);
                if let Ok(stored) = heap.read(*l) {
                    collect_reachable(&stored, heap, seen, order);
                }
            }
        }
        Value::Pair(a, b) => {
            collect_reachable(a, heap, seen, order);
            collect_reachable(b, heap, seen, order);
        }
        Value::Record(fields) => {
            for (_, w) in fields {
                collect_reachable(w, heap, seen, order);
            }
        }
        Value::Closure { env, .. }
        | Value::Comp { env, .. }
        | Value::RecClosure { env, .. } => {
            for (_, w) in env.iter() {
                collect_reachable(w, heap, seen, order);
            }
        }
        Value::Int(_) | Value::Unit => {}
    }
}

fn apply_renaming(c: &Config, map: &BTreeMap<Location, Location>) -> Config {
    let mut heap = Heap {
        next: c.heap.len() as u64,
        cells: BTreeMap::new(),
    };
    for (l, tag, v) in c.heap.iter() {
        let nl = *map.get(&l).unwrap_or(&l);
        heap.cells.insert(nl, (tag.clone(), v.rename_locations(map)));
    }
    Config {
        heap,
        result: c.result.rename_locations(map),
        steps: c.steps,
    }
}

fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

const PERM_LIMIT: usize = 8;

/// Rename locations to 0,1,2,... Locations reachable from the result are
/// numbered first, in depth-first left-to-right traversal order; the
/// remaining cells are numbered by whichever ordering yields the least
/// textual dump, so that bijection-equivalent configurations canonicalize
/// identically. Beyond [`PERM_LIMIT`] unreachable cells the fallback is
/// ascending original order.
pub fn canonicalize(c: &Config) -> Config {
    let mut seen = BTreeSet::new();
    let mut order = Vec::new();
    collect_reachable(&c.result, &c.heap, &mut seen, &mut order);
    let unreachable: Vec<Location> = c.heap.domain().filter(|l| !seen.contains(l)).collect();

    let base_map = |tail: &[Location]| -> BTreeMap<Location, Location> {
        let mut map = BTreeMap::new();
        for (i, l) in order.iter().chain(tail.iter()).enumerate() {
            map.insert(*l, Location(i as u64));
        }
        map
    };

    if unreachable.len() > PERM_LIMIT {
        return apply_renaming(c, &base_map(&unreachable));
    }
    let mut best: Option<(String, Config)> = None;
    for tail in permutations(&unreachable) {
        let cand = apply_renaming(c, &base_map(&tail));
        let dump = cand.dump();
        match &best {
            Some((d, _)) if *d <= dump => {}
            _ => best = Some((dump, cand)),
        }
    }
    best.expect("at least one permutation").1
}

/// Exhaustive search for a location bijection sending `c1` to `c2`.
/// The independent oracle for [`canonicalize`]; limited to small heaps.
pub fn bijection_equiv(c1: &Config, c2: &Config) -> Result<bool, StoreError> {
    if c1.steps != c2.steps || c1.heap.len() != c2.heap.len() {
        return Ok(false);
    }
    let n = c1.heap.len();
    if n > PERM_LIMIT {
        return Err(StoreError::SizeLimit(n, PERM_LIMIT));
    }
    let dom1: Vec<Location> = c1.heap.domain().collect();
    let dom2: Vec<Location> = c2.heap.domain().collect();
    for perm in permutations(&dom2) {
        let map: BTreeMap<Location, Location> =
            dom1.iter().copied().zip(perm.iter().copied()).collect();
        let ok = c1.result.rename_locations(&map) == c2.result
            && dom1.iter().all(|l| {
                let (tag1, val1) = &c1.heap.cells[l];
                match c2.heap.cells.get(&map[l]) {
                    Some((tag2, val2)) => tag1 == tag2 && val1.rename_locations(&map) == *val2,
                    None => false,
                }
            });
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn int(n: i64) -> Value {
        Value::Int(BigInt::from(n))
    }

    #[test]
    fn alloc_is_fresh() {
        let (h1, l1) = Heap::empty().alloc(Type::Int, int(0));
        let (h2, l2) = h1.alloc(Type::Int, int(1));
        assert_ne!(l1, l2);
        assert_eq!(h2.read(l1).unwrap(), int(0));
        assert_eq!(h2.read(l2).unwrap(), int(1));
    }

    #[test]
    fn read_empty_heap_dangles() {
        assert_eq!(
            Heap::empty().read(Location(0)),
            Err(StoreError::Dangling(Location(0)))
        );
    }

    #[test]
    fn write_updates_pointwise() {
        let (h, l) = Heap::empty().alloc(Type::Int, int(0));
        let h2 = h.write(l, int(5)).unwrap();
        assert_eq!(h2.read(l).unwrap(), int(5));
        assert_eq!(h.read(l).unwrap(), int(0));
    }

    #[test]
    fn canonicalize_permuted_allocations_agree() {
        // two allocations in either order, result pairing both locations
        let (h1a, la1) = Heap::empty().alloc(Type::Int, int(1));
        let (h1, lb1) = h1a.alloc(Type::Int, int(2));
        let c1 = Config {
            heap: h1,
            result: Value::Pair(
                Box::new(Value::Loc(la1, Type::Int)),
                Box::new(Value::Loc(lb1, Type::Int)),
            ),
            steps: 0,
        };
        let (h2a, lb2) = Heap::empty().alloc(Type::Int, int(2));
        let (h2, la2) = h2a.alloc(Type::Int, int(1));
        let c2 = Config {
            heap: h2,
            result: Value::Pair(
                Box::new(Value::Loc(la2, Type::Int)),
                Box::new(Value::Loc(lb2, Type::Int)),
            ),
            steps: 0,
        };
        assert_ne!(c1, c2);
        assert_eq!(canonicalize(&c1), canonicalize(&c2));
        assert!(bijection_equiv(&c1, &c2).unwrap());
    }

    #[test]
    fn canonicalize_unreachable_cells_up_to_bijection() {
        // unreachable cells in swapped original order still canonicalize
        // identically
        let (h1a, _) = Heap::empty().alloc(Type::Int, int(1));
        let (h1, _) = h1a.alloc(Type::Int, int(2));
        let c1 = Config { heap: h1, result: Value::Unit, steps: 0 };
        let (h2a, _) = Heap::empty().alloc(Type::Int, int(2));
        let (h2, _) = h2a.alloc(Type::Int, int(1));
        let c2 = Config { heap: h2, result: Value::Unit, steps: 0 };
        assert_eq!(canonicalize(&c1), canonicalize(&c2));
        assert!(bijection_equiv(&c1, &c2).unwrap());
    }

    #[test]
    fn differing_contents_distinguish() {
        let (h1, l1) = Heap::empty().alloc(Type::Int, int(1));
        let (h2, l2) = Heap::empty().alloc(Type::Int, int(2));
        let c1 = Config { heap: h1, result: Value::Loc(l1, Type::Int), steps: 0 };
        let c2 = Config { heap: h2, result: Value::Loc(l2, Type::Int), steps: 0 };
        assert!(!bijection_equiv(&c1, &c2).unwrap());
        assert_ne!(canonicalize(&c1), canonicalize(&c2));
    }

    #[test]
    fn canonicalize_idempotent() {
        let (ha, la) = Heap::empty().alloc(Type::Int, int(7));
        let (h, _) = ha.alloc(Type::Int, int(9));
        let c = Config { heap: h, result: Value::Loc(la, Type::Int), steps: 3 };
        let c1 = canonicalize(&c);
        assert_eq!(canonicalize(&c1), c1);
    }
}
