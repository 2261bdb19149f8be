use std::collections::BTreeMap;
use std::sync::Arc;

use crate::lang::Ty;

use super::value::SemVal;

/// Location index.
pub type Loc = usize;

/// Finite map from locations to the closed type stored there. Ordered by
/// graph inclusion.
#[derive(Clone, Debug, Default)]
pub struct World(Arc<BTreeMap<Loc, Ty>>);

impl World {
    pub fn empty() -> Self {
        World::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (Loc, Ty)>) -> Self {
        World(Arc::new(entries.into_iter().collect()))
    }

    pub fn get(&self, i: Loc) -> Option<&Ty> {
        self.0.get(&i)
    }

    pub fn contains(&self, i: Loc) -> bool {
        self.0.contains_key(&i)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Loc, &Ty)> {
        self.0.iter().map(|(i, t)| (*i, t))
    }

    pub fn domain(&self) -> Vec<Loc> {
        self.0.keys().copied().collect()
    }

    pub fn extend(&self, i: Loc, ty: Ty) -> World {
        let mut m = (*self.0).clone();
        m.insert(i, ty);
        World(Arc::new(m))
    }

    pub fn leq(&self, other: &World) -> bool {
        world_leq(self, other)
    }
}

impl PartialEq for World {
    fn eq(&self, other: &World) -> bool {
        self.len() == other.len() && self.leq(other)
    }
}

/// Smallest location not in the world.
pub fn fresh(w: &World) -> Loc {
    (0..).find(|i| !w.contains(*i)).expect("unbounded supply")
}

/// Graph inclusion: every entry of `w` appears, with an alpha-equivalent
/// type, in `w2`.
pub fn world_leq(w: &World, w2: &World) -> bool {
    w.iter()
        .all(|(i, t)| w2.get(i).is_some_and(|t2| t.alpha_eq(t2)))
}

/// Store contents, one value per location of the paired world.
#[derive(Clone, Debug, Default)]
pub struct Heap(Arc<BTreeMap<Loc, SemVal>>);

impl Heap {
    pub fn empty() -> Self {
        Heap::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (Loc, SemVal)>) -> Self {
        Heap(Arc::new(entries.into_iter().collect()))
    }

    pub fn get(&self, i: Loc) -> Option<&SemVal> {
        self.0.get(&i)
    }

    pub fn insert(&self, i: Loc, v: SemVal) -> Heap {
        let mut m = (*self.0).clone();
        m.insert(i, v);
        Heap(Arc::new(m))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Loc, &SemVal)> {
        self.0.iter().map(|(i, v)| (*i, v))
    }

    pub fn domain(&self) -> Vec<Loc> {
        self.0.keys().copied().collect()
    }

    /// Same domain as `w`.
    pub fn matches(&self, w: &World) -> bool {
        self.len() == w.len() && self.0.keys().all(|i| w.contains(*i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_is_smallest_unused() {
        assert_eq!(fresh(&World::empty()), 0);
        assert_eq!(
            fresh(&World::from_entries([(0, Ty::Int), (1, Ty::Unit)])),
            2
        );
        assert_eq!(fresh(&World::from_entries([(0, Ty::Int), (2, Ty::Int)])), 1);
    }

    #[test]
    fn world_order() {
        let w01 = World::from_entries([(0, Ty::Int), (1, Ty::Unit)]);
        let w0 = World::from_entries([(0, Ty::Int)]);
        assert!(world_leq(&World::empty(), &w01));
        assert!(world_leq(&w0, &w01));
        assert!(!world_leq(&w01, &w0));
        assert!(!world_leq(&w0, &World::from_entries([(0, Ty::Unit)])));
    }

    #[test]
    fn world_entries_compare_up_to_alpha() {
        let a = World::from_entries([(0, Ty::forall("a", Ty::var("a")))]);
        let b = World::from_entries([(0, Ty::forall("b", Ty::var("b")))]);
        assert_eq!(a, b);
    }
}
