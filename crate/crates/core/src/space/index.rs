//! Static bulk-loaded R-tree over boxes (sort-tile-recursive packing).
//!
//! Leaves hold up to `NODE_CAPACITY` boxes and every inner level packs the
//! level below the same way, so the height is `log_8 n`. For a family of
//! boxes that are pairwise nested or interior-disjoint, a point query visits
//! one root-to-leaf path per output box plus the packing slack.

use super::geom::{Box3, Point3};

const NODE_CAPACITY: usize = 8;

/// Single-precision bounds rounded outwards, so they contain the exact box.
#[derive(Clone, Copy, Debug)]
struct Bounds32 {
    lo: [f32; 3],
    hi: [f32; 3],
}

fn round_down(v: f64) -> f32 {
    let f = v as f32;
    if f as f64 > v {
        f.next_down()
    } else {
        f
    }
}

fn round_up(v: f64) -> f32 {
    let f = v as f32;
    if (f as f64) < v {
        f.next_up()
    } else {
        f
    }
}

impl Bounds32 {
    fn enclosing(b: &Box3) -> Self {
        Bounds32 {
            lo: b.min.map(round_down),
            hi: b.max.map(round_up),
        }
    }

    /// True whenever the point lies in the bounds, and possibly for points
    /// within one single-precision step outside them.
    #[inline]
    fn may_contain(&self, p: &Bounds32) -> bool {
        (self.lo[0] <= p.hi[0])
            & (self.lo[1] <= p.hi[1])
            & (self.lo[2] <= p.hi[2])
            & (p.lo[0] <= self.hi[0])
            & (p.lo[1] <= self.hi[1])
            & (p.lo[2] <= self.hi[2])
    }

    #[inline]
    fn interiors_may_meet(&self, q: &Bounds32) -> bool {
        (0..3).all(|i| self.lo[i] < q.hi[i] && q.lo[i] < self.hi[i])
    }
}

/// Up to `NODE_CAPACITY` siblings stored side by side.
#[derive(Clone, Debug)]
struct Group<T> {
    len: u32,
    bounds: [Bounds32; NODE_CAPACITY],
    /// Leaf groups: the item id. Inner groups: the child group one level down.
    refs: [u32; NODE_CAPACITY],
    exact: T,
}

type LeafGroup = Group<[Box3; NODE_CAPACITY]>;
type InnerGroup = Group<()>;

const EMPTY_BOUNDS: Bounds32 = Bounds32 { lo: [0.0; 3], hi: [0.0; 3] };
const EMPTY_BOX: Box3 = Box3 { min: [0.0; 3], max: [0.0; 3] };

impl<T> Group<T> {
    #[inline]
    fn members(&self) -> impl Iterator<Item = (usize, &Bounds32)> {
        self.bounds[..self.len as usize].iter().enumerate()
    }
}

/// Chunks `(bbox, ref)` entries into groups; returns each group's enclosing box.
fn chunk_groups<T>(entries: &[(Box3, u32)], exact: impl Fn(&[(Box3, u32)]) -> T) -> (Vec<Group<T>>, Vec<(Box3, u32)>) {
    let mut groups = Vec::with_capacity(entries.len().div_ceil(NODE_CAPACITY));
    let mut parents = Vec::with_capacity(groups.capacity());
    for (k, chunk) in entries.chunks(NODE_CAPACITY).enumerate() {
        let mut bounds = [EMPTY_BOUNDS; NODE_CAPACITY];
        let mut refs = [0; NODE_CAPACITY];
        for (i, (b, r)) in chunk.iter().enumerate() {
            bounds[i] = Bounds32::enclosing(b);
            refs[i] = *r;
        }
        groups.push(Group {
            len: chunk.len() as u32,
            bounds,
            refs,
            exact: exact(chunk),
        });
        let bbox = chunk.iter().skip(1).fold(chunk[0].0, |acc, e| acc.union(&e.0));
        parents.push((bbox, k as u32));
    }
    (groups, parents)
}

/// Leaves are grouped in STR order; every inner level groups the STR-sorted
/// groups of the level below. The root is the single group of the last inner
/// level, or the only leaf group when there are no inner levels.
#[derive(Clone, Debug, Default)]
pub(crate) struct BoxIndex {
    leaves: Vec<LeafGroup>,
    inner: Vec<Vec<InnerGroup>>,
}

impl BoxIndex {
    pub(crate) fn build(boxes: &[Box3]) -> Self {
        let mut entries: Vec<(Box3, u32)> = boxes.iter().enumerate().map(|(i, b)| (*b, i as u32)).collect();
        if entries.is_empty() {
            return BoxIndex::default();
        }
        str_sort(&mut entries, |e| e.0.center());
        let (leaves, mut nodes) = chunk_groups(&entries, |chunk| {
            let mut exact = [EMPTY_BOX; NODE_CAPACITY];
            for (slot, (b, _)) in exact.iter_mut().zip(chunk) {
                *slot = *b;
            }
            exact
        });
        let mut inner = Vec::new();
        while nodes.len() > 1 {
            str_sort(&mut nodes, |n| n.0.center());
            let (groups, parents) = chunk_groups(&nodes, |_| ());
            inner.push(groups);
            nodes = parents;
        }
        BoxIndex { leaves, inner }
    }

    /// Ids of all boxes whose closed extent contains `p`, in no particular order.
    pub(crate) fn query_point(&self, p: Point3, out: &mut Vec<u32>) {
        self.query_point_counted(p, out, &mut 0);
    }

    /// As [`query_point`](Self::query_point), also counting box tests.
    pub(crate) fn query_point_counted(&self, p: Point3, out: &mut Vec<u32>, tests: &mut u64) {
        let pb = Bounds32::enclosing(&Box3 { min: p, max: p });
        self.walk(|b| b.may_contain(&pb), |b| b.contains_point(p), out, tests);
    }

    /// Ids of all boxes whose open interior meets the interior of `q`.
    pub(crate) fn query_interior(&self, q: &Box3, out: &mut Vec<u32>) {
        let qb = Bounds32::enclosing(q);
        self.walk(|b| b.interiors_may_meet(&qb), |b| b.interiors_intersect(q), out, &mut 0);
    }

    fn walk<M, H>(&self, may_hit: M, hit: H, out: &mut Vec<u32>, tests: &mut u64)
    where
        M: Fn(&Bounds32) -> bool,
        H: Fn(&Box3) -> bool,
    {
        if self.leaves.is_empty() {
            return;
        }
        self.descend(self.inner.len(), 0, &may_hit, &hit, out, tests);
    }

    /// Visits group `g` of `level`, where level 0 holds the leaf groups.
    fn descend<M, H>(&self, level: usize, g: usize, may_hit: &M, hit: &H, out: &mut Vec<u32>, tests: &mut u64)
    where
        M: Fn(&Bounds32) -> bool,
        H: Fn(&Box3) -> bool,
    {
        if level == 0 {
            let group = &self.leaves[g];
            *tests += group.len as u64;
            for (i, b) in group.members() {
                if may_hit(b) && hit(&group.exact[i]) {
                    out.push(group.refs[i]);
                }
            }
            return;
        }
        let group = &self.inner[level - 1][g];
        *tests += group.len as u64;
        for (i, b) in group.members() {
            if may_hit(b) {
                self.descend(level - 1, group.refs[i] as usize, may_hit, hit, out, tests);
            }
        }
    }
}

/// Orders entries so that consecutive runs of `NODE_CAPACITY` are spatially
/// compact: slabs along x, then runs along y, then chunks along z.
fn str_sort<T>(entries: &mut [T], center: impl Fn(&T) -> Point3 + Copy) {
    let n = entries.len();
    let pages = n.div_ceil(NODE_CAPACITY);
    let slabs = (pages as f64).cbrt().ceil().max(1.0) as usize;
    let cmp_axis = |axis: usize| move |a: &T, b: &T| center(a)[axis].total_cmp(&center(b)[axis]);

    entries.sort_by(cmp_axis(0));
    let slab_len = (slabs * slabs * NODE_CAPACITY).max(1);
    for slab in entries.chunks_mut(slab_len) {
        slab.sort_by(cmp_axis(1));
        let run_len = (slabs * NODE_CAPACITY).max(1);
        for run in slab.chunks_mut(run_len) {
            run.sort_by(cmp_axis(2));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(boxes: &[Box3], p: Point3) -> Vec<u32> {
        (0..boxes.len() as u32).filter(|&i| boxes[i as usize].contains_point(p)).collect()
    }

    #[test]
    fn empty_index() {
        let idx = BoxIndex::build(&[]);
        let mut out = vec![];
        idx.query_point([0.; 3], &mut out);
        assert!(out.is_empty());
    }

    #[test]
    fn random_overlapping_boxes_match_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let boxes: Vec<Box3> = (0..900)
            .map(|_| {
                let lo: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.0..50.0));
                let ext: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.1..8.0));
                Box3::new(lo[0], lo[0] + ext[0], lo[1], lo[1] + ext[1], lo[2], lo[2] + ext[2])
            })
            .collect();
        let idx = BoxIndex::build(&boxes);
        for _ in 0..2000 {
            let p: Point3 = std::array::from_fn(|_| rng.gen_range(-2.0..60.0));
            let mut got = vec![];
            idx.query_point(p, &mut got);
            got.sort_unstable();
            assert_eq!(got, brute(&boxes, p));
        }
    }

    #[test]
    fn interior_query_skips_touching_boxes() {
        let boxes = [
            Box3::unit_cube([0., 0., 0.]),
            Box3::unit_cube([1., 0., 0.]),
            Box3::new(0.5, 1.5, 0., 1., 0., 1.),
        ];
        let idx = BoxIndex::build(&boxes);
        let mut out = vec![];
        idx.query_interior(&boxes[0], &mut out);
        out.sort_unstable();
        assert_eq!(out, vec![0, 2]);
    }
}
