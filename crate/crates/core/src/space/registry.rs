use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::geom::{Box3, Point3};
use super::index::BoxIndex;

/// One entry of a spaces file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceRecord {
    pub id: String,
    pub parent: Option<String>,
    #[serde(rename = "box")]
    pub bbox: Box3,
}

impl SpaceRecord {
    pub fn new(id: impl Into<String>, bbox: Box3, parent: Option<&str>) -> Self {
        SpaceRecord {
            id: id.into(),
            parent: parent.map(str::to_string),
            bbox,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("duplicate space id \"{0}\"")]
    DuplicateId(String),
    #[error("space \"{id}\" has a degenerate or non-finite box {bounds:?}")]
    DegenerateBox { id: String, bounds: [f64; 6] },
    #[error("space \"{id}\" names unknown parent \"{parent}\"")]
    UnknownParent { id: String, parent: String },
    #[error("spaces \"{a}\" and \"{b}\" overlap but neither contains the other")]
    NestingViolation { a: String, b: String },
    #[error("space \"{id}\" declares parent {declared} but its smallest enclosing space is {expected}")]
    InconsistentParent {
        id: String,
        declared: String,
        expected: String,
    },
    #[error("invalid spaces file: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug)]
pub struct Space {
    pub id: String,
    pub bbox: Box3,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub depth: usize,
}

/// The validated containment forest of named boxes plus a point-location index.
///
/// Any two boxes whose interiors overlap must be nested, and every declared
/// parent must be the smallest box strictly containing its child.
#[derive(Clone, Debug, Default)]
pub struct SpaceRegistry {
    spaces: Vec<Space>,
    by_id: HashMap<String, usize>,
    roots: Vec<usize>,
    index: BoxIndex,
}

impl SpaceRegistry {
    pub fn load(records: Vec<SpaceRecord>) -> Result<Self, RegistryError> {
        let mut by_id = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            if !r.bbox.is_valid() {
                return Err(RegistryError::DegenerateBox {
                    id: r.id.clone(),
                    bounds: r.bbox.bounds(),
                });
            }
            if by_id.insert(r.id.clone(), i).is_some() {
                return Err(RegistryError::DuplicateId(r.id.clone()));
            }
        }
        for r in &records {
            if let Some(p) = &r.parent {
                if !by_id.contains_key(p) {
                    return Err(RegistryError::UnknownParent {
                        id: r.id.clone(),
                        parent: p.clone(),
                    });
                }
            }
        }

        let boxes: Vec<Box3> = records.iter().map(|r| r.bbox).collect();
        let index = BoxIndex::build(&boxes);

        let mut candidates = Vec::new();
        for (i, r) in records.iter().enumerate() {
            candidates.clear();
            index.query_interior(&r.bbox, &mut candidates);
            candidates.sort_unstable();

            let mut smallest: Option<usize> = None;
            for &j in &candidates {
                let j = j as usize;
                if j == i {
                    continue;
                }
                let (bi, bj) = (&boxes[i], &boxes[j]);
                let j_holds_i = bj.contains_box(bi);
                if !j_holds_i && !bi.contains_box(bj) {
                    let (a, b) = if i < j { (i, j) } else { (j, i) };
                    return Err(RegistryError::NestingViolation {
                        a: records[a].id.clone(),
                        b: records[b].id.clone(),
                    });
                }
                if j_holds_i && bj != bi {
                    // Strict containers of one box are totally ordered.
                    match smallest {
                        Some(s) if !(boxes[s].contains_box(bj) && boxes[s] != *bj) => {}
                        _ => smallest = Some(j),
                    }
                }
            }

            let minimal: Vec<usize> = match smallest {
                None => vec![],
                Some(s) => candidates
                    .iter()
                    .map(|&j| j as usize)
                    .filter(|&j| j != i && boxes[j] == boxes[s])
                    .collect(),
            };
            let declared = r.parent.as_ref().map(|p| by_id[p]);
            let consistent = match declared {
                None => minimal.is_empty(),
                Some(p) => minimal.contains(&p),
            };
            if !consistent {
                let expected = if minimal.is_empty() {
                    "none".to_string()
                } else {
                    minimal
                        .iter()
                        .map(|&j| format!("\"{}\"", records[j].id))
                        .collect::<Vec<_>>()
                        .join(" or ")
                };
                return Err(RegistryError::InconsistentParent {
                    id: r.id.clone(),
                    declared: r
                        .parent
                        .as_ref()
                        .map_or("none".to_string(), |p| format!("\"{p}\"")),
                    expected,
                });
            }
        }

        let mut spaces: Vec<Space> = records
            .into_iter()
            .map(|r| Space {
                parent: r.parent.as_ref().map(|p| by_id[p]),
                id: r.id,
                bbox: r.bbox,
                children: vec![],
                depth: 0,
            })
            .collect();
        let mut roots = vec![];
        for i in 0..spaces.len() {
            match spaces[i].parent {
                Some(p) => spaces[p].children.push(i),
                None => roots.push(i),
            }
        }
        let mut stack: Vec<(usize, usize)> = roots.iter().map(|&r| (r, 0)).collect();
        while let Some((i, d)) = stack.pop() {
            spaces[i].depth = d;
            stack.extend(spaces[i].children.iter().map(|&c| (c, d + 1)));
        }

        Ok(SpaceRegistry {
            spaces,
            by_id,
            roots,
            index,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, RegistryError> {
        let records: Vec<SpaceRecord> = serde_json::from_str(text)?;
        Self::load(records)
    }

    pub fn records(&self) -> Vec<SpaceRecord> {
        self.spaces
            .iter()
            .map(|s| SpaceRecord {
                id: s.id.clone(),
                parent: s.parent.map(|p| self.spaces[p].id.clone()),
                bbox: s.bbox,
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.records()).expect("records serialize")
    }

    pub fn len(&self) -> usize {
        self.spaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spaces.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn space(&self, idx: usize) -> &Space {
        &self.spaces[idx]
    }

    pub fn get(&self, id: &str) -> Option<&Space> {
        self.index_of(id).map(|i| &self.spaces[i])
    }

    pub fn box_of(&self, id: &str) -> Option<Box3> {
        self.get(id).map(|s| s.bbox)
    }

    pub fn spaces(&self) -> impl Iterator<Item = &Space> {
        self.spaces.iter()
    }

    pub fn roots(&self) -> impl Iterator<Item = &Space> {
        self.roots.iter().map(|&r| &self.spaces[r])
    }

    pub fn parent_of(&self, id: &str) -> Option<&str> {
        let s = self.get(id)?;
        s.parent.map(|p| self.spaces[p].id.as_str())
    }

    pub fn children_of(&self, id: &str) -> Vec<&str> {
        self.get(id)
            .map(|s| s.children.iter().map(|&c| self.spaces[c].id.as_str()).collect())
            .unwrap_or_default()
    }

    /// Strict ancestors of `id`, nearest first.
    pub fn ancestors(&self, id: &str) -> Vec<&str> {
        let mut out = vec![];
        let mut cur = self.get(id).and_then(|s| s.parent);
        while let Some(p) = cur {
            out.push(self.spaces[p].id.as_str());
            cur = self.spaces[p].parent;
        }
        out
    }

    /// Indices of every space containing `p`, innermost first. Deeper spaces
    /// come first; equal depth (only on shared faces) falls back to id order.
    pub fn enclosing_indices(&self, p: Point3) -> Vec<usize> {
        let mut hits = Vec::new();
        self.index.query_point(p, &mut hits);
        self.order_chain(hits)
    }

    /// Like [`enclosing_indices`](Self::enclosing_indices), also returning the
    /// number of box comparisons the index performed.
    pub fn enclosing_indices_counted(&self, p: Point3) -> (Vec<usize>, u64) {
        let mut hits = Vec::new();
        let mut tests = 0;
        self.index.query_point_counted(p, &mut hits, &mut tests);
        (self.order_chain(hits), tests)
    }

    fn order_chain(&self, hits: Vec<u32>) -> Vec<usize> {
        let mut chain: Vec<usize> = hits.into_iter().map(|i| i as usize).collect();
        if chain.len() > 1 {
            chain.sort_by(|&a, &b| {
                let (sa, sb) = (&self.spaces[a], &self.spaces[b]);
                sb.depth.cmp(&sa.depth).then_with(|| sa.id.cmp(&sb.id))
            });
        }
        chain
    }

    pub fn enclosing_chain(&self, p: Point3) -> Vec<&str> {
        self.enclosing_indices(p)
            .into_iter()
            .map(|i| self.spaces[i].id.as_str())
            .collect()
    }
}
