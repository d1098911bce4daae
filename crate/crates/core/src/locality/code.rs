//! Canonical codes: byte strings that are equal iff two views are isomorphic
//! as rooted, slot-preserving structures (including identifiers and ranks).

use std::collections::{HashMap, VecDeque};
use std::fmt;

use crate::graph::{ColoredMultigraph, Slot};

use super::explicit::neighborhood;
use super::{NodeRef, View};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode(pub Vec<u8>);

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

fn put_u32(out: &mut Vec<u8>, x: u32) {
    out.extend_from_slice(&x.to_le_bytes());
}

fn put_slot(out: &mut Vec<u8>, s: Slot) {
    put_u32(out, s.color);
    out.push(s.dir.tag());
}

fn put_decorations(out: &mut Vec<u8>, view: &dyn View, n: NodeRef) {
    match view.label(n) {
        Some(l) => {
            out.push(1);
            out.extend_from_slice(&l.to_le_bytes());
        }
        None => out.push(0),
    }
    match view.rank(n) {
        Some(r) => {
            out.push(1);
            put_u32(out, r);
        }
        None => out.push(0),
    }
}

/// Tree-shaped views are coded by hash-consed subtree codes, which stays cheap
/// on large cover balls; other views by a slot-guided BFS numbering. Slots are
/// distinct at every node, so the numbering is fixed by the root and the code
/// determines the view up to isomorphism.
pub fn canonical_code(view: &dyn View) -> CanonicalCode {
    if view.is_tree() {
        tree_code(view)
    } else {
        bfs_code(view)
    }
}

struct TreeCoder<'a> {
    view: &'a dyn View,
    use_keys: bool,
    intern: HashMap<Vec<u8>, u32>,
    table: Vec<u8>,
    memo: HashMap<(u64, Option<Slot>, usize), u32>,
}

impl TreeCoder<'_> {
    fn code(&mut self, n: NodeRef, arrival: Option<Slot>) -> u32 {
        let depth = self.view.depth(n);
        let key = if self.use_keys {
            self.view.cover_key(n).map(|k| (k, arrival, depth))
        } else {
            None
        };
        if let Some(k) = key {
            if let Some(&c) = self.memo.get(&k) {
                return c;
            }
        }
        let mut entry = Vec::new();
        put_decorations(&mut entry, self.view, n);
        for s in self.view.slots(n) {
            if Some(s) == arrival {
                continue;
            }
            let child = self
                .view
                .follow(n, s)
                .expect("visible slot leads somewhere");
            let c = self.code(child, Some(s.reverse()));
            put_slot(&mut entry, s);
            put_u32(&mut entry, c);
        }
        let next = self.intern.len() as u32;
        let id = match self.intern.get(&entry) {
            Some(&id) => id,
            None => {
                put_u32(&mut self.table, entry.len() as u32);
                self.table.extend_from_slice(&entry);
                self.intern.insert(entry, next);
                next
            }
        };
        if let Some(k) = key {
            self.memo.insert(k, id);
        }
        id
    }
}

fn tree_code(view: &dyn View) -> CanonicalCode {
    let mut coder = TreeCoder {
        view,
        // Keys summarize undecorated structure only.
        use_keys: view.model().is_anonymous(),
        intern: HashMap::new(),
        table: Vec::new(),
        memo: HashMap::new(),
    };
    let root = coder.code(view.root(), None);
    let mut out = vec![b'T', view.model().tag()];
    put_u32(&mut out, view.radius() as u32);
    put_u32(&mut out, coder.intern.len() as u32);
    out.extend_from_slice(&coder.table);
    put_u32(&mut out, root);
    CanonicalCode(out)
}

/// Code of an arbitrary view from a BFS numbering that explores slots in
/// ascending order.
pub fn bfs_code(view: &dyn View) -> CanonicalCode {
    let root = view.root();
    let mut number: HashMap<NodeRef, u32> = HashMap::from([(root, 0)]);
    let mut order = vec![root];
    let mut queue = VecDeque::from([root]);
    let mut body = Vec::new();
    while let Some(x) = queue.pop_front() {
        put_u32(&mut body, view.depth(x) as u32);
        put_decorations(&mut body, view, x);
        let slots = view.slots(x);
        put_u32(&mut body, slots.len() as u32);
        for s in slots {
            let y = view.follow(x, s).expect("visible slot leads somewhere");
            let id = *number.entry(y).or_insert_with(|| {
                order.push(y);
                queue.push_back(y);
                (order.len() - 1) as u32
            });
            put_slot(&mut body, s);
            put_u32(&mut body, id);
        }
    }
    let mut out = vec![b'G', view.model().tag()];
    put_u32(&mut out, view.radius() as u32);
    put_u32(&mut out, order.len() as u32);
    out.extend_from_slice(&body);
    CanonicalCode(out)
}

/// Isomorphism invariant of a whole connected graph: the least BFS code over
/// all choices of root.
pub fn graph_canonical_form(g: &ColoredMultigraph) -> CanonicalCode {
    let radius = g.node_count() + 1;
    let mut best: Option<CanonicalCode> = None;
    for v in g.node_ids() {
        let view = neighborhood(g, v, radius).expect("node of g");
        let code = bfs_code(&view);
        if best.as_ref().is_none_or(|b| code < *b) {
            best = Some(code);
        }
    }
    let mut out = vec![b'F'];
    put_u32(&mut out, g.node_count() as u32);
    out.extend(best.map(|c| c.0).unwrap_or_default());
    CanonicalCode(out)
}
