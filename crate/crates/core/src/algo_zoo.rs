//! Bundled local algorithms and the identifier strings that name them.

use std::collections::HashMap;
use std::fmt;

use num_traits::One;
use thiserror::Error;

use crate::graph::{Color, Model, Slot};
use crate::locality::{AlgoError, LocalAlgorithm, LocalOutput, NodeRef, View};
use crate::simulations::{ec_to_po, po_to_oi, saturation_indicator, BinaryAlgorithm};
use crate::weight::{one, ratio, zero, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum MemoKey {
    Cover(u64),
    Node(NodeRef),
}

/// Color-by-color greedy evaluated on a view. The weight of an edge of color
/// c is the smaller of its endpoints' residuals before color c; an edge end
/// with a direction gets half of that, so that a node holding both an
/// outgoing and an incoming edge of one color does not overshoot.
struct GreedyKernel<'v> {
    view: &'v dyn View,
    palette: Color,
    cutoff: Color,
    memo: HashMap<(MemoKey, Color), Weight>,
}

impl<'v> GreedyKernel<'v> {
    fn new(view: &'v dyn View, palette: Color, cutoff: Color) -> Self {
        GreedyKernel {
            view,
            palette,
            cutoff,
            memo: HashMap::new(),
        }
    }

    fn key(&self, n: NodeRef) -> MemoKey {
        match self.view.cover_key(n) {
            Some(k) => MemoKey::Cover(k),
            None => MemoKey::Node(n),
        }
    }

    fn residual(&mut self, x: NodeRef, c: Color) -> Result<Weight, AlgoError> {
        if c <= 1 {
            return Ok(one());
        }
        let key = (self.key(x), c);
        if let Some(w) = self.memo.get(&key) {
            return Ok(w.clone());
        }
        let depth = self.view.depth(x);
        if depth >= self.view.radius() {
            return Err(AlgoError::ViewTooShallow {
                depth,
                radius: self.view.radius(),
            });
        }
        let mut r = one();
        for s in self.view.slots(x) {
            if s.color >= c {
                break;
            }
            r -= self.slot_weight(x, s)?;
        }
        self.memo.insert(key, r.clone());
        Ok(r)
    }

    fn slot_weight(&mut self, x: NodeRef, s: Slot) -> Result<Weight, AlgoError> {
        if s.color > self.palette {
            return Err(AlgoError::PaletteTooSmall {
                color: s.color,
                palette: self.palette,
            });
        }
        if s.color > self.cutoff {
            return Ok(zero());
        }
        let y = self
            .view
            .follow(x, s)
            .ok_or_else(|| AlgoError::Other(format!("slot {s} leads nowhere")))?;
        let rx = self.residual(x, s.color)?;
        let ry = self.residual(y, s.color)?;
        let w = rx.min(ry);
        Ok(if s.dir.is_directed() {
            w / Weight::from_integer(2.into())
        } else {
            w
        })
    }

    fn run(mut self) -> Result<LocalOutput, AlgoError> {
        let radius = self.view.radius() as u64;
        if radius < self.cutoff as u64 {
            return Err(AlgoError::ViewTooShallow {
                depth: self.view.radius(),
                radius: self.view.radius(),
            });
        }
        let root = self.view.root();
        let mut out = LocalOutput::new();
        for s in self.view.slots(root) {
            let w = self.slot_weight(root, s)?;
            out.insert(s, w);
        }
        Ok(out)
    }
}

fn expect_model(view: &dyn View, model: Model) -> Result<(), AlgoError> {
    if view.model() != model {
        return Err(AlgoError::ModelMismatch {
            expected: model,
            found: view.model(),
        });
    }
    Ok(())
}

fn greedy_in(model: Model, name: String, k: Color, cutoff: Color) -> LocalAlgorithm {
    let t = cutoff.max(1) as usize;
    LocalAlgorithm::new(
        name,
        model,
        k,
        move |_, _| t,
        move |view| {
            expect_model(view, model)?;
            GreedyKernel::new(view, k, cutoff).run()
        },
    )
}

/// Greedy by color on EC graphs, runtime k.
pub fn greedy_by_color(k: Color) -> LocalAlgorithm {
    assert!(k >= 1, "palette must be nonempty");
    greedy_in(Model::EC, format!("greedy:k={k}"), k, k)
}

/// The same greedy on PO graphs. Maximal whenever every directed edge has an
/// antiparallel twin of its color, as in doubled EC graphs.
pub fn po_greedy(k: Color) -> LocalAlgorithm {
    assert!(k >= 1, "palette must be nonempty");
    greedy_in(Model::PO, format!("po-greedy:k={k}"), k, k)
}

/// Greedy that ignores the order.
pub fn oi_greedy(k: Color) -> LocalAlgorithm {
    assert!(k >= 1, "palette must be nonempty");
    greedy_in(Model::OI, format!("oi-greedy:k={k}"), k, k)
}

/// Greedy that ignores identifiers.
pub fn id_greedy(k: Color) -> LocalAlgorithm {
    assert!(k >= 1, "palette must be nonempty");
    greedy_in(Model::ID, format!("id-greedy:k={k}"), k, k)
}

/// 1/d on every edge end, runtime 1. Maximal on d-regular graphs only.
pub fn uniform_regular(d: u32) -> LocalAlgorithm {
    assert!(d >= 1, "degree must be positive");
    let w = ratio(1, d as i64);
    LocalAlgorithm::new(
        format!("uniform:d={d}"),
        Model::EC,
        Color::MAX,
        |_, _| 1,
        move |view| {
            expect_model(view, Model::EC)?;
            Ok(view
                .slots(view.root())
                .into_iter()
                .map(|s| (s, w.clone()))
                .collect())
        },
    )
}

/// Zero everywhere, runtime 1.
pub fn zeros() -> LocalAlgorithm {
    LocalAlgorithm::new(
        "zero",
        Model::EC,
        Color::MAX,
        |_, _| 1,
        |view| {
            expect_model(view, Model::EC)?;
            Ok(view
                .slots(view.root())
                .into_iter()
                .map(|s| (s, zero()))
                .collect())
        },
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ZooError {
    #[error("cannot truncate {name} to {t} rounds (needs 1 <= t < {runtime})")]
    NotTruncatable {
        name: String,
        t: usize,
        runtime: usize,
    },
    #[error("unknown algorithm id {0:?}")]
    Unknown(String),
    #[error("bad parameter in {id:?}: {reason}")]
    BadParameter { id: String, reason: String },
}

/// Greedy by color cut off after `t` colors: heavier colors get weight 0.
pub fn truncate(k: Color, t: usize) -> Result<LocalAlgorithm, ZooError> {
    if t == 0 || t >= k as usize {
        return Err(ZooError::NotTruncatable {
            name: format!("greedy:k={k}"),
            t,
            runtime: k as usize,
        });
    }
    Ok(greedy_in(
        Model::EC,
        format!("trunc:greedy:k={k}:t={t}"),
        k,
        t as Color,
    ))
}

/// The whole simulation chain from EC down to an order-ignoring OI greedy.
pub fn chain_ec_po_oi(k: Color) -> LocalAlgorithm {
    ec_to_po(&po_to_oi(&oi_greedy(k)).expect("OI algorithm"))
        .expect("PO algorithm")
        .renamed(format!("chain:ec-po-oi:k={k}"))
}

pub fn chain_ec_po(k: Color) -> LocalAlgorithm {
    ec_to_po(&po_greedy(k))
        .expect("PO algorithm")
        .renamed(format!("chain:ec-po:k={k}"))
}

/// Binary ID algorithm: 1 iff the root identifier is odd. Runtime 0.
pub fn parity() -> BinaryAlgorithm {
    BinaryAlgorithm::new(
        "parity",
        Model::ID,
        |_, _| 0,
        |view| {
            view.label(view.root())
                .map(|l| l % 2 == 1)
                .ok_or_else(|| AlgoError::Other("view has no identifiers".into()))
        },
    )
}

/// Binary ID algorithm that always answers `bit`.
pub fn constant(bit: bool) -> BinaryAlgorithm {
    BinaryAlgorithm::new(
        format!("const:{}", u8::from(bit)),
        Model::ID,
        |_, _| 0,
        move |_| Ok(bit),
    )
}

/// A parsed algorithm identifier such as `greedy:k=8`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgorithmId {
    pub name: String,
    pub params: Vec<(String, u64)>,
}

impl AlgorithmId {
    pub fn parse(text: &str) -> Result<AlgorithmId, ZooError> {
        let mut name = Vec::new();
        let mut params = Vec::new();
        for part in text.split(':') {
            match part.split_once('=') {
                Some((key, value)) => {
                    let v = value.parse().map_err(|_| ZooError::BadParameter {
                        id: text.into(),
                        reason: format!("{value:?} is not a natural number"),
                    })?;
                    params.push((key.to_string(), v));
                }
                None if params.is_empty() => name.push(part),
                None => return Err(ZooError::Unknown(text.into())),
            }
        }
        if name.is_empty() || name.iter().any(|p| p.is_empty()) {
            return Err(ZooError::Unknown(text.into()));
        }
        Ok(AlgorithmId {
            name: name.join(":"),
            params,
        })
    }

    fn get(&self, key: &str) -> Result<u64, ZooError> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|&(_, v)| v)
            .ok_or_else(|| ZooError::BadParameter {
                id: self.to_string(),
                reason: format!("missing {key}="),
            })
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<(), ZooError> {
        match self
            .params
            .iter()
            .find(|(k, _)| !allowed.contains(&k.as_str()))
        {
            Some((k, _)) => Err(ZooError::BadParameter {
                id: self.to_string(),
                reason: format!("unexpected {k}="),
            }),
            None => Ok(()),
        }
    }

    fn palette(&self) -> Result<Color, ZooError> {
        let k = self.get("k")?;
        if k == 0 || k > crate::graph::MAX_COLORS as u64 {
            return Err(ZooError::BadParameter {
                id: self.to_string(),
                reason: format!("k must lie in 1..={}", crate::graph::MAX_COLORS),
            });
        }
        Ok(k as Color)
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        for (k, v) in &self.params {
            write!(f, ":{k}={v}")?;
        }
        Ok(())
    }
}

/// Resolves an identifier to a bundled algorithm.
pub fn resolve(text: &str) -> Result<LocalAlgorithm, ZooError> {
    let id = AlgorithmId::parse(text)?;
    let algo = match id.name.as_str() {
        "greedy" | "po-greedy" | "oi-greedy" | "id-greedy" | "chain:ec-po-oi" | "chain:ec-po" => {
            id.check_keys(&["k"])?;
            let k = id.palette()?;
            match id.name.as_str() {
                "greedy" => greedy_by_color(k),
                "po-greedy" => po_greedy(k),
                "oi-greedy" => oi_greedy(k),
                "id-greedy" => id_greedy(k),
                "chain:ec-po-oi" => chain_ec_po_oi(k),
                _ => chain_ec_po(k),
            }
        }
        "uniform" => {
            id.check_keys(&["d"])?;
            let d = id.get("d")?;
            if d == 0 || d > u32::MAX as u64 {
                return Err(ZooError::BadParameter {
                    id: text.into(),
                    reason: "d must be positive".into(),
                });
            }
            uniform_regular(d as u32)
        }
        "trunc:greedy" => {
            id.check_keys(&["k", "t"])?;
            truncate(id.palette()?, id.get("t")? as usize)?
        }
        "zero" => {
            id.check_keys(&[])?;
            zeros()
        }
        _ => return Err(ZooError::Unknown(text.into())),
    };
    Ok(algo)
}

/// Resolves a binary algorithm: `parity`, `const:0`, `const:1`, or
/// `sat:<id>` for the saturation indicator of an ID algorithm.
pub fn resolve_binary(text: &str) -> Result<BinaryAlgorithm, ZooError> {
    match text {
        "parity" => Ok(parity()),
        "const:0" => Ok(constant(false)),
        "const:1" => Ok(constant(true)),
        _ => match text.strip_prefix("sat:") {
            Some(inner) => {
                let a = resolve(inner)?;
                saturation_indicator(&a).map_err(|_| ZooError::BadParameter {
                    id: text.into(),
                    reason: format!("{inner} is not an ID algorithm"),
                })
            }
            None => Err(ZooError::Unknown(text.into())),
        },
    }
}

/// Sum of an output's weights equals one.
pub fn saturates(out: &LocalOutput) -> bool {
    out.total().is_one()
}
