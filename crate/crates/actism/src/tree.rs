//! AND/OR attack trees: structure validation, minimal-cut-set (attack path)
//! enumeration, and feasibility propagation from CVSS-scored leaves.

use crate::cvss::Score;
use crate::model::SecurityModel;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    AND,
    OR,
}

/// A tree node: either a gate over child nodes or a leaf, optionally
/// referencing a threat. Unreferenced leaves are structurally fine but
/// block feasibility scoring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Gate {
        label: String,
        gate: GateKind,
        children: Vec<String>,
    },
    Leaf {
        label: String,
        threat: Option<u32>,
    },
}

impl Node {
    pub fn label(&self) -> &str {
        match self {
            Node::Gate { label, .. } | Node::Leaf { label, .. } => label,
        }
    }
}

// On disk a node is a flat object; gate nodes carry "gate" and "children",
// leaves optionally carry "threat".
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRepr {
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gate: Option<GateKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    children: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threat: Option<u32>,
}

impl Serialize for Node {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = match self {
            Node::Gate { label, gate, children } => NodeRepr {
                label: label.clone(),
                gate: Some(*gate),
                children: Some(children.clone()),
                threat: None,
            },
            Node::Leaf { label, threat } => NodeRepr {
                label: label.clone(),
                gate: None,
                children: None,
                threat: *threat,
            },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Node {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = NodeRepr::deserialize(deserializer)?;
        match (repr.gate, repr.children, repr.threat) {
            (Some(gate), Some(children), None) => Ok(Node::Gate {
                label: repr.label,
                gate,
                children,
            }),
            (None, None, threat) => Ok(Node::Leaf {
                label: repr.label,
                threat,
            }),
            _ => Err(serde::de::Error::custom(
                "node must be a gate (gate + children) or a leaf (optional threat)",
            )),
        }
    }
}

/// An AND/OR goal tree for one attacker persona.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackTree {
    pub id: String,
    pub root: String,
    pub nodes: BTreeMap<String, Node>,
}

/// A minimal cut set of leaves: activating exactly these leaves satisfies
/// the root, and no proper subset does.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct AttackPath {
    pub leaves: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("tree {tree}: root node {root:?} does not exist")]
    MissingRoot { tree: String, root: String },
    #[error("tree {tree}: node {node:?} references unknown child {child:?}")]
    UnknownChild { tree: String, node: String, child: String },
    #[error("tree {tree}: gate node {node:?} has no children")]
    EmptyGate { tree: String, node: String },
    #[error("tree {tree}: node {node:?} has {parents} parents, expected exactly one")]
    MultipleParents { tree: String, node: String, parents: usize },
    #[error("tree {tree}: node {node:?} is not reachable from the root")]
    Unreachable { tree: String, node: String },
    #[error("tree {tree}: root node {root:?} has a parent")]
    RootHasParent { tree: String, root: String },
    #[error("tree {tree}: leaf {leaf:?} carries no threat reference, cannot score")]
    UnscoredLeaf { tree: String, leaf: String },
    #[error("tree {tree}: leaf {leaf:?} references unknown threat {threat}")]
    UnknownThreat { tree: String, leaf: String, threat: u32 },
    #[error("empty attack path cannot be scored")]
    EmptyPath,
    #[error("tree {tree}: path leaf {leaf:?} is not a leaf node of this tree")]
    NotALeaf { tree: String, leaf: String },
}

/// Checks the tree invariants: the root exists and has no parent, every
/// other node has exactly one parent, gates are non-empty, children
/// resolve, and every node is reachable from the root.
pub fn validate_tree(tree: &AttackTree) -> Result<(), TreeError> {
    if !tree.nodes.contains_key(&tree.root) {
        return Err(TreeError::MissingRoot {
            tree: tree.id.clone(),
            root: tree.root.clone(),
        });
    }
    let mut parent_count: BTreeMap<&str, usize> = BTreeMap::new();
    for (id, node) in &tree.nodes {
        if let Node::Gate { gate: _, children, .. } = node {
            if children.is_empty() {
                return Err(TreeError::EmptyGate {
                    tree: tree.id.clone(),
                    node: id.clone(),
                });
            }
            for child in children {
                if !tree.nodes.contains_key(child) {
                    return Err(TreeError::UnknownChild {
                        tree: tree.id.clone(),
                        node: id.clone(),
                        child: child.clone(),
                    });
                }
                *parent_count.entry(child.as_str()).or_insert(0) += 1;
            }
        }
    }
    if parent_count.get(tree.root.as_str()).copied().unwrap_or(0) > 0 {
        return Err(TreeError::RootHasParent {
            tree: tree.id.clone(),
            root: tree.root.clone(),
        });
    }
    for id in tree.nodes.keys() {
        if *id == tree.root {
            continue;
        }
        let parents = parent_count.get(id.as_str()).copied().unwrap_or(0);
        if parents != 1 {
            if parents == 0 {
                return Err(TreeError::Unreachable {
                    tree: tree.id.clone(),
                    node: id.clone(),
                });
            }
            return Err(TreeError::MultipleParents {
                tree: tree.id.clone(),
                node: id.clone(),
                parents,
            });
        }
    }
    // Unique parents rule out in-tree cycles, but a breadth-first sweep
    // still guards against components detached from the root.
    let mut seen: HashSet<&str> = HashSet::new();
    let mut queue: VecDeque<&str> = VecDeque::new();
    queue.push_back(tree.root.as_str());
    seen.insert(tree.root.as_str());
    while let Some(id) = queue.pop_front() {
        if let Some(Node::Gate { children, .. }) = tree.nodes.get(id) {
            for child in children {
                if seen.insert(child.as_str()) {
                    queue.push_back(child.as_str());
                }
            }
        }
    }
    for id in tree.nodes.keys() {
        if !seen.contains(id.as_str()) {
            return Err(TreeError::Unreachable {
                tree: tree.id.clone(),
                node: id.clone(),
            });
        }
    }
    Ok(())
}

/// Enumerates the complete family of minimal cut sets. OR gates union the
/// children's path families; AND gates take one path per child and union
/// the leaf sets. Results are minimised, deduplicated and sorted
/// lexicographically by sorted leaf ids.
pub fn enumerate_paths(tree: &AttackTree) -> Result<Vec<AttackPath>, TreeError> {
    validate_tree(tree)?;
    let raw = paths_of(tree, &tree.root);
    Ok(minimize(raw))
}

fn paths_of(tree: &AttackTree, node_id: &str) -> Vec<BTreeSet<String>> {
    match &tree.nodes[node_id] {
        Node::Leaf { .. } => vec![BTreeSet::from([node_id.to_string()])],
        Node::Gate { gate: GateKind::OR, children, .. } => children
            .iter()
            .flat_map(|child| paths_of(tree, child))
            .collect(),
        Node::Gate { gate: GateKind::AND, children, .. } => {
            let mut acc: Vec<BTreeSet<String>> = vec![BTreeSet::new()];
            for child in children {
                let child_paths = paths_of(tree, child);
                let mut next = Vec::with_capacity(acc.len() * child_paths.len());
                for partial in &acc {
                    for cp in &child_paths {
                        let mut merged = partial.clone();
                        merged.extend(cp.iter().cloned());
                        next.push(merged);
                    }
                }
                acc = next;
            }
            acc
        }
    }
}

fn minimize(mut sets: Vec<BTreeSet<String>>) -> Vec<AttackPath> {
    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    let mut kept: Vec<BTreeSet<String>> = Vec::new();
    for set in sets {
        if !kept.iter().any(|k| k.is_subset(&set)) {
            kept.push(set);
        }
    }
    kept.sort();
    kept.into_iter().map(|leaves| AttackPath { leaves }).collect()
}

/// Weakest-link feasibility of one path: the minimum of the leaves' CVSS
/// temporal scores.
pub fn path_feasibility(
    tree: &AttackTree,
    path: &AttackPath,
    model: &SecurityModel,
) -> Result<Score, TreeError> {
    if path.leaves.is_empty() {
        return Err(TreeError::EmptyPath);
    }
    let mut min: Option<Score> = None;
    for leaf_id in &path.leaves {
        let node = tree.nodes.get(leaf_id).ok_or_else(|| TreeError::NotALeaf {
            tree: tree.id.clone(),
            leaf: leaf_id.clone(),
        })?;
        let threat_id = match node {
            Node::Leaf { threat: Some(t), .. } => *t,
            Node::Leaf { threat: None, .. } => {
                return Err(TreeError::UnscoredLeaf {
                    tree: tree.id.clone(),
                    leaf: leaf_id.clone(),
                })
            }
            Node::Gate { .. } => {
                return Err(TreeError::NotALeaf {
                    tree: tree.id.clone(),
                    leaf: leaf_id.clone(),
                })
            }
        };
        let threat = model.threat_by_id(threat_id).map_err(|_| TreeError::UnknownThreat {
            tree: tree.id.clone(),
            leaf: leaf_id.clone(),
            threat: threat_id,
        })?;
        let score = crate::cvss::temporal_score(&threat.metrics);
        min = Some(match min {
            Some(current) => current.min(score),
            None => score,
        });
    }
    Ok(min.expect("non-empty path"))
}

/// Feasibility of the attacker's goal and the path realising it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoalFeasibility {
    pub score: Score,
    pub best_path: AttackPath,
}

/// Easiest-path rule: the maximum path feasibility over all minimal cut
/// sets, ties broken by the lexicographically smallest path.
pub fn goal_feasibility(
    tree: &AttackTree,
    model: &SecurityModel,
) -> Result<GoalFeasibility, TreeError> {
    let paths = enumerate_paths(tree)?;
    let mut best: Option<GoalFeasibility> = None;
    for path in paths {
        let score = path_feasibility(tree, &path, model)?;
        let better = match &best {
            None => true,
            Some(b) => score > b.score,
        };
        if better {
            best = Some(GoalFeasibility { score, best_path: path });
        }
    }
    best.ok_or(TreeError::EmptyPath)
}
