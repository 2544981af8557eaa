//! Single-linkage forests over weighted interaction graphs and the two
//! mask-selection strategies built on them.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::structure::InteractionGraph;

#[derive(Clone, Debug, PartialEq)]
pub struct LinkageNode {
    /// Sorted variable indices.
    pub variables: Vec<usize>,
    pub children: Option<Box<(LinkageNode, LinkageNode)>>,
    /// Weight at which the node was formed; `+∞` for leaves.
    pub merge_strength: f64,
}

impl LinkageNode {
    fn leaf(v: usize) -> Self {
        Self {
            variables: vec![v],
            children: None,
            merge_strength: f64::INFINITY,
        }
    }

    fn join(a: LinkageNode, b: LinkageNode, strength: f64) -> Self {
        let mut variables = Vec::with_capacity(a.variables.len() + b.variables.len());
        variables.extend_from_slice(&a.variables);
        variables.extend_from_slice(&b.variables);
        variables.sort_unstable();
        Self {
            variables,
            children: Some(Box::new((a, b))),
            merge_strength: strength,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn size(&self) -> usize {
        self.variables.len()
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, out: &mut Vec<&'a LinkageNode>) {
        out.push(self);
        if let Some(ch) = &self.children {
            ch.0.visit(out);
            ch.1.visit(out);
        }
    }

    fn dump_into(&self, depth: usize, out: &mut String) {
        let vars: Vec<String> = self.variables.iter().map(|v| (v + 1).to_string()).collect();
        let _ = write!(out, "{}{{{}}}", "  ".repeat(depth), vars.join(","));
        if self.is_leaf() {
            out.push('\n');
        } else {
            let _ = writeln!(out, " @ {}", self.merge_strength);
        }
        if let Some(ch) = &self.children {
            ch.0.dump_into(depth + 1, out);
            ch.1.dump_into(depth + 1, out);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinkageForest {
    pub trees: Vec<LinkageNode>,
    /// Sorted variables the forest was built over.
    pub universe: Vec<usize>,
}

impl LinkageForest {
    pub fn empty() -> Self {
        Self {
            trees: Vec::new(),
            universe: Vec::new(),
        }
    }

    pub fn nodes(&self) -> Vec<&LinkageNode> {
        let mut out = Vec::new();
        for t in &self.trees {
            t.visit(&mut out);
        }
        out
    }

    /// Indented text rendering with 1-based variables.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for t in &self.trees {
            t.dump_into(0, &mut out);
        }
        out
    }

    fn is_useful(&self, mask: &[usize]) -> bool {
        mask.len() > 1 && mask.len() != self.universe.len()
    }
}

/// Single-linkage agglomerative clustering of `universe` under the weights
/// of `w`. Clusters joined by no positive weight stay in separate trees.
pub fn build_forest(w: &InteractionGraph, universe: &[usize]) -> LinkageForest {
    let mut vars = universe.to_vec();
    vars.sort_unstable();
    vars.dedup();
    let m = vars.len();
    let mut local = vec![0.0; m * m];
    for a in 0..m {
        for b in 0..m {
            local[a * m + b] = w.weight(vars[a], vars[b]);
        }
    }
    build_forest_dense(&vars, local)
}

/// Clustering over `vars` (sorted) with a dense symmetric `m × m` weight
/// matrix in the same order.
///
/// Each step merges the pair of clusters with the largest single-linkage
/// strength (maximum pairwise weight); among equal strengths the pair
/// whose smallest variables are lexicographically smallest wins.
pub fn build_forest_dense(vars: &[usize], mut strength: Vec<f64>) -> LinkageForest {
    let m = vars.len();
    debug_assert_eq!(strength.len(), m * m);
    debug_assert!(vars.windows(2).all(|p| p[0] < p[1]));
    let mut nodes: Vec<Option<LinkageNode>> = vars.iter().map(|&v| Some(LinkageNode::leaf(v))).collect();
    // slot i's smallest variable is vars[i] for as long as slot i is alive,
    // because merges always keep the lower slot
    let mut active: Vec<usize> = (0..m).collect();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for (ai, &i) in active.iter().enumerate() {
            let row = &strength[i * m..(i + 1) * m];
            for &j in &active[ai + 1..] {
                let s = row[j];
                if s > 0.0 && best.is_none_or(|(bs, _, _)| s > bs) {
                    best = Some((s, i, j));
                }
            }
        }
        let Some((s, i, j)) = best else { break };
        let a = nodes[i].take().expect("active slot");
        let b = nodes[j].take().expect("active slot");
        nodes[i] = Some(LinkageNode::join(a, b, s));
        for k in 0..m {
            let v = strength[i * m + k].max(strength[j * m + k]);
            strength[i * m + k] = v;
            strength[k * m + i] = v;
        }
        active.retain(|&k| k != j);
    }
    LinkageForest {
        trees: active
            .into_iter()
            .map(|i| nodes[i].take().expect("active slot"))
            .collect(),
        universe: vars.to_vec(),
    }
}

/// Roots (only when there are several trees) and the children of every
/// root. Children come first, larger child first; masks of size one and
/// the full universe are dropped.
pub fn masks_lttop(f: &LinkageForest) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for root in &f.trees {
        if let Some(ch) = &root.children {
            let (a, b) = (&ch.0, &ch.1);
            let (first, second) = if b.size() > a.size() { (b, a) } else { (a, b) };
            for node in [first, second] {
                if f.is_useful(&node.variables) {
                    out.push(node.variables.clone());
                }
            }
        }
    }
    if f.trees.len() > 1 {
        for root in &f.trees {
            if f.is_useful(&root.variables) {
                out.push(root.variables.clone());
            }
        }
    }
    out
}

/// Every node except size-one masks and the full universe, shortest first,
/// equal sizes in random order.
pub fn masks_lbot<R: Rng + ?Sized>(f: &LinkageForest, rng: &mut R) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = f
        .nodes()
        .into_iter()
        .filter(|n| f.is_useful(&n.variables))
        .map(|n| n.variables.clone())
        .collect();
    out.shuffle(rng);
    out.sort_by_key(|m| m.len());
    out
}

/// Linkage-tree family of subsets for optimal mixing: every node,
/// singletons included, except the full universe; shortest first, equal
/// sizes in random order.
pub fn masks_fos<R: Rng + ?Sized>(f: &LinkageForest, rng: &mut R) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = f
        .nodes()
        .into_iter()
        .filter(|n| n.variables.len() < f.universe.len())
        .map(|n| n.variables.clone())
        .collect();
    out.shuffle(rng);
    out.sort_by_key(|m| m.len());
    out
}
