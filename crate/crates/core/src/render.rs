//! Filtrations drawn as trees.
//!
//! Each `(time, block)` pair is a node; a node's parent is the block one level
//! earlier that contains it. With a stopping time, nodes carry the value of
//! `X^τ` on their block, the first zero along each path is marked as stopped
//! and everything after it as dashed. The stopped nodes are exactly the atoms
//! of `F_τ`.
//!
//! The ASCII layout prints one row per outcome, in depth-first leaf order:
//!
//! ```text
//! 0     1     2     3    tau  omega
//! (1)---[0]...(0)...(0)    1  w1
//!    |     +..(0)...(0)    1  w2
//! ```
//!
//! `(1)` is alive, `[0]` stopped, `(0)` after stopping, `(?)` a block on which
//! `X^τ` is not constant, `( )` a node with no stopping time given. Solid
//! connectors are `---`, connectors after stopping are `...`, and `+` starts a
//! branch below its parent's first row.

use std::fmt::Write as _;

use crate::events::Event;
use crate::filtration::{Filtration, StoppingTime};
use crate::time::{Time, TimeScalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    /// No stopping time supplied.
    Plain,
    /// `X^τ = 1` on the block.
    Alive,
    /// First zero on the path.
    Stopped,
    /// Zero after an earlier zero.
    AfterStop,
    /// `X^τ` takes both values on the block.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreeNode<T> {
    pub layer: usize,
    pub time: Time<T>,
    pub block: Event,
    pub parent: Option<usize>,
    pub kind: NodeKind,
}

impl<T> TreeNode<T> {
    fn label(&self) -> &'static str {
        match self.kind {
            NodeKind::Plain => " ",
            NodeKind::Alive => "1",
            NodeKind::Stopped | NodeKind::AfterStop => "0",
            NodeKind::Mixed => "?",
        }
    }

    fn marker(&self) -> String {
        match self.kind {
            NodeKind::Stopped => format!("[{}]", self.label()),
            _ => format!("({})", self.label()),
        }
    }

    fn zero(&self) -> bool {
        matches!(self.kind, NodeKind::Stopped | NodeKind::AfterStop)
    }
}

/// Tree layers: one per time point, plus an `∞` layer when the terminal
/// partition is finer than the last level or `τ` takes the value `∞`.
fn layers<'a, T: TimeScalar>(
    f: &'a Filtration<T>,
    tau: Option<&StoppingTime<T>>,
) -> Vec<(Time<T>, &'a crate::events::Partition)> {
    let mut out: Vec<_> = f
        .timed_levels()
        .map(|(t, p)| (Time::Finite(t.clone()), p))
        .collect();
    let last = f.levels().last().expect("at least one level");
    let reaches_infinity = tau.is_some_and(|tau| tau.values().iter().any(Time::is_infinite));
    if f.terminal() != last || reaches_infinity {
        out.push((Time::Infinity, f.terminal()));
    }
    out
}

/// All tree nodes, layer by layer, blocks in canonical order.
pub fn tree_nodes<T: TimeScalar>(
    f: &Filtration<T>,
    tau: Option<&StoppingTime<T>>,
) -> Vec<TreeNode<T>> {
    let mut nodes: Vec<TreeNode<T>> = Vec::new();
    let mut previous: Vec<usize> = Vec::new();
    for (layer, (time, partition)) in layers(f, tau).into_iter().enumerate() {
        let mut current = Vec::with_capacity(partition.num_blocks());
        for block in partition.blocks() {
            let first = block.min_index().expect("blocks are nonempty");
            let parent = previous
                .iter()
                .copied()
                .find(|&p| nodes[p].block.contains(first));
            let kind = match tau {
                None => NodeKind::Plain,
                Some(tau) => {
                    let alive = tau.after(&time);
                    if block.is_subset(&alive) {
                        NodeKind::Alive
                    } else if !block.intersects(&alive) {
                        match parent {
                            Some(p) if nodes[p].zero() => NodeKind::AfterStop,
                            _ => NodeKind::Stopped,
                        }
                    } else {
                        NodeKind::Mixed
                    }
                }
            };
            current.push(nodes.len());
            nodes.push(TreeNode {
                layer,
                time: time.clone(),
                block: block.clone(),
                parent,
                kind,
            });
        }
        previous = current;
    }
    nodes
}

/// Outcomes in depth-first leaf order, children visited in canonical order.
fn row_order<T>(nodes: &[TreeNode<T>], n_layers: usize) -> Vec<usize> {
    fn visit<T>(nodes: &[TreeNode<T>], node: usize, last: usize, out: &mut Vec<usize>) {
        if nodes[node].layer == last {
            out.extend(nodes[node].block.iter());
            return;
        }
        for child in (0..nodes.len()).filter(|&c| nodes[c].parent == Some(node)) {
            visit(nodes, child, last, out);
        }
    }
    let mut out = Vec::new();
    for root in (0..nodes.len()).filter(|&i| nodes[i].layer == 0) {
        visit(nodes, root, n_layers - 1, &mut out);
    }
    out
}

pub fn render_ascii<T: TimeScalar>(f: &Filtration<T>, tau: Option<&StoppingTime<T>>) -> String {
    let nodes = tree_nodes(f, tau);
    let n_layers = nodes.iter().map(|n| n.layer).max().map_or(0, |m| m + 1);
    let rows = row_order(&nodes, n_layers);
    let position: Vec<usize> = {
        let mut pos = vec![0; f.len()];
        for (r, &w) in rows.iter().enumerate() {
            pos[w] = r;
        }
        pos
    };
    let first_row = |node: usize| -> usize {
        nodes[node]
            .block
            .iter()
            .map(|w| position[w])
            .min()
            .expect("blocks are nonempty")
    };
    let node_of = |layer: usize, outcome: usize| -> usize {
        nodes
            .iter()
            .position(|n| n.layer == layer && n.block.contains(outcome))
            .expect("every layer covers every outcome")
    };

    let tau_text: Vec<String> = match tau {
        Some(tau) => (0..f.len()).map(|w| tau.value(w).to_string()).collect(),
        None => Vec::new(),
    };
    let tau_width = tau_text.iter().map(String::len).max().unwrap_or(0).max(3);

    let mut out = String::new();
    let mut header = String::new();
    let times: Vec<Time<T>> = (0..n_layers)
        .map(|l| {
            nodes
                .iter()
                .find(|n| n.layer == l)
                .expect("layer")
                .time
                .clone()
        })
        .collect();
    for t in &times {
        let _ = write!(header, "{:<6}", t.to_string());
    }
    let tree_width = 6 * n_layers - 3;
    let mut header = format!("{:<width$}", header.trim_end(), width = tree_width);
    if tau.is_some() {
        let _ = write!(header, "  {:>tau_width$}", "tau");
    }
    header.push_str("  omega");
    out.push_str(header.trim_end());
    out.push('\n');

    for (r, &w) in rows.iter().enumerate() {
        let mut line = String::new();
        for layer in 0..n_layers {
            let node = node_of(layer, w);
            let starts_here = first_row(node) == r;
            if layer > 0 {
                let parent = nodes[node].parent.expect("non-root nodes have parents");
                let dashed = nodes[parent].zero();
                let connector = if starts_here {
                    match (first_row(parent) == r, dashed) {
                        (true, false) => "---",
                        (true, true) => "...",
                        (false, false) => "+--",
                        (false, true) => "+..",
                    }
                } else {
                    let later_sibling = (0..nodes.len())
                        .any(|c| nodes[c].parent == Some(parent) && c != node && first_row(c) > r);
                    if later_sibling {
                        "|  "
                    } else {
                        "   "
                    }
                };
                line.push_str(connector);
            }
            if starts_here {
                line.push_str(&nodes[node].marker());
            } else {
                line.push_str("   ");
            }
        }
        if let Some(text) = tau_text.get(w) {
            let _ = write!(line, "  {text:>tau_width$}");
        }
        let _ = write!(line, "  {}", f.space().label(w));
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz `digraph` text; nodes are named `n<layer>_<block index>`.
pub fn render_dot<T: TimeScalar>(f: &Filtration<T>, tau: Option<&StoppingTime<T>>) -> String {
    let nodes = tree_nodes(f, tau);
    let ids: Vec<String> = {
        let mut counters = Vec::new();
        nodes
            .iter()
            .map(|n| {
                if counters.len() <= n.layer {
                    counters.resize(n.layer + 1, 0);
                }
                let id = format!("n{}_{}", n.layer, counters[n.layer]);
                counters[n.layer] += 1;
                id
            })
            .collect()
    };
    let mut out = String::from("digraph filtration {\n  rankdir=LR;\n  node [shape=circle];\n");
    for (node, id) in nodes.iter().zip(&ids) {
        let block = f.space().show_event(&node.block);
        let label = match node.kind {
            NodeKind::Plain => block.clone(),
            _ => node.label().to_string(),
        };
        let mut attrs = vec![
            format!("label=\"{}\"", dot_escape(&label)),
            format!("tooltip=\"t={} {}\"", node.time, dot_escape(&block)),
        ];
        match node.kind {
            NodeKind::Stopped => attrs.push("shape=box".into()),
            NodeKind::AfterStop => attrs.push("style=dashed".into()),
            _ => {}
        }
        let _ = writeln!(out, "  {id} [{}];", attrs.join(", "));
    }
    for (node, id) in nodes.iter().zip(&ids) {
        if let Some(p) = node.parent {
            let style = if nodes[p].zero() {
                " [style=dashed]"
            } else {
                ""
            };
            let _ = writeln!(out, "  {} -> {id}{style};", ids[p]);
        }
    }
    out.push_str("}\n");
    out
}
