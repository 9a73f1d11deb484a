//! Haar DC hierarchy: 2x2 WHT merging of leaf-block DC coefficients up to
//! the superblock root.

use crate::transform::partition::{PartitionNode, PartitionTree};
use crate::transform::wht::{wht2x2_real_forward, wht2x2_real_inverse};

/// The merged DC hierarchy of one superblock: the root DC plus three detail
/// values per internal quadtree node, stored in pre-order (node before its
/// TL, TR, BL, BR subtrees).
///
/// The merge doubles the DC basis magnitude per level, so leaf DCs that are
/// dyadic rationals round-trip exactly through `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DcTree {
    pub root: f64,
    pub details: Vec<[f64; 3]>,
}

/// Merges one DC per leaf (in the tree's leaf order) up the partition tree.
pub fn haar_dc_merge(tree: &PartitionTree, leaf_dcs: &[f64]) -> DcTree {
    fn rec(node: &PartitionNode, dcs: &mut std::slice::Iter<'_, f64>, out: &mut Vec<[f64; 3]>) -> f64 {
        match node {
            PartitionNode::Leaf => *dcs.next().expect("fewer DCs than leaves"),
            PartitionNode::Split(children) => {
                // Reserve this node's pre-order slot before descending.
                let slot = out.len();
                out.push([0.0; 3]);
                let a = rec(&children[0], dcs, out);
                let b = rec(&children[1], dcs, out);
                let c = rec(&children[2], dcs, out);
                let d = rec(&children[3], dcs, out);
                let (p, db, dc, dd) = wht2x2_real_forward(a, b, c, d);
                out[slot] = [db, dc, dd];
                p
            }
        }
    }
    let mut details = Vec::new();
    let mut it = leaf_dcs.iter();
    let root = rec(&tree.root, &mut it, &mut details);
    assert!(it.next().is_none(), "more DCs than leaves");
    DcTree { root, details }
}

/// Exact inverse of [`haar_dc_merge`]: recovers the leaf DCs in leaf order.
pub fn haar_dc_expand(tree: &PartitionTree, dc: &DcTree) -> Vec<f64> {
    fn rec(
        node: &PartitionNode,
        value: f64,
        details: &mut std::slice::Iter<'_, [f64; 3]>,
        out: &mut Vec<f64>,
    ) {
        match node {
            PartitionNode::Leaf => out.push(value),
            PartitionNode::Split(children) => {
                let [db, dcv, dd] = *details.next().expect("fewer details than internal nodes");
                let (a, b, c, d) = wht2x2_real_inverse(value, db, dcv, dd);
                rec(&children[0], a, details, out);
                rec(&children[1], b, details, out);
                rec(&children[2], c, details, out);
                rec(&children[3], d, details, out);
            }
        }
    }
    let mut out = Vec::new();
    let mut it = dc.details.iter();
    rec(&tree.root, dc.root, &mut it, &mut out);
    assert!(it.next().is_none(), "more details than internal nodes");
    out
}
