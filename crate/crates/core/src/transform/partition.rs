//! Quadtree of transform sizes inside one superblock.

use rand::Rng;

pub const SB_SIZE: usize = 32;
pub const MIN_TX_SIZE: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionNode {
    Leaf,
    /// Quadrants in top-left, top-right, bottom-left, bottom-right order.
    Split(Box<[PartitionNode; 4]>),
}

impl PartitionNode {
    pub fn split(tl: PartitionNode, tr: PartitionNode, bl: PartitionNode, br: PartitionNode) -> Self {
        PartitionNode::Split(Box::new([tl, tr, bl, br]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionTree {
    pub sb_size: usize,
    pub root: PartitionNode,
}

/// A leaf transform block position within the superblock.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeafBlock {
    pub x: usize,
    pub y: usize,
    pub size: usize,
}

impl PartitionTree {
    pub fn unsplit(sb_size: usize) -> Self {
        PartitionTree { sb_size, root: PartitionNode::Leaf }
    }

    /// True when every leaf is at least `MIN_TX_SIZE` and the superblock size
    /// is a power of two.
    pub fn is_valid(&self) -> bool {
        self.sb_size.is_power_of_two()
            && self.sb_size >= MIN_TX_SIZE
            && node_valid(&self.root, self.sb_size)
    }

    /// Leaves in the recursive TL, TR, BL, BR coding order.
    pub fn leaves(&self) -> Vec<LeafBlock> {
        let mut out = Vec::new();
        collect_leaves(&self.root, 0, 0, self.sb_size, &mut out);
        out
    }

    pub fn random<R: Rng>(sb_size: usize, split_prob: f64, rng: &mut R) -> Self {
        PartitionTree { sb_size, root: random_node(sb_size, split_prob, rng) }
    }

    /// Enumerates every legal partition tree for the given superblock size.
    /// Tractable for sizes up to 16 (17 trees); 32 would produce 83,522.
    pub fn enumerate_all(sb_size: usize) -> Vec<PartitionTree> {
        enumerate_nodes(sb_size)
            .into_iter()
            .map(|root| PartitionTree { sb_size, root })
            .collect()
    }

    /// Number of legal partition trees for a block of the given size:
    /// f(4) = 1, f(2n) = 1 + f(n)^4.
    pub fn count_trees(size: usize) -> u128 {
        if size <= MIN_TX_SIZE {
            1
        } else {
            let sub = Self::count_trees(size / 2);
            1 + sub * sub * sub * sub
        }
    }
}

fn node_valid(node: &PartitionNode, size: usize) -> bool {
    match node {
        PartitionNode::Leaf => size >= MIN_TX_SIZE,
        PartitionNode::Split(children) => {
            size > MIN_TX_SIZE && children.iter().all(|c| node_valid(c, size / 2))
        }
    }
}

fn collect_leaves(node: &PartitionNode, x: usize, y: usize, size: usize, out: &mut Vec<LeafBlock>) {
    match node {
        PartitionNode::Leaf => out.push(LeafBlock { x, y, size }),
        PartitionNode::Split(children) => {
            let h = size / 2;
            collect_leaves(&children[0], x, y, h, out);
            collect_leaves(&children[1], x + h, y, h, out);
            collect_leaves(&children[2], x, y + h, h, out);
            collect_leaves(&children[3], x + h, y + h, h, out);
        }
    }
}

fn random_node<R: Rng>(size: usize, split_prob: f64, rng: &mut R) -> PartitionNode {
    if size > MIN_TX_SIZE && rng.gen_bool(split_prob) {
        PartitionNode::Split(Box::new([
            random_node(size / 2, split_prob, rng),
            random_node(size / 2, split_prob, rng),
            random_node(size / 2, split_prob, rng),
            random_node(size / 2, split_prob, rng),
        ]))
    } else {
        PartitionNode::Leaf
    }
}

fn enumerate_nodes(size: usize) -> Vec<PartitionNode> {
    let mut out = vec![PartitionNode::Leaf];
    if size > MIN_TX_SIZE {
        let subs = enumerate_nodes(size / 2);
        for a in &subs {
            for b in &subs {
                for c in &subs {
                    for d in &subs {
                        out.push(PartitionNode::Split(Box::new([
                            a.clone(),
                            b.clone(),
                            c.clone(),
                            d.clone(),
                        ])));
                    }
                }
            }
        }
    }
    out
}
