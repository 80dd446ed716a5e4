//! Per-block censuses, Lack of Computational Strength (LoCS) and Parent
//! Affinity (PA).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_rational::Ratio;

use crate::error::MetricsError;
use crate::sdg::{format_members, Chain, Sdg, VertexId, VertexKind};

pub type Rational = Ratio<u64>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockAnalysis {
    pub block_root: VertexId,
    pub members: BTreeSet<VertexId>,
    pub relays: BTreeSet<VertexId>,
    pub sinks: BTreeSet<VertexId>,
    pub exclusive_sources: BTreeSet<VertexId>,
    pub producers: BTreeSet<VertexId>,
    pub relay_share: BTreeMap<VertexId, BTreeSet<VertexId>>,
    pub non_relay_share: BTreeSet<VertexId>,
    pub incoming_chains: Vec<Chain>,
    pub outgoing_chains: Vec<Chain>,
}

impl BlockAnalysis {
    pub fn total_relay_share(&self) -> usize {
        self.relay_share.values().map(BTreeSet::len).sum()
    }

    /// Attribute / vertex set / count table.
    pub fn report(&self) -> String {
        let mut out = format!("block {}\n", self.block_root);
        let mut row = |name: &str, set: &BTreeSet<VertexId>| {
            let _ = writeln!(out, "{name:<18} {{{}}} {}", format_members(set), set.len());
        };
        row("members", &self.members);
        row("relays", &self.relays);
        row("sinks", &self.sinks);
        row("exclusive-sources", &self.exclusive_sources);
        row("producers", &self.producers);
        for (r, share) in &self.relay_share {
            row(&format!("relay-share({r})"), share);
        }
        row("non-relay-share", &self.non_relay_share);
        for (name, chains) in [("incoming-chain", &self.incoming_chains), ("outgoing-chain", &self.outgoing_chains)] {
            for c in chains {
                let path: Vec<String> = c.path.iter().map(ToString::to_string).collect();
                let _ = writeln!(out, "{name:<18} {} {}", path.join("->"), c.len());
            }
        }
        out
    }
}

/// Census of the control block rooted at primary control vertex `v` in the
/// current graph.
pub fn analyze_block(g: &Sdg, v: VertexId) -> Result<BlockAnalysis, MetricsError> {
    match g.kind(v) {
        None => return Err(MetricsError::NoSuchVertex(v)),
        Some(VertexKind::PrimaryControl) => {}
        Some(_) => return Err(MetricsError::NotPrimary(v)),
    }
    let members = g.control_block(v);
    let region = g.control_region(v);
    let inside = |x: &VertexId| members.contains(x);

    let relays: BTreeSet<VertexId> =
        members.iter().copied().filter(|&x| g.data_successors(x).iter().any(|y| !inside(y))).collect();
    let sinks = members
        .iter()
        .copied()
        .filter(|&x| x != v && g.data_in_degree(x) > 0 && g.data_out_degree(x) == 0)
        .collect();
    let exclusive_sources: BTreeSet<VertexId> = g
        .vertex_ids()
        .filter(|x| !inside(x))
        .filter(|&x| g.is_source_vertex(x) && g.control_region(x) == region)
        .filter(|&x| g.data_successors(x).iter().all(inside))
        .collect();
    let producers: BTreeSet<VertexId> = members
        .iter()
        .copied()
        .filter(|&x| g.data_out_degree(x) > 0)
        .chain(exclusive_sources.iter().copied())
        .collect();

    let reach: BTreeSet<VertexId> = members.union(&exclusive_sources).copied().collect();
    let mut relay_share = BTreeMap::new();
    for &r in &relays {
        let mut seen = BTreeSet::new();
        let mut stack = vec![r];
        while let Some(x) = stack.pop() {
            for &p in g.data_predecessors(x) {
                if reach.contains(&p) && seen.insert(p) {
                    stack.push(p);
                }
            }
        }
        let share: BTreeSet<VertexId> = seen.intersection(&producers).copied().filter(|&p| p != r).collect();
        relay_share.insert(r, share);
    }
    let shared: BTreeSet<VertexId> = relay_share.values().flatten().copied().collect();
    let non_relay_share = producers.difference(&shared).copied().collect();

    let mut incoming_chains = Vec::new();
    let mut outgoing_chains = Vec::new();
    let outside_ok = |x: VertexId| !inside(&x) && g.control_region(x) == region;
    for &t in &members {
        if g.data_in_degree(t) == 1 {
            let p = *g.data_predecessors(t).iter().next().unwrap();
            if outside_ok(p) && g.data_out_degree(p) == 1 {
                let mut path = vec![t, p];
                let mut cur = p;
                while g.data_in_degree(cur) == 1 {
                    let q = *g.data_predecessors(cur).iter().next().unwrap();
                    if !outside_ok(q) || g.data_out_degree(q) != 1 || path.contains(&q) {
                        break;
                    }
                    path.push(q);
                    cur = q;
                }
                path.reverse();
                incoming_chains.push(Chain { path });
            }
        }
        if g.data_out_degree(t) == 1 {
            let s = *g.data_successors(t).iter().next().unwrap();
            if outside_ok(s) && g.data_in_degree(s) == 1 {
                let mut path = vec![t, s];
                let mut cur = s;
                while g.data_out_degree(cur) == 1 {
                    let n = *g.data_successors(cur).iter().next().unwrap();
                    if !outside_ok(n) || g.data_in_degree(n) != 1 || path.contains(&n) {
                        break;
                    }
                    path.push(n);
                    cur = n;
                }
                outgoing_chains.push(Chain { path });
            }
        }
    }

    Ok(BlockAnalysis {
        block_root: v,
        members,
        relays,
        sinks,
        exclusive_sources,
        producers,
        relay_share,
        non_relay_share,
        incoming_chains,
        outgoing_chains,
    })
}

/// `#Relay / (#TotalRelayShare + #NonRelayShare)`, or `None` when the block
/// is not scored.
pub fn locs(a: &BlockAnalysis, no_relay_extract: bool) -> Option<Rational> {
    let numerator = match (a.relays.len(), no_relay_extract) {
        (0, false) => return None,
        (0, true) => 1,
        (n, _) => n,
    };
    let denominator = a.total_relay_share() + a.non_relay_share.len();
    (denominator > 0).then(|| Ratio::new(numerator as u64, denominator as u64))
}

/// Vertices of `p`'s block, other than `v`, with an outgoing data edge.
fn parent_data_nodes(g: &Sdg, p: VertexId, v: VertexId) -> BTreeSet<VertexId> {
    g.control_block(p).into_iter().filter(|&x| x != v && g.data_out_degree(x) > 0).collect()
}

fn touches(g: &Sdg, x: VertexId, v: VertexId) -> bool {
    g.has_data_edge(x, v) || g.has_data_edge(v, x)
}

/// `1 - IndependentNodes / ParentDataNodes` for contracted child `v` inside
/// the block of `p`; `None` when the parent has no data nodes.
pub fn parent_affinity(g: &Sdg, p: VertexId, v: VertexId) -> Option<Rational> {
    let nodes = parent_data_nodes(g, p, v);
    if nodes.is_empty() {
        return None;
    }
    let independent = nodes.iter().filter(|&&x| !touches(g, x, v)).count();
    Some(Ratio::from_integer(1) - Ratio::new(independent as u64, nodes.len() as u64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MergerCase {
    /// (i) parent has a relay of its own and every other computation feeds
    /// the child.
    DistinctRelayAllConnected,
    /// (ii) parent has a relay; some computations are unrelated to the child.
    DistinctRelayPartial,
    /// (iii) no parent relay; all (or no) computations feed the child.
    NoRelayAllConnectedOrEmpty,
    /// (iv) no parent relay; only some computations feed the child.
    NoRelayNoneOrAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MergeDecision {
    Merge,
    UsePa,
}

impl MergerCase {
    pub fn decision(self) -> MergeDecision {
        match self {
            MergerCase::DistinctRelayAllConnected | MergerCase::NoRelayAllConnectedOrEmpty => MergeDecision::Merge,
            MergerCase::DistinctRelayPartial | MergerCase::NoRelayNoneOrAll => MergeDecision::UsePa,
        }
    }

    pub fn numeral(self) -> &'static str {
        match self {
            MergerCase::DistinctRelayAllConnected => "i",
            MergerCase::DistinctRelayPartial => "ii",
            MergerCase::NoRelayAllConnectedOrEmpty => "iii",
            MergerCase::NoRelayNoneOrAll => "iv",
        }
    }
}

/// Classifies a parent/child pair after the child has been contracted.
pub fn merger_case(g: &Sdg, p: VertexId, v: VertexId) -> MergerCase {
    let block = g.control_block(p);
    let relays: BTreeSet<VertexId> = block
        .iter()
        .copied()
        .filter(|&x| x != v && g.data_successors(x).iter().any(|y| !block.contains(y)))
        .collect();
    let all_connected =
        parent_data_nodes(g, p, v).difference(&relays).all(|&x| touches(g, x, v));
    match (relays.is_empty(), all_connected) {
        (false, true) => MergerCase::DistinctRelayAllConnected,
        (false, false) => MergerCase::DistinctRelayPartial,
        (true, true) => MergerCase::NoRelayAllConnectedOrEmpty,
        (true, false) => MergerCase::NoRelayNoneOrAll,
    }
}

/// Strict `value < threshold`.
pub fn below(value: Rational, threshold: f64) -> bool {
    (*value.numer() as f64) < threshold * (*value.denom() as f64)
}

pub fn to_f64(value: Rational) -> f64 {
    *value.numer() as f64 / *value.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_ir;
    use crate::sdg::build_sdg;

    fn load(text: &str) -> Sdg {
        build_sdg(&parse_ir(text).unwrap()).unwrap()
    }

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    fn contract_block(g: &mut Sdg, v: VertexId) {
        while let Some(&c) = g.control_children(v).iter().next() {
            g.contract_edge_as(v, c, v).unwrap();
        }
    }

    #[test]
    fn census_block_nine() {
        let g = load(include_str!("../fixtures/census.ir"));
        let a = analyze_block(&g, 9).unwrap();
        assert_eq!(a.relays, set(&[13]));
        assert_eq!(a.sinks, set(&[14]));
        assert_eq!(a.exclusive_sources, set(&[4]));
        assert_eq!(a.producers, set(&[4, 10, 11, 12, 13]));
        assert_eq!(a.relay_share[&13], set(&[10, 11, 12]));
        assert_eq!(a.non_relay_share, set(&[4, 13]));
        let inc: Vec<Vec<usize>> = a.incoming_chains.iter().map(|c| c.path.clone()).collect();
        assert_eq!(inc, vec![vec![5, 6, 10], vec![7, 8, 11]]);
        let out: Vec<Vec<usize>> = a.outgoing_chains.iter().map(|c| c.path.clone()).collect();
        assert_eq!(out, vec![vec![13, 15, 16]]);
        assert_eq!(locs(&a, false), Some(Ratio::new(1, 5)));
    }

    #[test]
    fn parent_affinity_after_contraction() {
        let mut g = load(include_str!("../fixtures/census.ir"));
        contract_block(&mut g, 9);
        g.contract_edge(4, 9).unwrap();
        g.contract_edge_as(9, 15, 9).unwrap();
        g.contract_edge_as(9, 16, 9).unwrap();
        assert_eq!(parent_affinity(&g, 3, 9), Some(Ratio::new(2, 5)));
        assert_eq!(merger_case(&g, 3, 9), MergerCase::NoRelayNoneOrAll);
        assert_eq!(merger_case(&g, 3, 9).decision(), MergeDecision::UsePa);
    }

    #[test]
    fn fib_blocks() {
        let mut g = load(include_str!("../fixtures/fibo_prime.ir"));
        assert!(analyze_block(&g, 16).unwrap().relays.is_empty());
        contract_block(&mut g, 21);
        contract_block(&mut g, 19);
        let a15 = analyze_block(&g, 15).unwrap();
        assert_eq!(locs(&a15, false), Some(Ratio::new(1, 2)));
        contract_block(&mut g, 16);
        contract_block(&mut g, 15);
        g.contract_edge(14, 15).unwrap();
        let a8 = analyze_block(&g, 8).unwrap();
        assert_eq!(a8.relays, set(&[11]));
        assert_eq!(a8.exclusive_sources, set(&[6, 7]));
        assert_eq!(locs(&a8, false), Some(Ratio::new(1, 4)));
        assert!(matches!(analyze_block(&g, 5), Err(MetricsError::NotPrimary(5))));
    }

    #[test]
    fn relay_free_blocks() {
        let g = load("input x\nif x 1\ninvar\n");
        let a = analyze_block(&g, 1).unwrap();
        assert!(a.relays.is_empty());
        assert_eq!(a.producers, set(&[0]));
        assert_eq!(locs(&a, false), None);
        assert_eq!(locs(&a, true), Some(Ratio::new(1, 1)));

        let empty = load("if x 1\ninvar\n");
        let a = analyze_block(&empty, 0).unwrap();
        assert!(a.producers.is_empty());
        assert_eq!(locs(&a, true), None);
    }

    #[test]
    fn affinity_bounds() {
        // every parent data node feeds the child
        let mut g = load("if 2\nassign a\nloop a 1\noutput a\n");
        contract_block(&mut g, 2);
        assert_eq!(parent_affinity(&g, 0, 2), Some(Ratio::from_integer(1)));
        // none does
        let mut g = load("if 3\nassign a\nloop 1\ninvar\noutput a\n");
        contract_block(&mut g, 2);
        assert_eq!(parent_affinity(&g, 0, 2), Some(Ratio::from_integer(0)));
        // parent containing only the child
        let mut g = load("if 1\nloop 1\ninvar\n");
        contract_block(&mut g, 1);
        assert_eq!(parent_affinity(&g, 0, 1), None);
        assert_eq!(merger_case(&g, 0, 1), MergerCase::NoRelayAllConnectedOrEmpty);
    }

    #[test]
    fn distinct_relay_all_connected() {
        let mut g = load("if 4\nassign a\nloop a 1\nassign b a\nassign r\noutput b\noutput r\n");
        contract_block(&mut g, 2);
        assert_eq!(merger_case(&g, 0, 2), MergerCase::DistinctRelayAllConnected);
        assert_eq!(parent_affinity(&g, 0, 2), Some(Ratio::new(1, 2)));
    }

    #[test]
    fn strict_threshold() {
        assert!(below(Ratio::new(1, 4), 0.41));
        assert!(!below(Ratio::new(1, 2), 0.5));
        assert!(!below(Ratio::new(2, 5), 0.34));
    }
}
