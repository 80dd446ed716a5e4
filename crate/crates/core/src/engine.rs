//! Successive edge contraction. Control blocks are scored bottom-up; accepted
//! ones are collapsed and grown into extract-method opportunities.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::error::EngineError;
use crate::ir::IrProgram;
use crate::metrics::{analyze_block, below, locs, merger_case, parent_affinity, MergeDecision, MergerCase, Rational};
use crate::sdg::{build_sdg, format_members, Chain, Contraction, Sdg, VertexId, VertexKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentationConfig {
    pub locs_threshold: f64,
    pub pa_threshold: f64,
    pub no_relay_extract: bool,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig { locs_threshold: 0.41, pa_threshold: 0.34, no_relay_extract: false }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        for (name, v) in [("locs", self.locs_threshold), ("pa", self.pa_threshold)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(EngineError::Threshold { name, value: v });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseKind {
    Ccb,
    Esc,
    Sddc,
}

impl PhaseKind {
    pub fn name(self) -> &'static str {
        match self {
            PhaseKind::Ccb => "ccb",
            PhaseKind::Esc => "esc",
            PhaseKind::Sddc => "sddc",
        }
    }
}

/// One contraction activity applied to a single root vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub kind: PhaseKind,
    pub root: VertexId,
    /// IR indices merged into `root` by this phase.
    pub absorbed: BTreeSet<usize>,
    pub steps: Vec<Contraction>,
    /// Graph after the phase, when snapshots are enabled.
    pub snapshot: Option<Sdg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VariantKind {
    /// A long incoming chain left for the user.
    IncomingChain,
    /// A long outgoing chain left for the user.
    OutgoingChain,
    /// The enclosing primary block, not merged.
    WithParent,
    /// An opportunity found earlier and absorbed by this one.
    Nested,
}

impl VariantKind {
    pub fn name(self) -> &'static str {
        match self {
            VariantKind::IncomingChain => "incoming-chain",
            VariantKind::OutgoingChain => "outgoing-chain",
            VariantKind::WithParent => "with-parent",
            VariantKind::Nested => "nested",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [VariantKind::IncomingChain, VariantKind::OutgoingChain, VariantKind::WithParent, VariantKind::Nested]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

/// An alternative member set offered next to the chosen opportunity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variant {
    pub kind: VariantKind,
    pub members: BTreeSet<usize>,
}

/// Extract-method opportunity.
#[derive(Debug, Clone, PartialEq)]
pub struct Emo {
    /// Seg id of the extracted vertex.
    pub root: VertexId,
    /// The block whose acceptance started the extraction.
    pub block: VertexId,
    pub members: BTreeSet<usize>,
    pub span: (usize, usize),
    pub params: BTreeSet<String>,
    pub returns: BTreeSet<String>,
    /// LoCS of the accepted block.
    pub score: Rational,
    pub trace: Vec<Contraction>,
    pub variants: Vec<Variant>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Scored { block: VertexId, relays: usize, locs: Option<Rational>, accepted: bool },
    Deferred { block: VertexId, ancestor: VertexId },
    Collapsed { block: VertexId },
    Climb { child: VertexId, parent: VertexId, case: MergerCase, pa: Option<Rational>, merged: bool },
    Emitted { root: VertexId, members: BTreeSet<usize> },
    NotSegment { root: VertexId, members: BTreeSet<usize> },
    Superseded { outer: VertexId, inner: VertexId },
    Skipped { edge: (VertexId, VertexId), reason: String },
}

fn ratio_text(r: Option<Rational>) -> String {
    r.map_or("-".into(), |r| r.to_string())
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Scored { block, relays, locs, accepted } => write!(
                f,
                "block {block}: relays {relays} locs {} {}",
                ratio_text(*locs),
                if *accepted { "accepted" } else { "rejected" }
            ),
            Event::Deferred { block, ancestor } => write!(f, "block {block}: left for ancestor {ancestor}"),
            Event::Collapsed { block } => write!(f, "block {block}: collapsed"),
            Event::Climb { child, parent, case, pa, merged } => write!(
                f,
                "climb {child} -> {parent}: case {} pa {} {}",
                case.numeral(),
                ratio_text(*pa),
                if *merged { "merged" } else { "kept" }
            ),
            Event::Emitted { root, members } => write!(f, "emo {root}: {}", format_members(members)),
            Event::NotSegment { root, members } => {
                write!(f, "emo {root}: {} is not a segment of the original graph", format_members(members))
            }
            Event::Superseded { outer, inner } => write!(f, "emo {outer} absorbs emo {inner}"),
            Event::Skipped { edge, reason } => write!(f, "skip {} -> {}: {reason}", edge.0, edge.1),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    /// Final segment graph.
    pub graph: Sdg,
    /// Ranked opportunities.
    pub emos: Vec<Emo>,
    pub phases: Vec<Phase>,
    pub events: Vec<Event>,
}

impl Segmentation {
    /// Deterministic text log of every phase, contraction and decision.
    pub fn log(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let _ = writeln!(out, "{e}");
        }
        for (i, ph) in self.phases.iter().enumerate() {
            let _ = writeln!(out, "phase {} {} {} +{{{}}}", i + 1, ph.kind.name(), ph.root, format_members(&ph.absorbed));
            for c in &ph.steps {
                let _ = writeln!(out, "  contract {} -> {} label {}", c.edge.0, c.edge.1, c.label);
            }
        }
        out
    }
}

type Hook<'a> = dyn FnMut(&Sdg, &Contraction) + 'a;

struct Ctx<'h> {
    g: Sdg,
    /// Live vertices that are already emitted opportunities.
    extracted: BTreeSet<VertexId>,
    phases: Vec<Phase>,
    events: Vec<Event>,
    snapshots: bool,
    hook: Option<&'h mut Hook<'h>>,
}

impl<'h> Ctx<'h> {
    fn new(g: Sdg) -> Self {
        Ctx { g, extracted: BTreeSet::new(), phases: Vec::new(), events: Vec::new(), snapshots: false, hook: None }
    }

    fn contract(&mut self, u: VertexId, v: VertexId, label: VertexId, steps: &mut Vec<Contraction>) -> bool {
        match self.g.contract_edge_as(u, v, label) {
            Ok(c) => {
                let gone = if label == u { v } else { u };
                self.extracted.remove(&gone);
                if let Some(hook) = self.hook.as_mut() {
                    hook(&self.g, &c);
                }
                steps.push(c);
                true
            }
            Err(e) => {
                self.events.push(Event::Skipped { edge: (u, v), reason: e.to_string() });
                false
            }
        }
    }

    fn finish_phase(&mut self, kind: PhaseKind, root: VertexId, before: &BTreeSet<usize>, steps: Vec<Contraction>) {
        if steps.is_empty() {
            return;
        }
        let absorbed = self.g.members(root).difference(before).copied().collect();
        let snapshot = self.snapshots.then(|| self.g.clone());
        self.phases.push(Phase { kind, root, absorbed, steps, snapshot });
    }

    /// Contracts every control edge out of `v`; edges into extracted vertices
    /// are left alone when `keep_extracted` is set.
    fn ccb_flat(&mut self, v: VertexId, keep_extracted: bool) {
        let before = self.g.members(v).clone();
        let mut steps = Vec::new();
        let mut blocked = BTreeSet::new();
        loop {
            let next = self
                .g
                .control_children(v)
                .iter()
                .copied()
                .find(|c| !blocked.contains(c) && !(keep_extracted && self.extracted.contains(c)));
            let Some(c) = next else { break };
            if !self.contract(v, c, v, &mut steps) {
                blocked.insert(c);
            }
        }
        self.finish_phase(PhaseKind::Ccb, v, &before, steps);
    }

    /// Nested sub-blocks first, each as its own phase, then `v` itself.
    fn ccb_nested(&mut self, v: VertexId) {
        let children: Vec<VertexId> = self.g.control_children(v).iter().copied().collect();
        for c in children {
            if self.g.contains(c) && !self.g.control_children(c).is_empty() {
                self.ccb_nested(c);
            }
        }
        self.ccb_flat(v, false);
    }

    fn esc(&mut self, target: VertexId) {
        let before = self.g.members(target).clone();
        let region = self.g.control_region(target);
        let mut steps = Vec::new();
        let mut blocked = BTreeSet::new();
        loop {
            let g = &self.g;
            let next = g.data_predecessors(target).iter().copied().find(|&u| {
                !blocked.contains(&u)
                    && !self.extracted.contains(&u)
                    && g.is_source_vertex(u)
                    && g.data_out_degree(u) == 1
                    && g.control_region(u) == region
            });
            let Some(u) = next else { break };
            if !self.contract(u, target, target, &mut steps) {
                blocked.insert(u);
            }
        }
        self.finish_phase(PhaseKind::Esc, target, &before, steps);
    }

    fn chain_usable(&self, chain: &Chain, target: VertexId) -> bool {
        chain.path.iter().all(|x| *x == target || !self.extracted.contains(x))
    }

    /// Returns the long chains left unmerged, as (kind, chain) pairs.
    fn sddc(&mut self, target: VertexId) -> Vec<(VariantKind, Chain)> {
        let before = self.g.members(target).clone();
        let mut steps = Vec::new();
        let mut left = Vec::new();

        let incoming: Vec<Chain> =
            self.g.chains_into(target).into_iter().filter(|c| self.chain_usable(c, target)).collect();
        let (units, longs): (Vec<Chain>, Vec<Chain>) = incoming.into_iter().partition(|c| c.len() == 1);
        for c in units {
            self.contract(c.head(), target, target, &mut steps);
        }
        if let [only] = longs.as_slice() {
            for &x in only.path[..only.path.len() - 1].iter().rev() {
                if !self.contract(x, target, target, &mut steps) {
                    break;
                }
            }
        } else {
            left.extend(longs.into_iter().map(|c| (VariantKind::IncomingChain, c)));
        }

        let outgoing: Vec<Chain> =
            self.g.chain_from(target).into_iter().filter(|c| self.chain_usable(c, target)).collect();
        let (units, longs): (Vec<Chain>, Vec<Chain>) = outgoing.into_iter().partition(|c| c.len() == 1);
        for c in units {
            if self.g.data_out_degree(c.tail()) == 0 {
                self.contract(target, c.tail(), target, &mut steps);
            }
        }
        if let [only] = longs.as_slice() {
            for &x in &only.path[1..] {
                if !self.contract(target, x, target, &mut steps) {
                    break;
                }
            }
        } else {
            left.extend(longs.into_iter().map(|c| (VariantKind::OutgoingChain, c)));
        }

        self.finish_phase(PhaseKind::Sddc, target, &before, steps);
        left
    }

    /// Collapse, source absorption and chain absorption for an accepted
    /// block.
    fn extract(&mut self, v: VertexId) -> Vec<(VariantKind, Chain)> {
        self.ccb_nested(v);
        self.esc(v);
        self.sddc(v)
    }

    fn chain_members(&self, chain: &Chain, target: VertexId) -> BTreeSet<usize> {
        chain.path.iter().filter(|&&x| x != target).flat_map(|&x| self.g.members(x).iter().copied()).collect()
    }

    /// Climbs primary control parents of the contracted vertex `v`, merging
    /// each parent that the merger rules and parent affinity admit.
    fn gsi(
        &mut self,
        mut v: VertexId,
        worklist: &mut Vec<VertexId>,
        cfg: &SegmentationConfig,
        variants: &mut Vec<Variant>,
    ) -> VertexId {
        while let Some(p) = self.g.control_parent(v).filter(|&p| self.g.kind(p) == Some(VertexKind::PrimaryControl)) {
            let case = merger_case(&self.g, p, v);
            let pa = parent_affinity(&self.g, p, v);
            let merged = match case.decision() {
                MergeDecision::Merge => true,
                MergeDecision::UsePa => pa.is_some_and(|x| below(x, cfg.pa_threshold)),
            };
            self.events.push(Event::Climb { child: v, parent: p, case, pa, merged });
            if !merged {
                let members = self.g.control_block(p).iter().flat_map(|&x| self.g.members(x).clone()).collect();
                variants.push(Variant { kind: VariantKind::WithParent, members });
                break;
            }
            worklist.retain(|&x| x != p);
            variants.clear();
            for (kind, chain) in self.extract(p) {
                let members = self.chain_members(&chain, p);
                variants.push(Variant { kind, members });
            }
            v = p;
        }
        v
    }
}

/// Parameters and return variables of a member set, read from the data
/// edges of the original graph that cross its border.
pub fn infer_signature(g0: &Sdg, members: &BTreeSet<usize>) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut params = BTreeSet::new();
    let mut returns = BTreeSet::new();
    for (u, v) in g0.data_edges() {
        match (members.contains(&u), members.contains(&v)) {
            (false, true) => params.extend(g0.edge_vars(u, v).iter().cloned()),
            (true, false) => returns.extend(g0.edge_vars(u, v).iter().cloned()),
            _ => {}
        }
    }
    (params, returns)
}

/// Ascending score, then larger member set, then earlier span.
pub fn rank(emos: &mut [Emo]) {
    emos.sort_by(|a, b| {
        a.score
            .cmp(&b.score)
            .then_with(|| b.members.len().cmp(&a.members.len()))
            .then_with(|| a.span.0.cmp(&b.span.0))
            .then_with(|| a.members.cmp(&b.members))
    });
}

/// Runs the contraction pipeline on a built graph.
pub struct Segmenter<'h> {
    cfg: SegmentationConfig,
    snapshots: bool,
    hook: Option<&'h mut Hook<'h>>,
}

impl<'h> Segmenter<'h> {
    pub fn new(cfg: SegmentationConfig) -> Self {
        Segmenter { cfg, snapshots: false, hook: None }
    }

    /// Keep a copy of the graph after every phase.
    pub fn snapshots(mut self, on: bool) -> Self {
        self.snapshots = on;
        self
    }

    /// Called with the current graph after every contraction.
    pub fn observe(mut self, hook: &'h mut Hook<'h>) -> Self {
        self.hook = Some(hook);
        self
    }

    pub fn run(self, g0: &Sdg) -> Segmentation {
        let cfg = self.cfg;
        let mut ctx = Ctx::new(g0.clone());
        ctx.snapshots = self.snapshots;
        ctx.hook = self.hook;
        let mut emos: Vec<Emo> = Vec::new();
        let mut worklist = ctx.g.primary_control_vertices();

        while let Some(v) = worklist.pop() {
            if ctx.g.kind(v) != Some(VertexKind::PrimaryControl) {
                continue;
            }
            let Ok(a) = analyze_block(&ctx.g, v) else { continue };
            let score = locs(&a, cfg.no_relay_extract);
            let accepted = (!a.relays.is_empty() || cfg.no_relay_extract)
                && score.is_some_and(|s| below(s, cfg.locs_threshold));
            ctx.events.push(Event::Scored { block: v, relays: a.relays.len(), locs: score, accepted });

            if !accepted {
                if let Some(&anc) = ctx.g.control_ancestors(v).iter().find(|x| worklist.contains(x)) {
                    ctx.events.push(Event::Deferred { block: v, ancestor: anc });
                } else {
                    ctx.ccb_flat(v, true);
                    ctx.esc(v);
                    ctx.events.push(Event::Collapsed { block: v });
                }
                continue;
            }

            let first_phase = ctx.phases.len();
            let mut variants: Vec<Variant> = ctx
                .extract(v)
                .into_iter()
                .map(|(kind, chain)| Variant { kind, members: ctx.chain_members(&chain, v) })
                .collect();
            let root = ctx.gsi(v, &mut worklist, &cfg, &mut variants);
            let members = ctx.g.members(root).clone();
            if !g0.is_segment(&members) {
                ctx.events.push(Event::NotSegment { root, members });
                continue;
            }

            let mut nested = Vec::new();
            emos.retain(|e| {
                let inner = e.members.is_subset(&members);
                if inner {
                    nested.push((e.root, e.members.clone()));
                }
                !inner
            });
            for (inner, m) in nested {
                ctx.events.push(Event::Superseded { outer: root, inner });
                variants.push(Variant { kind: VariantKind::Nested, members: m });
            }

            let (params, returns) = infer_signature(g0, &members);
            let trace = ctx.phases[first_phase..].iter().flat_map(|p| p.steps.iter().cloned()).collect();
            let span = (*members.first().unwrap(), *members.last().unwrap());
            ctx.events.push(Event::Emitted { root, members: members.clone() });
            ctx.extracted.insert(root);
            emos.push(Emo {
                root,
                block: v,
                members,
                span,
                params,
                returns,
                score: score.expect("accepted blocks are scored"),
                trace,
                variants,
            });
        }

        rank(&mut emos);
        Segmentation { graph: ctx.g, emos, phases: ctx.phases, events: ctx.events }
    }
}

/// Control edge contraction over a built graph.
pub fn cec(g: &Sdg, cfg: &SegmentationConfig) -> Segmentation {
    Segmenter::new(*cfg).run(g)
}

/// Builds the graph of `p` and segments it.
pub fn segment(p: &IrProgram, cfg: &SegmentationConfig) -> Result<Segmentation, EngineError> {
    cfg.validate()?;
    let g = build_sdg(p)?;
    Ok(cec(&g, cfg))
}

/// Contracts every control edge of the block at `v` into `v`.
pub fn ccb(g: &mut Sdg, v: VertexId) -> Vec<Contraction> {
    run_on(g, |ctx| ctx.ccb_flat(v, false))
}

/// Absorbs same-region sources that feed only `target`.
pub fn esc(g: &mut Sdg, target: VertexId) -> Vec<Contraction> {
    run_on(g, |ctx| ctx.esc(target))
}

/// Absorbs chains attached to `target`; returns the contractions and the
/// long chains left unmerged.
pub fn sddc(g: &mut Sdg, target: VertexId) -> (Vec<Contraction>, Vec<Chain>) {
    let mut left = Vec::new();
    let steps = run_on(g, |ctx| left = ctx.sddc(target).into_iter().map(|(_, c)| c).collect());
    (steps, left)
}

/// Climbs from contracted vertex `v` and returns the final seg id, pruning
/// merged parents from `worklist`.
pub fn gsi(g: &mut Sdg, v: VertexId, worklist: &mut Vec<VertexId>, cfg: &SegmentationConfig) -> VertexId {
    let mut out = v;
    run_on(g, |ctx| out = ctx.gsi(v, worklist, cfg, &mut Vec::new()));
    out
}

fn run_on(g: &mut Sdg, f: impl FnOnce(&mut Ctx<'_>)) -> Vec<Contraction> {
    let mut ctx = Ctx::new(std::mem::take(g));
    f(&mut ctx);
    *g = ctx.g;
    ctx.phases.into_iter().flat_map(|p| p.steps).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_ir;

    fn load(text: &str) -> Sdg {
        build_sdg(&parse_ir(text).unwrap()).unwrap()
    }

    const FIB: &str = include_str!("../fixtures/fibo_prime.ir");
    const CENSUS: &str = include_str!("../fixtures/census.ir");

    fn set(items: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        items.into_iter().collect()
    }

    #[test]
    fn fib_single_opportunity() {
        let s = cec(&load(FIB), &SegmentationConfig::default());
        assert_eq!(s.emos.len(), 1);
        let e = &s.emos[0];
        assert_eq!(e.members, set(1..=13));
        assert!(e.params.is_empty());
        assert_eq!(e.returns, BTreeSet::from(["b".to_string()]));
        assert_eq!(e.score, Rational::new(1, 3));
        assert!(e.variants.iter().any(|v| v.kind == VariantKind::Nested && v.members == set(6..=12)));
        let parts: Vec<BTreeSet<usize>> = s.graph.vertices().map(|v| v.members.clone()).collect();
        assert_eq!(parts, vec![set([0]), set(1..=13), set(14..=18), set(19..=22)]);
    }

    #[test]
    fn fib_phase_order() {
        let s = cec(&load(FIB), &SegmentationConfig::default());
        let got: Vec<(PhaseKind, VertexId, BTreeSet<usize>)> =
            s.phases.iter().map(|p| (p.kind, p.root, p.absorbed.clone())).collect();
        use PhaseKind::*;
        let want = vec![
            (Ccb, 19, set(20..=22)),
            (Ccb, 15, set(16..=18)),
            (Esc, 15, set([14])),
            (Ccb, 8, set(9..=12)),
            (Esc, 8, set([6, 7])),
            (Ccb, 5, set(6..=12)),
            (Ccb, 3, set(4..=12)),
            (Esc, 3, set([1, 2])),
            (Sddc, 3, set([13])),
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn census_opportunity() {
        let s = cec(&load(CENSUS), &SegmentationConfig::default());
        assert_eq!(s.emos.len(), 1);
        let e = &s.emos[0];
        assert_eq!(e.members, set([4, 9, 10, 11, 12, 13, 14, 15, 16]));
        assert_eq!(e.params, ["n", "q", "s"].iter().map(|s| s.to_string()).collect());
        assert!(e.returns.is_empty());
        assert!(s.events.iter().any(|ev| matches!(
            ev,
            Event::Climb { child: 9, parent: 3, merged: false, pa: Some(pa), .. } if *pa == Rational::new(2, 5)
        )));
        let kinds: Vec<VariantKind> = e.variants.iter().map(|v| v.kind).collect();
        assert_eq!(kinds, vec![VariantKind::IncomingChain, VariantKind::IncomingChain, VariantKind::WithParent]);
        let parts: Vec<BTreeSet<usize>> = s.graph.vertices().map(|v| v.members.clone()).collect();
        assert_eq!(parts, vec![set([0]), set([1, 2, 3, 5, 6, 7, 8, 17, 18]), set([4, 9, 10, 11, 12, 13, 14, 15, 16])]);
    }

    #[test]
    fn straight_line_has_no_opportunities() {
        let g = load("input a\nassign b a\noutput b\n");
        let s = cec(&g, &SegmentationConfig::default());
        assert!(s.emos.is_empty());
        assert_eq!(s.graph, g);
    }

    #[test]
    fn step_functions() {
        let mut g = load(FIB);
        let steps = ccb(&mut g, 19);
        assert_eq!(steps.len(), 3);
        assert_eq!(g.members(19), &set(19..=22));
        ccb(&mut g, 15);
        let steps = esc(&mut g, 15);
        assert_eq!(steps.iter().map(|c| c.edge).collect::<Vec<_>>(), vec![(14, 15)]);

        let mut h = load(include_str!("../fixtures/swap_guard.ir"));
        let steps = esc(&mut h, 4);
        assert_eq!(steps.iter().map(|c| c.edge).collect::<Vec<_>>(), vec![(3, 4)]);
        assert!(h.has_data_edge(1, 4));
        assert_eq!(ccb(&mut h, 3).len(), 0);
    }

    #[test]
    fn gsi_keeps_affine_parent() {
        let mut g = load(CENSUS);
        ccb(&mut g, 9);
        esc(&mut g, 9);
        sddc(&mut g, 9);
        let mut wl = vec![1, 3];
        assert_eq!(gsi(&mut g, 9, &mut wl, &SegmentationConfig::default()), 9);
        assert_eq!(wl, vec![1, 3]);
    }

    #[test]
    fn two_long_incoming_chains_are_left() {
        let mut g = load(CENSUS);
        ccb(&mut g, 9);
        let (_, left) = sddc(&mut g, 9);
        let paths: Vec<Vec<usize>> = left.into_iter().map(|c| c.path).collect();
        assert_eq!(paths, vec![vec![5, 6, 9], vec![7, 8, 9]]);
    }

    #[test]
    fn ranking() {
        let mk = |score: Rational, members: BTreeSet<usize>| Emo {
            root: 0,
            block: 0,
            span: (*members.first().unwrap(), *members.last().unwrap()),
            members,
            params: BTreeSet::new(),
            returns: BTreeSet::new(),
            score,
            trace: Vec::new(),
            variants: Vec::new(),
        };
        let mut v = vec![mk(Rational::new(1, 4), set(0..5)), mk(Rational::new(1, 5), set(10..12))];
        rank(&mut v);
        assert_eq!(v[0].score, Rational::new(1, 5));
        let mut v = vec![mk(Rational::new(1, 4), set(0..5)), mk(Rational::new(1, 4), set(10..20))];
        rank(&mut v);
        assert_eq!(v[0].members.len(), 10);
        let mut v = vec![mk(Rational::new(1, 4), set(10..15)), mk(Rational::new(1, 4), set(0..5))];
        rank(&mut v);
        assert_eq!(v[0].span.0, 0);
    }

    #[test]
    fn config_bounds() {
        assert!(SegmentationConfig::default().validate().is_ok());
        let bad = SegmentationConfig { locs_threshold: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = SegmentationConfig { pa_threshold: 1.5, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
