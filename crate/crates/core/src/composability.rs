//! Composability relations on observables and the synchronous composability
//! relation on observations that they induce.
//!
//! A [`ComposabilityBase`] describes which observables must synchronise. It
//! induces the synchronous relation on observations: at equal timestamps the
//! two observables must decompose into a related core plus parts independent
//! of the other interface; at distinct timestamps the earlier observable must
//! be independent of the other interface.
//!
//! Two implementations are provided. [`kappa_sync`] enumerates decompositions
//! exhaustively and serves as the reference oracle. [`kappa_sync_shared`] is
//! the closed-form decision used in production paths; the two are required to
//! agree and the agreement is tested exhaustively on small interfaces.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::event::{Event, EventSet, Observable};
use crate::model::Observation;
use crate::term::{Atom, Parser};

/// Default cap on `|o1| + |o2|` for the decomposition oracle.
pub const DECOMPOSITION_LIMIT: usize = 16;

/// A relation on observables, given by one of the supported shapes.
#[derive(Debug, Clone)]
pub enum ComposabilityBase {
    /// `{(O, O) | O nonempty}`: observables synchronise on shared events.
    SharedIdentity,
    /// An explicit finite table of related observable pairs.
    ExplicitPairs(Vec<(Observable, Observable)>),
    /// The shared-identity core further constrained by synchronisation rules.
    Ruleset(Vec<SyncRule>),
    /// The empty relation: nothing synchronises, everything interleaves.
    Empty,
}

impl ComposabilityBase {
    /// Validates the no-empty-observable invariant for explicit tables.
    pub fn explicit_pairs(pairs: Vec<(Observable, Observable)>) -> Result<ComposabilityBase> {
        for (l, r) in &pairs {
            if l.is_empty() || r.is_empty() {
                return Err(Error::EmptyObservableInRelation);
            }
        }
        Ok(ComposabilityBase::ExplicitPairs(pairs))
    }

    pub fn rules(&self) -> &[SyncRule] {
        match self {
            ComposabilityBase::Ruleset(rules) => rules,
            _ => &[],
        }
    }

    /// True when the relation restricted to `P(E1) × P(E2)` is empty, i.e. no
    /// nonempty sub-observables of the two interfaces are related and no rule
    /// couples them in either direction.
    pub fn restriction_is_empty(&self, e1: &EventSet, e2: &EventSet) -> bool {
        independent(self, &e1.to_observable(), e2)
            && independent(self, &e2.to_observable(), e1)
    }

    /// Membership of a ground pair in the core relation. Rule obligations
    /// apply to whole committed observations and are checked by the kappa
    /// functions, not here.
    fn core_related(&self, left: &Observable, right: &Observable) -> bool {
        if left.is_empty() || right.is_empty() {
            return false;
        }
        match self {
            ComposabilityBase::SharedIdentity | ComposabilityBase::Ruleset(_) => left == right,
            ComposabilityBase::ExplicitPairs(pairs) => {
                pairs.iter().any(|(l, r)| l == left && r == right)
            }
            ComposabilityBase::Empty => false,
        }
    }

    /// No nonempty `x ⊆ left` and `y ⊆ right` are related by the core
    /// relation. Directional: `left` supplies first components of pairs.
    fn core_independent(&self, left: &dyn EventContainer, right: &dyn EventContainer) -> bool {
        match self {
            ComposabilityBase::Empty => true,
            ComposabilityBase::SharedIdentity | ComposabilityBase::Ruleset(_) => {
                !left.iter_events().any(|e| right.has_event(e))
            }
            ComposabilityBase::ExplicitPairs(pairs) => !pairs.iter().any(|(l, r)| {
                l.iter().all(|e| left.has_event(e)) && r.iter().all(|e| right.has_event(e))
            }),
        }
    }
}

/// Shared view over observables and interfaces used by the independence
/// checks.
trait EventContainer {
    fn has_event(&self, event: &Event) -> bool;
    fn iter_events(&self) -> Box<dyn Iterator<Item = &Event> + '_>;
}

impl EventContainer for Observable {
    fn has_event(&self, event: &Event) -> bool {
        self.contains(event)
    }
    fn iter_events(&self) -> Box<dyn Iterator<Item = &Event> + '_> {
        Box::new(self.iter())
    }
}

impl EventContainer for EventSet {
    fn has_event(&self, event: &Event) -> bool {
        self.contains(event)
    }
    fn iter_events(&self) -> Box<dyn Iterator<Item = &Event> + '_> {
        Box::new(self.iter())
    }
}

/// The independence relation: no nonempty `x ⊆ observable` and nonempty
/// `y ⊆ other` are related by the base. For rule-bearing bases, additionally
/// no rule triggered inside `observable` obligates the other side — an
/// observable that would force a simultaneous partner is not independent of
/// the partner's interface.
///
/// `other` may be an interface or another observable (viewed as a set).
pub fn independent(base: &ComposabilityBase, observable: &Observable, other: &EventSet) -> bool {
    base.core_independent(observable, other)
        && !rules_couple(base.rules(), observable, other)
}

/// True when some rule triggered by an event of `observable` has a required
/// candidate inside `other`: the trigger would obligate the other side to
/// observe something simultaneously. A rule with an empty requirement list
/// forbids its trigger outright and couples with everything.
fn rules_couple(rules: &[SyncRule], observable: &Observable, other: &EventSet) -> bool {
    rules.iter().any(|rule| {
        observable.iter().any(|event| {
            rule.trigger_bindings(event)
                .map(|binding| {
                    rule.requires_any.is_empty()
                        || rule.candidates_in(&binding, other).next().is_some()
                })
                .unwrap_or(false)
        })
    })
}

/// Rule obligations for a committed simultaneous observation `union` over the
/// combined interfaces `e1 ∪ e2`: every triggered rule whose candidate events
/// exist in the interfaces must see one of them in the union.
pub(crate) fn rules_satisfied(
    rules: &[SyncRule],
    e1: &EventSet,
    e2: &EventSet,
    union: &Observable,
) -> bool {
    rules.iter().all(|rule| {
        union.iter().all(|event| {
            let Some(binding) = rule.trigger_bindings(event) else {
                return true;
            };
            if rule.requires_any.is_empty() {
                // An empty requirement list forbids the trigger outright.
                return false;
            }
            let mut in_scope = rule
                .candidates_in(&binding, e1)
                .chain(rule.candidates_in(&binding, e2))
                .peekable();
            if in_scope.peek().is_none() {
                // No instantiation exists in the participating interfaces;
                // the obligation is out of scope for this pair.
                return true;
            }
            in_scope.any(|candidate| union.contains(&candidate))
        })
    })
}

/// Reference oracle for the synchronous composability relation, by exhaustive
/// enumeration of decompositions.
///
/// Equal timestamps: some split `o1 = core1 ⊎ rest1`, `o2 = core2 ⊎ rest2`
/// with `(core1, core2)` related (or both empty), `rest1` independent of `E2`,
/// and `rest2` independent of `E1`. Distinct timestamps: the earlier
/// observable is independent of the other interface.
pub fn kappa_sync(
    base: &ComposabilityBase,
    e1: &EventSet,
    e2: &EventSet,
    o1: &Observation,
    o2: &Observation,
) -> Result<bool> {
    let size = o1.observable.len() + o2.observable.len();
    if size > DECOMPOSITION_LIMIT {
        return Err(Error::DecompositionLimit { size, limit: DECOMPOSITION_LIMIT });
    }
    match o1.time.cmp(&o2.time) {
        Ordering::Less => Ok(independent(base, &o1.observable, e2)),
        Ordering::Greater => Ok(independent(base, &o2.observable, e1)),
        Ordering::Equal => {
            let union = o1.observable.union(&o2.observable);
            if !rules_satisfied(base.rules(), e1, e2, &union) {
                return Ok(false);
            }
            for (core1, rest1) in splits(&o1.observable) {
                for (core2, rest2) in splits(&o2.observable) {
                    let core_ok = (core1.is_empty() && core2.is_empty())
                        || base.core_related(&core1, &core2);
                    if core_ok
                        && base.core_independent(&rest1, e2)
                        && base.core_independent(e1, &rest2)
                    {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
    }
}

/// All ways to split an observable into (core, rest).
fn splits(observable: &Observable) -> Vec<(Observable, Observable)> {
    let events = observable.events();
    let n = events.len();
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        let mut core = Vec::new();
        let mut rest = Vec::new();
        for (i, e) in events.iter().enumerate() {
            if mask & (1 << i) != 0 {
                core.push(e.clone());
            } else {
                rest.push(e.clone());
            }
        }
        out.push((Observable::new(core), Observable::new(rest)));
    }
    out
}

/// Closed-form decision for the shared-identity relation, optionally extended
/// by synchronisation rules.
///
/// Equal timestamps: the two observables agree on each other's interface
/// (`o1 ∩ E2 = o2 ∩ E1`) and every triggered rule obligation is met by the
/// union. Distinct timestamps: the earlier observable touches no event of the
/// other interface and triggers no rule whose candidates lie in it.
pub fn kappa_sync_shared(
    rules: &[SyncRule],
    e1: &EventSet,
    e2: &EventSet,
    o1: &Observation,
    o2: &Observation,
) -> bool {
    match o1.time.cmp(&o2.time) {
        Ordering::Less => {
            o1.observable.is_disjoint_from(e2) && !rules_couple(rules, &o1.observable, e2)
        }
        Ordering::Greater => {
            o2.observable.is_disjoint_from(e1) && !rules_couple(rules, &o2.observable, e1)
        }
        Ordering::Equal => {
            o1.observable.restrict(e2) == o2.observable.restrict(e1)
                && rules_satisfied(rules, e1, e2, &o1.observable.union(&o2.observable))
        }
    }
}

/// Relative timestamp order of two delay-insensitive steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimeOrder {
    LeftEarlier,
    RightEarlier,
    Simultaneous,
}

impl TimeOrder {
    pub const ALL: [TimeOrder; 3] =
        [TimeOrder::LeftEarlier, TimeOrder::RightEarlier, TimeOrder::Simultaneous];

    /// Representative timestamps realising this order.
    pub fn representative(self) -> (u64, u64) {
        match self {
            TimeOrder::LeftEarlier => (1, 2),
            TimeOrder::RightEarlier => (2, 1),
            TimeOrder::Simultaneous => (1, 1),
        }
    }
}

/// Production decision procedure bound to a base: used by products and the
/// runtime. Every shape has a closed form — for explicit pair tables the
/// related core of a decomposition can only be a table entry, so the split
/// is determined per entry.
pub fn composable_at(
    base: &ComposabilityBase,
    e1: &EventSet,
    e2: &EventSet,
    left: &Observable,
    right: &Observable,
    order: TimeOrder,
) -> bool {
    match base {
        ComposabilityBase::SharedIdentity | ComposabilityBase::Ruleset(_) => {
            let rules = base.rules();
            match order {
                TimeOrder::LeftEarlier => {
                    left.is_disjoint_from(e2) && !rules_couple(rules, left, e2)
                }
                TimeOrder::RightEarlier => {
                    right.is_disjoint_from(e1) && !rules_couple(rules, right, e1)
                }
                TimeOrder::Simultaneous => {
                    left.restrict(e2) == right.restrict(e1)
                        && rules_satisfied(rules, e1, e2, &left.union(right))
                }
            }
        }
        ComposabilityBase::Empty => true,
        ComposabilityBase::ExplicitPairs(pairs) => match order {
            TimeOrder::LeftEarlier => independent(base, left, e2),
            TimeOrder::RightEarlier => independent(base, right, e1),
            TimeOrder::Simultaneous => {
                let fully_independent = base.core_independent(left, e2)
                    && base.core_independent(e1, right);
                fully_independent
                    || pairs.iter().any(|(a, b)| {
                        a.iter().all(|e| left.contains(e))
                            && b.iter().all(|e| right.contains(e))
                            && base.core_independent(&subtract(left, a), e2)
                            && base.core_independent(e1, &subtract(right, b))
                    })
            }
        },
    }
}

fn subtract(observable: &Observable, removed: &Observable) -> Observable {
    Observable::new(
        observable.iter().filter(|e| !removed.contains(e)).cloned().collect(),
    )
}

/// Timed variant of [`composable_at`] working on full observations.
pub fn composable_timed(
    base: &ComposabilityBase,
    e1: &EventSet,
    e2: &EventSet,
    o1: &Observation,
    o2: &Observation,
) -> bool {
    let order = match o1.time.cmp(&o2.time) {
        Ordering::Less => TimeOrder::LeftEarlier,
        Ordering::Greater => TimeOrder::RightEarlier,
        Ordering::Equal => TimeOrder::Simultaneous,
    };
    composable_at(base, e1, e2, &o1.observable, &o2.observable, order)
}

/// Outcome of one lifted composability step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    AdvanceLeft,
    AdvanceRight,
    AdvanceBoth,
    Incompatible,
}

/// One step of the coinductive lifting of a composability predicate: decides
/// which side advances by timestamp comparison once the pair is composable.
pub fn lift_step(
    kappa: impl Fn(&Observation, &Observation) -> bool,
    o1: &Observation,
    o2: &Observation,
) -> StepOutcome {
    if !kappa(o1, o2) {
        return StepOutcome::Incompatible;
    }
    match o1.time.cmp(&o2.time) {
        Ordering::Less => StepOutcome::AdvanceLeft,
        Ordering::Greater => StepOutcome::AdvanceRight,
        Ordering::Equal => StepOutcome::AdvanceBoth,
    }
}

/// Union of two simultaneous observations.
pub fn merge(o1: &Observation, o2: &Observation) -> Result<Observation> {
    if o1.time != o2.time {
        return Err(Error::TimeMismatch);
    }
    Ok(Observation::new(o1.observable.union(&o2.observable), o1.time))
}

/// A synchronisation rule: whenever an event matching `trigger` occurs in a
/// committed observation, one of the `requires_any` events must occur
/// simultaneously — provided some instantiation of the requirement exists in
/// the interfaces participating in the check.
#[derive(Debug, Clone)]
pub struct SyncRule {
    trigger: EventPattern,
    requires_any: Vec<EventPattern>,
}

impl SyncRule {
    pub fn new(trigger: EventPattern, requires_any: Vec<EventPattern>) -> SyncRule {
        SyncRule { trigger, requires_any }
    }

    /// A ground rule over concrete events.
    pub fn ground(trigger: Event, requires_any: Vec<Event>) -> SyncRule {
        SyncRule {
            trigger: EventPattern::from_event(&trigger),
            requires_any: requires_any.iter().map(EventPattern::from_event).collect(),
        }
    }

    fn trigger_bindings(&self, event: &Event) -> Option<Binding> {
        self.trigger.match_event(event)
    }

    /// Ground candidate events of this rule, under `binding`, that live in
    /// `scope`.
    fn candidates_in<'a>(
        &'a self,
        binding: &'a Binding,
        scope: &'a EventSet,
    ) -> impl Iterator<Item = Event> + 'a {
        scope
            .iter()
            .filter(move |event| {
                self.requires_any.iter().any(|pattern| pattern.matches_under(event, binding))
            })
            .cloned()
    }
}

/// Variable binding produced by matching a pattern against an event.
type Binding = BTreeMap<String, Atom>;

/// A term pattern over events: like an event, but single-letter lowercase
/// symbols are variables, and variables may carry `<` constraints against
/// other variables or integers (written `where k<i` in the text syntax).
#[derive(Debug, Clone)]
pub struct EventPattern {
    name: String,
    args: Vec<AtomPattern>,
    constraints: Vec<(CmpOperand, CmpOperand)>,
}

#[derive(Debug, Clone)]
enum AtomPattern {
    Var(String),
    Int(i64),
    Sym(String),
    App(String, Vec<AtomPattern>),
}

#[derive(Debug, Clone)]
enum CmpOperand {
    Var(String),
    Int(i64),
}

impl EventPattern {
    pub fn from_event(event: &Event) -> EventPattern {
        fn ground(atom: &Atom) -> AtomPattern {
            match atom {
                Atom::Int(n) => AtomPattern::Int(*n),
                Atom::Sym(s) => AtomPattern::Sym(s.clone()),
                Atom::App(h, args) => {
                    AtomPattern::App(h.clone(), args.iter().map(ground).collect())
                }
            }
        }
        EventPattern {
            name: event.name().to_owned(),
            args: event.args().iter().map(ground).collect(),
            constraints: Vec::new(),
        }
    }

    /// Parses `name(args…)` optionally followed by `where a<b, c<d`.
    /// Single-letter lowercase symbols in argument position are variables.
    pub fn parse(input: &str) -> Result<EventPattern> {
        let (term_text, where_text) = match input.split_once(" where ") {
            Some((t, w)) => (t.trim(), Some(w.trim())),
            None => (input.trim(), None),
        };
        let mut p = Parser::new(term_text);
        let atom = p.atom()?;
        p.skip_ws();
        if !p.at_end() {
            return Err(Error::Parse(format!("trailing input in pattern {input:?}")));
        }
        fn lift(atom: &Atom) -> AtomPattern {
            match atom {
                Atom::Int(n) => AtomPattern::Int(*n),
                Atom::Sym(s) if is_variable(s) => AtomPattern::Var(s.clone()),
                Atom::Sym(s) => AtomPattern::Sym(s.clone()),
                Atom::App(h, args) => AtomPattern::App(h.clone(), args.iter().map(lift).collect()),
            }
        }
        let (name, args) = match atom {
            Atom::App(name, args) => (name, args.iter().map(lift).collect()),
            Atom::Sym(name) => (name, Vec::new()),
            Atom::Int(_) => {
                return Err(Error::Parse(format!("a pattern needs a name: {input:?}")))
            }
        };
        let mut constraints = Vec::new();
        if let Some(w) = where_text {
            for clause in w.split(',') {
                let clause = clause.trim();
                let (lhs, rhs) = clause.split_once('<').ok_or_else(|| {
                    Error::Parse(format!("expected a<b constraint, got {clause:?}"))
                })?;
                constraints.push((parse_operand(lhs.trim())?, parse_operand(rhs.trim())?));
            }
        }
        Ok(EventPattern { name, args, constraints })
    }

    /// Matches the pattern against an event, returning the variable binding.
    fn match_event(&self, event: &Event) -> Option<Binding> {
        if event.name() != self.name || event.args().len() != self.args.len() {
            return None;
        }
        let mut binding = Binding::new();
        for (pattern, atom) in self.args.iter().zip(event.args()) {
            if !match_atom(pattern, atom, &mut binding) {
                return None;
            }
        }
        self.constraints_hold(&binding).then_some(binding)
    }

    /// Matches under an existing binding: shared variables must agree, fresh
    /// ones bind existentially.
    fn matches_under(&self, event: &Event, outer: &Binding) -> bool {
        if event.name() != self.name || event.args().len() != self.args.len() {
            return false;
        }
        let mut binding = outer.clone();
        for (pattern, atom) in self.args.iter().zip(event.args()) {
            if !match_atom(pattern, atom, &mut binding) {
                return false;
            }
        }
        self.constraints_hold(&binding)
    }

    fn constraints_hold(&self, binding: &Binding) -> bool {
        self.constraints.iter().all(|(lhs, rhs)| {
            match (operand_value(lhs, binding), operand_value(rhs, binding)) {
                (Some(a), Some(b)) => a < b,
                // An unbound constraint variable cannot invalidate a match.
                _ => true,
            }
        })
    }
}

fn is_variable(name: &str) -> bool {
    name.len() == 1 && name.chars().all(|c| c.is_ascii_lowercase())
}

fn parse_operand(text: &str) -> Result<CmpOperand> {
    if let Ok(n) = text.parse::<i64>() {
        return Ok(CmpOperand::Int(n));
    }
    if is_variable(text) {
        return Ok(CmpOperand::Var(text.to_owned()));
    }
    Err(Error::Parse(format!("expected variable or integer, got {text:?}")))
}

fn operand_value(op: &CmpOperand, binding: &Binding) -> Option<i64> {
    match op {
        CmpOperand::Int(n) => Some(*n),
        CmpOperand::Var(v) => binding.get(v)?.as_int(),
    }
}

fn match_atom(pattern: &AtomPattern, atom: &Atom, binding: &mut Binding) -> bool {
    match pattern {
        AtomPattern::Var(v) => match binding.get(v) {
            Some(bound) => bound == atom,
            None => {
                binding.insert(v.clone(), atom.clone());
                true
            }
        },
        AtomPattern::Int(n) => atom == &Atom::Int(*n),
        AtomPattern::Sym(s) => atom == &Atom::Sym(s.clone()),
        AtomPattern::App(h, args) => match atom {
            Atom::App(head, sub) if head == h && sub.len() == args.len() => {
                args.iter().zip(sub).all(|(p, a)| match_atom(p, a, binding))
            }
            _ => false,
        },
    }
}

impl fmt::Display for EventPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write_atom(p: &AtomPattern, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match p {
                AtomPattern::Var(v) => write!(f, "{v}"),
                AtomPattern::Int(n) => write!(f, "{n}"),
                AtomPattern::Sym(s) => write!(f, "{s}"),
                AtomPattern::App(h, args) => {
                    write!(f, "{h}(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write_atom(a, f)?;
                    }
                    write!(f, ")")
                }
            }
        }
        write!(f, "{}", self.name)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write_atom(a, f)?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::Event;
    use crate::time::TimeStamp;

    fn obs(names: &[&str]) -> Observable {
        names.iter().map(|n| Event::atom(*n)).collect()
    }

    fn set(names: &[&str]) -> EventSet {
        names.iter().map(|n| Event::atom(*n)).collect()
    }

    fn at(names: &[&str], t: u64) -> Observation {
        Observation::at_nat(obs(names), t)
    }

    #[test]
    fn independence_shared_identity() {
        let base = ComposabilityBase::SharedIdentity;
        assert!(independent(&base, &obs(&["a"]), &set(&["b", "c"])));
        assert!(!independent(&base, &obs(&["b"]), &set(&["b", "c"])));
    }

    #[test]
    fn independence_empty_base() {
        let base = ComposabilityBase::Empty;
        assert!(independent(&base, &obs(&["b"]), &set(&["b", "c"])));
        assert!(independent(&base, &obs(&[]), &set(&[])));
    }

    /// The closed forms must agree with honest subset enumeration of the
    /// definition on small sets.
    #[test]
    fn independence_matches_subset_enumeration() {
        let universe = ["a", "b", "c"];
        let bases = [
            ComposabilityBase::SharedIdentity,
            ComposabilityBase::Empty,
            ComposabilityBase::explicit_pairs(vec![(obs(&["a"]), obs(&["b", "c"]))]).unwrap(),
        ];
        fn subsets<'a>(names: &[&'a str]) -> Vec<Vec<&'a str>> {
            (0..1u32 << names.len())
                .map(|mask| {
                    names
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask & (1 << i) != 0)
                        .map(|(_, n)| *n)
                        .collect()
                })
                .collect()
        }
        for base in &bases {
            for x in subsets(&universe) {
                for y in subsets(&universe) {
                    let expect = subsets(&x).iter().all(|sub_x| {
                        sub_x.is_empty()
                            || subsets(&y).iter().all(|sub_y| {
                                sub_y.is_empty()
                                    || !base.core_related(&obs(sub_x), &obs(sub_y))
                            })
                    });
                    assert_eq!(
                        independent(base, &obs(&x), &set(&y)),
                        expect,
                        "ind({x:?},{y:?})"
                    );
                }
            }
        }
    }

    #[test]
    fn kappa_sync_equal_time_decomposition() {
        let base = ComposabilityBase::SharedIdentity;
        let e1 = set(&["a", "b"]);
        let e2 = set(&["b", "c"]);
        // {a,b} and {b} at equal times: core {b}, rest {a} independent of E2.
        assert!(kappa_sync(&base, &e1, &e2, &at(&["a", "b"], 3), &at(&["b"], 3)).unwrap());
        // {b} earlier than {c}: b is shared with E2, so it cannot go first.
        assert!(!kappa_sync(&base, &e1, &e2, &at(&["b"], 1), &at(&["c"], 2)).unwrap());
    }

    #[test]
    fn kappa_sync_disjoint_interfaces_compose_freely() {
        let base = ComposabilityBase::SharedIdentity;
        let e1 = set(&["a"]);
        let e2 = set(&["c"]);
        assert!(kappa_sync(&base, &e1, &e2, &at(&["a"], 1), &at(&["c"], 2)).unwrap());
        assert!(kappa_sync(&base, &e1, &e2, &at(&["a"], 2), &at(&["c"], 1)).unwrap());
        assert!(kappa_sync(&base, &e1, &e2, &at(&["a"], 1), &at(&["c"], 1)).unwrap());
    }

    #[test]
    fn kappa_sync_decomposition_limit() {
        let base = ComposabilityBase::SharedIdentity;
        let names: Vec<String> = (0..17).map(|i| format!("e{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let big = at(&refs, 1);
        let e = set(&refs);
        assert!(matches!(
            kappa_sync(&base, &e, &e, &big, &at(&[], 1)),
            Err(Error::DecompositionLimit { .. })
        ));
    }

    /// Exhaustive oracle agreement on a 3-event universe (the acceptance
    /// suite runs the 4-event version).
    #[test]
    fn shared_fast_path_matches_oracle() {
        let universe = ["a", "b", "c"];
        let subsets = |mask: u32| -> Vec<&str> {
            universe
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, n)| *n)
                .collect()
        };
        let base = ComposabilityBase::SharedIdentity;
        for e1_mask in 0u32..8 {
            for e2_mask in 0u32..8 {
                let e1 = set(&subsets(e1_mask));
                let e2 = set(&subsets(e2_mask));
                for o1_mask in 0u32..8 {
                    if o1_mask & !e1_mask != 0 {
                        continue;
                    }
                    for o2_mask in 0u32..8 {
                        if o2_mask & !e2_mask != 0 {
                            continue;
                        }
                        for (t1, t2) in [(1, 2), (2, 1), (1, 1)] {
                            let o1 = at(&subsets(o1_mask), t1);
                            let o2 = at(&subsets(o2_mask), t2);
                            assert_eq!(
                                kappa_sync_shared(&[], &e1, &e2, &o1, &o2),
                                kappa_sync(&base, &e1, &e2, &o1, &o2).unwrap(),
                                "E1={e1_mask:b} E2={e2_mask:b} o1={o1_mask:b}@{t1} o2={o2_mask:b}@{t2}"
                            );
                        }
                    }
                }
            }
        }
    }

    /// Symmetry: shared identity is symmetric, so swapping the arguments and
    /// interfaces never changes the verdict.
    #[test]
    fn kappa_sync_symmetric_for_shared_identity() {
        let base = ComposabilityBase::SharedIdentity;
        let e1 = set(&["a", "b"]);
        let e2 = set(&["b", "c"]);
        for (o1, o2) in [
            (at(&["a", "b"], 1), at(&["b"], 1)),
            (at(&["a"], 1), at(&["c"], 2)),
            (at(&["b"], 2), at(&["b", "c"], 1)),
        ] {
            assert_eq!(
                kappa_sync(&base, &e1, &e2, &o1, &o2).unwrap(),
                kappa_sync(&base, &e2, &e1, &o2, &o1).unwrap(),
            );
        }
    }

    #[test]
    fn lift_step_cases() {
        let always = |_: &Observation, _: &Observation| true;
        let never = |_: &Observation, _: &Observation| false;
        assert_eq!(lift_step(always, &at(&["a"], 1), &at(&["b"], 2)), StepOutcome::AdvanceLeft);
        assert_eq!(lift_step(always, &at(&["a"], 2), &at(&["b"], 1)), StepOutcome::AdvanceRight);
        assert_eq!(lift_step(always, &at(&["a"], 2), &at(&["b"], 2)), StepOutcome::AdvanceBoth);
        assert_eq!(lift_step(never, &at(&["a"], 1), &at(&["b"], 2)), StepOutcome::Incompatible);
    }

    #[test]
    fn merge_requires_equal_times() {
        let merged = merge(&at(&["a"], 2), &at(&["b"], 2)).unwrap();
        assert_eq!(merged, at(&["a", "b"], 2));
        assert_eq!(merge(&at(&[], 5), &at(&["x"], 5)).unwrap(), at(&["x"], 5));
        assert_eq!(merge(&at(&["a"], 1), &at(&["b"], 2)), Err(Error::TimeMismatch));
    }

    #[test]
    fn explicit_pairs_reject_empty_sides() {
        assert!(ComposabilityBase::explicit_pairs(vec![(obs(&[]), obs(&["a"]))]).is_err());
        assert!(ComposabilityBase::explicit_pairs(vec![(obs(&["a"]), obs(&["a"]))]).is_ok());
    }

    #[test]
    fn timestamps_only_matter_by_order() {
        let base = ComposabilityBase::SharedIdentity;
        let e1 = set(&["a", "b"]);
        let e2 = set(&["b", "c"]);
        let halves = Observation::new(obs(&["a"]), TimeStamp::new(1, 2).unwrap());
        let thirds = Observation::new(obs(&["c"]), TimeStamp::new(1, 3).unwrap());
        // a at 1/2 after c at 1/3: same verdict as representative stamps 2,1.
        assert_eq!(
            kappa_sync(&base, &e1, &e2, &halves, &thirds).unwrap(),
            kappa_sync(&base, &e1, &e2, &at(&["a"], 2), &at(&["c"], 1)).unwrap()
        );
    }

    fn start_locked_rules() -> Vec<SyncRule> {
        vec![
            SyncRule::new(
                EventPattern::parse("start(S(i,j))").unwrap(),
                vec![
                    EventPattern::parse("locked(S(k,i)) where k<i").unwrap(),
                    EventPattern::parse("locked(S(j,k)) where j<k").unwrap(),
                ],
            ),
        ]
    }

    fn proto_event(name: &str, i: i64, j: i64) -> Event {
        Event::new(
            name,
            vec![Atom::App("S".into(), vec![Atom::Int(i), Atom::Int(j)])],
        )
    }

    /// The lock rule in its textual form: a start must observe a lock of the
    /// related protocol when one exists in the participating interfaces.
    #[test]
    fn sync_rule_obligation_blocks_and_admits() {
        let rules = start_locked_rules();
        let e1: EventSet = [proto_event("start", 1, 2)].into_iter().collect();
        let e2: EventSet =
            [proto_event("locked", 2, 3), proto_event("other", 2, 3)].into_iter().collect();
        let start = Observation::at_nat(Observable::singleton(proto_event("start", 1, 2)), 1);
        let lacking =
            Observation::at_nat(Observable::singleton(proto_event("other", 2, 3)), 1);
        let locked =
            Observation::at_nat(Observable::singleton(proto_event("locked", 2, 3)), 1);
        assert!(!kappa_sync_shared(&rules, &e1, &e2, &start, &lacking));
        assert!(kappa_sync_shared(&rules, &e1, &e2, &start, &locked));
        // The obligation also forbids the start from going strictly earlier.
        let late = Observation::at_nat(Observable::singleton(proto_event("other", 2, 3)), 2);
        assert!(!kappa_sync_shared(&rules, &e1, &e2, &start, &late));
    }

    /// When no instantiation of the requirement exists in the participating
    /// interfaces, the obligation is out of scope and the start is free.
    #[test]
    fn sync_rule_out_of_scope_is_vacuous() {
        let rules = start_locked_rules();
        let e1: EventSet = [proto_event("start", 1, 2)].into_iter().collect();
        let e2: EventSet = [Event::atom("g")].into_iter().collect();
        let start = Observation::at_nat(Observable::singleton(proto_event("start", 1, 2)), 1);
        let g = Observation::at_nat(Observable::singleton(Event::atom("g")), 1);
        assert!(kappa_sync_shared(&rules, &e1, &e2, &start, &g));
        // And earlier advancement is not blocked either.
        let g_later = Observation::at_nat(Observable::singleton(Event::atom("g")), 2);
        assert!(kappa_sync_shared(&rules, &e1, &e2, &start, &g_later));
    }

    /// Where-clauses constrain the matched identifiers.
    #[test]
    fn sync_rule_where_clause_filters_candidates() {
        let rules = start_locked_rules();
        // locked(S(2,1)) does not match "locked(S(j,k)) where j<k" for the
        // trigger start(S(1,2)): j=2 needs k>2, and it does not match
        // "locked(S(k,i)) where k<i" either (k=2 is not below i=1).
        let e1: EventSet = [proto_event("start", 1, 2)].into_iter().collect();
        let e2: EventSet = [proto_event("locked", 2, 1)].into_iter().collect();
        let start = Observation::at_nat(Observable::singleton(proto_event("start", 1, 2)), 1);
        let wrong =
            Observation::at_nat(Observable::singleton(proto_event("locked", 2, 1)), 1);
        assert!(kappa_sync_shared(&rules, &e1, &e2, &start, &wrong));
        // No candidate in scope means no obligation, so the pair composes on
        // the identity core alone.
    }

    /// An empty requirement list forbids the trigger outright.
    #[test]
    fn sync_rule_empty_requirement_forbids_trigger() {
        let forbidden = Event::atom("never");
        let rules = vec![SyncRule::ground(forbidden.clone(), vec![])];
        let e1: EventSet = [forbidden.clone()].into_iter().collect();
        let e2: EventSet = [Event::atom("g")].into_iter().collect();
        let o1 = Observation::at_nat(Observable::singleton(forbidden), 1);
        let g = Observation::at_nat(Observable::singleton(Event::atom("g")), 1);
        assert!(!kappa_sync_shared(&rules, &e1, &e2, &o1, &g));
        let g_later = Observation::at_nat(Observable::singleton(Event::atom("g")), 2);
        assert!(!kappa_sync_shared(&rules, &e1, &e2, &o1, &g_later));
    }
}
