//! Events, observables, and interface sets.
//!
//! Events are interned: constructing the same name/argument combination twice
//! yields handles that share storage and compare by a dense id. Ordering is
//! structural (name, then arguments) so that canonical iteration order does
//! not depend on construction order.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

use rustc_hash::{FxHashMap, FxHashSet};

use crate::error::{Error, Result};
use crate::term::{Atom, Parser};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct EventData {
    pub name: String,
    pub args: Vec<Atom>,
}

#[derive(Default)]
struct Interner {
    ids: FxHashMap<Arc<EventData>, u32>,
}

fn interner() -> &'static Mutex<Interner> {
    static INTERNER: OnceLock<Mutex<Interner>> = OnceLock::new();
    INTERNER.get_or_init(|| Mutex::new(Interner::default()))
}

/// An observable happening: an interned structured atom `name(args…)`.
#[derive(Clone)]
pub struct Event {
    id: u32,
    data: Arc<EventData>,
}

impl Event {
    pub fn new(name: impl Into<String>, args: Vec<Atom>) -> Event {
        let data = EventData { name: name.into(), args };
        let mut interner = interner().lock().unwrap();
        if let Some((key, id)) = interner.ids.get_key_value(&data) {
            return Event { id: *id, data: Arc::clone(key) };
        }
        let id = interner.ids.len() as u32;
        let data = Arc::new(data);
        interner.ids.insert(Arc::clone(&data), id);
        Event { id, data }
    }

    /// An event with no arguments.
    pub fn atom(name: impl Into<String>) -> Event {
        Event::new(name, Vec::new())
    }

    pub fn name(&self) -> &str {
        &self.data.name
    }

    pub fn args(&self) -> &[Atom] {
        &self.data.args
    }

    pub(crate) fn intern_id(&self) -> u32 {
        self.id
    }

    /// Parses an event from `name(arg,…)` syntax, e.g. `move(R1,N)`.
    pub fn parse(input: &str) -> Result<Event> {
        let mut p = Parser::new(input);
        let atom = p.atom()?;
        p.skip_ws();
        if !p.at_end() {
            return Err(Error::Parse(format!("trailing input after event in {input:?}")));
        }
        match atom {
            Atom::Sym(name) => Ok(Event::atom(name)),
            Atom::App(name, args) => Ok(Event::new(name, args)),
            Atom::Int(_) => Err(Error::Parse(format!("an event needs a name: {input:?}"))),
        }
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Event {}

impl Hash for Event {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u32(self.id);
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.id == other.id {
            return Ordering::Equal;
        }
        self.data.cmp(&other.data)
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.args().is_empty() {
            write!(f, "{}", self.name())
        } else {
            write!(f, "{}(", self.name())?;
            for (i, a) in self.args().iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")
        }
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A finite set of events observed at one instant; `∅` is the silent observable.
///
/// Stored sorted and deduplicated behind an `Arc`, so clones are cheap and
/// iteration order is canonical.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Observable {
    events: Arc<[Event]>,
}

impl Observable {
    pub fn empty() -> Observable {
        static EMPTY: OnceLock<Arc<[Event]>> = OnceLock::new();
        Observable { events: Arc::clone(EMPTY.get_or_init(|| Arc::from(Vec::new()))) }
    }

    pub fn new(mut events: Vec<Event>) -> Observable {
        events.sort_unstable();
        events.dedup();
        Observable { events: Arc::from(events) }
    }

    pub fn singleton(event: Event) -> Observable {
        Observable { events: Arc::from(vec![event]) }
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn contains(&self, event: &Event) -> bool {
        self.events.iter().any(|e| e == event)
    }

    pub fn union(&self, other: &Observable) -> Observable {
        if self.is_empty() {
            return other.clone();
        }
        if other.is_empty() {
            return self.clone();
        }
        let mut events: Vec<Event> = self.events.iter().cloned().collect();
        events.extend(other.events.iter().cloned());
        Observable::new(events)
    }

    /// The events of `self` that belong to `set`.
    pub fn restrict(&self, set: &EventSet) -> Observable {
        if self.is_empty() {
            return self.clone();
        }
        Observable::new(self.events.iter().filter(|e| set.contains(e)).cloned().collect())
    }

    pub fn is_disjoint_from(&self, set: &EventSet) -> bool {
        self.events.iter().all(|e| !set.contains(e))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Event> {
        self.events.iter()
    }
}

impl FromIterator<Event> for Observable {
    fn from_iter<I: IntoIterator<Item = Event>>(iter: I) -> Self {
        Observable::new(iter.into_iter().collect())
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.events.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// An interface: the finite event set of a component, with O(1) membership.
#[derive(Clone)]
pub struct EventSet {
    events: Arc<[Event]>,
    ids: Arc<FxHashSet<u32>>,
}

impl EventSet {
    pub fn new(mut events: Vec<Event>) -> EventSet {
        events.sort_unstable();
        events.dedup();
        let ids = events.iter().map(Event::intern_id).collect();
        EventSet { events: Arc::from(events), ids: Arc::new(ids) }
    }

    pub fn empty() -> EventSet {
        EventSet::new(Vec::new())
    }

    pub fn contains(&self, event: &Event) -> bool {
        self.ids.contains(&event.intern_id())
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn union(&self, other: &EventSet) -> EventSet {
        let mut events: Vec<Event> = self.events.iter().cloned().collect();
        events.extend(other.events.iter().cloned());
        EventSet::new(events)
    }

    pub fn is_disjoint_from(&self, other: &EventSet) -> bool {
        let (small, large) =
            if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.events.iter().all(|e| !large.contains(e))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Event> {
        self.events.iter()
    }

    pub fn to_observable(&self) -> Observable {
        Observable::new(self.events.iter().cloned().collect())
    }
}

impl PartialEq for EventSet {
    fn eq(&self, other: &Self) -> bool {
        self.events == other.events
    }
}

impl Eq for EventSet {}

impl FromIterator<Event> for EventSet {
    fn from_iter<I: IntoIterator<Item = Event>>(iter: I) -> Self {
        EventSet::new(iter.into_iter().collect())
    }
}

impl fmt::Debug for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.events.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}
