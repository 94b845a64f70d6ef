//! The self-sorting-robots case study: robots, grids, batteries, swap
//! protocols, and the lock-based composability rules coordinating them.
//!
//! Robots move on a shared rectangular grid and read their positions. The
//! grid owns the physics: moves that leave the bounds or land two robots on
//! one cell simply do not appear among its transitions. Swap protocols
//! coordinate a pair of robots to exchange positions when the lower-numbered
//! robot sits directly east of the higher-numbered one; while a protocol runs
//! its swap, every other protocol sharing one of its robots is locked and
//! lends that robot's moves to the running swap.
//!
//! Event vocabulary:
//!
//! - `pos(Rn,x,y)` — robot `n` reads its position;
//! - `move(Rn,d)` — robot `n` moves one cell in direction `d ∈ {N,S,E,W}`;
//! - `start(S(i,j))`, `end(S(i,j))` — a swap protocol begins/finishes;
//! - `locked(S(i,j),r)`, `unlocked(S(i,j),r)` — protocol `S(i,j)` is locked,
//!   lending robot `r` to the protocol that triggered the lock.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::composability::{ComposabilityBase, SyncRule};
use crate::error::{Error, Result};
use crate::event::{Event, EventSet, Observable};
use crate::model::{
    Label, Mode, State, SuccessorFn, TesTransitionSystem, Transition,
};
use crate::runtime::SystemState;
use crate::term::Atom;

/// A robot identifier: a positive integer, unique within a system. The robot
/// with the k-th smallest identifier has sort rank k and target cell (k, 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RobotId(u32);

impl RobotId {
    pub fn new(index: u32) -> Result<RobotId> {
        if index == 0 {
            return Err(Error::Parse("robot identifiers start at 1".into()));
        }
        Ok(RobotId(index))
    }

    pub fn index(&self) -> u32 {
        self.0
    }

    fn atom(&self) -> Atom {
        Atom::Sym(format!("R{}", self.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    N,
    S,
    E,
    W,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::N, Direction::S, Direction::E, Direction::W];

    pub fn delta(self) -> (i64, i64) {
        match self {
            Direction::N => (0, 1),
            Direction::S => (0, -1),
            Direction::E => (1, 0),
            Direction::W => (-1, 0),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Direction::N => "N",
            Direction::S => "S",
            Direction::E => "E",
            Direction::W => "W",
        }
    }
}

pub fn ev_pos(robot: RobotId, x: i64, y: i64) -> Event {
    Event::new("pos", vec![robot.atom(), Atom::Int(x), Atom::Int(y)])
}

pub fn ev_move(robot: RobotId, dir: Direction) -> Event {
    Event::new("move", vec![robot.atom(), Atom::Sym(dir.name().into())])
}

fn protocol_atom(i: RobotId, j: RobotId) -> Atom {
    Atom::App("S".into(), vec![Atom::Int(i.index() as i64), Atom::Int(j.index() as i64)])
}

pub fn ev_start(i: RobotId, j: RobotId) -> Event {
    Event::new("start", vec![protocol_atom(i, j)])
}

pub fn ev_end(i: RobotId, j: RobotId) -> Event {
    Event::new("end", vec![protocol_atom(i, j)])
}

pub fn ev_locked(i: RobotId, j: RobotId, lends: RobotId) -> Event {
    Event::new("locked", vec![protocol_atom(i, j), Atom::Int(lends.index() as i64)])
}

pub fn ev_unlocked(i: RobotId, j: RobotId, lends: RobotId) -> Event {
    Event::new("unlocked", vec![protocol_atom(i, j), Atom::Int(lends.index() as i64)])
}

/// The event set of a robot on an n×m grid: every position read plus the
/// four moves.
pub fn robot_interface(robot: RobotId, n: i64, m: i64) -> EventSet {
    let mut events = Vec::new();
    for x in 0..n {
        for y in 0..m {
            events.push(ev_pos(robot, x, y));
        }
    }
    for d in Direction::ALL {
        events.push(ev_move(robot, d));
    }
    EventSet::new(events)
}

/// A free robot: one state, one transition per interface event, plus a
/// silent self-loop. Prefix-closed by construction.
pub fn make_robot(robot: RobotId, n: i64, m: i64) -> TesTransitionSystem {
    let interface = robot_interface(robot, n, m);
    let state = State::new(Atom::App("robot".into(), vec![robot.atom()]));
    let mut transitions: Vec<(State, Label, State)> = interface
        .iter()
        .map(|e| {
            (state.clone(), Label::untimed(Observable::singleton(e.clone())), state.clone())
        })
        .collect();
    transitions.push((state.clone(), Label::untimed(Observable::empty()), state.clone()));
    TesTransitionSystem::explicit(
        format!("R{}", robot.index()),
        interface,
        state,
        Mode::DelayInsensitive,
        transitions,
    )
    .expect("free robot construction is well-formed")
}

/// A robot following the internal strategy of the sorting example: read the
/// position; from the east wall run the North–West–South detour, otherwise
/// push East; repeat. No silent self-loop, so a permanently blocked move is a
/// genuine dead end.
pub fn make_strategy_robot(robot: RobotId, n: i64, m: i64) -> TesTransitionSystem {
    let interface = robot_interface(robot, n, m);
    let phase = |name: &str| {
        State::new(Atom::App("strat".into(), vec![robot.atom(), Atom::Sym(name.into())]))
    };
    let read = phase("read");
    let go_n = phase("goN");
    let go_w = phase("goW");
    let go_s = phase("goS");
    let go_e = phase("goE");
    let mut transitions = Vec::new();
    for x in 0..n {
        for y in 0..m {
            let target = if x == n - 1 { go_n.clone() } else { go_e.clone() };
            transitions.push((
                read.clone(),
                Label::untimed(Observable::singleton(ev_pos(robot, x, y))),
                target,
            ));
        }
    }
    let mv = |d: Direction| Label::untimed(Observable::singleton(ev_move(robot, d)));
    transitions.push((go_n.clone(), mv(Direction::N), go_w.clone()));
    transitions.push((go_w.clone(), mv(Direction::W), go_s.clone()));
    transitions.push((go_s.clone(), mv(Direction::S), read.clone()));
    transitions.push((go_e.clone(), mv(Direction::E), read.clone()));
    TesTransitionSystem::explicit(
        format!("R{}-strategy", robot.index()),
        interface,
        read,
        Mode::DelayInsensitive,
        transitions,
    )
    .expect("strategy robot construction is well-formed")
}

/// Grid construction options.
#[derive(Debug, Clone, Copy)]
pub struct GridOptions {
    /// Include the silent self-loop at every occupancy. Dropping it makes a
    /// configuration in which no robot can act a genuine dead end instead of
    /// an idling state.
    pub silent_loop: bool,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions { silent_loop: true }
    }
}

fn grid_state(occupancy: &BTreeMap<RobotId, (i64, i64)>) -> State {
    let entries = occupancy
        .iter()
        .map(|(r, (x, y))| {
            Atom::App("at".into(), vec![r.atom(), Atom::Int(*x), Atom::Int(*y)])
        })
        .collect();
    State::new(Atom::App("grid".into(), vec![Atom::App("occ".into(), entries)]))
}

/// Decodes a grid state produced by [`make_grid`].
pub fn decode_grid_state(state: &State) -> Option<BTreeMap<RobotId, (i64, i64)>> {
    let Atom::App(head, args) = state.atom() else {
        return None;
    };
    if head != "grid" || args.len() != 1 {
        return None;
    }
    let Atom::App(occ, entries) = &args[0] else {
        return None;
    };
    if occ != "occ" {
        return None;
    }
    let mut map = BTreeMap::new();
    for entry in entries {
        let Atom::App(at, fields) = entry else {
            return None;
        };
        if at != "at" || fields.len() != 3 {
            return None;
        }
        let Atom::Sym(name) = &fields[0] else {
            return None;
        };
        let index: u32 = name.strip_prefix('R')?.parse().ok()?;
        let x = fields[1].as_int()?;
        let y = fields[2].as_int()?;
        map.insert(RobotId::new(index).ok()?, (x, y));
    }
    Some(map)
}

/// The shared grid: states are injective occupancy maps; a transition
/// observes, per robot, at most one move or one position read, and updates
/// the occupancy. Moves leaving the bounds or entering a cell that is
/// currently occupied do not appear, and no two robots may move onto the
/// same cell in one step — a blocked robot stays blocked until the cell is
/// vacated in an earlier instant.
pub fn make_grid(
    ids: &[RobotId],
    n: i64,
    m: i64,
    init: &BTreeMap<RobotId, (i64, i64)>,
    options: GridOptions,
) -> Result<TesTransitionSystem> {
    if ids.is_empty() {
        return Err(Error::InvalidInit("a grid needs at least one robot".into()));
    }
    let mut seen_cells = std::collections::BTreeSet::new();
    for id in ids {
        let Some(&(x, y)) = init.get(id) else {
            return Err(Error::InvalidInit(format!("no initial cell for R{}", id.index())));
        };
        if x < 0 || x >= n || y < 0 || y >= m {
            return Err(Error::InvalidInit(format!(
                "R{} starts out of bounds at ({x},{y})",
                id.index()
            )));
        }
        if !seen_cells.insert((x, y)) {
            return Err(Error::InvalidInit(format!("two robots share cell ({x},{y})")));
        }
    }
    if init.len() != ids.len() {
        return Err(Error::InvalidInit("initial occupancy mentions unknown robots".into()));
    }

    let mut events = Vec::new();
    for id in ids {
        events.extend(robot_interface(*id, n, m).iter().cloned());
    }
    let interface = EventSet::new(events);
    let ids: Arc<[RobotId]> = Arc::from(ids.to_vec());
    let initial = grid_state(init);

    let successors: SuccessorFn = Arc::new(move |q: &State| {
        let Some(occupancy) = decode_grid_state(q) else {
            return Arc::new(Vec::new());
        };
        // Per-robot choices: stay silent, read the true position, or take an
        // in-bounds move.
        enum Choice {
            Stay,
            Read,
            Move(Direction, (i64, i64)),
        }
        let occupied: std::collections::BTreeSet<(i64, i64)> =
            occupancy.values().copied().collect();
        let mut choices: Vec<(RobotId, Vec<Choice>)> = Vec::new();
        for id in ids.iter() {
            let (x, y) = occupancy[id];
            let mut options_for = vec![Choice::Stay, Choice::Read];
            for d in Direction::ALL {
                let (dx, dy) = d.delta();
                let (tx, ty) = (x + dx, y + dy);
                if tx >= 0 && tx < n && ty >= 0 && ty < m && !occupied.contains(&(tx, ty)) {
                    options_for.push(Choice::Move(d, (tx, ty)));
                }
            }
            choices.push((*id, options_for));
        }

        let mut out: Vec<Transition> = Vec::new();
        // Depth-first combination with incremental injectivity filtering on
        // final cells.
        #[allow(clippy::too_many_arguments)]
        fn expand(
            choices: &[(RobotId, Vec<Choice>)],
            occupancy: &BTreeMap<RobotId, (i64, i64)>,
            idx: usize,
            events: &mut Vec<Event>,
            finals: &mut Vec<(i64, i64)>,
            next: &mut BTreeMap<RobotId, (i64, i64)>,
            out: &mut Vec<Transition>,
            silent_loop: bool,
        ) {
            if idx == choices.len() {
                if events.is_empty() && !silent_loop {
                    return;
                }
                out.push(Transition::new(
                    Label::untimed(Observable::new(events.clone())),
                    grid_state(next),
                ));
                return;
            }
            let (id, options_for) = &choices[idx];
            let current = occupancy[id];
            for choice in options_for {
                let (event, cell) = match choice {
                    Choice::Stay => (None, current),
                    Choice::Read => (Some(ev_pos(*id, current.0, current.1)), current),
                    Choice::Move(d, target) => (Some(ev_move(*id, *d)), *target),
                };
                if finals.contains(&cell) {
                    continue;
                }
                finals.push(cell);
                next.insert(*id, cell);
                if let Some(e) = event.clone() {
                    events.push(e);
                }
                expand(choices, occupancy, idx + 1, events, finals, next, out, silent_loop);
                if event.is_some() {
                    events.pop();
                }
                finals.pop();
            }
        }
        let mut events = Vec::new();
        let mut finals = Vec::new();
        let mut next = occupancy.clone();
        expand(
            &choices,
            &occupancy,
            0,
            &mut events,
            &mut finals,
            &mut next,
            &mut out,
            options.silent_loop,
        );
        out.sort_unstable();
        out.dedup();
        Arc::new(out)
    });

    Ok(TesTransitionSystem::new(
        format!("G{}x{}", n, m),
        interface,
        initial,
        Mode::DelayInsensitive,
        successors,
    ))
}

fn battery_state(robot: RobotId, charge: u32) -> State {
    State::new(Atom::App("battery".into(), vec![robot.atom(), Atom::Int(charge as i64)]))
}

/// Decodes a battery state produced by [`make_battery`], returning the
/// remaining charge.
pub fn decode_battery_state(state: &State) -> Option<(RobotId, u32)> {
    let Atom::App(head, args) = state.atom() else {
        return None;
    };
    if head != "battery" || args.len() != 2 {
        return None;
    }
    let Atom::Sym(name) = &args[0] else {
        return None;
    };
    let index: u32 = name.strip_prefix('R')?.parse().ok()?;
    let charge = args[1].as_int()?;
    Some((RobotId::new(index).ok()?, charge as u32))
}

/// A battery: shares exactly the robot's move events, decrementing one
/// charge unit per observed move. At charge zero the moves disappear and the
/// robot is immobile in any composition containing the battery.
pub fn make_battery(robot: RobotId, capacity: u32) -> TesTransitionSystem {
    let interface: EventSet = Direction::ALL.iter().map(|d| ev_move(robot, *d)).collect();
    let mut transitions = Vec::new();
    for charge in 0..=capacity {
        let state = battery_state(robot, charge);
        transitions.push((state.clone(), Label::untimed(Observable::empty()), state.clone()));
        if charge > 0 {
            for d in Direction::ALL {
                transitions.push((
                    state.clone(),
                    Label::untimed(Observable::singleton(ev_move(robot, d))),
                    battery_state(robot, charge - 1),
                ));
            }
        }
    }
    TesTransitionSystem::explicit(
        format!("B{}", robot.index()),
        interface,
        battery_state(robot, capacity),
        Mode::DelayInsensitive,
        transitions,
    )
    .expect("battery construction is well-formed")
}

fn swap_state(i: RobotId, j: RobotId, phase: &str) -> State {
    State::new(Atom::App(
        "swap".into(),
        vec![protocol_atom(i, j), Atom::Sym(phase.into())],
    ))
}

/// The swap protocol `S(i,j)` (requires `i < j`) on an n×m grid.
///
/// From idle it may lock (lending robot `i` or `j` to another protocol's
/// swap, read included so the lock can share the instant of that protocol's
/// guarded start), pass through bare position reads, or start its own swap
/// when robot `i` reads the cell directly east of robot `j`. The swap then
/// runs `i` North, `i` West together with `j` East, `i` South, and announces
/// the end. While locked it passes through the lent robot's moves and
/// unlocks only together with the borrowing protocol's end.
pub fn make_swap(i: RobotId, j: RobotId, n: i64, m: i64) -> Result<TesTransitionSystem> {
    if i.index() >= j.index() {
        return Err(Error::IdentifierOrder { i: i.index(), j: j.index() });
    }
    let mut events = Vec::new();
    events.extend(robot_interface(i, n, m).iter().cloned());
    events.extend(robot_interface(j, n, m).iter().cloned());
    events.extend([
        ev_start(i, j),
        ev_end(i, j),
        ev_locked(i, j, i),
        ev_locked(i, j, j),
        ev_unlocked(i, j, i),
        ev_unlocked(i, j, j),
    ]);
    let interface = EventSet::new(events);

    let s1 = swap_state(i, j, "s1");
    let locked_i = swap_state(i, j, "s2-lends-i");
    let locked_j = swap_state(i, j, "s2-lends-j");
    let s3 = swap_state(i, j, "s3");
    let s4 = swap_state(i, j, "s4");
    let s5 = swap_state(i, j, "s5");
    let s6 = swap_state(i, j, "s6");

    let mut transitions = Vec::new();
    let untimed = |events: Vec<Event>| Label::untimed(Observable::new(events));

    for (lent, locked_state) in [(i, locked_i.clone()), (j, locked_j.clone())] {
        // Locking coincides with another protocol's guarded start, whose
        // label reads the shared robot's position; the lock carries the same
        // read so the two instants agree on shared events.
        for x in 0..n {
            for y in 0..m {
                transitions.push((
                    s1.clone(),
                    untimed(vec![ev_locked(i, j, lent), ev_pos(lent, x, y)]),
                    locked_state.clone(),
                ));
            }
        }
        transitions.push((
            locked_state.clone(),
            untimed(vec![ev_unlocked(i, j, lent)]),
            s1.clone(),
        ));
        for d in Direction::ALL {
            transitions.push((
                locked_state.clone(),
                untimed(vec![ev_move(lent, d)]),
                locked_state.clone(),
            ));
        }
    }

    // Idle read pass-through: robots may read freely while no swap involves
    // them.
    for robot in [i, j] {
        for x in 0..n {
            for y in 0..m {
                transitions.push((
                    s1.clone(),
                    untimed(vec![ev_pos(robot, x, y)]),
                    s1.clone(),
                ));
            }
        }
    }

    // Guarded start: robot i (the lower identifier) sits directly east of
    // robot j. One start per adjacent cell pair.
    for x in 0..n - 1 {
        for y in 0..m {
            transitions.push((
                s1.clone(),
                untimed(vec![ev_start(i, j), ev_pos(i, x + 1, y), ev_pos(j, x, y)]),
                s3.clone(),
            ));
        }
    }

    // The swap proper: the east-side robot i detours over the row above
    // while j slides east underneath it.
    transitions.push((s3.clone(), untimed(vec![ev_move(i, Direction::N)]), s4.clone()));
    transitions.push((
        s4.clone(),
        untimed(vec![ev_move(i, Direction::W), ev_move(j, Direction::E)]),
        s5.clone(),
    ));
    transitions.push((s5.clone(), untimed(vec![ev_move(i, Direction::S)]), s6.clone()));
    transitions.push((s6.clone(), untimed(vec![ev_end(i, j)]), s1.clone()));

    TesTransitionSystem::explicit(
        format!("S({},{})", i.index(), j.index()),
        interface,
        s1,
        Mode::DelayInsensitive,
        transitions,
    )
}

/// The composability base coordinating robots, grid, and swap protocols:
/// the shared-identity core extended with lock rules.
///
/// For every protocol start (respectively end), each other protocol sharing a
/// robot must simultaneously observe a lock (respectively unlock) lending the
/// shared robot. Conversely a lock or unlock may only occur together with the
/// start or end of a protocol sharing the lent robot, so protocols cannot
/// lend robots spontaneously. With no protocols the base is plain shared
/// identity.
pub fn robots_composability(protocols: &[(RobotId, RobotId)]) -> ComposabilityBase {
    if protocols.is_empty() {
        return ComposabilityBase::SharedIdentity;
    }
    let mut rules = Vec::new();
    let shares = |p: (RobotId, RobotId), r: RobotId| p.0 == r || p.1 == r;
    for &(i, j) in protocols {
        for &(a, b) in protocols {
            if (a, b) == (i, j) {
                continue;
            }
            for shared in [i, j] {
                if shares((a, b), shared) {
                    rules.push(SyncRule::ground(
                        ev_start(i, j),
                        vec![ev_locked(a, b, shared)],
                    ));
                    rules.push(SyncRule::ground(
                        ev_end(i, j),
                        vec![ev_unlocked(a, b, shared)],
                    ));
                }
            }
        }
    }
    for &(a, b) in protocols {
        for lent in [a, b] {
            let starts: Vec<Event> = protocols
                .iter()
                .filter(|&&p| p != (a, b) && shares(p, lent))
                .map(|&(i, j)| ev_start(i, j))
                .collect();
            let ends: Vec<Event> = protocols
                .iter()
                .filter(|&&p| p != (a, b) && shares(p, lent))
                .map(|&(i, j)| ev_end(i, j))
                .collect();
            // An empty requirement list forbids the trigger outright: a lock
            // lending a robot no other protocol shares can never occur.
            rules.push(SyncRule::ground(ev_locked(a, b, lent), starts));
            rules.push(SyncRule::ground(ev_unlocked(a, b, lent), ends));
        }
    }
    ComposabilityBase::Ruleset(rules)
}

/// True when every robot sits on its target cell: the robot with the k-th
/// smallest identifier at (k, 0).
pub fn p_sorted(s: &SystemState) -> Result<bool> {
    let occupancy = s
        .components()
        .find_map(|(_, state)| decode_grid_state(state))
        .ok_or_else(|| Error::MissingComponent("grid".into()))?;
    Ok(occupancy
        .iter()
        .enumerate()
        .all(|(rank, (_, &(x, y)))| x == rank as i64 && y == 0))
}

/// True when every battery in the system is empty. Errors when the system
/// has no battery components.
pub fn p_battery_out(s: &SystemState) -> Result<bool> {
    let mut found = false;
    for (_, state) in s.components() {
        if let Some((_, charge)) = decode_battery_state(state) {
            found = true;
            if charge > 0 {
                return Ok(false);
            }
        }
    }
    if !found {
        return Err(Error::MissingComponent("battery".into()));
    }
    Ok(true)
}
