//! Non-learning schedulers.
//!
//! [`MaxFlowScheduler`] is the maximal-utilisation baseline: agents and live
//! tasks form a bipartite graph (source → agent capacity 1, agent → task
//! capacity 1 when the agent has the skill, task → sink capacity equal to
//! the task's parallelism) and a maximum flow assigns as many agents as
//! possible. It ignores locations entirely.
//!
//! [`GreedyScheduler`] and [`RandomScheduler`] are reference points that
//! bracket the other schedulers from above and below.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{Action, AgentState, TaskInstance};
use crate::engine::Observation;
use crate::floorplan::FloorPlan;
use crate::pathing::PathMemo;

/// Everything a scheduler may look at when a decision is due.
#[derive(Debug, Clone, Copy)]
pub struct DecisionContext<'a> {
    pub time: u64,
    pub plan: &'a FloorPlan,
    pub agents: &'a [AgentState],
    pub tasks: &'a [Option<TaskInstance>],
    pub observations: &'a [Observation],
}

pub trait Scheduler {
    fn name(&self) -> String;

    /// Called before each episode with that episode's seed.
    fn begin_episode(&mut self, _seed: u64) {}

    /// One action per agent, in agent order.
    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Vec<Action>;
}

pub const SOURCE: usize = 0;
pub const SINK: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub capacity: u32,
    pub flow: u32,
}

/// Residual network with arcs stored in forward/reverse pairs: arc `2k` is
/// the k-th real arc, `2k + 1` its reverse.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    num_agents: usize,
    task_slots: Vec<usize>,
    arcs: Vec<FlowArc>,
    adjacency: Vec<Vec<usize>>,
}

impl FlowNetwork {
    fn new(num_agents: usize, task_slots: Vec<usize>) -> Self {
        let n = 2 + num_agents + task_slots.len();
        Self {
            num_agents,
            task_slots,
            arcs: Vec::new(),
            adjacency: vec![Vec::new(); n],
        }
    }

    fn add_arc(&mut self, from: usize, to: usize, capacity: u32) {
        let k = self.arcs.len();
        self.arcs.push(FlowArc { from, to, capacity, flow: 0 });
        self.arcs.push(FlowArc { from: to, to: from, capacity: 0, flow: 0 });
        self.adjacency[from].push(k);
        self.adjacency[to].push(k + 1);
    }

    pub fn num_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn agent_node(&self, agent: usize) -> usize {
        2 + agent
    }

    pub fn task_node(&self, task: usize) -> usize {
        2 + self.num_agents + task
    }

    /// Slot index of each task node, ascending.
    pub fn task_slots(&self) -> &[usize] {
        &self.task_slots
    }

    /// The real (forward) arcs in insertion order.
    pub fn arcs(&self) -> impl Iterator<Item = &FlowArc> {
        self.arcs.iter().step_by(2)
    }

    pub fn num_arcs(&self) -> usize {
        self.arcs.len() / 2
    }

    fn residual(&self, k: usize) -> u32 {
        let arc = &self.arcs[k];
        if k % 2 == 0 {
            arc.capacity - arc.flow
        } else {
            self.arcs[k - 1].flow
        }
    }

    fn push(&mut self, k: usize, amount: u32) {
        if k % 2 == 0 {
            self.arcs[k].flow += amount;
        } else {
            self.arcs[k - 1].flow -= amount;
        }
    }

    fn bfs(&self) -> Vec<Option<usize>> {
        let mut via = vec![None; self.num_nodes()];
        let mut seen = vec![false; self.num_nodes()];
        seen[SOURCE] = true;
        let mut queue = VecDeque::from([SOURCE]);
        while let Some(u) = queue.pop_front() {
            for &k in &self.adjacency[u] {
                let v = self.arcs[k].to;
                if !seen[v] && self.residual(k) > 0 {
                    seen[v] = true;
                    via[v] = Some(k);
                    queue.push_back(v);
                }
            }
        }
        via
    }

    /// Nodes reachable from the source in the residual network.
    pub fn source_side(&self) -> Vec<bool> {
        let via = self.bfs();
        (0..self.num_nodes()).map(|v| v == SOURCE || via[v].is_some()).collect()
    }

    /// Total capacity of real arcs leaving the source side of the residual
    /// cut. Equals the flow value once the flow is maximum.
    pub fn cut_capacity(&self) -> u32 {
        let side = self.source_side();
        self.arcs()
            .filter(|a| side[a.from] && !side[a.to])
            .map(|a| a.capacity)
            .sum()
    }

    pub fn flow_value(&self) -> u32 {
        self.arcs().filter(|a| a.from == SOURCE).map(|a| a.flow).sum()
    }

    /// Net flow into `node` minus net flow out of it.
    pub fn imbalance(&self, node: usize) -> i64 {
        self.arcs()
            .map(|a| {
                if a.to == node {
                    a.flow as i64
                } else if a.from == node {
                    -(a.flow as i64)
                } else {
                    0
                }
            })
            .sum()
    }
}

/// Builds the agent/task flow network over the live tasks, in ascending
/// agent id and slot order.
pub fn build_network(agents: &[AgentState], tasks: &[Option<TaskInstance>]) -> FlowNetwork {
    let live: Vec<&TaskInstance> = tasks.iter().flatten().collect();
    let mut net = FlowNetwork::new(agents.len(), live.iter().map(|t| t.slot).collect());
    for a in 0..agents.len() {
        net.add_arc(SOURCE, net.agent_node(a), 1);
    }
    for (a, agent) in agents.iter().enumerate() {
        for (j, task) in live.iter().enumerate() {
            if agent.skills.contains(task.spec.task_type) {
                net.add_arc(net.agent_node(a), net.task_node(j), 1);
            }
        }
    }
    for (j, task) in live.iter().enumerate() {
        net.add_arc(net.task_node(j), SINK, task.spec.capacity);
    }
    net
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowResult {
    pub value: u32,
    /// `(agent index, task slot)` for every saturated agent → task arc.
    pub matches: Vec<(usize, usize)>,
}

/// Integral maximum flow by shortest augmenting paths (Edmonds–Karp).
pub fn max_flow(net: &mut FlowNetwork) -> FlowResult {
    loop {
        let via = net.bfs();
        if via[SINK].is_none() {
            break;
        }
        let mut path = Vec::new();
        let mut v = SINK;
        while let Some(k) = via[v] {
            path.push(k);
            v = net.arcs[k].from;
        }
        let amount = path.iter().map(|&k| net.residual(k)).min().unwrap_or(0);
        for k in path {
            net.push(k, amount);
        }
    }
    let first_task = 2 + net.num_agents;
    let matches = net
        .arcs()
        .filter(|a| a.flow > 0 && (2..first_task).contains(&a.from) && a.to >= first_task)
        .map(|a| (a.from - 2, net.task_slots[a.to - first_task]))
        .collect();
    FlowResult {
        value: net.flow_value(),
        matches,
    }
}

/// Maximal-utilisation assignment; unmatched agents stay.
pub fn maxflow_schedule(agents: &[AgentState], tasks: &[Option<TaskInstance>]) -> Vec<Action> {
    let mut net = build_network(agents, tasks);
    let result = max_flow(&mut net);
    let mut actions = vec![Action::Stay; agents.len()];
    for (agent, slot) in result.matches {
        actions[agent] = Action::Slot(slot);
    }
    actions
}

/// Each agent heads for the nearest task it is skilled for, ties going to
/// the lower slot. Agents do not coordinate, so capacity can be exceeded.
pub fn greedy_nearest_schedule(plan: &FloorPlan, agents: &[AgentState], tasks: &[Option<TaskInstance>]) -> Vec<Action> {
    let mut memo = PathMemo::new();
    agents
        .iter()
        .map(|agent| {
            tasks
                .iter()
                .flatten()
                .filter(|t| agent.skills.contains(t.spec.task_type))
                .filter_map(|t| {
                    let d = memo.path(plan, agent.location, t.location).ok()?.distance?;
                    Some((d, t.slot))
                })
                .min()
                .map_or(Action::Stay, |(_, slot)| Action::Slot(slot))
        })
        .collect()
}

/// Uniform over `Stay` and the occupied slots, independently per agent.
pub fn random_schedule(agents: &[AgentState], tasks: &[Option<TaskInstance>], rng: &mut impl Rng) -> Vec<Action> {
    let occupied: Vec<usize> = tasks.iter().flatten().map(|t| t.slot).collect();
    agents
        .iter()
        .map(|_| {
            let k = rng.gen_range(0..=occupied.len());
            if k == 0 {
                Action::Stay
            } else {
                Action::Slot(occupied[k - 1])
            }
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct MaxFlowScheduler;

impl Scheduler for MaxFlowScheduler {
    fn name(&self) -> String {
        "maxflow".into()
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Vec<Action> {
        maxflow_schedule(ctx.agents, ctx.tasks)
    }
}

#[derive(Debug, Clone, Default)]
pub struct GreedyScheduler;

impl Scheduler for GreedyScheduler {
    fn name(&self) -> String {
        "greedy".into()
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Vec<Action> {
        greedy_nearest_schedule(ctx.plan, ctx.agents, ctx.tasks)
    }
}

#[derive(Debug, Clone)]
pub struct RandomScheduler {
    rng: ChaCha8Rng,
}

impl RandomScheduler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Default for RandomScheduler {
    fn default() -> Self {
        Self::new(0)
    }
}

impl Scheduler for RandomScheduler {
    fn name(&self) -> String {
        "random".into()
    }

    fn begin_episode(&mut self, seed: u64) {
        // separate stream from the environment's own generator
        self.rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_0F_5C4E_D01E);
    }

    fn decide(&mut self, ctx: &DecisionContext<'_>) -> Vec<Action> {
        random_schedule(ctx.agents, ctx.tasks, &mut self.rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{SkillSet, TaskSpec, TaskType};
    use crate::floorplan::{make_open_grid, Coord};

    pub(crate) fn agent(id: usize, skills: &[u8], at: Coord) -> AgentState {
        AgentState {
            id,
            location: at,
            skills: SkillSet::new(skills.iter().map(|&s| TaskType(s))),
            assignment: Action::Stay,
        }
    }

    fn task(slot: usize, ty: u8, capacity: u32, at: Coord) -> Option<TaskInstance> {
        Some(TaskInstance::spawn(slot, TaskSpec::new(TaskType(ty), 10, capacity), at, 0))
    }

    const O: Coord = Coord::new(0, 0);

    #[test]
    fn minimal_network() {
        let net = build_network(&[agent(0, &[0], O)], &[task(0, 0, 1, O)]);
        assert_eq!(net.num_nodes(), 4);
        assert_eq!(net.num_arcs(), 3);
    }

    #[test]
    fn full_compatibility_arcs() {
        let agents: Vec<_> = (0..3).map(|i| agent(i, &[0, 1, 2], O)).collect();
        let tasks: Vec<_> = (0..3).map(|j| task(j, j as u8, 1, O)).collect();
        let net = build_network(&agents, &tasks);
        let middle = net
            .arcs()
            .filter(|a| a.from != SOURCE && a.to != SINK)
            .count();
        assert_eq!(middle, 9);
    }

    #[test]
    fn unskilled_agent_is_isolated() {
        let net = build_network(&[agent(0, &[], O)], &[task(0, 0, 1, O)]);
        assert!(net.arcs().all(|a| a.from != net.agent_node(0) ));
    }

    #[test]
    fn flow_examples() {
        // circular two-skill compatibility
        let agents: Vec<_> = (0..3).map(|i| agent(i, &[i as u8, ((i + 1) % 3) as u8], O)).collect();
        let tasks: Vec<_> = (0..3).map(|j| task(j, j as u8, 1, O)).collect();
        let mut net = build_network(&agents, &tasks);
        assert_eq!(max_flow(&mut net).value, 3);
        assert_eq!(net.cut_capacity(), 3);

        let agents: Vec<_> = (0..3).map(|i| agent(i, &[0], O)).collect();
        let mut net = build_network(&agents, &[task(0, 0, 2, O)]);
        assert_eq!(max_flow(&mut net).value, 2);

        let agents: Vec<_> = (0..2).map(|i| agent(i, &[0], O)).collect();
        let mut net = build_network(&agents, &[task(0, 0, 1, O)]);
        let r = max_flow(&mut net);
        assert_eq!(r.value, 1);
        assert_eq!(r.matches, vec![(0, 0)]);
    }

    #[test]
    fn conservation_after_flow() {
        let agents: Vec<_> = (0..4).map(|i| agent(i, &[(i % 2) as u8, 2], O)).collect();
        let tasks = vec![task(0, 0, 1, O), None, task(2, 1, 2, O), task(3, 2, 1, O)];
        let mut net = build_network(&agents, &tasks);
        let r = max_flow(&mut net);
        for v in 2..net.num_nodes() {
            assert_eq!(net.imbalance(v), 0);
        }
        assert!(net.arcs().all(|a| a.flow <= a.capacity));
        assert_eq!(r.value, 4);
        assert_eq!(r.value, net.cut_capacity());
        assert_eq!(net.task_slots(), &[0, 2, 3]);
    }

    #[test]
    fn maxflow_schedule_cases() {
        let agents: Vec<_> = (0..2).map(|i| agent(i, &[0, 1], O)).collect();
        assert_eq!(maxflow_schedule(&agents, &[None, None]), vec![Action::Stay; 2]);

        let tasks = vec![task(0, 0, 5, O), task(1, 1, 5, O)];
        let actions = maxflow_schedule(&agents, &tasks);
        assert!(actions.iter().all(|a| *a != Action::Stay));

        // only coordinates differ
        let moved: Vec<_> = agents
            .iter()
            .map(|a| AgentState { location: Coord::new(3, 2), ..a.clone() })
            .collect();
        let moved_tasks = vec![task(0, 0, 5, Coord::new(4, 4)), task(1, 1, 5, Coord::new(1, 3))];
        assert_eq!(maxflow_schedule(&moved, &moved_tasks), actions);
    }

    #[test]
    fn greedy_cases() {
        let plan = make_open_grid(6, 6);
        let a = [agent(0, &[0], O)];
        let tasks = vec![task(0, 0, 1, Coord::new(5, 0)), task(1, 0, 1, Coord::new(3, 0))];
        assert_eq!(greedy_nearest_schedule(&plan, &a, &tasks), vec![Action::Slot(1)]);

        let tasks = vec![task(0, 1, 1, Coord::new(1, 0))];
        assert_eq!(greedy_nearest_schedule(&plan, &a, &tasks), vec![Action::Stay]);

        let tasks = vec![task(0, 0, 1, Coord::new(0, 2)), task(1, 0, 1, Coord::new(2, 0))];
        assert_eq!(greedy_nearest_schedule(&plan, &a, &tasks), vec![Action::Slot(0)]);
    }

    #[test]
    fn random_never_targets_empty_slots() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let agents = [agent(0, &[0], O)];
        for _ in 0..100 {
            assert_eq!(random_schedule(&agents, &[None, None], &mut rng), vec![Action::Stay]);
        }
        let tasks = vec![None, task(1, 0, 1, O), None];
        for _ in 0..100 {
            let a = random_schedule(&agents, &tasks, &mut rng)[0];
            assert!(a == Action::Stay || a == Action::Slot(1));
        }
    }

    #[test]
    fn random_is_reproducible() {
        let agents: Vec<_> = (0..3).map(|i| agent(i, &[0], O)).collect();
        let tasks = vec![task(0, 0, 1, O), task(1, 0, 1, O)];
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20).map(|_| random_schedule(&agents, &tasks, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
    }

    #[test]
    fn random_is_uniform() {
        let agents = [agent(0, &[0], O)];
        let tasks = vec![task(0, 0, 1, O), None, task(2, 0, 1, O), task(3, 0, 1, O)];
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 10_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let idx = match random_schedule(&agents, &tasks, &mut rng)[0] {
                Action::Stay => 0,
                Action::Slot(0) => 1,
                Action::Slot(2) => 2,
                Action::Slot(3) => 3,
                other => panic!("unexpected {other:?}"),
            };
            counts[idx] += 1;
        }
        let expected = n as f64 / 4.0;
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        for c in counts {
            assert!((c as f64 - expected).abs() < 3.0 * sigma, "{counts:?}");
        }
        // 3 degrees of freedom, p = 0.001
        assert!(chi2 < 16.27, "chi2 = {chi2}");
    }
}
