//! Fixtures shared by the benchmarks.

use epcomm::belief::DepthBound;
use epcomm::compiler::{compile, prune_unreachable, ClassicalTask, CompileOptions};
use epcomm::domains::{gridworld, CommModel, GeneratedTask, GridworldConfig, Scenario};
use epcomm::epddl::{render_domain, render_problem};

/// Gridworld 3x3 with three agents, seed 1.
pub fn grid_3x3(scenario: Scenario, model: CommModel) -> GeneratedTask {
    let cfg = GridworldConfig::seeded(3, 3, 3, scenario, model, 1).expect("3x3 layout");
    gridworld(&cfg).expect("3x3 task")
}

/// Rendered domain and problem text.
pub fn texts(t: &GeneratedTask) -> (String, String) {
    (render_domain(&t.domain), render_problem(&t.problem))
}

pub fn bench_options() -> CompileOptions {
    CompileOptions {
        depth: DepthBound::default(),
        turn_taking: true,
    }
}

/// Compiled and pruned, as the bench matrix searches it.
pub fn compiled(t: &GeneratedTask) -> ClassicalTask {
    prune_unreachable(&compile(&t.domain, &t.problem, bench_options()).expect("compiles"))
}
