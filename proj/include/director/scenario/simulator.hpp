#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "director/engine.hpp"
#include "director/inspection.hpp"
#include "director/scenario/scenario.hpp"

namespace director::scenario {

/// First matching rule decides the bundle; no match gives an empty bundle.
SubtaskBundle evaluate_rules(const std::vector<BehaviourRule>& rules, const BehaviourContext& ctx);

/// Wraps a rule table as an engine behaviour callback.
Behaviour scripted_behaviour(std::vector<BehaviourRule> rules);

Condition compile(const ScenarioCondition& c, const StateStore& states);

/// Registers the scenario's states and providers on a fresh engine and starts it.
void load(Engine& engine, const ScenarioFile& sf);

struct SimulationOptions {
    /// Number of script ticks to run before giving up.
    std::int64_t max_steps = 10000;
    /// Tick indices at which to capture a snapshot. A snapshot at tick N shows
    /// the graph after ticks 0..N-1, so 0 is the freshly loaded graph.
    std::vector<std::int64_t> snapshot_at;
    EngineConfig engine;
    InvocationObserver observer;
    /// Called after every engine step.
    std::function<void(const Engine&, const StepReport&)> on_step;
};

struct SimulationResult {
    GraphSnapshot final_snapshot;
    std::vector<TraceEvent> trace;
    std::map<std::int64_t, GraphSnapshot> snapshots;
    std::int64_t ticks = 0;
    std::size_t engine_steps = 0;
    std::size_t providers_run = 0;
    bool step_limit_exceeded = false;
    /// Set when the engine raised an error mid-run.
    std::string error;

    std::string trace_text() const;
};

/// Replays the script tick by tick. Every event scheduled for a tick is
/// queued, then step() is called until the queue drains.
SimulationResult run_scenario(const ScenarioFile& sf, const SimulationOptions& options = {});

}  // namespace director::scenario
