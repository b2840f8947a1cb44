#include "director/scenario/simulator.hpp"

#include <algorithm>

namespace director::scenario {

namespace {

bool rule_matches(const BehaviourRule& rule, const BehaviourContext& ctx) {
    if (!rule.on.empty() && std::find(rule.on.begin(), rule.on.end(), ctx.reason) == rule.on.end()) return false;
    for (const auto& c : rule.if_state) {
        if (!eval_condition(compile(c, *ctx.state), *ctx.state)) return false;
    }
    if (rule.if_uses) {
        const auto info = ctx.uses_of(rule.if_uses->task);
        const auto& states = rule.if_uses->run_state;
        if (!states.empty() && std::find(states.begin(), states.end(), info.run_state) == states.end()) return false;
        if (rule.if_uses->done && *rule.if_uses->done != info.done) return false;
    }
    return ctx.trigger_count >= rule.min_triggers;
}

}  // namespace

Condition compile(const ScenarioCondition& c, const StateStore& states) {
    return Condition{c.var, c.comparator, states.value_of(c.var, c.value)};
}

SubtaskBundle evaluate_rules(const std::vector<BehaviourRule>& rules, const BehaviourContext& ctx) {
    for (const auto& rule : rules) {
        if (!rule_matches(rule, ctx)) continue;
        SubtaskBundle bundle;
        for (const auto& e : rule.emit) {
            switch (e.kind) {
                case RuleEmit::Kind::Done: bundle.done = true; break;
                case RuleEmit::Kind::Idle: bundle.idle = true; break;
                case RuleEmit::Kind::Request: {
                    auto r = e.request;
                    if (r.data == "$data" && ctx.task) r.data = ctx.task->data;
                    bundle.requests.push_back(std::move(r));
                    break;
                }
            }
        }
        return bundle;
    }
    return {};
}

Behaviour scripted_behaviour(std::vector<BehaviourRule> rules) {
    return [rules = std::move(rules)](const BehaviourContext& ctx) { return evaluate_rules(rules, ctx); };
}

void load(Engine& engine, const ScenarioFile& sf) {
    for (const auto& s : sf.states) engine.register_state(s.name, s.values, s.initial);
    const auto& store = engine.graph().state;
    for (const auto& p : sf.providers) {
        ProviderSpec spec;
        spec.id = p.id;
        spec.group = p.group;
        spec.kind = p.kind;
        for (const auto& c : p.when) spec.when.push_back(compile(c, store));
        for (const auto& c : p.causing) spec.causing.push_back(compile(c, store));
        spec.needs = p.needs;
        spec.uses = p.uses;
        spec.behaviour = scripted_behaviour(p.rules);
        engine.register_provider(std::move(spec));
    }
    engine.start();
}

std::string SimulationResult::trace_text() const {
    std::string out;
    for (const auto& e : trace) {
        out += serialize(e);
        out += '\n';
    }
    return out;
}

SimulationResult run_scenario(const ScenarioFile& sf, const SimulationOptions& options) {
    SimulationResult result;
    Engine engine(options.engine);
    if (options.observer) engine.set_observer(options.observer);
    load(engine, sf);

    std::map<std::string, TaskUid> labels;
    const std::int64_t last_tick = sf.script.empty() ? -1 : sf.script.back().at;
    auto wanted = [&](std::int64_t tick) {
        return std::find(options.snapshot_at.begin(), options.snapshot_at.end(), tick) != options.snapshot_at.end();
    };

    std::size_t next = 0;
    std::int64_t tick = 0;
    try {
        for (; tick <= last_tick; ++tick) {
            if (wanted(tick)) result.snapshots.emplace(tick, snapshot(engine));
            if (tick >= options.max_steps) {
                result.step_limit_exceeded = true;
                break;
            }
            for (; next < sf.script.size() && sf.script[next].at == tick; ++next) {
                const auto& ev = sf.script[next];
                switch (ev.action) {
                    case ScriptEvent::Action::Submit: {
                        auto uid = engine.submit_root_task(ev.request.task_type, ev.request.data, ev.request.priority,
                                                           ev.request.optional);
                        if (!ev.label.empty()) labels[ev.label] = uid;
                        break;
                    }
                    case ScriptEvent::Action::Remove: engine.remove_root_task(labels.at(ev.label)); break;
                    case ScriptEvent::Action::Set: engine.state_update(ev.var, ev.value); break;
                    case ScriptEvent::Action::Trigger: engine.external_trigger(ev.group, ev.payload); break;
                }
            }
            while (engine.has_pending_events()) {
                auto report = engine.step();
                ++result.engine_steps;
                result.providers_run += report.providers_run.size();
                if (options.on_step) options.on_step(engine, report);
            }
        }
    } catch (const DirectorError& e) {
        result.error = std::string(to_string(e.code())) + ": " + e.what();
        result.step_limit_exceeded = e.code() == ErrorCode::CascadeLimit;
    }
    result.ticks = tick;
    if (!result.step_limit_exceeded && wanted(tick) && !result.snapshots.count(tick)) {
        result.snapshots.emplace(tick, snapshot(engine));
    }
    result.final_snapshot = snapshot(engine);
    result.trace = engine.trace().range(engine.trace().first_seq(), engine.trace().next_seq());
    return result;
}

}  // namespace director::scenario
