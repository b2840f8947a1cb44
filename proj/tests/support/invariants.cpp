#include "invariants.hpp"

namespace director::testing {

void InvariantChecker::fail(Invariant kind, const std::string& what) {
    ++counts_[kind];
    if (violations_.size() < 50) violations_.push_back(what);
}

std::size_t InvariantChecker::count(Invariant kind) const {
    auto it = counts_.find(kind);
    return it == counts_.end() ? 0 : it->second;
}

InvocationObserver InvariantChecker::observer() {
    return [this](const ProviderSpec& spec, const BehaviourContext& ctx) {
        if (spec.kind != ProviderKind::Provide) return;
        ++provide_invocations;
        for (const auto& c : spec.when) {
            if (!eval_condition(c, *ctx.state)) fail(Invariant::WhenSafety, "PROVIDE " + spec.id + " invoked with failing When " + describe(c));
        }
    };
}

void InvariantChecker::attach(Engine& engine) { engine.set_observer(observer()); }

void InvariantChecker::install(scenario::SimulationOptions& options) {
    options.observer = observer();
    options.on_step = [this](const Engine& e, const StepReport& r) { after_step(e, r); };
}

void InvariantChecker::after_step(const Engine& engine, const StepReport& report) {
    check_trace(engine, report);
    check_structure(engine);
}

void InvariantChecker::check_structure(const Engine& engine) {
    const auto& g = engine.graph();
    ++mutex_checks;
    std::map<TaskType, int> running_per_type;
    for (const auto& [uid, t] : g.tasks) {
        if (t.status != TaskStatus::Running) continue;
        if (++running_per_type[t.task_type] > 1) fail(Invariant::Mutex, "two running tasks in group " + t.task_type);
        const auto& grp = g.group(t.task_type);
        if (grp.assigned_task != uid) fail(Invariant::Mutex, "running task " + std::to_string(to_int(uid)) + " not assigned in " + t.task_type);
    }
    for (const auto& [type, grp] : g.groups) {
        if (grp.active() != grp.active_provider.has_value()) fail(Invariant::Mutex, "group " + type + " has task/provider mismatch");
        if (grp.assigned_task) {
            if (!g.has_task(*grp.assigned_task)) {
                fail(Invariant::Mutex, "group " + type + " assigned to a dead task");
                continue;
            }
            const auto& t = g.task(*grp.assigned_task);
            if (t.status != TaskStatus::Running || t.task_type != type) fail(Invariant::Mutex, "group " + type + " assignment inconsistent");
        }
        if (!grp.active() && !grp.subtasks.empty()) fail(Invariant::Mutex, "inactive group " + type + " still owns subtasks");
        if (!grp.active()) continue;

        std::size_t required = 0, required_running = 0;
        for (auto uid : grp.subtasks) {
            const auto& s = g.task(uid);
            if (s.optional) continue;
            ++required;
            if (s.status == TaskStatus::Running) ++required_running;
        }
        if (required_running != 0 && required_running != required) {
            fail(Invariant::AllOrNothing, "group " + type + " runs " + std::to_string(required_running) + " of " + std::to_string(required) +
                 " required subtasks");
        }
        if (required > 0 && required_running == required) {
            for (auto uid : grp.subtasks) {
                const auto& s = g.task(uid);
                if (!s.optional) continue;
                if (s.status == TaskStatus::Running) ++optional_running_seen;
                if (s.status == TaskStatus::Queued) ++optional_blocked_seen;
            }
        }
    }
}

void InvariantChecker::check_trace(const Engine& engine, const StepReport& report) {
    const auto& g = engine.graph();
    blocked_groups_.clear();
    for (const auto& e : report.trace_delta) {
        if (e.seq != next_seq_) fail(Invariant::Trace, "trace seq gap at " + std::to_string(e.seq));
        next_seq_ = e.seq + 1;
        switch (e.kind) {
            case TraceKind::TaskBlocked:
                blocked_groups_.insert(e.group);
                break;
            case TraceKind::GroupPushed:
            case TraceKind::StateChanged:
                if (!e.group.empty()) blocked_groups_.insert(e.group);
                break;
            case TraceKind::ControlTransferred:
                if (!blocked_groups_.count(e.group)) fail(Invariant::Trace, "CONTROL_TRANSFERRED on " + e.group + " without a preceding cause");
                break;
            case TraceKind::TaskAssigned: {
                if (!e.get("switched_from").empty()) break;
                const auto& grp = g.group(e.group);
                bool has_start = false;
                for (const auto& p : grp.providers) has_start = has_start || p.kind == ProviderKind::Start;
                if (has_start) expect_start_.insert(e.group);
                break;
            }
            case TraceKind::ProviderRun: {
                const auto reason = e.get("reason");
                if (reason.empty()) fail(Invariant::Trace, "PROVIDER_RUN without a reason");
                if (expect_start_.count(e.group)) {
                    expect_start_.erase(e.group);
                    if (reason != "STARTED") {
                        fail(Invariant::Lifecycle, "group " + e.group + " ran " + e.provider + " before its Start provider");
                    } else {
                        ++acquisitions_with_start;
                    }
                }
                // Start/Stop counts only pair up in groups that declare both.
                const auto& grp = g.group(e.group);
                bool has_start = false, has_stop = false;
                for (const auto& p : grp.providers) {
                    has_start = has_start || p.kind == ProviderKind::Start;
                    has_stop = has_stop || p.kind == ProviderKind::Stop;
                }
                const bool paired = has_start && has_stop;
                if (reason == "STARTED") {
                    if (paired && ++live_starts_[e.group] > 1) fail(Invariant::Lifecycle, "group " + e.group + " started twice without a stop");
                    ran_since_stop_[e.group] = true;
                } else if (reason == "STOPPED") {
                    if (!ran_since_stop_[e.group]) fail(Invariant::Lifecycle, "group " + e.group + " stopped without a prior start or provide");
                    ran_since_stop_[e.group] = false;
                    if (paired && --live_starts_[e.group] < 0) fail(Invariant::Lifecycle, "group " + e.group + " stopped more often than started");
                } else {
                    ran_since_stop_[e.group] = true;
                }
                break;
            }
            default: break;
        }
    }
}

}  // namespace director::testing
