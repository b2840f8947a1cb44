#include "director/engine.hpp"

#include <algorithm>
#include <tuple>

namespace director {

namespace {

std::string uid_str(TaskUid uid) { return std::to_string(to_int(uid)); }

bool when_holds(const ProviderSpec& p, const StateStore& s) {
    return std::all_of(p.when.begin(), p.when.end(), [&](const Condition& c) { return eval_condition(c, s); });
}

bool contains(const std::vector<TaskType>& v, const TaskType& x) { return std::find(v.begin(), v.end(), x) != v.end(); }

struct ResetOnExit {
    StepReport*& slot;
    ~ResetOnExit() { slot = nullptr; }
};

}  // namespace

Engine::Engine(EngineConfig config) : config_(config), trace_(config.trace_cap) {}

void Engine::register_state(const std::string& name, std::vector<std::string> labels, const std::string& initial) {
    if (started_) throw DirectorError(ErrorCode::EngineAlreadyStarted, "cannot register state " + name);
    graph_.state.register_var(name, std::move(labels), initial);
}

int Engine::register_provider(ProviderSpec spec) {
    if (started_) throw DirectorError(ErrorCode::EngineAlreadyStarted, "cannot register provider " + spec.id);
    if (spec.group.empty()) throw DirectorError(ErrorCode::UnknownTaskType, "provider '" + spec.id + "' has no group");
    for (const auto& [type, group] : graph_.groups) {
        for (const auto& p : group.providers) {
            if (p.id == spec.id) throw DirectorError(ErrorCode::DuplicateId, spec.id);
        }
    }
    if (spec.kind != ProviderKind::Provide && (!spec.when.empty() || !spec.causing.empty() || !spec.needs.empty())) {
        throw DirectorError(ErrorCode::RegistryInvalid, spec.id + ": lifecycle providers take no When, Causing or Needs");
    }
    for (const auto* list : {&spec.when, &spec.causing}) {
        for (const auto& c : *list) {
            if (!graph_.state.has(c.state_var)) throw DirectorError(ErrorCode::UnknownStateVar, c.state_var);
        }
    }
    auto it = graph_.groups.find(spec.group);
    if (it == graph_.groups.end()) {
        ProviderGroup g;
        g.task_type = spec.group;
        it = graph_.groups.emplace(spec.group, std::move(g)).first;
        graph_.group_order.push_back(spec.group);
    }
    spec.decl_index = static_cast<int>(it->second.providers.size());
    it->second.providers.push_back(std::move(spec));
    return it->second.providers.back().decl_index;
}

void Engine::start() {
    if (started_) throw DirectorError(ErrorCode::EngineAlreadyStarted, "start() called twice");
    std::vector<ProviderSpec> all;
    for (const auto& type : graph_.group_order) {
        for (const auto& p : graph_.group(type).providers) all.push_back(p);
    }
    validation_ = validate_registry(all, graph_.state);
    if (!validation_.ok()) {
        std::string msg;
        for (const auto& issue : validation_.issues) msg += (msg.empty() ? "" : "; ") + issue.message;
        throw DirectorError(ErrorCode::RegistryInvalid, msg);
    }
    started_ = true;
}

void Engine::shutdown() { stopped_ = true; }

void Engine::require_running() const {
    if (!started_ || stopped_) throw DirectorError(ErrorCode::EngineStopped, started_ ? "engine shut down" : "engine not started");
}

TaskUid Engine::submit_root_task(const TaskType& type, std::string data, std::int64_t priority, bool optional) {
    require_running();
    if (!graph_.has_group(type)) throw DirectorError(ErrorCode::UnknownTaskType, type);
    std::lock_guard lock(queue_mutex_);
    TaskUid uid{next_uid_++};
    issued_roots_.insert(uid);
    queue_.push_back(RootTaskSubmitted{uid, TaskRequest{type, std::move(data), priority, optional}});
    return uid;
}

void Engine::remove_root_task(TaskUid uid) {
    require_running();
    std::lock_guard lock(queue_mutex_);
    if (!issued_roots_.count(uid)) {
        if (to_int(uid) > 0 && to_int(uid) < next_uid_) throw DirectorError(ErrorCode::NotARootTask, uid_str(uid));
        throw DirectorError(ErrorCode::UnknownUid, uid_str(uid));
    }
    queue_.push_back(RootTaskRemoved{uid});
}

void Engine::state_update(const std::string& state_var, std::int64_t value) {
    require_running();
    const auto& var = graph_.state.var(state_var);
    if (value < 0 || value >= static_cast<std::int64_t>(var.labels.size())) {
        throw DirectorError(ErrorCode::InvalidStateValue, state_var + " = " + std::to_string(value));
    }
    std::lock_guard lock(queue_mutex_);
    queue_.push_back(StateChanged{state_var, value});
}

void Engine::state_update(const std::string& state_var, const std::string& label) {
    state_update(state_var, graph_.state.value_of(state_var, label));
}

void Engine::external_trigger(const TaskType& group, std::string payload) {
    require_running();
    if (!graph_.has_group(group)) throw DirectorError(ErrorCode::UnknownTaskType, group);
    std::lock_guard lock(queue_mutex_);
    queue_.push_back(ExternalTrigger{group, std::move(payload)});
}

bool Engine::has_pending_events() const {
    std::lock_guard lock(queue_mutex_);
    return !queue_.empty();
}

StepReport Engine::step() {
    require_running();
    StepReport report;
    DirectorEvent ev;
    {
        std::lock_guard lock(queue_mutex_);
        if (queue_.empty()) return report;
        ev = std::move(queue_.front());
        queue_.pop_front();
    }
    report_ = &report;
    ResetOnExit guard{report_};
    const auto first = trace_.next_seq();
    ++graph_.step_counter;
    process(ev);
    settle();
    refresh_watchers();
    report.events_processed = 1;
    report.trace_delta = trace_.range(first, trace_.next_seq());
    return report;
}

UsesInfo Engine::uses_info(const TaskType& group, const TaskType& subtask_type) const {
    const auto& g = graph_.group(group);
    if (!contains(g.declared_subtask_types(), subtask_type)) {
        throw DirectorError(ErrorCode::UndeclaredSubtaskType, group + " does not use " + subtask_type);
    }
    for (auto uid : g.subtasks) {
        const auto& t = graph_.task(uid);
        if (t.task_type != subtask_type) continue;
        return UsesInfo{t.status == TaskStatus::Running ? RunState::Running : RunState::Queued, t.done};
    }
    return UsesInfo{};
}

void Engine::process(const DirectorEvent& ev) {
    std::visit(
        [this](const auto& e) {
            using E = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<E, RootTaskSubmitted>) {
                TaskInstance t;
                t.uid = e.uid;
                t.task_type = e.request.task_type;
                t.data = e.request.data;
                t.priority = e.request.priority;
                t.optional = e.request.optional;
                graph_.tasks.emplace(t.uid, t);
                graph_.root_tasks.push_back(t.uid);
                emit(TraceKind::TaskRequested, t.task_type, {}, t.uid,
                     {{"priority", std::to_string(t.priority)},
                      {"optional", t.optional ? "true" : "false"},
                      {"parent", "Root"}});
            } else if constexpr (std::is_same_v<E, RootTaskRemoved>) {
                if (graph_.has_task(e.uid)) retire(e.uid, "removed");
            } else if constexpr (std::is_same_v<E, StateChanged>) {
                graph_.state.set(e.state_var, e.value);
                emit(TraceKind::StateChanged, {}, {}, std::nullopt,
                     {{"var", e.state_var}, {"value", graph_.state.label_of(e.state_var, e.value)}});
            } else if constexpr (std::is_same_v<E, ExternalTrigger>) {
                auto& g = graph_.group(e.group);
                if (g.active()) {
                    ++g.trigger_count;
                    run_provider(e.group, *g.active_provider, RunReason::OtherTrigger, e.payload);
                } else {
                    emit(TraceKind::TriggerSuppressed, e.group, {}, std::nullopt, {{"payload", e.payload}});
                }
            }
        },
        ev);
}

void Engine::settle() {
    for (std::size_t pass = 0;; ++pass) {
        if (pass > config_.cascade_limit) {
            throw DirectorError(ErrorCode::CascadeLimit, "no fixed point after " + std::to_string(pass) + " passes");
        }
        if (check_pushes()) continue;
        if (reselect_providers()) continue;
        if (drain_runs()) continue;
        if (acquire_pass()) continue;
        break;
    }
}

bool Engine::check_pushes() {
    for (const auto& type : graph_.group_order) {
        auto& g = graph_.group(type);
        if (!g.pushed_by) continue;
        const auto rec = *g.pushed_by;
        const ProviderSpec* q = g.active_spec();
        const bool provider_ok = q && when_holds(*q, graph_.state);
        const bool condition_met = eval_condition(rec.unmet, graph_.state);
        auto clear = [&] {
            g.pushed_by.reset();
            emit(TraceKind::GroupPushed, type, q ? q->id : std::string{}, rec.pusher,
                 {{"action", "clear"}, {"condition", describe(rec.unmet, &graph_.state)}});
        };
        if (g.assigned_task == rec.pusher) {
            if (condition_met || !provider_ok) {
                clear();
                return true;
            }
            continue;
        }
        const bool waiting = graph_.has_task(rec.pusher) && graph_.task(rec.pusher).status == TaskStatus::Queued;
        if (!g.active() || !waiting || !provider_ok) {
            clear();
            return true;
        }
        if (condition_met) {
            clear();
            bool pushed = false;
            try_acquire_set(acquisition_set(graph_.task(rec.pusher)), pushed);
            return true;
        }
    }
    return false;
}

bool Engine::reselect_providers() {
    for (const auto& type : graph_.group_order) {
        auto& g = graph_.group(type);
        if (!g.active() || g.pushed_by) continue;
        const TaskUid uid = *g.assigned_task;
        auto sel = select_provider(g, graph_.state);
        if (auto* none = std::get_if<NoneEligible>(&sel)) {
            lose_control(uid, "when " + describe(none->unmet.front(), &graph_.state));
            return true;
        }
        const auto idx = std::get<std::size_t>(sel);
        if (idx == *g.active_provider) continue;
        const auto& next = g.providers[idx];
        if (!can_acquire_needs(next, graph_.task(uid), graph_)) {
            lose_control(uid, "needs of " + next.id);
            return true;
        }
        const std::string from = g.providers[*g.active_provider].id;
        evict_needs(next, type, uid);
        if (g.assigned_task != uid) return true;
        g.active_provider = idx;
        g.trigger_count = 0;
        emit(TraceKind::TaskAssigned, type, next.id, uid, {{"switched_from", from}});
        run_provider(type, idx, RunReason::NewTask);
        return true;
    }
    return false;
}

bool Engine::drain_runs() {
    if (runs_.empty()) return false;
    while (!runs_.empty()) {
        auto req = std::move(runs_.front());
        runs_.pop_front();
        auto& g = graph_.group(req.group);
        if (g.assigned_task != req.expected || !g.active_provider) continue;
        run_provider(req.group, *g.active_provider, req.reason);
    }
    return true;
}

bool Engine::acquire_pass() {
    // Candidates in a canonical order: non-optional chains first, then by the
    // (priority desc, uid asc) path from the root down. This makes the winner
    // of a freed resource take it first instead of after a round of evictions.
    using Key = std::pair<bool, std::vector<std::pair<std::int64_t, std::uint64_t>>>;
    std::vector<std::pair<Key, TaskUid>> candidates;
    for (const auto& [uid, t] : graph_.tasks) {
        if (t.status != TaskStatus::Queued) continue;
        Key key;
        const TaskInstance* cur = &t;
        while (cur) {
            key.first = key.first || cur->optional;
            key.second.emplace_back(-cur->priority, to_int(cur->uid));
            cur = graph_.parent_task(*cur);
        }
        std::reverse(key.second.begin(), key.second.end());
        candidates.emplace_back(std::move(key), uid);
    }
    std::sort(candidates.begin(), candidates.end());
    std::set<TaskUid> tried;
    for (const auto& [key, uid] : candidates) {
        if (tried.count(uid)) continue;
        auto set = acquisition_set(graph_.task(uid));
        tried.insert(set.begin(), set.end());
        bool pushed = false;
        if (try_acquire_set(set, pushed)) return true;
    }
    return false;
}

std::vector<TaskUid> Engine::acquisition_set(const TaskInstance& t) const {
    if (t.is_root() || t.optional) return {t.uid};
    std::vector<TaskUid> out;
    for (auto uid : graph_.group(*t.parent).subtasks) {
        if (!graph_.task(uid).optional) out.push_back(uid);
    }
    return out;
}

bool Engine::try_acquire_set(const std::vector<TaskUid>& members, bool& pushed) {
    std::vector<TaskUid> queued, running;
    for (auto uid : members) {
        if (!graph_.has_task(uid)) continue;
        const auto& t = graph_.task(uid);
        (t.status == TaskStatus::Running ? running : queued).push_back(uid);
    }
    if (queued.empty()) return false;

    std::set<TaskType> reserved;
    for (auto uid : running) {
        const auto& t = graph_.task(uid);
        reserved.insert(t.task_type);
        if (const auto* spec = graph_.group(t.task_type).active_spec()) reserved.insert(spec->needs.begin(), spec->needs.end());
    }
    std::vector<TakeCheck> checks;
    bool all_ok = true;
    for (auto uid : queued) {
        auto check = take_check(graph_.task(uid));
        if (check.ok) {
            bool clash = std::any_of(check.footprint.begin(), check.footprint.end(),
                                     [&](const TaskType& x) { return reserved.count(x) != 0; });
            if (clash) {
                check.ok = false;
                check.reason = "conflicts with a sibling";
            } else {
                reserved.insert(check.footprint.begin(), check.footprint.end());
            }
        }
        all_ok = all_ok && check.ok;
        checks.push_back(std::move(check));
    }

    if (all_ok) {
        for (std::size_t i = 0; i < queued.size(); ++i) {
            if (!graph_.has_task(queued[i]) || graph_.task(queued[i]).status != TaskStatus::Queued) continue;
            auto check = i == 0 ? checks[0] : take_check(graph_.task(queued[i]));
            if (!check.ok) break;
            transfer(queued[i], check.provider, RunReason::NewTask);
        }
        return true;
    }

    for (std::size_t i = 0; i < queued.size(); ++i) {
        auto& t = graph_.task(queued[i]);
        block(t, t.task_type, checks[i].ok ? "sibling blocked" : checks[i].reason);
    }
    if (!running.empty()) {
        lose_control(running.front(), "sibling blocked");
        return true;
    }
    for (std::size_t i = 0; i < queued.size(); ++i) {
        if (!checks[i].push_unmet) continue;
        if (try_push(graph_.task(queued[i]), checks[i])) {
            pushed = true;
            return true;
        }
        break;
    }
    return false;
}

std::set<TaskType> Engine::released_by_losing(const TaskInstance& u) const {
    std::set<TaskType> out{u.task_type};
    if (u.is_root()) return out;
    const auto& q = graph_.group(*u.parent);
    std::set<TaskType> lost{u.task_type};
    if (!u.optional) {
        for (auto uid : q.subtasks) {
            const auto& s = graph_.task(uid);
            if (uid != u.uid && !s.optional && s.status == TaskStatus::Running) {
                out.insert(s.task_type);
                lost.insert(s.task_type);
            }
        }
    }
    const auto* spec = q.active_spec();
    if (spec && q.assigned_task &&
        std::any_of(spec->needs.begin(), spec->needs.end(), [&](const TaskType& n) { return lost.count(n) != 0; })) {
        auto up = released_by_losing(graph_.task(*q.assigned_task));
        out.insert(up.begin(), up.end());
    }
    return out;
}

Engine::TakeCheck Engine::take_check(const TaskInstance& t) const {
    TakeCheck check;
    const auto& g = graph_.group(t.task_type);
    const auto ancestors = graph_.ancestor_groups(t);
    if (contains(ancestors, t.task_type)) {
        check.reason = "cycle";
        return check;
    }
    if (g.assigned_task == t.uid) {
        check.ok = true;
        check.provider = *g.active_provider;
        return check;
    }
    const TaskInstance* incumbent = g.assigned_task ? &graph_.task(*g.assigned_task) : nullptr;
    if (incumbent && challenge(*incumbent, t, graph_) == ChallengeOutcome::IncumbentHolds) {
        check.reason = "held by " + uid_str(incumbent->uid);
        return check;
    }

    auto self_defeating = [&](const ProviderSpec& p) {
        std::set<TaskType> released;
        if (incumbent) released = released_by_losing(*incumbent);
        for (const auto& need : p.needs) {
            const auto& h = graph_.group(need);
            if (!h.assigned_task) continue;
            const auto& u = graph_.task(*h.assigned_task);
            if (contains(graph_.ancestor_groups(u), t.task_type)) continue;
            auto more = released_by_losing(u);
            released.insert(more.begin(), more.end());
        }
        return std::any_of(ancestors.begin(), ancestors.end(), [&](const TaskType& a) { return released.count(a) != 0; });
    };

    auto sel = select_provider(g, graph_.state);
    if (auto* none = std::get_if<NoneEligible>(&sel)) {
        check.reason = "when " + describe(none->unmet.front(), &graph_.state);
        for (std::size_t i = 0; i < g.providers.size(); ++i) {
            if (g.providers[i].kind != ProviderKind::Provide) continue;
            if (can_acquire_needs(g.providers[i], t, graph_) && !self_defeating(g.providers[i])) {
                check.push_unmet = none->unmet.front();
                check.push_base = i;
            }
            break;
        }
        return check;
    }
    const auto idx = std::get<std::size_t>(sel);
    const auto& p = g.providers[idx];
    std::set<TaskType> footprint;
    if (!can_acquire_needs(p, t, graph_, footprint)) {
        check.reason = "needs of " + p.id;
        return check;
    }
    if (self_defeating(p)) {
        check.reason = "would evict an ancestor";
        return check;
    }
    check.ok = true;
    check.provider = idx;
    check.footprint = std::move(footprint);
    check.footprint.insert(t.task_type);
    return check;
}

bool Engine::try_push(const TaskInstance& t, const TakeCheck& check) {
    for (const auto& [type, g] : graph_.groups) {
        if (g.pushed_by && g.pushed_by->pusher == t.uid) return false;
    }
    const auto& own = graph_.group(t.task_type);
    const auto blockers = push_blockers(own.providers[check.push_base], t, graph_);
    auto target = find_push_target(*check.push_unmet, blockers, graph_);
    if (!target) return false;
    const PushRecord record{t.uid, *check.push_unmet};
    auto& h = graph_.group(target->group);
    const auto& q = h.providers[target->provider];

    if (target->group == t.task_type) {
        if (!can_acquire_needs(q, t, graph_)) return false;
        transfer(t.uid, target->provider, RunReason::Pushed, record);
        return true;
    }
    // One push record per group; later pushers watch until it clears.
    if (!h.active() || h.pushed_by) return false;
    for (const auto& need : q.needs) {
        const auto& holder = graph_.group(need);
        if (holder.assigned_task && !contains(graph_.ancestor_groups(graph_.task(*holder.assigned_task)), target->group)) {
            return false;
        }
    }
    h.pushed_by = record;
    emit(TraceKind::GroupPushed, target->group, q.id, t.uid,
         {{"action", "push"}, {"condition", describe(record.unmet, &graph_.state)}, {"by_group", t.task_type}});
    h.active_provider = target->provider;
    h.trigger_count = 0;
    run_provider(target->group, target->provider, RunReason::Pushed);
    return true;
}

std::vector<TaskUid> Engine::deepest_first(const std::vector<std::pair<TaskType, TaskUid>>& holders) const {
    // Leaves go first so every holder is blocked in its own right before an
    // ancestor's release retires it.
    std::vector<std::pair<std::size_t, TaskUid>> keyed;
    for (const auto& [need, holder] : holders) keyed.emplace_back(graph_.ancestor_groups(graph_.task(holder)).size(), holder);
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<TaskUid> out;
    for (const auto& [depth, holder] : keyed) out.push_back(holder);
    return out;
}

void Engine::transfer(TaskUid uid, std::size_t provider, RunReason reason, std::optional<PushRecord> push) {
    const TaskType type = graph_.task(uid).task_type;
    auto& g = graph_.group(type);
    // Holders are recorded before any eviction: losing one leg usually
    // releases the other through the sibling cascade.
    std::vector<std::pair<TaskType, TaskUid>> evicted;
    if (g.assigned_task && *g.assigned_task != uid) evicted.emplace_back(type, *g.assigned_task);
    const auto& spec = g.providers[provider];
    for (const auto& need : spec.needs) {
        const auto& h = graph_.group(need);
        if (!h.assigned_task) continue;
        const auto holder = *h.assigned_task;
        if (!contains(graph_.ancestor_groups(graph_.task(holder)), type)) evicted.emplace_back(need, holder);
    }
    evict(deepest_first(evicted), "preempted by " + uid_str(uid));
    for (const auto& [group, from] : evicted) {
        emit(TraceKind::ControlTransferred, group, {}, uid, {{"from", uid_str(from)}, {"to_group", type}});
    }

    auto& t = graph_.task(uid);
    g.assigned_task = uid;
    g.active_provider = provider;
    g.started = true;
    g.trigger_count = 0;
    t.status = TaskStatus::Running;
    t.blocked_reason.clear();
    emit(TraceKind::TaskAssigned, type, spec.id, uid);
    if (push) {
        g.pushed_by = push;
        emit(TraceKind::GroupPushed, type, spec.id, push->pusher,
             {{"action", "push"}, {"condition", describe(push->unmet, &graph_.state)}, {"by_group", type}});
    }
    for (std::size_t i = 0; i < g.providers.size(); ++i) {
        if (g.providers[i].kind == ProviderKind::Start) run_provider(type, i, RunReason::Started);
    }
    run_provider(type, provider, reason);
}

void Engine::evict_needs(const ProviderSpec& p, const TaskType& owner, TaskUid winner) {
    std::vector<std::pair<TaskType, TaskUid>> holders;
    for (const auto& need : p.needs) {
        const auto& h = graph_.group(need);
        if (!h.assigned_task) continue;
        const auto holder = *h.assigned_task;
        if (!contains(graph_.ancestor_groups(graph_.task(holder)), owner)) holders.emplace_back(need, holder);
    }
    evict(deepest_first(holders), "preempted by " + uid_str(winner));
    for (const auto& [need, holder] : holders) {
        emit(TraceKind::ControlTransferred, need, {}, winner, {{"from", uid_str(holder)}, {"to_group", owner}});
    }
}

void Engine::evict(const std::vector<TaskUid>& order, const std::string& reason) {
    // Every holder is blocked before any cascade runs, so none is retired by
    // an ancestor's release without a block of its own.
    std::vector<TaskUid> stopped;
    for (auto uid : order) {
        if (graph_.has_task(uid) && graph_.task(uid).status == TaskStatus::Running) {
            lose_control(uid, reason, false);
            stopped.push_back(uid);
        }
    }
    for (auto uid : stopped) {
        if (graph_.has_task(uid)) cascade_up(uid);
    }
}

void Engine::lose_control(TaskUid uid, const std::string& reason, bool upward) {
    auto& t = graph_.task(uid);
    if (t.status != TaskStatus::Running) return;
    const TaskType type = t.task_type;
    release_group(type);
    t.status = TaskStatus::Queued;
    t.blocked_reason = reason;
    emit(TraceKind::TaskBlocked, type, {}, uid, {{"reason", reason}});
    if (upward) cascade_up(uid);
}

void Engine::cascade_up(TaskUid uid) {
    const auto& t = graph_.task(uid);
    if (t.is_root()) return;
    const TaskType type = t.task_type;
    auto& q = graph_.group(*t.parent);
    if (!q.active()) return;
    std::set<TaskType> lost{type};
    if (!t.optional) {
        const auto siblings = q.subtasks;
        for (auto s : siblings) {
            if (s == uid || !graph_.has_task(s)) continue;
            const auto& st = graph_.task(s);
            if (st.optional || st.status != TaskStatus::Running) continue;
            lost.insert(st.task_type);
            lose_control(s, "sibling " + uid_str(uid) + " lost control", false);
        }
    }
    const auto* spec = q.active_spec();
    if (spec && q.assigned_task &&
        std::any_of(spec->needs.begin(), spec->needs.end(), [&](const TaskType& n) { return lost.count(n) != 0; })) {
        lose_control(*q.assigned_task, "lost needed " + *std::find_if(spec->needs.begin(), spec->needs.end(),
                                                                      [&](const TaskType& n) { return lost.count(n) != 0; }));
    }
}

void Engine::release_group(const TaskType& type) {
    auto& g = graph_.group(type);
    if (!g.assigned_task) return;
    const auto subtasks = g.subtasks;
    for (auto s : subtasks) {
        if (graph_.has_task(s)) retire(s, "parent released");
    }
    g.subtasks.clear();
    g.last_subtasks = {};
    if (g.started) {
        for (std::size_t i = 0; i < g.providers.size(); ++i) {
            if (g.providers[i].kind == ProviderKind::Stop) run_provider(type, i, RunReason::Stopped);
        }
    }
    if (g.pushed_by) {
        emit(TraceKind::GroupPushed, type, g.active_spec() ? g.active_spec()->id : std::string{}, g.pushed_by->pusher,
             {{"action", "clear"}, {"condition", describe(g.pushed_by->unmet, &graph_.state)}});
        g.pushed_by.reset();
    }
    g.started = false;
    g.active_provider.reset();
    g.assigned_task.reset();
    g.trigger_count = 0;
}

void Engine::retire(TaskUid uid, const std::string& reason) {
    auto& t = graph_.task(uid);
    const TaskType type = t.task_type;
    if (t.status == TaskStatus::Running) release_group(type);
    if (t.parent && graph_.has_group(*t.parent)) {
        auto& subs = graph_.group(*t.parent).subtasks;
        subs.erase(std::remove(subs.begin(), subs.end(), uid), subs.end());
    }
    if (t.is_root()) {
        auto& roots = graph_.root_tasks;
        roots.erase(std::remove(roots.begin(), roots.end(), uid), roots.end());
    }
    emit(TraceKind::TaskRetired, type, {}, uid, {{"reason", reason}});
    graph_.tasks.erase(uid);
}

void Engine::run_provider(const TaskType& group, std::size_t provider, RunReason reason, std::string_view payload) {
    auto& g = graph_.group(group);
    const auto& spec = g.providers[provider];
    // A Provide provider never runs while one of its When conditions fails.
    if (spec.kind == ProviderKind::Provide && !when_holds(spec, graph_.state)) return;
    auto bundle = invoke(g, provider, reason, payload);
    if (spec.kind != ProviderKind::Provide) return;
    apply_bundle(group, bundle);
}

SubtaskBundle Engine::invoke(ProviderGroup& g, std::size_t provider, RunReason reason, std::string_view payload) {
    const auto& spec = g.providers[provider];
    const auto& task = graph_.task(*g.assigned_task);
    BehaviourContext ctx;
    ctx.reason = reason;
    ctx.task = &task;
    ctx.group = g.task_type;
    ctx.provider = spec.id;
    ctx.state = &graph_.state;
    ctx.payload = payload;
    ctx.trigger_count = g.trigger_count;
    for (const auto& type : g.declared_subtask_types()) ctx.uses[type] = uses_info(g.task_type, type);

    std::vector<std::pair<std::string, std::string>> detail{{"reason", std::string(to_string(reason))}};
    if (!payload.empty()) detail.emplace_back("payload", std::string(payload));
    emit(TraceKind::ProviderRun, g.task_type, spec.id, task.uid, std::move(detail));
    if (report_) report_->providers_run.push_back(spec.id);
    if (observer_) observer_(spec, ctx);
    if (!spec.behaviour) return {};

    SubtaskBundle bundle;
    try {
        bundle = spec.behaviour(ctx);
    } catch (const std::exception& e) {
        emit(TraceKind::CallbackFailure, g.task_type, spec.id, task.uid, {{"message", e.what()}});
        return SubtaskBundle::Idle();
    }
    auto problem = check_bundle(bundle);
    for (const auto& r : bundle.requests) {
        if (problem.empty() && !graph_.has_group(r.task_type)) problem = "unknown task type '" + r.task_type + "'";
    }
    if (!problem.empty()) {
        emit(TraceKind::CallbackFailure, g.task_type, spec.id, task.uid, {{"message", problem}});
        return SubtaskBundle::Idle();
    }
    return bundle;
}

void Engine::apply_bundle(const TaskType& group, const SubtaskBundle& bundle) {
    auto& g = graph_.group(group);
    if (!g.assigned_task) return;
    const TaskUid owner = *g.assigned_task;
    const std::string provider = g.active_spec() ? g.active_spec()->id : std::string{};
    if (bundle.idle) {
        emit(TraceKind::IdleEmitted, group, provider, owner);
        return;
    }
    if (bundle.done) {
        emit(TraceKind::DoneEmitted, group, provider, owner);
        auto& t = graph_.task(owner);
        t.done = true;
        if (t.is_root()) {
            retire(owner, "done");
            return;
        }
        const auto& parent = graph_.group(*t.parent);
        runs_.push_back(RunRequest{*t.parent, RunReason::SubtaskDone, *parent.assigned_task});
    }

    const auto previous = g.subtasks;
    for (auto uid : previous) {
        const auto& st = graph_.task(uid);
        bool kept = std::any_of(bundle.requests.begin(), bundle.requests.end(),
                                [&](const TaskRequest& r) { return r.task_type == st.task_type; });
        if (!kept) retire(uid, "no longer requested");
    }
    std::vector<TaskUid> order;
    for (const auto& r : bundle.requests) {
        auto existing = std::find_if(g.subtasks.begin(), g.subtasks.end(),
                                     [&](TaskUid uid) { return graph_.task(uid).task_type == r.task_type; });
        if (existing != g.subtasks.end()) {
            auto& st = graph_.task(*existing);
            st.done = false;
            if (st.data != r.data || st.priority != r.priority || st.optional != r.optional) {
                st.data = r.data;
                st.priority = r.priority;
                st.optional = r.optional;
                emit(TraceKind::TaskRequested, r.task_type, {}, st.uid,
                     {{"priority", std::to_string(r.priority)},
                      {"optional", r.optional ? "true" : "false"},
                      {"parent", group},
                      {"update", "true"}});
                if (st.status == TaskStatus::Running) runs_.push_back(RunRequest{r.task_type, RunReason::NewTask, st.uid});
            }
            order.push_back(st.uid);
            continue;
        }
        TaskInstance t;
        t.uid = TaskUid{next_uid_++};
        t.task_type = r.task_type;
        t.data = r.data;
        t.priority = r.priority;
        t.optional = r.optional;
        t.parent = group;
        graph_.tasks.emplace(t.uid, t);
        order.push_back(t.uid);
        emit(TraceKind::TaskRequested, r.task_type, {}, t.uid,
             {{"priority", std::to_string(r.priority)}, {"optional", r.optional ? "true" : "false"}, {"parent", group}});
    }
    g.subtasks = std::move(order);
    g.last_subtasks = bundle;
}

void Engine::block(TaskInstance& t, const std::string& group, const std::string& reason) {
    if (t.blocked_reason == reason) return;
    t.blocked_reason = reason;
    emit(TraceKind::TaskBlocked, group, {}, t.uid, {{"reason", reason}});
}

void Engine::emit(TraceKind kind, std::string group, std::string provider, std::optional<TaskUid> task,
                  std::vector<std::pair<std::string, std::string>> detail) {
    TraceEvent e;
    e.step = graph_.step_counter;
    e.kind = kind;
    e.group = std::move(group);
    e.provider = std::move(provider);
    e.task = task;
    e.detail = std::move(detail);
    trace_.append(std::move(e));
}

void Engine::refresh_watchers() {
    for (auto& [type, g] : graph_.groups) g.watchers.clear();
    std::vector<const TaskInstance*> queued;
    for (const auto& [uid, t] : graph_.tasks) {
        if (t.status == TaskStatus::Queued) queued.push_back(&t);
    }
    std::stable_sort(queued.begin(), queued.end(), [](const TaskInstance* a, const TaskInstance* b) {
        return std::tie(b->priority, a->uid) < std::tie(a->priority, b->uid);
    });
    for (const auto* t : queued) graph_.group(t->task_type).watchers.push_back(t->uid);
}

}  // namespace director
