#include "director/model.hpp"

#include <algorithm>
#include <set>

namespace director {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownStateVar: return "UnknownStateVar";
        case ErrorCode::InvalidStateValue: return "InvalidStateValue";
        case ErrorCode::UnknownTaskType: return "UnknownTaskType";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::EngineAlreadyStarted: return "EngineAlreadyStarted";
        case ErrorCode::EngineStopped: return "EngineStopped";
        case ErrorCode::RegistryInvalid: return "RegistryInvalid";
        case ErrorCode::UnknownUid: return "UnknownUid";
        case ErrorCode::NotARootTask: return "NotARootTask";
        case ErrorCode::DetachedTask: return "DetachedTask";
        case ErrorCode::NotAnAncestor: return "NotAnAncestor";
        case ErrorCode::EmptyGroup: return "EmptyGroup";
        case ErrorCode::UnknownNeed: return "UnknownNeed";
        case ErrorCode::UndeclaredSubtaskType: return "UndeclaredSubtaskType";
        case ErrorCode::RangeOutOfBounds: return "RangeOutOfBounds";
        case ErrorCode::CascadeLimit: return "CascadeLimit";
    }
    return "?";
}

std::string_view to_string(TaskStatus s) {
    switch (s) {
        case TaskStatus::Queued: return "QUEUED";
        case TaskStatus::Running: return "RUNNING";
        case TaskStatus::Retired: return "RETIRED";
    }
    return "?";
}

std::string_view to_string(ProviderKind k) {
    switch (k) {
        case ProviderKind::Start: return "START";
        case ProviderKind::Provide: return "PROVIDE";
        case ProviderKind::Stop: return "STOP";
    }
    return "?";
}

std::string_view to_string(Comparator c) {
    switch (c) {
        case Comparator::EQ: return "EQ";
        case Comparator::NE: return "NE";
        case Comparator::LT: return "LT";
        case Comparator::LE: return "LE";
        case Comparator::GT: return "GT";
        case Comparator::GE: return "GE";
    }
    return "?";
}

std::string_view comparator_symbol(Comparator c) {
    switch (c) {
        case Comparator::EQ: return "==";
        case Comparator::NE: return "!=";
        case Comparator::LT: return "<";
        case Comparator::LE: return "<=";
        case Comparator::GT: return ">";
        case Comparator::GE: return ">=";
    }
    return "?";
}

std::string_view to_string(RunReason r) {
    switch (r) {
        case RunReason::NewTask: return "NEW_TASK";
        case RunReason::Started: return "STARTED";
        case RunReason::Stopped: return "STOPPED";
        case RunReason::SubtaskDone: return "SUBTASK_DONE";
        case RunReason::Pushed: return "PUSHED";
        case RunReason::OtherTrigger: return "OTHER_TRIGGER";
    }
    return "?";
}

std::string_view to_string(RunState r) {
    switch (r) {
        case RunState::NoTask: return "NO_TASK";
        case RunState::Queued: return "QUEUED";
        case RunState::Running: return "RUNNING";
    }
    return "?";
}

std::optional<ProviderKind> parse_provider_kind(std::string_view s) {
    for (auto k : {ProviderKind::Start, ProviderKind::Provide, ProviderKind::Stop}) {
        std::string lower(to_string(k));
        std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
        if (s == to_string(k) || s == lower) return k;
    }
    return std::nullopt;
}

std::optional<RunReason> parse_run_reason(std::string_view s) {
    for (auto r : {RunReason::NewTask, RunReason::Started, RunReason::Stopped, RunReason::SubtaskDone,
                   RunReason::Pushed, RunReason::OtherTrigger}) {
        if (s == to_string(r)) return r;
    }
    return std::nullopt;
}

std::optional<RunState> parse_run_state(std::string_view s) {
    for (auto r : {RunState::NoTask, RunState::Queued, RunState::Running}) {
        if (s == to_string(r)) return r;
    }
    return std::nullopt;
}

std::optional<Comparator> parse_comparator(std::string_view s) {
    for (auto c : {Comparator::EQ, Comparator::NE, Comparator::LT, Comparator::LE, Comparator::GT, Comparator::GE}) {
        if (s == to_string(c) || s == comparator_symbol(c)) return c;
    }
    return std::nullopt;
}

bool compare(Comparator op, std::int64_t lhs, std::int64_t rhs) noexcept {
    switch (op) {
        case Comparator::EQ: return lhs == rhs;
        case Comparator::NE: return lhs != rhs;
        case Comparator::LT: return lhs < rhs;
        case Comparator::LE: return lhs <= rhs;
        case Comparator::GT: return lhs > rhs;
        case Comparator::GE: return lhs >= rhs;
    }
    return false;
}

std::string check_bundle(const SubtaskBundle& bundle) {
    if (bundle.done && bundle.idle) return "bundle carries both DONE and IDLE";
    if (bundle.idle && !bundle.requests.empty()) return "IDLE bundle must not carry task requests";
    std::set<TaskType> seen;
    for (const auto& r : bundle.requests) {
        if (r.task_type.empty()) return "task request without a task type";
        if (!seen.insert(r.task_type).second) return "task type '" + r.task_type + "' requested twice";
    }
    return {};
}

UsesInfo BehaviourContext::uses_of(const TaskType& type) const {
    auto it = uses.find(type);
    if (it == uses.end()) {
        throw DirectorError(ErrorCode::UndeclaredSubtaskType, std::string(group) + " does not use " + type);
    }
    return it->second;
}

std::vector<TaskType> ProviderGroup::declared_subtask_types() const {
    std::vector<TaskType> out;
    auto add = [&](const TaskType& t) {
        if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    };
    for (const auto& p : providers) {
        for (const auto& n : p.needs) add(n);
        for (const auto& u : p.uses) add(u);
    }
    return out;
}

void StateStore::register_var(const std::string& name, std::vector<std::string> labels,
                              const std::string& initial) {
    if (name.empty()) throw DirectorError(ErrorCode::UnknownStateVar, "state variable needs a name");
    if (vars_.count(name)) throw DirectorError(ErrorCode::DuplicateId, "state variable " + name);
    auto it = std::find(labels.begin(), labels.end(), initial);
    if (it == labels.end()) {
        throw DirectorError(ErrorCode::InvalidStateValue, name + " has no value '" + initial + "'");
    }
    StateVar v;
    v.name = name;
    v.initial = v.value = it - labels.begin();
    v.labels = std::move(labels);
    vars_.emplace(name, std::move(v));
}

bool StateStore::has(std::string_view name) const { return vars_.find(name) != vars_.end(); }

const StateVar& StateStore::var(std::string_view name) const {
    auto it = vars_.find(name);
    if (it == vars_.end()) throw DirectorError(ErrorCode::UnknownStateVar, std::string(name));
    return it->second;
}

std::int64_t StateStore::get(std::string_view name) const { return var(name).value; }

void StateStore::set(std::string_view name, std::int64_t value) {
    auto it = vars_.find(name);
    if (it == vars_.end()) throw DirectorError(ErrorCode::UnknownStateVar, std::string(name));
    if (value < 0 || value >= static_cast<std::int64_t>(it->second.labels.size())) {
        throw DirectorError(ErrorCode::InvalidStateValue, std::string(name) + " = " + std::to_string(value));
    }
    it->second.value = value;
}

std::int64_t StateStore::value_of(std::string_view name, std::string_view label) const {
    const auto& v = var(name);
    auto it = std::find(v.labels.begin(), v.labels.end(), label);
    if (it == v.labels.end()) {
        throw DirectorError(ErrorCode::InvalidStateValue, std::string(name) + " has no value '" + std::string(label) + "'");
    }
    return it - v.labels.begin();
}

std::string StateStore::label_of(std::string_view name, std::int64_t value) const {
    const auto& v = var(name);
    if (value >= 0 && value < static_cast<std::int64_t>(v.labels.size())) return v.labels[value];
    return std::to_string(value);
}

std::vector<std::int64_t> StateStore::domain(std::string_view name) const {
    const auto& v = var(name);
    std::vector<std::int64_t> out(v.labels.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::int64_t>(i);
    return out;
}

bool eval_condition(const Condition& c, const StateStore& s) {
    return compare(c.comparator, s.get(c.state_var), c.value);
}

bool assertion_satisfies(const StateAssertion& a, const Condition& c, const StateStore& s) {
    auto dom_a = s.domain(a.state_var);
    s.domain(c.state_var);  // both must be registered
    if (a.state_var != c.state_var) return false;
    bool any = false;
    for (auto v : dom_a) {
        if (!compare(a.comparator, v, a.value)) continue;
        any = true;
        if (!compare(c.comparator, v, c.value)) return false;
    }
    return any;
}

std::string describe(const Condition& c, const StateStore* s) {
    std::string value = std::to_string(c.value);
    if (s && s->has(c.state_var)) value = s->label_of(c.state_var, c.value);
    return c.state_var + " " + std::string(comparator_symbol(c.comparator)) + " " + value;
}

std::string_view to_string(IssueKind k) {
    switch (k) {
        case IssueKind::StopWithoutStart: return "StopWithoutStart";
        case IssueKind::MissingProvide: return "MissingProvide";
        case IssueKind::UnknownNeed: return "UnknownNeed";
        case IssueKind::UnknownUses: return "UnknownUses";
        case IssueKind::UnknownStateVar: return "UnknownStateVar";
        case IssueKind::DuplicateProviderId: return "DuplicateProviderId";
        case IssueKind::LifecycleWithConditions: return "LifecycleWithConditions";
    }
    return "?";
}

bool ValidationReport::contains(IssueKind k) const {
    return std::any_of(issues.begin(), issues.end(), [k](const ValidationIssue& i) { return i.kind == k; });
}

ValidationReport validate_registry(const std::vector<ProviderSpec>& providers, const StateStore& states) {
    ValidationReport report;
    std::set<std::string> ids;
    std::set<TaskType> groups;
    std::vector<TaskType> group_order;
    for (const auto& p : providers) {
        if (groups.insert(p.group).second) group_order.push_back(p.group);
    }
    for (const auto& p : providers) {
        if (!ids.insert(p.id).second) {
            report.issues.push_back({IssueKind::DuplicateProviderId, p.id, "provider id '" + p.id + "' registered twice"});
        }
        if (p.kind != ProviderKind::Provide && (!p.when.empty() || !p.causing.empty() || !p.needs.empty())) {
            report.issues.push_back({IssueKind::LifecycleWithConditions, p.id,
                                     std::string(to_string(p.kind)) + " provider '" + p.id +
                                         "' may not declare When, Causing or Needs"});
        }
        for (const auto& n : p.needs) {
            if (!groups.count(n)) {
                report.issues.push_back({IssueKind::UnknownNeed, p.id, "provider '" + p.id + "' needs unknown task type '" + n + "'"});
            }
        }
        for (const auto& u : p.uses) {
            if (!groups.count(u)) {
                report.issues.push_back({IssueKind::UnknownUses, p.id, "provider '" + p.id + "' uses unknown task type '" + u + "'"});
            }
        }
        auto check_var = [&](const Condition& c, const char* what) {
            if (!states.has(c.state_var)) {
                report.issues.push_back({IssueKind::UnknownStateVar, p.id,
                                         "provider '" + p.id + "' " + what + " unknown state '" + c.state_var + "'"});
            }
        };
        for (const auto& c : p.when) check_var(c, "When references");
        for (const auto& c : p.causing) check_var(c, "Causing references");
    }
    for (const auto& g : group_order) {
        bool start = false, provide = false, stop = false;
        for (const auto& p : providers) {
            if (p.group != g) continue;
            start |= p.kind == ProviderKind::Start;
            provide |= p.kind == ProviderKind::Provide;
            stop |= p.kind == ProviderKind::Stop;
        }
        if (stop && !start && !provide) {
            report.issues.push_back({IssueKind::StopWithoutStart, g, "group '" + g + "' has a Stop provider but no Start or Provide"});
        }
        if (!provide) {
            report.issues.push_back({IssueKind::MissingProvide, g, "group '" + g + "' has no Provide provider"});
        }
    }
    return report;
}

}  // namespace director
