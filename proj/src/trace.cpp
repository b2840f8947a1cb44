#include "director/trace.hpp"

#include <json.hpp>

namespace director {

namespace {
constexpr TraceKind kAllKinds[] = {
    TraceKind::ProviderRun,  TraceKind::TaskRequested,      TraceKind::TaskAssigned, TraceKind::TaskBlocked,
    TraceKind::TaskRetired,  TraceKind::GroupPushed,        TraceKind::ControlTransferred,
    TraceKind::DoneEmitted,  TraceKind::IdleEmitted,        TraceKind::StateChanged,
    TraceKind::TriggerSuppressed, TraceKind::CallbackFailure,
};
}

std::string_view to_string(TraceKind k) {
    switch (k) {
        case TraceKind::ProviderRun: return "PROVIDER_RUN";
        case TraceKind::TaskRequested: return "TASK_REQUESTED";
        case TraceKind::TaskAssigned: return "TASK_ASSIGNED";
        case TraceKind::TaskBlocked: return "TASK_BLOCKED";
        case TraceKind::TaskRetired: return "TASK_RETIRED";
        case TraceKind::GroupPushed: return "GROUP_PUSHED";
        case TraceKind::ControlTransferred: return "CONTROL_TRANSFERRED";
        case TraceKind::DoneEmitted: return "DONE_EMITTED";
        case TraceKind::IdleEmitted: return "IDLE_EMITTED";
        case TraceKind::StateChanged: return "STATE_CHANGED";
        case TraceKind::TriggerSuppressed: return "TRIGGER_SUPPRESSED";
        case TraceKind::CallbackFailure: return "CALLBACK_FAILURE";
    }
    return "?";
}

std::optional<TraceKind> parse_trace_kind(std::string_view s) {
    for (auto k : kAllKinds) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

std::string TraceEvent::get(std::string_view key) const {
    for (const auto& [k, v] : detail) {
        if (k == key) return v;
    }
    return {};
}

std::string serialize(const TraceEvent& e) {
    nlohmann::ordered_json j;
    j["seq"] = e.seq;
    j["step"] = e.step;
    j["kind"] = to_string(e.kind);
    if (!e.group.empty()) j["group"] = e.group;
    if (!e.provider.empty()) j["provider"] = e.provider;
    if (e.task) j["task"] = to_int(*e.task);
    for (const auto& [k, v] : e.detail) j[k] = v;
    return j.dump();
}

const TraceEvent& Trace::append(TraceEvent e) {
    e.seq = next_seq_++;
    events_.push_back(std::move(e));
    if (cap_ && events_.size() > *cap_) {
        events_.pop_front();
        ++first_seq_;
    }
    return events_.back();
}

std::vector<TraceEvent> Trace::range(std::uint64_t from, std::uint64_t to) const {
    std::vector<TraceEvent> out;
    for (const auto& e : events_) {
        if (e.seq >= from && e.seq < to) out.push_back(e);
    }
    return out;
}

}  // namespace director
