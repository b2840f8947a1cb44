#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "director/model.hpp"

namespace director {

enum class TraceKind {
    ProviderRun,
    TaskRequested,
    TaskAssigned,
    TaskBlocked,
    TaskRetired,
    GroupPushed,
    ControlTransferred,
    DoneEmitted,
    IdleEmitted,
    StateChanged,
    TriggerSuppressed,
    CallbackFailure,
};

std::string_view to_string(TraceKind k);
std::optional<TraceKind> parse_trace_kind(std::string_view s);

struct TraceEvent {
    std::uint64_t seq = 0;
    std::uint64_t step = 0;
    TraceKind kind = TraceKind::ProviderRun;
    std::string group;
    std::string provider;
    std::optional<TaskUid> task;
    /// Ordered key/value pairs; order is part of the serialized form.
    std::vector<std::pair<std::string, std::string>> detail;

    /// Value of a detail key, or empty string.
    std::string get(std::string_view key) const;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

/// One line, fixed key order: seq, step, kind, group, provider, task, then
/// detail keys in insertion order. Absent fields are omitted.
std::string serialize(const TraceEvent& e);

/// Append-only event log with an optional ring-buffer cap. Sequence numbers
/// keep counting after old events are dropped.
class Trace {
public:
    explicit Trace(std::optional<std::size_t> cap = std::nullopt) : cap_(cap) {}

    const TraceEvent& append(TraceEvent e);

    std::uint64_t first_seq() const noexcept { return first_seq_; }
    std::uint64_t next_seq() const noexcept { return next_seq_; }
    const std::deque<TraceEvent>& events() const noexcept { return events_; }
    /// Events with seq in [from, to).
    std::vector<TraceEvent> range(std::uint64_t from, std::uint64_t to) const;

private:
    std::optional<std::size_t> cap_;
    std::deque<TraceEvent> events_;
    std::uint64_t first_seq_ = 0;
    std::uint64_t next_seq_ = 0;
};

}  // namespace director
