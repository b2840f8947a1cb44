#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace director {

enum class ErrorCode {
    UnknownStateVar,
    InvalidStateValue,
    UnknownTaskType,
    DuplicateId,
    EngineAlreadyStarted,
    EngineStopped,
    RegistryInvalid,
    UnknownUid,
    NotARootTask,
    DetachedTask,
    NotAnAncestor,
    EmptyGroup,
    UnknownNeed,
    UndeclaredSubtaskType,
    RangeOutOfBounds,
    CascadeLimit,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for engine and model errors; `code()` tells callers
/// which contract was violated.
class DirectorError : public std::runtime_error {
public:
    DirectorError(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace director
