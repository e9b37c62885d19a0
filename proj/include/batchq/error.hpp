#pragma once

#include <stdexcept>
#include <string>

namespace batchq {

enum class ErrorCode {
    InvalidPmf,
    InvalidModel,
    Unstable,
    PoleAtArgument,
    DegreeOverflow,
    RootCountMismatch,
    RepeatedRoot,
    SingularSystem,
    NotSpecialCase,
    EpochKindMismatch,
    Parse,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above; the
/// CLI maps them onto exit statuses.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace batchq
