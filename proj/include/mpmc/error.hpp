#pragma once

#include <stdexcept>
#include <string>

namespace mpmc {

enum class ErrorCode {
    RankDeficient,
    SingularGram,
    ConstraintViolated,
    NoPolyStructure,
    DegenerateLeadingCoefficient,
    InfinitelyManyRoots,
    RankTableMissing,
    EmptyStats,
    OffManifold,
    InvalidSignPattern,
    SparseBins,
    UnknownProblem,
    MissingParam,
    InvalidConfig,
    ChainAbort,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace mpmc
