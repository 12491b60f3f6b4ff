#include "mpmc/error.hpp"

namespace mpmc {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::SingularGram: return "SingularGram";
        case ErrorCode::ConstraintViolated: return "ConstraintViolated";
        case ErrorCode::NoPolyStructure: return "NoPolyStructure";
        case ErrorCode::DegenerateLeadingCoefficient: return "DegenerateLeadingCoefficient";
        case ErrorCode::InfinitelyManyRoots: return "InfinitelyManyRoots";
        case ErrorCode::RankTableMissing: return "RankTableMissing";
        case ErrorCode::EmptyStats: return "EmptyStats";
        case ErrorCode::OffManifold: return "OffManifold";
        case ErrorCode::InvalidSignPattern: return "InvalidSignPattern";
        case ErrorCode::SparseBins: return "SparseBins";
        case ErrorCode::UnknownProblem: return "UnknownProblem";
        case ErrorCode::MissingParam: return "MissingParam";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::ChainAbort: return "ChainAbort";
    }
    return "Unknown";
}

}  // namespace mpmc
