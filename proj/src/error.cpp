#include "batchq/error.hpp"

namespace batchq {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidPmf: return "InvalidPmf";
        case ErrorCode::InvalidModel: return "InvalidModel";
        case ErrorCode::Unstable: return "Unstable";
        case ErrorCode::PoleAtArgument: return "PoleAtArgument";
        case ErrorCode::DegreeOverflow: return "DegreeOverflow";
        case ErrorCode::RootCountMismatch: return "RootCountMismatch";
        case ErrorCode::RepeatedRoot: return "RepeatedRoot";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::NotSpecialCase: return "NotSpecialCase";
        case ErrorCode::EpochKindMismatch: return "EpochKindMismatch";
        case ErrorCode::Parse: return "Parse";
    }
    return "Unknown";
}

}  // namespace batchq
