#include "ttkm/error.hpp"

namespace ttkm {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Bounds: return "bounds";
        case ErrorKind::Shape: return "shape";
        case ErrorKind::ExpansionTooLarge: return "expansion_too_large";
        case ErrorKind::DegenerateFeature: return "degenerate_feature";
        case ErrorKind::Usage: return "usage";
        case ErrorKind::RankDeficient: return "rank_deficient";
        case ErrorKind::NotPositiveDefinite: return "not_positive_definite";
        case ErrorKind::NonFinite: return "non_finite";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Io: return "io";
        case ErrorKind::Validation: return "validation";
        case ErrorKind::Internal: return "internal";
    }
    return "unknown";
}

}  // namespace ttkm
