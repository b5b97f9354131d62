#include "armo/types.hpp"

#include <cmath>

namespace armo {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::Unreachable: return "unreachable";
        case ErrorCode::SequenceTooShort: return "sequence_too_short";
        case ErrorCode::DegenerateMotion: return "degenerate_motion";
        case ErrorCode::AllFramesUnreachable: return "all_frames_unreachable";
        case ErrorCode::TooFewPoints: return "too_few_points";
        case ErrorCode::CollisionUnresolvable: return "collision_unresolvable";
        case ErrorCode::EmptyDataset: return "empty_dataset";
        case ErrorCode::TooShort: return "too_short";
        case ErrorCode::DegenerateSet: return "degenerate_set";
        case ErrorCode::DegeneratePath: return "degenerate_path";
        case ErrorCode::TooFew: return "too_few";
        case ErrorCode::InvalidModel: return "invalid_model";
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::IoError: return "io_error";
    }
    return "unknown";
}

void JointTrajectory::validate() const {
    if (frames.empty())
        throw DomainError(ErrorCode::InvalidArgument, "trajectory has no frames");
    if (fps <= 0.0)
        throw DomainError(ErrorCode::InvalidArgument, "trajectory fps must be > 0");
    for (const auto& f : frames)
        if (!f.allFinite())
            throw DomainError(ErrorCode::InvalidArgument, "non-finite joint frame");
    if (!timestamps.empty()) {
        if (timestamps.size() != frames.size())
            throw DomainError(ErrorCode::InvalidArgument,
                              "timestamps/frames size mismatch");
        for (std::size_t i = 1; i < timestamps.size(); ++i)
            if (!(timestamps[i] > timestamps[i - 1]))
                throw DomainError(ErrorCode::InvalidArgument,
                                  "timestamps must be strictly increasing");
    }
}

const std::vector<Vec3>& HumanMotion::landmark(int id) const {
    auto it = points.find(id);
    if (it == points.end())
        throw DomainError(ErrorCode::InvalidArgument,
                          "missing landmark " + std::to_string(id));
    return it->second;
}

void HumanMotion::validate() const {
    if (fps <= 0.0)
        throw DomainError(ErrorCode::InvalidArgument, "motion fps must be > 0");
    for (int id : {kLandmarkRoot, kLandmarkElbowLeft, kLandmarkElbowRight,
                   kLandmarkWristLeft, kLandmarkWristRight})
        if (!points.count(id))
            throw DomainError(ErrorCode::InvalidArgument,
                              "missing required landmark " + std::to_string(id));
    const std::size_t n = frame_count();
    for (const auto& [id, traj] : points) {
        if (traj.size() != n)
            throw DomainError(ErrorCode::InvalidArgument,
                              "landmark sequences must have equal length");
        for (const auto& p : traj)
            if (!p.allFinite())
                throw DomainError(ErrorCode::InvalidArgument,
                                  "non-finite landmark position");
    }
}

}  // namespace armo
