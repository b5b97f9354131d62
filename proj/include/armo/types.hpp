#pragma once

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace armo {

using Vec3 = Eigen::Vector3d;
using JointVector = Eigen::Matrix<double, 6, 1>;

// Skeleton landmark ids consumed by the retargeting pipeline. The ids follow
// the source mocap convention: 3 = spine root (alignment origin), 15 = head,
// 18/19 = left/right elbow, 20/21 = left/right wrist.
inline constexpr int kLandmarkRoot = 3;
inline constexpr int kLandmarkHead = 15;
inline constexpr int kLandmarkElbowLeft = 18;
inline constexpr int kLandmarkElbowRight = 19;
inline constexpr int kLandmarkWristLeft = 20;
inline constexpr int kLandmarkWristRight = 21;

enum class ErrorCode {
    Unreachable,
    SequenceTooShort,
    DegenerateMotion,
    AllFramesUnreachable,
    TooFewPoints,
    CollisionUnresolvable,
    EmptyDataset,
    TooShort,
    DegenerateSet,
    DegeneratePath,
    TooFew,
    InvalidModel,
    InvalidArgument,
    IoError,
};

const char* to_string(ErrorCode code);

/// Domain failure with a machine-readable code; the CLI serializes these to
/// an error JSON on stderr and exits with status 2.
class DomainError : public std::runtime_error {
public:
    DomainError(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Timed joint-space sequence. `timestamps` is either empty or holds one
/// strictly increasing time per frame (seconds).
struct JointTrajectory {
    double fps = 0.0;
    std::vector<JointVector> frames;
    std::vector<double> timestamps;

    bool has_timestamps() const { return !timestamps.empty(); }
    std::size_t size() const { return frames.size(); }
    double duration() const {
        return has_timestamps() && timestamps.size() >= 2
                   ? timestamps.back() - timestamps.front()
                   : 0.0;
    }
    void validate() const;
};

struct CartesianTrajectory {
    double fps = 0.0;
    std::vector<Vec3> points;

    std::size_t size() const { return points.size(); }
};

/// Time-stamped 3-D landmark trajectories of one motion clip. All landmark
/// sequences have equal length; landmarks 3, 18, 19, 20, 21 must be present.
struct HumanMotion {
    double fps = 60.0;
    std::map<int, std::vector<Vec3>> points;

    std::size_t frame_count() const {
        return points.empty() ? 0 : points.begin()->second.size();
    }
    const std::vector<Vec3>& landmark(int id) const;
    void validate() const;
};

}  // namespace armo
