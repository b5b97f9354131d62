#pragma once

#include <filesystem>
#include <string>

#include "armo/types.hpp"

namespace armo {

/// Write-temp-then-rename so interrupted runs never leave truncated files.
void atomic_write(const std::filesystem::path& file, const std::string& content);

// Motion clip JSON: {"fps": 60, "points": {"3": [[x,y,z], ...], ...}}
HumanMotion load_human_motion(const std::filesystem::path& file);
void save_human_motion(const HumanMotion& motion, const std::filesystem::path& file);

// Joint trajectory JSON: {"fps": .., "frames": [[t1..t6], ...],
// "timestamps": [...]} (timestamps optional).
JointTrajectory load_joint_trajectory(const std::filesystem::path& file);
void save_joint_trajectory(const JointTrajectory& traj,
                           const std::filesystem::path& file);

// Cartesian trajectory JSON: {"fps": .., "points": [[x,y,z], ...]}
CartesianTrajectory load_cartesian_trajectory(const std::filesystem::path& file);
void save_cartesian_trajectory(const CartesianTrajectory& traj,
                               const std::filesystem::path& file);

}  // namespace armo
