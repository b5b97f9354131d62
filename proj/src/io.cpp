#include "armo/io.hpp"

#include <fstream>

#include <json.hpp>

namespace armo {

namespace {

using nlohmann::json;

json read_json(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in)
        throw DomainError(ErrorCode::IoError, "cannot open " + file.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DomainError(ErrorCode::IoError,
                          "bad JSON in " + file.string() + ": " + e.what());
    }
    return j;
}

json point_array(const std::vector<Vec3>& points) {
    json arr = json::array();
    for (const auto& p : points) arr.push_back({p.x(), p.y(), p.z()});
    return arr;
}

std::vector<Vec3> parse_points(const json& arr, const std::string& what) {
    if (!arr.is_array())
        throw DomainError(ErrorCode::IoError, what + " must be an array");
    std::vector<Vec3> out;
    out.reserve(arr.size());
    for (const auto& p : arr) {
        if (!p.is_array() || p.size() != 3)
            throw DomainError(ErrorCode::IoError, what + " entries must be [x,y,z]");
        out.emplace_back(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
    }
    return out;
}

}  // namespace

void atomic_write(const std::filesystem::path& file, const std::string& content) {
    if (file.has_parent_path()) {
        std::error_code dir_ec;
        std::filesystem::create_directories(file.parent_path(), dir_ec);
    }
    const auto tmp = file.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw DomainError(ErrorCode::IoError, "cannot write " + tmp);
        out << content;
        if (!out)
            throw DomainError(ErrorCode::IoError, "failed writing " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, file, ec);
    if (ec)
        throw DomainError(ErrorCode::IoError,
                          "cannot rename " + tmp + " -> " + file.string());
}

HumanMotion load_human_motion(const std::filesystem::path& file) {
    const json j = read_json(file);
    HumanMotion motion;
    motion.fps = j.value("fps", 60.0);
    if (!j.contains("points") || !j["points"].is_object())
        throw DomainError(ErrorCode::IoError, "motion file needs a points object");
    for (const auto& [key, val] : j["points"].items())
        motion.points[std::stoi(key)] = parse_points(val, "landmark " + key);
    motion.validate();
    return motion;
}

void save_human_motion(const HumanMotion& motion, const std::filesystem::path& file) {
    json j;
    j["fps"] = motion.fps;
    json pts = json::object();
    for (const auto& [id, traj] : motion.points)
        pts[std::to_string(id)] = point_array(traj);
    j["points"] = std::move(pts);
    atomic_write(file, j.dump());
}

JointTrajectory load_joint_trajectory(const std::filesystem::path& file) {
    const json j = read_json(file);
    JointTrajectory traj;
    traj.fps = j.value("fps", 0.0);
    if (!j.contains("frames") || !j["frames"].is_array())
        throw DomainError(ErrorCode::IoError, "trajectory file needs a frames array");
    for (const auto& f : j["frames"]) {
        if (!f.is_array() || f.size() != 6)
            throw DomainError(ErrorCode::IoError, "frames must hold 6 joint angles");
        JointVector q;
        for (int i = 0; i < 6; ++i) q[i] = f[i].get<double>();
        traj.frames.push_back(q);
    }
    if (j.contains("timestamps"))
        traj.timestamps = j["timestamps"].get<std::vector<double>>();
    traj.validate();
    return traj;
}

void save_joint_trajectory(const JointTrajectory& traj,
                           const std::filesystem::path& file) {
    json j;
    j["fps"] = traj.fps;
    json frames = json::array();
    for (const auto& q : traj.frames)
        frames.push_back({q[0], q[1], q[2], q[3], q[4], q[5]});
    j["frames"] = std::move(frames);
    if (traj.has_timestamps()) j["timestamps"] = traj.timestamps;
    atomic_write(file, j.dump());
}

CartesianTrajectory load_cartesian_trajectory(const std::filesystem::path& file) {
    const json j = read_json(file);
    CartesianTrajectory traj;
    traj.fps = j.value("fps", 0.0);
    if (!j.contains("points"))
        throw DomainError(ErrorCode::IoError, "trajectory file needs a points array");
    traj.points = parse_points(j["points"], "points");
    return traj;
}

void save_cartesian_trajectory(const CartesianTrajectory& traj,
                               const std::filesystem::path& file) {
    json j;
    j["fps"] = traj.fps;
    j["points"] = point_array(traj.points);
    atomic_write(file, j.dump());
}

}  // namespace armo
