#include "armo/robot_model.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace armo {

RobotModel::RobotModel() {
    joint_limits.col(0).setConstant(-2.88);
    joint_limits.col(1).setConstant(2.88);
    vel_limits.setConstant(2.5);
    acc_limits.setConstant(5.0);
}

RobotModel RobotModel::canonical() {
    RobotModel m;
    auto add = [&m](int link, double along, double radius) {
        CollisionSphere s;
        s.link = link;
        s.offset = Vec3(0.0, 0.0, along);
        s.radius = radius;
        m.collision_spheres.push_back(s);
    };
    // Base column: lowest sphere raised so a resting arm clears the ground
    // term (radius + margin) with a few millimeters to spare.
    add(0, 0.040, 0.030);
    add(0, 0.085, 0.030);
    add(0, 0.130, 0.030);
    add(1, 0.000, 0.030);
    add(1, 0.055, 0.030);
    add(1, 0.110, 0.030);
    add(2, 0.000, 0.028);
    add(2, 0.048, 0.028);
    add(2, 0.096, 0.028);
    add(3, 0.000, 0.025);
    add(3, 0.025, 0.025);
    add(3, 0.050, 0.025);
    return m;
}

bool RobotModel::within_limits(const JointVector& q) const {
    for (int i = 0; i < 6; ++i)
        if (q[i] < joint_limits(i, 0) || q[i] > joint_limits(i, 1)) return false;
    return true;
}

JointVector RobotModel::clamp_to_limits(const JointVector& q) const {
    JointVector out;
    for (int i = 0; i < 6; ++i)
        out[i] = std::clamp(q[i], joint_limits(i, 0), joint_limits(i, 1));
    return out;
}

void RobotModel::validate() const {
    if (base_height <= 0 || upper_link <= 0 || fore_link <= 0 || tool_offset <= 0)
        throw DomainError(ErrorCode::InvalidModel, "link lengths must be > 0");
    if (upper_link + fore_link > 0.28 + 1e-12)
        throw DomainError(ErrorCode::InvalidModel,
                          "horizontal reach exceeds the 280 mm class");
    for (int i = 0; i < 6; ++i) {
        if (!(joint_limits(i, 0) < joint_limits(i, 1)))
            throw DomainError(ErrorCode::InvalidModel, "joint limit min >= max");
        if (!(vel_limits[i] > 0) || !(acc_limits[i] > 0))
            throw DomainError(ErrorCode::InvalidModel,
                              "velocity/acceleration limits must be > 0");
    }
    if (collision_margin < 0)
        throw DomainError(ErrorCode::InvalidModel, "collision margin must be >= 0");
    for (const auto& s : collision_spheres) {
        if (s.link < 0 || s.link > 3)
            throw DomainError(ErrorCode::InvalidModel, "sphere link index out of range");
        if (!(s.radius > 0))
            throw DomainError(ErrorCode::InvalidModel, "sphere radius must be > 0");
    }
}

namespace {

std::vector<double> parse_numbers(std::istringstream& in, std::size_t count,
                                  const std::string& key) {
    std::vector<double> vals(count);
    for (std::size_t i = 0; i < count; ++i)
        if (!(in >> vals[i]))
            throw DomainError(ErrorCode::IoError,
                              "robot config: expected " + std::to_string(count) +
                                  " numbers after '" + key + "'");
    return vals;
}

}  // namespace

RobotModel load_robot_model(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in)
        throw DomainError(ErrorCode::IoError,
                          "cannot open robot config: " + file.string());
    RobotModel m;
    m.collision_spheres.clear();
    bool saw_sphere = false;

    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;

        if (key == "base_height") m.base_height = parse_numbers(ls, 1, key)[0];
        else if (key == "upper_link") m.upper_link = parse_numbers(ls, 1, key)[0];
        else if (key == "fore_link") m.fore_link = parse_numbers(ls, 1, key)[0];
        else if (key == "tool_offset") m.tool_offset = parse_numbers(ls, 1, key)[0];
        else if (key == "joint_limits") {
            auto v = parse_numbers(ls, 12, key);
            for (int i = 0; i < 6; ++i) {
                m.joint_limits(i, 0) = v[2 * i];
                m.joint_limits(i, 1) = v[2 * i + 1];
            }
        } else if (key == "vel_limits") {
            auto v = parse_numbers(ls, 6, key);
            for (int i = 0; i < 6; ++i) m.vel_limits[i] = v[i];
        } else if (key == "acc_limits") {
            auto v = parse_numbers(ls, 6, key);
            for (int i = 0; i < 6; ++i) m.acc_limits[i] = v[i];
        } else if (key == "collision_margin") {
            m.collision_margin = parse_numbers(ls, 1, key)[0];
        } else if (key == "ground_plane") {
            m.ground_plane = parse_numbers(ls, 1, key)[0] != 0.0;
        } else if (key == "sphere") {
            auto v = parse_numbers(ls, 5, key);
            CollisionSphere s;
            s.link = static_cast<int>(v[0]);
            s.offset = Vec3(v[1], v[2], v[3]);
            s.radius = v[4];
            m.collision_spheres.push_back(s);
            saw_sphere = true;
        } else {
            throw DomainError(ErrorCode::IoError, "robot config: unknown key '" + key + "'");
        }
    }
    if (!saw_sphere) m.collision_spheres = RobotModel::canonical().collision_spheres;
    m.validate();
    return m;
}

void save_robot_model(const RobotModel& model, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out)
        throw DomainError(ErrorCode::IoError,
                          "cannot write robot config: " + file.string());
    out.precision(17);
    out << "# 6-DOF desktop arm model (SI units: meters, radians, seconds)\n";
    out << "base_height " << model.base_height << "\n";
    out << "upper_link " << model.upper_link << "\n";
    out << "fore_link " << model.fore_link << "\n";
    out << "tool_offset " << model.tool_offset << "\n";
    out << "joint_limits";
    for (int i = 0; i < 6; ++i)
        out << " " << model.joint_limits(i, 0) << " " << model.joint_limits(i, 1);
    out << "\nvel_limits";
    for (int i = 0; i < 6; ++i) out << " " << model.vel_limits[i];
    out << "\nacc_limits";
    for (int i = 0; i < 6; ++i) out << " " << model.acc_limits[i];
    out << "\ncollision_margin " << model.collision_margin << "\n";
    out << "ground_plane " << (model.ground_plane ? 1 : 0) << "\n";
    out << "# sphere LINK OFFSET_X OFFSET_Y OFFSET_Z RADIUS\n";
    for (const auto& s : model.collision_spheres)
        out << "sphere " << s.link << " " << s.offset.x() << " " << s.offset.y()
            << " " << s.offset.z() << " " << s.radius << "\n";
}

}  // namespace armo
