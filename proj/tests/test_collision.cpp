#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "armo/collision.hpp"
#include "armo/rng.hpp"

using namespace armo;

namespace {

JointVector joints(double a, double b, double c, double d = 0, double e = 0,
                   double f = 0) {
    JointVector q;
    q << a, b, c, d, e, f;
    return q;
}

}  // namespace

TEST_CASE("upright zero configuration is collision-free") {
    const RobotModel m = RobotModel::canonical();
    const auto report = collision_cost(m, JointVector::Zero());
    CHECK(report.cost == 0.0);
    CHECK(report.pairs.empty());

    // Explicit oracle: recompute every pairwise distance from the sphere
    // centers and confirm no term activates.
    const auto centers = sphere_centers(m, JointVector::Zero());
    for (std::size_t i = 0; i < centers.size(); ++i) {
        for (std::size_t j = i + 1; j < centers.size(); ++j) {
            if (std::abs(m.collision_spheres[i].link - m.collision_spheres[j].link) < 2)
                continue;
            const double gap = (centers[i] - centers[j]).norm() -
                               m.collision_spheres[i].radius -
                               m.collision_spheres[j].radius - m.collision_margin;
            CHECK(gap > 0.0);
        }
        CHECK(centers[i].z() - m.collision_spheres[i].radius - m.collision_margin > 0.0);
    }
}

TEST_CASE("constructed two-sphere overlap matches the analytic penetration") {
    RobotModel m = RobotModel::canonical();
    m.ground_plane = false;
    m.collision_spheres.clear();
    // One oversized sphere on the base column and one at the fore-link tip.
    m.collision_spheres.push_back({0, Vec3(0, 0, 0.10), 0.08});
    m.collision_spheres.push_back({2, Vec3(0, 0, 0.096), 0.08});

    // Fold the arm so the wrist center comes near the base column.
    const JointVector q = joints(0.0, 0.9, -2.6);
    const auto centers = sphere_centers(m, q);
    const double dist = (centers[0] - centers[1]).norm();
    const double expected = std::max(0.0, 0.08 + 0.08 + m.collision_margin - dist);
    REQUIRE(expected > 0.0);

    const auto report = collision_cost(m, q);
    CHECK(report.cost == doctest::Approx(expected).epsilon(1e-12));
    REQUIRE(report.pairs.size() == 1);
    CHECK(report.pairs[0].a == 0);
    CHECK(report.pairs[0].b == 1);
}

TEST_CASE("driving the wrist center below the plane activates the ground term") {
    const RobotModel m = RobotModel::canonical();
    const JointVector q = joints(0.0, 2.6, 0.5);
    CHECK(forward_kinematics(m, q).wrist.z() < 0.0);
    const auto report = collision_cost(m, q);
    CHECK(report.cost > 0.0);
    bool ground = false;
    for (const auto& p : report.pairs)
        if (p.b == -1) ground = true;
    CHECK(ground);

    RobotModel no_ground = m;
    no_ground.ground_plane = false;
    for (const auto& p : collision_cost(no_ground, q).pairs) CHECK(p.b != -1);
}

TEST_CASE("batch costs") {
    const RobotModel m = RobotModel::canonical();
    SUBCASE("all-safe trajectory gives zeros") {
        JointTrajectory traj;
        traj.fps = 12;
        for (int i = 0; i < 10; ++i) traj.frames.push_back(joints(0.1 * i, 0.3, 0.2));
        for (double c : batch_collision_cost(m, traj)) CHECK(c == 0.0);
    }
    SUBCASE("one injected folded frame gives exactly one positive entry") {
        JointTrajectory traj;
        traj.fps = 12;
        for (int i = 0; i < 10; ++i) traj.frames.push_back(joints(0.0, 0.4, 0.2));
        traj.frames[4] = joints(0.0, 2.6, 0.5);  // below-ground pose
        const auto costs = batch_collision_cost(m, traj);
        int positive = 0;
        for (std::size_t i = 0; i < costs.size(); ++i)
            if (costs[i] > 0) {
                ++positive;
                CHECK(i == 4);
            }
        CHECK(positive == 1);
    }
    SUBCASE("empty trajectory gives an empty vector") {
        JointTrajectory traj;
        traj.fps = 12;
        CHECK(batch_collision_cost(m, traj).empty());
    }
}

TEST_CASE("cost is continuous, nonnegative, and margin-monotone") {
    RobotModel m = RobotModel::canonical();
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        JointVector q;
        for (int i = 0; i < 6; ++i) q[i] = rng.uniform(-2.8, 2.8);
        const double c0 = collision_cost(m, q).cost;
        CHECK(c0 >= 0.0);

        // continuity: small perturbation, small cost change
        JointVector dq = q;
        dq[static_cast<int>(rng.uniform_index(6))] += 1e-7;
        const double c1 = collision_cost(m, dq).cost;
        CHECK(std::abs(c1 - c0) < 1e-4);

        // margin monotonicity
        RobotModel wider = m;
        wider.collision_margin = m.collision_margin + 0.01;
        CHECK(collision_cost(wider, q).cost >= c0);
    }
}

TEST_CASE("safe configurations stay safe in a neighborhood") {
    const RobotModel m = RobotModel::canonical();
    const JointVector q = JointVector::Zero();
    REQUIRE(collision_cost(m, q).cost == 0.0);
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        JointVector dq = q;
        for (int i = 0; i < 6; ++i) dq[i] += rng.uniform(-1e-3, 1e-3);
        CHECK(collision_cost(m, dq).cost == 0.0);
    }
}
