#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "armo/kinematics.hpp"
#include "armo/rng.hpp"
#include "helpers.hpp"

using namespace armo;

namespace {

JointVector joints(double a, double b, double c, double d = 0, double e = 0,
                   double f = 0) {
    JointVector q;
    q << a, b, c, d, e, f;
    return q;
}

JointVector random_in_limit_config(const RobotModel& m, Rng& rng) {
    JointVector q;
    for (int i = 0; i < 6; ++i)
        q[i] = rng.uniform(m.joint_limits(i, 0), m.joint_limits(i, 1));
    return q;
}

}  // namespace

TEST_CASE("forward kinematics matches the transform oracle") {
    const RobotModel m = RobotModel::canonical();
    Rng rng(42);
    for (int trial = 0; trial < 500; ++trial) {
        const JointVector q = random_in_limit_config(m, rng);
        const FkResult fk = forward_kinematics(m, q);
        const auto oracle = testutil::fk_oracle(m, q);
        CHECK((fk.elbow - oracle.elbow).norm() < 1e-12);
        CHECK((fk.wrist - oracle.wrist).norm() < 1e-12);
        CHECK((fk.tool - oracle.tool).norm() < 1e-12);
    }
}

TEST_CASE("forward kinematics fixed poses") {
    const RobotModel m = RobotModel::canonical();

    SUBCASE("upright zero configuration") {
        const FkResult fk = forward_kinematics(m, JointVector::Zero());
        CHECK(fk.base.norm() == 0.0);
        CHECK((fk.wrist - Vec3(0, 0, 0.336)).norm() < 1e-12);
    }
    SUBCASE("pure base yaw leaves the upright wrist center unchanged") {
        const FkResult fk = forward_kinematics(m, joints(M_PI / 2, 0, 0));
        CHECK((fk.wrist - Vec3(0, 0, 0.336)).norm() < 1e-12);
    }
    SUBCASE("horizontal arm") {
        const FkResult fk = forward_kinematics(m, joints(0, M_PI / 2, 0));
        CHECK((fk.wrist - Vec3(0.206, 0, 0.13)).norm() < 1e-12);
    }
}

TEST_CASE("inverse kinematics") {
    const RobotModel m = RobotModel::canonical();

    SUBCASE("round trip recovers the arm angles") {
        const Vec3 truth(0.4, 0.9, -1.1);
        const FkResult fk = forward_kinematics(m, with_forward_wrist(truth));
        const IkResult ik = ik_wrist_center(m, fk.wrist);
        bool found = false;
        for (const auto& cand : ik.candidates)
            if ((cand - truth).norm() < 1e-9) found = true;
        CHECK(found);
    }
    SUBCASE("upright target is singular with the canonical yaw") {
        const IkResult ik = ik_wrist_center(m, Vec3(0, 0, 0.336));
        CHECK(ik.singular);
        bool found = false;
        for (const auto& cand : ik.candidates)
            if (cand.norm() < 1e-9) found = true;
        CHECK(found);
    }
    SUBCASE("far target is unreachable") {
        CHECK_THROWS_AS((void)ik_wrist_center(m, Vec3(1.0, 0, 0)), DomainError);
        try {
            (void)ik_wrist_center(m, Vec3(1.0, 0, 0));
        } catch (const DomainError& e) {
            CHECK(e.code() == ErrorCode::Unreachable);
        }
    }
    SUBCASE("every candidate reproduces the target through FK") {
        Rng rng(7);
        for (int trial = 0; trial < 200; ++trial) {
            const JointVector q = random_in_limit_config(m, rng);
            const Vec3 target = forward_kinematics(m, q).wrist;
            const IkResult ik = ik_wrist_center(m, target);
            for (const auto& cand : ik.candidates) {
                const FkResult fk = forward_kinematics(m, with_forward_wrist(cand));
                CHECK((fk.wrist - target).norm() < 1e-9);
            }
        }
    }
}

TEST_CASE("round trip over random in-limit configurations") {
    const RobotModel m = RobotModel::canonical();
    Rng rng(2024);
    int tested = 0;
    while (tested < 1000) {
        const JointVector q = random_in_limit_config(m, rng);
        const FkResult fk = forward_kinematics(m, q);
        if (std::hypot(fk.wrist.x(), fk.wrist.y()) < 1e-6) continue;  // singular
        const IkResult ik = ik_wrist_center(m, fk.wrist);
        double best = 1e9;
        for (const auto& cand : ik.candidates)
            best = std::min(best, (cand - Vec3(q[0], q[1], q[2])).norm());
        CHECK(best < 1e-9);
        ++tested;
    }
}

TEST_CASE("base-yaw equivariance of the candidate set") {
    const RobotModel m = RobotModel::canonical();
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        JointVector q = random_in_limit_config(m, rng);
        q[0] = rng.uniform(-1.0, 1.0);  // keep rotated candidates inside limits
        const Vec3 target = forward_kinematics(m, q).wrist;
        if (std::hypot(target.x(), target.y()) < 1e-6) continue;
        const double phi = rng.uniform(-0.5, 0.5);
        Eigen::Matrix3d rot;
        rot = Eigen::AngleAxisd(phi, Eigen::Vector3d::UnitZ());
        const IkResult a = ik_wrist_center(m, target);
        const IkResult b = ik_wrist_center(m, rot * target);
        // Each candidate whose shifted yaw stays within the joint limits must
        // reappear with theta1 moved by phi and theta2/theta3 untouched.
        for (const auto& ca : a.candidates) {
            const double shifted = wrap_angle(ca[0] + phi);
            if (shifted < m.joint_limits(0, 0) || shifted > m.joint_limits(0, 1))
                continue;
            bool matched = false;
            for (const auto& cb : b.candidates) {
                if (std::abs(angle_difference(cb[0], shifted)) < 1e-9 &&
                    std::abs(cb[1] - ca[1]) < 1e-9 && std::abs(cb[2] - ca[2]) < 1e-9)
                    matched = true;
            }
            CHECK(matched);
        }
    }
}

TEST_CASE("forward-facing wrist angles") {
    SUBCASE("direct substitution") {
        auto [t4, t5] = wrist_forward_angles(0.4, 0.3, 0.2);
        CHECK(t4 == doctest::Approx(-0.5).epsilon(1e-12));
        CHECK(t5 == doctest::Approx(-0.4).epsilon(1e-12));
    }
    SUBCASE("zero case") {
        auto [t4, t5] = wrist_forward_angles(0, 0, 0);
        CHECK(t4 == 0.0);
        CHECK(t5 == 0.0);
    }
    SUBCASE("cancellation") {
        auto [t4, t5] = wrist_forward_angles(-0.2, 1.0, -1.0);
        CHECK(t4 == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(t5 == doctest::Approx(0.2).epsilon(1e-12));
    }
    SUBCASE("the tool faces world +x under the convention") {
        const RobotModel m = RobotModel::canonical();
        Rng rng(3);
        for (int trial = 0; trial < 50; ++trial) {
            Vec3 arm(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
            const FkResult fk = forward_kinematics(m, with_forward_wrist(arm));
            const Vec3 dir = (fk.tool - fk.wrist).normalized();
            CHECK((dir - Vec3(1, 0, 0)).norm() < 1e-9);
        }
    }
}

TEST_CASE("workspace clamp pulls targets onto the reachable ray") {
    const RobotModel m = RobotModel::canonical();
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        Vec3 target(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        if (target.norm() < 1e-3) continue;
        const Vec3 clamped = clamp_to_workspace(m, target);
        CHECK(wrist_center_reachable(m, clamped));
        // stays on the ray through the origin
        if (!wrist_center_reachable(m, target)) {
            const Vec3 cross = clamped.cross(target);
            CHECK(cross.norm() < 1e-9 * target.norm() * std::max(clamped.norm(), 1e-9));
        } else {
            CHECK((clamped - target).norm() == 0.0);
        }
    }
}

TEST_CASE("angle wrapping lands in (-pi, pi]") {
    CHECK(wrap_angle(M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
    CHECK(wrap_angle(3 * M_PI / 2) == doctest::Approx(-M_PI / 2));
    CHECK(wrap_angle(0.25) == doctest::Approx(0.25));
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
        const double a = rng.uniform(-20, 20);
        const double w = wrap_angle(a);
        CHECK(w > -M_PI - 1e-12);
        CHECK(w <= M_PI + 1e-12);
        CHECK(std::abs(std::remainder(w - a, 2 * M_PI)) < 1e-9);
    }
}
