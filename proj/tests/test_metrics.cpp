#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "armo/metrics.hpp"
#include "armo/rng.hpp"
#include "helpers.hpp"

using namespace armo;
using namespace armo::metrics;

namespace {

CartesianTrajectory line_trajectory(int n, double fps = 12.0) {
    CartesianTrajectory t;
    t.fps = fps;
    for (int i = 0; i < n; ++i) t.points.push_back(Vec3(0.01 * i, 0, 0.1));
    return t;
}

CartesianTrajectory circle_trajectory(double radius, int n, double arc_fraction = 1.0,
                                      double fps = 12.0) {
    CartesianTrajectory t;
    t.fps = fps;
    for (int i = 0; i < n; ++i) {
        const double a = 2.0 * M_PI * arc_fraction * i / (n - 1);
        t.points.push_back(Vec3(radius * std::cos(a), radius * std::sin(a), 0.05));
    }
    return t;
}

std::vector<Vec3> random_points(Rng& rng, int n) {
    std::vector<Vec3> pts(n);
    for (auto& p : pts)
        p = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    return pts;
}

}  // namespace

TEST_CASE("feature extraction") {
    SUBCASE("straight constant-speed line") {
        const auto f = extract_features(line_trajectory(40));
        CHECK(f.values[15] == doctest::Approx(0.0).epsilon(1e-9));   // ccr
        CHECK(f.values[14] == doctest::Approx(0.0).epsilon(1e-9));   // curvature
        CHECK(f.values[32] == doctest::Approx(1.0).epsilon(1e-9));   // pca 1
        CHECK(f.values[33] == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(f.values[34] == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(f.values[13] == doctest::Approx(0.39).epsilon(1e-9));  // path length
        CHECK(f.values[6] == doctest::Approx(0.12).epsilon(1e-9));   // speed
        for (int i = 0; i < 35; ++i) CHECK(std::isfinite(f.values[i]));
    }
    SUBCASE("1 Hz sinusoid lands in the right DFT bin") {
        CartesianTrajectory t;
        t.fps = 12.0;
        const int n = 96;  // 8 s window: exact 1 Hz bin
        for (int i = 0; i < n; ++i)
            t.points.push_back(
                Vec3(0.1 * std::sin(2 * M_PI * 1.0 * i / 12.0), 0.05, 0.0));
        const auto f = extract_features(t);
        CHECK(std::abs(f.values[17] - 1.0) <= 12.0 / n + 1e-9);  // within one bin
    }
    SUBCASE("7 frames are too short") {
        CHECK_THROWS_AS((void)extract_features(line_trajectory(7)), DomainError);
    }
}

TEST_CASE("frechet distance between feature sets") {
    Rng rng(101);
    SUBCASE("identical sets give zero") {
        std::vector<Eigen::VectorXd> set;
        for (int i = 0; i < 12; ++i) {
            Eigen::VectorXd v(5);
            for (int j = 0; j < 5; ++j) v[j] = rng.uniform(-2, 2);
            set.push_back(v);
        }
        CHECK(std::abs(fid(set, set)) < 1e-6);
    }
    SUBCASE("1-D unit Gaussians one apart give about 1") {
        std::vector<Eigen::VectorXd> a, b;
        for (int i = 0; i < 1000; ++i) {
            Eigen::VectorXd va(1), vb(1);
            va[0] = rng.normal();
            vb[0] = 1.0 + rng.normal();
            a.push_back(va);
            b.push_back(vb);
        }
        CHECK(fid(a, b) == doctest::Approx(1.0).epsilon(0.15));
    }
    SUBCASE("symmetry and permutation invariance") {
        std::vector<Eigen::VectorXd> a, b;
        for (int i = 0; i < 30; ++i) {
            Eigen::VectorXd va(4), vb(4);
            for (int j = 0; j < 4; ++j) {
                va[j] = rng.normal();
                vb[j] = 0.5 * rng.normal() + 0.2 * j;
            }
            a.push_back(va);
            b.push_back(vb);
        }
        CHECK(std::abs(fid(a, b) - fid(b, a)) < 1e-9);

        // permute coordinates of both sets identically
        std::vector<int> perm{2, 0, 3, 1};
        auto permute = [&perm](const std::vector<Eigen::VectorXd>& set) {
            std::vector<Eigen::VectorXd> out;
            for (const auto& v : set) {
                Eigen::VectorXd p(v.size());
                for (int j = 0; j < v.size(); ++j) p[j] = v[perm[j]];
                out.push_back(p);
            }
            return out;
        };
        CHECK(fid(permute(a), permute(b)) == doctest::Approx(fid(a, b)).epsilon(1e-9));
    }
    SUBCASE("sets below 2 vectors are rejected") {
        std::vector<Eigen::VectorXd> one{Eigen::VectorXd::Zero(3)};
        std::vector<Eigen::VectorXd> two{Eigen::VectorXd::Zero(3),
                                         Eigen::VectorXd::Ones(3)};
        CHECK_THROWS_AS((void)fid(one, two), DomainError);
    }
}

TEST_CASE("dynamic time warping") {
    SUBCASE("identity gives zero") {
        CartesianTrajectory a = circle_trajectory(0.3, 25);
        CHECK(dtw(a, a) == 0.0);
    }
    SUBCASE("example pair against exhaustive enumeration") {
        CartesianTrajectory a{1.0, {Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0)}};
        CartesianTrajectory b{
            1.0, {Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(2, 0, 0), Vec3(3, 0, 0)}};
        DtwOptions opt;
        opt.normalize = false;
        CHECK(dtw(a, b, opt) == testutil::dtw_bruteforce(a.points, b.points));
    }
    SUBCASE("50 random short pairs match enumeration exactly") {
        Rng rng(55);
        for (int pair = 0; pair < 50; ++pair) {
            const int n = 2 + static_cast<int>(rng.uniform_index(5));
            const int m = 2 + static_cast<int>(rng.uniform_index(5));
            CartesianTrajectory a{1.0, random_points(rng, n)};
            CartesianTrajectory b{1.0, random_points(rng, m)};
            DtwOptions opt;
            opt.normalize = false;
            CHECK(dtw(a, b, opt) == testutil::dtw_bruteforce(a.points, b.points));
        }
    }
    SUBCASE("symmetry and nonnegativity") {
        Rng rng(66);
        for (int pair = 0; pair < 20; ++pair) {
            CartesianTrajectory a{12.0, random_points(rng, 12)};
            CartesianTrajectory b{12.0, random_points(rng, 17)};
            const double ab = dtw(a, b);
            CHECK(ab >= 0.0);
            CHECK(ab == doctest::Approx(dtw(b, a)).epsilon(1e-12));
        }
    }
    SUBCASE("single-frame inputs are rejected") {
        CartesianTrajectory a{12.0, {Vec3::Zero()}};
        CartesianTrajectory b = line_trajectory(10);
        CHECK_THROWS_AS((void)dtw(a, b), DomainError);
    }
}

TEST_CASE("curvature change rate") {
    SUBCASE("straight line is flat") {
        CHECK(ccr(line_trajectory(50)) < 1e-9);
    }
    SUBCASE("dense circle recovers 1/R within 2 percent") {
        for (double radius : {0.5, 0.25}) {
            const auto c = circle_trajectory(radius, 400);
            CHECK(ccr(c) == doctest::Approx(1.0 / radius).epsilon(0.02));
        }
    }
    SUBCASE("rigid motions leave the value unchanged") {
        const auto base = circle_trajectory(0.5, 300, 0.8);
        const double reference = ccr(base);
        Eigen::Matrix3d rot;
        rot = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized());
        CartesianTrajectory moved = base;
        for (auto& p : moved.points) p = rot * p + Vec3(0.3, -0.2, 0.9);
        CHECK(ccr(moved) == doctest::Approx(reference).epsilon(1e-9));
    }
    SUBCASE("uniform spatial scaling divides the value") {
        const auto base = circle_trajectory(0.5, 300, 0.8);
        const double reference = ccr(base);
        for (double s : {2.0, 0.5}) {
            CartesianTrajectory scaled = base;
            for (auto& p : scaled.points) p *= s;
            CHECK(ccr(scaled) == doctest::Approx(reference / s).epsilon(1e-6));
        }
    }
    SUBCASE("degenerate path is rejected") {
        CartesianTrajectory still{12.0,
                                  {Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                                   Vec3::Zero(), Vec3::Zero()}};
        CHECK_THROWS_AS((void)ccr(still), DomainError);
    }
}

TEST_CASE("pairwise feature distance") {
    SUBCASE("identical vectors give zero") {
        std::vector<Eigen::VectorXd> set(4, Eigen::VectorXd::Constant(6, 1.5));
        CHECK(dist(set) == 0.0);
    }
    SUBCASE("two vectors give their distance") {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(3);
        Eigen::VectorXd b(3);
        b << 3.0, 4.0, 0.0;
        CHECK(dist({a, b}) == doctest::Approx(5.0).epsilon(1e-12));
    }
    SUBCASE("translation invariance") {
        Rng rng(9);
        std::vector<Eigen::VectorXd> set;
        for (int i = 0; i < 8; ++i) {
            Eigen::VectorXd v(5);
            for (int j = 0; j < 5; ++j) v[j] = rng.uniform(-1, 1);
            set.push_back(v);
        }
        const double base = dist(set);
        for (auto& v : set) v.array() += 17.0;
        CHECK(dist(set) == doctest::Approx(base).epsilon(1e-12));
    }
    SUBCASE("one vector is too few") {
        std::vector<Eigen::VectorXd> one{Eigen::VectorXd::Zero(2)};
        CHECK_THROWS_AS((void)dist(one), DomainError);
    }
}
