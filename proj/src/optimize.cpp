#include "armo/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <set>

#include "armo/rng.hpp"

namespace armo {

void PsoParams::validate() const {
    if (particles < 2)
        throw DomainError(ErrorCode::InvalidArgument, "need at least 2 particles");
    if (!(inertia > 0.0 && inertia < 1.0))
        throw DomainError(ErrorCode::InvalidArgument, "inertia must be in (0, 1)");
    if (!(c1 > 0.0) || !(c2 > 0.0))
        throw DomainError(ErrorCode::InvalidArgument, "c1 and c2 must be > 0");
    if (!(threshold > 0.0))
        throw DomainError(ErrorCode::InvalidArgument, "threshold must be > 0");
    if (max_iters < 1 || max_rounds < 1)
        throw DomainError(ErrorCode::InvalidArgument, "iteration counts must be >= 1");
}

double repair_fitness(const RobotModel& model, const JointVector& candidate,
                      const JointVector& original) {
    return 10000.0 * collision_cost(model, candidate).cost +
           (candidate - original).norm();
}

RepairResult pso_repair(const RobotModel& model, const JointTrajectory& traj,
                        const PsoParams& params, std::uint64_t seed) {
    params.validate();
    RepairResult result;
    result.trajectory = traj;

    const auto costs = batch_collision_cost(model, traj);
    // r1, r2 of the strict (draw-once) mode come from a dedicated substream so
    // per-point streams stay aligned across modes.
    Rng global = Rng::stream(seed, 0xFFFFFFFFull);
    const double r1_fixed = global.uniform();
    const double r2_fixed = global.uniform();

    for (std::size_t n = 0; n < traj.frames.size(); ++n) {
        if (!(costs[n] > 0.0)) continue;

        Rng rng = Rng::stream(seed, n);
        const JointVector original = traj.frames[n];
        const int count = params.particles;

        std::vector<JointVector> pos(count), vel(count), pbest(count);
        std::vector<double> f_pbest(count, std::numeric_limits<double>::infinity());
        pos[0] = original;
        for (int i = 1; i < count; ++i) {
            JointVector p = original;
            for (int j = 0; j < 6; ++j) p[j] += rng.normal(0.0, params.init_sigma);
            pos[i] = model.clamp_to_limits(p);
        }
        for (int i = 0; i < count; ++i) {
            vel[i].setZero();
            pbest[i] = pos[i];
        }

        JointVector gbest = original;
        double f_gbest = std::numeric_limits<double>::infinity();
        double gbest_penetration = std::numeric_limits<double>::infinity();

        int iters = 0;
        while (iters < params.max_iters) {
            ++iters;
            const double r1 = params.redraw_r_each_iter ? rng.uniform() : r1_fixed;
            const double r2 = params.redraw_r_each_iter ? rng.uniform() : r2_fixed;
            for (int i = 0; i < count; ++i) {
                const double penetration = collision_cost(model, pos[i]).cost;
                const double f = 10000.0 * penetration + (pos[i] - original).norm();
                if (f < f_pbest[i]) {
                    f_pbest[i] = f;
                    pbest[i] = pos[i];
                }
                if (f < f_gbest) {
                    f_gbest = f;
                    gbest = pos[i];
                    gbest_penetration = penetration;
                }
                vel[i] = params.inertia * vel[i] + params.c1 * r1 * (pbest[i] - pos[i]) +
                         params.c2 * r2 * (gbest - pos[i]);
                pos[i] = model.clamp_to_limits(pos[i] + vel[i]);
            }
            // Keep polishing while the best point still penetrates: a point
            // with a sub-threshold sliver of penetration would otherwise be
            // accepted unchanged forever.
            if (f_gbest < params.threshold && gbest_penetration == 0.0) break;
        }

        if (f_gbest < params.threshold) {
            result.trajectory.frames[n] = gbest;
            result.repaired.push_back(static_cast<int>(n));
        } else {
            result.unresolved.push_back(static_cast<int>(n));
        }
        result.iterations.push_back(iters);
    }
    return result;
}

namespace {

// ---- clamped cubic B-spline least-squares fit ------------------------------

// Clamped knot vector for `ctrl` cubic control points over [a, b].
std::vector<double> clamped_knots(int ctrl, double a, double b) {
    std::vector<double> t(ctrl + 4);
    for (int i = 0; i < 4; ++i) {
        t[i] = a;
        t[ctrl + i] = b;
    }
    for (int i = 4; i < ctrl; ++i)
        t[i] = a + (b - a) * static_cast<double>(i - 3) / (ctrl - 3);
    return t;
}

int find_span(const std::vector<double>& knots, int ctrl, double u) {
    if (u >= knots[ctrl]) return ctrl - 1;  // right-end convention
    int lo = 3, hi = ctrl;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        (u < knots[mid] ? hi : lo) = mid;
    }
    return lo;
}

// The four nonzero cubic basis values at u; `span` from find_span.
std::array<double, 4> basis_functions(const std::vector<double>& knots, int span,
                                      double u) {
    std::array<double, 4> n{1.0, 0.0, 0.0, 0.0};
    std::array<double, 4> left{}, right{};
    for (int j = 1; j <= 3; ++j) {
        left[j] = u - knots[span + 1 - j];
        right[j] = knots[span + j] - u;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double denom = right[r + 1] + left[j - r];
            const double temp = denom != 0.0 ? n[r] / denom : 0.0;
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    return n;
}

// Least-squares clamped cubic B-spline through (u, y), endpoints interpolated
// exactly, evaluated back at u.
Eigen::VectorXd spline_smooth(const Eigen::VectorXd& u, const Eigen::VectorXd& y) {
    const int n = static_cast<int>(u.size());
    const int ctrl = std::max(4, n / 2);

    const auto knots = clamped_knots(ctrl, u[0], u[n - 1]);
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(n, ctrl);
    for (int i = 0; i < n; ++i) {
        const int span = find_span(knots, ctrl, u[i]);
        const auto vals = basis_functions(knots, span, u[i]);
        for (int k = 0; k < 4; ++k) basis(i, span - 3 + k) = vals[k];
    }

    // Pin the first and last control points to the endpoint data (a clamped
    // spline then interpolates them) and solve for the interior.
    const double c_first = y[0];
    const double c_last = y[n - 1];
    Eigen::MatrixXd a = basis.middleCols(1, ctrl - 2);
    Eigen::VectorXd rhs = y - basis.col(0) * c_first - basis.col(ctrl - 1) * c_last;
    Eigen::VectorXd interior = a.colPivHouseholderQr().solve(rhs);

    Eigen::VectorXd coeff(ctrl);
    coeff[0] = c_first;
    coeff[ctrl - 1] = c_last;
    coeff.segment(1, ctrl - 2) = interior;
    return basis * coeff;
}

Eigen::VectorXd gaussian_filter_pinned(const Eigen::VectorXd& y, double sigma,
                                       int kernel_size) {
    const int n = static_cast<int>(y.size());
    const int radius = kernel_size / 2;
    std::vector<double> kernel(kernel_size);
    for (int i = -radius; i <= radius; ++i)
        kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));

    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0, wsum = 0.0;
        for (int d = -radius; d <= radius; ++d) {
            const int j = i + d;
            if (j < 0 || j >= n) continue;
            acc += kernel[d + radius] * y[j];
            wsum += kernel[d + radius];
        }
        out[i] = acc / wsum;
    }
    out[0] = y[0];
    out[n - 1] = y[n - 1];
    return out;
}

JointTrajectory remove_frames(const JointTrajectory& traj,
                              const std::vector<int>& removed,
                              std::vector<double>* kept_params) {
    const std::set<int> drop(removed.begin(), removed.end());
    JointTrajectory out;
    out.fps = traj.fps;
    for (std::size_t i = 0; i < traj.frames.size(); ++i) {
        if (drop.count(static_cast<int>(i))) continue;
        out.frames.push_back(traj.frames[i]);
        if (kept_params) kept_params->push_back(static_cast<double>(i));
    }
    return out;
}

}  // namespace

JointTrajectory remove_and_smooth(const JointTrajectory& traj,
                                  const std::vector<int>& unresolved) {
    std::vector<double> params;
    JointTrajectory kept = remove_frames(traj, unresolved, &params);
    const int n = static_cast<int>(kept.frames.size());
    if (n < 4)
        throw DomainError(ErrorCode::TooFewPoints,
                          "fewer than 4 frames left after removal");

    Eigen::VectorXd u = Eigen::Map<Eigen::VectorXd>(params.data(), n);
    for (int j = 0; j < 6; ++j) {
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y[i] = kept.frames[i][j];
        Eigen::VectorXd fitted = spline_smooth(u, y);
        fitted = gaussian_filter_pinned(fitted, 1.5, 7);
        // Endpoints of the clamped fit equal the data; the filter re-pins them,
        // so first/last frames match the input exactly.
        fitted[0] = y[0];
        fitted[n - 1] = y[n - 1];
        for (int i = 0; i < n; ++i) kept.frames[i][j] = fitted[i];
    }
    return kept;
}

std::pair<JointTrajectory, OptimizeReport> recheck_loop(
    const RobotModel& model, const JointTrajectory& traj, const PsoParams& params,
    std::uint64_t seed, const std::vector<int>& pre_removed) {
    params.validate();
    traj.validate();
    const auto t0 = std::chrono::steady_clock::now();

    OptimizeReport report;
    {
        const auto costs = batch_collision_cost(model, traj);
        report.pre_collision_count =
            static_cast<int>(std::count_if(costs.begin(), costs.end(),
                                           [](double c) { return c > 0.0; }));
    }

    JointTrajectory current = traj;
    std::vector<int> forced = pre_removed;
    bool clean = false;

    for (int round = 0; round < params.max_rounds && !clean; ++round) {
        RepairResult repair =
            pso_repair(model, current, params, Rng::stream(seed, round).next_u64());
        report.repaired.insert(report.repaired.end(), repair.repaired.begin(),
                               repair.repaired.end());
        report.iterations.insert(report.iterations.end(), repair.iterations.begin(),
                                 repair.iterations.end());

        std::vector<int> to_remove = repair.unresolved;
        to_remove.insert(to_remove.end(), forced.begin(), forced.end());
        std::sort(to_remove.begin(), to_remove.end());
        to_remove.erase(std::unique(to_remove.begin(), to_remove.end()),
                        to_remove.end());
        forced.clear();

        current = repair.trajectory;
        if (!to_remove.empty() && current.frames.size() < to_remove.size() + 4)
            throw DomainError(ErrorCode::CollisionUnresolvable,
                              "repair failed on too many points to recover");
        // Smoothing runs in the first round only: re-smoothing later rounds
        // would undo the point repairs the recheck just confirmed.
        if (params.smoothing && round == 0) {
            current = remove_and_smooth(current, to_remove);
        } else if (!to_remove.empty()) {
            current = remove_frames(current, to_remove, nullptr);
        }
        report.removed.insert(report.removed.end(), to_remove.begin(),
                              to_remove.end());

        const auto costs = batch_collision_cost(model, current);
        report.post_collision_count =
            static_cast<int>(std::count_if(costs.begin(), costs.end(),
                                           [](double c) { return c > 0.0; }));
        clean = report.post_collision_count == 0;
    }

    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!clean)
        throw DomainError(ErrorCode::CollisionUnresolvable,
                          "collisions persist after " +
                              std::to_string(params.max_rounds) + " repair rounds");
    return {current, report};
}

JointTrajectory time_parameterize(const RobotModel& model,
                                  const JointTrajectory& traj) {
    JointTrajectory out = traj;
    const int n = static_cast<int>(traj.frames.size());
    out.timestamps.clear();
    if (n == 0) return out;
    out.timestamps.push_back(0.0);
    if (n == 1) return out;

    constexpr double kHuge = 1e9;
    constexpr double kMinDt = 1e-6;
    const int segs = n - 1;

    // Path speed/acceleration caps per segment, in index units.
    std::vector<double> vmax(segs, kHuge), amax(segs, kHuge);
    for (int i = 0; i < segs; ++i) {
        for (int j = 0; j < 6; ++j) {
            const double d = std::abs(traj.frames[i + 1][j] - traj.frames[i][j]);
            if (d < 1e-15) continue;
            vmax[i] = std::min(vmax[i], model.vel_limits[j] / d);
            amax[i] = std::min(amax[i], model.acc_limits[j] / d);
        }
    }

    // Rest-to-rest forward/backward passes over the node path speeds.
    std::vector<double> sdot(n, 0.0);
    for (int i = 1; i < n - 1; ++i) sdot[i] = std::min(vmax[i - 1], vmax[i]);
    for (int i = 0; i < n - 1; ++i)
        sdot[i + 1] = std::min(sdot[i + 1], std::sqrt(sdot[i] * sdot[i] + 2.0 * amax[i]));
    for (int i = n - 2; i >= 0; --i)
        sdot[i] = std::min(sdot[i], std::sqrt(sdot[i + 1] * sdot[i + 1] + 2.0 * amax[i]));

    std::vector<double> dt(segs);
    for (int i = 0; i < segs; ++i) {
        const double pace = sdot[i] + sdot[i + 1];
        dt[i] = pace > 0.0 ? std::max(2.0 / pace, kMinDt) : kMinDt;
    }

    // The passes bound path acceleration per segment, but bends in joint space
    // can still break the finite-difference acceleration at junctions; stretch
    // local times until every check passes (with a global rescue scaling).
    auto segment_velocity = [&](int i, int j) {
        return (traj.frames[i + 1][j] - traj.frames[i][j]) / dt[i];
    };
    // Acceleration ratio at node m: rest boundaries at both ends, the mean of
    // the adjacent segment times as denominator in between.
    auto violation = [&](int m) {
        double worst = 0.0;
        const double denom = 0.5 * ((m > 0 ? dt[m - 1] : 0.0) + (m < segs ? dt[m] : 0.0));
        for (int j = 0; j < 6; ++j) {
            const double v_prev = m > 0 ? segment_velocity(m - 1, j) : 0.0;
            const double v_next = m < segs ? segment_velocity(m, j) : 0.0;
            const double acc = std::abs(v_next - v_prev) / denom;
            worst = std::max(worst, acc / model.acc_limits[j]);
        }
        return worst;
    };

    bool settled = false;
    for (int sweep = 0; sweep < 256 && !settled; ++sweep) {
        settled = true;
        for (int m = 0; m < n; ++m) {
            const double ratio = violation(m);
            if (ratio > 1.0 + 1e-9) {
                const double stretch = std::sqrt(ratio) * (1.0 + 1e-6);
                if (m > 0) dt[m - 1] *= stretch;
                if (m < segs) dt[m] *= stretch;
                settled = false;
            }
        }
    }
    if (!settled) {
        double worst = 1.0;
        for (int m = 0; m < n; ++m) worst = std::max(worst, violation(m));
        const double scale = std::sqrt(worst) * (1.0 + 1e-3);
        for (auto& d : dt) d *= scale;
    }

    double t = 0.0;
    for (int i = 0; i < segs; ++i) {
        t += dt[i];
        out.timestamps.push_back(t);
    }
    return out;
}

std::pair<JointTrajectory, OptimizeReport> optimize_trajectory(
    const RobotModel& model, const JointTrajectory& traj, const PsoParams& params,
    std::uint64_t seed, const std::vector<int>& pre_removed) {
    auto [repaired, report] = recheck_loop(model, traj, params, seed, pre_removed);
    return {time_parameterize(model, repaired), report};
}

}  // namespace armo
