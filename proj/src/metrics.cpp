#include "armo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

namespace armo::metrics {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
    MeanStd r;
    if (v.empty()) return r;
    for (double x : v) r.mean += x;
    r.mean /= static_cast<double>(v.size());
    for (double x : v) r.std += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(r.std / static_cast<double>(v.size()));
    return r;
}

// Magnitude DFT of one mean-removed, Hann-windowed axis; bins 0..n/2.
std::vector<double> half_spectrum(const std::vector<double>& x) {
    const int n = static_cast<int>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;

    std::vector<double> windowed(n);
    for (int t = 0; t < n; ++t) {
        const double w = 0.5 * (1.0 - std::cos(2.0 * kPi * t / (n - 1)));
        windowed[t] = (x[t] - mean) * w;
    }

    std::vector<double> mag(n / 2 + 1);
    for (int k = 0; k <= n / 2; ++k) {
        double re = 0.0, im = 0.0;
        for (int t = 0; t < n; ++t) {
            const double phase = -2.0 * kPi * k * t / n;
            re += windowed[t] * std::cos(phase);
            im += windowed[t] * std::sin(phase);
        }
        mag[k] = std::hypot(re, im);
    }
    return mag;
}

Eigen::MatrixXd covariance(const std::vector<Eigen::VectorXd>& set) {
    const auto n = static_cast<Eigen::Index>(set.size());
    const auto dim = set.front().size();
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(dim);
    for (const auto& v : set) mu += v;
    mu /= static_cast<double>(n);
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& v : set) sigma += (v - mu) * (v - mu).transpose();
    sigma /= static_cast<double>(n - 1);
    return sigma;
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

FeatureVector extract_features(const CartesianTrajectory& traj) {
    const int n = static_cast<int>(traj.points.size());
    if (n < 8)
        throw DomainError(ErrorCode::TooShort,
                          "feature extraction needs at least 8 frames");
    if (!(traj.fps > 0.0))
        throw DomainError(ErrorCode::InvalidArgument, "trajectory fps must be > 0");
    const auto& p = traj.points;
    const double fps = traj.fps;

    FeatureVector f;
    auto& out = f.values;

    // Position statistics and bounding box.
    Vec3 mean = Vec3::Zero();
    for (const auto& q : p) mean += q;
    mean /= n;
    Vec3 var = Vec3::Zero(), lo = p[0], hi = p[0];
    for (const auto& q : p) {
        var += (q - mean).cwiseAbs2();
        lo = lo.cwiseMin(q);
        hi = hi.cwiseMax(q);
    }
    var /= n;
    out.segment<3>(0) = mean;
    out.segment<3>(3) = var.cwiseSqrt();
    out.segment<3>(10) = hi - lo;

    // Speed / acceleration magnitudes and path length.
    std::vector<double> speeds, accs;
    double path = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
        const double step = (p[i + 1] - p[i]).norm();
        speeds.push_back(step * fps);
        path += step;
    }
    for (int i = 0; i + 2 < n; ++i)
        accs.push_back((p[i + 2] - 2.0 * p[i + 1] + p[i]).norm() * fps * fps);
    const MeanStd sp = mean_std(speeds), ac = mean_std(accs);
    out[6] = sp.mean;
    out[7] = sp.std;
    out[8] = ac.mean;
    out[9] = ac.std;
    out[13] = path;

    // Discrete three-point curvature (circumscribed circle).
    std::vector<double> curvatures;
    for (int i = 1; i + 1 < n; ++i) {
        const Vec3 u = p[i] - p[i - 1];
        const Vec3 v = p[i + 1] - p[i];
        const Vec3 w = p[i + 1] - p[i - 1];
        const double denom = u.norm() * v.norm() * w.norm();
        curvatures.push_back(denom > 1e-15 ? 2.0 * u.cross(v).norm() / denom : 0.0);
    }
    out[14] = mean_std(curvatures).mean;

    try {
        out[15] = ccr(traj);
    } catch (const DomainError&) {
        out[15] = 0.0;  // degenerate path
    }
    out[16] = (n - 1) / fps;

    // Spectral features per axis.
    const double nyquist = fps / 2.0;
    for (int axis = 0; axis < 3; ++axis) {
        std::vector<double> x(n);
        for (int i = 0; i < n; ++i) x[i] = p[i][axis];
        const auto mag = half_spectrum(x);

        int best = 1;
        double total_mag = 0.0;
        for (int k = 1; k < static_cast<int>(mag.size()); ++k) {
            total_mag += mag[k];
            if (mag[k] > mag[best]) best = k;
        }
        out[17 + axis] = total_mag > 1e-15 ? best * fps / n : 0.0;

        double low = 0.0, mid = 0.0, high = 0.0, centroid = 0.0;
        for (int k = 1; k < static_cast<int>(mag.size()); ++k) {
            const double freq = k * fps / n;
            const double energy = mag[k] * mag[k];
            if (freq < nyquist / 3.0) low += energy;
            else if (freq < 2.0 * nyquist / 3.0) mid += energy;
            else high += energy;
            centroid += freq * mag[k];
        }
        out[20 + 3 * axis] = low;
        out[21 + 3 * axis] = mid;
        out[22 + 3 * axis] = high;
        out[29 + axis] = total_mag > 1e-15 ? centroid / total_mag : 0.0;
    }

    // PCA explained-variance ratios of the point cloud.
    Eigen::Matrix3d sigma = Eigen::Matrix3d::Zero();
    for (const auto& q : p) sigma += (q - mean) * (q - mean).transpose();
    sigma /= n;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(sigma);
    Eigen::Vector3d ev = es.eigenvalues().cwiseMax(0.0).reverse();
    const double total = ev.sum();
    out.segment<3>(32) = total > 1e-18 ? (ev / total).eval() : Vec3(1.0, 0.0, 0.0);

    return f;
}

double fid(const std::vector<Eigen::VectorXd>& set_a,
           const std::vector<Eigen::VectorXd>& set_b) {
    if (set_a.size() < 2 || set_b.size() < 2)
        throw DomainError(ErrorCode::DegenerateSet,
                          "fid needs at least 2 vectors per set");
    const auto dim = set_a.front().size();
    for (const auto& v : set_a)
        if (v.size() != dim)
            throw DomainError(ErrorCode::InvalidArgument, "mixed feature dimensions");
    for (const auto& v : set_b)
        if (v.size() != dim)
            throw DomainError(ErrorCode::InvalidArgument, "mixed feature dimensions");

    Eigen::VectorXd mu_a = Eigen::VectorXd::Zero(dim), mu_b = Eigen::VectorXd::Zero(dim);
    for (const auto& v : set_a) mu_a += v;
    for (const auto& v : set_b) mu_b += v;
    mu_a /= static_cast<double>(set_a.size());
    mu_b /= static_cast<double>(set_b.size());

    const Eigen::MatrixXd reg = 1e-6 * Eigen::MatrixXd::Identity(dim, dim);
    const Eigen::MatrixXd sigma_a = covariance(set_a) + reg;
    const Eigen::MatrixXd sigma_b = covariance(set_b) + reg;

    const Eigen::MatrixXd root_a = symmetric_sqrt(sigma_a);
    Eigen::MatrixXd inner = root_a * sigma_b * root_a;
    inner = 0.5 * (inner + inner.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner);
    const double trace_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

    return (mu_a - mu_b).squaredNorm() + sigma_a.trace() + sigma_b.trace() -
           2.0 * trace_sqrt;
}

double dtw(const CartesianTrajectory& a, const CartesianTrajectory& b,
           const DtwOptions& options) {
    const int n = static_cast<int>(a.points.size());
    const int m = static_cast<int>(b.points.size());
    if (n < 2 || m < 2)
        throw DomainError(ErrorCode::TooShort, "dtw needs at least 2 frames per side");

    auto normalized = [&](const std::vector<Vec3>& pts) {
        std::vector<Vec3> out = pts;
        if (!options.normalize) return out;
        for (int axis = 0; axis < 3; ++axis) {
            double mean = 0.0;
            for (const auto& p : pts) mean += p[axis];
            mean /= static_cast<double>(pts.size());
            double var = 0.0;
            for (const auto& p : pts) var += (p[axis] - mean) * (p[axis] - mean);
            const double sd = std::sqrt(var / static_cast<double>(pts.size()));
            for (auto& p : out)
                p[axis] = sd < 1e-9 ? p[axis] - mean : (p[axis] - mean) / sd;
        }
        return out;
    };

    const auto sa = normalized(a.points);
    const auto sb = normalized(b.points);

    // Minimum cumulative cost; cost ties resolve to the longest path so the
    // length normalization is well defined.
    Eigen::MatrixXd d(n, m);
    Eigen::MatrixXi len(n, m);
    auto cost = [&](int i, int j) { return (sa[i] - sb[j]).norm(); };

    d(0, 0) = cost(0, 0);
    len(0, 0) = 1;
    for (int i = 1; i < n; ++i) {
        d(i, 0) = d(i - 1, 0) + cost(i, 0);
        len(i, 0) = i + 1;
    }
    for (int j = 1; j < m; ++j) {
        d(0, j) = d(0, j - 1) + cost(0, j);
        len(0, j) = j + 1;
    }
    for (int i = 1; i < n; ++i) {
        for (int j = 1; j < m; ++j) {
            double best = d(i - 1, j - 1);
            int best_len = len(i - 1, j - 1);
            for (auto [pi, pj] : {std::pair{i - 1, j}, std::pair{i, j - 1}}) {
                if (d(pi, pj) < best || (d(pi, pj) == best && len(pi, pj) > best_len)) {
                    best = d(pi, pj);
                    best_len = len(pi, pj);
                }
            }
            d(i, j) = best + cost(i, j);
            len(i, j) = best_len + 1;
        }
    }
    return d(n - 1, m - 1) / static_cast<double>(len(n - 1, m - 1));
}

double ccr(const CartesianTrajectory& traj) {
    const int n = static_cast<int>(traj.points.size());
    if (n < 5)
        throw DomainError(ErrorCode::TooShort, "ccr needs at least 5 frames");
    const auto& p = traj.points;

    std::vector<double> arc(n, 0.0);
    for (int i = 1; i < n; ++i) arc[i] = arc[i - 1] + (p[i] - p[i - 1]).norm();
    const double total = arc.back();
    if (total < 1e-9)
        throw DomainError(ErrorCode::DegeneratePath, "vanishing arc length");

    // Resample uniformly in arc length (same sample count as the input).
    const int samples = n;
    const double h = total / (samples - 1);
    std::vector<Vec3> r(samples);
    int seg = 0;
    for (int k = 0; k < samples; ++k) {
        const double s = h * k;
        while (seg + 2 < n && arc[seg + 1] < s) ++seg;
        const double span = arc[seg + 1] - arc[seg];
        const double w = span > 1e-15 ? (s - arc[seg]) / span : 0.0;
        r[k] = (1.0 - w) * p[seg] + w * p[seg + 1];
    }

    double acc = 0.0;
    for (int k = 1; k + 1 < samples; ++k)
        acc += (r[k + 1] - 2.0 * r[k] + r[k - 1]).norm() / (h * h);
    return acc / static_cast<double>(samples - 2);
}

double dist(const std::vector<Eigen::VectorXd>& features) {
    if (features.size() < 2)
        throw DomainError(ErrorCode::TooFew, "dist needs at least 2 vectors");
    double acc = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < features.size(); ++i)
        for (std::size_t j = i + 1; j < features.size(); ++j) {
            acc += (features[i] - features[j]).norm();
            ++pairs;
        }
    return acc / pairs;
}

}  // namespace armo::metrics
