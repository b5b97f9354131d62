#pragma once

#include <array>

#include "armo/types.hpp"

namespace armo::metrics {

/// Fixed 35-entry trajectory descriptor. Layout (indices):
///   0-2   position mean x/y/z          3-5   position std x/y/z
///   6-7   speed mean/std               8-9   acceleration magnitude mean/std
///   10-12 bounding-box extents x/y/z   13    path length
///   14    mean discrete curvature      15    curvature change rate
///   16    duration (s)                 17-19 dominant frequency per axis (Hz)
///   20-28 band energies low/mid/high per axis (x, then y, then z)
///   29-31 spectral centroid per axis   32-34 PCA explained-variance ratios
struct FeatureVector {
    Eigen::Matrix<double, 35, 1> values;
};

/// Throws TooShort below 8 frames. Spectra use the magnitude DFT of each
/// mean-removed, Hann-windowed axis; bands split at 1/3 and 2/3 Nyquist.
FeatureVector extract_features(const CartesianTrajectory& traj);

/// Frechet distance between the Gaussian fits of two feature sets
/// (covariances regularized by +1e-6 I; matrix square root via symmetric
/// eigendecomposition of the symmetrized product).
/// Throws DegenerateSet when either set has fewer than 2 vectors.
double fid(const std::vector<Eigen::VectorXd>& set_a,
           const std::vector<Eigen::VectorXd>& set_b);

struct DtwOptions {
    bool normalize = true;  // per-axis z-normalization before matching
};

/// Normalized dynamic-time-warping distance: minimum cumulative Euclidean
/// cost divided by the warping path length (ties in cost resolve to the
/// longest optimal path). Throws TooShort below 2 frames.
double dtw(const CartesianTrajectory& a, const CartesianTrajectory& b,
           const DtwOptions& options = {});

/// Curvature change rate: the trajectory is reparameterized by arc length and
/// the mean |d^2 r / ds^2| over the resampled points is returned (1/R on a
/// circle of radius R). Throws DegeneratePath when the arc length vanishes.
double ccr(const CartesianTrajectory& traj);

/// Mean Euclidean distance over all unordered pairs. Throws TooFew below 2.
double dist(const std::vector<Eigen::VectorXd>& features);

struct MetricReport {
    double fid_c = 0.0;
    double fid_b = 0.0;
    double dtw_c = 0.0;
    double dtw_b = 0.0;
    double ccr = 0.0;
    double dist = 0.0;
};

}  // namespace armo::metrics
