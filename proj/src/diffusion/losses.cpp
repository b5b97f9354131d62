#include <cmath>
#include <memory>

#include "armo/diffusion.hpp"
#include "net.hpp"

namespace armo::diffusion {

namespace losses {

namespace {

Eigen::MatrixXd zero_like(const Eigen::MatrixXd& m) {
    return Eigen::MatrixXd::Zero(m.rows(), m.cols());
}

}  // namespace

Term valid_mse(const Eigen::MatrixXd& x, const Eigen::MatrixXd& pred, int l_valid) {
    Term t;
    t.grad = zero_like(pred);
    const auto diff = (pred.topRows(l_valid) - x.topRows(l_valid)).eval();
    const double count = static_cast<double>(diff.size());
    t.value = diff.squaredNorm() / count;
    t.grad.topRows(l_valid) = 2.0 / count * diff;
    return t;
}

Term pad_mse(const Eigen::MatrixXd& x, const Eigen::MatrixXd& pred, int l_valid) {
    Term t;
    t.grad = zero_like(pred);
    const int rows = static_cast<int>(pred.rows()) - l_valid;
    if (rows == 0) return t;
    const auto diff = (pred.bottomRows(rows) - x.bottomRows(rows)).eval();
    const double count = static_cast<double>(diff.size());
    t.value = diff.squaredNorm() / count;
    t.grad.bottomRows(rows) = 2.0 / count * diff;
    return t;
}

// First and second differences of the valid position channels.
Term velocity_acceleration(const Eigen::MatrixXd& x, const Eigen::MatrixXd& pred,
                           int l_valid) {
    Term t;
    t.grad = zero_like(pred);
    if (l_valid < 2) return t;

    const auto vel = [l_valid](const Eigen::MatrixXd& m) {
        return (m.block(1, 0, l_valid - 1, 3) - m.block(0, 0, l_valid - 1, 3)).eval();
    };
    const Eigen::MatrixXd dv = vel(pred) - vel(x);
    const double vcount = static_cast<double>(dv.size());
    t.value += dv.squaredNorm() / vcount;
    t.grad.block(1, 0, l_valid - 1, 3) += 2.0 / vcount * dv;
    t.grad.block(0, 0, l_valid - 1, 3) -= 2.0 / vcount * dv;

    if (l_valid >= 3) {
        const auto acc = [l_valid](const Eigen::MatrixXd& m) {
            return (m.block(2, 0, l_valid - 2, 3) - 2.0 * m.block(1, 0, l_valid - 2, 3) +
                    m.block(0, 0, l_valid - 2, 3))
                .eval();
        };
        const Eigen::MatrixXd da = acc(pred) - acc(x);
        const double acount = static_cast<double>(da.size());
        t.value += da.squaredNorm() / acount;
        t.grad.block(2, 0, l_valid - 2, 3) += 2.0 / acount * da;
        t.grad.block(1, 0, l_valid - 2, 3) -= 4.0 / acount * da;
        t.grad.block(0, 0, l_valid - 2, 3) += 2.0 / acount * da;
    }
    return t;
}

Term start_row(const Eigen::MatrixXd& x, const Eigen::MatrixXd& pred, int) {
    Term t;
    t.grad = zero_like(pred);
    const auto diff = (pred.row(0) - x.row(0)).eval();
    const double count = static_cast<double>(diff.size());
    t.value = diff.squaredNorm() / count;
    t.grad.row(0) = 2.0 / count * diff;
    return t;
}

Term end_row(const Eigen::MatrixXd& x, const Eigen::MatrixXd& pred, int l_valid) {
    Term t;
    t.grad = zero_like(pred);
    const int row = l_valid - 1;
    const auto diff = (pred.row(row) - x.row(row)).eval();
    const double count = static_cast<double>(diff.size());
    t.value = diff.squaredNorm() / count;
    t.grad.row(row) = 2.0 / count * diff;
    return t;
}

}  // namespace losses

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Variational term of the hybrid objective. For t > 0 this is the KL between
// the forward posterior and the model's reverse kernel (mean from the
// predicted clean sample, variance interpolated between beta and the
// posterior bound); t = 0 is the Gaussian decoder likelihood.
struct VlbOut {
    double value = 0.0;
    Eigen::MatrixXd dx0hat;
    Eigen::MatrixXd dvraw;
};

VlbOut vlb_term(const NoiseSchedule& sched, bool learn_variance,
                const Eigen::MatrixXd& x0, const Eigen::MatrixXd& xt, int t,
                const Eigen::MatrixXd& x0hat, const Eigen::MatrixXd& vraw) {
    VlbOut out;
    out.dx0hat = Eigen::MatrixXd::Zero(x0.rows(), x0.cols());
    out.dvraw = Eigen::MatrixXd::Zero(x0.rows(), x0.cols());
    const double count = static_cast<double>(x0.size());

    const double log_beta = std::log(std::max(sched.beta[t], 1e-20));
    const double log_btilde = sched.posterior_logvar_clipped[t];

    // Per-element interpolated log variance and its derivative wrt vraw.
    Eigen::MatrixXd frac, logvar;
    if (learn_variance) {
        frac = vraw.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
        logvar = frac * log_beta + (1.0 - frac.array()).matrix() * log_btilde;
    } else {
        logvar = Eigen::MatrixXd::Constant(x0.rows(), x0.cols(), log_btilde);
    }
    const Eigen::MatrixXd var = logvar.array().exp();

    Eigen::MatrixXd dlogvar;
    if (t > 0) {
        const double beta = sched.beta[t];
        const double abar = sched.alpha_bar[t];
        const double abar_prev = sched.alpha_bar_prev[t];
        const double alpha = 1.0 - beta;
        const double c0 = std::sqrt(abar_prev) * beta / (1.0 - abar);
        const double c1 = std::sqrt(alpha) * (1.0 - abar_prev) / (1.0 - abar);
        const double q_var = sched.posterior_var[t];
        const double q_logvar = std::log(std::max(q_var, 1e-20));

        const Eigen::MatrixXd mu_q = c0 * x0 + c1 * xt;
        const Eigen::MatrixXd mu_p = c0 * x0hat + c1 * xt;
        const Eigen::MatrixXd delta = mu_q - mu_p;

        const Eigen::ArrayXXd ratio = (q_var + delta.array().square()) / var.array();
        out.value = (0.5 * (logvar.array() - q_logvar + ratio - 1.0)).sum() / count;

        out.dx0hat = (c0 / count) * (delta.array() / var.array()).matrix();
        dlogvar = (0.5 / count) * (1.0 - ratio).matrix();
    } else {
        const Eigen::MatrixXd delta = x0hat - x0;
        const Eigen::ArrayXXd ratio = delta.array().square() / var.array();
        out.value = (0.5 * (kLog2Pi + logvar.array() + ratio)).sum() / count;
        out.dx0hat = (1.0 / count) * (delta.array() / var.array()).matrix();
        dlogvar = (0.5 / count) * (1.0 - ratio).matrix();
    }

    if (learn_variance) {
        const Eigen::MatrixXd dfrac = dlogvar * (log_beta - log_btilde);
        out.dvraw = dfrac.cwiseProduct(
            frac.cwiseProduct((1.0 - frac.array()).matrix()));
    }
    return out;
}

struct BatchEval {
    LossBreakdown losses;
    Eigen::MatrixXd dx0hat;  // stacked, per-element d total / d prediction
    Eigen::MatrixXd dvraw;
    net::BatchIn in;
};

BatchEval evaluate_batch(const ModelWeights& weights,
                         const std::vector<TrainingItem>& batch,
                         const LossWeights& lw, net::Cache* cache) {
    if (batch.empty())
        throw DomainError(ErrorCode::InvalidArgument, "empty training batch");
    const int L = kSequenceLength;
    const int count = static_cast<int>(batch.size());
    const NoiseSchedule sched = NoiseSchedule::cosine(weights.params.diffusion_steps);

    BatchEval ev;
    ev.in.count = count;
    ev.in.x.resize(static_cast<Eigen::Index>(count) * L, kChannels);
    ev.in.t.resize(count);
    ev.in.cond.resize(count);
    for (int s = 0; s < count; ++s) {
        const auto& item = batch[s];
        if (item.t < 0 || item.t >= weights.params.diffusion_steps)
            throw DomainError(ErrorCode::InvalidArgument, "diffusion step out of range");
        const double abar = sched.alpha_bar[item.t];
        ev.in.x.middleRows(static_cast<Eigen::Index>(s) * L, L) =
            std::sqrt(abar) * item.sample.data + std::sqrt(1.0 - abar) * item.noise;
        ev.in.t[s] = item.t;
        ev.in.cond[s] = item.cond;
    }

    const net::ForwardOut fwd = net::forward(weights, ev.in, cache);
    ev.dx0hat = Eigen::MatrixXd::Zero(fwd.x0hat.rows(), fwd.x0hat.cols());
    ev.dvraw = Eigen::MatrixXd::Zero(fwd.vraw.rows(), fwd.vraw.cols());

    const double bscale = 1.0 / count;
    for (int s = 0; s < count; ++s) {
        const auto& item = batch[s];
        const int l = item.sample.l_valid;
        const Eigen::MatrixXd x0 = item.sample.data;
        const Eigen::MatrixXd pred =
            fwd.x0hat.middleRows(static_cast<Eigen::Index>(s) * L, L);
        auto grad_rows = [&](Eigen::MatrixXd& target) -> Eigen::Block<Eigen::MatrixXd> {
            return target.middleRows(static_cast<Eigen::Index>(s) * L, L);
        };

        const auto pv = losses::valid_mse(x0, pred, l);
        const auto pad = losses::pad_mse(x0, pred, l);
        const auto va = losses::velocity_acceleration(x0, pred, l);
        const auto st = losses::start_row(x0, pred, l);
        const auto en = losses::end_row(x0, pred, l);
        const auto vlb = vlb_term(
            sched, weights.params.learn_variance, x0,
            ev.in.x.middleRows(static_cast<Eigen::Index>(s) * L, L), item.t, pred,
            fwd.vraw.middleRows(static_cast<Eigen::Index>(s) * L, L));

        ev.losses.pv += bscale * pv.value;
        ev.losses.pad += bscale * pad.value;
        ev.losses.va += bscale * va.value;
        ev.losses.start += bscale * st.value;
        ev.losses.end += bscale * en.value;
        ev.losses.vlb += bscale * vlb.value;

        grad_rows(ev.dx0hat) +=
            bscale * (lw.pv * pv.grad + lw.pad * pad.grad + lw.va * va.grad +
                      lw.start * st.grad + lw.end * en.grad + lw.vlb * vlb.dx0hat);
        grad_rows(ev.dvraw) += bscale * lw.vlb * vlb.dvraw;
    }
    ev.losses.total = lw.vlb * ev.losses.vlb + lw.pv * ev.losses.pv +
                      lw.va * ev.losses.va + lw.pad * ev.losses.pad +
                      lw.start * ev.losses.start + lw.end * ev.losses.end;
    return ev;
}

}  // namespace

LossBreakdown training_losses(const ModelWeights& weights,
                              const std::vector<TrainingItem>& batch,
                              const LossWeights& loss_weights) {
    std::unique_ptr<net::Cache, net::CacheDeleter> cache(net::new_cache());
    return evaluate_batch(weights, batch, loss_weights, cache.get()).losses;
}

LossGradients training_loss_gradients(const ModelWeights& weights,
                                      const std::vector<TrainingItem>& batch,
                                      const LossWeights& loss_weights) {
    std::unique_ptr<net::Cache, net::CacheDeleter> cache(net::new_cache());
    const BatchEval ev = evaluate_batch(weights, batch, loss_weights, cache.get());

    LossGradients out;
    out.losses = ev.losses;
    out.grads.resize(weights.tensors.size());
    for (std::size_t i = 0; i < weights.tensors.size(); ++i)
        out.grads[i] = Eigen::MatrixXd::Zero(weights.tensors[i].value.rows(),
                                             weights.tensors[i].value.cols());
    net::backward(weights, *cache, ev.dx0hat, ev.dvraw, out.grads);
    return out;
}

}  // namespace armo::diffusion
