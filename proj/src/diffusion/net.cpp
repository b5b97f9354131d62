#include "net.hpp"

#include <cmath>

namespace armo::diffusion::net {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---- parameter indices ------------------------------------------------------

struct LinIdx {
    int w = -1;
    int b = -1;
};

struct AttnIdx {
    LinIdx q, k, v, o;
};

struct BlockIdx {
    LinIdx sm;
    AttnIdx attn;
    LinIdx am_conv, am_cond, am_out;
    LinIdx ffm_gate, ffm_fuse0, ffm_fuse1;
};

struct NetIdx {
    LinIdx embed;
    LinIdx enc_tok[3][2];  // token kind x (input layer, output layer)
    AttnIdx enc_attn;
    std::vector<BlockIdx> blocks;
    LinIdx head;
};

LinIdx lin(const ModelWeights& w, const std::string& base) {
    return {w.index_of(base + ".w"), w.index_of(base + ".b")};
}

AttnIdx attn_idx(const ModelWeights& w, const std::string& base) {
    AttnIdx a;
    a.q = {w.index_of(base + ".wq"), w.index_of(base + ".bq")};
    a.k = {w.index_of(base + ".wk"), w.index_of(base + ".bk")};
    a.v = {w.index_of(base + ".wv"), w.index_of(base + ".bv")};
    a.o = {w.index_of(base + ".wo"), w.index_of(base + ".bo")};
    return a;
}

NetIdx resolve(const ModelWeights& w) {
    NetIdx idx;
    idx.embed = lin(w, "embed");
    const char* kinds[3] = {"enc.start", "enc.end", "enc.len"};
    for (int k = 0; k < 3; ++k) {
        idx.enc_tok[k][0] = {w.index_of(std::string(kinds[k]) + ".w0"),
                             w.index_of(std::string(kinds[k]) + ".b0")};
        idx.enc_tok[k][1] = {w.index_of(std::string(kinds[k]) + ".w1"),
                             w.index_of(std::string(kinds[k]) + ".b1")};
    }
    idx.enc_attn = attn_idx(w, "enc.attn");
    idx.blocks.resize(w.params.depth);
    for (int i = 0; i < w.params.depth; ++i) {
        const std::string b = "b" + std::to_string(i);
        idx.blocks[i].sm = lin(w, b + ".sm");
        idx.blocks[i].attn = attn_idx(w, b + ".attn");
        idx.blocks[i].am_conv = lin(w, b + ".am.conv");
        idx.blocks[i].am_cond = lin(w, b + ".am.cond");
        idx.blocks[i].am_out = lin(w, b + ".am.out");
        idx.blocks[i].ffm_gate = lin(w, b + ".ffm.gate");
        idx.blocks[i].ffm_fuse0 = lin(w, b + ".ffm.fuse0");
        idx.blocks[i].ffm_fuse1 = lin(w, b + ".ffm.fuse1");
    }
    idx.head = lin(w, "head");
    return idx;
}

// ---- primitives -------------------------------------------------------------

MatrixXd linear_fwd(const MatrixXd& x, const ModelWeights& w, LinIdx idx) {
    MatrixXd y = x * w.tensors[idx.w].value.transpose();
    y.rowwise() += w.tensors[idx.b].value.col(0).transpose();
    return y;
}

// dy -> dx (returned); accumulates dW, db.
MatrixXd linear_bwd(const MatrixXd& x, const MatrixXd& dy, const ModelWeights& w,
                    LinIdx idx, std::vector<MatrixXd>& grads) {
    grads[idx.w] += dy.transpose() * x;
    grads[idx.b].col(0) += dy.colwise().sum().transpose();
    return dy * w.tensors[idx.w].value;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

MatrixXd sigmoid_mat(const MatrixXd& x) {
    return x.unaryExpr([](double v) { return sigmoid(v); });
}

MatrixXd silu(const MatrixXd& x) {
    return x.unaryExpr([](double v) { return v * sigmoid(v); });
}

MatrixXd silu_grad(const MatrixXd& x) {
    return x.unaryExpr([](double v) {
        const double s = sigmoid(v);
        return s * (1.0 + v * (1.0 - s));
    });
}

// Shift every rows_per_block block of m by `offset` rows (zero fill):
// out(t) = in(t - offset) within each block.
MatrixXd block_shift(const MatrixXd& m, int rows_per_block, int offset) {
    if (offset == 0) return m;
    MatrixXd out = MatrixXd::Zero(m.rows(), m.cols());
    const int blocks = static_cast<int>(m.rows()) / rows_per_block;
    const int span = rows_per_block - std::abs(offset);
    if (span <= 0) return out;
    for (int s = 0; s < blocks; ++s) {
        const int base = s * rows_per_block;
        if (offset > 0)
            out.middleRows(base + offset, span) = m.middleRows(base, span);
        else
            out.middleRows(base, span) = m.middleRows(base - offset, span);
    }
    return out;
}

// Kernel-3 convolution along the block rows; channels are columns.
// W is (out x 3*in) with tap dk at columns [dk*in, (dk+1)*in).
MatrixXd conv1d_fwd(const MatrixXd& x, int rows_per_block, const ModelWeights& w,
                    LinIdx idx) {
    const auto& W = w.tensors[idx.w].value;
    const int in = static_cast<int>(x.cols());
    MatrixXd y = MatrixXd::Zero(x.rows(), W.rows());
    for (int dk = 0; dk < 3; ++dk) {
        const MatrixXd shifted = block_shift(x, rows_per_block, 1 - dk);
        y.noalias() += shifted * W.middleCols(dk * in, in).transpose();
    }
    y.rowwise() += w.tensors[idx.b].value.col(0).transpose();
    return y;
}

MatrixXd conv1d_bwd(const MatrixXd& x, int rows_per_block, const MatrixXd& dy,
                    const ModelWeights& w, LinIdx idx, std::vector<MatrixXd>& grads) {
    const auto& W = w.tensors[idx.w].value;
    const int in = static_cast<int>(x.cols());
    MatrixXd dx = MatrixXd::Zero(x.rows(), x.cols());
    for (int dk = 0; dk < 3; ++dk) {
        const MatrixXd shifted = block_shift(x, rows_per_block, 1 - dk);
        grads[idx.w].middleCols(dk * in, in) += dy.transpose() * shifted;
        dx.noalias() += block_shift(dy, rows_per_block, dk - 1) * W.middleCols(dk * in, in);
    }
    grads[idx.b].col(0) += dy.colwise().sum().transpose();
    return dx;
}

struct MhaCache {
    MatrixXd qk_in, v_in;
    MatrixXd q, k, v;
    std::vector<MatrixXd> attn;  // blocks*heads softmax matrices
    MatrixXd concat;
};

// Multi-head attention over row blocks; query/key from qk_in, value from v_in.
MatrixXd mha_fwd(const MatrixXd& qk_in, const MatrixXd& v_in, int rows_per_block,
                 int heads, const ModelWeights& w, const AttnIdx& idx,
                 MhaCache& cache) {
    const int h = static_cast<int>(qk_in.cols());
    const int dh = h / heads;
    const int blocks = static_cast<int>(qk_in.rows()) / rows_per_block;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    cache.qk_in = qk_in;
    cache.v_in = v_in;
    cache.q = linear_fwd(qk_in, w, idx.q);
    cache.k = linear_fwd(qk_in, w, idx.k);
    cache.v = linear_fwd(v_in, w, idx.v);
    cache.attn.assign(static_cast<std::size_t>(blocks) * heads, MatrixXd());
    cache.concat.resize(qk_in.rows(), h);

    for (int s = 0; s < blocks; ++s) {
        const int base = s * rows_per_block;
        for (int hd = 0; hd < heads; ++hd) {
            const auto qh = cache.q.block(base, hd * dh, rows_per_block, dh);
            const auto kh = cache.k.block(base, hd * dh, rows_per_block, dh);
            const auto vh = cache.v.block(base, hd * dh, rows_per_block, dh);
            MatrixXd scores = scale * (qh * kh.transpose());
            for (int r = 0; r < rows_per_block; ++r) {
                const double peak = scores.row(r).maxCoeff();
                scores.row(r) = (scores.row(r).array() - peak).exp();
                scores.row(r) /= scores.row(r).sum();
            }
            cache.attn[static_cast<std::size_t>(s) * heads + hd] = scores;
            cache.concat.block(base, hd * dh, rows_per_block, dh).noalias() =
                scores * vh;
        }
    }
    return linear_fwd(cache.concat, w, idx.o);
}

void mha_bwd(const MatrixXd& dout, int rows_per_block, int heads,
             const ModelWeights& w, const AttnIdx& idx, const MhaCache& cache,
             MatrixXd& dqk_in, MatrixXd& dv_in, std::vector<MatrixXd>& grads) {
    const int h = static_cast<int>(cache.qk_in.cols());
    const int dh = h / heads;
    const int blocks = static_cast<int>(cache.qk_in.rows()) / rows_per_block;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    const MatrixXd dconcat = linear_bwd(cache.concat, dout, w, idx.o, grads);
    MatrixXd dq = MatrixXd::Zero(cache.q.rows(), h);
    MatrixXd dk = MatrixXd::Zero(cache.q.rows(), h);
    MatrixXd dv = MatrixXd::Zero(cache.q.rows(), h);

    for (int s = 0; s < blocks; ++s) {
        const int base = s * rows_per_block;
        for (int hd = 0; hd < heads; ++hd) {
            const auto& attn = cache.attn[static_cast<std::size_t>(s) * heads + hd];
            const auto qh = cache.q.block(base, hd * dh, rows_per_block, dh);
            const auto kh = cache.k.block(base, hd * dh, rows_per_block, dh);
            const auto vh = cache.v.block(base, hd * dh, rows_per_block, dh);
            const auto doh = dconcat.block(base, hd * dh, rows_per_block, dh);

            MatrixXd dattn = doh * vh.transpose();
            dv.block(base, hd * dh, rows_per_block, dh).noalias() =
                attn.transpose() * doh;

            // softmax backward per row
            MatrixXd dscores(rows_per_block, rows_per_block);
            for (int r = 0; r < rows_per_block; ++r) {
                const double dot = dattn.row(r).cwiseProduct(attn.row(r)).sum();
                dscores.row(r) = attn.row(r).array() * (dattn.row(r).array() - dot);
            }
            dq.block(base, hd * dh, rows_per_block, dh).noalias() =
                scale * (dscores * kh);
            dk.block(base, hd * dh, rows_per_block, dh).noalias() =
                scale * (dscores.transpose() * qh);
        }
    }
    dqk_in = linear_bwd(cache.qk_in, dq, w, idx.q, grads);
    dqk_in += linear_bwd(cache.qk_in, dk, w, idx.k, grads);
    dv_in = linear_bwd(cache.v_in, dv, w, idx.v, grads);
}

MatrixXd positional_encoding(int length, int dim) {
    MatrixXd pe(length, dim);
    for (int pos = 0; pos < length; ++pos)
        pe.row(pos) = sinusoidal_embedding(pos, dim).transpose();
    return pe;
}

}  // namespace

VectorXd sinusoidal_embedding(double position, int dim) {
    VectorXd emb(dim);
    for (int i = 0; i < dim / 2; ++i) {
        const double freq = std::pow(10000.0, -2.0 * i / dim);
        emb[2 * i] = std::sin(position * freq);
        emb[2 * i + 1] = std::cos(position * freq);
    }
    return emb;
}

// ---- cache ------------------------------------------------------------------

namespace {

struct BlockCache {
    MatrixXd x_in;
    MatrixXd smT_in, smT_pre;  // transposed stacks (count*h x L)
    MatrixXd gate, x_sm;
    MhaCache mha;
    MatrixXd x_attn;
    MatrixXd am_z, x_am;
    MatrixXd ffm_gate_pre, ffm_gate, ffm_cg;  // (count x h)
    MatrixXd ffm_zin, ffm_pre0, ffm_h;
};

struct EncCache {
    MatrixXd in[3];
    MatrixXd pre0[3], h0[3], tok[3];
    MatrixXd tokens;  // (count*3 x h)
    MhaCache mha;
};

}  // namespace

struct Cache {
    BatchIn in;
    NetIdx idx;
    MatrixXd pe;
    EncCache enc;
    MatrixXd cond_c, cond_ct;  // (count x h)
    MatrixXd x_embed;
    std::vector<BlockCache> blocks;
    MatrixXd head_in;
    std::vector<VectorXd> ffm_w;
};

Cache* new_cache() { return new Cache(); }
void free_cache(Cache* cache) { delete cache; }

namespace {

// Encoder: per-kind token MLPs, self-attention over the three tokens, mean
// pooling. Returns (count x h).
MatrixXd encoder_fwd(const ModelWeights& w, const BatchIn& in, const NetIdx& idx,
                     EncCache& cache) {
    const int count = in.count;
    const int h = w.params.hidden;

    cache.in[0].resize(count, 3);
    cache.in[1].resize(count, 3);
    cache.in[2].resize(count, 1);
    for (int s = 0; s < count; ++s) {
        cache.in[0].row(s) = in.cond[s].x_start.transpose();
        cache.in[1].row(s) = in.cond[s].x_end.transpose();
        cache.in[2](s, 0) =
            static_cast<double>(in.cond[s].l_valid) / kSequenceLength;
    }

    cache.tokens.resize(count * 3, h);
    for (int k = 0; k < 3; ++k) {
        cache.pre0[k] = linear_fwd(cache.in[k], w, idx.enc_tok[k][0]);
        cache.h0[k] = silu(cache.pre0[k]);
        cache.tok[k] = linear_fwd(cache.h0[k], w, idx.enc_tok[k][1]);
        for (int s = 0; s < count; ++s)
            cache.tokens.row(s * 3 + k) = cache.tok[k].row(s);
    }

    const MatrixXd attn_out =
        mha_fwd(cache.tokens, cache.tokens, 3, w.params.heads, w, idx.enc_attn,
                cache.mha);
    const MatrixXd tokens_out = cache.tokens + attn_out;

    MatrixXd c(count, h);
    for (int s = 0; s < count; ++s)
        c.row(s) = (tokens_out.row(s * 3) + tokens_out.row(s * 3 + 1) +
                    tokens_out.row(s * 3 + 2)) /
                   3.0;
    return c;
}

void encoder_bwd(const ModelWeights& w, const NetIdx& idx, const EncCache& cache,
                 const MatrixXd& dc, std::vector<MatrixXd>& grads) {
    const int count = static_cast<int>(dc.rows());

    MatrixXd dtokens_out(count * 3, dc.cols());
    for (int s = 0; s < count; ++s)
        for (int k = 0; k < 3; ++k) dtokens_out.row(s * 3 + k) = dc.row(s) / 3.0;

    MatrixXd dqk, dv;
    mha_bwd(dtokens_out, 3, w.params.heads, w, idx.enc_attn, cache.mha, dqk, dv,
            grads);
    const MatrixXd dtokens = dtokens_out + dqk + dv;

    for (int k = 0; k < 3; ++k) {
        MatrixXd dtok(count, dc.cols());
        for (int s = 0; s < count; ++s) dtok.row(s) = dtokens.row(s * 3 + k);
        const MatrixXd dh0 = linear_bwd(cache.h0[k], dtok, w, idx.enc_tok[k][1], grads);
        const MatrixXd dpre0 = dh0.cwiseProduct(silu_grad(cache.pre0[k]));
        linear_bwd(cache.in[k], dpre0, w, idx.enc_tok[k][0], grads);
    }
}

MatrixXd transpose_stack(const MatrixXd& x, int rows_per_block) {
    const int blocks = static_cast<int>(x.rows()) / rows_per_block;
    const int cols = static_cast<int>(x.cols());
    MatrixXd out(static_cast<Eigen::Index>(blocks) * cols, rows_per_block);
    for (int s = 0; s < blocks; ++s)
        out.middleRows(static_cast<Eigen::Index>(s) * cols, cols) =
            x.middleRows(static_cast<Eigen::Index>(s) * rows_per_block, rows_per_block)
                .transpose();
    return out;
}

}  // namespace

namespace {

// Decoder stack; expects cache->in, idx, pe, cond_ct and ffm_w to be set.
ForwardOut decode_impl(const ModelWeights& w, Cache* cache);

}  // namespace

ForwardOut forward(const ModelWeights& w, const BatchIn& in, Cache* cache) {
    const int L = kSequenceLength;
    const int h = w.params.hidden;
    const int count = in.count;

    cache->in = in;
    cache->idx = resolve(w);
    cache->pe = positional_encoding(L, h);

    cache->cond_c = encoder_fwd(w, in, cache->idx, cache->enc);
    cache->cond_ct = cache->cond_c;
    for (int s = 0; s < count; ++s)
        cache->cond_ct.row(s) +=
            sinusoidal_embedding(static_cast<double>(in.t[s]), h).transpose();

    cache->ffm_w.resize(count);
    for (int s = 0; s < count; ++s)
        cache->ffm_w[s] = ffm_weights(in.cond[s].l_valid, L, w.params.sigma_frac);

    return decode_impl(w, cache);
}

Eigen::MatrixXd encode(const ModelWeights& w, const std::vector<ConditionSet>& cond) {
    BatchIn in;
    in.count = static_cast<int>(cond.size());
    in.cond = cond;
    EncCache scratch;
    return encoder_fwd(w, in, resolve(w), scratch);
}

ForwardOut decode(const ModelWeights& w, const Eigen::MatrixXd& x,
                  const std::vector<int>& t, const Eigen::MatrixXd& cond_features,
                  const std::vector<int>& l_valid, Cache* cache) {
    const int L = kSequenceLength;
    const int h = w.params.hidden;
    const int count = static_cast<int>(t.size());

    cache->in.count = count;
    cache->in.x = x;
    cache->in.t = t;
    cache->in.cond.clear();
    cache->idx = resolve(w);
    cache->pe = positional_encoding(L, h);

    cache->cond_ct = cond_features;
    for (int s = 0; s < count; ++s)
        cache->cond_ct.row(s) +=
            sinusoidal_embedding(static_cast<double>(t[s]), h).transpose();

    cache->ffm_w.resize(count);
    for (int s = 0; s < count; ++s)
        cache->ffm_w[s] = ffm_weights(l_valid[s], L, w.params.sigma_frac);

    return decode_impl(w, cache);
}

namespace {

ForwardOut decode_impl(const ModelWeights& w, Cache* cache) {
    const int L = kSequenceLength;
    const int h = w.params.hidden;
    const int count = cache->in.count;
    const NetIdx& idx = cache->idx;
    const BatchIn& in = cache->in;

    cache->x_embed = linear_fwd(in.x, w, idx.embed);
    MatrixXd x = cache->x_embed;

    cache->blocks.resize(w.params.depth);
    for (int bi = 0; bi < w.params.depth; ++bi) {
        BlockCache& bc = cache->blocks[bi];
        const BlockIdx& bx = idx.blocks[bi];
        bc.x_in = x;

        // Spatial gate: kernel-3 convolution across the feature axis of the
        // transposed sequence, squashed into a multiplicative attention map.
        bc.smT_in = transpose_stack(x, L);  // (count*h x L)
        bc.smT_pre = conv1d_fwd(bc.smT_in, h, w, bx.sm);
        bc.gate = sigmoid_mat(transpose_stack(bc.smT_pre, h));  // back to (count*L x h)
        bc.x_sm = x.cwiseProduct(bc.gate);

        // Temporal self-attention: positional-encoded query/key, raw value.
        MatrixXd qk = bc.x_sm;
        for (int s = 0; s < count; ++s)
            qk.middleRows(static_cast<Eigen::Index>(s) * L, L) += cache->pe;
        const MatrixXd attn_out =
            mha_fwd(qk, bc.x_sm, L, w.params.heads, w, bx.attn, bc.mha);
        bc.x_attn = bc.x_sm + attn_out;

        // Alignment: motion through a temporal convolution, condition through
        // a linear map, fused additively and transformed.
        const MatrixXd am_m = conv1d_fwd(bc.x_attn, L, w, bx.am_conv);
        const MatrixXd cp = linear_fwd(cache->cond_ct, w, bx.am_cond);
        bc.am_z = am_m;
        for (int s = 0; s < count; ++s)
            bc.am_z.middleRows(static_cast<Eigen::Index>(s) * L, L).rowwise() +=
                cp.row(s);
        bc.x_am = bc.x_attn + linear_fwd(bc.am_z, w, bx.am_out);

        // Feature fusion: gated condition joined to every frame, transformed,
        // and blended back in with the endpoint-proximity weights.
        bc.ffm_gate_pre = linear_fwd(cache->cond_ct, w, bx.ffm_gate);
        bc.ffm_gate = sigmoid_mat(bc.ffm_gate_pre);
        bc.ffm_cg = bc.ffm_gate.cwiseProduct(cache->cond_ct);
        bc.ffm_zin.resize(static_cast<Eigen::Index>(count) * L, 2 * h);
        bc.ffm_zin.leftCols(h) = bc.x_am;
        for (int s = 0; s < count; ++s)
            bc.ffm_zin.block(static_cast<Eigen::Index>(s) * L, h, L, h).rowwise() =
                bc.ffm_cg.row(s);
        bc.ffm_pre0 = linear_fwd(bc.ffm_zin, w, bx.ffm_fuse0);
        bc.ffm_h = silu(bc.ffm_pre0);
        MatrixXd f = linear_fwd(bc.ffm_h, w, bx.ffm_fuse1);
        for (int s = 0; s < count; ++s)
            f.middleRows(static_cast<Eigen::Index>(s) * L, L).array().colwise() *=
                cache->ffm_w[s].array();
        x = bc.x_am + f;
    }

    cache->head_in = x;
    const MatrixXd out = linear_fwd(x, w, idx.head);

    ForwardOut result;
    result.x0hat = out.leftCols(kChannels);
    if (w.params.learn_variance)
        result.vraw = out.rightCols(kChannels);
    else
        result.vraw = MatrixXd::Zero(out.rows(), kChannels);
    return result;
}

}  // namespace

void backward(const ModelWeights& w, const Cache& cache, const MatrixXd& dx0hat,
              const MatrixXd& dvraw, std::vector<MatrixXd>& grads) {
    const int L = kSequenceLength;
    const int h = w.params.hidden;
    const int count = cache.in.count;
    const NetIdx& idx = cache.idx;

    MatrixXd dout(dx0hat.rows(), w.params.learn_variance ? 2 * kChannels : kChannels);
    dout.leftCols(kChannels) = dx0hat;
    if (w.params.learn_variance) dout.rightCols(kChannels) = dvraw;

    MatrixXd dx = linear_bwd(cache.head_in, dout, w, idx.head, grads);
    MatrixXd dct = MatrixXd::Zero(count, h);

    for (int bi = w.params.depth - 1; bi >= 0; --bi) {
        const BlockCache& bc = cache.blocks[bi];
        const BlockIdx& bx = idx.blocks[bi];

        // FFM backward: dx covers x_am residual + weighted fused features.
        MatrixXd df = dx;
        for (int s = 0; s < count; ++s)
            df.middleRows(static_cast<Eigen::Index>(s) * L, L).array().colwise() *=
                cache.ffm_w[s].array();
        const MatrixXd dh_ffm = linear_bwd(bc.ffm_h, df, w, bx.ffm_fuse1, grads);
        const MatrixXd dpre0 = dh_ffm.cwiseProduct(silu_grad(bc.ffm_pre0));
        const MatrixXd dzin = linear_bwd(bc.ffm_zin, dpre0, w, bx.ffm_fuse0, grads);
        MatrixXd dx_am = dx + dzin.leftCols(h);
        MatrixXd dcg(count, h);
        for (int s = 0; s < count; ++s)
            dcg.row(s) =
                dzin.block(static_cast<Eigen::Index>(s) * L, h, L, h).colwise().sum();
        dct += dcg.cwiseProduct(bc.ffm_gate);
        const MatrixXd dgate_pre =
            dcg.cwiseProduct(cache.cond_ct)
                .cwiseProduct(bc.ffm_gate.cwiseProduct(
                    (MatrixXd::Ones(count, h) - bc.ffm_gate)));
        dct += linear_bwd(cache.cond_ct, dgate_pre, w, bx.ffm_gate, grads);

        // AM backward.
        const MatrixXd dz = linear_bwd(bc.am_z, dx_am, w, bx.am_out, grads);
        MatrixXd dcp(count, h);
        for (int s = 0; s < count; ++s)
            dcp.row(s) =
                dz.middleRows(static_cast<Eigen::Index>(s) * L, L).colwise().sum();
        dct += linear_bwd(cache.cond_ct, dcp, w, bx.am_cond, grads);
        MatrixXd dx_attn = dx_am + conv1d_bwd(bc.x_attn, L, dz, w, bx.am_conv, grads);

        // Attention backward.
        MatrixXd dqk, dv;
        mha_bwd(dx_attn, L, w.params.heads, w, bx.attn, bc.mha, dqk, dv, grads);
        MatrixXd dx_sm = dx_attn + dqk + dv;  // positional encoding is constant

        // Spatial gate backward.
        MatrixXd dgate = dx_sm.cwiseProduct(bc.x_in);
        MatrixXd dx_in = dx_sm.cwiseProduct(bc.gate);
        const MatrixXd dpre_gate =
            dgate.cwiseProduct(bc.gate.cwiseProduct(
                MatrixXd::Ones(dgate.rows(), dgate.cols()) - bc.gate));
        const MatrixXd dpreT = transpose_stack(dpre_gate, L);  // (count*h x L)
        dx_in += transpose_stack(conv1d_bwd(bc.smT_in, h, dpreT, w, bx.sm, grads), h);

        dx = dx_in;
    }

    linear_bwd(cache.in.x, dx, w, idx.embed, grads);
    encoder_bwd(w, idx, cache.enc, dct, grads);
}

std::vector<NamedTensor> parameter_spec(const ModelParams& params) {
    const int L = kSequenceLength;
    const int h = params.hidden;
    const int out = params.learn_variance ? 2 * kChannels : kChannels;

    std::vector<NamedTensor> spec;
    auto add = [&spec](const std::string& name, std::vector<int> shape) {
        NamedTensor t;
        t.name = name;
        t.shape = std::move(shape);
        int cols = 1;
        for (std::size_t i = 1; i < t.shape.size(); ++i) cols *= t.shape[i];
        t.value = Eigen::MatrixXd::Zero(t.shape[0], cols);
        spec.push_back(std::move(t));
    };
    auto add_linear = [&add](const std::string& base, int rows, int cols) {
        add(base + ".w", {rows, cols});
        add(base + ".b", {rows});
    };
    auto add_attn = [&add, h](const std::string& base) {
        for (const char* part : {"q", "k", "v", "o"}) {
            add(base + ".w" + part, {h, h});
            add(base + ".b" + part, {h});
        }
    };

    add_linear("embed", h, kChannels);
    for (const char* kind : {"enc.start", "enc.end", "enc.len"}) {
        const int in = std::string(kind) == "enc.len" ? 1 : 3;
        add(std::string(kind) + ".w0", {h, in});
        add(std::string(kind) + ".b0", {h});
        add(std::string(kind) + ".w1", {h, h});
        add(std::string(kind) + ".b1", {h});
    }
    add_attn("enc.attn");
    for (int i = 0; i < params.depth; ++i) {
        const std::string b = "b" + std::to_string(i);
        add(b + ".sm.w", {L, 3, L});
        add(b + ".sm.b", {L});
        add_attn(b + ".attn");
        add(b + ".am.conv.w", {h, 3, h});
        add(b + ".am.conv.b", {h});
        add_linear(b + ".am.cond", h, h);
        add_linear(b + ".am.out", h, h);
        add_linear(b + ".ffm.gate", h, h);
        add_linear(b + ".ffm.fuse0", h, 2 * h);
        add_linear(b + ".ffm.fuse1", h, h);
    }
    add_linear("head", out, h);
    return spec;
}

}  // namespace armo::diffusion::net
