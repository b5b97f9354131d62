#include <cstring>
#include <fstream>

#include "armo/diffusion.hpp"
#include "armo/rng.hpp"
#include "net.hpp"

namespace armo::diffusion {

namespace {

constexpr char kMagic[4] = {'A', 'R', 'M', 'W'};
constexpr std::uint32_t kFormatVersion = 1;

bool is_bias(const std::string& name) {
    const auto dot = name.rfind('.');
    return dot != std::string::npos && name[dot + 1] == 'b';
}

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw DomainError(ErrorCode::IoError, "truncated weights file");
    return value;
}

}  // namespace

int ModelWeights::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < tensors.size(); ++i)
        if (tensors[i].name == name) return static_cast<int>(i);
    return -1;
}

Eigen::MatrixXd& ModelWeights::tensor(const std::string& name) {
    const int i = index_of(name);
    if (i < 0)
        throw DomainError(ErrorCode::InvalidArgument, "unknown tensor " + name);
    return tensors[i].value;
}

const Eigen::MatrixXd& ModelWeights::tensor(const std::string& name) const {
    const int i = index_of(name);
    if (i < 0)
        throw DomainError(ErrorCode::InvalidArgument, "unknown tensor " + name);
    return tensors[i].value;
}

ModelWeights ModelWeights::init(const ModelParams& params, std::uint64_t seed) {
    params.validate();
    ModelWeights w;
    w.params = params;
    w.init_seed = seed;
    w.tensors = net::parameter_spec(params);

    Rng rng = Rng::stream(seed, 0x1417);
    for (auto& t : w.tensors) {
        if (is_bias(t.name)) {
            // Spatial gates start mostly open.
            if (t.name.find(".sm.b") != std::string::npos)
                t.value.setConstant(2.0);
            continue;
        }
        const double fan_in = static_cast<double>(t.value.cols());
        const double fan_out = static_cast<double>(t.value.rows());
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (Eigen::Index r = 0; r < t.value.rows(); ++r)
            for (Eigen::Index c = 0; c < t.value.cols(); ++c)
                t.value(r, c) = rng.uniform(-bound, bound);
    }
    w.quantize_to_storage();
    return w;
}

void ModelWeights::quantize_to_storage() {
    for (auto& t : tensors)
        t.value = t.value.unaryExpr(
            [](double v) { return static_cast<double>(static_cast<float>(v)); });
}

void save_weights(const ModelWeights& weights, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw DomainError(ErrorCode::IoError, "cannot write " + file.string());

    out.write(kMagic, 4);
    write_pod(out, kFormatVersion);
    write_pod(out, static_cast<std::uint8_t>(weights.params.variant));
    write_pod(out, static_cast<std::uint8_t>(weights.params.learn_variance ? 1 : 0));
    write_pod(out, static_cast<std::uint16_t>(0));
    write_pod(out, static_cast<std::uint32_t>(weights.params.hidden));
    write_pod(out, static_cast<std::uint32_t>(weights.params.depth));
    write_pod(out, static_cast<std::uint32_t>(weights.params.heads));
    write_pod(out, static_cast<std::uint32_t>(weights.params.diffusion_steps));
    write_pod(out, static_cast<std::uint32_t>(weights.params.ddim_steps));
    write_pod(out, weights.params.sigma_frac);
    write_pod(out, weights.init_seed);
    write_pod(out, static_cast<std::uint32_t>(weights.tensors.size()));

    for (const auto& t : weights.tensors) {
        write_pod(out, static_cast<std::uint32_t>(t.name.size()));
        out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        write_pod(out, static_cast<std::uint32_t>(t.shape.size()));
        for (int d : t.shape) write_pod(out, static_cast<std::uint32_t>(d));
        for (Eigen::Index r = 0; r < t.value.rows(); ++r)
            for (Eigen::Index c = 0; c < t.value.cols(); ++c)
                write_pod(out, static_cast<float>(t.value(r, c)));
    }
    if (!out)
        throw DomainError(ErrorCode::IoError, "failed writing " + file.string());
}

ModelWeights load_weights(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw DomainError(ErrorCode::IoError, "cannot open " + file.string());

    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw DomainError(ErrorCode::IoError, "not a weights file: " + file.string());
    if (read_pod<std::uint32_t>(in) != kFormatVersion)
        throw DomainError(ErrorCode::IoError, "unsupported weights format version");

    ModelWeights w;
    w.params.variant = static_cast<Variant>(read_pod<std::uint8_t>(in));
    w.params.learn_variance = read_pod<std::uint8_t>(in) != 0;
    read_pod<std::uint16_t>(in);
    w.params.hidden = static_cast<int>(read_pod<std::uint32_t>(in));
    w.params.depth = static_cast<int>(read_pod<std::uint32_t>(in));
    w.params.heads = static_cast<int>(read_pod<std::uint32_t>(in));
    w.params.diffusion_steps = static_cast<int>(read_pod<std::uint32_t>(in));
    w.params.ddim_steps = static_cast<int>(read_pod<std::uint32_t>(in));
    w.params.sigma_frac = read_pod<double>(in);
    w.init_seed = read_pod<std::uint64_t>(in);
    w.params.validate();

    const auto count = read_pod<std::uint32_t>(in);
    w.tensors.resize(count);
    for (auto& t : w.tensors) {
        const auto name_len = read_pod<std::uint32_t>(in);
        t.name.resize(name_len);
        in.read(t.name.data(), name_len);
        const auto rank = read_pod<std::uint32_t>(in);
        if (rank == 0 || rank > 4)
            throw DomainError(ErrorCode::IoError, "bad tensor rank");
        t.shape.resize(rank);
        for (auto& d : t.shape) d = static_cast<int>(read_pod<std::uint32_t>(in));
        int cols = 1;
        for (std::size_t i = 1; i < t.shape.size(); ++i) cols *= t.shape[i];
        t.value.resize(t.shape[0], cols);
        for (Eigen::Index r = 0; r < t.value.rows(); ++r)
            for (Eigen::Index c = 0; c < t.value.cols(); ++c)
                t.value(r, c) = static_cast<double>(read_pod<float>(in));
    }
    return w;
}

}  // namespace armo::diffusion
