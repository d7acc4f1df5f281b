#include "pdn/rl/network.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "pdn/error.hpp"

namespace pdn::rl {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

struct ConvShape {
    int cin, cout, rows, cols, k;
    [[nodiscard]] int in_size() const { return cin * rows * cols; }
    [[nodiscard]] int out_size() const { return cout * rows * cols; }
};

// "Same"-padded convolution followed by ReLU.
void conv_forward(const ConvShape& s, const double* in, const double* w, const double* b,
                  double* out) {
    const int p = s.k / 2;
    const int plane = s.rows * s.cols;
    for (int o = 0; o < s.cout; ++o) {
        double* dst = out + o * plane;
        for (int q = 0; q < plane; ++q) dst[q] = b[o];
        for (int i = 0; i < s.cin; ++i) {
            const double* src = in + i * plane;
            const double* wk = w + (o * s.cin + i) * s.k * s.k;
            for (int dr = 0; dr < s.k; ++dr) {
                for (int dc = 0; dc < s.k; ++dc) {
                    const double wv = wk[dr * s.k + dc];
                    const int r0 = std::max(0, p - dr);
                    const int r1 = std::min(s.rows, s.rows + p - dr);
                    const int c0 = std::max(0, p - dc);
                    const int c1 = std::min(s.cols, s.cols + p - dc);
                    for (int r = r0; r < r1; ++r) {
                        const double* srow = src + (r + dr - p) * s.cols + (dc - p);
                        double* drow = dst + r * s.cols;
                        for (int c = c0; c < c1; ++c) drow[c] += wv * srow[c];
                    }
                }
            }
        }
        for (int q = 0; q < plane; ++q) dst[q] = std::max(dst[q], 0.0);
    }
}

// `dout` is already masked by the ReLU derivative. `din` may be null.
void conv_backward(const ConvShape& s, const double* in, const double* w, const double* dout,
                   double* dw, double* db, double* din) {
    const int p = s.k / 2;
    const int plane = s.rows * s.cols;
    for (int o = 0; o < s.cout; ++o) {
        const double* g = dout + o * plane;
        for (int q = 0; q < plane; ++q) db[o] += g[q];
        for (int i = 0; i < s.cin; ++i) {
            const double* src = in + i * plane;
            const double* wk = w + (o * s.cin + i) * s.k * s.k;
            double* dwk = dw + (o * s.cin + i) * s.k * s.k;
            double* dsrc = din ? din + i * plane : nullptr;
            for (int dr = 0; dr < s.k; ++dr) {
                for (int dc = 0; dc < s.k; ++dc) {
                    const int r0 = std::max(0, p - dr);
                    const int r1 = std::min(s.rows, s.rows + p - dr);
                    const int c0 = std::max(0, p - dc);
                    const int c1 = std::min(s.cols, s.cols + p - dc);
                    double acc = 0.0;
                    const double wv = wk[dr * s.k + dc];
                    for (int r = r0; r < r1; ++r) {
                        const int off = (r + dr - p) * s.cols + (dc - p);
                        const double* grow = g + r * s.cols;
                        for (int c = c0; c < c1; ++c) {
                            acc += grow[c] * src[off + c];
                            if (dsrc) dsrc[off + c] += wv * grow[c];
                        }
                    }
                    dwk[dr * s.k + dc] += acc;
                }
            }
        }
    }
}

}  // namespace

void NetworkConfig::validate() const {
    if (kernel <= 0 || kernel % 2 == 0) {
        throw InvalidArgument(fmt::format("convolution kernel must be odd and positive, got {}", kernel));
    }
    for (int c : conv_channels) {
        if (c <= 0) throw InvalidArgument("convolution channel counts must be positive");
    }
    if (hidden.empty()) throw InvalidArgument("at least one hidden layer is required");
    for (int h : hidden) {
        if (h <= 0) throw InvalidArgument("hidden layer sizes must be positive");
    }
}

struct PolicyValueNet::Trace {
    std::vector<Eigen::MatrixXd> conv;  // per layer: out_size x batch (post-ReLU)
    std::vector<Eigen::MatrixXd> fc;    // per hidden layer: h x batch (post-ReLU)
    Eigen::MatrixXd features;           // flattened trunk output
    Eigen::MatrixXd policy;             // 3*sites x batch
    Eigen::RowVectorXd value;
};

std::size_t PolicyValueNet::add_tensor(std::string name, std::vector<int> shape) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    const std::size_t offset = tensors_.empty() ? 0 : tensors_.back().offset + tensors_.back().size;
    tensors_.push_back({std::move(name), std::move(shape), offset, n});
    return offset;
}

PolicyValueNet::PolicyValueNet(int in_channels, GridDims canvas, int sites, NetworkConfig config)
    : in_channels_(in_channels), canvas_(canvas), sites_(sites), config_(std::move(config)) {
    config_.validate();
    if (in_channels <= 0 || canvas.rows <= 0 || canvas.cols <= 0 || sites <= 0) {
        throw InvalidArgument("network needs positive channels, canvas and site count");
    }
    int cin = in_channels;
    const int k = config_.kernel;
    for (std::size_t l = 0; l < config_.conv_channels.size(); ++l) {
        const int cout = config_.conv_channels[l];
        conv_w_.push_back(add_tensor(fmt::format("conv{}.weight", l), {cout, cin, k, k}));
        conv_b_.push_back(add_tensor(fmt::format("conv{}.bias", l), {cout}));
        cin = cout;
    }
    int in = cin * canvas.count();
    for (std::size_t l = 0; l < config_.hidden.size(); ++l) {
        const int h = config_.hidden[l];
        fc_w_.push_back(add_tensor(fmt::format("fc{}.weight", l), {h, in}));
        fc_b_.push_back(add_tensor(fmt::format("fc{}.bias", l), {h}));
        in = h;
    }
    pol_w_ = add_tensor("policy.weight", {3 * sites, in});
    pol_b_ = add_tensor("policy.bias", {3 * sites});
    val_w_ = add_tensor("value.weight", {1, in});
    val_b_ = add_tensor("value.bias", {1});
    params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(tensors_.back().offset + tensors_.back().size));
}

void PolicyValueNet::initialize(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    params_.setZero();
    auto fill = [&](const TensorInfo& t, double stddev) {
        std::normal_distribution<double> dist(0.0, stddev);
        for (std::size_t i = 0; i < t.size; ++i) params_[static_cast<Eigen::Index>(t.offset + i)] = dist(rng);
    };
    for (const TensorInfo& t : tensors_) {
        if (t.shape.size() < 2) continue;  // biases stay zero
        std::size_t fan_in = 1;
        for (std::size_t d = 1; d < t.shape.size(); ++d) fan_in *= static_cast<std::size_t>(t.shape[d]);
        const double base = std::sqrt(1.0 / static_cast<double>(fan_in));
        if (t.name == "policy.weight") {
            fill(t, 0.01 * base);
        } else if (t.name == "value.weight") {
            fill(t, base);
        } else {
            fill(t, std::sqrt(2.0) * base);
        }
    }
}

void PolicyValueNet::run(std::span<const StateTensor> batch, Trace& tr) const {
    const auto B = static_cast<Eigen::Index>(batch.size());
    const int plane = canvas_.count();
    for (const StateTensor& s : batch) {
        if (s.channels != in_channels_ || !(s.dims == canvas_)) {
            throw InvalidArgument(fmt::format("state shape {}x{}x{} does not match network input {}x{}x{}",
                                              s.channels, s.dims.rows, s.dims.cols, in_channels_,
                                              canvas_.rows, canvas_.cols));
        }
    }
    const double* p = params_.data();

    tr.conv.clear();
    int cin = in_channels_;
    for (std::size_t l = 0; l < conv_w_.size(); ++l) {
        const ConvShape sh{cin, config_.conv_channels[l], canvas_.rows, canvas_.cols, config_.kernel};
        Eigen::MatrixXd out(sh.out_size(), B);
        for (Eigen::Index b = 0; b < B; ++b) {
            const double* in = l == 0 ? batch[b].data.data() : tr.conv[l - 1].col(b).data();
            conv_forward(sh, in, p + conv_w_[l], p + conv_b_[l], out.col(b).data());
        }
        tr.conv.push_back(std::move(out));
        cin = sh.cout;
    }
    if (tr.conv.empty()) {
        tr.features.resize(in_channels_ * plane, B);
        for (Eigen::Index b = 0; b < B; ++b) {
            tr.features.col(b) = Eigen::Map<const Eigen::VectorXd>(batch[b].data.data(), in_channels_ * plane);
        }
    } else {
        tr.features = tr.conv.back();
    }

    tr.fc.clear();
    const Eigen::MatrixXd* x = &tr.features;
    for (std::size_t l = 0; l < fc_w_.size(); ++l) {
        const auto h = static_cast<Eigen::Index>(config_.hidden[l]);
        ConstMap w(p + fc_w_[l], h, x->rows());
        Eigen::Map<const Eigen::VectorXd> bias(p + fc_b_[l], h);
        Eigen::MatrixXd z = w * *x;
        z.colwise() += bias;
        tr.fc.push_back(z.cwiseMax(0.0));
        x = &tr.fc.back();
    }
    const auto n3 = static_cast<Eigen::Index>(3 * sites_);
    ConstMap wp(p + pol_w_, n3, x->rows());
    tr.policy = wp * *x;
    tr.policy.colwise() += Eigen::Map<const Eigen::VectorXd>(p + pol_b_, n3);
    ConstMap wv(p + val_w_, 1, x->rows());
    tr.value = (wv * *x).row(0);
    tr.value.array() += p[val_b_];

    if (!tr.policy.allFinite() || !tr.value.allFinite()) {
        throw NumericFault("non-finite network activation");
    }
}

std::vector<NetOutput> PolicyValueNet::forward(std::span<const StateTensor> batch) const {
    Trace tr;
    run(batch, tr);
    std::vector<NetOutput> out(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
        out[b].logits = Map(tr.policy.col(static_cast<Eigen::Index>(b)).data(), sites_, 3);
        out[b].value = tr.value[static_cast<Eigen::Index>(b)];
    }
    return out;
}

NetOutput PolicyValueNet::forward(const StateTensor& state) const {
    return forward(std::span<const StateTensor>(&state, 1)).front();
}

Eigen::VectorXd PolicyValueNet::backward(std::span<const StateTensor> batch,
                                         std::span<const Eigen::MatrixXd> dlogits,
                                         std::span<const double> dvalue) const {
    if (dlogits.size() != batch.size() || dvalue.size() != batch.size()) {
        throw InvalidArgument("gradient seeds must match the batch size");
    }
    Trace tr;
    run(batch, tr);
    const auto B = static_cast<Eigen::Index>(batch.size());
    const auto n3 = static_cast<Eigen::Index>(3 * sites_);
    const double* p = params_.data();
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
    double* g = grad.data();

    Eigen::MatrixXd dpol(n3, B);
    Eigen::RowVectorXd dval(B);
    for (Eigen::Index b = 0; b < B; ++b) {
        const Eigen::MatrixXd& d = dlogits[b];
        if (d.rows() != sites_ || d.cols() != 3) throw InvalidArgument("logit gradient must be sites x 3");
        Map(dpol.col(b).data(), sites_, 3) = d;
        dval[b] = dvalue[b];
    }

    const Eigen::MatrixXd& top = tr.fc.empty() ? tr.features : tr.fc.back();
    Map(g + pol_w_, n3, top.rows()) += dpol * top.transpose();
    Eigen::Map<Eigen::VectorXd>(g + pol_b_, n3) += dpol.rowwise().sum();
    Map(g + val_w_, 1, top.rows()) += dval * top.transpose();
    g[val_b_] += dval.sum();
    Eigen::MatrixXd dx = ConstMap(p + pol_w_, n3, top.rows()).transpose() * dpol +
                         ConstMap(p + val_w_, 1, top.rows()).transpose() * dval;

    for (std::size_t l = fc_w_.size(); l-- > 0;) {
        const Eigen::MatrixXd& in = l == 0 ? tr.features : tr.fc[l - 1];
        const auto h = static_cast<Eigen::Index>(config_.hidden[l]);
        Eigen::MatrixXd dz = dx.cwiseProduct((tr.fc[l].array() > 0.0).cast<double>().matrix());
        Map(g + fc_w_[l], h, in.rows()) += dz * in.transpose();
        Eigen::Map<Eigen::VectorXd>(g + fc_b_[l], h) += dz.rowwise().sum();
        dx = ConstMap(p + fc_w_[l], h, in.rows()).transpose() * dz;
    }

    for (std::size_t l = conv_w_.size(); l-- > 0;) {
        const int cin = l == 0 ? in_channels_ : config_.conv_channels[l - 1];
        const ConvShape sh{cin, config_.conv_channels[l], canvas_.rows, canvas_.cols, config_.kernel};
        Eigen::MatrixXd dout = dx.cwiseProduct((tr.conv[l].array() > 0.0).cast<double>().matrix());
        Eigen::MatrixXd din;
        if (l > 0) din = Eigen::MatrixXd::Zero(sh.in_size(), B);
        for (Eigen::Index b = 0; b < B; ++b) {
            const double* in = l == 0 ? batch[b].data.data() : tr.conv[l - 1].col(b).data();
            conv_backward(sh, in, p + conv_w_[l], dout.col(b).data(), g + conv_w_[l], g + conv_b_[l],
                          l > 0 ? din.col(b).data() : nullptr);
        }
        dx = std::move(din);
    }
    return grad;
}

void PolicyValueNet::save(std::ostream& os) const {
    os << "pdn-policy-value 1\n";
    os << fmt::format("input {} {} {}\n", in_channels_, canvas_.rows, canvas_.cols);
    os << fmt::format("sites {}\n", sites_);
    os << fmt::format("kernel {}\n", config_.kernel);
    os << "conv";
    for (int c : config_.conv_channels) os << ' ' << c;
    os << "\nhidden";
    for (int h : config_.hidden) os << ' ' << h;
    os << '\n';
    for (const TensorInfo& t : tensors_) {
        os << "tensor " << t.name;
        for (int d : t.shape) os << ' ' << d;
        os << '\n';
        for (std::size_t i = 0; i < t.size; ++i) {
            if (i) os << ' ';
            os << fmt::format("{:.17g}", params_[static_cast<Eigen::Index>(t.offset + i)]);
        }
        os << '\n';
    }
}

PolicyValueNet PolicyValueNet::load(std::istream& is) {
    auto expect_line = [&](const char* key) {
        std::string line;
        if (!std::getline(is, line)) throw InvalidArgument(fmt::format("checkpoint truncated before '{}'", key));
        std::istringstream ls(line);
        std::string k;
        ls >> k;
        if (k != key) throw InvalidArgument(fmt::format("checkpoint: expected '{}', found '{}'", key, k));
        std::vector<int> v;
        int x = 0;
        while (ls >> x) v.push_back(x);
        return v;
    };
    std::string magic;
    std::getline(is, magic);
    if (magic != "pdn-policy-value 1") throw InvalidArgument("not a policy/value checkpoint");
    const auto input = expect_line("input");
    const auto sites = expect_line("sites");
    const auto kernel = expect_line("kernel");
    NetworkConfig cfg;
    cfg.conv_channels = expect_line("conv");
    cfg.hidden = expect_line("hidden");
    if (input.size() != 3 || sites.size() != 1 || kernel.size() != 1) {
        throw InvalidArgument("checkpoint header is malformed");
    }
    cfg.kernel = kernel[0];
    PolicyValueNet net(input[0], {input[1], input[2]}, sites[0], cfg);
    for (const TensorInfo& t : net.tensors_) {
        std::string line;
        std::getline(is, line);
        std::istringstream ls(line);
        std::string tag, name;
        ls >> tag >> name;
        std::vector<int> shape;
        int d = 0;
        while (ls >> d) shape.push_back(d);
        if (tag != "tensor" || name != t.name || shape != t.shape) {
            throw InvalidArgument(fmt::format("checkpoint tensor '{}' missing or misshaped", t.name));
        }
        std::getline(is, line);
        std::istringstream vs(line);
        for (std::size_t i = 0; i < t.size; ++i) {
            double v = 0.0;
            if (!(vs >> v)) throw InvalidArgument(fmt::format("checkpoint tensor '{}' is truncated", t.name));
            net.params_[static_cast<Eigen::Index>(t.offset + i)] = v;
        }
    }
    return net;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd p(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        p.row(i) = (logits.row(i).array() - m).exp().matrix();
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

Eigen::MatrixXd policy_forward(const StateTensor& state, const PolicyValueNet& net) {
    return softmax_rows(net.forward(state).logits);
}

double value_forward(const StateTensor& state, const PolicyValueNet& net) {
    return net.forward(state).value;
}

}  // namespace pdn::rl
