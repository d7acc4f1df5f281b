#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pdn/rl/state.hpp"

namespace pdn::rl {

struct NetworkConfig {
    std::vector<int> conv_channels{16, 32};
    int kernel = 3;  // odd; "same" padding
    std::vector<int> hidden{256};

    void validate() const;
};

struct TensorInfo {
    std::string name;
    std::vector<int> shape;
    std::size_t offset = 0;
    std::size_t size = 0;
};

/// Three logits per action site, ordered (-1, 0, +1), plus the value estimate.
struct NetOutput {
    Eigen::MatrixXd logits;  // sites x 3
    double value = 0.0;
};

/// Shared convolutional trunk with a factorized policy head and a scalar
/// value head. All parameters live in one flat vector; tensors() describes
/// the named views into it.
class PolicyValueNet {
public:
    PolicyValueNet() = default;
    PolicyValueNet(int in_channels, GridDims canvas, int sites, NetworkConfig config = {});

    /// He-normal trunk, small policy head, zero biases.
    void initialize(std::uint64_t seed);

    [[nodiscard]] Eigen::VectorXd& params() { return params_; }
    [[nodiscard]] const Eigen::VectorXd& params() const { return params_; }
    [[nodiscard]] const std::vector<TensorInfo>& tensors() const { return tensors_; }
    [[nodiscard]] int sites() const { return sites_; }
    [[nodiscard]] int in_channels() const { return in_channels_; }
    [[nodiscard]] GridDims canvas() const { return canvas_; }
    [[nodiscard]] const NetworkConfig& config() const { return config_; }

    /// Throws NumericFault on non-finite outputs.
    [[nodiscard]] std::vector<NetOutput> forward(std::span<const StateTensor> batch) const;
    [[nodiscard]] NetOutput forward(const StateTensor& state) const;

    /// Gradient of sum_b (<dlogits_b, logits_b> + dvalue_b * value_b) with
    /// respect to the parameters.
    [[nodiscard]] Eigen::VectorXd backward(std::span<const StateTensor> batch,
                                           std::span<const Eigen::MatrixXd> dlogits,
                                           std::span<const double> dvalue) const;

    /// Text dump: header lines, then per tensor "tensor <name> <shape>" and
    /// one line of row-major values.
    void save(std::ostream& os) const;
    static PolicyValueNet load(std::istream& is);

private:
    struct Trace;
    void run(std::span<const StateTensor> batch, Trace& trace) const;
    std::size_t add_tensor(std::string name, std::vector<int> shape);

    int in_channels_ = 0;
    GridDims canvas_;
    int sites_ = 0;
    NetworkConfig config_;
    std::vector<TensorInfo> tensors_;
    Eigen::VectorXd params_;
    // Offsets of weight/bias tensors per layer.
    std::vector<std::size_t> conv_w_, conv_b_, fc_w_, fc_b_;
    std::size_t pol_w_ = 0, pol_b_ = 0, val_w_ = 0, val_b_ = 0;
};

/// Row-wise softmax of the policy logits (sites x 3).
Eigen::MatrixXd policy_forward(const StateTensor& state, const PolicyValueNet& net);
double value_forward(const StateTensor& state, const PolicyValueNet& net);

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

}  // namespace pdn::rl
