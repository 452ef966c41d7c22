#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "maernav/rng.hpp"

namespace maernav::nn {

/// Column-per-sample matrices: rows are features, columns are batch entries.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Non-owning view of one parameter array and its gradient accumulator.
struct ParamRef {
    std::string name;
    double* value = nullptr;
    double* grad = nullptr;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    Eigen::Index size() const { return rows * cols; }
};

struct Dense {
    Matrix W;  ///< out x in
    Matrix b;  ///< out x 1
    Matrix gW;
    Matrix gb;
};

/// Dense layers with Leaky ReLU between them and a linear output layer.
class Mlp {
public:
    struct Cache {
        std::vector<Matrix> inputs;  ///< input to each layer
        std::vector<Matrix> pre;     ///< pre-activation of each hidden layer
    };

    Mlp() = default;
    Mlp(int in, const std::vector<int>& hidden, int out, double slope, Rng& rng);

    Matrix forward(const Matrix& x, Cache* cache = nullptr) const;

    /// Returns dL/dx; adds parameter gradients into gW/gb when accumulate is set.
    Matrix backward(const Matrix& dy, const Cache& cache, bool accumulate);

    void zero_grad();
    std::vector<ParamRef> params(const std::string& prefix);

    int in_dim() const { return static_cast<int>(layers_.front().W.cols()); }
    int out_dim() const { return static_cast<int>(layers_.back().W.rows()); }
    double slope() const { return slope_; }
    std::vector<Dense>& layers() { return layers_; }
    const std::vector<Dense>& layers() const { return layers_; }

private:
    std::vector<Dense> layers_;
    double slope_ = 0.01;
};

/// Adaptive moment estimation over a fixed, ordered parameter list.
class Adam {
public:
    Adam() = default;
    explicit Adam(const std::vector<ParamRef>& params, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    void step(const std::vector<ParamRef>& params, double lr);

    long long steps() const { return t_; }
    std::vector<Vector>& first_moments() { return m_; }
    std::vector<Vector>& second_moments() { return v_; }
    const std::vector<Vector>& first_moments() const { return m_; }
    const std::vector<Vector>& second_moments() const { return v_; }
    void set_steps(long long t) { t_ = t; }

private:
    double beta1_ = 0.9;
    double beta2_ = 0.999;
    double eps_ = 1e-8;
    long long t_ = 0;
    std::vector<Vector> m_;
    std::vector<Vector> v_;
};

/// Polyak averaging target <- target + tau (online - target); tau = 1 copies exactly.
void polyak_update(Mlp& target, const Mlp& online, double tau);
double polyak_scalar(double target, double online, double tau);

} // namespace maernav::nn
