#include "maernav/nn.hpp"

#include <cmath>

#include "maernav/error.hpp"

namespace maernav::nn {

Mlp::Mlp(int in, const std::vector<int>& hidden, int out, double slope, Rng& rng) : slope_(slope)
{
    std::vector<int> dims{in};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(out);
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        Dense d;
        const double bound = 1.0 / std::sqrt(static_cast<double>(dims[i]));
        d.W.resize(dims[i + 1], dims[i]);
        d.b.resize(dims[i + 1], 1);
        for (Eigen::Index k = 0; k < d.W.size(); ++k)
            d.W.data()[k] = rng.uniform(-bound, bound);
        for (Eigen::Index k = 0; k < d.b.size(); ++k)
            d.b.data()[k] = rng.uniform(-bound, bound);
        d.gW = Matrix::Zero(d.W.rows(), d.W.cols());
        d.gb = Matrix::Zero(d.b.rows(), 1);
        layers_.push_back(std::move(d));
    }
}

Matrix Mlp::forward(const Matrix& x, Cache* cache) const
{
    if (x.rows() != layers_.front().W.cols())
        throw DomainError("network input dimension mismatch");
    if (cache) {
        cache->inputs.clear();
        cache->pre.clear();
    }
    Matrix h = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const Dense& d = layers_[i];
        if (cache)
            cache->inputs.push_back(h);
        Matrix z = d.W * h;
        z.colwise() += d.b.col(0);
        if (i + 1 == layers_.size())
            return z;
        if (cache)
            cache->pre.push_back(z);
        h = z.unaryExpr([s = slope_](double v) { return v > 0.0 ? v : s * v; });
    }
    return h;
}

Matrix Mlp::backward(const Matrix& dy, const Cache& cache, bool accumulate)
{
    Matrix g = dy;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        Dense& d = layers_[i];
        if (i + 1 < layers_.size()) {
            const Matrix& z = cache.pre[i];
            g = g.binaryExpr(z, [s = slope_](double gv, double zv) { return zv > 0.0 ? gv : s * gv; });
        }
        if (accumulate) {
            d.gW.noalias() += g * cache.inputs[i].transpose();
            d.gb += g.rowwise().sum();
        }
        g = (d.W.transpose() * g).eval();
    }
    return g;
}

void Mlp::zero_grad()
{
    for (Dense& d : layers_) {
        d.gW.setZero();
        d.gb.setZero();
    }
}

std::vector<ParamRef> Mlp::params(const std::string& prefix)
{
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        Dense& d = layers_[i];
        const std::string base = prefix + ".l" + std::to_string(i);
        out.push_back({base + ".W", d.W.data(), d.gW.data(), d.W.rows(), d.W.cols()});
        out.push_back({base + ".b", d.b.data(), d.gb.data(), d.b.rows(), d.b.cols()});
    }
    return out;
}

Adam::Adam(const std::vector<ParamRef>& params, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps)
{
    for (const ParamRef& p : params) {
        m_.push_back(Vector::Zero(p.size()));
        v_.push_back(Vector::Zero(p.size()));
    }
}

void Adam::step(const std::vector<ParamRef>& params, double lr)
{
    if (params.size() != m_.size())
        throw DomainError("optimizer parameter list changed shape");
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const ParamRef& p = params[i];
        Eigen::Map<Vector> value(p.value, p.size());
        Eigen::Map<const Vector> grad(p.grad, p.size());
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad;
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad.cwiseProduct(grad);
        if (lr == 0.0)
            continue;
        value.array() -= lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
    }
}

double polyak_scalar(double target, double online, double tau)
{
    if (tau == 1.0)
        return online;
    return target + tau * (online - target);
}

void polyak_update(Mlp& target, const Mlp& online, double tau)
{
    auto& tl = target.layers();
    const auto& ol = online.layers();
    if (tl.size() != ol.size())
        throw DomainError("target and online networks differ in depth");
    for (std::size_t i = 0; i < tl.size(); ++i) {
        if (tau == 1.0) {
            tl[i].W = ol[i].W;
            tl[i].b = ol[i].b;
        } else {
            tl[i].W += tau * (ol[i].W - tl[i].W);
            tl[i].b += tau * (ol[i].b - tl[i].b);
        }
    }
}

} // namespace maernav::nn
