#include "maernav/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "maernav/error.hpp"

namespace maernav {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)

double softplus(double x)
{
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// log(1 - tanh(u)^2), stable for large |u|.
double log1m_tanh2(double u)
{
    return 2.0 * (std::numbers::ln2 - u - softplus(-2.0 * u));
}

const SacConfig& checked(const SacConfig& cfg)
{
    cfg.validate();
    return cfg;
}

std::vector<int> hidden_dims(const SacConfig& cfg)
{
    return std::vector<int>(static_cast<std::size_t>(cfg.hidden_layers), cfg.hidden_width);
}

/// Rows [0, sectors) become 1 / (l + beta); the rest pass through.
nn::Matrix prior_rows(const nn::Matrix& obs, int sectors, double beta)
{
    nn::Matrix x = obs;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        for (Eigen::Index r = 0; r < sectors; ++r) {
            const double den = x(r, c) + beta;
            if (!(den > 0.0))
                throw DomainError("lidar prior denominator l + beta must be positive");
            x(r, c) = 1.0 / den;
        }
    }
    return x;
}

/// d/dbeta of sum g * q over the prior rows, using q already stored in x.
double prior_beta_grad(const nn::Matrix& x, const nn::Matrix& g, int sectors)
{
    double acc = 0.0;
    for (Eigen::Index c = 0; c < x.cols(); ++c)
        for (Eigen::Index r = 0; r < sectors; ++r)
            acc -= g(r, c) * x(r, c) * x(r, c);
    return acc;
}

nn::Matrix head_from_mixture(const Mixture& mix)
{
    const int k = mix.components();
    nn::Matrix head(5 * k, 1);
    for (int i = 0; i < k; ++i) {
        head(i, 0) = std::log(mix.weights[static_cast<std::size_t>(i)]);
        for (int d = 0; d < 2; ++d) {
            head(k + 2 * i + d, 0) = mix.means[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
            head(3 * k + 2 * i + d, 0) = std::log(mix.stds[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)]);
        }
    }
    return head;
}

} // namespace

std::vector<double> lidar_prior(std::span<const double> ranges, double beta)
{
    std::vector<double> q(ranges.size());
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        const double den = ranges[i] + beta;
        if (!(den > 0.0))
            throw DomainError("lidar prior denominator l + beta must be positive");
        q[i] = 1.0 / den;
    }
    return q;
}

void SacConfig::validate() const
{
    if (hidden_width < 1 || hidden_layers < 0)
        throw ConfigError("hidden layout must be positive");
    if (components < 1)
        throw ConfigError("mixture needs K >= 1 components");
    if (batch_size < 1)
        throw ConfigError("batch size must be >= 1");
    if (!(tau > 0.0 && tau <= 1.0))
        throw ConfigError("tau must lie in (0, 1]");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw ConfigError("gamma must lie in [0, 1)");
    if (!(lr_actor >= 0.0 && lr_critic >= 0.0 && lr_alpha >= 0.0))
        throw ConfigError("learning rates must be nonnegative");
    if (!(init_alpha > 0.0))
        throw ConfigError("init_alpha must be positive");
}

// --- Networks ---

ActorNet::ActorNet(int sectors, const SacConfig& cfg, Rng& rng)
    : beta(cfg.beta_init),
      body(sectors + 4, hidden_dims(cfg), 5 * cfg.components, cfg.leaky_slope, rng),
      sectors_(sectors),
      components_(cfg.components)
{
}

nn::Matrix ActorNet::input(const nn::Matrix& obs) const
{
    if (obs.rows() != obs_dim())
        throw DomainError("actor observation dimension mismatch: expected " + std::to_string(obs_dim()) + ", got " +
                          std::to_string(obs.rows()));
    return prior_rows(obs, sectors_, beta);
}

nn::Matrix ActorNet::head(const nn::Matrix& obs, nn::Mlp::Cache* cache) const
{
    return body.forward(input(obs), cache);
}

Mixture ActorNet::mixture(const Observation& obs) const
{
    const auto flat = obs.flatten();
    const nn::Matrix x = Eigen::Map<const nn::Matrix>(flat.data(), static_cast<Eigen::Index>(flat.size()), 1);
    return mixture_from_head(head(x), components_, 0);
}

void ActorNet::zero_grad()
{
    body.zero_grad();
    grad_beta = 0.0;
}

std::vector<nn::ParamRef> ActorNet::params(const std::string& prefix)
{
    auto out = body.params(prefix);
    out.push_back({prefix + ".beta", &beta, &grad_beta, 1, 1});
    return out;
}

CriticNet::CriticNet(int sectors, const SacConfig& cfg, Rng& rng)
    : beta(cfg.beta_init), body(sectors + 6, hidden_dims(cfg), 1, cfg.leaky_slope, rng), sectors_(sectors)
{
}

nn::Matrix CriticNet::input(const nn::Matrix& obs, const nn::Matrix& action) const
{
    if (obs.rows() != sectors_ + 4 || action.rows() != 2 || action.cols() != obs.cols())
        throw DomainError("critic input shape mismatch");
    nn::Matrix x(obs.rows() + 2, obs.cols());
    x.topRows(obs.rows()) = prior_rows(obs, sectors_, beta);
    x.bottomRows(2) = action;
    return x;
}

nn::Matrix CriticNet::forward(const nn::Matrix& obs, const nn::Matrix& action, nn::Mlp::Cache* cache) const
{
    return body.forward(input(obs, action), cache);
}

nn::Matrix CriticNet::backward(const nn::Matrix& dq, const nn::Matrix& obs, const nn::Mlp::Cache& cache,
                               bool accumulate)
{
    (void)obs;
    const nn::Matrix g_in = body.backward(dq, cache, accumulate);
    if (accumulate)
        grad_beta += prior_beta_grad(cache.inputs.front(), g_in, sectors_);
    return g_in.bottomRows(2);
}

void CriticNet::zero_grad()
{
    body.zero_grad();
    grad_beta = 0.0;
}

std::vector<nn::ParamRef> CriticNet::params(const std::string& prefix)
{
    auto out = body.params(prefix);
    out.push_back({prefix + ".beta", &beta, &grad_beta, 1, 1});
    return out;
}

// --- Mixture policy ---

Mixture forward_actor(const ActorNet& actor, const Observation& obs)
{
    return actor.mixture(obs);
}

Mixture mixture_from_head(const nn::Matrix& head, int k, Eigen::Index col)
{
    if (head.rows() != 5 * k)
        throw DomainError("mixture head has the wrong number of rows");
    Mixture mix;
    mix.weights.resize(static_cast<std::size_t>(k));
    mix.means.resize(static_cast<std::size_t>(k));
    mix.stds.resize(static_cast<std::size_t>(k));
    double zmax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i)
        zmax = std::max(zmax, head(i, col));
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        mix.weights[static_cast<std::size_t>(i)] = std::exp(head(i, col) - zmax);
        total += mix.weights[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < k; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        mix.weights[ui] /= total;
        for (int d = 0; d < 2; ++d) {
            const auto ud = static_cast<std::size_t>(d);
            mix.means[ui][ud] = head(k + 2 * i + d, col);
            mix.stds[ui][ud] = std::exp(std::clamp(head(3 * k + 2 * i + d, col), kLogStdMin, kLogStdMax));
        }
    }
    return mix;
}

MixtureNoise draw_noise(const nn::Matrix& head, int k, Rng& rng)
{
    const Eigen::Index n = head.cols();
    MixtureNoise noise;
    noise.component.resize(static_cast<std::size_t>(n));
    noise.eps.resize(2, n);
    for (Eigen::Index b = 0; b < n; ++b) {
        double zmax = head.block(0, b, k, 1).maxCoeff();
        std::vector<double> w(static_cast<std::size_t>(k));
        double total = 0.0;
        for (int i = 0; i < k; ++i) {
            w[static_cast<std::size_t>(i)] = std::exp(head(i, b) - zmax);
            total += w[static_cast<std::size_t>(i)];
        }
        const double u = rng.uniform() * total;
        int c = k - 1;
        double acc = 0.0;
        for (int i = 0; i < k; ++i) {
            acc += w[static_cast<std::size_t>(i)];
            if (u < acc) {
                c = i;
                break;
            }
        }
        noise.component[static_cast<std::size_t>(b)] = c;
        noise.eps(0, b) = rng.normal();
        noise.eps(1, b) = rng.normal();
    }
    return noise;
}

SquashedSample squash_sample(const nn::Matrix& head, int k, const MixtureNoise& noise, std::array<double, 2> scale)
{
    const Eigen::Index n = head.cols();
    SquashedSample s;
    s.noise = noise;
    s.action.resize(2, n);
    s.log_prob.resize(n);
    s.u.resize(2, n);
    s.resp.resize(k, n);
    s.weights.resize(k, n);
    s.log_std = head.bottomRows(2 * k).cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);

    std::vector<double> a(static_cast<std::size_t>(k));
    for (Eigen::Index b = 0; b < n; ++b) {
        const int c = noise.component[static_cast<std::size_t>(b)];
        const double zmax = head.block(0, b, k, 1).maxCoeff();
        double zsum = 0.0;
        for (int i = 0; i < k; ++i)
            zsum += std::exp(head(i, b) - zmax);
        const double lse_z = zmax + std::log(zsum);

        for (int d = 0; d < 2; ++d)
            s.u(d, b) = head(k + 2 * c + d, b) + std::exp(s.log_std(2 * c + d, b)) * noise.eps(d, b);

        double amax = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < k; ++i) {
            double lg = head(i, b) - lse_z - kLog2Pi;
            for (int d = 0; d < 2; ++d) {
                const double ls = s.log_std(2 * i + d, b);
                const double z = (s.u(d, b) - head(k + 2 * i + d, b)) * std::exp(-ls);
                lg += -0.5 * z * z - ls;
            }
            a[static_cast<std::size_t>(i)] = lg;
            amax = std::max(amax, lg);
            s.weights(i, b) = std::exp(head(i, b) - lse_z);
        }
        double asum = 0.0;
        for (int i = 0; i < k; ++i)
            asum += std::exp(a[static_cast<std::size_t>(i)] - amax);
        const double lp_u = amax + std::log(asum);
        for (int i = 0; i < k; ++i)
            s.resp(i, b) = std::exp(a[static_cast<std::size_t>(i)] - lp_u);

        double lp = lp_u;
        for (int d = 0; d < 2; ++d) {
            const double u = s.u(d, b);
            s.action(d, b) = scale[static_cast<std::size_t>(d)] * std::tanh(u);
            lp -= std::log(scale[static_cast<std::size_t>(d)]) + log1m_tanh2(u);
        }
        s.log_prob(b) = lp;
    }
    return s;
}

nn::Matrix squash_backward(const nn::Matrix& head, const SquashedSample& s, const nn::Matrix& g_action,
                           const nn::Vector& g_logp, std::array<double, 2> scale)
{
    const int k = static_cast<int>(head.rows() / 5);
    const Eigen::Index n = head.cols();
    nn::Matrix g = nn::Matrix::Zero(head.rows(), n);
    for (Eigen::Index b = 0; b < n; ++b) {
        const int c = s.noise.component[static_cast<std::size_t>(b)];
        const double gl = g_logp(b);
        double g_u[2];
        for (int d = 0; d < 2; ++d) {
            const double u = s.u(d, b);
            const double t = std::tanh(u);
            double dlp_du = 2.0 * t;
            for (int i = 0; i < k; ++i) {
                const double var = std::exp(2.0 * s.log_std(2 * i + d, b));
                dlp_du -= s.resp(i, b) * (u - head(k + 2 * i + d, b)) / var;
            }
            g_u[d] = g_action(d, b) * scale[static_cast<std::size_t>(d)] * (1.0 - t * t) + gl * dlp_du;
        }
        for (int i = 0; i < k; ++i) {
            g(i, b) = gl * (s.resp(i, b) - s.weights(i, b));
            for (int d = 0; d < 2; ++d) {
                const double ls = s.log_std(2 * i + d, b);
                const double sigma = std::exp(ls);
                const double diff = s.u(d, b) - head(k + 2 * i + d, b);
                const double var = sigma * sigma;
                double g_mu = gl * s.resp(i, b) * diff / var;
                double g_ls = gl * s.resp(i, b) * (diff * diff / var - 1.0);
                if (i == c) {
                    g_mu += g_u[d];
                    g_ls += g_u[d] * sigma * s.noise.eps(d, b);
                }
                g(k + 2 * i + d, b) = g_mu;
                const double raw = head(3 * k + 2 * i + d, b);
                g(3 * k + 2 * i + d, b) = (raw < kLogStdMin || raw > kLogStdMax) ? 0.0 : g_ls;
            }
        }
    }
    return g;
}

std::pair<Action, double> sample_action(const Mixture& mix, Rng& rng, const RobotSpec& spec)
{
    const nn::Matrix head = head_from_mixture(mix);
    const MixtureNoise noise = draw_noise(head, mix.components(), rng);
    const SquashedSample s = squash_sample(head, mix.components(), noise, {spec.v_max, spec.w_max});
    return {{s.action(0, 0), s.action(1, 0)}, s.log_prob(0)};
}

Action deterministic_action(const Mixture& mix, const RobotSpec& spec)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < mix.weights.size(); ++i) {
        if (mix.weights[i] > mix.weights[best])
            best = i;
    }
    return {spec.v_max * std::tanh(mix.means[best][0]), spec.w_max * std::tanh(mix.means[best][1])};
}

double mixture_log_prob(const Mixture& mix, Action a, const RobotSpec& spec)
{
    const double scale[2] = {spec.v_max, spec.w_max};
    const double t[2] = {a.v / scale[0], a.w / scale[1]};
    if (!(std::abs(t[0]) < 1.0 && std::abs(t[1]) < 1.0))
        return -std::numeric_limits<double>::infinity();
    const double u[2] = {std::atanh(t[0]), std::atanh(t[1])};
    double amax = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    for (std::size_t i = 0; i < mix.weights.size(); ++i) {
        double lg = std::log(mix.weights[i]) - kLog2Pi;
        for (std::size_t d = 0; d < 2; ++d) {
            const double z = (u[d] - mix.means[i][d]) / mix.stds[i][d];
            lg += -0.5 * z * z - std::log(mix.stds[i][d]);
        }
        terms.push_back(lg);
        amax = std::max(amax, lg);
    }
    double sum = 0.0;
    for (double v : terms)
        sum += std::exp(v - amax);
    double lp = amax + std::log(sum);
    for (int d = 0; d < 2; ++d)
        lp -= std::log(scale[d]) + std::log1p(-t[d] * t[d]);
    return lp;
}

// --- Training ---

Batch make_batch(const std::vector<Transition>& records)
{
    if (records.empty())
        throw DomainError("empty batch");
    const auto n = static_cast<Eigen::Index>(records.size());
    const auto dim = static_cast<Eigen::Index>(records.front().obs.dim());
    Batch b;
    b.obs.resize(dim, n);
    b.next_obs.resize(dim, n);
    b.action.resize(2, n);
    b.reward.resize(n);
    b.done.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Transition& t = records[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(t.obs.dim()) != dim || static_cast<Eigen::Index>(t.next_obs.dim()) != dim)
            throw DomainError("batch observation dimension mismatch");
        t.obs.flatten_into({b.obs.col(i).data(), static_cast<std::size_t>(dim)});
        t.next_obs.flatten_into({b.next_obs.col(i).data(), static_cast<std::size_t>(dim)});
        b.action(0, i) = t.action.v;
        b.action(1, i) = t.action.w;
        b.reward(i) = t.reward;
        b.done(i) = t.done ? 1.0 : 0.0;
    }
    return b;
}

Batch make_batch(const ReplayBuffer& buffer, const std::vector<std::size_t>& slots)
{
    if (slots.empty())
        throw DomainError("empty batch");
    const auto n = static_cast<Eigen::Index>(slots.size());
    const auto dim = static_cast<Eigen::Index>(buffer.obs_dim());
    Batch b;
    b.obs.resize(dim, n);
    b.next_obs.resize(dim, n);
    b.action.resize(2, n);
    b.reward.resize(n);
    b.done.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* p = buffer.slot(slots[static_cast<std::size_t>(i)]);
        std::copy(p, p + dim, b.obs.col(i).data());
        b.action(0, i) = p[dim];
        b.action(1, i) = p[dim + 1];
        b.reward(i) = p[dim + 2];
        std::copy(p + dim + 3, p + 2 * dim + 3, b.next_obs.col(i).data());
        b.done(i) = p[2 * dim + 3];
    }
    return b;
}

double critic_target(double r, double gamma, bool done, double min_q_next, double alpha, double logp_next)
{
    if (done)
        return r;
    return r + gamma * (min_q_next - alpha * logp_next);
}

SacAgent::SacAgent(int sectors, const SacConfig& cfg, const RobotSpec& spec, Rng& init_rng)
    : actor(sectors, checked(cfg), init_rng),
      q1(sectors, cfg, init_rng),
      q2(sectors, cfg, init_rng),
      log_alpha(std::log(cfg.init_alpha)),
      cfg_(cfg),
      spec_(spec)
{
    q1_target = q1;
    q2_target = q2;
    actor_opt = nn::Adam(actor.params("actor"));
    q1_opt = nn::Adam(q1.params("q1"));
    q2_opt = nn::Adam(q2.params("q2"));
    alpha_opt = nn::Adam(alpha_params());
}

std::vector<nn::ParamRef> SacAgent::alpha_params()
{
    return {{"log_alpha", &log_alpha, &grad_log_alpha, 1, 1}};
}

Action SacAgent::act(const Observation& obs, Rng& rng) const
{
    return sample_action(actor.mixture(obs), rng, spec_).first;
}

Action SacAgent::act_deterministic(const Observation& obs) const
{
    return deterministic_action(actor.mixture(obs), spec_);
}

LossReport SacAgent::update(const Batch& batch, Rng& rng)
{
    const Eigen::Index n = batch.size();
    if (n == 0)
        throw DomainError("empty batch");
    const int k = actor.components();
    const auto scale = action_scale();
    const double alpha_now = alpha();
    const double inv_n = 1.0 / static_cast<double>(n);
    LossReport report;

    // Soft Bellman targets from a fresh next-state action.
    const nn::Matrix head_next = actor.head(batch.next_obs);
    const SquashedSample next = squash_sample(head_next, k, draw_noise(head_next, k, rng), scale);
    const nn::Matrix qt1 = q1_target.forward(batch.next_obs, next.action);
    const nn::Matrix qt2 = q2_target.forward(batch.next_obs, next.action);
    nn::Matrix y(1, n);
    for (Eigen::Index b = 0; b < n; ++b)
        y(0, b) = critic_target(batch.reward(b), cfg_.gamma, batch.done(b) != 0.0, std::min(qt1(0, b), qt2(0, b)),
                                alpha_now, next.log_prob(b));

    auto fit_critic = [&](CriticNet& q, nn::Adam& opt, const char* name) {
        q.zero_grad();
        nn::Mlp::Cache cache;
        const nn::Matrix diff = q.forward(batch.obs, batch.action, &cache) - y;
        q.backward(2.0 * inv_n * diff, batch.obs, cache, true);
        opt.step(q.params(name), cfg_.lr_critic);
        return diff.squaredNorm() * inv_n;
    };
    report.critic1 = fit_critic(q1, q1_opt, "q1");
    report.critic2 = fit_critic(q2, q2_opt, "q2");

    // Policy: minimize alpha * logpi - min(Q1, Q2) through the reparameterized draw.
    actor.zero_grad();
    nn::Mlp::Cache acache;
    const nn::Matrix head = actor.body.forward(actor.input(batch.obs), &acache);
    const SquashedSample cur = squash_sample(head, k, draw_noise(head, k, rng), scale);
    nn::Mlp::Cache c1, c2;
    const nn::Matrix v1 = q1.forward(batch.obs, cur.action, &c1);
    const nn::Matrix v2 = q2.forward(batch.obs, cur.action, &c2);
    nn::Matrix g1 = nn::Matrix::Zero(1, n);
    nn::Matrix g2 = nn::Matrix::Zero(1, n);
    double actor_loss = 0.0;
    for (Eigen::Index b = 0; b < n; ++b) {
        const bool first = v1(0, b) <= v2(0, b);
        (first ? g1 : g2)(0, b) = -inv_n;
        actor_loss += alpha_now * cur.log_prob(b) - std::min(v1(0, b), v2(0, b));
    }
    report.actor = actor_loss * inv_n;
    const nn::Matrix g_action = q1.backward(g1, batch.obs, c1, false) + q2.backward(g2, batch.obs, c2, false);
    const nn::Vector g_logp = nn::Vector::Constant(n, alpha_now * inv_n);
    const nn::Matrix g_head = squash_backward(head, cur, g_action, g_logp, scale);
    const nn::Matrix g_in = actor.body.backward(g_head, acache, true);
    actor.grad_beta += prior_beta_grad(acache.inputs.front(), g_in, actor.sectors());
    actor_opt.step(actor.params("actor"), cfg_.lr_actor);

    // Temperature.
    const double entropy_gap = -cur.log_prob.mean() - cfg_.target_entropy;
    report.alpha_loss = alpha_now * entropy_gap;
    grad_log_alpha = alpha_now * entropy_gap;
    alpha_opt.step(alpha_params(), cfg_.lr_alpha);
    report.alpha = alpha();

    nn::polyak_update(q1_target.body, q1.body, cfg_.tau);
    nn::polyak_update(q2_target.body, q2.body, cfg_.tau);
    q1_target.beta = nn::polyak_scalar(q1_target.beta, q1.beta, cfg_.tau);
    q2_target.beta = nn::polyak_scalar(q2_target.beta, q2.beta, cfg_.tau);
    return report;
}

std::vector<SacAgent::NamedArray> SacAgent::state_arrays()
{
    std::vector<NamedArray> out;
    auto add_params = [&](const std::vector<nn::ParamRef>& ps) {
        for (const auto& p : ps)
            out.push_back({p.name, {static_cast<std::size_t>(p.rows), static_cast<std::size_t>(p.cols)}, p.value,
                           static_cast<std::size_t>(p.size())});
    };
    auto add_opt = [&](const std::string& name, nn::Adam& opt, const std::vector<nn::ParamRef>& ps) {
        for (std::size_t i = 0; i < ps.size(); ++i) {
            auto& m = opt.first_moments()[i];
            auto& v = opt.second_moments()[i];
            const std::vector<std::size_t> shape{static_cast<std::size_t>(ps[i].rows),
                                                 static_cast<std::size_t>(ps[i].cols)};
            out.push_back({"opt." + name + ".m." + ps[i].name, shape, m.data(), static_cast<std::size_t>(m.size())});
            out.push_back({"opt." + name + ".v." + ps[i].name, shape, v.data(), static_cast<std::size_t>(v.size())});
        }
    };
    const auto pa = actor.params("actor");
    const auto p1 = q1.params("q1");
    const auto p2 = q2.params("q2");
    const auto pal = alpha_params();
    add_params(pa);
    add_params(p1);
    add_params(p2);
    add_params(q1_target.params("q1_target"));
    add_params(q2_target.params("q2_target"));
    add_params(pal);
    add_opt("actor", actor_opt, pa);
    add_opt("q1", q1_opt, p1);
    add_opt("q2", q2_opt, p2);
    add_opt("alpha", alpha_opt, pal);
    return out;
}

// --- Gradient verification ---

double relative_error(double analytic, double numeric, double floor)
{
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

double max_param_rel_error(const std::vector<nn::ParamRef>& params, const std::function<double()>& f, double step,
                           double floor)
{
    double worst = 0.0;
    for (const nn::ParamRef& p : params) {
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            const double saved = p.value[i];
            p.value[i] = saved + step;
            const double up = f();
            p.value[i] = saved - step;
            const double down = f();
            p.value[i] = saved;
            worst = std::max(worst, relative_error(p.grad[i], (up - down) / (2.0 * step), floor));
        }
    }
    return worst;
}

GradientCheckReport gradient_check(ActorNet& actor, CriticNet& critic, const nn::Matrix& obs, const nn::Matrix& action,
                                   std::uint64_t seed, double step, const RobotSpec& spec)
{
    Rng rng(seed);
    const int k = actor.components();
    const std::array<double, 2> scale{spec.v_max, spec.w_max};
    const Eigen::Index n = obs.cols();

    nn::Vector c_lp(n);
    nn::Matrix c_a(2, n);
    nn::Matrix c_q(1, n);
    for (Eigen::Index b = 0; b < n; ++b) {
        c_lp(b) = rng.uniform(-1.0, 1.0);
        c_a(0, b) = rng.uniform(-1.0, 1.0);
        c_a(1, b) = rng.uniform(-1.0, 1.0);
        c_q(0, b) = rng.uniform(-1.0, 1.0);
    }
    const MixtureNoise noise = draw_noise(actor.head(obs), k, rng);

    auto actor_objective = [&] {
        const SquashedSample s = squash_sample(actor.head(obs), k, noise, scale);
        return c_lp.dot(s.log_prob) + c_a.cwiseProduct(s.action).sum();
    };
    actor.zero_grad();
    nn::Mlp::Cache cache;
    const nn::Matrix head = actor.body.forward(actor.input(obs), &cache);
    const SquashedSample s = squash_sample(head, k, noise, scale);
    const nn::Matrix g_in = actor.body.backward(squash_backward(head, s, c_a, c_lp, scale), cache, true);
    actor.grad_beta += prior_beta_grad(cache.inputs.front(), g_in, actor.sectors());

    GradientCheckReport report;
    report.beta_actor_grad = actor.grad_beta;
    report.actor_max_rel_error = max_param_rel_error(actor.params("actor"), actor_objective, step);

    auto critic_objective = [&] { return c_q.cwiseProduct(critic.forward(obs, action)).sum(); };
    critic.zero_grad();
    nn::Mlp::Cache ccache;
    critic.forward(obs, action, &ccache);
    critic.backward(c_q, obs, ccache, true);
    report.beta_critic_grad = critic.grad_beta;
    report.critic_max_rel_error = max_param_rel_error(critic.params("critic"), critic_objective, step);
    return report;
}

} // namespace maernav
