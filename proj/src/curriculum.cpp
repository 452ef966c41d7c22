#include "maernav/curriculum.hpp"

#include <algorithm>
#include <sstream>

#include "maernav/error.hpp"

namespace maernav {

Curriculum::Curriculum(CurriculumConfig cfg) : cfg_(cfg)
{
    if (cfg_.rows < 1 || cfg_.cols < 1 || cfg_.window < 1)
        throw ConfigError("curriculum grid and window must be positive");
    const auto n = static_cast<std::size_t>(cfg_.rows * cfg_.cols);
    unlocked_.assign(n, false);
    windows_.assign(n, {});
    counts_.assign(n, 0);
    unlocked_[0] = true;
}

std::size_t Curriculum::index(EnvId e) const
{
    return static_cast<std::size_t>(e.row * cfg_.cols + e.col);
}

void Curriculum::check(EnvId e) const
{
    if (e.row < 0 || e.row >= cfg_.rows || e.col < 0 || e.col >= cfg_.cols)
        throw DomainError("environment outside the curriculum grid");
    if (!unlocked_[index(e)])
        throw DomainError("environment (" + std::to_string(e.row) + "," + std::to_string(e.col) + ") is locked");
}

bool Curriculum::unlocked(EnvId e) const
{
    if (e.row < 0 || e.row >= cfg_.rows || e.col < 0 || e.col >= cfg_.cols)
        return false;
    return unlocked_[index(e)];
}

std::vector<EnvId> Curriculum::unlocked_envs() const
{
    std::vector<EnvId> out;
    for (int r = 0; r < cfg_.rows; ++r)
        for (int c = 0; c < cfg_.cols; ++c)
            if (unlocked_[index({r, c})])
                out.push_back({r, c});
    return out;
}

double Curriculum::mean_success(EnvId e) const
{
    check(e);
    const auto& w = windows_[index(e)];
    if (w.empty())
        return 0.0;
    const auto hits = std::count(w.begin(), w.end(), true);
    return static_cast<double>(hits) / static_cast<double>(w.size());
}

std::vector<EnvId> Curriculum::record_outcome(EnvId e, bool success)
{
    check(e);
    auto& w = windows_[index(e)];
    w.push_back(success);
    if (static_cast<int>(w.size()) > cfg_.window)
        w.pop_front();
    ++counts_[index(e)];

    const auto open = unlocked_envs();
    for (EnvId u : open) {
        if (static_cast<int>(windows_[index(u)].size()) < cfg_.window)
            return {};
        if (!(mean_success(u) > cfg_.unlock_threshold))
            return {};
    }
    std::vector<EnvId> fresh;
    for (int r = 0; r < cfg_.rows; ++r) {
        for (int c = 0; c < cfg_.cols; ++c) {
            if (unlocked_[index({r, c})])
                continue;
            if (unlocked({r - 1, c}) || unlocked({r + 1, c}) || unlocked({r, c - 1}) || unlocked({r, c + 1}))
                fresh.push_back({r, c});
        }
    }
    for (EnvId f : fresh)
        unlocked_[index(f)] = true;
    return fresh;
}

std::vector<double> Curriculum::probabilities() const
{
    const auto open = unlocked_envs();
    std::vector<double> p(open.size());
    double total = 0.0;
    for (std::size_t i = 0; i < open.size(); ++i) {
        p[i] = 1.0 - mean_success(open[i]);
        total += p[i];
    }
    if (total <= 0.0) {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
        return p;
    }
    for (double& v : p)
        v /= total;
    return p;
}

EnvId Curriculum::sample_env(Rng& rng) const
{
    const auto open = unlocked_envs();
    const auto p = probabilities();
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0)
            continue;
        last_positive = i;
        acc += p[i];
        if (u < acc)
            return open[i];
    }
    return open[last_positive];
}

const std::deque<bool>& Curriculum::window(EnvId e) const
{
    check(e);
    return windows_[index(e)];
}

long long Curriculum::episodes(EnvId e) const
{
    check(e);
    return counts_[index(e)];
}

void Curriculum::unlock_all()
{
    std::fill(unlocked_.begin(), unlocked_.end(), true);
}

std::string Curriculum::serialize() const
{
    std::ostringstream os;
    os << "curriculum " << cfg_.rows << " " << cfg_.cols << " " << cfg_.window << " " << cfg_.unlock_threshold << "\n";
    for (std::size_t i = 0; i < unlocked_.size(); ++i) {
        os << (unlocked_[i] ? 1 : 0) << " " << counts_[i] << " ";
        for (bool b : windows_[i])
            os << (b ? '1' : '0');
        os << (windows_[i].empty() ? "-" : "") << "\n";
    }
    return os.str();
}

Curriculum Curriculum::deserialize(const std::string& text)
{
    std::istringstream in(text);
    std::string tag;
    CurriculumConfig cfg;
    in >> tag >> cfg.rows >> cfg.cols >> cfg.window >> cfg.unlock_threshold;
    if (tag != "curriculum" || in.fail())
        throw Error(ErrorKind::Parse, "corrupt curriculum state");
    Curriculum cur(cfg);
    for (std::size_t i = 0; i < cur.unlocked_.size(); ++i) {
        int flag = 0;
        std::string bits;
        in >> flag >> cur.counts_[i] >> bits;
        if (in.fail())
            throw Error(ErrorKind::Parse, "corrupt curriculum state");
        cur.unlocked_[i] = flag != 0;
        cur.windows_[i].clear();
        if (bits != "-")
            for (char ch : bits)
                cur.windows_[i].push_back(ch == '1');
    }
    return cur;
}

} // namespace maernav
