#include "maernav/replay.hpp"

#include <algorithm>
#include <sstream>

#include "maernav/error.hpp"
#include "maernav/textio.hpp"

namespace maernav {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t obs_dim)
    : capacity_(capacity), obs_dim_(obs_dim), stride_(2 * obs_dim + 4)
{
    if (capacity == 0)
        throw ConfigError("replay capacity must be positive");
    if (obs_dim < 4)
        throw ConfigError("observation dimension too small");
}

void ReplayBuffer::push(const Transition& t)
{
    if (t.obs.dim() != obs_dim_ || t.next_obs.dim() != obs_dim_)
        throw DomainError("transition observation dimension mismatch");
    if (cursor_ * stride_ == data_.size())
        data_.resize(data_.size() + stride_);
    double* p = data_.data() + cursor_ * stride_;
    t.obs.flatten_into({p, obs_dim_});
    p[obs_dim_] = t.action.v;
    p[obs_dim_ + 1] = t.action.w;
    p[obs_dim_ + 2] = t.reward;
    t.next_obs.flatten_into({p + obs_dim_ + 3, obs_dim_});
    p[stride_ - 1] = t.done ? 1.0 : 0.0;
    cursor_ = (cursor_ + 1) % capacity_;
    size_ = std::min(size_ + 1, capacity_);
}

namespace {

Transition decode(const double* p, std::size_t dim)
{
    Transition t;
    t.obs = Observation::from_flat({p, dim});
    t.action = {p[dim], p[dim + 1]};
    t.reward = p[dim + 2];
    t.next_obs = Observation::from_flat({p + dim + 3, dim});
    t.done = p[2 * dim + 3] != 0.0;
    return t;
}

} // namespace

Transition ReplayBuffer::at(std::size_t i) const
{
    if (i >= size_)
        throw DomainError("replay index out of range");
    const std::size_t oldest = size_ < capacity_ ? 0 : cursor_;
    return decode(slot((oldest + i) % capacity_), obs_dim_);
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, Rng& rng) const
{
    if (size_ == 0)
        throw StateError("cannot sample from an empty replay buffer");
    std::vector<std::size_t> idx(n);
    for (auto& i : idx)
        i = rng.index(size_);
    return idx;
}

std::vector<Transition> ReplayBuffer::sample_minibatch(std::size_t n, Rng& rng) const
{
    std::vector<Transition> out;
    out.reserve(n);
    for (std::size_t s : sample_indices(n, rng))
        out.push_back(decode(slot(s), obs_dim_));
    return out;
}

void ReplayBuffer::clear()
{
    data_.clear();
    size_ = 0;
    cursor_ = 0;
}

void ReplayBuffer::restore(std::vector<double> raw, std::size_t size, std::size_t cursor)
{
    if (size > capacity_ || cursor >= capacity_ || raw.size() != size * stride_ ||
        (size < capacity_ && cursor != size))
        throw Error(ErrorKind::Parse, "inconsistent replay buffer snapshot");
    data_ = std::move(raw);
    size_ = size;
    cursor_ = cursor;
}

// --- Mirror augmentation ---

Action negate_action(Action a)
{
    return {-a.v, -a.w};
}

MirrorReward mirror_reward(double d_cur, double d_next, const RewardConfig& cfg)
{
    if (d_next < cfg.epsilon_goal)
        return {cfg.success_reward, true};
    return {cfg.c1 * (d_cur - d_next), false};
}

std::vector<Transition> mirror_episode(const std::vector<PoseTransition>& episode, const Pose& start_pose,
                                       const RewardConfig& cfg)
{
    if (episode.empty())
        throw DomainError("cannot mirror an empty episode");
    if (!episode.back().done || episode.back().reward != cfg.success_reward)
        throw DomainError("only successful episodes can be mirrored");

    const Vec2 goal{start_pose.x, start_pose.y};
    std::vector<Transition> out;
    out.reserve(episode.size());
    for (auto it = episode.rbegin(); it != episode.rend(); ++it) {
        // Time reversal: the robot sits at p_{t+1} and the negated action carries it back to p_t.
        Transition m;
        m.obs = it->next_obs;
        const GoalPolar cur = relative_goal(it->next_pose, goal);
        m.obs.goal_d = cur.d;
        m.obs.goal_phi = cur.phi;

        m.next_obs = it->obs;
        const GoalPolar nxt = relative_goal(it->pose, goal);
        m.next_obs.goal_d = nxt.d;
        m.next_obs.goal_phi = nxt.phi;

        m.action = negate_action(it->action);
        const MirrorReward r = mirror_reward(cur.d, nxt.d, cfg);
        m.reward = r.reward;
        m.done = r.done;
        out.push_back(std::move(m));
    }
    return out;
}

std::size_t on_episode_end(bool success, ReplayBuffer& buffer, MirrorBuffer& mirror, const Pose& start_pose,
                           const RewardConfig& cfg)
{
    std::size_t added = 0;
    if (success && !mirror.empty()) {
        for (const Transition& t : mirror_episode(mirror.records(), start_pose, cfg)) {
            buffer.push(t);
            ++added;
        }
    }
    mirror.clear();
    return added;
}

// --- Dump format ---

namespace {

void put_csv(std::ostream& os, const std::vector<double>& v)
{
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            os << ',';
        os << textio::format_double(v[i]);
    }
}

std::vector<double> get_csv(std::string_view s, int line)
{
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t end = std::min(s.find(',', pos), s.size());
        double v = 0.0;
        if (!textio::parse_double(s.substr(pos, end - pos), v))
            throw ParseError(line, "bad number in record");
        out.push_back(v);
        pos = end + 1;
    }
    return out;
}

} // namespace

std::string dump_transitions(const std::vector<Transition>& records)
{
    std::ostringstream os;
    const std::size_t dim = records.empty() ? 0 : records.front().obs.dim();
    os << "# maer-nav transitions v1 obs_dim=" << dim << " count=" << records.size() << "\n";
    for (const Transition& t : records) {
        os << "obs=";
        put_csv(os, t.obs.flatten());
        os << " act=" << textio::format_double(t.action.v) << ',' << textio::format_double(t.action.w);
        os << " r=" << textio::format_double(t.reward) << " next=";
        put_csv(os, t.next_obs.flatten());
        os << " done=" << (t.done ? 1 : 0) << "\n";
    }
    return os.str();
}

std::string dump_buffer(const ReplayBuffer& buffer)
{
    std::vector<Transition> all;
    all.reserve(buffer.size());
    for (std::size_t i = 0; i < buffer.size(); ++i)
        all.push_back(buffer.at(i));
    return dump_transitions(all);
}

std::vector<Transition> parse_transition_dump(const std::string& text)
{
    std::vector<Transition> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1) {
            if (line.rfind("# maer-nav transitions v1", 0) != 0)
                throw ParseError(lineno, "not a transition dump (bad header)");
            header = true;
            continue;
        }
        if (textio::strip_comment(line).empty())
            continue;
        const auto tok = textio::split_ws(line);
        if (tok.size() != 5)
            throw ParseError(lineno, "expected 5 fields");
        auto field = [&](std::size_t i, std::string_view key) {
            if (tok[i].substr(0, key.size()) != key)
                throw ParseError(lineno, "expected field '" + std::string(key) + "'");
            return tok[i].substr(key.size());
        };
        Transition t;
        t.obs = Observation::from_flat(get_csv(field(0, "obs="), lineno));
        const auto act = get_csv(field(1, "act="), lineno);
        if (act.size() != 2)
            throw ParseError(lineno, "action needs two values");
        t.action = {act[0], act[1]};
        if (!textio::parse_double(field(2, "r="), t.reward))
            throw ParseError(lineno, "bad reward");
        t.next_obs = Observation::from_flat(get_csv(field(3, "next="), lineno));
        const auto done = field(4, "done=");
        if (done != "0" && done != "1")
            throw ParseError(lineno, "done must be 0 or 1");
        t.done = done == "1";
        out.push_back(std::move(t));
    }
    if (!header)
        throw ParseError(1, "empty transition dump");
    return out;
}

} // namespace maernav
