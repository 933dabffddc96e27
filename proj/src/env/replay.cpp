#include "pig/env/replay.hpp"

#include <algorithm>
#include <stdexcept>

namespace pig::env {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t obs_dim, std::size_t priv_dim, std::size_t num_actions)
    : capacity_(capacity), obs_dim_(obs_dim), priv_dim_(priv_dim), num_actions_(num_actions) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
    obs_.resize(capacity * obs_dim);
    priv_.resize(capacity * priv_dim);
    reward_.resize(capacity);
    cost_.resize(capacity);
    action_.resize(capacity);
    first_.resize(capacity);
    terminal_.resize(capacity);
}

void ReplayBuffer::add(const Transition& s) {
    if (s.observation.size() != obs_dim_ || s.privileged.size() != priv_dim_)
        throw std::invalid_argument("transition dimensions do not match the buffer");
    if (s.prev_action >= static_cast<int>(num_actions_)) throw std::out_of_range("action out of range");
    std::size_t slot;
    if (size_ < capacity_) {
        slot = physical(size_);
        ++size_;
    } else {
        slot = head_;
        head_ = (head_ + 1) % capacity_;
    }
    std::copy(s.observation.begin(), s.observation.end(), obs_.begin() + static_cast<std::ptrdiff_t>(slot * obs_dim_));
    std::copy(s.privileged.begin(), s.privileged.end(), priv_.begin() + static_cast<std::ptrdiff_t>(slot * priv_dim_));
    action_[slot] = s.prev_action;
    reward_[slot] = s.reward;
    cost_[slot] = s.cost;
    first_[slot] = s.is_first;
    terminal_[slot] = s.is_terminal;
    ++total_added_;
}

Transition ReplayBuffer::at(std::size_t index) const {
    if (index >= size_) throw std::out_of_range("replay index out of range");
    const std::size_t p = physical(index);
    Transition t;
    t.observation.assign(obs_.begin() + static_cast<std::ptrdiff_t>(p * obs_dim_),
                         obs_.begin() + static_cast<std::ptrdiff_t>((p + 1) * obs_dim_));
    t.privileged.assign(priv_.begin() + static_cast<std::ptrdiff_t>(p * priv_dim_),
                        priv_.begin() + static_cast<std::ptrdiff_t>((p + 1) * priv_dim_));
    t.prev_action = action_[p];
    t.reward = reward_[p];
    t.cost = cost_[p];
    t.is_first = first_[p];
    t.is_terminal = terminal_[p];
    return t;
}

void ReplayBuffer::write_step(std::size_t slot, std::size_t t, std::size_t b, SequenceBatch& out) const {
    const std::size_t row = t * out.batch + b;
    std::copy_n(obs_.begin() + static_cast<std::ptrdiff_t>(slot * obs_dim_), obs_dim_,
                out.observation.begin() + static_cast<std::ptrdiff_t>(row * obs_dim_));
    std::copy_n(priv_.begin() + static_cast<std::ptrdiff_t>(slot * priv_dim_), priv_dim_,
                out.privileged.begin() + static_cast<std::ptrdiff_t>(row * priv_dim_));
    if (action_[slot] >= 0) out.prev_action[row * num_actions_ + static_cast<std::size_t>(action_[slot])] = 1.0;
    out.reward[row] = reward_[slot];
    out.cost[row] = cost_[slot];
    out.is_first[row] = first_[slot];
    out.is_terminal[row] = terminal_[slot];
}

std::optional<SequenceBatch> ReplayBuffer::sample(std::size_t B, std::size_t T, Rng& rng) const {
    if (B == 0 || T == 0) throw std::invalid_argument("batch and length must be positive");
    if (size_ < T) return std::nullopt;
    SequenceBatch out;
    out.batch = B;
    out.length = T;
    out.obs_dim = obs_dim_;
    out.priv_dim = priv_dim_;
    out.num_actions = num_actions_;
    out.observation.assign(T * B * obs_dim_, 0.0);
    out.privileged.assign(T * B * priv_dim_, 0.0);
    out.prev_action.assign(T * B * num_actions_, 0.0);
    out.reward.assign(T * B, 0.0);
    out.cost.assign(T * B, 0.0);
    out.is_first.assign(T * B, 0.0);
    out.is_terminal.assign(T * B, 0.0);
    const std::size_t windows = size_ - T + 1;
    for (std::size_t b = 0; b < B; ++b) {
        const std::size_t start = rng.index(windows);
        out.starts.push_back(start);
        for (std::size_t t = 0; t < T; ++t) write_step(physical(start + t), t, b, out);
    }
    return out;
}

namespace {

template <class T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void put_vec(std::ostream& out, const std::vector<T>& v, std::size_t n) {
    put<std::uint64_t>(out, n);
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("replay: truncated stream");
    return v;
}

template <class T>
void get_vec(std::istream& in, std::vector<T>& v, std::size_t expected) {
    const auto n = get<std::uint64_t>(in);
    if (n != expected || n > v.size()) throw std::runtime_error("replay: stored layout does not match this buffer");
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(T)));
    if (!in) throw std::runtime_error("replay: truncated stream");
    std::fill(v.begin() + static_cast<std::ptrdiff_t>(n), v.end(), T{});
}

} // namespace

void ReplayBuffer::save(std::ostream& out) const {
    for (std::uint64_t v : {capacity_, obs_dim_, priv_dim_, num_actions_, head_, size_, total_added_})
        put<std::uint64_t>(out, v);
    // Occupied slots are always the physical prefix [0, size).
    put_vec(out, obs_, size_ * obs_dim_);
    put_vec(out, priv_, size_ * priv_dim_);
    put_vec(out, reward_, size_);
    put_vec(out, cost_, size_);
    put_vec(out, action_, size_);
    put_vec(out, first_, size_);
    put_vec(out, terminal_, size_);
}

void ReplayBuffer::load(std::istream& in) {
    const auto cap = get<std::uint64_t>(in), od = get<std::uint64_t>(in), pd = get<std::uint64_t>(in),
               na = get<std::uint64_t>(in);
    if (cap != capacity_ || od != obs_dim_ || pd != priv_dim_ || na != num_actions_)
        throw std::runtime_error("replay: stored dimensions do not match this buffer");
    head_ = get<std::uint64_t>(in);
    size_ = get<std::uint64_t>(in);
    total_added_ = get<std::uint64_t>(in);
    if (size_ > capacity_ || head_ >= capacity_ || (size_ < capacity_ && head_ != 0))
        throw std::runtime_error("replay: inconsistent ring state");
    get_vec(in, obs_, size_ * obs_dim_);
    get_vec(in, priv_, size_ * priv_dim_);
    get_vec(in, reward_, size_);
    get_vec(in, cost_, size_);
    get_vec(in, action_, size_);
    get_vec(in, first_, size_);
    get_vec(in, terminal_, size_);
}

bool ReplayBuffer::operator==(const ReplayBuffer& o) const {
    if (size_ != o.size_ || capacity_ != o.capacity_ || total_added_ != o.total_added_) return false;
    for (std::size_t i = 0; i < size_; ++i) {
        const auto a = at(i), b = o.at(i);
        if (a.observation != b.observation || a.privileged != b.privileged || a.prev_action != b.prev_action ||
            a.reward != b.reward || a.cost != b.cost || a.is_first != b.is_first || a.is_terminal != b.is_terminal)
            return false;
    }
    return true;
}

} // namespace pig::env
