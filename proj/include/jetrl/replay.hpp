#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "jetrl/errors.hpp"
#include "jetrl/sim.hpp"

namespace jetrl {

struct Transition {
    Observation obs{};
    std::uint8_t action = 0;
    float reward = 0.0f;
    Observation next_obs{};
    bool terminal = false;

    friend bool operator==(const Transition&, const Transition&) = default;
};

/// Fixed-capacity ring of transitions with uniform, with-replacement sampling.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity = 500'000) : capacity_(capacity) {
        if (capacity == 0) {
            throw ConfigError("replay capacity must be positive", "train.buffer_capacity");
        }
    }

    void push(const Transition& t) {
        if (t.action >= action_count) {
            throw UsageError("transition action out of range");
        }
        if (storage_.size() < capacity_) {
            storage_.push_back(t);
        } else {
            storage_[cursor_] = t;
        }
        cursor_ = (cursor_ + 1) % capacity_;
    }

    std::size_t size() const { return storage_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool ready(std::size_t batch_size) const { return batch_size > 0 && size() >= batch_size; }

    /// i-th oldest surviving transition.
    const Transition& at(std::size_t i) const {
        if (i >= size()) {
            throw UsageError("replay index out of range");
        }
        const std::size_t oldest = size() < capacity_ ? 0 : cursor_;
        return storage_[(oldest + i) % capacity_];
    }

    /// Uniform indices in [0, size()); drawn by rejection so every slot is equally likely.
    std::vector<std::size_t> sample_indices(std::size_t batch_size, std::mt19937_64& rng) const {
        std::vector<std::size_t> idx(batch_size);
        const std::uint64_t n = size();
        const std::uint64_t rem = (UINT64_MAX % n + 1) % n; // 2^64 mod n
        const std::uint64_t max_accept = UINT64_MAX - rem;
        for (auto& i : idx) {
            std::uint64_t r = rng();
            while (r > max_accept) {
                r = rng();
            }
            i = static_cast<std::size_t>(r % n);
        }
        return idx;
    }

    /// Empty optional when fewer than `batch_size` transitions are stored.
    std::optional<std::vector<Transition>> sample(std::size_t batch_size, std::mt19937_64& rng) const {
        if (!ready(batch_size)) {
            return std::nullopt;
        }
        std::vector<Transition> batch;
        batch.reserve(batch_size);
        for (std::size_t i : sample_indices(batch_size, rng)) {
            batch.push_back(storage_[i]);
        }
        return batch;
    }

  private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;
    std::vector<Transition> storage_;
};

} // namespace jetrl
