#pragma once

#include "latmdp/rng.hpp"
#include "latmdp/types.hpp"

#include <cstdint>
#include <iostream>
#include <random>
#include <stdexcept>
#include <vector>

namespace latmdp {

/// FIFO experience buffer with seeded, reproducible sampling. Used both for
/// pixel transitions (representation learning reads a fixed dataset through
/// it) and for latent transitions during policy learning.
template <typename Record>
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed)
      : capacity_(capacity), seed_(seed), rng_(make_rng(seed, 0x7e91a7)) {
    if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  }

  void push(Record t) {
    if (entries_.size() < capacity_) {
      entries_.push_back(std::move(t));
    } else {
      entries_[next_] = std::move(t);  // FIFO eviction
      next_ = (next_ + 1) % capacity_;
    }
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Record& operator[](std::size_t i) const { return entries_[i]; }

  /// Restores the sampling stream to its initial state.
  void reseed() { rng_ = make_rng(seed_, 0x7e91a7); }
  void reseed(std::uint64_t seed) {
    seed_ = seed;
    reseed();
  }

  /// Samples n records; without replacement by default.
  std::vector<const Record*> sample_batch(std::size_t n, bool with_replacement = false) {
    if (entries_.size() < n)
      throw std::runtime_error("sample_batch: buffer holds " + std::to_string(entries_.size()) +
                               " < " + std::to_string(n) + " requested");
    std::vector<const Record*> out;
    out.reserve(n);
    if (with_replacement) {
      std::uniform_int_distribution<std::size_t> pick(0, entries_.size() - 1);
      for (std::size_t i = 0; i < n; ++i) out.push_back(&entries_[pick(rng_)]);
      return out;
    }
    // Partial Fisher-Yates over an index vector.
    std::vector<std::size_t> idx(entries_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng_)]);
      out.push_back(&entries_[idx[i]]);
    }
    return out;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::size_t capacity_;
  std::uint64_t seed_;
  std::vector<Record> entries_;
  std::size_t next_ = 0;  // FIFO cursor once full
  std::mt19937_64 rng_;
};

/// Draws one negative observation per batch element, uniformly from the whole
/// buffer, re-drawing while the draw is pixel-identical to the element's own
/// o_next. If the buffer is too uniform for a distinct draw (all observations
/// identical) a warning is emitted once and the last draw is returned anyway.
inline std::vector<const Observation*> sample_negatives(
    ReplayBuffer<Transition>& buffer, const std::vector<const Transition*>& batch) {
  if (buffer.size() <= batch.size())
    throw std::runtime_error("sample_negatives: buffer must hold more entries than the batch");
  constexpr int kMaxRedraws = 16;
  std::uniform_int_distribution<std::size_t> pick(0, buffer.size() - 1);
  std::vector<const Observation*> out;
  out.reserve(batch.size());
  bool warned = false;
  for (const Transition* t : batch) {
    const Observation* neg = nullptr;
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
      neg = &buffer[pick(buffer.rng())].o_next;
      if (*neg != t->o_next) break;
      neg = nullptr;
    }
    if (neg == nullptr) {
      if (!warned) {
        std::cerr << "warning: sample_negatives could not find a distinct negative; "
                     "buffer observations may be degenerate\n";
        warned = true;
      }
      neg = &buffer[pick(buffer.rng())].o_next;
    }
    out.push_back(neg);
  }
  return out;
}

}  // namespace latmdp
