#pragma once

#include <deque>
#include <ostream>
#include <unordered_map>

#include "fgsfrql/net.hpp"
#include "fgsfrql/rng.hpp"
#include "fgsfrql/types.hpp"

namespace fgsfrql {

// Bounded FIFO transition store with uniform sampling plus pivot-conditional
// retrieval: every stored transition is indexed by its (s, a) pivot key so a
// batch of same-origin transitions can be fetched for averaged updates.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity = 200000) : capacity_(capacity) {
    if (capacity_ == 0) throw ConfigError("replay capacity must be positive");
  }

  size_t size() const { return storage_.size(); }
  size_t capacity() const { return capacity_; }

  const Transition& at(size_t idx) const { return storage_[idx]; }

  void push(Transition t) {
    if (storage_.size() == capacity_) {
      auto it = index_.find(storage_.front().pivot_key);
      it->second.pop_front();  // oldest entry of that key is the evicted one
      if (it->second.empty()) index_.erase(it);
      storage_.pop_front();
      ++base_seq_;
    }
    index_[t.pivot_key].push_back(base_seq_ + storage_.size());
    storage_.push_back(std::move(t));
  }

  // Uniform with replacement.
  std::vector<Transition> sample(size_t batch_size, Rng& rng) const {
    if (storage_.empty()) throw UsageError("replay sample: empty buffer");
    std::vector<Transition> out;
    out.reserve(batch_size);
    for (size_t i = 0; i < batch_size; ++i)
      out.push_back(storage_[static_cast<size_t>(rng.uniform_int(static_cast<int>(storage_.size())))]);
    return out;
  }

  const Transition& sample_one(Rng& rng) const {
    if (storage_.empty()) throw UsageError("replay sample: empty buffer");
    return storage_[static_cast<size_t>(rng.uniform_int(static_cast<int>(storage_.size())))];
  }

  size_t pivot_bucket_size(const std::string& key) const {
    auto it = index_.find(key);
    return it == index_.end() ? 0 : it->second.size();
  }

  // Positions (0 = oldest) of stored transitions sharing the key.
  std::vector<size_t> pivot_positions(const std::string& key) const {
    std::vector<size_t> out;
    auto it = index_.find(key);
    if (it == index_.end()) return out;
    out.reserve(it->second.size());
    for (uint64_t seq : it->second) out.push_back(static_cast<size_t>(seq - base_seq_));
    return out;
  }

  // n distinct transitions sharing the key, or an empty result when the
  // bucket holds fewer than n; the caller skips the update in that case.
  std::vector<Transition> sample_pivot_batch(const std::string& key, size_t n, Rng& rng) const {
    if (n < 1) throw UsageError("sample_pivot_batch: n must be at least 1");
    std::vector<Transition> out;
    auto it = index_.find(key);
    if (it == index_.end() || it->second.size() < n) return out;
    // partial Fisher-Yates over the bucket positions
    std::vector<uint64_t> seqs(it->second.begin(), it->second.end());
    for (size_t i = 0; i < n; ++i) {
      const size_t j = i + static_cast<size_t>(rng.uniform_int(static_cast<int>(seqs.size() - i)));
      std::swap(seqs[i], seqs[j]);
      out.push_back(storage_[static_cast<size_t>(seqs[i] - base_seq_)]);
    }
    return out;
  }

  // Binary dump for post-hoc analysis; encoding matches the checkpoint
  // conventions (little-endian u32 lengths, f64 payloads).
  void dump(std::ostream& os) const {
    detail::put_u32(os, static_cast<uint32_t>(storage_.size()));
    for (const Transition& t : storage_) {
      auto put_vec = [&os](const Vec& v) {
        detail::put_u32(os, static_cast<uint32_t>(v.size()));
        for (double d : v) detail::put_f64(os, d);
      };
      put_vec(t.s);
      detail::put_u32(os, static_cast<uint32_t>(t.a));
      detail::put_f64(os, t.r);
      put_vec(t.s_next);
      put_vec(t.features);
      detail::put_u32(os, t.terminal ? 1u : 0u);
      detail::put_u32(os, static_cast<uint32_t>(t.task_id));
      detail::put_u32(os, static_cast<uint32_t>(t.pivot_key.size()));
      os.write(t.pivot_key.data(), static_cast<std::streamsize>(t.pivot_key.size()));
    }
  }

  static std::vector<Transition> load_dump(std::istream& is) {
    const uint32_t n = detail::get_u32(is);
    std::vector<Transition> out;
    out.reserve(n);
    for (uint32_t i = 0; i < n; ++i) {
      auto get_vec = [&is]() {
        Vec v(detail::get_u32(is));
        for (double& d : v) d = detail::get_f64(is);
        return v;
      };
      Transition t;
      t.s = get_vec();
      t.a = static_cast<int>(detail::get_u32(is));
      t.r = detail::get_f64(is);
      t.s_next = get_vec();
      t.features = get_vec();
      t.terminal = detail::get_u32(is) != 0;
      t.task_id = static_cast<int>(detail::get_u32(is));
      std::string key(detail::get_u32(is), '\0');
      is.read(key.data(), static_cast<std::streamsize>(key.size()));
      if (!is) throw UsageError("replay dump: truncated");
      t.pivot_key = std::move(key);
      out.push_back(std::move(t));
    }
    return out;
  }

 private:
  size_t capacity_;
  std::deque<Transition> storage_;
  uint64_t base_seq_ = 0;
  std::unordered_map<std::string, std::deque<uint64_t>> index_;
};

}  // namespace fgsfrql
