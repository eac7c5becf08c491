#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace atlforge {

/// Dense bitset over the global states of one model. Sets of up to
/// 64 * kInline states live inline.
class StateSet {
 public:
  static constexpr std::size_t kInline = 4;

  StateSet() = default;
  explicit StateSet(std::size_t size, bool fill = false) : size_(size), nwords_((size + 63) / 64) {
    if (nwords_ > kInline) big_.assign(nwords_, 0);
    if (fill)
      for (std::size_t k = 0; k < nwords_; ++k) words()[k] = ~std::uint64_t{0};
    trim();
  }

  static StateSet full(std::size_t size) { return StateSet(size, true); }

  std::size_t size() const { return size_; }

  bool contains(std::size_t i) const { return (words()[i >> 6] >> (i & 63)) & 1U; }
  void insert(std::size_t i) { words()[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void erase(std::size_t i) { words()[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  void set(std::size_t i, bool v) { v ? insert(i) : erase(i); }

  std::size_t count() const {
    std::size_t n = 0;
    for (std::size_t k = 0; k < nwords_; ++k) n += static_cast<std::size_t>(std::popcount(words()[k]));
    return n;
  }
  bool empty() const {
    for (std::size_t k = 0; k < nwords_; ++k)
      if (words()[k]) return false;
    return true;
  }

  bool intersects(const StateSet& o) const {
    for (std::size_t k = 0; k < nwords_; ++k)
      if (words()[k] & o.words()[k]) return true;
    return false;
  }
  bool subset_of(const StateSet& o) const {
    for (std::size_t k = 0; k < nwords_; ++k)
      if (words()[k] & ~o.words()[k]) return false;
    return true;
  }

  StateSet& operator|=(const StateSet& o) {
    for (std::size_t k = 0; k < nwords_; ++k) words()[k] |= o.words()[k];
    return *this;
  }
  StateSet& operator&=(const StateSet& o) {
    for (std::size_t k = 0; k < nwords_; ++k) words()[k] &= o.words()[k];
    return *this;
  }
  StateSet complement() const {
    StateSet r = *this;
    for (std::size_t k = 0; k < nwords_; ++k) r.words()[k] = ~r.words()[k];
    r.trim();
    return r;
  }

  friend StateSet operator|(StateSet a, const StateSet& b) { return a |= b; }
  friend StateSet operator&(StateSet a, const StateSet& b) { return a &= b; }
  friend bool operator==(const StateSet&, const StateSet&) = default;

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t k = 0; k < nwords_; ++k) {
      auto w = words()[k];
      while (w) {
        f(k * 64 + static_cast<std::size_t>(std::countr_zero(w)));
        w &= w - 1;
      }
    }
  }

  std::vector<std::size_t> elements() const {
    std::vector<std::size_t> out;
    for_each([&](std::size_t i) { out.push_back(i); });
    return out;
  }

  /// "{0,2,3}"
  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for_each([&](std::size_t i) {
      if (!first) s += ',';
      s += std::to_string(i);
      first = false;
    });
    return s + "}";
  }

 private:
  std::uint64_t* words() { return nwords_ <= kInline ? small_ : big_.data(); }
  const std::uint64_t* words() const { return nwords_ <= kInline ? small_ : big_.data(); }

  void trim() {
    if (size_ % 64 != 0 && nwords_ > 0) words()[nwords_ - 1] &= (std::uint64_t{1} << (size_ % 64)) - 1;
  }

  std::size_t size_ = 0;
  std::size_t nwords_ = 0;
  std::uint64_t small_[kInline] = {};
  std::vector<std::uint64_t> big_;
};

}  // namespace atlforge
