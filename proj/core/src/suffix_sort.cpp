#include "raven/suffix_sort.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include "raven/error.hpp"

namespace raven {

namespace {

constexpr std::uint32_t kEmpty = std::numeric_limits<std::uint32_t>::max();

class TypeBits {
 public:
  explicit TypeBits(std::size_t n) : bits_(n) {}
  bool s_type(std::size_t i) const { return bits_[i]; }
  void set(std::size_t i, bool s) { bits_[i] = s; }
  bool lms(std::size_t i) const { return i > 0 && bits_[i] && !bits_[i - 1]; }

 private:
  std::vector<bool> bits_;
};

void bucket_bounds(std::span<const std::uint32_t> s, std::vector<std::uint32_t>& bkt, bool ends) {
  std::fill(bkt.begin(), bkt.end(), 0);
  for (auto c : s) ++bkt[c];
  std::uint32_t sum = 0;
  for (auto& b : bkt) {
    sum += b;
    b = ends ? sum : sum - b;
  }
}

void induce(std::span<const std::uint32_t> s, std::span<std::uint32_t> sa, const TypeBits& t,
            std::vector<std::uint32_t>& bkt) {
  const std::size_t n = s.size();
  bucket_bounds(s, bkt, false);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t p = sa[i];
    if (p == kEmpty || p == 0) continue;
    const std::uint32_t j = p - 1;
    if (!t.s_type(j)) sa[bkt[s[j]]++] = j;
  }
  bucket_bounds(s, bkt, true);
  for (std::size_t i = n; i-- > 0;) {
    const std::uint32_t p = sa[i];
    if (p == kEmpty || p == 0) continue;
    const std::uint32_t j = p - 1;
    if (t.s_type(j)) sa[--bkt[s[j]]] = j;
  }
}

void sais(std::span<const std::uint32_t> s, std::span<std::uint32_t> sa, std::uint32_t k) {
  const std::size_t n = s.size();
  if (n == 1) {
    sa[0] = 0;
    return;
  }

  TypeBits t(n);
  t.set(n - 1, true);
  for (std::size_t i = n - 1; i-- > 0;)
    t.set(i, s[i] < s[i + 1] || (s[i] == s[i + 1] && t.s_type(i + 1)));

  std::vector<std::uint32_t> bkt(k);

  // Stage 1: sort LMS substrings.
  bucket_bounds(s, bkt, true);
  std::fill(sa.begin(), sa.end(), kEmpty);
  for (std::size_t i = 1; i < n; ++i)
    if (t.lms(i)) sa[--bkt[s[i]]] = static_cast<std::uint32_t>(i);
  induce(s, sa, t, bkt);

  std::size_t n1 = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (t.lms(sa[i])) sa[n1++] = sa[i];

  // Name LMS substrings; names land in the upper half of sa indexed by pos/2.
  std::fill(sa.begin() + static_cast<std::ptrdiff_t>(n1), sa.end(), kEmpty);
  std::uint32_t name = 0;
  std::size_t prev = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < n1; ++i) {
    const std::size_t pos = sa[i];
    bool diff = false;
    for (std::size_t d = 0; d < n; ++d) {
      if (prev == std::numeric_limits<std::size_t>::max() || s[pos + d] != s[prev + d] ||
          t.s_type(pos + d) != t.s_type(prev + d)) {
        diff = true;
        break;
      }
      if (d > 0 && (t.lms(pos + d) || t.lms(prev + d))) break;
    }
    if (diff) {
      ++name;
      prev = pos;
    }
    sa[n1 + pos / 2] = name - 1;
  }
  for (std::size_t i = n, j = n; i-- > n1;)
    if (sa[i] != kEmpty) sa[--j] = sa[i];

  // Stage 2: sort the reduced problem, recursing when names collide.
  auto s1 = sa.subspan(n - n1, n1);
  auto sa1 = sa.subspan(0, n1);
  if (name < n1) {
    sais(s1, sa1, name);
  } else {
    for (std::size_t i = 0; i < n1; ++i) sa1[s1[i]] = static_cast<std::uint32_t>(i);
  }

  // Stage 3: induce the full suffix array from sorted LMS suffixes.
  for (std::size_t i = 1, j = 0; i < n; ++i)
    if (t.lms(i)) s1[j++] = static_cast<std::uint32_t>(i);
  for (std::size_t i = 0; i < n1; ++i) sa1[i] = s1[sa1[i]];
  std::fill(sa.begin() + static_cast<std::ptrdiff_t>(n1), sa.end(), kEmpty);
  bucket_bounds(s, bkt, true);
  for (std::size_t i = n1; i-- > 0;) {
    const std::uint32_t j = sa[i];
    sa[i] = kEmpty;
    sa[--bkt[s[j]]] = j;
  }
  induce(s, sa, t, bkt);
}

}  // namespace

void suffix_sort(std::span<const std::uint32_t> text, std::span<std::uint32_t> sa,
                 std::uint32_t alphabet_size) {
  if (text.empty()) throw Error("empty corpus");
  if (sa.size() != text.size()) throw Error("suffix array size mismatch");
  if (text.size() >= kEmpty) throw Error("text too long for 32-bit suffix array");
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] >= alphabet_size) throw Error("symbol outside alphabet");
    if (i + 1 < text.size() && text[i] <= text.back())
      throw Error("text must end with a unique smallest symbol");
  }
  sais(text, sa, alphabet_size);
}

}  // namespace raven
