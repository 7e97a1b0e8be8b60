#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "raven/error.hpp"
#include "raven/lab.hpp"

namespace raven::lab {

namespace {

void normalize(std::vector<double>& p) {
  const double sum = std::accumulate(p.begin(), p.end(), 0.0);
  if (!(sum > 0.0)) throw Error("distribution has no mass");
  for (auto& v : p) v /= sum;
}

// Indices by descending probability, ascending id among equals.
std::vector<std::size_t> ranking(const std::vector<double>& p) {
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
  return order;
}

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::string DecodingConfig::label() const {
  std::ostringstream os;
  os << "k=" << (top_k ? std::to_string(*top_k) : std::string("inf")) << ";p=" << top_p
     << ";T=" << temperature << ";seed=" << seed;
  return os.str();
}

std::vector<double> apply_decoding(std::span<const double> dist, const DecodingConfig& cfg) {
  if (cfg.top_k && *cfg.top_k == 0) throw Error("top_k must be positive");
  if (!(cfg.top_p > 0.0) || cfg.top_p > 1.0) throw Error("top_p must lie in (0, 1]");
  if (!(cfg.temperature > 0.0)) throw Error("temperature must be positive");
  if (dist.empty()) throw Error("empty distribution");

  std::vector<double> p(dist.begin(), dist.end());

  if (cfg.temperature != 1.0) {
    // p^(1/T) in log space, shifted by the max for stability.
    double max_log = -INFINITY;
    for (double v : p)
      if (v > 0.0) max_log = std::max(max_log, std::log(v) / cfg.temperature);
    for (auto& v : p) v = v > 0.0 ? std::exp(std::log(v) / cfg.temperature - max_log) : 0.0;
    normalize(p);
  }

  if (cfg.top_k && *cfg.top_k < p.size()) {
    const auto order = ranking(p);
    for (std::size_t r = *cfg.top_k; r < order.size(); ++r) p[order[r]] = 0.0;
    normalize(p);
  }

  if (cfg.top_p < 1.0) {
    const auto order = ranking(p);
    double mass = 0.0;
    std::size_t keep = 0;
    while (keep < order.size()) {
      mass += p[order[keep++]];
      if (mass >= cfg.top_p - 1e-12) break;
    }
    for (std::size_t r = keep; r < order.size(); ++r) p[order[r]] = 0.0;
    normalize(p);
  }
  return p;
}

GenerationRecord sample_continuation(const NGramLM& lm, std::span<const TokenId> prompt,
                                     std::size_t length, const DecodingConfig& cfg) {
  if (length == 0) throw Error("continuation length must be at least 1");
  std::mt19937_64 rng(cfg.seed);
  TokenSeq text(prompt.begin(), prompt.end());
  text.reserve(prompt.size() + length);
  std::vector<double> dist;
  for (std::size_t step = 0; step < length; ++step) {
    lm.distribution(text, dist);
    const auto p = apply_decoding(dist, cfg);
    const double u = unit(rng);
    double cum = 0.0;
    std::size_t choice = p.size();
    std::size_t last_nonzero = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] <= 0.0) continue;
      last_nonzero = i;
      cum += p[i];
      if (u < cum) {
        choice = i;
        break;
      }
    }
    if (choice == p.size()) choice = last_nonzero;
    text.push_back(static_cast<TokenId>(choice));
  }
  GenerationRecord rec;
  rec.prompt.assign(prompt.begin(), prompt.end());
  rec.continuation.assign(text.begin() + static_cast<std::ptrdiff_t>(prompt.size()), text.end());
  return rec;
}

}  // namespace raven::lab
