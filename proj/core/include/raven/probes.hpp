#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "raven/index.hpp"

namespace raven::probes {

struct ProbeResult {
  std::string form;
  bool present = false;
  std::uint64_t count = 0;
};

// Exact-token lookup of each form in the training index. Forms with several
// whitespace-separated tokens are looked up as n-grams.
std::vector<ProbeResult> probe_forms(const SuffixIndex& index, std::span<const std::string> forms);

struct CvcPair {
  std::string singular;
  std::string plural;
};

inline constexpr std::string_view kVowels = "aeiou";
// Every letter except the vowels and y.
inline constexpr std::string_view kConsonants = "bcdfghjklmnpqrstvwxz";

// -es after j, s, x or z; -s otherwise. No consonant doubling.
std::string pluralize(std::string_view singular);

// All consonant-vowel-consonant nonce words with their plurals, minus pairs
// where either form is in `exclusions`, or where an -es plural with only the
// final s removed is in `exclusions`.
std::vector<CvcPair> generate_cvc_candidates(const std::unordered_set<std::string>& exclusions = {});

enum class Presence { BothPresent, SingularOnly, PluralOnly, Neither };

const char* to_string(Presence p);

struct CvcResult {
  CvcPair pair;
  std::uint64_t singular_count = 0;
  std::uint64_t plural_count = 0;
  Presence presence = Presence::Neither;
};

std::vector<CvcResult> cvc_presence_report(const SuffixIndex& index, std::span<const CvcPair> pairs);

}  // namespace raven::probes
