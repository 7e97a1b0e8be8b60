#include "raven/probes.hpp"

#include "raven/error.hpp"

namespace raven::probes {

namespace {

std::uint64_t occurrences(const SuffixIndex& index, std::string_view form) {
  const auto tokens = split_tokens(form);
  if (tokens.empty()) throw Error("empty form string");
  TokenSeq ids;
  for (const auto& t : tokens) {
    auto id = index.vocab().find(t);
    if (!id) return 0;
    ids.push_back(*id);
  }
  return index.count(ids);
}

}  // namespace

std::vector<ProbeResult> probe_forms(const SuffixIndex& index, std::span<const std::string> forms) {
  if (forms.empty()) throw Error("no forms to probe");
  std::vector<ProbeResult> out;
  out.reserve(forms.size());
  for (const auto& f : forms) {
    const auto n = occurrences(index, f);
    out.push_back({f, n > 0, n});
  }
  return out;
}

std::string pluralize(std::string_view singular) {
  if (singular.empty()) throw Error("cannot pluralize an empty word");
  const char last = singular.back();
  std::string plural(singular);
  plural += (last == 'j' || last == 's' || last == 'x' || last == 'z') ? "es" : "s";
  return plural;
}

std::vector<CvcPair> generate_cvc_candidates(const std::unordered_set<std::string>& exclusions) {
  std::vector<CvcPair> out;
  for (char c1 : kConsonants) {
    for (char v : kVowels) {
      for (char c2 : kConsonants) {
        std::string singular{c1, v, c2};
        std::string plural = pluralize(singular);
        if (exclusions.count(singular) || exclusions.count(plural)) continue;
        if (plural.ends_with("es") && exclusions.count(plural.substr(0, plural.size() - 1))) continue;
        out.push_back({std::move(singular), std::move(plural)});
      }
    }
  }
  return out;
}

const char* to_string(Presence p) {
  switch (p) {
    case Presence::BothPresent: return "both-present";
    case Presence::SingularOnly: return "singular-only";
    case Presence::PluralOnly: return "plural-only";
    case Presence::Neither: return "neither";
  }
  return "?";
}

std::vector<CvcResult> cvc_presence_report(const SuffixIndex& index, std::span<const CvcPair> pairs) {
  std::vector<CvcResult> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    CvcResult r;
    r.pair = p;
    r.singular_count = occurrences(index, p.singular);
    r.plural_count = occurrences(index, p.plural);
    const bool s = r.singular_count > 0, pl = r.plural_count > 0;
    r.presence = s && pl ? Presence::BothPresent
                 : s     ? Presence::SingularOnly
                 : pl    ? Presence::PluralOnly
                         : Presence::Neither;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace raven::probes
